//! One scene evaluation per swept value, distributed over a rayon pool and
//! reassembled in input order.

use rayon::prelude::*;

use reparam_core::dynamics::{
    assemble_eom, integrate, loglog_slope, GaugeChoice, IntegrateOptions, State,
};
use reparam_core::{contract_full, Error};

use crate::config::{Format, Observable, SceneConfig, SweepConfig, SweepVariable};
use crate::output::{open_sink, write_table};
use crate::report::RunReport;
use crate::scene;
use crate::CliError;

fn variable_name(v: SweepVariable) -> &'static str {
    match v {
        SweepVariable::V0 => "v0",
        SweepVariable::Step => "step",
        SweepVariable::N => "n",
        SweepVariable::Delta => "delta",
    }
}

fn observable_name(o: Observable) -> &'static str {
    match o {
        Observable::RadialAccel => "radial_accel",
        Observable::GaugeDifference => "gauge_difference",
        Observable::StepError => "step_error",
    }
}

/// The scene with the swept value substituted.
fn substitute(cfg: &SceneConfig, sw: &SweepConfig, value: f64) -> Result<SceneConfig, CliError> {
    let mut c = cfg.clone();
    match sw.variable {
        SweepVariable::V0 => {
            let init = c
                .initial
                .as_mut()
                .ok_or_else(|| CliError::Config("v0 sweep needs [initial]".into()))?;
            let slot = init.v0.get_mut(sw.component).ok_or_else(|| {
                CliError::Config(format!("[sweep] component {} out of range", sw.component))
            })?;
            *slot = value;
        }
        SweepVariable::Step => c.integrate.step = value,
        SweepVariable::N => {
            if value.fract() != 0.0 {
                return Err(CliError::Config(format!(
                    "[sweep] order {value} is not an integer"
                )));
            }
            c.target = c.target.with("n", value);
        }
        SweepVariable::Delta => c.target = c.target.with("delta", value),
    }
    Ok(c)
}

/// Sets the time component so that `g(v, v) = 1`, keeping the others.
fn unit_time_component(g: &reparam_core::TensorField, s: &mut State) -> Result<(), Error> {
    let gm = g.eval(&s.x)?.to_matrix()?;
    let m = s.v.len();
    let (a, mut b, mut c) = (gm[0], 0.0, -1.0);
    for i in 1..m {
        b += 2.0 * gm[i] * s.v[i];
        for j in 1..m {
            c += gm[i * m + j] * s.v[i] * s.v[j];
        }
    }
    let disc = b * b - 4.0 * a * c;
    if !(disc >= 0.0 && a != 0.0) {
        return Err(Error::SignDomain {
            order: 2,
            radicand: disc,
        });
    }
    s.v[0] = (-b + disc.sqrt()) / (2.0 * a);
    debug_assert!((contract_full(&g.eval(&s.x)?, &s.v)? - 1.0).abs() < 1e-9);
    Ok(())
}

/// Returns the value written in the variable column and the observable.
fn evaluate(cfg: &SceneConfig, sw: &SweepConfig, value: f64) -> Result<(f64, f64), CliError> {
    let c = substitute(cfg, sw, value)?;
    let d = scene::dynamics(&c)?;
    let mut s0 = scene::initial_state(&c, d.preset.dim)?;
    Ok(match sw.observable {
        Observable::RadialAccel => {
            let a = assemble_eom(&d.lagrangian, &d.gauge, &s0)?;
            (value, a[1].abs())
        }
        Observable::GaugeDifference => {
            if let Some(g) = d.lagrangian.metric_field() {
                unit_time_component(g, &mut s0)?;
            }
            // spatial part of the acceleration difference, as in the core scan
            let a = assemble_eom(&d.lagrangian, &GaugeChoice::LagrangianConst, &s0)?;
            let b = assemble_eom(&d.lagrangian, &GaugeChoice::ProperTime, &s0)?;
            let diff = a[1..]
                .iter()
                .zip(&b[1..])
                .map(|(p, q)| (p - q).powi(2))
                .sum::<f64>()
                .sqrt();
            (value, diff)
        }
        Observable::StepError => {
            // whole number of steps to tau_end; the effective step is reported
            let n = (sw.tau_end / value).round().max(1.0) as usize;
            let h = sw.tau_end / n as f64;
            let end = |h: f64, n: usize| -> Result<Vec<f64>, CliError> {
                let t = integrate(&d.lagrangian, &d.gauge, &s0, &IntegrateOptions::new(h, n))?;
                match t.termination {
                    Some(e) => Err(e.into()),
                    None => Ok(t.last().x.clone()),
                }
            };
            let (coarse, fine) = (end(h, n)?, end(h / 2.0, 2 * n)?);
            let err = coarse
                .iter()
                .zip(&fine)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            (h, err)
        }
    })
}

pub fn run(cfg: &SceneConfig, report: &mut RunReport) -> Result<Option<CliError>, CliError> {
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("scene has no [sweep] section".into()))?;
    // configuration problems surface once, before any worker starts
    substitute(cfg, sw, sw.values[0]).and_then(|c| scene::dynamics(&c))?;
    let results: Vec<Result<(f64, f64), CliError>> = sw
        .values
        .par_iter()
        .map(|&v| evaluate(cfg, sw, v))
        .collect();

    let mut failure = None;
    let mut points = Vec::with_capacity(results.len());
    for (r, &v) in results.into_iter().zip(&sw.values) {
        match r {
            Ok(p) => points.push(p),
            Err(CliError::Numeric(e)) => {
                failure.get_or_insert(CliError::Numeric(e));
                points.push((v, f64::NAN));
            }
            Err(other) => return Err(other),
        }
    }
    let slope = if sw.geometric && failure.is_none() {
        let xs: Vec<f64> = points.iter().map(|p| p.0.abs()).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        match loglog_slope(&xs, &ys) {
            Ok(s) => Some(s),
            Err(e) => {
                failure = Some(CliError::Numeric(e));
                None
            }
        }
    } else {
        None
    };

    let mut columns = vec![
        "index",
        variable_name(sw.variable),
        observable_name(sw.observable),
    ];
    if sw.geometric {
        columns.push("loglog_slope");
    }
    let rows: Vec<Vec<f64>> = points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let mut row = vec![i as f64, x, y];
            if sw.geometric {
                row.push(slope.unwrap_or(f64::NAN));
            }
            row
        })
        .collect();
    let mut sink = open_sink(cfg.output.path.as_deref())?;
    write_table(
        &mut *sink,
        &columns,
        &rows,
        cfg.output.format.unwrap_or(Format::Csv),
    )?;

    report.value("points", rows.len() as f64);
    if let Some(s) = slope {
        report.value("loglog_slope", s);
        if let Some(expect) = sw.expected_slope {
            report.check("slope_error", (s - expect).abs(), sw.slope_tol);
        }
    }
    Ok(failure)
}
