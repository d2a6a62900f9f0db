use reparam_core::backgrounds::ansatz_accel;
use reparam_core::dynamics::{integrate, DriftPolicy, IntegrateOptions, State, Trajectory};

use crate::config::{Format, SceneConfig};
use crate::output::{open_sink, write_trajectory};
use crate::report::RunReport;
use crate::scene::{self, Dynamics};
use crate::CliError;

/// Largest `|a|` with NaN poisoning the result.
pub(crate) fn nan_max(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| {
        if x.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(x.abs())
        }
    })
}

pub fn run(cfg: &SceneConfig, report: &mut RunReport) -> Result<Option<CliError>, CliError> {
    let d = scene::dynamics(cfg)?;
    let s0 = scene::initial_state(cfg, d.preset.dim)?;
    let opts = IntegrateOptions::new(cfg.integrate.step, cfg.integrate.n_steps).with_drift_policy(
        if cfg.integrate.renormalize {
            DriftPolicy::Renormalize
        } else {
            DriftPolicy::Off
        },
    );
    let (traj, failure) =
        match precheck(&d, &s0).and_then(|_| integrate(&d.lagrangian, &d.gauge, &s0, &opts)) {
            Ok(mut t) => {
                let f = t.termination.take().map(CliError::Numeric);
                (t, f)
            }
            Err(e) => (
                Trajectory {
                    gauge: d.gauge.name(),
                    samples: vec![],
                    monitors: vec![],
                    termination: None,
                },
                Some(CliError::Numeric(e)),
            ),
        };

    let mut sink = open_sink(cfg.output.path.as_deref())?;
    write_trajectory(
        &mut *sink,
        &traj,
        cfg.output.format.unwrap_or(Format::Jsonl),
        cfg.output.emit_monitors,
    )?;

    report.value("samples", traj.samples.len() as f64);
    if let Some(last) = traj.samples.last() {
        report.value("tau_end", last.tau);
    }
    if traj.samples.is_empty() {
        return Ok(failure);
    }
    if cfg.lagrangian.expected_degree == 1.0 {
        let h = nan_max(
            traj.monitors
                .iter()
                .map(|m| m.hamiltonian / (1.0 + m.lagrangian.abs())),
        );
        report.check("max_rel_hamiltonian", h, 1e-10);
    }
    report.check(
        "max_abs_drift",
        nan_max(traj.monitors.iter().map(|m| m.drift)),
        cfg.integrate.drift_tol,
    );
    let charged_mass =
        d.lagrangian.canonical_term(1).is_some() && d.lagrangian.canonical_term(2).is_some();
    if d.preset.name == "uniform_em" && charged_mass {
        report.check("cyclotron_radius_error", cyclotron_error(&d, &traj)?, 1e-8);
    }
    Ok(failure)
}

// The closed-form S_n acceleration divides by the radial speed; evaluating it
// first names the failure instead of reporting a singular system.
fn precheck(d: &Dynamics, s0: &State) -> reparam_core::Result<()> {
    if d.preset.name == "sn_ansatz" {
        if let (Some(p), Some(s)) = (&d.preset.profiles, &d.preset.higher) {
            ansatz_accel(s.rank(), p, s0.v[0], s0.v[1], s0.x[1])?;
        }
    }
    Ok(())
}

/// Largest deviation of the projected orbit from the circle fixed by the
/// initial state: radius `m |u⊥| / |qB|` about the guiding centre.
fn cyclotron_error(d: &Dynamics, t: &Trajectory) -> Result<f64, CliError> {
    let b = d
        .param("B")
        .ok_or_else(|| CliError::Config("uniform_em needs `B`".into()))?;
    let q = d
        .lagrangian
        .canonical_term(1)
        .map_or(0.0, |(_, c)| c.weight());
    let m = d
        .lagrangian
        .canonical_term(2)
        .map_or(0.0, |(_, c)| c.weight());
    let s0 = &t.samples[0];
    let v = &s0.v;
    let norm = (v[0] * v[0] - v[1] * v[1] - v[2] * v[2] - v[3] * v[3]).sqrt();
    let (ux, uy) = (v[1] / norm, v[2] / norm);
    let k = m / (q * b);
    let radius = k.abs() * (ux * ux + uy * uy).sqrt();
    let centre = [s0.x[1] - k * uy, s0.x[2] + k * ux];
    Ok(nan_max(t.samples.iter().map(|s| {
        ((s.x[1] - centre[0]).powi(2) + (s.x[2] - centre[1]).powi(2)).sqrt() - radius
    })))
}
