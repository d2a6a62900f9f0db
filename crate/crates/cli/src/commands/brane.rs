//! Worldsheet action, Cauchy–Binet residual and diffeomorphism invariance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reparam_core::brane::{
    brane_action, diffeo_test, full_contraction, induced_metric, jacobian_minors, Reparametrization,
};
use reparam_core::{Error, TensorField};

use super::simulate::nan_max;
use crate::config::SceneConfig;
use crate::report::RunReport;
use crate::scene;
use crate::CliError;

const ACTION_TOL: f64 = 1e-10;
const CAUCHY_BINET_TOL: f64 = 1e-8;
const DIFFEO_TOL: f64 = 1e-6;

/// `σ ↦ σ + σ(1−σ)k` stays increasing on `[0, 1]` for `|k| < 1`; the
/// σ-coefficient is allowed to depend on τ, which keeps the map triangular.
fn random_diffeo(rng: &mut ChaCha8Rng) -> Reparametrization {
    let a: f64 = rng.gen_range(-0.8..0.8);
    let b: f64 = rng.gen_range(-0.5..0.5);
    let c: f64 = rng.gen_range(-0.4..0.4);
    Reparametrization::new(2, move |z| {
        let t = &z[0] + (&z[0] * (1.0 - &z[0])) * a;
        let k = (&z[0] * c) + b;
        let s = &z[1] + (&z[1] * (1.0 - &z[1])) * k;
        vec![t, s]
    })
}

fn metric_matrix(g: &TensorField, x: &[f64]) -> Result<Vec<f64>, Error> {
    g.eval(x)?.to_matrix()
}

pub fn run(
    cfg: &SceneConfig,
    seed: u64,
    report: &mut RunReport,
) -> Result<Option<CliError>, CliError> {
    let b = cfg
        .brane
        .as_ref()
        .ok_or_else(|| CliError::Config("scene has no [brane] section".into()))?;
    let p = scene::preset(&cfg.target)?;
    let e = scene::embedding(b)?;
    let bl = scene::brane_lagrangian(b, &p)?;
    let g = p.metric.clone().expect("checked by brane_lagrangian");
    let q = scene::brane_quadrature(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let action = match brane_action(&e, &bl, &q) {
        Ok(a) => a,
        Err(err) => return Ok(Some(CliError::Numeric(err))),
    };
    report.value("action", action.value);
    report.value("action_panels", action.panels as f64);
    if let Some(exact) = scene::area_oracle(b) {
        report.value("action_exact", exact);
        let tol = ACTION_TOL.max(q.tol * exact.abs());
        report.check("action_error", (action.value - exact).abs(), tol);
    }

    // det h from the minors against det h computed directly
    let mut cb = Vec::with_capacity(b.cb_points);
    for _ in 0..b.cb_points {
        let z = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let r = (|| -> Result<f64, Error> {
            let minors = jacobian_minors(&e, &z)?;
            let gm = metric_matrix(&g, &minors.point)?;
            let via_minors = full_contraction(&minors, &gm, 4, 2) / 2.0;
            let det = induced_metric(&e, &g, &z)?.det;
            Ok((via_minors - det).abs() / det.abs().max(1e-3))
        })();
        match r {
            Ok(v) => cb.push(v),
            Err(err) => return Ok(Some(CliError::Numeric(err))),
        }
    }
    if !cb.is_empty() {
        report.check("cauchy_binet_residual", nan_max(cb), CAUCHY_BINET_TOL);
    }

    let mut diffs = Vec::with_capacity(b.zetas);
    for _ in 0..b.zetas {
        match diffeo_test(&e, &bl, &random_diffeo(&mut rng), &q) {
            Ok(r) => diffs.push(r.rel_diff),
            Err(err) => return Ok(Some(CliError::Numeric(err))),
        }
    }
    if !diffs.is_empty() {
        report.check("diffeo_rel_diff", nan_max(diffs), DIFFEO_TOL);
    }
    Ok(None)
}
