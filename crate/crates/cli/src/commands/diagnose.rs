//! Identity battery at seeded random states: Euler homogeneity, the
//! energy function, Hessian degeneracy and source-tensor consistency.

use reparam_core::lagrangian::packed_indices;
use reparam_core::tensor::multiplicity;
use reparam_core::{Lagrangian, Term};

use super::simulate::nan_max;
use crate::config::SceneConfig;
use crate::report::RunReport;
use crate::sampling::sample_states;
use crate::scene;
use crate::CliError;

const IDENTITY_TOL: f64 = 1e-10;
const DEGENERACY_TOL: f64 = 1e-9;

pub fn run(
    cfg: &SceneConfig,
    seed: u64,
    report: &mut RunReport,
) -> Result<Option<CliError>, CliError> {
    let p = scene::preset(&cfg.target)?;
    let l = scene::lagrangian(&p, &cfg.lagrangian)?;
    let states = sample_states(&p, &l, cfg.diagnose.n_states, seed)?;
    let k = cfg.lagrangian.expected_degree;
    report.value("n_states", states.len() as f64);

    let mut deg_err = Vec::new();
    let mut energy_err = Vec::new();
    let mut null_dir = Vec::new();
    let mut det_scaled = Vec::new();
    let mut source_err = Vec::new();
    for s in &states {
        let (x, v) = (&s.x, &s.v);
        deg_err.push(l.homogeneity_degree(x, v).map_or(f64::NAN, |d| d - k));
        energy_err.push(match (l.eval(x, v), l.hamiltonian(x, v)) {
            (Ok(lv), Ok(h)) => (h - (k - 1.0) * lv) / (1.0 + lv.abs()),
            _ => f64::NAN,
        });
        match l.v_hessian(x, v) {
            Ok((_, r)) => {
                null_dir.push(r.relative_residual);
                det_scaled.push(r.determinant / r.norm.powi(l.dim() as i32));
            }
            Err(_) => {
                null_dir.push(f64::NAN);
                det_scaled.push(f64::NAN);
            }
        }
        if l.power() == 1.0 {
            source_err.push(source_consistency(&l, x, v));
        }
    }
    report.check("homogeneity_degree", nan_max(deg_err), IDENTITY_TOL);
    report.check("energy_function", nan_max(energy_err), IDENTITY_TOL);
    if k == 1.0 {
        report.check("hessian_null_direction", nan_max(null_dir), DEGENERACY_TOL);
        report.check("hessian_det_scaled", nan_max(det_scaled), DEGENERACY_TOL);
    } else {
        report.value("hessian_null_direction", nan_max(null_dir));
        report.value("hessian_det_scaled", nan_max(det_scaled));
    }
    if !source_err.is_empty() {
        report.check(
            "source_tensor_consistency",
            nan_max(source_err),
            IDENTITY_TOL,
        );
    }
    Ok(None)
}

// Σ over ordered tuples of T·S equals L_term / n for every rooted term.
fn source_consistency(l: &Lagrangian, x: &[f64], v: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for term in l.terms() {
        let Term::Canonical(c) = term else { continue };
        let n = c.order();
        let (Ok(t), Ok(s), Ok(lt)) = (c.source_tensor(x, v), c.field().eval(x), c.eval(x, v))
        else {
            return f64::NAN;
        };
        let pairing: f64 = packed_indices(n, c.dim())
            .zip(t.packed().iter().zip(s.packed()))
            .map(|(idx, (a, b))| multiplicity(&idx) as f64 * a * b)
            .sum();
        let expect = lt / n as f64;
        worst = worst.max((pairing - expect).abs() / (1.0 + expect.abs()));
    }
    worst
}
