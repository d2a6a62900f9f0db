use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::lagrangian::{norm, Lagrangian};
use crate::tensor::pack_index;

use super::{assemble_eom, GaugeChoice, Trajectory};

/// Levi-Civita coefficients `Γ^α_{βγ} = ½ g^{αρ}(g_{ρβ,γ} + g_{ργ,β} − g_{βγ,ρ})`,
/// flattened as `[α][β][γ]`.
pub fn christoffel(g: &TensorField, x: &[f64]) -> Result<Vec<f64>> {
    if g.rank() != 2 {
        return Err(Error::InvalidArgument(
            "christoffel needs a rank-2 field".into(),
        ));
    }
    let m = g.dim();
    let gj = g.eval_with_derivatives(x)?;
    let comp = |a: usize, b: usize| -> Result<usize> { pack_index(&[a.min(b), a.max(b)], m) };
    let mut gmat = DMatrix::zeros(m, m);
    // dg[(a*m + b)*m + c] = ∂_c g_ab
    let mut dg = vec![0.0; m * m * m];
    for a in 0..m {
        for b in 0..m {
            let j = &gj.packed()[comp(a, b)?];
            gmat[(a, b)] = j.value();
            for c in 0..m {
                dg[(a * m + b) * m + c] = j.d(c);
            }
        }
    }
    if !gmat.iter().all(|c| c.is_finite()) {
        return Err(Error::SingularMetric);
    }
    let scale = gmat.amax();
    let ginv = match gmat.clone().try_inverse() {
        Some(inv) if scale > 0.0 && gmat.determinant().abs() > 1e-14 * scale.powi(m as i32) => inv,
        _ => return Err(Error::SingularMetric),
    };
    let mut out = vec![0.0; m * m * m];
    for alpha in 0..m {
        for beta in 0..m {
            for gamma in beta..m {
                let mut s = 0.0;
                for rho in 0..m {
                    let lower = dg[(rho * m + beta) * m + gamma] + dg[(rho * m + gamma) * m + beta]
                        - dg[(beta * m + gamma) * m + rho];
                    s += ginv[(alpha, rho)] * lower;
                }
                out[(alpha * m + beta) * m + gamma] = 0.5 * s;
                out[(alpha * m + gamma) * m + beta] = 0.5 * s;
            }
        }
    }
    Ok(out)
}

/// `Γ^α_{βγ} v^β v^γ`
pub fn christoffel_contract(gamma: &[f64], v: &[f64]) -> Vec<f64> {
    let m = v.len();
    (0..m)
        .map(|a| {
            let mut s = 0.0;
            for b in 0..m {
                for c in 0..m {
                    s += gamma[(a * m + b) * m + c] * v[b] * v[c];
                }
            }
            s
        })
        .collect()
}

/// Per sample `‖a + Γ(v, v)‖ / (‖Γ(v, v)‖ + 1)` where `a` is re-assembled from
/// `l` under `gauge`.
pub fn geodesic_residual(
    l: &Lagrangian,
    gauge: &GaugeChoice,
    traj: &Trajectory,
    g: &TensorField,
) -> Result<Vec<f64>> {
    traj.samples
        .iter()
        .map(|s| {
            let a = assemble_eom(l, gauge, s)?;
            let gvv = christoffel_contract(&christoffel(g, &s.x)?, &s.v);
            let diff: Vec<f64> = a.iter().zip(&gvv).map(|(p, q)| p + q).collect();
            Ok(norm(&diff) / (norm(&gvv) + 1.0))
        })
        .collect()
}
