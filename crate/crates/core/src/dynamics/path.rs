use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::lagrangian::Lagrangian;
use crate::quadrature::{adaptive, composite_nodes};

type PathFn = dyn Fn(&Jet2) -> Vec<Jet2> + Send + Sync;
type MapFn = dyn Fn(&Jet2) -> Jet2 + Send + Sync;

/// A parametrized curve `τ ↦ x(τ)` on `[a, b]`.
#[derive(Clone)]
pub struct PathCurve {
    dim: usize,
    interval: (f64, f64),
    map: Arc<PathFn>,
}

impl fmt::Debug for PathCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathCurve")
            .field("dim", &self.dim)
            .field("interval", &self.interval)
            .finish_non_exhaustive()
    }
}

impl PathCurve {
    pub fn new(
        dim: usize,
        a: f64,
        b: f64,
        map: impl Fn(&Jet2) -> Vec<Jet2> + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("path interval [{a}, {b}]")));
        }
        Ok(PathCurve {
            dim,
            interval: (a, b),
            map: Arc::new(map),
        })
    }

    /// Straight segment from `p` to `q` at constant speed on `[0, 1]`.
    pub fn segment(p: &[f64], q: &[f64]) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::DimMismatch {
                expected: p.len(),
                got: q.len(),
            });
        }
        let (p, q) = (p.to_vec(), q.to_vec());
        PathCurve::new(p.len(), 0.0, 1.0, move |t| {
            p.iter().zip(&q).map(|(a, b)| t * (b - a) + *a).collect()
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn point(&self, tau: f64) -> Vec<f64> {
        (self.map)(&Jet2::constant(tau))
            .iter()
            .map(Jet2::value)
            .collect()
    }

    /// `(x(τ), dx/dτ)`
    pub fn point_velocity(&self, tau: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let comps = (self.map)(&Jet2::variable(tau, 0, 1));
        if comps.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: comps.len(),
            });
        }
        Ok((
            comps.iter().map(Jet2::value).collect(),
            comps.iter().map(|c| c.d(0)).collect(),
        ))
    }
}

/// A reparametrization `σ ↦ τ = f(σ)` on `[c, d]`.
#[derive(Clone)]
pub struct MonotoneMap {
    domain: (f64, f64),
    map: Arc<MapFn>,
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneMap")
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl MonotoneMap {
    pub fn new(c: f64, d: f64, map: impl Fn(&Jet2) -> Jet2 + Send + Sync + 'static) -> Self {
        MonotoneMap {
            domain: (c, d),
            map: Arc::new(map),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// `(f(σ), f'(σ))`
    pub fn eval(&self, sigma: f64) -> (f64, f64) {
        let j = (self.map)(&Jet2::variable(sigma, 0, 1));
        (j.value(), j.d(0))
    }
}

/// Gauss-Legendre order, refinement budget and tolerance for path actions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub order: usize,
    pub max_refine: usize,
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 8,
            max_refine: 12,
            tol: 1e-13,
        }
    }
}

/// `∫ L(x(τ), ẋ(τ)) dτ` with panel doubling.
pub fn action_of_path(l: &Lagrangian, path: &PathCurve, q: &QuadratureSpec) -> Result<f64> {
    if path.dim() != l.dim() {
        return Err(Error::DimMismatch {
            expected: l.dim(),
            got: path.dim(),
        });
    }
    let (a, b) = path.interval();
    let r = adaptive(
        |t| {
            let (x, v) = path.point_velocity(t)?;
            l.eval(&x, &v)
        },
        a,
        b,
        q.order,
        q.max_refine,
        q.tol,
    )?;
    Ok(r.value)
}

/// The curve `σ ↦ path(f(σ))`.
///
/// `f` must be increasing: `f'` is checked at the quadrature nodes of a fine
/// composite rule and at both ends, and the image must lie in the path's
/// interval.
pub fn reparametrize_path(
    path: &PathCurve,
    f: &MonotoneMap,
    q: &QuadratureSpec,
) -> Result<PathCurve> {
    let (c, d) = f.domain();
    let (a, b) = path.interval();
    let slack = 1e-12 * (b - a).abs().max(1.0);
    let mut probes: Vec<f64> = composite_nodes(c, d, q.order.max(2), 64)
        .into_iter()
        .map(|(s, _)| s)
        .collect();
    probes.push(c);
    probes.push(d);
    for s in probes {
        let (t, dt) = f.eval(s);
        if !(dt > 0.0) {
            return Err(Error::NonMonotone { at: s });
        }
        if !(t >= a - slack && t <= b + slack) {
            return Err(Error::InvalidArgument(format!(
                "reparametrization maps {s} to {t}, outside [{a}, {b}]"
            )));
        }
    }
    let inner = path.map.clone();
    let outer = f.map.clone();
    PathCurve::new(path.dim(), c, d, move |s| inner(&outer(s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backgrounds::{make_preset, PresetSpec};

    #[test]
    fn straight_line_proper_time() {
        let l = make_preset(&PresetSpec::new("minkowski"))
            .unwrap()
            .lagrangian;
        let p = PathCurve::segment(&[0.0, 0.0, 0.0, 0.0], &[5.0, 3.0, 0.0, 0.0]).unwrap();
        let s = action_of_path(&l, &p, &QuadratureSpec::default()).unwrap();
        assert!((s - 4.0).abs() < 1e-14);
    }

    #[test]
    fn cubic_reparametrization_keeps_the_action() {
        let l = make_preset(&PresetSpec::new("minkowski"))
            .unwrap()
            .lagrangian;
        let p = PathCurve::new(4, 0.001, 1.0, |t| {
            vec![t * 2.0, t.sin() * 0.5, t * t * 0.3, Jet2::constant(0.0)]
        })
        .unwrap();
        let f = MonotoneMap::new(0.1, 1.0, |s| s.powi(3));
        let q = QuadratureSpec::default();
        let s0 = action_of_path(&l, &p, &q).unwrap();
        let s1 = action_of_path(&l, &reparametrize_path(&p, &f, &q).unwrap(), &q).unwrap();
        assert!((s0 - s1).abs() <= 1e-12 * s0.abs());
    }

    #[test]
    fn decreasing_map_is_rejected() {
        let p = PathCurve::segment(&[0.0, 0.0], &[1.0, 0.5]).unwrap();
        let f = MonotoneMap::new(0.0, 1.0, |s| 1.0 - s);
        assert!(matches!(
            reparametrize_path(&p, &f, &QuadratureSpec::default()),
            Err(Error::NonMonotone { .. })
        ));
        let g = MonotoneMap::new(0.0, 1.0, |s| s * 2.0);
        assert!(matches!(
            reparametrize_path(&p, &g, &QuadratureSpec::default()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
