//! Gauge-fixed equations of motion, trajectory integration, path actions and
//! comparison harnesses.
//!
//! A first-order homogeneous Lagrangian has a velocity Hessian with `v` in its
//! kernel, so the Euler-Lagrange system `M a = b` alone does not determine
//! the acceleration. A [`GaugeChoice`] picks the parametrization that closes
//! the system.

mod compare;
mod geometry;
mod integrate;
mod path;

pub use compare::{gauge_insensitivity_scan, loglog_slope, match_paths, GaugeScan};
pub use geometry::{christoffel, geodesic_residual};
pub use integrate::{integrate, DriftPolicy, IntegrateOptions, Monitor, Trajectory};
pub use path::{action_of_path, reparametrize_path, MonotoneMap, PathCurve, QuadratureSpec};

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::lagrangian::{dot, Lagrangian, Term};

/// Condition estimate above which a linear solve is reported singular.
pub const MAX_CONDITION: f64 = 1e8;

type PhaseFn = dyn Fn(&[Jet2], &[Jet2]) -> Jet2 + Send + Sync;

/// A scalar function `G(x, v)` on phase space.
#[derive(Clone)]
pub struct PhaseFunction {
    eval: Arc<PhaseFn>,
}

impl fmt::Debug for PhaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PhaseFunction")
    }
}

impl PhaseFunction {
    pub fn new(eval: impl Fn(&[Jet2], &[Jet2]) -> Jet2 + Send + Sync + 'static) -> Self {
        PhaseFunction {
            eval: Arc::new(eval),
        }
    }

    pub fn eval_jet(&self, x: &[Jet2], v: &[Jet2]) -> Jet2 {
        (self.eval)(x, v)
    }
}

/// How the parametrization is fixed.
#[derive(Debug, Clone)]
pub enum GaugeChoice {
    /// Append `dL/dτ = 0` to the Euler-Lagrange system.
    LagrangianConst,
    /// Hold `S_n(v, ..., v)` fixed by integrating the un-rooted monomial in
    /// place of the order-`n` root term.
    TermConst(usize),
    /// Unit `g(v, v)`: the order-2 root `m sqrt(g v v)` is replaced by
    /// `(m/2) g v v`.
    ProperTime,
    /// Append `dG/dτ = 0` for a user function `G(x, v)`.
    Augmented(PhaseFunction),
    /// Solve the Euler-Lagrange system as is (non-degenerate Lagrangians).
    Direct,
}

impl GaugeChoice {
    pub fn name(&self) -> String {
        match self {
            GaugeChoice::LagrangianConst => "lagrangian_const".into(),
            GaugeChoice::TermConst(n) => format!("term_const({n})"),
            GaugeChoice::ProperTime => "proper_time".into(),
            GaugeChoice::Augmented(_) => "augmented".into(),
            GaugeChoice::Direct => "direct".into(),
        }
    }

    /// Checks that the gauge can be applied to `l`.
    pub fn validate(&self, l: &Lagrangian) -> Result<()> {
        match self {
            GaugeChoice::TermConst(n) if l.canonical_term(*n).is_none() => Err(
                Error::GaugeInvalid(format!("no order-{n} root term to hold constant")),
            ),
            GaugeChoice::ProperTime if l.canonical_term(2).is_none() => Err(Error::GaugeInvalid(
                "proper time needs an order-2 root term".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// One phase-space sample.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub tau: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn new(tau: f64, x: Vec<f64>, v: Vec<f64>) -> Self {
        State { tau, x, v }
    }

    pub fn is_finite(&self) -> bool {
        self.tau.is_finite() && self.x.iter().chain(&self.v).all(|c| c.is_finite())
    }
}

/// The Euler-Lagrange equations at a point, `M a = b`.
#[derive(Debug, Clone)]
pub struct EulerLagrangeSystem {
    /// `∂²L/∂v∂v`
    pub mass: DMatrix<f64>,
    /// `∂L/∂x − (∂²L/∂v∂x) v`
    pub rhs: DVector<f64>,
    /// `∂L/∂x`
    pub force: DVector<f64>,
    /// `∂L/∂v`
    pub momentum: DVector<f64>,
}

impl EulerLagrangeSystem {
    pub fn at(l: &Lagrangian, x: &[f64], v: &[f64]) -> Result<Self> {
        let m = l.dim();
        let j = l.jet_xv(x, v)?;
        let mass = DMatrix::from_fn(m, m, |a, b| j.dd(m + a, m + b));
        let force = DVector::from_fn(m, |a, _| j.d(a));
        let momentum = DVector::from_fn(m, |a, _| j.d(m + a));
        let rhs = DVector::from_fn(m, |a, _| {
            let cv: f64 = (0..m).map(|b| j.dd(m + a, b) * v[b]).sum();
            j.d(a) - cv
        });
        Ok(EulerLagrangeSystem {
            mass,
            rhs,
            force,
            momentum,
        })
    }

    /// `‖M a − b‖`
    pub fn residual(&self, accel: &[f64]) -> f64 {
        (&self.mass * DVector::from_column_slice(accel) - &self.rhs).norm()
    }
}

/// The Lagrangian whose Euler-Lagrange equations are solved under `gauge`.
pub fn gauge_lagrangian(
    l: &Lagrangian,
    gauge: &GaugeChoice,
    x: &[f64],
    v: &[f64],
) -> Result<Lagrangian> {
    gauge.validate(l)?;
    match gauge {
        GaugeChoice::TermConst(n) => {
            let (idx, term) = l.canonical_term(*n).expect("validated");
            let k = term
                .radicand_jet(&Jet2::constants(x), &Jet2::constants(v))?
                .value();
            if *n > 1 && !(k > 0.0) {
                return Err(Error::SignDomain {
                    order: *n,
                    radicand: k,
                });
            }
            // d/dv (c K^{1/n}) = (c/n) K^{(1-n)/n} dK/dv at fixed K
            let nf = *n as f64;
            let w = term.weight() / nf * k.powf((1.0 - nf) / nf);
            Ok(l.replace_term(idx, Term::Monomial(term.with_weight(w))))
        }
        GaugeChoice::ProperTime => {
            let (idx, term) = l.canonical_term(2).expect("validated");
            Ok(l.replace_term(idx, Term::Monomial(term.with_weight(0.5 * term.weight()))))
        }
        _ => Ok(l.clone()),
    }
}

/// Acceleration `dv/dτ` at `s` under `gauge`.
pub fn assemble_eom(l: &Lagrangian, gauge: &GaugeChoice, s: &State) -> Result<Vec<f64>> {
    let lstar = gauge_lagrangian(l, gauge, &s.x, &s.v)?;
    let sys = EulerLagrangeSystem::at(&lstar, &s.x, &s.v)?;
    match gauge {
        GaugeChoice::LagrangianConst => {
            let row = sys.momentum.clone();
            let rhs = -dot(sys.force.as_slice(), &s.v);
            stacked_least_squares(&sys, row, rhs)
        }
        GaugeChoice::Augmented(g) => {
            let m = l.dim();
            let gj = g.eval_jet(&Jet2::seed(&s.x, 0, 2 * m), &Jet2::seed(&s.v, m, 2 * m));
            let row = DVector::from_fn(m, |a, _| gj.d(m + a));
            let rhs = -(0..m).map(|a| gj.d(a) * s.v[a]).sum::<f64>();
            stacked_least_squares(&sys, row, rhs)
        }
        _ => solve_square(sys.mass.clone(), sys.rhs.clone()),
    }
}

fn scale_rows(a: &mut DMatrix<f64>, b: &mut DVector<f64>) {
    for i in 0..a.nrows() {
        let s = a.row(i).amax();
        if s > 0.0 {
            a.row_mut(i).scale_mut(1.0 / s);
            b[i] /= s;
        }
    }
}

fn lu_solve(a: DMatrix<f64>, b: DVector<f64>) -> Result<Vec<f64>> {
    let lu = a.lu();
    let u = lu.u();
    let pivots: Vec<f64> = u.diagonal().iter().map(|p| p.abs()).collect();
    let max = pivots.iter().copied().fold(0.0, f64::max);
    let min = pivots.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularSystem { condition });
    }
    lu.solve(&b)
        .map(|x| x.as_slice().to_vec())
        .ok_or(Error::SingularSystem { condition })
}

fn solve_square(mut a: DMatrix<f64>, mut b: DVector<f64>) -> Result<Vec<f64>> {
    scale_rows(&mut a, &mut b);
    lu_solve(a, b)
}

// [M; row] a = [b; rhs] by row-scaled normal equations.
fn stacked_least_squares(
    sys: &EulerLagrangeSystem,
    row: DVector<f64>,
    rhs: f64,
) -> Result<Vec<f64>> {
    let m = sys.mass.nrows();
    let mut a = DMatrix::zeros(m + 1, m);
    a.view_mut((0, 0), (m, m)).copy_from(&sys.mass);
    a.row_mut(m).copy_from(&row.transpose());
    let mut b = DVector::zeros(m + 1);
    b.rows_mut(0, m).copy_from(&sys.rhs);
    b[m] = rhs;
    scale_rows(&mut a, &mut b);
    let at = a.transpose();
    lu_solve(&at * &a, &at * &b)
}

/// Value of the quantity the gauge holds fixed, with velocity derivatives
/// (`m` active variables).
pub fn gauge_function(l: &Lagrangian, gauge: &GaugeChoice, x: &[f64], v: &[f64]) -> Result<Jet2> {
    gauge.validate(l)?;
    let m = l.dim();
    let xj = Jet2::constants(x);
    let vj = Jet2::seed(v, 0, m);
    match gauge {
        GaugeChoice::TermConst(n) => l
            .canonical_term(*n)
            .expect("validated")
            .1
            .radicand_jet(&xj, &vj),
        GaugeChoice::ProperTime => l
            .canonical_term(2)
            .expect("validated")
            .1
            .radicand_jet(&xj, &vj),
        GaugeChoice::Augmented(g) => Ok(g.eval_jet(&xj, &vj)),
        GaugeChoice::LagrangianConst | GaugeChoice::Direct => l.jet_v(x, v),
    }
}
