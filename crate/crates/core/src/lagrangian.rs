//! First-order homogeneous Lagrangians in canonical form and their
//! diagnostic identities.
//!
//! A canonical Lagrangian is a weighted sum of `n`-th roots of symmetric
//! forms, `Σ c_n (S_n(v, ..., v))^{1/n}`. The same tensor fields can also
//! enter un-rooted (`c_n S_n(v, ..., v)`), which is how gauge-fixed dynamics
//! and the order-`n` comparison Lagrangians are expressed.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::{ScalarField, TensorField};
use crate::jet::{self, Jet2};
use crate::tensor::{contract_full, SortedIndices, SymTensor};

/// One `c_n (S_n(v, ..., v))^{1/n}` summand.
#[derive(Debug, Clone)]
pub struct CanonicalTerm {
    order: usize,
    weight: f64,
    field: TensorField,
}

impl CanonicalTerm {
    pub fn new(order: usize, weight: f64, field: TensorField) -> Result<Self> {
        if order == 0 || field.rank() != order {
            return Err(Error::InvalidArgument(format!(
                "term of order {order} needs a rank-{order} field, got rank {}",
                field.rank()
            )));
        }
        Ok(CanonicalTerm {
            order,
            weight,
            field,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn field(&self) -> &TensorField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    /// Same field, different weight.
    pub fn with_weight(&self, weight: f64) -> Self {
        CanonicalTerm {
            weight,
            ..self.clone()
        }
    }

    /// `S_n(v, ..., v)` without weight.
    pub fn radicand_jet(&self, x: &[Jet2], v: &[Jet2]) -> Result<Jet2> {
        check_dim(self.dim(), v.len())?;
        contract_full(&self.field.eval_jet(x)?, v)
    }

    /// `c (S_n)^{1/n}`; for `n = 1` this is `c A·v` with any sign.
    pub fn eval_jet(&self, x: &[Jet2], v: &[Jet2]) -> Result<Jet2> {
        let s = self.radicand_jet(x, v)?;
        if self.order == 1 {
            return Ok(self.weight * s);
        }
        if !(s.value() > 0.0) {
            return Err(Error::SignDomain {
                order: self.order,
                radicand: s.value(),
            });
        }
        let root = if self.order == 2 {
            s.sqrt()
        } else {
            s.powf(1.0 / self.order as f64)
        };
        Ok(self.weight * root)
    }

    /// `c S_n(v, ..., v)` (no root, sign unrestricted).
    pub fn eval_monomial_jet(&self, x: &[Jet2], v: &[Jet2]) -> Result<Jet2> {
        Ok(self.weight * self.radicand_jet(x, v)?)
    }

    pub fn eval(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        Ok(self
            .eval_jet(&Jet2::constants(x), &Jet2::constants(v))?
            .value())
    }

    pub fn eval_monomial(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        Ok(self
            .eval_monomial_jet(&Jet2::constants(x), &Jet2::constants(v))?
            .value())
    }

    /// Derivative of the term with respect to each field component, per
    /// ordered index tuple: `c (1/n) S^{(1-n)/n} v^{a1} ... v^{an}`.
    pub fn source_tensor(&self, x: &[f64], v: &[f64]) -> Result<SymTensor<f64>> {
        check_dim(self.dim(), v.len())?;
        let n = self.order;
        let s = contract_full(&self.field.eval(x)?, v)?;
        let prefactor = if n == 1 {
            self.weight
        } else {
            if !(s > 0.0) {
                return Err(Error::SignDomain {
                    order: n,
                    radicand: s,
                });
            }
            self.weight / n as f64 * s.powf((1.0 - n as f64) / n as f64)
        };
        SymTensor::from_fn(n, self.dim(), |idx| {
            prefactor * idx.iter().map(|&i| v[i]).product::<f64>()
        })
    }
}

type PotentialFn = dyn Fn(&[Jet2], &[Jet2]) -> Vec<Jet2> + Send + Sync;

/// A velocity-dependent covector `A_μ(x, v)`; as a Lagrangian it
/// contributes `v^μ A_μ(x, v)`.
#[derive(Clone)]
pub struct VelocityPotential {
    dim: usize,
    eval: Arc<PotentialFn>,
}

impl fmt::Debug for VelocityPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VelocityPotential")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl VelocityPotential {
    pub fn new(
        dim: usize,
        eval: impl Fn(&[Jet2], &[Jet2]) -> Vec<Jet2> + Send + Sync + 'static,
    ) -> Self {
        VelocityPotential {
            dim,
            eval: Arc::new(eval),
        }
    }

    /// A velocity-independent potential `A_μ(x)`.
    pub fn from_field(a: TensorField) -> Result<Self> {
        if a.rank() != 1 {
            return Err(Error::InvalidArgument(
                "potential needs a rank-1 field".into(),
            ));
        }
        let dim = a.dim();
        Ok(VelocityPotential::new(dim, move |x, _v| {
            a.eval_jet(x)
                .map(SymTensor::into_packed)
                .unwrap_or_else(|_| vec![Jet2::constant(f64::NAN); x.len()])
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_jet(&self, x: &[Jet2], v: &[Jet2]) -> Result<Vec<Jet2>> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, v.len())?;
        let a = (self.eval)(x, v);
        check_dim(self.dim, a.len())?;
        Ok(a)
    }

    pub fn eval(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .eval_jet(&Jet2::constants(x), &Jet2::constants(v))?
            .iter()
            .map(Jet2::value)
            .collect())
    }

    /// `g_{αβ}(x, v) = ∂A_α/∂v^β + ∂A_β/∂v^α`.
    pub fn velocity_metric(&self, x: &[f64], v: &[f64]) -> Result<SymTensor<f64>> {
        let m = self.dim;
        check_dim(m, v.len())?;
        let a = self.eval_jet(&Jet2::constants(x), &Jet2::seed(v, 0, m))?;
        SymTensor::from_fn(2, m, |idx| {
            let (i, j) = (idx[0], idx[1]);
            a[i].d(j) + a[j].d(i)
        })
    }
}

/// A summand of a [`Lagrangian`].
#[derive(Debug, Clone)]
pub enum Term {
    /// `c (S_n(v, ..., v))^{1/n}`
    Canonical(CanonicalTerm),
    /// `c S_n(v, ..., v)`
    Monomial(CanonicalTerm),
    /// `v^μ A_μ(x, v)`
    Potential(VelocityPotential),
}

impl Term {
    pub fn dim(&self) -> usize {
        match self {
            Term::Canonical(t) | Term::Monomial(t) => t.dim(),
            Term::Potential(p) => p.dim(),
        }
    }

    pub fn eval_jet(&self, x: &[Jet2], v: &[Jet2]) -> Result<Jet2> {
        match self {
            Term::Canonical(t) => t.eval_jet(x, v),
            Term::Monomial(t) => t.eval_monomial_jet(x, v),
            Term::Potential(p) => Ok(jet::dot(v, &p.eval_jet(x, v)?)),
        }
    }
}

/// Which partial derivatives a Lagrangian jet carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Seeding {
    None,
    Velocity,
    PositionVelocity,
}

/// Singularity diagnostics of the velocity Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianReport {
    pub determinant: f64,
    pub rank: usize,
    /// Frobenius norm of the Hessian.
    pub norm: f64,
    /// `‖M v‖`
    pub residual: f64,
    /// `‖M v‖ / (‖M‖ ‖v‖)`
    pub relative_residual: f64,
}

/// Relative singular-value cutoff for the Hessian rank estimate.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// A Lagrangian `L(x, v)` assembled from terms, an optional total-derivative
/// gauge term `dΛ/dτ = v^α ∂_α Λ(x)`, and an optional overall power.
#[derive(Debug, Clone)]
pub struct Lagrangian {
    dim: usize,
    terms: Vec<Term>,
    gauge_term: Option<ScalarField>,
    power: f64,
}

impl Lagrangian {
    pub fn new(dim: usize) -> Self {
        Lagrangian {
            dim,
            terms: Vec::new(),
            gauge_term: None,
            power: 1.0,
        }
    }

    /// A canonical Lagrangian `Σ c_n (S_n)^{1/n}`.
    pub fn canonical(dim: usize, terms: impl IntoIterator<Item = CanonicalTerm>) -> Result<Self> {
        terms
            .into_iter()
            .try_fold(Lagrangian::new(dim), |l, t| l.with_term(Term::Canonical(t)))
    }

    pub fn with_term(mut self, term: Term) -> Result<Self> {
        check_dim(self.dim, term.dim())?;
        self.terms.push(term);
        Ok(self)
    }

    pub fn with_gauge_term(mut self, lambda: ScalarField) -> Result<Self> {
        check_dim(self.dim, lambda.dim())?;
        self.gauge_term = Some(lambda);
        Ok(self)
    }

    /// `L -> L^p`.
    pub fn powered(mut self, p: f64) -> Self {
        self.power *= p;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn gauge_term(&self) -> Option<&ScalarField> {
        self.gauge_term.as_ref()
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// First canonical (rooted) term of the given order.
    pub fn canonical_term(&self, order: usize) -> Option<(usize, &CanonicalTerm)> {
        self.terms.iter().enumerate().find_map(|(i, t)| match t {
            Term::Canonical(c) if c.order() == order => Some((i, c)),
            _ => None,
        })
    }

    /// The order-2 field, rooted or not, if any term carries one.
    pub fn metric_field(&self) -> Option<&TensorField> {
        self.terms.iter().find_map(|t| match t {
            Term::Canonical(c) | Term::Monomial(c) if c.order() == 2 => Some(c.field()),
            _ => None,
        })
    }

    /// Replaces term `index`, keeping everything else.
    pub(crate) fn replace_term(&self, index: usize, term: Term) -> Lagrangian {
        let mut out = self.clone();
        out.terms[index] = term;
        out
    }

    fn check_point(&self, x: &[f64], v: &[f64]) -> Result<()> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, v.len())
    }

    fn evaluate(&self, x: &[f64], v: &[f64], seeding: Seeding) -> Result<Jet2> {
        self.check_point(x, v)?;
        let m = self.dim;
        let (xj, vj) = match seeding {
            Seeding::None => (Jet2::constants(x), Jet2::constants(v)),
            Seeding::Velocity => (Jet2::constants(x), Jet2::seed(v, 0, m)),
            Seeding::PositionVelocity => (Jet2::seed(x, 0, 2 * m), Jet2::seed(v, m, 2 * m)),
        };
        let mut total = Jet2::constant(0.0);
        for term in &self.terms {
            total += term.eval_jet(&xj, &vj)?;
        }
        if let Some(lambda) = &self.gauge_term {
            total += gauge_jet(lambda, x, v, seeding)?;
        }
        Ok(self.apply_power(total))
    }

    fn apply_power(&self, total: Jet2) -> Jet2 {
        if self.power == 1.0 {
            total
        } else if self.power.fract() == 0.0 && self.power.abs() < 64.0 {
            total.powi(self.power as i32)
        } else {
            total.powf(self.power)
        }
    }

    pub fn eval(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        Ok(self.evaluate(x, v, Seeding::None)?.value())
    }

    /// `L` with first and second derivatives in `v` (variables `0..m`).
    pub fn jet_v(&self, x: &[f64], v: &[f64]) -> Result<Jet2> {
        self.evaluate(x, v, Seeding::Velocity)
    }

    /// `L` with derivatives in `x` (variables `0..m`) and `v` (`m..2m`).
    ///
    /// The x–x block of the Hessian omits the gauge term's contribution
    /// (third derivatives of `Λ`); equations of motion never read it.
    pub fn jet_xv(&self, x: &[f64], v: &[f64]) -> Result<Jet2> {
        self.evaluate(x, v, Seeding::PositionVelocity)
    }

    /// `p_α = ∂L/∂v^α`.
    pub fn conjugate_momentum(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.jet_v(x, v)?.grad().to_vec())
    }

    /// `h = v·∂L/∂v − L`.
    pub fn hamiltonian(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        let l = self.jet_v(x, v)?;
        Ok(dot(v, l.grad()) - l.value())
    }

    /// `(v·∂L/∂v) / L`.
    pub fn homogeneity_degree(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        let l = self.jet_v(x, v)?;
        if l.value().abs() < 1e-12 * (1.0 + norm(v)) {
            return Err(Error::ZeroLagrangian { value: l.value() });
        }
        Ok(dot(v, l.grad()) / l.value())
    }

    /// `M_{αβ} = ∂²L/∂v^α∂v^β` with a singularity report.
    pub fn v_hessian(&self, x: &[f64], v: &[f64]) -> Result<(SymTensor<f64>, HessianReport)> {
        let l = self.jet_v(x, v)?;
        let m = self.dim;
        let dense = DMatrix::from_fn(m, m, |i, j| l.dd(i, j));
        let mv = &dense * nalgebra::DVector::from_column_slice(v);
        let frob = dense.norm();
        let residual = mv.norm();
        let sv = dense.clone().singular_values();
        let smax = sv.max();
        let rank = sv.iter().filter(|&&s| s > RANK_TOLERANCE * smax).count();
        let report = HessianReport {
            determinant: dense.determinant(),
            rank,
            norm: frob,
            residual,
            relative_residual: residual / (frob * norm(v)),
        };
        let tensor = SymTensor::from_fn(2, m, |idx| l.dd(idx[0], idx[1]))?;
        Ok((tensor, report))
    }
}

// v^α ∂_α Λ(x) with the derivatives requested by `seeding`.
fn gauge_jet(lambda: &ScalarField, x: &[f64], v: &[f64], seeding: Seeding) -> Result<Jet2> {
    let m = x.len();
    let lam = lambda.eval_with_derivatives(x)?;
    let grad = lam.grad();
    let value = dot(v, grad);
    Ok(match seeding {
        Seeding::None => Jet2::constant(value),
        Seeding::Velocity => Jet2::from_parts(value, grad.to_vec(), vec![0.0; m * (m + 1) / 2]),
        Seeding::PositionVelocity => {
            let k = 2 * m;
            let mut g = vec![0.0; k];
            for a in 0..m {
                g[a] = (0..m).map(|b| lam.dd(a, b) * v[b]).sum();
                g[m + a] = grad[a];
            }
            let mut hess = Vec::with_capacity(k * (k + 1) / 2);
            for i in 0..k {
                for j in i..k {
                    // only the x–v block is nonzero: ∂²/∂x^i∂v^a = ∂_i∂_a Λ
                    let h = if i < m && j >= m {
                        lam.dd(i, j - m)
                    } else {
                        0.0
                    };
                    hess.push(h);
                }
            }
            Jet2::from_parts(value, g, hess)
        }
    })
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Unpacks a per-packed-slot gradient into per-ordered-tuple values by
/// dividing out multiplicities.
pub fn unpack_multiplicity(rank: usize, dim: usize, packed_grad: &[f64]) -> Result<SymTensor<f64>> {
    let mut k = 0;
    SymTensor::from_fn(rank, dim, |idx| {
        let g = packed_grad[k] / crate::tensor::multiplicity(idx) as f64;
        k += 1;
        g
    })
}

/// Sorted multi-indices of a rank/dim pair, re-exported for callers that
/// walk packed storage.
pub fn packed_indices(rank: usize, dim: usize) -> SortedIndices {
    SortedIndices::new(rank, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::packed_len;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eta4() -> TensorField {
        TensorField::constant(SymTensor::diagonal(&[1.0, -1.0, -1.0, -1.0]).unwrap())
    }

    fn covector(c: [f64; 4]) -> TensorField {
        TensorField::constant(SymTensor::from_packed(1, 4, c.to_vec()).unwrap())
    }

    fn ansatz_s4(psi: f64, phi: f64) -> TensorField {
        TensorField::constant(
            SymTensor::from_fn(4, 2, |idx| match idx {
                [0, 0, 0, 0] => psi,
                [1, 1, 1, 1] => phi,
                _ => 0.0,
            })
            .unwrap(),
        )
    }

    // A position-dependent metric close to η, and a curved potential.
    fn wavy_metric() -> TensorField {
        TensorField::diagonal(4, |x| {
            vec![
                1.0 + 0.1 * x[1].sin(),
                -1.0 - 0.05 * (&x[2] * &x[0]).cos(),
                -1.0 + 0.0 * &x[0],
                -1.0 - 0.02 * &x[3] * &x[3],
            ]
        })
        .unwrap()
    }

    fn wavy_potential() -> TensorField {
        TensorField::covector(4, |x| {
            vec![
                0.3 * x[1].cos(),
                0.2 * &x[0] * &x[2],
                -0.1 * x[3].sin(),
                0.4 + 0.0 * &x[0],
            ]
        })
        .unwrap()
    }

    fn random_timelike(rng: &mut ChaCha8Rng) -> ([f64; 4], [f64; 4]) {
        let x = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let s = [
            rng.gen_range(-0.4..0.4),
            rng.gen_range(-0.4..0.4),
            rng.gen_range(-0.4..0.4),
        ];
        let w = rng.gen_range(1.0..2.0);
        (x, [w, s[0] * w, s[1] * w, s[2] * w])
    }

    fn em_gravity() -> Lagrangian {
        Lagrangian::canonical(
            4,
            [
                CanonicalTerm::new(1, 0.7, wavy_potential()).unwrap(),
                CanonicalTerm::new(2, 1.3, wavy_metric()).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn term_examples() {
        let g = CanonicalTerm::new(2, 1.0, eta4()).unwrap();
        assert_eq!(g.eval(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
        let a = CanonicalTerm::new(1, 2.0, covector([0.5, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(a.eval(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
        let s4 = CanonicalTerm::new(4, 1.0, ansatz_s4(2.0, 0.0)).unwrap();
        let r = s4.eval(&[0.0, 0.0], &[1.0, 0.3]).unwrap();
        assert!((r - 2f64.powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn term_errors() {
        let g = CanonicalTerm::new(2, 1.0, eta4()).unwrap();
        assert!(matches!(
            g.eval(&[0.0; 4], &[0.0, 1.0, 0.0, 0.0]),
            Err(Error::SignDomain { order: 2, .. })
        ));
        assert!(matches!(
            g.eval(&[0.0; 4], &[1.0, 1.0, 0.0, 0.0]),
            Err(Error::SignDomain { .. })
        ));
        assert!(matches!(
            g.eval(&[0.0; 4], &[1.0, 0.0]),
            Err(Error::DimMismatch { .. })
        ));
        assert!(CanonicalTerm::new(3, 1.0, eta4()).is_err());
    }

    #[test]
    fn monomial_examples() {
        let g = CanonicalTerm::new(2, 1.0, eta4()).unwrap();
        assert_eq!(
            g.eval_monomial(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0]).unwrap(),
            1.0
        );
        assert_eq!(
            g.eval_monomial(&[0.0; 4], &[0.0, 1.0, 0.0, 0.0]).unwrap(),
            -1.0
        );
        let s4 = CanonicalTerm::new(4, 1.0, ansatz_s4(1.0, 1.0)).unwrap();
        assert_eq!(s4.eval_monomial(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn lagrangian_examples() {
        let l = Lagrangian::canonical(
            4,
            [
                CanonicalTerm::new(1, 1.0, covector([1.0, 0.0, 0.0, 0.0])).unwrap(),
                CanonicalTerm::new(2, 1.0, eta4()).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(l.eval(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0]).unwrap(), 2.0);
        assert_eq!(
            Lagrangian::new(4)
                .eval(&[0.0; 4], &[1.0, 2.0, 3.0, 4.0])
                .unwrap(),
            0.0
        );
        let gauge = Lagrangian::new(4)
            .with_gauge_term(ScalarField::new(4, |x| x[0].clone()))
            .unwrap();
        assert_eq!(gauge.eval(&[0.5; 4], &[3.0, 0.0, 0.0, 0.0]).unwrap(), 3.0);
    }

    #[test]
    fn momentum_examples() {
        let v = [1.0, 0.0, 0.0, 0.0];
        let quad = Lagrangian::new(4)
            .with_term(Term::Monomial(CanonicalTerm::new(2, 1.0, eta4()).unwrap()))
            .unwrap();
        assert_eq!(
            quad.conjugate_momentum(&[0.0; 4], &v).unwrap(),
            vec![2.0, 0.0, 0.0, 0.0]
        );
        let root = Lagrangian::canonical(4, [CanonicalTerm::new(2, 1.0, eta4()).unwrap()]).unwrap();
        assert_eq!(
            root.conjugate_momentum(&[0.0; 4], &v).unwrap(),
            vec![1.0, 0.0, 0.0, 0.0]
        );

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = em_gravity();
        for _ in 0..20 {
            let (x, v) = random_timelike(&mut rng);
            let p = l.conjugate_momentum(&x, &v).unwrap();
            let lv = l.eval(&x, &v).unwrap();
            assert!((dot(&p, &v) - lv).abs() <= 1e-12 * lv.abs().max(1.0));
        }
    }

    #[test]
    fn hamiltonian_and_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let l = em_gravity();
        for _ in 0..100 {
            let (x, v) = random_timelike(&mut rng);
            let lv = l.eval(&x, &v).unwrap();
            assert!(l.hamiltonian(&x, &v).unwrap().abs() <= 1e-10 * lv.abs());
            let d = l.homogeneity_degree(&x, &v).unwrap();
            assert!((d - 1.0).abs() < 1e-12);
        }
        let x = [0.1, 0.2, 0.3, 0.4];
        let v = [1.2, 0.1, -0.2, 0.3];
        let s2 = Lagrangian::new(4)
            .with_term(Term::Monomial(
                CanonicalTerm::new(2, 1.0, wavy_metric()).unwrap(),
            ))
            .unwrap();
        let l2 = s2.eval(&x, &v).unwrap();
        assert!((s2.hamiltonian(&x, &v).unwrap() - l2).abs() <= 1e-12 * l2.abs());
        assert!((s2.homogeneity_degree(&x, &v).unwrap() - 2.0).abs() < 1e-12);

        let s4 = Lagrangian::new(2)
            .with_term(Term::Monomial(
                CanonicalTerm::new(4, 1.0, ansatz_s4(1.5, 0.5)).unwrap(),
            ))
            .unwrap();
        let (x2, v2) = ([0.0, 1.0], [1.1, 0.4]);
        let l4 = s4.eval(&x2, &v2).unwrap();
        assert!((s4.hamiltonian(&x2, &v2).unwrap() - 3.0 * l4).abs() <= 1e-12 * l4.abs());
        assert!((s4.homogeneity_degree(&x2, &v2).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_lagrangian_is_rejected() {
        let l = Lagrangian::new(4);
        assert!(matches!(
            l.homogeneity_degree(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0]),
            Err(Error::ZeroLagrangian { .. })
        ));
    }

    #[test]
    fn hessian_degeneracy() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let l = em_gravity();
        for _ in 0..50 {
            let (x, v) = random_timelike(&mut rng);
            let (_, rep) = l.v_hessian(&x, &v).unwrap();
            assert!(rep.relative_residual <= 1e-9, "{rep:?}");
            assert!(rep.determinant.abs() <= 1e-9 * rep.norm.powi(4));
            assert!(rep.rank <= 3);
        }
        let quad = Lagrangian::new(4)
            .with_term(Term::Monomial(CanonicalTerm::new(2, 1.0, eta4()).unwrap()))
            .unwrap();
        let (m, rep) = quad.v_hessian(&[0.0; 4], &[1.0, 0.2, 0.0, 0.0]).unwrap();
        assert_eq!(m.to_matrix().unwrap()[0], 2.0);
        assert_eq!(m.to_matrix().unwrap()[5], -2.0);
        assert!((rep.determinant + 16.0).abs() < 1e-12);
        assert_eq!(rep.rank, 4);
    }

    #[test]
    fn scaling_is_degree_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let l = em_gravity();
        for _ in 0..30 {
            let (x, v) = random_timelike(&mut rng);
            let base = l.eval(&x, &v).unwrap();
            for alpha in [0.5, 2.0, 7.0] {
                let sv: Vec<f64> = v.iter().map(|c| alpha * c).collect();
                let scaled = l.eval(&x, &sv).unwrap();
                assert!((scaled - alpha * base).abs() <= 1e-12 * (alpha * base).abs());
            }
        }
    }

    #[test]
    fn source_tensor_examples() {
        let g = CanonicalTerm::new(2, 1.0, eta4()).unwrap();
        let src = g.source_tensor(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(*src.get(&[0, 0]).unwrap(), 0.5);
        let a = CanonicalTerm::new(1, 1.0, covector([3.0, 1.0, 4.0, 1.0])).unwrap();
        let v = [1.0, 0.5, -0.25, 2.0];
        assert_eq!(a.source_tensor(&[0.0; 4], &v).unwrap().packed(), &v);
    }

    // Oracle: differentiate the term with respect to its packed components.
    fn component_gradient(t: &CanonicalTerm, x: &[f64], v: &[f64]) -> SymTensor<f64> {
        let n = t.order();
        let dim = t.dim();
        let plain = t.field().eval(x).unwrap();
        let k = packed_len(n, dim);
        let seeded = SymTensor::from_packed(n, dim, Jet2::seed(plain.packed(), 0, k)).unwrap();
        let s = contract_full(&seeded, &Jet2::constants(v)).unwrap();
        let l = if n == 1 {
            t.weight() * s
        } else {
            t.weight() * s.powf(1.0 / n as f64)
        };
        unpack_multiplicity(n, dim, l.grad()).unwrap()
    }

    #[test]
    fn source_tensor_matches_field_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in 1..=4 {
            let dim = 3;
            let s = SymTensor::from_fn(n, dim, |idx| {
                if idx.iter().all(|&i| i == 0) {
                    3.0
                } else {
                    rng.gen_range(-0.1..0.1)
                }
            })
            .unwrap();
            let t = CanonicalTerm::new(n, 1.7, TensorField::constant(s)).unwrap();
            let x = [0.0; 3];
            let v = [1.0, rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)];
            let src = t.source_tensor(&x, &v).unwrap();
            let oracle = component_gradient(&t, &x, &v);
            for (a, b) in src.packed().iter().zip(oracle.packed()) {
                assert!(
                    (a - b).abs() <= 1e-9 * b.abs().max(1e-12),
                    "n={n}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn two_metric_sources_are_both_proportional_to_vv() {
        let m = 4;
        let k = packed_len(2, m);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let h0 = SymTensor::from_fn(2, m, |idx| {
            let base = if idx[0] == idx[1] {
                [2.0, -1.0, -1.0, -1.0][idx[0]]
            } else {
                0.0
            };
            base + rng.gen_range(-0.1..0.1)
        })
        .unwrap();
        let g0 = SymTensor::from_fn(2, m, |idx| {
            let base = if idx[0] == idx[1] {
                [1.0, -1.0, -1.0, -1.0][idx[0]]
            } else {
                0.0
            };
            base + rng.gen_range(-0.1..0.1)
        })
        .unwrap();
        let v = [1.0, 0.2, -0.1, 0.3];
        // both metrics active at once: h in 0..k, g in k..2k
        let hj = SymTensor::from_packed(2, m, Jet2::seed(h0.packed(), 0, 2 * k)).unwrap();
        let gj = SymTensor::from_packed(2, m, Jet2::seed(g0.packed(), k, 2 * k)).unwrap();
        let vj = Jet2::constants(&v);
        let hvv = contract_full(&hj, &vj).unwrap();
        let gvv = contract_full(&gj, &vj).unwrap();
        let l = &hvv * gvv.powf(-0.5);
        let dh = unpack_multiplicity(2, m, &l.grad()[..k]).unwrap();
        let dg = unpack_multiplicity(2, m, &l.grad()[k..]).unwrap();
        let vv = SymTensor::from_fn(2, m, |idx| v[idx[0]] * v[idx[1]]).unwrap();
        for src in [&dh, &dg] {
            let a = src.to_matrix().unwrap();
            let b = vv.to_matrix().unwrap();
            let coef = dot(&a, &b) / dot(&b, &b);
            let resid: f64 = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x - coef * y).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(resid <= 1e-9 * norm(&a), "residual {resid}");
        }
        // and they match the closed forms L/(h v v) and −L/(2 g v v)
        let lv = l.value();
        let ch = *dh.get(&[0, 0]).unwrap() / (v[0] * v[0]);
        let cg = *dg.get(&[0, 0]).unwrap() / (v[0] * v[0]);
        assert!((ch - lv / hvv.value()).abs() < 1e-12);
        assert!((cg + 0.5 * lv / gvv.value()).abs() < 1e-12);
    }

    #[test]
    fn velocity_metric_examples() {
        let x = [0.2, 0.1, -0.3, 0.5];
        let v = [1.3, 0.2, 0.1, -0.4];
        let a_static = VelocityPotential::from_field(wavy_potential()).unwrap();
        let g0 = a_static.velocity_metric(&x, &v).unwrap();
        assert!(g0.packed().iter().all(|&c| c == 0.0));

        let g = wavy_metric();
        let g_for_deg0 = g.clone();
        let deg0 = VelocityPotential::new(4, move |x, v| {
            let gm = g_for_deg0.eval_jet(x).unwrap();
            let gvv = contract_full(&gm, v).unwrap().sqrt();
            (0..4)
                .map(|mu| {
                    let mut s = Jet2::constant(0.0);
                    for nu in 0..4 {
                        s += gm.get(&[mu, nu]).unwrap() * &v[nu];
                    }
                    s / &gvv
                })
                .collect()
        });
        let gv = deg0.velocity_metric(&x, &v).unwrap();
        let q = contract_full(&gv, &v).unwrap();
        assert!(q.abs() <= 1e-10, "v g v = {q}");

        let g_for_deg1 = g.clone();
        let deg1 = VelocityPotential::new(4, move |x, v| {
            let gm = g_for_deg1.eval_jet(x).unwrap();
            (0..4)
                .map(|mu| {
                    let mut s = Jet2::constant(0.0);
                    for nu in 0..4 {
                        s += gm.get(&[mu, nu]).unwrap() * &v[nu];
                    }
                    s
                })
                .collect()
        });
        let g1 = deg1.velocity_metric(&x, &v).unwrap();
        let gx = g.eval(&x).unwrap();
        for (a, b) in g1.packed().iter().zip(gx.packed()) {
            assert!((a - 2.0 * b).abs() < 1e-14);
        }
        let lhs = contract_full(&g1, &v).unwrap();
        let rhs = 2.0 * contract_full(&gx, &v).unwrap();
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn gauge_term_shifts_momentum_only() {
        let l = em_gravity();
        let lam = ScalarField::new(4, |x| (&x[0] * &x[1]).sin() + &x[2] * &x[2] * &x[3]);
        let lg = l.clone().with_gauge_term(lam.clone()).unwrap();
        let x = [0.3, -0.2, 0.5, 0.7];
        let v = [1.4, 0.3, -0.2, 0.1];
        let p = l.conjugate_momentum(&x, &v).unwrap();
        let pg = lg.conjugate_momentum(&x, &v).unwrap();
        let grad = lam.eval_with_derivatives(&x).unwrap();
        for a in 0..4 {
            assert!((pg[a] - p[a] - grad.d(a)).abs() < 1e-14);
        }
        // still first-order homogeneous
        assert!(lg.hamiltonian(&x, &v).unwrap().abs() < 1e-12);
    }
}
