//! Extended objects: an embedding of the parameter box `[0,1]^D` into the
//! target, its Jacobian minors as generalized velocities, Dirac-Nambu-Goto
//! and one-form terms, and worldvolume quadrature.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::jet::Jet2;
use crate::quadrature::gauss_legendre;
use crate::tensor::{binomial, contract_full, factorial, SymTensor};

pub const MAX_BRANE_DIM: usize = 3;

/// Radicands below this magnitude are treated as a null worldvolume.
pub const NULL_RADICAND: f64 = 1e-14;

type MapFn = dyn Fn(&[Jet2]) -> Vec<Jet2> + Send + Sync;
type CoeffFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type OmegaTensorFn = dyn Fn(&[f64]) -> SymTensor<f64> + Send + Sync;

/// `φ: [0,1]^D → M`.
#[derive(Clone)]
pub struct Embedding {
    d: usize,
    m: usize,
    map: Arc<MapFn>,
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Embedding")
            .field("d", &self.d)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

impl Embedding {
    pub fn new(
        d: usize,
        m: usize,
        map: impl Fn(&[Jet2]) -> Vec<Jet2> + Send + Sync + 'static,
    ) -> Result<Self> {
        if d == 0 || d > MAX_BRANE_DIM || m < d {
            return Err(Error::InvalidArgument(format!(
                "brane dimension {d} must be in 1..={MAX_BRANE_DIM} and at most the target dimension {m}"
            )));
        }
        Ok(Embedding {
            d,
            m,
            map: Arc::new(map),
        })
    }

    /// `z ↦ x₀ + J z` with `J` row-major `m × D`.
    pub fn affine(d: usize, m: usize, x0: Vec<f64>, jac: Vec<f64>) -> Result<Self> {
        if x0.len() != m || jac.len() != m * d {
            return Err(Error::InvalidArgument("affine embedding shape".into()));
        }
        Embedding::new(d, m, move |z| {
            (0..m)
                .map(|a| {
                    let mut x = Jet2::constant(x0[a]);
                    for (b, zb) in z.iter().enumerate() {
                        x += zb * jac[a * d + b];
                    }
                    x
                })
                .collect()
        })
    }

    pub fn brane_dim(&self) -> usize {
        self.d
    }

    pub fn target_dim(&self) -> usize {
        self.m
    }

    fn check_param(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.d {
            return Err(Error::DimMismatch {
                expected: self.d,
                got: z.len(),
            });
        }
        Ok(())
    }

    pub fn point(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_param(z)?;
        Ok((self.map)(&Jet2::constants(z))
            .iter()
            .map(Jet2::value)
            .collect())
    }

    /// Target point and the row-major `m × D` Jacobian.
    pub fn jacobian(&self, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_param(z)?;
        let x = (self.map)(&Jet2::seed(z, 0, self.d));
        if x.len() != self.m {
            return Err(Error::DimMismatch {
                expected: self.m,
                got: x.len(),
            });
        }
        let point = x.iter().map(Jet2::value).collect();
        let jac = x
            .iter()
            .flat_map(|c| (0..self.d).map(move |b| c.d(b)))
            .collect();
        Ok((point, jac))
    }

    /// `φ ∘ ζ`
    pub fn compose(&self, zeta: &Reparametrization) -> Result<Embedding> {
        if zeta.d != self.d {
            return Err(Error::DimMismatch {
                expected: self.d,
                got: zeta.d,
            });
        }
        let (outer, inner) = (self.map.clone(), zeta.map.clone());
        Embedding::new(self.d, self.m, move |z| outer(&inner(z)))
    }
}

/// A map of the parameter box onto itself.
#[derive(Clone)]
pub struct Reparametrization {
    d: usize,
    map: Arc<MapFn>,
}

impl fmt::Debug for Reparametrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reparametrization")
            .field("d", &self.d)
            .finish_non_exhaustive()
    }
}

impl Reparametrization {
    pub fn new(d: usize, map: impl Fn(&[Jet2]) -> Vec<Jet2> + Send + Sync + 'static) -> Self {
        Reparametrization {
            d,
            map: Arc::new(map),
        }
    }

    pub fn identity(d: usize) -> Self {
        Reparametrization::new(d, |z| z.to_vec())
    }

    /// Jacobian determinant at `z`.
    pub fn jacobian_det(&self, z: &[f64]) -> f64 {
        let y = (self.map)(&Jet2::seed(z, 0, self.d));
        let j: Vec<f64> = y
            .iter()
            .flat_map(|c| (0..self.d).map(move |b| c.d(b)))
            .collect();
        det_small(&j, self.d)
    }
}

/// A strictly increasing `D`-tuple of target indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndexGamma(Vec<usize>);

impl MultiIndexGamma {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "{indices:?} is not strictly increasing"
            )));
        }
        Ok(MultiIndexGamma(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// All `C(m, d)` tuples in lexicographic order.
    pub fn all(m: usize, d: usize) -> Vec<MultiIndexGamma> {
        let mut out = Vec::with_capacity(binomial(m, d));
        let mut cur: Vec<usize> = (0..d).collect();
        if d == 0 || d > m {
            return out;
        }
        loop {
            out.push(MultiIndexGamma(cur.clone()));
            let Some(i) = (0..d).rev().find(|&i| cur[i] < m - d + i) else {
                break;
            };
            cur[i] += 1;
            for j in i + 1..d {
                cur[j] = cur[j - 1] + 1;
            }
        }
        out
    }
}

impl fmt::Display for MultiIndexGamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Determinant of a row-major `n × n` matrix, `n ≤ 3` in closed form.
pub fn det_small(a: &[f64], n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => nalgebra::DMatrix::from_row_slice(n, n, a).determinant(),
    }
}

/// Determinant of the `D × D` block of the `m × D` Jacobian picking `rows`
/// in the given order (not necessarily sorted).
pub fn raw_minor(jac: &[f64], d: usize, rows: &[usize]) -> f64 {
    let block: Vec<f64> = rows
        .iter()
        .flat_map(|&r| jac[r * d..(r + 1) * d].iter().copied())
        .collect();
    det_small(&block, d)
}

/// The generalized velocity `ω^Γ` at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Minors {
    pub point: Vec<f64>,
    pub gammas: Vec<MultiIndexGamma>,
    pub values: Vec<f64>,
    /// All minors vanish relative to the Jacobian scale (rank < D).
    pub degenerate: bool,
}

pub fn jacobian_minors(e: &Embedding, z: &[f64]) -> Result<Minors> {
    let (point, jac) = e.jacobian(z)?;
    let gammas = MultiIndexGamma::all(e.m, e.d);
    let values: Vec<f64> = gammas
        .iter()
        .map(|g| raw_minor(&jac, e.d, g.indices()))
        .collect();
    let jnorm = jac.iter().map(|c| c * c).sum::<f64>().sqrt();
    let largest = values.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
    let degenerate = !(largest > 1e-12 * jnorm.powi(e.d as i32)) || jnorm == 0.0;
    Ok(Minors {
        point,
        gammas,
        values,
        degenerate,
    })
}

/// Pull-back metric `h_ab = g_{αβ} ∂_a φ^α ∂_b φ^β`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedMetric {
    /// Row-major `D × D`.
    pub h: Vec<f64>,
    pub det: f64,
}

fn metric_matrix(g: &TensorField, x: &[f64]) -> Result<Vec<f64>> {
    if g.rank() != 2 {
        return Err(Error::InvalidArgument("metric must be rank 2".into()));
    }
    g.eval(x)?.to_matrix()
}

pub fn induced_metric(e: &Embedding, g: &TensorField, z: &[f64]) -> Result<InducedMetric> {
    if jacobian_minors(e, z)?.degenerate {
        return Err(Error::DegenerateJacobian { dim: e.d });
    }
    let (x, jac) = e.jacobian(z)?;
    let gm = metric_matrix(g, &x)?;
    let (m, d) = (e.m, e.d);
    let mut h = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            let mut s = 0.0;
            for al in 0..m {
                for be in 0..m {
                    s += gm[al * m + be] * jac[al * d + a] * jac[be * d + b];
                }
            }
            h[a * d + b] = s;
        }
    }
    let det = det_small(&h, d);
    Ok(InducedMetric { h, det })
}

/// `G_{ΓΓ'} = det(g[Γ, Γ'])`, the metric lowered slot by slot and
/// antisymmetrized over sorted tuples.
pub fn lowered_gamma_metric(gm: &[f64], m: usize, gammas: &[MultiIndexGamma]) -> Vec<f64> {
    let n = gammas.len();
    let d = gammas.first().map_or(0, |g| g.0.len());
    let mut out = vec![0.0; n * n];
    for (i, gi) in gammas.iter().enumerate() {
        for (j, gj) in gammas.iter().enumerate() {
            let block: Vec<f64> =
                gi.0.iter()
                    .flat_map(|&a| gj.0.iter().map(move |&b| gm[a * m + b]))
                    .collect();
            out[i * n + j] = det_small(&block, d);
        }
    }
    out
}

/// How the minors are contracted under the square root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DngNormalization {
    /// `sqrt|Y^Γ Y_Γ|` summed over all ordered tuples, `D!` times the
    /// worldvolume radicand.
    Paper,
    /// `sqrt|det h|`, the proper worldvolume element.
    #[default]
    CauchyBinet,
}

impl DngNormalization {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "paper" => Some(DngNormalization::Paper),
            "cauchy-binet" | "cauchy_binet" => Some(DngNormalization::CauchyBinet),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DngValue {
    pub value: f64,
    pub radicand: f64,
    /// Sign of the radicand before the absolute value is taken.
    pub sign: f64,
}

/// `Y^Γ Y_Γ` over all ordered `D`-tuples: `D! Σ ω^Γ G_{ΓΓ'} ω^Γ'`.
pub fn full_contraction(minors: &Minors, gm: &[f64], m: usize, d: usize) -> f64 {
    let n = minors.gammas.len();
    let big = lowered_gamma_metric(gm, m, &minors.gammas);
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += minors.values[i] * big[i * n + j] * minors.values[j];
        }
    }
    factorial(d) as f64 * s
}

pub fn dng_lagrangian(
    e: &Embedding,
    g: &TensorField,
    z: &[f64],
    normalization: DngNormalization,
) -> Result<DngValue> {
    let minors = jacobian_minors(e, z)?;
    if minors.degenerate {
        return Err(Error::DegenerateJacobian { dim: e.d });
    }
    let gm = metric_matrix(g, &minors.point)?;
    let full = full_contraction(&minors, &gm, e.m, e.d);
    let radicand = match normalization {
        DngNormalization::Paper => full,
        DngNormalization::CauchyBinet => full / factorial(e.d) as f64,
    };
    if !(radicand.abs() >= NULL_RADICAND) {
        return Err(Error::NullWorldvolume { radicand });
    }
    Ok(DngValue {
        value: radicand.abs().sqrt(),
        radicand,
        sign: radicand.signum(),
    })
}

/// Coefficients `Ω_Γ(x)` over the sorted tuples of a `D`-form on the target.
#[derive(Clone)]
pub struct FormCoefficients {
    m: usize,
    d: usize,
    eval: Arc<CoeffFn>,
}

impl fmt::Debug for FormCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormCoefficients")
            .field("m", &self.m)
            .field("d", &self.d)
            .finish_non_exhaustive()
    }
}

impl FormCoefficients {
    pub fn new(
        m: usize,
        d: usize,
        eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        FormCoefficients {
            m,
            d,
            eval: Arc::new(eval),
        }
    }

    pub fn constant(m: usize, d: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != binomial(m, d) {
            return Err(Error::DimMismatch {
                expected: binomial(m, d),
                got: coeffs.len(),
            });
        }
        Ok(FormCoefficients::new(m, d, move |_| coeffs.clone()))
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let c = (self.eval)(x);
        if c.len() != binomial(self.m, self.d) {
            return Err(Error::DimMismatch {
                expected: binomial(self.m, self.d),
                got: c.len(),
            });
        }
        Ok(c)
    }
}

/// `φ*(Ω)/dz = Ω_Γ ω^Γ` at `z`.
pub fn pullback_volume_check(e: &Embedding, omega: &FormCoefficients, z: &[f64]) -> Result<f64> {
    if omega.m != e.m || omega.d != e.d {
        return Err(Error::InvalidArgument(
            "form degree or dimension does not match the embedding".into(),
        ));
    }
    let minors = jacobian_minors(e, z)?;
    let c = omega.eval(&minors.point)?;
    Ok(c.iter().zip(&minors.values).map(|(a, b)| a * b).sum())
}

/// A root term `c (S(ω, …, ω))^{1/n}` over the `C(m, D)`-dimensional
/// generalized-velocity space.
#[derive(Clone)]
pub struct OmegaTerm {
    pub order: usize,
    pub weight: f64,
    eval: Arc<OmegaTensorFn>,
}

impl fmt::Debug for OmegaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OmegaTerm")
            .field("order", &self.order)
            .field("weight", &self.weight)
            .finish_non_exhaustive()
    }
}

impl OmegaTerm {
    pub fn new(
        order: usize,
        weight: f64,
        eval: impl Fn(&[f64]) -> SymTensor<f64> + Send + Sync + 'static,
    ) -> Self {
        OmegaTerm {
            order,
            weight,
            eval: Arc::new(eval),
        }
    }

    fn value(&self, x: &[f64], omega: &[f64]) -> Result<f64> {
        let s = (self.eval)(x);
        if s.rank() != self.order || s.dim() != omega.len() {
            return Err(Error::InvalidShape {
                rank: s.rank(),
                dim: s.dim(),
            });
        }
        let k = contract_full(&s, omega)?;
        if self.order.is_multiple_of(2) && k < 0.0 {
            return Err(Error::SignDomain {
                order: self.order,
                radicand: k,
            });
        }
        Ok(self.weight * k.signum() * k.abs().powf(1.0 / self.order as f64))
    }
}

/// `A_Γ ω^Γ + T·DNG + Σ c (S(ω…ω))^{1/n}`.
#[derive(Debug, Clone)]
pub struct BraneLagrangian {
    pub d: usize,
    pub m: usize,
    pub one_form: Option<FormCoefficients>,
    pub metric: Option<TensorField>,
    pub tension: f64,
    pub normalization: DngNormalization,
    pub higher: Vec<OmegaTerm>,
}

impl BraneLagrangian {
    pub fn new(d: usize, m: usize) -> Self {
        BraneLagrangian {
            d,
            m,
            one_form: None,
            metric: None,
            tension: 1.0,
            normalization: DngNormalization::default(),
            higher: Vec::new(),
        }
    }

    /// DNG term only.
    pub fn nambu_goto(
        d: usize,
        metric: TensorField,
        normalization: DngNormalization,
    ) -> Result<Self> {
        let mut b = BraneLagrangian::new(d, metric.dim());
        b.normalization = normalization;
        b.with_metric(metric)
    }

    pub fn with_metric(mut self, g: TensorField) -> Result<Self> {
        if g.rank() != 2 || g.dim() != self.m {
            return Err(Error::InvalidShape {
                rank: g.rank(),
                dim: g.dim(),
            });
        }
        self.metric = Some(g);
        Ok(self)
    }

    pub fn with_one_form(mut self, a: FormCoefficients) -> Result<Self> {
        if a.m != self.m || a.d != self.d {
            return Err(Error::InvalidArgument(
                "one-form degree or dimension mismatch".into(),
            ));
        }
        self.one_form = Some(a);
        Ok(self)
    }

    pub fn with_tension(mut self, t: f64) -> Self {
        self.tension = t;
        self
    }

    pub fn with_higher(mut self, term: OmegaTerm) -> Result<Self> {
        if term.order < 1 || term.order > crate::tensor::MAX_RANK {
            return Err(Error::InvalidArgument(format!("order {}", term.order)));
        }
        self.higher.push(term);
        Ok(self)
    }

    pub fn eval(&self, e: &Embedding, z: &[f64]) -> Result<f64> {
        if e.d != self.d || e.m != self.m {
            return Err(Error::InvalidArgument(
                "embedding does not match the brane Lagrangian".into(),
            ));
        }
        let minors = jacobian_minors(e, z)?;
        let mut total = 0.0;
        if let Some(a) = &self.one_form {
            let c = a.eval(&minors.point)?;
            total += c
                .iter()
                .zip(&minors.values)
                .map(|(p, q)| p * q)
                .sum::<f64>();
        }
        if let Some(g) = &self.metric {
            total += self.tension * dng_lagrangian(e, g, z, self.normalization)?.value;
        }
        for t in &self.higher {
            total += t.value(&minors.point, &minors.values)?;
        }
        Ok(total)
    }
}

/// Tensor-product Gauss-Legendre settings over `[0,1]^D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BraneQuadrature {
    pub order: usize,
    /// Panels per axis at the first level.
    pub panels: usize,
    /// Panel doublings allowed; 0 evaluates once.
    pub refine: usize,
    pub tol: f64,
}

impl Default for BraneQuadrature {
    fn default() -> Self {
        BraneQuadrature {
            order: 8,
            panels: 2,
            refine: 0,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionEstimate {
    pub value: f64,
    pub panels: usize,
    /// Difference to the previous level; NaN without refinement.
    pub change: f64,
}

// Nodes and weights of the tensor-product rule, fixed row-major order.
fn box_nodes(d: usize, order: usize, panels: usize) -> Vec<(Vec<f64>, f64)> {
    let (z, w) = gauss_legendre(order);
    let h = 1.0 / panels as f64;
    let axis: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| {
            let lo = h * p as f64;
            z.iter()
                .zip(&w)
                .map(move |(zi, wi)| (lo + 0.5 * h * (zi + 1.0), 0.5 * h * wi))
        })
        .collect();
    let mut out = vec![(Vec::new(), 1.0)];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|(pt, wt)| {
                axis.iter().map(move |(t, w)| {
                    let mut p = pt.clone();
                    p.push(*t);
                    (p, wt * w)
                })
            })
            .collect();
    }
    out
}

fn action_at(e: &Embedding, bl: &BraneLagrangian, order: usize, panels: usize) -> Result<f64> {
    let mut s = 0.0;
    for (z, w) in box_nodes(e.d, order, panels) {
        s += w * bl.eval(e, &z)?;
    }
    Ok(s)
}

/// `∫_{[0,1]^D} L(φ, ω) dz`.
pub fn brane_action(
    e: &Embedding,
    bl: &BraneLagrangian,
    q: &BraneQuadrature,
) -> Result<ActionEstimate> {
    if q.order < 1 || q.panels < 1 {
        return Err(Error::InvalidArgument(
            "quadrature needs order and panels of at least 1".into(),
        ));
    }
    let mut panels = q.panels;
    let mut value = action_at(e, bl, q.order, panels)?;
    if q.refine == 0 {
        return Ok(ActionEstimate {
            value,
            panels,
            change: f64::NAN,
        });
    }
    let mut change = f64::INFINITY;
    for _ in 0..q.refine {
        panels *= 2;
        let next = action_at(e, bl, q.order, panels)?;
        change = (next - value).abs();
        value = next;
        if change <= q.tol * value.abs().max(1.0) {
            return Ok(ActionEstimate {
                value,
                panels,
                change,
            });
        }
    }
    Err(Error::NoConvergence {
        levels: q.refine,
        last_change: change,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffeoReport {
    pub original: f64,
    pub pulled: f64,
    pub rel_diff: f64,
}

/// Compares the action of `e` with that of `e ∘ ζ`.
pub fn diffeo_test(
    e: &Embedding,
    bl: &BraneLagrangian,
    zeta: &Reparametrization,
    q: &BraneQuadrature,
) -> Result<DiffeoReport> {
    let finest = q.panels << q.refine;
    for (z, _) in box_nodes(e.d, q.order, finest) {
        let det = zeta.jacobian_det(&z);
        if !(det > 0.0) {
            return Err(Error::NonOrientation { det });
        }
    }
    let original = brane_action(e, bl, q)?.value;
    let pulled = brane_action(&e.compose(zeta)?, bl, q)?.value;
    let rel_diff = (pulled - original).abs() / original.abs().max(f64::MIN_POSITIVE);
    Ok(DiffeoReport {
        original,
        pulled,
        rel_diff,
    })
}

/// Packed index of `Γ` among the sorted tuples, for callers holding
/// coefficient vectors.
pub fn gamma_position(gamma: &MultiIndexGamma, m: usize) -> Option<usize> {
    MultiIndexGamma::all(m, gamma.0.len())
        .iter()
        .position(|g| g == gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backgrounds::minkowski_metric;

    fn flat_sheet() -> Embedding {
        Embedding::new(2, 4, |z| {
            vec![
                z[0].clone(),
                z[1].clone(),
                Jet2::constant(0.0),
                Jet2::constant(0.0),
            ]
        })
        .unwrap()
    }

    #[test]
    fn gamma_enumeration() {
        let g = MultiIndexGamma::all(4, 2);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0].indices(), &[0, 1]);
        assert_eq!(g[5].indices(), &[2, 3]);
        assert_eq!(MultiIndexGamma::all(5, 3).len(), 10);
        assert_eq!(MultiIndexGamma::all(4, 1).len(), 4);
        assert!(MultiIndexGamma::new(vec![2, 1]).is_err());
        assert_eq!(
            gamma_position(&MultiIndexGamma::new(vec![1, 3]).unwrap(), 4),
            Some(4)
        );
    }

    #[test]
    fn flat_sheet_minors_and_metric() {
        let e = flat_sheet();
        let m = jacobian_minors(&e, &[0.3, 0.6]).unwrap();
        assert_eq!(m.values, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(!m.degenerate);
        let eta = minkowski_metric(4).unwrap();
        let h = induced_metric(&e, &eta, &[0.3, 0.6]).unwrap();
        assert_eq!(h.h, vec![1.0, 0.0, 0.0, -1.0]);
        assert_eq!(h.det, -1.0);
        let cb = dng_lagrangian(&e, &eta, &[0.3, 0.6], DngNormalization::CauchyBinet).unwrap();
        assert_eq!((cb.value, cb.sign), (1.0, -1.0));
        let paper = dng_lagrangian(&e, &eta, &[0.3, 0.6], DngNormalization::Paper).unwrap();
        assert!((paper.value - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn string_minors_match_explicit_determinants() {
        let jac = [0.3, -1.2, 0.7, 0.4, -0.5, 2.0, 1.1, 0.9];
        let e = Embedding::affine(2, 4, vec![0.0; 4], jac.to_vec()).unwrap();
        let m = jacobian_minors(&e, &[0.5, 0.5]).unwrap();
        for (g, val) in m.gammas.iter().zip(&m.values) {
            let (a, b) = (g.indices()[0], g.indices()[1]);
            let y = jac[a * 2] * jac[b * 2 + 1] - jac[a * 2 + 1] * jac[b * 2];
            assert!((val - y).abs() < 1e-15);
        }
    }

    #[test]
    fn raw_minor_is_antisymmetric() {
        let jac = [
            0.3, -1.2, 0.5, 0.7, 0.4, 0.1, -0.5, 2.0, 0.8, 1.1, 0.9, -0.6, 0.2, 0.3, 0.4,
        ];
        let a = raw_minor(&jac, 3, &[0, 2, 4]);
        assert!((raw_minor(&jac, 3, &[2, 0, 4]) + a).abs() < 1e-15);
        assert!((raw_minor(&jac, 3, &[0, 4, 2]) + a).abs() < 1e-15);
        assert!((raw_minor(&jac, 3, &[4, 0, 2]) - a).abs() < 1e-15);
        assert!(raw_minor(&jac, 3, &[1, 1, 4]).abs() < 1e-15);
    }

    #[test]
    fn particle_reduction() {
        let e = Embedding::new(1, 4, |z| {
            vec![
                &z[0] * 2.0,
                &z[0] * 0.5,
                Jet2::constant(1.0),
                &z[0] * &z[0] * 0.1,
            ]
        })
        .unwrap();
        let z = 0.4;
        let v = [2.0, 0.5, 0.0, 0.2 * z];
        let m = jacobian_minors(&e, &[z]).unwrap();
        assert_eq!(m.values, v.to_vec());
        let eta = minkowski_metric(4).unwrap();
        let d = dng_lagrangian(&e, &eta, &[z], DngNormalization::CauchyBinet).unwrap();
        let gvv = v[0] * v[0] - v[1] * v[1] - v[3] * v[3];
        assert!((d.value - gvv.sqrt()).abs() < 1e-15);
        let h = induced_metric(&e, &eta, &[z]).unwrap();
        assert!((h.det - gvv).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_null_cases() {
        let e = Embedding::new(2, 3, |z| {
            vec![z[0].clone(), z[0].clone(), Jet2::constant(0.0)]
        })
        .unwrap();
        assert!(jacobian_minors(&e, &[0.1, 0.2]).unwrap().degenerate);
        let g = minkowski_metric(3).unwrap();
        assert!(matches!(
            induced_metric(&e, &g, &[0.1, 0.2]),
            Err(Error::DegenerateJacobian { dim: 2 })
        ));
        // null sheet spanned by a lightlike and a spacelike direction
        let n = Embedding::new(2, 3, |z| vec![z[0].clone(), z[0].clone(), z[1].clone()]).unwrap();
        assert!(matches!(
            dng_lagrangian(&n, &g, &[0.5, 0.5], DngNormalization::CauchyBinet),
            Err(Error::NullWorldvolume { .. })
        ));
        assert!(Embedding::new(4, 5, |z| z.to_vec()).is_err());
    }

    #[test]
    fn flat_sheet_actions() {
        let eta = minkowski_metric(4).unwrap();
        let e = flat_sheet();
        let q = BraneQuadrature::default();
        let bl =
            BraneLagrangian::nambu_goto(2, eta.clone(), DngNormalization::CauchyBinet).unwrap();
        assert!((brane_action(&e, &bl, &q).unwrap().value - 1.0).abs() < 1e-14);
        let paper = BraneLagrangian::nambu_goto(2, eta, DngNormalization::Paper).unwrap();
        assert!((brane_action(&e, &paper, &q).unwrap().value - 2f64.sqrt()).abs() < 1e-14);
        let a = FormCoefficients::constant(4, 2, vec![0.7, 0.0, 0.0, 0.0, 0.0, 3.0]).unwrap();
        let wz = BraneLagrangian::new(2, 4).with_one_form(a).unwrap();
        assert!((brane_action(&e, &wz, &q).unwrap().value - 0.7).abs() < 1e-14);
    }

    #[test]
    fn pullback_of_coordinate_forms() {
        let e = flat_sheet();
        let omega = FormCoefficients::constant(4, 2, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(pullback_volume_check(&e, &omega, &[0.2, 0.9]).unwrap(), 1.0);
        let line = Embedding::affine(1, 3, vec![0.0; 3], vec![1.0, 2.0, -1.0]).unwrap();
        let a = FormCoefficients::new(3, 1, |x| vec![x[0], 1.0, 2.0]);
        let z = 0.25;
        let direct = z * 1.0 + 2.0 - 2.0;
        assert!((pullback_volume_check(&line, &a, &[z]).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn orientation_reversal_is_rejected() {
        let e = flat_sheet();
        let bl = BraneLagrangian::nambu_goto(
            2,
            minkowski_metric(4).unwrap(),
            DngNormalization::CauchyBinet,
        )
        .unwrap();
        let flip = Reparametrization::new(2, |z| vec![1.0 - &z[0], z[1].clone()]);
        assert!(matches!(
            diffeo_test(&e, &bl, &flip, &BraneQuadrature::default()),
            Err(Error::NonOrientation { .. })
        ));
        let id = diffeo_test(
            &e,
            &bl,
            &Reparametrization::identity(2),
            &BraneQuadrature::default(),
        )
        .unwrap();
        assert_eq!(id.rel_diff, 0.0);
    }

    #[test]
    fn omega_space_quadratic_term_matches_dng() {
        // G_{ΓΓ'} from a Euclidean metric as an explicit rank-2 tensor on ω-space
        let e = Embedding::affine(2, 3, vec![0.0; 3], vec![1.0, 0.2, 0.0, 1.0, 0.3, -0.4]).unwrap();
        let eye = TensorField::constant(SymTensor::diagonal(&[1.0, 1.0, 1.0]).unwrap());
        let gammas = MultiIndexGamma::all(3, 2);
        let big = lowered_gamma_metric(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], 3, &gammas);
        let s = SymTensor::from_matrix(3, &big).unwrap();
        let t = BraneLagrangian::new(2, 3)
            .with_higher(OmegaTerm::new(2, 1.0, move |_| s.clone()))
            .unwrap();
        let dng = dng_lagrangian(&e, &eye, &[0.5, 0.5], DngNormalization::CauchyBinet)
            .unwrap()
            .value;
        assert!((t.eval(&e, &[0.5, 0.5]).unwrap() - dng).abs() < 1e-15);
    }
}
