//! Ready-made interaction-field configurations and 1-form helpers.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{ScalarField, TensorField};
use crate::jet::Jet2;
use crate::lagrangian::{CanonicalTerm, Lagrangian};
use crate::tensor::{pack_index, packed_len, SymTensor};

/// Names accepted by [`make_preset`].
pub const PRESET_NAMES: [&str; 6] = [
    "minkowski",
    "schwarzschild",
    "uniform_em",
    "coulomb_em",
    "sn_ansatz",
    "minkowski_plus_sn",
];

/// Polynomial `c0 + c1 r + c2 r^2 + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn eval(&self, r: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * r + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn eval_jet(&self, r: &Jet2) -> Jet2 {
        self.0
            .iter()
            .rev()
            .fold(Jet2::constant(0.0), |acc, &c| acc * r + c)
    }
}

/// Radial profiles of the static, rotationally symmetric order-`n` field
/// `S_n(v) = ψ(r) w^n + φ(r) v^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzProfiles {
    pub psi: Polynomial,
    pub phi: Polynomial,
}

/// Preset name and parameters. List-valued parameters (profile
/// coefficients) are stored as-is; scalars are one-element lists.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PresetSpec {
    pub name: String,
    pub params: BTreeMap<String, Vec<f64>>,
}

impl PresetSpec {
    pub fn new(name: impl Into<String>) -> Self {
        PresetSpec {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), vec![value]);
        self
    }

    pub fn with_list(mut self, key: &str, values: &[f64]) -> Self {
        self.params.insert(key.to_string(), values.to_vec());
        self
    }

    fn scalar(&self, key: &str) -> Result<f64> {
        match self.params.get(key) {
            Some(v) if v.len() == 1 => Ok(v[0]),
            Some(_) => Err(Error::InvalidArgument(format!(
                "parameter `{key}` must be a single number"
            ))),
            None => Err(Error::MissingParam {
                preset: self.name.clone(),
                param: key.to_string(),
            }),
        }
    }

    fn scalar_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.params.contains_key(key) {
            self.scalar(key)
        } else {
            Ok(default)
        }
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        self.params
            .get(key)
            .cloned()
            .ok_or_else(|| Error::MissingParam {
                preset: self.name.clone(),
                param: key.to_string(),
            })
    }

    /// Parameter keys each preset understands.
    pub fn known_params(name: &str) -> Option<&'static [&'static str]> {
        Some(match name {
            "minkowski" => &["dim", "m"],
            "schwarzschild" => &["M", "m"],
            "uniform_em" => &["B", "q", "m"],
            "coulomb_em" => &["Z", "q", "m"],
            "sn_ansatz" => &["n", "psi", "phi", "delta"],
            "minkowski_plus_sn" => &["n", "psi", "phi", "m", "delta"],
            _ => return None,
        })
    }
}

/// Fields of a preset and the canonical Lagrangian wiring them.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub dim: usize,
    pub metric: Option<TensorField>,
    pub potential: Option<TensorField>,
    pub higher: Option<TensorField>,
    pub profiles: Option<AnsatzProfiles>,
    pub lagrangian: Lagrangian,
}

impl Preset {
    /// All fields, ordered by rank.
    pub fn fields(&self) -> Vec<TensorField> {
        [&self.potential, &self.metric, &self.higher]
            .into_iter()
            .flatten()
            .cloned()
            .collect()
    }

    /// Field of the given rank, if the preset provides one.
    pub fn field_of_order(&self, order: usize) -> Option<&TensorField> {
        self.fields_ref().into_iter().find(|f| f.rank() == order)
    }

    fn fields_ref(&self) -> Vec<&TensorField> {
        [&self.potential, &self.metric, &self.higher]
            .into_iter()
            .flatten()
            .collect()
    }
}

/// Flat metric `diag(1, -1, ..., -1)`.
pub fn minkowski_metric(dim: usize) -> Result<TensorField> {
    let mut diag = vec![-1.0; dim];
    diag[0] = 1.0;
    Ok(TensorField::constant(SymTensor::diagonal(&diag)?))
}

/// Static Schwarzschild metric in `(t, r, θ, φ)`. Components are NaN inside
/// the guard radius `r <= 2.1 M` (and for `r <= 0`).
pub fn schwarzschild_metric(mass: f64) -> Result<TensorField> {
    TensorField::diagonal(4, move |x| {
        let r = &x[1];
        if !(r.value() > 2.1 * mass && r.value() > 0.0) {
            return vec![Jet2::constant(f64::NAN); 4];
        }
        let f = 1.0 - 2.0 * mass / r;
        let r2 = r * r;
        let s = x[2].sin();
        vec![f.clone(), -1.0 / f, -&r2, -(r2 * &s * &s)]
    })
}

/// `A = (0, 0, B x^1, 0)`: uniform field with `F_12 = B`.
pub fn uniform_potential(b: f64) -> Result<TensorField> {
    TensorField::covector(4, move |x| {
        vec![
            Jet2::constant(0.0),
            Jet2::constant(0.0),
            b * &x[1],
            Jet2::constant(0.0),
        ]
    })
}

/// `A = (Z / r, 0, 0, 0)` with `r` the spatial Euclidean radius.
pub fn coulomb_potential(z: f64) -> Result<TensorField> {
    TensorField::covector(4, move |x| {
        let r = (&x[1] * &x[1] + &x[2] * &x[2] + &x[3] * &x[3]).sqrt();
        vec![
            z / r,
            Jet2::constant(0.0),
            Jet2::constant(0.0),
            Jet2::constant(0.0),
        ]
    })
}

/// Rank-`n` field on the `(t, r)` chart with only `S_{t..t} = ψ(r)` and
/// `S_{r..r} = φ(r)` nonzero.
pub fn ansatz_field(n: usize, profiles: &AnsatzProfiles) -> Result<TensorField> {
    let tt = pack_index(&vec![0; n], 2)?;
    let rr = pack_index(&vec![1; n], 2)?;
    let len = packed_len(n, 2);
    let p = profiles.clone();
    TensorField::new(n, 2, move |x| {
        let mut out = vec![Jet2::constant(0.0); len];
        out[tt] = p.psi.eval_jet(&x[1]);
        out[rr] = p.phi.eval_jet(&x[1]);
        out
    })
}

fn ansatz_order(spec: &PresetSpec) -> Result<usize> {
    let n = spec.scalar("n")?;
    if n.fract() != 0.0 || !(1.0..=6.0).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "order n = {n} must be an integer in 1..=6"
        )));
    }
    Ok(n as usize)
}

pub fn make_preset(spec: &PresetSpec) -> Result<Preset> {
    let Some(known) = PresetSpec::known_params(&spec.name) else {
        return Err(Error::UnknownPreset(spec.name.clone()));
    };
    if let Some(extra) = spec.params.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::InvalidArgument(format!(
            "preset `{}` has no parameter `{extra}`",
            spec.name
        )));
    }
    let mut preset = Preset {
        name: spec.name.clone(),
        dim: 4,
        metric: None,
        potential: None,
        higher: None,
        profiles: None,
        lagrangian: Lagrangian::new(4),
    };
    match spec.name.as_str() {
        "minkowski" => {
            let dim = spec.scalar_or("dim", 4.0)?;
            if dim.fract() != 0.0 || dim < 2.0 {
                return Err(Error::InvalidArgument(format!("dim = {dim}")));
            }
            let dim = dim as usize;
            let g = minkowski_metric(dim)?;
            preset.dim = dim;
            preset.lagrangian = Lagrangian::canonical(
                dim,
                [CanonicalTerm::new(2, spec.scalar_or("m", 1.0)?, g.clone())?],
            )?;
            preset.metric = Some(g);
        }
        "schwarzschild" => {
            let g = schwarzschild_metric(spec.scalar("M")?)?;
            preset.lagrangian = Lagrangian::canonical(
                4,
                [CanonicalTerm::new(2, spec.scalar_or("m", 1.0)?, g.clone())?],
            )?;
            preset.metric = Some(g);
        }
        "uniform_em" | "coulomb_em" => {
            let a = if spec.name == "uniform_em" {
                uniform_potential(spec.scalar("B")?)?
            } else {
                coulomb_potential(spec.scalar("Z")?)?
            };
            let g = minkowski_metric(4)?;
            preset.lagrangian = Lagrangian::canonical(
                4,
                [
                    CanonicalTerm::new(1, spec.scalar_or("q", 1.0)?, a.clone())?,
                    CanonicalTerm::new(2, spec.scalar_or("m", 1.0)?, g.clone())?,
                ],
            )?;
            preset.metric = Some(g);
            preset.potential = Some(a);
        }
        "sn_ansatz" | "minkowski_plus_sn" => {
            let n = ansatz_order(spec)?;
            let profiles = AnsatzProfiles {
                psi: Polynomial(spec.list("psi")?),
                phi: Polynomial(spec.list("phi")?),
            };
            let s = ansatz_field(n, &profiles)?;
            preset.dim = 2;
            let mut terms = Vec::new();
            if spec.name == "minkowski_plus_sn" {
                let eta = minkowski_metric(2)?;
                terms.push(CanonicalTerm::new(
                    2,
                    spec.scalar_or("m", 1.0)?,
                    eta.clone(),
                )?);
                terms.push(CanonicalTerm::new(n, spec.scalar("delta")?, s.clone())?);
                preset.metric = Some(eta);
            } else {
                terms.push(CanonicalTerm::new(
                    n,
                    spec.scalar_or("delta", 1.0)?,
                    s.clone(),
                )?);
            }
            preset.lagrangian = Lagrangian::canonical(2, terms)?;
            preset.higher = Some(s);
            preset.profiles = Some(profiles);
        }
        _ => unreachable!("checked against known_params"),
    }
    Ok(preset)
}

/// `F_{μν} = ∂_μ A_ν − ∂_ν A_μ`, dense row-major.
pub fn faraday(a: &TensorField, x: &[f64]) -> Result<Vec<f64>> {
    if a.rank() != 1 {
        return Err(Error::InvalidArgument(
            "faraday needs a rank-1 field".into(),
        ));
    }
    let m = a.dim();
    let comps = a.eval_with_derivatives(x)?;
    let c = comps.packed();
    let mut f = vec![0.0; m * m];
    for mu in 0..m {
        for nu in 0..m {
            f[mu * m + nu] = c[nu].d(mu) - c[mu].d(nu);
        }
    }
    Ok(f)
}

/// `A' = A + df`.
///
/// `df` is differentiated once by the jet machinery, so `A'` carries exact
/// values and first derivatives; its second derivatives omit the third
/// derivatives of `f`, which neither the field strength nor the equations of
/// motion use.
pub fn gauge_transform(a: &TensorField, f: &ScalarField) -> Result<TensorField> {
    if a.rank() != 1 || a.dim() != f.dim() {
        return Err(Error::InvalidArgument(
            "gauge transform needs a rank-1 field and a scalar of the same dimension".into(),
        ));
    }
    let (a, f) = (a.clone(), f.clone());
    let m = a.dim();
    TensorField::covector(m, move |x| {
        let base = match a.eval_jet(x) {
            Ok(t) => t.into_packed(),
            Err(_) => return vec![Jet2::constant(f64::NAN); m],
        };
        let point: Vec<f64> = x.iter().map(Jet2::value).collect();
        let Ok(fj) = f.eval_with_derivatives(&point) else {
            return vec![Jet2::constant(f64::NAN); m];
        };
        base.into_iter()
            .enumerate()
            .map(|(mu, a_mu)| {
                // ∂_μ f as a function of the caller's variables, to first order
                let mut df = Jet2::constant(fj.d(mu));
                for (nu, xn) in x.iter().enumerate() {
                    df += (xn - xn.value()) * fj.dd(mu, nu);
                }
                a_mu + df
            })
            .collect()
    })
}

/// Closed-form `(dv/dτ, dw/dτ)` for `L = S_n(v)` with the radial ansatz,
/// where `w = dt/dτ` and `v = dr/dτ`:
///
/// ```text
/// dv/dτ = −v² φ'/(n φ) + w^n ψ' / (n (n−1) φ v^{n−2})
/// dw/dτ = −w v ψ' / ((n−1) ψ)
/// ```
pub fn ansatz_accel(
    n: usize,
    profiles: &AnsatzProfiles,
    w: f64,
    v: f64,
    r: f64,
) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "ansatz order {n} must be at least 2"
        )));
    }
    let psi = profiles.psi.eval(r);
    let phi = profiles.phi.eval(r);
    if psi.abs() < 1e-14 || phi.abs() < 1e-14 {
        return Err(Error::ZeroProfile { r });
    }
    if n > 2 && v.abs() < 1e-12 {
        return Err(Error::ZeroVelocity { v });
    }
    let dpsi = profiles.psi.derivative().eval(r);
    let dphi = profiles.phi.derivative().eval(r);
    let nf = n as f64;
    let dv = -v * v * dphi / (nf * phi)
        + w.powi(n as i32) * dpsi / (nf * (nf - 1.0) * phi * v.powi(n as i32 - 2));
    let dw = -w * v * dpsi / ((nf - 1.0) * psi);
    Ok((dv, dw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profiles(psi: &[f64], phi: &[f64]) -> AnsatzProfiles {
        AnsatzProfiles {
            psi: Polynomial(psi.to_vec()),
            phi: Polynomial(phi.to_vec()),
        }
    }

    #[test]
    fn minkowski_and_schwarzschild() {
        let p = make_preset(&PresetSpec::new("minkowski")).unwrap();
        let g = p.metric.unwrap().eval(&[3.0, 1.0, -2.0, 0.5]).unwrap();
        assert_eq!(g, SymTensor::diagonal(&[1.0, -1.0, -1.0, -1.0]).unwrap());

        let s = make_preset(&PresetSpec::new("schwarzschild").with("M", 1.0)).unwrap();
        let g = s
            .metric
            .unwrap()
            .eval(&[0.0, 10.0, std::f64::consts::FRAC_PI_2, 0.0])
            .unwrap();
        assert!((g.get(&[0, 0]).unwrap() - 0.8).abs() < 1e-15);
        assert!((g.get(&[1, 1]).unwrap() + 1.25).abs() < 1e-15);
        assert!((g.get(&[2, 2]).unwrap() + 100.0).abs() < 1e-12);
    }

    #[test]
    fn schwarzschild_reduces_to_flat_at_zero_mass() {
        let s = make_preset(&PresetSpec::new("schwarzschild").with("M", 0.0)).unwrap();
        let x = [0.0, 3.0, 1.1, 0.2];
        let g = s.metric.unwrap().eval(&x).unwrap();
        let r2 = 9.0;
        let s2 = 1.1f64.sin().powi(2);
        let flat = SymTensor::diagonal(&[1.0, -1.0, -r2, -r2 * s2]).unwrap();
        for (a, b) in g.packed().iter().zip(flat.packed()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn horizon_guard_yields_nan() {
        let g = schwarzschild_metric(1.0).unwrap();
        let c = g.eval(&[0.0, 2.05, 1.0, 0.0]).unwrap();
        assert!(c.packed().iter().any(|v| v.is_nan()));
    }

    #[test]
    fn preset_errors() {
        assert_eq!(
            make_preset(&PresetSpec::new("kerr")).unwrap_err(),
            Error::UnknownPreset("kerr".into())
        );
        assert!(matches!(
            make_preset(&PresetSpec::new("schwarzschild")),
            Err(Error::MissingParam { .. })
        ));
        assert!(make_preset(&PresetSpec::new("minkowski").with("B", 1.0)).is_err());
    }

    #[test]
    fn ansatz_components() {
        let spec = PresetSpec::new("sn_ansatz")
            .with("n", 4.0)
            .with_list("psi", &[1.0, 0.1])
            .with_list("phi", &[1.0]);
        let p = make_preset(&spec).unwrap();
        let s = p.higher.unwrap().eval(&[0.0, 3.0]).unwrap();
        assert!((s.get(&[0, 0, 0, 0]).unwrap() - 1.3).abs() < 1e-15);
        assert_eq!(*s.get(&[1, 1, 1, 1]).unwrap(), 1.0);
        for mixed in [[0, 0, 0, 1], [0, 0, 1, 1], [0, 1, 1, 1]] {
            assert_eq!(*s.get(&mixed).unwrap(), 0.0);
        }
    }

    #[test]
    fn faraday_examples() {
        let exact = ScalarField::new(4, |x| &x[0] * &x[1]);
        let zero = TensorField::constant(SymTensor::from_packed(1, 4, vec![0.0; 4]).unwrap());
        let df = gauge_transform(&zero, &exact).unwrap();
        let f = faraday(&df, &[0.3, -0.4, 1.0, 2.0]).unwrap();
        assert!(f.iter().all(|c| c.abs() < 1e-15));

        let b = 2.5;
        let f = faraday(&uniform_potential(b).unwrap(), &[0.1, 0.2, 0.3, 0.4]).unwrap();
        for mu in 0..4 {
            for nu in 0..4 {
                let expect = match (mu, nu) {
                    (1, 2) => b,
                    (2, 1) => -b,
                    _ => 0.0,
                };
                assert_eq!(f[mu * 4 + nu], expect);
            }
        }

        // A_0 = Z / r: F_{0i} = −∂_i A_0 = Z x^i / r^3
        let z = 0.7;
        let x = [0.0, 1.0, -2.0, 0.5];
        let r = (1.0f64 + 4.0 + 0.25).sqrt();
        let f = faraday(&coulomb_potential(z).unwrap(), &x).unwrap();
        for i in 1..4 {
            let expect = z * x[i] / r.powi(3);
            assert!((f[i] - expect).abs() < 1e-15);
            assert!((f[i * 4] + expect).abs() < 1e-15);
        }
    }

    #[test]
    fn gauge_transform_examples() {
        let a = coulomb_potential(1.2).unwrap();
        let x = [0.5, 1.0, 0.3, -0.7];
        let constant = gauge_transform(&a, &ScalarField::new(4, |_| Jet2::constant(3.0))).unwrap();
        assert_eq!(constant.eval(&x).unwrap(), a.eval(&x).unwrap());

        let shift = gauge_transform(&a, &ScalarField::new(4, |x| x[0].clone())).unwrap();
        let (before, after) = (a.eval(&x).unwrap(), shift.eval(&x).unwrap());
        assert!((after.packed()[0] - before.packed()[0] - 1.0).abs() < 1e-15);

        let wild = ScalarField::new(4, |x| {
            (&x[0] * &x[2]).sin() * x[1].exp() + &x[3] * &x[3] * &x[1]
        });
        let moved = gauge_transform(&a, &wild).unwrap();
        let f0 = faraday(&a, &x).unwrap();
        let f1 = faraday(&moved, &x).unwrap();
        for (p, q) in f0.iter().zip(&f1) {
            assert!((p - q).abs() <= 1e-12);
        }
    }

    #[test]
    fn ansatz_accel_examples() {
        let flat = profiles(&[2.0], &[3.0]);
        assert_eq!(ansatz_accel(4, &flat, 1.2, 0.5, 1.0).unwrap(), (0.0, 0.0));

        let c = 0.3;
        let (dv, dw) = ansatz_accel(2, &profiles(&[1.0], &[1.0, c]), 1.0, 0.5, 0.0).unwrap();
        assert!((dv + 0.25 * c / 2.0).abs() < 1e-15);
        assert_eq!(dw, 0.0);
        // no blow-up at n = 2
        assert!(ansatz_accel(2, &profiles(&[1.0], &[1.0, c]), 1.0, 0.0, 0.0).is_ok());

        // n = 4, ψ' = 1, ψ = φ = 1 at r = 0, w = 1, v = 0.1:
        // second term = w^4 ψ' / (4·3·φ·v²) = 100/12
        let p = profiles(&[1.0, 1.0], &[1.0]);
        let (dv, _) = ansatz_accel(4, &p, 1.0, 0.1, 0.0).unwrap();
        assert!((dv - 100.0 / 12.0).abs() < 1e-12);

        assert!(matches!(
            ansatz_accel(4, &p, 1.0, 0.0, 0.0),
            Err(Error::ZeroVelocity { .. })
        ));
        assert!(matches!(
            ansatz_accel(4, &profiles(&[0.0], &[1.0]), 1.0, 0.1, 0.0),
            Err(Error::ZeroProfile { .. })
        ));
    }

    #[test]
    fn polynomial_helpers() {
        let p = Polynomial(vec![1.0, -2.0, 0.5]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 2.0);
        assert_eq!(p.derivative(), Polynomial(vec![-2.0, 1.0]));
        let j = p.eval_jet(&Jet2::variable(2.0, 0, 1));
        assert_eq!(j.value(), -1.0);
        assert_eq!(j.d(0), 0.0);
        assert_eq!(j.dd(0, 0), 1.0);
    }
}
