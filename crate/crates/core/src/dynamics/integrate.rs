use crate::error::{Error, Result};
use crate::lagrangian::{dot, Lagrangian};
use crate::tensor::contract_full;

use super::{assemble_eom, gauge_function, GaugeChoice, State};

/// What to do about slow drift of the gauge quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftPolicy {
    #[default]
    Off,
    /// After each step rescale `v` so the gauge quantity returns to its
    /// initial value (uses its homogeneity degree in `v`).
    Renormalize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub step: f64,
    pub n_steps: usize,
    pub drift_policy: DriftPolicy,
}

impl IntegrateOptions {
    pub fn new(step: f64, n_steps: usize) -> Self {
        IntegrateOptions {
            step,
            n_steps,
            drift_policy: DriftPolicy::Off,
        }
    }

    pub fn with_drift_policy(mut self, policy: DriftPolicy) -> Self {
        self.drift_policy = policy;
        self
    }
}

/// Quantities recorded with each sample. Entries that cannot be evaluated
/// at a sample are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monitor {
    pub lagrangian: f64,
    pub hamiltonian: f64,
    /// `g(v, v)` for the order-2 field, NaN when there is none.
    pub metric_norm: f64,
    pub gauge_value: f64,
    /// `(G − G₀)/|G₀|`, or `G − G₀` when `G₀ = 0`.
    pub drift: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub gauge: String,
    pub samples: Vec<State>,
    pub monitors: Vec<Monitor>,
    /// Set when the run stopped before `n_steps`.
    pub termination: Option<Error>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> &State {
        self.samples
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn max_abs_drift(&self) -> f64 {
        self.monitors
            .iter()
            .map(|m| m.drift.abs())
            .fold(0.0, f64::max)
    }
}

fn monitor(l: &Lagrangian, gauge: &GaugeChoice, s: &State, g0: f64) -> Monitor {
    let lag = l.eval(&s.x, &s.v).unwrap_or(f64::NAN);
    let ham = l.hamiltonian(&s.x, &s.v).unwrap_or(f64::NAN);
    let metric_norm = l
        .metric_field()
        .and_then(|g| g.eval(&s.x).ok())
        .and_then(|g| contract_full(&g, &s.v).ok())
        .unwrap_or(f64::NAN);
    let gauge_value = gauge_function(l, gauge, &s.x, &s.v)
        .map(|j| j.value())
        .unwrap_or(f64::NAN);
    let drift = if g0 != 0.0 {
        (gauge_value - g0) / g0.abs()
    } else {
        gauge_value - g0
    };
    Monitor {
        lagrangian: lag,
        hamiltonian: ham,
        metric_norm,
        gauge_value,
        drift,
    }
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

fn rk4_step(l: &Lagrangian, gauge: &GaugeChoice, s: &State, h: f64) -> Result<State> {
    let f = |x: &[f64], v: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let a = assemble_eom(l, gauge, &State::new(0.0, x.to_vec(), v.to_vec()))?;
        Ok((v.to_vec(), a))
    };
    let (k1x, k1v) = f(&s.x, &s.v)?;
    let (k2x, k2v) = f(&axpy(&s.x, 0.5 * h, &k1x), &axpy(&s.v, 0.5 * h, &k1v))?;
    let (k3x, k3v) = f(&axpy(&s.x, 0.5 * h, &k2x), &axpy(&s.v, 0.5 * h, &k2v))?;
    let (k4x, k4v) = f(&axpy(&s.x, h, &k3x), &axpy(&s.v, h, &k3v))?;
    let combine = |y: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..y.len())
            .map(|i| y[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
            .collect()
    };
    Ok(State::new(
        s.tau + h,
        combine(&s.x, &k1x, &k2x, &k3x, &k4x),
        combine(&s.v, &k1v, &k2v, &k3v, &k4v),
    ))
}

/// Fixed-step RK4. Under [`GaugeChoice::ProperTime`] the initial velocity is
/// first rescaled to `g(v, v) = 1`.
///
/// A failure inside the run truncates the trajectory and is kept in
/// [`Trajectory::termination`]; only a bad initial state is an `Err`.
pub fn integrate(
    l: &Lagrangian,
    gauge: &GaugeChoice,
    s0: &State,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(opts.step.is_finite() && opts.step != 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step {} must be finite and nonzero",
            opts.step
        )));
    }
    gauge.validate(l)?;
    let mut start = s0.clone();
    if matches!(gauge, GaugeChoice::ProperTime) {
        let k = gauge_function(l, gauge, &start.x, &start.v)?.value();
        if !(k > 0.0) {
            return Err(Error::SignDomain {
                order: 2,
                radicand: k,
            });
        }
        let scale = k.sqrt().recip();
        start.v.iter_mut().for_each(|c| *c *= scale);
    }
    if !start.is_finite() {
        return Err(Error::NonFinite { tau: start.tau });
    }
    // surface a bad initial state as an error rather than an empty run
    assemble_eom(l, gauge, &start)?;

    let g0 = gauge_function(l, gauge, &start.x, &start.v)?.value();
    let mut samples = vec![start.clone()];
    let mut monitors = vec![monitor(l, gauge, &start, g0)];
    let mut termination = None;
    let mut s = start;
    for i in 1..=opts.n_steps {
        let mut next = match rk4_step(l, gauge, &s, opts.step) {
            Ok(n) => n,
            Err(e) => {
                termination = Some(e);
                break;
            }
        };
        next.tau = s0.tau + opts.step * i as f64;
        if opts.drift_policy == DriftPolicy::Renormalize {
            if let Err(e) = renormalize(l, gauge, &mut next, g0) {
                termination = Some(e);
                break;
            }
        }
        if !next.is_finite() {
            termination = Some(Error::NonFinite { tau: next.tau });
            break;
        }
        monitors.push(monitor(l, gauge, &next, g0));
        samples.push(next.clone());
        s = next;
    }
    Ok(Trajectory {
        gauge: gauge.name(),
        samples,
        monitors,
        termination,
    })
}

fn renormalize(l: &Lagrangian, gauge: &GaugeChoice, s: &mut State, g0: f64) -> Result<()> {
    let j = gauge_function(l, gauge, &s.x, &s.v)?;
    let g = j.value();
    // Euler: v·∂G/∂v = deg · G
    let deg = dot(j.grad(), &s.v) / g;
    let ratio = g0 / g;
    if !(ratio > 0.0 && deg.is_finite() && deg.abs() > 1e-12) {
        return Err(Error::NonFinite { tau: s.tau });
    }
    let scale = ratio.powf(1.0 / deg);
    s.v.iter_mut().for_each(|c| *c *= scale);
    Ok(())
}
