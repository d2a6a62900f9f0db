use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::lagrangian::{norm, Lagrangian};
use crate::tensor::contract_full;

use super::{assemble_eom, GaugeChoice, State, Trajectory};

/// Total arc length below which a path cannot be resampled.
pub const MIN_ARC_LENGTH: f64 = 1e-12;

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "slope fit needs two or more paired points".into(),
        ));
    }
    if xs.iter().chain(ys).any(|c| !(*c > 0.0 && c.is_finite())) {
        return Err(Error::InvalidArgument(
            "slope fit needs positive finite data".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|c| c.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|c| c.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "slope fit needs distinct abscissae".into(),
        ));
    }
    Ok(sxy / sxx)
}

struct ArcTable<'a> {
    samples: &'a [State],
    speed: Vec<f64>,
    // cumulative arc length at each sample
    arc: Vec<f64>,
}

impl<'a> ArcTable<'a> {
    fn new(traj: &'a Trajectory, arc_field: Option<&TensorField>) -> Result<Self> {
        let samples = &traj.samples[..];
        if samples.is_empty() {
            return Err(Error::DegeneratePath { length: 0.0 });
        }
        let speed = samples
            .iter()
            .map(|s| match arc_field {
                Some(g) => {
                    let q = contract_full(&g.eval(&s.x)?, &s.v)?;
                    if !(q > 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "arc field not positive at tau = {}: g(v, v) = {q}",
                            s.tau
                        )));
                    }
                    Ok(q.sqrt())
                }
                None => Ok(norm(&s.v)),
            })
            .collect::<Result<Vec<_>>>()?;
        // trapezoid with an end correction from differenced speeds
        let n = samples.len();
        let mut arc = vec![0.0; n];
        let slope = |i: usize| -> f64 {
            let (a, b) = if i == 0 {
                (0, 1.min(n - 1))
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            let dt = samples[b].tau - samples[a].tau;
            if dt == 0.0 {
                0.0
            } else {
                (speed[b] - speed[a]) / dt
            }
        };
        for i in 1..n {
            let h = samples[i].tau - samples[i - 1].tau;
            let trap = 0.5 * h * (speed[i] + speed[i - 1]);
            arc[i] = arc[i - 1] + trap - h * h / 12.0 * (slope(i) - slope(i - 1));
        }
        let total = arc[n - 1];
        if !(total.abs() >= MIN_ARC_LENGTH) {
            return Err(Error::DegeneratePath { length: total });
        }
        Ok(ArcTable {
            samples,
            speed,
            arc,
        })
    }

    fn total(&self) -> f64 {
        *self.arc.last().expect("nonempty")
    }

    // Point at arc length `s`, by Hermite inversion of arc(τ) inside the
    // bracketing step and Hermite interpolation of x(τ).
    fn point_at(&self, s: f64) -> Vec<f64> {
        let n = self.arc.len();
        let i = match self.arc.partition_point(|a| *a <= s) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (s0, s1) = (&self.samples[i], &self.samples[i + 1]);
        let h = s1.tau - s0.tau;
        let (a0, a1) = (self.arc[i], self.arc[i + 1]);
        let (d0, d1) = (self.speed[i] * h, self.speed[i + 1] * h);
        let arc_at = |u: f64| hermite(u, a0, a1, d0, d1);
        let darc_at = |u: f64| hermite_derivative(u, a0, a1, d0, d1);
        let mut u = if a1 != a0 {
            ((s - a0) / (a1 - a0)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        for _ in 0..50 {
            let d = darc_at(u);
            if d == 0.0 {
                break;
            }
            let du = (arc_at(u) - s) / d;
            u = (u - du).clamp(-0.5, 1.5);
            if du.abs() < 1e-15 {
                break;
            }
        }
        (0..s0.x.len())
            .map(|k| hermite(u, s0.x[k], s1.x[k], s0.v[k] * h, s1.v[k] * h))
            .collect()
    }
}

fn hermite(u: f64, p0: f64, p1: f64, m0: f64, m1: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * p0
        + (u3 - 2.0 * u2 + u) * m0
        + (-2.0 * u3 + 3.0 * u2) * p1
        + (u3 - u2) * m1
}

fn hermite_derivative(u: f64, p0: f64, p1: f64, m0: f64, m1: f64) -> f64 {
    let u2 = u * u;
    (6.0 * u2 - 6.0 * u) * p0
        + (3.0 * u2 - 4.0 * u + 1.0) * m0
        + (-6.0 * u2 + 6.0 * u) * p1
        + (3.0 * u2 - 2.0 * u) * m1
}

/// Largest chart distance between the two paths at equal normalized arc
/// length. The arc measure is `sqrt(g(v, v))` for `arc_field`, else the
/// Euclidean speed.
pub fn match_paths(
    t1: &Trajectory,
    t2: &Trajectory,
    arc_field: Option<&TensorField>,
) -> Result<f64> {
    let a = ArcTable::new(t1, arc_field)?;
    let b = ArcTable::new(t2, arc_field)?;
    if a.samples.len() < 2 || b.samples.len() < 2 {
        return Err(Error::DegeneratePath { length: 0.0 });
    }
    let (la, lb) = (a.total(), b.total());
    let n = a.samples.len().max(b.samples.len());
    let mut worst: f64 = 0.0;
    for k in 0..=n {
        let f = k as f64 / n as f64;
        let pa = a.point_at(f * la);
        let pb = b.point_at(f * lb);
        let d: f64 = pa
            .iter()
            .zip(&pb)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Acceleration differences between two gauges across a set of states.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeScan {
    /// Spatial speed `‖(v¹, …)‖` per state.
    pub speeds: Vec<f64>,
    /// Spatial part of `a_A − a_B` per state.
    pub diffs: Vec<f64>,
    /// Log-log slope of `diffs` against `speeds`; `None` when the
    /// differences sit at rounding level.
    pub slope: Option<f64>,
}

impl GaugeScan {
    pub fn is_degenerate(&self) -> bool {
        self.slope.is_none()
    }
}

/// Compares the spatial acceleration assembled under two gauges.
pub fn gauge_insensitivity_scan(
    l: &Lagrangian,
    gauge_a: &GaugeChoice,
    gauge_b: &GaugeChoice,
    states: &[State],
) -> Result<GaugeScan> {
    let mut speeds = Vec::with_capacity(states.len());
    let mut diffs = Vec::with_capacity(states.len());
    let mut scale: f64 = 0.0;
    for s in states {
        let a = assemble_eom(l, gauge_a, s)?;
        let b = assemble_eom(l, gauge_b, s)?;
        scale = scale.max(norm(&a)).max(norm(&b)).max(norm(&s.v));
        let d: Vec<f64> = a[1..].iter().zip(&b[1..]).map(|(p, q)| p - q).collect();
        speeds.push(norm(&s.v[1..]));
        diffs.push(norm(&d));
    }
    let floor = 1e-12 * (1.0 + scale);
    let slope = if diffs.iter().all(|d| *d > floor) {
        Some(loglog_slope(&speeds, &diffs)?)
    } else {
        None
    };
    Ok(GaugeScan {
        speeds,
        diffs,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backgrounds::{make_preset, PresetSpec};
    use crate::dynamics::{integrate, IntegrateOptions};

    #[test]
    fn slope_of_power_law() {
        let xs = [0.1, 0.2, 0.5, 1.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 7.0 * x.powf(-1.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 1.5).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn identical_and_rescaled_trajectories_match() {
        let l = make_preset(&PresetSpec::new("minkowski").with("dim", 3.0))
            .unwrap()
            .lagrangian;
        let s0 = State::new(0.0, vec![0.0; 3], vec![1.5, 0.5, 0.2]);
        let t1 = integrate(
            &l,
            &GaugeChoice::ProperTime,
            &s0,
            &IntegrateOptions::new(0.01, 100),
        )
        .unwrap();
        assert_eq!(match_paths(&t1, &t1, None).unwrap(), 0.0);
        // the same segment traversed at twice the speed with a third of the samples
        let s1 = State::new(0.0, vec![0.0; 3], vec![3.0, 1.0, 0.4]);
        let t2 = integrate(
            &l,
            &GaugeChoice::TermConst(2),
            &s1,
            &IntegrateOptions::new(1.0 / (2.8 * 33.0), 33),
        )
        .unwrap();
        let d = match_paths(&t1, &t2, Some(l.metric_field().unwrap())).unwrap();
        assert!(d < 1e-13, "{d}");
    }

    #[test]
    fn degenerate_inputs() {
        let t = Trajectory {
            gauge: "direct".into(),
            samples: vec![State::new(0.0, vec![0.0, 0.0], vec![0.0, 0.0]); 3],
            monitors: vec![],
            termination: None,
        };
        assert!(matches!(
            match_paths(&t, &t, None),
            Err(Error::DegeneratePath { .. })
        ));
    }

    #[test]
    fn pure_metric_gauges_coincide() {
        let l = make_preset(&PresetSpec::new("minkowski").with("dim", 2.0))
            .unwrap()
            .lagrangian;
        let states: Vec<State> = [1e-3, 1e-2, 1e-1]
            .iter()
            .map(|v: &f64| State::new(0.0, vec![0.0, 1.0], vec![(1.0 + v * v).sqrt(), *v]))
            .collect();
        let scan = gauge_insensitivity_scan(
            &l,
            &GaugeChoice::LagrangianConst,
            &GaugeChoice::ProperTime,
            &states,
        )
        .unwrap();
        assert!(scan.is_degenerate());
    }
}
