//! Seeded random phase-space points where each preset's Lagrangian is
//! defined (future-pointing, timelike where a metric is present).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reparam_core::backgrounds::Preset;
use reparam_core::dynamics::State;
use reparam_core::Lagrangian;

use crate::CliError;

const MAX_ATTEMPTS: usize = 10_000;

fn timelike_flat(rng: &mut ChaCha8Rng, spatial: usize, speed: f64) -> Vec<f64> {
    let u: Vec<f64> = (0..spatial).map(|_| rng.gen_range(-speed..speed)).collect();
    let gamma = (1.0 + u.iter().map(|c| c * c).sum::<f64>()).sqrt();
    // a random positive scale: the Lagrangian is probed off proper-time normalization too
    let k = rng.gen_range(0.5..2.0);
    std::iter::once(gamma).chain(u).map(|c| c * k).collect()
}

fn propose(p: &Preset, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    match p.name.as_str() {
        "schwarzschild" => {
            let r: f64 = rng.gen_range(4.0..20.0);
            let th: f64 = rng.gen_range(0.3..std::f64::consts::PI - 0.3);
            let x = vec![rng.gen_range(-10.0..10.0), r, th, rng.gen_range(0.0..std::f64::consts::TAU)];
            // M is unknown here; a generous t-component and a domain check below keep it timelike
            let u = [
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.02..0.02),
                rng.gen_range(-0.02..0.02),
            ];
            let k = rng.gen_range(0.5..2.0);
            (x, vec![2.0 * k, u[0] * k, u[1] * k, u[2] * k])
        }
        "coulomb_em" => {
            // keep away from the charge
            let dir: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = dir.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-3);
            let r = rng.gen_range(0.5..3.0);
            let x = std::iter::once(rng.gen_range(-5.0..5.0))
                .chain(dir.iter().map(|c| c / n * r))
                .collect();
            (x, timelike_flat(rng, 3, 0.8))
        }
        "sn_ansatz" | "minkowski_plus_sn" => {
            let x = vec![rng.gen_range(-5.0..5.0), rng.gen_range(0.5..2.0)];
            let w = rng.gen_range(0.5..2.0);
            let v = w * rng.gen_range(0.05..0.8) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
            (x, vec![w, v])
        }
        _ => {
            let x = (0..p.dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
            (x, timelike_flat(rng, p.dim - 1, 0.8))
        }
    }
}

/// `n` states at which `l`, its momentum and Hessian evaluate to finite
/// values, drawn from a ChaCha8 stream seeded with `seed`.
pub fn sample_states(
    p: &Preset,
    l: &Lagrangian,
    n: usize,
    seed: u64,
) -> Result<Vec<State>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(CliError::Config(format!(
                "no valid states found for preset `{}` after {MAX_ATTEMPTS} draws",
                p.name
            )));
        }
        let (x, v) = propose(p, &mut rng);
        let ok = match &p.metric {
            Some(g) => g
                .eval(&x)
                .and_then(|gx| reparam_core::contract_full(&gx, &v))
                .is_ok_and(|gvv| gvv > 0.0),
            None => true,
        };
        if ok && l.jet_v(&x, &v).is_ok_and(|j| j.value().is_finite()) {
            out.push(State::new(0.0, x, v));
        }
    }
    Ok(out)
}
