//! Gauss-Legendre quadrature, composite and with panel doubling.

use crate::error::{Error, Result};

/// Nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

// P_n(z) and P_n'(z) by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Physical nodes and weights of a composite rule with `panels` equal panels.
pub fn composite_nodes(a: f64, b: f64, order: usize, panels: usize) -> Vec<(f64, f64)> {
    let (z, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (zi, wi) in z.iter().zip(&w) {
            out.push((lo + 0.5 * h * (zi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

/// Composite Gauss-Legendre sum of a fallible integrand.
pub fn composite<F>(f: &mut F, a: f64, b: f64, order: usize, panels: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut total = 0.0;
    for (t, w) in composite_nodes(a, b, order, panels) {
        total += w * f(t)?;
    }
    Ok(total)
}

/// Outcome of [`adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveResult {
    pub value: f64,
    pub panels: usize,
    /// Difference between the last two estimates.
    pub change: f64,
}

/// Doubles the panel count until two successive estimates differ by at most
/// `tol · max(1, |S|)`.
pub fn adaptive<F>(
    mut f: F,
    a: f64,
    b: f64,
    order: usize,
    max_levels: usize,
    tol: f64,
) -> Result<AdaptiveResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut panels = 1;
    let mut prev = composite(&mut f, a, b, order, panels)?;
    let mut change = f64::INFINITY;
    for _ in 0..max_levels {
        panels *= 2;
        let next = composite(&mut f, a, b, order, panels)?;
        change = (next - prev).abs();
        if change <= tol * next.abs().max(1.0) {
            return Ok(AdaptiveResult {
                value: next,
                panels,
                change,
            });
        }
        prev = next;
    }
    Err(Error::NoConvergence {
        levels: max_levels,
        last_change: change,
    })
}
