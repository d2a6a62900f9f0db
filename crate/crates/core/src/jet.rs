//! Second-order forward-mode automatic differentiation.
//!
//! A [`Jet2`] carries a value together with its gradient and Hessian with
//! respect to `k` active variables. The Hessian is stored as a packed upper
//! triangle so it is symmetric by construction. A jet with an empty gradient
//! is a constant and mixes freely with jets of any width.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Value, gradient and Hessian of a scalar with respect to `k` variables.
#[derive(Clone, PartialEq)]
pub struct Jet2 {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

#[inline]
fn packed_len(k: usize) -> usize {
    k * (k + 1) / 2
}

#[inline]
fn packed_at(i: usize, j: usize, k: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * k - i + 1) / 2 + (j - i)
}

impl Jet2 {
    /// A constant (no active variables).
    pub fn constant(value: f64) -> Self {
        Jet2 {
            value,
            grad: Vec::new(),
            hess: Vec::new(),
        }
    }

    /// The `index`-th of `nvars` active variables, evaluated at `value`.
    pub fn variable(value: f64, index: usize, nvars: usize) -> Self {
        assert!(index < nvars, "variable index {index} out of {nvars}");
        let mut grad = vec![0.0; nvars];
        grad[index] = 1.0;
        Jet2 {
            value,
            grad,
            hess: vec![0.0; packed_len(nvars)],
        }
    }

    /// Seeds `values` as variables `offset..offset + values.len()` of `nvars`.
    pub fn seed(values: &[f64], offset: usize, nvars: usize) -> Vec<Jet2> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet2::variable(v, offset + i, nvars))
            .collect()
    }

    /// Lifts plain values to constant jets.
    pub fn constants(values: &[f64]) -> Vec<Jet2> {
        values.iter().map(|&v| Jet2::constant(v)).collect()
    }

    /// Builds a jet from explicit parts. `hess` is the packed upper triangle.
    pub fn from_parts(value: f64, grad: Vec<f64>, hess: Vec<f64>) -> Self {
        assert_eq!(hess.len(), packed_len(grad.len()), "packed Hessian length");
        Jet2 { value, grad, hess }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    /// Number of active variables (0 for constants).
    #[inline]
    pub fn nvars(&self) -> usize {
        self.grad.len()
    }

    #[inline]
    pub fn is_constant(&self) -> bool {
        self.grad.is_empty()
    }

    /// Partial derivative with respect to variable `i` (0 for constants).
    pub fn d(&self, i: usize) -> f64 {
        self.grad.get(i).copied().unwrap_or(0.0)
    }

    /// Second partial derivative with respect to variables `i` and `j`.
    pub fn dd(&self, i: usize, j: usize) -> f64 {
        if self.grad.is_empty() {
            return 0.0;
        }
        self.hess[packed_at(i, j, self.grad.len())]
    }

    /// Packed upper triangle of the Hessian.
    pub fn hess_packed(&self) -> &[f64] {
        &self.hess
    }

    /// Dense Hessian, row-major `k x k`.
    pub fn hess_dense(&self) -> Vec<f64> {
        let k = self.grad.len();
        let mut out = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                out[i * k + j] = self.dd(i, j);
            }
        }
        out
    }

    /// Applies a scalar function given its value and first two derivatives at
    /// `self.value()`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        if self.is_constant() {
            return Jet2::constant(f0);
        }
        let k = self.grad.len();
        let grad: Vec<f64> = self.grad.iter().map(|g| f1 * g).collect();
        let mut hess = Vec::with_capacity(self.hess.len());
        let mut p = 0;
        for i in 0..k {
            let gi = self.grad[i];
            for j in i..k {
                hess.push(f1 * self.hess[p] + f2 * gi * self.grad[j]);
                p += 1;
            }
        }
        Jet2 {
            value: f0,
            grad,
            hess,
        }
    }

    pub fn sqrt(&self) -> Jet2 {
        let f0 = self.value.sqrt();
        let f1 = 0.5 / f0;
        let f2 = -0.5 * f1 / self.value;
        self.chain(f0, f1, f2)
    }

    pub fn powf(&self, p: f64) -> Jet2 {
        let u = self.value;
        let f0 = u.powf(p);
        let f1 = p * u.powf(p - 1.0);
        let f2 = p * (p - 1.0) * u.powf(p - 2.0);
        self.chain(f0, f1, f2)
    }

    pub fn powi(&self, n: i32) -> Jet2 {
        let u = self.value;
        let nf = f64::from(n);
        let f0 = u.powi(n);
        let f1 = if n == 0 { 0.0 } else { nf * u.powi(n - 1) };
        let f2 = if n == 0 || n == 1 {
            0.0
        } else {
            nf * (nf - 1.0) * u.powi(n - 2)
        };
        self.chain(f0, f1, f2)
    }

    pub fn recip(&self) -> Jet2 {
        let u = self.value;
        let f0 = 1.0 / u;
        self.chain(f0, -f0 * f0, 2.0 * f0 * f0 * f0)
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet2 {
        let u = self.value;
        self.chain(u.ln(), 1.0 / u, -1.0 / (u * u))
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    /// Multiplies every part by `c`.
    pub fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            value: self.value * c,
            grad: self.grad.iter().map(|g| g * c).collect(),
            hess: self.hess.iter().map(|h| h * c).collect(),
        }
    }

    fn add_ref(&self, rhs: &Jet2) -> Jet2 {
        match (self.is_constant(), rhs.is_constant()) {
            (true, true) => Jet2::constant(self.value + rhs.value),
            (true, false) => Jet2 {
                value: self.value + rhs.value,
                grad: rhs.grad.clone(),
                hess: rhs.hess.clone(),
            },
            (false, true) => Jet2 {
                value: self.value + rhs.value,
                grad: self.grad.clone(),
                hess: self.hess.clone(),
            },
            (false, false) => {
                check_width(self, rhs);
                Jet2 {
                    value: self.value + rhs.value,
                    grad: zip_with(&self.grad, &rhs.grad, |a, b| a + b),
                    hess: zip_with(&self.hess, &rhs.hess, |a, b| a + b),
                }
            }
        }
    }

    fn sub_ref(&self, rhs: &Jet2) -> Jet2 {
        match (self.is_constant(), rhs.is_constant()) {
            (true, true) => Jet2::constant(self.value - rhs.value),
            (true, false) => Jet2 {
                value: self.value - rhs.value,
                grad: rhs.grad.iter().map(|g| -g).collect(),
                hess: rhs.hess.iter().map(|h| -h).collect(),
            },
            (false, true) => Jet2 {
                value: self.value - rhs.value,
                grad: self.grad.clone(),
                hess: self.hess.clone(),
            },
            (false, false) => {
                check_width(self, rhs);
                Jet2 {
                    value: self.value - rhs.value,
                    grad: zip_with(&self.grad, &rhs.grad, |a, b| a - b),
                    hess: zip_with(&self.hess, &rhs.hess, |a, b| a - b),
                }
            }
        }
    }

    fn mul_ref(&self, rhs: &Jet2) -> Jet2 {
        match (self.is_constant(), rhs.is_constant()) {
            (true, true) => Jet2::constant(self.value * rhs.value),
            (true, false) => rhs.scale_left(self.value),
            (false, true) => self.scale(rhs.value),
            (false, false) => {
                check_width(self, rhs);
                let k = self.grad.len();
                let (a, b) = (self.value, rhs.value);
                let grad = zip_with(&self.grad, &rhs.grad, |ga, gb| a * gb + b * ga);
                let mut hess = Vec::with_capacity(self.hess.len());
                let mut p = 0;
                for i in 0..k {
                    let (ai, bi) = (self.grad[i], rhs.grad[i]);
                    for j in i..k {
                        hess.push(
                            a * rhs.hess[p]
                                + b * self.hess[p]
                                + ai * rhs.grad[j]
                                + bi * self.grad[j],
                        );
                        p += 1;
                    }
                }
                Jet2 {
                    value: a * b,
                    grad,
                    hess,
                }
            }
        }
    }

    fn div_ref(&self, rhs: &Jet2) -> Jet2 {
        if rhs.is_constant() {
            return Jet2 {
                value: self.value / rhs.value,
                grad: self.grad.iter().map(|g| g / rhs.value).collect(),
                hess: self.hess.iter().map(|h| h / rhs.value).collect(),
            };
        }
        let mut q = self.mul_ref(&rhs.recip());
        q.value = self.value / rhs.value;
        q
    }

    // c * self with the constant on the left, so the value rounds as `c * v`.
    fn scale_left(&self, c: f64) -> Jet2 {
        Jet2 {
            value: c * self.value,
            grad: self.grad.iter().map(|g| c * g).collect(),
            hess: self.hess.iter().map(|h| c * h).collect(),
        }
    }
}

#[inline]
fn check_width(a: &Jet2, b: &Jet2) {
    assert_eq!(
        a.grad.len(),
        b.grad.len(),
        "jets with different numbers of active variables"
    );
}

#[inline]
fn zip_with(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet2")
            .field("value", &self.value)
            .field("grad", &self.grad)
            .field("hess", &self.hess)
            .finish()
    }
}

impl From<f64> for Jet2 {
    fn from(v: f64) -> Self {
        Jet2::constant(v)
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl $trait<Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                self.$inner(&rhs)
            }
        }
        impl $trait<&Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                self.$inner(rhs)
            }
        }
        impl $trait<Jet2> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                self.$inner(&rhs)
            }
        }
        impl $trait<&Jet2> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                self.$inner(rhs)
            }
        }
        impl $trait<f64> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: f64) -> Jet2 {
                self.$inner(&Jet2::constant(rhs))
            }
        }
        impl $trait<f64> for &Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: f64) -> Jet2 {
                self.$inner(&Jet2::constant(rhs))
            }
        }
        impl $trait<Jet2> for f64 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                Jet2::constant(self).$inner(&rhs)
            }
        }
        impl $trait<&Jet2> for f64 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                Jet2::constant(self).$inner(rhs)
            }
        }
    };
}

jet_binop!(Add, add, add_ref);
jet_binop!(Sub, sub, sub_ref);
jet_binop!(Mul, mul, mul_ref);
jet_binop!(Div, div, div_ref);

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet2> for Jet2 {
    fn add_assign(&mut self, rhs: &Jet2) {
        if rhs.is_constant() {
            self.value += rhs.value;
        } else if self.is_constant() {
            *self = self.add_ref(rhs);
        } else {
            check_width(self, rhs);
            self.value += rhs.value;
            self.grad
                .iter_mut()
                .zip(&rhs.grad)
                .for_each(|(a, b)| *a += b);
            self.hess
                .iter_mut()
                .zip(&rhs.hess)
                .for_each(|(a, b)| *a += b);
        }
    }
}

impl AddAssign<Jet2> for Jet2 {
    fn add_assign(&mut self, rhs: Jet2) {
        *self += &rhs;
    }
}

impl SubAssign<&Jet2> for Jet2 {
    fn sub_assign(&mut self, rhs: &Jet2) {
        *self = self.sub_ref(rhs);
    }
}

impl MulAssign<f64> for Jet2 {
    fn mul_assign(&mut self, rhs: f64) {
        self.value *= rhs;
        self.grad.iter_mut().for_each(|g| *g *= rhs);
        self.hess.iter_mut().for_each(|h| *h *= rhs);
    }
}

/// Sum of jets; the empty sum is the constant zero.
pub fn sum<'a>(items: impl IntoIterator<Item = &'a Jet2>) -> Jet2 {
    let mut acc = Jet2::constant(0.0);
    for j in items {
        acc += j;
    }
    acc
}

/// `Σ a_i b_i` over two jet slices.
pub fn dot(a: &[Jet2], b: &[Jet2]) -> Jet2 {
    let mut acc = Jet2::constant(0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_first(f: impl Fn(f64) -> f64, u: f64) -> f64 {
        let h = 1e-5;
        (f(u + h) - f(u - h)) / (2.0 * h)
    }

    fn fd_second(f: impl Fn(f64) -> f64, u: f64) -> f64 {
        let h = 1e-4;
        (f(u + h) - 2.0 * f(u) + f(u - h)) / (h * h)
    }

    #[test]
    fn cube_at_two() {
        let u = Jet2::variable(2.0, 0, 1);
        let y = &u * &u * &u;
        assert_eq!(y.value(), 8.0);
        assert_eq!(y.d(0), 12.0);
        assert_eq!(y.dd(0, 0), 12.0);
    }

    #[test]
    fn chain_rule_against_analytic_and_finite_differences() {
        // f(g(u)) with g(u) = sin(u) + u^2 and f(y) = y^3
        let u0 = 0.7_f64;
        let comp = |u: f64| (u.sin() + u * u).powi(3);
        let u = Jet2::variable(u0, 0, 1);
        let g = u.sin() + &u * &u;
        let y = &g * &g * &g;

        let gv = u0.sin() + u0 * u0;
        let g1 = u0.cos() + 2.0 * u0;
        let g2 = -u0.sin() + 2.0;
        let d1 = 3.0 * gv * gv * g1;
        let d2 = 6.0 * gv * g1 * g1 + 3.0 * gv * gv * g2;

        assert!((y.d(0) - d1).abs() <= 1e-12 * d1.abs());
        assert!((y.dd(0, 0) - d2).abs() <= 1e-12 * d2.abs());
        let fd1 = fd_first(comp, u0);
        let fd2 = fd_second(comp, u0);
        assert!((y.d(0) - fd1).abs() / fd1.abs() <= 1e-6);
        assert!((y.dd(0, 0) - fd2).abs() / fd2.abs() <= 1e-6);
    }

    #[test]
    fn mixed_partials_of_product() {
        let xs = Jet2::seed(&[1.5, -0.5], 0, 2);
        let f = &xs[0] * &xs[0] * &xs[1];
        assert_eq!(f.d(0), 2.0 * 1.5 * -0.5);
        assert_eq!(f.d(1), 1.5 * 1.5);
        assert_eq!(f.dd(0, 0), 2.0 * -0.5);
        assert_eq!(f.dd(0, 1), 3.0);
        assert_eq!(f.dd(1, 0), 3.0);
        assert_eq!(f.dd(1, 1), 0.0);
    }

    #[test]
    fn quotient_and_powers() {
        let xs = Jet2::seed(&[2.0, 3.0], 0, 2);
        let q = &xs[0] / &xs[1];
        assert_eq!(q.value(), 2.0 / 3.0);
        assert!((q.d(1) + 2.0 / 9.0).abs() < 1e-15);
        assert!((q.dd(1, 1) - 4.0 / 27.0).abs() < 1e-15);
        assert!((q.dd(0, 1) + 1.0 / 9.0).abs() < 1e-15);

        let r = xs[1].powf(0.25);
        let exact = 0.25 * -0.75 * 3.0f64.powf(-1.75);
        assert!((r.dd(1, 1) - exact).abs() <= 1e-15 * exact.abs());
        let s = xs[1].sqrt();
        assert!((s.dd(1, 1) + 0.25 * 3.0f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn constants_mix_with_variables() {
        let x = Jet2::variable(1.0, 1, 3);
        let c = Jet2::constant(4.0);
        let y = &c * &x + 2.0 - &c;
        assert_eq!(y.nvars(), 3);
        assert_eq!(y.value(), 2.0);
        assert_eq!(y.grad(), &[0.0, 4.0, 0.0]);
        let z = 1.0 / &c;
        assert!(z.is_constant());
        assert_eq!(z.value(), 0.25);
    }

    #[test]
    fn hessian_is_symmetric_by_storage() {
        let xs = Jet2::seed(&[0.3, 0.4, 0.5], 0, 3);
        let f = (&xs[0] * &xs[1]).exp() * xs[2].cos();
        let h = f.hess_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h[i * 3 + j], h[j * 3 + i]);
            }
        }
    }
}
