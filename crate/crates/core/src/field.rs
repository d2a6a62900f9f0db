//! Position-dependent tensor and scalar fields.
//!
//! Fields are closures over [`Jet2`] coordinates. Plain evaluation lifts the
//! point to constant jets, so the value part is identical for both paths and
//! spatial derivatives come out of the same closure.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::tensor::{pack_index, packed_len, SymTensor};

type ComponentsFn = dyn Fn(&[Jet2]) -> Vec<Jet2> + Send + Sync;
type ScalarFn = dyn Fn(&[Jet2]) -> Jet2 + Send + Sync;

/// A symmetric tensor field of fixed rank over an `dim`-dimensional chart.
#[derive(Clone)]
pub struct TensorField {
    rank: usize,
    dim: usize,
    eval: Arc<ComponentsFn>,
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TensorField")
            .field("rank", &self.rank)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl TensorField {
    /// `eval` maps chart coordinates to packed components.
    pub fn new(
        rank: usize,
        dim: usize,
        eval: impl Fn(&[Jet2]) -> Vec<Jet2> + Send + Sync + 'static,
    ) -> Result<Self> {
        SymTensor::<f64>::zeros(rank, dim)?;
        Ok(TensorField {
            rank,
            dim,
            eval: Arc::new(eval),
        })
    }

    /// The same tensor at every point.
    pub fn constant(t: SymTensor<f64>) -> Self {
        let comps = t.packed().to_vec();
        TensorField {
            rank: t.rank(),
            dim: t.dim(),
            eval: Arc::new(move |_x: &[Jet2]| Jet2::constants(&comps)),
        }
    }

    /// Rank-2 field with the given diagonal and vanishing off-diagonal part.
    pub fn diagonal(
        dim: usize,
        diag: impl Fn(&[Jet2]) -> Vec<Jet2> + Send + Sync + 'static,
    ) -> Result<Self> {
        let slots: Vec<usize> = (0..dim)
            .map(|i| pack_index(&[i, i], dim))
            .collect::<Result<_>>()?;
        let len = packed_len(2, dim);
        TensorField::new(2, dim, move |x| {
            let d = diag(x);
            let mut out = vec![Jet2::constant(0.0); len];
            for (slot, value) in slots.iter().zip(d) {
                out[*slot] = value;
            }
            out
        })
    }

    /// A rank-1 field (covector) from its components.
    pub fn covector(
        dim: usize,
        eval: impl Fn(&[Jet2]) -> Vec<Jet2> + Send + Sync + 'static,
    ) -> Result<Self> {
        TensorField::new(1, dim, eval)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Result<SymTensor<f64>> {
        Ok(self.eval_jet(&Jet2::constants(x))?.values())
    }

    pub fn eval_jet(&self, x: &[Jet2]) -> Result<SymTensor<Jet2>> {
        if x.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        SymTensor::from_packed(self.rank, self.dim, (self.eval)(x))
    }

    /// Components with first and second spatial derivatives (`dim` active
    /// variables seeded at `x`).
    pub fn eval_with_derivatives(&self, x: &[f64]) -> Result<SymTensor<Jet2>> {
        self.eval_jet(&Jet2::seed(x, 0, x.len()))
    }
}

/// A scalar function on the chart.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: Arc<ScalarFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl ScalarField {
    pub fn new(dim: usize, eval: impl Fn(&[Jet2]) -> Jet2 + Send + Sync + 'static) -> Self {
        ScalarField {
            dim,
            eval: Arc::new(eval),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_jet(&self, x: &[Jet2]) -> Result<Jet2> {
        if x.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok((self.eval)(x))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_jet(&Jet2::constants(x))?.value())
    }

    /// Value, gradient and Hessian at `x`.
    pub fn eval_with_derivatives(&self, x: &[f64]) -> Result<Jet2> {
        self.eval_jet(&Jet2::seed(x, 0, x.len()))
    }
}
