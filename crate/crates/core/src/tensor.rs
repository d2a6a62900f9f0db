//! Packed storage for totally symmetric tensors and their contractions.
//!
//! Components are stored once per sorted multi-index, in lexicographic order
//! of the sorted tuple. A rank-`n` tensor over `m` dimensions therefore holds
//! `C(m + n - 1, n)` scalars; full contractions expand each stored component
//! with its multinomial multiplicity.

use crate::error::{Error, Result};
use crate::jet::Jet2;

/// Largest supported tensor rank.
pub const MAX_RANK: usize = 6;

/// Minimal arithmetic shared by plain and differentiated components.
pub trait Scalar: Clone + std::fmt::Debug {
    fn from_f64(v: f64) -> Self;
    fn real(&self) -> f64;
    fn mul(&self, other: &Self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, c: f64) -> Self;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn real(&self) -> f64 {
        *self
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, c: f64) -> Self {
        c * self
    }
}

impl Scalar for Jet2 {
    fn from_f64(v: f64) -> Self {
        Jet2::constant(v)
    }
    fn real(&self) -> f64 {
        self.value()
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, c: f64) -> Self {
        c * self
    }
}

/// Binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Number of packed slots of a rank-`rank` symmetric tensor over `dim` axes.
pub fn packed_len(rank: usize, dim: usize) -> usize {
    binomial(dim + rank - 1, rank)
}

/// Offset of `multi_index` in packed storage. Invariant under permutations.
pub fn pack_index(multi_index: &[usize], dim: usize) -> Result<usize> {
    let mut sorted = multi_index.to_vec();
    if let Some(&bad) = sorted.iter().find(|&&i| i >= dim) {
        return Err(Error::IndexOutOfRange { index: bad, dim });
    }
    sorted.sort_unstable();
    Ok(pack_sorted(&sorted, dim))
}

// Lexicographic rank of a non-decreasing tuple among all such tuples.
fn pack_sorted(sorted: &[usize], dim: usize) -> usize {
    let n = sorted.len();
    let mut offset = 0;
    let mut lo = 0;
    for (p, &ip) in sorted.iter().enumerate() {
        let rest = n - p - 1;
        for j in lo..ip {
            // tuples of length `rest` drawn from [j, dim)
            offset += binomial(dim - j + rest - 1, rest);
        }
        lo = ip;
    }
    offset
}

/// Multinomial count of ordered tuples that sort to `sorted`.
pub fn multiplicity(sorted: &[usize]) -> usize {
    let mut denom = 1;
    let mut run = 1;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
            denom *= run;
        } else {
            run = 1;
        }
    }
    factorial(sorted.len()) / denom
}

/// Iterator over non-decreasing multi-indices in packed order.
#[derive(Debug, Clone)]
pub struct SortedIndices {
    current: Option<Vec<usize>>,
    dim: usize,
}

impl SortedIndices {
    pub fn new(rank: usize, dim: usize) -> Self {
        SortedIndices {
            current: if dim == 0 && rank > 0 {
                None
            } else {
                Some(vec![0; rank])
            },
            dim,
        }
    }
}

impl Iterator for SortedIndices {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        // bump the rightmost position that can still grow, reset the tail
        let mut p = next.len();
        while p > 0 {
            p -= 1;
            if next[p] + 1 < self.dim {
                let v = next[p] + 1;
                for slot in next.iter_mut().skip(p) {
                    *slot = v;
                }
                self.current = Some(next);
                return Some(out);
            }
        }
        Some(out)
    }
}

/// Rank-`n` totally symmetric tensor over `dim` dimensions, packed.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor<T = f64> {
    rank: usize,
    dim: usize,
    components: Vec<T>,
}

impl<T: Scalar> SymTensor<T> {
    /// Wraps packed components (one per sorted multi-index).
    pub fn from_packed(rank: usize, dim: usize, components: Vec<T>) -> Result<Self> {
        check_shape(rank, dim)?;
        let expected = packed_len(rank, dim);
        if components.len() != expected {
            return Err(Error::DimMismatch {
                expected,
                got: components.len(),
            });
        }
        Ok(SymTensor {
            rank,
            dim,
            components,
        })
    }

    pub fn zeros(rank: usize, dim: usize) -> Result<Self> {
        check_shape(rank, dim)?;
        Ok(SymTensor {
            rank,
            dim,
            components: vec![T::from_f64(0.0); packed_len(rank, dim)],
        })
    }

    /// Builds a tensor by evaluating `f` on every sorted multi-index.
    pub fn from_fn(rank: usize, dim: usize, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        check_shape(rank, dim)?;
        let components = SortedIndices::new(rank, dim).map(|idx| f(&idx)).collect();
        Ok(SymTensor {
            rank,
            dim,
            components,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn packed(&self) -> &[T] {
        &self.components
    }

    pub fn into_packed(self) -> Vec<T> {
        self.components
    }

    pub fn get(&self, multi_index: &[usize]) -> Result<&T> {
        if multi_index.len() != self.rank {
            return Err(Error::DimMismatch {
                expected: self.rank,
                got: multi_index.len(),
            });
        }
        Ok(&self.components[pack_index(multi_index, self.dim)?])
    }

    pub fn set(&mut self, multi_index: &[usize], value: T) -> Result<()> {
        if multi_index.len() != self.rank {
            return Err(Error::DimMismatch {
                expected: self.rank,
                got: multi_index.len(),
            });
        }
        let at = pack_index(multi_index, self.dim)?;
        self.components[at] = value;
        Ok(())
    }

    /// Plain values of the components.
    pub fn values(&self) -> SymTensor<f64> {
        SymTensor {
            rank: self.rank,
            dim: self.dim,
            components: self.components.iter().map(Scalar::real).collect(),
        }
    }
}

impl SymTensor<f64> {
    /// Rank-2 tensor with the given diagonal and zero off-diagonal entries.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        SymTensor::from_fn(
            2,
            dim,
            |idx| if idx[0] == idx[1] { diag[idx[0]] } else { 0.0 },
        )
    }

    /// Dense row-major `dim x dim` matrix of a rank-2 tensor.
    pub fn to_matrix(&self) -> Result<Vec<f64>> {
        if self.rank != 2 {
            return Err(Error::InvalidShape {
                rank: self.rank,
                dim: self.dim,
            });
        }
        let m = self.dim;
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = self.components[pack_sorted(&sorted2(i, j), m)];
            }
        }
        Ok(out)
    }

    /// Symmetric rank-2 tensor from a dense matrix (upper triangle is read).
    pub fn from_matrix(dim: usize, mat: &[f64]) -> Result<Self> {
        if mat.len() != dim * dim {
            return Err(Error::DimMismatch {
                expected: dim * dim,
                got: mat.len(),
            });
        }
        SymTensor::from_fn(2, dim, |idx| mat[idx[0] * dim + idx[1]])
    }
}

fn sorted2(i: usize, j: usize) -> [usize; 2] {
    if i <= j {
        [i, j]
    } else {
        [j, i]
    }
}

fn check_shape(rank: usize, dim: usize) -> Result<()> {
    if rank > MAX_RANK || dim < 2 {
        return Err(Error::InvalidShape { rank, dim });
    }
    Ok(())
}

/// `S(v, ..., v)`: the full contraction with `rank` copies of `v`.
pub fn contract_full<T: Scalar>(s: &SymTensor<T>, v: &[T]) -> Result<T> {
    if v.len() != s.dim {
        return Err(Error::DimMismatch {
            expected: s.dim,
            got: v.len(),
        });
    }
    let mut acc = T::from_f64(0.0);
    for (idx, comp) in SortedIndices::new(s.rank, s.dim).zip(&s.components) {
        let mut term = comp.scale(multiplicity(&idx) as f64);
        for &i in &idx {
            term = term.mul(&v[i]);
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Contracts `k` slots of `s` with `v`, returning a rank `n - k` tensor.
///
/// The result is scaled by `n! / (n - k)!`, so `k = 0` returns `s` itself and
/// for `n = 2k` it is exactly the `k`-th velocity derivative tensor of
/// `S(v, ..., v)` (e.g. the gradient `2 g v` for a metric, the Hessian
/// `12 S(., ., v, v)` for a quartic form).
pub fn contract_partial(s: &SymTensor<f64>, v: &[f64], k: usize) -> Result<SymTensor<f64>> {
    if v.len() != s.dim {
        return Err(Error::DimMismatch {
            expected: s.dim,
            got: v.len(),
        });
    }
    if k > s.rank {
        return Err(Error::RankUnderflow { rank: s.rank, k });
    }
    let n = s.rank;
    let scale = (factorial(n) / factorial(n - k)) as f64;
    let contracted: Vec<(Vec<usize>, f64)> = SortedIndices::new(k, s.dim)
        .map(|beta| {
            let w = multiplicity(&beta) as f64 * beta.iter().map(|&b| v[b]).product::<f64>();
            (beta, w)
        })
        .collect();
    SymTensor::from_fn(n - k, s.dim, |free| {
        let mut acc = 0.0;
        let mut full = Vec::with_capacity(n);
        for (beta, w) in &contracted {
            full.clear();
            full.extend_from_slice(free);
            full.extend_from_slice(beta);
            full.sort_unstable();
            acc += w * s.components[pack_sorted(&full, s.dim)];
        }
        scale * acc
    })
}
