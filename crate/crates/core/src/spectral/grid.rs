use crate::error::{Error, Result};

/// Tensor grid `{(i - n + 1/2) h}^N`, `i = 0..2n`, filling `[-R, R]^N` with
/// `R = n h`. Invariant under every coordinate sign flip and free of nodes
/// on coordinate hyperplanes.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricGrid {
    dim: usize,
    half_count: usize,
    h: f64,
}

impl SymmetricGrid {
    pub fn new(dim: usize, half_width: f64, h: f64) -> Result<Self> {
        if dim == 0 || !(h > 0.0) || !(half_width > 0.0) {
            return Err(Error::InvalidParameter("grid needs dim ≥ 1, h > 0, R > 0".into()));
        }
        let n = (half_width / h).round();
        if n < 2.0 || (n * h - half_width).abs() > 1e-9 * half_width {
            return Err(Error::InvalidParameter(format!(
                "half-width {half_width} is not a multiple (≥ 2) of h = {h}"
            )));
        }
        Ok(SymmetricGrid {
            dim,
            half_count: n as usize,
            h,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn half_width(&self) -> f64 {
        self.half_count as f64 * self.h
    }

    /// `n`, the number of positive nodes per axis.
    pub fn half_count(&self) -> usize {
        self.half_count
    }

    pub fn per_axis(&self) -> usize {
        2 * self.half_count
    }

    pub fn len(&self) -> usize {
        self.per_axis().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node coordinate along an axis.
    #[inline]
    pub fn axis_coord(&self, i: usize) -> f64 {
        (i as f64 - self.half_count as f64 + 0.5) * self.h
    }

    /// Dual (edge-midpoint) coordinate, `e = 0..=2n`; edge `e` joins nodes
    /// `e - 1` and `e`, with zero ghosts outside.
    #[inline]
    pub fn dual_coord(&self, e: usize) -> f64 {
        (e as f64 - self.half_count as f64) * self.h
    }

    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.per_axis() - 1 - i
    }

    /// Row-major multi-index, axis 0 slowest.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let m = self.per_axis();
        let mut out = vec![0; self.dim];
        for j in (0..self.dim).rev() {
            out[j] = idx % m;
            idx /= m;
        }
        out
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        let m = self.per_axis();
        multi.iter().fold(0, |acc, &i| acc * m + i)
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx).into_iter().map(|i| self.axis_coord(i)).collect()
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.coords(i)).collect()
    }

    /// Stride of an axis in the flat index.
    pub fn stride(&self, axis: usize) -> usize {
        self.per_axis().pow((self.dim - 1 - axis) as u32)
    }

    /// Index of `σ_S x` where `S` is a bit mask of flipped axes.
    pub fn reflect(&self, idx: usize, mask: usize) -> usize {
        let mut multi = self.multi_index(idx);
        for (j, m) in multi.iter_mut().enumerate() {
            if mask >> j & 1 == 1 {
                *m = self.mirror(*m);
            }
        }
        self.index(&multi)
    }

    /// Number of nodes in the positive orthant.
    pub fn orthant_len(&self) -> usize {
        self.half_count.pow(self.dim as u32)
    }

    /// Flat index of the `p`-th positive-orthant node.
    pub fn orthant_node(&self, mut p: usize) -> usize {
        let n = self.half_count;
        let mut multi = vec![0; self.dim];
        for j in (0..self.dim).rev() {
            multi[j] = n + p % n;
            p /= n;
        }
        self.index(&multi)
    }

    /// `(p, S)` with `idx = σ_S(orthant_node(p))`.
    pub fn to_orthant(&self, idx: usize) -> (usize, usize) {
        let n = self.half_count;
        let mut p = 0;
        let mut mask = 0;
        for (j, i) in self.multi_index(idx).into_iter().enumerate() {
            let (q, flipped) = if i >= n { (i - n, false) } else { (n - 1 - i, true) };
            p = p * n + q;
            if flipped {
                mask |= 1 << j;
            }
        }
        (p, mask)
    }
}
