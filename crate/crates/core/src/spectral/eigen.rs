use nalgebra::linalg::SymmetricTridiagonal;
use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::SymmetricGrid;
use super::operator::DiscreteOperatorPair;
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Sectors above this size go to the sparse Lanczos solver.
pub const DENSE_LIMIT: usize = 1024;

/// Which part of the spectrum to compute.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EigenRequest {
    /// The lowest `m` eigenvalues.
    Count(usize),
    /// Every eigenvalue `≤ λ_max`.
    Below(f64),
}

/// The form restricted to functions with `f(σ_j x) = ε_j f(x)`, in the
/// symmetric scaling `A = W^{-1/2} B^ε W^{-1/2}` on the positive orthant.
#[derive(Clone, Debug)]
pub struct SectorProblem {
    pub mask: usize,
    pub a: CsrMatrix<f64>,
    /// Diagonal of `W` on the orthant.
    pub w: Vec<f64>,
}

impl SectorProblem {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn bandwidth(&self) -> usize {
        self.a
            .row_iter()
            .enumerate()
            .flat_map(|(i, r)| r.col_indices().iter().map(move |&j| i.abs_diff(j)).collect::<Vec<_>>())
            .max()
            .unwrap_or(0)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.a
            .row_iter()
            .map(|r| r.col_indices().iter().zip(r.values()).map(|(&j, v)| v * x[j]).sum())
            .collect()
    }

    /// `‖B^ε u - λ W u‖ / ‖W u‖` for `u = W^{-1/2} v`.
    pub fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let av = self.apply(v);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..v.len() {
            let s = self.w[i].sqrt();
            num += (s * (av[i] - lambda * v[i])).powi(2);
            den += (s * v[i]).powi(2);
        }
        (num / den).sqrt()
    }
}

/// Builds the sector problem for the sign pattern `mask` (bit `j` set means
/// odd in `x_j`).
pub fn sector_problem(pair: &DiscreteOperatorPair, mask: usize) -> SectorProblem {
    let grid = pair.grid();
    let n = grid.orthant_len();
    let b = pair.stiffness();
    let nodes: Vec<usize> = (0..n).map(|p| grid.orthant_node(p)).collect();
    let w: Vec<f64> = nodes.iter().map(|&i| pair.mass()[i]).collect();
    let mut coo = CooMatrix::new(n, n);
    for (p, &i) in nodes.iter().enumerate() {
        let row = b.row(i);
        for (&c, &v) in row.col_indices().iter().zip(row.values()) {
            let (q, flips) = grid.to_orthant(c);
            let sign = if (flips & mask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            // symmetrized and scaled in one pass
            let s = 0.5 * sign * v / (w[p] * w[q]).sqrt();
            coo.push(p, q, s);
            coo.push(q, p, s);
        }
    }
    SectorProblem {
        mask,
        a: CsrMatrix::from(&coo),
        w,
    }
}

/// Eigenpairs of one sector: ascending values with unit vectors in the
/// symmetric scaling.
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// Every eigenvalue strictly below this bound is in `values`.
    pub complete_below: f64,
    pub partial: bool,
}

// ---------------------------------------------------------------- tridiagonal

/// Number of eigenvalues `< x` of the symmetric tridiagonal `(d, e)`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    let tiny = f64::MIN_POSITIVE.sqrt();
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..d.len() {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < d.len() { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// `(T - λ) x = y` by Gaussian elimination with partial pivoting.
fn tridiagonal_solve(d: &[f64], e: &[f64], lambda: f64, y: &[f64]) -> Vec<f64> {
    let n = d.len();
    // rows stored as (sub, diag, sup, sup2) after pivoting
    let mut a: Vec<[f64; 4]> = (0..n)
        .map(|i| {
            [
                if i > 0 { e[i - 1] } else { 0.0 },
                d[i] - lambda,
                if i + 1 < n { e[i] } else { 0.0 },
                0.0,
            ]
        })
        .collect();
    let mut b = y.to_vec();
    let eps = 1e-300;
    for i in 0..n.saturating_sub(1) {
        let (p, q) = (a[i][1], a[i + 1][0]);
        if q.abs() > p.abs() {
            // swap rows i and i+1 (row i+1 shifted to align columns)
            let ri = [a[i][1], a[i][2], a[i][3]];
            let rn = [a[i + 1][0], a[i + 1][1], a[i + 1][2]];
            a[i][1] = rn[0];
            a[i][2] = rn[1];
            a[i][3] = rn[2];
            a[i + 1][0] = ri[0];
            a[i + 1][1] = ri[1];
            a[i + 1][2] = ri[2];
            b.swap(i, i + 1);
        }
        let piv = if a[i][1].abs() < eps { eps } else { a[i][1] };
        a[i][1] = piv;
        let l = a[i + 1][0] / piv;
        a[i + 1][0] = 0.0;
        a[i + 1][1] -= l * a[i][2];
        a[i + 1][2] -= l * a[i][3];
        b[i + 1] -= l * b[i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let piv = if a[i][1].abs() < eps { eps } else { a[i][1] };
        let mut s = b[i];
        if i + 1 < n {
            s -= a[i][2] * x[i + 1];
        }
        if i + 2 < n {
            s -= a[i][3] * x[i + 2];
        }
        x[i] = s / piv;
    }
    x
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Sturm bisection for the eigenvalues and inverse iteration for the
/// vectors of a symmetric tridiagonal matrix.
pub fn tridiagonal_eigen(d: &[f64], e: &[f64], req: EigenRequest, exec: Execution) -> SectorSpectrum {
    let n = d.len();
    let (glo, ghi) = gershgorin(d, e);
    let m = match req {
        EigenRequest::Count(m) => m.min(n),
        EigenRequest::Below(l) => sturm_count(d, e, next_up(l)),
    };
    let scale = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
    let values: Vec<f64> = exec.map_range(m, |i| {
        let (mut lo, mut hi) = (glo, ghi);
        while hi - lo > 2.0 * f64::EPSILON * scale {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(d, e, mid) > i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    });
    // near-equal values share one inverse-iteration run with reorthogonalization
    let gap = 1e-6 * scale;
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    for i in 0..m {
        match clusters.last_mut() {
            Some(c) if values[i] - values[c.1 - 1] <= gap => c.1 = i + 1,
            _ => clusters.push((i, i + 1)),
        }
    }
    let vectors: Vec<Vec<f64>> = exec
        .map(&clusters, |&(a, b)| {
            let mut found: Vec<Vec<f64>> = Vec::with_capacity(b - a);
            for i in a..b {
                let mut rng = ChaCha8Rng::seed_from_u64(0x7d1a + i as u64);
                let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
                for _ in 0..3 {
                    v = tridiagonal_solve(d, e, values[i], &v);
                    orthogonalize(&mut v, &found);
                    normalize(&mut v);
                }
                found.push(v);
            }
            found
        })
        .into_iter()
        .flatten()
        .collect();
    let complete_below = match req {
        EigenRequest::Below(l) => next_up(l),
        EigenRequest::Count(_) if m == n => f64::INFINITY,
        EigenRequest::Count(_) => values.last().copied().unwrap_or(glo),
    };
    SectorSpectrum {
        values,
        vectors,
        complete_below,
        partial: false,
    }
}

fn next_up(x: f64) -> f64 {
    x + x.abs() * 4.0 * f64::EPSILON + f64::MIN_POSITIVE
}

// ---------------------------------------------------------------- dense

/// Householder reduction to tridiagonal form, then the tridiagonal solver
/// and back-transformation of the requested vectors.
fn dense_eigen(s: &SectorProblem, req: EigenRequest, exec: Execution) -> SectorSpectrum {
    let n = s.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, r) in s.a.row_iter().enumerate() {
        for (&j, v) in r.col_indices().iter().zip(r.values()) {
            a[(i, j)] = *v;
        }
    }
    let (q, d, e) = SymmetricTridiagonal::new(a).unpack();
    let d: Vec<f64> = d.iter().copied().collect();
    let e: Vec<f64> = e.iter().copied().collect();
    let mut t = tridiagonal_eigen(&d, &e, req, exec);
    t.vectors = exec.map(&t.vectors, |y| {
        let mut v: Vec<f64> = (&q * DVector::from_column_slice(y)).iter().copied().collect();
        normalize(&mut v);
        v
    });
    t
}

// ---------------------------------------------------------------- banded

/// Symmetric band matrix in lower storage: `(i, i - d)` for `d ≤ b`.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    b: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn from_csr(a: &CsrMatrix<f64>, b: usize) -> Self {
        let n = a.nrows();
        let mut data = vec![0.0; n * (b + 1)];
        for (i, r) in a.row_iter().enumerate() {
            for (&j, v) in r.col_indices().iter().zip(r.values()) {
                if j <= i {
                    data[i * (b + 1) + (i - j)] += v;
                }
            }
        }
        BandMatrix { n, b, data }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.b + 1) + (i - j)]
    }

    /// `L D Lᵀ` of `A - shift·I` without pivoting; returns `(L, D)` in band
    /// storage (unit diagonal implied).
    fn ldl(&self, shift: f64) -> (Vec<f64>, Vec<f64>) {
        let (n, b) = (self.n, self.b);
        let mut l = vec![0.0; n * (b + 1)];
        let mut d = vec![0.0; n];
        let floor = f64::EPSILON * self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(shift.abs());
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            // column i of L: l[k, i] for k in i+1..=i+b computed as we go (row-oriented)
            for j in j0..i {
                let mut s = self.at(i, j);
                let k0 = i.saturating_sub(b).max(j.saturating_sub(b));
                for k in k0..j {
                    s -= l[i * (b + 1) + (i - k)] * l[j * (b + 1) + (j - k)] * d[k];
                }
                l[i * (b + 1) + (i - j)] = s / d[j];
            }
            let mut s = self.at(i, i) - shift;
            for k in j0..i {
                let lik = l[i * (b + 1) + (i - k)];
                s -= lik * lik * d[k];
            }
            if s.abs() < floor {
                s = if s < 0.0 { -floor } else { floor };
            }
            d[i] = s;
            l[i * (b + 1)] = 1.0;
        }
        (l, d)
    }

    /// Number of eigenvalues `< shift` (Sylvester's law of inertia).
    pub fn count_below(&self, shift: f64) -> usize {
        self.ldl(shift).1.iter().filter(|v| **v < 0.0).count()
    }

    /// Factorization of `A - shift·I`, used for repeated solves.
    pub fn factor(&self, shift: f64) -> BandFactor {
        let (l, d) = self.ldl(shift);
        BandFactor { n: self.n, b: self.b, l, d }
    }
}

pub struct BandFactor {
    n: usize,
    b: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl BandFactor {
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let (n, b) = (self.n, self.b);
        let mut x = y.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(b)..i {
                s -= self.l[i * (b + 1) + (i - k)] * x[k];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + b + 1).min(n) {
                s -= self.l[k * (b + 1) + (k - i)] * x[k];
            }
            x[i] = s;
        }
        x
    }
}

// ---------------------------------------------------------------- Lanczos

/// Controls for the shift-invert Lanczos solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosOptions {
    pub max_restarts: usize,
    /// Ritz pairs are locked once `‖Av - θv‖ ≤ tol·max(1, |θ|)`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            max_restarts: 60,
            tol: 1e-10,
            seed: 0x1a2c,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// Lowest eigenpairs by Lanczos on `(A + I)⁻¹` with full
/// reorthogonalization, locking of converged Ritz pairs, restarts from the
/// unconverged ones, and a final inertia check that forces fresh random
/// restarts while any eigenvalue (including a missed multiple) is absent.
pub fn lanczos_eigen(s: &SectorProblem, req: EigenRequest, opts: LanczosOptions) -> SectorSpectrum {
    let n = s.len();
    let band = BandMatrix::from_csr(&s.a, s.bandwidth());
    let shift = -1.0;
    let fac = band.factor(shift);
    let target = match req {
        EigenRequest::Count(m) => m.min(n),
        EigenRequest::Below(l) => band.count_below(next_up(l)),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ s.mask as u64);
    let mut locked: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut start: Option<Vec<f64>> = None;
    let mut restarts = 0;
    let mut stalls = 0;
    let done = |locked: &[(f64, Vec<f64>)]| -> bool {
        if locked.len() < target {
            return false;
        }
        let mut vals: Vec<f64> = locked.iter().map(|p| p.0).collect();
        vals.sort_by(f64::total_cmp);
        // every eigenvalue below the largest wanted one must have been found
        let bound = next_up(vals[target.saturating_sub(1).min(vals.len() - 1)]);
        target == 0 || band.count_below(bound) <= vals.iter().filter(|v| **v < bound).count()
    };
    while !done(&locked) && restarts <= opts.max_restarts && locked.len() < n {
        restarts += 1;
        let free = n - locked.len();
        let want = target.saturating_sub(locked.len()).max(1);
        let ncv = (2 * want + 24 + 16 * stalls).min(free);
        let basis_locked: Vec<Vec<f64>> = locked.iter().map(|p| p.1.clone()).collect();
        let mut v = start.take().unwrap_or_else(|| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        orthogonalize(&mut v, &basis_locked);
        let nv = dot(&v, &v).sqrt();
        if nv < 1e-300 {
            v = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            orthogonalize(&mut v, &basis_locked);
        }
        normalize(&mut v);
        let mut q: Vec<Vec<f64>> = vec![v];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..ncv {
            let mut w = fac.solve(&q[j]);
            let a = dot(&w, &q[j]);
            alpha.push(a);
            orthogonalize(&mut w, &basis_locked);
            orthogonalize(&mut w, &q);
            let b = dot(&w, &w).sqrt();
            if j + 1 == ncv || b < 1e-14 * a.abs().max(1e-300) {
                beta.push(b);
                break;
            }
            w.iter_mut().for_each(|x| *x /= b);
            beta.push(b);
            q.push(w);
        }
        let m = alpha.len();
        let ritz = tridiagonal_eigen(&alpha, &beta[..m - 1], EigenRequest::Count(m), Execution::Sequential);
        // largest μ of (A + I)⁻¹ first
        let order: Vec<usize> = (0..m).rev().collect();
        let mut next = vec![0.0; n];
        let mut any_new = false;
        for &c in order.iter().take(want) {
            let mu = ritz.values[c];
            if !(mu > 0.0) {
                continue;
            }
            let mut y = vec![0.0; n];
            for (i, qi) in q.iter().enumerate().take(m) {
                let coef = ritz.vectors[c][i];
                y.iter_mut().zip(qi).for_each(|(a, b)| *a += coef * b);
            }
            normalize(&mut y);
            let ay = s.apply(&y);
            let rayleigh = dot(&ay, &y);
            let res = ay.iter().zip(&y).map(|(a, b)| (a - rayleigh * b).powi(2)).sum::<f64>().sqrt();
            if res <= opts.tol * rayleigh.abs().max(1.0) {
                let mut yy = y;
                orthogonalize(&mut yy, &locked.iter().map(|p| p.1.clone()).collect::<Vec<_>>());
                normalize(&mut yy);
                locked.push((rayleigh, yy));
                any_new = true;
            } else {
                next.iter_mut().zip(&y).for_each(|(a, b)| *a += b);
            }
        }
        stalls = if any_new { 0 } else { stalls + 1 };
        // a fresh random start every few stalls guards against a start
        // vector deficient in a wanted direction
        start = if stalls % 4 != 3 && dot(&next, &next) > 0.0 { Some(next) } else { None };
    }
    locked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let partial = !done(&locked);
    let take = match req {
        EigenRequest::Count(m) => m.min(locked.len()),
        EigenRequest::Below(l) => locked.iter().filter(|p| p.0 <= l).count(),
    };
    locked.truncate(take);
    let complete_below = match req {
        EigenRequest::Below(l) if !partial => next_up(l),
        _ if take == n => f64::INFINITY,
        _ => locked.last().map(|p| p.0).unwrap_or(f64::NEG_INFINITY),
    };
    SectorSpectrum {
        values: locked.iter().map(|p| p.0).collect(),
        vectors: locked.into_iter().map(|p| p.1).collect(),
        complete_below,
        partial,
    }
}

/// Dispatches a sector to the tridiagonal, dense or Lanczos solver.
pub fn solve_sector(s: &SectorProblem, req: EigenRequest, exec: Execution) -> SectorSpectrum {
    if s.bandwidth() <= 1 {
        let n = s.len();
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n.saturating_sub(1)];
        for (i, r) in s.a.row_iter().enumerate() {
            for (&j, v) in r.col_indices().iter().zip(r.values()) {
                if j == i {
                    d[i] += v;
                } else if j == i + 1 {
                    e[i] += v;
                }
            }
        }
        tridiagonal_eigen(&d, &e, req, exec)
    } else if s.len() <= DENSE_LIMIT {
        dense_eigen(s, req, exec)
    } else {
        lanczos_eigen(s, req, LanczosOptions::default())
    }
}

/// Eigenvalues of the discrete operator with convergence metadata.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub grid: SymmetricGrid,
    /// Ascending eigenvalues over all sectors.
    pub eigenvalues: Vec<f64>,
    /// `‖Bv - λWv‖/‖Wv‖` per pair.
    pub residuals: Vec<f64>,
    /// Sector mask of each pair.
    pub sectors: Vec<usize>,
    /// Vectors in the symmetric sector scaling, when kept.
    pub vectors: Vec<Vec<f64>>,
    /// Every eigenvalue `≤ converged_below` is listed.
    pub converged_below: f64,
    /// Set when an iterative solve stopped before meeting its target.
    pub partial: bool,
}

/// Solves `B v = λ W v` sector by sector and merges the results.
pub fn eigensolve(pair: &DiscreteOperatorPair, req: EigenRequest, keep_vectors: bool, exec: Execution) -> Result<SpectrumResult> {
    if let EigenRequest::Below(l) = req {
        if !l.is_finite() {
            return Err(Error::InvalidParameter("λ_max must be finite".into()));
        }
    }
    let grid = pair.grid().clone();
    let masks: Vec<usize> = (0..1usize << grid.dim()).collect();
    let sectors: Vec<(SectorProblem, SectorSpectrum)> = exec.map(&masks, |&mask| {
        let sp = sector_problem(pair, mask);
        let spec = solve_sector(&sp, req, Execution::Sequential);
        (sp, spec)
    });
    let mut all: Vec<(f64, f64, usize, Vec<f64>)> = Vec::new();
    let mut converged_below = f64::INFINITY;
    let mut partial = false;
    for (sp, spec) in &sectors {
        converged_below = converged_below.min(spec.complete_below);
        partial |= spec.partial;
        for (val, vec) in spec.values.iter().zip(&spec.vectors) {
            let res = sp.residual(*val, vec);
            all.push((*val, res, sp.mask, if keep_vectors { vec.clone() } else { Vec::new() }));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let EigenRequest::Count(m) = req {
        all.truncate(m);
        if all.len() == m {
            converged_below = converged_below.min(all.last().map(|p| p.0).unwrap_or(f64::INFINITY));
        }
    } else if let EigenRequest::Below(l) = req {
        converged_below = converged_below.min(l);
    }
    Ok(SpectrumResult {
        grid,
        eigenvalues: all.iter().map(|p| p.0).collect(),
        residuals: all.iter().map(|p| p.1).collect(),
        sectors: all.iter().map(|p| p.2).collect(),
        vectors: all.into_iter().map(|p| p.3).collect(),
        converged_below,
        partial,
    })
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(*r))
    }

    /// Full-grid vector `u` of pair `i`, `W`-normalized.
    pub fn lift(&self, pair: &DiscreteOperatorPair, i: usize) -> Option<Vec<f64>> {
        let v = self.vectors.get(i).filter(|v| !v.is_empty())?;
        let grid = &self.grid;
        let mask = self.sectors[i];
        let mut u = vec![0.0; grid.len()];
        for (idx, x) in u.iter_mut().enumerate() {
            let (p, flips) = grid.to_orthant(idx);
            let orth = grid.orthant_node(p);
            let sign = if (flips & mask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            *x = sign * v[p] / pair.mass()[orth].sqrt();
        }
        let norm = pair.norm_sq(&u).sqrt();
        u.iter_mut().for_each(|x| *x /= norm);
        Some(u)
    }

    /// `(index, eigenvalue, residual)` rows.
    pub fn rows(&self) -> Vec<(usize, f64, f64)> {
        self.eigenvalues
            .iter()
            .zip(&self.residuals)
            .enumerate()
            .map(|(i, (v, r))| (i, *v, *r))
            .collect()
    }
}

/// `N(L, λ) = #{i : λ_i ≤ λ}`.
pub fn counting_n(spectrum: &SpectrumResult, lambda: f64) -> Result<usize> {
    if lambda > spectrum.converged_below {
        return Err(Error::SpectrumTruncated(spectrum.converged_below));
    }
    Ok(spectrum.eigenvalues.iter().filter(|v| **v <= lambda).count())
}

/// `N(L, λ)` by inertia of `B - λW`, summed over sectors.
pub fn counting_by_inertia(pair: &DiscreteOperatorPair, lambda: f64) -> usize {
    (0..1usize << pair.grid().dim())
        .map(|mask| {
            let sp = sector_problem(pair, mask);
            BandMatrix::from_csr(&sp.a, sp.bandwidth()).count_below(next_up(lambda))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_and_inverse_iteration() {
        // second-difference matrix: eigenvalues 2 - 2cos(jπ/(n+1))
        let n = 50;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let s = tridiagonal_eigen(&d, &e, EigenRequest::Count(5), Execution::Sequential);
        for (j, v) in s.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
            let vec = &s.vectors[j];
            for i in 0..n {
                let mut av = d[i] * vec[i];
                if i > 0 {
                    av += e[i - 1] * vec[i - 1];
                }
                if i + 1 < n {
                    av += e[i] * vec[i + 1];
                }
                assert!((av - v * vec[i]).abs() < 1e-12);
            }
        }
        assert_eq!(sturm_count(&d, &e, 4.0), n);
    }

    #[test]
    fn band_inertia_and_solve() {
        let n = 30;
        let mut coo = CooMatrix::new(n, n);
        for i in 0..n {
            coo.push(i, i, 4.0 + i as f64 * 0.1);
            if i + 2 < n {
                coo.push(i, i + 2, -1.0);
                coo.push(i + 2, i, -1.0);
            }
        }
        let a = CsrMatrix::from(&coo);
        let band = BandMatrix::from_csr(&a, 2);
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for (i, r) in a.row_iter().enumerate() {
            for (&j, v) in r.col_indices().iter().zip(r.values()) {
                dense[(i, j)] = *v;
            }
        }
        let ev = nalgebra::SymmetricEigen::new(dense.clone()).eigenvalues;
        for x in [2.5, 4.0, 5.5, 7.0] {
            assert_eq!(band.count_below(x), ev.iter().filter(|v| **v < x).count());
        }
        let y: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = band.factor(-1.0).solve(&y);
        for i in 0..n {
            let row: f64 = (0..n).map(|j| dense[(i, j)] * x[j]).sum::<f64>() + x[i];
            assert!((row - y[i]).abs() < 1e-12);
        }
    }
}
