//! Gauss–Jacobi rules and a globally adaptive one-dimensional integrator
//! that absorbs algebraic endpoint singularities into the rule weights.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;
use std::collections::HashMap;
use std::sync::{Arc, LazyLock, RwLock};

use crate::error::{Error, Result};

/// Nodes and weights on `[-1, 1]` for the weight `(1-x)^a (1+x)^b`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Golub–Welsch construction of the `n`-point Gauss–Jacobi rule.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> GaussRule {
    assert!(n >= 1 && a > -1.0 && b > -1.0);
    let mut t = DMatrix::<f64>::zeros(n, n);
    let ab = a + b;
    for i in 0..n {
        let fi = i as f64;
        let s = 2.0 * fi + ab;
        t[(i, i)] = if i == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if i + 1 < n {
            let j = fi + 1.0;
            let s = 2.0 * j + ab;
            let off = (4.0 * j * (j + a) * (j + b) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt();
            t[(i, i + 1)] = off;
            t[(i + 1, i)] = off;
        }
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(ab + 2.0))
        .exp();
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

type RuleKey = (usize, u64, u64);
static RULES: LazyLock<RwLock<HashMap<RuleKey, Arc<GaussRule>>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

/// Cached rule lookup.
pub fn cached_rule(n: usize, a: f64, b: f64) -> Arc<GaussRule> {
    let key = (n, a.to_bits(), b.to_bits());
    if let Some(r) = RULES.read().expect("rule cache").get(&key) {
        return r.clone();
    }
    let rule = Arc::new(gauss_jacobi(n, a, b));
    RULES
        .write()
        .expect("rule cache")
        .entry(key)
        .or_insert(rule)
        .clone()
}

/// Values the adaptive integrator can accumulate: scalars and fixed arrays.
pub trait QuadValue: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, o: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn abs(self) -> Self;
    fn sub(self, o: Self) -> Self;
    /// Largest component of `err / max(|total|, floor·abs_total)`.
    fn relative_error(err: Self, total: Self, abs_total: Self, floor: f64) -> f64;
    fn is_finite(self) -> bool;
    fn first(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn relative_error(err: Self, total: Self, abs_total: Self, floor: f64) -> f64 {
        let d = total.abs().max(floor * abs_total);
        if d == 0.0 {
            if err == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            err / d
        }
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn first(self) -> f64 {
        self
    }
}

impl<const N: usize> QuadValue for [f64; N] {
    fn zero() -> Self {
        [0.0; N]
    }
    fn add(self, o: Self) -> Self {
        std::array::from_fn(|i| self[i] + o[i])
    }
    fn scale(self, s: f64) -> Self {
        self.map(|v| v * s)
    }
    fn abs(self) -> Self {
        self.map(f64::abs)
    }
    fn sub(self, o: Self) -> Self {
        std::array::from_fn(|i| self[i] - o[i])
    }
    fn relative_error(err: Self, total: Self, abs_total: Self, floor: f64) -> f64 {
        (0..N)
            .map(|i| f64::relative_error(err[i], total[i], abs_total[i], floor))
            .fold(0.0, f64::max)
    }
    fn is_finite(self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
    fn first(self) -> f64 {
        self[0]
    }
}

/// Settings of the adaptive integrator.
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub max_depth: usize,
    pub order: usize,
    /// Fraction of `∫|f|` used as a denominator floor for cancelling integrands.
    pub abs_floor: f64,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            rel_tol: 1e-6,
            max_depth: 30,
            order: 10,
            abs_floor: 1e-3,
        }
    }
}

/// An initial panel `[a, b]` with algebraic endpoint exponents:
/// the integrand is assumed to behave like `(t-a)^ea (b-t)^eb · smooth`.
#[derive(Clone, Copy, Debug)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub ea: f64,
    pub eb: f64,
}

struct Cell<V> {
    panel: Panel,
    depth: usize,
    coarse: V,
    left: V,
    right: V,
    abs: V,
}

fn apply_rule<V: QuadValue>(f: &mut dyn FnMut(f64) -> V, p: Panel, order: usize) -> (V, V) {
    let rule = cached_rule(order, p.eb, p.ea);
    let half = 0.5 * (p.b - p.a);
    let mid = 0.5 * (p.a + p.b);
    let scale = half.powf(1.0 + p.ea + p.eb);
    let mut sum = V::zero();
    let mut abs = V::zero();
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let t = mid + half * x;
        let mut v = f(t);
        let mut div = 1.0;
        if p.ea != 0.0 {
            div *= ((1.0 + x) * half).powf(p.ea);
        }
        if p.eb != 0.0 {
            div *= ((1.0 - x) * half).powf(p.eb);
        }
        if div != 1.0 {
            v = v.scale(1.0 / div);
        }
        sum = sum.add(v.scale(*w));
        abs = abs.add(v.abs().scale(*w));
    }
    (sum.scale(scale), abs.scale(scale))
}

fn make_cell<V: QuadValue>(
    f: &mut dyn FnMut(f64) -> V,
    p: Panel,
    depth: usize,
    coarse: Option<V>,
    order: usize,
) -> Cell<V> {
    let coarse = coarse.unwrap_or_else(|| apply_rule(f, p, order).0);
    let m = 0.5 * (p.a + p.b);
    let (left, la) = apply_rule(f, Panel { a: p.a, b: m, ea: p.ea, eb: 0.0 }, order);
    let (right, ra) = apply_rule(f, Panel { a: m, b: p.b, ea: 0.0, eb: p.eb }, order);
    Cell {
        panel: p,
        depth,
        coarse,
        left,
        right,
        abs: la.add(ra),
    }
}

/// Integrates `f` over the union of `panels` until the summed difference
/// between each cell's parent rule and the sum of its two children satisfies
/// the relative tolerance.
pub fn integrate_panels<V: QuadValue>(
    f: &mut dyn FnMut(f64) -> V,
    panels: &[Panel],
    opts: &AdaptiveOptions,
) -> Result<V> {
    let mut cells: Vec<Cell<V>> = panels
        .iter()
        .filter(|p| p.b > p.a)
        .map(|&p| make_cell(f, p, 0, None, opts.order))
        .collect();
    if cells.is_empty() {
        return Ok(V::zero());
    }
    loop {
        let mut total = V::zero();
        let mut err = V::zero();
        let mut abs = V::zero();
        for c in &cells {
            total = total.add(c.left.add(c.right));
            err = err.add(c.coarse.sub(c.left.add(c.right)).abs());
            abs = abs.add(c.abs);
        }
        if !total.is_finite() {
            return Err(Error::QuadratureDiverged {
                estimate: total.first(),
                error: f64::INFINITY,
            });
        }
        let rel = V::relative_error(err, total, abs, opts.abs_floor);
        if rel <= opts.rel_tol {
            return Ok(total);
        }
        let pick = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.depth < opts.max_depth)
            .map(|(i, c)| {
                let e = c.coarse.sub(c.left.add(c.right)).abs();
                (i, V::relative_error(e, total, abs, opts.abs_floor))
            })
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        let Some((i, cell_err)) = pick else {
            return Err(Error::QuadratureDiverged {
                estimate: total.first(),
                error: err.first(),
            });
        };
        if cell_err == 0.0 {
            return Err(Error::QuadratureDiverged {
                estimate: total.first(),
                error: err.first(),
            });
        }
        let c = cells.swap_remove(i);
        let m = 0.5 * (c.panel.a + c.panel.b);
        let lp = Panel { a: c.panel.a, b: m, ea: c.panel.ea, eb: 0.0 };
        let rp = Panel { a: m, b: c.panel.b, ea: 0.0, eb: c.panel.eb };
        cells.push(make_cell(f, lp, c.depth + 1, Some(c.left), opts.order));
        cells.push(make_cell(f, rp, c.depth + 1, Some(c.right), opts.order));
    }
}

/// Splits `[lo, hi]` at interior break points and attaches endpoint exponents.
/// `singular` lists `(point, exponent)` pairs; points outside the interval are
/// ignored, points coinciding with the ends add their exponent there.
pub fn build_panels(lo: f64, hi: f64, end_exp: (f64, f64), singular: &[(f64, f64)], breaks: &[f64]) -> Vec<Panel> {
    if hi <= lo {
        return Vec::new();
    }
    let tol = 1e-13 * (hi - lo).max(lo.abs().max(hi.abs()));
    let mut pts: Vec<(f64, f64)> = vec![(lo, 0.0), (hi, 0.0)];
    for &(p, e) in singular {
        if p >= lo - tol && p <= hi + tol {
            pts.push((p.clamp(lo, hi), e));
        }
    }
    for &p in breaks {
        if p > lo + tol && p < hi - tol {
            pts.push((p, 0.0));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (p, e) in pts {
        match merged.last_mut() {
            Some(last) if (p - last.0).abs() <= tol => last.1 += e,
            _ => merged.push((p, e)),
        }
    }
    if let Some(first) = merged.first_mut() {
        first.0 = lo;
    }
    if let Some(last) = merged.last_mut() {
        last.0 = hi;
    }
    let n = merged.len();
    (0..n - 1)
        .map(|i| Panel {
            a: merged[i].0,
            b: merged[i + 1].0,
            ea: merged[i].1 + if i == 0 { end_exp.0 } else { 0.0 },
            eb: merged[i + 1].1 + if i + 2 == n { end_exp.1 } else { 0.0 },
        })
        .collect()
}

/// `ζ(s)` for real `s > 1`, by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0);
    let n = 20.0f64;
    let head: f64 = (1..20).map(|j| (j as f64).powf(-s)).sum();
    head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * n.powf(-s - 5.0) / 30240.0
}

/// `ζ(-β, 1/2)` for `β ≥ 0`: the leading error coefficient of the offset
/// midpoint rule against `x^β`,
/// `h Σ_{i≥0} x_i^β g(x_i) = ∫_0^∞ x^β g + ζ(-β, 1/2) h^{β+1} g(0) + O(h^{β+3})`
/// for even `g`, with `x_i = (i + 1/2) h`. Vanishes for even integers `β`.
pub fn midpoint_origin_coefficient(beta: f64) -> f64 {
    assert!(beta >= 0.0);
    if beta.fract() == 0.0 && (beta as u64) % 2 == 0 {
        return 0.0;
    }
    // reflection formula for ζ(-β), then ζ(s, 1/2) = (2^s - 1) ζ(s)
    let s = 1.0 + beta;
    let z = 2f64.powf(-beta)
        * std::f64::consts::PI.powf(-s)
        * (-std::f64::consts::FRAC_PI_2 * beta).sin()
        * ln_gamma(s).exp()
        * zeta(s);
    (2f64.powf(-beta) - 1.0) * z
}
