//! The auxiliary function `m`, sublevel sets `E_λ`, grid counts `M(λ)` and
//! empirical checks on `V` (reverse Hölder, growth of `m`, near-monotonicity).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measure::WeightedMeasure;
use crate::potential::Potential;

const R_MIN: f64 = 1e-8;
const R_MAX: f64 = 1e8;
const PROBES_PER_DECADE: i32 = 8;

/// Result of locating `E_λ = {m ≤ √λ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sublevel {
    Empty,
    /// `E_λ ⊂ [-half_width, half_width]^N`.
    Bounded { half_width: f64 },
    Unbounded,
}

/// Cubes of an origin-anchored grid meeting `E_λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridCount {
    pub lambda: f64,
    pub side: f64,
    pub count: usize,
    pub candidates: usize,
    pub cubes: Vec<Vec<i64>>,
}

/// `m(x)` with a memo keyed by the exact bits of `x`.
#[derive(Debug)]
pub struct AuxFunction {
    potential: Arc<Potential>,
    measure: Arc<WeightedMeasure>,
    tol: f64,
    exec: Execution,
    memo: RwLock<HashMap<Vec<u64>, f64>>,
}

fn key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

impl AuxFunction {
    pub fn new(potential: Arc<Potential>, measure: Arc<WeightedMeasure>) -> Result<Self> {
        if potential.dim() != measure.dim() {
            return Err(Error::InvalidParameter("potential and measure dimensions differ".into()));
        }
        Ok(AuxFunction {
            potential,
            measure,
            tol: 1e-3,
            exec: Execution::default(),
            memo: RwLock::new(HashMap::new()),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn potential(&self) -> &Arc<Potential> {
        &self.potential
    }

    pub fn measure(&self) -> &Arc<WeightedMeasure> {
        &self.measure
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().expect("m memo").len()
    }

    /// `(∫_B V dw, w(B))` over `B = B(x,r)` from one quadrature pass.
    fn ball_pair(&self, x: &[f64], r: f64) -> Result<[f64; 2]> {
        let v = &self.potential;
        self.measure.integrate_ball_with(&|y: &[f64]| [v.eval(y), 1.0], x, r)
    }

    /// `g(x,r) = r² (∫_{B(x,r)} V dw) / w(B(x,r))`.
    pub fn landscape_g(&self, x: &[f64], r: f64) -> Result<f64> {
        let [a, b] = self.ball_pair(x, r)?;
        Ok(r * r * a / b)
    }

    /// `1/m(x) = sup{r : g(x,r) ≤ 1}`.
    pub fn m(&self, x: &[f64]) -> Result<f64> {
        let k = key(x);
        if let Some(v) = self.memo.read().expect("m memo").get(&k) {
            return Ok(*v);
        }
        let v = self.compute_m(x)?;
        self.memo.write().expect("m memo").insert(k, v);
        Ok(v)
    }

    pub fn m_many(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.exec.try_map(xs, |x| self.m(x))
    }

    fn compute_m(&self, x: &[f64]) -> Result<f64> {
        let degenerate = || Error::DegeneratePotential(x.to_vec());
        let g = |r: f64| self.landscape_g(x, r);
        // decade bracket: g(a) <= 1 < g(10a)
        let mut a = 1.0;
        if g(a)? <= 1.0 {
            loop {
                if a * 10.0 > R_MAX {
                    return Err(degenerate());
                }
                if g(a * 10.0)? > 1.0 {
                    break;
                }
                a *= 10.0;
            }
        } else {
            loop {
                a /= 10.0;
                if a < R_MIN {
                    return Err(degenerate());
                }
                if g(a)? <= 1.0 {
                    break;
                }
            }
        }
        // top-down probe scan over two decades above `a`
        let probe = |a: f64, i: i32| a * 10f64.powf(i as f64 / PROBES_PER_DECADE as f64);
        let (mut lo, mut glo, mut hi, mut ghi);
        'scan: loop {
            let top = 2 * PROBES_PER_DECADE;
            let gtop = g(probe(a, top))?;
            if gtop <= 1.0 {
                a = probe(a, top);
                if a > R_MAX {
                    return Err(degenerate());
                }
                continue;
            }
            let mut above = (probe(a, top), gtop);
            for i in (0..top).rev() {
                let r = probe(a, i);
                let gr = if i == 0 { g(a)? } else { g(r)? };
                if gr <= 1.0 {
                    lo = r;
                    glo = gr;
                    hi = above.0;
                    ghi = above.1;
                    break 'scan;
                }
                above = (r, gr);
            }
            return Err(degenerate());
        }
        while hi / lo > 1.0 + self.tol {
            let mid = (lo * hi).sqrt();
            let gm = g(mid)?;
            if gm <= 1.0 {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
                ghi = gm;
            }
        }
        let mut best = lo;
        if glo > 0.0 && ghi > glo {
            let t = -glo.ln() / (ghi.ln() - glo.ln());
            let star = (lo.ln() + t * (hi.ln() - lo.ln())).exp();
            for cand in [star, star * (1.0 - 1e-14)] {
                if cand > lo && cand < hi && g(cand)? <= 1.0 {
                    best = cand;
                    break;
                }
            }
        }
        Ok(1.0 / best)
    }

    fn boundary_samples(&self, half: f64, per_face: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = Vec::new();
        let ticks: Vec<f64> = (0..=per_face)
            .map(|i| -half + 2.0 * half * i as f64 / per_face as f64)
            .collect();
        for axis in 0..n {
            for sign in [-1.0, 1.0] {
                let mut idx = vec![0usize; n.saturating_sub(1)];
                loop {
                    let mut p = Vec::with_capacity(n);
                    let mut it = idx.iter();
                    for j in 0..n {
                        if j == axis {
                            p.push(sign * half);
                        } else {
                            p.push(ticks[*it.next().expect("index")]);
                        }
                    }
                    out.push(p);
                    let mut carry = 0;
                    while carry < idx.len() {
                        idx[carry] += 1;
                        if idx[carry] <= per_face {
                            break;
                        }
                        idx[carry] = 0;
                        carry += 1;
                    }
                    if carry == idx.len() {
                        break;
                    }
                }
            }
        }
        out
    }

    fn shell_exceeds(&self, half: f64, threshold: f64) -> Result<bool> {
        let pts = self.boundary_samples(half, 8);
        Ok(self.m_many(&pts)?.iter().all(|&m| m > threshold))
    }

    /// A box containing `E_λ`, or `Empty` / `Unbounded`.
    pub fn sublevel_box(&self, lambda: f64) -> Result<Sublevel> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda {lambda} must be positive")));
        }
        let thr = lambda.sqrt();
        if let Some(c) = self.potential.constant_value() {
            if c <= 0.0 {
                return Err(Error::DegeneratePotential(vec![0.0; self.dim()]));
            }
            let m = self.m(&vec![0.0; self.dim()])?;
            return Ok(if m > thr { Sublevel::Empty } else { Sublevel::Unbounded });
        }
        if !self.potential.is_coercive() {
            return Ok(Sublevel::Unbounded);
        }
        let mut outer = 1.0;
        let mut doublings = 0;
        while !self.shell_exceeds(outer, 2.0 * thr)? {
            outer *= 2.0;
            doublings += 1;
            if doublings > 40 {
                return Ok(Sublevel::Unbounded);
            }
        }
        let (mut lo, mut hi) = (0.0, outer);
        for _ in 0..6 {
            let mid = 0.5 * (lo + hi);
            if self.shell_exceeds(mid, thr)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Sublevel::Bounded {
            half_width: hi + outer / 64.0,
        })
    }

    fn cube_meets(&self, n: &[i64], side: f64, thr: f64) -> Result<bool> {
        let dim = n.len();
        let point = |offs: &[f64]| -> Vec<f64> {
            n.iter().zip(offs).map(|(&i, &o)| (i as f64 + o) * side).collect()
        };
        let mut pts = vec![point(&vec![0.5; dim])];
        for mask in 0..(1usize << dim) {
            let offs: Vec<f64> = (0..dim).map(|j| ((mask >> j) & 1) as f64).collect();
            pts.push(point(&offs));
        }
        let mut min_m = f64::INFINITY;
        for p in &pts {
            min_m = min_m.min(self.m(p)?);
        }
        if min_m <= thr {
            return Ok(true);
        }
        if min_m > 1.05 * thr {
            return Ok(false);
        }
        let mut refined = Vec::new();
        let half_ticks = [0.0, 0.5, 1.0];
        let quarter_ticks = [0.25, 0.75];
        for ticks in [&half_ticks[..], &quarter_ticks[..]] {
            let total = ticks.len().pow(dim as u32);
            for c in 0..total {
                let mut rem = c;
                let offs: Vec<f64> = (0..dim)
                    .map(|_| {
                        let t = ticks[rem % ticks.len()];
                        rem /= ticks.len();
                        t
                    })
                    .collect();
                refined.push(point(&offs));
            }
        }
        for p in &refined {
            if self.m(p)? <= thr {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Cubes `[0, side]^N + side·n` meeting `E_λ`.
    pub fn cubes_meeting(&self, lambda: f64, side: f64) -> Result<GridCount> {
        let empty = GridCount {
            lambda,
            side,
            count: 0,
            candidates: 0,
            cubes: Vec::new(),
        };
        let half = match self.sublevel_box(lambda)? {
            Sublevel::Empty => return Ok(empty),
            Sublevel::Unbounded => return Err(Error::NonCoercive),
            Sublevel::Bounded { half_width } => half_width,
        };
        let nmin = (-half / side).floor() as i64;
        let nmax = (half / side).ceil() as i64 - 1;
        let dim = self.dim();
        let per_axis = (nmax - nmin + 1) as usize;
        let total = per_axis.pow(dim as u32);
        let candidates: Vec<Vec<i64>> = (0..total)
            .map(|c| {
                let mut rem = c;
                let mut v = vec![0i64; dim];
                for slot in v.iter_mut().rev() {
                    *slot = nmin + (rem % per_axis) as i64;
                    rem /= per_axis;
                }
                v
            })
            .collect();
        let thr = lambda.sqrt();
        let flags = self.exec.try_map(&candidates, |n| self.cube_meets(n, side, thr))?;
        let cubes: Vec<Vec<i64>> = candidates
            .iter()
            .zip(&flags)
            .filter(|(_, &f)| f)
            .map(|(c, _)| c.clone())
            .collect();
        Ok(GridCount {
            lambda,
            side,
            count: cubes.len(),
            candidates: candidates.len(),
            cubes,
        })
    }

    /// `M(λ)`: cubes of side `λ^{-1/2}` meeting `E_λ`.
    pub fn grid_count(&self, lambda: f64) -> Result<GridCount> {
        self.cubes_meeting(lambda, lambda.powf(-0.5))
    }

    /// Minimum of `m` over `[-half, half]^N`: a lattice scan followed by
    /// golden-section refinement along each axis around the best point.
    pub fn min_m(&self, half: f64, per_axis: usize) -> Result<(Vec<f64>, f64)> {
        let dim = self.dim();
        let n = per_axis.max(3) | 1;
        let total = n.pow(dim as u32);
        let pts: Vec<Vec<f64>> = (0..total)
            .map(|c| {
                let mut rem = c;
                (0..dim)
                    .map(|_| {
                        let i = rem % n;
                        rem /= n;
                        -half + 2.0 * half * i as f64 / (n - 1) as f64
                    })
                    .collect()
            })
            .collect();
        let ms = self.m_many(&pts)?;
        let (mut best, mut best_m) = (pts[0].clone(), ms[0]);
        for (p, &m) in pts.iter().zip(&ms) {
            if m < best_m {
                best = p.clone();
                best_m = m;
            }
        }
        let step = 2.0 * half / (n - 1) as f64;
        for axis in 0..dim {
            let (mut a, mut b) = (best[axis] - step, best[axis] + step);
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..30 {
                let c = b - phi * (b - a);
                let d = a + phi * (b - a);
                let mut pc = best.clone();
                pc[axis] = c;
                let mut pd = best.clone();
                pd[axis] = d;
                let (mc, md) = (self.m(&pc)?, self.m(&pd)?);
                if mc < best_m {
                    best_m = mc;
                    best = pc;
                }
                if md < best_m {
                    best_m = md;
                    best = pd;
                }
                if mc < md {
                    b = d;
                } else {
                    a = c;
                }
            }
        }
        Ok((best, best_m))
    }
}

/// Sampling of balls `B(x, r)` for empirical checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallSampling {
    pub center_range: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
}

impl Default for BallSampling {
    fn default() -> Self {
        BallSampling {
            center_range: 4.0,
            r_min: 0.05,
            r_max: 8.0,
            count: 1000,
        }
    }
}

fn sample_balls(dim: usize, s: &BallSampling, rng: &mut ChaCha8Rng) -> Vec<(Vec<f64>, f64)> {
    (0..s.count)
        .map(|_| {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-s.center_range..=s.center_range)).collect();
            let r = (rng.gen_range(s.r_min.ln()..=s.r_max.ln())).exp();
            (x, r)
        })
        .collect()
}

/// Empirical reverse-Hölder constant.
#[derive(Clone, Debug, PartialEq)]
pub struct RhReport {
    pub q: f64,
    pub c_rh: f64,
    pub c_rh_half: f64,
    pub samples: usize,
    pub worst_center: Vec<f64>,
    pub worst_radius: f64,
}

/// `max_B (avg_B V^q)^{1/q} / avg_B V` over sampled balls; the first half of
/// the sample is also evaluated separately and the two maxima must agree
/// within 5%.
pub fn rh_verify(
    potential: &Potential,
    measure: &WeightedMeasure,
    q: f64,
    sampling: &BallSampling,
    rng: &mut ChaCha8Rng,
    exec: Execution,
) -> Result<RhReport> {
    if !(q > 1.0f64.max(measure.system().homogeneous_dimension() / 2.0)) {
        return Err(Error::InvalidParameter(format!("q = {q} below the admissible range")));
    }
    let mut balls = sample_balls(measure.dim(), sampling, rng);
    let zero = vec![0.0; measure.dim()];
    for i in 0..8 {
        let r = sampling.r_min * (sampling.r_max / sampling.r_min).powf(i as f64 / 7.0);
        balls.insert(2 * i, (zero.clone(), r));
    }
    let ratios = exec.try_map(&balls, |(x, r)| -> Result<f64> {
        let [vq, v, w] = measure.integrate_ball_with(
            &|y: &[f64]| {
                let p = potential.eval(y);
                [p.powf(q), p, 1.0]
            },
            x,
            *r,
        )?;
        Ok(if v > 0.0 { (vq / w).powf(1.0 / q) / (v / w) } else { 1.0 })
    })?;
    let half = ratios.len() / 2;
    let argmax = (0..ratios.len())
        .max_by(|&a, &b| ratios[a].total_cmp(&ratios[b]).then(b.cmp(&a)))
        .expect("nonempty");
    let c_rh = ratios[argmax];
    let c_rh_half = ratios[..half].iter().cloned().fold(0.0, f64::max);
    if !c_rh.is_finite() || c_rh > 1.05 * c_rh_half {
        return Err(Error::NotReverseHolder);
    }
    Ok(RhReport {
        q,
        c_rh,
        c_rh_half,
        samples: ratios.len(),
        worst_center: balls[argmax].0.clone(),
        worst_radius: balls[argmax].1,
    })
}

/// Fitted constants of the growth estimates for `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub pairs: usize,
    /// Sup of `max(m(y)/m(x), m(x)/m(y))` over pairs with `|x-y| < 1/m(x)`.
    pub c_local: f64,
    pub kappa: f64,
    pub c_upper: f64,
    pub c_lower: f64,
    /// `max(c_local, c_upper, c_lower)` at the fitted `kappa`.
    pub c: f64,
}

/// One sampled pair: `m(x)`, `m(y)` and `u = m(x)|x-y|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthSample {
    pub mx: f64,
    pub my: f64,
    pub u: f64,
}

/// Samples pairs `y = x + (u/m(x))·θ` with `u` log-uniform in `[1e-2, 1e2]`.
pub fn sample_growth_pairs(
    aux: &AuxFunction,
    region: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<GrowthSample>> {
    let dim = aux.dim();
    let draws: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..count)
        .map(|_| {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-region..=region)).collect();
            let mut dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            dir.iter_mut().for_each(|v| *v /= norm);
            let u = (rng.gen_range((1e-2f64).ln()..=(1e2f64).ln())).exp();
            (x, dir, u)
        })
        .collect();
    aux.execution().try_map(&draws, |(x, dir, u)| {
        let mx = aux.m(x)?;
        let y: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + d * u / mx).collect();
        let my = aux.m(&y)?;
        Ok(GrowthSample { mx, my, u: *u })
    })
}

/// Smallest `C` over `κ ∈ [0, 4]` (step 0.01) such that all three growth
/// estimates hold on the samples.
pub fn fit_growth(samples: &[GrowthSample]) -> GrowthReport {
    let c_local = samples
        .iter()
        .filter(|s| s.u < 1.0)
        .map(|s| (s.my / s.mx).max(s.mx / s.my))
        .fold(1.0, f64::max);
    let eval = |kappa: f64| {
        let mut up: f64 = 1.0;
        let mut low: f64 = 1.0;
        for s in samples {
            up = up.max(s.my / (s.mx * (1.0 + s.u).powf(kappa)));
            low = low.max(s.mx * (1.0 + s.u).powf(-kappa / (1.0 + kappa)) / s.my);
        }
        (up, low)
    };
    let mut best = (f64::INFINITY, 0.0, 1.0, 1.0);
    for i in 0..=400 {
        let kappa = i as f64 * 0.01;
        let (up, low) = eval(kappa);
        let c = c_local.max(up).max(low);
        if c < best.0 * (1.0 - 1e-12) {
            best = (c, kappa, up, low);
        }
    }
    GrowthReport {
        pairs: samples.len(),
        c_local,
        kappa: best.1,
        c_upper: best.2,
        c_lower: best.3,
        c: best.0,
    }
}

/// Fitted `(γ̂, Ĉ)` with `g(x,r₁) ≤ Ĉ (r₁/r₂)^γ̂ g(x,r₂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotonicityFit {
    pub gamma: f64,
    pub c: f64,
    pub pairs: usize,
}

/// Samples `(x, r₁ < r₂)` and fits the exponent from pairs with `r₂/r₁ ≥ 4`.
pub fn fit_near_monotonicity(
    aux: &AuxFunction,
    sampling: &BallSampling,
    rng: &mut ChaCha8Rng,
) -> Result<MonotonicityFit> {
    let dim = aux.dim();
    let draws: Vec<(Vec<f64>, f64, f64)> = sample_balls(dim, sampling, rng)
        .into_iter()
        .map(|(x, r)| {
            let ratio = (rng.gen_range(0.0..=(100f64).ln())).exp();
            (x, r, r * ratio)
        })
        .collect();
    let vals = aux.execution().try_map(&draws, |(x, r1, r2)| -> Result<(f64, f64)> {
        let g1 = aux.landscape_g(x, *r1)?;
        let g2 = aux.landscape_g(x, *r2)?;
        Ok((r1 / r2, g1 / g2))
    })?;
    let gamma = vals
        .iter()
        .filter(|(t, rho)| *t <= 0.25 && *rho > 0.0)
        .map(|(t, rho)| rho.ln() / t.ln())
        .fold(f64::INFINITY, f64::min);
    let gamma = if gamma.is_finite() { gamma.max(0.0) } else { 0.0 };
    let c = vals
        .iter()
        .filter(|(_, rho)| *rho > 0.0)
        .map(|(t, rho)| rho * t.powf(-gamma))
        .fold(1.0, f64::max);
    Ok(MonotonicityFit {
        gamma,
        c,
        pairs: vals.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::QuadratureSpec;
    use crate::potential::PotentialSpec;
    use crate::root_system::DunklSystem;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn aux(k: f64, spec: PotentialSpec) -> AuxFunction {
        let s = Arc::new(DunklSystem::rank1(k).unwrap());
        let p = Arc::new(Potential::with_default_q(spec, &s).unwrap());
        let m = Arc::new(WeightedMeasure::new(s, QuadratureSpec::default()).unwrap());
        AuxFunction::new(p, m).unwrap()
    }

    fn x2() -> PotentialSpec {
        PotentialSpec::Power { coefficient: 1.0, exponent: 2.0 }
    }

    #[test]
    fn g_examples() {
        let a = aux(0.5, PotentialSpec::Constant { value: 4.0 });
        assert_relative_eq!(a.landscape_g(&[1.3], 0.7).unwrap(), 4.0 * 0.49, max_relative = 1e-12);
        for k in [0.0, 1.0, 2.0] {
            let a = aux(k, x2());
            let r: f64 = 1.3;
            let expect = r.powi(4) * (2.0 * k + 1.0) / (2.0 * k + 3.0);
            assert_relative_eq!(a.landscape_g(&[0.0], r).unwrap(), expect, max_relative = 1e-9);
        }
    }

    #[test]
    fn m_examples() {
        let a = aux(1.0, PotentialSpec::Constant { value: 4.0 });
        let m = a.m(&[0.7]).unwrap();
        assert!(m >= 2.0 && m <= 2.0 * (1.0 + 1e-12), "{m}");
        let a = aux(0.0, x2());
        assert_relative_eq!(a.m(&[0.0]).unwrap(), 3f64.powf(-0.25), max_relative = 1e-3);
        let a = aux(1.0, x2());
        assert_relative_eq!(a.m(&[0.0]).unwrap(), 0.6f64.powf(0.25), max_relative = 1e-3);
        assert_eq!(a.memo_len(), 1);
    }

    #[test]
    fn sublevel_examples() {
        let c = aux(0.0, PotentialSpec::Constant { value: 4.0 });
        assert_eq!(c.sublevel_box(1.0).unwrap(), Sublevel::Empty);
        assert_eq!(c.sublevel_box(9.0).unwrap(), Sublevel::Unbounded);
        assert_eq!(c.grid_count(1.0).unwrap().count, 0);
        assert_eq!(c.grid_count(9.0).unwrap_err(), Error::NonCoercive);
        let a = aux(0.0, x2());
        match a.sublevel_box(100.0).unwrap() {
            Sublevel::Bounded { half_width } => assert!((5.0..=20.0).contains(&half_width), "{half_width}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grid_count_scales_linearly() {
        let a = aux(0.0, x2());
        let ratios: Vec<f64> = [25.0, 100.0, 400.0]
            .iter()
            .map(|&l| a.grid_count(l).unwrap().count as f64 / l)
            .collect();
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo <= 2.0, "{ratios:?}");
    }

    #[test]
    fn growth_fit_for_constant_is_trivial() {
        let a = aux(0.0, PotentialSpec::Constant { value: 2.0 });
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_growth_pairs(&a, 4.0, 50, &mut rng).unwrap();
        let r = fit_growth(&s);
        assert!(r.c <= 1.0 + 1e-9 && r.kappa == 0.0, "{r:?}");
    }
}
