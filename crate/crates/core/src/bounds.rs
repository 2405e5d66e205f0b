//! Empirical checks of the size and regularity bounds for translated radial
//! bumps, the Gaussian upper bound for the heat kernel, and the mollifier
//! estimate `|∫E(-iξ,x)Ψ dw - 1| ≲ |ξ|`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::quadrature::cached_rule;
use crate::transform::{heat_kernel, Rank1Analysis};

/// Even profile `φ̃(s) = exp(a - a/(1 - s²))` on `(-1, 1)`, zero outside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub sharpness: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        BumpProfile { sharpness: 4.0 }
    }
}

impl BumpProfile {
    pub fn value(&self, s: f64) -> f64 {
        let u = 1.0 - s * s;
        if u <= 0.0 {
            0.0
        } else {
            (self.sharpness - self.sharpness / u).exp()
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let u = 1.0 - s * s;
        if u <= 0.0 {
            0.0
        } else {
            -2.0 * self.sharpness * s / (u * u) * self.value(s)
        }
    }

    /// `max |φ̃'|`, located by golden-section search on `(0, 1)`.
    pub fn max_slope(&self) -> f64 {
        let f = |s: f64| self.derivative(s).abs();
        let (mut a, mut b) = (0.0, 1.0);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        f(0.5 * (a + b))
    }
}

const GL_ORDER: usize = 20;

/// `∫ e(ξs) φ̃(|s|) dw(s)` by composite Gauss–Legendre on `[0, 1]`, with
/// `e` the even part of `E(·, i)`.
pub fn bump_kernel_integral(an: &Rank1Analysis, profile: &BumpProfile, xi: f64) -> Result<f64> {
    let panels = 16 + (xi.abs() / 2.0).ceil() as usize;
    let width = 1.0 / panels as f64;
    // the first panel carries s^{2k} in a Gauss–Jacobi rule
    let k = an.k();
    let first = cached_rule(GL_ORDER, 0.0, 2.0 * k);
    let mut acc = 0.0;
    for (x, w) in first.nodes.iter().zip(&first.weights) {
        let s = 0.5 * width * (x + 1.0);
        let (e, _) = an.kernel().imag_parts(xi * s)?;
        acc += w * e * profile.value(s) * 2f64.powf(k) * (0.5 * width).powf(2.0 * k);
    }
    let rule = cached_rule(GL_ORDER, 0.0, 0.0);
    for p in 1..panels {
        let a = p as f64 * width;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let s = a + 0.5 * width * (x + 1.0);
            let (e, _) = an.kernel().imag_parts(xi * s)?;
            acc += w * e * profile.value(s) * an.weight(s);
        }
    }
    Ok(acc * width)
}

/// `ℱφ(ξ) = c_k⁻¹ ∫ E(-iξ, x) φ(x) dw(x)` for `φ(x) = φ̃(|x|)`.
pub fn bump_transform(an: &Rank1Analysis, profile: &BumpProfile, xi: f64) -> Result<f64> {
    Ok(bump_kernel_integral(an, profile, xi)? / an.ck())
}

/// Evaluates `φ_1(x, y) = τ_x φ(-y)` for a fixed bump from a tabulated
/// transform, valid for `|x|, |y| ≤ extent`.
#[derive(Clone, Debug)]
pub struct RadialTranslator {
    an: Rank1Analysis,
    profile: BumpProfile,
    extent: f64,
    xi: Vec<f64>,
    coef: Vec<f64>,
    offset: f64,
}

/// Size of `ℱφ·w`, relative to its peak, at which the ξ-sum is truncated.
const TRANSFORM_FLOOR: f64 = 1e-12;
const CHUNK: usize = 64;

impl RadialTranslator {
    pub fn new(an: &Rank1Analysis, profile: BumpProfile, extent: f64) -> Result<Self> {
        if !(extent > 0.0) || !(profile.sharpness > 0.0) {
            return Err(Error::InvalidParameter("translator needs extent > 0 and sharpness > 0".into()));
        }
        // images of the ξ-grid fall beyond the band |x| + |y| + 1
        let dxi = 2.0 * std::f64::consts::PI / (2.0 * extent + 9.0);
        let mut xi = Vec::new();
        let mut coef = Vec::new();
        let mut peak: f64 = 0.0;
        loop {
            let start = xi.len();
            let nodes: Vec<f64> = (start..start + CHUNK).map(|j| (j as f64 + 0.5) * dxi).collect();
            if nodes[CHUNK - 1] * extent > 0.999 * an_table_extent(an) {
                return Err(Error::TruncationDominated(peak));
            }
            let vals = an
                .execution()
                .try_map(&nodes, |&s| bump_transform(an, &profile, s).map(|f| f * an.weight(s)))?;
            let chunk_max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            peak = peak.max(chunk_max);
            for (s, v) in nodes.iter().zip(vals) {
                xi.push(*s);
                coef.push(2.0 * v * dxi / an.ck());
            }
            if chunk_max < TRANSFORM_FLOOR * peak {
                break;
            }
        }
        // origin term of the ξ-sum, with ℱφ(0) computed directly
        let offset = -bump_transform(an, &profile, 0.0)? * an.origin_correction(dxi) / an.ck();
        Ok(RadialTranslator {
            an: an.clone(),
            profile,
            extent,
            xi,
            coef,
            offset,
        })
    }

    pub fn analysis(&self) -> &Rank1Analysis {
        &self.an
    }

    pub fn profile(&self) -> &BumpProfile {
        &self.profile
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Number of ξ-nodes in the tabulated transform.
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    fn check(&self, v: f64) -> Result<()> {
        if v.abs() > self.extent {
            return Err(Error::InvalidParameter(format!(
                "translation argument {v} beyond extent {}",
                self.extent
            )));
        }
        Ok(())
    }

    /// `(e(xξ_j), p(xξ_j))` for every node.
    pub fn kernel_row(&self, x: f64) -> Result<Vec<(f64, f64)>> {
        self.check(x)?;
        self.xi.iter().map(|s| self.an.kernel().imag_parts(s * x)).collect()
    }

    /// `Σ_j c_j (e_x e_y + p_x p_y)` for precomputed rows.
    pub fn combine(&self, rx: &[(f64, f64)], ry: &[(f64, f64)]) -> f64 {
        self.offset
            + self
                .coef
                .iter()
                .zip(rx.iter().zip(ry))
                .map(|(c, ((ex, px), (ey, py)))| c * (ex * ey + px * py))
                .sum::<f64>()
    }

    /// `φ_1(x, y) = τ_x φ(-y)`.
    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.combine(&self.kernel_row(x)?, &self.kernel_row(y)?))
    }

    /// `φ_t(x, y) = t^{-𝐍} φ_1(x/t, y/t)`.
    pub fn value_at_scale(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        Ok(t.powf(-self.an.homogeneous_dimension()) * self.value(x / t, y / t)?)
    }
}

fn an_table_extent(an: &Rank1Analysis) -> f64 {
    an.kernel().table_extent()
}

/// Rank-one orbit distance `||x| - |y||`.
#[inline]
pub fn orbit_distance(x: f64, y: f64) -> f64 {
    (x.abs() - y.abs()).abs()
}

/// Random triples `(t, x, y, z)` with `|y - z| < t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TripleSampling {
    pub scales: Vec<f64>,
    pub count: usize,
    /// `x/t` is uniform on `[-x_range, x_range]`.
    pub x_range: f64,
    /// `y/t = ±x/t + u` with `u` uniform on `[-offset_range, offset_range]`.
    pub offset_range: f64,
    /// `|y - z|/t = 10^v` with `v` uniform on `[min_log_gap, 0)`.
    pub min_log_gap: f64,
}

impl Default for TripleSampling {
    fn default() -> Self {
        TripleSampling {
            scales: vec![0.5, 1.0, 2.0],
            count: 10_000,
            x_range: 4.0,
            offset_range: 2.5,
            min_log_gap: -3.0,
        }
    }
}

impl TripleSampling {
    /// Largest `|·|/t` a sampled triple can reach.
    pub fn extent(&self) -> f64 {
        self.x_range + self.offset_range + 1.0
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<[f64; 4]> {
        (0..self.count)
            .map(|i| {
                let t = self.scales[i % self.scales.len()];
                let x = rng.gen_range(-self.x_range..=self.x_range);
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let y = sign * x + rng.gen_range(-self.offset_range..=self.offset_range);
                let gap = 10f64.powf(rng.gen_range(self.min_log_gap..0.0));
                let z = y + if rng.gen_bool(0.5) { gap } else { -gap };
                [t, x * t, y * t, z * t]
            })
            .collect()
    }
}

/// One evaluated triple.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// `|φ_t(x,y) - φ_t(x,z)|·t·max(w(B(x,t)), w(B(y,t)))/|y - z|`.
    pub ratio: f64,
    /// `d(x, y) ≤ 2t`.
    pub near: bool,
    /// `max(|φ_t(x,y)|, |φ_t(x,z)|)`.
    pub size: f64,
}

/// Outcome of the regularity check on a batch of triples.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderReport {
    pub samples: Vec<HolderSample>,
    /// Supremum of the ratio over all near triples.
    pub sup_ratio: f64,
    /// The same supremum over the first half of the batch.
    pub sup_ratio_half: f64,
    /// `(sup_ratio - sup_ratio_half)/sup_ratio_half`.
    pub drift: f64,
    /// Largest `|φ_t|` over triples with `d(x, y) > 2t`.
    pub far_max: f64,
}

impl HolderReport {
    pub fn vanishes(&self, tol: f64) -> bool {
        self.far_max < tol
    }

    /// `(t, x, y, z, ratio)` rows.
    pub fn rows(&self) -> Vec<[f64; 5]> {
        self.samples.iter().map(|s| [s.t, s.x, s.y, s.z, s.ratio]).collect()
    }
}

/// Evaluates the normalized difference quotient of `φ_t(x, ·)` on each
/// triple.
pub fn holder_bound_check(tr: &RadialTranslator, triples: &[[f64; 4]], exec: Execution) -> Result<HolderReport> {
    if triples.is_empty() {
        return Err(Error::InvalidParameter("no triples to check".into()));
    }
    let an = tr.analysis();
    let dim = an.homogeneous_dimension();
    let samples = exec.try_map(triples, |&[t, x, y, z]| -> Result<HolderSample> {
        if !((y - z).abs() < t) {
            return Err(Error::InvalidParameter(format!("triple violates |y - z| < t: {y} {z} {t}")));
        }
        let rx = tr.kernel_row(x / t)?;
        let scale = t.powf(-dim);
        let fy = scale * tr.combine(&rx, &tr.kernel_row(y / t)?);
        let fz = scale * tr.combine(&rx, &tr.kernel_row(z / t)?);
        let vol = an.ball_volume(x, t).max(an.ball_volume(y, t));
        let ratio = if y == z { 0.0 } else { (fy - fz).abs() * t * vol / (y - z).abs() };
        Ok(HolderSample {
            t,
            x,
            y,
            z,
            ratio,
            near: orbit_distance(x, y) <= 2.0 * t,
            size: fy.abs().max(fz.abs()),
        })
    })?;
    let sup = |s: &[HolderSample]| s.iter().filter(|s| s.near).map(|s| s.ratio).fold(0.0, f64::max);
    let sup_ratio = sup(&samples);
    let sup_ratio_half = sup(&samples[..samples.len().div_ceil(2)]);
    let far_max = samples.iter().filter(|s| !s.near).map(|s| s.size).fold(0.0, f64::max);
    Ok(HolderReport {
        drift: if sup_ratio_half > 0.0 { (sup_ratio - sup_ratio_half) / sup_ratio_half } else { 0.0 },
        sup_ratio,
        sup_ratio_half,
        far_max,
        samples,
    })
}

/// Size bound for the translated bump itself.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelBoundReport {
    /// Supremum of `|φ_t(x,y)|·max(w(B(x,t)), w(B(y,t)))·(1 + |x-y|/t)²`.
    pub sup: f64,
    pub sup_half: f64,
    /// Largest `|φ_t(x, y)|` with `d(x, y) > t`.
    pub outside_max: f64,
}

pub fn mollifier_kernel_check(tr: &RadialTranslator, triples: &[[f64; 4]], exec: Execution) -> Result<KernelBoundReport> {
    let an = tr.analysis();
    let vals = exec.try_map(triples, |&[t, x, y, _]| -> Result<(f64, bool)> {
        let v = tr.value_at_scale(t, x, y)?;
        let vol = an.ball_volume(x, t).max(an.ball_volume(y, t));
        let q = 1.0 + (x - y).abs() / t;
        let inside = orbit_distance(x, y) <= t;
        Ok((if inside { v.abs() * vol * q * q } else { v.abs() }, inside))
    })?;
    let sup = |s: &[(f64, bool)]| s.iter().filter(|v| v.1).map(|v| v.0).fold(0.0, f64::max);
    Ok(KernelBoundReport {
        sup: sup(&vals),
        sup_half: sup(&vals[..vals.len().div_ceil(2)]),
        outside_max: vals.iter().filter(|v| !v.1).map(|v| v.0).fold(0.0, f64::max),
    })
}

/// `(x, y, t)` lattice for the heat-kernel upper bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeatLattice {
    pub x_max: f64,
    pub points_per_axis: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    /// Points with `d(x,y)²/t` above this are skipped.
    pub window: f64,
}

impl Default for HeatLattice {
    fn default() -> Self {
        HeatLattice {
            x_max: 5.0,
            points_per_axis: 10,
            t_min: 0.1,
            t_max: 10.0,
            t_count: 10,
            window: 60.0,
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

impl HeatLattice {
    /// Points of the lattice, or of its refinement that inserts midpoints
    /// along every axis.
    pub fn points(&self, refined: bool) -> Vec<[f64; 3]> {
        let (n, m) = if refined {
            (2 * self.points_per_axis - 1, 2 * self.t_count - 1)
        } else {
            (self.points_per_axis, self.t_count)
        };
        let xs = linspace(-self.x_max, self.x_max, n);
        let ts: Vec<f64> = linspace(self.t_min.ln(), self.t_max.ln(), m).into_iter().map(f64::exp).collect();
        let mut out = Vec::with_capacity(n * n * m);
        for &t in &ts {
            for &x in &xs {
                for &y in &xs {
                    out.push([x, y, t]);
                }
            }
        }
        out
    }
}

/// Fitted Gaussian upper bound for `h_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatBoundReport {
    /// Largest grid value of `ĉ` for which the bound is stable.
    pub c_hat: f64,
    /// Supremum over the lattice at `ĉ`.
    pub sup_coarse: f64,
    /// Supremum over the refined lattice at `ĉ`.
    pub sup_fine: f64,
    pub drift: f64,
    /// Smallest value of `h_t` seen inside the window.
    pub min_value: f64,
    /// Largest symmetry defect `|h_t(x,y) - h_t(y,x)|` relative to `h_t(x,y)`.
    pub symmetry_defect: f64,
    pub coarse_points: usize,
    pub fine_points: usize,
    /// `(t, x, y, ratio)` rows of the coarse lattice at `ĉ`.
    pub rows: Vec<[f64; 4]>,
}

struct HeatPoint {
    t: f64,
    x: f64,
    y: f64,
    base: f64,
    d2t: f64,
    value: f64,
    defect: f64,
}

fn heat_points(an: &Rank1Analysis, pts: &[[f64; 3]], window: f64, exec: Execution) -> Result<Vec<HeatPoint>> {
    let inside: Vec<[f64; 3]> = pts
        .iter()
        .copied()
        .filter(|&[x, y, t]| orbit_distance(x, y).powi(2) / t <= window)
        .collect();
    exec.try_map(&inside, |&[x, y, t]| -> Result<HeatPoint> {
        let v = heat_kernel(an, t, x, y)?;
        let w = heat_kernel(an, t, y, x)?;
        let st = t.sqrt();
        let q = 1.0 + (x - y).abs() / st;
        let vol = an.ball_volume(x, st).max(an.ball_volume(y, st));
        Ok(HeatPoint {
            t,
            x,
            y,
            base: v * q * q * vol,
            d2t: orbit_distance(x, y).powi(2) / t,
            value: v,
            defect: (v - w).abs() / v.abs(),
        })
    })
}

/// Scans `ĉ` over `c_grid` (ascending) and keeps the largest value whose
/// supremum moves by at most `max_drift` under lattice refinement.
pub fn heat_bound_fit(
    an: &Rank1Analysis,
    lattice: &HeatLattice,
    c_grid: &[f64],
    max_drift: f64,
    exec: Execution,
) -> Result<HeatBoundReport> {
    if c_grid.is_empty() {
        return Err(Error::InvalidParameter("empty ĉ grid".into()));
    }
    let coarse = heat_points(an, &lattice.points(false), lattice.window, exec)?;
    let fine = heat_points(an, &lattice.points(true), lattice.window, exec)?;
    let sup = |pts: &[HeatPoint], c: f64| pts.iter().map(|p| p.base * (c * p.d2t).exp()).fold(0.0, f64::max);
    let drift_at = |c: f64| {
        let (a, b) = (sup(&coarse, c), sup(&fine, c));
        (a, b, (b - a).abs() / a)
    };
    let mut best = c_grid[0];
    for &c in c_grid {
        let (_, _, d) = drift_at(c);
        if d <= max_drift && d.is_finite() {
            best = c;
        }
    }
    let (sup_coarse, sup_fine, drift) = drift_at(best);
    let all = coarse.iter().chain(&fine);
    Ok(HeatBoundReport {
        c_hat: best,
        sup_coarse,
        sup_fine,
        drift,
        min_value: all.clone().map(|p| p.value).fold(f64::INFINITY, f64::min),
        symmetry_defect: all.map(|p| p.defect).fold(0.0, f64::max),
        coarse_points: coarse.len(),
        fine_points: fine.len(),
        rows: coarse
            .iter()
            .map(|p| [p.t, p.x, p.y, p.base * (best * p.d2t).exp()])
            .collect(),
    })
}

/// `∫ h_t(x, y) dw(y)` by the corrected midpoint rule on `|y| ≤ |x| + √(160t) + 1`.
pub fn heat_mass(an: &Rank1Analysis, t: f64, x: f64, exec: Execution) -> Result<f64> {
    let reach = x.abs() + (160.0 * t).sqrt() + 1.0;
    let h = (t.sqrt() / 8.0).min(0.05);
    let n = (reach / h).ceil() as usize;
    let values = exec.try_map_range(2 * n, |i| {
        let y = (i as f64 - n as f64 + 0.5) * h;
        heat_kernel(an, t, x, y).map(|v| Complex64::new(v, 0.0))
    })?;
    Ok(an.midpoint_integral(h, &values).re)
}

/// `|∫E(-iξ,x)Ψ(x) dw(x) - 1|` for `Ψ = φ/∫φ dw`.
pub fn mollifier_deviation(an: &Rank1Analysis, profile: &BumpProfile, xi: f64) -> Result<f64> {
    let mass = bump_kernel_integral(an, profile, 0.0)?;
    Ok((bump_kernel_integral(an, profile, xi)? / mass - 1.0).abs())
}

/// Sweep of the mollifier deviation with its fitted linear constant.
#[derive(Clone, Debug, PartialEq)]
pub struct MollifierReport {
    /// `(ξ, deviation)` pairs.
    pub samples: Vec<(f64, f64)>,
    /// `max deviation/ξ` over `0 < ξ ≤ 1`.
    pub c_hat: f64,
    pub max_deviation: f64,
}

pub fn mollifier_sweep(an: &Rank1Analysis, profile: &BumpProfile, xis: &[f64], exec: Execution) -> Result<MollifierReport> {
    let samples = exec.try_map(xis, |&xi| mollifier_deviation(an, profile, xi).map(|d| (xi, d)))?;
    Ok(MollifierReport {
        c_hat: samples
            .iter()
            .filter(|(x, _)| *x > 0.0 && *x <= 1.0)
            .map(|(x, d)| d / x)
            .fold(0.0, f64::max),
        max_deviation: samples.iter().map(|s| s.1).fold(0.0, f64::max),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_slope() {
        let p = BumpProfile { sharpness: 1.0 };
        let h = 1e-6;
        let s = 0.4;
        let fd = (p.value(s + h) - p.value(s - h)) / (2.0 * h);
        assert!((fd - p.derivative(s)).abs() < 1e-8);
        let grid = (1..100_000).map(|i| p.derivative(i as f64 * 1e-5).abs()).fold(0.0, f64::max);
        assert!((p.max_slope() - grid).abs() < 1e-8);
        assert_eq!(p.value(1.0), 0.0);
        assert_eq!(p.value(0.0), 1.0);
    }

    #[test]
    fn classical_translation_is_a_shift() {
        let an = Rank1Analysis::new(0.0).unwrap();
        let p = BumpProfile::default();
        let tr = RadialTranslator::new(&an, p, 4.0).unwrap();
        for (x, y) in [(0.0, 0.3), (1.0, 1.5), (-2.0, -2.7), (3.0, 2.5), (1.0, -1.0)] {
            let v = tr.value(x, y).unwrap();
            assert!((v - p.value(x - y)).abs() < 1e-10, "{x} {y}: {v}");
        }
    }
}
