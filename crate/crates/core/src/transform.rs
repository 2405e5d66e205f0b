//! Rank-one Dunkl transform, translations of radial functions, convolution
//! and the heat kernel, all computed on the transform side.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kernel::{log_kernel_real, KernelEvaluator};
use crate::measure::{QuadratureSpec, WeightedMeasure};
use crate::quadrature::midpoint_origin_coefficient;
use crate::root_system::DunklSystem;

/// Rank-one setting: multiplicity, `c_k` and a shared kernel evaluator.
#[derive(Debug, Clone)]
pub struct Rank1Analysis {
    k: f64,
    ck: f64,
    kernel: Arc<KernelEvaluator>,
    exec: Execution,
}

impl Rank1Analysis {
    pub fn new(k: f64) -> Result<Self> {
        let system = Arc::new(DunklSystem::rank1(k)?);
        let ck = WeightedMeasure::new(system, QuadratureSpec::default())?.ck_constant()?;
        Ok(Rank1Analysis {
            k,
            ck,
            kernel: Arc::new(KernelEvaluator::new(k)?),
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Replaces the kernel evaluator with one serving `|ξx| ≤ extent`.
    pub fn with_table_extent(mut self, extent: f64) -> Result<Self> {
        self.kernel = Arc::new(KernelEvaluator::new(self.k)?.with_table_extent(extent));
        Ok(self)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn ck(&self) -> f64 {
        self.ck
    }

    pub fn kernel(&self) -> &KernelEvaluator {
        &self.kernel
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    /// `2^k |x|^{2k}`.
    #[inline]
    pub fn weight(&self, x: f64) -> f64 {
        if self.k == 0.0 {
            1.0
        } else {
            (2.0 * x * x).powf(self.k)
        }
    }

    pub fn homogeneous_dimension(&self) -> f64 {
        1.0 + 2.0 * self.k
    }

    /// Correction removed from a symmetric midpoint sum `h Σ v(x_i) w(x_i)`
    /// whose integrand has even part `v_e(0)` at the origin.
    pub fn origin_correction(&self, h: f64) -> f64 {
        let beta = 2.0 * self.k;
        2.0 * 2f64.powf(self.k) * midpoint_origin_coefficient(beta) * h.powf(beta + 1.0)
    }

    /// `∫ v dw` from samples on a symmetric midpoint node set.
    pub fn midpoint_integral(&self, h: f64, values: &[Complex64]) -> Complex64 {
        let n = values.len() / 2;
        let sum: Complex64 = values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.weight((i as f64 - n as f64 + 0.5) * h))
            .sum();
        sum * h - origin_value(values) * self.origin_correction(h)
    }

    /// `w(B(x, r))` in closed form: `2^k ∫ |y|^{2k}` over `[x-r, x+r]`.
    pub fn ball_volume(&self, x: f64, r: f64) -> f64 {
        let p = 2.0 * self.k + 1.0;
        let prim = |y: f64| y.signum() * y.abs().powf(p) / p;
        2f64.powf(self.k) * (prim(x + r) - prim(x - r))
    }
}

/// Even part at 0 of values on a symmetric midpoint node set, extrapolated
/// in `x²` from the four innermost node pairs.
pub fn origin_value(values: &[Complex64]) -> Complex64 {
    let n = values.len() / 2;
    let m = n.min(4);
    if m == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let u: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5).powi(2)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..m {
        let ve = 0.5 * (values[n + i] + values[n - 1 - i]);
        let l: f64 = (0..m).filter(|&j| j != i).map(|j| u[j] / (u[j] - u[i])).product();
        acc += ve * l;
    }
    acc
}

/// Declared symmetry of a sampled function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// Values on the symmetric node set `{(i - n + 1/2) h : i = 0..2n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction1D {
    pub h: f64,
    pub half_count: usize,
    pub values: Vec<Complex64>,
    pub parity: Parity,
}

impl SampledFunction1D {
    /// Samples `f`; even and odd functions are evaluated on the positive
    /// nodes only and mirrored, so their symmetry is exact.
    pub fn from_fn(h: f64, half_width: f64, parity: Parity, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        if !(h > 0.0) || !(half_width > h) {
            return Err(Error::InvalidParameter("node set needs 0 < h < half_width".into()));
        }
        let n = (half_width / h).round() as usize;
        let mut values = vec![Complex64::new(0.0, 0.0); 2 * n];
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            let v = f(x);
            values[n + i] = v;
            values[n - 1 - i] = match parity {
                Parity::Even => v,
                Parity::Odd => -v,
                Parity::None => f(-x),
            };
        }
        Ok(SampledFunction1D {
            h,
            half_count: n,
            values,
            parity,
        })
    }

    pub fn from_real(h: f64, half_width: f64, parity: Parity, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(h, half_width, parity, |x| Complex64::new(f(x), 0.0))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, i: usize) -> f64 {
        (i as f64 - self.half_count as f64 + 0.5) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part relative to the largest modulus.
    pub fn imag_residue(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / m
    }

    /// `‖f‖_{L²(dw)}` by the midpoint rule.
    pub fn l2_norm(&self, an: &Rank1Analysis) -> f64 {
        let sq: Vec<Complex64> = self.values.iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
        an.midpoint_integral(self.h, &sq).re.max(0.0).sqrt()
    }

    /// Ratio of the largest modulus on the four outermost nodes of each side
    /// to the global maximum.
    pub fn boundary_ratio(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        let n = self.len();
        let edge = 4.min(n / 2);
        (0..edge)
            .chain(n - edge..n)
            .map(|i| self.values[i].norm())
            .fold(0.0, f64::max)
            / m
    }

    /// `(x, re, im)` rows for export.
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        (0..self.len())
            .map(|i| (self.node(i), self.values[i].re, self.values[i].im))
            .collect()
    }
}

const DECAY_TOL: f64 = 1e-10;

fn check_decay(f: &SampledFunction1D) -> Result<()> {
    let r = f.boundary_ratio();
    if r > DECAY_TOL {
        return Err(Error::TruncationDominated(r));
    }
    Ok(())
}

fn kernel_sum(an: &Rank1Analysis, f: &SampledFunction1D, sign: f64) -> Result<SampledFunction1D> {
    check_decay(f)?;
    let nodes = f.nodes();
    let wf: Vec<Complex64> = nodes
        .iter()
        .zip(&f.values)
        .map(|(x, v)| v * (an.weight(*x) * f.h / an.ck))
        .collect();
    // E(∓iξ, 0) = 1, so the origin term is the same for every ξ
    let shift = origin_value(&f.values) * (an.origin_correction(f.h) / an.ck);
    let values = an.exec.try_map(&nodes, |&xi| -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, v) in nodes.iter().zip(&wf) {
            let (e, p) = an.kernel.imag_parts(xi * x)?;
            acc += Complex64::new(e, sign * p) * v;
        }
        Ok(acc - shift)
    })?;
    Ok(SampledFunction1D {
        values,
        ..f.clone()
    })
}

/// `ℱf(ξ) = c_k⁻¹ ∫ E(-iξ, x) f(x) dw(x)` on the same node set.
pub fn dunkl_transform(an: &Rank1Analysis, f: &SampledFunction1D) -> Result<SampledFunction1D> {
    kernel_sum(an, f, -1.0)
}

/// `ℱ⁻¹g(x) = c_k⁻¹ ∫ E(iξ, x) g(ξ) dw(ξ)`.
pub fn inverse_transform(an: &Rank1Analysis, g: &SampledFunction1D) -> Result<SampledFunction1D> {
    kernel_sum(an, g, 1.0)
}

/// `ℱf` on an auxiliary midpoint ξ-grid `{(j + 1/2)δ}` up to the Nyquist
/// limit `π/h`, truncated once `|ℱf|·w` drops below `1e-13` of its peak.
/// Returns `(ξ_j, ℱf(ξ_j))` for even `f`.
fn spectral_samples(an: &Rank1Analysis, f: &SampledFunction1D, dxi: f64) -> Result<Vec<(f64, f64)>> {
    check_decay(f)?;
    let xs = f.nodes();
    let n = f.half_count;
    let wf: Vec<f64> = (n..f.len())
        .map(|i| 2.0 * f.values[i].re * an.weight(xs[i]) * f.h / an.ck)
        .collect();
    let pos = &xs[n..];
    let shift = origin_value(&f.values).re * an.origin_correction(f.h) / an.ck;
    let nyquist = PI / f.h;
    let mut out = Vec::new();
    let mut peak: f64 = 0.0;
    let chunk = 64;
    loop {
        let start = out.len();
        let nodes: Vec<f64> = (start..start + chunk)
            .map(|j| (j as f64 + 0.5) * dxi)
            .take_while(|&s| s <= nyquist)
            .collect();
        if nodes.is_empty() {
            break;
        }
        let vals = an.exec.try_map(&nodes, |&xi| -> Result<f64> {
            let mut acc = 0.0;
            for (x, v) in pos.iter().zip(&wf) {
                acc += an.kernel.imag_parts(xi * x)?.0 * v;
            }
            Ok(acc - shift)
        })?;
        let cmax = nodes.iter().zip(&vals).map(|(s, v)| (v * an.weight(*s)).abs()).fold(0.0, f64::max);
        peak = peak.max(cmax);
        out.extend(nodes.into_iter().zip(vals));
        if cmax < 1e-13 * peak {
            break;
        }
    }
    Ok(out)
}

/// `y ↦ τ_x f(-y) = c_k⁻¹ ∫ E(iξ, x) E(-iξ, y) ℱf(ξ) dw(ξ)` for even `f`,
/// on the node set of `f`. The ξ-integral runs over a midpoint grid fine
/// enough that its aliased images lie beyond `|x| + |y| + supp f`.
pub fn translate_radial(an: &Rank1Analysis, f: &SampledFunction1D, x: f64) -> Result<SampledFunction1D> {
    if f.parity != Parity::Even {
        return Err(Error::InvalidParameter("translation is implemented for even functions".into()));
    }
    let half = f.half_count as f64 * f.h;
    if x.abs() > half {
        return Err(Error::InvalidParameter(format!("translation by {x} leaves the node set")));
    }
    let dxi = 2.0 * PI / (3.0 * half + 1.0);
    let spec = spectral_samples(an, f, dxi)?;
    let ex: Vec<(f64, Complex64)> = spec
        .iter()
        .map(|&(xi, v)| -> Result<(f64, Complex64)> {
            let (e, p) = an.kernel.imag_parts(xi * x)?;
            Ok((xi, Complex64::new(e, p) * (v * an.weight(xi) * dxi / an.ck)))
        })
        .collect::<Result<_>>()?;
    // origin term of the ξ-integral: E(0, ·) = 1
    let head: Vec<Complex64> = spec.iter().take(4).map(|&(_, v)| Complex64::new(v, 0.0)).collect();
    let mirrored: Vec<Complex64> = head.iter().rev().chain(head.iter()).copied().collect();
    let shift = origin_value(&mirrored) * (an.origin_correction(dxi) / an.ck);
    let ys = f.nodes();
    let values = an.exec.try_map(&ys, |&y| -> Result<Complex64> {
        let mut acc = -shift;
        for (xi, c) in &ex {
            // ξ and -ξ together: E(iξ,x)E(-iξ,y) + E(-iξ,x)E(iξ,y)
            let (e, p) = an.kernel.imag_parts(xi * y)?;
            let z = Complex64::new(e, -p) * c;
            acc += z + z.conj();
        }
        Ok(acc)
    })?;
    Ok(SampledFunction1D {
        values,
        parity: Parity::None,
        ..f.clone()
    })
}

/// `f * g = c_k ℱ⁻¹[ℱf · ℱg]`.
pub fn convolution(an: &Rank1Analysis, f: &SampledFunction1D, g: &SampledFunction1D) -> Result<SampledFunction1D> {
    if f.h != g.h || f.half_count != g.half_count {
        return Err(Error::InvalidParameter("convolution needs matching node sets".into()));
    }
    let (ff, fg) = (dunkl_transform(an, f)?, dunkl_transform(an, g)?);
    let prod = SampledFunction1D {
        values: ff.values.iter().zip(&fg.values).map(|(a, b)| a * b * an.ck).collect(),
        parity: Parity::None,
        ..ff
    };
    inverse_transform(an, &prod)
}

/// `(f * g)(x) = ∫ f(y) τ_x g(-y) dw(y)` in physical space, for even `g`.
pub fn convolution_direct(an: &Rank1Analysis, f: &SampledFunction1D, g: &SampledFunction1D) -> Result<SampledFunction1D> {
    let xs = f.nodes();
    let values = xs
        .iter()
        .map(|&x| -> Result<Complex64> {
            let t = translate_radial(an, g, x)?;
            let prod: Vec<Complex64> = f.values.iter().zip(&t.values).map(|(a, b)| a * b).collect();
            Ok(an.midpoint_integral(f.h, &prod))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledFunction1D {
        values,
        parity: Parity::None,
        ..f.clone()
    })
}

/// Smallest time resolved by [`heat_kernel`].
pub const MIN_HEAT_TIME: f64 = 1e-4;
/// `e^{-tξ²}` is truncated where it drops below `e^{-HEAT_CUTOFF}`.
const HEAT_CUTOFF: f64 = 40.0;

/// `h_t(x, y) = c_k⁻¹ (2t)^{-𝐍/2} e^{-(x²+y²)/4t} E(x/√2t, y/√2t)`, with the
/// exponentials combined so that far-off-diagonal values keep full relative
/// accuracy.
pub fn heat_kernel(an: &Rank1Analysis, t: f64, x: f64, y: f64) -> Result<f64> {
    if !(t >= MIN_HEAT_TIME) {
        return Err(Error::ResolutionLimit(t));
    }
    let s = x * y / (2.0 * t);
    let log_e = log_kernel_real(an.k, s)?;
    let exponent = log_e - s.abs() - (x.abs() - y.abs()).powi(2) / (4.0 * t);
    Ok((2.0 * t).powf(-0.5 * an.homogeneous_dimension()) * exponent.exp() / an.ck)
}

/// `h_t(x, y) = τ_x h_t(-y)` with `ℱh_t(ξ) = c_k⁻¹ e^{-tξ²}`, summed on a
/// midpoint ξ-grid whose spacing keeps aliased images outside the support
/// of the kernel in `|x|+|y|`. Absolute accuracy only, relative to `h_t(0, 0)`.
pub fn heat_kernel_spectral(an: &Rank1Analysis, t: f64, x: f64, y: f64) -> Result<f64> {
    if !(t >= MIN_HEAT_TIME) {
        return Err(Error::ResolutionLimit(t));
    }
    let spread = (4.0 * t * HEAT_CUTOFF).sqrt();
    let dxi = 2.0 * PI / (x.abs() + y.abs() + 2.0 * spread + 4.0);
    let xi_max = (HEAT_CUTOFF / t).sqrt();
    let n = (xi_max / dxi).ceil() as usize;
    let mut acc = 0.0;
    for j in 0..n {
        let xi = (j as f64 + 0.5) * dxi;
        let (ex, px) = an.kernel.imag_parts(xi * x)?;
        let (ey, py) = an.kernel.imag_parts(xi * y)?;
        acc += (ex * ey + px * py) * (-t * xi * xi).exp() * an.weight(xi);
    }
    Ok((2.0 * acc * dxi - an.origin_correction(dxi)) / (an.ck * an.ck))
}

/// `c_k⁻¹ (2t)^{-𝐍/2} e^{-x²/(4t)}`.
pub fn heat_profile(an: &Rank1Analysis, t: f64, x: f64) -> f64 {
    (2.0 * t).powf(-0.5 * an.homogeneous_dimension()) * (-x * x / (4.0 * t)).exp() / an.ck
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_is_fixed_by_transform() {
        for k in [0.0, 1.0] {
            let an = Rank1Analysis::new(k).unwrap();
            let f = SampledFunction1D::from_real(1.0 / 16.0, 12.0, Parity::Even, |x| (-x * x / 2.0).exp()).unwrap();
            let g = dunkl_transform(&an, &f).unwrap();
            for (i, xi) in g.nodes().iter().enumerate() {
                assert!((g.values[i].re - (-xi * xi / 2.0).exp()).abs() < 1e-9, "k={k} xi={xi}");
                assert!(g.values[i].im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncation_is_reported() {
        let an = Rank1Analysis::new(0.0).unwrap();
        let f = SampledFunction1D::from_real(0.1, 2.0, Parity::Even, |x| (-x * x / 2.0).exp()).unwrap();
        assert!(matches!(dunkl_transform(&an, &f), Err(Error::TruncationDominated(_))));
    }

    #[test]
    fn heat_kernel_classical_limit() {
        let an = Rank1Analysis::new(0.0).unwrap();
        for (t, x, y) in [(0.25, 0.0, 0.3), (1.0, 1.0, -2.0), (4.0, 3.0, 9.0)] {
            let exact = (4.0 * PI * t).powf(-0.5) * (-(x - y) * (x - y) / (4.0 * t)).exp();
            let v = heat_kernel(&an, t, x, y).unwrap();
            assert!((v - exact).abs() < 1e-12, "{t} {x} {y}: {v} {exact}");
        }
        assert!(matches!(heat_kernel(&an, 1e-5, 0.0, 0.0), Err(Error::ResolutionLimit(_))));
    }

    #[test]
    fn closed_form_matches_spectral_sum() {
        for k in [0.0, 1.0] {
            let an = Rank1Analysis::new(k).unwrap();
            for t in [0.25, 1.0, 4.0] {
                let peak = heat_kernel(&an, t, 0.0, 0.0).unwrap();
                for (x, y) in [(0.0, 0.7), (1.0, -2.0), (3.0, 3.0), (-3.0, 2.5), (2.0, -3.0)] {
                    let a = heat_kernel(&an, t, x, y).unwrap();
                    let b = heat_kernel_spectral(&an, t, x, y).unwrap();
                    assert!((a - b).abs() < 1e-9 * peak, "k={k} t={t} {x} {y}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn log_kernel_matches_ode_kernel() {
        for k in [0.5, 1.0, 2.5] {
            let ev = KernelEvaluator::new(k).unwrap();
            for s in [-6.0, -1.5, -0.2, 0.0, 0.3, 2.0, 9.0] {
                let direct = ev.kernel_real(s, 1.0).unwrap();
                let stable = log_kernel_real(k, s).unwrap().exp();
                assert!((direct - stable).abs() < 1e-9 * s.abs().exp(), "k={k} s={s}: {direct} {stable}");
            }
        }
    }

    #[test]
    fn half_integer_kernel_is_i0_plus_i1() {
        // E_{1/2}(s) = I₀(s) + I₁(s)
        let bessel = |s: f64| {
            let (mut i0, mut i1) = (0.0, 0.0);
            let mut term = 1.0;
            for m in 0..60 {
                i0 += term;
                i1 += term * 0.5 * s / (m as f64 + 1.0);
                term *= (0.5 * s).powi(2) / ((m as f64 + 1.0) * (m as f64 + 1.0));
            }
            i0 + i1
        };
        for s in [-12.0, -6.0, -1.0, 0.5, 4.0, 10.0] {
            let want = bessel(s);
            let got = log_kernel_real(0.5, s).unwrap().exp();
            assert!((got / want - 1.0).abs() < 1e-10, "s={s}: {got} {want}");
        }
    }

    #[test]
    fn closed_form_ball_volume() {
        let an = Rank1Analysis::new(1.0).unwrap();
        assert!((an.ball_volume(0.0, 1.0) - 4.0 / 3.0).abs() < 1e-14);
        assert!((an.ball_volume(2.0, 1.0) - 52.0 / 3.0).abs() < 1e-12);
    }
}
