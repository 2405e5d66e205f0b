//! The rank-one Dunkl kernel `E(x, y)` from its defining ODE.
//!
//! Writing `E = e + o` with `e` even and `o` odd in `x`, the system is
//! `e' = y·o`, `o' + 2k·o/x = y·e`, `e(0) = 1`, `o(0) = 0`. Near the regular
//! singular point the power series in `u = xy` is used; beyond it the ODE is
//! integrated outward.

use num_complex::Complex64;
use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::ode::{Dopri5, StepControl};
use crate::quadrature::{build_panels, integrate_panels, AdaptiveOptions};

/// `|xy|` up to which the power series is summed directly.
pub const SERIES_LIMIT: f64 = 2.0;
/// Largest `|xy|` accepted for real arguments.
pub const REAL_RANGE: f64 = 1e3;
/// Largest `|xy|` accepted for imaginary arguments.
pub const IMAG_RANGE: f64 = 1e5;
const TABLE_STEP: f64 = 1.0 / 16.0;

/// Second argument of the kernel: real `y` or purely imaginary `iη`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelArg {
    Real(f64),
    Imag(f64),
}

/// `(even, odd)` parts of the series at `u`; for imaginary arguments the odd
/// part is returned as the real coefficient `p` of `E = e + i p`.
pub fn series(k: f64, u: f64, imag: bool) -> (f64, f64) {
    let sign = if imag { -1.0 } else { 1.0 };
    let mut a = 1.0;
    let mut even = 1.0;
    let mut odd = 0.0;
    let mut upow = u;
    for n in 0..400 {
        let nf = n as f64;
        let b = a / (2.0 * nf + 1.0 + 2.0 * k);
        let to = b * upow;
        odd += to;
        a = sign * b / (2.0 * nf + 2.0);
        upow *= u;
        let te = a * upow;
        even += te;
        upow *= u;
        if to.abs() <= 1e-18 * odd.abs().max(1e-300) && te.abs() <= 1e-18 * even.abs().max(1e-300) {
            break;
        }
        if to == 0.0 && te == 0.0 {
            break;
        }
    }
    (even, odd)
}

/// Tabulated `F(t) = E(t, i) = e(t) + i p(t)` on `[0, extent]` with
/// quintic Hermite interpolation.
#[derive(Debug)]
struct ImagTable {
    step: f64,
    extent: f64,
    e: Vec<f64>,
    p: Vec<f64>,
}

/// Evaluates `E(x, y)` for a fixed multiplicity `k ≥ 0`.
#[derive(Debug)]
pub struct KernelEvaluator {
    k: f64,
    ctl: StepControl,
    rho0: f64,
    table_extent: f64,
    table: OnceLock<std::result::Result<ImagTable, Error>>,
}

impl KernelEvaluator {
    pub fn new(k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!("multiplicity {k} must be >= 0")));
        }
        Ok(KernelEvaluator {
            k,
            ctl: StepControl::default(),
            rho0: 1e-3,
            table_extent: 4096.0,
            table: OnceLock::new(),
        })
    }

    /// Relative tolerance of the direct ODE solves.
    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.ctl.rtol = rtol;
        self
    }

    pub fn with_series_start(mut self, rho0: f64) -> Self {
        self.rho0 = rho0;
        self
    }

    /// Largest `|t|` served by [`Self::imag_parts`].
    pub fn with_table_extent(mut self, extent: f64) -> Self {
        self.table_extent = extent;
        self
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn table_extent(&self) -> f64 {
        self.table_extent
    }

    fn rhs(k: f64, eta: f64, imag: bool) -> impl FnMut(f64, &[f64; 2]) -> [f64; 2] {
        move |s, y| {
            let e = y[0];
            let o = y[1];
            let de = if imag { -eta * o } else { eta * o };
            [de, eta * e - 2.0 * k * o / s]
        }
    }

    /// `E(x, y)` by direct integration in `x` with `y` as a parameter.
    pub fn kernel(&self, x: f64, y: KernelArg) -> Result<Complex64> {
        let (eta, imag) = match y {
            KernelArg::Real(v) => (v, false),
            KernelArg::Imag(v) => (v, true),
        };
        let u = x * eta;
        if !u.is_finite() {
            return Err(Error::KernelOutOfRange(u.abs()));
        }
        let limit = if imag { IMAG_RANGE } else { REAL_RANGE };
        if u.abs() > limit {
            return Err(Error::KernelOutOfRange(u.abs()));
        }
        let (even, odd) = if u.abs() <= SERIES_LIMIT {
            let (e, o) = series(self.k, u.abs(), imag);
            (e, o)
        } else {
            let s0 = self.rho0.min(1.0 / eta.abs());
            let (e0, o0) = series(self.k, s0 * eta, imag);
            let mut solver = Dopri5::new(Self::rhs(self.k, eta, imag), s0, [e0, o0], s0, self.ctl);
            let y = solver.advance_to(x.abs())?;
            // the odd part was integrated with the signed parameter; rescale to |u|
            let o = if eta < 0.0 { -y[1] } else { y[1] };
            (y[0], o)
        };
        let odd = if u < 0.0 { -odd } else { odd };
        if !even.is_finite() || !odd.is_finite() {
            return Err(Error::KernelIntegration("non-finite kernel value".into()));
        }
        Ok(if imag {
            Complex64::new(even, odd)
        } else {
            Complex64::new(even + odd, 0.0)
        })
    }

    /// Real-argument kernel `E(x, y)`.
    pub fn kernel_real(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.kernel(x, KernelArg::Real(y))?.re)
    }

    fn build_table(&self) -> std::result::Result<ImagTable, Error> {
        let n = (self.table_extent / TABLE_STEP).ceil() as usize;
        let mut e = Vec::with_capacity(n + 1);
        let mut p = Vec::with_capacity(n + 1);
        let switch = (SERIES_LIMIT / TABLE_STEP) as usize;
        for i in 0..=switch.min(n) {
            let (a, b) = series(self.k, i as f64 * TABLE_STEP, true);
            e.push(a);
            p.push(b);
        }
        if n > switch {
            let ctl = StepControl {
                rtol: 1e-13,
                atol: 1e-16,
                ..self.ctl
            };
            let t0 = switch as f64 * TABLE_STEP;
            let mut solver = Dopri5::new(Self::rhs(self.k, 1.0, true), t0, [e[switch], p[switch]], TABLE_STEP, ctl);
            for i in switch + 1..=n {
                let y = solver.advance_to(i as f64 * TABLE_STEP)?;
                e.push(y[0]);
                p.push(y[1]);
            }
        }
        Ok(ImagTable {
            step: TABLE_STEP,
            extent: n as f64 * TABLE_STEP,
            e,
            p,
        })
    }

    fn table(&self) -> Result<&ImagTable> {
        self.table
            .get_or_init(|| self.build_table())
            .as_ref()
            .map_err(|e| e.clone())
    }

    /// `(e(t), p(t))` with `E(t, i) = e(t) + i·p(t)`; `e` even, `p` odd.
    #[inline]
    pub fn imag_parts(&self, t: f64) -> Result<(f64, f64)> {
        let a = t.abs();
        let (e, p) = if a <= SERIES_LIMIT {
            series(self.k, a, true)
        } else {
            let tab = self.table()?;
            if a > tab.extent {
                return Err(Error::KernelOutOfRange(a));
            }
            tab.interpolate(self.k, a)
        };
        Ok((e, if t < 0.0 { -p } else { p }))
    }

    /// `E(iξ, x) = E(ξx, i)`.
    pub fn exp_i(&self, xi: f64, x: f64) -> Result<Complex64> {
        let (e, p) = self.imag_parts(xi * x)?;
        Ok(Complex64::new(e, p))
    }
}

impl ImagTable {
    fn derivs(k: f64, t: f64, e: f64, p: f64) -> [f64; 6] {
        let dp = e - 2.0 * k * p / t;
        let de = -p;
        let dde = -dp;
        let ddp = de - 2.0 * k * (dp * t - p) / (t * t);
        [e, de, dde, p, dp, ddp]
    }

    fn interpolate(&self, k: f64, t: f64) -> (f64, f64) {
        let h = self.step;
        let i = ((t / h).floor() as usize).min(self.e.len() - 2);
        let t0 = i as f64 * h;
        let t1 = t0 + h;
        let s = (t - t0) / h;
        let a = Self::derivs(k, t0, self.e[i], self.p[i]);
        let b = Self::derivs(k, t1, self.e[i + 1], self.p[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;
        let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
        let h3 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h5 = 0.5 * (s3 - 2.0 * s4 + s5);
        let q = |f0: f64, d0: f64, dd0: f64, f1: f64, d1: f64, dd1: f64| {
            h0 * f0 + h1 * h * d0 + h2 * h * h * dd0 + h3 * f1 + h4 * h * d1 + h5 * h * h * dd1
        };
        (
            q(a[0], a[1], a[2], b[0], b[1], b[2]),
            q(a[3], a[4], a[5], b[3], b[4], b[5]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_limit_is_exponential() {
        let ev = KernelEvaluator::new(0.0).unwrap();
        for (x, y) in [(0.3, 0.5), (3.0, 2.0), (-4.0, 5.0), (7.0, -3.0), (0.001, 400.0)] {
            let v = ev.kernel_real(x, y).unwrap();
            let exact = (x * y as f64).exp();
            // the even/odd split cancels for negative products: accuracy is relative to e^{|xy|}
            let scale = (x * y as f64).abs().exp();
            assert!((v - exact).abs() <= 1e-8 * scale, "{x} {y}: {v} vs {exact}");
            let c = ev.kernel(x, KernelArg::Imag(y)).unwrap();
            assert!((c.re - (x * y).cos()).abs() < 1e-8 && (c.im - (x * y).sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn k_one_closed_form() {
        // e(t) = sin t / t, p(t) = (sin t - t cos t)/t² for E(t, i) at k = 1
        let ev = KernelEvaluator::new(1.0).unwrap();
        for t in [0.5, 1.9, 2.1, 10.0, 77.7, 1000.3, 4000.0] {
            let (e, p) = ev.imag_parts(t).unwrap();
            let (es, ps) = (t.sin() / t, (t.sin() - t * t.cos()) / (t * t));
            assert!((e - es).abs() < 1e-10 && (p - ps).abs() < 1e-10, "t={t}: {e} {p}");
            let d = ev.kernel(1.0, KernelArg::Imag(t)).unwrap();
            assert!((d.re - es).abs() < 1e-8 && (d.im - ps).abs() < 1e-8, "direct t={t}");
        }
    }

    #[test]
    fn range_guard() {
        let ev = KernelEvaluator::new(0.5).unwrap();
        assert!(matches!(ev.kernel(40.0, KernelArg::Real(30.0)), Err(Error::KernelOutOfRange(_))));
        assert!(KernelEvaluator::new(-1.0).is_err());
        assert_eq!(ev.kernel(3.0, KernelArg::Real(0.0)).unwrap().re, 1.0);
    }
}

/// `ln E(x, y)` as a function of `s = xy`, from the positive integral
/// `E = B⁻¹ ∫_{-1}^{1} e^{st} (1-t)^{k-1} (1+t)^k dt`, `B` its value at `s = 0`.
/// Accurate relative to `E` itself, including `s ≪ 0`.
pub fn log_kernel_real(k: f64, s: f64) -> Result<f64> {
    if k == 0.0 {
        return Ok(s);
    }
    if !(k > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("log_kernel_real: k = {k}, s = {s}")));
    }
    // u = 1 ∓ t measures the distance to the dominant endpoint
    let a = s.abs();
    let (p, q) = if s >= 0.0 { (k - 1.0, k) } else { (k, k - 1.0) };
    let breaks: Vec<f64> = [1.0, 4.0, 16.0, 64.0]
        .iter()
        .map(|c| c / a.max(1e-300))
        .filter(|u| *u < 2.0)
        .collect();
    let panels = build_panels(0.0, 2.0, (p, q), &[], &breaks);
    let opts = AdaptiveOptions {
        rel_tol: 1e-13,
        max_depth: 60,
        order: 16,
        abs_floor: 0.0,
    };
    let integral = integrate_panels(&mut |u: f64| (-a * u).exp() * u.powf(p) * (2.0 - u).powf(q), &panels, &opts)?;
    let log_b = 2.0 * k * std::f64::consts::LN_2 + ln_gamma(k) + ln_gamma(k + 1.0) - ln_gamma(2.0 * k + 1.0);
    Ok(a + integral.ln() - log_b)
}
