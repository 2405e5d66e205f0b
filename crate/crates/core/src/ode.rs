//! Dormand–Prince 5(4) integrator for small systems.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step-size control for [`Dopri5`].
#[derive(Clone, Copy, Debug)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-10,
            atol: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

fn axpy<const D: usize>(y: &[f64; D], terms: &[(f64, &[f64; D])], h: f64) -> [f64; D] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Adaptive explicit integrator with FSAL reuse.
pub struct Dopri5<F, const D: usize> {
    f: F,
    ctl: StepControl,
    t: f64,
    y: [f64; D],
    k1: [f64; D],
    h: f64,
    steps: usize,
}

impl<F: FnMut(f64, &[f64; D]) -> [f64; D], const D: usize> Dopri5<F, D> {
    pub fn new(mut f: F, t0: f64, y0: [f64; D], h0: f64, ctl: StepControl) -> Self {
        let k1 = f(t0, &y0);
        Dopri5 {
            f,
            ctl,
            t: t0,
            y: y0,
            k1,
            h: h0,
            steps: 0,
        }
    }

    pub fn state(&self) -> (f64, [f64; D]) {
        (self.t, self.y)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Advances exactly to `t_end` (which must not precede the current time).
    pub fn advance_to(&mut self, t_end: f64) -> Result<[f64; D]> {
        let dir = (t_end - self.t).signum();
        while (t_end - self.t) * dir > 0.0 {
            if self.steps >= self.ctl.max_steps {
                return Err(Error::KernelIntegration("step budget exhausted".into()));
            }
            let remaining = t_end - self.t;
            let mut h = self.h.abs().min(remaining.abs()) * dir;
            let last = h.abs() >= remaining.abs();
            if last {
                h = remaining;
            }
            let (t, y, k1) = (self.t, self.y, self.k1);
            let f = &mut self.f;
            let k2 = f(t + C2 * h, &axpy(&y, &[(A21, &k1)], h));
            let k3 = f(t + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
            let k4 = f(t + C4 * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
            let k5 = f(t + C5 * h, &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
            let k6 = f(
                t + h,
                &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
            );
            let y5 = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
            let k7 = f(t + h, &y5);
            let mut err: f64 = 0.0;
            for i in 0..D {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.ctl.atol + self.ctl.rtol * y[i].abs().max(y5[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() || !y5.iter().all(|v| v.is_finite()) {
                self.h *= 0.1;
                if self.h.abs() < 1e-300 {
                    return Err(Error::KernelIntegration("non-finite state".into()));
                }
                continue;
            }
            self.steps += 1;
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                self.t = if last { t_end } else { t + h };
                self.y = y5;
                self.k1 = k7;
                if !last || factor < 1.0 {
                    self.h = h.abs() * factor;
                }
            } else {
                self.h = h.abs() * factor.min(1.0);
            }
        }
        Ok(self.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_long_run() {
        let ctl = StepControl { rtol: 1e-12, atol: 1e-14, ..Default::default() };
        let mut s = Dopri5::new(|_t, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 0.01, ctl);
        for i in 1..=100 {
            let t = i as f64;
            let y = s.advance_to(t).unwrap();
            assert!((y[0] - t.cos()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn exponential_backwards() {
        let mut s = Dopri5::new(|_t, y: &[f64; 1]| [y[0]], 0.0, [1.0], -0.1, StepControl::default());
        let y = s.advance_to(-3.0).unwrap();
        assert!((y[0] - (-3f64).exp()).abs() < 1e-11);
    }
}
