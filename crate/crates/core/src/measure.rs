//! Integration against `dw`, ball volumes, `c_k`, and comparability ratios.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::quadrature::{build_panels, integrate_panels, AdaptiveOptions, QuadValue};
use crate::root_system::DunklSystem;

/// Tolerance and depth of the adaptive quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub max_depth: usize,
    pub order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-6,
            max_depth: 30,
            order: 10,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.max_depth < 1 || self.order < 2 {
            return Err(Error::InvalidParameter(format!("bad quadrature spec {self:?}")));
        }
        Ok(())
    }

    fn options(&self) -> AdaptiveOptions {
        AdaptiveOptions {
            rel_tol: self.rel_tol,
            max_depth: self.max_depth,
            order: self.order,
            abs_floor: 1e-3,
        }
    }
}

#[derive(Clone, Copy)]
enum Domain<'a> {
    Cube { lo: &'a [f64], hi: &'a [f64] },
    Ball { center: &'a [f64], radius: f64 },
}

/// Roots whose last nonzero coordinate is at a given level produce an
/// algebraic singularity in that coordinate once the previous ones are fixed.
#[derive(Clone, Debug, Default)]
struct LevelRoots {
    singular: Vec<(Vec<f64>, f64)>,
    oblique: Vec<Vec<f64>>,
}

/// Memo of `w(B(x,r))` keyed by the center rounded to 1e-9 and the radius bits.
#[derive(Debug, Default)]
pub struct BallVolumeCache {
    map: RwLock<HashMap<(Vec<i64>, u64), f64>>,
}

impl BallVolumeCache {
    fn key(x: &[f64], r: f64) -> (Vec<i64>, u64) {
        (x.iter().map(|v| (v * 1e9).round() as i64).collect(), r.to_bits())
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("volume cache").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Quadrature against `dw` for a fixed root system and multiplicity.
#[derive(Debug)]
pub struct WeightedMeasure {
    system: Arc<DunklSystem>,
    spec: QuadratureSpec,
    levels: Vec<LevelRoots>,
    cache: BallVolumeCache,
}

impl WeightedMeasure {
    pub fn new(system: Arc<DunklSystem>, spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let n = system.dim();
        let mut levels = vec![LevelRoots::default(); n];
        for (a, e) in system.positive_pairs() {
            let last = (0..n).rev().find(|&i| a[i].abs() > 1e-14).expect("nonzero root");
            if *e != 0.0 {
                levels[last].singular.push((a.clone(), *e));
            }
            let first = (0..n).find(|&i| a[i].abs() > 1e-14).expect("nonzero root");
            if first < last && *e != 0.0 {
                levels[first].oblique.push(a.clone());
            }
        }
        Ok(WeightedMeasure {
            system,
            spec,
            levels,
            cache: BallVolumeCache::default(),
        })
    }

    pub fn system(&self) -> &Arc<DunklSystem> {
        &self.system
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn cache(&self) -> &BallVolumeCache {
        &self.cache
    }

    fn breaks(&self, dom: Domain, level: usize) -> Vec<f64> {
        let roots = &self.levels[level].oblique;
        if roots.is_empty() || self.dim() != 2 || level != 0 {
            return Vec::new();
        }
        let mut out = vec![0.0];
        for a in roots {
            let slope = -a[0] / a[1];
            match dom {
                Domain::Cube { lo, hi } => {
                    out.push(lo[1] / slope);
                    out.push(hi[1] / slope);
                }
                Domain::Ball { center: c, radius: r } => {
                    let qa = slope * slope + 1.0;
                    let qb = -2.0 * (slope * c[1] + c[0]);
                    let qc = c[0] * c[0] + c[1] * c[1] - r * r;
                    let disc = qb * qb - 4.0 * qa * qc;
                    if disc >= 0.0 {
                        let s = disc.sqrt();
                        out.push((-qb - s) / (2.0 * qa));
                        out.push((-qb + s) / (2.0 * qa));
                    }
                }
            }
        }
        out
    }

    fn iterate<V: QuadValue>(
        &self,
        dom: Domain,
        level: usize,
        x: &mut [f64],
        f: &dyn Fn(&[f64]) -> V,
        opts: &AdaptiveOptions,
    ) -> Result<V> {
        let n = self.dim();
        let (lo, hi, ends) = match dom {
            Domain::Cube { lo, hi } => (lo[level], hi[level], (0.0, 0.0)),
            Domain::Ball { center, radius } => {
                let used: f64 = (0..level).map(|i| (x[i] - center[i]).powi(2)).sum();
                let s2 = radius * radius - used;
                if s2 <= 0.0 {
                    return Ok(V::zero());
                }
                let s = s2.sqrt();
                let e = 0.5 * (n - 1 - level) as f64;
                (center[level] - s, center[level] + s, (e, e))
            }
        };
        let singular: Vec<(f64, f64)> = self.levels[level]
            .singular
            .iter()
            .map(|(a, e)| {
                let partial: f64 = (0..level).map(|i| a[i] * x[i]).sum();
                (-partial / a[level], *e)
            })
            .collect();
        let breaks = self.breaks(dom, level);
        let panels = build_panels(lo, hi, ends, &singular, &breaks);
        let mut inner_err: Option<Error> = None;
        let value = {
            let mut g = |t: f64| -> V {
                x[level] = t;
                if level + 1 == n {
                    f(x).scale(self.system.weight(x))
                } else {
                    match self.iterate(dom, level + 1, x, f, opts) {
                        Ok(v) => v,
                        Err(e) => {
                            inner_err.get_or_insert(e);
                            V::zero()
                        }
                    }
                }
            };
            integrate_panels(&mut g, &panels, opts)
        };
        if let Some(e) = inner_err {
            return Err(e);
        }
        value
    }

    fn run<V: QuadValue>(&self, dom: Domain, f: &dyn Fn(&[f64]) -> V, opts: &AdaptiveOptions) -> Result<V> {
        let mut x = vec![0.0; self.dim()];
        self.iterate(dom, 0, &mut x, f, opts)
    }

    /// `∫_K f dw` over the box `K = [lo, hi]`, for scalar or array-valued `f`.
    pub fn integrate_cube_with<V: QuadValue>(&self, f: &dyn Fn(&[f64]) -> V, lo: &[f64], hi: &[f64]) -> Result<V> {
        self.check_dims(lo)?;
        self.check_dims(hi)?;
        self.run(Domain::Cube { lo, hi }, f, &self.spec.options())
    }

    pub fn integrate_cube(&self, f: impl Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64]) -> Result<f64> {
        self.integrate_cube_with(&f, lo, hi)
    }

    /// `∫_{B(x,r)} f dw` with the exact ball as integration domain.
    pub fn integrate_ball_with<V: QuadValue>(&self, f: &dyn Fn(&[f64]) -> V, x: &[f64], r: f64) -> Result<V> {
        self.check_dims(x)?;
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("radius {r} must be positive")));
        }
        self.run(Domain::Ball { center: x, radius: r }, f, &self.spec.options())
    }

    pub fn integrate_ball(&self, f: impl Fn(&[f64]) -> f64, x: &[f64], r: f64) -> Result<f64> {
        self.integrate_ball_with(&f, x, r)
    }

    /// Cached `w(B(x,r))`, evaluated at the rounded center.
    pub fn ball_volume(&self, x: &[f64], r: f64) -> Result<f64> {
        let key = BallVolumeCache::key(x, r);
        if let Some(v) = self.cache.map.read().expect("volume cache").get(&key) {
            return Ok(*v);
        }
        let center: Vec<f64> = key.0.iter().map(|&i| i as f64 * 1e-9).collect();
        let v = self.integrate_ball(|_| 1.0, &center, r)?;
        self.cache.map.write().expect("volume cache").insert(key, v);
        Ok(v)
    }

    /// Uncached `w(B(x,r))` at the exact center.
    pub fn ball_volume_fresh(&self, x: &[f64], r: f64) -> Result<f64> {
        self.integrate_ball(|_| 1.0, x, r)
    }

    /// `c_k = ∫ e^{-|x|²/2} dw` over `[-10, 10]^N`.
    pub fn ck_constant(&self) -> Result<f64> {
        let n = self.dim();
        let lo = vec![-10.0; n];
        let hi = vec![10.0; n];
        let opts = AdaptiveOptions {
            rel_tol: self.spec.rel_tol.min(1e-11),
            ..self.spec.options()
        };
        let f = |x: &[f64]| (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp();
        self.run(Domain::Cube { lo: &lo, hi: &hi }, &f, &opts)
    }

    /// `w(B(x,r)) / (r^N ∏_α (|⟨x,α⟩|+r)^{k(α)})` and its reciprocal.
    pub fn estimate_comparability(&self, x: &[f64], r: f64) -> Result<(f64, f64)> {
        let ratio = self.ball_volume_fresh(x, r)? / self.system.volume_profile(x, r);
        Ok((ratio, 1.0 / ratio))
    }

    fn check_dims(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidParameter(format!(
                "point of dimension {} for a system of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::root_system::{build_root_system, Multiplicity, RootFamily};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn rank1(k: f64) -> WeightedMeasure {
        WeightedMeasure::new(Arc::new(DunklSystem::rank1(k).unwrap()), QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn cube_examples() {
        let m = rank1(1.0);
        assert_relative_eq!(m.integrate_cube(|_| 1.0, &[-1.0], &[1.0]).unwrap(), 4.0 / 3.0, max_relative = 1e-10);
        assert_relative_eq!(m.integrate_cube(|x| x[0] * x[0], &[0.0], &[1.0]).unwrap(), 0.4, max_relative = 1e-10);
        let m0 = WeightedMeasure::new(Arc::new(DunklSystem::a1_power(2, 0.0).unwrap()), QuadratureSpec::default()).unwrap();
        assert_relative_eq!(m0.integrate_cube(|_| 1.0, &[-1.0, 0.5], &[2.0, 3.0]).unwrap(), 7.5, max_relative = 1e-10);
    }

    #[test]
    fn ball_examples() {
        let m = rank1(1.0);
        assert_relative_eq!(m.ball_volume(&[0.0], 1.0).unwrap(), 4.0 / 3.0, max_relative = 1e-10);
        assert_relative_eq!(m.ball_volume(&[2.0], 1.0).unwrap(), 52.0 / 3.0, max_relative = 1e-10);
        assert_relative_eq!(m.ball_volume(&[0.0], 2.0).unwrap(), 32.0 / 3.0, max_relative = 1e-10);
        for k in [0.0, 0.3, 1.0, 2.5] {
            let m = rank1(k);
            let r: f64 = 1.7;
            let exact = 2f64.powf(k + 1.0) * r.powf(2.0 * k + 3.0) / (2.0 * k + 3.0);
            assert_relative_eq!(m.integrate_ball(|y| y[0] * y[0], &[0.0], r).unwrap(), exact, max_relative = 1e-8);
        }
        let disk = WeightedMeasure::new(Arc::new(DunklSystem::a1_power(2, 0.0).unwrap()), QuadratureSpec::default()).unwrap();
        assert_relative_eq!(disk.ball_volume(&[0.3, -0.2], 1.5).unwrap(), PI * 2.25, max_relative = 1e-6);
    }

    #[test]
    fn ck_values() {
        assert_relative_eq!(rank1(0.0).ck_constant().unwrap(), (2.0 * PI).sqrt(), max_relative = 1e-10);
        assert_relative_eq!(rank1(1.0).ck_constant().unwrap(), 5.013256549262001, max_relative = 1e-10);
        let r = build_root_system(&RootFamily::A1Power { rank: 2 }).unwrap();
        let k = Multiplicity::per_orbit(&r, &[0.5, 1.0]).unwrap();
        let prod = WeightedMeasure::new(Arc::new(DunklSystem::new(r, k).unwrap()), QuadratureSpec::default()).unwrap();
        let c = rank1(0.5).ck_constant().unwrap() * rank1(1.0).ck_constant().unwrap();
        assert_relative_eq!(prod.ck_constant().unwrap(), c, max_relative = 1e-8);
    }

    #[test]
    fn comparability_examples() {
        let m0 = rank1(0.0);
        for (x, r) in [(0.0, 1.0), (3.0, 0.2), (-1.0, 5.0)] {
            assert_relative_eq!(m0.estimate_comparability(&[x], r).unwrap().0, 2.0, max_relative = 1e-10);
        }
        let m = rank1(1.0);
        let (a, b) = m.estimate_comparability(&[0.0], 1.0).unwrap();
        assert!((0.1..=10.0).contains(&a));
        assert_relative_eq!(a * b, 1.0);
        let (s, _) = m.estimate_comparability(&[1.4], 0.6).unwrap();
        let (t, _) = m.estimate_comparability(&[2.8], 1.2).unwrap();
        assert_relative_eq!(s, t, max_relative = 1e-9);
    }

    #[test]
    fn bad_arguments() {
        let m = rank1(1.0);
        assert!(m.integrate_ball(|_| 1.0, &[0.0], 0.0).is_err());
        assert!(m.integrate_cube(|_| 1.0, &[0.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(QuadratureSpec { rel_tol: 0.0, ..Default::default() }.validate().is_err());
    }
}
