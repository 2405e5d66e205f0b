//! Dyadic cubes, the stopping-time decomposition `𝒬` and its smooth
//! resolution of identity.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::landscape::AuxFunction;

/// `[0, 2^{-level}]^N + 2^{-level}·index`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    pub level: i32,
    pub index: Vec<i64>,
}

impl DyadicCube {
    pub fn new(level: i32, index: Vec<i64>) -> Self {
        DyadicCube { level, index }
    }

    pub fn side(&self) -> f64 {
        2f64.powi(-self.level)
    }

    pub fn lo(&self) -> Vec<f64> {
        let s = self.side();
        self.index.iter().map(|&i| i as f64 * s).collect()
    }

    pub fn hi(&self) -> Vec<f64> {
        let s = self.side();
        self.index.iter().map(|&i| (i + 1) as f64 * s).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        let s = self.side();
        self.index.iter().map(|&i| (i as f64 + 0.5) * s).collect()
    }

    /// Bounds of the concentric cube dilated by `2^stars` (`Q*`, `Q**`, ...).
    pub fn star(&self, stars: u32) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * self.side() * 2f64.powi(stars as i32);
        let c = self.center();
        (c.iter().map(|v| v - half).collect(), c.iter().map(|v| v + half).collect())
    }

    pub fn parent(&self) -> DyadicCube {
        DyadicCube {
            level: self.level - 1,
            index: self.index.iter().map(|i| i.div_euclid(2)).collect(),
        }
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.index.len();
        (0..(1usize << n))
            .map(|mask| DyadicCube {
                level: self.level + 1,
                index: self
                    .index
                    .iter()
                    .enumerate()
                    .map(|(j, &i)| 2 * i + ((mask >> j) & 1) as i64)
                    .collect(),
            })
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let (lo, hi) = (self.lo(), self.hi());
        x.iter().zip(lo.iter().zip(&hi)).all(|(v, (a, b))| v >= a && v <= b)
    }
}

/// `g(Q) = d(Q)² (∫_Q V dw) / w(Q)`.
pub fn cube_g(aux: &AuxFunction, q: &DyadicCube) -> Result<f64> {
    let v = aux.potential();
    let [a, b] = aux
        .measure()
        .integrate_cube_with(&|y: &[f64]| [v.eval(y), 1.0], &q.lo(), &q.hi())?;
    let d = q.side();
    Ok(d * d * a / b)
}

/// A member of `𝒬` with its stopping value.
#[derive(Clone, Debug, PartialEq)]
pub struct StoppingCube {
    pub cube: DyadicCube,
    pub g: f64,
}

/// Maximal dyadic cubes with `g(Q) ≤ 1` tiling a dyadic-aligned box.
#[derive(Clone, Debug, PartialEq)]
pub struct StoppingDecomposition {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub top_level: i32,
    pub cubes: Vec<StoppingCube>,
}

/// Slack on the comparison `g(Q) ≤ 1`, absorbing quadrature rounding.
pub const G_SLACK: f64 = 1e-9;
pub const DEFAULT_DEPTH_CAP: usize = 40;

fn top_level(lo: &[f64], hi: &[f64]) -> Result<i32> {
    if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
        return Err(Error::InvalidParameter("region must be a nonempty box".into()));
    }
    let min_extent = lo.iter().zip(hi).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min);
    let start = -(min_extent.log2().floor() as i32);
    for level in start..start + 30 {
        let s = 2f64.powi(-level);
        let aligned = lo.iter().chain(hi).all(|v| (v / s).fract() == 0.0);
        if aligned {
            return Ok(level);
        }
    }
    Err(Error::InvalidParameter("region is not dyadic-aligned".into()))
}

/// Top-down subdivision while `g(Q) > 1`; siblings are evaluated in parallel.
pub fn stopping_decomposition(
    aux: &AuxFunction,
    lo: &[f64],
    hi: &[f64],
    depth_cap: usize,
) -> Result<StoppingDecomposition> {
    let level = top_level(lo, hi)?;
    let s = 2f64.powi(-level);
    let dim = lo.len();
    let ranges: Vec<(i64, i64)> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| ((a / s).round() as i64, (b / s).round() as i64))
        .collect();
    let mut frontier = Vec::new();
    let total: usize = ranges.iter().map(|(a, b)| (b - a) as usize).product();
    for c in 0..total {
        let mut rem = c;
        let mut idx = vec![0i64; dim];
        for j in (0..dim).rev() {
            let len = (ranges[j].1 - ranges[j].0) as usize;
            idx[j] = ranges[j].0 + (rem % len) as i64;
            rem /= len;
        }
        frontier.push(DyadicCube::new(level, idx));
    }
    let mut cubes = Vec::new();
    let mut depth = 0;
    while !frontier.is_empty() {
        let gs = aux.execution().try_map(&frontier, |q| cube_g(aux, q))?;
        let mut next = Vec::new();
        for (q, g) in frontier.into_iter().zip(gs) {
            if g <= 1.0 + G_SLACK {
                cubes.push(StoppingCube { cube: q, g });
            } else {
                next.extend(q.children());
            }
        }
        if !next.is_empty() && depth >= depth_cap {
            return Err(Error::DepthCapReached(depth_cap));
        }
        depth += 1;
        frontier = next;
    }
    cubes.sort_by(|a, b| {
        let (la, lb) = (a.cube.lo(), b.cube.lo());
        la.iter()
            .zip(&lb)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cube.level.cmp(&b.cube.level))
    });
    Ok(StoppingDecomposition {
        lo: lo.to_vec(),
        hi: hi.to_vec(),
        top_level: level,
        cubes,
    })
}

impl StoppingDecomposition {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Recomputes `g` on every non-top parent; true when all exceed 1.
    pub fn verify_maximality(&self, aux: &AuxFunction) -> Result<bool> {
        let parents: Vec<DyadicCube> = self
            .cubes
            .iter()
            .filter(|c| c.cube.level > self.top_level)
            .map(|c| c.cube.parent())
            .collect();
        let gs = aux.execution().try_map(&parents, |p| cube_g(aux, p))?;
        Ok(gs.iter().all(|&g| g > 1.0 + G_SLACK))
    }

    /// Sum of cube volumes divided by the region volume.
    pub fn coverage(&self) -> f64 {
        let region: f64 = self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product();
        let covered: f64 = self
            .cubes
            .iter()
            .map(|c| c.cube.side().powi(self.lo.len() as i32))
            .sum();
        covered / region
    }

    /// Max `d(Q₁)/d(Q₂)` over pairs whose fourth stars intersect.
    pub fn check_overlap(&self) -> f64 {
        let stars: Vec<(Vec<f64>, Vec<f64>)> = self.cubes.iter().map(|c| c.cube.star(4)).collect();
        let mut worst: f64 = 1.0;
        for i in 0..stars.len() {
            for j in i + 1..stars.len() {
                let meet = stars[i]
                    .0
                    .iter()
                    .zip(&stars[i].1)
                    .zip(stars[j].0.iter().zip(&stars[j].1))
                    .all(|((a0, a1), (b0, b1))| a0 <= b1 && b0 <= a1);
                if meet {
                    let (di, dj) = (self.cubes[i].cube.side(), self.cubes[j].cube.side());
                    worst = worst.max(di / dj).max(dj / di);
                }
            }
        }
        worst
    }

    /// Range of `m(x)·d(Q)` over `Q ∈ 𝒬` and points of `Q****`: the center,
    /// the corners and `extra` random points per cube.
    pub fn m_side_band(&self, aux: &AuxFunction, extra: usize, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
        let mut jobs: Vec<(Vec<f64>, f64)> = Vec::new();
        for c in &self.cubes {
            let d = c.cube.side();
            let (lo, hi) = c.cube.star(4);
            let dim = lo.len();
            jobs.push((c.cube.center(), d));
            for mask in 0..(1usize << dim) {
                let p = (0..dim).map(|j| if (mask >> j) & 1 == 1 { hi[j] } else { lo[j] }).collect();
                jobs.push((p, d));
            }
            for _ in 0..extra {
                let p = (0..dim).map(|j| rng.gen_range(lo[j]..=hi[j])).collect();
                jobs.push((p, d));
            }
        }
        let vals = aux.execution().try_map(&jobs, |(p, d)| Ok::<f64, Error>(aux.m(p)? * d))?;
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(0.0, f64::max);
        Ok((lo, hi))
    }

    /// Rows `(level, index, g, d, m(center))` for export.
    pub fn rows(&self, aux: &AuxFunction) -> Result<Vec<(i32, Vec<i64>, f64, f64, f64)>> {
        let centers: Vec<Vec<f64>> = self.cubes.iter().map(|c| c.cube.center()).collect();
        let ms = aux.m_many(&centers)?;
        Ok(self
            .cubes
            .iter()
            .zip(ms)
            .map(|(c, m)| (c.cube.level, c.cube.index.clone(), c.g, c.cube.side(), m))
            .collect())
    }
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Equal to 1 on `|u| ≤ 1/2`, vanishing for `|u| ≥ 1`, smooth in between.
pub fn plateau_bump(u: f64) -> f64 {
    let a = u.abs();
    if a <= 0.5 {
        1.0
    } else {
        smooth_step(2.0 * (1.0 - a))
    }
}

/// `φ_Q = ψ_Q / Σ ψ`, with `ψ_Q` equal to 1 on `Q` and supported in `Q*`.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    cubes: Vec<(Vec<f64>, f64)>,
}

impl PartitionOfUnity {
    pub fn new(decomposition: &StoppingDecomposition) -> Self {
        PartitionOfUnity {
            cubes: decomposition
                .cubes
                .iter()
                .map(|c| (c.cube.center(), c.cube.side()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    fn psi(&self, i: usize, x: &[f64]) -> f64 {
        let (c, d) = &self.cubes[i];
        x.iter().zip(c).map(|(v, ci)| plateau_bump((v - ci) / d)).product()
    }

    /// Nonzero `(index, φ_Q(x))` pairs.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<(usize, f64)>> {
        let parts: Vec<(usize, f64)> = (0..self.cubes.len())
            .map(|i| (i, self.psi(i, x)))
            .filter(|(_, p)| *p > 0.0)
            .collect();
        let total: f64 = parts.iter().map(|(_, p)| p).sum();
        if total <= 0.0 {
            return Err(Error::PartitionDenominator(x.to_vec()));
        }
        Ok(parts.into_iter().map(|(i, p)| (i, p / total)).collect())
    }

    pub fn phi(&self, i: usize, x: &[f64]) -> Result<f64> {
        Ok(self
            .evaluate(x)?
            .into_iter()
            .find(|(j, _)| *j == i)
            .map_or(0.0, |(_, v)| v))
    }

    pub fn sum_at(&self, x: &[f64]) -> Result<f64> {
        Ok(self.evaluate(x)?.iter().map(|(_, v)| v).sum())
    }

    /// `max |∇φ_Q(x)|·d(Q)` over the given points, by central differences
    /// with step `1e-5·d(Q)`.
    pub fn gradient_bound(&self, points: &[Vec<f64>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in points {
            for (i, _) in self.evaluate(x)? {
                let d = self.cubes[i].1;
                let h = 1e-5 * d;
                let mut g2 = 0.0;
                for j in 0..x.len() {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[j] += h;
                    xm[j] -= h;
                    let dj = (self.phi(i, &xp)? - self.phi(i, &xm)?) / (2.0 * h);
                    g2 += dj * dj;
                }
                worst = worst.max(g2.sqrt() * d);
            }
        }
        Ok(worst)
    }

    /// Center and side of cube `i`.
    pub fn cube(&self, i: usize) -> (&[f64], f64) {
        (&self.cubes[i].0, self.cubes[i].1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_geometry() {
        let q = DyadicCube::new(2, vec![-1, 3]);
        assert_eq!(q.side(), 0.25);
        assert_eq!(q.lo(), vec![-0.25, 0.75]);
        assert_eq!(q.center(), vec![-0.125, 0.875]);
        assert_eq!(q.parent(), DyadicCube::new(1, vec![-1, 1]));
        for c in q.children() {
            assert_eq!(c.parent(), q);
        }
        let (lo, hi) = q.star(4);
        assert_eq!(hi[0] - lo[0], 4.0);
        assert!(q.contains(&[-0.1, 1.0]));
    }

    #[test]
    fn alignment() {
        assert_eq!(top_level(&[-8.0], &[8.0]).unwrap(), -3);
        assert_eq!(top_level(&[0.0], &[1.0]).unwrap(), 0);
        assert_eq!(top_level(&[0.0, 0.0], &[1.0, 0.5]).unwrap(), 1);
        assert!(top_level(&[0.0], &[0.1]).is_err());
    }

    #[test]
    fn bump_shape() {
        assert_eq!(plateau_bump(0.3), 1.0);
        assert_eq!(plateau_bump(-1.0), 0.0);
        assert!((plateau_bump(0.75) - 0.5).abs() < 1e-15);
    }
}
