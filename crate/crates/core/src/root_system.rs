//! Root systems, reflection groups, multiplicities and the Dunkl weight.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// Tolerance used when matching roots and group elements.
pub const DEDUP_TOL: f64 = 1e-12;
const ROOT_MATCH_TOL: f64 = 1e-9;
/// Default cap on the size of a generated reflection group.
pub const DEFAULT_GROUP_CAP: usize = 1024;

/// Supported families of normalized root systems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RootFamily {
    /// `{±√2 e_j : j = 1..rank}`, reflection group `Z_2^rank`.
    A1Power { rank: usize },
    /// Dihedral system `I2(m)` in the plane with `2m` roots.
    Dihedral { m: usize },
    /// `A2`, realized in its two-dimensional essential form.
    A2,
}

impl RootFamily {
    /// Resolves a family by name with a single integer parameter.
    pub fn from_name(name: &str, param: usize) -> Result<Self> {
        match name {
            "a1_power" | "A1_power" => Ok(RootFamily::A1Power { rank: param }),
            "dihedral" | "dihedral_I2m" | "i2m" => Ok(RootFamily::Dihedral { m: param }),
            "a2" | "A2" => Ok(RootFamily::A2),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

/// A normalized root system: every root has squared norm 2.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSystem {
    dim: usize,
    roots: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `σ_α(x) = x − 2⟨x,α⟩α/‖α‖²`.
pub fn reflect(alpha: &[f64], x: &[f64]) -> Vec<f64> {
    let c = 2.0 * dot(x, alpha) / dot(alpha, alpha);
    x.iter().zip(alpha).map(|(xi, ai)| xi - c * ai).collect()
}

pub fn build_root_system(family: &RootFamily) -> Result<RootSystem> {
    match *family {
        RootFamily::A1Power { rank } => {
            if rank == 0 {
                return Err(Error::InvalidParameter("A1_power needs rank >= 1".into()));
            }
            let mut roots = Vec::with_capacity(2 * rank);
            for j in 0..rank {
                for s in [1.0, -1.0] {
                    let mut v = vec![0.0; rank];
                    v[j] = s * SQRT_2;
                    roots.push(v);
                }
            }
            RootSystem::new(rank, roots)
        }
        RootFamily::Dihedral { m } => {
            if m < 2 {
                return Err(Error::InvalidParameter("I2(m) needs m >= 2".into()));
            }
            let roots = (0..2 * m)
                .map(|j| {
                    let th = PI * j as f64 / m as f64;
                    vec![SQRT_2 * th.cos(), SQRT_2 * th.sin()]
                })
                .collect();
            RootSystem::new(2, roots)
        }
        RootFamily::A2 => build_root_system(&RootFamily::Dihedral { m: 3 }),
    }
}

impl RootSystem {
    /// Validates and wraps a root list.
    pub fn new(dim: usize, roots: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 || roots.is_empty() {
            return Err(Error::InvalidParameter("empty root system".into()));
        }
        let rs = RootSystem { dim, roots };
        rs.validate()?;
        Ok(rs)
    }

    fn validate(&self) -> Result<()> {
        for a in &self.roots {
            if a.len() != self.dim {
                return Err(Error::InvalidParameter("root of wrong dimension".into()));
            }
            if (dot(a, a) - 2.0).abs() > ROOT_MATCH_TOL {
                return Err(Error::InvalidParameter(format!("root {a:?} is not normalized")));
            }
        }
        for (i, a) in self.roots.iter().enumerate() {
            let neg: Vec<f64> = a.iter().map(|v| -v).collect();
            if self.index_of(&neg).is_none() {
                return Err(Error::InvalidParameter(format!("-{a:?} missing")));
            }
            for (j, b) in self.roots.iter().enumerate() {
                if i != j {
                    let c = dot(a, b) / 2.0;
                    let parallel = (c.abs() - 1.0).abs() < ROOT_MATCH_TOL;
                    if parallel && (c - 1.0).abs() < ROOT_MATCH_TOL {
                        return Err(Error::InvalidParameter("duplicate root".into()));
                    }
                }
                if self.index_of(&reflect(a, b)).is_none() {
                    return Err(Error::InvalidParameter("not closed under reflections".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn roots(&self) -> &[Vec<f64>] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Index of the root equal to `v` (within matching tolerance).
    pub fn index_of(&self, v: &[f64]) -> Option<usize> {
        self.roots
            .iter()
            .position(|r| max_diff(r, v) < ROOT_MATCH_TOL)
    }

    /// One representative of each `±α` pair (the first listed).
    pub fn positive_indices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for (i, a) in self.roots.iter().enumerate() {
            let neg: Vec<f64> = a.iter().map(|v| -v).collect();
            let j = self.index_of(&neg).expect("validated");
            if !out.contains(&j) {
                out.push(i);
            }
        }
        out
    }

    /// Orbits of the roots under the reflections, in order of first appearance.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.roots.len()];
        let mut orbits = Vec::new();
        for start in 0..self.roots.len() {
            if label[start] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            let mut members = vec![start];
            label[start] = id;
            let mut cursor = 0;
            while cursor < members.len() {
                let a = self.roots[members[cursor]].clone();
                cursor += 1;
                for b in &self.roots {
                    let j = self.index_of(&reflect(b, &a)).expect("closed");
                    if label[j] == usize::MAX {
                        label[j] = id;
                        members.push(j);
                    }
                }
            }
            members.sort_unstable();
            orbits.push(members);
        }
        orbits
    }

    /// True when every root is a multiple of a coordinate vector.
    pub fn is_sign_flip(&self) -> bool {
        self.roots
            .iter()
            .all(|a| a.iter().filter(|v| v.abs() > ROOT_MATCH_TOL).count() == 1)
    }
}

/// A nonnegative, group-invariant multiplicity function, stored per root.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplicity {
    values: Vec<f64>,
}

impl Multiplicity {
    pub fn new(roots: &RootSystem, values: Vec<f64>) -> Result<Self> {
        if values.len() != roots.len() {
            return Err(Error::InvalidParameter("one multiplicity per root expected".into()));
        }
        if values.iter().any(|k| !k.is_finite() || *k < 0.0) {
            return Err(Error::InvalidParameter("multiplicity must be finite and >= 0".into()));
        }
        for b in roots.roots() {
            for (i, a) in roots.roots().iter().enumerate() {
                let j = roots.index_of(&reflect(b, a)).expect("closed");
                if (values[i] - values[j]).abs() > 1e-12 {
                    return Err(Error::NonInvariantMultiplicity);
                }
            }
        }
        Ok(Multiplicity { values })
    }

    pub fn uniform(roots: &RootSystem, k: f64) -> Result<Self> {
        Self::new(roots, vec![k; roots.len()])
    }

    /// One value per orbit, orbits ordered as in [`RootSystem::orbits`].
    pub fn per_orbit(roots: &RootSystem, per_orbit: &[f64]) -> Result<Self> {
        let orbits = roots.orbits();
        if per_orbit.len() != orbits.len() {
            return Err(Error::InvalidParameter(format!(
                "system has {} orbits, got {} multiplicities",
                orbits.len(),
                per_orbit.len()
            )));
        }
        let mut values = vec![0.0; roots.len()];
        for (orbit, &k) in orbits.iter().zip(per_orbit) {
            for &i in orbit {
                values[i] = k;
            }
        }
        Self::new(roots, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// The finite reflection group, stored as row-major orthogonal matrices.
#[derive(Clone, Debug)]
pub struct WeylGroup {
    dim: usize,
    elements: Vec<Vec<f64>>,
    generators: Vec<usize>,
}

fn reflection_matrix(alpha: &[f64]) -> Vec<f64> {
    let n = alpha.len();
    let s = 2.0 / dot(alpha, alpha);
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = if i == j { 1.0 } else { 0.0 } - s * alpha[i] * alpha[j];
        }
    }
    m
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

/// Closure of the root reflections under composition.
pub fn generate_group(roots: &RootSystem, cap: usize) -> Result<WeylGroup> {
    let n = roots.dim();
    let generators = roots.positive_indices();
    let gens: Vec<Vec<f64>> = generators
        .iter()
        .map(|&i| reflection_matrix(&roots.roots()[i]))
        .collect();
    let mut identity = vec![0.0; n * n];
    for i in 0..n {
        identity[i * n + i] = 1.0;
    }
    let mut elements = vec![identity];
    let mut cursor = 0;
    while cursor < elements.len() {
        let g = elements[cursor].clone();
        cursor += 1;
        for s in &gens {
            let h = matmul(s, &g, n);
            if !elements.iter().any(|e| max_diff(e, &h) <= DEDUP_TOL) {
                if elements.len() >= cap {
                    return Err(Error::GroupCapExceeded(cap));
                }
                elements.push(h);
            }
        }
    }
    Ok(WeylGroup {
        dim: n,
        elements,
        generators,
    })
}

impl WeylGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Vec<f64>] {
        &self.elements
    }

    /// Root indices of the generating reflections.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn apply(&self, element: usize, x: &[f64]) -> Vec<f64> {
        let m = &self.elements[element];
        (0..self.dim)
            .map(|i| dot(&m[i * self.dim..(i + 1) * self.dim], x))
            .collect()
    }

    /// Index of the element equal to `m` within the dedup tolerance.
    pub fn position(&self, m: &[f64]) -> Option<usize> {
        self.elements.iter().position(|e| max_diff(e, m) <= DEDUP_TOL * 10.0)
    }

    pub fn compose(&self, a: usize, b: usize) -> Vec<f64> {
        matmul(&self.elements[a], &self.elements[b], self.dim)
    }

    /// `d(x,y) = min_σ ‖σx − y‖`.
    pub fn orbit_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.order())
            .map(|g| {
                let gx = self.apply(g, x);
                gx.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }
}

/// `∏_{α∈R} |⟨x,α⟩|^{k(α)}`.
pub fn weight(roots: &RootSystem, k: &Multiplicity, x: &[f64]) -> f64 {
    roots
        .roots()
        .iter()
        .zip(k.values())
        .filter(|(_, &kk)| kk != 0.0)
        .map(|(a, &kk)| dot(x, a).abs().powf(kk))
        .product()
}

/// `N + Σ_α k(α)`.
pub fn homogeneous_dimension(roots: &RootSystem, k: &Multiplicity) -> f64 {
    roots.dim() as f64 + k.values().iter().sum::<f64>()
}

/// A root system with its multiplicity and generated group: the geometric
/// substrate shared by every other module.
#[derive(Clone, Debug)]
pub struct DunklSystem {
    roots: RootSystem,
    multiplicity: Multiplicity,
    group: WeylGroup,
    /// Positive roots with the combined exponent `2k(α)` of `±α`.
    pairs: Vec<(Vec<f64>, f64)>,
}

impl DunklSystem {
    pub fn new(roots: RootSystem, multiplicity: Multiplicity) -> Result<Self> {
        Self::with_cap(roots, multiplicity, DEFAULT_GROUP_CAP)
    }

    pub fn with_cap(roots: RootSystem, multiplicity: Multiplicity, cap: usize) -> Result<Self> {
        let group = generate_group(&roots, cap)?;
        let pairs = roots
            .positive_indices()
            .into_iter()
            .map(|i| (roots.roots()[i].clone(), 2.0 * multiplicity.values()[i]))
            .collect();
        Ok(DunklSystem {
            roots,
            multiplicity,
            group,
            pairs,
        })
    }

    /// Rank-one system with multiplicity `k`.
    pub fn rank1(k: f64) -> Result<Self> {
        Self::a1_power(1, k)
    }

    /// `A1^N` with the same multiplicity on every axis.
    pub fn a1_power(rank: usize, k: f64) -> Result<Self> {
        let r = build_root_system(&RootFamily::A1Power { rank })?;
        let m = Multiplicity::uniform(&r, k)?;
        Self::new(r, m)
    }

    pub fn dim(&self) -> usize {
        self.roots.dim()
    }

    pub fn roots(&self) -> &RootSystem {
        &self.roots
    }

    pub fn multiplicity(&self) -> &Multiplicity {
        &self.multiplicity
    }

    pub fn group(&self) -> &WeylGroup {
        &self.group
    }

    /// Positive roots paired with `2k(α)`.
    pub fn positive_pairs(&self) -> &[(Vec<f64>, f64)] {
        &self.pairs
    }

    pub fn weight(&self, x: &[f64]) -> f64 {
        let mut w = 1.0;
        for (a, e) in &self.pairs {
            if *e != 0.0 {
                w *= dot(x, a).abs().powf(*e);
            }
        }
        w
    }

    pub fn homogeneous_dimension(&self) -> f64 {
        homogeneous_dimension(&self.roots, &self.multiplicity)
    }

    pub fn orbit_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        self.group.orbit_distance(x, y)
    }

    /// Per-axis multiplicities `k_j` for sign-flip systems, `None` otherwise.
    pub fn axis_multiplicities(&self) -> Option<Vec<f64>> {
        if !self.roots.is_sign_flip() {
            return None;
        }
        let mut ks = vec![0.0; self.dim()];
        for (a, e) in &self.pairs {
            let j = a.iter().position(|v| v.abs() > 0.5).expect("axis root");
            ks[j] = e / 2.0;
        }
        Some(ks)
    }

    /// `r^N ∏_α (|⟨x,α⟩| + r)^{k(α)}`, the comparison profile for ball volumes.
    pub fn volume_profile(&self, x: &[f64], r: f64) -> f64 {
        let mut v = r.powi(self.dim() as i32);
        for (a, e) in &self.pairs {
            if *e != 0.0 {
                v *= (dot(x, a).abs() + r).powf(*e);
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn a1_power_roots() {
        let r = build_root_system(&RootFamily::A1Power { rank: 1 }).unwrap();
        assert_eq!(r.roots(), &[vec![SQRT_2], vec![-SQRT_2]]);
        let r2 = build_root_system(&RootFamily::A1Power { rank: 2 }).unwrap();
        assert_eq!(r2.len(), 4);
        assert!(r2.is_sign_flip());
    }

    #[test]
    fn group_orders() {
        for (fam, order) in [
            (RootFamily::A1Power { rank: 1 }, 2),
            (RootFamily::A1Power { rank: 2 }, 4),
            (RootFamily::A1Power { rank: 3 }, 8),
            (RootFamily::A2, 6),
            (RootFamily::Dihedral { m: 4 }, 8),
            (RootFamily::Dihedral { m: 5 }, 10),
        ] {
            let r = build_root_system(&fam).unwrap();
            assert_eq!(generate_group(&r, 1024).unwrap().order(), order, "{fam:?}");
        }
    }

    #[test]
    fn cap_and_bad_params() {
        let r = build_root_system(&RootFamily::Dihedral { m: 6 }).unwrap();
        assert_eq!(generate_group(&r, 5).unwrap_err(), Error::GroupCapExceeded(5));
        assert!(build_root_system(&RootFamily::Dihedral { m: 1 }).is_err());
        assert!(build_root_system(&RootFamily::A1Power { rank: 0 }).is_err());
        assert!(matches!(
            RootFamily::from_name("E8", 0),
            Err(Error::UnknownFamily(_))
        ));
        assert!(RootSystem::new(1, vec![vec![1.0], vec![-1.0]]).is_err());
        assert!(RootSystem::new(1, vec![vec![SQRT_2]]).is_err());
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(reflect(&[SQRT_2], &[3.0]), vec![-3.0]);
        let y = reflect(&[SQRT_2, 0.0], &[1.0, 2.0]);
        assert_relative_eq!(y[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(y[1], 2.0, epsilon = 1e-15);
        let a = [1.0, 1.0];
        let fixed = reflect(&a, &[2.0, -2.0]);
        assert_relative_eq!(fixed[0], 2.0, epsilon = 1e-15);
        assert_relative_eq!(fixed[1], -2.0, epsilon = 1e-15);
    }

    #[test]
    fn weight_and_dimension_examples() {
        let s = DunklSystem::rank1(1.0).unwrap();
        assert_relative_eq!(s.weight(&[2.0]), 8.0, epsilon = 1e-12);
        assert_relative_eq!(s.homogeneous_dimension(), 3.0);
        let s2 = DunklSystem::a1_power(2, 1.0).unwrap();
        assert_relative_eq!(s2.weight(&[1.0, 2.0]), 16.0, epsilon = 1e-12);
        assert_relative_eq!(s2.homogeneous_dimension(), 6.0);
        let r = s2.roots().clone();
        let k = s2.multiplicity().clone();
        assert_relative_eq!(weight(&r, &k, &[1.0, 2.0]), 16.0, epsilon = 1e-12);
        assert_eq!(s2.weight(&[0.0, 2.0]), 0.0);
        let s0 = DunklSystem::a1_power(2, 0.0).unwrap();
        assert_eq!(s0.weight(&[0.3, -7.0]), 1.0);
        assert_eq!(s0.homogeneous_dimension(), 2.0);
    }

    #[test]
    fn orbit_distance_examples() {
        let s = DunklSystem::a1_power(2, 0.5).unwrap();
        assert_eq!(s.orbit_distance(&[1.0, 2.0], &[-1.0, 2.0]), 0.0);
        assert_relative_eq!(s.orbit_distance(&[1.0, 0.0], &[2.0, 0.0]), 1.0);
    }

    #[test]
    fn multiplicity_validation() {
        let r = build_root_system(&RootFamily::Dihedral { m: 4 }).unwrap();
        assert_eq!(r.orbits().len(), 2);
        assert!(Multiplicity::per_orbit(&r, &[0.5, 2.0]).is_ok());
        let mut v = vec![1.0; 8];
        v[0] = 2.0;
        assert_eq!(Multiplicity::new(&r, v).unwrap_err(), Error::NonInvariantMultiplicity);
        assert!(Multiplicity::uniform(&r, -1.0).is_err());
        let a2 = build_root_system(&RootFamily::A2).unwrap();
        assert_eq!(a2.orbits().len(), 1);
    }

    #[test]
    fn axis_multiplicities_for_products() {
        let r = build_root_system(&RootFamily::A1Power { rank: 2 }).unwrap();
        let k = Multiplicity::per_orbit(&r, &[0.5, 2.0]).unwrap();
        let s = DunklSystem::new(r, k).unwrap();
        assert_eq!(s.axis_multiplicities(), Some(vec![0.5, 2.0]));
        let d = DunklSystem::new(
            build_root_system(&RootFamily::A2).unwrap(),
            Multiplicity::uniform(&build_root_system(&RootFamily::A2).unwrap(), 1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(d.axis_multiplicities(), None);
    }
}
