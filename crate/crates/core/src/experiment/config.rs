use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

use crate::bounds::{BumpProfile, HeatLattice, TripleSampling};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::landscape::AuxFunction;
use crate::measure::{QuadratureSpec, WeightedMeasure};
use crate::potential::{Potential, PotentialSpec};
use crate::root_system::{build_root_system, DunklSystem, Multiplicity, RootFamily};
use crate::spectral::SpectralSpec;

/// Experiments selectable from a config or the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Measure,
    AuxM,
    Decompose,
    Spectrum,
    Sandwich,
    Fp,
    Groundstate,
    Bumps,
    Bounds,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Measure,
        ExperimentKind::AuxM,
        ExperimentKind::Decompose,
        ExperimentKind::Spectrum,
        ExperimentKind::Sandwich,
        ExperimentKind::Fp,
        ExperimentKind::Groundstate,
        ExperimentKind::Bumps,
        ExperimentKind::Bounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Measure => "measure",
            ExperimentKind::AuxM => "aux-m",
            ExperimentKind::Decompose => "decompose",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Sandwich => "sandwich",
            ExperimentKind::Fp => "fp",
            ExperimentKind::Groundstate => "groundstate",
            ExperimentKind::Bumps => "bumps",
            ExperimentKind::Bounds => "bounds",
        }
    }
}

/// Root system and multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemBlock {
    /// `a1_power`, `dihedral` or `a2`.
    pub family: String,
    /// Rank for `a1_power`, `m` for `dihedral`.
    pub n: usize,
    /// Uniform multiplicity.
    pub k: f64,
    /// Per-orbit multiplicities, overriding `k`.
    pub k_orbits: Option<Vec<f64>>,
}

impl Default for SystemBlock {
    fn default() -> Self {
        SystemBlock {
            family: "a1_power".into(),
            n: 1,
            k: 0.0,
            k_orbits: None,
        }
    }
}

impl SystemBlock {
    pub fn build(&self) -> Result<DunklSystem> {
        let roots = build_root_system(&RootFamily::from_name(&self.family, self.n)?)?;
        let mult = match &self.k_orbits {
            Some(per) => Multiplicity::per_orbit(&roots, per)?,
            None => Multiplicity::uniform(&roots, self.k)?,
        };
        DunklSystem::new(roots, mult)
    }
}

/// Potential family plus the claimed reverse-Hölder exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialBlock {
    #[serde(flatten)]
    pub spec: PotentialSpec,
    /// Defaults to `max(2, 𝐍/2 + 1)`.
    #[serde(default)]
    pub q: Option<f64>,
}

impl Default for PotentialBlock {
    fn default() -> Self {
        PotentialBlock {
            spec: PotentialSpec::Power {
                coefficient: 1.0,
                exponent: 2.0,
            },
            q: None,
        }
    }
}

/// Discretization, convergence and the λ grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralBlock {
    #[serde(flatten)]
    pub spec: SpectralSpec,
    /// Defaults to `4λ₀`.
    pub lambda_min: Option<f64>,
    pub lambda_max: f64,
    pub lambda_points: usize,
    /// `spectrum` solves for this many eigenvalues instead of all below `lambda_max`.
    pub eigenvalues: Option<usize>,
}

impl Default for SpectralBlock {
    fn default() -> Self {
        SpectralBlock {
            spec: SpectralSpec::default(),
            lambda_min: None,
            lambda_max: 200.0,
            lambda_points: 24,
            eigenvalues: None,
        }
    }
}

/// Quadrature tolerances and the bisection tolerance of `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureBlock {
    #[serde(flatten)]
    pub spec: QuadratureSpec,
    pub m_tolerance: f64,
}

impl Default for QuadratureBlock {
    fn default() -> Self {
        QuadratureBlock {
            spec: QuadratureSpec::default(),
            m_tolerance: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureBlock {
    /// Ball centers; defaults to `t·e₁` for `t ∈ {0, 1, 3}`.
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
}

impl Default for MeasureBlock {
    fn default() -> Self {
        MeasureBlock {
            centers: Vec::new(),
            radii: vec![0.25, 0.5, 1.0, 2.0, 4.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuxBlock {
    pub half_width: f64,
    pub points_per_axis: usize,
    /// Scales of the covariance check `m_{V_s}(x) = s·m_V(sx)`.
    pub scales: Vec<f64>,
}

impl Default for AuxBlock {
    fn default() -> Self {
        AuxBlock {
            half_width: 4.0,
            points_per_axis: 17,
            scales: vec![0.5, 2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeBlock {
    /// The region is `[-half_width, half_width]^N`, doubled for the drift check.
    pub half_width: f64,
    pub depth_cap: usize,
    /// Random points per cube in the `m·d(Q)` band.
    pub extra_points: usize,
    pub max_drift: f64,
    /// Largest accepted side ratio between cubes whose `Q****` meet.
    pub neighbor_limit: f64,
}

impl Default for DecomposeBlock {
    fn default() -> Self {
        DecomposeBlock {
            half_width: 16.0,
            depth_cap: 40,
            extra_points: 4,
            max_drift: 0.1,
            neighbor_limit: 16.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SandwichBlock {
    /// Largest accepted `max(N/M)/min(N/M)` over the λ grid.
    pub band_limit: f64,
    /// Largest accepted relative change of the fitted constants.
    pub max_change: f64,
}

impl Default for SandwichBlock {
    fn default() -> Self {
        SandwichBlock {
            band_limit: 4.0,
            max_change: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FpBlock {
    /// Gaussian centers per axis, evenly spaced on `[-center_range, center_range]`.
    pub centers: usize,
    pub center_range: f64,
    pub scales: Vec<f64>,
    /// Lowest discrete eigenvectors added to the family.
    pub eigenvectors: usize,
    /// Largest accepted growth of the supremum when the family doubles.
    pub max_growth: f64,
}

impl Default for FpBlock {
    fn default() -> Self {
        FpBlock {
            centers: 9,
            center_range: 4.0,
            scales: vec![0.25, 0.5, 1.0, 2.0],
            eigenvectors: 20,
            max_growth: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundBlock {
    /// `min m` is searched on `[-half_width, half_width]^N`.
    pub search_half_width: f64,
    pub points_per_axis: usize,
    /// Fefferman–Phong constant; computed by the `fp` experiment when absent.
    pub c_fp: Option<f64>,
}

impl Default for GroundBlock {
    fn default() -> Self {
        GroundBlock {
            search_half_width: 4.0,
            points_per_axis: 41,
            c_fp: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BumpsBlock {
    pub lambda: f64,
    /// Cube side is `ε λ^{-1/2}`.
    pub epsilon: f64,
    /// Certification constant; defaults to twice the kinetic quotient of the
    /// reference bump plus one.
    pub c_hat: Option<f64>,
    /// Grid nodes per cube side.
    pub subdivisions: usize,
    /// Search region when `E_λ` is unbounded.
    pub region_half_width: f64,
    pub profile: BumpProfile,
}

impl Default for BumpsBlock {
    fn default() -> Self {
        BumpsBlock {
            lambda: 100.0,
            epsilon: 0.25,
            c_hat: None,
            subdivisions: 16,
            region_half_width: 1.0,
            profile: BumpProfile::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsBlock {
    pub sampling: TripleSampling,
    /// Check drift against a batch of twice the configured size.
    pub doubling: bool,
    pub lattice: HeatLattice,
    /// Candidate exponents `ĉ` of the Gaussian factor, ascending.
    pub c_grid: Vec<f64>,
    pub max_drift: f64,
    pub heat_times: Vec<f64>,
    pub heat_points: Vec<f64>,
    pub normalization_tol: f64,
    pub symmetry_tol: f64,
    pub vanish_tol: f64,
    pub classical_tol: f64,
    pub mollifier_xis: Vec<f64>,
    pub profile: BumpProfile,
}

impl Default for BoundsBlock {
    fn default() -> Self {
        BoundsBlock {
            sampling: TripleSampling::default(),
            doubling: true,
            lattice: HeatLattice::default(),
            c_grid: (0..25).map(|i| 0.01 * i as f64).collect(),
            max_drift: 0.1,
            heat_times: vec![0.25, 1.0, 4.0],
            heat_points: vec![0.0, 1.0, 3.0],
            normalization_tol: 1e-3,
            symmetry_tol: 1e-6,
            vanish_tol: 1e-8,
            classical_tol: 0.05,
            mollifier_xis: (1..=20).map(|i| 0.05 * i as f64).collect(),
            profile: BumpProfile::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: String,
    pub svg: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            dir: "out".into(),
            svg: true,
        }
    }
}

/// A complete experiment description, read from TOML.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiments run by `report`.
    pub experiments: Vec<ExperimentKind>,
    pub seed: u64,
    pub system: SystemBlock,
    pub potential: PotentialBlock,
    pub spectral: SpectralBlock,
    pub quadrature: QuadratureBlock,
    pub measure: MeasureBlock,
    pub aux: AuxBlock,
    pub decompose: DecomposeBlock,
    pub sandwich: SandwichBlock,
    pub fp: FpBlock,
    pub groundstate: GroundBlock,
    pub bumps: BumpsBlock,
    pub bounds: BoundsBlock,
    pub output: OutputBlock,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        self.spectral.spec.validate()?;
        self.quadrature.spec.validate()?;
        let sp = &self.spectral;
        if !(sp.lambda_max > 0.0) || sp.lambda_min.is_some_and(|l| !(l > 0.0 && l <= sp.lambda_max)) {
            return bad("spectral: need 0 < lambda_min ≤ lambda_max");
        }
        if !(self.quadrature.m_tolerance > 0.0 && self.quadrature.m_tolerance < 0.1) {
            return bad("quadrature: m_tolerance must lie in (0, 0.1)");
        }
        if !(self.bumps.epsilon > 0.0 && self.bumps.epsilon < 1.0) || !(self.bumps.lambda > 0.0) {
            return bad("bumps: need 0 < epsilon < 1 and lambda > 0");
        }
        if self.bumps.subdivisions < 2 {
            return bad("bumps: subdivisions must be at least 2");
        }
        if self.fp.scales.iter().any(|s| !(*s > 0.0)) || self.fp.centers == 0 {
            return bad("fp: scales must be positive and centers ≥ 1");
        }
        if self.bounds.c_grid.windows(2).any(|w| w[0] >= w[1]) || self.bounds.c_grid.is_empty() {
            return bad("bounds: c_grid must be nonempty and ascending");
        }
        if self.bounds.sampling.scales.is_empty() || self.bounds.sampling.scales.iter().any(|s| !(*s > 0.0)) {
            return bad("bounds: sampling scales must be positive");
        }
        Ok(())
    }

    pub fn setup(&self, exec: Execution) -> Result<Setup> {
        let system = Arc::new(self.system.build()?);
        let potential = Arc::new(match self.potential.q {
            Some(q) => Potential::new(self.potential.spec.clone(), q, &system)?,
            None => Potential::with_default_q(self.potential.spec.clone(), &system)?,
        });
        let measure = Arc::new(WeightedMeasure::new(system.clone(), self.quadrature.spec)?);
        let aux = Arc::new(
            AuxFunction::new(potential.clone(), measure.clone())?
                .with_execution(exec)
                .with_tolerance(self.quadrature.m_tolerance),
        );
        Ok(Setup {
            system,
            potential,
            measure,
            aux,
            exec,
        })
    }
}

/// Shared objects built from a config; `m` values are memoized in `aux`.
#[derive(Clone, Debug)]
pub struct Setup {
    pub system: Arc<DunklSystem>,
    pub potential: Arc<Potential>,
    pub measure: Arc<WeightedMeasure>,
    pub aux: Arc<AuxFunction>,
    pub exec: Execution,
}

impl Setup {
    /// The same system with potential `V_s(y) = s² V(s y)`.
    pub fn scaled(&self, s: f64) -> Result<Setup> {
        let potential = Arc::new(self.potential.scaled(s));
        let aux = Arc::new(
            AuxFunction::new(potential.clone(), self.measure.clone())?
                .with_execution(self.exec)
                .with_tolerance(self.aux.tolerance()),
        );
        Ok(Setup {
            potential,
            aux,
            ..self.clone()
        })
    }
}
