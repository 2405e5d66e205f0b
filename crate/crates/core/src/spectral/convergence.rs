use serde::{Deserialize, Serialize};

use super::eigen::{eigensolve, EigenRequest, SpectrumResult};
use super::grid::SymmetricGrid;
use super::operator::{assemble, DiscreteOperatorPair};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::potential::Potential;
use crate::root_system::DunklSystem;

/// Discretization and convergence settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralSpec {
    pub h: f64,
    pub half_width: f64,
    /// Box growth of the convergence check.
    pub box_growth: f64,
    /// Extrapolate `(4λ(h/2) - λ(h))/3` on the base box.
    pub richardson: bool,
    /// Largest relative change accepted between `(h, R)` and `(h/2, R + growth)`.
    pub tolerance: f64,
    /// Threshold requests solve up to `λ_max·(1 + margin)` on the base grid.
    pub margin: f64,
}

impl Default for SpectralSpec {
    fn default() -> Self {
        SpectralSpec {
            h: 0.02,
            half_width: 12.0,
            box_growth: 4.0,
            richardson: true,
            tolerance: 0.005,
            margin: 0.1,
        }
    }
}

impl SpectralSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !(self.half_width > 0.0) || !(self.box_growth >= 0.0) {
            return Err(Error::Config("spectral: need h > 0, half_width > 0, box_growth ≥ 0".into()));
        }
        if !(self.tolerance > 0.0) || !(self.margin >= 0.0) {
            return Err(Error::Config("spectral: need tolerance > 0 and margin ≥ 0".into()));
        }
        Ok(())
    }
}

/// Assembles and solves on one grid.
pub fn spectrum_at(
    system: &DunklSystem,
    potential: &Potential,
    h: f64,
    half_width: f64,
    req: EigenRequest,
    keep_vectors: bool,
    exec: Execution,
) -> Result<(DiscreteOperatorPair, SpectrumResult)> {
    let grid = SymmetricGrid::new(system.dim(), half_width, h)?;
    let pair = assemble(&grid, system, potential, exec)?;
    let spec = eigensolve(&pair, req, keep_vectors, exec)?;
    Ok((pair, spec))
}

/// Spectra on `(h, R)`, `(h/2, R)` and `(h/2, R + growth)` with the
/// extrapolated estimate and per-index convergence flags.
#[derive(Clone, Debug)]
pub struct ConvergedSpectrum {
    pub base: SpectrumResult,
    pub halved: SpectrumResult,
    pub check: SpectrumResult,
    /// Best estimate per index.
    pub eigenvalues: Vec<f64>,
    /// `|λ(h/2, R + growth) - λ(h, R)| / λ(h, R)`.
    pub changes: Vec<f64>,
    pub tolerance: f64,
    /// Every eigenvalue `≤ converged_below` is listed in `eigenvalues`.
    pub converged_below: f64,
}

impl ConvergedSpectrum {
    pub fn converged(&self, i: usize) -> bool {
        self.changes.get(i).is_some_and(|c| *c < self.tolerance)
    }

    pub fn all_converged(&self) -> bool {
        (0..self.changes.len()).all(|i| self.converged(i))
    }

    pub fn max_change(&self) -> f64 {
        self.changes.iter().fold(0.0, |m, c| m.max(*c))
    }

    pub fn max_residual(&self) -> f64 {
        self.base.max_residual().max(self.halved.max_residual()).max(self.check.max_residual())
    }

    /// `N(L, λ)` from the best estimates.
    pub fn counting_n(&self, lambda: f64) -> Result<usize> {
        if lambda > self.converged_below {
            return Err(Error::SpectrumTruncated(self.converged_below));
        }
        Ok(self.eigenvalues.iter().filter(|v| **v <= lambda).count())
    }

    /// `(index, best, base, halved, check, change)` rows.
    pub fn rows(&self) -> Vec<(usize, f64, f64, f64, f64, f64)> {
        (0..self.eigenvalues.len())
            .map(|i| {
                (
                    i,
                    self.eigenvalues[i],
                    self.base.eigenvalues[i],
                    self.halved.eigenvalues[i],
                    self.check.eigenvalues[i],
                    self.changes[i],
                )
            })
            .collect()
    }
}

/// Runs the two-parameter convergence protocol.
pub fn converged_spectrum(
    system: &DunklSystem,
    potential: &Potential,
    spec: &SpectralSpec,
    req: EigenRequest,
    exec: Execution,
) -> Result<ConvergedSpectrum> {
    spec.validate()?;
    let base_req = match req {
        EigenRequest::Below(l) => EigenRequest::Below(l * (1.0 + spec.margin)),
        r => r,
    };
    let (_, base) = spectrum_at(system, potential, spec.h, spec.half_width, base_req, false, exec)?;
    let m = base.len();
    if m == 0 {
        let below = match req {
            EigenRequest::Below(l) => l,
            EigenRequest::Count(_) => f64::NEG_INFINITY,
        };
        return Ok(ConvergedSpectrum {
            halved: base.clone(),
            check: base.clone(),
            base,
            eigenvalues: Vec::new(),
            changes: Vec::new(),
            tolerance: spec.tolerance,
            converged_below: below,
        });
    }
    let (_, halved) = spectrum_at(system, potential, 0.5 * spec.h, spec.half_width, EigenRequest::Count(m), false, exec)?;
    let (_, check) = spectrum_at(
        system,
        potential,
        0.5 * spec.h,
        spec.half_width + spec.box_growth,
        EigenRequest::Count(m),
        false,
        exec,
    )?;
    let m = m.min(halved.len()).min(check.len());
    let eigenvalues: Vec<f64> = (0..m)
        .map(|i| {
            if spec.richardson {
                (4.0 * halved.eigenvalues[i] - base.eigenvalues[i]) / 3.0
            } else {
                check.eigenvalues[i]
            }
        })
        .collect();
    let changes: Vec<f64> = (0..m)
        .map(|i| (check.eigenvalues[i] - base.eigenvalues[i]).abs() / base.eigenvalues[i].abs().max(f64::MIN_POSITIVE))
        .collect();
    let shift = (0..m)
        .map(|i| (eigenvalues[i] - base.eigenvalues[i]).abs() / base.eigenvalues[i].abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let converged_below = match req {
        // the base solve listed everything up to λ(1 + margin)
        EigenRequest::Below(l) if shift < spec.margin => l,
        EigenRequest::Below(_) => eigenvalues[m - 1].min(base.converged_below / (1.0 + shift)),
        EigenRequest::Count(_) => eigenvalues[m - 1],
    };
    Ok(ConvergedSpectrum {
        base,
        halved,
        check,
        eigenvalues,
        changes,
        tolerance: spec.tolerance,
        converged_below,
    })
}
