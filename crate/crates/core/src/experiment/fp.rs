//! Fefferman–Phong ratio scans and the ground-state comparison.

use super::config::{ExperimentConfig, Setup};
use super::{num, ExperimentReport, Table};
use crate::error::{Error, Result};
use crate::spectral::{converged_spectrum, spectrum_at, DiscreteOperatorPair, EigenRequest, SpectrumResult};

/// Slack on `sup ≤ 1` for constant potentials, covering the rounding of `m`.
const CONSTANT_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
enum Member {
    Gaussian { center: Vec<f64>, sigma: f64 },
    Eigen(usize),
}

impl Member {
    fn label(&self) -> (String, String, String) {
        match self {
            Member::Gaussian { center, sigma } => (
                "gaussian".into(),
                center.iter().map(|c| num(*c)).collect::<Vec<_>>().join(" "),
                num(*sigma),
            ),
            Member::Eigen(i) => ("eigenvector".into(), i.to_string(), String::new()),
        }
    }
}

fn linspace(range: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| -range + 2.0 * range * i as f64 / (n - 1) as f64).collect(),
    }
}

fn family(dim: usize, centers: usize, range: f64, scales: &[f64], eigen: usize) -> Vec<Member> {
    let axis = linspace(range, centers);
    let total = axis.len().pow(dim as u32);
    let mut out = Vec::with_capacity(total * scales.len() + eigen);
    for c in 0..total {
        let mut rem = c;
        let center: Vec<f64> = (0..dim)
            .map(|_| {
                let i = rem % axis.len();
                rem /= axis.len();
                axis[i]
            })
            .collect();
        for &sigma in scales {
            out.push(Member::Gaussian {
                center: center.clone(),
                sigma,
            });
        }
    }
    out.extend((0..eigen).map(Member::Eigen));
    out
}

/// Result of [`run_fp`].
#[derive(Clone, Debug, PartialEq)]
pub struct FpSummary {
    pub sup: f64,
    pub sup_doubled: f64,
    /// `sup_doubled / sup - 1`.
    pub growth: f64,
    pub family_size: usize,
    pub doubled_size: usize,
    /// Constant value of `V`, if any.
    pub constant: Option<f64>,
}

/// `m` at every grid node, evaluated on the positive orthant and mirrored.
pub fn m_on_grid(setup: &Setup, pair: &DiscreteOperatorPair) -> Result<Vec<f64>> {
    let grid = pair.grid();
    let orth: Vec<Vec<f64>> = (0..grid.orthant_len()).map(|p| grid.coords(grid.orthant_node(p))).collect();
    let m = setup.aux.m_many(&orth)?;
    Ok((0..grid.len()).map(|idx| m[grid.to_orthant(idx).0]).collect())
}

fn member_ratio(member: &Member, pair: &DiscreteOperatorPair, spec: &SpectrumResult, m: &[f64]) -> Result<f64> {
    let f: Vec<f64> = match member {
        Member::Gaussian { center, sigma } => {
            let grid = pair.grid();
            (0..grid.len())
                .map(|idx| {
                    let x = grid.coords(idx);
                    let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                    (-d2 / (2.0 * sigma * sigma)).exp()
                })
                .collect()
        }
        Member::Eigen(i) => spec.lift(pair, *i).ok_or(Error::SpectrumTruncated(spec.converged_below))?,
    };
    pair.fp_ratio(m, &f)
}

pub fn run_fp(setup: &Setup, cfg: &ExperimentConfig) -> Result<(ExperimentReport, FpSummary)> {
    let fp = &cfg.fp;
    let sp = &cfg.spectral.spec;
    let mut report = ExperimentReport::new("fp");
    let dim = setup.system.dim();
    let eigen2 = 2 * fp.eigenvectors;
    let (pair, spec) = spectrum_at(
        &setup.system,
        &setup.potential,
        sp.h,
        sp.half_width,
        EigenRequest::Count(eigen2),
        true,
        setup.exec,
    )?;
    let m = m_on_grid(setup, &pair)?;
    let base = family(dim, fp.centers, fp.center_range, &fp.scales, fp.eigenvectors.min(spec.len()));
    let doubled_centers = if fp.centers > 1 { 2 * fp.centers - 1 } else { fp.centers };
    let doubled = family(dim, doubled_centers, fp.center_range, &fp.scales, eigen2.min(spec.len()));
    let ratios = setup.exec.try_map(&doubled, |mem| member_ratio(mem, &pair, &spec, &m))?;

    let mut table = Table::new("fp_family", &["member", "kind", "center", "sigma", "ratio", "in_base"]);
    let mut sup: f64 = 0.0;
    let mut sup_doubled: f64 = 0.0;
    for (i, (mem, &r)) in doubled.iter().zip(&ratios).enumerate() {
        let in_base = base.contains(mem);
        if in_base {
            sup = sup.max(r);
        }
        sup_doubled = sup_doubled.max(r);
        let (kind, center, sigma) = mem.label();
        table.push(vec![i.to_string(), kind, center, sigma, num(r), in_base.to_string()]);
    }
    let growth = sup_doubled / sup - 1.0;
    let summary = FpSummary {
        sup,
        sup_doubled,
        growth,
        family_size: base.len(),
        doubled_size: doubled.len(),
        constant: setup.potential.constant_value(),
    };

    report.note("potential", setup.potential.spec().label());
    let ks: Vec<f64> = setup.system.positive_pairs().iter().map(|p| 0.5 * p.1).collect();
    report.note("k", super::join(&ks));
    report.note("grid_nodes", pair.grid().len());
    report.note("family_size", summary.family_size);
    report.note("doubled_size", summary.doubled_size);
    report.note("sup", num(sup));
    report.note("sup_doubled", num(sup_doubled));
    report.note("growth", num(growth));
    report.check(
        "supremum stable under family doubling",
        growth.is_finite() && growth < fp.max_growth,
        format!("{} -> {} (growth {})", num(sup), num(sup_doubled), num(growth)),
    );
    if let Some(c) = summary.constant {
        report.check(
            "constant potential: sup ≤ 1",
            sup_doubled <= 1.0 + CONSTANT_SLACK,
            format!("V ≡ {} sup {}", num(c), num(sup_doubled)),
        );
    }
    report.tables.push(table);
    Ok((report, summary))
}

/// Result of [`run_groundstate`].
#[derive(Clone, Debug, PartialEq)]
pub struct GroundStateSummary {
    pub lambda0: f64,
    pub min_m: f64,
    pub argmin: Vec<f64>,
    pub c_fp: f64,
    /// `λ₀ / min m`.
    pub ratio_linear: f64,
    /// `λ₀ / (min m)²`.
    pub ratio_square: f64,
}

/// Compares `λ₀` with `min m`; `Ĉ_FP` comes from the config or a fresh
/// [`run_fp`].
pub fn run_groundstate(setup: &Setup, cfg: &ExperimentConfig) -> Result<(ExperimentReport, GroundStateSummary)> {
    let g = &cfg.groundstate;
    let mut report = ExperimentReport::new("groundstate");
    let conv = converged_spectrum(&setup.system, &setup.potential, &cfg.spectral.spec, EigenRequest::Count(1), setup.exec)?;
    let lambda0 = *conv.eigenvalues.first().ok_or(Error::SpectrumTruncated(f64::NEG_INFINITY))?;
    let (argmin, min_m) = setup.aux.min_m(g.search_half_width, g.points_per_axis)?;
    let c_fp = match g.c_fp {
        Some(c) => c,
        None => {
            let (fp_report, fp) = run_fp(setup, cfg)?;
            report.merge(fp_report);
            fp.sup_doubled
        }
    };
    let summary = GroundStateSummary {
        lambda0,
        min_m,
        argmin: argmin.clone(),
        c_fp,
        ratio_linear: lambda0 / min_m,
        ratio_square: lambda0 / (min_m * min_m),
    };
    let mut table = Table::new("groundstate", &["lambda0", "min_m", "argmin", "c_fp", "lambda0_over_min_m", "lambda0_over_min_m_sq"]);
    table.push(vec![
        num(lambda0),
        num(min_m),
        argmin.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" "),
        num(c_fp),
        num(summary.ratio_linear),
        num(summary.ratio_square),
    ]);
    report.note("lambda0", num(lambda0));
    report.note("lambda0_change", num(conv.max_change()));
    report.note("min_m", num(min_m));
    report.note("c_fp", num(c_fp));
    report.note("lambda0_over_min_m", num(summary.ratio_linear));
    report.note("lambda0_over_min_m_sq", num(summary.ratio_square));
    report.check("ground state converged", conv.all_converged(), num(conv.max_change()));
    report.check(
        "(min m)² ≤ C_FP λ₀",
        min_m * min_m <= c_fp * lambda0,
        format!("{} ≤ {}", num(min_m * min_m), num(c_fp * lambda0)),
    );
    report.tables.push(table);
    Ok((report, summary))
}
