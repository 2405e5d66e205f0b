//! Measure, `m`, decomposition and spectrum experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, Setup};
use super::{join, num, ExperimentReport, Plot, Table};
use crate::dyadic::stopping_decomposition;
use crate::error::Result;
use crate::potential::PotentialSpec;
use crate::spectral::{converged_spectrum, EigenRequest};

fn lattice(dim: usize, half: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let n = per_axis.max(2);
    (0..n.pow(dim as u32))
        .map(|c| {
            let mut rem = c;
            let mut x = vec![0.0; dim];
            for slot in x.iter_mut().rev() {
                *slot = -half + 2.0 * half * (rem % n) as f64 / (n - 1) as f64;
                rem /= n;
            }
            x
        })
        .collect()
}

/// Ball volumes against the comparison profile and the constant `c_k`.
pub fn run_measure(setup: &Setup, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let dim = setup.system.dim();
    let centers: Vec<Vec<f64>> = if cfg.measure.centers.is_empty() {
        [0.0, 1.0, 3.0]
            .iter()
            .map(|t| (0..dim).map(|j| if j == 0 { *t } else { 0.0 }).collect())
            .collect()
    } else {
        cfg.measure.centers.clone()
    };
    let mut radii = cfg.measure.radii.clone();
    radii.sort_by(f64::total_cmp);
    let jobs: Vec<(Vec<f64>, f64)> = centers.iter().flat_map(|c| radii.iter().map(move |r| (c.clone(), *r))).collect();
    let vols = setup.exec.try_map(&jobs, |(c, r)| setup.measure.ball_volume_fresh(c, *r))?;
    let mut table = Table::new("measure", &["center", "r", "volume", "profile", "volume_over_profile"]);
    let mut ratios = Vec::new();
    for ((c, r), v) in jobs.iter().zip(&vols) {
        let p = setup.system.volume_profile(c, *r);
        ratios.push(v / p);
        table.push(vec![join(c), num(*r), num(*v), num(p), num(v / p)]);
    }
    let ck = setup.measure.ck_constant()?;
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let mut report = ExperimentReport::new("measure");
    report.note("homogeneous_dimension", num(setup.system.homogeneous_dimension()));
    report.note("ck", num(ck));
    report.note("profile_ratio_min", num(lo));
    report.note("profile_ratio_max", num(hi));
    let increasing = vols.chunks(radii.len()).all(|c| c.windows(2).all(|w| w[0] < w[1]));
    report.check("volume increasing in r", increasing, "");
    report.check(
        "volume comparable to the profile",
        lo > 0.0 && hi.is_finite(),
        format!("[{}, {}]", num(lo), num(hi)),
    );
    report.tables.push(table);
    Ok(report)
}

/// `m(0)` in closed form for `c|x|^p`: `(c𝐍/(𝐍 + p))^{1/(2+p)}`.
pub fn power_m_origin(coefficient: f64, exponent: f64, homogeneous_dimension: f64) -> f64 {
    let d = homogeneous_dimension;
    (coefficient * d / (d + exponent)).powf(1.0 / (2.0 + exponent))
}

/// `m` on a lattice, with the closed forms and the scaling rule checked.
pub fn run_aux_m(setup: &Setup, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let a = &cfg.aux;
    let dim = setup.system.dim();
    let tol = setup.aux.tolerance();
    let pts = lattice(dim, a.half_width, a.points_per_axis);
    let ms = setup.aux.m_many(&pts)?;
    let mut report = ExperimentReport::new("aux-m");
    let mut header = vec!["x".to_string(), "m".to_string()];
    header.extend(a.scales.iter().map(|s| format!("m_scaled_{}", num(*s))));
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut table = Table::new("aux_m", &header_refs);

    let mut scaled_cols = Vec::new();
    let mut worst_scaling: f64 = 0.0;
    for &s in &a.scales {
        let scaled = setup.scaled(s)?;
        let col = scaled.aux.m_many(&pts)?;
        let moved: Vec<Vec<f64>> = pts.iter().map(|x| x.iter().map(|v| s * v).collect()).collect();
        let base = setup.aux.m_many(&moved)?;
        for (ms, mb) in col.iter().zip(&base) {
            worst_scaling = worst_scaling.max((ms / (s * mb) - 1.0).abs());
        }
        scaled_cols.push(col);
    }
    for (i, (x, m)) in pts.iter().zip(&ms).enumerate() {
        let mut row = vec![join(x), num(*m)];
        row.extend(scaled_cols.iter().map(|c| num(c[i])));
        table.push(row);
    }
    let m0 = setup.aux.m(&vec![0.0; dim])?;
    report.note("m_origin", num(m0));
    report.note("m_min", num(ms.iter().cloned().fold(f64::INFINITY, f64::min)));
    report.note("m_max", num(ms.iter().cloned().fold(0.0, f64::max)));
    report.note("m_tolerance", num(tol));
    if !a.scales.is_empty() {
        report.note("scaling_deviation", num(worst_scaling));
        report.check(
            "m_{V_s}(x) = s m_V(sx)",
            worst_scaling <= 2.0 * tol,
            format!("max relative deviation {}", num(worst_scaling)),
        );
    }
    match setup.potential.spec() {
        PotentialSpec::Constant { value } => {
            let root = value.sqrt();
            let dev = ms.iter().map(|m| (m / root - 1.0).abs()).fold(0.0, f64::max);
            report.note("constant_deviation", num(dev));
            report.check("constant potential: m ≡ √c", dev <= tol, num(dev));
        }
        PotentialSpec::Power { coefficient, exponent } => {
            let want = power_m_origin(*coefficient, *exponent, setup.system.homogeneous_dimension());
            let dev = (m0 / want - 1.0).abs();
            report.note("m_origin_closed_form", num(want));
            report.check("m(0) matches the closed form within 0.5%", dev <= 5e-3, format!("{} vs {}", num(m0), num(want)));
        }
        _ => {}
    }
    if dim == 1 {
        report.plots.push(Plot {
            name: "aux_m".into(),
            x_label: "x".into(),
            y_label: "m".into(),
            log_x: false,
            log_y: false,
            series: vec![("m".into(), pts.iter().zip(&ms).map(|(x, m)| (x[0], *m)).collect())],
        });
    }
    report.tables.push(table);
    Ok(report)
}

/// `max(hi, 1/lo)` of an `m·d(Q)` band.
fn band_constant(band: (f64, f64)) -> f64 {
    band.1.max(1.0 / band.0)
}

/// Stopping-time cubes on `[-R, R]^N` with the band, overlap and
/// constant-potential checks, repeated on `[-2R, 2R]^N` for drift.
pub fn run_decompose(setup: &Setup, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let d = &cfg.decompose;
    let dim = setup.system.dim();
    let mut report = ExperimentReport::new("decompose");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let run = |half: f64, rng: &mut ChaCha8Rng| -> Result<_> {
        let lo = vec![-half; dim];
        let hi = vec![half; dim];
        let dec = stopping_decomposition(&setup.aux, &lo, &hi, d.depth_cap)?;
        let band = dec.m_side_band(&setup.aux, d.extra_points, rng)?;
        Ok((dec, band))
    };
    let (dec, band) = run(d.half_width, &mut rng)?;
    let (dec2, band2) = run(2.0 * d.half_width, &mut rng)?;
    let (c1, c2) = (band_constant(band), band_constant(band2));
    let drift = (c2 / c1 - 1.0).abs();
    let overlap = dec.check_overlap();
    let overlap2 = dec2.check_overlap();

    let mut table = Table::new("decomposition", &["level", "index", "g", "d", "m_center"]);
    for (level, index, g, side, m) in dec.rows(&setup.aux)? {
        table.push(vec![
            level.to_string(),
            index.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
            num(g),
            num(side),
            num(m),
        ]);
    }
    report.note("cubes", dec.len());
    report.note("cubes_doubled", dec2.len());
    report.note("band_min", num(band.0));
    report.note("band_max", num(band.1));
    report.note("band_constant", num(c1));
    report.note("band_constant_doubled", num(c2));
    report.note("band_drift", num(drift));
    report.note("neighbor_ratio", num(overlap));
    report.note("neighbor_ratio_doubled", num(overlap2));
    report.note("neighbor_ratio_growth", num(overlap2 / overlap));
    report.check("cover is exact", (dec.coverage() - 1.0).abs() < 1e-12, num(dec.coverage()));
    report.check("cubes are maximal", dec.verify_maximality(&setup.aux)?, "");
    report.check(
        "m·d(Q) band stable under region doubling",
        drift < d.max_drift,
        format!("{} -> {} (drift {})", num(c1), num(c2), num(drift)),
    );
    report.check(
        "neighbor side ratios bounded",
        overlap.max(overlap2) <= d.neighbor_limit,
        format!("{} / {}", num(overlap), num(overlap2)),
    );
    if let Some(c) = setup.potential.constant_value() {
        let want = 2f64.powi((1.0 / c.sqrt()).log2().floor() as i32);
        let bad = dec.cubes.iter().find(|q| q.cube.side() != want);
        report.check(
            "constant potential: uniform side 2^⌊log₂ c^{-1/2}⌋",
            bad.is_none(),
            match bad {
                Some(q) => format!("side {} at {:?}", num(q.cube.side()), q.cube.index),
                None => num(want),
            },
        );
    }
    report.tables.push(table);
    Ok(report)
}

/// Converged eigenvalues with the convergence record per index.
pub fn run_spectrum(setup: &Setup, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let sp = &cfg.spectral;
    let req = match sp.eigenvalues {
        Some(n) => EigenRequest::Count(n),
        None => EigenRequest::Below(sp.lambda_max),
    };
    let conv = converged_spectrum(&setup.system, &setup.potential, &sp.spec, req, setup.exec)?;
    let mut report = ExperimentReport::new("spectrum");
    let mut table = Table::new(
        "spectrum",
        &["index", "eigenvalue", "base", "halved", "check", "change", "residual"],
    );
    for (i, best, base, halved, check, change) in conv.rows() {
        table.push(vec![
            i.to_string(),
            num(best),
            num(base),
            num(halved),
            num(check),
            num(change),
            num(conv.base.residuals[i]),
        ]);
    }
    report.note("eigenvalues", conv.eigenvalues.len());
    report.note("converged_below", num(conv.converged_below));
    report.note("max_change", num(conv.max_change()));
    report.note("max_residual", num(conv.max_residual()));
    report.check(
        "spectrum converged",
        conv.all_converged(),
        format!("max change {} (tolerance {})", num(conv.max_change()), num(conv.tolerance)),
    );
    report.check("residuals ≤ 1e-8", conv.max_residual() <= 1e-8, num(conv.max_residual()));
    if let Some(n) = sp.eigenvalues {
        report.check("requested count found", conv.eigenvalues.len() == n, format!("{} of {n}", conv.eigenvalues.len()));
    }
    report.tables.push(table);
    Ok(report)
}
