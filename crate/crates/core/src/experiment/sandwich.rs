//! `M(C₁⁻¹λ) ≤ N(L,λ) ≤ C₂ M(C₃⁻¹λ)` on a λ grid.

use super::config::{ExperimentConfig, Setup};
use super::{num, ExperimentReport, Plot, Table};
use crate::error::{Error, Result};
use crate::spectral::{converged_spectrum, EigenRequest};

/// `s = 4^{(i-8)/4}` for `i = 0..=16`, i.e. `1/16 ..= 16`.
pub fn scale_sweep() -> Vec<f64> {
    (0..=16).map(|i| 4f64.powf((i as f64 - 8.0) / 4.0)).collect()
}

const SWEEP_CENTER: usize = 8;
/// Sweep indices of `s ∈ {1/4, 1/2, 1, 2, 4}`.
const ROW_SCALES: [usize; 5] = [4, 6, 8, 10, 12];

/// One λ of the sandwich table.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichRow {
    pub lambda: f64,
    pub n: usize,
    pub m: usize,
    /// `(s, M(sλ))` for `s ∈ {1/4, 1/2, 1, 2, 4}`.
    pub m_scaled: Vec<(f64, usize)>,
    /// Constants fitted on the rows up to this one.
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
}

/// One sweep point of the constant scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanPoint {
    pub s: f64,
    /// `M(sλ) ≤ N(λ)` on every row.
    pub lower_holds: bool,
    /// `max_λ N(λ)/M(sλ)`, infinite when some `M(sλ) = 0 < N(λ)`.
    pub c2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FittedConstants {
    /// Smallest `1/s` in the sweep with `M(sλ) ≤ N(λ)` for all λ.
    pub c1: Option<f64>,
    /// `C₂` at the chosen `C₃`.
    pub c2: Option<f64>,
    /// Smallest `1/s ≥ 1` in the sweep with a finite `C₂`.
    pub c3: Option<f64>,
    pub scan: Vec<ScanPoint>,
}

/// Fits the constants by exhaustive scan; `m_scaled[i][j] = M(sweep[j]·λ_i)`.
pub fn fit_constants(n: &[usize], m_scaled: &[Vec<usize>], sweep: &[f64]) -> FittedConstants {
    let scan: Vec<ScanPoint> = sweep
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let lower_holds = n.iter().zip(m_scaled).all(|(&ni, mi)| mi[j] <= ni);
            let c2 = n
                .iter()
                .zip(m_scaled)
                .map(|(&ni, mi)| match (ni, mi[j]) {
                    (0, _) => 0.0,
                    (_, 0) => f64::INFINITY,
                    (a, b) => a as f64 / b as f64,
                })
                .fold(0.0, f64::max);
            ScanPoint { s, lower_holds, c2 }
        })
        .collect();
    if n.is_empty() {
        return FittedConstants {
            c1: None,
            c2: None,
            c3: None,
            scan,
        };
    }
    let c1 = scan.iter().filter(|p| p.lower_holds).map(|p| 1.0 / p.s).reduce(f64::min);
    let upper = scan
        .iter()
        .filter(|p| p.s <= 1.0 && p.c2.is_finite())
        .max_by(|a, b| a.s.total_cmp(&b.s));
    FittedConstants {
        c1,
        c2: upper.map(|p| p.c2),
        c3: upper.map(|p| 1.0 / p.s),
        scan,
    }
}

fn relative_change(a: Option<f64>, b: Option<f64>) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => (b - a).abs() / a.abs(),
        _ => f64::INFINITY,
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "none".into())
}

/// Log-spaced grid of `count` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| match i {
                0 => lo,
                i if i == count - 1 => hi,
                _ => (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp(),
            })
            .collect(),
    }
}

/// Result of [`run_sandwich`].
#[derive(Clone, Debug)]
pub struct SandwichOutcome {
    pub report: ExperimentReport,
    pub rows: Vec<SandwichRow>,
    pub best: FittedConstants,
    pub base: FittedConstants,
    pub check: FittedConstants,
}

const HEADER: [&str; 14] = [
    "lambda", "N", "M", "M_x0.25", "M_x0.5", "M_x1", "M_x2", "M_x4", "N_over_M", "N_base", "N_check", "C1", "C2", "C3",
];

pub fn run_sandwich(setup: &Setup, cfg: &ExperimentConfig) -> Result<SandwichOutcome> {
    let mut report = ExperimentReport::new("sandwich");
    let mut table = Table::new("sandwich", &HEADER);
    let sweep = scale_sweep();
    let sp = &cfg.spectral;
    if sp.lambda_points == 0 {
        report.tables.push(table);
        let empty = fit_constants(&[], &[], &sweep);
        return Ok(SandwichOutcome {
            report,
            rows: Vec::new(),
            best: empty.clone(),
            base: empty.clone(),
            check: empty,
        });
    }
    if !setup.potential.is_coercive() {
        return Err(Error::NonCoercive);
    }
    let conv = converged_spectrum(&setup.system, &setup.potential, &sp.spec, EigenRequest::Below(sp.lambda_max), setup.exec)?;
    if conv.eigenvalues.is_empty() {
        return Err(Error::SpectrumTruncated(sp.lambda_max));
    }
    let lambda0 = conv.eigenvalues[0];
    let lo = sp.lambda_min.unwrap_or(4.0 * lambda0);
    if lo > sp.lambda_max {
        return Err(Error::Config(format!("lambda_min {lo} exceeds lambda_max {}", sp.lambda_max)));
    }
    let lambdas = log_grid(lo, sp.lambda_max, sp.lambda_points);
    if conv.check.converged_below < sp.lambda_max || conv.base.converged_below < sp.lambda_max {
        return Err(Error::SpectrumTruncated(conv.check.converged_below.min(conv.base.converged_below)));
    }
    let count = |vals: &[f64], l: f64| vals.iter().filter(|v| **v <= l).count();
    let n_best = lambdas.iter().map(|&l| conv.counting_n(l)).collect::<Result<Vec<_>>>()?;
    let n_base: Vec<usize> = lambdas.iter().map(|&l| count(&conv.base.eigenvalues, l)).collect();
    let n_check: Vec<usize> = lambdas.iter().map(|&l| count(&conv.check.eigenvalues, l)).collect();

    // M on the full (λ, s) product; m values are shared through the memo
    let jobs: Vec<f64> = lambdas.iter().flat_map(|l| sweep.iter().map(move |s| l * s)).collect();
    let counts = setup.exec.try_map(&jobs, |&mu| setup.aux.grid_count(mu).map(|g| g.count))?;
    let m_scaled: Vec<Vec<usize>> = counts.chunks(sweep.len()).map(|c| c.to_vec()).collect();

    let best = fit_constants(&n_best, &m_scaled, &sweep);
    let base = fit_constants(&n_base, &m_scaled, &sweep);
    let check = fit_constants(&n_check, &m_scaled, &sweep);

    let mut rows = Vec::with_capacity(lambdas.len());
    for (i, &l) in lambdas.iter().enumerate() {
        let running = fit_constants(&n_best[..=i], &m_scaled[..=i], &sweep);
        let m = m_scaled[i][SWEEP_CENTER];
        let row = SandwichRow {
            lambda: l,
            n: n_best[i],
            m,
            m_scaled: ROW_SCALES.iter().map(|&j| (sweep[j], m_scaled[i][j])).collect(),
            c1: running.c1,
            c2: running.c2,
            c3: running.c3,
        };
        let mut cells = vec![num(l), row.n.to_string(), m.to_string()];
        cells.extend(row.m_scaled.iter().map(|(_, c)| c.to_string()));
        cells.push(if m > 0 { num(row.n as f64 / m as f64) } else { "inf".into() });
        cells.extend([n_base[i].to_string(), n_check[i].to_string(), opt(row.c1), opt(row.c2), opt(row.c3)]);
        table.push(cells);
        rows.push(row);
    }

    let mut fit_table = Table::new(
        "sandwich_fit",
        &["s", "C", "lower_holds", "C2", "lower_holds_base", "C2_base", "lower_holds_check", "C2_check"],
    );
    for j in 0..sweep.len() {
        let (a, b, c) = (&best.scan[j], &base.scan[j], &check.scan[j]);
        fit_table.push(vec![
            num(sweep[j]),
            num(1.0 / sweep[j]),
            a.lower_holds.to_string(),
            num(a.c2),
            b.lower_holds.to_string(),
            num(b.c2),
            c.lower_holds.to_string(),
            num(c.c2),
        ]);
    }

    let ratios: Vec<f64> = rows.iter().filter(|r| r.m > 0).map(|r| r.n as f64 / r.m as f64).collect();
    let band_lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let band_hi = ratios.iter().cloned().fold(0.0, f64::max);
    let band = band_hi / band_lo;
    let change = [
        relative_change(base.c1, check.c1),
        relative_change(base.c2, check.c2),
        relative_change(base.c3, check.c3),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    report.note("lambda0", num(lambda0));
    report.note("lambda_min", num(lo));
    report.note("lambda_max", num(sp.lambda_max));
    report.note("eigenvalues", conv.eigenvalues.len());
    report.note("spectrum_max_change", num(conv.max_change()));
    report.note("max_residual", num(conv.max_residual()));
    for (tag, f) in [("", &best), ("_base", &base), ("_check", &check)] {
        report.note(&format!("C1{tag}"), opt(f.c1));
        report.note(&format!("C2{tag}"), opt(f.c2));
        report.note(&format!("C3{tag}"), opt(f.c3));
    }
    report.note("constant_change", num(change));
    report.note("band_min", num(band_lo));
    report.note("band_max", num(band_hi));
    report.note("band", num(band));

    report.check(
        "spectrum converged",
        conv.all_converged(),
        format!("max change {} (tolerance {})", num(conv.max_change()), num(conv.tolerance)),
    );
    report.check("residuals ≤ 1e-8", conv.max_residual() <= 1e-8, num(conv.max_residual()));
    let n_fail = (1..rows.len()).find(|&i| rows[i].n < rows[i - 1].n);
    report.check(
        "N nondecreasing",
        n_fail.is_none(),
        n_fail.map(|i| format!("row {i}: λ = {}", num(rows[i].lambda))).unwrap_or_default(),
    );
    let mut pairs: Vec<(f64, usize)> = jobs.iter().copied().zip(counts.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let m_fail = pairs
        .iter()
        .enumerate()
        .find_map(|(i, a)| pairs[i..].iter().find(|b| b.0 >= 4.0 * a.0 && b.1 < a.1).map(|b| (*a, *b)));
    report.check(
        "M monotone over 4x steps",
        m_fail.is_none(),
        m_fail
            .map(|(a, b)| format!("M({}) = {} > M({}) = {}", num(a.0), a.1, num(b.0), b.1))
            .unwrap_or_default(),
    );
    let exists = [&best, &base, &check].iter().all(|f| f.c1.is_some() && f.c2.is_some());
    report.check(
        "constants exist on the sweep",
        exists,
        format!("C1 {} C2 {} C3 {}", opt(best.c1), opt(best.c2), opt(best.c3)),
    );
    report.check(
        "constants stable under (h/2, R+growth)",
        change < cfg.sandwich.max_change,
        num(change),
    );
    report.check(
        "N/M within one band",
        ratios.len() == rows.len() && band <= cfg.sandwich.band_limit,
        format!("[{}, {}] width {}", num(band_lo), num(band_hi), num(band)),
    );

    report.plots.push(Plot {
        name: "sandwich".into(),
        x_label: "lambda".into(),
        y_label: "count".into(),
        log_x: true,
        log_y: true,
        series: vec![
            ("N".into(), rows.iter().map(|r| (r.lambda, r.n as f64)).collect()),
            ("M".into(), rows.iter().map(|r| (r.lambda, r.m as f64)).collect()),
        ],
    });
    report.plots.push(Plot {
        name: "sandwich_band".into(),
        x_label: "lambda".into(),
        y_label: "N/M".into(),
        log_x: true,
        log_y: false,
        series: vec![(
            "N/M".into(),
            rows.iter().filter(|r| r.m > 0).map(|r| (r.lambda, r.n as f64 / r.m as f64)).collect(),
        )],
    });
    report.tables.push(table);
    report.tables.push(fit_table);
    Ok(SandwichOutcome {
        report,
        rows,
        best,
        base,
        check,
    })
}
