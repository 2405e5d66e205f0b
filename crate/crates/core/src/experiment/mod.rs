//! Configuration-driven experiments and their reports.

pub mod basic;
pub mod bounds;
pub mod bumps;
pub mod config;
pub mod fp;
pub mod report;
pub mod sandwich;

pub use basic::{run_aux_m, run_decompose, run_measure, run_spectrum};
pub use bounds::run_bound_checks;
pub use bumps::{run_lower_bound_bumps, BumpCertificate};
pub use config::{ExperimentConfig, ExperimentKind, Setup};
pub use fp::{run_fp, run_groundstate, FpSummary, GroundStateSummary};
pub use report::{emit_report, render_svg};
pub use sandwich::{fit_constants, run_sandwich, scale_sweep, FittedConstants, SandwichRow};

use crate::error::Result;

/// Runs one experiment on a prepared setup.
pub fn run_experiment(kind: ExperimentKind, setup: &Setup, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    Ok(match kind {
        ExperimentKind::Measure => run_measure(setup, cfg)?,
        ExperimentKind::AuxM => run_aux_m(setup, cfg)?,
        ExperimentKind::Decompose => run_decompose(setup, cfg)?,
        ExperimentKind::Spectrum => run_spectrum(setup, cfg)?,
        ExperimentKind::Sandwich => run_sandwich(setup, cfg)?.report,
        ExperimentKind::Fp => run_fp(setup, cfg)?.0,
        ExperimentKind::Groundstate => run_groundstate(setup, cfg)?.0,
        ExperimentKind::Bumps => run_lower_bound_bumps(setup, cfg)?.0,
        ExperimentKind::Bounds => run_bound_checks(setup, cfg)?,
    })
}

/// CSV files written by an experiment and their columns.
pub fn describe(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Measure => {
            "measure.csv: center, r, volume = w(B(center, r)), profile = r^N prod (|<x,a>| + r)^k(a), volume_over_profile"
        }
        ExperimentKind::AuxM => "aux_m.csv: x (space separated), m, m_scaled_<s> = m of s^2 V(s .) at x",
        ExperimentKind::Decompose => "decomposition.csv: level, index (space separated), g, d (side), m_center",
        ExperimentKind::Spectrum => {
            "spectrum.csv: index, eigenvalue (best estimate), base (h, R), halved (h/2, R), check (h/2, R + growth), change, residual"
        }
        ExperimentKind::Sandwich => concat!(
            "sandwich.csv: lambda, N, M, M_x<s> = M(s lambda), N_over_M, N_base, N_check, C1, C2, C3 (fitted on rows up to this one)\n",
            "sandwich_fit.csv: s, C = 1/s, lower_holds (M(s lambda) <= N), C2 = max N(lambda)/M(s lambda), with _base and _check variants"
        ),
        ExperimentKind::Fp => "fp_family.csv: member, kind (gaussian | eigenvector), center, sigma, ratio = <m^2 f, f>/Q(f), in_base",
        ExperimentKind::Groundstate => {
            "groundstate.csv: lambda0, min_m, argmin, c_fp, lambda0_over_min_m, lambda0_over_min_m_sq"
        }
        ExperimentKind::Bumps => "bumps.csv: cube (grid index), center, quotient = Q(eta)/|eta|^2, ratio = quotient/lambda, certified",
        ExperimentKind::Bounds => concat!(
            "holder_k<k>.csv: t, x, y, z, ratio\n",
            "heat_bound_k<k>.csv: t, x, y, ratio = h_t(x,y) (1 + |x-y|/sqrt t)^2 w(B) e^{c d^2/t}\n",
            "heat_mass_k<k>.csv: t, x, mass = int h_t(x,y) dw(y), h_t(x,x), h_t(x,-x)\n",
            "mollifier_k<k>.csv: xi, deviation"
        ),
    }
}

/// A headered table with preformatted cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parsed numeric column.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column(name)?;
        self.rows.iter().map(|r| r[c].parse().ok()).collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// An asserted property of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Invariant {
    pub name: String,
    pub passed: bool,
    /// Measured value or the first failing row.
    pub detail: String,
}

impl Invariant {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Invariant {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

/// A line plot: x values and named series.
#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

/// Everything one experiment produced.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub tables: Vec<Table>,
    /// Ordered `(key, value)` pairs.
    pub summary: Vec<(String, String)>,
    pub invariants: Vec<Invariant>,
    pub plots: Vec<Plot>,
}

impl ExperimentReport {
    pub fn new(experiment: &str) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            ..Default::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.invariants.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> Vec<&Invariant> {
        self.invariants.iter().filter(|i| !i.passed).collect()
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.invariants.push(Invariant::new(name, passed, detail));
    }

    pub fn value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Appends another report's content under this one.
    pub fn merge(&mut self, other: ExperimentReport) {
        self.tables.extend(other.tables);
        self.summary.extend(other.summary);
        self.invariants.extend(other.invariants);
        self.plots.extend(other.plots);
    }
}

/// Shortest round-trip formatting, with an exponent for very small or large
/// magnitudes; identical values give identical text.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Space-separated [`num`] values.
pub fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}
