//! Rank-one bound checks: translated bumps, heat kernel and mollifier.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, Setup};
use super::{num, ExperimentReport, Plot, Table};
use crate::bounds::{heat_bound_fit, heat_mass, holder_bound_check, mollifier_kernel_check, mollifier_sweep, RadialTranslator};
use crate::error::{Error, Result};
use crate::transform::{heat_kernel, Rank1Analysis};

/// Runs every rank-one check once per distinct axis multiplicity.
pub fn run_bound_checks(setup: &Setup, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut ks = setup.system.axis_multiplicities().ok_or(Error::UnsupportedGroup)?;
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let mut report = ExperimentReport::new("bounds");
    for k in ks {
        report.merge(bounds_for_axis(k, setup, cfg)?);
    }
    Ok(report)
}

fn bounds_for_axis(k: f64, setup: &Setup, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let b = &cfg.bounds;
    let exec = setup.exec;
    let tag = format!("k{}", num(k));
    let mut report = ExperimentReport::new("bounds");
    let an = Rank1Analysis::new(k)?.with_execution(exec);

    let mut sampling = b.sampling.clone();
    if b.doubling {
        sampling.count *= 2;
    }
    let triples = sampling.sample(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let tr = RadialTranslator::new(&an, b.profile, sampling.extent())?;
    let holder = holder_bound_check(&tr, &triples, exec)?;
    let kernel = mollifier_kernel_check(&tr, &triples, exec)?;
    let mut holder_table = Table::new(&format!("holder_{tag}"), &["t", "x", "y", "z", "ratio"]);
    for r in holder.rows() {
        holder_table.push(r.iter().map(|v| num(*v)).collect());
    }
    report.note(&format!("{tag}_holder_sup"), num(holder.sup_ratio));
    report.note(&format!("{tag}_holder_sup_half"), num(holder.sup_ratio_half));
    report.note(&format!("{tag}_holder_drift"), num(holder.drift));
    report.note(&format!("{tag}_holder_far_max"), num(holder.far_max));
    report.note(&format!("{tag}_size_sup"), num(kernel.sup));
    report.note(&format!("{tag}_size_outside_max"), num(kernel.outside_max));
    report.check(
        &format!("{tag}: Holder supremum stable"),
        holder.drift.abs() < b.max_drift,
        format!("{} -> {} (drift {})", num(holder.sup_ratio_half), num(holder.sup_ratio), num(holder.drift)),
    );
    report.check(
        &format!("{tag}: translated bump vanishes for d > 2t"),
        holder.vanishes(b.vanish_tol),
        num(holder.far_max),
    );
    report.check(
        &format!("{tag}: translated bump vanishes for d > t"),
        kernel.outside_max < b.vanish_tol,
        num(kernel.outside_max),
    );
    if k == 0.0 {
        let classical = an.ball_volume(0.0, 1.0) * b.profile.max_slope();
        let dev = (holder.sup_ratio / classical - 1.0).abs();
        report.note(&format!("{tag}_classical_constant"), num(classical));
        report.check(
            &format!("{tag}: Holder constant matches the classical one"),
            dev <= b.classical_tol,
            format!("{} vs {} (deviation {})", num(holder.sup_ratio), num(classical), num(dev)),
        );
    }

    let heat = heat_bound_fit(&an, &b.lattice, &b.c_grid, b.max_drift, exec)?;
    report.note(&format!("{tag}_heat_c_hat"), num(heat.c_hat));
    report.note(&format!("{tag}_heat_sup"), num(heat.sup_coarse));
    report.note(&format!("{tag}_heat_sup_fine"), num(heat.sup_fine));
    report.note(&format!("{tag}_heat_drift"), num(heat.drift));
    report.note(&format!("{tag}_heat_min"), num(heat.min_value));
    report.note(&format!("{tag}_heat_symmetry_defect"), num(heat.symmetry_defect));
    report.check(
        &format!("{tag}: heat bound stable under refinement"),
        heat.drift <= b.max_drift,
        format!("c = {} drift {}", num(heat.c_hat), num(heat.drift)),
    );
    report.check(&format!("{tag}: heat kernel positive"), heat.min_value > 0.0, num(heat.min_value));
    report.check(
        &format!("{tag}: heat kernel symmetric"),
        heat.symmetry_defect <= b.symmetry_tol,
        num(heat.symmetry_defect),
    );

    let mut mass_table = Table::new(&format!("heat_mass_{tag}"), &["t", "x", "mass", "h_t(x,x)", "h_t(x,-x)"]);
    let mut worst: f64 = 0.0;
    for &t in &b.heat_times {
        for &x in &b.heat_points {
            let mass = heat_mass(&an, t, x, exec)?;
            worst = worst.max((mass - 1.0).abs());
            mass_table.push(vec![
                num(t),
                num(x),
                num(mass),
                num(heat_kernel(&an, t, x, x)?),
                num(heat_kernel(&an, t, x, -x)?),
            ]);
        }
    }
    report.note(&format!("{tag}_heat_mass_error"), num(worst));
    report.check(
        &format!("{tag}: heat kernel normalized"),
        worst <= b.normalization_tol,
        num(worst),
    );

    let moll = mollifier_sweep(&an, &b.profile, &b.mollifier_xis, exec)?;
    let mut moll_table = Table::new(&format!("mollifier_{tag}"), &["xi", "deviation"]);
    for (xi, d) in &moll.samples {
        moll_table.push(vec![num(*xi), num(*d)]);
    }
    report.note(&format!("{tag}_mollifier_c_hat"), num(moll.c_hat));
    report.note(&format!("{tag}_mollifier_max_deviation"), num(moll.max_deviation));

    let mut heat_table = Table::new(&format!("heat_bound_{tag}"), &["t", "x", "y", "ratio"]);
    for r in &heat.rows {
        heat_table.push(r.iter().map(|v| num(*v)).collect());
    }
    report.plots.push(Plot {
        name: format!("mollifier_{tag}"),
        x_label: "xi".into(),
        y_label: "deviation".into(),
        log_x: true,
        log_y: true,
        series: vec![("deviation".into(), moll.samples.clone())],
    });
    report.tables.extend([holder_table, heat_table, mass_table, moll_table]);
    Ok(report)
}
