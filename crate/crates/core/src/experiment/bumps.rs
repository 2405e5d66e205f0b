//! Lower-bound certificates from product bumps on cubes meeting `E_λ`.

use super::config::{ExperimentConfig, Setup};
use super::{join, num, ExperimentReport, Table};
use crate::bounds::BumpProfile;
use crate::error::{Error, Result};
use crate::landscape::Sublevel;
use crate::quadrature::cached_rule;
use crate::spectral::{assemble, counting_by_inertia, SymmetricGrid};

const ORDER: usize = 10;

/// `∫_lo^hi f(x) |x|^{2k} dx` by composite Gauss rules, `panels` per
/// segment, with the weight absorbed into the rule on panels ending at 0.
pub fn weighted_integral_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, k: f64, panels: usize) -> f64 {
    let mut cuts = vec![lo];
    if lo < 0.0 && hi > 0.0 {
        cuts.push(0.0);
    }
    cuts.push(hi);
    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let (pa, pb) = (a + width * p as f64, a + width * (p + 1) as f64);
            let half = 0.5 * (pb - pa);
            let mid = 0.5 * (pa + pb);
            // Jacobi weight (1-t)^α (1+t)^β on [-1, 1]
            let (alpha, beta) = if k > 0.0 && pa == 0.0 {
                (0.0, 2.0 * k)
            } else if k > 0.0 && pb == 0.0 {
                (2.0 * k, 0.0)
            } else {
                (0.0, 0.0)
            };
            let rule = cached_rule(ORDER, alpha, beta);
            let singular = alpha + beta > 0.0;
            let scale = if singular { half.powf(1.0 + 2.0 * k) } else { half };
            let s: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(t, w)| {
                    let x = mid + half * t;
                    let weight = if singular || k == 0.0 { 1.0 } else { x.abs().powf(2.0 * k) };
                    w * f(x) * weight
                })
                .sum();
            total += s * scale;
        }
    }
    total
}

/// `∫φ̃'² / ∫φ̃²` on `[-1, 1]`.
pub fn profile_quotient(profile: &BumpProfile) -> f64 {
    let num = weighted_integral_1d(|s| profile.derivative(s).powi(2), -1.0, 1.0, 0.0, 64);
    let den = weighted_integral_1d(|s| profile.value(s).powi(2), -1.0, 1.0, 0.0, 64);
    num / den
}

/// `(∫ (T_k φ)² |x|^{2k}, ∫ φ² |x|^{2k})` for `φ(x) = φ̃(2(x - c)/side)`,
/// with `T_k φ(x) = φ'(x) + k (φ(x) - φ(-x))/x`.
fn axis_integrals(profile: &BumpProfile, c: f64, side: f64, k: f64, panels: usize) -> (f64, f64) {
    let phi = |x: f64| profile.value(2.0 * (x - c) / side);
    let dphi = |x: f64| 2.0 / side * profile.derivative(2.0 * (x - c) / side);
    let (a, b) = (c - 0.5 * side, c + 0.5 * side);
    let norm = weighted_integral_1d(|x| phi(x).powi(2), a, b, k, panels);
    let t = |x: f64| dphi(x) + if k == 0.0 { 0.0 } else { k * (phi(x) - phi(-x)) / x };
    let kinetic = if k == 0.0 {
        weighted_integral_1d(|x| t(x).powi(2), a, b, k, panels)
    } else if a >= 0.0 || b <= 0.0 {
        // support and its mirror image
        weighted_integral_1d(|x| t(x).powi(2), a, b, k, panels)
            + weighted_integral_1d(|x| t(x).powi(2), -b, -a, k, panels)
    } else {
        let r = a.abs().max(b.abs());
        weighted_integral_1d(|x| t(x).powi(2), -r, r, k, 2 * panels)
    };
    (kinetic, norm)
}

/// One cube of the lower-bound family.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpCertificate {
    pub cube: Vec<i64>,
    pub center: Vec<f64>,
    /// `Q(η)/‖η‖²_w`.
    pub quotient: f64,
    /// `quotient / λ`.
    pub ratio: f64,
    /// `quotient ≤ Ĉ λ`.
    pub certified: bool,
}

/// Default certification constant `2(4𝐍 R_φ/ε² + 1)` with `R_φ` the profile quotient.
pub fn default_c_hat(dim: usize, epsilon: f64, profile: &BumpProfile) -> f64 {
    2.0 * (4.0 * dim as f64 * profile_quotient(profile) / (epsilon * epsilon) + 1.0)
}

/// Builds `η_K` on every cube of side `ε λ^{-1/2}` meeting `E_λ`, certifies
/// `Q(η_K) ≤ Ĉ λ ‖η_K‖²` and compares the count with `M(λ)` and the
/// discrete `N(Ĉλ)`.
pub fn run_lower_bound_bumps(setup: &Setup, cfg: &ExperimentConfig) -> Result<(ExperimentReport, Vec<BumpCertificate>)> {
    let b = &cfg.bumps;
    let lambda = b.lambda;
    let dim = setup.system.dim();
    let ks = setup.system.axis_multiplicities().ok_or(Error::UnsupportedGroup)?;
    let side = b.epsilon / lambda.sqrt();
    let c_hat = b.c_hat.unwrap_or_else(|| default_c_hat(dim, b.epsilon, &b.profile));
    let mut report = ExperimentReport::new("bumps");

    let cubes: Vec<Vec<i64>> = match setup.aux.sublevel_box(lambda)? {
        Sublevel::Unbounded => {
            let n = (b.region_half_width / side).ceil() as i64;
            let per = (2 * n) as usize;
            let all: Vec<Vec<i64>> = (0..per.pow(dim as u32))
                .map(|c| {
                    let mut rem = c;
                    let mut v = vec![0i64; dim];
                    for slot in v.iter_mut().rev() {
                        *slot = -n + (rem % per) as i64;
                        rem /= per;
                    }
                    v
                })
                .collect();
            let thr = lambda.sqrt();
            let keep = setup.exec.try_map(&all, |n| {
                let center: Vec<f64> = n.iter().map(|&i| (i as f64 + 0.5) * side).collect();
                setup.aux.m(&center).map(|m| m <= thr)
            })?;
            all.into_iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect()
        }
        _ => setup.aux.cubes_meeting(lambda, side)?.cubes,
    };
    let m_lambda = match setup.aux.sublevel_box(lambda)? {
        Sublevel::Unbounded => None,
        _ => Some(setup.aux.grid_count(lambda)?.count),
    };

    let panels = b.subdivisions;
    let profile = b.profile;
    let potential = setup.potential.clone();
    let certs = setup.exec.try_map(&cubes, |cube| -> Result<BumpCertificate> {
        let center: Vec<f64> = cube.iter().map(|&i| (i as f64 + 0.5) * side).collect();
        let axes: Vec<(f64, f64)> = (0..dim).map(|j| axis_integrals(&profile, center[j], side, ks[j], panels)).collect();
        let norm: f64 = axes.iter().map(|a| a.1).product();
        let kinetic: f64 = (0..dim)
            .map(|j| axes[j].0 * axes.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, a)| a.1).product::<f64>())
            .sum();
        let lo: Vec<f64> = center.iter().map(|c| c - 0.5 * side).collect();
        let hi: Vec<f64> = center.iter().map(|c| c + 0.5 * side).collect();
        let eta = |x: &[f64]| -> f64 {
            x.iter().zip(&center).map(|(xi, ci)| profile.value(2.0 * (xi - ci) / side)).product()
        };
        let pot = setup.measure.integrate_cube(|x| potential.eval(x) * eta(x).powi(2), &lo, &hi)?;
        let quotient = (kinetic + pot) / norm;
        Ok(BumpCertificate {
            cube: cube.clone(),
            center,
            quotient,
            ratio: quotient / lambda,
            certified: quotient <= c_hat * lambda,
        })
    })?;

    let certified = certs.iter().filter(|c| c.certified).count();
    let ratio_min = certs.iter().map(|c| c.ratio).fold(f64::INFINITY, f64::min);
    let ratio_max = certs.iter().map(|c| c.ratio).fold(0.0, f64::max);

    let sp = &cfg.spectral.spec;
    let grid = SymmetricGrid::new(dim, sp.half_width, sp.h)?;
    let pair = assemble(&grid, &setup.system, &setup.potential, setup.exec)?;
    let n_disc = counting_by_inertia(&pair, c_hat * lambda);

    let mut table = Table::new("bumps", &["cube", "center", "quotient", "ratio", "certified"]);
    for c in &certs {
        table.push(vec![
            c.cube.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
            join(&c.center),
            num(c.quotient),
            num(c.ratio),
            c.certified.to_string(),
        ]);
    }
    report.note("lambda", num(lambda));
    report.note("side", num(side));
    report.note("c_hat", num(c_hat));
    report.note("profile_quotient", num(profile_quotient(&profile)));
    report.note("cubes", certs.len());
    report.note("certified", certified);
    report.note("M", m_lambda.map(|m| m.to_string()).unwrap_or_else(|| "unbounded".into()));
    if let Some(m) = m_lambda.filter(|m| *m > 0) {
        report.note("certified_over_M", num(certified as f64 / m as f64));
    }
    report.note("ratio_min", num(ratio_min));
    report.note("ratio_max", num(ratio_max));
    report.note("N_disc_c_hat_lambda", n_disc);
    report.check(
        "every bump certified",
        certified == certs.len(),
        format!("{certified} of {} (max ratio {})", certs.len(), num(ratio_max)),
    );
    report.check(
        "certified count ≤ N(Ĉλ)",
        certified <= n_disc,
        format!("{certified} ≤ {n_disc}"),
    );
    report.tables.push(table);
    Ok((report, certs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_monomials() {
        // ∫_{-1}^{2} x² |x|^{2k} dx = (1 + 2^{2k+3})/(2k+3)
        for k in [0.0, 0.5, 1.3] {
            let got = weighted_integral_1d(|x| x * x, -1.0, 2.0, k, 4);
            let want = (1.0 + 2f64.powf(2.0 * k + 3.0)) / (2.0 * k + 3.0);
            assert!((got - want).abs() < 1e-12 * want, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn classical_bump_quotient_scales_with_side() {
        let p = BumpProfile::default();
        let r = profile_quotient(&p);
        let (kin, norm) = axis_integrals(&p, 3.0, 0.1, 0.0, 32);
        assert!((kin / norm - 400.0 * r).abs() < 1e-8 * kin / norm);
    }
}
