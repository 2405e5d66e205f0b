use dunkl_lab::potential::{Potential, PotentialSpec};
use dunkl_lab::root_system::DunklSystem;
use dunkl_lab::spectral::eigen::{lanczos_eigen, sector_problem, LanczosOptions};
use dunkl_lab::spectral::{
    assemble, assemble_values, converged_spectrum, counting_by_inertia, counting_n, eigensolve, spectrum_at,
    EigenRequest, SpectralSpec, SymmetricGrid,
};
use dunkl_lab::{Error, Execution};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

const EXEC: Execution = Execution::Parallel;

fn rank1(k: f64) -> DunklSystem {
    DunklSystem::rank1(k).unwrap()
}

fn harmonic(system: &DunklSystem) -> Potential {
    Potential::with_default_q(PotentialSpec::Power { coefficient: 1.0, exponent: 2.0 }, system).unwrap()
}

fn constant(system: &DunklSystem, c: f64) -> Potential {
    Potential::with_default_q(PotentialSpec::Constant { value: c }, system).unwrap()
}

/// `T² e^{-x²/2} = (x² - 1 - 2k) e^{-x²/2}`, so the Gaussian is an
/// eigenfunction of `-T² + x²` with eigenvalue `1 + 2k`; the `n`-th level
/// of the rank-one oscillator is `2n + 1 + 2k`.
fn oscillator_level(n: usize, k: f64) -> f64 {
    2.0 * n as f64 + 1.0 + 2.0 * k
}

#[test]
fn classical_oscillator_levels() {
    let s = rank1(0.0);
    let spec = SpectralSpec::default();
    let c = converged_spectrum(&s, &harmonic(&s), &spec, EigenRequest::Count(10), EXEC).unwrap();
    assert_eq!(c.eigenvalues.len(), 10);
    for (n, v) in c.eigenvalues.iter().enumerate() {
        let exact = oscillator_level(n, 0.0);
        assert!((v - exact).abs() / exact < 1e-2, "n={n}: {v}");
    }
    assert!(c.all_converged());
    assert!(c.max_residual() <= 1e-8);
}

#[test]
fn dunkl_oscillator_ground_states() {
    for k in [0.25, 0.5, 1.0, 2.0] {
        let s = rank1(k);
        let c = converged_spectrum(&s, &harmonic(&s), &SpectralSpec::default(), EigenRequest::Count(4), EXEC).unwrap();
        for (n, v) in c.eigenvalues.iter().enumerate() {
            let exact = oscillator_level(n, k);
            assert!((v - exact).abs() / exact < 1e-2, "k={k} n={n}: {v}");
        }
    }
}

#[test]
fn constant_potential_lower_bound() {
    let s = rank1(0.5);
    let (_, r) = spectrum_at(&s, &constant(&s, 3.0), 0.05, 6.0, EigenRequest::Count(3), false, EXEC).unwrap();
    assert!(r.eigenvalues[0] >= 3.0);
    assert!(r.max_residual() <= 1e-8);
}

#[test]
fn counting_examples() {
    let s = rank1(0.0);
    let c = converged_spectrum(&s, &harmonic(&s), &SpectralSpec::default(), EigenRequest::Below(20.0), EXEC).unwrap();
    assert_eq!(c.counting_n(0.5).unwrap(), 0);
    assert_eq!(c.counting_n(10.0).unwrap(), 5);
    assert!(c.counting_n(c.eigenvalues[0]).unwrap() >= 1);
    assert!(matches!(c.counting_n(25.0), Err(Error::SpectrumTruncated(_))));
    let mut last = 0;
    for i in 0..200 {
        let n = c.counting_n(0.1 * i as f64).unwrap();
        assert!(n >= last);
        last = n;
    }

    let (pair, r) = spectrum_at(&s, &harmonic(&s), 0.05, 8.0, EigenRequest::Below(20.0), false, EXEC).unwrap();
    assert!(matches!(counting_n(&r, 21.0), Err(Error::SpectrumTruncated(_))));
    for lam in [0.5, 3.0, 9.99, 10.0, 17.5] {
        assert_eq!(counting_n(&r, lam).unwrap(), counting_by_inertia(&pair, lam), "λ={lam}");
    }
}

#[test]
fn eigen_identity_and_residuals() {
    let s = DunklSystem::a1_power(2, 0.5).unwrap();
    let (pair, r) = spectrum_at(&s, &harmonic(&s), 0.25, 5.0, EigenRequest::Count(6), true, EXEC).unwrap();
    assert!(r.max_residual() <= 1e-8, "{}", r.max_residual());
    for i in 0..r.len() {
        let v = r.lift(&pair, i).unwrap();
        assert!((pair.norm_sq(&v) - 1.0).abs() < 1e-12);
        let q = pair.quadratic_form(&v);
        assert!((q - r.eigenvalues[i]).abs() <= 1e-8 * r.eigenvalues[i], "{q} vs {}", r.eigenvalues[i]);
        let (kin, pot) = pair.form_parts(&v);
        assert!((kin + pot - q).abs() <= 1e-10 * q);
    }
    assert_eq!(pair.quadratic_form(&vec![0.0; pair.grid().len()]), 0.0);
}

#[test]
fn two_dimensional_levels_and_counting() {
    // levels 2(n₁ + n₂) + 2 + 4k with multiplicity n₁ + n₂ + 1
    let k = 0.5;
    let s = DunklSystem::a1_power(2, k).unwrap();
    let (pair, r) = spectrum_at(&s, &harmonic(&s), 0.1, 6.0, EigenRequest::Below(9.5), false, EXEC).unwrap();
    let expected = [4.0, 6.0, 6.0, 8.0, 8.0, 8.0];
    assert_eq!(r.len(), expected.len());
    for (v, e) in r.eigenvalues.iter().zip(expected) {
        assert!((v - e).abs() / e < 2e-2, "{v} vs {e}");
    }
    assert_eq!(counting_by_inertia(&pair, 9.5), 6);
}

#[test]
fn lanczos_matches_dense_oracle() {
    let s = DunklSystem::a1_power(2, 1.0).unwrap();
    let grid = SymmetricGrid::new(2, 5.0, 0.2).unwrap();
    let pair = assemble(&grid, &s, &harmonic(&s), EXEC).unwrap();
    for mask in [0usize, 3] {
        let sp = sector_problem(&pair, mask);
        let n = sp.len();
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for (i, row) in sp.a.row_iter().enumerate() {
            for (&j, v) in row.col_indices().iter().zip(row.values()) {
                dense[(i, j)] += v;
            }
        }
        let mut oracle: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        let lz = lanczos_eigen(&sp, EigenRequest::Count(8), LanczosOptions::default());
        assert!(!lz.partial);
        for (a, b) in lz.values.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "mask {mask}: {a} vs {b}");
        }
        for (v, x) in lz.values.iter().zip(&lz.vectors) {
            assert!(sp.residual(*v, x) <= 1e-8);
        }
    }
}

#[test]
fn dirichlet_monotonicity() {
    let s = rank1(1.0);
    let pot = Potential::with_default_q(PotentialSpec::Power { coefficient: 0.05, exponent: 2.0 }, &s).unwrap();
    let mut prev: Option<Vec<f64>> = None;
    for r_box in [8.0, 12.0, 16.0] {
        let (_, r) = spectrum_at(&s, &pot, 0.05, r_box, EigenRequest::Count(6), false, EXEC).unwrap();
        if let Some(p) = &prev {
            for (a, b) in r.eigenvalues.iter().zip(p) {
                assert!(*a <= b * (1.0 + 1e-12), "R={r_box}: {a} > {b}");
            }
        }
        prev = Some(r.eigenvalues);
    }
}

#[test]
fn gaussian_form_matches_classical_integral() {
    // ∫ (f'² + x² f²) dx for f = e^{-x²/2} equals √π
    let s = rank1(0.0);
    let grid = SymmetricGrid::new(1, 12.0, 0.02).unwrap();
    let pair = assemble(&grid, &s, &harmonic(&s), EXEC).unwrap();
    let f: Vec<f64> = grid.nodes().iter().map(|x| (-0.5 * x[0] * x[0]).exp()).collect();
    let q = pair.quadratic_form(&f);
    let exact = std::f64::consts::PI.sqrt();
    assert!((q - exact).abs() / exact < 2e-2, "{q}");
}

#[test]
fn adjoint_identity() {
    let s = DunklSystem::a1_power(2, 0.75).unwrap();
    let grid = SymmetricGrid::new(2, 3.0, 0.25).unwrap();
    let pair = assemble(&grid, &s, &harmonic(&s), EXEC).unwrap();
    let nodes = grid.nodes();
    let f: Vec<f64> = nodes.iter().map(|x| (x[0] + 0.3 * x[1]).sin() * (-x[1] * x[1]).exp()).collect();
    for axis in 0..2 {
        let n_edges = pair.dual_mass(axis).len();
        let g: Vec<f64> = (0..n_edges).map(|r| (0.37 * r as f64).cos()).collect();
        let df = pair.apply_derivative(axis, &f);
        let lhs: f64 = df.iter().zip(&g).zip(pair.dual_mass(axis)).map(|((a, b), w)| a * b * w).sum();
        let adj = pair.apply_adjoint(axis, &g);
        let rhs: f64 = f.iter().zip(&adj).zip(pair.mass()).map(|((a, b), w)| a * b * w).sum();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }
}

#[test]
fn leibniz_defect_is_second_order() {
    let s = rank1(1.0);
    let mut defects = Vec::new();
    for h in [0.1, 0.05, 0.025] {
        let grid = SymmetricGrid::new(1, 4.0, h).unwrap();
        let pair = assemble_values(&grid, &s, vec![0.0; grid.len()], EXEC).unwrap();
        let xs: Vec<f64> = grid.nodes().iter().map(|x| x[0]).collect();
        let f: Vec<f64> = xs.iter().map(|x| (x + 0.4).sin() * (-0.5 * x * x).exp()).collect();
        let g: Vec<f64> = xs.iter().map(|x| (0.8 * x).cos() + 0.3 * x).collect();
        defects.push(pair.leibniz_defect(0, &f, &g));
    }
    for w in defects.windows(2) {
        assert!(w[1] <= w[0] / 3.0, "{defects:?}");
    }
}

#[test]
fn fp_ratio_for_constant_potential() {
    let s = rank1(1.0);
    let grid = SymmetricGrid::new(1, 4.0, 0.05).unwrap();
    let pair = assemble(&grid, &s, &constant(&s, 2.0), EXEC).unwrap();
    let m = vec![2f64.sqrt(); grid.len()];
    for shift in [-1.0, 0.0, 0.7] {
        let f: Vec<f64> = grid.nodes().iter().map(|x| (-(x[0] - shift).powi(2)).exp()).collect();
        let r = pair.fp_ratio(&m, &f).unwrap();
        assert!(r > 0.0 && r <= 1.0, "{r}");
    }
    let free = assemble_values(&grid, &s, vec![0.0; grid.len()], EXEC).unwrap();
    assert_eq!(free.fp_ratio(&m, &vec![0.0; grid.len()]).unwrap(), 0.0);
}

#[test]
fn unsupported_group_and_negative_samples() {
    let a2 = DunklSystem::new(
        dunkl_lab::root_system::build_root_system(&dunkl_lab::root_system::RootFamily::A2).unwrap(),
        {
            let r = dunkl_lab::root_system::build_root_system(&dunkl_lab::root_system::RootFamily::A2).unwrap();
            dunkl_lab::root_system::Multiplicity::uniform(&r, 1.0).unwrap()
        },
    )
    .unwrap();
    let grid = SymmetricGrid::new(2, 2.0, 0.5).unwrap();
    assert!(matches!(
        assemble_values(&grid, &a2, vec![0.0; grid.len()], EXEC),
        Err(Error::UnsupportedGroup)
    ));
    let s = rank1(0.0);
    let g1 = SymmetricGrid::new(1, 2.0, 0.5).unwrap();
    let mut v = vec![1.0; g1.len()];
    v[2] = -0.5;
    assert!(matches!(
        assemble_values(&g1, &s, v, EXEC),
        Err(Error::NegativePotential { node: 2, .. })
    ));
}

#[test]
fn sequential_and_parallel_agree() {
    let s = DunklSystem::a1_power(2, 0.5).unwrap();
    let run = |exec| {
        let (_, r) = spectrum_at(&s, &harmonic(&s), 0.25, 4.0, EigenRequest::Count(5), false, exec).unwrap();
        r.eigenvalues
    };
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn form_dominates_constant_potential(c in 0.0f64..10.0, k in 0.0f64..2.0, coeffs in prop::collection::vec(-1.0f64..1.0, 8)) {
        let s = DunklSystem::a1_power(2, k).unwrap();
        let grid = SymmetricGrid::new(2, 2.0, 0.5).unwrap();
        let pair = assemble(&grid, &s, &constant(&s, c), Execution::Sequential).unwrap();
        let f: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|x| coeffs.iter().enumerate().map(|(j, a)| a * ((j as f64 + 1.0) * 0.4 * x[j % 2] + j as f64).sin()).sum())
            .collect();
        let q = pair.quadratic_form(&f);
        prop_assert!(q >= c * pair.norm_sq(&f) * (1.0 - 1e-12));
        let b = pair.stiffness();
        let bt = b.transpose();
        prop_assert_eq!(b.values().len(), bt.values().len());
        for (r1, r2) in b.row_iter().zip(bt.row_iter()) {
            prop_assert_eq!(r1.col_indices(), r2.col_indices());
            prop_assert_eq!(r1.values(), r2.values());
        }
    }

    #[test]
    fn spectrum_sorted_nonnegative(k in 0.0f64..2.0, c in 0.0f64..2.0) {
        let s = DunklSystem::rank1(k).unwrap();
        let pot = Potential::with_default_q(
            PotentialSpec::Sum { parts: vec![PotentialSpec::Constant { value: c }, PotentialSpec::Power { coefficient: 1.0, exponent: 2.0 }] },
            &s,
        ).unwrap();
        let grid = SymmetricGrid::new(1, 6.0, 0.1).unwrap();
        let pair = assemble(&grid, &s, &pot, Execution::Sequential).unwrap();
        let r = eigensolve(&pair, EigenRequest::Count(6), false, Execution::Sequential).unwrap();
        prop_assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(r.eigenvalues[0] >= 0.0);
        prop_assert!(r.max_residual() <= 1e-8);
    }
}
