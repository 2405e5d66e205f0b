use dunkl_lab::bounds::{
    holder_bound_check, mollifier_deviation, mollifier_kernel_check, mollifier_sweep, BumpProfile, RadialTranslator,
    TripleSampling,
};
use dunkl_lab::kernel::{KernelArg, KernelEvaluator};
use dunkl_lab::measure::{QuadratureSpec, WeightedMeasure};
use dunkl_lab::root_system::DunklSystem;
use dunkl_lab::transform::{
    convolution, convolution_direct, dunkl_transform, heat_kernel, inverse_transform, translate_radial, Parity,
    Rank1Analysis, SampledFunction1D,
};
use dunkl_lab::{Error, Execution};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

/// `E(x, y)·e^{-|xy|}` at `k = 1`: `sinh u/u + (u cosh u - sinh u)/u²`, `u = xy`.
fn scaled_kernel_k1(u: f64) -> f64 {
    let a = u.abs();
    if a < 1e-3 {
        return (1.0 + u / 3.0 + u * u / 6.0) * (-a).exp();
    }
    let em = (-2.0 * a).exp();
    let sh = 0.5 * (1.0 - em);
    let ch = 0.5 * (1.0 + em);
    let even = sh / a;
    let odd = (a * ch - sh) / (a * a);
    even + u.signum() * odd
}

/// Heat kernel from the Mehler-type closed form
/// `c_k⁻¹ (2t)^{-𝐍/2} e^{-(x²+y²)/4t} E(x/√(2t), y/√(2t))`.
fn heat_oracle(k: f64, ck: f64, t: f64, x: f64, y: f64) -> f64 {
    let u = x * y / (2.0 * t);
    let pre = (2.0 * t).powf(-0.5 * (1.0 + 2.0 * k)) / ck;
    let scaled = if k == 0.0 { (u - u.abs()).exp() } else { scaled_kernel_k1(u) };
    pre * (-(x * x + y * y) / (4.0 * t) + u.abs()).exp() * scaled
}

fn analysis(k: f64) -> Rank1Analysis {
    Rank1Analysis::new(k).unwrap()
}

fn default_nodes(f: impl Fn(f64) -> f64, parity: Parity) -> SampledFunction1D {
    SampledFunction1D::from_real(1.0 / 64.0, 16.0, parity, f).unwrap()
}

#[test]
fn kernel_basic_values() {
    for k in [0.0, 0.5, 1.0, 2.0] {
        let ev = KernelEvaluator::new(k).unwrap();
        for x in [-3.0, 0.2, 5.0] {
            assert_eq!(ev.kernel_real(x, 0.0).unwrap(), 1.0);
        }
        for y in [-2.0, 0.7, 3.0] {
            let h = 1e-5;
            let d = (ev.kernel_real(h, y).unwrap() - ev.kernel_real(-h, y).unwrap()) / (2.0 * h);
            assert!((d - y / (1.0 + 2.0 * k)).abs() < 1e-8, "k={k} y={y}: {d}");
        }
        for xi in [0.1, 1.0, 7.5, 40.0, 300.0] {
            for x in [-2.0, 0.5, 3.0] {
                assert!(ev.exp_i(xi, x).unwrap().norm() <= 1.0 + 1e-12);
            }
        }
    }
    let ev = KernelEvaluator::new(0.0).unwrap();
    for (x, y) in [(0.5, 0.5), (2.0, 3.0), (-1.5, 2.0)] {
        let v = ev.kernel_real(x, y).unwrap();
        assert!((v - (x * y as f64).exp()).abs() < 1e-8 * (x * y as f64).abs().exp());
    }
}

#[test]
fn real_kernel_matches_k1_closed_form() {
    let ev = KernelEvaluator::new(1.0).unwrap();
    for (x, y) in [(0.3, 0.4), (1.0, 2.5), (3.0, 4.0), (-2.0, 3.0), (6.0, -5.0), (10.0, 9.0)] {
        let u: f64 = x * y;
        let v = ev.kernel_real(x, y).unwrap();
        assert!((v * (-u.abs()).exp() - scaled_kernel_k1(u)).abs() < 1e-9, "{x} {y}");
    }
}

#[test]
fn out_of_range_arguments_error() {
    let ev = KernelEvaluator::new(1.0).unwrap();
    assert!(matches!(ev.kernel(50.0, KernelArg::Real(50.0)), Err(Error::KernelOutOfRange(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_is_symmetric(k in 0.0f64..3.0, x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let ev = KernelEvaluator::new(k).unwrap();
        let a = ev.kernel_real(x, y).unwrap();
        let b = ev.kernel_real(y, x).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * (x * y).abs().exp());
        let c = ev.kernel(x, KernelArg::Imag(y)).unwrap();
        let d = ev.kernel(y, KernelArg::Imag(x)).unwrap();
        prop_assert!((c - d).norm() <= 1e-8);
        prop_assert!(c.norm() <= 1.0 + 1e-9);
    }
}

#[test]
fn gaussian_transforms() {
    for k in [0.0, 0.5, 1.0, 2.0] {
        let an = analysis(k);
        let f = default_nodes(|x| (-x * x / 2.0).exp(), Parity::Even);
        let g = dunkl_transform(&an, &f).unwrap();
        let odd = default_nodes(|x| x * (-x * x / 2.0).exp(), Parity::Odd);
        let go = dunkl_transform(&an, &odd).unwrap();
        for (i, xi) in g.nodes().into_iter().enumerate() {
            let gauss = (-xi * xi / 2.0).exp();
            assert!((g.values[i] - Complex64::new(gauss, 0.0)).norm() < 1e-5, "k={k} xi={xi}");
            // T(e^{-x²/2}) = -x e^{-x²/2} and ℱ(Tf) = iξ ℱf
            assert!((go.values[i] - Complex64::new(0.0, -xi * gauss)).norm() < 1e-5, "odd k={k} xi={xi}");
        }
    }
}

#[test]
fn plancherel_and_inversion() {
    for k in [0.0, 1.0] {
        let an = analysis(k);
        let f = default_nodes(|x| (-(x - 1.0) * (x - 1.0)).exp() * (1.0 + 0.3 * x), Parity::None);
        let g = dunkl_transform(&an, &f).unwrap();
        let (nf, ng) = (f.l2_norm(&an), g.l2_norm(&an));
        assert!((nf - ng).abs() < 1e-4 * nf, "k={k}: {nf} {ng}");
        let back = inverse_transform(&an, &g).unwrap();
        for (a, b) in f.values.iter().zip(&back.values) {
            assert!((a - b).norm() < 1e-8);
        }
    }
}

#[test]
fn truncated_input_is_rejected() {
    let an = analysis(1.0);
    let f = default_nodes(|x| 1.0 / (1.0 + x * x), Parity::Even);
    assert!(matches!(dunkl_transform(&an, &f), Err(Error::TruncationDominated(_))));
}

#[test]
fn translation_examples() {
    let gauss = default_nodes(|x| (-x * x).exp(), Parity::Even);
    for k in [0.0, 1.0] {
        let an = analysis(k);
        let t0 = translate_radial(&an, &gauss, 0.0).unwrap();
        for (a, b) in gauss.values.iter().zip(&t0.values) {
            assert!((a - b).norm() < 1e-8);
        }
    }
    let an = analysis(0.0);
    let t = translate_radial(&an, &gauss, 1.7).unwrap();
    for (i, y) in t.nodes().into_iter().enumerate() {
        assert!((t.values[i].re - (-(1.7 - y) * (1.7 - y)).exp()).abs() < 1e-8);
    }
    assert!(t.imag_residue() < 1e-8);
    assert!(translate_radial(&an, &default_nodes(|x| x * (-x * x).exp(), Parity::Odd), 1.0).is_err());
}

#[test]
fn translated_bump_support() {
    let p = BumpProfile::default();
    let bump = default_nodes(|x| p.value(x), Parity::Even);
    for k in [0.0, 1.0] {
        let an = analysis(k);
        for x in [0.5, -2.0, 3.0] {
            let t = translate_radial(&an, &bump, x).unwrap();
            assert!(t.imag_residue() < 1e-8);
            for (i, y) in t.nodes().into_iter().enumerate() {
                if (x.abs() - y.abs()).abs() > 1.0 {
                    assert!(t.values[i].norm() < 1e-6 * bump.max_abs(), "k={k} x={x} y={y}: {}", t.values[i]);
                }
            }
        }
    }
}

#[test]
fn convolution_routes_agree() {
    for k in [0.0, 1.0] {
        let an = analysis(k);
        let f = SampledFunction1D::from_real(1.0 / 16.0, 10.0, Parity::None, |x| (-(x - 0.5) * (x - 0.5)).exp()).unwrap();
        let g = SampledFunction1D::from_real(1.0 / 16.0, 10.0, Parity::Even, |x| (-x * x / 2.0).exp()).unwrap();
        let direct = convolution_direct(&an, &f, &g).unwrap();
        let spectral = convolution(&an, &f, &g).unwrap();
        let fd = dunkl_transform(&an, &direct).unwrap();
        let (ff, fg) = (dunkl_transform(&an, &f).unwrap(), dunkl_transform(&an, &g).unwrap());
        for i in 0..fd.len() {
            let expect = ff.values[i] * fg.values[i] * an.ck();
            assert!((fd.values[i] - expect).norm() < 1e-5, "k={k} i={i}");
            assert!((direct.values[i] - spectral.values[i]).norm() < 1e-6);
        }
    }
}

#[test]
fn heat_kernel_against_closed_form() {
    for k in [0.0, 1.0] {
        let an = analysis(k);
        for t in [0.1, 0.25, 1.0, 4.0] {
            for (x, y) in [(0.0, 0.0), (0.5, 1.0), (-1.0, 2.0), (3.0, 3.0), (3.0, -3.0), (-4.0, -1.0)] {
                let v = heat_kernel(&an, t, x, y).unwrap();
                let o = heat_oracle(k, an.ck(), t, x, y);
                assert!((v - o).abs() < 1e-9 * heat_oracle(k, an.ck(), t, 0.0, 0.0), "k={k} t={t} {x} {y}: {v} {o}");
                assert!(v > 0.0);
                assert!((v - heat_kernel(&an, t, y, x).unwrap()).abs() < 1e-6 * v);
            }
            let origin = heat_kernel(&an, t, 0.0, 0.0).unwrap();
            assert!((origin - (2.0 * t).powf(-0.5 * an.homogeneous_dimension()) / an.ck()).abs() < 1e-10 * origin);
        }
    }
    let an = analysis(0.0);
    for (t, x, y) in [(0.25, 0.0, 1.0), (1.0, 1.0, 3.0), (4.0, 3.0, -2.0)] {
        let classical = (4.0 * PI * t).powf(-0.5) * (-(x - y) * (x - y) / (4.0 * t)).exp();
        assert!((heat_kernel(&an, t, x, y).unwrap() - classical).abs() < 1e-5);
    }
    assert!(matches!(heat_kernel(&an, 5e-5, 0.0, 0.0), Err(Error::ResolutionLimit(_))));
}

fn rank1_measure(k: f64) -> WeightedMeasure {
    let spec = QuadratureSpec { rel_tol: 1e-9, ..QuadratureSpec::default() };
    WeightedMeasure::new(Arc::new(DunklSystem::rank1(k).unwrap()), spec).unwrap()
}

#[test]
fn heat_semigroup() {
    for k in [0.0, 1.0] {
        let an = analysis(k);
        let m = rank1_measure(k);
        let (s, t, x, y) = (0.5, 1.0, 0.7, -1.2);
        let lhs = m
            .integrate_cube(
                |z| heat_kernel(&an, s, x, z[0]).unwrap() * heat_kernel(&an, t, z[0], y).unwrap(),
                &[-16.0],
                &[16.0],
            )
            .unwrap();
        let rhs = heat_kernel(&an, s + t, x, y).unwrap();
        assert!((lhs - rhs).abs() < 1e-3 * rhs, "k={k}: {lhs} {rhs}");
    }
}

#[test]
fn holder_ratio_matches_classical_quotient() {
    let an = analysis(0.0);
    let p = BumpProfile::default();
    let sampling = TripleSampling { count: 400, ..TripleSampling::default() };
    let tr = RadialTranslator::new(&an, p, sampling.extent()).unwrap();
    let triples = sampling.sample(&mut ChaCha8Rng::seed_from_u64(5));
    let rep = holder_bound_check(&tr, &triples, Execution::default()).unwrap();
    for s in &rep.samples {
        let (a, b) = ((s.x - s.y) / s.t, (s.x - s.z) / s.t);
        let classical = 2.0 * (p.value(a) - p.value(b)).abs() / (a - b).abs();
        assert!((s.ratio - classical).abs() < 1e-7 * classical.max(1.0) / ((a - b).abs()).max(1e-3) * 1e-3 + 1e-9);
    }
    assert!(rep.sup_ratio <= 2.0 * p.max_slope() * (1.0 + 1e-6));
    let sizes = mollifier_kernel_check(&tr, &triples, Execution::default()).unwrap();
    assert!(sizes.outside_max < 1e-8 && sizes.sup.is_finite());
}

#[test]
fn mollifier_examples() {
    let p = BumpProfile::default();
    for k in [0.0, 1.0] {
        let an = analysis(k);
        assert!(mollifier_deviation(&an, &p, 0.0).unwrap() < 1e-14);
        let xis: Vec<f64> = (0..40).map(|i| 10f64.powf(-3.0 + 3.0 * i as f64 / 39.0)).collect();
        let rep = mollifier_sweep(&an, &p, &xis, Execution::default()).unwrap();
        assert!(rep.c_hat.is_finite() && rep.c_hat > 0.0);
        let wide: Vec<f64> = (0..50).map(|i| 0.5 * i as f64).collect();
        assert!(mollifier_sweep(&an, &p, &wide, Execution::default()).unwrap().max_deviation <= 2.0);
    }
    // classical: |∫(e^{-iξx} - 1)Ψ| ≤ |ξ| ∫|x|Ψ
    let an = analysis(0.0);
    let n = 200_000;
    let (mut mass, mut moment) = (0.0, 0.0);
    for i in 0..n {
        let x = -1.0 + (i as f64 + 0.5) * 2.0 / n as f64;
        mass += p.value(x);
        moment += x.abs() * p.value(x);
    }
    let first_moment = moment / mass;
    for xi in [0.01, 0.3, 1.0, 2.0] {
        assert!(mollifier_deviation(&an, &p, xi).unwrap() <= xi * first_moment);
    }
}
