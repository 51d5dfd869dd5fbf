use lqlab_core::maximal::experiments::{maximal_ratios, ratio_experiment, square_function_probe, Family};
use lqlab_core::maximal::ops::convolution_agreement;
use lqlab_core::maximal::{
    average, average_with, build_kernel, maximal, maximal_with, Convolution, DyadicRange, GridFunction, RangeKind,
};
use lqlab_core::rng::{gaussian, substream};
use lqlab_core::LqBallSpec;
use proptest::prelude::*;

fn random_grid(d: usize, l: usize, seed: u64) -> GridFunction {
    let mut rng = substream(seed, 0);
    let v: Vec<f64> = (0..l.pow(d as u32)).map(|_| gaussian(&mut rng)).collect();
    GridFunction::from_real(d, l, &v).unwrap()
}

#[test]
fn kernel_support_matches_count() {
    let k = build_kernel(&LqBallSpec::new(3, 2.0, 2.0).unwrap(), 16).unwrap();
    let nz: Vec<_> = k.values().iter().filter(|v| v.re != 0.0).collect();
    assert_eq!(nz.len(), 33);
    assert!(nz.iter().all(|v| v.re == 1.0 / 33.0));
    assert!(build_kernel(&LqBallSpec::new(1, 1.0, 4.0).unwrap(), 8).is_err());
}

#[test]
fn constants_and_delta() {
    for (d, q, l) in [(2usize, 1.0, 64usize), (3, 2.0, 32)] {
        let one = GridFunction::constant(d, l, 1.0).unwrap();
        let range = DyadicRange::new(d as u64, q, RangeKind::Full).unwrap();
        for &t in range.radii() {
            let spec = range.spec(t).unwrap();
            for method in [Convolution::Fft, Convolution::Sparse] {
                let a = average_with(&one, &spec, method).unwrap();
                assert!(a.values().iter().all(|v| v.re == 1.0 && v.im == 0.0), "{method:?}");
            }
        }
        let delta = GridFunction::delta(d, l).unwrap();
        let (ratios, _) = maximal_ratios(&delta, &range.truncated(1), &[2.0]).unwrap();
        let count = build_kernel(&range.spec(1.0).unwrap(), l).unwrap().values().iter().filter(|v| v.re > 0.0).count();
        assert!((ratios[0] - 1.0 / (count as f64).sqrt()).abs() < 1e-10);
    }
}

#[test]
fn maximal_of_delta_is_pointwise_max_of_kernels() {
    let delta = GridFunction::delta(2, 32).unwrap();
    let range = DyadicRange::new(2, 1.0, RangeKind::Full).unwrap();
    let m = maximal(&delta, &range).unwrap();
    let exact = maximal_with(&delta, &range, Convolution::Sparse).unwrap();
    let k1 = build_kernel(&LqBallSpec::new(2, 1.0, 1.0).unwrap(), 32).unwrap();
    let k2 = build_kernel(&LqBallSpec::new(2, 1.0, 2.0).unwrap(), 32).unwrap();
    for i in 0..m.len() {
        let want = k1.values()[i].re.max(k2.values()[i].re);
        assert_eq!(exact.values()[i].re, want);
        assert!((m.values()[i].re - want).abs() < 1e-15);
    }
}

#[test]
fn fft_and_sparse_agree() {
    for (d, q, l) in [(2usize, 1.0, 64usize), (3, 2.0, 32)] {
        let f = random_grid(d, l, 17);
        for &t in DyadicRange::new(d as u64, q, RangeKind::Full).unwrap().radii() {
            assert!(convolution_agreement(&f, &LqBallSpec::new(d as u64, q, t).unwrap()).unwrap() < 1e-9);
        }
    }
}

#[test]
fn ratios_grow_with_range() {
    let r = ratio_experiment(3, 1.0, 32, Family::RandomGaussian, 4, 2, &[2.0, 4.0, f64::INFINITY], RangeKind::Full)
        .unwrap();
    let full = DyadicRange::new(3, 1.0, RangeKind::Full).unwrap();
    for t in &r.trials {
        let f = lqlab_core::maximal::test_function(Family::RandomGaussian, 3, 32, 2, t.trial).unwrap();
        let (short, _) = maximal_ratios(&f, &full.truncated(1), &[2.0, 4.0, f64::INFINITY]).unwrap();
        for (a, b) in short.iter().zip(&t.ratios) {
            assert!(a <= b);
        }
        assert!(t.ratios[0] >= t.single_l2[0]);
        assert!(t.ratios[2] <= 1.0 + 1e-12);
    }
}

#[test]
fn square_function_of_delta() {
    let s = square_function_probe(1.0, &GridFunction::delta(2, 32).unwrap(), RangeKind::Full).unwrap();
    assert!(s.ratio().is_finite() && s.ratio() > 0.0);
    assert!(s.parseval_error < 1e-9 && s.reassembly_error < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sparse_average_is_translation_equivariant(seed in 0u64..1000, dx in -20i64..20, dy in -20i64..20) {
        let f = random_grid(2, 16, seed);
        let spec = LqBallSpec::new(2, 1.0, 2.0).unwrap();
        let a = average_with(&f.shift(&[dx, dy]), &spec, Convolution::Sparse).unwrap();
        let b = average_with(&f, &spec, Convolution::Sparse).unwrap().shift(&[dx, dy]);
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn averages_are_positive_contractions(seed in 0u64..1000, n in 1.0f64..3.0) {
        let f = random_grid(2, 16, seed).modulus();
        let spec = LqBallSpec::new(2, 2.0, n).unwrap();
        let a = average(&f, &spec).unwrap();
        prop_assert!(a.values().iter().all(|v| v.re >= -1e-12));
        prop_assert!(a.norm(f64::INFINITY) <= f.norm(f64::INFINITY) * (1.0 + 1e-12));
        prop_assert!(a.norm(2.0) <= f.norm(2.0) * (1.0 + 1e-12));
    }
}
