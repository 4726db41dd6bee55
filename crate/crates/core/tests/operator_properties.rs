use kinetic_wealth::operator::{apply_t_n, autoconvolve, run_iteration, IterationConfig};
use kinetic_wealth::samples::{random_density, random_grid, random_pdf};
use kinetic_wealth::{apply_t, ConvolutionMethod, Density, Error, Grid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FFT: ConvolutionMethod = ConvolutionMethod::Fft;

fn sample(seed: u64, pdf: bool) -> Density {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_grid(4097).unwrap();
    if pdf {
        random_pdf(&mut rng, g).unwrap()
    } else {
        random_density(&mut rng, g).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_is_squared(seed in any::<u64>()) {
        let y = sample(seed, false);
        let n = y.quad_norm();
        prop_assert!((apply_t(&y, FFT).quad_norm() - n * n).abs() < 1e-7);
    }

    #[test]
    fn mean_is_conserved(seed in any::<u64>()) {
        let y = sample(seed, true).normalized().unwrap();
        let m = y.quad_mean().unwrap();
        let tm = apply_t(&y, FFT).quad_mean().unwrap();
        prop_assert!(((tm - m) / m).abs() < 1e-5);
    }

    #[test]
    fn operator_is_homogeneous_of_degree_two(seed in any::<u64>(), c in 0.1f64..3.0) {
        let y = sample(seed, true);
        let lhs = apply_t(&y.scale(c).unwrap(), FFT);
        let rhs = apply_t(&y, FFT).scale(c * c).unwrap();
        prop_assert!(lhs.l1_distance(&rhs).unwrap() <= 1e-12 * c * c);
    }

    #[test]
    fn image_is_nonincreasing_and_nonnegative(seed in any::<u64>()) {
        let ty = apply_t(&sample(seed, true), FFT);
        let v = ty.values();
        prop_assert!(v.iter().all(|x| *x >= 0.0));
        prop_assert!(v.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}

#[test]
fn direct_and_fft_agree_pointwise() {
    for seed in 0..4 {
        let y = sample(seed, true);
        let a = autoconvolve(&y, ConvolutionMethod::Direct);
        let b = autoconvolve(&y, FFT);
        let worst = a.iter().zip(&b).map(|(x, z)| (x - z).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-10, "seed {seed}: {worst}");
    }
}

#[test]
fn exponentials_are_fixed_for_every_rate() {
    for alpha in [0.5, 1.0, 2.0] {
        let g = Grid::new(4097, 40.0 / alpha).unwrap();
        let y = Density::exponential(g, alpha).unwrap();
        assert!(apply_t(&y, FFT).l1_distance(&y).unwrap() <= 1e-6);
    }
}

#[test]
fn iterates_approach_the_exponential_with_matching_mean() {
    let g = Grid::new(4097, 40.0).unwrap();
    let y0 = Density::triangle(g, 1.0).unwrap();
    let traj = run_iteration(&y0, &IterationConfig::new(6, FFT)).unwrap();
    let d: Vec<f64> = traj.reports.iter().map(|r| r.dist_to_target).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert_eq!(traj.densities.len(), 7);
    let last = apply_t_n(&y0, 6, FFT);
    assert_eq!(&last, traj.densities.last().unwrap());
}

#[test]
fn short_domain_is_reported() {
    let g = Grid::new(1025, 4.0).unwrap();
    let y = Density::exponential(g, 1.0).unwrap();
    match run_iteration(&y, &IterationConfig::new(2, FFT)) {
        Err(Error::DomainTooSmall { .. }) => {}
        other => panic!("{other:?}"),
    }
}
