use kinetic_wealth::{Density, Grid};
use proptest::prelude::*;

fn density_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..10.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_is_linear_in_the_norm(values in density_strategy(64), c in 0.0f64..50.0) {
        let g = Grid::new(64, 3.0).unwrap();
        let y = Density::new(g, values).unwrap();
        let n = y.quad_norm();
        let scaled = y.scale(c).unwrap().quad_norm();
        prop_assert!((scaled - c * n).abs() <= 1e-12 * (c * n).max(1e-300));
    }

    #[test]
    fn l1_triangle_inequality_and_symmetry(
        a in density_strategy(40),
        b in density_strategy(40),
        c in density_strategy(40),
    ) {
        let g = Grid::new(40, 5.0).unwrap();
        let (a, b, c) = (
            Density::new(g, a).unwrap(),
            Density::new(g, b).unwrap(),
            Density::new(g, c).unwrap(),
        );
        let ab = a.l1_distance(&b).unwrap();
        let bc = b.l1_distance(&c).unwrap();
        let ac = a.l1_distance(&c).unwrap();
        prop_assert!(ac <= (ab + bc) * (1.0 + 1e-12) + 1e-300);
        prop_assert_eq!(ab, b.l1_distance(&a).unwrap());
        prop_assert_eq!(a.l1_distance(&a).unwrap(), 0.0);
    }

    #[test]
    fn interpolation_stays_within_neighbouring_values(values in density_strategy(32), t in 0.0f64..1.0) {
        let g = Grid::new(32, 2.0).unwrap();
        let y = Density::new(g, values.clone()).unwrap();
        let x = t * 2.0;
        let i = ((x / g.spacing()) as usize).min(30);
        let v = y.interpolate(x);
        let (lo, hi) = (values[i].min(values[i + 1]), values[i].max(values[i + 1]));
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn exponential_mean_matches_rate(alpha in 0.25f64..4.0) {
        let g = Grid::new(4097, 40.0 / alpha).unwrap();
        let y = Density::exponential(g, alpha).unwrap();
        prop_assert!((y.quad_norm() - 1.0).abs() < 1e-8);
        prop_assert!((y.quad_mean().unwrap() * alpha - 1.0).abs() < 1e-8);
    }
}

#[test]
fn rejects_invalid_inputs() {
    assert!(Grid::new(8, 1.0).is_err());
    assert!(Grid::new(64, 0.0).is_err());
    assert!(Grid::new(64, f64::NAN).is_err());
    let g = Grid::new(16, 1.0).unwrap();
    assert!(Density::new(g, vec![1.0; 15]).is_err());
    let mut v = vec![1.0; 16];
    v[3] = f64::INFINITY;
    assert!(Density::new(g, v).is_err());
    assert!(Density::zeros(g).quad_mean().is_err());
    let other = Grid::new(17, 1.0).unwrap();
    assert!(Density::zeros(g).l1_distance(&Density::zeros(other)).is_err());
}
