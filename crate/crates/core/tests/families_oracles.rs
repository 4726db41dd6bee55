use kinetic_wealth::families::{closed_form_t, contraction_check, lattice, sample_family, FamilySpec};
use kinetic_wealth::{apply_t, ConvolutionMethod, Error, Grid};

#[test]
fn lattice_has_every_combination() {
    let specs = lattice();
    assert_eq!(specs.len(), 12 + 6 + 36);
    let count = |k: &str| specs.iter().filter(|s| s.kind_name() == k).count();
    assert_eq!((count("gamma"), count("mix"), count("epsmix")), (12, 6, 36));
}

#[test]
fn numeric_first_iterate_matches_closed_forms() {
    for spec in lattice() {
        let g = spec.default_grid().unwrap();
        let numeric = apply_t(&sample_family(&spec, &g).unwrap(), ConvolutionMethod::Fft);
        let gap = numeric.l1_distance(&closed_form_t(&spec, &g).unwrap()).unwrap();
        assert!(gap <= 1e-5, "{spec}: {gap:e}");
    }
}

#[test]
fn one_step_contracts_towards_the_exponential() {
    for spec in lattice() {
        let r = contraction_check(&spec, &spec.default_grid().unwrap()).unwrap();
        assert!(r.contracted || r.degenerate, "{spec}: {r:?}");
        let exponential_shape = matches!(
            spec,
            FamilySpec::Gamma { n: 0, .. } | FamilySpec::EpsilonMix { n: 0, .. }
        );
        assert_eq!(r.degenerate, exponential_shape, "{spec}");
    }
}

#[test]
fn closed_forms_preserve_norm_and_mean() {
    for spec in lattice() {
        let g = spec.default_grid().unwrap();
        let t = closed_form_t(&spec, &g).unwrap();
        assert!((t.quad_norm() - 1.0).abs() < 1e-7, "{spec}");
        let rel = (t.quad_mean().unwrap() - spec.mean()).abs() / spec.mean();
        assert!(rel < 1e-7, "{spec}");
    }
}

#[test]
fn large_shapes_use_the_log_path() {
    let spec = FamilySpec::Gamma { alpha: 1.0, n: 60 };
    let g = Grid::new(4097, 200.0).unwrap();
    let numeric = apply_t(&sample_family(&spec, &g).unwrap(), ConvolutionMethod::Fft);
    let gap = numeric.l1_distance(&closed_form_t(&spec, &g).unwrap()).unwrap();
    assert!(gap < 1e-6, "{gap:e}");
}

#[test]
fn invalid_specs_are_rejected() {
    let g = Grid::new(64, 10.0).unwrap();
    for spec in [
        FamilySpec::Gamma { alpha: 0.0, n: 1 },
        FamilySpec::TwoExponentialMix { alpha: 1.0, beta: -1.0 },
        FamilySpec::EpsilonMix { epsilon: 1.5, alpha: 1.0, n: 1 },
        FamilySpec::Gamma { alpha: 1.0, n: 500 },
    ] {
        assert!(matches!(sample_family(&spec, &g), Err(Error::InvalidParameter { .. })), "{spec}");
    }
    assert!(matches!(
        closed_form_t(&FamilySpec::Exponential { alpha: 1.0 }, &g),
        Err(Error::NoClosedForm(_))
    ));
}
