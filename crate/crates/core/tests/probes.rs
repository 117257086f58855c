use kinfp_core::green::QuadSpec;
use kinfp_core::probes::*;
use kinfp_core::{Error, KineticPoint};

#[test]
fn schauder_ratio_is_stable_across_levels() {
    let b = schauder_batch(&[11, 12, 13], 0.5, 3).unwrap();
    assert_eq!(b.cases.len(), 3);
    for c in &b.cases {
        assert_eq!(c.reports.len(), 3);
        assert!(c.reports.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
        assert!(c.spread <= 2.0, "seed {} spread {}", c.seed, c.spread);
    }
    assert!(b.max_spread <= 2.0);
}

#[test]
fn schauder_batches_are_bit_reproducible() {
    let a = schauder_batch(&[5, 6], 0.3, 2).unwrap();
    let b = schauder_batch(&[5, 6], 0.3, 2).unwrap();
    assert_eq!(a, b);
}

#[test]
fn vanishing_schauder_case_is_degenerate() {
    let c = ManufacturedCase::seeded(1).scaled(0.0);
    assert!(matches!(schauder_probe(&c, 0.5, 0), Err(Error::Degenerate(_))));
}

#[test]
fn schauder_rejects_bad_exponents() {
    let c = ManufacturedCase::seeded(1);
    assert!(schauder_probe(&c, 0.0, 0).is_err());
    assert!(schauder_probe(&c, 1.0, 0).is_err());
}

#[test]
fn gradient_batch_is_stable_under_quadrature_refinement() {
    let seeds: Vec<u64> = (0..16).collect();
    let b = gradient_batch(&seeds, &QuadSpec::default(), 5).unwrap();
    assert!(b.max_ratio > 0.0 && b.max_ratio.is_finite());
    assert!(b.relative_change <= 0.25, "{}", b.relative_change);
}

#[test]
fn gradient_probe_is_galilean_covariant() {
    let spec = QuadSpec::default();
    let src = GradientSource::seeded(3);
    let z0 = KineticPoint::new_1d(0.7, -1.3, 0.8);
    let a = gradient_probe(&src, &KineticPoint::origin(1), &spec, 3).unwrap();
    let b = gradient_probe(&src.translated(&z0).unwrap(), &z0, &spec, 3).unwrap();
    assert!((a.ratio - b.ratio).abs() <= 1e-9 * a.ratio, "{} vs {}", a.ratio, b.ratio);
    for (x, y) in a.lhs_terms.iter().zip(&b.lhs_terms) {
        assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-12));
    }
}

#[test]
fn gradient_probe_reports_quadrature_budget() {
    let spec = QuadSpec {
        normal_nodes: 5,
        gl_order: 2,
        levels: 2,
        panels: 1,
        tolerance: Some(1e-14),
        ..QuadSpec::default()
    };
    let r = gradient_probe(&GradientSource::seeded(1), &KineticPoint::origin(1), &spec, 3);
    assert!(matches!(r, Err(Error::QuadratureBudget { .. })), "{r:?}");
}

#[test]
fn decay_slopes_match_kinetic_weights() {
    let g = CaloricFunction::default();
    for order in [[0, 0, 1], [0, 0, 2], [1, 0, 0], [0, 1, 0], [1, 0, 1], [0, 0, 3]] {
        let r = derivative_decay_probe(&g, order, &DECAY_RADII, 5).unwrap();
        assert!(r.pass, "{order:?}: slope {} vs weight {}", r.slope, r.weight);
        assert!((r.slope - kinetic_weight(order) as f64).abs() <= SLOPE_TOL);
    }
}

#[test]
fn flat_caloric_function_hits_noise_floor() {
    let g = CaloricFunction {
        a1: 0.0,
        a2: 0.0,
        ..CaloricFunction::default()
    };
    let r = derivative_decay_probe(&g, [0, 1, 0], &DECAY_RADII, 5);
    assert!(matches!(r, Err(Error::NoiseFloor { .. })), "{r:?}");
}
