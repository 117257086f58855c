use kinfp_core::green::{
    convolve_points, green_eval, kinetic_convolution, residual_study, verify_indicator_bound, QuadSpec, Source,
};
use kinfp_core::{Cylinder, KineticPoint};
use proptest::prelude::*;

fn indicator_spec() -> QuadSpec {
    QuadSpec {
        normal_nodes: 17,
        gl_order: 4,
        levels: 12,
        ..QuadSpec::default()
    }
}

#[test]
fn indicator_convolution_scales_like_r_squared() {
    let rep = verify_indicator_bound(1, &[0.25, 0.5, 1.0, 2.0], &indicator_spec()).unwrap();
    assert!((rep.slope - 2.0).abs() <= 0.05, "slope {}", rep.slope);
    assert!(rep.spread < 0.02, "spread {}", rep.spread);
}

#[test]
fn indicator_scaling_identity_pointwise() {
    // (Γ⋆1_{Q_r})(z) = r²(Γ⋆1_{Q₁})(S_{1/r}z)
    let spec = indicator_spec();
    let unit = Source::Indicator(Cylinder::unit(1));
    for r in [0.5, 2.0] {
        let src = Source::Indicator(Cylinder::new(KineticPoint::origin(1), r).unwrap());
        for w in [(-0.3, 0.2, 0.1), (0.0, -0.5, 0.4), (-0.9, 0.1, -0.7)] {
            let w = KineticPoint::new_1d(w.0, w.1, w.2);
            let z = w.scale(r).unwrap();
            let lhs = kinetic_convolution(&src, &z, &spec).unwrap();
            let rhs = r * r * kinetic_convolution(&unit, &w, &spec).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-3), "r={r}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn convolution_is_galilean_covariant() {
    let spec = QuadSpec {
        normal_nodes: 25,
        gl_order: 6,
        levels: 8,
        ..QuadSpec::default()
    };
    let s = |z: &KineticPoint| (1.0 + 0.5 * (z.x[0] - 0.3 * z.t).sin()) * (-z.v[0] * z.v[0]).exp() * z.t.sin();
    let src = Source::closure((0.0, 1.0), move |z| if (0.0..=1.0).contains(&z.t) { s(z) } else { 0.0 });
    let z0 = KineticPoint::new_1d(0.0, 0.7, -0.4);
    let z0c = z0.clone();
    let moved = Source::closure((0.0, 1.0), move |z| {
        let y = z0c.compose(z).unwrap();
        if (0.0..=1.0).contains(&y.t) {
            s(&y)
        } else {
            0.0
        }
    });
    let pts: Vec<KineticPoint> = [(0.5, 0.1, 0.2), (1.0, -0.4, 0.6), (1.4, 2.0, -1.0)]
        .iter()
        .map(|&(t, x, v)| KineticPoint::new_1d(t, x, v))
        .collect();
    let shifted: Vec<KineticPoint> = pts.iter().map(|z| z0.compose(z).unwrap()).collect();
    let a = convolve_points(&src, &shifted, &spec).unwrap();
    let b = convolve_points(&moved, &pts, &spec).unwrap();
    for (p, q) in a.iter().zip(&b) {
        assert!((p - q).abs() < 1e-10, "{p} vs {q}");
    }
}

#[test]
fn residual_converges_at_second_order() {
    let spec = QuadSpec {
        normal_nodes: 25,
        gl_order: 6,
        levels: 8,
        ..QuadSpec::default()
    };
    let study = residual_study(3, &spec).unwrap();
    for o in &study.orders {
        assert!(*o >= 1.9, "orders {:?}", study.orders);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn green_is_non_negative(t in -1.0..5.0f64, x in -20.0..20.0f64, v in -20.0..20.0f64) {
        let g = green_eval(&KineticPoint::new_1d(t, x, v));
        prop_assert!(g >= 0.0 && g.is_finite());
    }
}
