use kinfp_core::toy::*;
use kinfp_core::{Grid, MaxwellianRef};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn grid(nx: usize, nv: usize) -> Grid {
    Grid::phase(1, nx, nv, 0.0, TAU, 8.0).unwrap()
}

fn env() -> EnvelopeConstants {
    EnvelopeConstants::new(0.7, 1.3).unwrap()
}

fn perturbed(g: &Grid) -> ToyState {
    ToyState::modulated_maxwellian(g, |x| 1.0 + 0.3 * x[0].sin()).unwrap()
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}

#[test]
fn default_run_keeps_sandwich_mass_and_monotone_distance() {
    let g = grid(64, 128);
    let mut cfg = ToyConfig::new(1e-3, 5.0, env());
    cfg.record_every = 100;
    let run = run_toy(&perturbed(&g), &cfg).unwrap();
    let m0 = run.trace.rows[0].mass;
    for r in &run.trace.rows {
        assert!(r.envelope_pass, "{r:?}");
        assert!((r.mass - m0).abs() <= 1e-9, "{r:?}");
    }
    let rep = relaxation_report(&run.trace);
    assert!(rep.violations.is_empty(), "{:?}", rep.violations);
    assert!(rep.max_increase <= MONOTONE_TOL);
    assert!(rep.t_half.is_some());
    assert!(rep.final_distance < rep.initial_distance);
}

#[test]
fn distance_falls_below_tolerance_in_finite_time() {
    let g = grid(64, 128);
    let mut cfg = ToyConfig::new(1e-3, 12.0, env());
    cfg.record_every = 1000;
    let run = run_toy(&perturbed(&g), &cfg).unwrap();
    let rep = relaxation_report(&run.trace);
    assert!(rep.final_distance < 1e-4, "{rep:?}");
    assert!(rep.violations.is_empty());
}

#[test]
fn picard_contracts_and_matches_direct_stepping() {
    let g = grid(64, 128);
    let s = perturbed(&g);
    let (t, dt) = (0.1, 1e-3);
    let p = picard_solve(&s, t, dt, 20, 1e-10).unwrap();
    assert!(p.converged);
    assert!(p.ratios.first().is_some_and(|r| *r < 0.5), "{:?}", p.ratios);
    let mut cfg = ToyConfig::new(dt, t, env());
    cfg.record_every = 100;
    let direct = run_toy(&s, &cfg).unwrap();
    let scale = s.g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let bound = 10.0 * (dt + g.dv() * g.dv()) * scale;
    let dist = sup_dist(&p.solution.g, &direct.final_state.g);
    assert!(dist <= bound, "{dist} > {bound}");
}

#[test]
fn amplification_factor_is_stable_in_the_perturbation_size() {
    let g = grid(64, 128);
    let m = MaxwellianRef::new(1);
    let a = perturbed(&g);
    let k: Vec<f64> = [1e-2, 1e-3]
        .iter()
        .map(|&delta| {
            let b = ToyState::from_fn(&g, 0.0, |x, v| {
                (1.0 + 0.3 * x[0].sin() + delta * x[0].cos() / m.sqrt_mu(&[0.0])) * m.sqrt_mu(v)
            })
            .unwrap();
            let r = difference_amplification(&a, &b, 1.0, 1e-3).unwrap();
            assert!(r.initial_distance > 0.0 && r.initial_distance < 10.0 * delta);
            r.amplification
        })
        .collect();
    assert!(k.iter().all(|x| x.is_finite() && *x > 0.0));
    assert!((k[0] / k[1] - 1.0).abs() <= 0.1, "{k:?}");
}

#[test]
fn nash_constants_stay_bounded_on_random_fields() {
    let g = Grid::phase(1, 64, 4, 0.0, TAU, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut draw = || -> Vec<f64> {
            let c: Vec<(f64, f64)> = (0..8).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            (0..g.nx)
                .map(|j| {
                    let x = g.x(j);
                    c.iter()
                        .enumerate()
                        .map(|(m, (a, b))| a * (m as f64 * x).cos() + b * (m as f64 * x).sin())
                        .sum()
                })
                .collect()
        };
        let (g1, g2) = (draw(), draw());
        for (mb, m) in [([0], [2]), ([1], [1]), ([2], [0])] {
            let r = nash_product_check(&g, &g1, &g2, 2, &mb, &m).unwrap();
            assert!(r.constant.is_finite());
            worst = worst.max(r.constant);
            if mb[0] > 0 {
                assert!(r.eps_constants.iter().all(|(_, c)| c.is_some()));
            }
        }
    }
    assert!(worst > 0.0 && worst <= 1.0, "worst constant {worst}");
}

#[test]
fn holder_decay_ratio_is_refinement_stable_and_monotone_in_delta() {
    let mut sups = Vec::new();
    for (nx, nv, every) in [(32, 64, 20), (64, 128, 10)] {
        let g = grid(nx, nv);
        let mut cfg = ToyConfig::new(1e-3, 2.0, env());
        cfg.record_every = 500;
        cfg.frames = Some(FrameSpec { from: 1.0, every });
        let run = run_toy(&perturbed(&g), &cfg).unwrap();
        let frames = run.frames.unwrap();
        let mut by_delta = Vec::new();
        for delta in [0.25, 0.1, 0.0] {
            let params = HolderDecayParams {
                delta,
                tau: 1.0,
                v_stride: nv / 16,
                r_min: Some(0.25),
                ..HolderDecayParams::default()
            };
            by_delta.push(holder_decay_probe(&frames, run.trace.rho_bar, &params).unwrap().sup_ratio);
        }
        assert!(by_delta.windows(2).all(|w| w[1] <= w[0]), "{by_delta:?}");
        sups.push(by_delta[0]);
    }
    assert!((sups[0] / sups[1] - 1.0).abs() <= 0.3, "{sups:?}");
}

#[test]
fn holder_decay_of_equilibrium_vanishes() {
    let g = grid(32, 64);
    let mut cfg = ToyConfig::new(1e-2, 1.0, env());
    cfg.frames = Some(FrameSpec { from: 0.0, every: 5 });
    let run = run_toy(&ToyState::modulated_maxwellian(&g, |_| 1.0).unwrap(), &cfg).unwrap();
    let params = HolderDecayParams {
        tau: 0.0,
        r_min: Some(0.25),
        ..HolderDecayParams::default()
    };
    let rep = holder_decay_probe(&run.frames.unwrap(), run.trace.rho_bar, &params).unwrap();
    assert!(rep.sup_ratio < 1e-10, "{}", rep.sup_ratio);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn constant_multiples_of_the_maxwellian_are_fixed(c in 0.05..10.0f64) {
        let g = grid(16, 128);
        let s = ToyState::modulated_maxwellian(&g, |_| c).unwrap();
        let next = step_nonlinear(&s, 1e-2, EnvelopeConstants::new(c, c).unwrap()).unwrap();
        prop_assert!(sup_dist(&next.g, &s.g) <= 1e-12 * c.max(1.0));
    }

    #[test]
    fn short_runs_conserve_mass_and_respect_envelopes(
        a in 0.0..0.45f64,
        b in 0.0..0.45f64,
        k in 1u32..4,
    ) {
        let g = grid(32, 64);
        let s = ToyState::modulated_maxwellian(&g, |x| 1.0 + a * (k as f64 * x[0]).sin() + b * x[0].cos()).unwrap();
        let e = EnvelopeConstants::new(1.0 - a - b, 1.0 + a + b).unwrap();
        let mut cfg = ToyConfig::new(1e-2, 0.5, e);
        cfg.record_every = 10;
        let run = run_toy(&s, &cfg).unwrap();
        let m0 = run.trace.rows[0].mass;
        for r in &run.trace.rows {
            prop_assert!(r.envelope_pass);
            prop_assert!((r.mass - m0).abs() <= 1e-9);
        }
        prop_assert!(relaxation_report(&run.trace).violations.is_empty());
    }
}
