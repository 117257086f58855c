use kinfp_core::fields::{read_field_from, write_field_to};
use kinfp_core::fields::{finite_difference, Derivative};
use kinfp_core::{Field, Grid};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (1usize..=2, 1usize..6, 4usize..9, 4usize..8, 0.5..4.0f64, 0.5..3.0f64).prop_map(|(d, nt, nx, nv, l, v)| {
        Grid::new(d, (nt, nx, nv), (-1.0, 0.5), l, v).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kfp1_round_trip_is_bit_identical(grid in grid_strategy(), seed in any::<u64>()) {
        let data: Vec<f64> = (0..grid.len())
            .map(|i| f64::from_bits(seed.rotate_left(i as u32 % 64) ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
            .map(|x| if x.is_finite() { x } else { 0.0 })
            .collect();
        let f = Field::new(grid, data).unwrap();
        let mut buf = Vec::new();
        write_field_to(&f, &mut buf).unwrap();
        let back = read_field_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back.grid(), f.grid());
        let same = back.data().iter().zip(f.data()).all(|(a, b)| a.to_bits() == b.to_bits());
        prop_assert!(same);
    }

    #[test]
    fn x_derivative_commutes_with_cell_shifts(shift in 0usize..16, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let grid = Grid::new(1, (3, 16, 9), (0.0, 1.0), 2.0 * std::f64::consts::PI, 2.0).unwrap();
        let h = grid.dx();
        let f = |s: f64| Field::sample(&grid, |z| (a * (z.x[0] + s).sin() + b * (2.0 * (z.x[0] + s)).cos()) * (1.0 + z.v[0] * z.t)).unwrap();
        let d0 = finite_difference(&f(0.0), Derivative::X(0)).unwrap();
        let ds = finite_difference(&f(shift as f64 * h), Derivative::X(0)).unwrap();
        for it in 0..grid.nt {
            for ix in 0..grid.nx {
                for iv in 0..grid.nv {
                    let p = d0.get(it, (ix + shift) % grid.nx, iv);
                    let q = ds.get(it, ix, iv);
                    prop_assert!((p - q).abs() <= 1e-13 * (1.0 + p.abs()), "{} vs {}", p, q);
                }
            }
        }
    }
}
