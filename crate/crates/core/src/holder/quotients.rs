//! Kinetic difference quotients evaluated by multilinear interpolation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{Field, Grid};
use crate::geometry::KineticPoint;

#[derive(Clone, Debug)]
pub struct DifferenceQuotients {
    /// `r^{−2}[g(t,x,v) − g(t−r², x−r²v, v)]`
    pub sigma1: Field,
    /// `r^{−2}[g(v+ru) + g(v−ru) − 2g]`
    pub sigma2: Field,
    /// `r^{−1}[g(v+ru) − g]`
    pub sigma3: Field,
}

/// All three quotients on the largest sub-grid where every shifted point
/// stays inside the sampled box.
pub fn difference_quotients(field: &Field, r: f64, u: &[f64]) -> Result<DifferenceQuotients> {
    let grid = field.grid();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::NonPositiveRadius(r));
    }
    if u.len() != grid.d {
        return Err(Error::DimensionMismatch {
            expected: grid.d,
            got: u.len(),
        });
    }
    let norm = u.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("direction must be a unit vector, |u| = {norm}")));
    }
    if grid.nt < 2 {
        return Err(Error::RadiusTooLarge(r));
    }
    let kt = (r * r / grid.dt() - 1e-9).ceil().max(0.0) as usize;
    let kv = u
        .iter()
        .map(|c| (r * c.abs() / grid.dv() - 1e-9).ceil().max(0.0) as usize)
        .max()
        .unwrap_or(0);
    if kt >= grid.nt || grid.nv < 2 * kv + 4 {
        return Err(Error::RadiusTooLarge(r));
    }
    let sub = Grid {
        nt: grid.nt - kt,
        t_min: grid.t(kt),
        nv: grid.nv - 2 * kv,
        v_max: grid.v(grid.nv - 1 - kv),
        ..grid.clone()
    };
    let at = |z: &KineticPoint| field.interpolate(z).ok_or(Error::RadiusTooLarge(r));
    let triples: Vec<(f64, f64, f64)> = (0..sub.len())
        .into_par_iter()
        .map(|flat| {
            let z = sub.point(flat);
            let g = at(&z)?;
            let back = KineticPoint {
                t: z.t - r * r,
                x: z.x.iter().zip(&z.v).map(|(x, v)| x - r * r * v).collect(),
                v: z.v.clone(),
            };
            let shifted = |s: f64| KineticPoint {
                t: z.t,
                x: z.x.clone(),
                v: z.v.iter().zip(u).map(|(v, c)| v + s * r * c).collect(),
            };
            let plus = at(&shifted(1.0))?;
            let minus = at(&shifted(-1.0))?;
            Ok((
                (g - at(&back)?) / (r * r),
                (plus + minus - 2.0 * g) / (r * r),
                (plus - g) / r,
            ))
        })
        .collect::<Result<_>>()?;
    let (s1, rest): (Vec<f64>, Vec<(f64, f64)>) = triples.into_iter().map(|(a, b, c)| (a, (b, c))).unzip();
    let (s2, s3) = rest.into_iter().unzip();
    Ok(DifferenceQuotients {
        sigma1: Field::new(sub.clone(), s1)?,
        sigma2: Field::new(sub.clone(), s2)?,
        sigma3: Field::new(sub, s3)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(1, (21, 16, 41), (0.0, 1.0), 2.0, 2.0).unwrap()
    }

    #[test]
    fn sigma1_of_time_is_one() {
        let f = Field::sample(&grid(), |z| z.t).unwrap();
        let q = difference_quotients(&f, 0.3, &[1.0]).unwrap();
        assert!(q.sigma1.data().iter().all(|s| (s - 1.0).abs() < 1e-10));
        assert_eq!(q.sigma1.grid().nt, 21 - 2);
    }

    #[test]
    fn second_difference_kills_affine_and_doubles_square() {
        let g = grid();
        let r = 2.0 * g.dv();
        let affine = Field::sample(&g, |z| 0.5 - 1.5 * z.v[0]).unwrap();
        let q = difference_quotients(&affine, r, &[1.0]).unwrap();
        assert!(q.sigma2.max_abs() < 1e-10);
        assert!(q.sigma3.data().iter().all(|s| (s + 1.5).abs() < 1e-10));
        let square = Field::sample(&g, |z| z.v[0] * z.v[0]).unwrap();
        let q = difference_quotients(&square, r, &[-1.0]).unwrap();
        assert!(q.sigma2.data().iter().all(|s| (s - 2.0).abs() < 1e-9));
    }

    #[test]
    fn two_dimensional_direction() {
        let g = Grid::new(2, (5, 4, 17), (0.0, 1.0), 1.0, 2.0).unwrap();
        // Bilinear interpolation is exact on v₁v₂, whose σ² along u is 2u₁u₂.
        let f = Field::sample(&g, |z| z.v[0] * z.v[1]).unwrap();
        let u = [0.6, 0.8];
        let q = difference_quotients(&f, 0.5, &u).unwrap();
        assert!(q.sigma2.data().iter().all(|s| (s - 0.96).abs() < 1e-10));
        assert_eq!(q.sigma2.grid().nv, 17 - 2 * 2);
    }

    #[test]
    fn radius_too_large() {
        let f = Field::zeros(grid());
        assert!(matches!(
            difference_quotients(&f, 1.5, &[1.0]),
            Err(Error::RadiusTooLarge(_))
        ));
        assert!(difference_quotients(&f, 0.3, &[0.5]).is_err());
    }
}
