//! Galilean group, kinetic dilations, kinetic cylinders and kinetic degree.
//!
//! Points are `z = (t, x, v)` with `x, v ∈ ℝ^d`. The group law is
//! `(t₁,x₁,v₁) ∘ (t₂,x₂,v₂) = (t₁+t₂, x₁+x₂+t₂v₁, v₁+v₂)` and the dilation
//! `S_r(t,x,v) = (r²t, r³x, rv)` is a group homomorphism.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Coordinate storage for `x` and `v`; no heap allocation up to `d = 3`.
pub type Coords = SmallVec<[f64; 3]>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticPoint {
    pub t: f64,
    pub x: Coords,
    pub v: Coords,
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a,
            got: b,
        })
    }
}

impl KineticPoint {
    pub fn new(t: f64, x: &[f64], v: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        check_dims(x.len(), v.len())?;
        let z = Self {
            t,
            x: Coords::from_slice(x),
            v: Coords::from_slice(v),
        };
        if !z.is_finite() {
            return Err(Error::NonFiniteCoordinate);
        }
        Ok(z)
    }

    /// Convenience constructor for `d = 1`.
    pub fn new_1d(t: f64, x: f64, v: f64) -> Self {
        Self {
            t,
            x: Coords::from_slice(&[x]),
            v: Coords::from_slice(&[v]),
        }
    }

    pub fn origin(d: usize) -> Self {
        Self {
            t: 0.0,
            x: Coords::from_elem(0.0, d),
            v: Coords::from_elem(0.0, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.x.iter().all(|c| c.is_finite())
            && self.v.iter().all(|c| c.is_finite())
    }

    /// Galilean product `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        let x = self
            .x
            .iter()
            .zip(&other.x)
            .zip(&self.v)
            .map(|((x1, x2), v1)| x1 + x2 + other.t * v1)
            .collect();
        let v = self.v.iter().zip(&other.v).map(|(a, b)| a + b).collect();
        Ok(Self {
            t: self.t + other.t,
            x,
            v,
        })
    }

    /// `z⁻¹ = (−t, −x + tv, −v)`.
    pub fn inverse(&self) -> Self {
        Self {
            t: -self.t,
            x: self
                .x
                .iter()
                .zip(&self.v)
                .map(|(x, v)| -x + self.t * v)
                .collect(),
            v: self.v.iter().map(|v| -v).collect(),
        }
    }

    /// Kinetic dilation `S_r(z) = (r²t, r³x, rv)`.
    pub fn scale(&self, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::NonPositiveRadius(r));
        }
        Ok(self.scale_unchecked(r))
    }

    pub(crate) fn scale_unchecked(&self, r: f64) -> Self {
        let r3 = r * r * r;
        Self {
            t: r * r * self.t,
            x: self.x.iter().map(|x| r3 * x).collect(),
            v: self.v.iter().map(|v| r * v).collect(),
        }
    }

    /// Homogeneous quasi-norm `|t|^{1/2} + |x|^{1/3} + |v|` (Euclidean norms).
    pub fn kinetic_norm(&self) -> f64 {
        self.t.abs().sqrt() + euclid(&self.x).cbrt() + euclid(&self.v)
    }
}

pub(crate) fn euclid(a: &[f64]) -> f64 {
    a.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Kinetic cylinder `Q_r(z₀) = { z₀ ∘ S_r(w) : w ∈ (−1,0] × B₁ × B₁ }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub center: KineticPoint,
    pub radius: f64,
}

impl Cylinder {
    pub fn new(center: KineticPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::NonPositiveRadius(radius));
        }
        Ok(Self { center, radius })
    }

    /// `Q₁(0)` in dimension `d`.
    pub fn unit(d: usize) -> Self {
        Self {
            center: KineticPoint::origin(d),
            radius: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Membership: `t₀−r² < t ≤ t₀`, `|x−x₀−(t−t₀)v₀| < r³`, `|v−v₀| < r`.
    ///
    /// Panics if `z` has a different dimension than the center.
    pub fn contains(&self, z: &KineticPoint) -> bool {
        assert_eq!(z.dim(), self.dim(), "cylinder/point dimension mismatch");
        let z0 = &self.center;
        let r = self.radius;
        let dt = z.t - z0.t;
        if !(dt > -r * r && dt <= 0.0) {
            return false;
        }
        let mut x2 = 0.0;
        let mut v2 = 0.0;
        for i in 0..z.dim() {
            let dx = z.x[i] - z0.x[i] - dt * z0.v[i];
            let dv = z.v[i] - z0.v[i];
            x2 += dx * dx;
            v2 += dv * dv;
        }
        x2.sqrt() < r * r * r && v2.sqrt() < r
    }

    /// `S_{1/r}(z₀⁻¹ ∘ z)`: the preimage of `z` in the unit cylinder frame.
    pub fn to_unit(&self, z: &KineticPoint) -> Result<KineticPoint> {
        self.center.inverse().compose(z)?.scale(1.0 / self.radius)
    }

    /// `z₀ ∘ S_r(w)`.
    pub fn from_unit(&self, w: &KineticPoint) -> Result<KineticPoint> {
        self.center.compose(&w.scale(self.radius)?)
    }

    /// Membership decided through the unit cylinder; agrees with [`Cylinder::contains`]
    /// up to rounding on the boundary.
    pub fn contains_via_unit(&self, z: &KineticPoint) -> Result<bool> {
        Ok(Cylinder::unit(self.dim()).contains(&self.to_unit(z)?))
    }

    /// Whether `inner ⊂ self`, exact for Euclidean balls.
    ///
    /// The x-constraint of `self` evaluated on `inner` reduces to
    /// `max_{s∈[−ρ²,0]} |Δ + s(v₁−v₀)| + ρ³ ≤ r³` with `Δ = x₁−x₀−(t₁−t₀)v₀`;
    /// the maximum of a convex function on an interval sits at an endpoint.
    pub fn contains_cylinder(&self, inner: &Cylinder) -> bool {
        self.contains_cylinder_periodic(inner, None)
    }

    /// Same as [`Cylinder::contains_cylinder`] with `x` on a torus of side `period`.
    pub fn contains_cylinder_periodic(&self, inner: &Cylinder, period: Option<f64>) -> bool {
        assert_eq!(inner.dim(), self.dim(), "cylinder dimension mismatch");
        let (z0, r) = (&self.center, self.radius);
        let (z1, rho) = (&inner.center, inner.radius);
        let eps = 1e-12 * (1.0 + r * r);
        if z1.t > z0.t + eps || z1.t - rho * rho < z0.t - r * r - eps {
            return false;
        }
        let dv: Vec<f64> = z1.v.iter().zip(&z0.v).map(|(a, b)| a - b).collect();
        if euclid(&dv) + rho > r * (1.0 + 1e-12) {
            return false;
        }
        let r3 = r * r * r;
        if let Some(l) = period {
            if r3 >= 0.5 * l * (z0.dim() as f64).sqrt() {
                return true;
            }
        }
        let dt = z1.t - z0.t;
        let delta: Vec<f64> = (0..z0.dim())
            .map(|i| {
                let d = z1.x[i] - z0.x[i] - dt * z0.v[i];
                match period {
                    Some(l) => d - l * (d / l).round(),
                    None => d,
                }
            })
            .collect();
        let shifted: Vec<f64> = delta
            .iter()
            .zip(&dv)
            .map(|(d, w)| d - rho * rho * w)
            .collect();
        euclid(&delta).max(euclid(&shifted)) + rho * rho * rho <= r3 * (1.0 + 1e-12)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticMonomial {
    pub k0: u32,
    pub k: SmallVec<[u32; 3]>,
    pub l: SmallVec<[u32; 3]>,
    pub coeff: f64,
}

impl KineticMonomial {
    pub fn new(coeff: f64, k0: u32, k: &[u32], l: &[u32]) -> Result<Self> {
        check_dims(k.len(), l.len())?;
        Ok(Self {
            k0,
            k: SmallVec::from_slice(k),
            l: SmallVec::from_slice(l),
            coeff,
        })
    }

    pub fn constant(d: usize, c: f64) -> Self {
        Self {
            k0: 0,
            k: SmallVec::from_elem(0, d),
            l: SmallVec::from_elem(0, d),
            coeff: c,
        }
    }

    /// `2k₀ + 3Σkᵢ + Σlᵢ`.
    pub fn kinetic_degree(&self) -> u32 {
        2 * self.k0 + 3 * self.k.iter().sum::<u32>() + self.l.iter().sum::<u32>()
    }

    pub fn eval(&self, z: &KineticPoint) -> f64 {
        let mut acc = self.coeff * z.t.powi(self.k0 as i32);
        for i in 0..self.k.len() {
            acc *= z.x[i].powi(self.k[i] as i32) * z.v[i].powi(self.l[i] as i32);
        }
        acc
    }

    fn same_powers(&self, other: &Self) -> bool {
        self.k0 == other.k0 && self.k == other.k && self.l == other.l
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticPolynomial {
    pub d: usize,
    pub terms: Vec<KineticMonomial>,
}

impl KineticPolynomial {
    pub fn zero(d: usize) -> Self {
        Self { d, terms: vec![] }
    }

    pub fn constant(d: usize, c: f64) -> Self {
        Self {
            d,
            terms: vec![KineticMonomial::constant(d, c)],
        }
    }

    pub fn from_terms(d: usize, terms: Vec<KineticMonomial>) -> Result<Self> {
        for m in &terms {
            check_dims(d, m.k.len())?;
        }
        Ok(Self { d, terms })
    }

    /// Largest kinetic degree among terms; `0` for constants and for the zero polynomial.
    pub fn kinetic_degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|m| m.coeff != 0.0)
            .map(KineticMonomial::kinetic_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, z: &KineticPoint) -> f64 {
        self.terms.iter().map(|m| m.eval(z)).sum()
    }

    /// Adds `m`, merging with an existing term of identical powers.
    pub fn push(&mut self, m: KineticMonomial) {
        if let Some(t) = self.terms.iter_mut().find(|t| t.same_powers(&m)) {
            t.coeff += m.coeff;
        } else {
            self.terms.push(m);
        }
    }

    /// Drops terms whose coefficient is exactly zero.
    pub fn pruned(mut self) -> Self {
        self.terms.retain(|m| m.coeff != 0.0);
        self
    }

    /// Expands `Σ c · (t−t₀)^{k₀} Π (x−x₀)^{k} (v−v₀)^{l}` into monomials of `(t, x, v)`.
    pub fn from_shifted(
        d: usize,
        shifted_terms: &[KineticMonomial],
        origin: &KineticPoint,
    ) -> Result<Self> {
        check_dims(d, origin.dim())?;
        let mut out = Self::zero(d);
        for m in shifted_terms {
            check_dims(d, m.k.len())?;
            // One factor list per variable: (variable slot, power, shift).
            let mut factors: Vec<(usize, u32, f64)> = vec![(0, m.k0, origin.t)];
            for i in 0..d {
                factors.push((1 + i, m.k[i], origin.x[i]));
                factors.push((1 + d + i, m.l[i], origin.v[i]));
            }
            let mut partial: Vec<(Vec<u32>, f64)> = vec![(vec![0; 1 + 2 * d], m.coeff)];
            for (slot, power, shift) in factors {
                let mut next = Vec::new();
                for (powers, c) in &partial {
                    for j in 0..=power {
                        let coef = binomial(power, j) * (-shift).powi((power - j) as i32);
                        if coef == 0.0 {
                            continue;
                        }
                        let mut p = powers.clone();
                        p[slot] = j;
                        next.push((p, c * coef));
                    }
                }
                partial = next;
            }
            for (p, c) in partial {
                out.push(KineticMonomial {
                    k0: p[0],
                    k: p[1..1 + d].iter().copied().collect(),
                    l: p[1 + d..].iter().copied().collect(),
                    coeff: c,
                });
            }
        }
        Ok(out.pruned())
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exponent patterns `(k₀, k, l)` with kinetic degree strictly below `beta`,
/// ordered by degree.
pub fn monomial_exponents_below(d: usize, beta: f64) -> Vec<(u32, Vec<u32>, Vec<u32>)> {
    let bound = beta.ceil().max(0.0) as u32;
    let mut out = Vec::new();
    // Odometer over the 1 + 2d exponents, each at most `bound`.
    let mut e = vec![0u32; 1 + 2 * d];
    loop {
        let deg = 2 * e[0] + 3 * e[1..=d].iter().sum::<u32>() + e[d + 1..].iter().sum::<u32>();
        if (deg as f64) < beta {
            out.push((e[0], e[1..=d].to_vec(), e[d + 1..].to_vec()));
        }
        let mut i = 0;
        loop {
            if i == e.len() {
                out.sort_by_key(|(k0, k, l)| {
                    let deg = 2 * k0 + 3 * k.iter().sum::<u32>() + l.iter().sum::<u32>();
                    (deg, *k0, k.clone(), l.clone())
                });
                return out;
            }
            e[i] += 1;
            if e[i] <= bound {
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(t: f64, x: f64, v: f64) -> KineticPoint {
        KineticPoint::new_1d(t, x, v)
    }

    #[test]
    fn compose_examples() {
        let z = p1(1.0, 2.0, 3.0);
        assert_eq!(KineticPoint::origin(1).compose(&z).unwrap(), z);
        assert_eq!(z.compose(&p1(4.0, 5.0, 6.0)).unwrap(), p1(5.0, 19.0, 9.0));
        assert_eq!(z.compose(&z.inverse()).unwrap(), KineticPoint::origin(1));
    }

    #[test]
    fn compose_dimension_mismatch() {
        let z2 = KineticPoint::new(0.0, &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert!(matches!(
            p1(0.0, 0.0, 0.0).compose(&z2),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(KineticPoint::new(0.0, &[1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(KineticPoint::origin(1).inverse(), KineticPoint::origin(1));
        assert_eq!(p1(2.0, 1.0, 3.0).inverse(), p1(-2.0, 5.0, -3.0));
        // x − tv + tv rounds, so the involution holds to an ulp rather than bitwise.
        let z = p1(0.3, -1.7, 2.2);
        let back = z.inverse().inverse();
        assert_eq!((back.t, back.v[0]), (z.t, z.v[0]));
        assert!((back.x[0] - z.x[0]).abs() <= 2.0 * f64::EPSILON * 2.0);
    }

    #[test]
    fn scale_examples() {
        let z = p1(0.7, -0.2, 1.1);
        assert_eq!(z.scale(1.0).unwrap(), z);
        assert_eq!(p1(1.0, 1.0, 1.0).scale(2.0).unwrap(), p1(4.0, 8.0, 2.0));
        let back = z.scale(0.5).unwrap().scale(2.0).unwrap();
        assert_eq!(back, z);
        assert!(matches!(z.scale(0.0), Err(Error::NonPositiveRadius(_))));
        assert!(z.scale(-1.0).is_err());
    }

    #[test]
    fn cylinder_examples() {
        let q1 = Cylinder::unit(1);
        assert!(q1.contains(&p1(0.0, 0.0, 0.0)));
        assert!(!q1.contains(&p1(-1.0, 0.0, 0.0)));
        let q = Cylinder::new(p1(0.0, 0.0, 1.0), 2.0).unwrap();
        assert!(q.contains(&p1(-1.0, -0.9, 2.5)));
        assert!(Cylinder::new(p1(0.0, 0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn translate_witness_origin_is_identity() {
        let q = Cylinder::new(KineticPoint::origin(1), 1.0).unwrap();
        let z = p1(-0.3, 0.2, 0.1);
        assert_eq!(q.to_unit(&z).unwrap(), z);
        let w = p1(-0.5, 0.1, -0.4);
        let q = Cylinder::new(p1(0.4, 1.0, -2.0), 0.3).unwrap();
        assert!(q.contains(&q.from_unit(&w).unwrap()));
    }

    #[test]
    fn kinetic_degree_examples() {
        assert_eq!(KineticPolynomial::constant(1, 7.0).kinetic_degree(), 0);
        assert_eq!(KineticPolynomial::zero(1).kinetic_degree(), 0);
        let txv = KineticMonomial::new(1.0, 1, &[1], &[1]).unwrap();
        assert_eq!(txv.kinetic_degree(), 6);
        let v2 = KineticMonomial::new(1.0, 0, &[0], &[2]).unwrap();
        assert_eq!(v2.kinetic_degree(), 2);
    }

    #[test]
    fn shifted_expansion_matches_direct_evaluation() {
        let origin = p1(0.5, 0.0, -1.5);
        let terms = vec![
            KineticMonomial::new(2.0, 1, &[0], &[0]).unwrap(),
            KineticMonomial::new(-0.5, 0, &[0], &[2]).unwrap(),
            KineticMonomial::new(1.0, 0, &[1], &[1]).unwrap(),
        ];
        let p = KineticPolynomial::from_shifted(1, &terms, &origin).unwrap();
        let z = p1(1.25, 0.75, 0.3);
        let (dt, dx, dv) = (z.t - origin.t, z.x[0] - origin.x[0], z.v[0] - origin.v[0]);
        let direct = 2.0 * dt - 0.5 * dv * dv + dx * dv;
        assert!((p.eval(&z) - direct).abs() < 1e-12);
        assert_eq!(p.kinetic_degree(), 4);
    }

    #[test]
    fn exponents_below_two_and_a_half() {
        let e = monomial_exponents_below(1, 2.5);
        // 1, v, t, v²
        assert_eq!(e.len(), 4);
        let e2 = monomial_exponents_below(2, 2.5);
        // 1, v1, v2, t, v1², v1v2, v2²
        assert_eq!(e2.len(), 7);
        assert_eq!(monomial_exponents_below(1, 0.5).len(), 1);
        // x enters from degree 3 on
        assert!(monomial_exponents_below(1, 3.5).iter().any(|(_, k, _)| k[0] == 1));
    }

    #[test]
    fn contains_cylinder_agrees_with_point_sampling() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let outer = Cylinder::new(p1(0.0, 0.0, 0.3), 1.0).unwrap();
        for _ in 0..200 {
            let c = p1(
                rng.gen_range(-0.5..0.0),
                rng.gen_range(-0.6..0.6),
                rng.gen_range(-0.4..0.9),
            );
            let inner = Cylinder::new(c, rng.gen_range(0.05..0.5)).unwrap();
            if !outer.contains_cylinder(&inner) {
                continue;
            }
            for _ in 0..200 {
                let w = p1(
                    rng.gen_range(-0.999..0.0),
                    rng.gen_range(-0.999..0.999),
                    rng.gen_range(-0.999..0.999),
                );
                let z = inner.from_unit(&w).unwrap();
                if inner.contains(&z) {
                    assert!(outer.contains(&z), "{inner:?} {z:?}");
                }
            }
        }
    }
}
