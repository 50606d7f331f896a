//! Weierstrass `p` function of the square lattice `Z + iZ`.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// Lattice points `w != 0` with `|w| <= LATTICE_RADIUS` enter the direct sum.
pub const LATTICE_RADIUS: i64 = 6;

const GAMMA_QUARTER: f64 = 3.625_609_908_221_908;

/// `G_4 = sum' w^-4` over the square lattice, `Gamma(1/4)^8 / (960 pi^2)`.
pub fn g4_square() -> f64 {
    GAMMA_QUARTER.powi(8) / (960.0 * std::f64::consts::PI.powi(2))
}

/// Truncated `p` with the omitted `z^2` tail added back in closed form.
#[derive(Clone, Debug)]
pub struct SquareWeierstrass<T> {
    lattice: Vec<Complex<T>>,
    tail: T,
}

/// `p(z)` split as `1/z^2 + s(z)`, with `s` analytic near the origin.
#[derive(Clone, Copy, Debug)]
pub struct WpParts<T> {
    pub z: Complex<T>,
    pub regular: Complex<T>,
}

impl<T: Real> WpParts<T> {
    pub fn value(&self) -> Complex<T> {
        (self.z * self.z).inv() + self.regular
    }

    /// `1 / p(z) = z^2 / (1 + z^2 s(z))`, finite at the pole.
    pub fn reciprocal(&self) -> Complex<T> {
        let z2 = self.z * self.z;
        z2 / (Complex::<T>::one() + z2 * self.regular)
    }
}

impl<T: Real> Default for SquareWeierstrass<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> SquareWeierstrass<T> {
    pub fn new() -> Self {
        let r = LATTICE_RADIUS;
        let mut lattice = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                if (a, b) != (0, 0) && a * a + b * b <= r * r {
                    lattice.push(Complex::new(T::from_i64(a).unwrap(), T::from_i64(b).unwrap()));
                }
            }
        }
        let partial = lattice
            .iter()
            .fold(Complex::<T>::zero(), |acc, w| acc + (w * w * w * w).inv());
        // The truncated sum is real by symmetry.
        let tail = T::lit(3.0) * (T::lit(g4_square()) - partial.re);
        Self { lattice, tail }
    }

    /// Reduces `z` to the centred fundamental domain and splits off the pole.
    pub fn parts(&self, z: Complex<T>) -> WpParts<T> {
        let z = Complex::new(z.re - z.re.round(), z.im - z.im.round());
        let regular = self.lattice.iter().fold(Complex::<T>::zero(), |acc, &w| {
            let d = z - w;
            acc + (d * d).inv() - (w * w).inv()
        }) + z * z * self.tail;
        WpParts { z, regular }
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.parts(z).value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wp() -> SquareWeierstrass<f64> {
        SquareWeierstrass::new()
    }

    /// Large direct lattice sum used as a reference.
    fn reference(z: Complex<f64>, r: i64) -> Complex<f64> {
        let mut acc = (z * z).inv();
        for a in -r..=r {
            for b in -r..=r {
                if (a, b) == (0, 0) || a * a + b * b > r * r {
                    continue;
                }
                let w = Complex::new(a as f64, b as f64);
                acc += ((z - w) * (z - w)).inv() - (w * w).inv();
            }
        }
        acc
    }

    #[test]
    fn g4_matches_lattice_sum() {
        let mut s = 0.0;
        for a in -400i64..=400 {
            for b in -400i64..=400 {
                if (a, b) != (0, 0) {
                    s += Complex::new(a as f64, b as f64).powi(-4).re;
                }
            }
        }
        assert!((s - g4_square()).abs() < 1e-5);
    }

    #[test]
    fn accuracy_away_from_poles() {
        for z in [
            Complex::new(0.25, 0.1),
            Complex::new(0.1, 0.3),
            Complex::new(0.37, -0.21),
        ] {
            let err = (wp().eval(z) - reference(z, 300)).norm();
            assert!(err < 1e-6, "error {err} at {z}");
        }
    }

    #[test]
    fn square_lattice_symmetries() {
        let p = wp();
        // The half-period (1 + i)/2 is a zero of p on the square lattice.
        assert!(p.eval(Complex::new(0.5, 0.5)).norm() < 1e-6);
        // p(iz) = -p(z) and p is even, periodic and real on the real axis.
        let z = Complex::new(0.21, 0.13);
        let iz = Complex::new(-z.im, z.re);
        assert!((p.eval(iz) + p.eval(z)).norm() < 1e-9 * p.eval(z).norm());
        assert!((p.eval(-z) - p.eval(z)).norm() < 1e-12 * p.eval(z).norm());
        assert!((p.eval(z + Complex::new(1.0, 0.0)) - p.eval(z)).norm() < 1e-12 * p.eval(z).norm());
        assert!(p.eval(Complex::new(0.3, 0.0)).im.abs() < 1e-12);
    }

    #[test]
    fn reciprocal_is_small_near_the_pole() {
        let parts = wp().parts(Complex::new(1e-3, 2e-3));
        let recip = parts.reciprocal();
        assert!((recip * parts.value() - Complex::one()).norm() < 1e-9);
        assert!(recip.norm() < 1e-5);
    }
}
