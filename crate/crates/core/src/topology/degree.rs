use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Smallest grid accepted by [`sphere_degree`].
pub const MIN_GRID: usize = 32;
/// Smallest sample count accepted by [`circle_winding`].
pub const MIN_CIRCLE_SAMPLES: usize = 64;
/// A degree is accepted when `|raw - degree|` stays below this.
pub const RESIDUAL_TOL: f64 = 0.1;

const COMMON_ZERO_TOL: f64 = 1e-12;
const MIN_NORM: f64 = 1e-10;

/// Unit vectors sampled on the offset grid `((i + 1/2)/N, (j + 1/2)/N)`,
/// stored row-major with index `i * N + j` (`i` along `x`).
#[derive(Clone, Debug, PartialEq)]
pub struct SphereField<T> {
    n: usize,
    samples: Vec<[T; 3]>,
}

impl<T: Real> SphereField<T> {
    pub fn new(n: usize, samples: Vec<[T; 3]>) -> Result<Self> {
        if n == 0 || samples.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {n}x{n} samples, got {}",
                samples.len()
            )));
        }
        let tol = T::tol(1e-12);
        for (idx, s) in samples.iter().enumerate() {
            let norm = norm3(s);
            if !((norm - T::one()).abs() <= tol) {
                return Err(invalid(
                    "samples",
                    format!("sample {idx} has norm {norm}, not 1"),
                ));
            }
        }
        Ok(Self { n, samples })
    }

    /// Normalizes samples of a map into `R^3 \ {0}`.
    pub fn normalized(n: usize, raw: &[[T; 3]]) -> Result<Self> {
        if n == 0 || raw.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {n}x{n} samples, got {}",
                raw.len()
            )));
        }
        let floor = T::lit(MIN_NORM);
        let mut samples = Vec::with_capacity(raw.len());
        for (idx, f) in raw.iter().enumerate() {
            let norm = norm3(f);
            if !(norm > floor) {
                return Err(invalid(
                    "samples",
                    format!("|f| = {norm:e} at sample {idx} is not bounded away from 0"),
                ));
            }
            samples.push([f[0] / norm, f[1] / norm, f[2] / norm]);
        }
        Ok(Self { n, samples })
    }

    pub fn grid(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[[T; 3]] {
        &self.samples
    }

    pub fn at(&self, i: usize, j: usize) -> [T; 3] {
        self.samples[(i % self.n) * self.n + j % self.n]
    }

    /// Pointwise antipodal map.
    pub fn antipodal(&self) -> Self {
        Self {
            n: self.n,
            samples: self.samples.iter().map(|s| [-s[0], -s[1], -s[2]]).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeResult {
    pub degree: i64,
    pub raw: f64,
    pub residual: f64,
    pub resolved: bool,
}

impl DegreeResult {
    fn from_raw(raw: f64) -> Self {
        let degree = raw.round();
        let residual = (raw - degree).abs();
        Self {
            degree: degree as i64,
            raw,
            residual,
            resolved: residual < RESIDUAL_TOL,
        }
    }
}

fn norm3<T: Real>(v: &[T; 3]) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn sub3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn triple<T: Real>(a: [T; 3], b: [T; 3], c: [T; 3]) -> T {
    a[0] * (b[1] * c[2] - b[2] * c[1]) + a[1] * (b[2] * c[0] - b[0] * c[2])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Degree as the normalized pullback of the area form, central differences.
pub fn sphere_degree<T: Real>(phi: &SphereField<T>) -> Result<DegreeResult> {
    let n = phi.n;
    if n < MIN_GRID {
        return Err(invalid("N", format!("grid {n} is below {MIN_GRID}")));
    }
    // Row sums in parallel, folded in row order.
    let rows: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = T::zero();
            for j in 0..n {
                let dx = sub3(phi.at(i + 1, j), phi.at(i + n - 1, j));
                let dy = sub3(phi.at(i, j + 1), phi.at(i, j + n - 1));
                acc += triple(phi.at(i, j), dx, dy);
            }
            acc
        })
        .collect();
    let total = rows.into_iter().fold(T::zero(), |a, r| a + r);
    // (N/2)^2 per difference pair times cell area 1/N^2.
    let raw = total / (T::lit(16.0) * T::PI());
    if !raw.is_finite() {
        return Err(Error::NonFinite("degree integral".into()));
    }
    Ok(DegreeResult::from_raw(raw.as_f64()))
}

/// Point of `P(C^2)` as a unit vector, north pole at `[1:0]`.
pub(crate) fn projective_point<T: Real>(a: Complex<T>, b: Complex<T>) -> [T; 3] {
    let two = T::lit(2.0);
    if b.norm_sqr() >= a.norm_sqr() {
        let w = a / b;
        let s = w.norm_sqr();
        let den = s + T::one();
        [two * w.re / den, two * w.im / den, (s - T::one()) / den]
    } else {
        let v = b / a;
        let s = v.norm_sqr();
        let den = s + T::one();
        [two * v.re / den, -two * v.im / den, (T::one() - s) / den]
    }
}

/// Inverse stereographic image of `[a : b]` on the offset grid.
pub fn projective_to_sphere<T: Real>(
    n: usize,
    a: &[Complex<T>],
    b: &[Complex<T>],
) -> Result<SphereField<T>> {
    if n == 0 || a.len() != n * n || b.len() != n * n {
        return Err(Error::Dimension(format!(
            "expected {} samples of a and b, got {} and {}",
            n * n,
            a.len(),
            b.len()
        )));
    }
    let tol = T::lit(COMMON_ZERO_TOL);
    let mut samples = Vec::with_capacity(n * n);
    for (idx, (&ai, &bi)) in a.iter().zip(b).enumerate() {
        let mass = ai.norm_sqr() + bi.norm_sqr();
        if !(mass > tol) {
            let at = crate::cocycle::grid_point::<f64>(idx, n, 2, true);
            return Err(Error::CommonZero { value: mass.as_f64(), at });
        }
        samples.push(projective_point(ai, bi));
    }
    SphereField::new(n, samples)
}

/// Degree of `f / |f|` for a sampled map `T^2 -> R^3 \ {0}`.
pub fn winding_number_surface<T: Real>(n: usize, f: &[[T; 3]]) -> Result<DegreeResult> {
    sphere_degree(&SphereField::normalized(n, f)?)
}

/// Winding number of a sampled loop `T^1 -> C \ {0}` around the origin.
pub fn circle_winding<T: Real>(u: &[Complex<T>]) -> Result<i64> {
    let n = u.len();
    if n < MIN_CIRCLE_SAMPLES {
        return Err(invalid(
            "N",
            format!("{n} samples, need at least {MIN_CIRCLE_SAMPLES}"),
        ));
    }
    let floor = T::lit(MIN_NORM);
    if let Some(k) = u.iter().position(|z| !(z.norm() > floor)) {
        return Err(invalid(
            "u",
            format!("|u| = {:e} at sample {k}", u[k].norm().as_f64()),
        ));
    }
    let total = (0..n).fold(T::zero(), |acc, k| {
        let step = u[(k + 1) % n] / u[k];
        acc + step.im.atan2(step.re)
    });
    Ok((total / T::TAU()).round().to_i64().unwrap_or(0))
}

/// Herman's test: obstructed iff `deg_t - 1` does not divide `deg_ap`.
pub fn herman_obstruction(deg_t: i64, deg_ap: i64) -> bool {
    let m = deg_t - 1;
    if m == 0 {
        deg_ap != 0
    } else {
        deg_ap % m != 0
    }
}

/// Degree-zero test; an unresolved degree is reported as an error.
pub fn homotopic_to_constant<T: Real>(phi: &SphereField<T>) -> Result<bool> {
    let r = sphere_degree(phi)?;
    if !r.resolved {
        return Err(Error::Unresolved {
            raw: r.raw,
            residual: r.residual,
        });
    }
    Ok(r.degree == 0)
}
