use std::io::Read;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::One;

use super::degree::{projective_point, SphereField};
use super::weierstrass::SquareWeierstrass;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Scale of the Weierstrass surface: `rho(x, y) = 2 + SCALE sin(2 pi x) cos(2 pi y)`.
pub const WEIERSTRASS_SURFACE_SCALE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinField {
    /// The north pole everywhere.
    Constant,
    /// Spherical coordinates, `(sin 2pi y cos 2pi x, sin 2pi y sin 2pi x, cos 2pi y)`.
    Wrap,
    /// Conjugated `p(x + iy)` through inverse stereographic projection; degree 2.
    Weierstrass,
    /// Torus of revolution about the z-axis, `R = 2`, `r = 1/2`.
    TorusRev,
    /// The Weierstrass field times a positive radius profile.
    WeierstrassSurface,
}

impl BuiltinField {
    pub const ALL: [BuiltinField; 5] = [
        BuiltinField::Constant,
        BuiltinField::Wrap,
        BuiltinField::Weierstrass,
        BuiltinField::TorusRev,
        BuiltinField::WeierstrassSurface,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinField::Constant => "constant",
            BuiltinField::Wrap => "wrap",
            BuiltinField::Weierstrass => "weierstrass",
            BuiltinField::TorusRev => "torus-rev",
            BuiltinField::WeierstrassSurface => "weierstrass-surface",
        }
    }
}

impl FromStr for BuiltinField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| invalid("field", format!("unknown built-in field `{s}`")))
    }
}

fn coords<T: Real>(idx: usize, n: usize) -> (T, T) {
    let nn = T::from_usize_lossy(n);
    let half = T::lit(0.5);
    (
        (T::from_usize_lossy(idx / n) + half) / nn,
        (T::from_usize_lossy(idx % n) + half) / nn,
    )
}

fn weierstrass_point<T: Real>(wp: &SquareWeierstrass<T>, x: T, y: T) -> [T; 3] {
    let parts = wp.parts(Complex::new(x, y));
    let z2 = parts.z * parts.z;
    // |p| <= 1 iff |1 + z^2 s| <= |z|^2.
    if (Complex::<T>::one() + z2 * parts.regular).norm_sqr() <= z2.norm_sqr() {
        projective_point(parts.value().conj(), Complex::one())
    } else {
        projective_point(Complex::one(), parts.reciprocal().conj())
    }
}

/// Raw samples of a built-in field on the offset `n x n` grid.
pub fn surface_samples<T: Real>(kind: BuiltinField, n: usize) -> Result<Vec<[T; 3]>> {
    if n == 0 {
        return Err(invalid("N", "grid must be positive"));
    }
    let tau = T::TAU();
    let wp = matches!(
        kind,
        BuiltinField::Weierstrass | BuiltinField::WeierstrassSurface
    )
    .then(SquareWeierstrass::<T>::new);
    Ok((0..n * n)
        .map(|idx| {
            let (x, y) = coords::<T>(idx, n);
            match kind {
                BuiltinField::Constant => [T::zero(), T::zero(), T::one()],
                BuiltinField::Wrap => {
                    let (sy, cy) = (tau * y).sin_cos();
                    let (sx, cx) = (tau * x).sin_cos();
                    [sy * cx, sy * sx, cy]
                }
                BuiltinField::Weierstrass => weierstrass_point(wp.as_ref().unwrap(), x, y),
                BuiltinField::TorusRev => {
                    let (big, small) = (T::lit(2.0), T::lit(0.5));
                    let (sy, cy) = (tau * y).sin_cos();
                    let (sx, cx) = (tau * x).sin_cos();
                    let rad = big + small * cy;
                    [rad * cx, rad * sx, small * sy]
                }
                BuiltinField::WeierstrassSurface => {
                    let v = weierstrass_point(wp.as_ref().unwrap(), x, y);
                    let rho = T::lit(2.0)
                        + T::lit(WEIERSTRASS_SURFACE_SCALE) * (tau * x).sin() * (tau * y).cos();
                    [rho * v[0], rho * v[1], rho * v[2]]
                }
            }
        })
        .collect())
}

/// A built-in field normalized onto the sphere.
pub fn builtin_field<T: Real>(kind: BuiltinField, n: usize) -> Result<SphereField<T>> {
    let raw = surface_samples(kind, n)?;
    match kind {
        BuiltinField::TorusRev | BuiltinField::WeierstrassSurface => {
            SphereField::normalized(n, &raw)
        }
        _ => SphereField::new(n, raw),
    }
}

/// Reads `x, y, f1, f2, f3` rows sampled on an offset grid, any order.
///
/// A non-numeric first row is treated as a header; `#` starts a comment.
/// Returns the grid size and the samples in row-major order.
pub fn read_field_csv<R: Read>(reader: R) -> Result<(usize, Vec<[f64; 3]>)> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in csv.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line());
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|t| t.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == 5 => rows.push(v),
            Ok(v) => {
                return Err(Error::Parse(format!(
                    "line {line}: expected 5 columns, found {}",
                    v.len()
                )))
            }
            Err(_) if idx == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("line {line}: {e}"))),
        }
    }
    let n = (rows.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != rows.len() {
        return Err(Error::Parse(format!(
            "{} samples do not form a square grid",
            rows.len()
        )));
    }
    let mut samples = vec![None; n * n];
    let locate = |t: f64| -> Option<usize> {
        let k = (t * n as f64 - 0.5).round();
        let back = (k + 0.5) / n as f64;
        ((t - back).abs() < 1e-9 && k >= 0.0 && k < n as f64).then_some(k as usize)
    };
    for row in rows {
        let (i, j) = match (locate(row[0]), locate(row[1])) {
            (Some(i), Some(j)) => (i, j),
            _ => {
                return Err(Error::Parse(format!(
                    "({}, {}) is not an offset grid point for N = {n}",
                    row[0], row[1]
                )))
            }
        };
        if samples[i * n + j].replace([row[2], row[3], row[4]]).is_some() {
            return Err(Error::Parse(format!("duplicate sample at ({}, {})", row[0], row[1])));
        }
    }
    Ok((n, samples.into_iter().map(|s| s.unwrap()).collect()))
}
