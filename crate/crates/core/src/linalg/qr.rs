use num_complex::Complex;
use num_traits::Zero;

use super::matrix::{dot, norm, ComplexMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative threshold below which a diagonal entry of `R` signals rank deficiency.
pub const RANK_TOL: f64 = 1e-14;

/// Thin QR factorization `M = Q R` by modified Gram-Schmidt with one
/// re-orthogonalization pass. `R` has a real, nonnegative diagonal.
pub fn qr<T: Real>(m: &ComplexMatrix<T>) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "qr expects a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let (q, r) = qr_unchecked(m);
    let threshold = T::lit(RANK_TOL) * m.frobenius_norm();
    for i in 0..r.rows() {
        let d = r[(i, i)].re;
        if d < threshold || d.is_zero() {
            return Err(Error::RankDeficient {
                index: i,
                value: d.as_f64(),
                threshold: threshold.as_f64(),
            });
        }
    }
    Ok((q, r))
}

/// Same factorization without the rank check. A column that vanishes after
/// orthogonalization gets a zero diagonal and is replaced in `Q` by a unit
/// vector orthogonal to the previous columns, so `Q` stays unitary.
pub fn qr_unchecked<T: Real>(m: &ComplexMatrix<T>) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
    let rows = m.rows();
    let cols = m.cols();
    let mut qcols: Vec<Vec<Complex<T>>> = Vec::with_capacity(cols);
    let mut r = ComplexMatrix::zeros(cols, cols);
    for j in 0..cols {
        let mut v = m.column(j);
        for _pass in 0..2 {
            for (i, qi) in qcols.iter().enumerate() {
                let s = dot(qi, &v);
                for (vk, &qk) in v.iter_mut().zip(qi) {
                    *vk -= s * qk;
                }
                r[(i, j)] += s;
            }
        }
        let nv = norm(&v);
        if nv > T::zero() {
            let inv = nv.recip();
            v.iter_mut().for_each(|z| *z = *z * inv);
            r[(j, j)] = Complex::new(nv, T::zero());
        } else {
            v = orthogonal_completion(&qcols, rows);
        }
        qcols.push(v);
    }
    let mut q = ComplexMatrix::zeros(rows, cols);
    for (j, c) in qcols.iter().enumerate() {
        q.set_column(j, c);
    }
    (q, r)
}

fn orthogonal_completion<T: Real>(basis: &[Vec<Complex<T>>], rows: usize) -> Vec<Complex<T>> {
    let mut best: Option<(T, Vec<Complex<T>>)> = None;
    for e in 0..rows {
        let mut v = vec![Complex::zero(); rows];
        v[e] = Complex::new(T::one(), T::zero());
        for _pass in 0..2 {
            for qi in basis {
                let s = dot(qi, &v);
                for (vk, &qk) in v.iter_mut().zip(qi) {
                    *vk -= s * qk;
                }
            }
        }
        let n = norm(&v);
        if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
            best = Some((n, v));
        }
    }
    let (n, mut v) = best.expect("rows > 0");
    let inv = n.recip();
    v.iter_mut().for_each(|z| *z = *z * inv);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = ComplexMatrix<f64>;

    fn random(n: usize, seed: u64) -> M {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        M::from_fn(n, n, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn assert_unitary(q: &M) {
        let g = &q.adjoint() * q;
        assert!(g.sub(&M::identity(q.cols())).max_abs() < 1e-13);
    }

    #[test]
    fn identity_factors_trivially() {
        let (q, r) = qr(&M::identity(3)).unwrap();
        assert_eq!(q, M::identity(3));
        assert_eq!(r, M::identity(3));
    }

    #[test]
    fn positive_diagonal_is_left_alone() {
        let m = M::from_real_rows(&[&[2.0, 0.0], &[0.0, 0.5]]);
        let (q, r) = qr(&m).unwrap();
        assert_eq!(q, M::identity(2));
        assert_eq!(r, m);
    }

    #[test]
    fn random_reconstruction() {
        let m = random(3, 11);
        let (q, r) = qr(&m).unwrap();
        assert_unitary(&q);
        assert!((&q * &r).sub(&m).frobenius_norm() < 1e-12 * m.frobenius_norm());
        for i in 0..3 {
            assert_eq!(r[(i, i)].im, 0.0);
            assert!(r[(i, i)].re >= 0.0);
            for j in 0..i {
                assert_eq!(r[(i, j)], Complex::zero());
            }
        }
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let m = M::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(qr(&m), Err(Error::RankDeficient { index: 1, .. })));
        let (q, _) = qr_unchecked(&m);
        assert_unitary(&q);
    }

    #[test]
    fn non_square_rejected() {
        assert!(qr(&M::zeros(2, 3)).is_err());
    }
}
