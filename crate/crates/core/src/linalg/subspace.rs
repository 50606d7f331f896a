use super::matrix::ComplexMatrix;
use super::qr::qr_unchecked;
use super::svd::svd;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point of `Gr_k(C^m)`: an `m x k` matrix with orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceFrame<T> {
    basis: ComplexMatrix<T>,
}

impl<T: Real> SubspaceFrame<T> {
    /// Orthonormalizes the columns of `m`. Fails if they are numerically dependent.
    pub fn span(m: &ComplexMatrix<T>) -> Result<Self> {
        let k = m.cols();
        if k == 0 || k > m.rows() {
            return Err(Error::Dimension(format!(
                "a frame needs 1 <= k <= m, got k = {k}, m = {}",
                m.rows()
            )));
        }
        let (q, r) = qr_unchecked(m);
        let scale = m.frobenius_norm();
        for i in 0..k {
            if r[(i, i)].re <= T::lit(1e-14) * scale {
                return Err(Error::RankDeficient {
                    index: i,
                    value: r[(i, i)].re.as_f64(),
                    threshold: (T::lit(1e-14) * scale).as_f64(),
                });
            }
        }
        Ok(Self { basis: q })
    }

    /// Wraps a matrix whose columns are already orthonormal to `1e-10`.
    pub fn from_orthonormal(basis: ComplexMatrix<T>) -> Result<Self> {
        let k = basis.cols();
        let gram = &basis.adjoint() * &basis;
        if gram.sub(&ComplexMatrix::identity(k)).max_abs() > T::lit(1e-10) {
            return Err(Error::Dimension("columns are not orthonormal".into()));
        }
        Ok(Self { basis })
    }

    /// `span(e_1, ..., e_k)` in `C^m`.
    pub fn coordinate(m: usize, k: usize) -> Self {
        Self {
            basis: ComplexMatrix::identity(m).columns(0, k),
        }
    }

    pub fn ambient(&self) -> usize {
        self.basis.rows()
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &ComplexMatrix<T> {
        &self.basis
    }

    /// Image `A V` as a frame.
    pub fn transformed(&self, a: &ComplexMatrix<T>) -> Result<Self> {
        Self::span(&(a * &self.basis))
    }
}

/// Largest principal angle between two subspaces of equal rank, in `[0, pi/2]`.
///
/// Computed as `asin ||(I - U U^*) V||_2`, which stays accurate for small angles.
pub fn principal_angle<T: Real>(u: &SubspaceFrame<T>, v: &SubspaceFrame<T>) -> Result<T> {
    if u.ambient() != v.ambient() || u.rank() != v.rank() {
        return Err(Error::Dimension(format!(
            "principal angle between {}-plane in C^{} and {}-plane in C^{}",
            u.rank(),
            u.ambient(),
            v.rank(),
            v.ambient()
        )));
    }
    let ub = u.basis();
    let vb = v.basis();
    let residual = vb.sub(&(ub * &(&ub.adjoint() * vb)));
    // Pad to square for the Jacobi kernel.
    let m = residual.rows();
    let mut square = ComplexMatrix::zeros(m, m);
    square.set_block(0, 0, &residual);
    let s = svd(&square).log_sigma[0].exp();
    Ok(s.min(T::one()).asin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;
    use proptest::prelude::*;

    type M = ComplexMatrix<f64>;

    fn line(v: &[f64]) -> SubspaceFrame<f64> {
        let m = M::from_fn(v.len(), 1, |i, _| Complex::new(v[i], 0.0));
        SubspaceFrame::span(&m).unwrap()
    }

    #[test]
    fn same_subspace_has_zero_angle() {
        let u = SubspaceFrame::<f64>::coordinate(4, 2);
        assert_eq!(principal_angle(&u, &u).unwrap(), 0.0);
    }

    #[test]
    fn orthogonal_lines() {
        let a = principal_angle(&line(&[1.0, 0.0]), &line(&[0.0, 1.0])).unwrap();
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn diagonal_line_at_quarter_turn() {
        let s = 0.5f64.sqrt();
        let a = principal_angle(&line(&[1.0, 0.0]), &line(&[s, s])).unwrap();
        assert!((a - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn mismatched_dimensions() {
        let u = SubspaceFrame::<f64>::coordinate(3, 1);
        let v = SubspaceFrame::<f64>::coordinate(3, 2);
        assert!(principal_angle(&u, &v).is_err());
    }

    #[test]
    fn phase_does_not_change_the_line() {
        let u = line(&[1.0, 2.0, 0.5]);
        let v = SubspaceFrame::span(&u.basis().scale(Complex::new(0.0, -3.0))).unwrap();
        assert!(principal_angle(&u, &v).unwrap() < 1e-15);
    }

    fn frame(entries: &[(f64, f64)], m: usize, k: usize) -> Option<SubspaceFrame<f64>> {
        let mat = M::from_fn(m, k, |i, j| {
            let (re, im) = entries[i * k + j];
            Complex::new(re, im)
        });
        SubspaceFrame::span(&mat).ok()
    }

    proptest! {
        #[test]
        fn symmetric_and_triangle(
            raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36),
            k in 1usize..3,
        ) {
            let m = 4;
            let step = m * k;
            let (a, b, c) = match (
                frame(&raw[0..step], m, k),
                frame(&raw[step..2 * step], m, k),
                frame(&raw[2 * step..3 * step], m, k),
            ) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => return Ok(()),
            };
            let ab = principal_angle(&a, &b).unwrap();
            let ba = principal_angle(&b, &a).unwrap();
            let bc = principal_angle(&b, &c).unwrap();
            let ac = principal_angle(&a, &c).unwrap();
            prop_assert!((ab - ba).abs() < 1e-8);
            prop_assert!(ac <= ab + bc + 1e-8);
            prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&ab));
        }
    }
}
