//! One-sided Jacobi SVD on column-scaled matrices.
//!
//! Columns are stored as unit vectors together with the logarithm of their
//! length, so a matrix `B = C diag(exp(s))` with a well-conditioned `C` keeps
//! relative accuracy in every singular value even when the scales span far
//! more than the floating-point range. The same kernel computes the singular
//! values of long cocycle products factor by factor.

use num_complex::Complex;
use num_traits::Zero;

use super::matrix::{dot, norm, ComplexMatrix};
use crate::scalar::Real;

pub const JACOBI_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 60;

/// `M = U diag(sigma) V^*` with `sigma` stored as natural logarithms.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    /// `log sigma_i`, sorted descending. A zero singular value is `-inf`.
    pub log_sigma: Vec<T>,
    pub u: ComplexMatrix<T>,
    pub v: ComplexMatrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn singular_values(&self) -> Vec<T> {
        self.log_sigma.iter().map(|s| s.exp()).collect()
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let sigma: Vec<_> = self
            .singular_values()
            .into_iter()
            .map(|s| Complex::new(s, T::zero()))
            .collect();
        &(&self.u * &ComplexMatrix::diagonal(&sigma)) * &self.v.adjoint()
    }

    /// `log sigma_k - log sigma_{k+1}` for `1 <= k < n` (1-based `k`).
    pub fn log_gap(&self, k: usize) -> T {
        self.log_sigma[k - 1] - self.log_sigma[k]
    }
}

/// Singular value decomposition of a square matrix.
pub fn svd<T: Real>(m: &ComplexMatrix<T>) -> Svd<T> {
    let n = m.cols();
    let mut cols = Vec::with_capacity(n);
    let mut logs = Vec::with_capacity(n);
    for j in 0..n {
        let (c, s) = normalized(m.column(j));
        cols.push(c);
        logs.push(s);
    }
    jacobi(cols, logs, ComplexMatrix::identity(n))
}

/// Running SVD of a product `F_n ... F_2 F_1`, one factor at a time.
#[derive(Clone, Debug)]
pub struct ProductSvd<T> {
    state: Svd<T>,
    factors: usize,
}

impl<T: Real> ProductSvd<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            state: Svd {
                log_sigma: vec![T::zero(); dim],
                u: ComplexMatrix::identity(dim),
                v: ComplexMatrix::identity(dim),
            },
            factors: 0,
        }
    }

    /// Replaces the product `P` by `factor * P`.
    pub fn push_left(&mut self, factor: &ComplexMatrix<T>) {
        let n = self.state.u.cols();
        let fu = factor * &self.state.u;
        let mut cols = Vec::with_capacity(n);
        let mut logs = Vec::with_capacity(n);
        for j in 0..n {
            let (c, s) = normalized(fu.column(j));
            cols.push(c);
            logs.push(self.state.log_sigma[j] + s);
        }
        let v = std::mem::replace(&mut self.state.v, ComplexMatrix::zeros(0, 0));
        self.state = jacobi(cols, logs, v);
        self.factors += 1;
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn current(&self) -> &Svd<T> {
        &self.state
    }
}

fn normalized<T: Real>(mut c: Vec<Complex<T>>) -> (Vec<Complex<T>>, T) {
    let n = norm(&c);
    if n > T::zero() && n.is_finite() {
        let inv = n.recip();
        c.iter_mut().for_each(|z| *z = *z * inv);
        (c, n.ln())
    } else {
        c.iter_mut().for_each(|z| *z = Complex::zero());
        (c, T::neg_infinity())
    }
}

/// Orthogonalizes the columns of `B = C diag(exp(logs))`, applying the same
/// rotations to the columns of `v`.
fn jacobi<T: Real>(
    mut cols: Vec<Vec<Complex<T>>>,
    mut logs: Vec<T>,
    mut v: ComplexMatrix<T>,
) -> Svd<T> {
    let n = cols.len();
    let rows = cols.first().map_or(0, Vec::len);
    let tol = T::tol(JACOBI_TOL);
    let mut vcols: Vec<Vec<Complex<T>>> = (0..n).map(|j| v.column(j)).collect();

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (big, small) = if logs[p] >= logs[q] { (p, q) } else { (q, p) };
                let kappa = dot(&cols[big], &cols[small]);
                let abs_kappa = kappa.norm();
                if abs_kappa <= tol {
                    continue;
                }
                rotated = true;
                let phase = kappa / abs_kappa;
                let rho = if logs[small] == T::neg_infinity() {
                    T::zero()
                } else {
                    (logs[small] - logs[big]).exp()
                };
                let one = T::one();
                let two = T::lit(2.0);
                let one_m = one - rho * rho;
                let denom = one_m + (one_m * one_m + T::lit(4.0) * rho * rho * abs_kappa * abs_kappa).sqrt();
                let tau = -two * abs_kappa / denom;
                let t = tau * rho;
                let c = (one + t * t).sqrt().recip();

                // Align the phase of the smaller column with the larger one.
                let cs: Vec<_> = cols[small].iter().map(|&z| z * phase.conj()).collect();
                let vs: Vec<_> = vcols[small].iter().map(|&z| z * phase.conj()).collect();

                let t_rho = tau * rho * rho;
                let new_big: Vec<_> = cols[big]
                    .iter()
                    .zip(&cs)
                    .map(|(&b, &s)| (b - s * t_rho) * c)
                    .collect();
                let new_small: Vec<_> = cs
                    .iter()
                    .zip(&cols[big])
                    .map(|(&s, &b)| (s + b * tau) * c)
                    .collect();
                let new_vbig: Vec<_> = vcols[big]
                    .iter()
                    .zip(&vs)
                    .map(|(&b, &s)| (b - s * t) * c)
                    .collect();
                let new_vsmall: Vec<_> = vs
                    .iter()
                    .zip(&vcols[big])
                    .map(|(&s, &b)| (s + b * t) * c)
                    .collect();

                let (cb, lb) = normalized(new_big);
                let (cs, ls) = normalized(new_small);
                cols[big] = cb;
                logs[big] += lb;
                cols[small] = cs;
                logs[small] += ls;
                vcols[big] = new_vbig;
                vcols[small] = new_vsmall;
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| logs[b].partial_cmp(&logs[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut u = ComplexMatrix::zeros(rows, n);
    v = ComplexMatrix::zeros(n, n);
    let mut log_sigma = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &cols[src]);
        v.set_column(dst, &vcols[src]);
        log_sigma.push(logs[src]);
    }
    Svd { log_sigma, u, v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qr::qr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = ComplexMatrix<f64>;

    fn random(n: usize, seed: u64) -> M {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        M::from_fn(n, n, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn diagonal_singular_values() {
        let m = M::from_real_rows(&[&[3.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]);
        let s = svd(&m).singular_values();
        for (got, want) in s.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn unitary_has_unit_singular_values() {
        let (q, _) = qr(&random(4, 3)).unwrap();
        for s in svd(&q).singular_values() {
            assert!((s - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn antidiagonal_two_by_two() {
        let m = M::from_real_rows(&[&[0.0, 2.0], &[1.0, 0.0]]);
        let s = svd(&m).singular_values();
        assert!((s[0] - 2.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reconstruction_and_determinant() {
        for seed in 0..20 {
            let n = 2 + (seed as usize % 6);
            let m = random(n, seed);
            let d = svd(&m);
            assert!(d.reconstruct().sub(&m).frobenius_norm() <= 1e-10 * m.frobenius_norm());
            let prod: f64 = d.log_sigma.iter().sum::<f64>().exp();
            assert!((prod / m.det().norm() - 1.0).abs() < 1e-9);
            assert!(d.log_sigma.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_of_r_matches_svd_of_m() {
        for seed in 100..110 {
            let m = random(5, seed);
            let (_, r) = qr(&m).unwrap();
            let a = svd(&m).singular_values();
            let b = svd(&r).singular_values();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-9 * x.max(1.0));
            }
        }
    }

    #[test]
    fn product_tracks_huge_gaps() {
        // diag(2, 1/2)^1000 has a singular value ratio of 4^1000, far beyond f64 range.
        let a = M::from_real_rows(&[&[2.0, 0.0], &[0.0, 0.5]]);
        let mut p = ProductSvd::new(2);
        for _ in 0..1000 {
            p.push_left(&a);
        }
        let gap = p.current().log_gap(1);
        assert!((gap - 1000.0 * 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn product_matches_direct_svd_for_short_products() {
        let mut p = ProductSvd::new(3);
        let mut direct = M::identity(3);
        for seed in 0..8 {
            let f = random(3, 50 + seed);
            p.push_left(&f);
            direct = &f * &direct;
        }
        let want = svd(&direct);
        for (x, y) in p.current().log_sigma.iter().zip(&want.log_sigma) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!(p.current().reconstruct().sub(&direct).frobenius_norm() < 1e-9 * direct.frobenius_norm());
    }

    #[test]
    fn graded_product_keeps_small_singular_value_accurate() {
        // Upper triangular with a strongly graded diagonal; the exact singular
        // values of the product are known through the determinant identity.
        let f = M::from_real_rows(&[&[3.0, 1.0], &[0.0, 1.0 / 3.0]]);
        let mut p = ProductSvd::new(2);
        for _ in 0..300 {
            p.push_left(&f);
        }
        let s = &p.current().log_sigma;
        // det = 1 exactly, so log sigma_1 + log sigma_2 = 0.
        assert!((s[0] + s[1]).abs() < 1e-9);
        assert!((s[0] / 300.0 - 3f64.ln()).abs() < 1e-2);
    }

    #[test]
    fn single_precision_runs() {
        let m = ComplexMatrix::<f32>::from_real_rows(&[&[0.0, 2.0], &[1.0, 0.0]]);
        let s = svd(&m).singular_values();
        assert!((s[0] - 2.0).abs() < 1e-5 && (s[1] - 1.0).abs() < 1e-5);
    }
}
