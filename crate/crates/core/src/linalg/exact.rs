//! Exact linear algebra over fields with no rounding: rationals, Gaussian
//! rationals and prime fields.

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// A field with exact arithmetic.
pub trait ExactField:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl ExactField for BigRational {}
impl ExactField for Complex<BigRational> {}

pub type GaussianRational = Complex<BigRational>;

/// The prime field `Z / P`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Gf<const P: u64>(u64);

impl<const P: u64> Gf<P> {
    pub fn new(v: i64) -> Self {
        Self(v.rem_euclid(P as i64) as u64)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// All field elements in increasing order.
    pub fn elements() -> impl Iterator<Item = Self> {
        (0..P).map(Self)
    }

    fn inverse(self) -> Self {
        assert!(self.0 != 0, "division by zero in GF({P})");
        // Fermat: a^(P-2)
        let mut base = self.0;
        let mut exp = P - 2;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % P;
            }
            base = base * base % P;
            exp >>= 1;
        }
        Self(acc)
    }
}

impl<const P: u64> Debug for Gf<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Add for Gf<P> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self((self.0 + rhs.0) % P)
    }
}

impl<const P: u64> Sub for Gf<P> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self((self.0 + P - rhs.0) % P)
    }
}

impl<const P: u64> Mul for Gf<P> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0 % P)
    }
}

impl<const P: u64> Div for Gf<P> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.inverse()
    }
}

impl<const P: u64> Neg for Gf<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Self((P - self.0) % P)
    }
}

impl<const P: u64> Zero for Gf<P> {
    fn zero() -> Self {
        Self(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl<const P: u64> One for Gf<P> {
    fn one() -> Self {
        Self(1 % P)
    }
}

impl<const P: u64> ExactField for Gf<P> {}

/// Dense matrix over an exact field, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct ExactMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: ExactField> ExactMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        self.data.chunks(self.cols.max(1)).map(<[F]>::to_vec).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(F::zero(), |acc, l| {
                acc + self.get(i, l).clone() * other.get(l, j).clone()
            })
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).clone() - other.get(i, j).clone()
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.row_reduce(self.cols).len()
    }

    /// Reduced row echelon form in place over the first `pivot_cols` columns.
    /// Returns the pivot column of each nonzero row.
    fn row_reduce(&mut self, pivot_cols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..pivot_cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, row * self.cols + j);
                }
            }
            let inv = F::one() / self.get(row, col).clone();
            for j in col..self.cols {
                let v = self.get(row, j).clone() * inv.clone();
                self.set(row, j, v);
            }
            for r in 0..self.rows {
                if r == row || self.get(r, col).is_zero() {
                    continue;
                }
                let factor = self.get(r, col).clone();
                for j in col..self.cols {
                    let v = self.get(r, j).clone() - factor.clone() * self.get(row, j).clone();
                    self.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }
}

/// Solution set of `A x = b`: one particular solution and a nullspace basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution<F> {
    pub particular: Vec<F>,
    pub nullspace: Vec<Vec<F>>,
}

/// Exact Gaussian elimination. Returns [`Error::Inconsistent`] when `A x = b`
/// has no solution.
pub fn solve_exact<F: ExactField>(a: &ExactMatrix<F>, b: &[F]) -> Result<ExactSolution<F>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.rows()
        )));
    }
    let n = a.cols();
    let mut aug = ExactMatrix::from_fn(a.rows(), n + 1, |i, j| {
        if j < n {
            a.get(i, j).clone()
        } else {
            b[i].clone()
        }
    });
    let pivots = aug.row_reduce(n);
    let rank = pivots.len();
    if (rank..aug.rows()).any(|r| !aug.get(r, n).is_zero()) {
        return Err(Error::Inconsistent);
    }
    let mut particular = vec![F::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = aug.get(r, n).clone();
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let nullspace = free
        .iter()
        .map(|&f| {
            let mut v = vec![F::zero(); n];
            v[f] = F::one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -aug.get(r, f).clone();
            }
            v
        })
        .collect();
    Ok(ExactSolution {
        particular,
        nullspace,
    })
}

/// `p/q` text form of a rational; integers are written without a denominator.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p`, `p/q` or a finite decimal such as `-0.25`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let numer = BigInt::from_str(&digits).map_err(|_| bad())?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        let q = BigRational::new(numer, denom);
        return Ok(if negative { -q } else { q });
    }
    Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?))
}

impl Display for ExactMatrix<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_rows() {
            let cells: Vec<_> = row.iter().map(format_rational).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn qm(rows: &[&[i64]]) -> ExactMatrix<BigRational> {
        ExactMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()).unwrap()
    }

    #[test]
    fn identity_system() {
        let sol = solve_exact(&ExactMatrix::identity(2), &[q(1), q(2)]).unwrap();
        assert_eq!(sol.particular, vec![q(1), q(2)]);
        assert!(sol.nullspace.is_empty());
    }

    #[test]
    fn zero_matrix_inconsistent() {
        let err = solve_exact(&ExactMatrix::<BigRational>::zeros(1, 1), &[q(1)]);
        assert!(matches!(err, Err(Error::Inconsistent)));
    }

    #[test]
    fn rank_one_system_has_line_of_solutions() {
        let a = qm(&[&[1, 1], &[2, 2]]);
        let sol = solve_exact(&a, &[q(3), q(6)]).unwrap();
        assert_eq!(sol.nullspace.len(), 1);
        let x = ExactMatrix::from_fn(2, 1, |i, _| sol.particular[i].clone());
        assert_eq!(a.matmul(&x), qm(&[&[3], &[6]]));
        let z = ExactMatrix::from_fn(2, 1, |i, _| sol.nullspace[0][i].clone());
        assert!(a.matmul(&z).is_zero());
    }

    #[test]
    fn gaussian_rationals() {
        let i = Complex::new(q(0), q(1));
        let one = Complex::new(q(1), q(0));
        let a = ExactMatrix::from_rows(vec![vec![i.clone(), one.clone()], vec![one.clone(), i.clone()]]).unwrap();
        let b = vec![one.clone(), Complex::new(q(0), q(0))];
        let sol = solve_exact(&a, &b).unwrap();
        let x = ExactMatrix::from_fn(2, 1, |r, _| sol.particular[r].clone());
        let ax = a.matmul(&x);
        assert_eq!(ax.get(0, 0), &one);
        assert!(ax.get(1, 0).is_zero());
    }

    #[test]
    fn prime_field_arithmetic() {
        type F5 = Gf<5>;
        assert_eq!(F5::new(3) * F5::new(2), F5::new(1));
        assert_eq!(F5::new(1) / F5::new(3), F5::new(2));
        assert_eq!(-F5::new(2), F5::new(3));
        assert_eq!(F5::new(-1), F5::new(4));
    }

    #[test]
    fn rational_text_round_trip() {
        for s in ["3/4", "-7/2", "5", "0"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(parse_rational("-0.25").unwrap(), BigRational::new((-1).into(), 4.into()));
        assert_eq!(parse_rational("6/4").unwrap(), BigRational::new(3.into(), 2.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }
}
