//! Analytic quasi-periodic cocycles represented as matrix-valued
//! trigonometric polynomials on `T^d`.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{qr_unchecked, ComplexMatrix, SubspaceFrame};
use crate::scalar::{cis_turns, Real};
use crate::torus::{TorusPoint, Translation};

/// Frequency vector `n` in `Z^d`.
pub type Frequency = Vec<i64>;

/// Iterates up to this length also carry the directly multiplied matrix.
pub const DIRECT_PRODUCT_MAX: usize = 30;

/// Grid and threshold for the invertibility certificate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateOptions {
    pub grid_per_dim: usize,
    pub threshold: f64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            grid_per_dim: 64,
            threshold: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvertibilityCertificate {
    pub min_abs_det: f64,
    pub argmin: Vec<f64>,
    pub certified: bool,
}

/// Scalar trigonometric polynomial `sum_n c_n exp(2 pi i <n, x>)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial<T> {
    d: usize,
    coeffs: BTreeMap<Frequency, Complex<T>>,
}

impl<T: Real> TrigPolynomial<T> {
    pub fn new(d: usize, terms: impl IntoIterator<Item = (Frequency, Complex<T>)>) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (n, c) in terms {
            if n.len() != d {
                return Err(Error::Dimension(format!(
                    "frequency {n:?} does not live in Z^{d}"
                )));
            }
            let slot = coeffs.entry(n).or_insert_with(Complex::zero);
            *slot += c;
        }
        Ok(Self { d, coeffs })
    }

    pub fn constant(d: usize, c: Complex<T>) -> Self {
        Self::new(d, [(vec![0; d], c)]).expect("zero frequency has the right length")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Frequency, &Complex<T>)> {
        self.coeffs.iter()
    }

    pub fn evaluate(&self, x: &[T]) -> Complex<T> {
        self.coeffs
            .iter()
            .fold(Complex::zero(), |acc, (n, &c)| acc + c * cis_turns(pairing(n, x)))
    }

    /// Pointwise complex conjugate: `n -> -n` with conjugated coefficients.
    pub fn conj(&self) -> Self {
        Self {
            d: self.d,
            coeffs: self
                .coeffs
                .iter()
                .map(|(n, c)| (n.iter().map(|v| -v).collect(), c.conj()))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            d: self.d,
            coeffs: self.coeffs.iter().map(|(n, &c)| (n.clone(), -c)).collect(),
        }
    }
}

/// `A: T^d -> Mat(m, C)` given by finitely many Fourier coefficients, with a
/// declared strip radius of analyticity and an accumulated imaginary shift
/// (the complexification `A_y(x) = A(x + i y)`).
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCocycle<T> {
    d: usize,
    m: usize,
    radius: T,
    base: BTreeMap<Frequency, ComplexMatrix<T>>,
    shift: Vec<T>,
    effective: Vec<(Frequency, ComplexMatrix<T>)>,
}

impl<T: Real> FourierCocycle<T> {
    pub fn new(
        d: usize,
        m: usize,
        radius: T,
        coeffs: impl IntoIterator<Item = (Frequency, ComplexMatrix<T>)>,
    ) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(invalid("d/m", "base and fiber dimensions must be positive"));
        }
        if !(radius > T::zero()) {
            return Err(invalid("r", "strip radius must be positive"));
        }
        let mut base: BTreeMap<Frequency, ComplexMatrix<T>> = BTreeMap::new();
        for (n, a) in coeffs {
            if n.len() != d {
                return Err(Error::Dimension(format!("frequency {n:?} does not live in Z^{d}")));
            }
            if a.rows() != m || a.cols() != m {
                return Err(Error::Dimension(format!(
                    "coefficient at {n:?} is {}x{}, expected {m}x{m}",
                    a.rows(),
                    a.cols()
                )));
            }
            if !a.is_finite() {
                return Err(Error::NonFinite(format!("coefficient at {n:?}")));
            }
            match base.get_mut(&n) {
                Some(existing) => *existing = existing.add(&a),
                None => {
                    base.insert(n, a);
                }
            }
        }
        let shift = vec![T::zero(); d];
        let effective = scaled_coefficients(&base, &shift);
        Ok(Self {
            d,
            m,
            radius,
            base,
            shift,
            effective,
        })
    }

    pub fn constant(d: usize, a: ComplexMatrix<T>) -> Result<Self> {
        let m = a.rows();
        Self::new(d, m, T::one(), [(vec![0; d], a)])
    }

    pub fn base_dim(&self) -> usize {
        self.d
    }

    pub fn fiber_dim(&self) -> usize {
        self.m
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn shift(&self) -> &[T] {
        &self.shift
    }

    /// Coefficients `A_n exp(-2 pi <n, y>)` including the current imaginary shift.
    pub fn coefficients(&self) -> &[(Frequency, ComplexMatrix<T>)] {
        &self.effective
    }

    /// `sum_n A_n exp(2 pi i <n, x>)`.
    pub fn evaluate(&self, x: &TorusPoint<T>) -> ComplexMatrix<T> {
        assert_eq!(x.dim(), self.d, "point dimension must match the base dimension");
        self.evaluate_coords(x.coords())
    }

    pub(crate) fn evaluate_coords(&self, x: &[T]) -> ComplexMatrix<T> {
        let mut out = ComplexMatrix::zeros(self.m, self.m);
        for (n, a) in &self.effective {
            let w = cis_turns(pairing(n, x));
            for i in 0..self.m {
                for j in 0..self.m {
                    out[(i, j)] += a[(i, j)] * w;
                }
            }
        }
        out
    }

    /// Evaluation together with a flag raised when `|det A(x)|` is below `threshold`.
    pub fn evaluate_flagged(&self, x: &TorusPoint<T>, threshold: T) -> (ComplexMatrix<T>, bool) {
        let a = self.evaluate(x);
        let singular = a.det().norm() < threshold;
        (a, singular)
    }

    /// Samples `|det A|` on a uniform grid of `grid_per_dim^d` points.
    pub fn certify_invertible(&self, opts: CertificateOptions) -> InvertibilityCertificate {
        let g = opts.grid_per_dim.max(1);
        let total = g.pow(self.d as u32);
        let (min, idx) = (0..total)
            .into_par_iter()
            .map(|idx| {
                let x = grid_point::<T>(idx, g, self.d, false);
                (self.evaluate_coords(&x).det().norm().as_f64(), idx)
            })
            .reduce(
                || (f64::INFINITY, usize::MAX),
                |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
            );
        let argmin = grid_point::<f64>(idx.min(total - 1), g, self.d, false);
        InvertibilityCertificate {
            min_abs_det: min,
            argmin,
            certified: min > opts.threshold,
        }
    }

    pub fn require_invertible(&self, opts: CertificateOptions) -> Result<InvertibilityCertificate> {
        let cert = self.certify_invertible(opts);
        if cert.certified {
            Ok(cert)
        } else {
            Err(Error::NotInvertible {
                min_abs_det: cert.min_abs_det,
                at: cert.argmin,
            })
        }
    }

    /// `A^(n)(x) = A(T^{n-1} x) ... A(T x) A(x)` in QR-factored form.
    pub fn iterate(&self, t: &Translation<T>, x: &TorusPoint<T>, n: usize) -> Result<IterateResult<T>> {
        if n == 0 {
            return Err(invalid("n", "iterate length must be at least 1"));
        }
        self.check_translation(t)?;
        let mut q = ComplexMatrix::identity(self.m);
        let mut factors = Vec::with_capacity(n);
        let mut direct = (n <= DIRECT_PRODUCT_MAX).then(|| ComplexMatrix::identity(self.m));
        let mut point = x.clone();
        for _ in 0..n {
            let a = self.evaluate(&point);
            if let Some(p) = direct.as_mut() {
                *p = &a * p;
            }
            let (q_next, r) = qr_unchecked(&(&a * &q));
            if !r.is_finite() {
                return Err(Error::NonFinite("cocycle iteration".into()));
            }
            q = q_next;
            factors.push(r);
            point = t.apply(&point);
        }
        Ok(IterateResult {
            n,
            direct,
            unitary: q,
            factors,
        })
    }

    /// `A_y(x) = A(x + i y)`: multiplies each coefficient by `exp(-2 pi <n, y>)`.
    /// Shifts accumulate, so two successive shifts equal one combined shift.
    pub fn complexify(&self, y: &[T]) -> Result<Self> {
        if y.len() != self.d {
            return Err(Error::Dimension(format!(
                "shift has length {}, base dimension is {}",
                y.len(),
                self.d
            )));
        }
        let shift: Vec<T> = self.shift.iter().zip(y).map(|(&s, &v)| s + v).collect();
        if shift.iter().any(|s| s.abs() >= self.radius) {
            return Err(Error::StripViolation {
                shift: shift.iter().map(|s| s.as_f64()).collect(),
                radius: self.radius.as_f64(),
            });
        }
        let effective = scaled_coefficients(&self.base, &shift);
        Ok(Self {
            shift,
            effective,
            ..self.clone()
        })
    }

    /// The cocycle `c A`.
    pub fn scaled(&self, c: Complex<T>) -> Self {
        let base: BTreeMap<_, _> = self.base.iter().map(|(n, a)| (n.clone(), a.scale(c))).collect();
        let effective = scaled_coefficients(&base, &self.shift);
        Self {
            base,
            effective,
            ..self.clone()
        }
    }

    pub(crate) fn check_translation(&self, t: &Translation<T>) -> Result<()> {
        if t.dim() != self.d {
            return Err(Error::Dimension(format!(
                "translation acts on T^{}, cocycle lives on T^{}",
                t.dim(),
                self.d
            )));
        }
        Ok(())
    }
}

/// The iterate `A^(n)(x)` kept as `Q_n R_n ... R_1`, where
/// `A(T^j x) Q_j = Q_{j+1} R_{j+1}` and `Q_0 = I`.
#[derive(Clone, Debug)]
pub struct IterateResult<T> {
    pub n: usize,
    /// The plain product, present only for `n <= 30`.
    pub direct: Option<ComplexMatrix<T>>,
    pub unitary: ComplexMatrix<T>,
    /// `R_1, ..., R_n` in the order they were produced.
    pub factors: Vec<ComplexMatrix<T>>,
}

impl<T: Real> IterateResult<T> {
    /// Multiplies the factored form back together. Overflows for long orbits
    /// with a positive top exponent.
    pub fn reassemble(&self) -> ComplexMatrix<T> {
        let m = self.unitary.rows();
        let r = self
            .factors
            .iter()
            .fold(ComplexMatrix::identity(m), |acc, f| f * &acc);
        &self.unitary * &r
    }

    /// `sum_j log |R_j[i, i]|` for every `i`.
    pub fn log_diagonal_sums(&self) -> Vec<T> {
        let m = self.unitary.rows();
        (0..m)
            .map(|i| self.factors.iter().fold(T::zero(), |acc, r| acc + r[(i, i)].re.ln()))
            .collect()
    }
}

/// Builds `A(x) = [[a, -conj(b)], [b, conj(a)]]`, so that `A(x) e_1 = (a, b)`
/// and `det A = |a|^2 + |b|^2`. Fails if `|a|^2 + |b|^2` dips below the
/// certificate threshold on the certificate grid.
pub fn build_su_form<T: Real>(
    a: &TrigPolynomial<T>,
    b: &TrigPolynomial<T>,
    radius: T,
    opts: CertificateOptions,
) -> Result<FourierCocycle<T>> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension("a and b live on different tori".into()));
    }
    let d = a.dim();
    let g = opts.grid_per_dim.max(1);
    let total = g.pow(d as u32);
    let (min, idx) = (0..total)
        .into_par_iter()
        .map(|idx| {
            let x = grid_point::<T>(idx, g, d, false);
            ((a.evaluate(&x).norm_sqr() + b.evaluate(&x).norm_sqr()).as_f64(), idx)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX),
            |p, q| if q.0 < p.0 || (q.0 == p.0 && q.1 < p.1) { q } else { p },
        );
    if min <= opts.threshold {
        return Err(Error::CommonZero {
            value: min,
            at: grid_point::<f64>(idx.min(total - 1), g, d, false),
        });
    }
    let entries = [
        (0, 0, a.clone()),
        (1, 0, b.clone()),
        (0, 1, b.conj().neg()),
        (1, 1, a.conj()),
    ];
    let mut coeffs: BTreeMap<Frequency, ComplexMatrix<T>> = BTreeMap::new();
    for (i, j, poly) in entries {
        for (n, &c) in poly.terms() {
            coeffs.entry(n.clone()).or_insert_with(|| ComplexMatrix::zeros(2, 2))[(i, j)] += c;
        }
    }
    FourierCocycle::new(d, 2, radius, coeffs)
}

/// Normalizing constant `mu = lambda^{-(k-1)/(m-k-1)}` of the block cocycle,
/// or `None` when the lower scalar block is empty.
pub fn block_mu<T: Real>(k: usize, m: usize, lambda: T) -> Result<Option<T>> {
    if !(1 <= k && k < m) {
        return Err(invalid("k", format!("need 1 <= k < m, got k = {k}, m = {m}")));
    }
    if !(lambda > T::zero()) {
        return Err(invalid("lambda", "must be positive"));
    }
    let lower = m - k - 1;
    let upper = k - 1;
    if lower == 0 {
        if upper > 0 && lambda != T::one() {
            return Err(Error::Unsatisfiable(format!(
                "k = {k}, m = {m} leaves no mu block, so lambda must be 1 (got {lambda})"
            )));
        }
        return Ok(None);
    }
    let exponent = -T::from_usize_lossy(upper) / T::from_usize_lossy(lower);
    Ok(Some(lambda.powf(exponent)))
}

/// `A~(x) = blockdiag(lambda I_{k-1}, A2(x_1, x_2), mu I_{m-k-1})` on `T^d`,
/// with `lambda^{k-1} mu^{m-k-1} = 1`.
pub fn build_block<T: Real>(
    a2: &FourierCocycle<T>,
    d: usize,
    k: usize,
    m: usize,
    lambda: T,
) -> Result<FourierCocycle<T>> {
    if a2.base_dim() != 2 || a2.fiber_dim() != 2 {
        return Err(invalid("A2", "seed cocycle must map T^2 into 2x2 matrices"));
    }
    if d < 2 {
        return Err(invalid("d", "target base dimension must be at least 2"));
    }
    let mu = block_mu(k, m, lambda)?;
    check_unimodular(a2)?;

    let mut coeffs: BTreeMap<Frequency, ComplexMatrix<T>> = BTreeMap::new();
    let zero: Frequency = vec![0; d];
    let mut constant = ComplexMatrix::zeros(m, m);
    for i in 0..k - 1 {
        constant[(i, i)] = Complex::new(lambda, T::zero());
    }
    if let Some(mu) = mu {
        for i in k + 1..m {
            constant[(i, i)] = Complex::new(mu, T::zero());
        }
    }
    coeffs.insert(zero, constant);
    for (n, block) in a2.coefficients() {
        let mut lifted = n.clone();
        lifted.resize(d, 0);
        let mut full = ComplexMatrix::zeros(m, m);
        full.set_block(k - 1, k - 1, block);
        match coeffs.get_mut(&lifted) {
            Some(existing) => *existing = existing.add(&full),
            None => {
                coeffs.insert(lifted, full);
            }
        }
    }
    let max_shift = a2.shift().iter().fold(T::zero(), |acc, s| acc.max(s.abs()));
    FourierCocycle::new(d, m, a2.radius() - max_shift, coeffs)
}

fn check_unimodular<T: Real>(a2: &FourierCocycle<T>) -> Result<()> {
    let g = 32;
    for idx in 0..g * g {
        let x = grid_point::<T>(idx, g, 2, false);
        let det = a2.evaluate_coords(&x).det();
        if (det - Complex::one()).norm() > T::lit(1e-9) {
            return Err(invalid(
                "A2",
                format!("seed must take values in SL_2(C); det = {det} at {x:?}"),
            ));
        }
    }
    Ok(())
}

/// `span(e_1, ..., e_{k-1}, iota(A2(pi x) e_1))`, the right-hand side of the
/// factorization `A~(x) V_k = (iota o H o A2_{e_1} o pi)(x)`, where `iota`
/// places a vector of `C^2` in coordinates `k, k+1`.
pub fn block_factorization_frame<T: Real>(
    a2: &FourierCocycle<T>,
    x: &TorusPoint<T>,
    k: usize,
    m: usize,
) -> Result<SubspaceFrame<T>> {
    let projected = TorusPoint::new(x.coords()[..2].to_vec());
    let image = a2.evaluate(&projected).column(0);
    let mut basis = ComplexMatrix::zeros(m, k);
    for i in 0..k - 1 {
        basis[(i, i)] = Complex::one();
    }
    basis[(k - 1, k - 1)] = image[0];
    basis[(k, k - 1)] = image[1];
    SubspaceFrame::span(&basis)
}

pub(crate) fn pairing<T: Real>(n: &[i64], x: &[T]) -> T {
    n.iter()
        .zip(x)
        .fold(T::zero(), |acc, (&ni, &xi)| acc + T::from_i64(ni).unwrap() * xi)
}

fn scaled_coefficients<T: Real>(
    base: &BTreeMap<Frequency, ComplexMatrix<T>>,
    shift: &[T],
) -> Vec<(Frequency, ComplexMatrix<T>)> {
    base.iter()
        .map(|(n, a)| {
            if shift.iter().all(|s| s.is_zero()) {
                return (n.clone(), a.clone());
            }
            let factor = (-T::TAU() * pairing(n, shift)).exp();
            (n.clone(), a.scale(Complex::new(factor, T::zero())))
        })
        .collect()
}

/// Point `idx` of the uniform grid with `g` points per axis, in row-major order
/// (first coordinate slowest). With `offset`, points sit at cell centres.
pub fn grid_point<T: Real>(idx: usize, g: usize, d: usize, offset: bool) -> Vec<T> {
    let mut coords = vec![T::zero(); d];
    let mut rest = idx;
    let half = if offset { T::lit(0.5) } else { T::zero() };
    for c in coords.iter_mut().rev() {
        let i = rest % g;
        rest /= g;
        *c = (T::from_usize_lossy(i) + half) / T::from_usize_lossy(g);
    }
    coords
}

/// Interchange format:
/// `{"d":..,"m":..,"r":..,"coeffs":[{"n":[..],"re":[[..]],"im":[[..]]},..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleFile {
    pub d: usize,
    pub m: usize,
    pub r: f64,
    pub coeffs: Vec<CoefficientEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub n: Vec<i64>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl<T: Real> FourierCocycle<T> {
    /// Serializable form. A complexified cocycle is written with its shifted
    /// coefficients and the strip radius that remains around the shifted torus.
    pub fn to_file(&self) -> CocycleFile {
        let max_shift = self.shift.iter().fold(T::zero(), |acc, s| acc.max(s.abs()));
        CocycleFile {
            d: self.d,
            m: self.m,
            r: (self.radius - max_shift).as_f64(),
            coeffs: self
                .effective
                .iter()
                .map(|(n, a)| CoefficientEntry {
                    n: n.clone(),
                    re: (0..self.m).map(|i| (0..self.m).map(|j| a[(i, j)].re.as_f64()).collect()).collect(),
                    im: (0..self.m).map(|i| (0..self.m).map(|j| a[(i, j)].im.as_f64()).collect()).collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &CocycleFile) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(file.coeffs.len());
        for entry in &file.coeffs {
            if entry.re.len() != file.m
                || entry.im.len() != file.m
                || entry.re.iter().chain(&entry.im).any(|row| row.len() != file.m)
            {
                return Err(Error::Dimension(format!(
                    "coefficient at {:?} is not {}x{}",
                    entry.n, file.m, file.m
                )));
            }
            let a = ComplexMatrix::from_fn(file.m, file.m, |i, j| {
                Complex::new(T::lit(entry.re[i][j]), T::lit(entry.im[i][j]))
            });
            coeffs.push((entry.n.clone(), a));
        }
        Self::new(file.d, file.m, T::lit(file.r), coeffs)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CocycleFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = ComplexMatrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn diag_half() -> FourierCocycle<f64> {
        FourierCocycle::constant(2, M::diagonal(&[c(2.0, 0.0), c(0.5, 0.0)])).unwrap()
    }

    fn triangular(cst: f64) -> FourierCocycle<f64> {
        let mut first = M::zeros(2, 2);
        first[(0, 0)] = c(cst, 0.0);
        let mut second = M::zeros(2, 2);
        second[(1, 1)] = c(1.0 / cst, 0.0);
        let mut off = M::zeros(2, 2);
        off[(0, 1)] = c(1.0, 0.0);
        FourierCocycle::new(2, 2, 1.0, [(vec![1, 0], first), (vec![-1, 0], second), (vec![0, 1], off)]).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, d: usize) -> TorusPoint<f64> {
        TorusPoint::new((0..d).map(|_| rng.gen::<f64>()).collect())
    }

    #[test]
    fn constant_cocycle_evaluates_everywhere_the_same() {
        let a = diag_half();
        let x = TorusPoint::new(vec![0.3, 0.9]);
        assert_eq!(a.evaluate(&x), M::diagonal(&[c(2.0, 0.0), c(0.5, 0.0)]));
    }

    #[test]
    fn single_mode_at_quarter_turn() {
        let a = FourierCocycle::new(2, 2, 1.0, [(vec![1, 0], M::identity(2))]).unwrap();
        let v = a.evaluate(&TorusPoint::new(vec![0.25, 0.0]));
        assert!(v.sub(&M::identity(2).scale(c(0.0, 1.0))).max_abs() < 1e-15);
    }

    #[test]
    fn su_form_examples() {
        let opts = CertificateOptions::default();
        let one = TrigPolynomial::constant(2, c(1.0, 0.0));
        let zero = TrigPolynomial::constant(2, c(0.0, 0.0));
        let id = build_su_form(&one, &zero, 1.0, opts).unwrap();
        assert_eq!(id.evaluate(&TorusPoint::new(vec![0.4, 0.1])), M::identity(2));
        let j = build_su_form(&zero, &one, 1.0, opts).unwrap();
        assert_eq!(
            j.evaluate(&TorusPoint::new(vec![0.4, 0.1])),
            M::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]])
        );
        let a = TrigPolynomial::new(2, [(vec![0, 0], c(2.0, 0.0)), (vec![1, 0], c(1.0, 0.0))]).unwrap();
        let b = TrigPolynomial::new(2, [(vec![0, 1], c(1.0, 0.0))]).unwrap();
        let s = build_su_form(&a, &b, 1.0, opts).unwrap();
        let v = s.evaluate(&TorusPoint::origin(2));
        assert!(v.sub(&M::from_real_rows(&[&[3.0, -1.0], &[1.0, 3.0]])).max_abs() < 1e-14);
        // Same value with b = 1.
        let s1 = build_su_form(&a, &one, 1.0, opts).unwrap();
        assert!(s1.evaluate(&TorusPoint::origin(2)).sub(&v).max_abs() < 1e-14);
    }

    #[test]
    fn su_form_determinant_identity() {
        let a = TrigPolynomial::new(2, [(vec![0, 0], c(0.5, 0.2)), (vec![1, -1], c(1.0, 0.0))]).unwrap();
        let b = TrigPolynomial::new(2, [(vec![0, 1], c(0.0, 1.0)), (vec![2, 0], c(0.3, 0.0))]).unwrap();
        let s = build_su_form(&a, &b, 1.0, CertificateOptions::default()).unwrap();
        for idx in 0..32 * 32 {
            let x = grid_point::<f64>(idx, 32, 2, true);
            let det = s.evaluate_coords(&x).det();
            let want = a.evaluate(&x).norm_sqr() + b.evaluate(&x).norm_sqr();
            assert!((det - c(want, 0.0)).norm() < 1e-12);
            let e1 = s.evaluate_coords(&x).column(0);
            assert!((e1[0] - a.evaluate(&x)).norm() < 1e-14 && (e1[1] - b.evaluate(&x)).norm() < 1e-14);
        }
    }

    #[test]
    fn su_form_rejects_common_zero() {
        // a = e(x1) - 1 and b = e(x2) - 1 vanish together at the origin.
        let a = TrigPolynomial::new(2, [(vec![1, 0], c(1.0, 0.0)), (vec![0, 0], c(-1.0, 0.0))]).unwrap();
        let b = TrigPolynomial::new(2, [(vec![0, 1], c(1.0, 0.0)), (vec![0, 0], c(-1.0, 0.0))]).unwrap();
        let err = build_su_form(&a, &b, 1.0, CertificateOptions::default());
        assert!(matches!(err, Err(Error::CommonZero { .. })));
    }

    #[test]
    fn iterate_of_constant_diagonal() {
        let t = Translation::default_for_dim(2);
        let it = diag_half().iterate(&t, &TorusPoint::origin(2), 10).unwrap();
        let want = M::diagonal(&[c(1024.0, 0.0), c(1.0 / 1024.0, 0.0)]);
        assert_eq!(it.direct.as_ref().unwrap(), &want);
        assert!(it.reassemble().sub(&want).max_abs() < 1e-12);
    }

    #[test]
    fn iterate_one_step_is_evaluation() {
        let t = Translation::default_for_dim(2);
        let x = TorusPoint::new(vec![0.2, 0.7]);
        let a = triangular(2.0);
        let it = a.iterate(&t, &x, 1).unwrap();
        assert!(it.reassemble().sub(&a.evaluate(&x)).max_abs() < 1e-14);
    }

    #[test]
    fn iterate_matches_evaluation_chain() {
        let t = Translation::default_for_dim(2);
        let x = TorusPoint::new(vec![0.31, 0.05]);
        let a = triangular(2.0);
        let it = a.iterate(&t, &x, 7).unwrap();
        let mut chain = M::identity(2);
        for p in t.orbit(&x, 7) {
            chain = &a.evaluate(&p) * &chain;
        }
        let scale = chain.frobenius_norm();
        assert!(it.reassemble().sub(&chain).frobenius_norm() < 1e-10 * scale);
        assert!(it.direct.unwrap().sub(&chain).frobenius_norm() < 1e-10 * scale);
        assert!(a.iterate(&t, &x, 31).unwrap().direct.is_none());
        assert!(a.iterate(&t, &x, 0).is_err());
    }

    #[test]
    fn cocycle_law() {
        let t = Translation::default_for_dim(2);
        let a = triangular(2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let x = random_point(&mut rng, 2);
            let n = rng.gen_range(1..10);
            let m = rng.gen_range(1..10);
            let full = a.iterate(&t, &x, n + m).unwrap().reassemble();
            let head = a.iterate(&t, &x, m).unwrap().reassemble();
            let xm = t.orbit(&x, m + 1).pop().unwrap();
            let tail = a.iterate(&t, &xm, n).unwrap().reassemble();
            assert!((&tail * &head).sub(&full).frobenius_norm() <= 1e-9 * full.frobenius_norm());
        }
    }

    #[test]
    fn complexify_scales_coefficients() {
        let a = triangular(2.0);
        assert_eq!(a.complexify(&[0.0, 0.0]).unwrap().coefficients(), a.coefficients());
        let single = FourierCocycle::new(2, 1, 1.0, [(vec![1, 0], M::identity(1))]).unwrap();
        let t = 0.15;
        let shifted = single.complexify(&[t, 0.0]).unwrap();
        let coef = shifted.coefficients()[0].1[(0, 0)];
        assert!((coef.re - (-2.0 * std::f64::consts::PI * t).exp()).abs() < 1e-15);

        let mut top = M::zeros(2, 2);
        top[(0, 0)] = c(2.0, 0.0);
        let mut bottom = M::zeros(2, 2);
        bottom[(1, 1)] = c(0.5, 0.0);
        let diag = FourierCocycle::new(2, 2, 1.0, [(vec![1, 0], top), (vec![0, 0], bottom)]).unwrap();
        let y = diag.complexify(&[0.1, 0.0]).unwrap();
        let x = TorusPoint::new(vec![0.37, 0.8]);
        let want = M::diagonal(&[
            cis_turns(0.37) * (2.0 * (-0.2 * std::f64::consts::PI).exp()),
            c(0.5, 0.0),
        ]);
        assert!(y.evaluate(&x).sub(&want).max_abs() < 1e-14);
    }

    #[test]
    fn complexify_composes_exactly() {
        let a = triangular(2.0);
        let y1 = [0.1, -0.05];
        let y2 = [0.2, 0.3];
        let twice = a.complexify(&y1).unwrap().complexify(&y2).unwrap();
        let once = a.complexify(&[y1[0] + y2[0], y1[1] + y2[1]]).unwrap();
        assert_eq!(twice.coefficients(), once.coefficients());
    }

    #[test]
    fn complexify_respects_strip() {
        let a = triangular(2.0);
        assert!(matches!(a.complexify(&[1.0, 0.0]), Err(Error::StripViolation { .. })));
        let half = a.complexify(&[0.6, 0.0]).unwrap();
        assert!(half.complexify(&[0.5, 0.0]).is_err());
    }

    #[test]
    fn block_normalization() {
        assert!((block_mu(2, 4, 3.0f64).unwrap().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(block_mu(1, 2, 3.0).unwrap(), None);
        assert_eq!(block_mu(1, 3, 3.0).unwrap(), Some(1.0));
        assert!(matches!(block_mu(2, 3, 3.0), Err(Error::Unsatisfiable(_))));
        assert_eq!(block_mu(2, 3, 1.0).unwrap(), None);
        assert!(block_mu(3, 3, 2.0).is_err());
    }

    #[test]
    fn block_with_trivial_scalar_parts_is_pullback() {
        let a2 = triangular(2.0);
        let b = build_block(&a2, 3, 1, 2, 5.0).unwrap();
        let x = TorusPoint::new(vec![0.12, 0.66, 0.9]);
        let px = TorusPoint::new(vec![0.12, 0.66]);
        assert!(b.evaluate(&x).sub(&a2.evaluate(&px)).max_abs() < 1e-15);
    }

    #[test]
    fn block_determinant_is_one() {
        let a2 = triangular(2.0);
        let b = build_block(&a2, 2, 2, 4, 3.0).unwrap();
        for idx in 0..32 * 32 {
            let x = grid_point::<f64>(idx, 32, 2, false);
            assert!((b.evaluate_coords(&x).det() - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn block_rejects_non_unimodular_seed() {
        let a2 = FourierCocycle::constant(2, M::diagonal(&[c(2.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert!(build_block(&a2, 3, 2, 4, 3.0).is_err());
    }

    #[test]
    fn invertibility_certificate() {
        let ok = diag_half().certify_invertible(CertificateOptions::default());
        assert!(ok.certified && (ok.min_abs_det - 1.0).abs() < 1e-15);
        let mut mode = M::zeros(1, 1);
        mode[(0, 0)] = c(1.0, 0.0);
        let vanishing = FourierCocycle::new(1, 1, 1.0, [(vec![0], mode.clone()), (vec![1], mode)]).unwrap();
        // 1 + e(x) vanishes at x = 1/2, which is a grid point.
        let bad = vanishing.certify_invertible(CertificateOptions::default());
        assert!(!bad.certified);
        assert_eq!(bad.argmin, vec![0.5]);
        let (_, flagged) = vanishing.evaluate_flagged(&TorusPoint::new(vec![0.5]), 1e-10);
        assert!(flagged);
    }

    #[test]
    fn json_round_trip() {
        let a = triangular(2.0).complexify(&[0.1, 0.0]).unwrap();
        let text = a.to_json().unwrap();
        let back = FourierCocycle::<f64>::from_json(&text).unwrap();
        assert_eq!(back.coefficients(), a.coefficients());
        assert!((back.radius() - 0.9).abs() < 1e-15);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["d", "m", "r", "coeffs"] {
            assert!(v.get(key).is_some());
        }
        assert!(v["coeffs"][0].get("n").is_some() && v["coeffs"][0].get("re").is_some());
    }

    #[test]
    fn json_rejects_bad_shapes() {
        let text = r#"{"d":2,"m":2,"r":1.0,"coeffs":[{"n":[0,0],"re":[[1.0]],"im":[[0.0]]}]}"#;
        assert!(FourierCocycle::<f64>::from_json(text).is_err());
    }

    #[test]
    fn factorization_through_projective_line() {
        let a2 = triangular(2.0);
        let b = build_block(&a2, 3, 2, 4, 3.0).unwrap();
        let vk = SubspaceFrame::coordinate(4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let x = random_point(&mut rng, 3);
            let lhs = vk.transformed(&b.evaluate(&x)).unwrap();
            let rhs = block_factorization_frame(&a2, &x, 2, 4).unwrap();
            assert!(crate::linalg::principal_angle(&lhs, &rhs).unwrap() < 1e-9);
        }
    }
}
