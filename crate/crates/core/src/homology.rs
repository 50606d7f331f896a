//! Betti tables of tori and complex Grassmannians, Künneth products, exact
//! splittings of factor maps, and the no-invariant-section criterion.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::exact::{format_rational, parse_rational};
use crate::linalg::{solve_exact, ExactField, ExactMatrix};

/// Largest cell count enumerated by [`grassmann_betti`].
pub const MAX_SCHUBERT_CELLS: u64 = 10_000_000;

/// Coefficient field label used when none is given.
pub const DEFAULT_FIELD: &str = "Q";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiTable {
    pub label: String,
    pub betti: Vec<u64>,
    pub field: String,
}

impl BettiTable {
    /// Real dimension of the space.
    pub fn top(&self) -> usize {
        self.betti.len().saturating_sub(1)
    }

    pub fn get(&self, i: usize) -> u64 {
        self.betti.get(i).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.betti.iter().sum()
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn torus_betti(d: usize) -> Result<BettiTable> {
    if d == 0 {
        return Err(invalid("d", "torus dimension must be at least 1"));
    }
    Ok(BettiTable {
        label: format!("T^{d}"),
        betti: (0..=d as u64).map(|i| binomial(d as u64, i)).collect(),
        field: DEFAULT_FIELD.to_string(),
    })
}

/// Betti numbers of `Gr_k(C^m)` by counting partitions in a `k x (m-k)` box.
pub fn grassmann_betti(k: usize, m: usize) -> Result<BettiTable> {
    if k == 0 || k >= m {
        return Err(invalid("k", format!("need 1 <= k < m, got k = {k}, m = {m}")));
    }
    if binomial(m as u64, k as u64) > MAX_SCHUBERT_CELLS {
        return Err(invalid("m", format!("Gr_{k}(C^{m}) has too many cells to enumerate")));
    }
    let width = m - k;
    let mut counts = vec![0u64; k * width + 1];
    // Rows are non-increasing, each at most `width`.
    fn walk(rows_left: usize, cap: usize, size: usize, counts: &mut [u64]) {
        if rows_left == 0 {
            counts[size] += 1;
            return;
        }
        for part in 0..=cap {
            walk(rows_left - 1, part, size + part, counts);
        }
    }
    walk(k, width, 0, &mut counts);
    let mut betti = vec![0u64; 2 * k * width + 1];
    for (i, c) in counts.into_iter().enumerate() {
        betti[2 * i] = c;
    }
    Ok(BettiTable {
        label: format!("Gr_{k}(C^{m})"),
        betti,
        field: DEFAULT_FIELD.to_string(),
    })
}

/// Betti table of a product; the field label is taken from `a`.
pub fn kunneth(a: &BettiTable, b: &BettiTable) -> BettiTable {
    let mut betti = vec![0u64; a.betti.len() + b.betti.len() - 1];
    for (i, x) in a.betti.iter().enumerate() {
        for (j, y) in b.betti.iter().enumerate() {
            betti[i + j] += x * y;
        }
    }
    BettiTable {
        label: format!("{} x {}", a.label, b.label),
        betti,
        field: a.field.clone(),
    }
}

/// The one-point space.
pub fn point_betti() -> BettiTable {
    BettiTable {
        label: "pt".into(),
        betti: vec![1],
        field: DEFAULT_FIELD.to_string(),
    }
}

/// Linear maps `f: E -> E`, `pi: E -> F` onto, `h: F -> F` with `pi f = h pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorInstance<F> {
    f: ExactMatrix<F>,
    pi: ExactMatrix<F>,
    h: ExactMatrix<F>,
}

impl<F: ExactField> FactorInstance<F> {
    pub fn new(f: ExactMatrix<F>, pi: ExactMatrix<F>, h: ExactMatrix<F>) -> Result<Self> {
        let n = f.rows();
        let r = h.rows();
        if f.cols() != n || h.cols() != r || pi.rows() != r || pi.cols() != n {
            return Err(Error::MalformedFactor(format!(
                "shapes f {}x{}, pi {}x{}, h {}x{} are incompatible",
                f.rows(),
                f.cols(),
                pi.rows(),
                pi.cols(),
                h.rows(),
                h.cols()
            )));
        }
        if pi.rank() != r {
            return Err(Error::MalformedFactor(format!(
                "pi has rank {} < {r}, not surjective",
                pi.rank()
            )));
        }
        if !pi.matmul(&f).sub(&h.matmul(&pi)).is_zero() {
            return Err(Error::MalformedFactor("pi f != h pi".into()));
        }
        Ok(Self { f, pi, h })
    }

    pub fn f(&self) -> &ExactMatrix<F> {
        &self.f
    }

    pub fn pi(&self) -> &ExactMatrix<F> {
        &self.pi
    }

    pub fn h(&self) -> &ExactMatrix<F> {
        &self.h
    }

    /// `pi sigma = I` and `f sigma = sigma h`.
    pub fn is_splitting(&self, sigma: &ExactMatrix<F>) -> bool {
        let r = self.h.rows();
        sigma.rows() == self.f.rows()
            && sigma.cols() == r
            && self.pi.matmul(sigma).sub(&ExactMatrix::identity(r)).is_zero()
            && self.f.matmul(sigma).sub(&sigma.matmul(&self.h)).is_zero()
    }
}

/// Exact equivariant section of `pi`, or `None` when no splitting exists.
pub fn factor_splitting_exact<F: ExactField>(
    inst: &FactorInstance<F>,
) -> Result<Option<ExactMatrix<F>>> {
    let n = inst.f.rows();
    let r = inst.h.rows();
    // Unknown sigma[i][j] sits at column i * r + j.
    let var = |i: usize, j: usize| i * r + j;
    let mut a = ExactMatrix::zeros(r * r + n * r, n * r);
    let mut b = vec![F::zero(); r * r + n * r];
    for p in 0..r {
        for q in 0..r {
            let row = p * r + q;
            for i in 0..n {
                a.set(row, var(i, q), inst.pi.get(p, i).clone());
            }
            if p == q {
                b[row] = F::one();
            }
        }
    }
    for i in 0..n {
        for q in 0..r {
            let row = r * r + i * r + q;
            for l in 0..n {
                let v = a.get(row, var(l, q)).clone() + inst.f.get(i, l).clone();
                a.set(row, var(l, q), v);
            }
            for c in 0..r {
                let v = a.get(row, var(i, c)).clone() - inst.h.get(c, q).clone();
                a.set(row, var(i, c), v);
            }
        }
    }
    match solve_exact(&a, &b) {
        Ok(sol) => {
            let sigma = ExactMatrix::from_fn(n, r, |i, j| sol.particular[var(i, j)].clone());
            debug_assert!(inst.is_splitting(&sigma));
            Ok(Some(sigma))
        }
        Err(Error::Inconsistent) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Rational factor instance as `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorFile {
    pub f: Vec<Vec<String>>,
    pub pi: Vec<Vec<String>>,
    pub h: Vec<Vec<String>>,
}

pub fn rational_matrix(rows: &[Vec<String>]) -> Result<ExactMatrix<BigRational>> {
    let parsed = rows
        .iter()
        .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    ExactMatrix::from_rows(parsed)
}

pub fn rational_rows(m: &ExactMatrix<BigRational>) -> Vec<Vec<String>> {
    m.to_rows()
        .iter()
        .map(|row| row.iter().map(format_rational).collect())
        .collect()
}

impl FactorFile {
    pub fn instance(&self) -> Result<FactorInstance<BigRational>> {
        FactorInstance::new(
            rational_matrix(&self.f)?,
            rational_matrix(&self.pi)?,
            rational_matrix(&self.h)?,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionQuery {
    pub d: usize,
    pub k: usize,
    pub m: usize,
    /// Whether the induced map on second homology is asserted nonzero.
    pub homology_nonzero: bool,
    #[serde(default = "default_field")]
    pub field: String,
}

fn default_field() -> String {
    DEFAULT_FIELD.to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObstructionVerdict {
    Obstructed,
    Inconclusive,
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub verdict: ObstructionVerdict,
    pub h2_torus: u64,
    pub h1_torus: u64,
    pub h1_grassmann: u64,
    pub h2_grassmann: u64,
}

/// No `k`-dimensional invariant continuous subbundle exists when the base
/// has second homology and the classifying map is nonzero on it.
pub fn obstruction_check(q: &ObstructionQuery) -> Result<ObstructionReport> {
    let torus = torus_betti(q.d)?;
    let grass = grassmann_betti(q.k, q.m)?;
    let h2_torus = torus.get(2);
    let h1_grassmann = grass.get(1);
    let verdict = if h2_torus == 0 {
        ObstructionVerdict::Inapplicable
    } else if q.homology_nonzero && h1_grassmann == 0 {
        ObstructionVerdict::Obstructed
    } else {
        ObstructionVerdict::Inconclusive
    };
    Ok(ObstructionReport {
        verdict,
        h2_torus,
        h1_torus: torus.get(1),
        h1_grassmann,
        h2_grassmann: grass.get(2),
    })
}
