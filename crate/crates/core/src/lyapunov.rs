//! Lyapunov spectrum by QR deflation along the orbit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::{CertificateOptions, FourierCocycle};
use crate::error::{invalid, Error, Result};
use crate::linalg::{qr_unchecked, ComplexMatrix};
use crate::scalar::Real;
use crate::torus::{TorusPoint, Translation};

pub const DEFAULT_ORBIT: usize = 100_000;
pub const DEFAULT_PHASES: usize = 8;
pub const DEFAULT_GAP_TOL: f64 = 0.05;
pub const MIN_ORBIT: usize = 100;

#[derive(Clone, Copy, Debug)]
pub struct LyapunovOptions {
    pub gap_tol: f64,
    pub certificate: CertificateOptions,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        Self {
            gap_tol: DEFAULT_GAP_TOL,
            certificate: CertificateOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cluster<T> {
    pub dim: usize,
    pub mean: T,
}

/// How the exponent clusters sit relative to zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignSplit {
    /// `plus` exponents are positive and `minus` are negative.
    Separated { plus: usize, minus: usize },
    /// A single cluster: no nontrivial decomposition.
    Trivial,
    /// Some exponent lies within `gap_tol` of zero.
    Ambiguous { index: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Filtration<T> {
    pub clusters: Vec<Cluster<T>>,
    pub split: SignSplit,
}

impl<T: Real> Filtration<T> {
    pub fn dims(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.dim).collect()
    }

    pub fn plus_dim(&self) -> Option<usize> {
        match self.split {
            SignSplit::Separated { plus, .. } => Some(plus),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovReport<T> {
    /// Per-step natural-log growth rates, sorted descending.
    pub exponents: Vec<T>,
    pub n_used: usize,
    pub phases_used: usize,
    /// Standard error of each exponent across phases.
    pub stderr: Vec<T>,
    pub filtration: Filtration<T>,
    /// Unsorted exponents of each phase, in phase order.
    pub per_phase: Vec<Vec<T>>,
    /// Orbit average of `log |det A|`, averaged over phases.
    pub log_det_average: T,
}

/// Deterministic starting phases drawn from a seeded generator.
pub fn default_phases<T: Real>(d: usize, count: usize, seed: u64) -> Vec<TorusPoint<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| TorusPoint::new((0..d).map(|_| T::lit(rng.gen::<f64>())).collect()))
        .collect()
}

struct PhaseRun<T> {
    exponents: Vec<T>,
    log_det: T,
}

fn run_phase<T: Real>(
    cocycle: &FourierCocycle<T>,
    t: &Translation<T>,
    x0: &TorusPoint<T>,
    n: usize,
) -> Result<PhaseRun<T>> {
    let m = cocycle.fiber_dim();
    let mut q = ComplexMatrix::identity(m);
    let mut sums = vec![T::zero(); m];
    let mut log_det = T::zero();
    let mut x = x0.clone();
    for step in 0..n {
        let a = cocycle.evaluate(&x);
        log_det += a.det().norm().ln();
        let (q_next, r) = qr_unchecked(&(&a * &q));
        for (i, s) in sums.iter_mut().enumerate() {
            let d = r[(i, i)].re;
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::NonFinite(format!(
                    "QR recursion at step {step}: diagonal entry {i} is {d}"
                )));
            }
            *s += d.ln();
        }
        q = q_next;
        x = t.apply(&x);
    }
    let inv_n = T::from_usize_lossy(n).recip();
    if !log_det.is_finite() {
        return Err(Error::NonFinite("orbit average of log |det|".into()));
    }
    Ok(PhaseRun {
        exponents: sums.into_iter().map(|s| s * inv_n).collect(),
        log_det: log_det * inv_n,
    })
}

/// Lyapunov exponents of `cocycle` over `t`, averaged over `phases`.
pub fn lyapunov_spectrum<T: Real>(
    cocycle: &FourierCocycle<T>,
    t: &Translation<T>,
    n: usize,
    phases: &[TorusPoint<T>],
    opts: &LyapunovOptions,
) -> Result<LyapunovReport<T>> {
    if n < MIN_ORBIT {
        return Err(invalid("n", format!("orbit length must be at least {MIN_ORBIT}")));
    }
    if phases.is_empty() {
        return Err(invalid("phases", "at least one phase is required"));
    }
    cocycle.check_translation(t)?;
    cocycle.require_invertible(opts.certificate)?;

    let runs = phases
        .par_iter()
        .map(|x| run_phase(cocycle, t, x, n))
        .collect::<Result<Vec<_>>>()?;

    let m = cocycle.fiber_dim();
    let p = T::from_usize_lossy(runs.len());
    let mut mean = vec![T::zero(); m];
    for run in &runs {
        for (acc, &e) in mean.iter_mut().zip(&run.exponents) {
            *acc += e;
        }
    }
    mean.iter_mut().for_each(|v| *v /= p);
    let stderr: Vec<T> = (0..m)
        .map(|i| {
            if runs.len() < 2 {
                return T::zero();
            }
            let var = runs
                .iter()
                .fold(T::zero(), |acc, r| acc + (r.exponents[i] - mean[i]).powi(2))
                / (p - T::one());
            (var / p).sqrt()
        })
        .collect();

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| mean[b].partial_cmp(&mean[a]).unwrap_or(std::cmp::Ordering::Equal));
    let exponents: Vec<T> = order.iter().map(|&i| mean[i]).collect();
    let stderr: Vec<T> = order.iter().map(|&i| stderr[i]).collect();
    let log_det_average = runs.iter().fold(T::zero(), |acc, r| acc + r.log_det) / p;

    Ok(LyapunovReport {
        filtration: cluster_exponents(&exponents, T::lit(opts.gap_tol)),
        exponents,
        n_used: n,
        phases_used: runs.len(),
        stderr,
        per_phase: runs.into_iter().map(|r| r.exponents).collect(),
        log_det_average,
    })
}

/// Groups the exponents of a report into clusters separated by more than `gap_tol`.
pub fn oseledets_dims<T: Real>(report: &LyapunovReport<T>, gap_tol: T) -> Result<Filtration<T>> {
    if report.exponents.iter().any(|e| !e.is_finite()) {
        return Err(Error::NonFinite("Lyapunov report".into()));
    }
    Ok(cluster_exponents(&report.exponents, gap_tol))
}

/// Greedy clustering of descending exponents: a new cluster starts whenever
/// consecutive values differ by more than `gap_tol`.
pub fn cluster_exponents<T: Real>(exponents: &[T], gap_tol: T) -> Filtration<T> {
    let mut clusters: Vec<(usize, T)> = Vec::new();
    for (i, &e) in exponents.iter().enumerate() {
        match clusters.last_mut() {
            Some((dim, sum)) if exponents[i - 1] - e <= gap_tol => {
                *dim += 1;
                *sum += e;
            }
            _ => clusters.push((1, e)),
        }
    }
    let clusters: Vec<Cluster<T>> = clusters
        .into_iter()
        .map(|(dim, sum)| Cluster {
            dim,
            mean: sum / T::from_usize_lossy(dim),
        })
        .collect();
    let split = if clusters.len() <= 1 {
        SignSplit::Trivial
    } else if let Some(index) = exponents.iter().position(|e| e.abs() <= gap_tol) {
        SignSplit::Ambiguous { index }
    } else {
        let plus = exponents.iter().filter(|&&e| e > T::zero()).count();
        SignSplit::Separated {
            plus,
            minus: exponents.len() - plus,
        }
    };
    Filtration { clusters, split }
}
