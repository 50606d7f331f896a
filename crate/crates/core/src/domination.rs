//! Finite-time tests for k-domination.
//!
//! A cocycle is k-dominated iff `sigma_k / sigma_{k+1}` of its iterates grows
//! uniformly exponentially. On a phase grid we track that gap together with
//! the oscillation of the most expanded k-plane between neighbouring phases;
//! a continuous dominated bundle makes the oscillation shrink.

use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::{grid_point, FourierCocycle};
use crate::error::{invalid, Error, Result};
use crate::linalg::{principal_angle, ProductSvd, SubspaceFrame};
use crate::scalar::Real;
use crate::torus::{TorusPoint, Translation};

/// `log(1 + 1e-12)`: below this gap the top-k plane is ill-defined.
pub const DEGENERATE_LOG_GAP: f64 = 1e-12;
/// A log gap at or below this value counts as `sigma_k / sigma_{k+1} <= 1`.
pub const UNIT_RATIO_LOG_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominationOptions {
    pub grid_per_dim: usize,
    pub schedule: Vec<usize>,
    pub angle_tol: f64,
    /// Per-step gap every scheduled `n` must clear for a certificate.
    pub min_rate: f64,
    /// Oscillation that, persisting over the last three doublings, refutes.
    pub refute_angle: f64,
}

impl Default for DominationOptions {
    fn default() -> Self {
        Self {
            grid_per_dim: 16,
            schedule: vec![25, 50, 100, 200, 400],
            angle_tol: 0.05,
            min_rate: 0.01,
            refute_angle: 0.5,
        }
    }
}

impl DominationOptions {
    fn validate(&self) -> Result<()> {
        if self.grid_per_dim < 8 {
            return Err(invalid("grid", "need at least 8 phases per dimension"));
        }
        if self.schedule.is_empty() || self.schedule[0] == 0 {
            return Err(invalid("schedule", "need a nonempty schedule of positive lengths"));
        }
        if self.schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("schedule", "lengths must be strictly increasing"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness<T> {
    pub phase: Vec<T>,
    pub n: usize,
    pub log_gap: T,
}

/// One `(phase, n, log(sigma_k / sigma_{k+1}))` sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapSample<T> {
    pub phase: Vec<T>,
    pub n: usize,
    pub log_gap: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominationVerdict<T> {
    pub k: usize,
    pub verdict: Verdict,
    /// Per-step gap at the longest scheduled length, minimized over the grid.
    pub rate: T,
    pub worst_phase: Vec<T>,
    /// Minimum over grid and schedule of `(1/n) log(sigma_k / sigma_{k+1})`.
    pub gap_floor: T,
    /// `(n, min over grid of the per-step gap)`.
    pub gap_floor_trace: Vec<(usize, T)>,
    /// `(n, delta_n)`: largest principal angle between the candidate planes of
    /// neighbouring grid phases.
    pub oscillation_trace: Vec<(usize, T)>,
    pub witness: Option<Witness<T>>,
    pub samples: Vec<GapSample<T>>,
}

struct PhaseTrace<T> {
    gaps: Vec<T>,
    frames: Vec<Option<SubspaceFrame<T>>>,
}

fn check_k(k: usize, m: usize) -> Result<()> {
    if !(1 <= k && k < m) {
        return Err(invalid("k", format!("need 1 <= k < m, got k = {k}, m = {m}")));
    }
    Ok(())
}

fn trace_phase<T: Real>(
    cocycle: &FourierCocycle<T>,
    t: &Translation<T>,
    x0: &TorusPoint<T>,
    k: usize,
    schedule: &[usize],
    want_frames: bool,
) -> Result<PhaseTrace<T>> {
    let m = cocycle.fiber_dim();
    let mut product = ProductSvd::new(m);
    let mut x = x0.clone();
    let mut gaps = Vec::with_capacity(schedule.len());
    let mut frames = Vec::with_capacity(schedule.len());
    let mut next = 0;
    let last = *schedule.last().expect("nonempty schedule");
    for step in 1..=last {
        product.push_left(&cocycle.evaluate(&x));
        x = t.apply(&x);
        if step == schedule[next] {
            let svd = product.current();
            let gap = svd.log_gap(k);
            if !gap.is_finite() {
                return Err(Error::NonFinite(format!("singular value gap at n = {step}")));
            }
            gaps.push(gap);
            if want_frames {
                frames.push(if gap >= T::lit(DEGENERATE_LOG_GAP) {
                    Some(SubspaceFrame::from_orthonormal(svd.v.columns(0, k))?)
                } else {
                    None
                });
            }
            next += 1;
        }
    }
    Ok(PhaseTrace { gaps, frames })
}

/// `(n, log sigma_k(A^(n)(x)) - log sigma_{k+1}(A^(n)(x)))` for each `n` in `n_list`.
pub fn singular_gap_trace<T: Real>(
    cocycle: &FourierCocycle<T>,
    t: &Translation<T>,
    x: &TorusPoint<T>,
    k: usize,
    n_list: &[usize],
) -> Result<Vec<(usize, T)>> {
    check_k(k, cocycle.fiber_dim())?;
    cocycle.check_translation(t)?;
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("n_list", "must be strictly increasing positive lengths"));
    }
    let trace = trace_phase(cocycle, t, x, k, n_list, false)?;
    Ok(n_list.iter().copied().zip(trace.gaps).collect())
}

/// The most expanded k-plane of `A^(n)(x)`: the span of its top k right singular vectors.
pub fn section_candidate<T: Real>(
    cocycle: &FourierCocycle<T>,
    t: &Translation<T>,
    x: &TorusPoint<T>,
    k: usize,
    n: usize,
) -> Result<SubspaceFrame<T>> {
    check_k(k, cocycle.fiber_dim())?;
    cocycle.check_translation(t)?;
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    let trace = trace_phase(cocycle, t, x, k, &[n], true)?;
    trace.frames.into_iter().next().flatten().ok_or(Error::Degenerate {
        k,
        ratio: trace.gaps[0].exp().as_f64(),
    })
}

/// Runs the gap and oscillation tests on a `grid_per_dim^d` phase grid.
pub fn test_domination<T: Real>(
    cocycle: &FourierCocycle<T>,
    t: &Translation<T>,
    k: usize,
    opts: &DominationOptions,
) -> Result<DominationVerdict<T>> {
    let m = cocycle.fiber_dim();
    check_k(k, m)?;
    cocycle.check_translation(t)?;
    opts.validate()?;
    let d = cocycle.base_dim();
    let g = opts.grid_per_dim;
    let total = g
        .checked_pow(d as u32)
        .ok_or_else(|| invalid("grid", "grid too large"))?;

    let phases: Vec<TorusPoint<T>> = (0..total)
        .map(|idx| TorusPoint::new(grid_point(idx, g, d, false)))
        .collect();
    let traces = phases
        .par_iter()
        .map(|x| trace_phase(cocycle, t, x, k, &opts.schedule, true))
        .collect::<Result<Vec<_>>>()?;

    let half_pi = T::FRAC_PI_2();
    let mut gap_floor_trace = Vec::with_capacity(opts.schedule.len());
    let mut oscillation_trace = Vec::with_capacity(opts.schedule.len());
    let mut gap_floor = T::infinity();
    let mut worst = 0;
    let mut witness = None;
    let mut samples = Vec::with_capacity(total * opts.schedule.len());

    for (s, &n) in opts.schedule.iter().enumerate() {
        let nf = T::from_usize_lossy(n);
        let mut floor_n = T::infinity();
        for (idx, tr) in traces.iter().enumerate() {
            let gap = tr.gaps[s];
            let per_step = gap / nf;
            if per_step < floor_n {
                floor_n = per_step;
            }
            if per_step < gap_floor {
                gap_floor = per_step;
                worst = idx;
            }
            if witness.is_none() && gap <= T::lit(UNIT_RATIO_LOG_TOL) {
                witness = Some(Witness {
                    phase: phases[idx].coords().to_vec(),
                    n,
                    log_gap: gap,
                });
            }
            samples.push(GapSample {
                phase: phases[idx].coords().to_vec(),
                n,
                log_gap: gap,
            });
        }
        gap_floor_trace.push((n, floor_n));

        // Neighbours along each axis with wraparound; each edge visited once.
        let delta = (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut worst_angle = T::zero();
                let mut stride = 1;
                for _axis in 0..d {
                    let coord = (idx / stride) % g;
                    let neighbour = if coord + 1 == g {
                        idx - coord * stride
                    } else {
                        idx + stride
                    };
                    let angle = match (&traces[idx].frames[s], &traces[neighbour].frames[s]) {
                        (Some(a), Some(b)) => principal_angle(a, b).expect("frames share shape"),
                        _ => half_pi,
                    };
                    worst_angle = worst_angle.max(angle);
                    stride *= g;
                }
                worst_angle
            })
            .reduce(T::zero, T::max);
        oscillation_trace.push((n, delta));
    }

    let rate = gap_floor_trace.last().map(|&(_, r)| r).unwrap_or(T::zero());
    let refute_angle = T::lit(opts.refute_angle);
    let persistent_oscillation = oscillation_trace.len() >= 3
        && oscillation_trace[oscillation_trace.len() - 3..]
            .iter()
            .all(|&(_, delta)| delta >= refute_angle);
    let last_delta = oscillation_trace.last().map(|&(_, v)| v).unwrap_or(half_pi);
    let verdict = if witness.is_some() || persistent_oscillation {
        Verdict::Refuted
    } else if gap_floor_trace.iter().all(|&(_, f)| f >= T::lit(opts.min_rate))
        && last_delta < T::lit(opts.angle_tol)
    {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };

    Ok(DominationVerdict {
        k,
        verdict,
        rate,
        worst_phase: phases[worst].coords().to_vec(),
        gap_floor,
        gap_floor_trace,
        oscillation_trace,
        witness,
        samples,
    })
}

/// [`test_domination`] on each complexified cocycle `A_y`, in the order of `y_list`.
pub fn complexified_sweep<T: Real>(
    cocycle: &FourierCocycle<T>,
    t: &Translation<T>,
    k: usize,
    y_list: &[Vec<T>],
    opts: &DominationOptions,
) -> Result<Vec<(Vec<T>, DominationVerdict<T>)>> {
    y_list
        .iter()
        .map(|y| {
            let shifted = cocycle.complexify(y)?;
            Ok((y.clone(), test_domination(&shifted, t, k, opts)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use num_complex::Complex;

    type M = ComplexMatrix<f64>;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    fn omega() -> Translation<f64> {
        Translation::default_for_dim(2)
    }

    fn diag_half() -> FourierCocycle<f64> {
        FourierCocycle::constant(2, M::diagonal(&[c(2.0), c(0.5)])).unwrap()
    }

    fn rotation() -> FourierCocycle<f64> {
        let plus = M::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => c(0.5),
            (0, 1) => Complex::new(0.0, 0.5),
            _ => Complex::new(0.0, -0.5),
        });
        let minus = plus.map(|z| z.conj());
        FourierCocycle::new(2, 2, 1.0, [(vec![1, 0], plus), (vec![-1, 0], minus)]).unwrap()
    }

    fn small_opts() -> DominationOptions {
        DominationOptions {
            grid_per_dim: 8,
            ..DominationOptions::default()
        }
    }

    #[test]
    fn rotation_cocycle_is_rotation() {
        let r = rotation();
        let x = TorusPoint::new(vec![0.1, 0.4]);
        let th = std::f64::consts::TAU * 0.1;
        let want = M::from_real_rows(&[&[th.cos(), -th.sin()], &[th.sin(), th.cos()]]);
        assert!(r.evaluate(&x).sub(&want).max_abs() < 1e-15);
    }

    #[test]
    fn diagonal_gap_trace_is_linear() {
        let trace = singular_gap_trace(&diag_half(), &omega(), &TorusPoint::origin(2), 1, &[1, 5, 40]).unwrap();
        for (n, gap) in trace {
            assert!((gap - n as f64 * 4f64.ln()).abs() < 1e-12 * n as f64);
        }
    }

    #[test]
    fn orthogonal_cocycles_have_no_gap() {
        let unitary = FourierCocycle::constant(2, M::from_real_rows(&[&[0.6, -0.8], &[0.8, 0.6]])).unwrap();
        for a in [unitary, rotation()] {
            let trace = singular_gap_trace(&a, &omega(), &TorusPoint::new(vec![0.3, 0.2]), 1, &[10, 100]).unwrap();
            assert!(trace.iter().all(|&(_, g)| g.abs() < 1e-9));
        }
    }

    #[test]
    fn section_of_constant_diagonal() {
        let a = FourierCocycle::constant(2, M::diagonal(&[c(3.0), c(2.0), c(1.0)])).unwrap();
        for n in [1, 10, 50] {
            let s = section_candidate(&a, &omega(), &TorusPoint::origin(2), 2, n).unwrap();
            let want = SubspaceFrame::coordinate(3, 2);
            assert_eq!(principal_angle(&s, &want).unwrap(), 0.0);
        }
        let unitary = FourierCocycle::constant(2, M::identity(2)).unwrap();
        assert!(matches!(
            section_candidate(&unitary, &omega(), &TorusPoint::origin(2), 1, 5),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn certifies_constant_diagonal() {
        let v = test_domination(&diag_half(), &omega(), 1, &small_opts()).unwrap();
        assert_eq!(v.verdict, Verdict::Certified);
        assert!((v.rate - 4f64.ln()).abs() < 1e-2);
        assert!(v.oscillation_trace.iter().all(|&(_, d)| d == 0.0));
        for &(_, floor) in &v.gap_floor_trace {
            assert!(floor >= v.rate - 0.1);
        }
    }

    #[test]
    fn refutes_unitary_and_rotation() {
        let unitary = FourierCocycle::constant(2, M::identity(2)).unwrap();
        for a in [unitary, rotation()] {
            let v = test_domination(&a, &omega(), 1, &small_opts()).unwrap();
            assert_eq!(v.verdict, Verdict::Refuted);
            assert!(v.witness.is_some());
        }
    }

    #[test]
    fn scalar_multiples_give_the_same_verdict() {
        let base = test_domination(&diag_half(), &omega(), 1, &small_opts()).unwrap();
        for s in [c(2.0), Complex::new(0.0, 1.0), c(0.1)] {
            let v = test_domination(&diag_half().scaled(s), &omega(), 1, &small_opts()).unwrap();
            assert_eq!(v.verdict, base.verdict);
            assert_eq!(v.worst_phase, base.worst_phase);
            assert!((v.rate - base.rate).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_rate_drops_with_shift() {
        let mut top = M::zeros(2, 2);
        top[(0, 0)] = c(2.0);
        let mut bottom = M::zeros(2, 2);
        bottom[(1, 1)] = c(0.5);
        let a = FourierCocycle::new(2, 2, 1.0, [(vec![1, 0], top), (vec![0, 0], bottom)]).unwrap();
        let ys = vec![vec![0.0, 0.0], vec![0.05, 0.0], vec![0.1, 0.0]];
        let table = complexified_sweep(&a, &omega(), 1, &ys, &small_opts()).unwrap();
        let r0 = table[0].1.rate;
        for (y, v) in &table {
            assert_eq!(v.verdict, Verdict::Certified);
            assert!((r0 - v.rate - std::f64::consts::TAU * y[0]).abs() < 2e-2);
        }
        let plain = test_domination(&a, &omega(), 1, &small_opts()).unwrap();
        assert_eq!(plain, table[0].1);
    }

    #[test]
    fn option_validation() {
        let mut o = small_opts();
        o.grid_per_dim = 4;
        assert!(test_domination(&diag_half(), &omega(), 1, &o).is_err());
        let mut o = small_opts();
        o.schedule = vec![50, 25];
        assert!(test_domination(&diag_half(), &omega(), 1, &o).is_err());
        assert!(test_domination(&diag_half(), &omega(), 2, &small_opts()).is_err());
    }
}
