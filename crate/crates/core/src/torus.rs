//! Ergodic translations on the torus `T^d = (R/Z)^d`.

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// A point of `T^d`, every coordinate reduced to `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint<T> {
    coords: Vec<T>,
}

impl<T: Real> TorusPoint<T> {
    pub fn new(coords: Vec<T>) -> Self {
        Self {
            coords: coords.into_iter().map(Real::frac).collect(),
        }
    }

    pub fn origin(d: usize) -> Self {
        Self {
            coords: vec![T::zero(); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// `self + shift mod 1`, coordinatewise.
    pub fn shifted(&self, shift: &[T]) -> Self {
        debug_assert_eq!(shift.len(), self.dim());
        Self {
            coords: self
                .coords
                .iter()
                .zip(shift)
                .map(|(&x, &w)| (x + w).frac())
                .collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|x| x.as_f64()).collect()
    }
}

/// The translation `x -> x + omega` on `T^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Translation<T> {
    frequency: Vec<T>,
}

impl<T: Real> Translation<T> {
    pub fn new(frequency: Vec<T>) -> Self {
        Self {
            frequency: frequency.into_iter().map(Real::frac).collect(),
        }
    }

    /// Default frequency `omega_j = sqrt(p_j) - floor(sqrt(p_j))` with `p_j` the j-th prime.
    /// For `d = 2` this is `(sqrt2 - 1, sqrt3 - 1)`.
    pub fn default_for_dim(d: usize) -> Self {
        let freq = first_primes(d)
            .into_iter()
            .map(|p| T::from_usize_lossy(p).sqrt().frac())
            .collect();
        Self { frequency: freq }
    }

    pub fn dim(&self) -> usize {
        self.frequency.len()
    }

    pub fn frequency(&self) -> &[T] {
        &self.frequency
    }

    pub fn apply(&self, x: &TorusPoint<T>) -> TorusPoint<T> {
        x.shifted(&self.frequency)
    }

    /// The first `n` points of the orbit of `x0`, starting with `x0` itself.
    /// Coordinates are reduced mod 1 after every step.
    pub fn orbit(&self, x0: &TorusPoint<T>, n: usize) -> Vec<TorusPoint<T>> {
        let mut out = Vec::with_capacity(n);
        let mut x = x0.clone();
        for _ in 0..n {
            let next = self.apply(&x);
            out.push(std::mem::replace(&mut x, next));
        }
        out
    }

    /// Restriction to the first `d` coordinates.
    pub fn project(&self, d: usize) -> Self {
        Self {
            frequency: self.frequency[..d].to_vec(),
        }
    }
}

/// Smallest value of `||<n, omega>||_{R/Z} * |n|^tau` over integer vectors with
/// `0 < |n|_inf <= bound`. A zero margin certifies a resonance inside the box.
pub fn diophantine_margin<T: Real>(omega: &[T], tau: T, bound: usize) -> T {
    let d = omega.len();
    let b = bound as i64;
    let mut best = T::infinity();
    let mut n = vec![-b; d];
    loop {
        // Only half of the box is needed: n and -n give the same value.
        if is_positive_half(&n) {
            let size = n.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
            let dot = n
                .iter()
                .zip(omega)
                .fold(T::zero(), |acc, (&ni, &w)| acc + T::from_i64(ni).unwrap() * w);
            let dist = (dot - dot.round()).abs();
            let val = dist * T::from_u64(size).unwrap().powf(tau);
            if val < best {
                best = val;
            }
        }
        // Odometer increment over [-b, b]^d.
        let mut i = 0;
        loop {
            if i == d {
                return best;
            }
            if n[i] < b {
                n[i] += 1;
                break;
            }
            n[i] = -b;
            i += 1;
        }
    }
}

fn is_positive_half(n: &[i64]) -> bool {
    n.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0)
}

fn first_primes(count: usize) -> Vec<usize> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = 2;
    while primes.len() < count {
        if primes.iter().all(|p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// Parses one frequency component: a decimal literal or a token of the form
/// `sqrt<N>m<K>` meaning `sqrt(N) - K` (e.g. `sqrt2m1`, `sqrt3m1`).
pub fn parse_frequency_component(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("sqrt") {
        let (radicand, offset) = rest
            .split_once('m')
            .ok_or_else(|| invalid("frequency", format!("malformed token `{s}`")))?;
        let radicand: f64 = radicand
            .parse()
            .map_err(|_| invalid("frequency", format!("malformed token `{s}`")))?;
        let offset: f64 = offset
            .parse()
            .map_err(|_| invalid("frequency", format!("malformed token `{s}`")))?;
        return Ok(radicand.sqrt() - offset);
    }
    s.parse()
        .map_err(|_| invalid("frequency", format!("not a number or sqrt token: `{s}`")))
}

pub fn parse_frequency(parts: &[String]) -> Result<Translation<f64>> {
    let freq = parts
        .iter()
        .map(|p| parse_frequency_component(p))
        .collect::<Result<Vec<_>>>()?;
    if freq.is_empty() {
        return Err(invalid("frequency", "empty frequency vector"));
    }
    Ok(Translation::new(freq))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_period_orbit() {
        let t = Translation::new(vec![0.5, 0.5]);
        let orbit = t.orbit(&TorusPoint::origin(2), 2);
        assert_eq!(orbit[0].coords(), &[0.0, 0.0]);
        assert_eq!(orbit[1].coords(), &[0.5, 0.5]);
    }

    #[test]
    fn identity_translation_orbit() {
        let t = Translation::new(vec![0.0, 0.0, 0.0]);
        let x0 = TorusPoint::new(vec![0.1, 0.7, 0.3]);
        let orbit = t.orbit(&x0, 5);
        assert_eq!(orbit.len(), 5);
        assert!(orbit.iter().all(|x| *x == x0));
    }

    #[test]
    fn third_orbit_element_matches_direct_arithmetic() {
        let w1 = 2f64.sqrt() - 1.0;
        let w2 = 3f64.sqrt() - 1.0;
        let t = Translation::new(vec![w1, w2]);
        let orbit = t.orbit(&TorusPoint::origin(2), 4);
        let expected = [(3.0 * w1).fract(), (3.0 * w2).fract()];
        for (got, want) in orbit[3].coords().iter().zip(expected) {
            assert!((got - want).abs() < 4.0 * f64::EPSILON);
        }
        assert!((expected[0] - 0.242641).abs() < 1e-6);
        assert!((expected[1] - 0.196152).abs() < 1e-6);
    }

    #[test]
    fn default_frequency_is_sqrt_primes() {
        let t = Translation::<f64>::default_for_dim(3);
        let f = t.frequency();
        assert!((f[0] - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((f[1] - (3f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((f[2] - (5f64.sqrt() - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn resonances_give_zero_margin() {
        assert_eq!(diophantine_margin(&[0.5, 0.5], 2.0, 2), 0.0);
        assert_eq!(diophantine_margin(&[0.25, 0.0], 1.0, 4), 0.0);
    }

    #[test]
    fn golden_style_frequency_has_positive_margin() {
        let omega = [2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0];
        let margin = diophantine_margin(&omega, 2.0, 50);
        // Independent exhaustive scan over the full box.
        let mut oracle = f64::INFINITY;
        for a in -50i64..=50 {
            for b in -50i64..=50 {
                if a == 0 && b == 0 {
                    continue;
                }
                let dot = a as f64 * omega[0] + b as f64 * omega[1];
                let dist = (dot - dot.round()).abs();
                let size = a.abs().max(b.abs()) as f64;
                oracle = oracle.min(dist * size * size);
            }
        }
        assert!(margin > 0.0);
        assert_eq!(margin, oracle);
    }

    #[test]
    fn margin_monotone_in_bound() {
        let omega = [2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0];
        let mut prev = f64::INFINITY;
        for bound in 1..20 {
            let m = diophantine_margin(&omega, 1.5, bound);
            assert!(m <= prev);
            prev = m;
        }
    }

    #[test]
    fn parses_tokens_and_decimals() {
        assert!((parse_frequency_component("sqrt2m1").unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-16);
        assert!((parse_frequency_component("sqrt3m1").unwrap() - (3f64.sqrt() - 1.0)).abs() < 1e-16);
        assert_eq!(parse_frequency_component("0.25").unwrap(), 0.25);
        assert!(parse_frequency_component("sqrtx").is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let t = Translation::<f32>::default_for_dim(2);
        let orbit = t.orbit(&TorusPoint::origin(2), 10);
        assert!(orbit.iter().all(|x| x.coords().iter().all(|&c| (0.0..1.0).contains(&c))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn orbit_concatenation(
                w in proptest::collection::vec(0.0f64..1.0, 2..4),
                n in 1usize..40,
                m in 1usize..40,
            ) {
                let d = w.len();
                let t = Translation::new(w);
                let x0 = TorusPoint::origin(d);
                let long = t.orbit(&x0, n + m);
                let tail = t.orbit(&long[n], m);
                for (a, b) in long[n..].iter().zip(&tail) {
                    for (p, q) in a.coords().iter().zip(b.coords()) {
                        let diff = (p - q).abs();
                        prop_assert!(diff.min(1.0 - diff) <= 1e-12);
                    }
                }
            }
        }
    }
}
