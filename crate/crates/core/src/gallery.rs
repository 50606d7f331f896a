//! Named example cocycles with their analytically known diagnostics.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cocycle::{build_block, build_su_form, CertificateOptions, FourierCocycle, TrigPolynomial};
use crate::error::{invalid, Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

pub type Params = BTreeMap<String, Value>;

pub const NAMES: [&str; 5] = [
    "const-diag",
    "unitary-rotation",
    "triangular-jensen",
    "su-form",
    "prop34-block",
];

/// A resolved example: every parameter, defaults included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleSpec {
    pub name: String,
    pub parameters: Params,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Exponents sorted descending, when known in closed form.
    pub expected_exponents: Option<Vec<f64>>,
    /// `det A(x)` when it is constant.
    pub expected_det: Option<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct Example<T> {
    pub spec: ExampleSpec,
    pub cocycle: FourierCocycle<T>,
    pub diagnostics: Diagnostics,
}

struct Reader<'a> {
    params: &'a Params,
    used: Vec<&'static str>,
    resolved: Params,
}

impl<'a> Reader<'a> {
    fn new(params: &'a Params) -> Self {
        Self {
            params,
            used: Vec::new(),
            resolved: Params::new(),
        }
    }

    fn value(&mut self, key: &'static str, default: Value) -> Value {
        self.used.push(key);
        let v = self.params.get(key).cloned().unwrap_or(default);
        self.resolved.insert(key.to_string(), v.clone());
        v
    }

    fn f64(&mut self, key: &'static str, default: f64) -> Result<f64> {
        let v = self.value(key, json!(default));
        let x = match &v {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => crate::torus::parse_frequency_component(s).ok(),
            _ => None,
        };
        match x {
            Some(x) if x.is_finite() => Ok(x),
            _ => Err(invalid(key, format!("expected a real number, got {v}"))),
        }
    }

    fn usize(&mut self, key: &'static str, default: usize) -> Result<usize> {
        let v = self.value(key, json!(default));
        v.as_u64()
            .map(|u| u as usize)
            .ok_or_else(|| invalid(key, format!("expected a nonnegative integer, got {v}")))
    }

    fn finish(self, name: &str, provenance: &str) -> Result<ExampleSpec> {
        if let Some(extra) = self.params.keys().find(|k| !self.used.contains(&k.as_str())) {
            return Err(invalid(extra, format!("not a parameter of `{name}`")));
        }
        Ok(ExampleSpec {
            name: name.to_string(),
            parameters: self.resolved,
            provenance: provenance.to_string(),
        })
    }
}

/// Parses `[{"n": [..], "re": .., "im": ..}, ..]` into a trigonometric polynomial.
pub fn trig_from_json<T: Real>(d: usize, v: &Value, field: &str) -> Result<TrigPolynomial<T>> {
    let bad = |why: &str| invalid(field, why.to_string());
    let terms = v.as_array().ok_or_else(|| bad("expected an array of Fourier terms"))?;
    let mut out = Vec::with_capacity(terms.len());
    for term in terms {
        let n: Vec<i64> = term
            .get("n")
            .and_then(|n| serde_json::from_value(n.clone()).ok())
            .ok_or_else(|| bad("each term needs an integer vector `n`"))?;
        let part = |key: &str| -> Result<f64> {
            match term.get(key) {
                None => Ok(0.0),
                Some(x) => x.as_f64().ok_or_else(|| bad("`re`/`im` must be numbers")),
            }
        };
        out.push((n, Complex::new(T::lit(part("re")?), T::lit(part("im")?))));
    }
    TrigPolynomial::new(d, out)
}

fn term(n: &[i64], re: f64, im: f64) -> Value {
    json!({"n": n, "re": re, "im": im})
}

fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

fn basis_frequency(d: usize, axis: usize, sign: i64) -> Vec<i64> {
    let mut n = vec![0; d];
    n[axis] = sign;
    n
}

/// Upper-triangular `SL_2` cocycle on `T^d` with diagonal
/// `(c e(x_1), e(-x_1)/c)` and off-diagonal `e(x_2)`.
pub fn triangular_jensen<T: Real>(c_val: f64, d: usize) -> Result<FourierCocycle<T>> {
    if !(c_val > 0.0) {
        return Err(invalid("c", "must be positive"));
    }
    if d < 2 {
        return Err(invalid("d", "needs at least two base coordinates"));
    }
    let mut top = ComplexMatrix::zeros(2, 2);
    top[(0, 0)] = c(c_val, 0.0);
    let mut bottom = ComplexMatrix::zeros(2, 2);
    bottom[(1, 1)] = c(1.0 / c_val, 0.0);
    let mut corner = ComplexMatrix::zeros(2, 2);
    corner[(0, 1)] = Complex::new(T::one(), T::zero());
    FourierCocycle::new(
        d,
        2,
        T::one(),
        [
            (basis_frequency(d, 0, 1), top),
            (basis_frequency(d, 0, -1), bottom),
            (basis_frequency(d, 1, 1), corner),
        ],
    )
}

/// Builds a named example; unknown parameter keys are rejected.
pub fn example<T: Real>(name: &str, params: &Params) -> Result<Example<T>> {
    let mut r = Reader::new(params);
    let (cocycle, diagnostics, provenance) = match name {
        "const-diag" => {
            let a = r.f64("a", 2.0)?;
            let b = r.f64("b", 0.5)?;
            let d = r.usize("d", 2)?;
            if a == 0.0 || b == 0.0 {
                return Err(invalid(if a == 0.0 { "a" } else { "b" }, "must be nonzero"));
            }
            let m = ComplexMatrix::diagonal(&[c::<T>(a, 0.0), c(b, 0.0)]);
            (
                FourierCocycle::constant(d, m)?,
                Diagnostics {
                    expected_exponents: Some(sorted_desc(vec![a.abs().ln(), b.abs().ln()])),
                    expected_det: Some([a * b, 0.0]),
                },
                "constant diagonal cocycle",
            )
        }
        "unitary-rotation" => {
            let d = r.usize("d", 2)?;
            if d == 0 {
                return Err(invalid("d", "must be positive"));
            }
            // R(2 pi x_1) = M e(x_1) + conj(M) e(-x_1).
            let plus = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
                (0, 1) => c(0.0, 0.5),
                (1, 0) => c(0.0, -0.5),
                _ => c(0.5, 0.0),
            });
            let minus = plus.map(|z| z.conj());
            (
                FourierCocycle::new(
                    d,
                    2,
                    T::one(),
                    [(basis_frequency(d, 0, 1), plus), (basis_frequency(d, 0, -1), minus)],
                )?,
                Diagnostics {
                    expected_exponents: Some(vec![0.0, 0.0]),
                    expected_det: Some([1.0, 0.0]),
                },
                "rotation by 2 pi x_1",
            )
        }
        "triangular-jensen" => {
            let cv = r.f64("c", 2.0)?;
            let d = r.usize("d", 2)?;
            let l = cv.ln().abs();
            (
                triangular_jensen(cv, d)?,
                Diagnostics {
                    expected_exponents: Some(vec![l, -l]),
                    expected_det: Some([1.0, 0.0]),
                },
                "upper-triangular SL(2) cocycle with Jensen-computable exponents",
            )
        }
        "su-form" => {
            let a = r.value("a", json!([term(&[0, 0], 2.0, 0.0), term(&[1, 0], 1.0, 0.0)]));
            let b = r.value("b", json!([term(&[0, 1], 1.0, 0.0)]));
            let radius = r.f64("r", 1.0)?;
            let d = match a.as_array().and_then(|t| t.first()).and_then(|t| t.get("n")) {
                Some(Value::Array(n)) => n.len(),
                _ => return Err(invalid("a", "expected a nonempty array of Fourier terms")),
            };
            let a = trig_from_json::<T>(d, &a, "a")?;
            let b = trig_from_json::<T>(d, &b, "b")?;
            (
                build_su_form(&a, &b, T::lit(radius), CertificateOptions::default())?,
                Diagnostics {
                    expected_exponents: None,
                    expected_det: None,
                },
                "matrix [[a, -conj b], [b, conj a]] whose first column is (a, b)",
            )
        }
        "prop34-block" => {
            let cv = r.f64("c", 2.0)?;
            let d = r.usize("d", 3)?;
            let k = r.usize("k", 2)?;
            let m = r.usize("m", 4)?;
            let lambda = r.f64("lambda", 3.0)?;
            let seed = triangular_jensen::<T>(cv, 2)?;
            let block = build_block(&seed, d, k, m, T::lit(lambda))?;
            let mu = crate::cocycle::block_mu(k, m, lambda)?;
            let mut exps = vec![lambda.ln(); k - 1];
            exps.extend([cv.ln().abs(), -cv.ln().abs()]);
            if let Some(mu) = mu {
                exps.extend(std::iter::repeat(mu.ln()).take(m - k - 1));
            }
            (
                block,
                Diagnostics {
                    expected_exponents: Some(sorted_desc(exps)),
                    expected_det: Some([1.0, 0.0]),
                },
                "blockdiag(lambda I, A2(x_1, x_2), mu I) over a triangular SL(2) seed",
            )
        }
        other => {
            return Err(invalid(
                "name",
                format!("unknown example `{other}`; expected one of {}", NAMES.join(", ")),
            ))
        }
    };
    let spec = r.finish(name, provenance)?;
    Ok(Example {
        spec,
        cocycle,
        diagnostics,
    })
}

/// Parses `key=value` pairs; values are read as JSON when possible.
pub fn parse_params<S: AsRef<str>>(pairs: &[S]) -> Result<Params> {
    let mut out = Params::new();
    for pair in pairs {
        let pair = pair.as_ref();
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{pair}`")))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}
