//! Value types: rational literals, matrix documents, LV systems.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{dot, Matrix};
use crate::{InteractionMatrix, Rational};

/// Parses an exact rational literal: integer, `p/q`, or finite decimal with
/// optional exponent (`-0.25`, `1.5e-3`). Decimals never pass through binary
/// floating point.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let malformed = || Error::MalformedLiteral(text.to_string());
    if s.is_empty() {
        return Err(malformed());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = parse_integer(num.trim()).ok_or_else(malformed)?;
        let d: BigInt = parse_integer(den.trim()).ok_or_else(malformed)?;
        if d.is_zero() {
            return Err(Error::ZeroDenominator(text.to_string()));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..].parse().map_err(|_| malformed())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    if exponent.abs() > 10_000 {
        return Err(malformed());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().map_err(|_| malformed())?);
    let scale = exponent - frac_part.len() as i64;
    let ten = Rational::from_integer(BigInt::from(10));
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    Ok(if negative { -value } else { value })
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Canonical text of a rational: `p` or `p/q`.
pub fn render_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn render_vector(v: &[Rational]) -> Vec<String> {
    v.iter().map(render_rational).collect()
}

fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        // `arbitrary_precision` keeps the literal digits of JSON numbers.
        Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(Error::MalformedLiteral(other.to_string())),
    }
}

fn vector_from_json(v: &Value, what: &str) -> Result<Vec<Rational>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("\"{what}\" must be an array")))?
        .iter()
        .map(rational_from_json)
        .collect()
}

/// The on-disk matrix document: `{"matrix": [[..]], "q": [..], "r": [..]}`.
///
/// At most one of `q`/`r` may be present; system-level commands need
/// exactly one.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixDocument {
    pub matrix: InteractionMatrix,
    pub q: Option<Vec<Rational>>,
    pub r: Option<Vec<Rational>>,
}

/// Serialized form of [`MatrixDocument`] with rationals as strings.
#[derive(Serialize, Deserialize)]
struct RawDocument {
    matrix: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<Vec<String>>,
}

impl MatrixDocument {
    /// Accepts either a full document object or a bare array of rows.
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let (rows, q, r) = match &value {
            Value::Array(_) => (&value, None, None),
            Value::Object(map) => (
                map.get("matrix")
                    .ok_or_else(|| Error::Parse("missing \"matrix\"".into()))?,
                map.get("q"),
                map.get("r"),
            ),
            _ => return Err(Error::Parse("expected a JSON object or array".into())),
        };
        let rows = rows
            .as_array()
            .ok_or_else(|| Error::Parse("\"matrix\" must be an array of rows".into()))?
            .iter()
            .map(|row| vector_from_json(row, "matrix row"))
            .collect::<Result<Vec<_>>>()?;
        let matrix = Matrix::square_from_rows(rows)?;
        let n = matrix.n();
        let q = q.map(|v| vector_from_json(v, "q")).transpose()?;
        let r = r.map(|v| vector_from_json(v, "r")).transpose()?;
        if q.is_some() && r.is_some() {
            return Err(Error::Parse("give at most one of \"q\" and \"r\"".into()));
        }
        for v in q.iter().chain(r.iter()) {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        Ok(MatrixDocument { matrix, q, r })
    }

    pub fn render(&self) -> String {
        let raw = RawDocument {
            matrix: self.matrix.to_rows().iter().map(|r| render_vector(r)).collect(),
            q: self.q.as_deref().map(render_vector),
            r: self.r.as_deref().map(render_vector),
        };
        serde_json::to_string(&raw).expect("serializable")
    }

    /// The LV system described by the document, when it carries `q` or `r`.
    pub fn system(&self) -> Result<Option<LvSystem>> {
        match (&self.q, &self.r) {
            (Some(q), _) => LvSystem::new(self.matrix.clone(), q.clone()).map(Some),
            (None, Some(r)) => {
                system_from_rates(&self.matrix, &GrowthRates(r.clone())).map(Some)
            }
            (None, None) => Ok(None),
        }
    }
}

/// Parses a matrix document and returns its interaction matrix.
pub fn parse_matrix(text: &str) -> Result<InteractionMatrix> {
    MatrixDocument::parse(text).map(|d| d.matrix)
}

/// Renders a bare matrix as a document without `q`/`r`.
pub fn render_matrix(a: &InteractionMatrix) -> String {
    MatrixDocument {
        matrix: a.clone(),
        q: None,
        r: None,
    }
    .render()
}

/// Intrinsic growth/decay rates `r_i` of the classical LV form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthRates(pub Vec<Rational>);

/// An interaction matrix together with a positive interior equilibrium `q`,
/// i.e. the field `x ∗ A(x − q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LvSystem {
    a: InteractionMatrix,
    q: Vec<Rational>,
}

impl LvSystem {
    pub fn new(a: InteractionMatrix, q: Vec<Rational>) -> Result<Self> {
        if q.len() != a.n() {
            return Err(Error::DimensionMismatch {
                expected: a.n(),
                found: q.len(),
            });
        }
        if let Some(i) = q.iter().position(|v| !v.is_positive()) {
            return Err(Error::NonPositiveEquilibrium(i + 1));
        }
        Ok(LvSystem { a, q })
    }

    /// System with equilibrium at the all-ones point.
    pub fn with_unit_equilibrium(a: InteractionMatrix) -> Self {
        let n = a.n();
        LvSystem {
            a,
            q: vec![Rational::one(); n],
        }
    }

    pub fn matrix(&self) -> &InteractionMatrix {
        &self.a
    }

    pub fn equilibrium(&self) -> &[Rational] {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// Growth rates `r = −A q` of the equivalent classical form.
    pub fn growth_rates(&self) -> GrowthRates {
        GrowthRates(self.a.mul_vec(&self.q).into_iter().map(|v| -v).collect())
    }
}

/// Converts the classical form `ẋ = x ∗ (r + A x)` into `(A, q)` with
/// `A q = −r`, `q > 0`.
///
/// Among the solutions of `A q = −r` the one closest (Euclidean) to the
/// all-ones point is preferred; if it is not strictly positive, a positive
/// point of the solution family is searched along the kernel directions.
pub fn system_from_rates(a: &InteractionMatrix, r: &GrowthRates) -> Result<LvSystem> {
    let n = a.n();
    if r.0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: r.0.len(),
        });
    }
    let rhs: Vec<Rational> = r.0.iter().map(|v| -v.clone()).collect();
    let particular = linalg::solve_particular(a, &rhs).ok_or(Error::NoSolution)?;
    let kernel = linalg::null_space(a);
    let ones = vec![Rational::one(); n];
    let closest = project_onto_affine(&particular, &kernel, &ones);
    if closest.iter().all(Signed::is_positive) {
        return LvSystem::new(a.clone(), closest);
    }
    positive_point_in_family(&closest, &kernel)
        .ok_or(Error::NoPositiveSolution)
        .and_then(|q| LvSystem::new(a.clone(), q))
}

/// Point of `base + span(kernel)` nearest to `target`, computed exactly via
/// the normal equations of the kernel Gram matrix.
fn project_onto_affine(
    base: &[Rational],
    kernel: &[Vec<Rational>],
    target: &[Rational],
) -> Vec<Rational> {
    if kernel.is_empty() {
        return base.to_vec();
    }
    let k = kernel.len();
    let gram = Matrix::from_fn(k, k, |i, j| dot(&kernel[i], &kernel[j]));
    let diff: Vec<Rational> = target
        .iter()
        .zip(base)
        .map(|(t, b)| t.clone() - b.clone())
        .collect();
    let rhs: Vec<Rational> = kernel.iter().map(|v| dot(v, &diff)).collect();
    let coeffs = linalg::solve_square(&gram, &rhs).expect("kernel basis is independent");
    let mut x = base.to_vec();
    for (c, v) in coeffs.iter().zip(kernel) {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += c.clone() * vi.clone();
        }
    }
    x
}

/// Greedy coordinate search for a strictly positive point of
/// `start + span(kernel)`: along each direction in turn, move to the middle
/// of the open feasible interval for the coordinates that direction touches.
/// Exact for one-dimensional families.
fn positive_point_in_family(start: &[Rational], kernel: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let mut x = start.to_vec();
    for _round in 0..2 {
        for dir in kernel {
            if x.iter().all(Signed::is_positive) {
                return Some(x);
            }
            let (lo, hi) = positive_interval(&x, dir)?;
            let s = match (lo, hi) {
                (Some(l), Some(h)) => (l + h) / Rational::from_integer(2.into()),
                (Some(l), None) => l + Rational::one(),
                (None, Some(h)) => h - Rational::one(),
                (None, None) => Rational::zero(),
            };
            for (xi, di) in x.iter_mut().zip(dir) {
                *xi += s.clone() * di.clone();
            }
        }
    }
    x.iter().all(Signed::is_positive).then_some(x)
}

/// Open interval `(lo, hi)` of `s` with `x + s·dir > 0` on every coordinate
/// the direction moves, or `None` when a fixed coordinate is nonpositive or
/// the interval is empty.
type Interval = (Option<Rational>, Option<Rational>);

fn positive_interval(x: &[Rational], dir: &[Rational]) -> Option<Interval> {
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for (xi, di) in x.iter().zip(dir) {
        if di.is_zero() {
            continue;
        }
        let bound = -xi.clone() / di.clone();
        if di.is_positive() {
            lo = Some(lo.map_or(bound.clone(), |l| l.max(bound)));
        } else {
            hi = Some(hi.map_or(bound.clone(), |h| h.min(bound)));
        }
    }
    if let (Some(l), Some(h)) = (&lo, &hi) {
        if l >= h {
            return None;
        }
    }
    Some((lo, hi))
}
