//! Diagonal certificates for dissipativity and stable dissipativity.
//!
//! Certificates are stored as the left scaling `C = diag(c)`: the matrix is
//! dissipative when `xᵀ C A x ≤ 0` for all `x`. Every `Certified` outcome is
//! re-verified with exact rational LDLᵀ before it is returned.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_graph, ColoredGraph};
use crate::linalg::{self, ldlt_definiteness};
use crate::matrix::Matrix;
use crate::model::render_vector;
use crate::scalar::{f64_to_ratio, Scalar};
use crate::{InteractionMatrix, Rational};

/// Positive diagonal scaling `c` with `sym(diag(c)·A) ≤ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate(Vec<Rational>);

impl Certificate {
    pub fn new(c: Vec<Rational>) -> Result<Self> {
        if c.is_empty() || c.iter().any(|v| !v.is_positive()) {
            return Err(Error::InvalidCertificate { expected: c.len() });
        }
        Ok(Certificate(c))
    }

    pub fn ones(n: usize) -> Self {
        Certificate(vec![Rational::one(); n])
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Primitive integer representative (same ray, smallest integers).
    pub fn normalized(&self) -> Self {
        Certificate(linalg::primitive_integer_vector(&self.0))
    }

    pub fn scaled(&self, lambda: &Rational) -> Self {
        Certificate(self.0.iter().map(|v| v.clone() * lambda.clone()).collect())
    }

    /// The paper-side `d_i = 1 / c_i` used by the Lyapunov function.
    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(Scalar::to_f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertifyOutcome {
    Certified(Certificate),
    RefutedGraph(String),
    /// No positive diagonal in the candidate family works; `witness` makes
    /// `xᵀ diag(candidate) A x` strictly positive.
    RefutedAlgebra {
        reason: String,
        candidate: Vec<Rational>,
        witness: Vec<Rational>,
    },
    Unknown(String),
}

impl CertifyOutcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            CertifyOutcome::Certified(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, CertifyOutcome::Certified(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            CertifyOutcome::Certified(_) => "Certified",
            CertifyOutcome::RefutedGraph(_) => "RefutedGraph",
            CertifyOutcome::RefutedAlgebra { .. } => "RefutedAlgebra",
            CertifyOutcome::Unknown(_) => "Unknown",
        }
    }

    pub fn to_json(&self) -> OutcomeJson {
        let (reason, certificate, candidate, witness) = match self {
            CertifyOutcome::Certified(c) => (None, Some(render_vector(c.values())), None, None),
            CertifyOutcome::RefutedGraph(r) | CertifyOutcome::Unknown(r) => {
                (Some(r.clone()), None, None, None)
            }
            CertifyOutcome::RefutedAlgebra {
                reason,
                candidate,
                witness,
            } => (
                Some(reason.clone()),
                None,
                Some(render_vector(candidate)),
                Some(render_vector(witness)),
            ),
        };
        OutcomeJson {
            outcome: self.label(),
            reason,
            certificate,
            candidate,
            witness,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OutcomeJson {
    pub outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

/// `(A + Aᵀ) / 2`.
pub fn sym_part<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    let two = T::one() + T::one();
    Matrix::from_fn(a.rows(), a.cols(), |i, j| {
        (a[(i, j)].clone() + a[(j, i)].clone()) / two.clone()
    })
}

/// `(A − Aᵀ) / 2`.
pub fn skew_part<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    let two = T::one() + T::one();
    Matrix::from_fn(a.rows(), a.cols(), |i, j| {
        (a[(i, j)].clone() - a[(j, i)].clone()) / two.clone()
    })
}

/// `xᵀ diag(c) A x`, exactly.
pub fn scaled_form(a: &InteractionMatrix, c: &[Rational], x: &[Rational]) -> Rational {
    let ax = a.mul_vec(x);
    c.iter()
        .zip(x)
        .zip(&ax)
        .fold(Rational::zero(), |acc, ((ci, xi), axi)| {
            acc + ci.clone() * xi.clone() * axi.clone()
        })
}

/// True iff `sym(diag(c)·A)` is negative semidefinite (exact LDLᵀ of the
/// negation with full symmetric pivoting).
pub fn verify_certificate(a: &InteractionMatrix, c: &Certificate) -> bool {
    if c.len() != a.n() {
        return false;
    }
    let neg = sym_part(&a.scale_rows(c.values())).scale(&-Rational::one());
    ldlt_definiteness(&neg).verdict.is_psd()
}

/// Skew identities `c_i a_ij = −c_j a_ji` on every pair touching a white
/// vertex, plus negative definiteness of `Σ c_i a_ij x_i x_j` over black
/// `i, j`.
pub fn is_almost_skew(a: &InteractionMatrix, c: &Certificate) -> bool {
    let n = a.n();
    if c.len() != n {
        return false;
    }
    let cv = c.values();
    for i in 0..n {
        for j in i + 1..n {
            if (a[(i, i)].is_zero() || a[(j, j)].is_zero())
                && cv[i].clone() * a[(i, j)].clone() + cv[j].clone() * a[(j, i)].clone()
                    != Rational::zero()
            {
                return false;
            }
        }
    }
    black_block_definiteness(a, cv, &black_set(a)).is_pd()
}

fn black_set(a: &InteractionMatrix) -> Vec<usize> {
    (0..a.n()).filter(|&i| a[(i, i)].is_negative()).collect()
}

fn black_block_definiteness(
    a: &InteractionMatrix,
    c: &[Rational],
    black: &[usize],
) -> linalg::Definiteness {
    let block = a.scale_rows(c).principal_submatrix(black);
    ldlt_definiteness(&sym_part(&block).scale(&-Rational::one())).verdict
}

/// Black vertices: the coordinates a certificate forces to vanish whenever
/// the quadratic form does. They seed the reduction with bullets.
pub fn lemma1_seed(a: &InteractionMatrix, _c: &Certificate) -> Vec<usize> {
    black_set(a)
}

/// What the scale search must reach on the black block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Semidefinite,
    Definite,
}

/// Structure of the skew constraints along the weak-edge subgraph.
struct Propagation {
    c: Vec<Rational>,
    component: Vec<usize>,
    components: usize,
}

fn witness_for_pair(
    a: &InteractionMatrix,
    c: &[Rational],
    i: usize,
    j: usize,
) -> Vec<Rational> {
    // With a_ii = 0, x = t e_i + e_j gives t (c_i a_ij + c_j a_ji) + c_j a_jj.
    let (w, o) = if a[(i, i)].is_zero() { (i, j) } else { (j, i) };
    let s = c[w].clone() * a[(w, o)].clone() + c[o].clone() * a[(o, w)].clone();
    debug_assert!(!s.is_zero());
    let bound = (c[o].clone() * a[(o, o)].clone() / s.clone()).abs();
    let mag = bound.floor() + Rational::one();
    let t = if s.is_positive() { mag } else { -mag };
    let mut x = vec![Rational::zero(); a.n()];
    x[w] = t;
    x[o] = Rational::one();
    x
}

fn propagate(a: &InteractionMatrix, g: &ColoredGraph) -> std::result::Result<Propagation, CertifyOutcome> {
    let n = a.n();
    let weak = g.weak_subgraph();
    let mut c = vec![Rational::one(); n];
    let mut component = vec![usize::MAX; n];
    let mut components = 0;
    let mut tree_parent = vec![usize::MAX; n];
    for root in 0..n {
        if component[root] != usize::MAX {
            continue;
        }
        component[root] = components;
        let mut queue = VecDeque::from([root]);
        while let Some(p) = queue.pop_front() {
            for i in weak.neighbours(p) {
                if component[i] != usize::MAX {
                    continue;
                }
                let (a_ip, a_pi) = (&a[(i, p)], &a[(p, i)]);
                if a_ip.is_zero() || a_pi.is_zero() || (a_ip.clone() * a_pi.clone()).is_positive() {
                    let witness = witness_for_pair(a, &c, i, p);
                    return Err(CertifyOutcome::RefutedAlgebra {
                        reason: format!(
                            "edge {}-{} touches a white vertex but a_{}{} and a_{}{} do not have opposite signs",
                            p + 1,
                            i + 1,
                            p + 1,
                            i + 1,
                            i + 1,
                            p + 1
                        ),
                        candidate: c,
                        witness,
                    });
                }
                c[i] = -c[p].clone() * a_pi.clone() / a_ip.clone();
                component[i] = components;
                tree_parent[i] = p;
                queue.push_back(i);
            }
        }
        components += 1;
    }
    // Weak edges off the spanning forest close cycles; their identities are
    // not implied by propagation.
    for (i, j) in weak.edges() {
        if tree_parent[i] == j || tree_parent[j] == i {
            continue;
        }
        let s = c[i].clone() * a[(i, j)].clone() + c[j].clone() * a[(j, i)].clone();
        if !s.is_zero() {
            let witness = witness_for_pair(a, &c, i, j);
            return Err(CertifyOutcome::RefutedAlgebra {
                reason: format!(
                    "skew identity on edge {}-{} is inconsistent around a weak cycle",
                    i + 1,
                    j + 1
                ),
                candidate: c,
                witness,
            });
        }
    }
    Ok(Propagation {
        c,
        component,
        components,
    })
}

fn black_block_f64(a: &InteractionMatrix, c: &[f64], black: &[usize]) -> DMatrix<f64> {
    let k = black.len();
    DMatrix::from_fn(k, k, |p, q| {
        let (i, j) = (black[p], black[q]);
        0.5 * (c[i] * a[(i, j)].to_f64() + c[j] * a[(j, i)].to_f64())
    })
}

/// Largest eigenvalue of the black block relative to its Frobenius norm;
/// negative values mean definite.
fn search_objective(a: &InteractionMatrix, c: &[f64], black: &[usize]) -> f64 {
    let m = black_block_f64(a, c, black);
    let norm = m.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let eig = nalgebra::SymmetricEigen::new(m);
    eig.eigenvalues.max() / norm
}

fn scaled_certificate(base: &[Rational], component: &[usize], log2_scale: &[f64]) -> Vec<Rational> {
    base.iter()
        .zip(component)
        .map(|(ci, &m)| {
            let e = log2_scale[m];
            let factor = if e.fract() == 0.0 {
                let k = e as i32;
                let two = Rational::from_integer(BigInt::from(2));
                if k >= 0 {
                    num_traits::pow(two, k as usize)
                } else {
                    Rational::one() / num_traits::pow(two, (-k) as usize)
                }
            } else {
                // Round to 24 fractional bits before the exact check.
                let v = (2f64.powf(e) * 16_777_216.0).round() / 16_777_216.0;
                f64_to_ratio(v).expect("finite scale")
            };
            ci.clone() * factor
        })
        .collect()
}

fn meets_target(a: &InteractionMatrix, c: &[Rational], black: &[usize], target: Target) -> bool {
    let verdict = black_block_definiteness(a, c, black);
    match target {
        Target::Semidefinite => verdict.is_psd(),
        Target::Definite => verdict.is_pd(),
    }
}

const GRID: std::ops::RangeInclusive<i32> = -12..=12;

/// Searches positive per-component scales `s_m` (components of the
/// weak-edge subgraph) that make the black block of `sym(diag(s·c)·A)`
/// negative (semi)definite.
///
/// Coordinate descent over the grid `2^k, −12 ≤ k ≤ 12`, then over
/// shrinking fractional steps, then mirror descent on the convex
/// eigenvalue objective; every candidate is checked exactly.
fn search_scales(
    a: &InteractionMatrix,
    prop: &Propagation,
    black: &[usize],
    target: Target,
) -> Option<Vec<Rational>> {
    let mut log2 = vec![0.0f64; prop.components];
    if meets_target(a, &prop.c, black, target) {
        return Some(prop.c.clone());
    }
    let mut active: Vec<usize> = black.iter().map(|&v| prop.component[v]).collect();
    active.sort_unstable();
    active.dedup();
    // The first active component fixes the overall scale.
    let free: Vec<usize> = active.iter().skip(1).copied().collect();
    if free.is_empty() {
        return None;
    }
    let base_f64: Vec<f64> = prop.c.iter().map(Scalar::to_f64).collect();
    let eval = |log2: &[f64]| -> f64 {
        let c: Vec<f64> = base_f64
            .iter()
            .zip(&prop.component)
            .map(|(ci, &m)| ci * 2f64.powf(log2[m]))
            .collect();
        search_objective(a, &c, black)
    };
    let mut best = eval(&log2);
    for _sweep in 0..20 {
        let mut improved = false;
        for &m in &free {
            let keep = log2[m];
            let mut arg = keep;
            for k in GRID {
                log2[m] = f64::from(k);
                let v = eval(&log2);
                if v < best - 1e-15 {
                    best = v;
                    arg = log2[m];
                    improved = true;
                }
            }
            log2[m] = arg;
        }
        let candidate = scaled_certificate(&prop.c, &prop.component, &log2);
        if meets_target(a, &candidate, black, target) {
            return Some(candidate);
        }
        if !improved {
            break;
        }
    }
    let mut step = 0.5;
    while step >= 1.0 / 64.0 {
        let mut improved = true;
        while improved {
            improved = false;
            for &m in &free {
                for dir in [-1.0, 1.0] {
                    let keep = log2[m];
                    log2[m] = (keep + dir * step).clamp(-12.0, 12.0);
                    let v = eval(&log2);
                    if v < best - 1e-15 {
                        best = v;
                        improved = true;
                    } else {
                        log2[m] = keep;
                    }
                }
            }
        }
        let candidate = scaled_certificate(&prop.c, &prop.component, &log2);
        if meets_target(a, &candidate, black, target) {
            return Some(candidate);
        }
        step /= 2.0;
    }
    let start: Vec<f64> = active.iter().map(|&m| 2f64.powf(log2[m])).collect();
    mirror_descent(a, prop, black, &active, &start, target)
}

/// Weights in the simplex over the active components minimising
/// `λ_max(Σ_m s_m M_m)`, with `M_m` the black block contributed by
/// component `m`. The objective is convex; exponentiated subgradient steps
/// use `∂λ/∂s_m = uᵀ M_m u` for a top eigenvector `u`.
fn mirror_descent(
    a: &InteractionMatrix,
    prop: &Propagation,
    black: &[usize],
    active: &[usize],
    start: &[f64],
    target: Target,
) -> Option<Vec<Rational>> {
    let base_f64: Vec<f64> = prop.c.iter().map(Scalar::to_f64).collect();
    let parts: Vec<DMatrix<f64>> = active
        .iter()
        .map(|&m| {
            let c: Vec<f64> = base_f64
                .iter()
                .zip(&prop.component)
                .map(|(ci, &k)| if k == m { *ci } else { 0.0 })
                .collect();
            black_block_f64(a, &c, black)
        })
        .collect();
    let total: f64 = start.iter().sum();
    let mut w: Vec<f64> = start.iter().map(|v| v / total).collect();
    let mut best = f64::INFINITY;
    for iter in 0..MIRROR_ITERATIONS {
        let m = parts
            .iter()
            .zip(&w)
            .fold(DMatrix::zeros(black.len(), black.len()), |acc, (p, wi)| acc + p * *wi);
        let eig = nalgebra::SymmetricEigen::new(m);
        let top = eig.eigenvalues.imax();
        let lambda = eig.eigenvalues[top];
        if lambda < best {
            best = lambda;
            if lambda < 0.0 {
                let candidate = weighted_certificate(&prop.c, &prop.component, active, &w);
                if meets_target(a, &candidate, black, target) {
                    return Some(candidate);
                }
            }
        }
        let u = eig.eigenvectors.column(top);
        let grad: Vec<f64> = parts.iter().map(|p| u.dot(&(p * u))).collect();
        let scale = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        if scale == 0.0 {
            break;
        }
        let eta = 2.0 / (scale * ((iter + 1) as f64).sqrt());
        for (wi, g) in w.iter_mut().zip(&grad) {
            *wi *= (-eta * g).exp();
        }
        let sum: f64 = w.iter().sum();
        for wi in w.iter_mut() {
            *wi = (*wi / sum).max(1e-12);
        }
    }
    None
}

const MIRROR_ITERATIONS: usize = 4000;

fn weighted_certificate(base: &[Rational], component: &[usize], active: &[usize], w: &[f64]) -> Vec<Rational> {
    let mut scale = vec![Rational::one(); component.iter().max().map_or(0, |m| m + 1)];
    for (&m, &wi) in active.iter().zip(w) {
        let v = ((wi * 16_777_216.0).round().max(1.0)) / 16_777_216.0;
        scale[m] = f64_to_ratio(v).expect("finite weight");
    }
    base.iter()
        .zip(component)
        .map(|(ci, &m)| ci.clone() * scale[m].clone())
        .collect()
}

fn find_with_target(a: &InteractionMatrix, target: Target) -> CertifyOutcome {
    let g = match build_graph(a) {
        Ok(g) => g,
        Err(e) => return CertifyOutcome::RefutedGraph(e.to_string()),
    };
    let prop = match propagate(a, &g) {
        Ok(p) => p,
        Err(outcome) => return outcome,
    };
    let black = g.black_vertices();
    match search_scales(a, &prop, &black, target) {
        Some(c) => {
            let cert = Certificate(c).normalized();
            debug_assert!(verify_certificate(a, &cert));
            if verify_certificate(a, &cert) {
                CertifyOutcome::Certified(cert)
            } else {
                CertifyOutcome::Unknown("candidate failed exact re-verification".into())
            }
        }
        None => CertifyOutcome::Unknown(match target {
            Target::Semidefinite => "no per-component scaling made the black block negative semidefinite",
            Target::Definite => "no per-component scaling made the black block negative definite",
        }
        .into()),
    }
}

/// Searches a diagonal certificate of dissipativity.
///
/// The skew identities on weak edges fix `c` up to one positive factor per
/// component of the weak-edge subgraph; the factors are then searched so the
/// black block becomes negative semidefinite.
pub fn find_certificate(a: &InteractionMatrix) -> CertifyOutcome {
    find_with_target(a, Target::Semidefinite)
}

/// Stable dissipativity: every cycle of the graph has a strong link and some
/// positive diagonal makes the scaled matrix almost skew-symmetric.
pub fn is_stably_dissipative(a: &InteractionMatrix) -> CertifyOutcome {
    let g = match build_graph(a) {
        Ok(g) => g,
        Err(e) => return CertifyOutcome::RefutedGraph(e.to_string()),
    };
    if !g.is_stably_dissipative() {
        return CertifyOutcome::RefutedGraph("a cycle of the graph has no strong link".into());
    }
    match find_with_target(a, Target::Definite) {
        CertifyOutcome::Certified(c) if is_almost_skew(a, &c) => CertifyOutcome::Certified(c),
        CertifyOutcome::Certified(_) => {
            CertifyOutcome::Unknown("certificate is not almost skew-symmetric".into())
        }
        other => other,
    }
}
