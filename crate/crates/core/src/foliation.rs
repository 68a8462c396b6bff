//! Exact kernels, the invariant foliation `W·log x = c`, the equilibria set,
//! and the Newton solve for the point where a leaf meets the equilibria.

use nalgebra::{DMatrix, DVector};
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{render_vector, LvSystem};
use crate::scalar::Scalar;
use crate::{InteractionMatrix, Rational};

/// Independent integer vectors in reduced echelon order, each primitive with
/// a positive leading entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelBasis {
    pub vectors: Vec<Vec<Rational>>,
}

impl KernelBasis {
    fn from_span(vectors: Vec<Vec<Rational>>) -> Self {
        KernelBasis {
            vectors: vectors
                .iter()
                .map(|v| linalg::primitive_integer_vector(v))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn to_json(&self) -> Vec<Vec<String>> {
        self.vectors.iter().map(|v| render_vector(v)).collect()
    }

    fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.vectors
            .iter()
            .map(|v| v.iter().map(Scalar::to_f64).collect())
            .collect()
    }
}

/// Level `c = W·log x` identifying a leaf of the foliation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Leaf {
    pub levels: Vec<f64>,
}

/// `{x > 0 : A(x − q) = 0} = (q + span(directions)) ∩ ℝⁿ₊`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquilibriaSet {
    pub base: Vec<Rational>,
    pub directions: KernelBasis,
    /// For one-dimensional families, the open interval of `s` for which
    /// `q + s·v` is positive; `None` bounds are infinite.
    pub interval: Option<(Option<Rational>, Option<Rational>)>,
}

impl EquilibriaSet {
    pub fn point(&self, coeffs: &[Rational]) -> Vec<Rational> {
        let mut x = self.base.clone();
        for (s, v) in coeffs.iter().zip(&self.directions.vectors) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += s.clone() * vi.clone();
            }
        }
        x
    }
}

/// Rank over the rationals (fraction-free elimination).
pub fn exact_rank(a: &InteractionMatrix) -> usize {
    linalg::bareiss_rank(a)
}

/// Basis of `Ker(A)`.
pub fn kernel_basis(a: &InteractionMatrix) -> KernelBasis {
    KernelBasis::from_span(linalg::null_space(a))
}

/// Basis of `Ker(Aᵀ) = {x : xᵀA = 0}`; its rows form `W`.
pub fn kernel_basis_t(a: &InteractionMatrix) -> KernelBasis {
    KernelBasis::from_span(linalg::null_space(&a.transpose()))
}

/// Checks `Ker(Aᵀ) = diag(c)·Ker(A)` as subspaces.
pub fn kernel_transport_holds(a: &InteractionMatrix, c: &[Rational]) -> bool {
    let left = kernel_basis_t(a).vectors;
    let right: Vec<Vec<Rational>> = kernel_basis(a)
        .vectors
        .iter()
        .map(|v| v.iter().zip(c).map(|(x, ci)| x.clone() * ci.clone()).collect())
        .collect();
    linalg::same_span(&left, &right, a.n())
}

/// `W` (basis of `Ker(Aᵀ)`) and `V` (basis of the row space of `A`) of a
/// matrix, exact and in binary64.
#[derive(Clone, Debug)]
pub struct Foliation {
    pub w: KernelBasis,
    pub v: Vec<Vec<Rational>>,
    w_f64: Vec<Vec<f64>>,
    v_f64: Vec<Vec<f64>>,
}

impl Foliation {
    pub fn new(a: &InteractionMatrix) -> Self {
        let w = kernel_basis_t(a);
        let v = linalg::row_space(a);
        let w_f64 = w.to_f64_rows();
        let v_f64 = v
            .iter()
            .map(|r| r.iter().map(Scalar::to_f64).collect())
            .collect();
        Foliation { w, v, w_f64, v_f64 }
    }

    /// Leaf dimension, `rank(A)`.
    pub fn dimension(&self) -> usize {
        self.v.len()
    }

    pub fn w_f64(&self) -> &[Vec<f64>] {
        &self.w_f64
    }

    pub fn levels(&self, x: &[f64]) -> Result<Leaf> {
        if let Some(i) = x.iter().position(|&v| v <= 0.0 || v.is_nan()) {
            return Err(Error::NonPositivePoint(i + 1));
        }
        Ok(Leaf {
            levels: self
                .w_f64
                .iter()
                .map(|w| w.iter().zip(x).map(|(wi, xi)| wi * xi.ln()).sum())
                .collect(),
        })
    }

    fn residual(&self, u: &DVector<f64>, leaf: &Leaf, q: &[f64]) -> DVector<f64> {
        let n = u.len();
        let mut r = DVector::zeros(n);
        for (k, w) in self.w_f64.iter().enumerate() {
            r[k] = w.iter().zip(u.iter()).map(|(a, b)| a * b).sum::<f64>() - leaf.levels[k];
        }
        let m = self.w_f64.len();
        for (k, v) in self.v_f64.iter().enumerate() {
            r[m + k] = v
                .iter()
                .enumerate()
                .map(|(j, vj)| vj * (u[j].exp() - q[j]))
                .sum();
        }
        r
    }

    fn jacobian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = u.len();
        let m = self.w_f64.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i < m {
                self.w_f64[i][j]
            } else {
                self.v_f64[i - m][j] * u[j].exp()
            }
        })
    }

    /// Least-squares projection of `log q` onto `{u : W u = c}`.
    fn initial_guess(&self, leaf: &Leaf, q: &[f64]) -> DVector<f64> {
        let n = q.len();
        let mut u = DVector::from_iterator(n, q.iter().map(|v| v.ln()));
        let m = self.w_f64.len();
        if m == 0 {
            return u;
        }
        let w = DMatrix::from_fn(m, n, |i, j| self.w_f64[i][j]);
        let gap = DVector::from_iterator(m, (0..m).map(|k| leaf.levels[k])) - &w * &u;
        let gram = &w * w.transpose();
        if let Some(y) = gram.lu().solve(&gap) {
            u += w.transpose() * y;
        }
        u
    }

    /// Damped Newton on `u = log x` for `{W u = c, V(eᵘ − q) = 0}`.
    pub fn intersect(&self, q: &[f64], leaf: &Leaf, start: Option<&[f64]>) -> Result<Vec<f64>> {
        if let Some(x0) = start {
            if let Some(i) = x0.iter().position(|&v| v <= 0.0 || v.is_nan()) {
                return Err(Error::NonPositivePoint(i + 1));
            }
        }
        let mut u = match start {
            Some(x0) => DVector::from_iterator(x0.len(), x0.iter().map(|v| v.ln())),
            None => self.initial_guess(leaf, q),
        };
        let mut r = self.residual(&u, leaf, q);
        let mut norm = r.amax();
        for iteration in 0..NEWTON_MAX_ITER {
            if norm <= NEWTON_TOL {
                return Ok(u.iter().map(|v| v.exp()).collect());
            }
            let step = self
                .jacobian(&u)
                .lu()
                .solve(&(-&r))
                .ok_or(Error::SingularJacobian(iteration))?;
            let mut lambda = 1.0;
            let mut trial;
            let mut trial_r;
            loop {
                trial = &u + &step * lambda;
                trial_r = self.residual(&trial, leaf, q);
                let ok = trial_r.iter().all(|v| v.is_finite());
                if ok && trial_r.amax() < norm {
                    break;
                }
                lambda *= 0.5;
                if lambda < 1e-12 {
                    break;
                }
            }
            if trial_r.amax() >= norm || trial_r.amax().is_nan() {
                return Err(Error::NoConvergence {
                    iterations: iteration,
                    residual: norm,
                });
            }
            u = trial;
            r = trial_r;
            norm = r.amax();
        }
        if norm <= NEWTON_TOL {
            return Ok(u.iter().map(|v| v.exp()).collect());
        }
        Err(Error::NoConvergence {
            iterations: NEWTON_MAX_ITER,
            residual: norm,
        })
    }
}

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 100;

/// `c = W·log x` with `W` spanning `Ker(Aᵀ)`.
pub fn conserved_levels(a: &InteractionMatrix, x: &[f64]) -> Result<Leaf> {
    Foliation::new(a).levels(x)
}

/// The unique positive point of the leaf `W·log x = c` that is an
/// equilibrium of the system.
pub fn leaf_equilibrium_intersection(system: &LvSystem, leaf: &Leaf) -> Result<Vec<f64>> {
    let q: Vec<f64> = system.equilibrium().iter().map(Scalar::to_f64).collect();
    Foliation::new(system.matrix()).intersect(&q, leaf, None)
}

pub fn equilibria_set(system: &LvSystem) -> EquilibriaSet {
    let directions = kernel_basis(system.matrix());
    let base = system.equilibrium().to_vec();
    let interval = (directions.dim() == 1).then(|| {
        let v = &directions.vectors[0];
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        for (qi, vi) in base.iter().zip(v) {
            if vi.is_zero() {
                continue;
            }
            let bound = -qi.clone() / vi.clone();
            if vi.is_positive() {
                lo = Some(lo.map_or(bound.clone(), |l| l.max(bound)));
            } else {
                hi = Some(hi.map_or(bound.clone(), |h| h.min(bound)));
            }
        }
        (lo, hi)
    });
    EquilibriaSet {
        base,
        directions,
        interval,
    }
}
