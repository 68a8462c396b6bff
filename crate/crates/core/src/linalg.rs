//! Elimination kernels: reduced echelon form, rank, null spaces, linear
//! solves, symmetric-pivoted LDLᵀ definiteness tests, and fraction-free
//! (Bareiss) rank over the integers.
//!
//! Every routine is generic over [`Scalar`]; with a rational scalar the
//! results are exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::Rational;

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Rref<T> {
    pub matrix: Matrix<T>,
    pub pivots: Vec<usize>,
}

impl<T: Scalar> Rref<T> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Gauss-Jordan elimination with partial pivoting on the largest magnitude.
pub fn rref<T: Scalar>(m: &Matrix<T>) -> Rref<T> {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // Exact types take the first nonzero; floats take the largest magnitude.
        let mut best: Option<usize> = None;
        for i in r..rows {
            if a[(i, c)].negligible() {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(b) if !T::EXACT && a[(i, c)].abs() > a[(b, c)].abs() => Some(i),
                keep => keep,
            };
            if T::EXACT {
                break;
            }
        }
        let Some(p) = best else { continue };
        a.swap_rows(r, p);
        let inv = T::one() / a[(r, c)].clone();
        for j in 0..cols {
            let v = a[(r, j)].clone() * inv.clone();
            a[(r, j)] = v;
        }
        a[(r, c)] = T::one();
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in 0..cols {
                if a[(r, j)].is_zero() {
                    continue;
                }
                let v = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
                a[(i, j)] = v;
            }
            a[(i, c)] = T::zero();
        }
        pivots.push(c);
        r += 1;
    }
    Rref { matrix: a, pivots }
}

pub fn rank<T: Scalar>(m: &Matrix<T>) -> usize {
    rref(m).rank()
}

/// Basis of `{x : M x = 0}`, put in reduced echelon form (leading entry 1).
pub fn null_space<T: Scalar>(m: &Matrix<T>) -> Vec<Vec<T>> {
    let red = rref(m);
    let cols = m.cols();
    let mut basis = Vec::new();
    let mut is_pivot = vec![false; cols];
    for &p in &red.pivots {
        is_pivot[p] = true;
    }
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![T::zero(); cols];
        v[free] = T::one();
        for (r, &p) in red.pivots.iter().enumerate() {
            v[p] = -red.matrix[(r, free)].clone();
        }
        basis.push(v);
    }
    echelon_basis(basis, cols)
}

/// Basis of the row space (nonzero rows of the reduced echelon form).
pub fn row_space<T: Scalar>(m: &Matrix<T>) -> Vec<Vec<T>> {
    let red = rref(m);
    (0..red.rank()).map(|r| red.matrix.row(r).to_vec()).collect()
}

/// Re-expresses a spanning list in reduced echelon form, dropping dependent vectors.
pub fn echelon_basis<T: Scalar>(vectors: Vec<Vec<T>>, dim: usize) -> Vec<Vec<T>> {
    if vectors.is_empty() {
        return vectors;
    }
    let m = Matrix::from_rows(vectors).expect("vectors share one length");
    debug_assert_eq!(m.cols(), dim);
    row_space(&m)
}

/// Some solution of `M x = b` (free variables set to zero), or `None` when
/// the system is inconsistent.
pub fn solve_particular<T: Scalar>(m: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    assert_eq!(b.len(), m.rows());
    let cols = m.cols();
    let aug = Matrix::from_fn(m.rows(), cols + 1, |i, j| {
        if j < cols {
            m[(i, j)].clone()
        } else {
            b[i].clone()
        }
    });
    let red = rref(&aug);
    if red.pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![T::zero(); cols];
    for (r, &p) in red.pivots.iter().enumerate() {
        x[p] = red.matrix[(r, cols)].clone();
    }
    Some(x)
}

/// Unique solution of a square nonsingular system.
pub fn solve_square<T: Scalar>(m: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    if rank(m) != m.cols() {
        return None;
    }
    solve_particular(m, b)
}

/// Outcome of the pivoted LDLᵀ test of a symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Definiteness {
    /// All pivots strictly positive.
    PositiveDefinite,
    /// Pivots nonnegative, `zero_pivots` of them vanish.
    PositiveSemidefinite { zero_pivots: usize },
    /// A negative pivot, or a zero diagonal with a nonzero off-diagonal in
    /// the remaining Schur complement.
    Indefinite,
}

impl Definiteness {
    pub fn is_psd(&self) -> bool {
        !matches!(self, Definiteness::Indefinite)
    }

    pub fn is_pd(&self) -> bool {
        matches!(self, Definiteness::PositiveDefinite)
    }
}

/// Pivots produced by [`ldlt_definiteness`], in elimination order.
#[derive(Clone, Debug)]
pub struct LdltTrace<T> {
    pub pivots: Vec<T>,
    pub order: Vec<usize>,
    pub verdict: Definiteness,
}

/// LDLᵀ with full symmetric (diagonal) pivoting.
///
/// At each stage the largest remaining diagonal entry is eliminated. When no
/// positive diagonal remains the Schur complement is PSD only if it is
/// identically zero.
pub fn ldlt_definiteness<T: Scalar>(sym: &Matrix<T>) -> LdltTrace<T> {
    assert!(sym.is_square());
    let n = sym.rows();
    let mut s = sym.clone();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::with_capacity(n);
    let mut order = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let (pos, &p) = remaining
            .iter()
            .enumerate()
            .max_by(|(_, &a), (_, &b)| {
                s[(a, a)]
                    .partial_cmp(&s[(b, b)])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    // Ties resolve to the lowest index.
                    .then(b.cmp(&a))
            })
            .expect("nonempty");
        let d = s[(p, p)].clone();
        if d.negligible() || d < T::zero() {
            let negative = remaining
                .iter()
                .any(|&i| !s[(i, i)].negligible() && s[(i, i)] < T::zero());
            let off = remaining.iter().any(|&i| {
                remaining
                    .iter()
                    .any(|&j| i != j && !s[(i, j)].negligible())
            });
            let verdict = if negative || off {
                Definiteness::Indefinite
            } else {
                Definiteness::PositiveSemidefinite {
                    zero_pivots: remaining.len(),
                }
            };
            if negative {
                pivots.push(d);
                order.push(p);
            }
            return LdltTrace {
                pivots,
                order,
                verdict,
            };
        }
        remaining.remove(pos);
        for &i in &remaining {
            let f = s[(i, p)].clone();
            if f.is_zero() {
                continue;
            }
            for &j in &remaining {
                let g = s[(p, j)].clone();
                if g.is_zero() {
                    continue;
                }
                let v = s[(i, j)].clone() - f.clone() * g / d.clone();
                s[(i, j)] = v;
            }
        }
        pivots.push(d);
        order.push(p);
    }
    LdltTrace {
        pivots,
        order,
        verdict: Definiteness::PositiveDefinite,
    }
}

/// Rank over the rationals by fraction-free (Bareiss) elimination on the
/// integer matrix obtained by clearing each row's denominators.
pub fn bareiss_rank(m: &Matrix<Rational>) -> usize {
    let mut a: Vec<Vec<BigInt>> = (0..m.rows()).map(|i| clear_denominators(m.row(i))).collect();
    let rows = a.len();
    let cols = m.cols();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Integer vector proportional to `v`: denominators cleared, content removed.
pub fn clear_denominators(v: &[Rational]) -> Vec<BigInt> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

/// Primitive integer representative with a positive leading entry.
pub fn primitive_integer_vector(v: &[Rational]) -> Vec<Rational> {
    let mut ints = clear_denominators(v);
    if ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        ints.iter_mut().for_each(|x| *x = -x.clone());
    }
    ints.into_iter().map(Rational::from_integer).collect()
}

/// True when the row spans of `a` and `b` coincide.
pub fn same_span<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>], dim: usize) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    let ra = echelon_basis(a.to_vec(), dim);
    let rb = echelon_basis(b.to_vec(), dim);
    ra.len() == rb.len()
        && ra
            .iter()
            .zip(&rb)
            .all(|(x, y)| x.iter().zip(y).all(|(p, q)| (p.clone() - q.clone()).negligible()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_i64_rows(rows).unwrap()
    }

    #[test]
    fn rank_routes_agree_on_small_cases() {
        let cases = [
            q(&[&[0, 0], &[0, 0]]),
            q(&[&[1, 2], &[2, 4]]),
            q(&[&[0, 1], &[-1, 0]]),
            q(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]),
            q(&[&[0, 0, 1], &[0, 0, 0], &[1, 0, 0]]),
        ];
        let expected = [0, 1, 2, 2, 2];
        for (m, e) in cases.iter().zip(expected) {
            assert_eq!(rank(m), e);
            assert_eq!(bareiss_rank(m), e);
        }
    }

    #[test]
    fn null_space_is_annihilated_and_echelon() {
        let m = q(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        let ker = null_space(&m);
        assert_eq!(ker.len(), 1);
        assert!(m.mul_vec(&ker[0]).iter().all(Zero::is_zero));
        assert_eq!(ker[0][0], Rational::one());
    }

    #[test]
    fn inconsistent_system_has_no_solution() {
        let m = q(&[&[1, 1], &[1, 1]]);
        let b = vec![Rational::from_integer(1.into()), Rational::from_integer(2.into())];
        assert!(solve_particular(&m, &b).is_none());
        let b = vec![Rational::from_integer(2.into()), Rational::from_integer(2.into())];
        let x = solve_particular(&m, &b).unwrap();
        assert_eq!(m.mul_vec(&x), b);
    }

    #[test]
    fn ldlt_classifies_definiteness() {
        assert_eq!(
            ldlt_definiteness(&q(&[&[2, 1], &[1, 2]])).verdict,
            Definiteness::PositiveDefinite
        );
        assert_eq!(
            ldlt_definiteness(&q(&[&[1, 1], &[1, 1]])).verdict,
            Definiteness::PositiveSemidefinite { zero_pivots: 1 }
        );
        assert_eq!(
            ldlt_definiteness(&q(&[&[0, 1], &[1, 0]])).verdict,
            Definiteness::Indefinite
        );
        assert_eq!(
            ldlt_definiteness(&q(&[&[1, 0], &[0, -1]])).verdict,
            Definiteness::Indefinite
        );
        assert_eq!(
            ldlt_definiteness(&q(&[&[0, 0], &[0, 0]])).verdict,
            Definiteness::PositiveSemidefinite { zero_pivots: 2 }
        );
        // Zero leading diagonal needs pivoting to reach the positive block.
        assert_eq!(
            ldlt_definiteness(&q(&[&[0, 0, 0], &[0, 3, 1], &[0, 1, 1]])).verdict,
            Definiteness::PositiveSemidefinite { zero_pivots: 1 }
        );
    }

    #[test]
    fn primitive_vectors() {
        let v: Vec<Rational> = vec![
            Rational::new((-1).into(), 2.into()),
            Rational::zero(),
            Rational::new((-3).into(), 4.into()),
        ];
        let p = primitive_integer_vector(&v);
        assert_eq!(
            p,
            vec![
                Rational::from_integer(2.into()),
                Rational::zero(),
                Rational::from_integer(3.into())
            ]
        );
    }
}
