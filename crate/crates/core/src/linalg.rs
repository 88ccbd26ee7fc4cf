//! Small dense linear-algebra helpers: Hermitian eigendecomposition with a
//! deterministic ordering, and a Levinson solver for Hermitian Toeplitz
//! systems.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigenvalues within this fraction of the trace below zero are rounding
/// noise and get clipped to zero.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Relative Hermitian-symmetry tolerance for correlation matrices.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// Unit norm; phase fixed so the first non-negligible entry is real positive.
    pub vector: CVector,
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace_real(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// `(M + M^H) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn check_hermitian(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Numerical(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    let scale = frobenius_norm(m);
    let drift = frobenius_norm(&(m - m.adjoint()));
    if drift > HERMITIAN_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!("matrix not Hermitian (drift {drift:e})")));
    }
    Ok(())
}

fn normalize_phase(v: &mut CVector) {
    let norm = v.norm();
    if norm == 0.0 {
        return;
    }
    *v /= Complex64::new(norm, 0.0);
    if let Some(pivot) = v.iter().copied().find(|c| c.norm() > 1e-12) {
        let rot = pivot.conj() / pivot.norm();
        *v *= rot;
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Eigendecomposition of a Hermitian positive-semidefinite matrix.
///
/// Pairs are sorted by descending eigenvalue; equal eigenvalues (after
/// rounding to 12 decimals relative to the trace) are ordered by descending
/// lexicographic comparison of the rounded eigenvector components. Slightly
/// negative eigenvalues are clipped to zero; anything below
/// `-PSD_TOLERANCE · trace` is a [`Error::Numerical`].
pub fn hermitian_eigen(m: &CMatrix) -> Result<Vec<EigenPair>> {
    check_hermitian(m)?;
    let herm = hermitian_part(m);
    let trace = trace_real(&herm);
    let eig = herm.symmetric_eigen();
    let scale = trace.abs().max(f64::MIN_POSITIVE);

    let mut pairs = Vec::with_capacity(m.nrows());
    for (i, &value) in eig.eigenvalues.iter().enumerate() {
        if value < -PSD_TOLERANCE * scale {
            return Err(Error::Numerical(format!(
                "matrix not positive semidefinite (eigenvalue {value:e}, trace {trace:e})"
            )));
        }
        let mut vector = eig.eigenvectors.column(i).into_owned();
        normalize_phase(&mut vector);
        pairs.push(EigenPair { value: value.max(0.0), vector });
    }

    let key = |p: &EigenPair| round12(p.value / scale);
    pairs.sort_by(|a, b| {
        key(b).total_cmp(&key(a)).then_with(|| {
            for (x, y) in a.vector.iter().zip(b.vector.iter()) {
                let ord = round12(y.re)
                    .total_cmp(&round12(x.re))
                    .then(round12(y.im).total_cmp(&round12(x.im)));
                if ord.is_ne() {
                    return ord;
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    Ok(pairs)
}

/// `x^H M x` (real part).
pub fn quadratic_form(m: &CMatrix, x: &CVector) -> f64 {
    x.dotc(&(m * x)).re
}

/// Solves `A x = b` for the Hermitian Toeplitz matrix with first column
/// `col` (so `A[i][j] = col[i-j]` for `i ≥ j` and `conj(col[j-i])` above the
/// diagonal) using the Levinson recursion, `O(n²)`.
pub fn solve_hermitian_toeplitz(col: &[Complex64], rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = col.len();
    if rhs.len() != n {
        return Err(Error::Numerical("Toeplitz system dimension mismatch".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if col[0].im.abs() > 1e-8 * col[0].norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical("Toeplitz diagonal is not real".into()));
    }
    let t0 = col[0].re;
    if !(t0 > 0.0) {
        return Err(Error::Numerical("Toeplitz matrix is not positive definite".into()));
    }

    let zero = Complex64::new(0.0, 0.0);
    // forward: A_k f = e_first, backward: A_k b = e_last
    let mut fwd = vec![Complex64::new(1.0 / t0, 0.0)];
    let mut bwd = vec![Complex64::new(1.0 / t0, 0.0)];
    let mut x = vec![rhs[0] / t0];

    for k in 1..n {
        let ef: Complex64 = (0..k).map(|i| col[k - i] * fwd[i]).sum();
        let eb: Complex64 = (0..k).map(|i| col[i + 1].conj() * bwd[i]).sum();
        let denom = Complex64::new(1.0, 0.0) - ef * eb;
        if denom.norm() < 1e-14 {
            return Err(Error::Numerical("Levinson recursion broke down".into()));
        }

        let mut f_next = Vec::with_capacity(k + 1);
        let mut b_next = Vec::with_capacity(k + 1);
        for i in 0..=k {
            let f_ext = if i < k { fwd[i] } else { zero };
            let b_ext = if i > 0 { bwd[i - 1] } else { zero };
            f_next.push((f_ext - ef * b_ext) / denom);
            b_next.push((b_ext - eb * f_ext) / denom);
        }
        fwd = f_next;
        bwd = b_next;

        let ex: Complex64 = (0..k).map(|i| col[k - i] * x[i]).sum();
        let correction = rhs[k] - ex;
        x.push(zero);
        for (xi, bi) in x.iter_mut().zip(&bwd) {
            *xi += correction * bi;
        }
    }
    Ok(x)
}

/// Dense Hermitian Toeplitz matrix from its first column.
pub fn toeplitz_from_column(col: &[Complex64]) -> CMatrix {
    let n = col.len();
    CMatrix::from_fn(n, n, |i, j| if i >= j { col[i - j] } else { col[j - i].conj() })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn levinson_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 2, 3, 7, 20, 64] {
            // column of a PSD sequence: autocorrelation of a random filter plus a ridge
            let taps: Vec<Complex64> = (0..5).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let col: Vec<Complex64> = (0..n)
                .map(|lag| {
                    let mut acc = (0..taps.len().saturating_sub(lag))
                        .map(|i| taps[i + lag] * taps[i].conj())
                        .sum::<Complex64>();
                    if lag == 0 {
                        acc += 0.1;
                    }
                    acc
                })
                .collect();
            let rhs: Vec<Complex64> = (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let x = solve_hermitian_toeplitz(&col, &rhs).unwrap();
            let a = toeplitz_from_column(&col);
            let dense = a.clone().lu().solve(&CVector::from_vec(rhs.clone())).unwrap();
            for (u, v) in x.iter().zip(dense.iter()) {
                assert!((u - v).norm() < 1e-9, "n={n}: {u} vs {v}");
            }
        }
    }

    #[test]
    fn eigen_ordering_and_phase() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let pairs = hermitian_eigen(&m).unwrap();
        assert!((pairs[0].value - 2.0).abs() < 1e-14);
        assert!((pairs[0].vector[0] - c(1.0, 0.0)).norm() < 1e-14);

        // identity: tie broken towards e_1
        let pairs = hermitian_eigen(&CMatrix::identity(3, 3)).unwrap();
        assert!((pairs[0].vector[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((pairs[2].vector[2] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eigen_rejects_indefinite_and_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(matches!(hermitian_eigen(&m), Err(Error::Numerical(_))));
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(hermitian_eigen(&m), Err(Error::Numerical(_))));
        // rounding-level negative eigenvalue is clipped
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1e-13, 0.0)]);
        assert_eq!(hermitian_eigen(&m).unwrap()[1].value, 0.0);
    }
}
