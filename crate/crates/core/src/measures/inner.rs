use num_complex::Complex64;

use super::clip_unit;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_norm, hermitian_eigen, quadratic_form, CMatrix};

/// Normalized inner product of two PSDs, `Σ a b / (‖a‖ ‖b‖)`.
pub fn collinearity_psd(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::config(format!("PSD lengths differ: {} vs {}", a.len(), b.len())));
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(na > 0.0) || !(nb > 0.0) {
        return Err(Error::undefined("collinearity of an all-zero PSD"));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok(clip_unit(dot / (na * nb)))
}

fn check_pair(ra: &CMatrix, rb: &CMatrix) -> Result<(f64, f64)> {
    if ra.shape() != rb.shape() || ra.nrows() != ra.ncols() {
        return Err(Error::config("correlation matrices must be square with equal dimensions"));
    }
    let (na, nb) = (frobenius_norm(ra), frobenius_norm(rb));
    if !(na > 0.0) || !(nb > 0.0) {
        return Err(Error::undefined("correlation matrix is zero"));
    }
    Ok((na, nb))
}

/// Collinearity `tr(Ra Rb) / (‖Ra‖_F ‖Rb‖_F)`; the CMD is `1 −` this value.
pub fn cmd(ra: &CMatrix, rb: &CMatrix) -> Result<f64> {
    let (na, nb) = check_pair(ra, rb)?;
    let n = ra.nrows();
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            tr += ra[(i, j)] * rb[(j, i)];
        }
    }
    Ok(clip_unit(tr.re / (na * nb)))
}

/// One eigen-stream of `Rb` in the trace expansion of the CMD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamTerm {
    /// `λ_l(Rb)`.
    pub eigenvalue: f64,
    /// `u_l(Rb)ᴴ Ra u_l(Rb)`, the average power Ra delivers on stream `l`.
    pub stream_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmdDecomposition {
    /// Collinearity, equal to [`cmd`] up to rounding.
    pub value: f64,
    pub streams: Vec<StreamTerm>,
}

/// The collinearity evaluated through the eigenstreams of `Rb`:
/// `Σ_l λ_l(Rb) u_lᴴ Ra u_l / (‖Ra‖_F ‖Rb‖_F)`.
pub fn cmd_algorithmic_decomposition(ra: &CMatrix, rb: &CMatrix) -> Result<CmdDecomposition> {
    let (na, nb) = check_pair(ra, rb)?;
    let streams: Vec<StreamTerm> = hermitian_eigen(rb)?
        .into_iter()
        .map(|p| StreamTerm { eigenvalue: p.value, stream_power: quadratic_form(ra, &p.vector) })
        .collect();
    let weighted: f64 = streams.iter().map(|s| s.eigenvalue * s.stream_power).sum();
    Ok(CmdDecomposition { value: clip_unit(weighted / (na * nb)), streams })
}
