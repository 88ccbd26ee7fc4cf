use super::clip_unit;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, quadratic_form, CMatrix};

/// Relative beamforming SNR `u_bᴴ Ra u_b / λ_max(Ra)`.
///
/// `u_b` is the dominant eigenvector of the stale statistics `rb`; the
/// transmitter beamforms along it while the channel follows `ra`. Ties in
/// the dominant eigenvalue of `rb` resolve through the deterministic order of
/// [`hermitian_eigen`].
pub fn relative_snr(ra: &CMatrix, rb: &CMatrix) -> Result<f64> {
    if ra.shape() != rb.shape() || ra.nrows() != ra.ncols() {
        return Err(Error::config("correlation matrices must be square with equal dimensions"));
    }
    let lambda_max = hermitian_eigen(ra)?[0].value;
    if !(lambda_max > 0.0) {
        return Err(Error::undefined("true correlation matrix is zero"));
    }
    let stale = hermitian_eigen(rb)?;
    if !(stale[0].value > 0.0) {
        return Err(Error::undefined("stale correlation matrix is zero"));
    }
    Ok(clip_unit(quadratic_form(ra, &stale[0].vector) / lambda_max))
}
