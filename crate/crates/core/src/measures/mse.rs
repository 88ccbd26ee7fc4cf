//! MSE-based measures for pilot-aided LMMSE channel estimation along one
//! axis (time for Doppler spectra, frequency for delay spectra).
//!
//! A discrete PSD `C[i]` over `B` bins with axis rate `B_s` (`1/T_m` or
//! `1/F_m`) is read as the piecewise-constant density `S(θ) = B_s·C[i]` on
//! the normalized-frequency cell `θ ∈ [(i−½)/B, (i+½)/B)`. The approximate
//! measure is the infinite-filter limit; the exact measure builds the
//! finite Wiener filter from the same density.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{clip_unit, EstimatorConfig};
use crate::error::{Error, Result};
use crate::linalg::solve_hermitian_toeplitz;

fn check_density(psd: &[f64], what: &str) -> Result<()> {
    if psd.is_empty() {
        return Err(Error::config(format!("{what} PSD is empty")));
    }
    if psd.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::config(format!("{what} PSD must be finite and non-negative")));
    }
    Ok(())
}

/// Mismatched MSE of the infinite-length Wiener estimator,
/// `(1/B) Σ [γ⁻² S_true + γ⁻¹ S_stale²] / (S_stale + γ⁻¹)²` with `S = rate·C`.
pub fn approx_mse(psd_true: &[f64], psd_stale: &[f64], gamma: f64, rate: f64) -> f64 {
    let inv = 1.0 / gamma;
    let sum: f64 = psd_true
        .iter()
        .zip(psd_stale)
        .map(|(&t, &s)| {
            let (st, ss) = (rate * t, rate * s);
            (inv * inv * st + inv * ss * ss) / ((ss + inv) * (ss + inv))
        })
        .sum();
    sum / psd_true.len() as f64
}

/// Matched over mismatched approximate MSE, in `(0, 1]`.
pub fn approx_relative_mse(psd_true: &[f64], psd_stale: &[f64], cfg: &EstimatorConfig, rate: f64) -> Result<f64> {
    cfg.validate()?;
    if psd_true.len() != psd_stale.len() {
        return Err(Error::config("PSD lengths differ"));
    }
    check_density(psd_true, "true")?;
    check_density(psd_stale, "stale")?;
    if psd_true.iter().all(|&v| v == 0.0) {
        return Err(Error::undefined("true PSD is zero"));
    }
    let matched = approx_mse(psd_true, psd_true, cfg.gamma, rate);
    let mismatched = approx_mse(psd_true, psd_stale, cfg.gamma, rate);
    Ok(clip_unit(matched / mismatched))
}

/// Autocovariance `r[Δ] = E{h[k+Δ] h*[k]}` of the process with
/// piecewise-constant spectral density.
#[derive(Debug, Clone)]
pub struct Autocovariance {
    /// `r[0..=max_lag]`; negative lags follow from Hermitian symmetry.
    lags: Vec<Complex64>,
}

impl Autocovariance {
    /// `r[Δ] = sinc(Δ/B) · (1/B) Σ_i rate·C[i] e^{j2π iΔ/B}`.
    pub fn from_psd(psd: &[f64], rate: f64, max_lag: usize) -> Self {
        let b = psd.len() as f64;
        let lags = (0..=max_lag)
            .map(|lag| {
                let x = lag as f64 / b;
                let sinc = if lag == 0 { 1.0 } else { (PI * x).sin() / (PI * x) };
                if sinc == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let sum: Complex64 = psd
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0.0)
                    .map(|(i, &c)| Complex64::from_polar(rate * c, 2.0 * PI * ((i * lag) % psd.len()) as f64 / b))
                    .sum();
                sum * (sinc / b)
            })
            .collect();
        Self { lags }
    }

    pub fn at(&self, lag: i64) -> Complex64 {
        let r = self.lags[lag.unsigned_abs() as usize];
        if lag < 0 {
            r.conj()
        } else {
            r
        }
    }

    pub fn max_lag(&self) -> usize {
        self.lags.len() - 1
    }
}

/// Finite LMMSE filter estimating `h` at the interval midpoint from `N`
/// noisy pilots spaced `L` apart.
#[derive(Debug, Clone)]
pub struct WienerFilter {
    cfg: EstimatorConfig,
    weights: Vec<Complex64>,
    /// `c[Δ] = Σ_j conj(w[j+Δ]) w[j]` for `Δ ≥ 0`.
    weight_lags: Vec<Complex64>,
}

impl WienerFilter {
    /// Largest covariance lag the filter touches: `(N−1)·L`.
    pub fn support(cfg: &EstimatorConfig) -> usize {
        (cfg.interval_length - 1) * cfg.pilot_spacing
    }

    /// Sample position of the estimation target inside the interval.
    pub fn target(cfg: &EstimatorConfig) -> i64 {
        (Self::support(cfg) / 2) as i64
    }

    /// `w = (R_pp + γ⁻¹ I)⁻¹ r_p` built from the statistics in `cov`.
    pub fn design(cov: &Autocovariance, cfg: &EstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        if cov.max_lag() < Self::support(cfg) {
            return Err(Error::config("autocovariance does not cover the filter support"));
        }
        let (n, l) = (cfg.interval_length, cfg.pilot_spacing as i64);
        let d = Self::target(cfg);
        let mut col: Vec<Complex64> = (0..n as i64).map(|k| cov.at(k * l)).collect();
        col[0] += cfg.noise_variance();
        let rhs: Vec<Complex64> = (0..n as i64).map(|i| cov.at(i * l - d)).collect();
        let weights = solve_hermitian_toeplitz(&col, &rhs)?;
        let weight_lags = (0..n)
            .map(|lag| (0..n - lag).map(|j| weights[j + lag].conj() * weights[j]).sum())
            .collect();
        Ok(Self { cfg: *cfg, weights, weight_lags })
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// MSE of this filter when the channel follows `truth`:
    /// `r[0] − 2 Re(wᴴ r_p) + wᴴ (R_pp + γ⁻¹ I) w`.
    pub fn mse(&self, truth: &Autocovariance) -> f64 {
        let l = self.cfg.pilot_spacing as i64;
        let d = Self::target(&self.cfg);
        let cross: Complex64 = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| w.conj() * truth.at(i as i64 * l - d))
            .sum();
        let mut quad = truth.at(0) * self.weight_lags[0];
        for (lag, c) in self.weight_lags.iter().enumerate().skip(1) {
            let r = truth.at(lag as i64 * l);
            quad += r * c + r.conj() * c.conj();
        }
        truth.at(0).re - 2.0 * cross.re + quad.re + self.cfg.noise_variance() * self.weight_lags[0].re
    }
}

/// Matched over mismatched MSE of the finite Wiener filter, clipped to `[0, 1]`.
pub fn exact_relative_mse(psd_true: &[f64], psd_stale: &[f64], cfg: &EstimatorConfig, rate: f64) -> Result<f64> {
    cfg.validate()?;
    if psd_true.len() != psd_stale.len() {
        return Err(Error::config("PSD lengths differ"));
    }
    check_density(psd_true, "true")?;
    check_density(psd_stale, "stale")?;
    if psd_true.iter().all(|&v| v == 0.0) {
        return Err(Error::undefined("true PSD is zero"));
    }
    let support = WienerFilter::support(cfg);
    let truth = Autocovariance::from_psd(psd_true, rate, support);
    let stale = Autocovariance::from_psd(psd_stale, rate, support);
    let matched = WienerFilter::design(&truth, cfg)?.mse(&truth);
    let mismatched = WienerFilter::design(&stale, cfg)?.mse(&truth);
    relative_from(matched, mismatched)
}

pub(crate) fn relative_from(matched: f64, mismatched: f64) -> Result<f64> {
    if !(matched > 0.0) || !(mismatched > 0.0) {
        return Err(Error::Numerical(format!(
            "non-positive MSE (matched {matched:e}, mismatched {mismatched:e})"
        )));
    }
    Ok(clip_unit(matched / mismatched))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{toeplitz_from_column, CVector};

    fn cfg(gamma: f64, l: usize, n: usize) -> EstimatorConfig {
        EstimatorConfig { gamma, pilot_spacing: l, interval_length: n }
    }

    #[test]
    fn approx_matched_is_one() {
        let psd = [0.1, 0.5, 2.0, 0.0, 0.3];
        assert_eq!(approx_relative_mse(&psd, &psd, &cfg(10.0, 1, 30), 100.0).unwrap(), 1.0);
    }

    #[test]
    fn approx_single_bin_closed_form() {
        let (gamma, rate, c) = (10.0, 200.0, 0.02);
        let inv = 1.0 / gamma;
        let expected_one = inv * rate * c / (rate * c + inv);
        assert!((approx_mse(&[c], &[c], gamma, rate) - expected_one).abs() < 1e-15);
        let mut psd = vec![0.0; 7];
        psd[3] = c;
        assert!((approx_mse(&psd, &psd, gamma, rate) - expected_one / 7.0).abs() < 1e-15);
    }

    #[test]
    fn approx_wrong_bin_degrades() {
        let (mut a, mut b) = (vec![0.0; 5], vec![0.0; 5]);
        a[0] = 1.0;
        b[1] = 1.0;
        let v = approx_relative_mse(&a, &b, &cfg(10.0, 1, 30), 1.0).unwrap();
        assert!(v < 1.0 && v > 0.0);
        // stale zero is still defined
        assert!(approx_relative_mse(&a, &[0.0; 5], &cfg(10.0, 1, 30), 1.0).unwrap() > 0.0);
        assert!(matches!(
            approx_relative_mse(&[0.0; 5], &a, &cfg(10.0, 1, 30), 1.0),
            Err(Error::UndefinedMeasure(_))
        ));
    }

    #[test]
    fn flat_psd_is_white() {
        let cov = Autocovariance::from_psd(&[2.0; 9], 0.5, 30);
        assert!((cov.at(0).re - 1.0).abs() < 1e-15);
        for lag in 1..=30 {
            assert!(cov.at(lag).norm() < 1e-14, "lag {lag}: {}", cov.at(lag));
        }
    }

    #[test]
    fn filter_matches_dense_solution() {
        let psd: Vec<f64> = (0..15).map(|i| 1.0 + (i as f64 * 0.7).sin()).collect();
        let c = cfg(4.0, 2, 9);
        let cov = Autocovariance::from_psd(&psd, 1.0, WienerFilter::support(&c));
        let f = WienerFilter::design(&cov, &c).unwrap();

        let d = WienerFilter::target(&c);
        let mut col: Vec<Complex64> = (0..9).map(|k| cov.at(2 * k)).collect();
        col[0] += 0.25;
        let a = toeplitz_from_column(&col);
        let rhs = CVector::from_iterator(9, (0..9).map(|i| cov.at(2 * i - d)));
        let w = a.clone().lu().solve(&rhs).unwrap();
        for (x, y) in f.weights().iter().zip(w.iter()) {
            assert!((x - y).norm() < 1e-10);
        }
        // dense evaluation of the MSE expression
        let dense = cov.at(0).re - 2.0 * w.dotc(&rhs).re + w.dotc(&(&a * &w)).re;
        assert!((f.mse(&cov) - dense).abs() < 1e-10);
        // matched MSE equals r[0] − wᴴ r_p
        assert!((f.mse(&cov) - (cov.at(0).re - w.dotc(&rhs).re)).abs() < 1e-10);
    }

    #[test]
    fn exact_matched_is_one() {
        let psd: Vec<f64> = (0..31).map(|i| (-((i as f64 - 15.0) / 4.0).powi(2)).exp()).collect();
        let v = exact_relative_mse(&psd, &psd, &cfg(10.0, 1, 30), 50.0).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exact_narrowing_stale_degrades() {
        let b = 63;
        let white = vec![1.0; b];
        let mut last = 1.0 + 1e-12;
        for width in [63, 31, 15, 7, 3, 1] {
            let mut stale = vec![0.0; b];
            let start = (b - width) / 2;
            stale[start..start + width].iter_mut().for_each(|v| *v = b as f64 / width as f64);
            let v = exact_relative_mse(&white, &stale, &cfg(10.0, 1, 30), 1.0).unwrap();
            assert!(v <= last, "width {width}: {v} > {last}");
            if width < b {
                assert!(v < 1.0);
            }
            last = v;
        }
    }

    #[test]
    fn exact_approaches_approx_for_long_filters() {
        let b = 63;
        let psd: Vec<f64> = (0..b).map(|i| 0.5 + (-((i as f64 - 31.0) / 6.0).powi(2)).exp()).collect();
        let c = cfg(10.0, 1, 1024);
        let cov = Autocovariance::from_psd(&psd, 1.0, WienerFilter::support(&c));
        let exact = WienerFilter::design(&cov, &c).unwrap().mse(&cov);
        let approx = approx_mse(&psd, &psd, c.gamma, 1.0);
        assert!(((exact - approx) / approx).abs() < 0.01, "exact {exact} approx {approx}");
    }
}
