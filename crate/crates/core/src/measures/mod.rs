//! Pairwise non-stationarity measures `η[m, m′] ∈ [0, 1]`, where 1 means the
//! statistics at `m′` are as good as the ones at `m`.
//!
//! Directional measures (relative SNR, relative MSE) treat the first
//! argument as the true statistic at `m` and the second as the stale one
//! from `m′`.

mod corr;
mod inner;
pub(crate) mod mse;
mod snr;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use corr::{estimate_corr_track, CorrMatrixTrack, CorrSide};
pub use inner::{cmd, cmd_algorithmic_decomposition, collinearity_psd, CmdDecomposition, StreamTerm};
pub use mse::{approx_mse, approx_relative_mse, exact_relative_mse, Autocovariance, WienerFilter};
pub use snr::relative_snr;

use crate::error::{Error, Result};

/// Slack allowed above 1 before a measure is considered broken.
pub const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MeasureKind {
    ColDoppler,
    ColDelay,
    CmdTx,
    CmdRx,
    CmdFull,
    SnrTx,
    SnrRx,
    MseDopplerExact,
    MseDopplerAp,
    MseDelayExact,
    MseDelayAp,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 11] = [
        MeasureKind::ColDoppler,
        MeasureKind::ColDelay,
        MeasureKind::CmdTx,
        MeasureKind::CmdRx,
        MeasureKind::CmdFull,
        MeasureKind::SnrTx,
        MeasureKind::SnrRx,
        MeasureKind::MseDopplerExact,
        MeasureKind::MseDopplerAp,
        MeasureKind::MseDelayExact,
        MeasureKind::MseDelayAp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::ColDoppler => "COL_DOPPLER",
            MeasureKind::ColDelay => "COL_DELAY",
            MeasureKind::CmdTx => "CMD_TX",
            MeasureKind::CmdRx => "CMD_RX",
            MeasureKind::CmdFull => "CMD_FULL",
            MeasureKind::SnrTx => "SNR_TX",
            MeasureKind::SnrRx => "SNR_RX",
            MeasureKind::MseDopplerExact => "MSE_DOPPLER_EXACT",
            MeasureKind::MseDopplerAp => "MSE_DOPPLER_AP",
            MeasureKind::MseDelayExact => "MSE_DELAY_EXACT",
            MeasureKind::MseDelayAp => "MSE_DELAY_AP",
        }
    }

    /// Measures computed from GLSF marginals rather than correlation matrices.
    pub fn is_spectral(self) -> bool {
        matches!(
            self,
            MeasureKind::ColDoppler
                | MeasureKind::ColDelay
                | MeasureKind::MseDopplerExact
                | MeasureKind::MseDopplerAp
                | MeasureKind::MseDelayExact
                | MeasureKind::MseDelayAp
        )
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown measure {s:?}")))
    }
}

/// One evaluated measure between time bins `m` and `m_prime`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurePair {
    pub kind: MeasureKind,
    pub m: usize,
    pub m_prime: usize,
    pub value: f64,
}

impl MeasurePair {
    pub fn offset(&self) -> i64 {
        self.m_prime as i64 - self.m as i64
    }
}

/// Pilot-based channel estimation setup for the MSE measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Pilot-to-noise power ratio `σ_p²/σ_n²` (linear).
    pub gamma: f64,
    /// Pilot spacing `L` in samples.
    pub pilot_spacing: usize,
    /// Number of pilots `N` in the estimation interval.
    pub interval_length: usize,
}

impl EstimatorConfig {
    pub fn from_db(gamma_db: f64, pilot_spacing: usize, interval_length: usize) -> Self {
        Self {
            gamma: 10f64.powf(gamma_db / 10.0),
            pilot_spacing,
            interval_length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::config(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.pilot_spacing == 0 || self.interval_length == 0 {
            return Err(Error::config("pilot spacing and interval length must be >= 1"));
        }
        Ok(())
    }

    pub fn noise_variance(&self) -> f64 {
        1.0 / self.gamma
    }
}

pub(crate) fn clip_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}
