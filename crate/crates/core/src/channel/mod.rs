//! Channel containers and the preprocessing chain applied before any
//! second-order statistics are estimated.
//!
//! A [`ChannelTensor`] holds complex transfer-function samples `h[m, q, k, l]`
//! on a regular time/frequency grid (`m` time, `q` frequency, `k` receive
//! antenna, `l` transmit antenna). Everything downstream consumes this type.

mod container;
mod preprocess;

pub use container::{read_container, write_container, decode_container, encode_container, MAGIC};
pub use preprocess::{
    apply_noise_floor, apply_phase_offsets, normalize_copolarized, select_subarray,
    Normalized, DEFAULT_NOISE_MARGIN_DB,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Antenna polarization label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    V,
    H,
}

/// Regular sampling grid of a channel measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    /// Time between consecutive snapshots, seconds.
    pub time_spacing: f64,
    /// Frequency spacing between subcarriers, hertz.
    pub freq_spacing: f64,
    pub carrier_freq: f64,
    pub n_time: usize,
    pub n_freq: usize,
    /// Terminal speed at every time index, m/s.
    pub speed_per_sample: Vec<f64>,
}

impl SamplingGrid {
    /// Grid with a constant terminal speed.
    pub fn uniform(
        time_spacing: f64,
        freq_spacing: f64,
        carrier_freq: f64,
        n_time: usize,
        n_freq: usize,
        speed: f64,
    ) -> Self {
        Self {
            time_spacing,
            freq_spacing,
            carrier_freq,
            n_time,
            n_freq,
            speed_per_sample: vec![speed; n_time],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.time_spacing) || !positive(self.freq_spacing) || !positive(self.carrier_freq) {
            return Err(Error::config("grid spacings and carrier frequency must be positive"));
        }
        if self.n_time == 0 || self.n_freq == 0 {
            return Err(Error::config("grid must have at least one time and one frequency sample"));
        }
        if self.speed_per_sample.len() != self.n_time {
            return Err(Error::config(format!(
                "speed_per_sample has {} entries, expected {}",
                self.speed_per_sample.len(),
                self.n_time
            )));
        }
        if self.speed_per_sample.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::config("speed_per_sample entries must be finite and non-negative"));
        }
        Ok(())
    }

    /// Doppler sampling rate `1/T_m`.
    pub fn doppler_rate(&self) -> f64 {
        1.0 / self.time_spacing
    }

    /// Delay sampling range `1/F_m`.
    pub fn delay_rate(&self) -> f64 {
        1.0 / self.freq_spacing
    }

    pub fn mean_speed(&self) -> f64 {
        if self.speed_per_sample.is_empty() {
            return 0.0;
        }
        self.speed_per_sample.iter().sum::<f64>() / self.speed_per_sample.len() as f64
    }

    /// Distance travelled over samples `[start, end)` by integrating the speed track.
    pub fn odometer(&self, start: usize, end: usize) -> f64 {
        self.speed_per_sample[start.min(self.n_time)..end.min(self.n_time)]
            .iter()
            .sum::<f64>()
            * self.time_spacing
    }
}

/// Complex channel samples indexed `[time][frequency][rx][tx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    pub grid: SamplingGrid,
    pub n_rx: usize,
    pub n_tx: usize,
    pub pol_rx: Vec<Polarization>,
    pub pol_tx: Vec<Polarization>,
    samples: Vec<Complex64>,
}

impl ChannelTensor {
    pub fn new(
        grid: SamplingGrid,
        n_rx: usize,
        n_tx: usize,
        pol_rx: Vec<Polarization>,
        pol_tx: Vec<Polarization>,
        samples: Vec<Complex64>,
    ) -> Result<Self> {
        grid.validate()?;
        if n_rx == 0 || n_tx == 0 {
            return Err(Error::config("antenna counts must be at least one"));
        }
        if pol_rx.len() != n_rx || pol_tx.len() != n_tx {
            return Err(Error::config("polarization labels must match antenna counts"));
        }
        let expected = grid.n_time * grid.n_freq * n_rx * n_tx;
        if samples.len() != expected {
            return Err(Error::Format(format!(
                "expected {expected} samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
            return Err(Error::Data("non-finite channel sample".into()));
        }
        Ok(Self { grid, n_rx, n_tx, pol_rx, pol_tx, samples })
    }

    pub fn zeros(grid: SamplingGrid, pol_rx: Vec<Polarization>, pol_tx: Vec<Polarization>) -> Result<Self> {
        let n = grid.n_time * grid.n_freq * pol_rx.len() * pol_tx.len();
        Self::new(grid, pol_rx.len(), pol_tx.len(), pol_rx, pol_tx, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn n_time(&self) -> usize {
        self.grid.n_time
    }

    pub fn n_freq(&self) -> usize {
        self.grid.n_freq
    }

    #[inline]
    pub fn index(&self, m: usize, q: usize, k: usize, l: usize) -> usize {
        ((m * self.grid.n_freq + q) * self.n_rx + k) * self.n_tx + l
    }

    #[inline]
    pub fn get(&self, m: usize, q: usize, k: usize, l: usize) -> Complex64 {
        self.samples[self.index(m, q, k, l)]
    }

    #[inline]
    pub fn set(&mut self, m: usize, q: usize, k: usize, l: usize, h: Complex64) {
        let i = self.index(m, q, k, l);
        self.samples[i] = h;
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    /// The `n_rx × n_tx` matrix at `(m, q)`, row-major.
    pub fn matrix(&self, m: usize, q: usize) -> &[Complex64] {
        let start = self.index(m, q, 0, 0);
        &self.samples[start..start + self.n_rx * self.n_tx]
    }

    /// Samples of one sub-link as a row-major `n_time × n_freq` array.
    pub fn sublink(&self, k: usize, l: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.grid.n_time * self.grid.n_freq);
        for m in 0..self.grid.n_time {
            for q in 0..self.grid.n_freq {
                out.push(self.get(m, q, k, l));
            }
        }
        out
    }

    pub fn is_copolarized(&self, k: usize, l: usize) -> bool {
        self.pol_rx[k] == self.pol_tx[l]
    }
}

/// Named choice of receive and transmit antennas.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubArraySelection {
    pub name: String,
    pub rx_indices: Vec<usize>,
    pub tx_indices: Vec<usize>,
}

impl SubArraySelection {
    pub fn full(name: impl Into<String>, n_rx: usize, n_tx: usize) -> Self {
        Self {
            name: name.into(),
            rx_indices: (0..n_rx).collect(),
            tx_indices: (0..n_tx).collect(),
        }
    }

    pub fn validate(&self, n_rx: usize, n_tx: usize) -> Result<()> {
        fn check(ix: &[usize], n: usize, side: &str) -> Result<()> {
            if ix.is_empty() {
                return Err(Error::config(format!("empty {side} selection")));
            }
            let mut seen = vec![false; n];
            for &i in ix {
                if i >= n {
                    return Err(Error::config(format!("{side} index {i} out of range 0..{n}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::config(format!("duplicate {side} index {i}")));
                }
            }
            Ok(())
        }
        check(&self.rx_indices, n_rx, "rx")?;
        check(&self.tx_indices, n_tx, "tx")
    }
}

/// Per-antenna phase offsets, radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseOffsets {
    pub tx_phases: Vec<f64>,
    pub rx_phases: Vec<f64>,
}

impl PhaseOffsets {
    pub fn negated(&self) -> Self {
        Self {
            tx_phases: self.tx_phases.iter().map(|p| -p).collect(),
            rx_phases: self.rx_phases.iter().map(|p| -p).collect(),
        }
    }
}
