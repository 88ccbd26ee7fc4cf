//! Synthetic channels made of discrete scatterer clusters with known
//! Doppler/delay/angle support.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelTensor, Polarization, SamplingGrid};
use crate::error::{Error, Result};
use crate::spectral::{MarginalPsd, PsdAxis};

fn default_subpaths() -> usize {
    20
}

fn default_pol_gain() -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, 1.0]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererCluster {
    pub doppler_hz: f64,
    pub delay_s: f64,
    pub power: f64,
    /// Power coupling indexed `[rx pol][tx pol]` with V = 0, H = 1.
    #[serde(default = "default_pol_gain")]
    pub pol_gain: [[f64; 2]; 2],
    #[serde(default)]
    pub birth_time: usize,
    /// Exclusive end of the lifetime; `None` keeps the cluster to the end.
    #[serde(default)]
    pub death_time: Option<usize>,
    #[serde(default = "default_subpaths")]
    pub n_subpaths: usize,
    /// Width of the uniform sub-path Doppler spread around `doppler_hz`.
    #[serde(default)]
    pub doppler_spread_hz: f64,
    /// Linear power ramp at birth and death, in samples.
    #[serde(default)]
    pub ramp_samples: usize,
}

impl ScattererCluster {
    pub fn new(doppler_hz: f64, delay_s: f64, power: f64) -> Self {
        Self {
            doppler_hz,
            delay_s,
            power,
            pol_gain: default_pol_gain(),
            birth_time: 0,
            death_time: None,
            n_subpaths: default_subpaths(),
            doppler_spread_hz: 0.0,
            ramp_samples: 0,
        }
    }

    pub fn alive(mut self, birth: usize, death: usize) -> Self {
        self.birth_time = birth;
        self.death_time = Some(death);
        self
    }

    fn death(&self, n_time: usize) -> usize {
        self.death_time.unwrap_or(n_time)
    }

    /// Amplitude envelope at time index `m`, including ramps.
    pub fn envelope(&self, m: usize, n_time: usize) -> f64 {
        let death = self.death(n_time);
        if m < self.birth_time || m >= death {
            return 0.0;
        }
        if self.ramp_samples == 0 {
            return 1.0;
        }
        let r = self.ramp_samples as f64;
        let up = ((m - self.birth_time) as f64 + 1.0) / r;
        let down = (death - m) as f64 / r;
        up.min(down).min(1.0).sqrt()
    }

    fn validate(&self, grid: &SamplingGrid) -> Result<()> {
        let nyquist = 0.5 / grid.time_spacing;
        if !(self.power >= 0.0) || !self.power.is_finite() {
            return Err(Error::config(format!("cluster power must be non-negative, got {}", self.power)));
        }
        if !(self.doppler_spread_hz >= 0.0) || !(self.doppler_hz.abs() + self.doppler_spread_hz / 2.0 < nyquist) {
            return Err(Error::config(format!(
                "cluster Doppler {} Hz (spread {}) outside (-{nyquist}, {nyquist})",
                self.doppler_hz, self.doppler_spread_hz
            )));
        }
        if !(self.delay_s >= 0.0 && self.delay_s < 1.0 / grid.freq_spacing) {
            return Err(Error::config(format!("cluster delay {} s outside [0, 1/F_m)", self.delay_s)));
        }
        let death = self.death(grid.n_time);
        if self.birth_time > death || death > grid.n_time {
            return Err(Error::config(format!("cluster lifetime {}..{death} outside the track", self.birth_time)));
        }
        if self.n_subpaths == 0 {
            return Err(Error::config("cluster needs at least one sub-path"));
        }
        if self.pol_gain.iter().flatten().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(Error::config("pol_gain entries must be non-negative"));
        }
        Ok(())
    }
}

/// Plane-wave steering of ideal isotropic elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteeringModel {
    /// `(x, y)` in wavelengths.
    pub tx_positions: Vec<[f64; 2]>,
    pub rx_positions: Vec<[f64; 2]>,
    /// Azimuth per cluster, radians.
    pub tx_angles: Vec<f64>,
    pub rx_angles: Vec<f64>,
}

impl SteeringModel {
    /// Uniform linear arrays along x with the given spacing; angles are
    /// measured from the array axis.
    pub fn ula(n_rx: usize, n_tx: usize, spacing: f64, rx_angles: Vec<f64>, tx_angles: Vec<f64>) -> Self {
        let line = |n: usize| (0..n).map(|i| [i as f64 * spacing, 0.0]).collect();
        Self { tx_positions: line(n_tx), rx_positions: line(n_rx), tx_angles, rx_angles }
    }

    /// Single antenna at each end.
    pub fn siso(n_clusters: usize) -> Self {
        Self::ula(1, 1, 0.5, vec![0.0; n_clusters], vec![0.0; n_clusters])
    }

    pub fn response(positions: &[[f64; 2]], angle: f64) -> Vec<Complex64> {
        let (c, s) = (angle.cos(), angle.sin());
        positions.iter().map(|p| Complex64::from_polar(1.0, 2.0 * PI * (p[0] * c + p[1] * s))).collect()
    }
}

/// Terminal speed in a scene file: one value or one per time index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpeedSpec {
    Constant(f64),
    Track(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub time_spacing: f64,
    pub freq_spacing: f64,
    pub carrier_freq: f64,
    pub n_time: usize,
    pub n_freq: usize,
    /// m/s.
    pub speed: SpeedSpec,
}

impl GridSpec {
    pub fn to_grid(&self) -> SamplingGrid {
        let mut g = SamplingGrid::uniform(
            self.time_spacing,
            self.freq_spacing,
            self.carrier_freq,
            self.n_time,
            self.n_freq,
            0.0,
        );
        g.speed_per_sample = match &self.speed {
            SpeedSpec::Constant(v) => vec![*v; self.n_time],
            SpeedSpec::Track(v) => v.clone(),
        };
        g
    }
}

/// A complete synthetic scenario as read from a scene file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub grid: GridSpec,
    pub pol_rx: Vec<Polarization>,
    pub pol_tx: Vec<Polarization>,
    pub steering: SteeringModel,
    pub clusters: Vec<ScattererCluster>,
}

impl Scene {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("scene: {e}")))
    }

    pub fn generate(&self, seed: u64) -> Result<ChannelTensor> {
        generate(&self.clusters, &self.steering, &self.grid.to_grid(), &self.pol_rx, &self.pol_tx, seed)
    }
}

fn pol_index(p: Polarization) -> usize {
    match p {
        Polarization::V => 0,
        Polarization::H => 1,
    }
}

struct Realized {
    /// `c_sub[m] · envelope[m]` over the whole track.
    fading: Vec<Complex64>,
    /// `√power · √pol_gain · e^{jφ}` per `[rx pol][tx pol]`.
    coupling: [[Complex64; 2]; 2],
    a_rx: Vec<Complex64>,
    a_tx: Vec<Complex64>,
    delay_phasor: Vec<Complex64>,
}

fn realize(c: &ScattererCluster, idx: usize, steering: &SteeringModel, grid: &SamplingGrid, rng: &mut ChaCha8Rng) -> Realized {
    let n = c.n_subpaths;
    let phases: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let offsets: Vec<f64> = (0..n)
        .map(|_| rng.random_range(-0.5..0.5) * c.doppler_spread_hz)
        .collect();
    let mut coupling = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (r, row) in coupling.iter_mut().enumerate() {
        for (t, g) in row.iter_mut().enumerate() {
            let phase = rng.random_range(0.0..2.0 * PI);
            *g = Complex64::from_polar((c.power * c.pol_gain[r][t]).sqrt(), phase);
        }
    }

    let death = c.death(grid.n_time);
    let mut fading: Vec<Complex64> = (0..grid.n_time)
        .map(|m| {
            if m < c.birth_time || m >= death {
                return Complex64::new(0.0, 0.0);
            }
            let t = m as f64 * grid.time_spacing;
            phases
                .iter()
                .zip(&offsets)
                .map(|(&ph, &dv)| Complex64::from_polar(1.0, ph + 2.0 * PI * (c.doppler_hz + dv) * t))
                .sum()
        })
        .collect();
    // unit mean power over the lifetime
    let alive = death - c.birth_time;
    if alive > 0 {
        let p = fading.iter().map(|x| x.norm_sqr()).sum::<f64>() / alive as f64;
        let g = if p > 0.0 { 1.0 / p.sqrt() } else { 0.0 };
        for (m, x) in fading.iter_mut().enumerate() {
            *x *= g * c.envelope(m, grid.n_time);
        }
    }

    Realized {
        fading,
        coupling,
        a_rx: SteeringModel::response(&steering.rx_positions, steering.rx_angles[idx]),
        a_tx: SteeringModel::response(&steering.tx_positions, steering.tx_angles[idx]),
        delay_phasor: (0..grid.n_freq)
            .map(|q| Complex64::from_polar(1.0, -2.0 * PI * c.delay_s * q as f64 * grid.freq_spacing))
            .collect(),
    }
}

/// Generates `h[m,q,k,l] = Σ √P g_pol a_rx(k) a_tx(l) c_sub[m] e^{j2π(ν m T_m − τ q F_m)}`
/// over the clusters alive at `m`. Deterministic for a given seed.
pub fn generate(
    clusters: &[ScattererCluster],
    steering: &SteeringModel,
    grid: &SamplingGrid,
    pol_rx: &[Polarization],
    pol_tx: &[Polarization],
    seed: u64,
) -> Result<ChannelTensor> {
    grid.validate()?;
    if steering.rx_positions.len() != pol_rx.len() || steering.tx_positions.len() != pol_tx.len() {
        return Err(Error::config("steering positions must match the polarization lists"));
    }
    if steering.rx_angles.len() != clusters.len() || steering.tx_angles.len() != clusters.len() {
        return Err(Error::config("steering needs one angle per cluster at each array"));
    }
    for c in clusters {
        c.validate(grid)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let realized: Vec<Realized> = clusters
        .iter()
        .enumerate()
        .map(|(i, c)| realize(c, i, steering, grid, &mut rng))
        .collect();

    let (n_rx, n_tx, n_freq) = (pol_rx.len(), pol_tx.len(), grid.n_freq);
    let mut t = ChannelTensor::zeros(grid.clone(), pol_rx.to_vec(), pol_tx.to_vec())?;
    let per_time = n_freq * n_rx * n_tx;
    t.samples_mut().par_chunks_mut(per_time).enumerate().for_each(|(m, out)| {
        for r in &realized {
            let f = r.fading[m];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..n_rx {
                for l in 0..n_tx {
                    let g = r.coupling[pol_index(pol_rx[k])][pol_index(pol_tx[l])] * r.a_rx[k] * r.a_tx[l] * f;
                    for q in 0..n_freq {
                        out[(q * n_rx + k) * n_tx + l] += g * r.delay_phasor[q];
                    }
                }
            }
        }
    });
    Ok(t)
}

/// Marginal densities of the clusters alive at `m` for the sub-link
/// polarization `link = (rx, tx)`, on the same bin grid as a GLSF estimate
/// with `doppler_bins × delay_bins`. Integrating either density over its
/// axis gives the total power at `m`.
pub fn ground_truth_psd(
    clusters: &[ScattererCluster],
    grid: &SamplingGrid,
    m: usize,
    doppler_bins: usize,
    delay_bins: usize,
    link: (Polarization, Polarization),
) -> (MarginalPsd, MarginalPsd) {
    let doppler_step = 1.0 / (doppler_bins as f64 * grid.time_spacing);
    let delay_step = 1.0 / (delay_bins as f64 * grid.freq_spacing);
    let half = (doppler_bins as i64 - 1) / 2;
    let mut doppler = vec![0.0; doppler_bins];
    let mut delay = vec![0.0; delay_bins];
    for c in clusters {
        let p = c.power * c.pol_gain[pol_index(link.0)][pol_index(link.1)] * c.envelope(m, grid.n_time).powi(2);
        if p == 0.0 {
            continue;
        }
        let pi = ((c.doppler_hz / doppler_step).round() as i64 + half).rem_euclid(doppler_bins as i64);
        let n = ((c.delay_s / delay_step).round() as i64).rem_euclid(delay_bins as i64);
        doppler[pi as usize] += p / doppler_step;
        delay[n as usize] += p / delay_step;
    }
    (
        MarginalPsd::from_parts(PsdAxis::Doppler, doppler_step, 1.0 / grid.time_spacing, m, doppler),
        MarginalPsd::from_parts(PsdAxis::Delay, delay_step, 1.0 / grid.freq_spacing, m, delay),
    )
}
