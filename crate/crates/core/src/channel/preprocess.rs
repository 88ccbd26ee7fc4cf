use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{ChannelTensor, PhaseOffsets, SubArraySelection};
use crate::error::{Error, Result};

pub const DEFAULT_NOISE_MARGIN_DB: f64 = 6.0;

/// Noise level of one delay profile: the median of the weakest quarter of
/// the delay-power bins.
fn noise_level(power: &[f64]) -> f64 {
    let mut sorted = power.to_vec();
    sorted.sort_by(f64::total_cmp);
    let quartile = &sorted[..(sorted.len() / 4).max(1)];
    let mid = quartile.len() / 2;
    if quartile.len() % 2 == 1 {
        quartile[mid]
    } else {
        0.5 * (quartile[mid - 1] + quartile[mid])
    }
}

/// Removes delay-domain content below an estimated noise floor.
///
/// Every `(time, rx, tx)` frequency row is taken to the delay domain with an
/// unwindowed DFT. Bins whose power is below `level · 10^(margin_db/10)` are
/// zeroed and the row is transformed back. Rows where nothing falls below
/// the threshold are returned untouched.
pub fn apply_noise_floor(t: &ChannelTensor, margin_db: f64) -> Result<ChannelTensor> {
    if !(margin_db >= 0.0) || !margin_db.is_finite() {
        return Err(Error::config(format!("noise margin must be >= 0 dB, got {margin_db}")));
    }
    let n_freq = t.n_freq();
    if n_freq < 4 {
        return Err(Error::insufficient(format!(
            "noise floor needs at least 4 frequency samples, got {n_freq}"
        )));
    }
    let factor = 10f64.powf(margin_db / 10.0);
    let links = t.n_rx * t.n_tx;

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n_freq);
    let inverse = planner.plan_fft_inverse(n_freq);

    let mut out = t.clone();
    out.samples_mut()
        .par_chunks_mut(n_freq * links)
        .for_each(|snapshot| {
            let mut row = vec![Complex64::new(0.0, 0.0); n_freq];
            let mut power = vec![0.0; n_freq];
            for link in 0..links {
                for (q, v) in row.iter_mut().enumerate() {
                    *v = snapshot[q * links + link];
                }
                forward.process(&mut row);
                for (p, v) in power.iter_mut().zip(&row) {
                    *p = v.norm_sqr();
                }
                let threshold = noise_level(&power) * factor;
                let mut changed = false;
                for (v, &p) in row.iter_mut().zip(&power) {
                    if p < threshold {
                        *v = Complex64::new(0.0, 0.0);
                        changed = true;
                    }
                }
                if !changed {
                    continue;
                }
                inverse.process(&mut row);
                let scale = 1.0 / n_freq as f64;
                for (q, v) in row.iter().enumerate() {
                    snapshot[q * links + link] = v * scale;
                }
            }
        });
    Ok(out)
}

/// Result of co-polarized power normalization.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub tensor: ChannelTensor,
    pub region_time: usize,
    pub region_freq: usize,
    pub blocks_time: usize,
    pub blocks_freq: usize,
    /// Applied scalar per block, row-major `[time block][freq block]`.
    /// Degenerate blocks carry 1.
    pub scales: Vec<f64>,
    /// `(time block, freq block)` of blocks with no co-polarized power.
    pub degenerate: Vec<(usize, usize)>,
}

impl Normalized {
    /// Per time sample: false if the sample lies in any degenerate block.
    pub fn valid_time_samples(&self) -> Vec<bool> {
        let mut valid = vec![true; self.tensor.n_time()];
        for &(bt, _) in &self.degenerate {
            let start = bt * self.region_time;
            let end = (start + self.region_time).min(valid.len());
            valid[start..end].iter_mut().for_each(|v| *v = false);
        }
        valid
    }
}

/// Scales each time-frequency block so that the block mean of the
/// co-polarized power `Σ_co |h|²` equals the number of co-polarized
/// sub-links. Cross-polarized entries share the block's scalar. Blocks tile
/// the grid from index 0; the last block in each direction may be partial.
pub fn normalize_copolarized(t: &ChannelTensor, region_time: usize, region_freq: usize) -> Result<Normalized> {
    if region_time == 0 || region_freq == 0 {
        return Err(Error::config("normalization region sizes must be positive"));
    }
    let co_links: Vec<(usize, usize)> = (0..t.n_rx)
        .flat_map(|k| (0..t.n_tx).map(move |l| (k, l)))
        .filter(|&(k, l)| t.is_copolarized(k, l))
        .collect();
    let n_co = co_links.len();
    if n_co == 0 {
        return Err(Error::config("no co-polarized sub-links to normalize against"));
    }

    let (n_time, n_freq) = (t.n_time(), t.n_freq());
    let blocks_time = n_time.div_ceil(region_time);
    let blocks_freq = n_freq.div_ceil(region_freq);
    let mut out = t.clone();
    let mut scales = vec![1.0; blocks_time * blocks_freq];
    let mut degenerate = Vec::new();

    for bt in 0..blocks_time {
        let times = bt * region_time..((bt + 1) * region_time).min(n_time);
        for bf in 0..blocks_freq {
            let freqs = bf * region_freq..((bf + 1) * region_freq).min(n_freq);
            let cells = times.len() * freqs.len();
            let mut power = 0.0;
            for m in times.clone() {
                for q in freqs.clone() {
                    power += co_links.iter().map(|&(k, l)| t.get(m, q, k, l).norm_sqr()).sum::<f64>();
                }
            }
            let mean = power / cells as f64;
            if !(mean > 0.0) {
                log::warn!("normalization block ({bt}, {bf}) has no co-polarized power; left unscaled");
                degenerate.push((bt, bf));
                continue;
            }
            let scale = (n_co as f64 / mean).sqrt();
            scales[bt * blocks_freq + bf] = scale;
            for m in times.clone() {
                for q in freqs.clone() {
                    let start = out.index(m, q, 0, 0);
                    for h in &mut out.samples_mut()[start..start + t.n_rx * t.n_tx] {
                        *h *= scale;
                    }
                }
            }
        }
    }

    Ok(Normalized {
        tensor: out,
        region_time,
        region_freq,
        blocks_time,
        blocks_freq,
        scales,
        degenerate,
    })
}

/// `ȟ[m,q,k,l] = e^{-jφ_rx,k} · h[m,q,k,l] · e^{-jφ_tx,l}`.
pub fn apply_phase_offsets(t: &ChannelTensor, p: &PhaseOffsets) -> Result<ChannelTensor> {
    if p.rx_phases.len() != t.n_rx || p.tx_phases.len() != t.n_tx {
        return Err(Error::config("phase offset lengths must match antenna counts"));
    }
    if p.rx_phases.iter().chain(&p.tx_phases).any(|v| !v.is_finite()) {
        return Err(Error::config("phase offsets must be finite"));
    }
    let rot_rx: Vec<Complex64> = p.rx_phases.iter().map(|&ph| Complex64::from_polar(1.0, -ph)).collect();
    let rot_tx: Vec<Complex64> = p.tx_phases.iter().map(|&ph| Complex64::from_polar(1.0, -ph)).collect();
    let (n_rx, n_tx) = (t.n_rx, t.n_tx);
    let mut out = t.clone();
    for matrix in out.samples_mut().chunks_exact_mut(n_rx * n_tx) {
        for k in 0..n_rx {
            for l in 0..n_tx {
                matrix[k * n_tx + l] = rot_rx[k] * matrix[k * n_tx + l] * rot_tx[l];
            }
        }
    }
    Ok(out)
}

pub fn select_subarray(t: &ChannelTensor, s: &SubArraySelection) -> Result<ChannelTensor> {
    s.validate(t.n_rx, t.n_tx)?;
    let mut samples = Vec::with_capacity(t.n_time() * t.n_freq() * s.rx_indices.len() * s.tx_indices.len());
    for m in 0..t.n_time() {
        for q in 0..t.n_freq() {
            for &k in &s.rx_indices {
                for &l in &s.tx_indices {
                    samples.push(t.get(m, q, k, l));
                }
            }
        }
    }
    ChannelTensor::new(
        t.grid.clone(),
        s.rx_indices.len(),
        s.tx_indices.len(),
        s.rx_indices.iter().map(|&k| t.pol_rx[k]).collect(),
        s.tx_indices.iter().map(|&l| t.pol_tx[l]).collect(),
        samples,
    )
}
