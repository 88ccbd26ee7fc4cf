use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::DpssBank;
use crate::channel::ChannelTensor;
use crate::error::{Error, Result};

/// Output grid of the GLSF estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlsfParams {
    /// Number of Doppler bins `B_p` (odd).
    pub doppler_bins: usize,
    /// Number of delay bins `B_n`.
    pub delay_bins: usize,
    pub stride_time: usize,
    pub stride_freq: usize,
}

impl GlsfParams {
    /// `B_p = 2·N_wt − 1`, `B_n = 2·N_wf − 1`, time stride `N_wt/2` and
    /// frequency stride `N_wf/2`.
    pub fn for_bank(bank: &DpssBank) -> Self {
        Self {
            doppler_bins: 2 * bank.time_len() - 1,
            delay_bins: 2 * bank.freq_len() - 1,
            stride_time: (bank.time_len() / 2).max(1),
            stride_freq: (bank.freq_len() / 2).max(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.doppler_bins % 2 == 0 {
            return Err(Error::config(format!("Doppler bin count must be odd, got {}", self.doppler_bins)));
        }
        if self.delay_bins == 0 {
            return Err(Error::config("delay bin count must be positive"));
        }
        if self.stride_time == 0 || self.stride_freq == 0 {
            return Err(Error::config("strides must be positive"));
        }
        Ok(())
    }
}

/// Positions `c` at which a window of `len` samples centred at `c`
/// (support `c − ⌊len/2⌋ .. c + ⌈len/2⌉ − 1`) fits into `n` samples.
pub fn window_centers(n: usize, len: usize, stride: usize) -> Vec<usize> {
    if len > n {
        return Vec::new();
    }
    (len / 2..=n - len + len / 2).step_by(stride).collect()
}

/// Discrete GLSF estimate of a single sub-link.
#[derive(Debug, Clone, PartialEq)]
pub struct GlsfEstimate {
    pub doppler_bins: usize,
    pub delay_bins: usize,
    pub time_spacing: f64,
    pub freq_spacing: f64,
    /// Time index of every output row.
    pub time_centers: Vec<usize>,
    /// Frequency index of every output column.
    pub freq_centers: Vec<usize>,
    /// `[time pos][freq pos][doppler][delay]`, Doppler ordered from
    /// `−(B_p−1)/2` to `(B_p−1)/2`.
    values: Vec<f64>,
}

impl GlsfEstimate {
    pub fn slice_len(&self) -> usize {
        self.doppler_bins * self.delay_bins
    }

    /// Delay-Doppler plane at output position `(ti, fi)`, row-major `[p][n]`.
    pub fn slice(&self, ti: usize, fi: usize) -> &[f64] {
        let start = (ti * self.freq_centers.len() + fi) * self.slice_len();
        &self.values[start..start + self.slice_len()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn half_doppler(&self) -> i64 {
        (self.doppler_bins as i64 - 1) / 2
    }

    /// Doppler resolution `1/B_Δt = 1/(B_p T_m)`.
    pub fn doppler_step(&self) -> f64 {
        1.0 / (self.doppler_bins as f64 * self.time_spacing)
    }

    /// Delay resolution `1/B_Δf = 1/(B_n F_m)`.
    pub fn delay_step(&self) -> f64 {
        1.0 / (self.delay_bins as f64 * self.freq_spacing)
    }

    /// Signed Doppler bin index of storage row `pi`.
    pub fn doppler_index(&self, pi: usize) -> i64 {
        pi as i64 - self.half_doppler()
    }

    /// Storage row of the Doppler bin nearest `nu` hertz (wrapped into range).
    pub fn doppler_row(&self, nu: f64) -> usize {
        let p = (nu / self.doppler_step()).round() as i64;
        (p + self.half_doppler()).rem_euclid(self.doppler_bins as i64) as usize
    }

    /// Delay bin nearest `tau` seconds (wrapped into range).
    pub fn delay_bin(&self, tau: f64) -> usize {
        ((tau / self.delay_step()).round() as i64).rem_euclid(self.delay_bins as i64) as usize
    }

    /// CSV rows `p,n,value` for one output position.
    pub fn slice_csv(&self, ti: usize, fi: usize) -> String {
        let mut out = String::from("p,n,value\n");
        for (i, v) in self.slice(ti, fi).iter().enumerate() {
            let (pi, n) = (i / self.delay_bins, i % self.delay_bins);
            out.push_str(&format!("{},{},{}\n", self.doppler_index(pi), n, v));
        }
        out
    }
}

struct Plans {
    time: Arc<dyn Fft<f64>>,
    freq: Arc<dyn Fft<f64>>,
}

/// GLSF estimate of sub-link `(k, l)`.
pub fn estimate_glsf(t: &ChannelTensor, k: usize, l: usize, bank: &DpssBank, params: &GlsfParams) -> Result<GlsfEstimate> {
    if k >= t.n_rx || l >= t.n_tx {
        return Err(Error::config(format!("sub-link ({k}, {l}) out of range")));
    }
    estimate_glsf_samples(
        &t.sublink(k, l),
        t.n_time(),
        t.n_freq(),
        t.grid.time_spacing,
        t.grid.freq_spacing,
        bank,
        params,
    )
}

/// GLSF estimate from a row-major `n_time × n_freq` sample array.
///
/// For every output position `(m, q)` and window `s`,
/// `H_s[p, n] = √(T_m F_m) Σ_{m',q'} u[m'] v[q'] h[m+m', q+q'] e^{−j2π(p m'/B_p − n q'/B_n)}`
/// and the estimate is `Σ_s γ_s |H_s[p, n]|²`. Windows longer than the DFT
/// lengths are folded, which evaluates the same sum exactly.
pub fn estimate_glsf_samples(
    samples: &[Complex64],
    n_time: usize,
    n_freq: usize,
    time_spacing: f64,
    freq_spacing: f64,
    bank: &DpssBank,
    params: &GlsfParams,
) -> Result<GlsfEstimate> {
    params.validate()?;
    if samples.len() != n_time * n_freq {
        return Err(Error::config("sample array does not match dimensions"));
    }
    let (nwt, nwf) = (bank.time_len(), bank.freq_len());
    if nwt > n_time || nwf > n_freq {
        return Err(Error::insufficient(format!(
            "{n_time}x{n_freq} samples cannot hold a {nwt}x{nwf} window"
        )));
    }
    let time_centers = window_centers(n_time, nwt, params.stride_time);
    let freq_centers = window_centers(n_freq, nwf, params.stride_freq);

    let (bp, bn) = (params.doppler_bins, params.delay_bins);
    let mut planner = FftPlanner::<f64>::new();
    let plans = Plans {
        time: planner.plan_fft_forward(bp),
        freq: planner.plan_fft_inverse(bn),
    };
    let scale = time_spacing * freq_spacing * bank.weight();
    let half = (bp - 1) / 2;

    let positions: Vec<(usize, usize)> = time_centers
        .iter()
        .flat_map(|&m| freq_centers.iter().map(move |&q| (m, q)))
        .collect();

    let slices: Vec<Vec<f64>> = positions
        .par_iter()
        .map(|&(mc, qc)| {
            let m0 = mc - nwt / 2;
            let q0 = qc - nwf / 2;
            let mut acc = vec![0.0; bp * bn];
            // buffer layout: [p][n]
            let mut buf = vec![Complex64::new(0.0, 0.0); bp * bn];
            let mut column = vec![Complex64::new(0.0, 0.0); bp];
            for u in &bank.time_windows {
                for v in &bank.freq_windows {
                    buf.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
                    for (dm, &wu) in u.iter().enumerate() {
                        let row = &samples[(m0 + dm) * n_freq + q0..(m0 + dm) * n_freq + q0 + nwf];
                        let dst = (dm % bp) * bn;
                        for (dq, (&wv, &h)) in v.iter().zip(row).enumerate() {
                            buf[dst + dq % bn] += h * (wu * wv);
                        }
                    }
                    // delay axis: e^{+j2π n q'/B_n}
                    for r in buf.chunks_exact_mut(bn) {
                        plans.freq.process(r);
                    }
                    // Doppler axis: e^{-j2π p m'/B_p}
                    for n in 0..bn {
                        for p in 0..bp {
                            column[p] = buf[p * bn + n];
                        }
                        plans.time.process(&mut column);
                        for pi in 0..bp {
                            acc[pi * bn + n] += column[(pi + bp - half) % bp].norm_sqr();
                        }
                    }
                }
            }
            acc.iter_mut().for_each(|x| *x *= scale);
            acc
        })
        .collect();

    Ok(GlsfEstimate {
        doppler_bins: bp,
        delay_bins: bn,
        time_spacing,
        freq_spacing,
        time_centers,
        freq_centers,
        values: slices.concat(),
    })
}

/// Which axis a marginal PSD runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsdAxis {
    Doppler,
    Delay,
}

/// Doppler or delay PSD per output position of a GLSF estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalPsd {
    pub axis: PsdAxis,
    pub bins: usize,
    /// Bin spacing along the PSD axis (Hz for Doppler, s for delay).
    pub step: f64,
    /// Sampling rate of the estimation axis: `1/T_m` (Doppler) or `1/F_m` (delay).
    pub rate: f64,
    pub time_centers: Vec<usize>,
    pub freq_centers: Vec<usize>,
    values: Vec<f64>,
}

pub type DopplerPsd = MarginalPsd;
pub type DelayPsd = MarginalPsd;

impl MarginalPsd {
    /// A single spectrum attached to time index `m`.
    pub(crate) fn from_parts(axis: PsdAxis, step: f64, rate: f64, m: usize, values: Vec<f64>) -> Self {
        Self { axis, bins: values.len(), step, rate, time_centers: vec![m], freq_centers: vec![0], values }
    }

    pub fn spectrum(&self, ti: usize, fi: usize) -> &[f64] {
        let start = (ti * self.freq_centers.len() + fi) * self.bins;
        &self.values[start..start + self.bins]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `C_ν[p] = Σ_n C[p, n] · Δτ`.
pub fn marginal_doppler(g: &GlsfEstimate) -> DopplerPsd {
    let step = g.delay_step();
    let values = g
        .values
        .chunks_exact(g.slice_len())
        .flat_map(|plane| plane.chunks_exact(g.delay_bins).map(|row| row.iter().sum::<f64>() * step))
        .collect();
    MarginalPsd {
        axis: PsdAxis::Doppler,
        bins: g.doppler_bins,
        step: g.doppler_step(),
        rate: 1.0 / g.time_spacing,
        time_centers: g.time_centers.clone(),
        freq_centers: g.freq_centers.clone(),
        values,
    }
}

/// `C_τ[n] = Σ_p C[p, n] · Δν`.
pub fn marginal_delay(g: &GlsfEstimate) -> DelayPsd {
    let step = g.doppler_step();
    let mut values = Vec::with_capacity(g.values.len() / g.doppler_bins);
    for plane in g.values.chunks_exact(g.slice_len()) {
        let mut sums = vec![0.0; g.delay_bins];
        for row in plane.chunks_exact(g.delay_bins) {
            sums.iter_mut().zip(row).for_each(|(s, v)| *s += v);
        }
        values.extend(sums.into_iter().map(|s| s * step));
    }
    MarginalPsd {
        axis: PsdAxis::Delay,
        bins: g.delay_bins,
        step: g.delay_step(),
        rate: 1.0 / g.freq_spacing,
        time_centers: g.time_centers.clone(),
        freq_centers: g.freq_centers.clone(),
        values,
    }
}
