//! Discrete prolate spheroidal (Slepian) sequences.
//!
//! The sequences are the leading eigenvectors of the symmetric tridiagonal
//! matrix that commutes with the sinc concentration kernel
//! `K[m,n] = sin(2πW(m−n)) / (π(m−n))`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First `count` DPSSs of `len` samples with half-bandwidth `nw / len`.
///
/// Each sequence has unit energy; the sign is chosen so that the first
/// entry of maximal magnitude is positive.
pub fn dpss(len: usize, nw: f64, count: usize) -> Result<Vec<Vec<f64>>> {
    if len < 4 {
        return Err(Error::config(format!("DPSS length must be >= 4, got {len}")));
    }
    if !(nw > 0.0) || nw >= len as f64 / 2.0 {
        return Err(Error::config(format!("time-halfbandwidth {nw} out of range for length {len}")));
    }
    if count == 0 || count as f64 > 2.0 * nw - 1.0 {
        return Err(Error::config(format!(
            "requested {count} windows, at most 2·nw−1 = {} are well concentrated",
            2.0 * nw - 1.0
        )));
    }

    let w = nw / len as f64;
    let cos_w = (2.0 * PI * w).cos();
    let n = len as f64;
    let tri = DMatrix::from_fn(len, len, |i, j| {
        if i == j {
            let c = (n - 1.0 - 2.0 * i as f64) / 2.0;
            c * c * cos_w
        } else if i + 1 == j {
            let k = (i + 1) as f64;
            k * (n - k) / 2.0
        } else if j + 1 == i {
            let k = i as f64;
            k * (n - k) / 2.0
        } else {
            0.0
        }
    });
    let eig = tri.symmetric_eigen();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    Ok(order
        .into_iter()
        .take(count)
        .map(|i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            let energy = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= energy);
            let peak = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let first = v.iter().position(|x| x.abs() >= peak * (1.0 - 1e-9)).unwrap_or(0);
            if v[first] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect())
}

/// Fraction of a sequence's energy inside `[-w, w]`: `vᵀ K v` with the sinc
/// kernel.
pub fn concentration(v: &[f64], w: f64) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = i as f64 - j as f64;
            let k = if i == j { 2.0 * w } else { (2.0 * PI * w * d).sin() / (PI * d) };
            acc += v[i] * k * v[j];
        }
    }
    acc
}

/// Separable time × frequency multitaper window bank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpssBank {
    pub time_windows: Vec<Vec<f64>>,
    pub freq_windows: Vec<Vec<f64>>,
    pub time_halfbandwidth: f64,
}

impl DpssBank {
    /// `time_count · freq_count` windows `u_a[m]·v_b[q]`, each axis built from
    /// DPSSs with the same time-halfbandwidth product.
    pub fn new(time_len: usize, freq_len: usize, nw: f64, time_count: usize, freq_count: usize) -> Result<Self> {
        Ok(Self {
            time_windows: dpss(time_len, nw, time_count)?,
            freq_windows: dpss(freq_len, nw, freq_count)?,
            time_halfbandwidth: nw,
        })
    }

    pub fn time_len(&self) -> usize {
        self.time_windows[0].len()
    }

    pub fn freq_len(&self) -> usize {
        self.freq_windows[0].len()
    }

    /// Number of separable windows `S = I·J`.
    pub fn len(&self) -> usize {
        self.time_windows.len() * self.freq_windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Uniform window weight `γ_s = 1/S`.
    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }
}
