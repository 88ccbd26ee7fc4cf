use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelTensor;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CorrSide {
    /// `E{Hᵀ H*}`, `n_tx × n_tx`.
    Tx,
    /// `E{H Hᴴ}`, `n_rx × n_rx`.
    Rx,
    /// `E{vec(H) vec(H)ᴴ}`, `n_rx·n_tx` square, `vec` stacking columns.
    Full,
}

/// Correlation matrices estimated by averaging over disjoint blocks of
/// `time_avg` snapshots and `freq_avg` subcarriers.
#[derive(Debug, Clone)]
pub struct CorrMatrixTrack {
    pub side: CorrSide,
    pub time_avg: usize,
    pub freq_avg: usize,
    pub time_bins: usize,
    pub freq_blocks: usize,
    matrices: Vec<CMatrix>,
}

impl CorrMatrixTrack {
    pub fn get(&self, bin: usize, block: usize) -> &CMatrix {
        &self.matrices[bin * self.freq_blocks + block]
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    /// First time sample covered by `bin`.
    pub fn bin_start(&self, bin: usize) -> usize {
        bin * self.time_avg
    }
}

fn accumulate(side: CorrSide, h: &[Complex64], n_rx: usize, n_tx: usize, acc: &mut CMatrix) {
    match side {
        CorrSide::Tx => {
            for a in 0..n_tx {
                for b in 0..n_tx {
                    acc[(a, b)] += (0..n_rx).map(|k| h[k * n_tx + a] * h[k * n_tx + b].conj()).sum::<Complex64>();
                }
            }
        }
        CorrSide::Rx => {
            for a in 0..n_rx {
                for b in 0..n_rx {
                    acc[(a, b)] += (0..n_tx).map(|l| h[a * n_tx + l] * h[b * n_tx + l].conj()).sum::<Complex64>();
                }
            }
        }
        CorrSide::Full => {
            let vec_at = |i: usize| {
                let (l, k) = (i / n_rx, i % n_rx);
                h[k * n_tx + l]
            };
            let n = n_rx * n_tx;
            for a in 0..n {
                let va = vec_at(a);
                for b in 0..n {
                    acc[(a, b)] += va * vec_at(b).conj();
                }
            }
        }
    }
}

/// Sample correlation matrices over full `time_avg × freq_avg` blocks. A
/// trailing partial block in either direction is dropped.
pub fn estimate_corr_track(t: &ChannelTensor, side: CorrSide, time_avg: usize, freq_avg: usize) -> Result<CorrMatrixTrack> {
    if time_avg == 0 || freq_avg == 0 {
        return Err(Error::config("averaging lengths must be positive"));
    }
    if time_avg > t.n_time() || freq_avg > t.n_freq() {
        return Err(Error::insufficient(format!(
            "{}x{} samples cannot hold a {time_avg}x{freq_avg} averaging block",
            t.n_time(),
            t.n_freq()
        )));
    }
    let dim = match side {
        CorrSide::Tx => t.n_tx,
        CorrSide::Rx => t.n_rx,
        CorrSide::Full => t.n_rx * t.n_tx,
    };
    let time_bins = t.n_time() / time_avg;
    let freq_blocks = t.n_freq() / freq_avg;
    let norm = Complex64::new(1.0 / (time_avg * freq_avg) as f64, 0.0);

    let matrices = (0..time_bins * freq_blocks)
        .into_par_iter()
        .map(|i| {
            let (bin, block) = (i / freq_blocks, i % freq_blocks);
            let mut acc = CMatrix::zeros(dim, dim);
            for m in bin * time_avg..(bin + 1) * time_avg {
                for q in block * freq_avg..(block + 1) * freq_avg {
                    accumulate(side, t.matrix(m, q), t.n_rx, t.n_tx, &mut acc);
                }
            }
            hermitian_part(&(acc * norm))
        })
        .collect();

    Ok(CorrMatrixTrack { side, time_avg, freq_avg, time_bins, freq_blocks, matrices })
}
