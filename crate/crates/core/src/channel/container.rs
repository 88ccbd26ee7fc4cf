//! CTF1 channel container.
//!
//! Layout: one UTF-8 JSON header line terminated by `\n`, then
//! `n_time·n_freq·n_rx·n_tx` complex samples as little-endian `f32` pairs
//! `(re, im)`, time-major, then frequency, rx, tx.
//!
//! Headers written here are canonical (fixed field order, shortest float
//! representation), so any container produced by [`write_container`]
//! round-trips byte for byte.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ChannelTensor, Polarization, SamplingGrid};
use crate::error::{Error, Result};

pub const MAGIC: &str = "CTF1";

#[allow(non_snake_case)]
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    magic: String,
    n_time: usize,
    n_freq: usize,
    n_rx: usize,
    n_tx: usize,
    T_m: f64,
    F_m: f64,
    f_c: f64,
    pol_rx: Vec<Polarization>,
    pol_tx: Vec<Polarization>,
    speed_per_sample: Vec<f64>,
}

pub fn read_container(path: impl AsRef<Path>) -> Result<ChannelTensor> {
    let bytes = fs::read(path)?;
    decode_container(&bytes)
}

pub fn write_container(path: impl AsRef<Path>, tensor: &ChannelTensor) -> Result<()> {
    fs::write(path, encode_container(tensor)?)?;
    Ok(())
}

pub fn decode_container(bytes: &[u8]) -> Result<ChannelTensor> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing header terminator".into()))?;
    let header: Header = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| Error::Format(format!("header: {e}")))?;
    if header.magic != MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", header.magic)));
    }

    let count = header
        .n_time
        .checked_mul(header.n_freq)
        .and_then(|v| v.checked_mul(header.n_rx))
        .and_then(|v| v.checked_mul(header.n_tx))
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    let payload = &bytes[newline + 1..];
    if payload.len() != count * 8 {
        return Err(Error::Format(format!(
            "payload holds {} bytes, dimensions require {}",
            payload.len(),
            count * 8
        )));
    }

    let samples: Vec<Complex64> = payload
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect();

    let grid = SamplingGrid {
        time_spacing: header.T_m,
        freq_spacing: header.F_m,
        carrier_freq: header.f_c,
        n_time: header.n_time,
        n_freq: header.n_freq,
        speed_per_sample: header.speed_per_sample,
    };
    ChannelTensor::new(grid, header.n_rx, header.n_tx, header.pol_rx, header.pol_tx, samples).map_err(
        |e| match e {
            Error::Config(msg) => Error::Format(msg),
            other => other,
        },
    )
}

/// Serializes a tensor. Samples are stored as `f32`; values not exactly
/// representable are rounded.
pub fn encode_container(tensor: &ChannelTensor) -> Result<Vec<u8>> {
    let g = &tensor.grid;
    let header = Header {
        magic: MAGIC.to_string(),
        n_time: g.n_time,
        n_freq: g.n_freq,
        n_rx: tensor.n_rx,
        n_tx: tensor.n_tx,
        T_m: g.time_spacing,
        F_m: g.freq_spacing,
        f_c: g.carrier_freq,
        pol_rx: tensor.pol_rx.clone(),
        pol_tx: tensor.pol_tx.clone(),
        speed_per_sample: g.speed_per_sample.clone(),
    };
    let mut out = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
    out.push(b'\n');
    out.reserve(tensor.samples().len() * 8);
    for h in tensor.samples() {
        out.extend_from_slice(&(h.re as f32).to_le_bytes());
        out.extend_from_slice(&(h.im as f32).to_le_bytes());
    }
    Ok(out)
}
