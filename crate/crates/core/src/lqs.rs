//! Scenario averaging of pairwise measures and extraction of local
//! quasi-stationarity (LQS) times and distances.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{MeasureKind, MeasurePair};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Measure averaged over a scenario, per time offset `Δm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureCurve {
    pub kind: MeasureKind,
    pub scenario_id: String,
    /// Ascending offsets that had at least one valid pair.
    pub offsets: Vec<i64>,
    pub avg: Vec<f64>,
    /// Population standard deviation (divides by `count`).
    pub std: Vec<f64>,
    pub count: Vec<usize>,
}

impl MeasureCurve {
    pub fn position(&self, offset: i64) -> Option<usize> {
        self.offsets.binary_search(&offset).ok()
    }

    pub fn at(&self, offset: i64) -> Option<f64> {
        self.position(offset).map(|i| self.avg[i])
    }
}

/// Averages `η[m, m+Δm]` over all `m` for every offset in `offsets`.
///
/// Values are summed in sorted order so the result does not depend on the
/// order in which pairs arrive. Offsets without any pair are omitted.
pub fn average_measure<'a>(
    pairs: impl IntoIterator<Item = &'a MeasurePair>,
    offsets: RangeInclusive<i64>,
    scenario_id: &str,
) -> Result<MeasureCurve> {
    let mut kind = None;
    let mut buckets: BTreeMap<i64, Vec<f64>> = offsets.clone().map(|o| (o, Vec::new())).collect();
    for pair in pairs {
        match kind {
            None => kind = Some(pair.kind),
            Some(k) if k != pair.kind => {
                return Err(Error::config(format!("cannot average {} together with {}", k, pair.kind)))
            }
            _ => {}
        }
        if !pair.value.is_finite() {
            return Err(Error::Numerical(format!("non-finite {} value", pair.kind)));
        }
        if let Some(bucket) = buckets.get_mut(&pair.offset()) {
            bucket.push(pair.value);
        }
    }
    let kind = kind.ok_or_else(|| Error::insufficient("no measure pairs to average"))?;

    let mut curve = MeasureCurve {
        kind,
        scenario_id: scenario_id.to_string(),
        offsets: Vec::new(),
        avg: Vec::new(),
        std: Vec::new(),
        count: Vec::new(),
    };
    for (offset, mut values) in buckets {
        if values.is_empty() {
            log::warn!("{kind}: no valid pairs at offset {offset}; omitted");
            continue;
        }
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        curve.offsets.push(offset);
        curve.avg.push(mean);
        curve.std.push(var.sqrt());
        curve.count.push(values.len());
    }
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqsResult {
    pub threshold: f64,
    /// `|C|`, number of offsets in the connected threshold set around 0.
    pub set_size: usize,
    /// Lowest and highest offset in the set.
    pub lower: i64,
    pub upper: i64,
    pub lqs_time: f64,
    pub lqs_distance: f64,
    /// The set reaches the evaluated offset range, so only a lower bound is known.
    pub censored: bool,
}

/// Connected run of offsets around `Δm = 0` whose average exceeds
/// `threshold`; the LQS time is `|C| · bin_time`.
pub fn extract_lqs(curve: &MeasureCurve, threshold: f64, bin_time: f64, mean_speed: f64) -> Result<LqsResult> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::config(format!("threshold must lie in [0, 1], got {threshold}")));
    }
    let zero = curve
        .position(0)
        .ok_or_else(|| Error::config("measure curve does not contain offset 0"))?;
    if curve.avg[zero] <= threshold {
        return Err(Error::DegenerateThreshold { threshold, value: curve.avg[zero] });
    }
    let inside = |i: usize| curve.avg[i] > threshold;

    let mut lo = zero;
    while lo > 0 && curve.offsets[lo - 1] == curve.offsets[lo] - 1 && inside(lo - 1) {
        lo -= 1;
    }
    let mut hi = zero;
    while hi + 1 < curve.offsets.len() && curve.offsets[hi + 1] == curve.offsets[hi] + 1 && inside(hi + 1) {
        hi += 1;
    }
    let set_size = hi - lo + 1;
    let lqs_time = set_size as f64 * bin_time;
    Ok(LqsResult {
        threshold,
        set_size,
        lower: curve.offsets[lo],
        upper: curve.offsets[hi],
        lqs_time,
        lqs_distance: lqs_time * mean_speed,
        censored: lo == 0 || hi == curve.offsets.len() - 1,
    })
}

/// Pearson correlation coefficient of two equally long sequences.
pub fn measure_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::config("correlation needs two sequences of equal length >= 2"));
    }
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if !(saa > 0.0) || !(sbb > 0.0) {
        return Err(Error::undefined("correlation of a constant sequence"));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Rough scenario parameters for the doubly-underspread check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuInputs {
    /// Maximal terminal speed, m/s.
    pub v_max: f64,
    pub carrier_freq: f64,
    /// Maximal effective delay, s.
    pub tau_max: f64,
    /// Minimal stationarity distance, m.
    pub d_stat_min: f64,
    /// Largest scattering object, m.
    pub w_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuReport {
    pub inputs: DuInputs,
    pub nu_max: f64,
    pub tau_max: f64,
    pub delta_nu_max: f64,
    pub delta_tau_max: f64,
    /// `τ_max ν_max`.
    pub dispersion_product: f64,
    /// `Δτ_max Δν_max`.
    pub correlation_product: f64,
    /// `Δτ_max Δν_max / (τ_max ν_max)`.
    pub correlation_ratio: f64,
    pub coherence_time: f64,
    pub coherence_freq: f64,
    pub stationarity_time: f64,
    pub stationarity_freq: f64,
    /// Angular spread implied by `Δν_max = 2 ν_max sin²(δ/2)`, degrees.
    /// `None` when `Δν_max > 2 ν_max`.
    pub angular_spread_deg: Option<f64>,
    /// Ratio below which "much smaller than" is accepted.
    pub ratio_limit: f64,
    pub doubly_underspread: bool,
}

pub const DEFAULT_DU_RATIO_LIMIT: f64 = 0.1;

pub fn du_check(inputs: DuInputs, ratio_limit: f64) -> Result<DuReport> {
    let DuInputs { v_max, carrier_freq, tau_max, d_stat_min, w_max } = inputs;
    for (name, v) in [
        ("v_max", v_max),
        ("carrier_freq", carrier_freq),
        ("tau_max", tau_max),
        ("d_stat_min", d_stat_min),
        ("w_max", w_max),
        ("ratio_limit", ratio_limit),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::config(format!("{name} must be positive, got {v}")));
        }
    }
    let nu_max = v_max * carrier_freq / SPEED_OF_LIGHT;
    let stationarity_time = d_stat_min / v_max;
    let stationarity_freq = SPEED_OF_LIGHT / w_max;
    let delta_nu_max = 1.0 / stationarity_time;
    let delta_tau_max = 1.0 / stationarity_freq;
    let dispersion_product = tau_max * nu_max;
    let correlation_product = delta_tau_max * delta_nu_max;
    let correlation_ratio = correlation_product / dispersion_product;
    let s = delta_nu_max / (2.0 * nu_max);
    let angular_spread_deg = (s <= 1.0).then(|| (2.0 * s.sqrt().asin()).to_degrees());
    Ok(DuReport {
        inputs,
        nu_max,
        tau_max,
        delta_nu_max,
        delta_tau_max,
        dispersion_product,
        correlation_product,
        correlation_ratio,
        coherence_time: 1.0 / nu_max,
        coherence_freq: 1.0 / tau_max,
        stationarity_time,
        stationarity_freq,
        angular_spread_deg,
        ratio_limit,
        doubly_underspread: dispersion_product < ratio_limit && correlation_ratio < ratio_limit,
    })
}
