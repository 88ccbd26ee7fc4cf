//! End-to-end analysis of one sub-array setup: preprocessing, GLSF and
//! correlation tracks, pairwise measures over time bins and scenario curves.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_noise_floor, normalize_copolarized, select_subarray, ChannelTensor, SubArraySelection};
use crate::error::{Error, Result};
use crate::lqs::{average_measure, extract_lqs, measure_correlation, LqsResult, MeasureCurve};
use crate::measures::mse::relative_from;
use crate::measures::{
    approx_relative_mse, cmd, collinearity_psd, estimate_corr_track, relative_snr, Autocovariance, CorrMatrixTrack,
    CorrSide, EstimatorConfig, MeasureKind, MeasurePair, WienerFilter,
};
use crate::spectral::{estimate_glsf, marginal_delay, marginal_doppler, DpssBank, GlsfParams, MarginalPsd};

/// Every tunable of the processing chain. Defaults follow the reference
/// measurement campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub noise_floor: bool,
    pub noise_margin_db: f64,
    pub normalize: bool,
    pub norm_block_time: usize,
    pub norm_block_freq: usize,
    pub window_time: usize,
    pub window_freq: usize,
    pub halfbandwidth: f64,
    pub time_tapers: usize,
    pub freq_tapers: usize,
    pub doppler_bins: usize,
    pub delay_bins: usize,
    /// GLSF time stride; also the time-bin length of the correlation tracks.
    pub stride_time: usize,
    pub stride_freq: usize,
    pub corr_freq_avg: usize,
    pub measures: Vec<MeasureKind>,
    pub gamma_db: f64,
    pub pilot_spacing: usize,
    pub interval_time: usize,
    pub interval_freq: usize,
    /// Largest evaluated distance offset, m.
    pub max_distance_m: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            noise_floor: true,
            noise_margin_db: crate::channel::DEFAULT_NOISE_MARGIN_DB,
            normalize: true,
            norm_block_time: 16,
            norm_block_freq: 128,
            window_time: 32,
            window_freq: 128,
            halfbandwidth: 2.0,
            time_tapers: 2,
            freq_tapers: 2,
            doppler_bins: 63,
            delay_bins: 255,
            stride_time: 16,
            stride_freq: 64,
            corr_freq_avg: 128,
            measures: MeasureKind::ALL.to_vec(),
            gamma_db: 10.0,
            pilot_spacing: 1,
            interval_time: 30,
            interval_freq: 120,
            max_distance_m: 50.0,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.measures.is_empty() {
            return Err(Error::config("no measures selected"));
        }
        if !(self.max_distance_m > 0.0) {
            return Err(Error::config("max_distance_m must be positive"));
        }
        if self.stride_time == 0 || self.stride_freq == 0 || self.corr_freq_avg == 0 {
            return Err(Error::config("strides and averaging lengths must be positive"));
        }
        if self.noise_floor && !self.noise_margin_db.is_finite() {
            return Err(Error::config("noise margin must be finite"));
        }
        self.glsf_params().validate()?;
        self.mse_time().validate()?;
        self.mse_freq().validate()
    }

    pub fn bank(&self) -> Result<DpssBank> {
        DpssBank::new(self.window_time, self.window_freq, self.halfbandwidth, self.time_tapers, self.freq_tapers)
    }

    pub fn glsf_params(&self) -> GlsfParams {
        GlsfParams {
            doppler_bins: self.doppler_bins,
            delay_bins: self.delay_bins,
            stride_time: self.stride_time,
            stride_freq: self.stride_freq,
        }
    }

    pub fn mse_time(&self) -> EstimatorConfig {
        EstimatorConfig::from_db(self.gamma_db, self.pilot_spacing, self.interval_time)
    }

    pub fn mse_freq(&self) -> EstimatorConfig {
        EstimatorConfig::from_db(self.gamma_db, self.pilot_spacing, self.interval_freq)
    }
}

/// Pairwise measures and scenario curves of one setup.
#[derive(Debug, Clone)]
pub struct SetupAnalysis {
    pub setup: String,
    /// Spacing of consecutive time bins, s.
    pub bin_time: f64,
    pub mean_speed: f64,
    pub max_offset: i64,
    /// Pairs per measure, sorted by `(m, m_prime)`.
    pub pairs: BTreeMap<MeasureKind, Vec<MeasurePair>>,
    /// One curve per selected measure, in selection order.
    pub curves: Vec<MeasureCurve>,
}

impl SetupAnalysis {
    pub fn bin_distance(&self) -> f64 {
        self.bin_time * self.mean_speed
    }

    pub fn offset_for_distance(&self, distance_m: f64) -> i64 {
        (distance_m / self.bin_distance()).round() as i64
    }

    pub fn curve(&self, kind: MeasureKind) -> Option<&MeasureCurve> {
        self.curves.iter().find(|c| c.kind == kind)
    }

    pub fn lqs(&self, kind: MeasureKind, threshold: f64) -> Result<LqsResult> {
        let curve = self.curve(kind).ok_or_else(|| Error::config(format!("{kind} was not evaluated")))?;
        extract_lqs(curve, threshold, self.bin_time, self.mean_speed)
    }

    /// `m → η[m, m+offset]`.
    pub fn series_at(&self, kind: MeasureKind, offset: i64) -> BTreeMap<usize, f64> {
        self.pairs
            .get(&kind)
            .map(|p| p.iter().filter(|x| x.offset() == offset).map(|x| (x.m, x.value)).collect())
            .unwrap_or_default()
    }

    /// Pearson correlation between every two measures at `offset`, over the
    /// bins where both are defined. `None` where undefined.
    pub fn correlation_matrix(&self, offset: i64) -> Vec<Vec<Option<f64>>> {
        let series: Vec<BTreeMap<usize, f64>> = self.curves.iter().map(|c| self.series_at(c.kind, offset)).collect();
        series
            .iter()
            .map(|a| {
                series
                    .iter()
                    .map(|b| {
                        let (xa, xb): (Vec<f64>, Vec<f64>) =
                            a.iter().filter_map(|(m, va)| b.get(m).map(|vb| (*va, *vb))).unzip();
                        measure_correlation(&xa, &xb).ok()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Per-position statistics shared by all pairs that use the position.
struct AxisStats {
    cov: Autocovariance,
    filter: WienerFilter,
    matched: f64,
}

struct SpectralTrack {
    doppler: MarginalPsd,
    delay: MarginalPsd,
    /// Indexed `[ti * n_freq_pos + fi]`; `None` where the spectrum is zero.
    doppler_stats: Vec<Option<AxisStats>>,
    delay_stats: Vec<Option<AxisStats>>,
}

fn axis_stats(psd: &MarginalPsd, cfg: &EstimatorConfig, exact: bool) -> Result<Vec<Option<AxisStats>>> {
    if !exact {
        return Ok(Vec::new());
    }
    let support = WienerFilter::support(cfg);
    let positions: Vec<(usize, usize)> = (0..psd.time_centers.len())
        .flat_map(|ti| (0..psd.freq_centers.len()).map(move |fi| (ti, fi)))
        .collect();
    positions
        .par_iter()
        .map(|&(ti, fi)| {
            let s = psd.spectrum(ti, fi);
            if s.iter().all(|&v| v == 0.0) {
                return Ok(None);
            }
            let cov = Autocovariance::from_psd(s, psd.rate, support);
            let filter = WienerFilter::design(&cov, cfg)?;
            let matched = filter.mse(&cov);
            Ok(Some(AxisStats { cov, filter, matched }))
        })
        .collect()
}

fn side_of(kind: MeasureKind) -> Option<CorrSide> {
    match kind {
        MeasureKind::CmdTx | MeasureKind::SnrTx => Some(CorrSide::Tx),
        MeasureKind::CmdRx | MeasureKind::SnrRx => Some(CorrSide::Rx),
        MeasureKind::CmdFull => Some(CorrSide::Full),
        _ => None,
    }
}

/// Mean of the defined components; `None` if none is defined.
fn mean_defined(values: impl Iterator<Item = Result<f64>>) -> Result<Option<f64>> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        match v {
            Ok(v) => {
                sum += v;
                n += 1;
            }
            Err(Error::UndefinedMeasure(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((n > 0).then(|| sum / n as f64))
}

fn spectral_value(
    kind: MeasureKind,
    tracks: &[SpectralTrack],
    b: usize,
    b2: usize,
    cfg_t: &EstimatorConfig,
    cfg_f: &EstimatorConfig,
) -> Result<Option<f64>> {
    let n_fpos = tracks[0].doppler.freq_centers.len();
    let components = tracks.iter().flat_map(|tr| (0..n_fpos).map(move |fi| (tr, fi)));
    mean_defined(components.map(|(tr, fi)| {
        let (psd, cfg, stats) = match kind {
            MeasureKind::ColDoppler | MeasureKind::MseDopplerAp | MeasureKind::MseDopplerExact => {
                (&tr.doppler, cfg_t, &tr.doppler_stats)
            }
            _ => (&tr.delay, cfg_f, &tr.delay_stats),
        };
        let (a, s) = (psd.spectrum(b, fi), psd.spectrum(b2, fi));
        match kind {
            MeasureKind::ColDoppler | MeasureKind::ColDelay => collinearity_psd(a, s),
            MeasureKind::MseDopplerAp | MeasureKind::MseDelayAp => approx_relative_mse(a, s, cfg, psd.rate),
            _ => {
                let i = |ti: usize| ti * n_fpos + fi;
                match (&stats[i(b)], &stats[i(b2)]) {
                    (Some(truth), Some(stale)) => relative_from(truth.matched, stale.filter.mse(&truth.cov)),
                    (None, _) => Err(Error::undefined("true PSD is zero")),
                    // a zero stale PSD yields the all-zero filter
                    (Some(truth), None) => relative_from(truth.matched, truth.cov.at(0).re),
                }
            }
        }
    }))
}

fn corr_value(kind: MeasureKind, track: &CorrMatrixTrack, b: usize, b2: usize) -> Result<Option<f64>> {
    mean_defined((0..track.freq_blocks).map(|blk| {
        let (ra, rb) = (track.get(b, blk), track.get(b2, blk));
        match kind {
            MeasureKind::SnrTx | MeasureKind::SnrRx => relative_snr(ra, rb),
            _ => cmd(ra, rb),
        }
    }))
}

/// Runs the full chain on `selection` of `tensor`.
pub fn analyze_setup(tensor: &ChannelTensor, selection: &SubArraySelection, cfg: &AnalysisConfig) -> Result<SetupAnalysis> {
    cfg.validate()?;
    let mut t = select_subarray(tensor, selection)?;
    if cfg.noise_floor {
        t = apply_noise_floor(&t, cfg.noise_margin_db)?;
    }
    let valid_samples = if cfg.normalize {
        let n = normalize_copolarized(&t, cfg.norm_block_time, cfg.norm_block_freq)?;
        let valid = n.valid_time_samples();
        t = n.tensor;
        valid
    } else {
        vec![true; t.n_time()]
    };
    let span_valid = |start: usize, len: usize| valid_samples[start..start + len].iter().all(|&v| v);

    let bin_time = cfg.stride_time as f64 * t.grid.time_spacing;
    let mean_speed = t.grid.mean_speed();
    if !(mean_speed > 0.0) {
        return Err(Error::config("mean speed must be positive to map offsets to distance"));
    }
    let max_offset = (cfg.max_distance_m / (bin_time * mean_speed)).ceil() as i64;
    let (cfg_t, cfg_f) = (cfg.mse_time(), cfg.mse_freq());

    let spectral: Vec<MeasureKind> = cfg.measures.iter().copied().filter(|k| k.is_spectral()).collect();
    let mut tracks = Vec::new();
    if !spectral.is_empty() {
        let bank = cfg.bank()?;
        let params = cfg.glsf_params();
        let exact_t = spectral.contains(&MeasureKind::MseDopplerExact);
        let exact_f = spectral.contains(&MeasureKind::MseDelayExact);
        for k in 0..t.n_rx {
            for l in 0..t.n_tx {
                let g = estimate_glsf(&t, k, l, &bank, &params)?;
                let doppler = marginal_doppler(&g);
                let delay = marginal_delay(&g);
                let doppler_stats = axis_stats(&doppler, &cfg_t, exact_t)?;
                let delay_stats = axis_stats(&delay, &cfg_f, exact_f)?;
                tracks.push(SpectralTrack { doppler, delay, doppler_stats, delay_stats });
            }
        }
    }
    let mut corr: BTreeMap<u8, CorrMatrixTrack> = BTreeMap::new();
    for kind in &cfg.measures {
        if let Some(side) = side_of(*kind) {
            if !corr.contains_key(&(side as u8)) {
                corr.insert(side as u8, estimate_corr_track(&t, side, cfg.stride_time, cfg.corr_freq_avg)?);
            }
        }
    }

    let mut pairs = BTreeMap::new();
    for &kind in &cfg.measures {
        let (n_bins, bin_len): (usize, usize) = match side_of(kind) {
            Some(side) => (corr[&(side as u8)].time_bins, cfg.stride_time),
            None => (tracks[0].doppler.time_centers.len(), cfg.window_time),
        };
        let valid: Vec<bool> = (0..n_bins).map(|b| span_valid(b * cfg.stride_time, bin_len)).collect();
        let per_bin: Vec<Vec<MeasurePair>> = (0..n_bins)
            .into_par_iter()
            .map(|b| {
                let mut out = Vec::new();
                if !valid[b] {
                    return Ok(out);
                }
                for off in -max_offset..=max_offset {
                    let b2 = b as i64 + off;
                    if b2 < 0 || b2 >= n_bins as i64 || !valid[b2 as usize] {
                        continue;
                    }
                    let b2 = b2 as usize;
                    let v = match side_of(kind) {
                        Some(side) => corr_value(kind, &corr[&(side as u8)], b, b2)?,
                        None => spectral_value(kind, &tracks, b, b2, &cfg_t, &cfg_f)?,
                    };
                    if let Some(value) = v {
                        out.push(MeasurePair { kind, m: b, m_prime: b2, value });
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        pairs.insert(kind, per_bin.concat());
    }

    let curves = cfg
        .measures
        .iter()
        .map(|k| average_measure(&pairs[k], -max_offset..=max_offset, &selection.name))
        .collect::<Result<Vec<_>>>()?;

    Ok(SetupAnalysis { setup: selection.name.clone(), bin_time, mean_speed, max_offset, pairs, curves })
}
