//! Batch driver: scene synthesis, full analysis runs and the
//! doubly-underspread check, with deterministic artifact output.

mod config;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lqs_core::channel::{apply_phase_offsets, read_container, write_container};
use lqs_core::lqs::{du_check, DuReport};
use lqs_core::{analyze_setup, ChannelTensor, Error, Scene, SetupAnalysis, SubArraySelection};
use serde_json::json;

pub use config::{DuConfig, InputSpec, RunConfig};

/// Relative path → file contents, emitted in path order.
pub type Artifacts = BTreeMap<PathBuf, Vec<u8>>;

pub fn load_scene(path: &Path) -> Result<Scene> {
    let text = fs::read_to_string(path).with_context(|| format!("reading scene {}", path.display()))?;
    Ok(Scene::from_json(&text)?)
}

/// Generates the scene at `scene_path` and writes `channel.ctf1` into `out`.
pub fn run_synth(scene_path: &Path, seed: u64, out: &Path) -> Result<PathBuf> {
    let tensor = load_scene(scene_path)?.generate(seed)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join("channel.ctf1");
    write_container(&path, &tensor).inspect_err(|_| {
        let _ = fs::remove_file(&path);
    })?;
    Ok(path)
}

fn load_input(input: &InputSpec) -> Result<ChannelTensor> {
    match input {
        InputSpec::Container { path } => {
            read_container(path).with_context(|| format!("reading container {}", path.display()))
        }
        InputSpec::Synth { scene, seed } => Ok(load_scene(scene)?.generate(*seed)?),
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))
}

fn curve_csv(a: &SetupAnalysis, kind: lqs_core::MeasureKind) -> Result<Vec<u8>> {
    let c = a.curve(kind).expect("curve exists for every selected measure");
    let mut w = csv_writer();
    w.write_record(["offset", "distance_m", "avg", "std", "count"])?;
    for i in 0..c.offsets.len() {
        w.write_record([
            c.offsets[i].to_string(),
            (c.offsets[i] as f64 * a.bin_distance()).to_string(),
            c.avg[i].to_string(),
            c.std[i].to_string(),
            c.count[i].to_string(),
        ])?;
    }
    finish(w)
}

fn lqs_csv(results: &[SetupAnalysis], cfg: &RunConfig) -> Result<Vec<u8>> {
    let mut w = csv_writer();
    w.write_record(["setup", "measure", "eta_th", "lqs_distance_m", "censored", "set_size", "lqs_time_s"])?;
    for a in results {
        for kind in &cfg.analysis.measures {
            for &th in &cfg.thresholds {
                let (distance, censored, size, time) = match a.lqs(*kind, th) {
                    Ok(r) => (r.lqs_distance, r.censored, r.set_size, r.lqs_time),
                    Err(Error::DegenerateThreshold { .. }) => (0.0, false, 0, 0.0),
                    Err(e) => return Err(e.into()),
                };
                w.write_record([
                    a.setup.clone(),
                    kind.name().to_string(),
                    th.to_string(),
                    distance.to_string(),
                    censored.to_string(),
                    size.to_string(),
                    time.to_string(),
                ])?;
            }
        }
    }
    finish(w)
}

fn correlation_csv(a: &SetupAnalysis, offset: i64) -> Result<Vec<u8>> {
    let names: Vec<&str> = a.curves.iter().map(|c| c.kind.name()).collect();
    let mut w = csv_writer();
    w.write_record(std::iter::once("measure").chain(names.iter().copied()))?;
    for (name, row) in names.iter().zip(a.correlation_matrix(offset)) {
        let cells = row.into_iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default());
        w.write_record(std::iter::once(name.to_string()).chain(cells))?;
    }
    finish(w)
}

fn json_bytes(v: &impl serde::Serialize) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

/// Runs every setup of `cfg` and returns the artifact set without touching
/// the file system.
pub fn analyze(cfg: &RunConfig) -> Result<Artifacts> {
    cfg.validate()?;
    let mut tensor = load_input(&cfg.input)?;
    if let Some(p) = &cfg.phase_offsets {
        tensor = apply_phase_offsets(&tensor, p)?;
    }
    let setups = if cfg.setups.is_empty() {
        vec![SubArraySelection::full("full", tensor.n_rx, tensor.n_tx)]
    } else {
        cfg.setups.clone()
    };

    let mut results = Vec::with_capacity(setups.len());
    for s in &setups {
        log::info!("analyzing setup {}", s.name);
        results.push(analyze_setup(&tensor, s, &cfg.analysis).with_context(|| format!("setup {}", s.name))?);
    }

    let du_inputs = cfg.du.resolve(&tensor.grid);
    let du: DuReport = du_check(du_inputs, cfg.du.ratio_limit)?;

    let mut out = Artifacts::new();
    let mut setup_meta = Vec::new();
    for a in &results {
        for kind in &cfg.analysis.measures {
            out.insert(PathBuf::from("curves").join(&a.setup).join(format!("{}.csv", kind.name())), curve_csv(a, *kind)?);
        }
        let offset = a.offset_for_distance(cfg.correlation_offset_m);
        out.insert(PathBuf::from("correlation").join(format!("{}.csv", a.setup)), correlation_csv(a, offset)?);
        setup_meta.push(json!({
            "name": a.setup,
            "bin_time_s": a.bin_time,
            "bin_distance_m": a.bin_distance(),
            "mean_speed_mps": a.mean_speed,
            "max_offset_bins": a.max_offset,
            "correlation_offset_bins": offset,
        }));
    }
    out.insert(PathBuf::from("lqs.csv"), lqs_csv(&results, cfg)?);
    out.insert(PathBuf::from("du_report.json"), json_bytes(&du)?);

    let files: Vec<String> = out.keys().map(|p| p.to_string_lossy().replace('\\', "/")).collect();
    let g = &tensor.grid;
    let manifest = json!({
        "software": {"name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION")},
        "input": cfg.input,
        "grid": {
            "time_spacing": g.time_spacing,
            "freq_spacing": g.freq_spacing,
            "carrier_freq": g.carrier_freq,
            "n_time": g.n_time,
            "n_freq": g.n_freq,
            "n_rx": tensor.n_rx,
            "n_tx": tensor.n_tx,
            "mean_speed": g.mean_speed(),
        },
        "setups": setups,
        "phase_offsets": cfg.phase_offsets,
        "analysis": cfg.analysis,
        "thresholds": cfg.thresholds,
        "correlation_offset_m": cfg.correlation_offset_m,
        "du": {"inputs": du_inputs, "ratio_limit": cfg.du.ratio_limit},
        "conventions": {
            "measure_values": "stationarity-oriented in [0, 1]; CMD_* columns hold 1 - CMD",
            "std": "population (divides by count)",
            "distance": "offset bins x bin time x scenario mean speed",
        },
        "setup_results": setup_meta,
        "files": files,
    });
    out.insert(PathBuf::from("manifest.json"), json_bytes(&manifest)?);
    Ok(out)
}

/// Writes `artifacts` under `dir`. On failure every file written so far is
/// removed again, as is `dir` if this call created it.
pub fn write_artifacts(dir: &Path, artifacts: &Artifacts) -> Result<()> {
    let created = !dir.exists();
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (rel, bytes) in artifacts {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        Ok(())
    })();
    if result.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        if created {
            let _ = fs::remove_dir_all(dir);
        }
    }
    result
}

/// Full `analyze` verb: compute, then emit into `out` (or the configured
/// output directory).
pub fn run_analyze(cfg: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| Error::Config("no output directory (use --out or output_dir)".into()))?;
    let artifacts = analyze(cfg)?;
    write_artifacts(&dir, &artifacts)?;
    Ok(dir)
}

/// Parameters of the standalone `du-check` verb.
#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuCheckConfig {
    pub v_max: f64,
    pub carrier_freq: f64,
    pub tau_max: f64,
    pub d_stat_min: f64,
    pub w_max: f64,
    #[serde(default = "default_ratio_limit")]
    pub ratio_limit: f64,
}

fn default_ratio_limit() -> f64 {
    lqs_core::lqs::DEFAULT_DU_RATIO_LIMIT
}

pub fn run_du_check(path: &Path) -> Result<(DuReport, Vec<u8>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: DuCheckConfig =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("du-check config: {e}")))?;
    let inputs = lqs_core::DuInputs {
        v_max: cfg.v_max,
        carrier_freq: cfg.carrier_freq,
        tau_max: cfg.tau_max,
        d_stat_min: cfg.d_stat_min,
        w_max: cfg.w_max,
    };
    let report = du_check(inputs, cfg.ratio_limit)?;
    let bytes = json_bytes(&report)?;
    Ok((report, bytes))
}

/// Process exit code for an error: 2 for configuration problems, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_)) => 2,
        _ => 1,
    }
}
