use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lqs_core::measures::{approx_relative_mse, cmd, exact_relative_mse, estimate_corr_track, CorrSide};
use lqs_core::spectral::{dpss, estimate_glsf};
use lqs_core::{
    analyze_setup, AnalysisConfig, ChannelTensor, DpssBank, EstimatorConfig, GlsfParams, Polarization, SamplingGrid,
    ScattererCluster, SteeringModel, SubArraySelection,
};

fn channel(n_time: usize, n_freq: usize, n_ant: usize) -> ChannelTensor {
    let grid = SamplingGrid::uniform(1e-3, 78_125.0, 2.53e9, n_time, n_freq, 1.0);
    let clusters = [
        ScattererCluster { doppler_spread_hz: 20.0, ..ScattererCluster::new(30.0, 1e-6, 1.0) },
        ScattererCluster::new(-80.0, 4e-6, 0.3).alive(n_time / 4, 3 * n_time / 4),
        ScattererCluster::new(120.0, 9e-6, 0.1),
    ];
    let steering = SteeringModel::ula(n_ant, n_ant, 0.5, vec![0.2, 1.0, 2.4], vec![1.7, -0.3, 0.9]);
    let pols = vec![Polarization::V; n_ant];
    lqs_core::synth::generate(&clusters, &steering, &grid, &pols, &pols, 1).unwrap()
}

fn bench_dpss(c: &mut Criterion) {
    let mut g = c.benchmark_group("dpss");
    for len in [32, 128, 512] {
        g.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, &len| {
            b.iter(|| dpss(black_box(len), 2.0, 2).unwrap())
        });
    }
    g.finish();
}

fn bench_glsf(c: &mut Criterion) {
    let t = channel(512, 512, 1);
    let bank = DpssBank::new(32, 128, 2.0, 2, 2).unwrap();
    let params = GlsfParams { doppler_bins: 63, delay_bins: 255, stride_time: 16, stride_freq: 64 };
    c.bench_function("glsf 512x512", |b| b.iter(|| estimate_glsf(black_box(&t), 0, 0, &bank, &params).unwrap()));
}

fn bench_measures(c: &mut Criterion) {
    let t = channel(64, 64, 4);
    let track = estimate_corr_track(&t, CorrSide::Full, 16, 64).unwrap();
    let (ra, rb) = (track.get(0, 0).clone(), track.get(3, 0).clone());
    c.bench_function("cmd 16x16", |b| b.iter(|| cmd(black_box(&ra), black_box(&rb)).unwrap()));

    let psd_a: Vec<f64> = (0..63).map(|i| (-((i as f64 - 31.0) / 6.0).powi(2)).exp()).collect();
    let psd_b: Vec<f64> = (0..63).map(|i| (-((i as f64 - 36.0) / 9.0).powi(2)).exp()).collect();
    let mut g = c.benchmark_group("relative mse");
    for n in [30, 120] {
        let cfg = EstimatorConfig::from_db(10.0, 1, n);
        g.bench_with_input(BenchmarkId::new("approx", n), &cfg, |b, cfg| {
            b.iter(|| approx_relative_mse(&psd_a, &psd_b, cfg, 1000.0).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("exact", n), &cfg, |b, cfg| {
            b.iter(|| exact_relative_mse(&psd_a, &psd_b, cfg, 1000.0).unwrap())
        });
    }
    g.finish();
}

fn bench_pipeline(c: &mut Criterion) {
    let t = channel(512, 256, 2);
    let cfg = AnalysisConfig { max_distance_m: 1.0, ..AnalysisConfig::default() };
    let sel = SubArraySelection::full("full", 2, 2);
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    g.bench_function("analyze 512x256 2x2", |b| b.iter(|| analyze_setup(black_box(&t), &sel, &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, bench_dpss, bench_glsf, bench_measures, bench_pipeline);
criterion_main!(benches);
