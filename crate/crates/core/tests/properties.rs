use std::f64::consts::PI;

use lqs_core::channel::{apply_phase_offsets, decode_container, encode_container};
use lqs_core::linalg::{hermitian_eigen, CMatrix, CVector};
use lqs_core::measures::{
    approx_relative_mse, cmd, cmd_algorithmic_decomposition, collinearity_psd, estimate_corr_track, exact_relative_mse,
    relative_snr, CorrSide,
};
use lqs_core::{
    average_measure, extract_lqs, ChannelTensor, Error, EstimatorConfig, MeasureCurve, MeasureKind, MeasurePair,
    PhaseOffsets, Polarization, SamplingGrid,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn vector(n: usize) -> impl Strategy<Value = CVector> {
    prop::collection::vec(complex(), n).prop_map(move |v| CVector::from_vec(v))
}

/// Random Hermitian PSD matrix of full rank with probability one.
fn psd(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(complex(), n * (n + 1)).prop_map(move |v| {
        let g = CMatrix::from_vec(n, n + 1, v);
        &g * g.adjoint()
    })
}

fn psd_pair() -> impl Strategy<Value = (CMatrix, CMatrix)> {
    (2usize..6).prop_flat_map(|n| (psd(n), psd(n)))
}

fn phases(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..2.0 * PI, n)
}

fn rotate(r: &CMatrix, phases: &[f64]) -> CMatrix {
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        phases.len(),
        phases.iter().map(|&p| Complex64::from_polar(1.0, p)),
    ));
    &d * r * d.adjoint()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cmd_is_symmetric_and_bounded((ra, rb) in psd_pair()) {
        let ab = cmd(&ra, &rb).unwrap();
        prop_assert!((ab - cmd(&rb, &ra).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((cmd(&ra, &ra).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn matrix_measures_scale_invariant((ra, rb) in psd_pair(), a in 0.01..100.0f64, b in 0.01..100.0f64) {
        let (sa, sb) = (&ra * Complex64::new(a, 0.0), &rb * Complex64::new(b, 0.0));
        prop_assert!((cmd(&ra, &rb).unwrap() - cmd(&sa, &sb).unwrap()).abs() < 1e-10);
        prop_assert!((relative_snr(&ra, &rb).unwrap() - relative_snr(&sa, &sb).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn matrix_measures_phase_invariant(((ra, rb), p) in psd_pair().prop_flat_map(|(a, b)| {
        let n = a.nrows();
        (Just((a, b)), phases(n))
    })) {
        let (ra2, rb2) = (rotate(&ra, &p), rotate(&rb, &p));
        prop_assert!((cmd(&ra, &rb).unwrap() - cmd(&ra2, &rb2).unwrap()).abs() < 1e-10);
        prop_assert!((relative_snr(&ra, &rb).unwrap() - relative_snr(&ra2, &rb2).unwrap()).abs() < 1e-10);
        let d1 = cmd_algorithmic_decomposition(&ra, &rb).unwrap().value;
        let d2 = cmd_algorithmic_decomposition(&ra2, &rb2).unwrap().value;
        prop_assert!((d1 - d2).abs() < 1e-10);
    }

    #[test]
    fn decomposition_equals_cmd((ra, rb) in psd_pair()) {
        let d = cmd_algorithmic_decomposition(&ra, &rb).unwrap();
        prop_assert!((d.value - cmd(&ra, &rb).unwrap()).abs() < 1e-10);
        prop_assert_eq!(d.streams.len(), ra.nrows());
    }

    #[test]
    fn rank_one_cmd_equals_snr((a, b) in (2usize..8).prop_flat_map(|n| (vector(n), vector(n)))) {
        prop_assume!(a.norm() > 1e-3 && b.norm() > 1e-3);
        let (ra, rb) = (&a * a.adjoint(), &b * b.adjoint());
        prop_assert!((cmd(&ra, &rb).unwrap() - relative_snr(&ra, &rb).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn snr_bounded_and_matched((ra, rb) in psd_pair()) {
        let v = relative_snr(&ra, &rb).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!((relative_snr(&ra, &ra).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn collinearity_symmetric(a in prop::collection::vec(0.0..5.0f64, 16), b in prop::collection::vec(0.0..5.0f64, 16)) {
        prop_assume!(a.iter().any(|&x| x > 0.0) && b.iter().any(|&x| x > 0.0));
        let ab = collinearity_psd(&a, &b).unwrap();
        prop_assert!((ab - collinearity_psd(&b, &a).unwrap()).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn mse_measures_bounded(
        a in prop::collection::vec(0.0..1.0f64, 21),
        b in prop::collection::vec(0.0..1.0f64, 21),
        gamma_db in -5.0..30.0f64,
    ) {
        prop_assume!(a.iter().any(|&x| x > 1e-6));
        let cfg = EstimatorConfig::from_db(gamma_db, 1, 12);
        for f in [approx_relative_mse, exact_relative_mse] {
            let v = f(&a, &b, &cfg, 100.0).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!((f(&a, &a, &cfg, 100.0).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn thresholds_nest(avg in prop::collection::vec(0.0..1.0f64, 1..30), th1 in 0.0..1.0f64, th2 in 0.0..1.0f64) {
        let n = avg.len() as i64;
        let half = n / 2;
        let mut avg = avg;
        avg[half as usize] = 1.0;
        let curve = MeasureCurve {
            kind: MeasureKind::ColDelay,
            scenario_id: "p".into(),
            offsets: (-half..n - half).collect(),
            std: vec![0.0; avg.len()],
            count: vec![1; avg.len()],
            avg,
        };
        let size = |th: f64| match extract_lqs(&curve, th, 1.0, 1.0) {
            Ok(r) => r.set_size,
            Err(Error::DegenerateThreshold { .. }) => 0,
            Err(e) => panic!("{e}"),
        };
        let (lo, hi) = if th1 <= th2 { (th1, th2) } else { (th2, th1) };
        prop_assert!(size(hi) <= size(lo));
    }

    #[test]
    fn average_ignores_pair_order(values in prop::collection::vec(0.0..1.0f64, 2..40), seed in any::<u64>()) {
        let pairs: Vec<MeasurePair> = values
            .iter()
            .enumerate()
            .map(|(i, &value)| MeasurePair { kind: MeasureKind::SnrRx, m: i / 3, m_prime: i / 3 + i % 3, value })
            .collect();
        let mut shuffled = pairs.clone();
        let mut state = seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let a = average_measure(&pairs, -3..=3, "s").unwrap();
        let b = average_measure(&shuffled, -3..=3, "s").unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn container_round_trip(
        dims in (1usize..5, 1usize..5, 1usize..3, 1usize..3),
        seed in any::<u32>(),
        speed in 0.0..30.0f64,
    ) {
        let (nt, nf, nr, nx) = dims;
        let grid = SamplingGrid::uniform(2.5e-3, 78_125.0, 2.53e9, nt, nf, speed);
        let len = nt * nf * nr * nx;
        // values representable in f32 survive the round trip exactly
        let samples = (0..len)
            .map(|i| {
                let x = ((i as u32).wrapping_mul(2654435761).wrapping_add(seed) % 2001) as f32 / 1000.0 - 1.0;
                Complex64::new(x as f64, (-x * 0.5) as f64)
            })
            .collect();
        let pol_rx = (0..nr).map(|k| if k % 2 == 0 { Polarization::V } else { Polarization::H }).collect();
        let t = ChannelTensor::new(grid, nr, nx, pol_rx, vec![Polarization::H; nx], samples).unwrap();
        let bytes = encode_container(&t).unwrap();
        let back = decode_container(&bytes).unwrap();
        prop_assert_eq!(encode_container(&back).unwrap(), bytes);
        prop_assert_eq!(back.samples(), t.samples());
        prop_assert_eq!(back.pol_rx, t.pol_rx);
    }

    #[test]
    fn corr_tracks_hermitian_psd(v in prop::collection::vec(complex(), 4 * 8 * 2 * 3), side in 0usize..3) {
        let grid = SamplingGrid::uniform(1e-3, 1e5, 2.53e9, 4, 8, 1.0);
        let t = ChannelTensor::new(grid, 2, 3, vec![Polarization::V; 2], vec![Polarization::V; 3], v).unwrap();
        let side = [CorrSide::Tx, CorrSide::Rx, CorrSide::Full][side];
        let track = estimate_corr_track(&t, side, 2, 4).unwrap();
        for b in 0..track.time_bins {
            for blk in 0..track.freq_blocks {
                let r = track.get(b, blk);
                prop_assert_eq!(r, &r.adjoint());
                prop_assert!(hermitian_eigen(r).is_ok());
            }
        }
    }

    #[test]
    fn phase_offsets_cancel(v in prop::collection::vec(complex(), 3 * 4 * 2 * 2), p in phases(4)) {
        let grid = SamplingGrid::uniform(1e-3, 1e5, 2.53e9, 3, 4, 1.0);
        let t = ChannelTensor::new(grid, 2, 2, vec![Polarization::V; 2], vec![Polarization::V; 2], v).unwrap();
        let off = PhaseOffsets { tx_phases: p[..2].to_vec(), rx_phases: p[2..].to_vec() };
        let back = apply_phase_offsets(&apply_phase_offsets(&t, &off).unwrap(), &off.negated()).unwrap();
        for (x, y) in back.samples().iter().zip(t.samples()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }
}

#[test]
fn directional_measures_are_asymmetric() {
    let a = CMatrix::from_diagonal(&CVector::from_vec(vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]));
    let b = CMatrix::from_diagonal(&CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)]));
    assert!((relative_snr(&a, &b).unwrap() - relative_snr(&b, &a).unwrap()).abs() > 0.1);

    let cfg = EstimatorConfig::from_db(10.0, 1, 16);
    let x = [0.0, 0.1, 1.0, 0.1, 0.0, 0.0, 0.0];
    let y = [0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2];
    for f in [approx_relative_mse, exact_relative_mse] {
        assert!((f(&x, &y, &cfg, 100.0).unwrap() - f(&y, &x, &cfg, 100.0).unwrap()).abs() > 1e-3);
    }
}
