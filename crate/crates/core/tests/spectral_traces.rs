use pvlc_core::codec::decode_trace;
use pvlc_core::presets::{
    self, alternating_fundamental_hz, CollisionCase, COLLISION_FFT_LEN, COLLISION_HIGH_WIDTH_M,
    COLLISION_LOW_WIDTH_M, COLLISION_SPEED_MPS,
};
use pvlc_core::spectral::{
    analyze_collision, compute_spectrum, detect_peaks, fft_len_for, CollisionConfig,
    CollisionKind, SpectralPeak,
};
use pvlc_core::{DecoderConfig, NoiseModel};

fn within_one_bin(p: &SpectralPeak, hz: f64, bin_hz: f64) -> bool {
    (p.frequency_hz - hz).abs() <= bin_hz
}

#[test]
fn alternating_packet_peaks_at_its_fundamental() {
    let mut s = presets::desk("00");
    s.noise = NoiseModel::quiet();
    let t = s.simulate().unwrap();
    let spec = compute_spectrum(&t, fft_len_for(t.len())).unwrap();
    let peaks = detect_peaks(&spec, 0.2);
    let f0 = alternating_fundamental_hz(presets::DESK_SPEED_MPS, presets::DESK_WIDTH_M);
    assert!((f0 - 0.08 / 0.06).abs() < 1e-12);
    assert!(within_one_bin(&peaks.peaks[0], f0, spec.bin_hz));
}

#[test]
fn collision_spectra_and_time_domain_agree() {
    let cfg = CollisionConfig::default();
    let f_low = alternating_fundamental_hz(COLLISION_SPEED_MPS, COLLISION_LOW_WIDTH_M);
    let f_high = alternating_fundamental_hz(COLLISION_SPEED_MPS, COLLISION_HIGH_WIDTH_M);
    assert!((f_low - 2.5).abs() < 1e-12 && (f_high - 10.0).abs() < 1e-12);

    let seeds = 0..40u64;
    let mut decoded = [0usize; 2];
    for seed in seeds.clone() {
        for (i, (case, bits, f_top)) in [
            (CollisionCase::LowDominates, presets::COLLISION_LOW_BITS, f_low),
            (CollisionCase::HighDominates, presets::COLLISION_HIGH_BITS, f_high),
        ]
        .into_iter()
        .enumerate()
        {
            let t = presets::collision(case, Some(20.0), seed).simulate().unwrap();
            let (spec, v) = analyze_collision(&t, COLLISION_FFT_LEN, &cfg).unwrap();
            assert_eq!(v.kind, CollisionKind::SingleDominant, "{case:?} seed {seed}");
            let peaks = &v.details.peaks;
            assert!(within_one_bin(&peaks[0], f_top, spec.bin_hz));
            for p in &peaks[1..] {
                assert!(p.magnitude * cfg.dominance_ratio <= peaks[0].magnitude);
            }
            if decode_trace(&t, &DecoderConfig::default()).bits == bits {
                decoded[i] += 1;
            }
        }
    }
    let n = seeds.count();
    assert!(decoded[0] * 100 >= 95 * n, "case 1 decoded {}/{n}", decoded[0]);
    assert!(decoded[1] * 100 >= 90 * n, "case 2 decoded {}/{n}", decoded[1]);
}

#[test]
fn dominant_slow_packet_adds_only_its_third_harmonic() {
    let f_low = alternating_fundamental_hz(COLLISION_SPEED_MPS, COLLISION_LOW_WIDTH_M);
    let t = presets::collision(CollisionCase::LowDominates, None, 0)
        .simulate()
        .unwrap();
    let (spec, v) = analyze_collision(&t, COLLISION_FFT_LEN, &CollisionConfig::default()).unwrap();
    let hz: Vec<f64> = v.details.peaks.iter().map(|p| p.frequency_hz).collect();
    assert_eq!(hz.len(), 2, "{hz:?}");
    assert!((hz[0] - f_low).abs() <= spec.bin_hz);
    assert!((hz[1] - 3.0 * f_low).abs() <= spec.bin_hz);
}

#[test]
fn equal_shares_show_both_fundamentals() {
    let cfg = CollisionConfig::default();
    let f_low = alternating_fundamental_hz(COLLISION_SPEED_MPS, COLLISION_LOW_WIDTH_M);
    let f_high = alternating_fundamental_hz(COLLISION_SPEED_MPS, COLLISION_HIGH_WIDTH_M);
    for seed in 0..40 {
        let t = presets::collision(CollisionCase::EqualShare, Some(15.0), seed)
            .simulate()
            .unwrap();
        let (spec, v) = analyze_collision(&t, COLLISION_FFT_LEN, &cfg).unwrap();
        assert_eq!(v.kind, CollisionKind::TwoObjects, "seed {seed}");
        let top2 = &v.details.peaks[..2];
        assert!(top2.iter().any(|p| within_one_bin(p, f_low, spec.bin_hz)));
        assert!(top2.iter().any(|p| within_one_bin(p, f_high, spec.bin_hz)));
    }
}
