use proptest::prelude::*;
use pvlc_core::channel::{footprint_width, BodyPart, Pattern};
use pvlc_core::codec::{
    decode_trace, decode_vehicle_trace, find_preamble, find_vehicle_preamble, format_code,
};
use pvlc_core::presets::{self, DESK_SPEED_MPS, DESK_WIDTH_M};
use pvlc_core::{DecodeStatus, DecoderConfig, RssTrace, Scenario};

fn leading_offset(s: &Scenario) -> f64 {
    -s.scene.objects[0].start_offset_m
}

#[test]
fn tau_t_matches_width_over_speed() {
    let trace = presets::desk("00").simulate().unwrap();
    let fix = find_preamble(&trace, &DecoderConfig::default()).unwrap();
    let expected = DESK_WIDTH_M / DESK_SPEED_MPS;
    assert!((expected - 0.375).abs() < 1e-12);
    assert!(
        (fix.tau_t - expected).abs() <= 0.05 * expected,
        "tau_t {} vs {expected}",
        fix.tau_t
    );
}

#[test]
fn anchor_times_sit_on_symbol_centers() {
    let s = presets::desk("00");
    let trace = s.simulate().unwrap();
    let fix = find_preamble(&trace, &DecoderConfig::default()).unwrap();
    // Symbol k of the packet is centered under the receiver when the packet
    // has moved lead + (k + 0.5) * width.
    let center = |k: f64| (leading_offset(&s) + (k + 0.5) * DESK_WIDTH_M) / DESK_SPEED_MPS;
    let dt = 1.0 / trace.sampling_rate_hz();
    assert!((fix.t_a - center(0.0)).abs() <= 2.0 * dt);
    assert!((fix.t_b - center(1.0)).abs() <= 2.0 * dt);
    assert!((fix.t_c - center(2.0)).abs() <= 2.0 * dt);
    assert!(fix.r_a > fix.r_b && fix.r_c > fix.r_b);
    assert_eq!(
        fix.tau_r,
        ((fix.r_a - fix.r_b) + (fix.r_c - fix.r_b)) / 2.0
    );
    assert_eq!(
        fix.tau_t,
        ((fix.t_b - fix.t_a) + (fix.t_c - fix.t_b)) / 2.0
    );
}

#[test]
fn desk_traces_decode_published_codes() {
    for (bits, code) in [("00", "HLHL.HLHL"), ("10", "HLHL.LHHL")] {
        let r = decode_trace(
            &presets::desk(bits).simulate().unwrap(),
            &DecoderConfig::default(),
        );
        assert_eq!(r.status, DecodeStatus::Ok);
        assert_eq!(r.bits, bits);
        assert_eq!(format_code(&r.symbols), code);
    }
}

#[test]
fn ripple_from_fluorescent_light_is_smoothed_away() {
    let r = decode_trace(
        &presets::desk_fluorescent("10", 4).simulate().unwrap(),
        &DecoderConfig::default(),
    );
    assert_eq!(r.bits, "10");
}

#[test]
fn speed_doubling_breaks_the_naive_decoder() {
    for seed in 0..20 {
        let trace = presets::speed_change(60.0, seed).simulate().unwrap();
        let r = decode_trace(&trace, &DecoderConfig::default());
        assert_ne!(format_code(&r.symbols), "HLHL.LHHL", "seed {seed}");
        assert!(r.status != DecodeStatus::Ok || r.bits != "10");
    }
}

#[test]
fn constant_trace_has_no_preamble() {
    let t = RssTrace::new(500.0, vec![42.0; 1000]).unwrap();
    assert_eq!(
        decode_trace(&t, &DecoderConfig::default()).status,
        DecodeStatus::PreambleNotFound
    );
}

#[test]
fn vehicle_anchor_lies_on_the_roof() {
    let s = presets::vehicle(Some("00"), presets::well_lit(), 2);
    let trace = s.simulate().unwrap();
    let anchor = find_vehicle_preamble(&trace, &presets::vehicle_decoder()).unwrap();
    let t = anchor as f64 / trace.sampling_rate_hz();

    let Pattern::Vehicle(car) = &s.scene.objects[0].pattern else {
        unreachable!()
    };
    // Hand timeline: the roof's front edge passes under the receiver after
    // the car has moved lead + hood + windshield.
    let before_roof: f64 = car
        .segments
        .iter()
        .take_while(|seg| seg.part != BodyPart::Roof)
        .map(|seg| seg.length_m)
        .sum();
    assert!((before_roof - 1.8).abs() < 1e-12);
    let v = presets::CAR_SPEED_MPS;
    let roof_start = (leading_offset(&s) + before_roof) / v;
    let packet_start = roof_start + presets::ROOF_PACKET_OFFSET_M / v;
    let half_fp = 0.5 * footprint_width(&s.receiver) / v;
    assert!(
        t >= roof_start - half_fp && t < packet_start,
        "anchor {t} s, roof {roof_start} s, packet {packet_start} s"
    );
}

#[test]
fn vehicle_packet_decodes_and_bare_roof_does_not() {
    let cfg = presets::vehicle_decoder();
    let r = decode_vehicle_trace(
        &presets::vehicle(Some("00"), presets::well_lit(), 5)
            .simulate()
            .unwrap(),
        &cfg,
    );
    assert_eq!(r.status, DecodeStatus::Ok);
    assert_eq!(r.bits, "00");
    assert!(r.vehicle_anchor.is_some());

    let r = decode_vehicle_trace(
        &presets::vehicle(None, presets::well_lit(), 5)
            .simulate()
            .unwrap(),
        &cfg,
    );
    assert!(r.vehicle_anchor.is_some());
    assert_eq!(r.status, DecodeStatus::PreambleNotFound);
}

#[test]
fn flat_trace_has_no_vehicle() {
    let t = RssTrace::new(2000.0, vec![7.0; 4000]).unwrap();
    assert_eq!(
        decode_vehicle_trace(&t, &presets::vehicle_decoder()).status,
        DecodeStatus::PreambleNotFound
    );
}

#[test]
fn saturated_detector_is_reported() {
    let s = presets::vehicle(
        Some("00"),
        presets::high_floor(pvlc_core::ReceiverKind::PdG3),
        1,
    );
    let r = decode_vehicle_trace(&s.simulate().unwrap(), &presets::vehicle_decoder());
    assert_eq!(r.status, DecodeStatus::Saturated);
    assert!(r.bits.is_empty());
}

fn duplicate_samples(t: &RssTrace) -> RssTrace {
    let x: Vec<f64> = t.samples().iter().flat_map(|&v| [v, v]).collect();
    RssTrace::new(2.0 * t.sampling_rate_hz(), x).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decoding_ignores_gain_and_offset(
        bits in "[01]{1,6}",
        seed in 0u64..1000,
        alpha in 0.05f64..20.0,
        beta in 0.0f64..500.0,
    ) {
        let trace = presets::desk_noisy(&bits, 20.0, seed).simulate().unwrap();
        let cfg = DecoderConfig::default();
        let base = decode_trace(&trace, &cfg);
        let scaled = decode_trace(&trace.map(|v| alpha * v + beta), &cfg);
        prop_assert_eq!(&base.symbols, &scaled.symbols);
        prop_assert_eq!(base.status, scaled.status);
    }

    #[test]
    fn decoding_survives_2x_resampling(bits in "[01]{1,6}", seed in 0u64..1000) {
        let trace = presets::desk_noisy(&bits, 25.0, seed).simulate().unwrap();
        let cfg = DecoderConfig::default();
        let r1 = decode_trace(&trace, &cfg);
        let r2 = decode_trace(&duplicate_samples(&trace), &cfg);
        prop_assert_eq!(&r1.bits, &bits);
        prop_assert_eq!(&r2.bits, &bits);
    }

    #[test]
    fn ok_results_are_consistent(bits in "[01]{0,8}", seed in 0u64..1000) {
        let r = decode_trace(
            &presets::desk_noisy(&bits, 20.0, seed).simulate().unwrap(),
            &DecoderConfig::default(),
        );
        if r.status == DecodeStatus::Ok {
            prop_assert_eq!(r.bits.len(), r.symbols.len() / 2 - 2);
            prop_assert_eq!(&r.symbols[..4], &pvlc_core::codec::PREAMBLE[..]);
        } else {
            prop_assert!(r.bits.is_empty());
        }
    }
}
