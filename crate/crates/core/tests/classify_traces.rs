use proptest::prelude::*;
use pvlc_core::classify::{build_codebook, classify_trace, dtw_distance, prepare, Template};
use pvlc_core::presets;

fn templates() -> Vec<Template> {
    ["00", "10"]
        .iter()
        .map(|b| Template::new(*b, presets::speed_template(b).simulate().unwrap()).unwrap())
        .collect()
}

#[test]
fn template_is_its_own_nearest_neighbour() {
    let ts = templates();
    for t in &ts {
        let r = classify_trace(&t.trace, &ts).unwrap();
        assert_eq!(r.best_label, t.label);
        assert_eq!(r.distances[&t.label], 0.0);
        assert!(r.distances.values().all(|&d| d >= 0.0));
    }
}

#[test]
fn speed_change_trace_orders_like_the_measurements() {
    // Self < matching template < other template.
    let ts = templates();
    let trace = presets::speed_change(30.0, 3).simulate().unwrap();
    let r = classify_trace(&trace, &ts).unwrap();
    let x = prepare(&trace, 256).unwrap();
    let self_d = dtw_distance(&x, &x).unwrap();
    assert_eq!(self_d, 0.0);
    assert!(self_d < r.distances["10"]);
    assert!(r.distances["10"] < r.distances["00"]);
    assert_eq!(r.best_label, "10");
    assert!(r.margin > 1.0);
}

#[test]
fn noisy_copies_of_each_template_classify_correctly() {
    let ts = templates();
    for bits in ["00", "10"] {
        for seed in 0..10 {
            let mut s = presets::speed_template(bits);
            s.noise = s
                .noise
                .with_sigma(pvlc_core::NoiseModel::sigma_for_snr(presets::desk_swing(), 20.0))
                .with_seed(seed);
            let r = classify_trace(&s.simulate().unwrap(), &ts).unwrap();
            assert_eq!(r.best_label, bits, "seed {seed}");
        }
    }
}

#[test]
fn codebook_is_deterministic() {
    let a = build_codebook(8, 6).unwrap();
    let b = build_codebook(8, 6).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.pairwise_min(), a.min_hamming);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn label_survives_affine_maps(seed in 0u64..500, alpha in 0.01f64..100.0, beta in -1e3f64..1e3) {
        let ts = templates();
        let trace = presets::speed_change(15.0, seed).simulate().unwrap();
        let a = classify_trace(&trace, &ts).unwrap();
        let b = classify_trace(&trace.map(|v| alpha * v + beta), &ts).unwrap();
        prop_assert_eq!(a.best_label, b.best_label);
        for (k, d) in &a.distances {
            prop_assert!((d - b.distances[k]).abs() <= 1e-9 * (1.0 + d));
        }
    }
}
