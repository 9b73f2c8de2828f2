//! Preamble-anchored threshold decoding of RSS traces.
//!
//! The first two peaks and the valley between them (points A, B, C) come
//! from the `H L H` start of the preamble. They fix a magnitude threshold
//! `tau_r` and a symbol duration `tau_t` for this packet alone, so no
//! calibration is needed. Symbols after C are read in windows of `tau_t`.

use alloc::string::String;
use alloc::vec::Vec;

use super::{manchester_decode, Symbol, PREAMBLE};
use crate::channel::RssTrace;
use crate::signal::{argmin_in, edge_crossings, min_max, moving_average, prominent_peaks};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct DecoderConfig {
    /// Centered moving-average length in samples (odd).
    pub smoothing_window: usize,
    /// Minimum peak prominence as a fraction of the smoothed trace's range;
    /// also the minimum rise into A as a fraction of `tau_r`.
    pub peak_prominence_frac: f64,
    /// Decision level between the valley floor (0) and the mean peak (1).
    pub decision_level_frac: f64,
    /// Minimum duration of the hood plateau and windshield valley.
    pub min_preamble_seconds: f64,
    /// A sample at or above this fraction of the ceiling counts as saturated.
    pub saturation_frac: f64,
    /// The trace is reported saturated when more than this fraction of
    /// samples are saturated.
    pub saturated_sample_frac: f64,
    /// Fraction of `tau_t` trimmed from each side of a symbol window.
    pub window_guard_frac: f64,
    /// Accepted relative deviation of the A/B/C extents from `tau_t`.
    pub extent_tolerance: f64,
    /// Payload length when known; otherwise the end of the packet is found
    /// from the signal.
    pub expected_bits: Option<usize>,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            smoothing_window: 5,
            peak_prominence_frac: 0.25,
            decision_level_frac: 0.5,
            min_preamble_seconds: 0.1,
            saturation_frac: 0.98,
            saturated_sample_frac: 0.10,
            window_guard_frac: 0.25,
            extent_tolerance: 0.5,
            expected_bits: None,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        let open = |v: f64| v > 0.0 && v < 1.0;
        if self.smoothing_window == 0 || self.smoothing_window.is_multiple_of(2) {
            return Err("smoothing_window must be odd and >= 1");
        }
        if !open(self.peak_prominence_frac) {
            return Err("peak_prominence_frac must lie in (0, 1)");
        }
        if !open(self.decision_level_frac) {
            return Err("decision_level_frac must lie in (0, 1)");
        }
        if !(self.min_preamble_seconds > 0.0) {
            return Err("min_preamble_seconds must be > 0");
        }
        if !(self.saturation_frac > 0.0 && self.saturation_frac <= 1.0) {
            return Err("saturation_frac must lie in (0, 1]");
        }
        if !open(self.saturated_sample_frac) {
            return Err("saturated_sample_frac must lie in (0, 1)");
        }
        if !(self.window_guard_frac >= 0.0 && self.window_guard_frac < 0.5) {
            return Err("window_guard_frac must lie in [0, 0.5)");
        }
        if !open(self.extent_tolerance) {
            return Err("extent_tolerance must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn with_expected_bits(mut self, n: usize) -> Self {
        self.expected_bits = Some(n);
        self
    }
}

/// Anchor points A (first peak), B (first valley), C (second peak).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PreambleFix {
    pub idx_a: usize,
    pub idx_b: usize,
    pub idx_c: usize,
    pub r_a: f64,
    pub r_b: f64,
    pub r_c: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub t_c: f64,
    pub tau_r: f64,
    pub tau_t: f64,
}

impl PreambleFix {
    pub fn from_points(idx: [usize; 3], r: [f64; 3], t: [f64; 3]) -> Self {
        let [r_a, r_b, r_c] = r;
        let [t_a, t_b, t_c] = t;
        Self {
            idx_a: idx[0],
            idx_b: idx[1],
            idx_c: idx[2],
            r_a,
            r_b,
            r_c,
            t_a,
            t_b,
            t_c,
            tau_r: ((r_a - r_b) + (r_c - r_b)) / 2.0,
            tau_t: ((t_b - t_a) + (t_c - t_b)) / 2.0,
        }
    }

    /// Level a symbol window's maximum must exceed to read HIGH.
    pub fn decision_level(&self, frac: f64) -> f64 {
        self.r_b + frac * self.tau_r
    }

    fn shifted(mut self, samples: usize, seconds: f64) -> Self {
        self.idx_a += samples;
        self.idx_b += samples;
        self.idx_c += samples;
        self.t_a += seconds;
        self.t_b += seconds;
        self.t_c += seconds;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DecodeStatus {
    Ok,
    PreambleNotFound,
    ManchesterViolation,
    Saturated,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecodeResult {
    pub status: DecodeStatus,
    /// Preamble plus every symbol read, also on failure when available.
    pub symbols: Vec<Symbol>,
    /// Empty unless `status` is `Ok`.
    pub bits: String,
    pub preamble: Option<PreambleFix>,
    pub vehicle_anchor: Option<usize>,
}

impl DecodeResult {
    fn failed(status: DecodeStatus) -> Self {
        Self {
            status,
            symbols: Vec::new(),
            bits: String::new(),
            preamble: None,
            vehicle_anchor: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == DecodeStatus::Ok
    }
}

fn is_saturated(trace: &RssTrace, cfg: &DecoderConfig) -> bool {
    let Some(ceiling) = trace.meta.saturation_ceiling else {
        return false;
    };
    let limit = cfg.saturation_frac * ceiling;
    let hits = trace.samples().iter().filter(|&&v| v >= limit).count();
    hits as f64 > cfg.saturated_sample_frac * trace.len() as f64
}

fn has_range(lo: f64, hi: f64) -> bool {
    let range = hi - lo;
    range > 0.0 && range > 1e-12 * lo.abs().max(hi.abs())
}

/// Locates A, B, C on the smoothed trace.
///
/// A and C are consecutive peaks whose prominence is at least
/// `peak_prominence_frac` of the smoothed range, B the lowest sample between
/// them. Each point's time is the center of its extent, where every edge is
/// taken at the midpoint of the transition it belongs to; for a symmetric
/// footprint that midpoint is the symbol boundary. The extents must be
/// within `extent_tolerance` of `tau_t`, and A must rise above the lowest
/// level in the two symbols before it by `peak_prominence_frac * tau_r`.
/// The first triple passing these checks wins.
///
/// Panics if `cfg` fails [`DecoderConfig::validate`].
pub fn find_preamble(trace: &RssTrace, cfg: &DecoderConfig) -> Result<PreambleFix, DecodeStatus> {
    check_config(cfg);
    locate(trace, cfg, None).map(|(fix, _)| fix)
}

fn check_config(cfg: &DecoderConfig) {
    if let Err(e) = cfg.validate() {
        panic!("invalid decoder config: {e}");
    }
}

fn locate(
    trace: &RssTrace,
    cfg: &DecoderConfig,
    max_tau_t: Option<f64>,
) -> Result<(PreambleFix, Vec<f64>), DecodeStatus> {
    if trace.is_empty() {
        return Err(DecodeStatus::PreambleNotFound);
    }
    if is_saturated(trace, cfg) {
        return Err(DecodeStatus::Saturated);
    }
    let s = moving_average(trace.samples(), cfg.smoothing_window);
    let (lo, hi) = min_max(&s);
    if !has_range(lo, hi) {
        return Err(DecodeStatus::PreambleNotFound);
    }
    let floor = cfg.peak_prominence_frac * (hi - lo);
    let peaks = prominent_peaks(&s, floor);
    let fs = trace.sampling_rate_hz();

    for pair in peaks.windows(2) {
        let (pa, pc) = (pair[0], pair[1]);
        let b = argmin_in(&s, pa.index + 1, pc.index);
        let (r_a, r_b, r_c) = (s[pa.index], s[b], s[pc.index]);
        if r_a - r_b < floor || r_c - r_b < floor {
            continue;
        }
        // Outer neighbours: the lowest level within about two symbols, which
        // reaches past the noisy plateau and the footprint ramp.
        let span = pc.index - pa.index;
        let before_a = min_max(&s[pa.index.saturating_sub(span)..pa.index]).0;
        let after_c = min_max(&s[pc.index + 1..(pc.index + 1 + span).min(s.len())]).0;
        // A has to rise out of what precedes it; a bump on a plateau does not.
        let tau_r = 0.5 * ((r_a - r_b) + (r_c - r_b));
        if r_a - before_a < cfg.peak_prominence_frac * tau_r {
            continue;
        }
        let (mid_ab, mid_bc) = (0.5 * (r_a + r_b), 0.5 * (r_b + r_c));
        let ext_a = edge_crossings(&s, pa.index, 0.5 * (r_a + before_a.min(r_a)), mid_ab, true);
        let ext_b = edge_crossings(&s, b, mid_ab, mid_bc, false);
        let ext_c = edge_crossings(&s, pc.index, mid_bc, 0.5 * (r_c + after_c.min(r_c)), true);
        let center = |e: (f64, f64)| 0.5 * (e.0 + e.1) / fs;
        let fix = PreambleFix::from_points(
            [pa.index, b, pc.index],
            [r_a, r_b, r_c],
            [center(ext_a), center(ext_b), center(ext_c)],
        );
        if !(fix.t_a < fix.t_b && fix.t_b < fix.t_c) {
            continue;
        }
        let tol = cfg.extent_tolerance;
        let plausible = [ext_a, ext_b, ext_c].iter().all(|e| {
            let width = (e.1 - e.0) / fs;
            width >= (1.0 - tol) * fix.tau_t && width <= (1.0 + tol) * fix.tau_t
        });
        if !plausible || max_tau_t.is_some_and(|m| fix.tau_t >= m) {
            continue;
        }
        return Ok((fix, s));
    }
    Err(DecodeStatus::PreambleNotFound)
}

/// Decodes one packet from `trace`.
///
/// Symbol `k` (k = 1 is the last preamble LOW) is read from a window
/// centered on `t_C + k * tau_t`, trimmed by `window_guard_frac * tau_t` on
/// each side, and is HIGH when the window's smoothed maximum exceeds
/// [`PreambleFix::decision_level`]. Without `expected_bits` the packet ends
/// at the first run of three equal symbols, which Manchester data can never
/// produce, or at the end of the trace.
///
/// Panics if `cfg` fails [`DecoderConfig::validate`].
pub fn decode_trace(trace: &RssTrace, cfg: &DecoderConfig) -> DecodeResult {
    check_config(cfg);
    decode_with(trace, cfg, None)
}

fn decode_with(trace: &RssTrace, cfg: &DecoderConfig, max_tau_t: Option<f64>) -> DecodeResult {
    let (fix, s) = match locate(trace, cfg, max_tau_t) {
        Ok(v) => v,
        Err(status) => return DecodeResult::failed(status),
    };
    let fs = trace.sampling_rate_hz();
    let level = fix.decision_level(cfg.decision_level_frac);
    let half = fix.tau_t * (0.5 - cfg.window_guard_frac);
    let last_t = (s.len() - 1) as f64 / fs;
    let wanted = cfg.expected_bits.map(|n| PREAMBLE.len() + 2 * n);

    let mut symbols = PREAMBLE[..3].to_vec();
    let mut truncated = false;
    for k in 1.. {
        if wanted.is_some_and(|w| symbols.len() >= w) {
            break;
        }
        let center = fix.t_c + k as f64 * fix.tau_t;
        if center + half > last_t {
            truncated = wanted.is_some();
            if wanted.is_none() {
                close_at_trace_end(&mut symbols);
            }
            break;
        }
        let lo = libm::ceil((center - half) * fs) as usize;
        let hi = libm::floor((center + half) * fs) as usize;
        let peak = if lo > hi {
            s[libm::round(center * fs) as usize]
        } else {
            s[lo..=hi].iter().copied().fold(f64::NEG_INFINITY, f64::max)
        };
        symbols.push(if peak > level { Symbol::High } else { Symbol::Low });

        if wanted.is_none() && ends_with_run(&symbols) {
            symbols.truncate(symbols.len() - 3);
            // The symbol before the run differs from it, so at most one run
            // symbol can still belong to the packet; an even total decides.
            if symbols.len() % 2 == 1 {
                symbols.push(symbols[symbols.len() - 1].flip());
            }
            break;
        }
    }

    let mut result = DecodeResult {
        status: DecodeStatus::Ok,
        symbols,
        bits: String::new(),
        preamble: Some(fix),
        vehicle_anchor: None,
    };
    if result.symbols.len() < PREAMBLE.len() || result.symbols[..4] != PREAMBLE {
        result.status = DecodeStatus::PreambleNotFound;
        return result;
    }
    if truncated {
        result.status = DecodeStatus::ManchesterViolation;
        return result;
    }
    match manchester_decode(&result.symbols[PREAMBLE.len()..]) {
        Ok(bits) => result.bits = bits,
        Err(_) => result.status = DecodeStatus::ManchesterViolation,
    }
    result
}

/// The trace ran out before a closing run of three: a trailing run of two
/// is ground past the packet and is dropped like a full run, then an odd
/// leftover symbol is dropped too.
fn close_at_trace_end(symbols: &mut Vec<Symbol>) {
    let n = symbols.len();
    if n > PREAMBLE.len() + 1 && symbols[n - 1] == symbols[n - 2] {
        symbols.truncate(n - 2);
        if symbols.len() % 2 == 1 {
            symbols.push(symbols[symbols.len() - 1].flip());
        }
    } else if n % 2 == 1 {
        symbols.pop();
    }
}

fn ends_with_run(symbols: &[Symbol]) -> bool {
    let n = symbols.len();
    n >= 3 && symbols[n - 1] == symbols[n - 2] && symbols[n - 2] == symbols[n - 3]
}

impl Symbol {
    pub fn flip(self) -> Symbol {
        match self {
            Symbol::High => Symbol::Low,
            Symbol::Low => Symbol::High,
        }
    }
}

/// Finds where a car's roof starts from its optical signature: a bright
/// plateau (hood) lasting at least `min_preamble_seconds` followed by a dark
/// stretch (windshield) of at least the same duration.
///
/// The trace is smoothed over a quarter of `min_preamble_seconds` so that
/// packet symbols blur into their mean, then split at the midpoint of its
/// range. Returns the first sample of the roof.
///
/// Panics if `cfg` fails [`DecoderConfig::validate`].
pub fn find_vehicle_preamble(trace: &RssTrace, cfg: &DecoderConfig) -> Result<usize, DecodeStatus> {
    check_config(cfg);
    if trace.is_empty() {
        return Err(DecodeStatus::PreambleNotFound);
    }
    let fs = trace.sampling_rate_hz();
    let mut window = libm::round(cfg.min_preamble_seconds * fs / 4.0) as usize;
    window = window.max(cfg.smoothing_window) | 1;
    let s = moving_average(trace.samples(), window);
    let (lo, hi) = min_max(&s);
    if !has_range(lo, hi) {
        return Err(DecodeStatus::PreambleNotFound);
    }
    let threshold = lo + 0.5 * (hi - lo);

    // (bright, start, end_exclusive)
    let mut runs: Vec<(bool, usize, usize)> = Vec::new();
    for (i, &v) in s.iter().enumerate() {
        let bright = v > threshold;
        match runs.last_mut() {
            Some(r) if r.0 == bright => r.2 = i + 1,
            _ => runs.push((bright, i, i + 1)),
        }
    }
    let long = |r: &(bool, usize, usize)| (r.2 - r.1) as f64 / fs >= cfg.min_preamble_seconds;
    runs.windows(3)
        .find(|w| w[0].0 && long(&w[0]) && !w[1].0 && long(&w[1]))
        .map(|w| w[2].1)
        .ok_or(DecodeStatus::PreambleNotFound)
}

/// Two-phase decoding for packets on cars: find the roof with
/// [`find_vehicle_preamble`], then decode from there. Preamble fixes whose
/// `tau_t` reaches `min_preamble_seconds` are car body structure, not
/// packet symbols, and are skipped.
pub fn decode_vehicle_trace(trace: &RssTrace, cfg: &DecoderConfig) -> DecodeResult {
    check_config(cfg);
    if is_saturated(trace, cfg) {
        return DecodeResult::failed(DecodeStatus::Saturated);
    }
    let anchor = match find_vehicle_preamble(trace, cfg) {
        Ok(a) => a,
        Err(status) => return DecodeResult::failed(status),
    };
    let mut result = decode_with(
        &trace.slice_from(anchor),
        cfg,
        Some(cfg.min_preamble_seconds),
    );
    let offset_s = anchor as f64 / trace.sampling_rate_hz();
    result.preamble = result.preamble.map(|p| p.shifted(anchor, offset_s));
    result.vehicle_anchor = Some(anchor);
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use Symbol::{High as H, Low as L};

    /// Ideal two-level trace: `per` samples per symbol, `lead` LOW samples
    /// before and after.
    fn square(symbols: &[Symbol], per: usize, lead: usize) -> RssTrace {
        let mut v = vec![0.1; lead];
        for s in symbols {
            let level = if *s == H { 1.0 } else { 0.1 };
            v.extend(std::iter::repeat_n(level, per));
        }
        v.extend(std::iter::repeat_n(0.1, lead));
        RssTrace::new(100.0, v).unwrap()
    }

    #[test]
    fn threshold_formulas() {
        let fix = PreambleFix::from_points([0, 10, 20], [1.0, 0.2, 0.9], [0.0, 0.1, 0.2]);
        assert_eq!(fix.tau_r, 0.75);
        assert_eq!(fix.tau_t, 0.1);
        assert!((fix.decision_level(0.5) - 0.575).abs() < 1e-15);
    }

    #[test]
    fn constant_trace_has_no_preamble() {
        let t = RssTrace::new(100.0, vec![3.0; 500]).unwrap();
        assert_eq!(
            find_preamble(&t, &DecoderConfig::default()),
            Err(DecodeStatus::PreambleNotFound)
        );
        let r = decode_trace(&t, &DecoderConfig::default());
        assert_eq!(r.status, DecodeStatus::PreambleNotFound);
        assert!(r.bits.is_empty());
    }

    #[test]
    fn square_wave_decodes_both_published_codes() {
        for (bits, syms) in [("00", [H, L, H, L]), ("10", [L, H, H, L])] {
            let mut all = PREAMBLE.to_vec();
            all.extend(syms);
            let r = decode_trace(&square(&all, 20, 50), &DecoderConfig::default());
            assert_eq!(r.status, DecodeStatus::Ok, "{bits}");
            assert_eq!(r.bits, bits);
            let fix = r.preamble.unwrap();
            assert!((fix.tau_t - 0.2).abs() < 0.011);
        }
    }

    #[test]
    fn packet_ending_on_high_is_closed_correctly() {
        // "01" -> HL LH, ends on H then LOW ground.
        let all = [H, L, H, L, H, L, L, H];
        let r = decode_trace(&square(&all, 20, 80), &DecoderConfig::default());
        assert_eq!(r.bits, "01");
    }

    #[test]
    fn trace_ending_just_after_the_packet() {
        // Leading ground, "10" = LH HL, then two LOW ground symbols.
        let all = [L, H, L, H, L, L, H, H, L, L, L];
        let r = decode_trace(&square(&all, 20, 0), &DecoderConfig::default());
        assert_eq!(r.bits, "10");
        // "01" = HL LH, one ground symbol.
        let all = [L, H, L, H, L, H, L, L, H, L];
        let r = decode_trace(&square(&all, 20, 0), &DecoderConfig::default());
        assert_eq!(r.bits, "01");
    }

    #[test]
    fn expected_length_stops_early() {
        let all = [H, L, H, L, H, L, L, H];
        let cfg = DecoderConfig::default().with_expected_bits(1);
        let r = decode_trace(&square(&all, 20, 80), &cfg);
        assert_eq!(r.bits, "0");
        let cfg = DecoderConfig::default().with_expected_bits(40);
        let r = decode_trace(&square(&all, 20, 10), &cfg);
        assert_eq!(r.status, DecodeStatus::ManchesterViolation);
        assert!(r.bits.is_empty());
    }

    #[test]
    fn saturation_is_reported() {
        let mut t = RssTrace::new(100.0, vec![5.0; 200]).unwrap();
        t.meta.saturation_ceiling = Some(5.0);
        let r = decode_trace(&t, &DecoderConfig::default());
        assert_eq!(r.status, DecodeStatus::Saturated);
    }

    #[test]
    fn uneven_extents_are_rejected() {
        // Peaks one symbol wide but the valley four symbols wide: tau_t is
        // 2.5 symbols, so the peaks are 60% short.
        let all = [H, L, L, L, L, H, L];
        let r = find_preamble(&square(&all, 20, 50), &DecoderConfig::default());
        assert_eq!(r, Err(DecodeStatus::PreambleNotFound));
    }

    #[test]
    #[should_panic(expected = "smoothing_window")]
    fn even_smoothing_window_panics() {
        let cfg = DecoderConfig {
            smoothing_window: 4,
            ..DecoderConfig::default()
        };
        let _ = decode_trace(&square(&PREAMBLE, 10, 10), &cfg);
    }

    #[test]
    fn flat_trace_has_no_vehicle() {
        let t = RssTrace::new(1000.0, vec![1.0; 3000]).unwrap();
        assert_eq!(
            find_vehicle_preamble(&t, &DecoderConfig::default()),
            Err(DecodeStatus::PreambleNotFound)
        );
    }
}
