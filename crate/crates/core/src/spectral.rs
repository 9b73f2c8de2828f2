//! Frequency-domain view of RSS traces and two-object collision detection.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::channel::RssTrace;
use crate::fft::{fft_in_place, Complex};
use crate::signal::{local_maxima, prominence};

/// Smallest accepted FFT length.
pub const MIN_FFT_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Window {
    #[default]
    Hann,
    Rect,
}

impl Window {
    fn coefficient(self, i: usize, n: usize) -> f64 {
        match self {
            Window::Rect => 1.0,
            Window::Hann if n < 2 => 1.0,
            Window::Hann => 0.5 - 0.5 * libm::cos(2.0 * PI * i as f64 / (n - 1) as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralError {
    /// FFT length not a power of two or below [`MIN_FFT_LEN`].
    InvalidFftLength(usize),
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::InvalidFftLength(n) => write!(
                f,
                "fft length {n} must be a power of two and at least {MIN_FFT_LEN}"
            ),
        }
    }
}

impl core::error::Error for SpectralError {}

/// One-sided magnitude spectrum, `|X_k|` for `k = 0..=fft_len/2`, unscaled.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Spectrum {
    pub bin_hz: f64,
    pub magnitudes: Vec<f64>,
    pub window: Window,
    pub fft_len: usize,
}

impl Spectrum {
    pub fn frequency_of(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_hz
    }

    /// Bin nearest to `hz`.
    pub fn bin_of(&self, hz: f64) -> usize {
        libm::round(hz / self.bin_hz) as usize
    }

    /// Time-domain energy of the windowed, padded input, recovered from the
    /// one-sided spectrum.
    pub fn parseval_energy(&self) -> f64 {
        let last = self.magnitudes.len() - 1;
        let sum: f64 = self
            .magnitudes
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let w = if k == 0 || k == last { 1.0 } else { 2.0 };
                w * m * m
            })
            .sum();
        sum / self.fft_len as f64
    }
}

/// The samples actually transformed: the first `fft_len` samples of the
/// trace, mean removed, windowed, then zero-padded to `fft_len`.
pub fn windowed_input(trace: &RssTrace, fft_len: usize, window: Window) -> Vec<f64> {
    let x = &trace.samples()[..trace.len().min(fft_len)];
    let mean = if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    };
    let mut out: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v - mean) * window.coefficient(i, x.len()))
        .collect();
    out.resize(fft_len, 0.0);
    out
}

/// Hann-windowed magnitude spectrum. Traces shorter than `fft_len` are
/// zero-padded; longer traces are truncated to their first `fft_len` samples.
pub fn compute_spectrum(trace: &RssTrace, fft_len: usize) -> Result<Spectrum, SpectralError> {
    compute_spectrum_with(trace, fft_len, Window::Hann)
}

pub fn compute_spectrum_with(
    trace: &RssTrace,
    fft_len: usize,
    window: Window,
) -> Result<Spectrum, SpectralError> {
    if fft_len < MIN_FFT_LEN || !fft_len.is_power_of_two() {
        return Err(SpectralError::InvalidFftLength(fft_len));
    }
    let mut buf: Vec<Complex> = windowed_input(trace, fft_len, window)
        .into_iter()
        .map(|re| Complex { re, im: 0.0 })
        .collect();
    fft_in_place(&mut buf);
    Ok(Spectrum {
        bin_hz: trace.sampling_rate_hz() / fft_len as f64,
        magnitudes: buf[..=fft_len / 2].iter().map(|c| c.norm()).collect(),
        window,
        fft_len,
    })
}

/// Smallest power of two, at least [`MIN_FFT_LEN`], covering `len` samples.
pub fn fft_len_for(len: usize) -> usize {
    len.next_power_of_two().max(MIN_FFT_LEN)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralPeak {
    pub bin: usize,
    pub frequency_hz: f64,
    pub magnitude: f64,
    pub prominence: f64,
}

/// Peaks sorted by magnitude, largest first.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeakSet {
    pub peaks: Vec<SpectralPeak>,
    /// Absolute prominence threshold that was applied.
    pub min_prominence: f64,
}

/// Local maxima of the spectrum, DC excluded, whose prominence is at least
/// `min_prominence_frac` of the largest non-DC magnitude.
pub fn detect_peaks(spectrum: &Spectrum, min_prominence_frac: f64) -> PeakSet {
    let mut mags = spectrum.magnitudes.clone();
    if let Some(dc) = mags.first_mut() {
        *dc = 0.0;
    }
    let top = mags.iter().copied().fold(0.0, f64::max);
    let min_prominence = min_prominence_frac * top;
    if top <= 0.0 {
        return PeakSet {
            peaks: Vec::new(),
            min_prominence,
        };
    }
    let mut peaks: Vec<SpectralPeak> = local_maxima(&mags)
        .into_iter()
        .filter_map(|bin| {
            let p = prominence(&mags, bin);
            (p >= min_prominence).then(|| SpectralPeak {
                bin,
                frequency_hz: spectrum.frequency_of(bin),
                magnitude: mags[bin],
                prominence: p,
            })
        })
        .collect();
    peaks.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude).then(a.bin.cmp(&b.bin)));
    PeakSet {
        peaks,
        min_prominence,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CollisionKind {
    SingleDominant,
    TwoObjects,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CollisionVerdict {
    pub kind: CollisionKind,
    pub details: PeakSet,
}

/// Thresholds for [`analyze_collision`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CollisionConfig {
    pub min_prominence_frac: f64,
    pub separation_ratio: f64,
    pub dominance_ratio: f64,
}

impl Default for CollisionConfig {
    fn default() -> Self {
        CollisionConfig {
            min_prominence_frac: 0.2,
            separation_ratio: 1.5,
            dominance_ratio: 2.0,
        }
    }
}

/// Classifies a peak set. One peak, or a top peak at least `dominance_ratio`
/// times the runner-up, is a single dominant object; two comparable peaks
/// whose frequencies differ by at least `separation_ratio` are two objects.
pub fn collision_verdict(
    peaks: &PeakSet,
    separation_ratio: f64,
    dominance_ratio: f64,
) -> CollisionVerdict {
    let kind = match peaks.peaks.as_slice() {
        [] => CollisionKind::Indeterminate,
        [_] => CollisionKind::SingleDominant,
        [first, second, ..] => {
            let (lo, hi) = if first.frequency_hz < second.frequency_hz {
                (first.frequency_hz, second.frequency_hz)
            } else {
                (second.frequency_hz, first.frequency_hz)
            };
            if first.magnitude >= dominance_ratio * second.magnitude {
                CollisionKind::SingleDominant
            } else if lo > 0.0 && hi / lo >= separation_ratio {
                CollisionKind::TwoObjects
            } else {
                CollisionKind::Indeterminate
            }
        }
    };
    CollisionVerdict {
        kind,
        details: peaks.clone(),
    }
}

/// Spectrum, peaks and verdict in one call.
pub fn analyze_collision(
    trace: &RssTrace,
    fft_len: usize,
    cfg: &CollisionConfig,
) -> Result<(Spectrum, CollisionVerdict), SpectralError> {
    let spectrum = compute_spectrum(trace, fft_len)?;
    let peaks = detect_peaks(&spectrum, cfg.min_prominence_frac);
    let verdict = collision_verdict(&peaks, cfg.separation_ratio, cfg.dominance_ratio);
    Ok((spectrum, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trace(fs: f64, x: Vec<f64>) -> RssTrace {
        RssTrace::new(fs, x).unwrap()
    }

    fn sine(fs: f64, hz: f64, n: usize) -> RssTrace {
        trace(
            fs,
            (0..n)
                .map(|i| 5.0 + (2.0 * PI * hz * i as f64 / fs).sin())
                .collect(),
        )
    }

    fn peak(hz: f64, magnitude: f64) -> SpectralPeak {
        SpectralPeak {
            bin: 0,
            frequency_hz: hz,
            magnitude,
            prominence: magnitude,
        }
    }

    #[test]
    fn rejects_bad_lengths() {
        let t = sine(1000.0, 10.0, 64);
        for n in [0, 8, 100, 1000] {
            assert_eq!(
                compute_spectrum(&t, n),
                Err(SpectralError::InvalidFftLength(n))
            );
        }
        assert!(compute_spectrum(&t, 16).is_ok());
    }

    #[test]
    fn sinusoid_has_one_dominant_bin() {
        let s = compute_spectrum(&sine(1000.0, 10.0, 1024), 1024).unwrap();
        assert_eq!(s.magnitudes.len(), 513);
        assert!((s.bin_hz - 1000.0 / 1024.0).abs() < 1e-12);
        let peaks = detect_peaks(&s, 0.2);
        assert_eq!(peaks.peaks.len(), 1);
        assert!((peaks.peaks[0].frequency_hz - 10.0).abs() <= s.bin_hz);
    }

    #[test]
    fn constant_trace_is_silent() {
        let t = trace(100.0, vec![3.25; 100]);
        let s = compute_spectrum(&t, 128).unwrap();
        assert!(s.magnitudes.iter().all(|&m| m.abs() < 1e-12));
        let peaks = detect_peaks(&s, 0.2);
        assert!(peaks.peaks.is_empty());
        assert_eq!(
            collision_verdict(&peaks, 1.5, 2.0).kind,
            CollisionKind::Indeterminate
        );
    }

    #[test]
    fn verdict_examples() {
        let set = |p: Vec<SpectralPeak>| PeakSet {
            peaks: p,
            min_prominence: 0.0,
        };
        let v = collision_verdict(&set(vec![peak(2.0, 1.0), peak(8.0, 0.1)]), 1.5, 2.0);
        assert_eq!(v.kind, CollisionKind::SingleDominant);
        let v = collision_verdict(&set(vec![peak(2.0, 0.6), peak(8.0, 0.55)]), 1.5, 2.0);
        assert_eq!(v.kind, CollisionKind::TwoObjects);
        let v = collision_verdict(&set(vec![peak(2.0, 0.6), peak(2.5, 0.55)]), 1.5, 2.0);
        assert_eq!(v.kind, CollisionKind::Indeterminate);
        let v = collision_verdict(&set(vec![peak(4.0, 0.6)]), 1.5, 2.0);
        assert_eq!(v.kind, CollisionKind::SingleDominant);
    }

    #[test]
    fn short_traces_are_zero_padded() {
        let t = sine(100.0, 10.0, 40);
        let x = windowed_input(&t, 64, Window::Rect);
        assert_eq!(x.len(), 64);
        assert!(x[40..].iter().all(|&v| v == 0.0));
    }

    fn naive_magnitudes(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (j, v) in x.iter().enumerate() {
                    let a = -2.0 * PI * (k * j) as f64 / n as f64;
                    re += v * a.cos();
                    im += v * a.sin();
                }
                re.hypot(im)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn matches_naive_dft_and_parseval(x in prop::collection::vec(-10.0f64..10.0, 16..100)) {
            let t = trace(50.0, x);
            let s = compute_spectrum(&t, 128).unwrap();
            let input = windowed_input(&t, 128, Window::Hann);
            let naive = naive_magnitudes(&input);
            for (a, b) in s.magnitudes.iter().zip(&naive) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
            }
            let energy: f64 = input.iter().map(|v| v * v).sum();
            prop_assert!((s.parseval_energy() - energy).abs() <= 1e-6 * energy.max(1e-12));
        }

        #[test]
        fn scaling_scales_magnitudes(x in prop::collection::vec(0.0f64..10.0, 32..64), alpha in 0.1f64..50.0) {
            let a = compute_spectrum(&trace(50.0, x.clone()), 64).unwrap();
            let b = compute_spectrum(&trace(50.0, x.iter().map(|v| alpha * v).collect()), 64).unwrap();
            for (ma, mb) in a.magnitudes.iter().zip(&b.magnitudes) {
                prop_assert!((alpha * ma - mb).abs() <= 1e-9 * (1.0 + mb.abs()));
            }
        }

        #[test]
        fn peaks_respect_threshold_and_order(x in prop::collection::vec(-1.0f64..1.0, 64), frac in 0.05f64..0.9) {
            let s = compute_spectrum(&trace(64.0, x), 64).unwrap();
            let set = detect_peaks(&s, frac);
            for w in set.peaks.windows(2) {
                prop_assert!(w[0].magnitude >= w[1].magnitude);
            }
            for p in &set.peaks {
                prop_assert!(p.bin != 0);
                prop_assert!(p.prominence >= set.min_prominence);
            }
        }
    }
}
