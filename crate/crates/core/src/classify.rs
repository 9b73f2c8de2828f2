//! Nearest-template classification with dynamic time warping.
//!
//! When an object changes speed mid-packet the fixed symbol windows of the
//! threshold decoder drift. The waveform still has the right shape, only
//! stretched, so it is matched against clean recordings of a small set of
//! well separated codes instead.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::RssTrace;

/// Length every series is resampled to before matching.
pub const DEFAULT_TEMPLATE_LEN: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifyError {
    EmptySeries,
    /// z-normalization is undefined for a constant series.
    ConstantSeries,
    NoTemplates,
    TooManyCodes { bit_length: usize, count: usize },
}

impl fmt::Display for ClassifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifyError::EmptySeries => write!(f, "series is empty"),
            ClassifyError::ConstantSeries => write!(f, "series is constant"),
            ClassifyError::NoTemplates => write!(f, "no templates to compare against"),
            ClassifyError::TooManyCodes { bit_length, count } => {
                write!(f, "cannot pick {count} distinct codes of {bit_length} bits")
            }
        }
    }
}

impl core::error::Error for ClassifyError {}

/// Path-length normalized DTW with a full warping window.
pub fn dtw_distance(a: &[f64], b: &[f64]) -> Result<f64, ClassifyError> {
    dtw_banded(a, b, None)
}

/// Path-length normalized DTW.
///
/// Local cost is `|a_i - b_j|` with diagonal, horizontal and vertical steps.
/// The optimal path minimizes total cost, ties going to the shorter path,
/// and the result is that cost divided by the number of cells on the path.
/// `radius` restricts cells to a Sakoe-Chiba band around the (length-scaled)
/// diagonal.
#[allow(clippy::needless_range_loop)]
pub fn dtw_banded(a: &[f64], b: &[f64], radius: Option<usize>) -> Result<f64, ClassifyError> {
    if a.is_empty() || b.is_empty() {
        return Err(ClassifyError::EmptySeries);
    }
    let (n, m) = (a.len(), b.len());
    let in_band = |i: usize, j: usize| match radius {
        None => true,
        Some(r) => {
            let diag = i as f64 * (m as f64 - 1.0) / (n as f64 - 1.0).max(1.0);
            (j as f64 - diag).abs() <= r as f64 + 0.5
        }
    };
    const UNREACHED: (f64, u32) = (f64::INFINITY, u32::MAX);
    let better = |x: (f64, u32), y: (f64, u32)| {
        if x.0 < y.0 || (x.0 == y.0 && x.1 < y.1) {
            x
        } else {
            y
        }
    };
    let mut prev = alloc::vec![UNREACHED; m];
    let mut cur = alloc::vec![UNREACHED; m];
    for i in 0..n {
        for j in 0..m {
            if !in_band(i, j) {
                cur[j] = UNREACHED;
                continue;
            }
            let cost = libm::fabs(a[i] - b[j]);
            let best = if i == 0 && j == 0 {
                (0.0, 0)
            } else {
                let mut best = UNREACHED;
                if i > 0 && j > 0 {
                    best = better(best, prev[j - 1]);
                }
                if i > 0 {
                    best = better(best, prev[j]);
                }
                if j > 0 {
                    best = better(best, cur[j - 1]);
                }
                best
            };
            cur[j] = if best.0.is_finite() {
                (best.0 + cost, best.1 + 1)
            } else {
                UNREACHED
            };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    let (total, len) = prev[m - 1];
    if !total.is_finite() {
        // Band too narrow to connect the corners; fall back to the full window.
        return dtw_banded(a, b, None);
    }
    Ok(total / len as f64)
}

/// Zero mean, unit (population) variance.
pub fn z_normalize(x: &[f64]) -> Result<Vec<f64>, ClassifyError> {
    if x.is_empty() {
        return Err(ClassifyError::EmptySeries);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = libm::sqrt(var);
    if !(sd > 1e-12 * mean.abs().max(1e-300)) {
        return Err(ClassifyError::ConstantSeries);
    }
    Ok(x.iter().map(|v| (v - mean) / sd).collect())
}

/// Linear-interpolation resampling onto `len` evenly spaced points spanning
/// the whole input.
pub fn resample(x: &[f64], len: usize) -> Vec<f64> {
    if x.len() == 1 || len == 1 {
        return alloc::vec![x[0]; len];
    }
    let step = (x.len() - 1) as f64 / (len - 1) as f64;
    (0..len)
        .map(|k| {
            let pos = k as f64 * step;
            let i = (libm::floor(pos) as usize).min(x.len() - 2);
            let frac = pos - i as f64;
            x[i] + frac * (x[i + 1] - x[i])
        })
        .collect()
}

/// Resample to `len` then z-normalize. Resampling first keeps a constant
/// check on what DTW actually sees.
pub fn prepare(trace: &RssTrace, len: usize) -> Result<Vec<f64>, ClassifyError> {
    if trace.is_empty() {
        return Err(ClassifyError::EmptySeries);
    }
    z_normalize(&resample(trace.samples(), len))
}

/// A clean reference recording for one code.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub label: String,
    pub trace: RssTrace,
    pub normalized: Vec<f64>,
}

impl Template {
    pub fn new(label: impl Into<String>, trace: RssTrace) -> Result<Self, ClassifyError> {
        Self::with_len(label, trace, DEFAULT_TEMPLATE_LEN)
    }

    pub fn with_len(
        label: impl Into<String>,
        trace: RssTrace,
        len: usize,
    ) -> Result<Self, ClassifyError> {
        let normalized = prepare(&trace, len)?;
        Ok(Self {
            label: label.into(),
            trace,
            normalized,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DtwResult {
    pub distances: BTreeMap<String, f64>,
    pub best_label: String,
    /// Second-best over best distance; 1 with a single template, infinite
    /// when the best match is exact and the runner-up is not.
    pub margin: f64,
}

/// Matches `trace` against every template; the smallest distance wins and
/// equal distances go to the lexicographically smaller label.
pub fn classify_trace(trace: &RssTrace, templates: &[Template]) -> Result<DtwResult, ClassifyError> {
    classify_banded(trace, templates, None)
}

pub fn classify_banded(
    trace: &RssTrace,
    templates: &[Template],
    radius: Option<usize>,
) -> Result<DtwResult, ClassifyError> {
    if templates.is_empty() {
        return Err(ClassifyError::NoTemplates);
    }
    let mut prepared: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut distances = BTreeMap::new();
    for t in templates {
        let len = t.normalized.len();
        if let alloc::collections::btree_map::Entry::Vacant(e) = prepared.entry(len) {
            e.insert(prepare(trace, len)?);
        }
        let d = dtw_banded(&prepared[&len], &t.normalized, radius)?;
        // Duplicate labels keep their best distance.
        let e = distances.entry(t.label.clone()).or_insert(d);
        *e = e.min(d);
    }
    let mut ranked: Vec<(&String, f64)> = distances.iter().map(|(k, v)| (k, *v)).collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let best = ranked[0];
    let margin = match ranked.get(1) {
        None => 1.0,
        Some(second) if second.1 == best.1 => 1.0,
        Some(_) if best.1 == 0.0 => f64::INFINITY,
        Some(second) => second.1 / best.1,
    };
    Ok(DtwResult {
        best_label: best.0.clone(),
        distances,
        margin,
    })
}

/// Codes of equal length chosen to be far apart in Hamming distance.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Codebook {
    pub codes: Vec<String>,
    pub min_hamming: usize,
}

impl Codebook {
    /// Smallest pairwise Hamming distance, by exhaustive check (0 for fewer
    /// than two codes).
    pub fn pairwise_min(&self) -> usize {
        let mut best = usize::MAX;
        for (i, a) in self.codes.iter().enumerate() {
            for b in &self.codes[i + 1..] {
                best = best.min(a.chars().zip(b.chars()).filter(|(x, y)| x != y).count());
            }
        }
        if best == usize::MAX {
            0
        } else {
            best
        }
    }
}

/// Picks `count` codes of `bit_length` bits with a large minimum distance.
///
/// For each target distance `d` from `bit_length` down to 1, codes are
/// scanned in increasing order starting at all-zeros and kept when at least
/// `d` away from everything kept so far; the first `d` that yields `count`
/// codes wins. Two codes always come out as a complementary pair.
pub fn build_codebook(bit_length: usize, count: usize) -> Result<Codebook, ClassifyError> {
    let too_many = ClassifyError::TooManyCodes { bit_length, count };
    if bit_length >= usize::BITS as usize - 1 || count > (1usize << bit_length) {
        return Err(too_many);
    }
    let render = |v: u64| -> String {
        (0..bit_length)
            .rev()
            .map(|b| if v >> b & 1 == 1 { '1' } else { '0' })
            .collect()
    };
    if count <= 1 {
        return Ok(Codebook {
            codes: (0..count as u64).map(render).collect(),
            min_hamming: bit_length,
        });
    }
    let space = 1u64 << bit_length;
    for d in (1..=bit_length as u32).rev() {
        let mut picked: Vec<u64> = Vec::with_capacity(count);
        for c in 0..space {
            if picked.iter().all(|&p| (p ^ c).count_ones() >= d) {
                picked.push(c);
                if picked.len() == count {
                    break;
                }
            }
        }
        if picked.len() == count {
            let mut cb = Codebook {
                codes: picked.into_iter().map(render).collect(),
                min_hamming: 0,
            };
            cb.min_hamming = cb.pairwise_min();
            return Ok(cb);
        }
    }
    Err(too_many)
}
