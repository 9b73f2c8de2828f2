//! Small sample-domain helpers shared by the decoder and the spectral analysis.

use alloc::vec::Vec;

/// Centered moving average. Near the edges the window shrinks symmetrically
/// to the samples that exist, so the output has the same length as the input.
pub fn moving_average(x: &[f64], window: usize) -> Vec<f64> {
    let half = window.max(1) / 2;
    if half == 0 || x.is_empty() {
        return x.to_vec();
    }
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in x {
        acc += v;
        prefix.push(acc);
    }
    let n = x.len();
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let (lo, hi) = (i - h, i + h + 1);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// A local maximum together with its topographic prominence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub value: f64,
    pub prominence: f64,
}

/// Local maxima of `x`, excluding the two end samples. Flat tops report
/// their middle sample.
pub fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = x.len();
    if n < 3 {
        return out;
    }
    let mut i = 1;
    while i < n - 1 {
        if x[i] > x[i - 1] {
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Prominence of the maximum at `p`: its height above the higher of the two
/// lowest points met before reaching a strictly higher sample on each side.
pub fn prominence(x: &[f64], p: usize) -> f64 {
    let top = x[p];
    let mut left_min = top;
    for &v in x[..p].iter().rev() {
        if v > top {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = top;
    for &v in &x[p + 1..] {
        if v > top {
            break;
        }
        right_min = right_min.min(v);
    }
    top - left_min.max(right_min)
}

/// All local maxima whose prominence is at least `min_prominence`, in index order.
pub fn prominent_peaks(x: &[f64], min_prominence: f64) -> Vec<Peak> {
    local_maxima(x)
        .into_iter()
        .filter_map(|index| {
            let prominence = prominence(x, index);
            (prominence >= min_prominence).then_some(Peak {
                index,
                value: x[index],
                prominence,
            })
        })
        .collect()
}

/// Fractional sample positions where the run around `idx` crosses `level`.
///
/// With `above = true` the run is the maximal stretch of samples `> level`
/// containing `idx`; otherwise samples `< level`. Crossings are linearly
/// interpolated; a run touching the slice boundary stops at that boundary.
pub fn run_extent(x: &[f64], idx: usize, level: f64, above: bool) -> (f64, f64) {
    edge_crossings(x, idx, level, level, above)
}

/// Like [`run_extent`] with separate levels for the left and right edge.
pub fn edge_crossings(
    x: &[f64],
    idx: usize,
    left_level: f64,
    right_level: f64,
    above: bool,
) -> (f64, f64) {
    let inside = |v: f64, level: f64| if above { v > level } else { v < level };
    let crossing = |a: usize, b: usize, level: f64| {
        let (va, vb) = (x[a], x[b]);
        let frac = if vb == va { 0.5 } else { (level - va) / (vb - va) };
        a as f64 + frac.clamp(0.0, 1.0) * (b as f64 - a as f64)
    };
    let mut lo = idx;
    while lo > 0 && inside(x[lo - 1], left_level) {
        lo -= 1;
    }
    let left = if lo == 0 {
        0.0
    } else {
        crossing(lo - 1, lo, left_level)
    };
    let mut hi = idx;
    while hi + 1 < x.len() && inside(x[hi + 1], right_level) {
        hi += 1;
    }
    let right = if hi + 1 == x.len() {
        hi as f64
    } else {
        crossing(hi, hi + 1, right_level)
    };
    (left, right)
}

/// Index of the smallest sample in `x[lo..hi]`. Ties resolve to the middle of
/// the tied stretch so flat valleys report their center.
pub fn argmin_in(x: &[f64], lo: usize, hi: usize) -> usize {
    let mut best = lo;
    for i in lo..hi {
        if x[i] < x[best] {
            best = i;
        }
    }
    let mut end = best;
    while end + 1 < hi && x[end + 1] == x[best] {
        end += 1;
    }
    (best + end) / 2
}

pub(crate) fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_average_keeps_length_and_shrinks_at_edges() {
        let y = moving_average(&[1.0, 2.0, 3.0, 4.0, 5.0], 3);
        assert_eq!(y, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = moving_average(&[0.0, 3.0, 0.0, 3.0], 3);
        assert_eq!(y, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn plateau_peak_reports_middle() {
        let x = [0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0];
        assert_eq!(local_maxima(&x), vec![3]);
        assert_eq!(prominence(&x, 3), 2.0);
    }

    #[test]
    fn small_bump_on_a_slope_has_small_prominence() {
        let x = [0.0, 5.0, 4.8, 4.9, 4.7, 9.0, 0.0];
        let peaks = prominent_peaks(&x, 1.0);
        let idx: Vec<_> = peaks.iter().map(|p| p.index).collect();
        // The left peak only rises 0.3 above the dip before the taller one.
        assert_eq!(idx, vec![5]);
        assert!((prominence(&x, 1) - 0.3).abs() < 1e-12);
        assert!((prominence(&x, 3) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn edge_crossings_use_their_own_levels() {
        let x = [0.0, 0.0, 1.0, 1.0, 1.0, 0.5, 0.5];
        let (l, r) = edge_crossings(&x, 3, 0.5, 0.75, true);
        assert!((l - 1.5).abs() < 1e-12);
        assert!((r - 4.5).abs() < 1e-12);
    }

    #[test]
    fn run_extent_interpolates() {
        let x = [0.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        let (l, r) = run_extent(&x, 3, 0.5, true);
        assert!((l - 1.5).abs() < 1e-12);
        assert!((r - 4.5).abs() < 1e-12);
    }
}
