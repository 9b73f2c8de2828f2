//! Deployment planning: decodable height/width region, throughput trend and
//! receiver choice for an ambient noise floor.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::{
    footprint_width, simulate, EmitterModel, NoiseModel, Pattern, ReceiverKind, ReceiverModel,
    Scene, SceneObject, SpeedProfile,
};
use crate::codec::{build_packet, decode_trace, DecoderConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum PlanError {
    /// Fewer than three sweep points.
    TooFewPoints(usize),
    /// Fewer than two distinct heights (or widths), so no slope exists.
    DegenerateSweep(&'static str),
    /// A throughput value that has no logarithm.
    NonPositiveThroughput { height_m: f64 },
    /// The fitted parameters break a model invariant.
    InvalidTrend(&'static str),
    /// Every catalog entry saturates below the noise floor.
    NoViableReceiver { noise_floor_lux: f64 },
    InvalidInput(&'static str),
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::TooFewPoints(n) => write!(f, "need at least 3 sweep points, got {n}"),
            PlanError::DegenerateSweep(what) => write!(f, "degenerate sweep: {what}"),
            PlanError::NonPositiveThroughput { height_m } => {
                write!(f, "throughput at height {height_m} m is not positive")
            }
            PlanError::InvalidTrend(what) => write!(f, "fitted trend is invalid: {what}"),
            PlanError::NoViableReceiver { noise_floor_lux } => {
                write!(f, "no viable receiver for a noise floor of {noise_floor_lux} lux")
            }
            PlanError::InvalidInput(what) => write!(f, "invalid input: {what}"),
        }
    }
}

impl core::error::Error for PlanError {}

/// One row of a feasibility sweep, as consumed by [`fit_trends`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepPoint {
    pub height_m: f64,
    pub min_width_m: f64,
    /// Bits per second at `min_width_m`.
    pub max_throughput_bps: f64,
}

/// `max_height(w) = a*w + b` and `throughput(h) = c*exp(-d*h)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct TrendModel {
    pub width_slope_a: f64,
    pub width_intercept_b: f64,
    /// Bits per second.
    pub thr_scale_c: f64,
    /// Per meter.
    pub thr_decay_d: f64,
    pub fitted_from: String,
    /// RMS of `height - (a*w + b)` in meters.
    pub width_residual_rms: f64,
    /// RMS of `ln y - ln(c*exp(-d*h))`.
    pub thr_log_residual_rms: f64,
    /// Same measure for the best straight line `y = p + q*h`; infinite when
    /// that line predicts a non-positive throughput at a sweep height.
    pub thr_linear_log_residual_rms: f64,
}

impl TrendModel {
    pub fn max_height_for_width(&self, width_m: f64) -> f64 {
        max_height_for_width(self, width_m)
    }

    pub fn throughput_bps(&self, height_m: f64) -> f64 {
        self.thr_scale_c * libm::exp(-self.thr_decay_d * height_m)
    }

    /// True when the exponential shape explains the throughput better than
    /// a straight line, measured in log space.
    pub fn exponential_preferred(&self) -> bool {
        self.thr_log_residual_rms < self.thr_linear_log_residual_rms
    }
}

/// `a*width + b`.
pub fn max_height_for_width(model: &TrendModel, width_m: f64) -> f64 {
    model.width_slope_a * width_m + model.width_intercept_b
}

/// Ordinary least squares `y = slope*x + intercept`.
fn least_squares(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for r in it {
        sum += r * r;
        n += 1;
    }
    libm::sqrt(sum / n.max(1) as f64)
}

/// Fits both trend models to a sweep.
pub fn fit_trends(sweep: &[SweepPoint], fitted_from: &str) -> Result<TrendModel, PlanError> {
    if sweep.len() < 3 {
        return Err(PlanError::TooFewPoints(sweep.len()));
    }
    for p in sweep {
        if !(p.height_m > 0.0 && p.min_width_m > 0.0) {
            return Err(PlanError::InvalidInput("heights and widths must be positive"));
        }
        if !(p.max_throughput_bps > 0.0 && p.max_throughput_bps.is_finite()) {
            return Err(PlanError::NonPositiveThroughput { height_m: p.height_m });
        }
    }
    let h: Vec<f64> = sweep.iter().map(|p| p.height_m).collect();
    let w: Vec<f64> = sweep.iter().map(|p| p.min_width_m).collect();
    let y: Vec<f64> = sweep.iter().map(|p| p.max_throughput_bps).collect();
    let ln_y: Vec<f64> = y.iter().map(|v| libm::log(*v)).collect();

    let (a, b) = least_squares(&w, &h)
        .ok_or(PlanError::DegenerateSweep("all minimum widths are equal"))?;
    let (slope, intercept) = least_squares(&h, &ln_y)
        .ok_or(PlanError::DegenerateSweep("all heights are equal"))?;
    let (c, d) = (libm::exp(intercept), -slope);
    if !(a > 0.0) {
        return Err(PlanError::InvalidTrend("max height does not grow with width"));
    }
    if !(d > 0.0) {
        return Err(PlanError::InvalidTrend("throughput does not decay with height"));
    }
    let (q, p) = least_squares(&h, &y).expect("heights already checked");

    let width_residual_rms = rms(w.iter().zip(&h).map(|(wi, hi)| hi - (a * wi + b)));
    let thr_log_residual_rms = rms(
        h.iter()
            .zip(&ln_y)
            .map(|(hi, li)| li - (intercept + slope * hi)),
    );
    let thr_linear_log_residual_rms = if h.iter().any(|hi| p + q * hi <= 0.0) {
        f64::INFINITY
    } else {
        rms(h
            .iter()
            .zip(&ln_y)
            .map(|(hi, li)| li - libm::log(p + q * hi)))
    };
    Ok(TrendModel {
        width_slope_a: a,
        width_intercept_b: b,
        thr_scale_c: c,
        thr_decay_d: d,
        fitted_from: fitted_from.into(),
        width_residual_rms,
        thr_log_residual_rms,
        thr_linear_log_residual_rms,
    })
}

/// One receiver option: a detector name, its ceiling and gain.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CatalogEntry {
    pub name: String,
    pub kind: ReceiverKind,
    pub saturation_lux: f64,
    pub relative_sensitivity: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReceiverCatalog {
    pub entries: Vec<CatalogEntry>,
}

impl ReceiverCatalog {
    /// The four datasheet detectors.
    pub fn builtin() -> Self {
        let entries = ReceiverKind::BUILTIN
            .iter()
            .map(|&kind| {
                let (saturation_lux, relative_sensitivity) =
                    kind.datasheet().expect("built-in kinds have datasheets");
                CatalogEntry {
                    name: kind.name().into(),
                    kind,
                    saturation_lux,
                    relative_sensitivity,
                }
            })
            .collect();
        ReceiverCatalog { entries }
    }

    pub fn with_entry(mut self, name: &str, saturation_lux: f64, relative_sensitivity: f64) -> Self {
        self.entries.push(CatalogEntry {
            name: name.into(),
            kind: ReceiverKind::Custom,
            saturation_lux,
            relative_sensitivity,
        });
        self
    }
}

/// The most sensitive entry whose ceiling lies strictly above
/// `noise_floor_lux * (1 + margin_frac)`. Equal sensitivities keep catalog
/// order.
pub fn select_receiver(
    catalog: &ReceiverCatalog,
    noise_floor_lux: f64,
    margin_frac: f64,
) -> Result<&CatalogEntry, PlanError> {
    if !(noise_floor_lux >= 0.0 && noise_floor_lux.is_finite()) {
        return Err(PlanError::InvalidInput("noise floor must be finite and >= 0"));
    }
    if !(margin_frac >= 0.0 && margin_frac.is_finite()) {
        return Err(PlanError::InvalidInput("margin must be finite and >= 0"));
    }
    let limit = noise_floor_lux * (1.0 + margin_frac);
    catalog
        .entries
        .iter()
        .filter(|e| e.saturation_lux > limit)
        .fold(None, |best: Option<&CatalogEntry>, e| match best {
            Some(b) if b.relative_sensitivity >= e.relative_sensitivity => Some(b),
            _ => Some(e),
        })
        .ok_or(PlanError::NoViableReceiver { noise_floor_lux })
}

/// Fixed parts of a height/width feasibility sweep. The receiver's height is
/// replaced per cell; the packet is rebuilt per width.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SweepBase {
    pub emitter: EmitterModel,
    pub receiver: ReceiverModel,
    pub noise: NoiseModel,
    pub bits: String,
    pub reflectance_high: f64,
    pub reflectance_low: f64,
    pub speed_mps: f64,
    /// Seeded repetitions per cell; a cell is decodable only if all succeed.
    pub trials: u32,
    #[cfg_attr(feature = "serde", serde(default = "default_ground"))]
    pub ground_reflectance: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub decoder: DecoderConfig,
}

#[cfg(feature = "serde")]
fn default_ground() -> f64 {
    crate::channel::DEFAULT_GROUND_REFLECTANCE
}

impl SweepBase {
    /// Whether the packet decodes at `(height_m, width_m)` in every trial.
    pub fn cell_decodable(&self, height_m: f64, width_m: f64) -> Result<bool, PlanError> {
        let packet = build_packet(
            &self.bits,
            width_m,
            self.reflectance_high,
            self.reflectance_low,
        )
        .map_err(|_| PlanError::InvalidInput("sweep packet parameters"))?;
        let receiver = self.receiver.with_height(height_m);
        let fp = footprint_width(&receiver);
        // Start and finish with a symbol's worth of bare ground in view.
        let lead = 0.5 * fp + 2.0 * width_m;
        let travel = lead + packet.length_m() + 0.5 * fp + 2.0 * width_m;
        let scene = Scene {
            objects: alloc::vec![SceneObject::new(
                Pattern::Packet(packet),
                -lead,
                SpeedProfile::constant(self.speed_mps),
            )],
            ground_reflectance: self.ground_reflectance,
        };
        let cfg = self.decoder.clone().with_expected_bits(self.bits.len());
        for trial in 0..self.trials.max(1) {
            let noise = self.noise.with_seed(self.noise.seed.wrapping_add(trial as u64));
            let trace = simulate(
                &scene,
                &self.emitter,
                &receiver,
                &noise,
                travel / self.speed_mps,
            )
            .map_err(|_| PlanError::InvalidInput("sweep scenario does not simulate"))?;
            let r = decode_trace(&trace, &cfg);
            if !(r.is_ok() && r.bits == self.bits) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Evaluates every cell of the grid, heights outer.
    pub fn sweep(&self, heights: &[f64], widths: &[f64]) -> Result<SweepGrid, PlanError> {
        let mut decodable = Vec::with_capacity(heights.len());
        for &h in heights {
            let row = widths
                .iter()
                .map(|&w| self.cell_decodable(h, w))
                .collect::<Result<Vec<_>, _>>()?;
            decodable.push(row);
        }
        SweepGrid::new(heights.to_vec(), widths.to_vec(), decodable, self.speed_mps)
    }
}

/// Decodability of each (height, width) cell.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepGrid {
    pub heights_m: Vec<f64>,
    pub widths_m: Vec<f64>,
    /// `decodable[i][j]` for `heights_m[i]`, `widths_m[j]`.
    pub decodable: Vec<Vec<bool>>,
    pub speed_mps: f64,
}

/// Summary of one height of a sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub height_m: f64,
    pub min_width_m: Option<f64>,
    pub throughput_sym_s: Option<f64>,
    pub throughput_bps: Option<f64>,
}

impl SweepGrid {
    /// Heights and widths must each be strictly increasing.
    pub fn new(
        heights_m: Vec<f64>,
        widths_m: Vec<f64>,
        decodable: Vec<Vec<bool>>,
        speed_mps: f64,
    ) -> Result<Self, PlanError> {
        let increasing = |v: &[f64]| v.windows(2).all(|p| p[0] < p[1]) && v.iter().all(|x| *x > 0.0);
        if heights_m.is_empty() || widths_m.is_empty() {
            return Err(PlanError::InvalidInput("sweep needs at least one height and width"));
        }
        if !increasing(&heights_m) || !increasing(&widths_m) {
            return Err(PlanError::InvalidInput(
                "sweep heights and widths must be positive and strictly increasing",
            ));
        }
        if decodable.len() != heights_m.len()
            || decodable.iter().any(|r| r.len() != widths_m.len())
        {
            return Err(PlanError::InvalidInput("grid shape mismatch"));
        }
        Ok(SweepGrid {
            heights_m,
            widths_m,
            decodable,
            speed_mps,
        })
    }

    /// Smallest width at height index `i` such that it and every wider
    /// width decode.
    pub fn min_width(&self, i: usize) -> Option<f64> {
        let row = &self.decodable[i];
        let first_bad_from_top = row.iter().rposition(|ok| !ok);
        match first_bad_from_top {
            None => Some(self.widths_m[0]),
            Some(j) if j + 1 < row.len() => Some(self.widths_m[j + 1]),
            Some(_) => None,
        }
    }

    /// Largest height at width index `j` such that every height up to it
    /// has its minimum decodable width at or below `widths_m[j]`: the
    /// frontier of the region closed upward in width.
    pub fn max_height(&self, j: usize) -> Option<f64> {
        let mut best = None;
        for (i, h) in self.heights_m.iter().enumerate() {
            if !self.min_width(i).is_some_and(|w| w <= self.widths_m[j]) {
                break;
            }
            best = Some(*h);
        }
        best
    }

    pub fn rows(&self) -> Vec<SweepRow> {
        (0..self.heights_m.len())
            .map(|i| {
                let min_width_m = self.min_width(i);
                let sym = min_width_m.map(|w| self.speed_mps / w);
                SweepRow {
                    height_m: self.heights_m[i],
                    min_width_m,
                    throughput_sym_s: sym,
                    throughput_bps: sym.map(|s| s / 2.0),
                }
            })
            .collect()
    }

    /// Rows that found a decodable width, as fit input.
    pub fn points(&self) -> Vec<SweepPoint> {
        self.rows()
            .into_iter()
            .filter_map(|r| {
                Some(SweepPoint {
                    height_m: r.height_m,
                    min_width_m: r.min_width_m?,
                    max_throughput_bps: r.throughput_bps?,
                })
            })
            .collect()
    }
}
