//! The passive channel: ambient emitter, moving reflective objects, and a
//! photodetector whose field of view projects a footprint on the ground.

mod model;
mod scene;
mod simulate;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use model::{EmitterKind, EmitterModel, NoiseModel, ReceiverKind, ReceiverModel};
pub use scene::{
    render_reflectance, BodyPart, EmbeddedPacket, Pattern, ReflectanceProfile, Scene,
    SceneObject, SpeedProfile, SpeedSegment, VehicleProfile, VehicleSegment,
    DEFAULT_GROUND_REFLECTANCE,
};
pub use simulate::{
    footprint_width, packet_swing, path_gain, simulate, transit_symbol_rate, Scenario,
    REFERENCE_HEIGHT_M,
};

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelError {
    EmptyScene,
    NonPositiveDuration(f64),
    TooFewSamples(usize),
    InvalidEmitter(&'static str),
    InvalidReceiver(&'static str),
    InvalidNoise(&'static str),
    InvalidObject { index: usize, reason: &'static str },
    InvalidTrace(&'static str),
    /// Objects sharing the footprint at the same time claim more than the whole FoV.
    FovOversubscribed { at_s: f64, total_share: f64 },
}

impl fmt::Display for ChannelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelError::EmptyScene => write!(f, "scene has no objects"),
            ChannelError::NonPositiveDuration(d) => write!(f, "duration must be > 0 s, got {d}"),
            ChannelError::TooFewSamples(n) => {
                write!(f, "trace would have {n} samples, at least 16 are required")
            }
            ChannelError::InvalidEmitter(r) => write!(f, "invalid emitter: {r}"),
            ChannelError::InvalidReceiver(r) => write!(f, "invalid receiver: {r}"),
            ChannelError::InvalidNoise(r) => write!(f, "invalid noise model: {r}"),
            ChannelError::InvalidObject { index, reason } => {
                write!(f, "invalid scene object {index}: {reason}")
            }
            ChannelError::InvalidTrace(r) => write!(f, "invalid trace: {r}"),
            ChannelError::FovOversubscribed { at_s, total_share } => write!(
                f,
                "objects visible at t={at_s} s have total fov_share {total_share} > 1"
            ),
        }
    }
}

impl core::error::Error for ChannelError {}

/// Extra facts about where a trace came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceMeta {
    /// Detector output ceiling in trace units, when known.
    pub saturation_ceiling: Option<f64>,
    /// Free-form scenario descriptor (a digest when loaded from disk).
    pub scenario: Option<String>,
}

/// Uniformly sampled received signal strength.
#[derive(Debug, Clone, PartialEq)]
pub struct RssTrace {
    sampling_rate_hz: f64,
    samples: Vec<f64>,
    pub meta: TraceMeta,
}

impl RssTrace {
    pub fn new(sampling_rate_hz: f64, samples: Vec<f64>) -> Result<Self, ChannelError> {
        if !(sampling_rate_hz > 0.0 && sampling_rate_hz.is_finite()) {
            return Err(ChannelError::InvalidTrace("sampling rate must be > 0"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(ChannelError::InvalidTrace("samples must be finite"));
        }
        Ok(Self {
            sampling_rate_hz,
            samples,
            meta: TraceMeta::default(),
        })
    }

    pub fn with_meta(mut self, meta: TraceMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn sampling_rate_hz(&self) -> f64 {
        self.sampling_rate_hz
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time_of(&self, index: f64) -> f64 {
        index / self.sampling_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sampling_rate_hz
    }

    /// Samples from `start` on, keeping rate and metadata.
    pub fn slice_from(&self, start: usize) -> RssTrace {
        RssTrace {
            sampling_rate_hz: self.sampling_rate_hz,
            samples: self.samples[start.min(self.samples.len())..].to_vec(),
            meta: self.meta.clone(),
        }
    }

    /// Applies `f` to every sample. The saturation ceiling is dropped since
    /// it no longer describes the transformed values.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> RssTrace {
        RssTrace {
            sampling_rate_hz: self.sampling_rate_hz,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            meta: TraceMeta {
                saturation_ceiling: None,
                scenario: self.meta.scenario.clone(),
            },
        }
    }
}
