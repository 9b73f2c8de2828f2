//! Passive visible-light communication toolkit.
//!
//! Moving objects carry strips of high/low reflectance material ("packets").
//! Ambient light bounces off the strips and a single photodetector samples the
//! disturbed intensity. This crate holds the pure algorithmic pieces:
//!
//! * [`codec`]: Manchester packets and the preamble-anchored threshold decoder.
//! * [`channel`]: scene model and RSS trace synthesis.
//! * [`classify`]: DTW template classification for speed-distorted traces.
//! * [`spectral`]: FFT based collision analysis.
//! * [`planner`]: decodable-region trends and receiver selection.
//!
//! Everything is `no_std` + `alloc`; IO, file formats and the CLI live in the
//! `pvlc` crate.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod channel;
pub mod classify;
pub mod codec;
mod fft;
pub mod planner;
pub mod presets;
pub mod signal;
pub mod spectral;

pub use channel::{
    EmitterModel, NoiseModel, ReceiverKind, ReceiverModel, RssTrace, Scenario, Scene,
    SceneObject, SpeedProfile, VehicleProfile,
};
pub use codec::{DecodeResult, DecodeStatus, DecoderConfig, PreambleFix, ReflectivePacket, Symbol};
