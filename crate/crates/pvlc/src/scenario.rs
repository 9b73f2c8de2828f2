//! Scenario files: one JSON document describing a complete simulation.
//!
//! ```json
//! {
//!   "emitter": { "illuminance_lux": 300.0, "kind": "led_lamp" },
//!   "receiver": { "kind": "PD_G1", "sensitivity": 1.0, "saturation_lux": 450.0,
//!                 "fov_half_angle_rad": 0.0349, "height_m": 0.2,
//!                 "sampling_rate_hz": 500.0 },
//!   "noise": { "ambient_floor_lux": 20.0 },
//!   "scene": { "objects": [ { "pattern": { "packet": { ... } },
//!                             "start_offset_m": -0.13,
//!                             "speed": { "segments": [ { "duration_s": 1.0, "speed_mps": 0.08 } ] } } ] },
//!   "duration_s": 6.0,
//!   "seed": 0
//! }
//! ```

use std::path::Path;

use pvlc_core::channel::{ChannelError, Scene};
use pvlc_core::{EmitterModel, NoiseModel, ReceiverModel, Scenario};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{from_json, read_to_string, Error};

/// Noise settings; the seed sits at the top level of the file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub ambient_floor_lux: f64,
    #[serde(default)]
    pub ripple_amplitude_lux: f64,
    #[serde(default = "mains")]
    pub ripple_hz: f64,
    #[serde(default)]
    pub gaussian_sigma_lux: f64,
}

fn mains() -> f64 {
    NoiseModel::MAINS_RIPPLE_HZ
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub emitter: EmitterModel,
    pub receiver: ReceiverModel,
    pub noise: NoiseSection,
    pub scene: Scene,
    pub duration_s: f64,
    pub seed: u64,
}

impl ScenarioFile {
    pub fn from_scenario(s: &Scenario) -> Self {
        let n = &s.noise;
        ScenarioFile {
            emitter: s.emitter,
            receiver: s.receiver,
            noise: NoiseSection {
                ambient_floor_lux: n.ambient_floor_lux,
                ripple_amplitude_lux: n.ripple_amplitude_lux,
                ripple_hz: n.ripple_hz,
                gaussian_sigma_lux: n.gaussian_sigma_lux,
            },
            scene: s.scene.clone(),
            duration_s: s.duration_s,
            seed: n.seed,
        }
    }

    pub fn to_scenario(&self) -> Scenario {
        let n = &self.noise;
        Scenario {
            emitter: self.emitter,
            receiver: self.receiver,
            noise: NoiseModel {
                ambient_floor_lux: n.ambient_floor_lux,
                ripple_amplitude_lux: n.ripple_amplitude_lux,
                ripple_hz: n.ripple_hz,
                gaussian_sigma_lux: n.gaussian_sigma_lux,
                seed: self.seed,
            },
            scene: self.scene.clone(),
            duration_s: self.duration_s,
        }
    }

    /// Parses and checks a scenario; `file` only labels errors.
    pub fn parse(text: &str, file: &str) -> Result<Self, Error> {
        let s: ScenarioFile = from_json(text, file)?;
        s.validate(file)?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        Self::parse(&read_to_string(path)?, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes") + "\n"
    }

    /// SHA-256 of the compact JSON form.
    pub fn digest(&self) -> String {
        let compact = serde_json::to_string(self).expect("scenario serializes");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }

    /// Runs the simulator's own checks, naming the offending section.
    pub fn validate(&self, file: &str) -> Result<(), Error> {
        let at = |at: &str, source: ChannelError| Error::Scenario {
            file: file.to_string(),
            at: at.to_string(),
            source,
        };
        self.emitter.validate().map_err(|e| at("emitter", e))?;
        self.receiver.validate().map_err(|e| at("receiver", e))?;
        self.to_scenario().noise.validate().map_err(|e| at("noise", e))?;
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(at(
                "duration_s",
                ChannelError::NonPositiveDuration(self.duration_s),
            ));
        }
        Ok(())
    }

    /// Simulates, mapping remaining errors to the part of the file at fault.
    pub fn simulate(&self, file: &str) -> Result<pvlc_core::RssTrace, Error> {
        self.to_scenario().simulate().map_err(|e| {
            let at = match &e {
                ChannelError::EmptyScene => "scene.objects".to_string(),
                ChannelError::InvalidObject { index, .. } => format!("scene.objects[{index}]"),
                ChannelError::NonPositiveDuration(_) | ChannelError::TooFewSamples(_) => {
                    "duration_s".to_string()
                }
                ChannelError::InvalidEmitter(_) => "emitter".to_string(),
                ChannelError::InvalidReceiver(_) => "receiver".to_string(),
                ChannelError::InvalidNoise(_) => "noise".to_string(),
                _ => "scene".to_string(),
            };
            Error::Scenario {
                file: file.to_string(),
                at,
                source: e,
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pvlc_core::presets;

    #[test]
    fn every_preset_round_trips() {
        for name in presets::NAMES {
            let s = ScenarioFile::from_scenario(&presets::by_name(name, 7).unwrap());
            let back = ScenarioFile::parse(&s.to_json(), name).unwrap();
            assert_eq!(back, s, "{name}");
            assert_eq!(back.to_scenario(), presets::by_name(name, 7).unwrap());
        }
    }

    #[test]
    fn unknown_field_names_its_path() {
        let mut v: serde_json::Value =
            serde_json::from_str(&ScenarioFile::from_scenario(&presets::desk("10")).to_json())
                .unwrap();
        v["receiver"]["gain"] = 3.into();
        let err = ScenarioFile::parse(&v.to_string(), "x.json").unwrap_err().to_string();
        assert!(err.contains("receiver"), "{err}");
        assert!(err.contains("gain"), "{err}");
    }

    #[test]
    fn wrong_type_names_its_path() {
        let mut v: serde_json::Value =
            serde_json::from_str(&ScenarioFile::from_scenario(&presets::desk("10")).to_json())
                .unwrap();
        v["scene"]["objects"][0]["start_offset_m"] = "far".into();
        let err = ScenarioFile::parse(&v.to_string(), "x.json").unwrap_err().to_string();
        assert!(err.contains("scene.objects[0].start_offset_m"), "{err}");
    }

    #[test]
    fn invalid_values_name_their_section() {
        let mut s = ScenarioFile::from_scenario(&presets::desk("10"));
        s.receiver.height_m = -1.0;
        let err = ScenarioFile::parse(&s.to_json(), "x.json").unwrap_err().to_string();
        assert!(err.contains("at `receiver`"), "{err}");
    }

    #[test]
    fn digest_is_stable_and_content_sensitive() {
        let a = ScenarioFile::from_scenario(&presets::desk("10"));
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.seed += 1;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
