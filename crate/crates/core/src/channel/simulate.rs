use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::scene::validate_object;
use super::{
    render_reflectance, ChannelError, EmitterModel, NoiseModel, ReceiverModel, RssTrace, Scene,
    TraceMeta,
};
use crate::codec::ReflectivePacket;

/// Receiver height at which the path gain is 1.
pub const REFERENCE_HEIGHT_M: f64 = 0.2;

/// Ground footprint of the receiver's (possibly capped) field of view.
pub fn footprint_width(receiver: &ReceiverModel) -> f64 {
    2.0 * receiver.height_m * libm::tan(receiver.effective_half_angle_rad())
}

/// Inverse-square gain relative to [`REFERENCE_HEIGHT_M`].
pub fn path_gain(height_m: f64) -> f64 {
    let r = REFERENCE_HEIGHT_M / height_m;
    r * r
}

/// Symbols per second passing under the receiver.
pub fn transit_symbol_rate(speed_mps: f64, symbol_width_m: f64) -> f64 {
    speed_mps / symbol_width_m
}

/// Peak-to-peak received swing between a packet's HIGH and LOW symbols, for
/// a footprint narrower than one symbol and no clipping.
pub fn packet_swing(
    emitter: &EmitterModel,
    receiver: &ReceiverModel,
    packet: &ReflectivePacket,
    fov_share: f64,
) -> f64 {
    receiver.sensitivity
        * path_gain(receiver.height_m)
        * emitter.illuminance_lux
        * fov_share
        * (packet.reflectance_high() - packet.reflectance_low())
}

/// A complete simulation input.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Scenario {
    pub emitter: EmitterModel,
    pub receiver: ReceiverModel,
    pub noise: NoiseModel,
    pub scene: Scene,
    pub duration_s: f64,
}

impl Scenario {
    pub fn simulate(&self) -> Result<RssTrace, ChannelError> {
        simulate(
            &self.scene,
            &self.emitter,
            &self.receiver,
            &self.noise,
            self.duration_s,
        )
    }
}

/// Samples the received signal strength of `scene`.
///
/// Each sample is the FoV-share weighted box average of every object's
/// reflectance over the footprint, scaled by sensitivity, path gain and
/// illuminance; then floor, ripple and detector noise are added and the
/// result is clipped to `[0, saturation_lux * sensitivity]`.
pub fn simulate(
    scene: &Scene,
    emitter: &EmitterModel,
    receiver: &ReceiverModel,
    noise: &NoiseModel,
    duration_s: f64,
) -> Result<RssTrace, ChannelError> {
    if scene.objects.is_empty() {
        return Err(ChannelError::EmptyScene);
    }
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(ChannelError::NonPositiveDuration(duration_s));
    }
    emitter.validate()?;
    receiver.validate()?;
    noise.validate()?;
    if !(0.0..1.0).contains(&scene.ground_reflectance) {
        return Err(ChannelError::InvalidObject {
            index: 0,
            reason: "ground_reflectance must lie in [0, 1)",
        });
    }
    for (i, o) in scene.objects.iter().enumerate() {
        validate_object(i, o)?;
    }
    let fs = receiver.sampling_rate_hz;
    let n = libm::floor(duration_s * fs + 1e-9) as usize;
    if n < 16 {
        return Err(ChannelError::TooFewSamples(n));
    }
    let w = footprint_width(receiver);
    check_fov_shares(scene, w, duration_s)?;

    let profiles: Vec<_> = scene
        .objects
        .iter()
        .map(|o| render_reflectance(o, scene.ground_reflectance))
        .collect();
    let scale = receiver.sensitivity * path_gain(receiver.height_m) * emitter.illuminance_lux;
    let floor = noise.ambient_floor_lux * receiver.sensitivity;
    let ripple = noise.ripple_amplitude_lux * receiver.sensitivity;
    let ceiling = receiver.ceiling();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let gauss = (noise.gaussian_sigma_lux > 0.0)
        .then(|| Normal::new(0.0, noise.gaussian_sigma_lux).expect("sigma validated"));

    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let reflected: f64 = scene
                .objects
                .iter()
                .zip(&profiles)
                .map(|(o, prof)| {
                    // Ground x in [-w/2, w/2] sees local coordinate pos - x.
                    let pos = o.position_at(t);
                    o.fov_share * prof.mean_over(pos - 0.5 * w, pos + 0.5 * w)
                })
                .sum();
            let mut v = scale * reflected + floor;
            if ripple > 0.0 {
                v += ripple * libm::sin(2.0 * PI * noise.ripple_hz * t);
            }
            if let Some(g) = &gauss {
                v += g.sample(&mut rng);
            }
            v.clamp(0.0, ceiling)
        })
        .collect();

    Ok(RssTrace::new(fs, samples)?.with_meta(TraceMeta {
        saturation_ceiling: Some(ceiling),
        scenario: None,
    }))
}

/// Rejects scenes where objects overlapping the footprint at the same time
/// claim more than the whole field of view.
fn check_fov_shares(scene: &Scene, footprint: f64, duration_s: f64) -> Result<(), ChannelError> {
    if scene.objects.len() < 2 {
        return Ok(());
    }
    // (time, +share on entry / -share on exit)
    let mut events = Vec::with_capacity(scene.objects.len() * 2);
    for o in &scene.objects {
        let len = o.pattern.length_m();
        let enter = o.speed.time_at_distance(-0.5 * footprint - o.start_offset_m);
        let leave = o.speed.time_at_distance(len + 0.5 * footprint - o.start_offset_m);
        let (enter, leave) = (enter.max(0.0), leave.min(duration_s));
        if enter < leave {
            events.push((enter, o.fov_share));
            events.push((leave, -o.fov_share));
        }
    }
    // exits before entries at equal times
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut total = 0.0;
    for (t, d) in events {
        total += d;
        if total > 1.0 + 1e-9 {
            return Err(ChannelError::FovOversubscribed {
                at_s: t,
                total_share: total,
            });
        }
    }
    Ok(())
}
