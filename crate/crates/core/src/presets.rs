//! Ready-made scenarios: the desk bench, speed change, collisions, vehicles
//! and the height/width sweep.

use alloc::string::String;
use alloc::vec::Vec;

use crate::channel::{
    footprint_width, packet_swing, EmitterKind, EmitterModel, NoiseModel, Pattern, ReceiverKind,
    ReceiverModel, Scenario, Scene, SceneObject, SpeedProfile, VehicleProfile,
    DEFAULT_GROUND_REFLECTANCE,
};
use crate::codec::{build_packet, ReflectivePacket};
use crate::planner::SweepBase;
use crate::DecoderConfig;

pub const PACKET_HIGH: f64 = 0.9;
pub const PACKET_LOW: f64 = 0.05;

pub const DESK_HEIGHT_M: f64 = 0.2;
pub const DESK_WIDTH_M: f64 = 0.03;
pub const DESK_SPEED_MPS: f64 = 0.08;
pub const DESK_LUX: f64 = 300.0;
pub const DESK_FLOOR_LUX: f64 = 20.0;
pub const DESK_FS_HZ: f64 = 500.0;
/// Narrow photodiode aperture on the bench: a 1.4 cm footprint at 20 cm.
pub const DESK_FOV_DEG: f64 = 2.0;

pub const CAR_SPEED_MPS: f64 = 5.0;
pub const CAR_WIDTH_M: f64 = 0.10;
pub const CAR_FS_HZ: f64 = 2000.0;
pub const CAR_METAL: f64 = 0.45;
pub const CAR_GLASS: f64 = 0.1;
pub const ROOF_PACKET_OFFSET_M: f64 = 0.2;

/// Bare ground before and after an object, in symbol widths.
const MARGIN_SYMBOLS: f64 = 4.0;

fn packet(bits: &str, width: f64) -> ReflectivePacket {
    build_packet(bits, width, PACKET_HIGH, PACKET_LOW).expect("preset packets are valid")
}

/// Scene in which `pattern` passes fully under the receiver, with some bare
/// ground at both ends. Returns the scene and its duration.
fn transit(pattern: Pattern, receiver: &ReceiverModel, speed: SpeedProfile, margin_m: f64) -> (Scene, f64) {
    let fp = footprint_width(receiver);
    let lead = 0.5 * fp + margin_m;
    let travel = lead + pattern.length_m() + 0.5 * fp + margin_m;
    let duration = speed.time_at_distance(travel);
    (
        Scene::single(SceneObject::new(pattern, -lead, speed)),
        duration,
    )
}

pub fn desk_receiver() -> ReceiverModel {
    ReceiverModel::builtin(ReceiverKind::PdG1, DESK_HEIGHT_M, DESK_FS_HZ).with_fov_deg(DESK_FOV_DEG)
}

pub fn desk_emitter() -> EmitterModel {
    EmitterModel::new(EmitterKind::LedLamp, DESK_LUX)
}

/// Swing of a desk packet at the receiver.
pub fn desk_swing() -> f64 {
    packet_swing(&desk_emitter(), &desk_receiver(), &packet("", DESK_WIDTH_M), 1.0)
}

/// The bench: 3 cm symbols at 8 cm/s under a photodiode 20 cm up, LED lamp,
/// black ground. Noise free apart from the ambient floor.
pub fn desk(bits: &str) -> Scenario {
    let receiver = desk_receiver();
    let (scene, duration_s) = transit(
        Pattern::Packet(packet(bits, DESK_WIDTH_M)),
        &receiver,
        SpeedProfile::constant(DESK_SPEED_MPS),
        MARGIN_SYMBOLS * DESK_WIDTH_M,
    );
    Scenario {
        emitter: desk_emitter(),
        receiver,
        noise: NoiseModel::quiet().with_floor(DESK_FLOOR_LUX),
        scene,
        duration_s,
    }
}

/// [`desk`] with Gaussian detector noise at `snr_db`.
pub fn desk_noisy(bits: &str, snr_db: f64, seed: u64) -> Scenario {
    let mut s = desk(bits);
    s.noise = s
        .noise
        .with_sigma(NoiseModel::sigma_for_snr(desk_swing(), snr_db))
        .with_seed(seed);
    s
}

/// [`desk`] under a fluorescent tube: 100 Hz mains ripple on the light.
pub fn desk_fluorescent(bits: &str, seed: u64) -> Scenario {
    let mut s = desk(bits);
    s.emitter.kind = EmitterKind::Fluorescent;
    s.receiver.sampling_rate_hz = 2000.0;
    s.noise = s
        .noise
        .with_ripple(0.05 * DESK_LUX, NoiseModel::MAINS_RIPPLE_HZ)
        .with_sigma(0.01 * desk_swing())
        .with_seed(seed);
    s
}

/// Sampling rate of the speed-change scenario and its templates.
pub const SPEED_CHANGE_FS_HZ: f64 = 100.0;

/// Clean desk transit of `bits` at constant speed, sampled like the
/// speed-change scenario: the template for that payload.
pub fn speed_template(bits: &str) -> Scenario {
    let mut s = desk(bits);
    s.receiver.sampling_rate_hz = SPEED_CHANGE_FS_HZ;
    s
}

/// A desk packet carrying "10" whose speed doubles right after the preamble
/// has passed the receiver.
pub fn speed_change(snr_db: f64, seed: u64) -> Scenario {
    let mut s = speed_template("10");
    let obj = &mut s.scene.objects[0];
    // Preamble trailing edge reaches the receiver axis.
    let switch_at = (4.0 * DESK_WIDTH_M - obj.start_offset_m) / DESK_SPEED_MPS;
    obj.speed = SpeedProfile::step(DESK_SPEED_MPS, switch_at, 2.0 * DESK_SPEED_MPS);
    let travel = -obj.start_offset_m * 2.0 + obj.pattern.length_m();
    s.duration_s = obj.speed.time_at_distance(travel);
    s.noise = s
        .noise
        .with_sigma(NoiseModel::sigma_for_snr(desk_swing(), snr_db))
        .with_seed(seed);
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionCase {
    /// The low-frequency packet takes most of the field of view.
    LowDominates,
    /// The high-frequency packet takes most of the field of view.
    HighDominates,
    /// Both share the field of view equally.
    EqualShare,
}

impl CollisionCase {
    pub const ALL: [CollisionCase; 3] = [
        CollisionCase::LowDominates,
        CollisionCase::HighDominates,
        CollisionCase::EqualShare,
    ];

    /// FoV shares of (low, high) frequency packet.
    pub fn shares(self) -> (f64, f64) {
        match self {
            CollisionCase::LowDominates => (0.85, 0.15),
            CollisionCase::HighDominates => (0.15, 0.85),
            CollisionCase::EqualShare => (0.5, 0.5),
        }
    }
}

pub const COLLISION_SPEED_MPS: f64 = 0.4;
pub const COLLISION_LOW_WIDTH_M: f64 = 0.08;
pub const COLLISION_HIGH_WIDTH_M: f64 = 0.02;
pub const COLLISION_FS_HZ: f64 = 200.0;
pub const COLLISION_FFT_LEN: usize = 256;
/// 6 symbols of 8 cm.
pub const COLLISION_LOW_BITS: &str = "0";
/// 24 symbols of 2 cm.
pub const COLLISION_HIGH_BITS: &str = "0000000000";

/// Fundamental of an all-zero packet, `speed / (2 * width)`.
pub fn alternating_fundamental_hz(speed_mps: f64, width_m: f64) -> f64 {
    speed_mps / (2.0 * width_m)
}

/// Two equal-length alternating packets, 8 cm and 2 cm symbols, passing
/// side by side under one receiver. The leading edges are aligned, so the
/// narrow packet's preamble lies within one wide symbol. `snr_db` is relative to the swing of a
/// packet filling the whole field of view; `None` is noise free.
pub fn collision(case: CollisionCase, snr_db: Option<f64>, seed: u64) -> Scenario {
    let receiver = ReceiverModel::builtin(ReceiverKind::PdG1, DESK_HEIGHT_M, COLLISION_FS_HZ)
        .with_fov_deg(1.0);
    let emitter = desk_emitter();
    let low = packet(COLLISION_LOW_BITS, COLLISION_LOW_WIDTH_M);
    let high = packet(COLLISION_HIGH_BITS, COLLISION_HIGH_WIDTH_M);
    let swing = packet_swing(&emitter, &receiver, &low, 1.0);
    let (share_low, share_high) = case.shares();
    let margin = 0.01;
    let (mut scene, duration_s) = transit(
        Pattern::Packet(low),
        &receiver,
        SpeedProfile::constant(COLLISION_SPEED_MPS),
        margin,
    );
    let lead = scene.objects[0].start_offset_m;
    scene.objects[0].fov_share = share_low;
    scene.objects.push(
        SceneObject::new(
            Pattern::Packet(high),
            lead,
            SpeedProfile::constant(COLLISION_SPEED_MPS),
        )
        .with_share(share_high),
    );
    let mut noise = NoiseModel::quiet().with_floor(DESK_FLOOR_LUX).with_seed(seed);
    if let Some(snr) = snr_db {
        noise = noise.with_sigma(NoiseModel::sigma_for_snr(swing, snr));
    }
    Scenario {
        emitter,
        receiver,
        noise,
        scene,
        duration_s,
    }
}

/// Outdoor light and detector for a vehicle scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outdoor {
    pub receiver: ReceiverModel,
    pub illuminance_lux: f64,
    pub floor_lux: f64,
    pub sigma: f64,
}

/// Well illuminated street: RX-LED 75 cm above the roof with a 3° half-angle,
/// 6200 lux ambient floor, bright sun on the car.
pub fn well_lit() -> Outdoor {
    Outdoor {
        receiver: ReceiverModel::builtin(ReceiverKind::RxLed, 0.75, CAR_FS_HZ).with_fov_deg(3.0),
        illuminance_lux: 20000.0,
        floor_lux: 6200.0,
        sigma: 0.5,
    }
}

/// Mildly illuminated street: photodiode at gain G2 25 cm above the roof,
/// 100 lux floor. `capped` fits a 10° cap over the 45° photodiode.
pub fn mild(capped: bool) -> Outdoor {
    let mut receiver = ReceiverModel::builtin(ReceiverKind::PdG2, 0.25, CAR_FS_HZ);
    if capped {
        receiver = receiver.with_cap_deg(10.0);
    }
    Outdoor {
        receiver,
        illuminance_lux: 1000.0,
        floor_lux: 100.0,
        sigma: 1.0,
    }
}

/// Bright scene at a 6000 lux floor seen by `kind` with `fov_deg` half-angle.
pub fn high_floor(kind: ReceiverKind) -> Outdoor {
    let receiver = ReceiverModel::builtin(kind, 0.75, CAR_FS_HZ).with_fov_deg(3.0);
    Outdoor {
        receiver,
        illuminance_lux: 20000.0,
        floor_lux: 6000.0,
        sigma: 0.5,
    }
}

/// Hatchback with 10 cm symbols of `bits` on the roof (or a bare roof for
/// `None`) at 18 km/h.
pub fn vehicle(bits: Option<&str>, light: Outdoor, seed: u64) -> Scenario {
    let mut car = VehicleProfile::volvo_v40(CAR_METAL, CAR_GLASS);
    if let Some(b) = bits {
        car = car.with_packet(packet(b, CAR_WIDTH_M), ROOF_PACKET_OFFSET_M);
    }
    let (scene, duration_s) = transit(
        Pattern::Vehicle(car),
        &light.receiver,
        SpeedProfile::constant(CAR_SPEED_MPS),
        0.5,
    );
    Scenario {
        emitter: EmitterModel::new(EmitterKind::Sun, light.illuminance_lux),
        receiver: light.receiver,
        noise: NoiseModel::quiet()
            .with_floor(light.floor_lux)
            .with_sigma(light.sigma)
            .with_seed(seed),
        scene,
        duration_s,
    }
}

/// Decoder settings for vehicle traces.
pub fn vehicle_decoder() -> DecoderConfig {
    DecoderConfig {
        smoothing_window: 9,
        ..DecoderConfig::default()
    }
}

/// Half-angle of the sweep photodiode: a 2.1 cm footprint at 20 cm.
pub const SWEEP_FOV_DEG: f64 = 3.0;
/// Detector SNR of the sweep at the reference height.
pub const SWEEP_SNR_DB: f64 = 40.0;

/// Bench sweep: "00" at 8 cm/s, photodiode G1 with a 3° half-angle.
/// Emitter illuminance on the surface is fixed, so the signal drops with
/// height while detector noise does not.
pub fn sweep_base() -> SweepBase {
    let receiver = desk_receiver().with_fov_deg(SWEEP_FOV_DEG);
    SweepBase {
        emitter: desk_emitter(),
        receiver,
        noise: NoiseModel::quiet()
            .with_floor(DESK_FLOOR_LUX)
            .with_sigma(NoiseModel::sigma_for_snr(desk_swing(), SWEEP_SNR_DB))
            .with_seed(1),
        bits: String::from("00"),
        reflectance_high: PACKET_HIGH,
        reflectance_low: PACKET_LOW,
        speed_mps: DESK_SPEED_MPS,
        trials: 5,
        ground_reflectance: DEFAULT_GROUND_REFLECTANCE,
        decoder: DecoderConfig::default(),
    }
}

/// Heights 0.20 to 0.55 m in 5 cm steps.
pub fn sweep_heights() -> Vec<f64> {
    (0..8).map(|i| 0.2 + 0.05 * i as f64).collect()
}

/// Widths 1.5 to 7.5 cm in 2.5 mm steps.
pub fn sweep_widths() -> Vec<f64> {
    (0..25).map(|i| 0.015 + 0.0025 * i as f64).collect()
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 14] = [
    "desk-00",
    "desk-10",
    "desk-fluorescent",
    "speed-change",
    "template-00",
    "template-10",
    "collision-case1",
    "collision-case2",
    "collision-case3",
    "vehicle-bare",
    "vehicle-well-lit",
    "vehicle-mild-uncapped",
    "vehicle-mild-capped",
    "vehicle-pd-g3-6000",
];

/// A preset by name, with `seed` for its noise.
pub fn by_name(name: &str, seed: u64) -> Option<Scenario> {
    let s = match name {
        "desk-00" => desk("00"),
        "desk-10" => desk("10"),
        "desk-fluorescent" => desk_fluorescent("00", seed),
        "speed-change" => speed_change(15.0, seed),
        "template-00" => speed_template("00"),
        "template-10" => speed_template("10"),
        "collision-case1" => collision(CollisionCase::LowDominates, Some(20.0), seed),
        "collision-case2" => collision(CollisionCase::HighDominates, Some(20.0), seed),
        "collision-case3" => collision(CollisionCase::EqualShare, Some(20.0), seed),
        "vehicle-bare" => vehicle(None, well_lit(), seed),
        "vehicle-well-lit" => vehicle(Some("00"), well_lit(), seed),
        "vehicle-mild-uncapped" => vehicle(Some("00"), mild(false), seed),
        "vehicle-mild-capped" => vehicle(Some("00"), mild(true), seed),
        "vehicle-pd-g3-6000" => vehicle(Some("00"), high_floor(ReceiverKind::PdG3), seed),
        _ => return None,
    };
    Some(s)
}
