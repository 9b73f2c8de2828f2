use alloc::vec::Vec;

use super::ChannelError;
use crate::codec::ReflectivePacket;

/// Tarmac-like black ground.
pub const DEFAULT_GROUND_REFLECTANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SpeedSegment {
    pub duration_s: f64,
    pub speed_mps: f64,
}

/// Piecewise-constant speed. After the final segment the object keeps its
/// final speed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SpeedProfile {
    pub segments: Vec<SpeedSegment>,
}

impl SpeedProfile {
    pub fn constant(speed_mps: f64) -> Self {
        Self {
            segments: alloc::vec![SpeedSegment {
                duration_s: 1.0,
                speed_mps,
            }],
        }
    }

    /// `first` m/s for `switch_after_s` seconds, `then` m/s afterwards.
    pub fn step(first: f64, switch_after_s: f64, then: f64) -> Self {
        Self {
            segments: alloc::vec![
                SpeedSegment {
                    duration_s: switch_after_s,
                    speed_mps: first,
                },
                SpeedSegment {
                    duration_s: 1.0,
                    speed_mps: then,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if self.segments.is_empty() {
            return Err("speed profile has no segments");
        }
        for s in &self.segments {
            if !(s.duration_s > 0.0 && s.duration_s.is_finite()) {
                return Err("speed segment duration must be > 0");
            }
            if !(s.speed_mps > 0.0 && s.speed_mps.is_finite()) {
                return Err("speed must be > 0");
            }
        }
        Ok(())
    }

    /// Distance travelled after `t` seconds.
    pub fn distance_at(&self, t: f64) -> f64 {
        let mut elapsed = 0.0;
        let mut dist = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            let last = i + 1 == self.segments.len();
            if last || t < elapsed + s.duration_s {
                return dist + (t - elapsed) * s.speed_mps;
            }
            elapsed += s.duration_s;
            dist += s.duration_s * s.speed_mps;
        }
        dist
    }

    /// Time at which `distance` has been travelled. Negative distances map to
    /// negative times at the initial speed.
    pub fn time_at_distance(&self, distance: f64) -> f64 {
        let mut elapsed = 0.0;
        let mut dist = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            let last = i + 1 == self.segments.len();
            let span = s.duration_s * s.speed_mps;
            if last || distance < dist + span {
                return elapsed + (distance - dist) / s.speed_mps;
            }
            elapsed += s.duration_s;
            dist += span;
        }
        elapsed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BodyPart {
    Hood,
    Windshield,
    Roof,
    RearWindshield,
    Trunk,
}

impl BodyPart {
    pub fn is_glass(self) -> bool {
        matches!(self, BodyPart::Windshield | BodyPart::RearWindshield)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct VehicleSegment {
    pub part: BodyPart,
    pub length_m: f64,
    pub reflectance: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct EmbeddedPacket {
    pub packet: ReflectivePacket,
    /// Distance from the front of the roof to the packet's first symbol.
    pub offset_m: f64,
}

/// Top view of a car, front to back.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct VehicleProfile {
    pub segments: Vec<VehicleSegment>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub embedded_packet: Option<EmbeddedPacket>,
}

impl VehicleProfile {
    /// Hatchback proportions: long hood and windshield, roof, short rear.
    pub fn volvo_v40(metal: f64, glass: f64) -> Self {
        let seg = |part, length_m, reflectance| VehicleSegment {
            part,
            length_m,
            reflectance,
        };
        Self {
            segments: alloc::vec![
                seg(BodyPart::Hood, 1.0, metal),
                seg(BodyPart::Windshield, 0.8, glass),
                seg(BodyPart::Roof, 1.4, metal),
                seg(BodyPart::RearWindshield, 0.5, glass),
                seg(BodyPart::Trunk, 0.4, metal),
            ],
            embedded_packet: None,
        }
    }

    pub fn with_packet(mut self, packet: ReflectivePacket, offset_m: f64) -> Self {
        self.embedded_packet = Some(EmbeddedPacket { packet, offset_m });
        self
    }

    pub fn length_m(&self) -> f64 {
        self.segments.iter().map(|s| s.length_m).sum()
    }

    /// Start position and length of the first roof segment.
    pub fn roof(&self) -> Option<(f64, f64)> {
        let mut at = 0.0;
        for s in &self.segments {
            if s.part == BodyPart::Roof {
                return Some((at, s.length_m));
            }
            at += s.length_m;
        }
        None
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if self.segments.is_empty() {
            return Err("vehicle has no segments");
        }
        for s in &self.segments {
            if !(s.length_m > 0.0 && s.length_m.is_finite()) {
                return Err("vehicle segment length must be > 0");
            }
            if !(0.0..=1.0).contains(&s.reflectance) {
                return Err("vehicle reflectance must lie in [0, 1]");
            }
        }
        let glass_max = self
            .segments
            .iter()
            .filter(|s| s.part.is_glass())
            .map(|s| s.reflectance)
            .fold(f64::NEG_INFINITY, f64::max);
        let metal_min = self
            .segments
            .iter()
            .filter(|s| !s.part.is_glass())
            .map(|s| s.reflectance)
            .fold(f64::INFINITY, f64::min);
        if metal_min <= glass_max {
            return Err("metal segments must reflect more than glass segments");
        }
        if let Some(e) = &self.embedded_packet {
            let (_, roof_len) = self.roof().ok_or("embedded packet needs a roof segment")?;
            if e.offset_m < 0.0 || e.offset_m + e.packet.length_m() > roof_len + 1e-12 {
                return Err("embedded packet must fit on the roof");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", deny_unknown_fields))]
pub enum Pattern {
    Packet(ReflectivePacket),
    Vehicle(VehicleProfile),
}

impl Pattern {
    pub fn length_m(&self) -> f64 {
        match self {
            Pattern::Packet(p) => p.length_m(),
            Pattern::Vehicle(v) => v.length_m(),
        }
    }
}

/// A moving pattern. Its leading edge sits at ground coordinate
/// `start_offset_m + distance(t)`, with the receiver above coordinate 0 and
/// motion in the positive direction; negative offsets start upstream.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SceneObject {
    pub pattern: Pattern,
    pub start_offset_m: f64,
    pub speed: SpeedProfile,
    #[cfg_attr(feature = "serde", serde(default = "one"))]
    pub fov_share: f64,
}

#[cfg(feature = "serde")]
fn one() -> f64 {
    1.0
}

#[cfg(feature = "serde")]
fn default_ground() -> f64 {
    DEFAULT_GROUND_REFLECTANCE
}

impl SceneObject {
    pub fn new(pattern: Pattern, start_offset_m: f64, speed: SpeedProfile) -> Self {
        Self {
            pattern,
            start_offset_m,
            speed,
            fov_share: 1.0,
        }
    }

    pub fn with_share(mut self, share: f64) -> Self {
        self.fov_share = share;
        self
    }

    /// Ground coordinate of the leading edge at time `t`.
    pub fn position_at(&self, t: f64) -> f64 {
        self.start_offset_m + self.speed.distance_at(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Scene {
    pub objects: Vec<SceneObject>,
    #[cfg_attr(feature = "serde", serde(default = "default_ground"))]
    pub ground_reflectance: f64,
}

impl Scene {
    pub fn new(objects: Vec<SceneObject>) -> Self {
        Self {
            objects,
            ground_reflectance: DEFAULT_GROUND_REFLECTANCE,
        }
    }

    pub fn single(object: SceneObject) -> Self {
        Self::new(alloc::vec![object])
    }
}

/// Piecewise-constant reflectance along an object, measured backwards from
/// its leading edge, with `ground` outside `[0, length)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectanceProfile {
    /// `edges[i]..edges[i + 1]` carries `values[i]`.
    edges: Vec<f64>,
    values: Vec<f64>,
    /// Integral of the reflectance from 0 up to `edges[i]`.
    cumulative: Vec<f64>,
    ground: f64,
}

impl ReflectanceProfile {
    fn from_runs(runs: impl IntoIterator<Item = (f64, f64)>, ground: f64) -> Self {
        let mut edges = alloc::vec![0.0];
        let mut values = Vec::new();
        let mut cumulative = alloc::vec![0.0];
        let mut at = 0.0;
        let mut acc = 0.0;
        for (len, v) in runs {
            if len <= 0.0 {
                continue;
            }
            at += len;
            acc += len * v;
            edges.push(at);
            values.push(v);
            cumulative.push(acc);
        }
        Self {
            edges,
            values,
            cumulative,
            ground,
        }
    }

    pub fn length_m(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    pub fn ground(&self) -> f64 {
        self.ground
    }

    /// Reflectance at local coordinate `u`.
    pub fn at(&self, u: f64) -> f64 {
        if u < 0.0 || u >= self.length_m() {
            return self.ground;
        }
        let i = self.edges.partition_point(|&e| e <= u) - 1;
        self.values[i]
    }

    /// Breakpoints and the values between them.
    pub fn runs(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.edges[i], self.edges[i + 1], v))
    }

    /// Antiderivative with ground outside the object, zero at `u = 0`.
    fn primitive(&self, u: f64) -> f64 {
        let len = self.length_m();
        if u <= 0.0 {
            return self.ground * u;
        }
        if u >= len {
            return *self.cumulative.last().unwrap() + self.ground * (u - len);
        }
        let i = self.edges.partition_point(|&e| e <= u) - 1;
        self.cumulative[i] + self.values[i] * (u - self.edges[i])
    }

    /// Exact mean over `[a, b]`; a point sample when the interval is empty.
    pub fn mean_over(&self, a: f64, b: f64) -> f64 {
        if b - a <= 1e-15 {
            return self.at(0.5 * (a + b));
        }
        (self.primitive(b) - self.primitive(a)) / (b - a)
    }
}

/// Reflectance seen along an object, from its leading edge backwards.
pub fn render_reflectance(object: &SceneObject, ground: f64) -> ReflectanceProfile {
    match &object.pattern {
        Pattern::Packet(p) => ReflectanceProfile::from_runs(
            p.symbols()
                .iter()
                .map(|&s| (p.symbol_width_m(), p.reflectance_of(s))),
            ground,
        ),
        Pattern::Vehicle(v) => {
            let mut runs = Vec::new();
            let roof_start = v.roof().map(|(s, _)| s);
            let mut at = 0.0;
            for seg in &v.segments {
                match (&v.embedded_packet, roof_start) {
                    (Some(e), Some(rs)) if at == rs && seg.part == BodyPart::Roof => {
                        let p = &e.packet;
                        runs.push((e.offset_m, seg.reflectance));
                        runs.extend(
                            p.symbols()
                                .iter()
                                .map(|&s| (p.symbol_width_m(), p.reflectance_of(s))),
                        );
                        runs.push((seg.length_m - e.offset_m - p.length_m(), seg.reflectance));
                    }
                    _ => runs.push((seg.length_m, seg.reflectance)),
                }
                at += seg.length_m;
            }
            ReflectanceProfile::from_runs(runs, ground)
        }
    }
}

pub(super) fn validate_object(index: usize, o: &SceneObject) -> Result<(), ChannelError> {
    let bad = |reason| ChannelError::InvalidObject { index, reason };
    o.speed.validate().map_err(bad)?;
    if !(o.fov_share > 0.0 && o.fov_share <= 1.0) {
        return Err(bad("fov_share must lie in (0, 1]"));
    }
    if !o.start_offset_m.is_finite() {
        return Err(bad("start_offset_m must be finite"));
    }
    if let Pattern::Vehicle(v) = &o.pattern {
        v.validate().map_err(bad)?;
    }
    Ok(())
}
