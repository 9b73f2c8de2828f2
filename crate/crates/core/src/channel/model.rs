use core::f64::consts::FRAC_PI_2;

use super::ChannelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EmitterKind {
    LedLamp,
    Fluorescent,
    Sun,
}

/// Unmodulated light source, described by the illuminance it puts on the
/// reflective surfaces. The kind is informational only.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct EmitterModel {
    pub illuminance_lux: f64,
    pub kind: EmitterKind,
}

impl EmitterModel {
    pub fn new(kind: EmitterKind, illuminance_lux: f64) -> Self {
        Self {
            illuminance_lux,
            kind,
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.illuminance_lux > 0.0 && self.illuminance_lux.is_finite() {
            Ok(())
        } else {
            Err(ChannelError::InvalidEmitter("illuminance_lux must be > 0"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ReceiverKind {
    #[cfg_attr(feature = "serde", serde(rename = "PD_G1"))]
    PdG1,
    #[cfg_attr(feature = "serde", serde(rename = "PD_G2"))]
    PdG2,
    #[cfg_attr(feature = "serde", serde(rename = "PD_G3"))]
    PdG3,
    RxLed,
    Custom,
}

impl ReceiverKind {
    pub const BUILTIN: [ReceiverKind; 4] = [
        ReceiverKind::PdG1,
        ReceiverKind::PdG2,
        ReceiverKind::PdG3,
        ReceiverKind::RxLed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReceiverKind::PdG1 => "PD_G1",
            ReceiverKind::PdG2 => "PD_G2",
            ReceiverKind::PdG3 => "PD_G3",
            ReceiverKind::RxLed => "RxLed",
            ReceiverKind::Custom => "Custom",
        }
    }

    /// `(saturation_lux, relative_sensitivity)` measured for the built-in
    /// detectors, sensitivity normalized to the photodiode at gain G1.
    pub fn datasheet(self) -> Option<(f64, f64)> {
        match self {
            ReceiverKind::PdG1 => Some((450.0, 1.0)),
            ReceiverKind::PdG2 => Some((1200.0, 0.45)),
            ReceiverKind::PdG3 => Some((5000.0, 0.089)),
            ReceiverKind::RxLed => Some((35000.0, 0.013)),
            ReceiverKind::Custom => None,
        }
    }

    /// Default half-angle of the field of view: 45° for photodiodes, 15° for
    /// the receiving LED. Scenarios override these freely.
    pub fn default_fov_half_angle_rad(self) -> f64 {
        match self {
            ReceiverKind::RxLed => 15f64.to_radians(),
            _ => 45f64.to_radians(),
        }
    }
}

/// Photodetector: gain, ceiling, geometry and sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ReceiverModel {
    pub kind: ReceiverKind,
    /// Relative gain; 1.0 is the photodiode at G1.
    pub sensitivity: f64,
    pub saturation_lux: f64,
    pub fov_half_angle_rad: f64,
    /// Height above the reflective plane.
    pub height_m: f64,
    pub sampling_rate_hz: f64,
    /// Physical cap narrowing the FoV to this half-angle.
    #[cfg_attr(feature = "serde", serde(default))]
    pub cap_half_angle_rad: Option<f64>,
}

impl ReceiverModel {
    /// A built-in detector with its measured saturation/sensitivity and default FoV.
    ///
    /// Panics for [`ReceiverKind::Custom`], which has no datasheet values; use
    /// [`ReceiverModel::custom`].
    pub fn builtin(kind: ReceiverKind, height_m: f64, sampling_rate_hz: f64) -> Self {
        let (saturation_lux, sensitivity) = kind
            .datasheet()
            .expect("custom receivers need explicit saturation and sensitivity");
        Self {
            kind,
            sensitivity,
            saturation_lux,
            fov_half_angle_rad: kind.default_fov_half_angle_rad(),
            height_m,
            sampling_rate_hz,
            cap_half_angle_rad: None,
        }
    }

    pub fn custom(
        sensitivity: f64,
        saturation_lux: f64,
        fov_half_angle_rad: f64,
        height_m: f64,
        sampling_rate_hz: f64,
    ) -> Self {
        Self {
            kind: ReceiverKind::Custom,
            sensitivity,
            saturation_lux,
            fov_half_angle_rad,
            height_m,
            sampling_rate_hz,
            cap_half_angle_rad: None,
        }
    }

    pub fn with_fov_deg(mut self, half_angle_deg: f64) -> Self {
        self.fov_half_angle_rad = half_angle_deg.to_radians();
        self
    }

    pub fn with_cap_deg(mut self, half_angle_deg: f64) -> Self {
        self.cap_half_angle_rad = Some(half_angle_deg.to_radians());
        self
    }

    pub fn with_height(mut self, height_m: f64) -> Self {
        self.height_m = height_m;
        self
    }

    /// Half-angle actually seen by the detector: the cap if fitted.
    pub fn effective_half_angle_rad(&self) -> f64 {
        self.cap_half_angle_rad.unwrap_or(self.fov_half_angle_rad)
    }

    /// Output ceiling in trace units.
    pub fn ceiling(&self) -> f64 {
        self.saturation_lux * self.sensitivity
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let err = ChannelError::InvalidReceiver;
        if !(self.sensitivity > 0.0 && self.sensitivity.is_finite()) {
            return Err(err("sensitivity must be > 0"));
        }
        if !(self.saturation_lux > 0.0 && self.saturation_lux.is_finite()) {
            return Err(err("saturation_lux must be > 0"));
        }
        if !(self.fov_half_angle_rad > 0.0 && self.fov_half_angle_rad < FRAC_PI_2) {
            return Err(err("fov_half_angle_rad must lie in (0, pi/2)"));
        }
        if !(self.height_m > 0.0 && self.height_m.is_finite()) {
            return Err(err("height_m must be > 0"));
        }
        if !(self.sampling_rate_hz > 0.0 && self.sampling_rate_hz.is_finite()) {
            return Err(err("sampling_rate_hz must be > 0"));
        }
        if let Some(cap) = self.cap_half_angle_rad {
            if !(cap > 0.0 && cap < self.fov_half_angle_rad) {
                return Err(err("cap must be > 0 and narrower than the FoV"));
            }
        }
        if let Some((sat, sens)) = self.kind.datasheet() {
            if sat != self.saturation_lux || sens != self.sensitivity {
                return Err(err("built-in kinds must keep their datasheet values"));
            }
        }
        Ok(())
    }
}

/// Everything added on top of the reflected signal.
///
/// `ambient_floor_lux` and `ripple_amplitude_lux` are incident light and get
/// scaled by the detector sensitivity. `gaussian_sigma_lux` is detector noise
/// referred to the output, in the same units as the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct NoiseModel {
    pub ambient_floor_lux: f64,
    pub ripple_amplitude_lux: f64,
    #[cfg_attr(feature = "serde", serde(default = "default_ripple_hz"))]
    pub ripple_hz: f64,
    pub gaussian_sigma_lux: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
}

#[cfg(feature = "serde")]
fn default_ripple_hz() -> f64 {
    NoiseModel::MAINS_RIPPLE_HZ
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::quiet()
    }
}

impl NoiseModel {
    /// Rectified 50 Hz mains.
    pub const MAINS_RIPPLE_HZ: f64 = 100.0;

    /// No floor, no ripple, no noise.
    pub fn quiet() -> Self {
        Self {
            ambient_floor_lux: 0.0,
            ripple_amplitude_lux: 0.0,
            ripple_hz: Self::MAINS_RIPPLE_HZ,
            gaussian_sigma_lux: 0.0,
            seed: 0,
        }
    }

    pub fn with_floor(mut self, lux: f64) -> Self {
        self.ambient_floor_lux = lux;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.gaussian_sigma_lux = sigma;
        self
    }

    pub fn with_ripple(mut self, amplitude_lux: f64, hz: f64) -> Self {
        self.ripple_amplitude_lux = amplitude_lux;
        self.ripple_hz = hz;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Gaussian sigma giving `snr_db` for a two-level signal with
    /// peak-to-peak `swing`: SNR = 10·log10((swing/2)² / σ²).
    pub fn sigma_for_snr(swing: f64, snr_db: f64) -> f64 {
        0.5 * swing / libm::pow(10.0, snr_db / 20.0)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !ok(self.ambient_floor_lux) {
            return Err(ChannelError::InvalidNoise("ambient_floor_lux must be >= 0"));
        }
        if !ok(self.ripple_amplitude_lux) {
            return Err(ChannelError::InvalidNoise("ripple_amplitude_lux must be >= 0"));
        }
        if !ok(self.ripple_hz) {
            return Err(ChannelError::InvalidNoise("ripple_hz must be >= 0"));
        }
        if !ok(self.gaussian_sigma_lux) {
            return Err(ChannelError::InvalidNoise("gaussian_sigma_lux must be >= 0"));
        }
        Ok(())
    }
}
