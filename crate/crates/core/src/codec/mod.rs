//! Reflective packet coding.
//!
//! A packet is a strip of materials: a fixed `H L H L` preamble followed by
//! the Manchester coded payload (`0` → `H L`, `1` → `L H`).

mod decoder;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use decoder::{
    decode_trace, decode_vehicle_trace, find_preamble, find_vehicle_preamble, DecodeResult,
    DecodeStatus, DecoderConfig, PreambleFix,
};

/// One reflective strip: high-reflectance or low-reflectance material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Symbol {
    #[cfg_attr(feature = "serde", serde(rename = "H"))]
    High,
    #[cfg_attr(feature = "serde", serde(rename = "L"))]
    Low,
}

impl Symbol {
    pub fn as_char(self) -> char {
        match self {
            Symbol::High => 'H',
            Symbol::Low => 'L',
        }
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            'H' | 'h' => Some(Symbol::High),
            'L' | 'l' => Some(Symbol::Low),
            _ => None,
        }
    }
}

pub const PREAMBLE: [Symbol; 4] = [Symbol::High, Symbol::Low, Symbol::High, Symbol::Low];

#[derive(Debug, Clone, PartialEq)]
pub enum CodecError {
    /// A bit string contained something other than `0` or `1`.
    NonBinary { index: usize, found: char },
    OddLength(usize),
    /// Symbol pair `index` (0-based, counted in pairs) is `HH` or `LL`.
    ManchesterViolation { pair: usize },
    InvalidWidth(f64),
    InvalidReflectance { high: f64, low: f64 },
    /// Packet symbols do not start with the fixed preamble or have the wrong count.
    MalformedPacket,
}

impl fmt::Display for CodecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodecError::NonBinary { index, found } => {
                write!(f, "non-binary character {found:?} at position {index}")
            }
            CodecError::OddLength(n) => write!(f, "odd symbol count {n}"),
            CodecError::ManchesterViolation { pair } => {
                write!(f, "Manchester violation in symbol pair {pair}")
            }
            CodecError::InvalidWidth(w) => write!(f, "symbol width must be > 0 m, got {w}"),
            CodecError::InvalidReflectance { high, low } => write!(
                f,
                "reflectances must satisfy 0 <= low < high <= 1, got high={high} low={low}"
            ),
            CodecError::MalformedPacket => {
                write!(f, "packet must be the HLHL preamble followed by 2N symbols")
            }
        }
    }
}

impl core::error::Error for CodecError {}

/// Checks that `bits` only holds `0`/`1`.
pub fn validate_bits(bits: &str) -> Result<(), CodecError> {
    match bits.chars().enumerate().find(|(_, c)| *c != '0' && *c != '1') {
        Some((index, found)) => Err(CodecError::NonBinary { index, found }),
        None => Ok(()),
    }
}

pub fn manchester_encode(bits: &str) -> Result<Vec<Symbol>, CodecError> {
    validate_bits(bits)?;
    let mut out = Vec::with_capacity(bits.len() * 2);
    for b in bits.chars() {
        if b == '0' {
            out.extend([Symbol::High, Symbol::Low]);
        } else {
            out.extend([Symbol::Low, Symbol::High]);
        }
    }
    Ok(out)
}

pub fn manchester_decode(symbols: &[Symbol]) -> Result<String, CodecError> {
    if !symbols.len().is_multiple_of(2) {
        return Err(CodecError::OddLength(symbols.len()));
    }
    symbols
        .chunks_exact(2)
        .enumerate()
        .map(|(pair, s)| match (s[0], s[1]) {
            (Symbol::High, Symbol::Low) => Ok('0'),
            (Symbol::Low, Symbol::High) => Ok('1'),
            _ => Err(CodecError::ManchesterViolation { pair }),
        })
        .collect()
}

/// Renders symbols as `HLHL.LHHL`, with a dot after the preamble when the
/// sequence is long enough to have one.
pub fn format_code(symbols: &[Symbol]) -> String {
    let mut s = String::with_capacity(symbols.len() + 1);
    for (i, sym) in symbols.iter().enumerate() {
        if i == PREAMBLE.len() {
            s.push('.');
        }
        s.push(sym.as_char());
    }
    s
}

/// The physical packet: a strip of constant-width symbols.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(try_from = "RawPacket", into = "RawPacket")
)]
pub struct ReflectivePacket {
    symbols: Vec<Symbol>,
    symbol_width_m: f64,
    reflectance_high: f64,
    reflectance_low: f64,
}

impl ReflectivePacket {
    /// Wraps an already coded symbol sequence, checking every packet invariant.
    pub fn new(
        symbols: Vec<Symbol>,
        symbol_width_m: f64,
        reflectance_high: f64,
        reflectance_low: f64,
    ) -> Result<Self, CodecError> {
        if !(symbol_width_m > 0.0 && symbol_width_m.is_finite()) {
            return Err(CodecError::InvalidWidth(symbol_width_m));
        }
        let ok_refl = reflectance_high > 0.0
            && reflectance_high <= 1.0
            && (0.0..1.0).contains(&reflectance_low)
            && reflectance_high > reflectance_low;
        if !ok_refl {
            return Err(CodecError::InvalidReflectance {
                high: reflectance_high,
                low: reflectance_low,
            });
        }
        if symbols.len() < PREAMBLE.len()
            || symbols[..PREAMBLE.len()] != PREAMBLE
            || !symbols.len().is_multiple_of(2)
        {
            return Err(CodecError::MalformedPacket);
        }
        Ok(Self {
            symbols,
            symbol_width_m,
            reflectance_high,
            reflectance_low,
        })
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn data_symbols(&self) -> &[Symbol] {
        &self.symbols[PREAMBLE.len()..]
    }

    pub fn symbol_width_m(&self) -> f64 {
        self.symbol_width_m
    }

    pub fn reflectance_high(&self) -> f64 {
        self.reflectance_high
    }

    pub fn reflectance_low(&self) -> f64 {
        self.reflectance_low
    }

    pub fn length_m(&self) -> f64 {
        self.symbols.len() as f64 * self.symbol_width_m
    }

    pub fn reflectance_of(&self, s: Symbol) -> f64 {
        match s {
            Symbol::High => self.reflectance_high,
            Symbol::Low => self.reflectance_low,
        }
    }

    /// Payload bits, or a violation if the data field is not valid Manchester.
    pub fn bits(&self) -> Result<String, CodecError> {
        manchester_decode(self.data_symbols())
    }

    /// Same packet with a different symbol width.
    pub fn with_width(&self, symbol_width_m: f64) -> Result<Self, CodecError> {
        Self::new(
            self.symbols.clone(),
            symbol_width_m,
            self.reflectance_high,
            self.reflectance_low,
        )
    }
}

/// Preamble followed by the Manchester coded `bits`.
pub fn build_packet(
    bits: &str,
    symbol_width_m: f64,
    reflectance_high: f64,
    reflectance_low: f64,
) -> Result<ReflectivePacket, CodecError> {
    let mut symbols = PREAMBLE.to_vec();
    symbols.extend(manchester_encode(bits)?);
    ReflectivePacket::new(symbols, symbol_width_m, reflectance_high, reflectance_low)
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPacket {
    symbols: Vec<Symbol>,
    symbol_width_m: f64,
    reflectance_high: f64,
    reflectance_low: f64,
}

#[cfg(feature = "serde")]
impl TryFrom<RawPacket> for ReflectivePacket {
    type Error = CodecError;

    fn try_from(r: RawPacket) -> Result<Self, Self::Error> {
        ReflectivePacket::new(r.symbols, r.symbol_width_m, r.reflectance_high, r.reflectance_low)
    }
}

#[cfg(feature = "serde")]
impl From<ReflectivePacket> for RawPacket {
    fn from(p: ReflectivePacket) -> Self {
        RawPacket {
            symbols: p.symbols,
            symbol_width_m: p.symbol_width_m,
            reflectance_high: p.reflectance_high,
            reflectance_low: p.reflectance_low,
        }
    }
}
