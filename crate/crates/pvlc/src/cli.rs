//! The `pvlc` command line.

use std::ffi::OsString;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use pvlc_core::classify::{classify_banded, Template};
use pvlc_core::codec::{build_packet, decode_trace, decode_vehicle_trace, format_code};
use pvlc_core::planner::{select_receiver, ReceiverCatalog};
use pvlc_core::presets;
use pvlc_core::spectral::{analyze_collision, fft_len_for, CollisionConfig};
use pvlc_core::{DecodeResult, DecodeStatus, DecoderConfig};
use serde::Serialize;

use crate::error::{from_json, read_to_string};
use crate::scenario::ScenarioFile;
use crate::{sweep, templates, trace_file};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DECODE: i32 = 3;
pub const EXIT_SATURATED: i32 = 4;

/// A bad flag value, reported with exit status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser, Debug)]
#[command(name = "pvlc", version, about = "Passive visible-light communication toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the packet for a payload as JSON.
    Encode {
        /// Payload bits, e.g. 10; may be empty.
        #[arg(long)]
        bits: String,
        #[arg(long, default_value_t = 0.10, allow_negative_numbers = true)]
        width_m: f64,
        #[arg(long, default_value_t = presets::PACKET_HIGH, allow_negative_numbers = true)]
        r_high: f64,
        #[arg(long, default_value_t = presets::PACKET_LOW, allow_negative_numbers = true)]
        r_low: f64,
    },
    /// Simulate a scenario file into a trace CSV.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode one packet from a trace.
    Decode {
        trace: PathBuf,
        /// Payload length, when known.
        #[arg(long)]
        expected_bits: Option<usize>,
        /// Locate the car roof first, then decode from there.
        #[arg(long)]
        vehicle: bool,
        /// Decoder settings as JSON; missing fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Match a trace against a directory of templates with DTW.
    Classify {
        trace: PathBuf,
        #[arg(long)]
        templates: PathBuf,
        /// Sakoe-Chiba radius in resampled points; full band when absent.
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Magnitude spectrum and collision verdict.
    Spectrum {
        trace: PathBuf,
        /// FFT length (power of two); defaults to the trace length rounded up.
        #[arg(long)]
        fft: Option<usize>,
        /// Write the spectrum as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Decodability sweep over receiver heights and symbol widths.
    Sweep {
        /// Comma list or start:stop:step, meters.
        #[arg(long)]
        heights: String,
        /// Comma list or start:stop:step, meters.
        #[arg(long)]
        widths: String,
        /// Scenario whose first object is the packet to sweep.
        #[arg(long)]
        scenario: PathBuf,
        /// Seeded repetitions per cell; all must decode.
        #[arg(long, default_value_t = 5)]
        trials: u32,
        #[arg(long)]
        threads: Option<NonZeroUsize>,
        /// Write the fitted trend model JSON here.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Fit a trend model to a sweep CSV.
    Fit { sweep: PathBuf },
    /// Pick the most sensitive receiver for an ambient noise floor.
    SelectReceiver {
        #[arg(long, allow_negative_numbers = true)]
        noise_lux: f64,
        /// Extra headroom as a fraction of the floor.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        margin: f64,
        /// Additional detector, NAME:SATURATION_LUX:SENSITIVITY.
        #[arg(long = "receiver")]
        receivers: Vec<String>,
    },
    /// Print a built-in scenario as JSON, or list them.
    Preset {
        name: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write clean speed-change templates to a directory.
    MakeTemplates {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "00,10")]
        bits: String,
    },
}

/// Runs the CLI and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn emit_json(v: &impl Serialize) -> Result<()> {
    emit(&(serde_json::to_string_pretty(v)? + "\n"))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Encode {
            bits,
            width_m,
            r_high,
            r_low,
        } => {
            use pvlc_core::codec::CodecError;
            let packet = build_packet(&bits, width_m, r_high, r_low).map_err(|e| {
                let flag = match e {
                    CodecError::InvalidWidth(_) => "--width-m",
                    CodecError::InvalidReflectance { .. } => "--r-high/--r-low",
                    _ => "--bits",
                };
                usage(format!("invalid {flag}: {e}"))
            })?;
            emit_json(&packet)?;
            Ok(EXIT_OK)
        }
        Command::Simulate { scenario, out } => {
            let s = ScenarioFile::load(&scenario)?;
            let mut trace = s.simulate(&scenario.display().to_string())?;
            trace.meta.scenario = Some(s.digest());
            trace_file::save(&out, &trace)?;
            Ok(EXIT_OK)
        }
        Command::Decode {
            trace,
            expected_bits,
            vehicle,
            config,
        } => {
            let t = trace_file::load(&trace)?;
            let mut cfg = match &config {
                Some(p) => from_json::<DecoderConfig>(&read_to_string(p)?, &p.display().to_string())?,
                None if vehicle => presets::vehicle_decoder(),
                None => DecoderConfig::default(),
            };
            if expected_bits.is_some() {
                cfg.expected_bits = expected_bits;
            }
            cfg.validate()
                .map_err(|e| usage(format!("invalid decoder config: {e}")))?;
            let r = if vehicle {
                decode_vehicle_trace(&t, &cfg)
            } else {
                decode_trace(&t, &cfg)
            };
            emit_json(&DecodeReport::new(&r, &t))?;
            Ok(match r.status {
                DecodeStatus::Ok => EXIT_OK,
                DecodeStatus::Saturated => EXIT_SATURATED,
                _ => EXIT_DECODE,
            })
        }
        Command::Classify {
            trace,
            templates: dir,
            radius,
        } => {
            let t = trace_file::load(&trace)?;
            let ts: Vec<Template> = templates::load(&dir)?;
            let r = classify_banded(&t, &ts, radius)
                .map_err(|e| anyhow::anyhow!("{}: {e}", trace.display()))?;
            emit_json(&r)?;
            Ok(EXIT_OK)
        }
        Command::Spectrum { trace, fft, csv } => {
            let t = trace_file::load(&trace)?;
            let n = fft.unwrap_or_else(|| fft_len_for(t.len()));
            let (spec, verdict) = analyze_collision(&t, n, &CollisionConfig::default())
                .map_err(|e| usage(format!("invalid --fft: {e}")))?;
            if let Some(path) = csv {
                let mut w = ::csv::Writer::from_writer(Vec::new());
                w.write_record(["frequency_hz", "magnitude"])?;
                for (k, m) in spec.magnitudes.iter().enumerate() {
                    w.write_record([spec.frequency_of(k).to_string(), m.to_string()])?;
                }
                write_file(&path, &String::from_utf8(w.into_inner()?)?)?;
            }
            emit_json(&SpectrumReport {
                verdict: verdict.kind,
                fft_len: spec.fft_len,
                bin_hz: spec.bin_hz,
                window: spec.window,
                min_prominence: verdict.details.min_prominence,
                peaks: verdict.details.peaks,
            })?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            heights,
            widths,
            scenario,
            trials,
            threads,
            model,
        } => {
            let hs = sweep::parse_list(&heights).map_err(|e| usage(format!("invalid --heights: {e}")))?;
            let ws = sweep::parse_list(&widths).map_err(|e| usage(format!("invalid --widths: {e}")))?;
            let s = ScenarioFile::load(&scenario)?;
            let base = sweep::base_from_scenario(&s, trials, DecoderConfig::default())?;
            let threads = threads
                .or_else(|| std::thread::available_parallelism().ok())
                .unwrap_or(NonZeroUsize::MIN);
            let grid = sweep::run(&base, &hs, &ws, threads).map_err(|e| usage(e.to_string()))?;
            let csv = sweep::to_csv(&grid.rows());
            if let Some(path) = model {
                match sweep::fit_csv(&csv, "sweep") {
                    Ok(m) => write_file(&path, &(serde_json::to_string_pretty(&m)? + "\n"))?,
                    Err(e) => eprintln!("no trend model written: {e}"),
                }
            }
            emit(&csv)?;
            Ok(EXIT_OK)
        }
        Command::Fit { sweep: path } => {
            let m = sweep::fit_csv(&read_to_string(&path)?, &path.display().to_string())?;
            emit_json(&m)?;
            Ok(EXIT_OK)
        }
        Command::SelectReceiver {
            noise_lux,
            margin,
            receivers,
        } => {
            let mut catalog = ReceiverCatalog::builtin();
            for spec in &receivers {
                let parts: Vec<&str> = spec.split(':').collect();
                let parsed = match parts.as_slice() {
                    [name, sat, sens] => sat.parse::<f64>().ok().zip(sens.parse::<f64>().ok()).map(|v| (*name, v)),
                    _ => None,
                };
                let Some((name, (sat, sens))) = parsed.filter(|(_, (a, b))| *a > 0.0 && *b > 0.0) else {
                    return Err(usage(format!(
                        "invalid --receiver `{spec}`: expected NAME:SATURATION_LUX:SENSITIVITY"
                    )));
                };
                catalog = catalog.with_entry(name, sat, sens);
            }
            let pick = select_receiver(&catalog, noise_lux, margin).map_err(|e| match e {
                pvlc_core::planner::PlanError::InvalidInput(m) => usage(format!("invalid --noise-lux/--margin: {m}")),
                other => anyhow::anyhow!("{other}"),
            })?;
            emit(&format!("{}\n", pick.name))?;
            Ok(EXIT_OK)
        }
        Command::Preset { name, seed } => match name {
            None => {
                emit(&presets::NAMES.map(|n| format!("{n}\n")).concat())?;
                Ok(EXIT_OK)
            }
            Some(n) => {
                let s = presets::by_name(&n, seed).ok_or_else(|| {
                    usage(format!("unknown preset `{n}`; try `pvlc preset` for the list"))
                })?;
                emit(&ScenarioFile::from_scenario(&s).to_json())?;
                Ok(EXIT_OK)
            }
        },
        Command::MakeTemplates { out, bits } => {
            let mut ts = Vec::new();
            for b in bits.split(',') {
                pvlc_core::codec::validate_bits(b)
                    .map_err(|e| usage(format!("invalid --bits: {e}")))?;
                let trace = presets::speed_template(b)
                    .simulate()
                    .context("simulating template")?;
                ts.push((b.to_string(), trace));
            }
            templates::save(&out, &ts)?;
            Ok(EXIT_OK)
        }
    }
}

#[derive(Serialize)]
struct Anchor {
    index: usize,
    time_s: f64,
    rss: f64,
}

#[derive(Serialize)]
struct Anchors {
    a: Anchor,
    b: Anchor,
    c: Anchor,
}

#[derive(Serialize)]
struct VehicleAnchor {
    index: usize,
    time_s: f64,
}

#[derive(Serialize)]
struct DecodeReport {
    status: DecodeStatus,
    bits: String,
    code: String,
    tau_r: Option<f64>,
    tau_t_s: Option<f64>,
    anchors: Option<Anchors>,
    vehicle_anchor: Option<VehicleAnchor>,
}

impl DecodeReport {
    fn new(r: &DecodeResult, t: &pvlc_core::RssTrace) -> Self {
        DecodeReport {
            status: r.status,
            bits: r.bits.clone(),
            code: format_code(&r.symbols),
            tau_r: r.preamble.map(|p| p.tau_r),
            tau_t_s: r.preamble.map(|p| p.tau_t),
            anchors: r.preamble.map(|p| Anchors {
                a: Anchor { index: p.idx_a, time_s: p.t_a, rss: p.r_a },
                b: Anchor { index: p.idx_b, time_s: p.t_b, rss: p.r_b },
                c: Anchor { index: p.idx_c, time_s: p.t_c, rss: p.r_c },
            }),
            vehicle_anchor: r.vehicle_anchor.map(|index| VehicleAnchor {
                index,
                time_s: index as f64 / t.sampling_rate_hz(),
            }),
        }
    }
}

#[derive(Serialize)]
struct SpectrumReport {
    verdict: pvlc_core::spectral::CollisionKind,
    fft_len: usize,
    bin_hz: f64,
    window: pvlc_core::spectral::Window,
    min_prominence: f64,
    peaks: Vec<pvlc_core::spectral::SpectralPeak>,
}
