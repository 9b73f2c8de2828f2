//! Sweep CSV files and parallel sweep evaluation.
//!
//! ```text
//! height_m,min_width_m,throughput_sym_s,throughput_bps
//! 0.2,0.015,5.333333333333333,2.6666666666666665
//! 0.25,,,
//! ```
//!
//! Empty cells mark heights where no width decoded.

use std::num::NonZeroUsize;

use pvlc_core::codec::build_packet;
use pvlc_core::planner::{fit_trends, PlanError, SweepBase, SweepGrid, SweepPoint, SweepRow, TrendModel};
use pvlc_core::channel::Pattern;
use pvlc_core::DecoderConfig;
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::scenario::ScenarioFile;

const HEADER: [&str; 4] = ["height_m", "min_width_m", "throughput_sym_s", "throughput_bps"];

/// Sweep settings taken from a scenario whose first object is a packet
/// moving at constant speed.
pub fn base_from_scenario(
    s: &ScenarioFile,
    trials: u32,
    decoder: DecoderConfig,
) -> Result<SweepBase, Error> {
    let object = s
        .scene
        .objects
        .first()
        .ok_or_else(|| Error::Invalid("sweep scenario has no objects".into()))?;
    let Pattern::Packet(packet) = &object.pattern else {
        return Err(Error::Invalid(
            "sweep scenario: scene.objects[0] must be a packet".into(),
        ));
    };
    let [seg] = object.speed.segments.as_slice() else {
        return Err(Error::Invalid(
            "sweep scenario: scene.objects[0] must move at constant speed".into(),
        ));
    };
    let bits = packet
        .bits()
        .map_err(|e| Error::Invalid(format!("sweep scenario packet: {e}")))?;
    // Fails early on a packet the sweep could not rebuild.
    build_packet(&bits, packet.symbol_width_m(), packet.reflectance_high(), packet.reflectance_low())
        .map_err(|e| Error::Invalid(format!("sweep scenario packet: {e}")))?;
    Ok(SweepBase {
        emitter: s.emitter,
        receiver: s.receiver,
        noise: s.to_scenario().noise,
        bits,
        reflectance_high: packet.reflectance_high(),
        reflectance_low: packet.reflectance_low(),
        speed_mps: seg.speed_mps,
        trials,
        ground_reflectance: s.scene.ground_reflectance,
        decoder,
    })
}

/// [`SweepBase::sweep`] with heights spread over threads. The result does
/// not depend on the thread count.
pub fn run(
    base: &SweepBase,
    heights: &[f64],
    widths: &[f64],
    threads: NonZeroUsize,
) -> Result<SweepGrid, PlanError> {
    let chunk = heights.len().div_ceil(threads.get()).max(1);
    let rows: Vec<Result<Vec<bool>, PlanError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = heights
            .chunks(chunk)
            .map(|hs| {
                scope.spawn(move || {
                    hs.iter()
                        .map(|&h| {
                            widths
                                .iter()
                                .map(|&w| base.cell_decodable(h, w))
                                .collect::<Result<Vec<_>, _>>()
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let decodable = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    SweepGrid::new(heights.to_vec(), widths.to_vec(), decodable, base.speed_mps)
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).expect("writing to memory");
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.height_m.to_string(),
            cell(r.min_width_m),
            cell(r.throughput_sym_s),
            cell(r.throughput_bps),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("csv is utf-8")
}

/// Rows with a decodable width, as fit input.
pub fn parse_points(text: &str, file: &str) -> Result<Vec<SweepPoint>, Error> {
    let err = |line: u64, message: String| Error::Trace {
        file: file.to_string(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(err(1, format!("header must be `{}`", HEADER.join(","))));
    }
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(0, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |i: usize| -> Result<Option<f64>, Error> {
            match rec.get(i).unwrap_or("") {
                "" => Ok(None),
                v => v
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| err(line, format!("bad {} `{v}`", HEADER[i]))),
            }
        };
        let height_m = cell(0)?.ok_or_else(|| err(line, "missing height_m".into()))?;
        if let (Some(min_width_m), Some(max_throughput_bps)) = (cell(1)?, cell(3)?) {
            points.push(SweepPoint {
                height_m,
                min_width_m,
                max_throughput_bps,
            });
        }
    }
    Ok(points)
}

/// Fits a sweep CSV. The model is labelled with the CSV's digest, so the
/// same rows always give the same model.
pub fn fit_csv(text: &str, file: &str) -> Result<TrendModel, Error> {
    let points = parse_points(text, file)?;
    let label = format!("sha256:{}", hex::encode(Sha256::digest(text.as_bytes())));
    fit_trends(&points, &label).map_err(|e| Error::Invalid(format!("{file}: {e}")))
}

/// `a,b,c` or `start:stop:step` (inclusive, snapped to 1e-9).
pub fn parse_list(spec: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("`{s}` is not a number"))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err(format!("`{spec}` needs start <= stop and step > 0"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n)
                .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
                .collect()
        }
        [_] => spec.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("`{spec}` is neither a list nor start:stop:step")),
    };
    if values.is_empty() {
        return Err("empty list".into());
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pvlc_core::presets;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("0.1,0.3").unwrap(), vec![0.1, 0.3]);
        assert_eq!(
            parse_list("0.2:0.55:0.05").unwrap(),
            vec![0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55]
        );
        assert_eq!(parse_list("0.015:0.075:0.0025").unwrap().len(), 25);
        assert!(parse_list("a,b").is_err());
        assert!(parse_list("1:0:0.1").is_err());
        assert!(parse_list("1:2").is_err());
    }

    #[test]
    fn csv_round_trip_keeps_points() {
        let grid = SweepGrid::new(
            vec![0.2, 0.3, 0.4],
            vec![0.02, 0.03],
            vec![vec![true, true], vec![false, true], vec![false, false]],
            0.08,
        )
        .unwrap();
        let csv = to_csv(&grid.rows());
        assert!(csv.ends_with("0.4,,,\n"), "{csv}");
        assert_eq!(parse_points(&csv, "s").unwrap(), grid.points());
    }

    #[test]
    fn thread_count_does_not_change_the_grid() {
        let base = presets::sweep_base();
        let (h, w) = ([0.2, 0.35, 0.5], [0.015, 0.03, 0.05]);
        let one = run(&base, &h, &w, NonZeroUsize::new(1).unwrap()).unwrap();
        let many = run(&base, &h, &w, NonZeroUsize::new(3).unwrap()).unwrap();
        assert_eq!(one, many);
        assert_eq!(one, base.sweep(&h, &w).unwrap());
    }

    #[test]
    fn desk_scenario_becomes_a_sweep_base() {
        let s = ScenarioFile::from_scenario(&presets::desk("00"));
        let b = base_from_scenario(&s, 3, DecoderConfig::default()).unwrap();
        assert_eq!(b.bits, "00");
        assert_eq!(b.speed_mps, presets::DESK_SPEED_MPS);
        let v = ScenarioFile::from_scenario(&presets::vehicle(None, presets::well_lit(), 0));
        assert!(base_from_scenario(&v, 3, DecoderConfig::default()).is_err());
    }
}
