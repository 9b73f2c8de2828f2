//! Trace CSV files.
//!
//! ```text
//! # sampling_rate_hz=500
//! # scenario_digest=3f2a...
//! # saturation_ceiling=450
//! time_s,rss
//! 0,10.4
//! 0.002,10.4
//! ```
//!
//! Metadata lines are optional. Times must be strictly increasing with a
//! uniform step (1e-9 relative).

use std::io::Write;
use std::path::Path;

use pvlc_core::channel::TraceMeta;
use pvlc_core::RssTrace;

use crate::error::{read_to_string, Error};

const STEP_TOLERANCE: f64 = 1e-9;

pub fn to_csv(trace: &RssTrace) -> String {
    let mut out = Vec::new();
    write(&mut out, trace).expect("writing to memory");
    String::from_utf8(out).expect("csv is utf-8")
}

pub fn write(out: &mut impl Write, trace: &RssTrace) -> std::io::Result<()> {
    let fs = trace.sampling_rate_hz();
    writeln!(out, "# sampling_rate_hz={fs}")?;
    if let Some(d) = &trace.meta.scenario {
        writeln!(out, "# scenario_digest={d}")?;
    }
    if let Some(c) = trace.meta.saturation_ceiling {
        writeln!(out, "# saturation_ceiling={c}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_s", "rss"])?;
    for (i, v) in trace.samples().iter().enumerate() {
        w.write_record([(i as f64 / fs).to_string(), v.to_string()])?;
    }
    w.flush()
}

pub fn save(path: &Path, trace: &RssTrace) -> Result<(), Error> {
    std::fs::write(path, to_csv(trace)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<RssTrace, Error> {
    parse(&read_to_string(path)?, &path.display().to_string())
}

pub fn parse(text: &str, file: &str) -> Result<RssTrace, Error> {
    let err = |line: u64, message: String| Error::Trace {
        file: file.to_string(),
        line,
        message,
    };

    let mut meta = TraceMeta::default();
    let mut declared_fs = None;
    let mut body_start = 0;
    let mut line_no = 0u64;
    for line in text.split_inclusive('\n') {
        let Some(comment) = line.trim_start().strip_prefix('#') else {
            break;
        };
        line_no += 1;
        body_start += line.len();
        let Some((key, value)) = comment.split_once('=') else {
            continue;
        };
        let value = value.trim();
        let number = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| err(line_no, format!("bad {} value `{v}`", key.trim())))
        };
        match key.trim() {
            "sampling_rate_hz" => declared_fs = Some(number(value)?),
            "saturation_ceiling" => meta.saturation_ceiling = Some(number(value)?),
            "scenario_digest" => meta.scenario = Some(value.to_string()),
            _ => {}
        }
    }

    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(&text.as_bytes()[body_start..]);
    let header = rdr
        .headers()
        .map_err(|e| err(line_no + 1, e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["time_s", "rss"] {
        return Err(err(line_no + 1, "header must be `time_s,rss`".into()));
    }

    let mut times = Vec::new();
    let mut samples = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(line_no + 1, e.to_string()))?;
        let at = line_no + rec.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<f64, Error> {
            let v = rec.get(i).unwrap_or("");
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(at, format!("bad {name} `{v}`")))
        };
        let t = field(0, "time_s")?;
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(err(at, "time_s must be strictly increasing".into()));
            }
        }
        times.push(t);
        samples.push(field(1, "rss")?);
    }

    let fs = match (times.len(), declared_fs) {
        (0, _) => return Err(err(line_no + 1, "trace has no samples".into())),
        (1, Some(fs)) => fs,
        (1, None) => {
            return Err(err(
                line_no + 1,
                "a single sample needs a sampling_rate_hz comment".into(),
            ))
        }
        (n, declared) => {
            let step = (times[n - 1] - times[0]) / (n - 1) as f64;
            for (i, w) in times.windows(2).enumerate() {
                if ((w[1] - w[0]) - step).abs() > STEP_TOLERANCE * step.max(w[1].abs()) {
                    return Err(err(
                        line_no + 2 + i as u64 + 1,
                        format!("non-uniform time step {} (expected {step})", w[1] - w[0]),
                    ));
                }
            }
            match declared {
                Some(fs) if ((1.0 / fs) - step).abs() > STEP_TOLERANCE * step => {
                    return Err(err(
                        1,
                        format!("sampling_rate_hz={fs} disagrees with the time step {step}"),
                    ))
                }
                Some(fs) => fs,
                None => 1.0 / step,
            }
        }
    };
    RssTrace::new(fs, samples)
        .map(|t| t.with_meta(meta))
        .map_err(|e| Error::Invalid(format!("{file}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn writes_comments_then_header() {
        let t = RssTrace::new(4.0, vec![1.0, 2.5]).unwrap().with_meta(TraceMeta {
            saturation_ceiling: Some(450.0),
            scenario: Some("abc".into()),
        });
        assert_eq!(
            to_csv(&t),
            "# sampling_rate_hz=4\n# scenario_digest=abc\n# saturation_ceiling=450\n\
             time_s,rss\n0,1\n0.25,2.5\n"
        );
    }

    #[test]
    fn rate_comes_from_the_step_without_comments() {
        let t = parse("time_s,rss\n1.0,3\n1.5,4\n2.0,5\n", "t").unwrap();
        assert_eq!(t.sampling_rate_hz(), 2.0);
        assert_eq!(t.samples(), &[3.0, 4.0, 5.0]);
        assert_eq!(t.meta, TraceMeta::default());
    }

    #[test]
    fn rejects_bad_files() {
        let bad = [
            ("time_s,rss\n0,1\n0,2\n", "strictly increasing"),
            ("time_s,rss\n0,1\n1,2\n3,3\n", "non-uniform"),
            ("t,rss\n0,1\n", "header"),
            ("time_s,rss\n0,x\n", "bad rss"),
            ("time_s,rss\n", "no samples"),
            ("time_s,rss\n0,1\n", "sampling_rate_hz"),
            ("# sampling_rate_hz=10\ntime_s,rss\n0,1\n0.2,1\n", "disagrees"),
        ];
        for (text, want) in bad {
            let e = parse(text, "f.csv").unwrap_err().to_string();
            assert!(e.contains(want), "{text:?}: {e}");
        }
    }

    #[test]
    fn error_names_the_line() {
        let e = parse("# sampling_rate_hz=1\ntime_s,rss\n0,1\n1,oops\n", "f.csv")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 4"), "{e}");
    }

    proptest! {
        #[test]
        fn round_trip_is_lossless(
            fs in 1.0f64..1e5,
            x in proptest::collection::vec(-1e6f64..1e6, 1..500),
            ceiling in proptest::option::of(1.0f64..1e5),
        ) {
            let t = RssTrace::new(fs, x).unwrap().with_meta(TraceMeta {
                saturation_ceiling: ceiling,
                scenario: Some("d".into()),
            });
            let back = parse(&to_csv(&t), "p").unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
