//! Template directories for DTW classification.
//!
//! A directory holds trace CSV files and a `manifest.json`:
//!
//! ```json
//! { "templates": [ { "label": "00", "trace": "00.csv" },
//!                  { "label": "10", "trace": "10.csv" } ] }
//! ```
//!
//! Without a manifest every `*.csv` file is a template labelled by its stem.

use std::path::Path;

use pvlc_core::classify::Template;
use pvlc_core::RssTrace;
use serde::{Deserialize, Serialize};

use crate::error::{from_json, read_to_string, Error};
use crate::trace_file;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub templates: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub label: String,
    /// Path relative to the directory.
    pub trace: String,
}

pub fn load(dir: &Path) -> Result<Vec<Template>, Error> {
    let manifest_path = dir.join(MANIFEST);
    let manifest = if manifest_path.exists() {
        from_json::<Manifest>(
            &read_to_string(&manifest_path)?,
            &manifest_path.display().to_string(),
        )?
    } else {
        let mut templates = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.extension().is_some_and(|x| x == "csv") {
                let stem = path.file_stem().unwrap_or_default().to_string_lossy();
                templates.push(ManifestEntry {
                    label: stem.to_string(),
                    trace: path.file_name().unwrap().to_string_lossy().to_string(),
                });
            }
        }
        templates.sort_by(|a, b| a.label.cmp(&b.label));
        Manifest { templates }
    };
    if manifest.templates.is_empty() {
        return Err(Error::Invalid(format!(
            "{}: no templates found",
            dir.display()
        )));
    }
    manifest
        .templates
        .iter()
        .map(|e| {
            let trace = trace_file::load(&dir.join(&e.trace))?;
            Template::new(e.label.clone(), trace)
                .map_err(|err| Error::Invalid(format!("template {}: {err}", e.label)))
        })
        .collect()
}

/// Writes each trace as `<label>.csv` plus a manifest.
pub fn save(dir: &Path, templates: &[(String, RssTrace)]) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = Manifest {
        templates: Vec::new(),
    };
    for (label, trace) in templates {
        let file = format!("{label}.csv");
        trace_file::save(&dir.join(&file), trace)?;
        manifest.templates.push(ManifestEntry {
            label: label.clone(),
            trace: file,
        });
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let path = dir.join(MANIFEST);
    std::fs::write(&path, json).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(k: f64) -> RssTrace {
        RssTrace::new(10.0, (0..40).map(|i| (i as f64 * k).sin()).collect()).unwrap()
    }

    #[test]
    fn save_then_load() {
        let dir = tempfile::tempdir().unwrap();
        save(dir.path(), &[("a".into(), ramp(0.3)), ("b".into(), ramp(0.7))]).unwrap();
        let t = load(dir.path()).unwrap();
        assert_eq!(t.iter().map(|t| t.label.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(t[0].trace.samples(), ramp(0.3).samples());
    }

    #[test]
    fn manifest_is_optional() {
        let dir = tempfile::tempdir().unwrap();
        trace_file::save(&dir.path().join("z.csv"), &ramp(0.2)).unwrap();
        trace_file::save(&dir.path().join("y.csv"), &ramp(0.5)).unwrap();
        let t = load(dir.path()).unwrap();
        assert_eq!(t.iter().map(|t| t.label.as_str()).collect::<Vec<_>>(), ["y", "z"]);
    }

    #[test]
    fn empty_dir_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load(dir.path()).unwrap_err().to_string().contains("no templates"));
    }
}
