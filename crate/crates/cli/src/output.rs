use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use qa_entangle::io::Table;
use qa_entangle::model::{AnnealSchedule, ProblemInstance, SYNTHETIC_LABEL};
use qa_entangle::Result;

use crate::config::{Common, Format};

/// Everything needed to rerun a command: the argument vector plus the
/// resolved schedule and instance contents.
pub struct Manifest {
    pub command: &'static str,
    pub fields: Vec<(&'static str, Value)>,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Self { command, fields: Vec::new() }
    }

    pub fn set(&mut self, key: &'static str, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key, value.into()));
        self
    }

    pub fn inputs(&mut self, common: &Common, schedule: &AnnealSchedule<f64>, instance: &ProblemInstance<f64>) {
        let rows: Vec<Value> = schedule.rows().map(|(s, d, e)| json!([s, d, e])).collect();
        let instance: Value = serde_json::from_str(&instance.to_json()).expect("instance JSON round-trips");
        self.set("schedule_source", schedule.source())
            .set("schedule_synthetic", schedule.is_synthetic())
            .set("schedule_rows", rows)
            .set("instance", instance)
            .set("temperature_mk", common.temperature_mk)
            .set("ensemble", if common.ground { "ground" } else { "thermal" });
    }

    fn to_json(&self, outputs: &[PathBuf]) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("tool".into(), json!(env!("CARGO_PKG_NAME")));
        map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        map.insert("command".into(), json!(self.command));
        map.insert("argv".into(), json!(std::env::args().skip(1).collect::<Vec<_>>()));
        map.insert("outputs".into(), json!(outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>()));
        for (k, v) in &self.fields {
            map.insert((*k).into(), v.clone());
        }
        Value::Object(map)
    }
}

/// Schedule and instance lines for a table header.
pub fn describe(table: &mut Table, schedule: &AnnealSchedule<f64>, instance: &ProblemInstance<f64>, common: &Common) {
    let label = if schedule.is_synthetic() {
        format!("{SYNTHETIC_LABEL} (not a device calibration)")
    } else {
        schedule.source().to_string()
    };
    table.meta("schedule", label).meta("instance", instance.to_json());
    if common.ground {
        table.meta("ensemble", "ground state");
    } else {
        table.meta("temperature_mk", common.temperature_mk);
    }
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv_string(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&table.to_json()).expect("table serializes");
            s.push('\n');
            s
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the main table to `--out` (or stdout) plus any extra tables, then
/// the manifest sidecar.
pub fn emit(common: &Common, main: &Table, extra: &[(PathBuf, Table)], manifest: &Manifest) -> Result<()> {
    let mut outputs = Vec::new();
    match &common.out {
        Some(path) => {
            write_file(path, &render(main, common.format))?;
            outputs.push(path.clone());
        }
        None => {
            let text = render(main, common.format);
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                // A closed pipe (e.g. `| head`) is not an error worth reporting.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    for (path, table) in extra {
        write_file(path, &render(table, common.format))?;
        outputs.push(path.clone());
    }
    // Sidecar next to the main output, or the first extra file when the
    // main table went to stdout.
    if let Some(path) = common.out.as_ref().or(extra.first().map(|e| &e.0)) {
        let text = serde_json::to_string_pretty(&manifest.to_json(&outputs)).expect("manifest serializes");
        write_file(&manifest_path(path), &(text + "\n"))?;
    }
    Ok(())
}
