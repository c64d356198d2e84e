//! CSV tables and JSON summaries.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`) so that reruns
//! can be compared byte for byte. JSON objects use sorted keys.

use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::ScenarioKind;
use crate::error::CliError;

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Output of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub results: Map<String, Value>,
    pub violations: Vec<Value>,
    pub table: CsvTable,
}

impl Report {
    pub fn summary(&self) -> Value {
        json!({
            "scenario": self.scenario.name(),
            "seed": self.seed,
            "results": Value::Object(self.results.clone()),
            "violations": self.violations,
        })
    }

    pub fn json_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut bytes = serde_json::to_vec_pretty(&self.summary())?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn write(&self, csv_path: &Path, json_path: &Path) -> Result<(), CliError> {
        for path in [csv_path, json_path] {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
        }
        fs::write(csv_path, self.table.to_bytes()?)?;
        fs::write(json_path, self.json_bytes()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_lf_and_fixed_precision() {
        let mut t = CsvTable::new(["x", "y"]);
        t.push(vec![fmt_num(0.1), fmt_num(-2.0)]);
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(text, "x,y\n1.0000000000000001e-1,-2.0000000000000000e0\n");
    }

    #[test]
    fn summary_has_fixed_top_level_keys() {
        let r = Report {
            scenario: ScenarioKind::WindowScan,
            seed: 4,
            results: Map::new(),
            violations: vec![],
            table: CsvTable::new(["a"]),
        };
        let v = r.summary();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["results", "scenario", "seed", "violations"]);
    }
}
