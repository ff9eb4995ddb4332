//! CSV tables and JSON run summaries.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::scenario::ScenarioConfig;

/// Writes `rows` with a header row to `path`.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary<'a, M: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a ScenarioConfig,
    pub metrics: M,
}

impl<'a, M: Serialize> RunSummary<'a, M> {
    pub fn new(command: &'a str, config: &'a ScenarioConfig, metrics: M) -> Self {
        RunSummary {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: config.seed,
            config,
            metrics,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Creates `dir` if needed and returns the path of `name` inside it.
pub fn out_path(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: u32,
        b: Option<f64>,
    }

    #[test]
    fn csv_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let p = out_path(&dir.path().join("nested"), "t.csv").unwrap();
        write_csv(&p, &[Row { a: 1, b: Some(0.5) }, Row { a: 2, b: None }]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "a,b\n1,0.5\n2,\n");
        let cfg = ScenarioConfig::default();
        let j = dir.path().join("s.json");
        write_json(&j, &RunSummary::new("run", &cfg, serde_json::json!({"x": 1}))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&j).unwrap()).unwrap();
        assert_eq!(v["tool"], "mecmob");
        assert_eq!(v["config"]["num_bs"], 25);
        assert_eq!(v["metrics"]["x"], 1);
    }
}
