//! Output directories, CSV tables and reproducibility stamps.
//!
//! CSV columns are fixed. Floats are written as `{:.16e}` (17 significant
//! digits, round-trip exact); a missing theory value is an empty field.

use std::path::{Path, PathBuf};

use serde::Serialize;

use rehearsal::montecarlo::SweepRow;

use crate::config::RunConfig;
use crate::error::CliError;

pub const OUT_ROOT_ENV: &str = "REHEARSAL_OUT_ROOT";
pub const SWEEP_COLUMNS: [&str; 7] = ["axis_value", "strategy", "metric", "empirical_mean", "std_error", "theory_value", "trials"];
pub const SIMULATE_COLUMNS: [&str; 6] = ["strategy", "metric", "empirical_mean", "std_error", "theory_value", "trials"];
pub const ERROR_COLUMNS: [&str; 7] = ["strategy", "i", "t", "empirical_mean", "std_error", "theory_value", "trials"];

pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

/// `--out` if given, else `$REHEARSAL_OUT_ROOT/<command>`, else `rehearsal-out/<command>`.
pub fn resolve_out_dir(explicit: Option<&Path>, command: &str) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => {
            let root = std::env::var_os(OUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("rehearsal-out"));
            root.join(command)
        }
    }
}

pub struct OutDir {
    pub path: PathBuf,
    pub written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(path: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(OutDir { path, written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let p = self.path.join(name);
        std::fs::write(&p, contents).map_err(|e| CliError::io(&p, e))?;
        self.written.push(p.clone());
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut s = serde_json::to_string_pretty(value).expect("serializable");
        s.push('\n');
        self.write(name, &s)
    }

    /// Resolved config, version stamp and master seed.
    pub fn stamp(&mut self, cfg: &RunConfig, command: &str, seed: u64) -> Result<(), CliError> {
        self.write("config.toml", &cfg.to_toml())?;
        self.write("version.txt", &format!("rehearsal-cli {}\nrehearsal {}\ncommand {command}\n", env!("CARGO_PKG_VERSION"), rehearsal::VERSION))?;
        self.write("seed.txt", &format!("{seed}\n"))?;
        Ok(())
    }
}

pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f(r.axis_value),
                r.strategy.clone(),
                r.metric.to_string(),
                fmt_f(r.empirical_mean),
                fmt_f(r.std_error),
                fmt_opt(r.theory_value),
                r.trials.to_string(),
            ]
        })
        .collect();
    csv_string(&SWEEP_COLUMNS, &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let s = fmt_f(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt_opt(None), "");
    }

    #[test]
    fn sweep_header_order() {
        let s = sweep_csv(&[]);
        assert_eq!(s.trim(), "axis_value,strategy,metric,empirical_mean,std_error,theory_value,trials");
    }

    #[test]
    fn explicit_out_wins() {
        assert_eq!(resolve_out_dir(Some(Path::new("/tmp/x")), "sweep"), PathBuf::from("/tmp/x"));
    }
}
