//! Output management: checkpoints, CSV series, gnuplot data files and the
//! per-run manifest that makes a run directory self-describing.

mod checkpoint;

pub use checkpoint::{
    read_checkpoint, write_checkpoint, CheckpointError, CheckpointMeta, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::solver::{DiagnosticSeries, NormsPlan};

pub const CSV_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const CONFIG_FORMAT_VERSION: u32 = 1;

/// CSV header matching `DiagRow` under a norms plan; one column per recorded
/// quantity, floats printed with Rust's shortest-roundtrip formatting so
/// identical runs produce byte-identical files.
pub fn series_header(plan: &NormsPlan) -> String {
    let mut cols = vec!["t".to_string(), "dt".into(), "l2".into(), "max_u".into()];
    for p in &plan.lp {
        cols.push(format!("lp_{p}"));
    }
    for s in &plan.sobolev {
        cols.push(format!("hs_{s}"));
    }
    for g in &plan.gevrey {
        cols.push(format!("gevrey_s{}_r{}_tau{}", g.s, g.r, g.tau));
    }
    cols.push("tau_hat".into());
    cols.push("tau_valid".into());
    cols.push("top_shell_frac".into());
    cols.join(",")
}

pub fn series_csv(series: &DiagnosticSeries, plan: &NormsPlan) -> String {
    let mut out = String::new();
    out.push_str(&series_header(plan));
    out.push('\n');
    for row in &series.rows {
        let mut cols = vec![
            row.t.to_string(),
            row.dt.to_string(),
            row.l2.to_string(),
            row.max_u.to_string(),
        ];
        cols.extend(row.lp.iter().map(|v| v.to_string()));
        cols.extend(row.sobolev.iter().map(|v| v.to_string()));
        cols.extend(row.gevrey.iter().map(|v| v.to_string()));
        cols.push(row.tau_hat.to_string());
        cols.push(if row.tau_valid { "1".into() } else { "0".into() });
        cols.push(row.top_shell_frac.to_string());
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Two-column whitespace data file, gnuplot-ready.
pub fn two_column_dat(pairs: &[(f64, f64)]) -> String {
    let mut out = String::new();
    for (x, y) in pairs {
        out.push_str(&format!("{x} {y}\n"));
    }
    out
}

/// A run directory being assembled: tracks every file written so the manifest
/// can list them all.
pub struct RunDir {
    root: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    pub fn create(root: &Path) -> std::io::Result<RunDir> {
        fs::create_dir_all(root)?;
        Ok(RunDir { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_text(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        fs::write(self.root.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(value).expect("json serializes");
        self.write_text(name, &text)
    }

    pub fn write_checkpoint(
        &mut self,
        name: &str,
        state: &crate::solver::SimulationState,
    ) -> Result<(), CheckpointError> {
        write_checkpoint(&self.root.join(name), state)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Write the manifest last: it lists every file the run produced.
    pub fn finish(mut self, command: &str, status: &str) -> std::io::Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            command: &'a str,
            status: &'a str,
            format_versions: FormatVersions,
            files: &'a [String],
        }
        #[derive(Serialize)]
        struct FormatVersions {
            manifest: u32,
            config: u32,
            csv: u32,
            checkpoint: u32,
        }
        let manifest = Manifest {
            command,
            status,
            format_versions: FormatVersions {
                manifest: MANIFEST_FORMAT_VERSION,
                config: CONFIG_FORMAT_VERSION,
                csv: CSV_FORMAT_VERSION,
                checkpoint: CHECKPOINT_VERSION,
            },
            files: &self.files,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(self.root.join("manifest.json"), text)?;
        self.files.push("manifest.json".into());
        Ok(())
    }
}
