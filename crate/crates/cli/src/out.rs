use crate::CliError;
use serde::Serialize;
use srgkit::analysis::{AnalysisReport, Verdict};
use srgkit::plot::{self, Figure};
use srgkit::region::{CellSet, Region};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub bytes: u64,
}

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub inputs: Vec<InputFile>,
    pub settings: serde_json::Value,
    pub version: &'static str,
    pub outputs: Vec<String>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Output directory that remembers what was written to it.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
    inputs: Vec<InputFile>,
    settings: serde_json::Value,
}

impl OutDir {
    pub fn new(root: &Path) -> Self {
        OutDir { root: root.to_path_buf(), written: Vec::new(), inputs: Vec::new(), settings: serde_json::Value::Null }
    }

    pub fn settings<T: Serialize>(&mut self, s: &T) {
        self.settings = serde_json::to_value(s).unwrap_or(serde_json::Value::Null);
    }

    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(InputFile { path: path.display().to_string(), bytes: text.len() as u64 });
        Ok(text)
    }

    pub fn read_json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T, CliError> {
        let text = self.read(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        fs::create_dir_all(&self.root).map_err(|e| CliError::Io(self.root.display().to_string(), e))?;
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        log::info!("wrote {}", path.display());
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    /// Region JSON, boundary CSV and SVG under `stem`.
    pub fn region(&mut self, stem: &str, region: &Region, cells: &CellSet) -> Result<(), CliError> {
        self.write_json(&format!("{stem}.json"), region)?;
        self.write(&format!("{stem}_boundary.csv"), &plot::boundary_csv(cells))?;
        let mut fig = Figure::new(stem).cells(stem, cells);
        if let Region::DiskAlgebra(d) = region {
            fig = fig.disks(format!("{stem} disks"), d);
        }
        self.write(&format!("{stem}.svg"), &fig.to_svg())
    }

    /// Report JSON plus one figure and boundary CSV per recorded region.
    pub fn report(&mut self, prefix: &str, report: &AnalysisReport) -> Result<(), CliError> {
        self.write_json(&format!("{prefix}report.json"), report)?;
        for (name, cells) in &report.regions {
            let mut fig = Figure::new(format!("{name}: rmin {:.4}", cells.rmin())).cells(name.as_str(), cells);
            if let Some(d) = report.disk_regions.get(name) {
                fig = fig.disks(format!("{name} bound"), d);
            }
            self.write(&format!("{prefix}region_{name}.svg"), &fig.to_svg())?;
            self.write(&format!("{prefix}region_{name}.csv"), &plot::boundary_csv(cells))?;
        }
        if !report.tau_table.is_empty() {
            let mut csv = String::from("tau,separation\n");
            for (t, r) in &report.tau_table {
                csv.push_str(&format!("{t},{r}\n"));
            }
            self.write(&format!("{prefix}separation.csv"), &csv)?;
            let chart = plot::line_chart("separation over the homotopy", "tau", "distance", &report.tau_table);
            self.write(&format!("{prefix}separation.svg"), &chart)?;
        }
        Ok(())
    }

    pub fn finish(self, command: &str, code: i32, error: Option<String>) -> Result<(), CliError> {
        let manifest = RunManifest {
            command: command.to_string(),
            args: std::env::args().collect(),
            inputs: self.inputs,
            settings: self.settings,
            version: env!("CARGO_PKG_VERSION"),
            outputs: self.written,
            exit_code: code,
            error,
        };
        let path = self.root.join("manifest.json");
        fs::create_dir_all(&self.root).map_err(|e| CliError::Io(self.root.display().to_string(), e))?;
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Input(e.to_string()))? + "\n";
        fs::write(&path, text).map_err(|e| CliError::Io(path.display().to_string(), e))
    }
}

pub fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Certified => 0,
        Verdict::NotCertified => 4,
    }
}

pub fn single_disk(r: &Region) -> Option<(f64, f64)> {
    match r {
        Region::DiskAlgebra(d) => d.as_disk(),
        Region::Cover(_) => None,
    }
}
