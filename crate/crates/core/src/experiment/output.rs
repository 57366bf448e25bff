use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub library_version: String,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

/// `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn sibling(output: &Path, suffix: &str) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(super) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// 17 significant digits, enough to round-trip an `f64`.
pub(super) fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Empty cell for an undefined value.
pub(super) fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

pub(super) struct CsvTable {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvTable {
    pub(super) fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let writer = csv::Writer::from_writer(create(path)?);
        let mut t = CsvTable {
            path: path.to_path_buf(),
            writer,
        };
        t.row(header)?;
        Ok(t)
    }

    pub(super) fn row<I, S>(&mut self, cells: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer
            .write_record(cells)
            .map_err(|source| Error::Csv {
                path: self.path.clone(),
                source,
            })
    }

    pub(super) fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct DensityDumpSidecar {
    pub data_file: PathBuf,
    /// `[steps, d, d]`.
    pub shape: [usize; 3],
    pub dtype: String,
    pub byte_order: String,
    pub layout: String,
}

/// Writes `matrices` as little-endian complex128, row-major, one matrix
/// after another, to `<output>.density.bin` with a `<output>.density.json`
/// sidecar. Returns both paths.
pub fn write_density_dump(output: &Path, matrices: &[CMatrix]) -> Result<(PathBuf, PathBuf)> {
    let bin = sibling(output, ".density.bin");
    let json = sibling(output, ".density.json");
    let d = matrices.first().map_or(0, |m| m.nrows());
    let mut w = create(&bin)?;
    for m in matrices {
        for i in 0..d {
            for j in 0..d {
                let z = m[(i, j)];
                w.write_all(&z.re.to_le_bytes())
                    .and_then(|_| w.write_all(&z.im.to_le_bytes()))
                    .map_err(|e| Error::io(&bin, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(&bin, e))?;
    let sidecar = DensityDumpSidecar {
        data_file: PathBuf::from(bin.file_name().unwrap_or_default()),
        shape: [matrices.len(), d, d],
        dtype: "complex128".into(),
        byte_order: "little".into(),
        layout: "row_major".into(),
    };
    write_json(&json, &sidecar)?;
    Ok((bin, json))
}
