//! Output files are staged in memory and moved into place only once a
//! command has finished without an input error.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::Result;
use crate::kernel::KernelMatrix;
use crate::spectral::SpectralResult;

#[derive(Debug, Default)]
pub(crate) struct Staged {
    files: Vec<(String, Vec<u8>)>,
}

impl Staged {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// Writes every file through a temporary in `dir` and renames it into place.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in self.files {
            let mut tmp = NamedTempFile::new_in(dir)?;
            tmp.write_all(&bytes)?;
            tmp.as_file().sync_all()?;
            let target = dir.join(&name);
            tmp.persist(&target).map_err(|e| e.error)?;
            written.push(target);
        }
        Ok(written)
    }
}

pub(crate) fn eigenvalues_csv(result: &SpectralResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "eigenvalue"])?;
    for (i, v) in result.eigenvalues().iter().enumerate() {
        w.write_record([i.to_string(), v.to_string()])?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub(crate) fn modes_csv(result: &SpectralResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["node", "mode_index", "re", "im"])?;
    for mode in result.modes() {
        for (x, v) in result.grid().nodes().iter().zip(&mode.values) {
            w.write_record([x.to_string(), mode.index.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub(crate) fn kernel_csv(kernel: &KernelMatrix) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    kernel.entries().write_csv(&mut bytes)?;
    Ok(bytes)
}
