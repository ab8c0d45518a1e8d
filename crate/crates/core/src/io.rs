//! Line-delimited JSON dataset files and the participant split manifest.
//!
//! A dataset directory holds `dataset.jsonl` (one [`GestureRecording`] per
//! line) and, once split, `split.json` mapping participant id to
//! `"train"`/`"test"`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::dataset::{Dataset, Split};
use crate::error::{CoreError, Result};
use crate::recording::GestureRecording;

pub const DATASET_FILE: &str = "dataset.jsonl";
pub const SPLIT_FILE: &str = "split.json";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CoreError + '_ {
    move |source| CoreError::Io { path: path.to_path_buf(), source }
}

pub fn write_recordings<W: Write>(mut out: W, recordings: &[GestureRecording]) -> std::io::Result<()> {
    for r in recordings {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_jsonl(path: &Path, recordings: &[GestureRecording]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_recordings(BufWriter::new(file), recordings).map_err(io_err(path))
}

pub fn read_jsonl(path: &Path) -> Result<Vec<GestureRecording>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|source| CoreError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_manifest(path: &Path, assignment: &BTreeMap<String, Split>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(assignment).expect("map of strings serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn read_manifest(path: &Path) -> Result<BTreeMap<String, Split>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| CoreError::Json { path: path.to_path_buf(), line: 0, source })
}

pub fn dataset_paths(dir: &Path) -> (PathBuf, PathBuf) {
    (dir.join(DATASET_FILE), dir.join(SPLIT_FILE))
}

impl Dataset {
    /// Writes `dataset.jsonl` and, when split, `split.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let (data, split) = dataset_paths(dir);
        write_jsonl(&data, self.recordings())?;
        if self.is_split() {
            write_manifest(&split, self.split_assignment())?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Dataset> {
        let (data, split) = dataset_paths(dir);
        let recordings = read_jsonl(&data)?;
        if split.exists() {
            Dataset::with_assignment(recordings, read_manifest(&split)?)
        } else {
            Ok(Dataset::new(recordings))
        }
    }
}
