//! Pipeline configuration and its `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! citations = citations.csv
//! categories = categories.csv
//! year_start = 2006
//! year_end = 2015
//! min_citations = 10
//! min_refs = 10
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::export::MapWeight;
use crate::ingest::{IngestConfig, YearWindow};
use crate::similarity::{SimilarityOptions, StorageMode};

pub const DEFAULT_MULTIDISCIPLINARY_LABEL: &str = "Multidisciplinary Sciences";

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub citations: Option<PathBuf>,
    pub categories: Option<PathBuf>,
    pub delimiter: u8,
    pub year_window: Option<YearWindow>,
    /// Minimum inbound citations for a journal to enter the network export.
    pub min_inbound_citations: u64,
    /// Minimum matched references for an article to enter decile analyses.
    pub min_refs: usize,
    pub multidisciplinary_label: String,
    pub storage: StorageMode,
    pub sparsity_floor: f64,
    pub threads: usize,
    pub out_dir: PathBuf,
    pub bin_width: f64,
    pub top_journals: usize,
    pub map_weight: MapWeight,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            citations: None,
            categories: None,
            delimiter: b',',
            year_window: None,
            min_inbound_citations: 10,
            min_refs: 10,
            multidisciplinary_label: DEFAULT_MULTIDISCIPLINARY_LABEL.to_string(),
            storage: StorageMode::Sparse,
            sparsity_floor: 0.0,
            threads: 0,
            out_dir: PathBuf::from("out"),
            bin_width: 0.02,
            top_journals: 20,
            map_weight: MapWeight::Articles,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

impl PipelineConfig {
    /// Reads a config file over the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut config = PipelineConfig::default();
        let mut year_start = None;
        let mut year_end = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::malformed(path, n as u64 + 1, "expected key = value"))?;
            let resolve = |v: &str| base.join(v);
            match key {
                "year_start" => year_start = Some(parse_value(key, value)?),
                "year_end" => year_end = Some(parse_value(key, value)?),
                _ => config.set(key, value, resolve).map_err(|e| match e {
                    Error::Config(m) => Error::malformed(path, n as u64 + 1, m),
                    other => other,
                })?,
            }
        }
        config.year_window = match (year_start, year_end) {
            (None, None) => None,
            (Some(start), Some(end)) => Some(YearWindow { start, end }),
            _ => return Err(Error::Config("year_start and year_end must be given together".into())),
        };
        config.validate()?;
        Ok(config)
    }

    fn set(&mut self, key: &str, value: &str, resolve: impl Fn(&str) -> PathBuf) -> Result<()> {
        match key {
            "citations" => self.citations = Some(resolve(value)),
            "categories" => self.categories = Some(resolve(value)),
            "out" => self.out_dir = resolve(value),
            "delimiter" => self.delimiter = parse_delimiter(value)?,
            "min_citations" => self.min_inbound_citations = parse_value(key, value)?,
            "min_refs" => self.min_refs = parse_value(key, value)?,
            "multidisciplinary_label" => self.multidisciplinary_label = value.to_string(),
            "storage" => self.storage = value.parse()?,
            "sparsity_floor" => self.sparsity_floor = parse_value(key, value)?,
            "threads" => self.threads = parse_value(key, value)?,
            "bin_width" => self.bin_width = parse_value(key, value)?,
            "top_journals" => self.top_journals = parse_value(key, value)?,
            "map_weight" => self.map_weight = value.parse()?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.year_window {
            if w.start > w.end {
                return Err(Error::Config(format!("year window {}..{} is reversed", w.start, w.end)));
            }
        }
        if !(self.sparsity_floor >= 0.0) {
            return Err(Error::Config("sparsity_floor must be >= 0".into()));
        }
        if !(self.bin_width > 0.0 && self.bin_width <= 1.0) {
            return Err(Error::Config("bin_width must be in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn ingest_config(&self) -> IngestConfig {
        IngestConfig {
            delimiter: self.delimiter,
            year_window: self.year_window,
            ..IngestConfig::default()
        }
    }

    pub fn similarity_options(&self) -> SimilarityOptions {
        SimilarityOptions {
            storage: self.storage,
            sparsity_floor: self.sparsity_floor,
            threads: self.threads,
        }
    }
}

/// Accepts a single character or the names `tab`, `comma`, `semicolon`.
pub fn parse_delimiter(value: &str) -> Result<u8> {
    match value {
        "tab" | "\\t" => Ok(b'\t'),
        "comma" => Ok(b','),
        "semicolon" => Ok(b';'),
        v if v.len() == 1 => Ok(v.as_bytes()[0]),
        v => Err(Error::Config(format!("invalid delimiter {v:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# fixture\ncitations = c.csv\nyear_start = 2006\nyear_end=2015\nmin_refs = 5 # short lists\nstorage = dense\ndelimiter = tab\n",
        )
        .unwrap();
        let c = PipelineConfig::from_file(&path).unwrap();
        assert_eq!(c.citations, Some(dir.path().join("c.csv")));
        assert_eq!(c.year_window, Some(YearWindow { start: 2006, end: 2015 }));
        assert_eq!(c.min_refs, 5);
        assert_eq!(c.min_inbound_citations, 10);
        assert_eq!(c.storage, StorageMode::Dense);
        assert_eq!(c.delimiter, b'\t');
    }

    #[test]
    fn bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        for body in ["min_refs\n", "colour = red\n", "min_refs = -1\n", "year_start = 2015\nyear_end = 2006\n", "year_start = 2010\n"] {
            std::fs::write(&path, body).unwrap();
            assert!(PipelineConfig::from_file(&path).is_err(), "{body:?} accepted");
        }
    }
}
