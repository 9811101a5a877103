//! Artifact persistence.
//!
//! Every JSONL artifact starts with a header record carrying the format
//! tag, the config hash, and the master seed, followed by one record per
//! data item. Serialization is canonical (fixed field order, serde_json
//! number formatting), so identical runs produce byte-identical files.
//! Field layouts are documented in `docs/formats.md`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::eval::{SftRecord, StrategyReportRow};
use crate::prm::CalibrationReport;
use crate::search::DecodeResult;
use crate::value::ValueParams;
use crate::world::{Corpus, CorpusSceneRecord};

/// Stable 64-bit FNV-1a hash of a value's canonical JSON, as hex.
/// Identifies the configuration a run was produced under.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let canonical = serde_json::to_string(value)?;
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canonical.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    Ok(format!("{hash:016x}"))
}

/// Leading record of every JSONL artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHeader {
    pub format: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub counts: BTreeMap<String, u64>,
}

impl FileHeader {
    pub fn new(format: &str, config_hash: &str, master_seed: u64) -> Self {
        Self {
            format: format.to_string(),
            config_hash: config_hash.to_string(),
            master_seed,
            counts: BTreeMap::new(),
        }
    }

    pub fn with_count(mut self, name: &str, value: u64) -> Self {
        self.counts.insert(name.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line<T> {
    Header(FileHeader),
    Record(T),
}

fn write_jsonl<T: Serialize>(path: &Path, header: &FileHeader, records: &[T]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let header_line = serde_json::to_string(&Line::<T>::Header(header.clone()))?;
    writeln!(out, "{header_line}")?;
    for record in records {
        // Serialize the record by reference to avoid cloning.
        #[derive(Serialize)]
        #[serde(tag = "kind", rename_all = "snake_case")]
        enum LineRef<'a, T> {
            Record(&'a T),
        }
        let line = serde_json::to_string(&LineRef::Record(record))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

fn read_jsonl<T: DeserializeOwned>(
    path: &Path,
    expect_format: &str,
) -> Result<(FileHeader, Vec<T>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut header: Option<FileHeader> = None;
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line<T> = serde_json::from_str(&line)?;
        match parsed {
            Line::Header(h) => {
                if i != 0 {
                    return Err(CoreError::Data(format!(
                        "{}: header found past the first line",
                        path.display()
                    )));
                }
                if h.format != expect_format {
                    return Err(CoreError::Integrity(format!(
                        "{}: format {:?} where {:?} was expected",
                        path.display(),
                        h.format,
                        expect_format
                    )));
                }
                header = Some(h);
            }
            Line::Record(r) => {
                if header.is_none() {
                    return Err(CoreError::Data(format!(
                        "{}: missing header line",
                        path.display()
                    )));
                }
                records.push(r);
            }
        }
    }
    let header =
        header.ok_or_else(|| CoreError::Data(format!("{}: empty artifact", path.display())))?;
    Ok((header, records))
}

pub const CORPUS_FORMAT: &str = "corpus/v1";
pub const PARAMS_FORMAT: &str = "value-params/v1";
pub const RESULTS_FORMAT: &str = "decode-results/v1";
pub const SFT_FORMAT: &str = "sft/v1";
pub const CALIBRATION_FORMAT: &str = "calibration/v1";
pub const REPORT_FORMAT: &str = "report/v1";
pub const MANIFEST_FORMAT: &str = "manifest/v1";
pub const BENCH_FORMAT: &str = "bench/v1";

pub fn write_corpus(path: &Path, corpus: &Corpus, header: &FileHeader) -> Result<()> {
    write_jsonl(path, header, &corpus.records)
}

pub fn read_corpus(path: &Path) -> Result<(FileHeader, Corpus)> {
    let (header, records): (FileHeader, Vec<CorpusSceneRecord>) = read_jsonl(path, CORPUS_FORMAT)?;
    Ok((header, Corpus { records }))
}

pub fn write_params(path: &Path, params: &ValueParams, header: &FileHeader) -> Result<()> {
    write_jsonl(path, header, std::slice::from_ref(params))
}

/// Reads trained parameters and refuses a feature-spec mismatch.
pub fn read_params(path: &Path) -> Result<(FileHeader, ValueParams)> {
    let (header, mut records): (FileHeader, Vec<ValueParams>) = read_jsonl(path, PARAMS_FORMAT)?;
    let params = records
        .pop()
        .ok_or_else(|| CoreError::Data(format!("{}: no parameter record", path.display())))?;
    params.check_feature_spec()?;
    params.validate()?;
    Ok((header, params))
}

/// One decode result keyed by its scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDecodeRecord {
    pub scene_id: u64,
    pub result: DecodeResult,
}

pub fn write_results(
    path: &Path,
    results: &[SceneDecodeRecord],
    header: &FileHeader,
) -> Result<()> {
    write_jsonl(path, header, results)
}

pub fn read_results(path: &Path) -> Result<(FileHeader, Vec<SceneDecodeRecord>)> {
    read_jsonl(path, RESULTS_FORMAT)
}

pub fn write_sft(path: &Path, records: &[SftRecord], header: &FileHeader) -> Result<()> {
    write_jsonl(path, header, records)
}

pub fn read_sft(path: &Path) -> Result<(FileHeader, Vec<SftRecord>)> {
    read_jsonl(path, SFT_FORMAT)
}

pub fn write_calibration(
    path: &Path,
    report: &CalibrationReport,
    header: &FileHeader,
) -> Result<()> {
    write_jsonl(path, header, std::slice::from_ref(report))
}

pub fn read_calibration(path: &Path) -> Result<(FileHeader, CalibrationReport)> {
    let (header, mut records): (FileHeader, Vec<CalibrationReport>) =
        read_jsonl(path, CALIBRATION_FORMAT)?;
    let report = records
        .pop()
        .ok_or_else(|| CoreError::Data(format!("{}: no calibration record", path.display())))?;
    Ok((header, report))
}

pub fn write_report_jsonl(
    path: &Path,
    rows: &[StrategyReportRow],
    header: &FileHeader,
) -> Result<()> {
    write_jsonl(path, header, rows)
}

pub fn read_report_jsonl(path: &Path) -> Result<(FileHeader, Vec<StrategyReportRow>)> {
    read_jsonl(path, REPORT_FORMAT)
}

/// Single-record manifest describing one command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub counts: BTreeMap<String, u64>,
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let header = FileHeader::new(MANIFEST_FORMAT, &manifest.config_hash, manifest.master_seed);
    write_jsonl(path, &header, std::slice::from_ref(manifest))
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let (_, mut records): (FileHeader, Vec<Manifest>) = read_jsonl(path, MANIFEST_FORMAT)?;
    records
        .pop()
        .ok_or_else(|| CoreError::Data(format!("{}: no manifest record", path.display())))
}

/// Writes the per-epoch mean loss curve.
pub fn write_loss_curve_csv(path: &Path, curve: &[f64]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["epoch", "mean_loss"])?;
    for (epoch, loss) in curve.iter().enumerate() {
        writer.write_record([epoch.to_string(), format!("{loss:.12e}")])?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes the comparison table as CSV.
pub fn write_report_csv(path: &Path, rows: &[StrategyReportRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "strategy",
        "scenes",
        "chair_s",
        "chair_i",
        "mean_coverage",
        "win_rate_vs_baseline",
        "policy_caption_calls",
        "policy_sentence_calls",
        "reward_calls",
        "value_calls",
    ])?;
    for row in rows {
        writer.write_record([
            row.strategy.to_string(),
            row.scenes.to_string(),
            format!("{:.6}", row.chair_s),
            format!("{:.6}", row.chair_i),
            format!("{:.6}", row.mean_coverage),
            row.win_rate_vs_baseline
                .map(|w| format!("{w:.6}"))
                .unwrap_or_default(),
            row.policy_caption_calls.to_string(),
            row.policy_sentence_calls.to_string(),
            row.reward_calls.to_string(),
            row.value_calls.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
