//! Configuration files and result emission.
//!
//! Configurations are TOML; every section and key is optional and unknown
//! keys are rejected. Angles at this boundary are in degrees. Results go to
//! two CSV views plus a JSON manifest. CSV numbers use a fixed six-decimal
//! format so that identical runs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::sim::{MetricsRecord, SimConfig};
use crate::{Error, Result};

pub const SNR_CSV: &str = "snr_vs_threshold.csv";
pub const SEARCHES_CSV: &str = "searches_vs_threshold.csv";
pub const MANIFEST: &str = "manifest.json";

pub const SNR_HEADER: [&str; 6] = [
    "scheme",
    "tx_snr_db",
    "gamma_th_db",
    "avg_rx_snr_db",
    "ci95_db",
    "alignment_rate",
];
pub const SEARCHES_HEADER: [&str; 5] = ["scheme", "tx_snr_db", "gamma_th_db", "avg_searches", "ci95"];

/// Integer keys that hold counts. A negative value would otherwise surface
/// as a type error; reporting it as a validation error names the key.
const COUNT_KEYS: [&[&str]; 9] = [
    &["n_trials"],
    &["n_ttis_per_trial"],
    &["init_max_cts"],
    &["array", "n_h"],
    &["array", "n_v"],
    &["array", "n_aips"],
    &["array", "n_ue"],
    &["channel", "n_clusters"],
    &["channel", "n_subpaths"],
];

fn lookup<'a>(table: &'a toml::Table, path: &[&str]) -> Option<&'a toml::Value> {
    let (last, parents) = path.split_last()?;
    let mut t = table;
    for key in parents {
        t = t.get(*key)?.as_table()?;
    }
    t.get(*last)
}

/// Parse and validate a configuration document. `origin` is only used in
/// error messages.
pub fn parse_config(text: &str, origin: &Path) -> Result<SimConfig> {
    let parse_err = |e: toml::de::Error| Error::ConfigParse {
        path: origin.to_path_buf(),
        message: e.to_string().trim_end().replace('\n', " "),
    };
    let table: toml::Table = toml::from_str(text).map_err(parse_err)?;
    for path in COUNT_KEYS {
        if let Some(n) = lookup(&table, path).and_then(toml::Value::as_integer) {
            if n < 0 {
                let field = *path.last().expect("non-empty key path");
                return Err(Error::invalid(field, format!("must be a non-negative count, got {n}")));
            }
        }
    }
    let cfg: SimConfig = toml::from_str(text).map_err(parse_err)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

/// The configuration as a complete TOML document.
pub fn config_to_toml(cfg: &SimConfig) -> String {
    toml::to_string(cfg).expect("configuration serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub master_seed: u64,
    pub runtime_s: f64,
    /// Every scheme replays the same per-trial channel sequence.
    pub paired_seeds: bool,
    pub outputs: Vec<PathBuf>,
    pub config: SimConfig,
}

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn write_csv<const N: usize>(
    path: &Path,
    header: [&str; N],
    rows: impl Iterator<Item = [String; N]>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format(format!("{other:?}")),
    })?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Write both CSV views and the manifest into `out_dir` (created if
/// missing).
pub fn emit_results(
    records: &[MetricsRecord],
    out_dir: &Path,
    config: &SimConfig,
    runtime_s: f64,
) -> Result<RunManifest> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let snr_path = out_dir.join(SNR_CSV);
    write_csv(
        &snr_path,
        SNR_HEADER,
        records.iter().map(|r| {
            [
                r.scheme.to_string(),
                fmt6(r.tx_snr_db),
                fmt6(r.gamma_th_db),
                fmt6(r.avg_rx_snr_db),
                fmt6(r.ci95_db),
                fmt6(r.alignment_rate),
            ]
        }),
    )?;
    let searches_path = out_dir.join(SEARCHES_CSV);
    write_csv(
        &searches_path,
        SEARCHES_HEADER,
        records.iter().map(|r| {
            [
                r.scheme.to_string(),
                fmt6(r.tx_snr_db),
                fmt6(r.gamma_th_db),
                fmt6(r.avg_searches),
                fmt6(r.ci95_searches),
            ]
        }),
    )?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        master_seed: config.master_seed,
        runtime_s,
        paired_seeds: true,
        outputs: vec![PathBuf::from(SNR_CSV), PathBuf::from(SEARCHES_CSV)],
        config: config.clone(),
    };
    let path = out_dir.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
