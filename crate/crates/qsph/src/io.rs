//! CSV and JSON artifact formats. Floats are written in Rust's shortest
//! round-trip form, so equal values always produce equal bytes.

use std::fs;
use std::path::Path;

use qsph_core::bench::Snapshot;
use qsph_core::qsph::{KernelSpaceRow, QuantumKernelModel};
use qsph_core::sph::{ParticleSet, Vec2};
use qsph_core::train::TrainTrace;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const PARTICLE_HEADER: [&str; 5] = ["x", "y", "volume", "value", "interior_flag"];
pub const SNAPSHOT_HEADER: [&str; 5] = ["x", "y", "psi_pred", "psi_ref", "err"];
pub const KERNEL_SPACE_HEADER: [&str; 4] = ["r", "learned", "classical", "residual"];
pub const LOSS_HEADER: [&str; 3] = ["epoch", "train_loss", "test_loss"];
pub const LOSS_HEADER_TIMED: [&str; 4] = ["epoch", "train_loss", "test_loss", "wall_ms"];
pub const PREDICTION_HEADER: [&str; 5] = ["x", "y", "target", "prediction", "split"];
pub const ERROR_HEADER: [&str; 4] = ["x", "y", "error", "abs_error"];

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes a header and rows of cells.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Header and rows of a CSV file.
pub fn read_csv(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let header = r.headers().map_err(|e| CliError::io(path, e))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| CliError::io(path, e))?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn parse_f64(path: &Path, s: &str) -> CliResult<f64> {
    s.trim().parse().map_err(|_| CliError::config(format!("{}: `{s}` is not a number", path.display())))
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Reads JSON; a missing or malformed file is a configuration error.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn write_particles(path: &Path, ps: &ParticleSet) -> CliResult<()> {
    write_csv(
        path,
        &PARTICLE_HEADER,
        (0..ps.len()).map(|i| {
            let p = ps.positions[i];
            [num(p[0]), num(p[1]), num(ps.volumes[i]), num(ps.values[i]), (ps.interior[i] as u8).to_string()]
        }),
    )
}

/// Reads particles written by [`write_particles`]; `h` and `spacing` are not
/// part of the format.
pub fn read_particles(path: &Path, h: f64, spacing: f64) -> CliResult<ParticleSet> {
    let (header, rows) = read_csv(path)?;
    if header != PARTICLE_HEADER {
        return Err(CliError::config(format!("{}: expected header {}", path.display(), PARTICLE_HEADER.join(","))));
    }
    let (mut pos, mut vol, mut val, mut int) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for row in &rows {
        pos.push([parse_f64(path, &row[0])?, parse_f64(path, &row[1])?]);
        vol.push(parse_f64(path, &row[2])?);
        val.push(parse_f64(path, &row[3])?);
        int.push(match row[4].trim() {
            "1" | "true" => true,
            "0" | "false" => false,
            s => return Err(CliError::config(format!("{}: bad interior flag `{s}`", path.display()))),
        });
    }
    Ok(ParticleSet::new(pos, vol, val, int, h, spacing)?)
}

/// `err = psi_pred − psi_ref` per interior particle.
pub fn write_snapshot(path: &Path, positions: &[Vec2], pred: &[f64], reference: &[f64]) -> CliResult<()> {
    write_csv(
        path,
        &SNAPSHOT_HEADER,
        positions
            .iter()
            .zip(pred.iter().zip(reference))
            .map(|(p, (a, b))| [num(p[0]), num(p[1]), num(*a), num(*b), num(a - b)]),
    )
}

pub fn snapshot_file_name(s: &Snapshot) -> String {
    format!("snapshot_t{:.2}.csv", s.time)
}

pub fn write_kernel_space(path: &Path, rows: &[KernelSpaceRow]) -> CliResult<()> {
    write_csv(path, &KERNEL_SPACE_HEADER, rows.iter().map(|r| [num(r.r), num(r.learned), num(r.classical), num(r.residual)]))
}

/// Per-epoch losses; `wall_ms` only when `timed`.
pub fn write_trace(path: &Path, trace: &TrainTrace, timed: bool) -> CliResult<()> {
    let header: &[&str] = if timed { &LOSS_HEADER_TIMED } else { &LOSS_HEADER };
    write_csv(
        path,
        header,
        trace.records.iter().map(|r| {
            let mut row = vec![r.epoch.to_string(), num(r.train_loss), r.test_loss.map_or(String::new(), num)];
            if timed {
                row.push(num(r.wall_ms));
            }
            row
        }),
    )
}

/// Hex SHA-256 of a value's compact JSON form.
pub fn json_sha256<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable");
    hex::encode(Sha256::digest(bytes))
}

/// On-disk kernel model with an integrity hash.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelModelFile {
    pub model: QuantumKernelModel,
    pub sha256: String,
}

pub fn save_kernel_model(path: &Path, model: &QuantumKernelModel) -> CliResult<String> {
    let sha256 = json_sha256(model);
    save_json(
        path,
        &KernelModelFile {
            model: model.clone(),
            sha256: sha256.clone(),
        },
    )?;
    Ok(sha256)
}

/// Loads and checks a kernel model; missing, corrupt or inconsistent files
/// are configuration errors.
pub fn load_kernel_model(path: &Path) -> CliResult<(QuantumKernelModel, String)> {
    if !path.is_file() {
        return Err(CliError::config(format!("kernel model file {} not found", path.display())));
    }
    let f: KernelModelFile = load_json(path)?;
    let sha = json_sha256(&f.model);
    if sha != f.sha256 {
        return Err(CliError::config(format!("{}: model hash mismatch", path.display())));
    }
    f.model.validate()?;
    Ok((f.model, sha))
}
