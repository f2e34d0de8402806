// SPDX-License-Identifier: Apache-2.0

use super::plan::{sha256_hex, MutationSpec};
use super::MutateError;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchRecord {
    pub spec: MutationSpec,
    pub pre_hash: String,
    pub post_hash: String,
    /// Seconds since the epoch; honours `SOURCE_DATE_EPOCH` when set.
    pub applied_at: u64,
}

fn now() -> u64 {
    if let Some(v) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return v;
    }
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> MutateError + '_ {
    move |source| MutateError::Io { path: path.to_path_buf(), source }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), MutateError> {
    let tmp = path.with_extension("wtpatch.tmp");
    fs::write(&tmp, bytes).map_err(io(&tmp))?;
    fs::rename(&tmp, path).map_err(io(path))
}

/// Replace the planned site in `text`, checking it still holds the original.
pub fn apply_to_text(spec: &MutationSpec, text: &str) -> Result<String, MutateError> {
    let s = &spec.site;
    if sha256_hex(text.as_bytes()) != spec.source_hash || text.get(s.start..s.end) != Some(s.original.as_str()) {
        return Err(MutateError::StaleFile(spec.file.clone()));
    }
    Ok(format!("{}{}{}", &text[..s.start], spec.replacement, &text[s.end..]))
}

/// Apply `spec` to its file under `root`.
pub fn apply(spec: &MutationSpec, root: &Path) -> Result<PatchRecord, MutateError> {
    let path = root.join(&spec.file);
    let text = fs::read_to_string(&path).map_err(io(&path))?;
    let patched = apply_to_text(spec, &text)?;
    write_atomic(&path, patched.as_bytes())?;
    Ok(PatchRecord { spec: spec.clone(), pre_hash: spec.source_hash.clone(), post_hash: sha256_hex(patched.as_bytes()), applied_at: now() })
}

/// Undo `rec`, refusing if the file changed since it was patched.
pub fn revert(rec: &PatchRecord, root: &Path) -> Result<(), MutateError> {
    let path = root.join(&rec.spec.file);
    let text = fs::read_to_string(&path).map_err(io(&path))?;
    if sha256_hex(text.as_bytes()) != rec.post_hash {
        return Err(MutateError::HashMismatch(rec.spec.file.clone()));
    }
    let s = &rec.spec.site;
    let end = s.start + rec.spec.replacement.len();
    let restored = format!("{}{}{}", &text[..s.start], s.original, &text[end..]);
    if sha256_hex(restored.as_bytes()) != rec.pre_hash {
        return Err(MutateError::HashMismatch(rec.spec.file.clone()));
    }
    write_atomic(&path, restored.as_bytes())
}

/// Revert in reverse application order.
pub fn revert_all(recs: &[PatchRecord], root: &Path) -> Result<(), MutateError> {
    recs.iter().rev().try_for_each(|r| revert(r, root))
}
