//! Atomic artifact writes: temp file + rename, so interrupted runs never
//! leave half-written files that parse.

use std::io::Write;
use std::path::Path;

use super::HarnessError;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", parent.display())))?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", tmp.display())))?;
        f.write_all(bytes).map_err(|e| HarnessError::Io(e.to_string()))?;
        f.sync_all().map_err(|e| HarnessError::Io(e.to_string()))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn write_json_atomic<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| HarnessError::Config(format!("serialize {}: {e}", path.display())))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}
