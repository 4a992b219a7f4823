use std::path::{Path, PathBuf};

use crate::CliError;

pub const OUT_ENV: &str = "GRADWAVE_OUT";
const DEFAULT_ROOT: &str = "gradwave-out";

pub fn root(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| DEFAULT_ROOT.into()),
    }
}

/// Create `<root>/<command>-<timestamp>`, suffixed when the name is taken.
pub fn run_dir(root: &Path, command: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(root)
        .map_err(|e| CliError::Config(format!("output root {} is not writable: {e}", root.display())))?;
    let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S-%3f");
    let base = format!("{command}-{stamp}");
    for k in 0..1000 {
        let name = if k == 0 { base.clone() } else { format!("{base}-{k}") };
        let dir = root.join(name);
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => {
                return Err(CliError::Config(format!("cannot create {}: {e}", dir.display())));
            }
        }
    }
    Err(CliError::Failed(format!("no free output directory under {}", root.display())))
}

/// Merge `extra` into the JSON object stored at `path`.
pub fn patch_manifest(path: &Path, extra: &serde_json::Value) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err)?;
    let mut v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Failed(e.to_string()))?;
    if let (Some(obj), Some(add)) = (v.as_object_mut(), extra.as_object()) {
        for (k, x) in add {
            obj.insert(k.clone(), x.clone());
        }
    }
    write_json(path, &v)
}

pub fn write_json(path: &Path, v: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Failed(e.to_string()))?;
    std::fs::write(path, text).map_err(io_err)
}

pub fn io_err(e: std::io::Error) -> CliError {
    CliError::Failed(e.to_string())
}
