use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

/// Writes `text` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial report. `None` means stdout.
pub fn write_atomic(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())?;
        return out.flush();
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    // temporary files start out owner-only; reports are ordinary files
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// One JSON object per line.
pub fn json_lines<T: serde::Serialize>(items: &[T]) -> String {
    let mut s = String::new();
    for item in items {
        s.push_str(&serde_json::to_string(item).expect("reports serialize"));
        s.push('\n');
    }
    s
}
