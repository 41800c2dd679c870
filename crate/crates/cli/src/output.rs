use std::io::Write;
use std::path::Path;

use crate::error::{io_error, CliResult};

/// Writes `text` to `path`, or to stdout when `path` is `-`.
pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if path.as_os_str() == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes()).map_err(|e| io_error(path, e))?;
        return out.flush().map_err(|e| io_error(path, e));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}
