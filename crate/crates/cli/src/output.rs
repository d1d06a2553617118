use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const OUTPUT_DIR_ENV: &str = "FREEBOUND_OUTPUT_DIR";

/// `--output` wins over the environment, which wins over `output.dir`.
pub fn output_dir(flag: Option<&Path>, configured: &str) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(configured),
    }
}

/// Writes every file through a temporary sibling and a rename, so a reader
/// never sees a partial file.
pub fn write_all(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    for (name, contents) in files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
        let result = (|| {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(contents.as_bytes())?;
            f.sync_all()?;
            fs::rename(&tmp, &target)
        })();
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            return Err(CliError::io(&target, e));
        }
        written.push(target);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_and_replaces() {
        let dir = tempfile::tempdir().unwrap();
        write_all(dir.path(), &[("a.txt", "one".into())]).unwrap();
        write_all(dir.path(), &[("a.txt", "two".into())]).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("a.txt")).unwrap(), "two");
        let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn flag_beats_config() {
        assert_eq!(output_dir(Some(Path::new("x")), "y"), PathBuf::from("x"));
    }
}
