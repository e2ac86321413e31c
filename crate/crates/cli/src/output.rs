use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::failure::Failure;

/// Artifacts collected in memory and written only once the whole command has
/// succeeded, so a failing run leaves nothing behind.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(&'static str, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &'static str, bytes: impl Into<Vec<u8>>) {
        self.files.push((name, bytes.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &'static str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
        text.push('\n');
        self.add(name, text);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.files.iter().map(|(n, _)| *n)
    }

    pub fn write_to(self, dir: &Path) -> Result<(), Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        for (name, bytes) in self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

/// Empty string for a missing value, shortest round-trip text otherwise.
pub fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}
