//! Run directory with atomically written artifacts and a digest manifest.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

pub struct RunDir {
    root: PathBuf,
    written: Vec<(String, String)>,
}

impl RunDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    /// Writes `name` through a temp file in the same directory, then renames it.
    pub fn write(&mut self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> io::Result<()> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.put(name, &buf)
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        let mut tmp = NamedTempFile::new_in(&self.root)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.root.join(name)).map_err(|e| e.error)?;
        let digest = format!("{:x}", Sha256::digest(bytes));
        self.written.retain(|(n, _)| n != name);
        self.written.push((name.to_string(), digest));
        Ok(())
    }

    /// Writes `manifest.txt`: one `sha256  name` line per artifact, sorted by name.
    pub fn finish(mut self) -> io::Result<PathBuf> {
        self.written.sort();
        let mut text = String::new();
        for (name, digest) in &self.written {
            text.push_str(&format!("{digest}  {name}\n"));
        }
        self.put("manifest.txt", text.as_bytes())?;
        Ok(self.root)
    }
}
