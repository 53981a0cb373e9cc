//! Output directory with a running SHA-256 manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut h = Sha256::new();
    io::copy(&mut fs::File::open(path)?, &mut h)?;
    Ok(hex(&h.finalize()))
}

fn hex(d: &[u8]) -> String {
    d.iter().map(|b| format!("{b:02x}")).collect()
}

struct Hashing<W> {
    inner: W,
    hash: Sha256,
}

impl<W: Write> Write for Hashing<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hash.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Files written under one root, keyed by `/`-separated relative path.
pub struct OutDir {
    root: PathBuf,
    manifest: BTreeMap<String, String>,
}

impl OutDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutDir { root: root.to_path_buf(), manifest: BTreeMap::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Write `rel` through `f` and record its hash.
    pub fn write<E, F>(&mut self, rel: &str, f: F) -> Result<(), E>
    where
        E: From<io::Error>,
        F: FnOnce(&mut dyn Write) -> Result<(), E>,
    {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut w = Hashing { inner: BufWriter::new(fs::File::create(&path)?), hash: Sha256::new() };
        f(&mut w)?;
        w.flush()?;
        self.manifest.insert(rel.to_string(), hex(&w.hash.finalize()));
        Ok(())
    }

    pub fn write_bytes(&mut self, rel: &str, bytes: &[u8]) -> io::Result<()> {
        self.write(rel, |w| w.write_all(bytes))
    }

    pub fn manifest(&self) -> &BTreeMap<String, String> {
        &self.manifest
    }
}
