//! Deterministic output files for command-line runs.
//!
//! Every text file starts with `# config_sha256=<hex>`; JSON files carry the
//! same value in a `config_sha256` field. Floats go through [`Float`], which
//! is shortest round-trip, so identical runs produce identical bytes.

use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Shortest round-trip decimal form of an `f64`: plain notation for
/// magnitudes in `[1e-4, 1e15)`, scientific otherwise.
#[derive(Copy, Clone, Debug)]
pub struct Float(pub f64);

impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

fn with_path(path: &Path, e: io::Error) -> io::Error {
    io::Error::new(e.kind(), format!("{}: {e}", path.display()))
}

/// Output directory bound to one resolved configuration.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    config_hash: String,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path, config_hash: &str) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| with_path(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            config_hash: config_hash.to_string(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Write a text file: the hash line, extra `# ` comment lines, then
    /// whatever `body` emits.
    pub fn text<F>(&mut self, name: &str, comments: &[String], body: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let path = self.root.join(name);
        let mut w = BufWriter::new(File::create(&path).map_err(|e| with_path(&path, e))?);
        writeln!(w, "# config_sha256={}", self.config_hash)?;
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        body(&mut w)?;
        w.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Write `value` as pretty JSON wrapped with the config hash.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            config_sha256: &'a str,
            #[serde(flatten)]
            data: &'a T,
        }
        let path = self.root.join(name);
        let mut w = BufWriter::new(File::create(&path).map_err(|e| with_path(&path, e))?);
        let wrapped = Wrapped {
            config_sha256: &self.config_hash,
            data: value,
        };
        serde_json::to_writer_pretty(&mut w, &wrapped).map_err(std::io::Error::from)?;
        writeln!(w)?;
        w.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Write a raw binary file; the hash is recorded only in the manifest.
    pub fn binary<F>(&mut self, name: &str, body: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let path = self.root.join(name);
        let mut w = BufWriter::new(File::create(&path).map_err(|e| with_path(&path, e))?);
        body(&mut w)?;
        w.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }
}

/// Run manifest written as `manifest.json` after every successful command.
#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize, S: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub experiment: &'a str,
    pub threads: usize,
    pub config: &'a C,
    pub outputs: Vec<String>,
    pub summary: &'a S,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [
            0.0,
            1.0,
            -2.5,
            1e-4,
            9.99e-5,
            1.0 / 3.0,
            7.238227659137282e-7,
            1e15,
            123456.789,
            -1e-300,
        ] {
            let s = Float(x).to_string();
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(Float(1.5e-7).to_string(), "1.5e-7");
        assert_eq!(Float(0.25).to_string(), "0.25");
    }

    #[test]
    fn text_files_start_with_hash() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path(), "abc").unwrap();
        let p = out
            .text("a.csv", &["unit=s".into()], |w| {
                writeln!(w, "x,y")?;
                writeln!(w, "{},{}", Float(0.1), Float(1e-20))?;
                Ok(())
            })
            .unwrap();
        let text = fs::read_to_string(p).unwrap();
        assert_eq!(text, "# config_sha256=abc\n# unit=s\nx,y\n0.1,1e-20\n");
        let j = out.json("r.json", &serde_json::json!({"k": 1})).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(j).unwrap()).unwrap();
        assert_eq!(v["config_sha256"], "abc");
        assert_eq!(v["k"], 1);
        assert_eq!(out.written().len(), 2);
    }
}
