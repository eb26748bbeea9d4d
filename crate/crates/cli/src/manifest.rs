//! Per-stage provenance: line-oriented `key=value` files written atomically.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::CliError;

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    std::fs::rename(tmp, path)
}

pub struct RunManifest {
    stage: &'static str,
    started: Instant,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    counts: Vec<(String, u64)>,
}

impl RunManifest {
    pub fn start(stage: &'static str) -> Self {
        RunManifest { stage, started: Instant::now(), inputs: Vec::new(), outputs: Vec::new(), counts: Vec::new() }
    }

    pub fn input(&mut self, p: &Path) {
        self.inputs.push(p.to_path_buf());
    }

    pub fn output(&mut self, p: &Path) {
        self.outputs.push(p.to_path_buf());
    }

    pub fn count(&mut self, name: &str, n: u64) {
        self.counts.push((name.to_string(), n));
    }

    /// Writes `<work_dir>/manifests/<stage>.manifest`.
    pub fn finish(self, cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
        let dir = cfg.pipeline.work_dir.join("manifests");
        std::fs::create_dir_all(&dir)?;
        let mut s = String::new();
        let _ = writeln!(s, "stage={}", self.stage);
        let _ = writeln!(s, "tool_version={} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"));
        for (k, v) in cfg.snapshot() {
            let _ = writeln!(s, "config.{k}={v}");
        }
        // Files inside the work directory are named relative to it, so
        // manifests of runs in different directories compare equal.
        let name = |p: &Path| p.strip_prefix(&cfg.pipeline.work_dir).unwrap_or(p).display().to_string();
        for p in &self.inputs {
            let _ = writeln!(s, "input.{}=sha256:{}", name(p), sha256_file(p)?);
        }
        for p in &self.outputs {
            let _ = writeln!(s, "output.{}=sha256:{}", name(p), sha256_file(p)?);
        }
        for (k, n) in &self.counts {
            let _ = writeln!(s, "records.{k}={n}");
        }
        let _ = writeln!(s, "wall_clock_ms={}", self.started.elapsed().as_millis());
        let path = dir.join(format!("{}.manifest", self.stage));
        write_atomic(&path, s.as_bytes())?;
        Ok(path)
    }
}
