//! Append-style checkpoint of completed pairs, flushed by atomic rename.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

use crate::report::ReportRow;

pub const VERSION: &str = "knpoly-checkpoint 1";

type Key = (u64, u32, u64, u32);

/// Completed rows of one job, keyed by `(q, n, r, k)`.
pub struct Checkpoint {
    path: PathBuf,
    job: String,
    rows: BTreeMap<Key, ReportRow>,
}

impl Checkpoint {
    /// Opens `path`, or starts empty if it does not exist. `job` identifies the
    /// scan parameters; a checkpoint written for another job is refused.
    pub fn open(path: &Path, job: &str) -> anyhow::Result<Self> {
        let mut cp = Checkpoint {
            path: path.to_path_buf(),
            job: job.to_string(),
            rows: BTreeMap::new(),
        };
        if !path.exists() {
            return Ok(cp);
        }
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header != VERSION {
            bail!("checkpoint {} has version {header:?}, expected {VERSION:?}", path.display());
        }
        let job_line = lines.next().unwrap_or_default();
        if job_line != format!("job {job}") {
            bail!("checkpoint {} belongs to a different job ({job_line})", path.display());
        }
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let row: ReportRow = serde_json::from_str(line).context("corrupt checkpoint record")?;
            cp.rows.insert(row.key(), row);
        }
        Ok(cp)
    }

    pub fn contains(&self, key: &Key) -> bool {
        self.rows.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn record(&mut self, row: ReportRow) {
        self.rows.insert(row.key(), row);
    }

    pub fn rows(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.values()
    }

    pub fn flush(&self) -> anyhow::Result<()> {
        let dir = self.path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        writeln!(tmp, "{VERSION}")?;
        writeln!(tmp, "job {}", self.job)?;
        for row in self.rows.values() {
            writeln!(tmp, "{}", serde_json::to_string(row)?)?;
        }
        tmp.persist(&self.path)
            .with_context(|| format!("writing {}", self.path.display()))?;
        Ok(())
    }
}
