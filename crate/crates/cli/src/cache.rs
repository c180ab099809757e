//! Persistent factorization cache shared by scans.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use knpoly::numthy::{primality, Budget, FactorCache, PartialFactorization};
use num_bigint::BigUint;
use num_traits::One;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

pub const CACHE_ENV: &str = "KNPOLY_CACHE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Computed,
    UserSupplied,
}

/// One cached integer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorCacheEntry {
    pub integer: String,
    pub complete: bool,
    pub primes: Vec<(String, u32)>,
    pub cofactor: String,
    pub trial_bound: u64,
    #[serde(default)]
    pub rho_iterations: u64,
    pub provenance: Provenance,
}

impl FactorCacheEntry {
    pub fn from_factorization(f: &PartialFactorization, provenance: Provenance) -> Self {
        FactorCacheEntry {
            integer: f.target.to_string(),
            complete: f.is_complete(),
            primes: f.primes.iter().map(|(p, e)| (p.to_string(), *e)).collect(),
            cofactor: f.cofactor.to_string(),
            trial_bound: f.trial_bound,
            rho_iterations: f.rho_iterations,
            provenance,
        }
    }

    /// Parses and re-checks the entry: product, primality of every listed prime,
    /// and consistency of the completeness flag.
    pub fn validate(&self) -> Result<PartialFactorization, String> {
        let parse = |s: &str| s.parse::<BigUint>().map_err(|e| format!("{s}: {e}"));
        let target = parse(&self.integer)?;
        let cofactor = parse(&self.cofactor)?;
        let mut primes = Vec::with_capacity(self.primes.len());
        let mut product = cofactor.clone();
        let mut proof_grade = true;
        for (p, e) in &self.primes {
            let p = parse(p)?;
            match primality(&p) {
                knpoly::numthy::Primality::Composite => return Err(format!("{p} is not prime")),
                knpoly::numthy::Primality::ProbablePrime => proof_grade = false,
                knpoly::numthy::Primality::Prime => {}
            }
            product *= p.pow(*e);
            primes.push((p, *e));
        }
        if product != target {
            return Err(format!("factors multiply to {product}, not {target}"));
        }
        if !primes.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err("primes must be distinct and ascending".into());
        }
        if self.complete != cofactor.is_one() {
            return Err("complete flag disagrees with cofactor".into());
        }
        if !cofactor.is_one() && primality(&cofactor).is_prime_like() {
            return Err(format!("cofactor {cofactor} is prime"));
        }
        Ok(PartialFactorization {
            target,
            primes,
            cofactor,
            trial_bound: self.trial_bound,
            rho_iterations: self.rho_iterations,
            proof_grade,
        })
    }
}

fn sort_key(s: &str) -> (usize, &str) {
    (s.len(), s)
}

/// Canonical `N = p^e·q` text for a complete entry.
pub fn entry_line(e: &FactorCacheEntry) -> String {
    let mut parts: Vec<String> = e
        .primes
        .iter()
        .map(|(p, k)| if *k == 1 { p.clone() } else { format!("{p}^{k}") })
        .collect();
    if e.cofactor != "1" {
        parts.push(format!("[{}]", e.cofactor));
    }
    if parts.is_empty() {
        parts.push("1".into());
    }
    format!("{} = {}", e.integer, parts.join("·"))
}

/// Parses `N = p·q^e` (also accepting `*` for `·`) into a complete entry.
pub fn parse_line(line: &str) -> Result<FactorCacheEntry, String> {
    let (lhs, rhs) = line.split_once('=').ok_or_else(|| format!("missing '=' in {line:?}"))?;
    let integer: BigUint = lhs.trim().parse().map_err(|e| format!("{}: {e}", lhs.trim()))?;
    let mut acc: BTreeMap<BigUint, u32> = BTreeMap::new();
    for term in rhs.split(['·', '*']) {
        let term = term.trim();
        if term.is_empty() {
            return Err(format!("empty factor in {line:?}"));
        }
        let (base, exp) = match term.split_once('^') {
            Some((b, e)) => (b.trim(), e.trim().parse::<u32>().map_err(|e| format!("{term}: {e}"))?),
            None => (term, 1),
        };
        let base: BigUint = base.parse().map_err(|e| format!("{base}: {e}"))?;
        if base.is_one() && exp > 0 {
            continue;
        }
        *acc.entry(base).or_default() += exp;
    }
    Ok(FactorCacheEntry {
        integer: integer.to_string(),
        complete: true,
        primes: acc.into_iter().map(|(p, e)| (p.to_string(), e)).collect(),
        cofactor: "1".into(),
        trial_bound: Budget::default().trial_bound,
        rho_iterations: 0,
        provenance: Provenance::UserSupplied,
    })
}

/// On-disk cache; entries are validated on load and written atomically.
pub struct FileCache {
    path: Option<PathBuf>,
    entries: RwLock<BTreeMap<String, (FactorCacheEntry, PartialFactorization)>>,
    dirty: RwLock<bool>,
}

impl FileCache {
    pub fn in_memory() -> Self {
        FileCache {
            path: None,
            entries: RwLock::new(BTreeMap::new()),
            dirty: RwLock::new(false),
        }
    }

    /// Loads `path` if it exists; invalid entries are dropped with a warning.
    pub fn open(path: &Path) -> anyhow::Result<Self> {
        let cache = FileCache {
            path: Some(path.to_path_buf()),
            ..FileCache::in_memory()
        };
        if path.exists() {
            let (good, bad) = read_entries(path)?;
            for (entry, reason) in bad {
                log::warn!("dropping cache entry {}: {reason}", entry.integer);
            }
            let mut map = cache.entries.write();
            for (entry, f) in good {
                map.insert(entry.integer.clone(), (entry, f));
            }
        }
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Adds a validated entry; replaces an existing one only if the new one is
    /// complete or used at least as much effort.
    pub fn insert(&self, entry: FactorCacheEntry, f: PartialFactorization) {
        let mut map = self.entries.write();
        let replace = match map.get(&entry.integer) {
            None => true,
            Some((_, old)) => {
                !old.is_complete() && (f.is_complete() || f.budget().covers(&old.budget())) && *old != f
            }
        };
        if replace {
            map.insert(entry.integer.clone(), (entry, f));
            *self.dirty.write() = true;
        }
    }

    /// Entries in canonical (numeric) order.
    pub fn entries(&self) -> Vec<FactorCacheEntry> {
        let map = self.entries.read();
        let mut out: Vec<FactorCacheEntry> = map.values().map(|(e, _)| e.clone()).collect();
        out.sort_by(|a, b| sort_key(&a.integer).cmp(&sort_key(&b.integer)));
        out
    }

    /// Writes the cache back to its file if anything changed.
    pub fn flush(&self) -> anyhow::Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        if !*self.dirty.read() {
            return Ok(());
        }
        write_entries(path, &self.entries())?;
        *self.dirty.write() = false;
        Ok(())
    }
}

impl FactorCache for FileCache {
    fn lookup(&self, n: &BigUint) -> Option<PartialFactorization> {
        self.entries.read().get(&n.to_string()).map(|(_, f)| f.clone())
    }

    fn store(&self, f: &PartialFactorization) {
        self.insert(FactorCacheEntry::from_factorization(f, Provenance::Computed), f.clone());
    }
}

type Checked = (Vec<(FactorCacheEntry, PartialFactorization)>, Vec<(FactorCacheEntry, String)>);

/// Reads a cache file, splitting valid entries from rejected ones.
pub fn read_entries(path: &Path) -> anyhow::Result<Checked> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let entries: Vec<FactorCacheEntry> = if text.trim().is_empty() {
        Vec::new()
    } else {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    };
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for e in entries {
        match e.validate() {
            Ok(f) => good.push((e, f)),
            Err(reason) => bad.push((e, reason)),
        }
    }
    Ok((good, bad))
}

/// Atomically replaces `path` with the given entries.
pub fn write_entries(path: &Path, entries: &[FactorCacheEntry]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    let text = serde_json::to_string_pretty(entries)?;
    tmp.write_all(text.as_bytes())?;
    tmp.write_all(b"\n")?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// `--cache`, else `KNPOLY_CACHE`, else the user cache directory.
pub fn default_path(flag: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = flag {
        return Some(p.to_path_buf());
    }
    if let Some(p) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
        return Some(PathBuf::from(p));
    }
    let base = std::env::var_os("XDG_CACHE_HOME")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")))?;
    Some(base.join("knpoly").join("factors.json"))
}

/// Outcome of importing a text file of factorizations.
#[derive(Debug, Default)]
pub struct ImportSummary {
    pub accepted: usize,
    pub rejected: Vec<(String, String)>,
}

pub fn import_text(cache: &FileCache, text: &str) -> ImportSummary {
    let mut summary = ImportSummary::default();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_line(line).and_then(|e| e.validate().map(|f| (e, f))) {
            Ok((e, f)) => {
                cache.insert(e, f);
                summary.accepted += 1;
            }
            Err(reason) => summary.rejected.push((line.to_string(), reason)),
        }
    }
    summary
}

pub fn verify_file(path: &Path) -> anyhow::Result<(usize, Vec<(FactorCacheEntry, String)>)> {
    if !path.exists() {
        bail!("cache file {} does not exist", path.display());
    }
    let (good, bad) = read_entries(path)?;
    Ok((good.len(), bad))
}
