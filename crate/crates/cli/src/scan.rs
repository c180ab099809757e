//! Parallel range scans.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use knpoly::criteria::{classify_pair_cached, necessary_check, ClassifyOptions};
use knpoly::numthy::{enumerate_prime_powers, Budget, FactorCache, PrimePower};
use parking_lot::Mutex;
use rayon::prelude::*;

use crate::checkpoint::Checkpoint;
use crate::report::{ReportRow, Summary};

const FLUSH_EVERY: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct ScanJob {
    pub q_min: u64,
    pub q_max: u64,
    pub n_min: u32,
    pub n_max: u32,
    pub r: u64,
    pub k: u32,
    pub budget: Budget,
    pub brute_ceiling: Option<u64>,
    pub jobs: usize,
    pub timing: bool,
}

impl ScanJob {
    /// Parameters that determine the verdicts, for checkpoint matching.
    pub fn id(&self) -> String {
        format!(
            "q={}..{} n={}..{} r={} k={} trial={} rho={} brute={}",
            self.q_min,
            self.q_max,
            self.n_min,
            self.n_max,
            self.r,
            self.k,
            self.budget.trial_bound,
            self.budget.rho_iterations,
            self.brute_ceiling.map_or("off".to_string(), |c| c.to_string())
        )
    }

    /// Admissible pairs in scan order, and the number excluded by the necessary check.
    pub fn pairs(&self) -> (Vec<(PrimePower, u32)>, usize) {
        let mut admissible = Vec::new();
        let mut excluded = 0;
        for pp in enumerate_prime_powers(self.q_min, self.q_max) {
            for n in self.n_min..=self.n_max {
                if necessary_check(pp, n, self.r, self.k).is_ok() {
                    admissible.push((pp, n));
                } else {
                    excluded += 1;
                }
            }
        }
        (admissible, excluded)
    }
}

pub struct ScanOutcome {
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
    /// Pairs classified in this run (as opposed to taken from the checkpoint).
    pub computed: usize,
}

pub fn run_scan(
    job: &ScanJob,
    cache: &dyn FactorCache,
    checkpoint: Option<&mut Checkpoint>,
) -> anyhow::Result<ScanOutcome> {
    let (pairs, excluded) = job.pairs();
    let opts = ClassifyOptions {
        budget: job.budget,
        brute_ceiling: job.brute_ceiling,
        g: None,
    };
    let pending: Vec<(PrimePower, u32)> = match &checkpoint {
        Some(cp) => pairs
            .iter()
            .copied()
            .filter(|(pp, n)| !cp.contains(&(pp.q, *n, job.r, job.k)))
            .collect(),
        None => pairs.clone(),
    };
    log::info!("{} admissible pairs, {} pending", pairs.len(), pending.len());
    let pool = rayon::ThreadPoolBuilder::new().num_threads(job.jobs).build()?;
    let fresh: Mutex<Vec<ReportRow>> = Mutex::new(Vec::with_capacity(pending.len()));
    let checkpoint = checkpoint.map(Mutex::new);
    let done = AtomicUsize::new(0);
    let first_error: Mutex<Option<anyhow::Error>> = Mutex::new(None);
    pool.install(|| {
        pending.par_iter().for_each(|&(pp, n)| {
            let start = Instant::now();
            let verdict = match classify_pair_cached(pp, n, job.r, job.k, &opts, cache) {
                Ok(v) => v,
                Err(e) => {
                    first_error.lock().get_or_insert(e.into());
                    return;
                }
            };
            let elapsed = job.timing.then(|| start.elapsed().as_millis());
            let row = ReportRow::from_verdict(&verdict, elapsed);
            if let Some(cp) = &checkpoint {
                let mut cp = cp.lock();
                cp.record(row.clone());
                if (done.fetch_add(1, Ordering::Relaxed) + 1).is_multiple_of(FLUSH_EVERY) {
                    if let Err(e) = cp.flush() {
                        first_error.lock().get_or_insert(e);
                    }
                }
            }
            fresh.lock().push(row);
        })
    });
    if let Some(e) = first_error.into_inner() {
        return Err(e);
    }
    let computed = fresh.lock().len();
    let rows = match checkpoint {
        Some(cp) => {
            let cp = cp.into_inner();
            cp.flush()?;
            let wanted: std::collections::HashSet<_> = pairs.iter().map(|(pp, n)| (pp.q, *n, job.r, job.k)).collect();
            cp.rows().filter(|r| wanted.contains(&r.key())).cloned().collect()
        }
        None => fresh.into_inner(),
    };
    let mut rows = rows;
    rows.sort_by_key(ReportRow::key);
    let summary = Summary::of(&rows, excluded);
    Ok(ScanOutcome {
        rows,
        summary,
        computed,
    })
}
