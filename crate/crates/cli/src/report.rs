//! Canonical report rows and their CSV/JSON rendering.

use std::collections::BTreeMap;
use std::io::Write;

use knpoly::criteria::{ClassEvidence, ClassState, PairVerdict, Status, TraceClass};
use knpoly::numthy::PrimePower;
use serde::{Deserialize, Serialize};

/// One report line per pair; per-class fields are `nonzero|zero`, `-` for an empty class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub q: u64,
    pub p: u64,
    pub m: u32,
    pub n: u32,
    pub r: u64,
    pub k: u32,
    pub status: String,
    pub trace_class_coverage: String,
    pub g_nonzero_class: String,
    pub g_zero_class: String,
    pub sieve_l: String,
    pub sieve_f: String,
    #[serde(rename = "D")]
    pub d: String,
    #[serde(rename = "S")]
    pub s: String,
    pub lhs_log: String,
    pub rhs_log: String,
    pub witness: String,
    pub runtime_ms: String,
}

impl ReportRow {
    pub fn key(&self) -> (u64, u32, u64, u32) {
        (self.q, self.n, self.r, self.k)
    }

    pub fn status(&self) -> Option<Status> {
        self.status.parse().ok()
    }

    pub fn from_verdict(v: &PairVerdict, runtime_ms: Option<u128>) -> Self {
        let pp = PrimePower::new(v.q).expect("verdicts carry valid q");
        let per_class = |get: &dyn Fn(&ClassEvidence) -> Option<String>| -> String {
            [TraceClass::Nonzero, TraceClass::Zero]
                .iter()
                .map(|c| {
                    v.class(*c)
                        .filter(|e| e.state != ClassState::Infeasible)
                        .and_then(get)
                        .unwrap_or_else(|| "-".into())
                })
                .collect::<Vec<_>>()
                .join("|")
        };
        let g_of = |c: TraceClass| {
            v.class(c)
                .and_then(|e| e.g.clone())
                .unwrap_or_else(|| "-".into())
        };
        ReportRow {
            q: v.q,
            p: pp.p,
            m: pp.m,
            n: v.n,
            r: v.r,
            k: v.k,
            status: v.status.to_string(),
            trace_class_coverage: v.coverage(),
            g_nonzero_class: g_of(TraceClass::Nonzero),
            g_zero_class: g_of(TraceClass::Zero),
            sieve_l: per_class(&|e| e.l.clone()),
            sieve_f: per_class(&|e| e.f.clone()),
            d: per_class(&|e| e.d.map(|x| format!("{x:.6}"))),
            s: per_class(&|e| e.s.map(|x| format!("{x:.6}"))),
            lhs_log: v.lhs_ln.map(|x| format!("{x:.6}")).unwrap_or_default(),
            rhs_log: per_class(&|e| e.rhs_ln.map(|x| format!("{x:.6}"))),
            witness: per_class(&|e| e.witness.clone()),
            runtime_ms: runtime_ms.map(|t| t.to_string()).unwrap_or_default(),
        }
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[ReportRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(mut out: W, rows: &[ReportRow]) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_csv(text: &str) -> anyhow::Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<ReportRow>, _>>()?)
}

/// Counts per status and the unresolved pairs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pairs: usize,
    pub excluded: usize,
    pub by_status: BTreeMap<String, usize>,
    pub unresolved: Vec<(u64, u32)>,
    pub indeterminate: Vec<(u64, u32)>,
}

impl Summary {
    pub fn of(rows: &[ReportRow], excluded: usize) -> Self {
        let mut s = Summary {
            pairs: rows.len(),
            excluded,
            ..Summary::default()
        };
        for r in rows {
            *s.by_status.entry(r.status.clone()).or_default() += 1;
            match r.status() {
                Some(Status::Unresolved) => s.unresolved.push((r.q, r.n)),
                Some(Status::IndeterminateFactoring) => s.indeterminate.push((r.q, r.n)),
                _ => {}
            }
        }
        s
    }

    pub fn render(&self) -> String {
        let mut out = format!("pairs: {}\nexcluded by necessary condition: {}\n", self.pairs, self.excluded);
        for (status, count) in &self.by_status {
            out.push_str(&format!("{status}: {count}\n"));
        }
        let list = |v: &[(u64, u32)]| {
            v.iter()
                .map(|(q, n)| format!("({q},{n})"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        out.push_str(&format!("unresolved: {}\n", list(&self.unresolved)));
        if !self.indeterminate.is_empty() {
            out.push_str(&format!("indeterminate: {}\n", list(&self.indeterminate)));
        }
        out
    }
}
