use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{Environment, SyncAction};
use crate::rng::{stream_rng, Stream};
use crate::schedulers::{NoSync, Policy};
use crate::{Error, Result};

use super::config::ExperimentConfig;

/// One slot of one policy's run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: u64,
    pub policy: String,
    /// Immediate APC after the slot's synchronization.
    pub apc: f64,
    pub reward: f64,
    /// Running sum of `no-sync APC - this APC`.
    pub acc_reduction: f64,
    pub action: String,
}

/// A full evaluation run of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub policy: String,
    pub records: Vec<SlotRecord>,
    /// Network fingerprint after each slot's rewiring.
    pub fingerprints: Vec<u64>,
}

impl RunResult {
    pub fn apc(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.apc)
    }

    pub fn mean_apc(&self) -> f64 {
        self.apc().sum::<f64>() / self.records.len().max(1) as f64
    }

    /// Accumulated APC reduction against no synchronization at the last slot.
    pub fn final_reduction(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.acc_reduction)
    }
}

/// `100 (a - b) / b`, undefined when `b` is zero.
pub fn percentage_improvement(a: f64, b: f64) -> Option<f64> {
    if b == 0.0 {
        None
    } else {
        Some(100.0 * (a - b) / b)
    }
}

struct Trace {
    apc: Vec<f64>,
    rewards: Vec<f64>,
    actions: Vec<SyncAction>,
    fingerprints: Vec<u64>,
}

fn play(cfg: &ExperimentConfig, seed: u64, policy: &mut dyn Policy) -> Result<Trace> {
    let mut env = cfg.make_env(seed)?;
    let mut rng = stream_rng(seed, Stream::Policy);
    let horizon = env.horizon();
    let mut trace = Trace {
        apc: Vec::with_capacity(horizon as usize),
        rewards: Vec::with_capacity(horizon as usize),
        actions: Vec::with_capacity(horizon as usize),
        fingerprints: Vec::with_capacity(horizon as usize),
    };
    for t in 1..=horizon {
        let action = policy.decide(env.state(), t, &mut rng);
        let out = if policy.budget_exempt() {
            env.step_unbudgeted(&action)?
        } else {
            env.step(&action)?
        };
        trace.apc.push(out.apc_post);
        trace.rewards.push(out.reward);
        trace.actions.push(out.action);
        trace.fingerprints.push(env.network().fingerprint());
    }
    Ok(trace)
}

/// Runs every policy on the scenario instance for `seed`.
///
/// Each policy gets a fresh copy of the same network, flow pairs and
/// rewiring stream, so topologies match slot for slot across policies.
/// Reductions are measured against a no-sync run on the same instance.
pub fn evaluate(
    cfg: &ExperimentConfig,
    seed: u64,
    policies: &mut [Box<dyn Policy>],
) -> Result<Vec<RunResult>> {
    let m = cfg.scenario.m;
    let baseline = play(cfg, seed, &mut NoSync::new(m))?;
    let mut results = Vec::with_capacity(policies.len());
    for policy in policies.iter_mut() {
        let trace = play(cfg, seed, policy.as_mut())?;
        if trace.fingerprints != baseline.fingerprints {
            return Err(Error::InvalidArgument(format!(
                "policy {} changed the topology sequence",
                policy.name()
            )));
        }
        let mut acc = 0.0;
        let records = (0..trace.apc.len())
            .map(|i| {
                acc += baseline.apc[i] - trace.apc[i];
                SlotRecord {
                    slot: i as u64 + 1,
                    policy: policy.name().to_string(),
                    apc: trace.apc[i],
                    reward: trace.rewards[i],
                    acc_reduction: acc,
                    action: trace.actions[i].to_string(),
                }
            })
            .collect();
        results.push(RunResult {
            policy: policy.name().to_string(),
            records,
            fingerprints: trace.fingerprints,
        });
    }
    Ok(results)
}

/// Per-policy aggregates of an evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub policy: String,
    pub mean_apc: f64,
    pub acc_reduction: f64,
}

/// Percentage improvement of one policy's accumulated reduction over another's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub policy: String,
    pub baseline: String,
    pub improvement_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub improvements: Vec<ImprovementRow>,
}

pub fn summarize(results: &[RunResult]) -> Summary {
    let rows: Vec<SummaryRow> = results
        .iter()
        .map(|r| SummaryRow {
            policy: r.policy.clone(),
            mean_apc: r.mean_apc(),
            acc_reduction: r.final_reduction(),
        })
        .collect();
    let mut improvements = Vec::new();
    for a in &rows {
        for b in &rows {
            if a.policy != b.policy {
                improvements.push(ImprovementRow {
                    policy: a.policy.clone(),
                    baseline: b.policy.clone(),
                    improvement_pct: percentage_improvement(a.acc_reduction, b.acc_reduction),
                });
            }
        }
    }
    Summary { rows, improvements }
}

impl Summary {
    /// Human-readable table.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<16} {:>12} {:>16}",
            "policy", "mean APC", "acc. reduction"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<16} {:>12.4} {:>16.4}",
                r.policy, r.mean_apc, r.acc_reduction
            );
        }
        if !self.improvements.is_empty() {
            let _ = writeln!(s, "\n{:<16} {:<16} {:>14}", "policy", "vs", "improvement");
            for i in &self.improvements {
                let pct = i
                    .improvement_pct
                    .map_or_else(|| "undefined".to_string(), |p| format!("{p:.2}%"));
                let _ = writeln!(s, "{:<16} {:<16} {:>14}", i.policy, i.baseline, pct);
            }
        }
        s
    }
}

pub const SLOTS_FILE: &str = "slots.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const IMPROVEMENTS_FILE: &str = "improvements.csv";

pub fn write_slots<W: std::io::Write>(out: W, results: &[RunResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        for rec in &r.records {
            w.serialize(rec)?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Reads per-slot records back, grouped by policy in order of first
/// appearance. Fingerprints are not stored and come back empty.
pub fn read_slots<R: std::io::Read>(input: R) -> Result<Vec<RunResult>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<SlotRecord>> = BTreeMap::new();
    for rec in rdr.deserialize() {
        let rec: SlotRecord = rec?;
        if !groups.contains_key(&rec.policy) {
            order.push(rec.policy.clone());
        }
        groups.entry(rec.policy.clone()).or_default().push(rec);
    }
    Ok(order
        .into_iter()
        .map(|p| RunResult {
            records: groups.remove(&p).unwrap_or_default(),
            policy: p,
            fingerprints: Vec::new(),
        })
        .collect())
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Writes `slots.csv`, `summary.csv` and `improvements.csv` into `dir`.
pub fn write_results(dir: &Path, results: &[RunResult]) -> Result<Summary> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(SLOTS_FILE);
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_slots(std::io::BufWriter::new(file), results)?;
    let summary = summarize(results);
    write_csv(&dir.join(SUMMARY_FILE), &summary.rows)?;
    write_csv(&dir.join(IMPROVEMENTS_FILE), &summary.improvements)?;
    Ok(summary)
}

/// Recomputes the summary from a results directory.
pub fn compare_dir(dir: &Path) -> Result<Summary> {
    let path = dir.join(SLOTS_FILE);
    let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    let results = read_slots(std::io::BufReader::new(file))?;
    if results.is_empty() {
        return Err(Error::Empty("results file"));
    }
    Ok(summarize(&results))
}
