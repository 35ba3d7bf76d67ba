//! The disentangling loop.
//!
//! Each iteration recomputes the graph queries from scratch: pick the
//! rightmost endpoint, extract its cable if it is semi-disentangled,
//! otherwise delete the first non-trivial under-crossing found from that
//! endpoint. A single Reidemeister move opens every episode.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    classify_trivial, is_semi_disentangled, node_deletion_target, select_endpoints,
};
use crate::diagram::{CrossingId, Diagram, Side};
use crate::moves::{apply, apply_noisy, Action, ActionKind, NoiseConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    Success,
    BudgetExceeded,
    /// No legal action exists although the workspace is not empty.
    Stuck,
    /// The total-action safety cap was hit before the budget.
    NoiseStall,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Success => "Success",
            Outcome::BudgetExceeded => "BudgetExceeded",
            Outcome::Stuck => "Stuck",
            Outcome::NoiseStall => "NoiseStall",
        })
    }
}

/// Cap on disentangling actions (Node Deletions plus Cable Extractions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_disentangling_actions: u32,
}

impl Budget {
    pub fn new(max_disentangling_actions: u32) -> Self {
        Budget {
            max_disentangling_actions,
        }
    }

    /// 20 for tier 1, 30 for tiers 2 and 3.
    pub fn for_tier(tier: u8) -> Self {
        Budget::new(if tier <= 1 { 20 } else { 30 })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("stuck: no extraction or node-deletion target with {0} crossings left")]
    Stuck(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Initial,
    AfterExtraction,
    Steady,
}

fn decide(d: &Diagram, phase: Phase) -> Result<Action, PlanError> {
    let Ok(sel) = select_endpoints(d) else {
        return Ok(Action::Done);
    };
    if d.workspace_empty() {
        return Ok(Action::Done);
    }
    if phase == Phase::Initial {
        return Ok(Action::Reidemeister(sel));
    }
    let cable = sel.right_cable();
    if is_semi_disentangled(d, cable).unwrap_or(false) {
        return Ok(Action::CableExtraction {
            cable,
            pin: sel.v_l,
        });
    }
    let target = node_deletion_target(d).ok_or(PlanError::Stuck(d.crossing_count()))?;
    if phase == Phase::AfterExtraction && first_under_is_trivial(d, sel.v_r) {
        return Ok(Action::Reidemeister(sel));
    }
    Ok(Action::NodeDeletion(target))
}

/// Whether the first under-pass met from `from` belongs to a trivial crossing.
fn first_under_is_trivial(d: &Diagram, from: crate::diagram::Endpoint) -> bool {
    let Ok(trace) = d.trace_cable(from.cable, from.side == Side::L) else {
        return false;
    };
    let Some(first) = trace.visits.iter().find(|v| v.depth.is_under()) else {
        return false;
    };
    classify_trivial(d).trivial.contains(&first.crossing)
}

/// One decision of the loop. `did_initial_reidemeister` is false only
/// before the opening move of an episode.
pub fn plan_step(d: &Diagram, did_initial_reidemeister: bool) -> Result<Action, PlanError> {
    decide(
        d,
        if did_initial_reidemeister {
            Phase::Steady
        } else {
            Phase::Initial
        },
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub action: Action,
    pub potential_before: u64,
    pub potential_after: u64,
    /// Re-attempt after the previous disentangling action had no effect.
    pub recovery: bool,
    /// Skipped by the noise model.
    pub failed: bool,
    pub spawned: Option<CrossingId>,
}

impl StepRecord {
    /// `step <i> | <kind> | targets=<ids> | potential <a>-><b>`
    pub fn to_line(&self) -> String {
        let mut s = format!(
            "step {} | {} | targets={} | potential {}->{}",
            self.step,
            self.action.kind(),
            self.action.targets(),
            self.potential_before,
            self.potential_after
        );
        if self.failed {
            s.push_str(" | failed");
        }
        if self.recovery {
            s.push_str(" | recovery");
        }
        if let Some(c) = self.spawned {
            let _ = write!(s, " | spawned {c}");
        }
        s
    }

    /// One JSON object with a fixed field order.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Row<'a> {
            step: usize,
            kind: ActionKind,
            targets: String,
            potential_before: u64,
            potential_after: u64,
            recovery: bool,
            failed: bool,
            spawned: Option<u32>,
            action: &'a Action,
        }
        serde_json::to_string(&Row {
            step: self.step,
            kind: self.action.kind(),
            targets: self.action.targets(),
            potential_before: self.potential_before,
            potential_after: self.potential_after,
            recovery: self.recovery,
            failed: self.failed,
            spawned: self.spawned.map(|c| c.0),
            action: &self.action,
        })
        .expect("trace rows serialize")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub disentangling_actions: u32,
    pub recovery_actions: u32,
    pub total_actions: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RolloutTrace {
    pub actions: Vec<StepRecord>,
    pub outcome: Outcome,
    pub counters: Counters,
    pub final_diagram: Diagram,
}

impl RolloutTrace {
    pub fn text(&self) -> String {
        let mut s = String::new();
        for r in &self.actions {
            s.push_str(&r.to_line());
            s.push('\n');
        }
        s
    }

    pub fn json_lines(&self) -> String {
        let mut s = String::new();
        for r in &self.actions {
            s.push_str(&r.to_json());
            s.push('\n');
        }
        s
    }
}

/// splitmix64 finalizer over a pair, used to derive per-step noise seeds.
pub(crate) fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stall_cap(budget: Budget, cables: usize) -> u32 {
    4 * (budget.max_disentangling_actions + 1) + 2 * cables as u32 + 8
}

/// Run one episode until the workspace is empty, the budget is spent, or no
/// move applies.
pub fn run(diagram: &Diagram, budget: Budget, noise: Option<&NoiseConfig>) -> RolloutTrace {
    run_with(diagram, budget, noise, |_, _| {})
}

/// [`run`], calling `observe` with each step and the diagram it produced.
pub fn run_with<F>(
    diagram: &Diagram,
    budget: Budget,
    noise: Option<&NoiseConfig>,
    mut observe: F,
) -> RolloutTrace
where
    F: FnMut(&StepRecord, &Diagram),
{
    let mut d = diagram.clone();
    let mut phase = Phase::Initial;
    let mut counters = Counters::default();
    let mut actions = Vec::new();
    let mut prev_failed = false;
    let cap = stall_cap(budget, d.live_cable_count());

    let outcome = loop {
        let action = match decide(&d, phase) {
            Ok(Action::Done) => break Outcome::Success,
            Ok(a) => a,
            Err(PlanError::Stuck(_)) => break Outcome::Stuck,
        };
        if action.is_disentangling()
            && counters.disentangling_actions >= budget.max_disentangling_actions
        {
            break Outcome::BudgetExceeded;
        }
        if counters.total_actions >= cap {
            break Outcome::NoiseStall;
        }

        let step = actions.len();
        let before = d.potential();
        let applied = match noise {
            None => apply(&d, &action).map(|n| (n, false, None)),
            Some(cfg) => apply_noisy(&d, &action, &cfg.with_seed(mix_seed(cfg.seed, step as u64)))
                .map(|o| (o.diagram, o.failed, o.spawned)),
        };
        let Ok((next, failed, spawned)) = applied else {
            break Outcome::Stuck;
        };

        let recovery = prev_failed && action.is_disentangling();
        counters.total_actions += 1;
        if action.is_disentangling() {
            counters.disentangling_actions += 1;
        }
        if recovery {
            counters.recovery_actions += 1;
        }
        actions.push(StepRecord {
            step,
            action,
            potential_before: before,
            potential_after: next.potential(),
            recovery,
            failed,
            spawned,
        });
        observe(actions.last().expect("just pushed"), &next);

        phase = match action {
            Action::CableExtraction { .. } if !failed => Phase::AfterExtraction,
            Action::CableExtraction { .. } => phase,
            _ => Phase::Steady,
        };
        prev_failed = failed && action.is_disentangling();
        d = next;
    };

    RolloutTrace {
        actions,
        outcome,
        counters,
        final_diagram: d,
    }
}

/// One benchmark input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchCase {
    pub name: String,
    pub tier: u8,
    pub diagram: Diagram,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    /// Budgets for tiers 1, 2 and 3.
    pub budgets: [Budget; 3],
    pub repetitions: u32,
    /// Base noise; repetition `r` of case `i` reseeds it deterministically.
    pub noise: Option<NoiseConfig>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            budgets: [
                Budget::for_tier(1),
                Budget::for_tier(2),
                Budget::for_tier(3),
            ],
            repetitions: 1,
            noise: None,
        }
    }
}

impl BenchConfig {
    pub fn budget(&self, tier: u8) -> Budget {
        self.budgets[(tier.clamp(1, 3) - 1) as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TierStats {
    pub tier: u8,
    pub runs: u32,
    pub successes: u32,
    /// Medians over successful runs.
    pub median_disentangling: Option<f64>,
    pub median_recovery: Option<f64>,
    pub median_total: Option<f64>,
    pub stuck: u32,
    pub budget_exceeded: u32,
    pub noise_stall: u32,
}

impl TierStats {
    pub fn success_rate(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            f64::from(self.successes) / f64::from(self.runs)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StatsTable {
    pub rows: Vec<TierStats>,
}

pub fn median(values: &mut [u32]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let n = values.len();
    Some(if n % 2 == 1 {
        f64::from(values[n / 2])
    } else {
        (f64::from(values[n / 2 - 1]) + f64::from(values[n / 2])) / 2.0
    })
}

fn fmt_median(m: Option<f64>) -> String {
    match m {
        None => "-".to_string(),
        Some(v) if v.fract() == 0.0 => format!("{v:.0}"),
        Some(v) => format!("{v:.1}"),
    }
}

/// Outcome and counters of one rollout inside a benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSummary {
    pub tier: u8,
    pub outcome: Outcome,
    pub counters: Counters,
}

/// Run every case `repetitions` times. Rollouts run in parallel; results
/// come back in case order.
pub fn bench_runs(corpus: &[BenchCase], cfg: &BenchConfig) -> Vec<RunSummary> {
    let jobs: Vec<(usize, u32)> = (0..corpus.len())
        .flat_map(|i| (0..cfg.repetitions).map(move |r| (i, r)))
        .collect();
    jobs.par_iter()
        .map(|&(i, r)| {
            let case = &corpus[i];
            let noise = cfg
                .noise
                .map(|n| n.with_seed(mix_seed(n.seed.wrapping_add(u64::from(r)), i as u64)));
            let t = run(&case.diagram, cfg.budget(case.tier), noise.as_ref());
            RunSummary {
                tier: case.tier,
                outcome: t.outcome,
                counters: t.counters,
            }
        })
        .collect()
}

pub fn aggregate(runs: &[RunSummary]) -> StatsTable {
    let mut tiers: Vec<u8> = runs.iter().map(|r| r.tier).collect();
    tiers.sort_unstable();
    tiers.dedup();
    let rows = tiers
        .into_iter()
        .map(|tier| {
            let mine: Vec<&RunSummary> = runs.iter().filter(|r| r.tier == tier).collect();
            let ok: Vec<&RunSummary> = mine
                .iter()
                .copied()
                .filter(|r| r.outcome == Outcome::Success)
                .collect();
            let count = |o| mine.iter().filter(|r| r.outcome == o).count() as u32;
            let mut dis: Vec<u32> = ok
                .iter()
                .map(|r| r.counters.disentangling_actions)
                .collect();
            let mut rec: Vec<u32> = ok.iter().map(|r| r.counters.recovery_actions).collect();
            let mut tot: Vec<u32> = ok.iter().map(|r| r.counters.total_actions).collect();
            TierStats {
                tier,
                runs: mine.len() as u32,
                successes: ok.len() as u32,
                median_disentangling: median(&mut dis),
                median_recovery: median(&mut rec),
                median_total: median(&mut tot),
                stuck: count(Outcome::Stuck),
                budget_exceeded: count(Outcome::BudgetExceeded),
                noise_stall: count(Outcome::NoiseStall),
            }
        })
        .collect();
    StatsTable { rows }
}

pub fn bench(corpus: &[BenchCase], cfg: &BenchConfig) -> StatsTable {
    aggregate(&bench_runs(corpus, cfg))
}

impl StatsTable {
    pub fn text(&self) -> String {
        let header = [
            "Tier",
            "Success Rate",
            "Disentangling Actions",
            "Recovery Actions",
            "Total Actions",
            "Failure Modes",
        ];
        let body: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.tier.to_string(),
                    format!("{}/{}", r.successes, r.runs),
                    fmt_median(r.median_disentangling),
                    fmt_median(r.median_recovery),
                    fmt_median(r.median_total),
                    format!(
                        "Stuck ({}), BudgetExceeded ({}), NoiseStall ({})",
                        r.stuck, r.budget_exceeded, r.noise_stall
                    ),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &body {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let line = |cells: Vec<&str>| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            parts.join(" | ").trim_end().to_string()
        };
        let mut s = line(header.to_vec());
        s.push('\n');
        for row in &body {
            s.push_str(&line(row.iter().map(String::as_str).collect()));
            s.push('\n');
        }
        s
    }

    pub fn json_lines(&self) -> String {
        self.rows
            .iter()
            .map(|r| serde_json::to_string(r).expect("stats serialize") + "\n")
            .collect()
    }
}
