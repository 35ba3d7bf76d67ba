//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cablegraph::analysis::{classify_trivial, classify_trivial_with};
use cablegraph::corpus::oracle::{bfs_solve, replay, DEFAULT_MAX_DEPTH};
use cablegraph::corpus::{corpus_dir, generate, generate_random, load_corpus, KnotName, KnotSpec};
use cablegraph::diagram::{parse, serialize, validate, CrossingId, Diagram};
use cablegraph::moves::{Action, NoiseConfig};
use cablegraph::planner::{run, run_with, BenchCase, Budget, Outcome};

const ROLLOUT_LIMIT: Duration = Duration::from_secs(1);
const ORACLE_LIMIT: Duration = Duration::from_secs(300);
const ORACLE_INSTANCES: u64 = 200;
const EFFICIENCY_RATIO: u32 = 3;
const EFFICIENCY_SHARE: f64 = 0.90;
const CONFLUENCE_DIAGRAMS: u64 = 100;
const CONFLUENCE_ORDERS: u64 = 20;
const RANDOM_ROUND_TRIPS: u64 = 500;
const NOISE_SEEDS: u64 = 50;
const NOISE_LEVELS: [f64; 4] = [0.0, 0.15, 0.3, 0.5];

type Verdict = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;

fn corpus() -> Vec<BenchCase> {
    load_corpus(&corpus_dir()).expect("golden corpus loads")
}

fn corpus_success(cases: &[BenchCase]) -> Verdict {
    let mut slowest = Duration::ZERO;
    for c in cases {
        let start = Instant::now();
        let t = run(&c.diagram, Budget::for_tier(c.tier), None);
        let took = start.elapsed();
        slowest = slowest.max(took);
        if t.outcome != Outcome::Success {
            return Err(format!("{} ended {}", c.name, t.outcome));
        }
        if took >= ROLLOUT_LIMIT {
            return Err(format!("{} took {took:?}", c.name));
        }
    }
    Ok(format!(
        "{}/{} succeeded, slowest rollout {slowest:?}",
        cases.len(),
        cases.len()
    ))
}

fn termination_measure(cases: &[BenchCase]) -> Verdict {
    let mut steps = 0;
    for c in cases {
        let mut before = c.diagram.clone();
        let mut err = None;
        run_with(&c.diagram, Budget::for_tier(c.tier), None, |s, after| {
            steps += 1;
            let (p0, p1) = (before.potential(), after.potential());
            let ok = match s.action {
                Action::NodeDeletion(t) => {
                    let k = before.crossing(t.crossing).map_or(0, |x| x.arity() as u64);
                    p1 + (k - 1) == p0 && k >= 2
                }
                _ => p1 <= p0,
            };
            if !ok && err.is_none() {
                err = Some(format!(
                    "{} step {}: {} {p0}->{p1}",
                    c.name,
                    s.step,
                    s.action.kind()
                ));
            }
            before = after.clone();
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(format!("{steps} steps checked"))
}

fn oracle_completeness() -> Verdict {
    let start = Instant::now();
    let mut efficient = 0;
    for seed in 0..ORACLE_INSTANCES {
        let cables = 2 + (seed % 2) as u32;
        let crossings = (seed % 6) as u32;
        let d = generate_random(seed, cables, crossings);
        let r = bfs_solve(&d, DEFAULT_MAX_DEPTH);
        if !r.reachable() || !replay(&d, r.witness.as_deref().unwrap_or_default()) {
            return Err(format!("seed {seed}: oracle found no verified witness"));
        }
        let opt = r.min_moves.unwrap_or_default();
        let t = run(&d, Budget::new(30), None);
        let used = t.counters.disentangling_actions;
        if t.outcome != Outcome::Success || used < opt {
            return Err(format!(
                "seed {seed}: planner {} with {used} vs optimum {opt}",
                t.outcome
            ));
        }
        if used <= EFFICIENCY_RATIO * opt {
            efficient += 1;
        }
    }
    let took = start.elapsed();
    let share = efficient as f64 / ORACLE_INSTANCES as f64;
    let msg =
        format!("{efficient}/{ORACLE_INSTANCES} within {EFFICIENCY_RATIO}x optimum, {took:?}");
    if share >= EFFICIENCY_SHARE && took < ORACLE_LIMIT {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn gen(spec: KnotSpec) -> Result<Diagram, String> {
    generate(&spec).map_err(|e| e.to_string())
}

fn ids(d: &Diagram) -> BTreeSet<CrossingId> {
    d.crossing_ids()
}

fn triviality_fixtures() -> Verdict {
    let mut checked = 0;
    let mut expect =
        |label: String, d: &Diagram, want: BTreeSet<CrossingId>| -> Result<(), String> {
            checked += 1;
            let got = classify_trivial(d).trivial;
            if got == want {
                Ok(())
            } else {
                Err(format!("{label}: trivial {got:?}, expected {want:?}"))
            }
        };
    for name in [
        KnotName::Overhand2,
        KnotName::Square,
        KnotName::Carrick,
        KnotName::SheetBend,
    ] {
        let core = gen(KnotSpec::named(name))?;
        let padded = gen(KnotSpec::named(name).with_slack(2))?;
        expect(format!("{name} core"), &core, BTreeSet::new())?;
        let padding: BTreeSet<_> = ids(&padded).difference(&ids(&core)).copied().collect();
        expect(format!("{name} padded"), &padded, padding)?;
    }
    for n in 2..=6 {
        let d = gen(KnotSpec::named(KnotName::Twist).with_n(n))?;
        expect(format!("twist {n}"), &d, ids(&d))?;
    }
    for n in 1..=3 {
        let d = gen(KnotSpec::named(KnotName::Braid3).with_n(n))?;
        expect(format!("braid3 {n}"), &d, ids(&d))?;
    }
    let single = parse("mcd 1\ncables 2\ncable 1: X1@+1\ncable 2: X1@-1\norder: 1L 2L 2R 1R\n")
        .map_err(|e| e.to_string())?;
    expect("single crossing".into(), &single, ids(&single))?;
    Ok(format!("{checked} fixtures"))
}

fn confluence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut with_trivial = 0;
    for i in 0..CONFLUENCE_DIAGRAMS {
        let cables = 1 + (i % 3) as u32;
        let d = generate_random(1000 + i, cables, (i % 9) as u32);
        let reference = classify_trivial(&d).trivial;
        if !reference.is_empty() {
            with_trivial += 1;
        }
        for order in 0..CONFLUENCE_ORDERS {
            let got = classify_trivial_with(&d, |opts| rng.gen_range(0..opts.len())).trivial;
            if got != reference {
                return Err(format!(
                    "diagram {i} order {order}: {got:?} vs {reference:?}"
                ));
            }
        }
    }
    Ok(format!(
        "{CONFLUENCE_DIAGRAMS} diagrams x {CONFLUENCE_ORDERS} orders agree ({with_trivial} with trivial crossings)"
    ))
}

fn serialization(cases: &[BenchCase]) -> Verdict {
    for c in cases {
        let path = corpus_dir().join(format!("{}.mcd", c.name));
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        if serialize(&c.diagram) != text {
            return Err(format!("{} does not re-serialize bit-exactly", c.name));
        }
    }
    for seed in 0..RANDOM_ROUND_TRIPS {
        let d = generate_random(seed, 1 + (seed % 4) as u32, (seed % 13) as u32);
        let text = serialize(&d);
        let back = parse(&text).map_err(|e| format!("random {seed}: {e}"))?;
        if back != d || serialize(&back) != text {
            return Err(format!("random {seed} does not round-trip"));
        }
    }
    Ok(format!(
        "{} corpus files + {RANDOM_ROUND_TRIPS} random diagrams",
        cases.len()
    ))
}

fn noise_monotonicity(cases: &[BenchCase]) -> Verdict {
    let tier1: Vec<&BenchCase> = cases.iter().filter(|c| c.tier == 1).collect();
    let mut rates = Vec::new();
    for p in NOISE_LEVELS {
        let mut successes = 0u32;
        let mut runs = 0u32;
        for (i, c) in tier1.iter().enumerate() {
            for seed in 0..NOISE_SEEDS {
                let cfg = NoiseConfig::new(p, 0.0, seed * 1009 + i as u64);
                let mut valid = true;
                let t = run_with(&c.diagram, Budget::for_tier(1), Some(&cfg), |_, after| {
                    valid &= validate(after).is_valid();
                });
                if !valid {
                    return Err(format!(
                        "{} p_fail {p} seed {seed}: invalid diagram",
                        c.name
                    ));
                }
                match t.outcome {
                    Outcome::Success => successes += 1,
                    Outcome::BudgetExceeded | Outcome::NoiseStall => {}
                    Outcome::Stuck => {
                        return Err(format!("{} p_fail {p} seed {seed}: Stuck", c.name))
                    }
                }
                runs += 1;
            }
        }
        rates.push(f64::from(successes) / f64::from(runs));
    }
    let shown: Vec<String> = NOISE_LEVELS
        .iter()
        .zip(&rates)
        .map(|(p, r)| format!("{p}:{r:.3}"))
        .collect();
    let msg = format!("success by p_fail {}", shown.join(" "));
    if rates.windows(2).all(|w| w[1] <= w[0]) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let cases = corpus();
    let criteria: Vec<(&str, Check)> = vec![
        ("corpus success", Box::new(|| corpus_success(&cases))),
        (
            "termination measure",
            Box::new(|| termination_measure(&cases)),
        ),
        ("oracle completeness", Box::new(oracle_completeness)),
        ("triviality fixtures", Box::new(triviality_fixtures)),
        ("confluence", Box::new(confluence)),
        ("serialization", Box::new(|| serialization(&cases))),
        (
            "noise monotonicity",
            Box::new(|| noise_monotonicity(&cases)),
        ),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
