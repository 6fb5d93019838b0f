//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use dqsync::dqn::{
    best_action, q_network_dims, train, Learner, MlpParams, ReplayMemory, TrainConfig,
};
use dqsync::env::{
    enumerate_actions, transition_state, Environment, State, SyncAction, Transition,
};
use dqsync::experiment::{evaluate, train_scheduler, write_slots, ExperimentConfig, RunResult};
use dqsync::rng::{stream_rng, Stream};
use dqsync::schedulers::{policy_by_name, AntiEntropy, Policy};
use dqsync::sdncore::{FlowPair, SourceControllerState};
use dqsync::topology::DomainGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::{
    central_difference, exhaustive_route, floyd_warshall, micro_q_table, micro_reachable,
    random_chain, random_connected_edges, relative_error, MicroEnv,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn gradient_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let (mut checked, mut kinks, mut worst) = (0usize, 0usize, 0.0f64);
    for draw in 0..100 {
        let m = 2 + draw % 5;
        let p = MlpParams::init(&q_network_dims(m), &mut rng).unwrap();
        let mut x: Vec<f64> = (0..m - 1)
            .map(|_| rng.gen_range(1..300) as f64 / 300.0)
            .collect();
        x.extend((0..m - 1).map(|_| rng.gen_range(0..2) as f64));
        let upstream = rng.gen_range(-3.0..3.0);
        let grad: Vec<f64> = p.backward(&x, upstream).unwrap().values().collect();
        let layer_starts: Vec<usize> = p
            .layers
            .iter()
            .scan(0, |acc, l| {
                let start = *acc;
                *acc += l.weights.len() + l.biases.len();
                Some(start)
            })
            .collect();
        let mut picks: Vec<usize> = (0..100)
            .map(|_| rng.gen_range(0..p.param_count()))
            .collect();
        picks.extend(&layer_starts);
        for i in picks {
            match central_difference(&p, &x, i, 1e-5) {
                Some(fd) => {
                    let err = relative_error(grad[i], upstream * fd);
                    worst = worst.max(err);
                    checked += 1;
                }
                None => kinks += 1,
            }
        }
    }
    outcome(
        worst < 1e-4,
        format!(
            "{checked} components, max relative error {worst:.2e}, {kinks} skipped at ReLU kinks"
        ),
    )
}

fn shortest_path_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=12);
        let extra = rng.gen_range(0..=3 * n);
        let edges = random_connected_edges(&mut rng, n, extra);
        let g = DomainGraph::from_edges(0, n, &edges).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let m = g.min_cost_matrix(&all).unwrap();
        let fw = floyd_warshall(n, &edges);
        for u in 0..n {
            for v in 0..n {
                if m.get(u, v) != Some(fw[u][v]) {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("200 graphs, {mismatches} mismatching entries"),
    )
}

fn path_construction_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let (mut flows, mut mismatches) = (0, 0);
    for _ in 0..50 {
        let sizes: Vec<usize> = (0..3).map(|_| rng.gen_range(1..=10)).collect();
        let (net, edges) = random_chain(&mut rng, &sizes, 4);
        let pairs: Vec<FlowPair> = (0..4)
            .map(|_| FlowPair {
                src: rng.gen_range(0..sizes[0]),
                dst: rng.gen_range(0..sizes[2]),
            })
            .collect();
        let state = SourceControllerState::synchronized(&net, &pairs).unwrap();
        for &p in &pairs {
            let route = state.construct_path(p, &net).unwrap();
            let (cost, seq) = exhaustive_route(&net, &edges, p);
            let got: Vec<usize> = route
                .links
                .iter()
                .flat_map(|l| [l.left_node, l.right_node])
                .collect();
            flows += 1;
            if route.estimated_cost != cost || got != seq {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("50 chains, {flows} flows, {mismatches} mismatches"),
    )
}

fn desk_config() -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk_m6.toml");
    ExperimentConfig::load(&path).expect("desk config")
}

fn fresh_view_optimality(cfg: &ExperimentConfig) -> Outcome {
    let mut env = cfg.make_env(1004).unwrap();
    let mut rng = stream_rng(1004, Stream::Policy);
    let (mut violations, mut strict) = (0, 0);
    for _ in 0..100 {
        let out = env.step_random(&mut rng).unwrap();
        let fresh = env.fresh_apc().unwrap();
        if fresh > out.apc_pre || fresh > out.apc_post {
            violations += 1;
        }
        if fresh < out.apc_pre {
            strict += 1;
        }
    }
    outcome(
        violations == 0,
        format!("100 slots, {violations} violations, fresh strictly better in {strict}"),
    )
}

fn micro_mdp_oracle() -> Outcome {
    let cfg = TrainConfig {
        total_steps: 20_000,
        ..TrainConfig::default()
    };
    let trained = train(|_| Ok(MicroEnv::new()), &cfg, 1005).unwrap();
    let q = micro_q_table(cfg.gamma);
    let actions = enumerate_actions(3, 1).unwrap();
    let states = micro_reachable();
    let mut matches = 0;
    for s in &states {
        let exact: Vec<f64> = (0..actions.len()).map(|k| q[&(s.0.clone(), k)]).collect();
        let best = exact.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let chosen = best_action(&trained.params, s, &actions, MicroEnv::new().horizon()).unwrap();
        let k = actions.iter().position(|a| *a == chosen).unwrap();
        if (exact[k] - best).abs() <= 1e-9 * best.abs().max(1.0) {
            matches += 1;
        }
    }
    let share = matches as f64 / states.len() as f64;
    outcome(
        share >= 0.95,
        format!(
            "{matches}/{} reachable states agree ({:.0}%)",
            states.len(),
            100.0 * share
        ),
    )
}

fn mechanics() -> Outcome {
    let mut failures = Vec::new();
    if enumerate_actions(6, 1).unwrap().len() != 5 {
        failures.push("action count");
    }
    let next = transition_state(
        &State(vec![5, 1, 3, 7, 4]),
        &SyncAction(vec![false, false, false, true, false]),
    );
    if next.unwrap() != State(vec![6, 2, 4, 1, 5]) {
        failures.push("transition");
    }
    let (n, k) = (500, 37);
    let mut memory = ReplayMemory::new(n);
    for i in 0..(n + k) as u64 {
        memory.push(Transition {
            state: State(vec![i]),
            action: SyncAction(vec![true]),
            reward: 0.0,
            next_state: State(vec![1]),
        });
    }
    let kept: Vec<u64> = memory.iter().map(|t| t.state.0[0]).collect();
    if kept != (k as u64..(n + k) as u64).collect::<Vec<_>>() {
        failures.push("replay FIFO");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let actions = enumerate_actions(3, 1).unwrap();
    let mut batch = ReplayMemory::new(16);
    for _ in 0..16 {
        batch.push(Transition {
            state: State(vec![rng.gen_range(1..5), rng.gen_range(1..5)]),
            action: actions[rng.gen_range(0..2)].clone(),
            reward: rng.gen_range(0.0..1.0),
            next_state: State(vec![rng.gen_range(1..5), rng.gen_range(1..5)]),
        });
    }
    let cfg = TrainConfig {
        target_period: 5,
        batch_size: 4,
        ..TrainConfig::default()
    };
    let small = MlpParams::init(&[4, 8, 1], &mut rng).unwrap();
    let mut learner = Learner::new(small);
    for step in 1..=20u64 {
        learner
            .train_step(&batch, &actions, 10, &cfg, &mut rng)
            .unwrap();
        if (step % 5 == 0) != (learner.target.params == learner.online) {
            failures.push("target refresh");
            break;
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "actions, transition, replay, target refresh".to_string()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

const EVAL_SEEDS: std::ops::RangeInclusive<u64> = 1..=10;
const TRAIN_SEED: u64 = 0;

fn find<'a>(runs: &'a [RunResult], name: &str) -> &'a RunResult {
    runs.iter().find(|r| r.policy == name).unwrap()
}

fn policies(cfg: &ExperimentConfig, params: &MlpParams) -> Vec<Box<dyn Policy>> {
    let sc = &cfg.scenario;
    [
        "dq",
        "anti-entropy",
        "fixed-frequency",
        "full-sync",
        "no-sync",
    ]
    .iter()
    .map(|n| policy_by_name(n, sc.m, sc.budget, sc.horizon, Some(params)).unwrap())
    .collect()
}

fn policy_ordering(all: &[Vec<RunResult>]) -> Outcome {
    let mean = |name: &str| {
        all.iter()
            .map(|runs| find(runs, name).mean_apc())
            .sum::<f64>()
            / all.len() as f64
    };
    let [dq, ae, ff, full, none] = [
        "dq",
        "anti-entropy",
        "fixed-frequency",
        "full-sync",
        "no-sync",
    ]
    .map(mean);
    let pass = full <= dq && dq <= ae && dq <= ff && ae <= none && ff <= none;
    outcome(
        pass,
        format!(
            "mean APC full-sync {full:.3}, dq {dq:.3}, anti-entropy {ae:.3}, fixed-frequency {ff:.3}, no-sync {none:.3}"
        ),
    )
}

fn headline_trend(all: &[Vec<RunResult>]) -> Outcome {
    let red = |runs: &Vec<RunResult>, name: &str| find(runs, name).final_reduction();
    let n = all.len() as f64;
    let mean = |name: &str| all.iter().map(|r| red(r, name)).sum::<f64>() / n;
    let (dq, ae, ff) = (mean("dq"), mean("anti-entropy"), mean("fixed-frequency"));
    let wins = all
        .iter()
        .filter(|r| {
            red(r, "dq") > red(r, "anti-entropy") && red(r, "dq") > red(r, "fixed-frequency")
        })
        .count();
    let vs_ae = 100.0 * (dq - ae) / ae;
    let vs_ff = 100.0 * (dq - ff) / ff;
    outcome(
        vs_ae >= 10.0 && vs_ff >= 10.0 && wins >= 8,
        format!(
            "dq vs anti-entropy {vs_ae:+.1}%, vs fixed-frequency {vs_ff:+.1}%, dq ahead of both in {wins}/10 seeds"
        ),
    )
}

/// Windowed mean training loss at step 50k against the first 1k steps.
fn loss_trend(losses: &[f64]) -> Option<Outcome> {
    const WINDOW: usize = 1000;
    if losses.len() < 50_000 {
        return None;
    }
    let mean = |w: &[f64]| w.iter().sum::<f64>() / w.len() as f64;
    let early = mean(&losses[..WINDOW]);
    let late = mean(&losses[50_000 - WINDOW..50_000]);
    Some(outcome(
        late < early,
        format!("mean loss {early:.4} over steps 1-1000, {late:.4} over steps 49001-50000"),
    ))
}

fn determinism(cfg: &ExperimentConfig, params: &MlpParams) -> Outcome {
    let bytes = || {
        let runs = evaluate(cfg, 1009, &mut policies(cfg, params)).unwrap();
        let mut buf = Vec::new();
        write_slots(&mut buf, &runs).unwrap();
        buf
    };
    let (a, b) = (bytes(), bytes());
    outcome(
        a == b,
        format!("{} bytes per run, identical: {}", a.len(), a == b),
    )
}

fn anti_entropy_uniformity() -> Outcome {
    let mut policy = AntiEntropy::new(6, 1).unwrap();
    let mut rng = stream_rng(1010, Stream::Policy);
    let state = State(vec![1; 5]);
    let draws = 100_000;
    let mut counts = [0u64; 5];
    for t in 1..=draws {
        let a = policy.decide(&state, t, &mut rng);
        counts[a.selected().next().unwrap()] += 1;
    }
    let expected = draws as f64 / 5.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let p = 1.0 - ChiSquared::new(4.0).unwrap().cdf(chi2);
    outcome(
        p > 0.01,
        format!("counts {counts:?}, chi2 {chi2:.3}, p {p:.3}"),
    )
}

fn report(
    id: u32,
    name: &str,
    started: Instant,
    limit: Option<Duration>,
    o: Outcome,
    failed: &mut u32,
) {
    let elapsed = started.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = o.pass && in_time;
    if !pass {
        *failed += 1;
    }
    let budget = limit.map_or(String::new(), |l| format!(" / {}s", l.as_secs()));
    let late = if in_time { "" } else { " (over time)" };
    println!(
        "criterion {id:>2} [{}] {name}: {} ({:.1}s{budget}){late}",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64()
    );
}

fn main() {
    let mut failed = 0;
    let secs = |s| Some(Duration::from_secs(s));

    let t = Instant::now();
    report(
        1,
        "gradient vs finite differences",
        t,
        secs(10),
        gradient_oracle(),
        &mut failed,
    );
    let t = Instant::now();
    report(
        2,
        "shortest paths vs Floyd-Warshall",
        t,
        secs(10),
        shortest_path_oracle(),
        &mut failed,
    );
    let t = Instant::now();
    report(
        3,
        "path construction vs exhaustive search",
        t,
        secs(30),
        path_construction_oracle(),
        &mut failed,
    );

    let cfg = desk_config();
    let t = Instant::now();
    report(
        4,
        "fresh views never lose",
        t,
        None,
        fresh_view_optimality(&cfg),
        &mut failed,
    );
    let t = Instant::now();
    report(
        5,
        "micro-MDP vs tabular Q-iteration",
        t,
        secs(300),
        micro_mdp_oracle(),
        &mut failed,
    );
    let t = Instant::now();
    report(6, "mechanics", t, secs(1), mechanics(), &mut failed);

    // criteria 7 and 8 share one trained scheduler and one 10-seed evaluation
    let t = Instant::now();
    let trained = train_scheduler(&cfg, TRAIN_SEED, None).unwrap();
    let all: Vec<Vec<RunResult>> = EVAL_SEEDS
        .map(|seed| evaluate(&cfg, seed, &mut policies(&cfg, &trained.params)).unwrap())
        .collect();
    let shared = t.elapsed();
    println!(
        "  (trained {} steps and evaluated {} seeds in {:.1}s)",
        trained.losses.len(),
        all.len(),
        shared.as_secs_f64()
    );
    if let Some(o) = loss_trend(&trained.losses) {
        println!(
            "  supplementary [{}] training loss trend: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    report(
        7,
        "policy ordering by mean immediate APC",
        t,
        secs(1800),
        policy_ordering(&all),
        &mut failed,
    );
    let t8 = Instant::now() - shared;
    report(
        8,
        "accumulated reduction margin",
        t8,
        secs(1800),
        headline_trend(&all),
        &mut failed,
    );

    let t = Instant::now();
    report(
        9,
        "byte-identical evaluation output",
        t,
        None,
        determinism(&cfg, &trained.params),
        &mut failed,
    );
    let t = Instant::now();
    report(
        10,
        "anti-entropy uniformity",
        t,
        None,
        anti_entropy_uniformity(),
        &mut failed,
    );

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
