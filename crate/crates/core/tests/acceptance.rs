//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run alone with `cargo test -p unimodal-bandit --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::beta::beta_reg;

use unimodal_bandit::bounds::{lai_robbins_constant, lower_bound_rank1, lower_bound_unimodal};
use unimodal_bandit::cli::{cmd_simulate, RunOptions};
use unimodal_bandit::harness::{
    linear_slope_estimate, run_experiment, slope_estimate, AggregateResult, ExperimentConfig,
};
use unimodal_bandit::model::{
    check_unimodal, sample_reward, Instance, RankOneInstance, UnimodalGraph, Verdict,
};
use unimodal_bandit::policy::{select_arm, Gamma, PolicySpec, PolicyState};
use unimodal_bandit::stats::{
    beta_cdf_via_binomial, binomial_cdf, kl_bernoulli, klucb_index,
};

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn within_time(start: Instant, limit: Duration, detail: String) -> Outcome {
    let elapsed = start.elapsed();
    check(
        elapsed < limit,
        format!("{detail}; {:.2?} < {limit:?}", elapsed),
        format!("{detail}; took {elapsed:.2?}, limit {limit:?}"),
    )
}

const BENCH_CONSTANT: f64 = 7.576_279_173_120_797; // 40-digit evaluation of the closed form
const BENCH_UNSTRUCTURED: f64 = 15.372_810_324_642_598;

fn benchmark(k: usize) -> Instance {
    Instance::RankOne(RankOneInstance::benchmark(k).unwrap())
}

fn uts(g: u64) -> PolicySpec {
    PolicySpec::Uts {
        gamma: Gamma::Finite(g),
    }
}

fn experiment(k: usize, policies: Vec<PolicySpec>, horizon: u64, runs: usize, seed: u64) -> AggregateResult {
    let cfg = ExperimentConfig::new(benchmark(k), policies, horizon, runs).with_seed(seed);
    run_experiment(&cfg).expect("experiment runs")
}

fn kernel_exactness() -> Outcome {
    let start = Instant::now();
    let tol = 1e-9;
    let examples: [(&str, f64, f64); 11] = [
        ("kl(0.5,0.5)", kl_bernoulli(0.5, 0.5), 0.0),
        ("kl(0.25,0.5)", kl_bernoulli(0.25, 0.5), 0.130_812_035_941_136_96),
        ("kl(0.1875,0.5625)", kl_bernoulli(0.1875, 0.5625), 0.296_979_552_704_785_97),
        ("klucb(0.5,10,0)", klucb_index(0.5, 10, 0.0), 0.5),
        ("klucb(0,1,ln2)", klucb_index(0.0, 1, 2f64.ln()), 0.5),
        ("klucb(0.2,5,1)", klucb_index(0.2, 5, 1.0), 0.505_986_024_698_577_34),
        ("F_Bin(2,0.5)(1)", binomial_cdf(2, 0.5, 1), 0.75),
        ("F_Bin(3,0.2)(1)", binomial_cdf(3, 0.2, 1), 0.896),
        ("F_Beta(1,1)(0.3)", beta_cdf_via_binomial(1, 1, 0.3), 0.3),
        ("F_Beta(2,1)(0.5)", beta_cdf_via_binomial(2, 1, 0.5), 0.25),
        ("F_Beta(1,2)(0.5)", beta_cdf_via_binomial(1, 2, 0.5), 0.75),
    ];
    for (name, got, want) in examples {
        if (got - want).abs() > tol {
            return Err(format!("{name} = {got}, expected {want}"));
        }
    }
    if kl_bernoulli(0.3, 1.0) != f64::INFINITY {
        return Err("kl(0.3,1) is not infinite".into());
    }
    if (5.0 * kl_bernoulli(0.2, klucb_index(0.2, 5, 1.0)) - 1.0).abs() > tol {
        return Err("klucb(0.2,5,1) does not invert the constraint".into());
    }
    for n in [0, 1, 7, 40] {
        if binomial_cdf(n, 0.37, n as i64) != 1.0 {
            return Err(format!("F_Bin({n},p)({n}) != 1"));
        }
    }
    let mut worst: f64 = 0.0;
    for alpha in 1..=50u64 {
        for beta in 1..=50u64 {
            for i in 1..=99 {
                let y = i as f64 / 100.0;
                let direct = beta_reg(alpha as f64, beta as f64, y);
                worst = worst.max((beta_cdf_via_binomial(alpha, beta, y) - direct).abs());
            }
        }
    }
    if worst > 1e-10 {
        return Err(format!("Beta-Binomial identity off by {worst:e}"));
    }
    within_time(
        start,
        Duration::from_secs(1),
        format!("examples within 1e-9, identity max error {worst:.1e}"),
    )
}

fn unimodality_property() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut paths = 0;
    for trial in 0..1000 {
        let inst = common::random_rank_one(&mut rng);
        let graph = UnimodalGraph::g1(inst.rows(), inst.cols()).unwrap();
        let star = inst.vertex(inst.best_entry());
        match check_unimodal(&graph, &inst.means_matrix()).unwrap() {
            Verdict::Unimodal { optimum } if optimum == star => {}
            other => return Err(format!("trial {trial}: {other:?} for {inst:?}")),
        }
        for vertex in (0..inst.arm_count()).filter(|&k| k != star) {
            let path = inst.increasing_path(inst.entry(vertex)).unwrap();
            paths += 1;
            if path.len() > 3 || *path.last().unwrap() != inst.best_entry() {
                return Err(format!("trial {trial}: bad path {path:?}"));
            }
            for w in path.windows(2) {
                let (a, b) = (inst.vertex(w[0]), inst.vertex(w[1]));
                if !graph.is_adjacent(a, b) || inst.mean(w[0]) >= inst.mean(w[1]) {
                    return Err(format!("trial {trial}: step {} -> {} not increasing", w[0], w[1]));
                }
            }
        }
    }
    within_time(
        start,
        Duration::from_secs(5),
        format!("1000 instances unimodal on G1, {paths} increasing paths checked"),
    )
}

fn bound_coincidence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let inst = common::random_rank_one(&mut rng);
        let a = lower_bound_rank1(&inst).constant;
        let graph = UnimodalGraph::g1(inst.rows(), inst.cols()).unwrap();
        let b = lower_bound_unimodal(&graph, &inst.means_matrix()).unwrap().constant;
        worst = worst.max(((a - b) / a).abs());
    }
    let inst = RankOneInstance::benchmark(4).unwrap();
    let lb = lower_bound_rank1(&inst).constant;
    // independent evaluation of the six identical terms
    let oracle = 6.0 * 0.375 / (0.1875 * (0.1875f64 / 0.5625).ln() + 0.8125 * (0.8125f64 / 0.4375).ln());
    let lr = lai_robbins_constant(&inst.means_matrix()).unwrap().constant;
    check(
        worst <= 1e-12
            && (lb - oracle).abs() <= 1e-3
            && (lb - BENCH_CONSTANT).abs() <= 1e-3
            && (lr - BENCH_UNSTRUCTURED).abs() <= 1e-2,
        format!("relative gap {worst:.1e} on 200 instances; K=4 constant {lb:.4}, unstructured {lr:.3}"),
        format!("relative gap {worst:e}, constant {lb} (oracle {oracle}), unstructured {lr}"),
    )
}

fn leader_exploration() -> Outcome {
    let start = Instant::now();
    let inst = RankOneInstance::benchmark(4).unwrap();
    let graph = UnimodalGraph::g1(4, 4).unwrap();
    let means = inst.means_matrix();
    let rounds = 100_000u64;
    let specs = [
        uts(2),
        uts(5),
        uts(20),
        PolicySpec::Osub {
            gamma: Gamma::Finite(7),
        },
    ];
    for (i, spec) in specs.iter().enumerate() {
        let gamma = spec.leader_period().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(40 + i as u64);
        let mut state = PolicyState::new(16);
        for t in 1..=rounds {
            let arm = if t <= 16 {
                (t - 1) as usize
            } else {
                select_arm(&mut state, spec, &graph, &mut rng).unwrap()
            };
            let reward = sample_reward(&means, arm, &mut rng).unwrap();
            state.update(arm, reward).unwrap();
            if !state.leader_exploration_holds(gamma) {
                return Err(format!("{} broke N_k >= floor(l_k/gamma) at t={t}", spec.label()));
            }
            let leads: u64 = state.arms().iter().map(|a| a.leader_count).sum();
            if state.round() != t || leads != t.saturating_sub(16) {
                return Err(format!("{}: counters out of sync at t={t}", spec.label()));
            }
        }
    }
    within_time(
        start,
        Duration::from_secs(30),
        "UTS(2,5,20) and OSUB(7): invariant held every round of 1e5".into(),
    )
}

fn separation() -> Outcome {
    let start = Instant::now();
    let r = experiment(
        4,
        vec![
            uts(2),
            PolicySpec::Osub {
                gamma: Gamma::Finite(7),
            },
            PolicySpec::Klucb,
        ],
        50_000,
        50,
        5,
    );
    let [u, o, k] = [0, 1, 2].map(|i| r.policies[i].final_mean());
    let detail = format!("final regret UTS {u:.1} < OSUB {o:.1} < kl-UCB {k:.1}, UTS/kl-UCB {:.2}", u / k);
    if !(u < o && o < k && u < 0.6 * k) {
        return Err(detail);
    }
    within_time(start, Duration::from_secs(300), detail)
}

fn alignment() -> Outcome {
    let start = Instant::now();
    let r = experiment(4, vec![uts(2), PolicySpec::Klucb], 300_000, 100, 6);
    let s_uts = slope_estimate(&r.checkpoints, &r.policies[0].mean, 1.0).unwrap();
    let s_kl = slope_estimate(&r.checkpoints, &r.policies[1].mean, 1.0).unwrap();
    let rel = (s_uts - BENCH_CONSTANT).abs() / BENCH_CONSTANT;
    let detail = format!("UTS slope {s_uts:.3} ({:.0}% from {BENCH_CONSTANT:.4}), kl-UCB slope {s_kl:.3}", rel * 100.0);
    if !(rel <= 0.5 && s_kl > s_uts) {
        return Err(detail);
    }
    within_time(start, Duration::from_secs(1800), detail)
}

fn gamma_sweep() -> Outcome {
    let gammas = [
        Gamma::Finite(2),
        Gamma::Finite(5),
        Gamma::Finite(10),
        Gamma::Finite(20),
        Gamma::Infinite,
    ];
    let policies = gammas.iter().map(|&gamma| PolicySpec::Uts { gamma }).collect();
    let r = experiment(4, policies, 50_000, 30, 7);
    let max_gap = 0.5625 - 0.0625;
    for p in &r.policies {
        let slope = linear_slope_estimate(&r.checkpoints, &p.mean, 1.0).unwrap();
        if slope >= 0.01 * max_gap {
            return Err(format!("{}: final-decade slope {slope:.5} not sublinear", p.label));
        }
    }
    let (g2, g20) = (&r.policies[0], &r.policies[3]);
    let diff = g20.final_mean() - g2.final_mean();
    let se = (g2.final_std_err().powi(2) + g20.final_std_err().powi(2)).sqrt();
    check(
        diff > se,
        format!(
            "all sublinear; gamma=2 {:.1} vs gamma=20 {:.1}, difference {diff:.1} > s.e. {se:.1}",
            g2.final_mean(),
            g20.final_mean()
        ),
        format!("gamma=2 {:.1} vs gamma=20 {:.1}, difference {diff:.1}, s.e. {se:.1}", g2.final_mean(), g20.final_mean()),
    )
}

fn scaling() -> Outcome {
    let policies = vec![uts(2), PolicySpec::Klucb];
    let small = experiment(4, policies.clone(), 50_000, 30, 8);
    let large = experiment(8, policies, 50_000, 30, 8);
    let ratio = |i: usize| large.policies[i].final_mean() / small.policies[i].final_mean();
    let (r_uts, r_kl) = (ratio(0), ratio(1));
    check(
        (1.4..=3.0).contains(&r_uts) && (2.5..=5.5).contains(&r_kl),
        format!("K=8/K=4 final regret: UTS x{r_uts:.2}, kl-UCB x{r_kl:.2}"),
        format!("K=8/K=4 final regret: UTS x{r_uts:.3} (want 1.4..3.0), kl-UCB x{r_kl:.3} (want 2.5..5.5)"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("bench.toml");
    std::fs::write(&config, common::benchmark_config(3000, 6, 11)).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for workers in [1, 4] {
        let out = dir.path().join(format!("w{workers}"));
        let opts = RunOptions {
            workers: Some(workers),
            ..Default::default()
        };
        cmd_simulate(&config, &out, &opts).map_err(|e| e.to_string())?;
        let read = |name: &str| std::fs::read(out.join(name)).unwrap();
        outputs.push((read("runs.csv"), read("aggregate.csv"), read("summary.txt")));
    }
    check(
        outputs[0] == outputs[1],
        format!("runs.csv ({} bytes) and aggregate.csv identical with 1 and 4 workers", outputs[0].0.len()),
        "outputs differ between worker counts".into(),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 kernel exactness", kernel_exactness),
        ("2 rank-one instances are unimodal on G1", unimodality_property),
        ("3 lower-bound coincidence", bound_coincidence),
        ("4 leader-exploration invariant", leader_exploration),
        ("5 regret separation (K=4, T=5e4)", separation),
        ("6 log-slope alignment (K=4, T=3e5)", alignment),
        ("7 gamma sweep", gamma_sweep),
        ("8 scaling K=4 -> K=8", scaling),
        ("9 deterministic CSV output", determinism),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
