//! Monte-Carlo regret experiments.
//!
//! Regret is pseudo-regret: each round adds the gap `μ* - μ_k` of the pulled
//! arm, independent of the realised reward. Every (policy, run) trajectory
//! gets its own seed, from which two ChaCha streams are derived, one for
//! rewards and one for the policy's randomness. Trajectories are independent
//! of scheduling, so results do not depend on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{lower_bound_rank1, lower_bound_unimodal, BoundReport};
use crate::model::{sample_reward, Instance, UnimodalInstance};
use crate::policy::{ArmSelector, PolicySpec, PolicyState};
use crate::{Error, Result};

pub const DEFAULT_GRID: usize = 200;

const REWARD_STREAM: u64 = 0;
const POLICY_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: Instance,
    pub policies: Vec<PolicySpec>,
    pub horizon: u64,
    pub runs: usize,
    pub base_seed: u64,
    /// Number of log-spaced checkpoints.
    pub grid: usize,
}

impl ExperimentConfig {
    pub fn new(instance: Instance, policies: Vec<PolicySpec>, horizon: u64, runs: usize) -> Self {
        Self {
            instance,
            policies,
            horizon,
            runs,
            base_seed: 0,
            grid: DEFAULT_GRID,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let arms = self.instance.arm_count() as u64;
        if self.horizon < arms {
            return Err(Error::Config(format!(
                "horizon {} is shorter than the initialization ({arms} arms)",
                self.horizon
            )));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        if self.grid == 0 {
            return Err(Error::Config("grid must be >= 1".into()));
        }
        for p in &self.policies {
            p.validate()?;
        }
        Ok(())
    }

    pub fn checkpoints(&self) -> Vec<u64> {
        log_grid(self.instance.arm_count() as u64, self.horizon, self.grid)
    }
}

/// `count` strictly increasing integers from `start` to `end`, spaced
/// logarithmically; every integer in range if there are fewer than `count`.
pub fn log_grid(start: u64, end: u64, count: usize) -> Vec<u64> {
    let start = start.max(1);
    if end < start {
        return Vec::new();
    }
    let span = end - start + 1;
    if span <= count as u64 {
        return (start..=end).collect();
    }
    if count == 1 {
        return vec![end];
    }
    let (ls, le) = ((start as f64).ln(), (end as f64).ln());
    let mut grid = Vec::with_capacity(count);
    for i in 0..count {
        let ideal = (ls + (le - ls) * i as f64 / (count - 1) as f64).exp().round() as u64;
        let floor = grid.last().map_or(start, |&p: &u64| p + 1);
        // leave room for the remaining points below `end`
        let ceiling = end - (count - 1 - i) as u64;
        grid.push(ideal.clamp(floor, ceiling));
    }
    grid
}

/// Per-trajectory seed for policy `policy` and run `run` (SplitMix64 mixing).
pub fn trajectory_seed(base_seed: u64, policy: usize, run: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(base_seed) ^ policy as u64) ^ run as u64)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Arms, gaps and the structured lower bound of an instance.
#[derive(Debug, Clone)]
pub struct Environment {
    instance: UnimodalInstance,
    gaps: Vec<f64>,
    lower_bound: BoundReport,
}

impl Environment {
    pub fn new(instance: &Instance) -> Result<Self> {
        let unimodal = instance.to_unimodal()?;
        let lower_bound = match instance {
            Instance::RankOne(r) => lower_bound_rank1(r),
            Instance::Graph(g) => lower_bound_unimodal(g.graph(), g.means())?,
        };
        let best = unimodal.means()[unimodal.optimum()];
        let gaps = unimodal.means().iter().map(|m| best - m).collect();
        Ok(Self {
            instance: unimodal,
            gaps,
            lower_bound,
        })
    }

    pub fn instance(&self) -> &UnimodalInstance {
        &self.instance
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn lower_bound(&self) -> &BoundReport {
        &self.lower_bound
    }

    pub fn arm_count(&self) -> usize {
        self.gaps.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub checkpoints: Vec<u64>,
    pub cumulative_regret: Vec<f64>,
    pub seed: u64,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.cumulative_regret.last().copied().unwrap_or(0.0)
    }
}

/// Runs one trajectory of `horizon` rounds: each arm once in vertex order,
/// then `selector` for the remaining rounds. `checkpoints` must be strictly
/// increasing.
pub fn simulate<S: ArmSelector>(
    env: &Environment,
    selector: &mut S,
    horizon: u64,
    checkpoints: &[u64],
    seed: u64,
) -> Result<RegretTrace> {
    let means = env.instance.means();
    let graph = env.instance.graph();
    let n = env.arm_count() as u64;
    let mut reward_rng = stream(seed, REWARD_STREAM);
    let mut policy_rng = stream(seed, POLICY_STREAM);
    let mut state = PolicyState::new(env.arm_count());
    let audit_period = if cfg!(debug_assertions) {
        selector.leader_period()
    } else {
        None
    };

    let mut regret = 0.0;
    let mut recorded = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for t in 1..=horizon {
        let arm = if t <= n {
            (t - 1) as usize
        } else {
            selector.select(&mut state, graph, &mut policy_rng)?.arm
        };
        let reward = sample_reward(means, arm, &mut reward_rng)?;
        state.update(arm, reward)?;
        regret += env.gaps[arm];
        if let Some(g) = audit_period {
            assert!(
                state.leader_exploration_holds(g),
                "leader exploration invariant broken at round {t}"
            );
        }
        while next.peek().is_some_and(|&&c| c <= t) {
            if *next.next().unwrap() == t {
                recorded.push(regret);
            }
        }
    }
    let checkpoints = checkpoints
        .iter()
        .copied()
        .take(recorded.len())
        .collect();
    Ok(RegretTrace {
        checkpoints,
        cumulative_regret: recorded,
        seed,
    })
}

/// One trajectory of `policy` on the configured instance.
pub fn run_once(config: &ExperimentConfig, policy: PolicySpec, seed: u64) -> Result<RegretTrace> {
    config.validate()?;
    let env = Environment::new(&config.instance)?;
    let mut policy = policy.validate()?;
    simulate(&env, &mut policy, config.horizon, &config.checkpoints(), seed)
}

/// Pointwise nearest-rank percentile (`pct` in 1..=100) of a nonempty sample.
pub fn nearest_rank(sorted: &[f64], pct: usize) -> f64 {
    let n = sorted.len();
    let rank = (pct * n).div_ceil(100).max(1);
    sorted[rank - 1]
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyAggregate {
    pub policy: PolicySpec,
    pub label: String,
    pub mean: Vec<f64>,
    pub p10: Vec<f64>,
    pub p90: Vec<f64>,
    pub traces: Vec<RegretTrace>,
}

impl PolicyAggregate {
    fn from_traces(policy: PolicySpec, traces: Vec<RegretTrace>, points: usize) -> Self {
        let mut mean = Vec::with_capacity(points);
        let mut p10 = Vec::with_capacity(points);
        let mut p90 = Vec::with_capacity(points);
        let mut column = Vec::with_capacity(traces.len());
        for i in 0..points {
            column.clear();
            column.extend(traces.iter().map(|t| t.cumulative_regret[i]));
            mean.push(column.iter().sum::<f64>() / column.len() as f64);
            column.sort_by(f64::total_cmp);
            p10.push(nearest_rank(&column, 10));
            p90.push(nearest_rank(&column, 90));
        }
        Self {
            label: policy.label(),
            policy,
            mean,
            p10,
            p90,
            traces,
        }
    }

    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    /// Standard error of the mean final regret.
    pub fn final_std_err(&self) -> f64 {
        let n = self.traces.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let m = self.final_mean();
        let var = self
            .traces
            .iter()
            .map(|t| (t.final_regret() - m).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        (var / n).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub checkpoints: Vec<u64>,
    pub policies: Vec<PolicyAggregate>,
    pub lower_bound: BoundReport,
    /// `lower_bound.constant * ln t` at each checkpoint.
    pub lb_curve: Vec<f64>,
}

impl AggregateResult {
    pub fn policy(&self, label: &str) -> Option<&PolicyAggregate> {
        self.policies.iter().find(|p| p.label == label)
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<AggregateResult> {
    run_experiment_with_workers(config, None)
}

/// Runs every (policy, run) trajectory, on a dedicated pool of `workers`
/// threads when given.
pub fn run_experiment_with_workers(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<AggregateResult> {
    config.validate()?;
    let env = Environment::new(&config.instance)?;
    let checkpoints = config.checkpoints();
    let jobs: Vec<(usize, usize)> = (0..config.policies.len())
        .flat_map(|p| (0..config.runs).map(move |r| (p, r)))
        .collect();
    let run_all = || -> Result<Vec<RegretTrace>> {
        jobs.par_iter()
            .map(|&(p, r)| {
                let mut policy = config.policies[p];
                let seed = trajectory_seed(config.base_seed, p, r);
                simulate(&env, &mut policy, config.horizon, &checkpoints, seed)
            })
            .collect()
    };
    let traces = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(run_all)?,
        None => run_all()?,
    };

    let mut traces = traces.into_iter();
    let policies = config
        .policies
        .iter()
        .map(|&spec| {
            let chunk: Vec<RegretTrace> = traces.by_ref().take(config.runs).collect();
            PolicyAggregate::from_traces(spec, chunk, checkpoints.len())
        })
        .collect();
    let lower_bound = env.lower_bound().clone();
    let lb_curve = checkpoints.iter().map(|&t| lower_bound.curve(t)).collect();
    Ok(AggregateResult {
        checkpoints,
        policies,
        lower_bound,
        lb_curve,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn final_window(checkpoints: &[u64], regret: &[f64], window: f64) -> Result<(Vec<u64>, Vec<f64>)> {
    if checkpoints.len() != regret.len() {
        return Err(Error::LengthMismatch {
            expected: checkpoints.len(),
            got: regret.len(),
        });
    }
    let (Some(&first), Some(&last)) = (checkpoints.first(), checkpoints.last()) else {
        return Err(Error::InsufficientCheckpoints("empty trace".into()));
    };
    if (first as f64) * 10.0 > last as f64 * (1.0 + 1e-12) {
        return Err(Error::InsufficientCheckpoints(format!(
            "trace spans {first}..{last}, less than one decade"
        )));
    }
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InsufficientCheckpoints(format!(
            "window {window} must lie in (0, 1]"
        )));
    }
    let from = last as f64 / 10f64.powf(window);
    let (ts, ys): (Vec<u64>, Vec<f64>) = checkpoints
        .iter()
        .zip(regret)
        .filter(|(&t, _)| t as f64 >= from * (1.0 - 1e-12))
        .map(|(&t, &y)| (t, y))
        .unzip();
    if ts.len() < 2 {
        return Err(Error::InsufficientCheckpoints(format!(
            "{} checkpoint(s) in the final window",
            ts.len()
        )));
    }
    Ok((ts, ys))
}

/// Least-squares slope of regret against `ln t` over the last `window`
/// fraction of the final decade (`window = 1` uses `[T/10, T]`).
pub fn slope_estimate(checkpoints: &[u64], regret: &[f64], window: f64) -> Result<f64> {
    let (ts, ys) = final_window(checkpoints, regret, window)?;
    let xs: Vec<f64> = ts.iter().map(|&t| (t as f64).ln()).collect();
    Ok(least_squares_slope(&xs, &ys))
}

/// Least-squares slope of regret against `t` over the same window. Near
/// zero for logarithmic regret, near the average gap for linear regret.
pub fn linear_slope_estimate(checkpoints: &[u64], regret: &[f64], window: f64) -> Result<f64> {
    let (ts, ys) = final_window(checkpoints, regret, window)?;
    let xs: Vec<f64> = ts.iter().map(|&t| t as f64).collect();
    Ok(least_squares_slope(&xs, &ys))
}
