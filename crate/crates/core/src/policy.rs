//! Sequential policies sharing one step interface.
//!
//! Every policy starts by pulling each arm once in vertex order (done by the
//! caller, see [`crate::harness`]). After that, each call to [`select_arm`]
//! computes the empirical leader, bumps its leader count, and picks an arm:
//!
//! - **UTS(γ)**: plays the leader when its leader count is a multiple of γ,
//!   otherwise Thompson Sampling over `N⁺(leader)`.
//! - **OSUB(γ)**: plays the leader when its leader count is `1 mod γ`,
//!   otherwise kl-UCB over `N⁺(leader)` with budget `f(leader count)`.
//! - **kl-UCB**: kl-UCB over all arms with budget `f(t)`.
//! - **TS**: Thompson Sampling over all arms.
//!
//! All argmax ties are broken uniformly at random with the caller's rng.

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::model::UnimodalGraph;
use crate::stats::{kl_bernoulli, klucb_index, sample_beta};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArmState {
    pub pulls: u64,
    pub successes: u64,
    pub leader_count: u64,
}

impl ArmState {
    pub fn new(pulls: u64, successes: u64) -> Self {
        assert!(successes <= pulls, "successes exceed pulls");
        Self {
            pulls,
            successes,
            leader_count: 0,
        }
    }

    pub fn mean(&self) -> Option<f64> {
        (self.pulls > 0).then(|| self.successes as f64 / self.pulls as f64)
    }

    fn posterior_draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_beta(self.successes + 1, self.pulls - self.successes + 1, rng)
    }
}

/// Empirical mean as an exact fraction, so leader ties are detected exactly.
#[derive(Clone, Copy)]
struct Ratio {
    num: u64,
    den: u64,
}

impl PartialEq for Ratio {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        Some(lhs.cmp(&rhs))
    }
}

/// Streaming argmax with uniform random tie-breaking (reservoir sampling
/// over the tied maxima).
struct TieBreakArgmax<K> {
    best: Option<(usize, K)>,
    ties: u32,
}

impl<K: PartialOrd> TieBreakArgmax<K> {
    fn new() -> Self {
        Self {
            best: None,
            ties: 0,
        }
    }

    fn best_key(&self) -> Option<&K> {
        self.best.as_ref().map(|(_, k)| k)
    }

    fn offer<R: Rng + ?Sized>(&mut self, idx: usize, key: K, rng: &mut R) {
        match &self.best {
            Some((_, b)) if key < *b => {}
            Some((_, b)) if key == *b => {
                self.ties += 1;
                if rng.random_range(0..self.ties) == 0 {
                    self.best = Some((idx, key));
                }
            }
            _ => {
                self.best = Some((idx, key));
                self.ties = 1;
            }
        }
    }

    fn finish(self) -> usize {
        self.best.expect("argmax over an empty candidate set").0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyState {
    arms: Vec<ArmState>,
    round: u64,
    last_leader: Option<usize>,
}

impl PolicyState {
    pub fn new(arm_count: usize) -> Self {
        Self {
            arms: vec![ArmState::default(); arm_count],
            round: 0,
            last_leader: None,
        }
    }

    /// State with the given arm statistics; the round counter is the total pull count.
    pub fn from_arms(arms: Vec<ArmState>) -> Self {
        let round = arms.iter().map(|a| a.pulls).sum();
        Self {
            arms,
            round,
            last_leader: None,
        }
    }

    pub fn arms(&self) -> &[ArmState] {
        &self.arms
    }

    pub fn arm_count(&self) -> usize {
        self.arms.len()
    }

    /// Number of completed rounds.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn last_leader(&self) -> Option<usize> {
        self.last_leader
    }

    pub fn is_initialized(&self) -> bool {
        self.arms.iter().all(|a| a.pulls > 0)
    }

    fn first_unpulled(&self) -> Option<usize> {
        self.arms.iter().position(|a| a.pulls == 0)
    }

    pub fn update(&mut self, arm: usize, reward: u8) -> Result<()> {
        if reward > 1 {
            return Err(Error::InvalidReward(reward));
        }
        let count = self.arms.len();
        let a = self
            .arms
            .get_mut(arm)
            .ok_or(Error::VertexOutOfRange { vertex: arm, count })?;
        a.pulls += 1;
        a.successes += u64::from(reward);
        self.round += 1;
        Ok(())
    }

    /// An arm with the highest empirical mean; ties broken uniformly at random.
    pub fn leader<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        if let Some(k) = self.first_unpulled() {
            return Err(Error::Uninitialized(k));
        }
        let mut argmax = TieBreakArgmax::new();
        for (k, a) in self.arms.iter().enumerate() {
            let key = Ratio {
                num: a.successes,
                den: a.pulls,
            };
            argmax.offer(k, key, rng);
        }
        Ok(argmax.finish())
    }

    /// `N_k >= floor(l_k / gamma)` for every arm.
    pub fn leader_exploration_holds(&self, gamma: u64) -> bool {
        self.arms.iter().all(|a| a.pulls >= a.leader_count / gamma)
    }
}

/// Leader-exploration period. `Infinite` disables forced leader plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gamma {
    Finite(u64),
    Infinite,
}

impl Gamma {
    pub fn validate(self) -> Result<Self> {
        match self {
            Gamma::Finite(g) if g < 2 => Err(Error::GammaTooSmall(g)),
            g => Ok(g),
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Finite(g) => write!(f, "{g}"),
            Gamma::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Gamma {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Gamma::Finite(g) => s.serialize_u64(*g),
            Gamma::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Gamma {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(g) if g >= 0 => Ok(Gamma::Finite(g as u64)),
            Raw::Int(g) => Err(serde::de::Error::custom(format!(
                "gamma must be >= 2, got {g}"
            ))),
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "+inf") => Ok(Gamma::Infinite),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "gamma must be an integer or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// Which policy to run, as written in experiment configs
/// (`{ kind = "uts", gamma = 2 }`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PolicySpec {
    Uts { gamma: Gamma },
    Osub { gamma: Gamma },
    #[serde(alias = "kl-ucb", alias = "kl_ucb")]
    Klucb,
    #[serde(alias = "vanilla_ts", alias = "thompson")]
    Ts,
}

impl PolicySpec {
    pub fn validate(self) -> Result<Self> {
        match self {
            PolicySpec::Uts { gamma } => {
                gamma.validate()?;
            }
            PolicySpec::Osub { gamma } => {
                if gamma == Gamma::Infinite {
                    return Err(Error::InfiniteGammaUnsupported("osub"));
                }
                gamma.validate()?;
            }
            PolicySpec::Klucb | PolicySpec::Ts => {}
        }
        Ok(self)
    }

    /// Short label used in CSV output, e.g. `uts-g2`.
    pub fn label(&self) -> String {
        match self {
            PolicySpec::Uts { gamma } => format!("uts-g{gamma}"),
            PolicySpec::Osub { gamma } => format!("osub-g{gamma}"),
            PolicySpec::Klucb => "klucb".into(),
            PolicySpec::Ts => "ts".into(),
        }
    }

    /// Leader-exploration period, if this policy forces leader plays.
    pub fn leader_period(&self) -> Option<u64> {
        match self {
            PolicySpec::Uts {
                gamma: Gamma::Finite(g),
            }
            | PolicySpec::Osub {
                gamma: Gamma::Finite(g),
            } => Some(*g),
            _ => None,
        }
    }
}

/// Exploration budget `f(n) = ln n + 3 ln(max(ln n, 1))` for kl-UCB style indices.
pub fn exploration_budget_f(n: u64) -> f64 {
    let ln_n = (n.max(1) as f64).ln();
    ln_n + 3.0 * ln_n.max(1.0).ln()
}

/// Outcome of one selection step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub arm: usize,
    pub leader: usize,
    /// The leader was played because of the leader-exploration rule.
    pub forced: bool,
}

/// kl-UCB argmax over `candidates`. An arm whose kl at the current best index
/// already exceeds the budget has a strictly smaller index and is skipped
/// without inverting.
fn klucb_argmax<R: Rng + ?Sized>(
    arms: &[ArmState],
    candidates: impl Iterator<Item = usize>,
    budget: f64,
    rng: &mut R,
) -> usize {
    let mut argmax = TieBreakArgmax::new();
    for k in candidates {
        let a = &arms[k];
        let mu = a.successes as f64 / a.pulls as f64;
        if let Some(&q) = argmax.best_key() {
            if mu < q && a.pulls as f64 * kl_bernoulli(mu, q) > budget {
                continue;
            }
        }
        argmax.offer(k, klucb_index(mu, a.pulls, budget), rng);
    }
    argmax.finish()
}

fn thompson_argmax<R, O>(
    arms: &[ArmState],
    candidates: impl Iterator<Item = usize>,
    rng: &mut R,
    observe: &mut O,
) -> usize
where
    R: Rng + ?Sized,
    O: FnMut(usize, f64),
{
    let mut argmax = TieBreakArgmax::new();
    for k in candidates {
        let theta = arms[k].posterior_draw(rng);
        observe(k, theta);
        argmax.offer(k, theta, rng);
    }
    argmax.finish()
}

/// One selection step. `observe` receives every posterior draw `(arm, θ)`.
pub fn select_arm_observed<R, O>(
    state: &mut PolicyState,
    spec: &PolicySpec,
    graph: &UnimodalGraph,
    rng: &mut R,
    mut observe: O,
) -> Result<Selection>
where
    R: Rng + ?Sized,
    O: FnMut(usize, f64),
{
    let leader = state.leader(rng)?;
    state.arms[leader].leader_count += 1;
    state.last_leader = Some(leader);
    let leader_count = state.arms[leader].leader_count;
    let pick = |arm| Selection {
        arm,
        leader,
        forced: false,
    };

    let selection = match *spec {
        PolicySpec::Uts { gamma } => {
            if matches!(gamma, Gamma::Finite(g) if leader_count % g == 0) {
                Selection {
                    arm: leader,
                    leader,
                    forced: true,
                }
            } else {
                let candidates = graph.extended_neighborhood(leader).iter().copied();
                pick(thompson_argmax(&state.arms, candidates, rng, &mut observe))
            }
        }
        PolicySpec::Osub { gamma } => {
            let Gamma::Finite(g) = gamma else {
                return Err(Error::InfiniteGammaUnsupported("osub"));
            };
            if leader_count % g == 1 % g {
                Selection {
                    arm: leader,
                    leader,
                    forced: true,
                }
            } else {
                let budget = exploration_budget_f(leader_count);
                let candidates = graph.extended_neighborhood(leader).iter().copied();
                pick(klucb_argmax(&state.arms, candidates, budget, rng))
            }
        }
        PolicySpec::Klucb => {
            let budget = exploration_budget_f(state.round);
            pick(klucb_argmax(&state.arms, 0..state.arms.len(), budget, rng))
        }
        PolicySpec::Ts => pick(thompson_argmax(
            &state.arms,
            0..state.arms.len(),
            rng,
            &mut observe,
        )),
    };
    Ok(selection)
}

/// One selection step; returns the arm to pull.
pub fn select_arm<R: Rng + ?Sized>(
    state: &mut PolicyState,
    spec: &PolicySpec,
    graph: &UnimodalGraph,
    rng: &mut R,
) -> Result<usize> {
    select_arm_observed(state, spec, graph, rng, |_, _| {}).map(|s| s.arm)
}

/// Step interface used by the simulation harness. Additional policies plug
/// in here.
pub trait ArmSelector {
    fn select<R: Rng + ?Sized>(
        &mut self,
        state: &mut PolicyState,
        graph: &UnimodalGraph,
        rng: &mut R,
    ) -> Result<Selection>;

    /// Leader-exploration period to audit each round, if any.
    fn leader_period(&self) -> Option<u64> {
        None
    }
}

impl ArmSelector for PolicySpec {
    fn select<R: Rng + ?Sized>(
        &mut self,
        state: &mut PolicyState,
        graph: &UnimodalGraph,
        rng: &mut R,
    ) -> Result<Selection> {
        select_arm_observed(state, self, graph, rng, |_, _| {})
    }

    fn leader_period(&self) -> Option<u64> {
        PolicySpec::leader_period(self)
    }
}
