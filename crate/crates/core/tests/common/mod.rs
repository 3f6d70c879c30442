#![allow(dead_code)]

use rand::Rng;
use unimodal_bandit::model::RankOneInstance;

/// Random rank-one instance with `u` strictly positive and a unique argmax in
/// both vectors. About one `v` entry in five is zero, to exercise the detour
/// through the best column.
pub fn random_rank_one<R: Rng>(rng: &mut R) -> RankOneInstance {
    let rows = rng.random_range(2..=8);
    let cols = rng.random_range(2..=8);
    loop {
        let u: Vec<f64> = (0..rows).map(|_| rng.random_range(0.01..=1.0)).collect();
        let v: Vec<f64> = (0..cols)
            .map(|_| {
                if rng.random_bool(0.2) {
                    0.0
                } else {
                    rng.random_range(0.01..=1.0)
                }
            })
            .collect();
        // rejected draws (tied maxima, all-zero v) are redrawn
        if let Ok(inst) = RankOneInstance::new(u, v) {
            return inst;
        }
    }
}

/// The benchmark config used by CLI tests.
pub fn benchmark_config(horizon: u64, runs: usize, seed: u64) -> String {
    format!(
        r#"horizon = {horizon}
runs = {runs}
seed = {seed}
grid = 50
gammas = [2, 5, 10, 20, "inf"]
policies = [
    {{ kind = "uts", gamma = 2 }},
    {{ kind = "osub", gamma = 7 }},
    {{ kind = "klucb" }},
]

[instance]
u = [0.75, 0.25, 0.25, 0.25]
v = [0.75, 0.25, 0.25, 0.25]
"#
    )
}
