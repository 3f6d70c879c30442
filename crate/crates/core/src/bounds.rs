//! Asymptotic regret constants: the coefficient `c` such that a uniformly
//! efficient policy has regret at least `c ln T` for large `T`.

use crate::model::{check_unimodal, RankOneInstance, UnimodalGraph, Verdict};
use crate::stats::kl_bernoulli;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundTerm {
    pub vertex: usize,
    pub gap: f64,
    pub kl: f64,
    /// `gap / kl`, or 0 when `kl` is infinite.
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub constant: f64,
    pub terms: Vec<BoundTerm>,
    /// Some term had infinite kl (optimal mean equal to 1) and contributes 0.
    pub degenerate: bool,
}

impl BoundReport {
    fn from_vertices(means: &[f64], optimum: usize, vertices: impl Iterator<Item = usize>) -> Self {
        let best = means[optimum];
        let terms: Vec<BoundTerm> = vertices
            .map(|vertex| {
                let gap = best - means[vertex];
                let kl = kl_bernoulli(means[vertex], best);
                let term = if kl.is_finite() { gap / kl } else { 0.0 };
                BoundTerm {
                    vertex,
                    gap,
                    kl,
                    term,
                }
            })
            .collect();
        Self {
            constant: terms.iter().map(|t| t.term).sum(),
            degenerate: terms.iter().any(|t| t.kl.is_infinite()),
            terms,
        }
    }

    /// `constant * ln t`.
    pub fn curve(&self, t: u64) -> f64 {
        self.constant * (t as f64).ln()
    }
}

/// Rank-one constant: sum over the best column (rows `i != i*`) and the best
/// row (columns `j != j*`) of `Δ / kl(μ, μ*)`.
pub fn lower_bound_rank1(inst: &RankOneInstance) -> BoundReport {
    let star = inst.best_entry();
    let cols = inst.cols();
    let column = (0..inst.rows())
        .filter(|&i| i != star.row)
        .map(|i| i * cols + star.col);
    let row = (0..cols)
        .filter(|&j| j != star.col)
        .map(|j| star.row * cols + j);
    let means = inst.means_matrix();
    let optimum = inst.vertex(star);
    BoundReport::from_vertices(&means, optimum, column.chain(row))
}

/// Graphical unimodal constant: sum over the neighbors of the optimal vertex.
pub fn lower_bound_unimodal(graph: &UnimodalGraph, means: &[f64]) -> Result<BoundReport> {
    match check_unimodal(graph, means)? {
        Verdict::Unimodal { optimum } => Ok(BoundReport::from_vertices(
            means,
            optimum,
            graph.neighbors(optimum).iter().copied(),
        )),
        Verdict::Violation(v) => Err(Error::NotUnimodal(v)),
    }
}

/// Unstructured constant: sum over every suboptimal arm.
pub fn lai_robbins_constant(means: &[f64]) -> Result<BoundReport> {
    let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut maximizers = (0..means.len()).filter(|&k| means[k] == max);
    let optimum = maximizers.next().ok_or(Error::TooFewEntries {
        field: "means".into(),
        min: 1,
        got: 0,
    })?;
    if maximizers.next().is_some() {
        return Err(Error::NonUniqueArgmax {
            field: "means".into(),
        });
    }
    Ok(BoundReport::from_vertices(
        means,
        optimum,
        (0..means.len()).filter(|&k| k != optimum),
    ))
}
