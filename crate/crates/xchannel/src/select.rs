//! Beamformer-set selection: exhaustive MinMax-SNR / sum-rate search, the
//! condition-number shortlist (CNu), and the Random-u baseline.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::beamform::{BeamformError, SchemeContext};
use crate::channel::ChannelRealization;
use crate::latin::SchemeId;
use crate::receiver::{set_metrics, surrogate_metrics};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectError {
    #[error("exhaustive search over {size} sets at K={k} requires force-exhaustive")]
    BudgetExceeded { k: usize, size: u64 },
    #[error(transparent)]
    Beamform(#[from] BeamformError),
}

/// What the true (expensive) evaluation optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MinMaxSnr,
    SumRate,
}

/// Cheap surrogate used to shortlist candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surrogate {
    Cn,
    Ocn,
}

/// How the three per-receiver condition numbers collapse to one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    MaxOverReceivers,
    SumOverReceivers,
}

impl Objective {
    /// The aggregation the selection procedure pairs with each objective:
    /// max-of-kappa for MinMax SNR, sum-of-kappa for sum-rate.
    pub fn default_aggregation(&self) -> Aggregation {
        match self {
            Objective::MinMaxSnr => Aggregation::MaxOverReceivers,
            Objective::SumRate => Aggregation::SumOverReceivers,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub scheme_id: SchemeId,
    pub chosen_index: u64,
    /// MinMax SNR (linear) or sum-rate (bits/s/Hz) of the chosen set.
    pub objective_value: f64,
    /// Shortlist size, or the full search size for exhaustive/random-full.
    pub u: u64,
    /// SVD-equivalent factorizations spent on the surrogate (3 per
    /// shortlisted candidate scan).
    pub svd_count: u64,
    /// SVD-equivalent solves spent on true-objective evaluations (3K per
    /// evaluated candidate).
    pub eval_count: u64,
}

/// Worst-stream amplitude, reported before squaring so ties and ordering
/// match the amplitude form of the MinMax criterion exactly.
pub fn minmax_amplitude(amplitudes: &[f64]) -> f64 {
    amplitudes.iter().copied().fold(f64::INFINITY, f64::min)
}

/// True objective value of one candidate set.
pub fn evaluate_true(
    objective: Objective,
    sctx: &SchemeContext,
    ch: &ChannelRealization,
    index: u64,
    p_stream: f64,
) -> Result<f64, SelectError> {
    let set = sctx.build_index(index)?;
    let metrics = set_metrics(&set, &sctx.scheme, ch);
    Ok(match objective {
        Objective::MinMaxSnr => {
            let amp = minmax_amplitude(&metrics.amplitudes);
            p_stream * amp * amp
        }
        Objective::SumRate => metrics.sum_rate(p_stream),
    })
}

/// Surrogate score of one candidate set (lower is better).
pub fn evaluate_surrogate(
    surrogate: Surrogate,
    aggregation: Aggregation,
    sctx: &SchemeContext,
    ch: &ChannelRealization,
    index: u64,
) -> Result<f64, SelectError> {
    let set = sctx.build_index(index)?;
    let (kappas, ocns) = surrogate_metrics(&set, &sctx.scheme, ch);
    let values = match surrogate {
        Surrogate::Cn => kappas,
        Surrogate::Ocn => ocns,
    };
    Ok(match aggregation {
        Aggregation::MaxOverReceivers => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Aggregation::SumOverReceivers => values.iter().sum(),
    })
}

fn argmax_by_index(values: &[(u64, f64)]) -> (u64, f64) {
    // ties broken by smallest set index: strict improvement only, with
    // candidates visited in ascending index order
    let mut best = (u64::MAX, f64::NEG_INFINITY);
    let mut sorted: Vec<&(u64, f64)> = values.iter().collect();
    sorted.sort_by_key(|(i, _)| *i);
    for &&(i, v) in &sorted {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

fn guard_exhaustive(sctx: &SchemeContext, force: bool) -> Result<u64, SelectError> {
    let size = sctx.set_space_size();
    if sctx.k() >= 5 && !force {
        return Err(SelectError::BudgetExceeded { k: sctx.k(), size });
    }
    Ok(size)
}

/// Evaluates the true objective on every set in the scheme's space.
pub fn select_exhaustive(
    objective: Objective,
    sctx: &SchemeContext,
    ch: &ChannelRealization,
    p_stream: f64,
    force: bool,
) -> Result<SelectionResult, SelectError> {
    let size = guard_exhaustive(sctx, force)?;
    let values: Vec<(u64, f64)> = (0..size)
        .into_par_iter()
        .map(|i| Ok((i, evaluate_true(objective, sctx, ch, i, p_stream)?)))
        .collect::<Result<_, SelectError>>()?;
    let (chosen_index, objective_value) = argmax_by_index(&values);
    let k = sctx.k() as u64;
    Ok(SelectionResult {
        scheme_id: sctx.scheme.source,
        chosen_index,
        objective_value,
        u: size,
        svd_count: 0,
        eval_count: 3 * k * size,
    })
}

/// CNu selection: rank every set by the cheap surrogate, evaluate the true
/// objective only on the u best, return the winner.
pub fn select_cn_shortlist(
    objective: Objective,
    surrogate: Surrogate,
    aggregation: Aggregation,
    u: u64,
    sctx: &SchemeContext,
    ch: &ChannelRealization,
    p_stream: f64,
) -> Result<SelectionResult, SelectError> {
    let size = sctx.set_space_size();
    assert!(u >= 1 && u <= size, "shortlist size must be in 1..=|B|");
    let surrogates: Vec<f64> = (0..size)
        .into_par_iter()
        .map(|i| evaluate_surrogate(surrogate, aggregation, sctx, ch, i))
        .collect::<Result<_, SelectError>>()?;
    let mut order: Vec<u64> = (0..size).collect();
    // ascending surrogate, stable tie-break by set index
    order.sort_by(|&a, &b| {
        surrogates[a as usize]
            .total_cmp(&surrogates[b as usize])
            .then(a.cmp(&b))
    });
    let shortlist = &order[..u as usize];
    let values: Vec<(u64, f64)> = shortlist
        .par_iter()
        .map(|&i| Ok((i, evaluate_true(objective, sctx, ch, i, p_stream)?)))
        .collect::<Result<_, SelectError>>()?;
    let (chosen_index, objective_value) = argmax_by_index(&values);
    let k = sctx.k() as u64;
    Ok(SelectionResult {
        scheme_id: sctx.scheme.source,
        chosen_index,
        objective_value,
        u,
        svd_count: 3 * size,
        eval_count: 3 * k * u,
    })
}

/// Random-u baseline: evaluate the true objective on u distinct uniformly
/// sampled sets.
pub fn select_random_u<R: Rng>(
    objective: Objective,
    u: u64,
    sctx: &SchemeContext,
    ch: &ChannelRealization,
    p_stream: f64,
    rng: &mut R,
) -> Result<SelectionResult, SelectError> {
    let size = sctx.set_space_size();
    assert!(u >= 1 && u <= size, "sample size must be in 1..=|B|");
    let picks: Vec<u64> = sample(rng, size as usize, u as usize)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    let values: Vec<(u64, f64)> = picks
        .par_iter()
        .map(|&i| Ok((i, evaluate_true(objective, sctx, ch, i, p_stream)?)))
        .collect::<Result<_, SelectError>>()?;
    let (chosen_index, objective_value) = argmax_by_index(&values);
    let k = sctx.k() as u64;
    Ok(SelectionResult {
        scheme_id: sctx.scheme.source,
        chosen_index,
        objective_value,
        u,
        svd_count: 0,
        eval_count: 3 * k * u,
    })
}

/// Strategy descriptor for multi-scheme and simulation use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Exhaustive { force: bool },
    Shortlist { surrogate: Surrogate, u: u64 },
    RandomU { u: u64 },
}

/// Applies the strategy within each scheme's set space and returns the
/// overall best; earlier schemes win ties.
pub fn select_over_schemes<R: Rng>(
    objective: Objective,
    strategy: Strategy,
    contexts: &[SchemeContext],
    ch: &ChannelRealization,
    p_stream: f64,
    rng: &mut R,
) -> Result<SelectionResult, SelectError> {
    assert!(!contexts.is_empty(), "at least one scheme required");
    let mut best: Option<SelectionResult> = None;
    let mut svd_total = 0u64;
    let mut eval_total = 0u64;
    for sctx in contexts {
        let r = match strategy {
            Strategy::Exhaustive { force } => {
                select_exhaustive(objective, sctx, ch, p_stream, force)?
            }
            Strategy::Shortlist { surrogate, u } => select_cn_shortlist(
                objective,
                surrogate,
                objective.default_aggregation(),
                u.min(sctx.set_space_size()),
                sctx,
                ch,
                p_stream,
            )?,
            Strategy::RandomU { u } => select_random_u(
                objective,
                u.min(sctx.set_space_size()),
                sctx,
                ch,
                p_stream,
                rng,
            )?,
        };
        svd_total += r.svd_count;
        eval_total += r.eval_count;
        let better = match &best {
            None => true,
            Some(b) => r.objective_value > b.objective_value,
        };
        if better {
            best = Some(r);
        }
    }
    let mut out = best.unwrap();
    out.svd_count = svd_total;
    out.eval_count = eval_total;
    Ok(out)
}
