//! Monte-Carlo simulation engine: SER and sum-rate sweeps over an SNR grid,
//! surrogate-correlation studies, validation campaigns, and CSV emission.
//!
//! Every experiment is deterministic for a fixed config: channel, noise, and
//! selection randomness are drawn from per-draw keyed streams, draws are
//! evaluated in parallel but reduced in draw order.

mod modem;

pub use modem::{qpsk_detect, qpsk_point, Link};

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::path::Path;

use crate::beamform::{validate_ia, BeamformError, SchemeContext};
use crate::channel::{awgn, draw_channel, noise_rng, selection_rng, ChannelRealization};
use crate::latin::{enumerate_fixed_first_row, scheme_from_columns, BfId, LatinError};
use crate::linalg::vec_normalize;
use crate::receiver::set_metrics;
use crate::select::{
    evaluate_surrogate, evaluate_true, select_over_schemes, Objective, SelectError, SelectionResult,
    Strategy, Surrogate,
};

/// Residual tolerance used by validation campaigns.
pub const VALIDATION_TOL: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Latin(#[from] LatinError),
    #[error(transparent)]
    Beamform(#[from] BeamformError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which selection procedure a simulation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    /// Exhaustive true-objective search.
    Optimal,
    /// Condition-number shortlist.
    Cn,
    /// Orthogonalized-condition-number shortlist.
    Ocn,
    /// Uniform random subset baseline.
    Random,
}

impl StrategyKind {
    pub fn label(&self) -> &'static str {
        match self {
            StrategyKind::Optimal => "optimal",
            StrategyKind::Cn => "cn",
            StrategyKind::Ocn => "ocn",
            StrategyKind::Random => "random",
        }
    }

    pub fn surrogate(&self) -> Option<Surrogate> {
        match self {
            StrategyKind::Cn => Some(Surrogate::Cn),
            StrategyKind::Ocn => Some(Surrogate::Ocn),
            _ => None,
        }
    }

    fn needs_u(&self) -> bool {
        !matches!(self, StrategyKind::Optimal)
    }
}

/// How many alignment schemes the search spans. All scopes use the identity
/// receiver assignment; `All` covers every fixed-first-row square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeScope {
    First,
    All,
    Count(usize),
}

impl fmt::Display for SchemeScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeScope::First => write!(f, "first"),
            SchemeScope::All => write!(f, "all"),
            SchemeScope::Count(n) => write!(f, "{n}"),
        }
    }
}

/// Full description of one simulation run. The canonical rendering is
/// embedded as the first line of every CSV so outputs are self-describing.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub k: usize,
    pub seed: u64,
    pub snr_db_start: f64,
    pub snr_db_stop: f64,
    pub snr_db_step: f64,
    /// Independent channel draws.
    pub trials: u64,
    /// QPSK symbol periods per draw per SNR point.
    pub symbols: u64,
    pub strategy: StrategyKind,
    pub objective: Objective,
    /// Shortlist / sample size; ignored by the optimal strategy.
    pub u: u64,
    pub schemes: SchemeScope,
    /// When false, noise injection is skipped (exactness debugging).
    pub noise: bool,
    pub force_exhaustive: bool,
}

impl SimConfig {
    pub fn canonical(&self) -> String {
        format!(
            "k={} seed={} snr_db={}:{}:{} trials={} symbols={} mod=qpsk strategy={} objective={} u={} schemes={} noise={}",
            self.k,
            self.seed,
            self.snr_db_start,
            self.snr_db_step,
            self.snr_db_stop,
            self.trials,
            self.symbols,
            self.strategy.label(),
            objective_label(self.objective),
            self.u,
            self.schemes,
            if self.noise { "on" } else { "off" },
        )
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: String| Err(SimError::Config(msg));
        if !(3..=6).contains(&self.k) {
            return fail(format!("k must be in 3..=6, got {}", self.k));
        }
        if self.snr_db_step <= 0.0 || self.snr_db_stop < self.snr_db_start {
            return fail("SNR grid requires step > 0 and stop >= start".into());
        }
        if self.trials == 0 || self.symbols == 0 {
            return fail("trials and symbols must be positive".into());
        }
        if self.strategy.needs_u() && self.u == 0 {
            return fail(format!("strategy {} requires u >= 1", self.strategy.label()));
        }
        if let SchemeScope::Count(n) = self.schemes {
            let available = enumerate_fixed_first_row(self.k)?.len();
            if n == 0 || n > available {
                return fail(format!("scheme count must be in 1..={available}, got {n}"));
            }
        }
        Ok(())
    }

    pub fn snr_points(&self) -> Vec<f64> {
        let mut points = Vec::new();
        let mut i = 0u32;
        loop {
            let v = self.snr_db_start + self.snr_db_step * f64::from(i);
            if v > self.snr_db_stop + 1e-9 {
                break;
            }
            points.push(v);
            i += 1;
        }
        points
    }

    fn selection_strategy(&self) -> Strategy {
        match self.strategy {
            StrategyKind::Optimal => Strategy::Exhaustive {
                force: self.force_exhaustive,
            },
            StrategyKind::Cn => Strategy::Shortlist {
                surrogate: Surrogate::Cn,
                u: self.u,
            },
            StrategyKind::Ocn => Strategy::Shortlist {
                surrogate: Surrogate::Ocn,
                u: self.u,
            },
            StrategyKind::Random => Strategy::RandomU { u: self.u },
        }
    }
}

pub fn objective_label(objective: Objective) -> &'static str {
    match objective {
        Objective::MinMaxSnr => "minmax",
        Objective::SumRate => "sumrate",
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Builds the scheme contexts of the configured scope for one realization.
pub fn build_contexts(
    cfg: &SimConfig,
    ch: &ChannelRealization,
) -> Result<Vec<SchemeContext>, SimError> {
    let squares = enumerate_fixed_first_row(cfg.k)?;
    let n = match cfg.schemes {
        SchemeScope::First => 1,
        SchemeScope::All => squares.len(),
        SchemeScope::Count(n) => n,
    };
    squares[..n]
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Ok(SchemeContext::new(
                scheme_from_columns(s, i, [0, 1, 2])?,
                ch,
            )?)
        })
        .collect()
}

/// Runs selection and materializes the chosen set's link state.
fn choose_link(
    cfg: &SimConfig,
    contexts: &[SchemeContext],
    ch: &ChannelRealization,
    p_stream: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Link, SelectionResult), SimError> {
    let result = select_over_schemes(
        cfg.objective,
        cfg.selection_strategy(),
        contexts,
        ch,
        p_stream,
        rng,
    )?;
    let ctx = contexts
        .iter()
        .find(|c| c.scheme.source == result.scheme_id)
        .expect("selection returned an unknown scheme");
    let set = ctx.build_index(result.chosen_index)?;
    Ok((Link::new(&set, &ctx.scheme, ch), result))
}

// ── SER sweep ────────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct SerRow {
    pub snr_db: f64,
    pub errors: u64,
    pub symbols: u64,
    pub ser: f64,
}

#[derive(Debug, Clone)]
pub struct SerOutput {
    pub rows: Vec<SerRow>,
    pub skipped_draws: u64,
}

/// Symbol-error-rate sweep: per draw, run selection, transmit QPSK at every
/// SNR point through the chosen set, and accumulate symbol errors.
pub fn run_ser(cfg: &SimConfig) -> Result<SerOutput, SimError> {
    cfg.validate()?;
    if cfg.strategy == StrategyKind::Optimal {
        // surface the K >= 5 budget guard as a config-time error
        probe_exhaustive(cfg)?;
    }
    let points = cfg.snr_points();
    let per_draw: Vec<Option<Vec<(u64, u64)>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|draw| {
            let ch = draw_channel(cfg.k, cfg.seed, draw);
            let contexts = build_contexts(cfg, &ch).ok()?;
            let mut sel_rng = selection_rng(cfg.seed, draw);
            let mut noise = noise_rng(cfg.seed, draw);
            // MinMax selection is invariant to the transmit power level, so
            // one selection serves the whole sweep
            let fixed = if cfg.objective == Objective::MinMaxSnr {
                Some(choose_link(cfg, &contexts, &ch, 1.0, &mut sel_rng).ok()?.0)
            } else {
                None
            };
            let mut counts = Vec::with_capacity(points.len());
            for &snr_db in &points {
                let p_stream = db_to_linear(snr_db) / 3.0;
                let tmp;
                let link = match &fixed {
                    Some(l) => l,
                    None => {
                        tmp = choose_link(cfg, &contexts, &ch, p_stream, &mut sel_rng).ok()?.0;
                        &tmp
                    }
                };
                counts.push(link.run_symbols(cfg.symbols, p_stream, cfg.noise, &mut noise));
            }
            Some(counts)
        })
        .collect();

    let mut skipped = 0u64;
    let mut totals = vec![(0u64, 0u64); points.len()];
    for counts in per_draw {
        match counts {
            Some(c) => {
                for (t, (e, s)) in totals.iter_mut().zip(c) {
                    t.0 += e;
                    t.1 += s;
                }
            }
            None => skipped += 1,
        }
    }
    if skipped == cfg.trials {
        return Err(SimError::Config(
            "every draw failed selection; nothing to report".into(),
        ));
    }
    let rows = points
        .iter()
        .zip(totals)
        .map(|(&snr_db, (errors, symbols))| SerRow {
            snr_db,
            errors,
            symbols,
            ser: errors as f64 / symbols as f64,
        })
        .collect();
    Ok(SerOutput {
        rows,
        skipped_draws: skipped,
    })
}

/// Runs one cheap selection to trigger the exhaustive-budget guard early.
fn probe_exhaustive(cfg: &SimConfig) -> Result<(), SimError> {
    if cfg.k >= 5 && !cfg.force_exhaustive {
        let size = (2 * cfg.k as u64).pow(cfg.k as u32);
        return Err(SimError::Select(SelectError::BudgetExceeded {
            k: cfg.k,
            size,
        }));
    }
    Ok(())
}

// ── sum-rate sweep ───────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct SumRateRow {
    pub snr_db: f64,
    pub mean_sum_rate: f64,
    pub draws: u64,
}

#[derive(Debug, Clone)]
pub struct SumRateOutput {
    pub rows: Vec<SumRateRow>,
    pub skipped_draws: u64,
}

/// Ergodic sum-rate sweep: mean over draws of the chosen set's sum rate.
pub fn run_sumrate(cfg: &SimConfig) -> Result<SumRateOutput, SimError> {
    cfg.validate()?;
    if cfg.strategy == StrategyKind::Optimal {
        probe_exhaustive(cfg)?;
    }
    let points = cfg.snr_points();
    let per_draw: Vec<Option<Vec<f64>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|draw| {
            let ch = draw_channel(cfg.k, cfg.seed, draw);
            let contexts = build_contexts(cfg, &ch).ok()?;
            let mut sel_rng = selection_rng(cfg.seed, draw);
            match cfg.objective {
                Objective::MinMaxSnr => {
                    // power-invariant selection: one choice, its amplitudes
                    // give the sum rate at every power level
                    let (_, result) =
                        choose_link(cfg, &contexts, &ch, 1.0, &mut sel_rng).ok()?;
                    let ctx = contexts
                        .iter()
                        .find(|c| c.scheme.source == result.scheme_id)?;
                    let set = ctx.build_index(result.chosen_index).ok()?;
                    let metrics = set_metrics(&set, &ctx.scheme, &ch);
                    Some(
                        points
                            .iter()
                            .map(|&db| metrics.sum_rate(db_to_linear(db) / 3.0))
                            .collect(),
                    )
                }
                Objective::SumRate => {
                    let mut rates = Vec::with_capacity(points.len());
                    for &db in &points {
                        let p_stream = db_to_linear(db) / 3.0;
                        let (_, result) =
                            choose_link(cfg, &contexts, &ch, p_stream, &mut sel_rng).ok()?;
                        rates.push(result.objective_value);
                    }
                    Some(rates)
                }
            }
        })
        .collect();

    let mut skipped = 0u64;
    let mut sums = vec![0.0f64; points.len()];
    for rates in &per_draw {
        match rates {
            Some(r) => {
                for (s, v) in sums.iter_mut().zip(r) {
                    *s += v;
                }
            }
            None => skipped += 1,
        }
    }
    let used = cfg.trials - skipped;
    if used == 0 {
        return Err(SimError::Config(
            "every draw failed selection; nothing to report".into(),
        ));
    }
    let rows = points
        .iter()
        .zip(sums)
        .map(|(&snr_db, total)| SumRateRow {
            snr_db,
            mean_sum_rate: total / used as f64,
            draws: used,
        })
        .collect();
    Ok(SumRateOutput {
        rows,
        skipped_draws: skipped,
    })
}

// ── surrogate correlation ────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct CorrelationRecord {
    /// 1-based position in each ordering.
    pub rank: usize,
    /// True objective values sorted best-first.
    pub true_metric_desc: f64,
    /// True objective of the set at this surrogate rank (surrogate
    /// ascending, i.e. predicted-best first).
    pub surrogate_ordered_true: f64,
    /// Surrogate score at this rank (ascending).
    pub surrogate_value: f64,
}

#[derive(Debug, Clone)]
pub struct CorrelationOutput {
    pub records: Vec<CorrelationRecord>,
    /// Spearman rank correlation between surrogate quality (negated score,
    /// so larger means predicted-better) and the true objective.
    pub spearman: f64,
}

/// Scores every set of the first in-scope scheme on a single draw with both
/// the true objective and the configured surrogate shortlist score.
pub fn run_correlation(cfg: &SimConfig) -> Result<CorrelationOutput, SimError> {
    cfg.validate()?;
    let surrogate = cfg.strategy.surrogate().ok_or_else(|| {
        SimError::Config("correlate requires the cn or ocn strategy".into())
    })?;
    let ch = draw_channel(cfg.k, cfg.seed, 0);
    let contexts = build_contexts(cfg, &ch)?;
    let sctx = &contexts[0];
    let p_stream = db_to_linear(cfg.snr_db_start) / 3.0;
    let aggregation = cfg.objective.default_aggregation();
    let size = sctx.set_space_size();
    let scores: Vec<(f64, f64)> = (0..size)
        .into_par_iter()
        .map(|i| {
            Ok((
                evaluate_true(cfg.objective, sctx, &ch, i, p_stream)?,
                evaluate_surrogate(surrogate, aggregation, sctx, &ch, i)?,
            ))
        })
        .collect::<Result<_, SelectError>>()?;
    let truth: Vec<f64> = scores.iter().map(|s| s.0).collect();
    let surr: Vec<f64> = scores.iter().map(|s| s.1).collect();

    let mut by_truth: Vec<usize> = (0..truth.len()).collect();
    by_truth.sort_by(|&a, &b| truth[b].total_cmp(&truth[a]).then(a.cmp(&b)));
    let mut by_surr: Vec<usize> = (0..surr.len()).collect();
    by_surr.sort_by(|&a, &b| surr[a].total_cmp(&surr[b]).then(a.cmp(&b)));

    let records = (0..truth.len())
        .map(|r| CorrelationRecord {
            rank: r + 1,
            true_metric_desc: truth[by_truth[r]],
            surrogate_ordered_true: truth[by_surr[r]],
            surrogate_value: surr[by_surr[r]],
        })
        .collect();
    let neg_surr: Vec<f64> = surr.iter().map(|v| -v).collect();
    Ok(CorrelationOutput {
        records,
        spearman: spearman(&neg_surr, &truth),
    })
}

/// Average ranks with ties sharing their mean position.
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average-rank tie handling; 0 when either
/// argument is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

// ── validation campaign ──────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct ValidationSummary {
    pub draws: u64,
    pub skipped_draws: u64,
    pub sets_checked: u64,
    /// Sets with the wrong outcome: failing alignment in clean mode, or
    /// passing despite injected corruption.
    pub failures: u64,
    /// Largest pair residual seen (clean mode only).
    pub max_residual: f64,
    pub injected: bool,
}

impl ValidationSummary {
    pub fn pass(&self) -> bool {
        self.failures == 0 && self.skipped_draws == 0
    }
}

/// Constructs beamformer sets across draws and checks the alignment
/// requirements on each. With `inject` set, one beamformer per set is
/// replaced by a random vector and the checker must flag the set.
pub fn run_validate(cfg: &SimConfig, inject: bool) -> Result<ValidationSummary, SimError> {
    cfg.validate()?;
    let per_draw: Vec<Option<(u64, u64, f64)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|draw| {
            let ch = draw_channel(cfg.k, cfg.seed, draw);
            let contexts = build_contexts(cfg, &ch).ok()?;
            let mut rng = selection_rng(cfg.seed, draw);
            let mut checked = 0u64;
            let mut failures = 0u64;
            let mut max_residual = 0.0f64;
            for sctx in &contexts {
                let size = sctx.set_space_size();
                // the full space up to 1024 sets, a fixed-size sample beyond
                let choices: Vec<u64> = if size <= 1024 {
                    (0..size).collect()
                } else {
                    let mut picks: Vec<u64> = sample(&mut rng, size as usize, 256)
                        .into_iter()
                        .map(|i| i as u64)
                        .collect();
                    picks.sort_unstable();
                    picks
                };
                for index in choices {
                    let mut set = sctx.build_index(index).ok()?;
                    if inject {
                        let dim = 2 * cfg.k;
                        *set.vector_mut(BfId::new(0, 0)) =
                            vec_normalize(&awgn(dim, &mut rng));
                    }
                    let report = validate_ia(&set, &sctx.scheme, &ch, VALIDATION_TOL);
                    checked += 1;
                    let ok = report.pass();
                    if ok == inject {
                        failures += 1;
                    }
                    if !inject {
                        max_residual = max_residual.max(report.max_residual());
                    }
                }
            }
            Some((checked, failures, max_residual))
        })
        .collect();

    let mut out = ValidationSummary {
        draws: cfg.trials,
        skipped_draws: 0,
        sets_checked: 0,
        failures: 0,
        max_residual: 0.0,
        injected: inject,
    };
    for r in per_draw {
        match r {
            Some((checked, failures, resid)) => {
                out.sets_checked += checked;
                out.failures += failures;
                out.max_residual = out.max_residual.max(resid);
            }
            None => out.skipped_draws += 1,
        }
    }
    Ok(out)
}

// ── CSV emission ─────────────────────────────────────────────────────

fn surrogate_label(cfg: &SimConfig) -> &'static str {
    match cfg.strategy.surrogate() {
        Some(Surrogate::Cn) => "cn",
        Some(Surrogate::Ocn) => "ocn",
        None => "-",
    }
}

pub fn ser_csv(cfg: &SimConfig, out: &SerOutput) -> String {
    let mut s = format!(
        "# config: {}\nsnr_db,strategy,objective,surrogate,u,schemes,errors,symbols,ser\n",
        cfg.canonical()
    );
    for row in &out.rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:.6e}\n",
            row.snr_db,
            cfg.strategy.label(),
            objective_label(cfg.objective),
            surrogate_label(cfg),
            cfg.u,
            cfg.schemes,
            row.errors,
            row.symbols,
            row.ser,
        ));
    }
    s
}

pub fn sumrate_csv(cfg: &SimConfig, out: &SumRateOutput) -> String {
    let mut s = format!(
        "# config: {}\nsnr_db,strategy,objective,surrogate,u,schemes,mean_sum_rate,draws\n",
        cfg.canonical()
    );
    for row in &out.rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{}\n",
            row.snr_db,
            cfg.strategy.label(),
            objective_label(cfg.objective),
            surrogate_label(cfg),
            cfg.u,
            cfg.schemes,
            row.mean_sum_rate,
            row.draws,
        ));
    }
    s
}

pub fn correlation_csv(cfg: &SimConfig, out: &CorrelationOutput) -> String {
    let mut s = format!(
        "# config: {}\nrank,true_metric_desc,surrogate_ordered_true,surrogate_value\n",
        cfg.canonical()
    );
    for r in &out.records {
        s.push_str(&format!(
            "{},{:.6e},{:.6e},{:.6e}\n",
            r.rank, r.true_metric_desc, r.surrogate_ordered_true, r.surrogate_value
        ));
    }
    s.push_str(&format!("# spearman={:.6}\n", out.spearman));
    s
}

pub fn write_csv(path: &Path, contents: &str) -> Result<(), SimError> {
    std::fs::write(path, contents)?;
    Ok(())
}

/// Dumps every channel matrix of a realization: a `# H i j` marker line per
/// matrix (1-based receiver, transmitter), then one CSV row per matrix row
/// with alternating real and imaginary parts.
pub fn dump_channel_csv(ch: &ChannelRealization) -> String {
    let m = ch.antennas();
    let mut s = String::new();
    for rx in 0..3 {
        for tx in 0..ch.k {
            s.push_str(&format!("# H {} {}\n", rx + 1, tx + 1));
            let h = ch.h(rx, tx);
            for i in 0..m {
                let cells: Vec<String> = (0..m)
                    .flat_map(|j| {
                        let z = h[(i, j)];
                        [format!("{:.17e}", z.re), format!("{:.17e}", z.im)]
                    })
                    .collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
        }
    }
    s
}

#[cfg(test)]
mod tests;
