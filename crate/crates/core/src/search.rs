//! Exhaustive worst-case noise search and the unsynchronized termination demo.
//!
//! The search covers every pattern with at most `budget` erasures in physical
//! timesteps `1..=horizon`. It walks patterns in increasing order and never
//! extends a pattern past the last timestep its run used: erasures scheduled
//! after that never reach the channel, so those patterns replay the shorter
//! run exactly and are accounted for without being re-run.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::analysis::bound_violations;
use crate::bits::PartyInput;
use crate::channel::NoisePattern;
use crate::protocol::Protocol;
use crate::sim::{run, HarnessError, Metrics, RunConfig, SchemeKind};

/// Default cap on the number of candidate patterns.
pub const DEFAULT_PATTERN_LIMIT: u128 = 50_000_000;

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub scheme: SchemeKind,
    pub protocol: Protocol,
    pub x: PartyInput,
    pub y: PartyInput,
    pub budget: u32,
    pub horizon: u64,
    pub limit: u128,
    pub settle_rounds: u32,
}

impl SearchConfig {
    pub fn new(
        scheme: SchemeKind,
        protocol: Protocol,
        x: PartyInput,
        y: PartyInput,
        budget: u32,
        horizon: u64,
    ) -> Self {
        SearchConfig { scheme, protocol, x, y, budget, horizon, limit: DEFAULT_PATTERN_LIMIT, settle_rounds: 3 }
    }

    fn run_config(&self, pattern: &[u64]) -> RunConfig {
        let mut cfg = RunConfig::new(self.scheme, self.protocol.clone(), self.x.clone(), self.y.clone())
            .with_pattern(pattern.iter().copied())
            .without_trace();
        cfg.settle_rounds = self.settle_rounds;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("{required} candidate patterns exceed the limit of {limit}")]
    LimitExceeded { required: u128, limit: u128 },
    #[error("{0} is not supported here")]
    Unsupported(SchemeKind),
}

/// A pattern whose run broke a guarantee.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub x: PartyInput,
    pub y: PartyInput,
    pub pattern: NoisePattern,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchReport {
    /// Patterns accounted for, including those equivalent to a shorter run.
    pub patterns_covered: u128,
    pub runs: u64,
    pub worst_transmissions: u64,
    pub worst_cc_sym: u64,
    pub worst_rc_timesteps: u64,
    /// Largest `transmissions - N` seen per erasure count used.
    pub worst_by_erasures: Vec<u64>,
    pub worst_pattern: Option<NoisePattern>,
    pub failures: Vec<Failure>,
    /// Patterns covered whose run exceeded `CC_sym <= N + T` (or the unary
    /// energy bound) while meeting the adjusted bound.
    pub cost_excess: u128,
    /// The first few of those runs.
    pub cost_excess_examples: Vec<Failure>,
}

/// How many cost-excess runs a report keeps.
pub const EXCESS_EXAMPLES: usize = 8;

impl SearchReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(&mut self, other: SearchReport) {
        if other.worst_pattern.is_some()
            && (self.worst_pattern.is_none() || other.worst_transmissions > self.worst_transmissions)
        {
            self.worst_pattern = other.worst_pattern;
        }
        self.patterns_covered += other.patterns_covered;
        self.runs += other.runs;
        self.worst_transmissions = self.worst_transmissions.max(other.worst_transmissions);
        self.worst_cc_sym = self.worst_cc_sym.max(other.worst_cc_sym);
        self.worst_rc_timesteps = self.worst_rc_timesteps.max(other.worst_rc_timesteps);
        if self.worst_by_erasures.len() < other.worst_by_erasures.len() {
            self.worst_by_erasures.resize(other.worst_by_erasures.len(), 0);
        }
        for (a, b) in self.worst_by_erasures.iter_mut().zip(other.worst_by_erasures) {
            *a = (*a).max(b);
        }
        self.failures.extend(other.failures);
        self.cost_excess += other.cost_excess;
        let room = EXCESS_EXAMPLES.saturating_sub(self.cost_excess_examples.len());
        self.cost_excess_examples.extend(other.cost_excess_examples.into_iter().take(room));
    }

    fn observe(&mut self, pattern: &[u64], m: &Metrics, n: u64) {
        if m.transmissions > self.worst_transmissions || self.worst_pattern.is_none() {
            self.worst_pattern = Some(pattern.iter().copied().collect());
        }
        self.worst_transmissions = self.worst_transmissions.max(m.transmissions);
        self.worst_cc_sym = self.worst_cc_sym.max(m.cc_sym);
        self.worst_rc_timesteps = self.worst_rc_timesteps.max(m.rc_timesteps);
        let used = m.erasures_counted as usize;
        if self.worst_by_erasures.len() <= used {
            self.worst_by_erasures.resize(used + 1, 0);
        }
        let extra = m.transmissions.saturating_sub(n);
        self.worst_by_erasures[used] = self.worst_by_erasures[used].max(extra);
    }

    fn fail(&mut self, cfg: &SearchConfig, pattern: &[u64], reason: String) {
        self.failures.push(failure(cfg, pattern, reason));
    }
}

fn failure(cfg: &SearchConfig, pattern: &[u64], reason: String) -> Failure {
    Failure { x: cfg.x.clone(), y: cfg.y.clone(), pattern: pattern.iter().copied().collect(), reason }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Patterns with at most `budget` erasures among `horizon` timesteps.
pub fn pattern_count(horizon: u64, budget: u32) -> u128 {
    (0..=u64::from(budget)).map(|k| binomial(horizon, k)).sum()
}

/// Runs the pattern `prefix` and its extensions (all later erasures), up to
/// the search budget.
///
/// `prefix` must be increasing. Together, the empty prefix covers the whole
/// search space; [`split_roots`] partitions it for parallel workers.
pub fn search_subtree(cfg: &SearchConfig, prefix: &[u64]) -> SearchReport {
    let mut report = SearchReport::default();
    let mut pattern = prefix.to_vec();
    let _ = visit(cfg, &mut pattern, &mut report, true);
    report
}

/// Runs the empty pattern alone and returns the first erasure positions whose
/// subtrees remain to be searched, covering the rest of the space.
pub fn split_roots(cfg: &SearchConfig) -> (SearchReport, Vec<u64>) {
    let mut report = SearchReport::default();
    let mut pattern = Vec::new();
    let children = visit(cfg, &mut pattern, &mut report, false);
    (report, children)
}

/// Visits `pattern`, returning the child positions. With `recurse` the
/// children are visited too.
fn visit(cfg: &SearchConfig, pattern: &mut Vec<u64>, report: &mut SearchReport, recurse: bool) -> Vec<u64> {
    let n = cfg.protocol.len() as u64;
    report.runs += 1;
    let mut excess = None;
    let live = match run(&cfg.run_config(pattern)) {
        Ok(out) => {
            if !out.outputs_correct() {
                report.fail(cfg, pattern, format!("outputs {} / {}", out.alice_output, out.bob_output));
            }
            for v in bound_violations(cfg.scheme, n, &out.metrics) {
                if v.bound.is_unadjusted_cost() {
                    excess.get_or_insert(v.detail);
                } else {
                    report.fail(cfg, pattern, v.detail);
                }
            }
            report.observe(pattern, &out.metrics, n);
            out.metrics.rc_timesteps
        }
        Err(e) => {
            let reason = match e {
                HarnessError::RoundCap { cap, .. } => format!("no termination within {cap} rounds"),
                HarnessError::Contract(c) => format!("contract violation: {c}"),
            };
            report.fail(cfg, pattern, reason);
            cfg.horizon
        }
    };
    let last = pattern.last().copied().unwrap_or(0);
    let room = u64::from(cfg.budget).saturating_sub(pattern.len() as u64);
    let live_end = live.min(cfg.horizon).max(last);
    // Extensions whose first new erasure falls after the run replay it.
    let shadow: u128 = (1..=room).map(|j| binomial(cfg.horizon - live_end, j)).sum();
    report.patterns_covered += 1 + shadow;
    if let Some(detail) = excess {
        report.cost_excess += 1 + shadow;
        if report.cost_excess_examples.len() < EXCESS_EXAMPLES {
            report.cost_excess_examples.push(failure(cfg, pattern, detail));
        }
    }
    if room == 0 {
        return Vec::new();
    }
    let children: Vec<u64> = (last + 1..=live_end).collect();
    if recurse {
        for &p in &children {
            pattern.push(p);
            visit(cfg, pattern, report, true);
            pattern.pop();
        }
    }
    children
}

/// Worst-case metrics over every pattern with at most `budget` erasures in
/// `1..=horizon`, asserting correct outputs and the scheme's bounds.
pub fn exhaustive_noise_search(cfg: &SearchConfig) -> Result<SearchReport, SearchError> {
    let required = pattern_count(cfg.horizon, cfg.budget);
    if required > cfg.limit {
        return Err(SearchError::LimitExceeded { required, limit: cfg.limit });
    }
    Ok(search_subtree(cfg, &[]))
}

/// A pattern that makes Bob exit exactly `gap` rounds after Alice.
///
/// It erases the silence Bob hears in the `gap - 1` rounds after Alice exits,
/// so it costs `gap - 1` erasures.
pub fn unsync_termination_demo(
    scheme: SchemeKind,
    protocol: &Protocol,
    x: &PartyInput,
    y: &PartyInput,
    gap: u32,
) -> Result<NoisePattern, SearchError> {
    if scheme != SchemeKind::Basic4 {
        return Err(SearchError::Unsupported(scheme));
    }
    let cfg = RunConfig::new(scheme, protocol.clone(), x.clone(), y.clone()).without_trace();
    let t_a = run(&cfg).map(|o| o.metrics.t_a).unwrap_or(protocol.rounds());
    Ok((1..gap.max(1)).map(|j| 2 * u64::from(t_a + j) - 1).collect())
}
