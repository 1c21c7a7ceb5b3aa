//! Parallel drivers: exhaustive searches split across subtrees and input
//! pairs, and rate/waste sweeps. Results never depend on scheduling.

use rayon::prelude::*;
use serde::Serialize;

use erasuresim_core::analysis::{delta_budget, marginal_waste, rate, rate_lower_bound, waste, AnalysisError};
use erasuresim_core::search::{pattern_count, search_subtree, split_roots, SearchConfig, SearchError, SearchReport};
use erasuresim_core::{run, HarnessError, NoiseSource, PartyInput, Protocol, RunConfig, SchemeKind};

/// Reads the pattern limit override from `ERASURESIM_MAX_PATTERNS`.
pub fn pattern_limit_from_env(default: u128) -> u128 {
    std::env::var("ERASURESIM_MAX_PATTERNS").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(default)
}

/// [`erasuresim_core::search::exhaustive_noise_search`], fanned out over the
/// first erasure position.
pub fn par_search(cfg: &SearchConfig) -> Result<SearchReport, SearchError> {
    let required = pattern_count(cfg.horizon, cfg.budget);
    if required > cfg.limit {
        return Err(SearchError::LimitExceeded { required, limit: cfg.limit });
    }
    let (mut report, roots) = split_roots(cfg);
    let parts: Vec<SearchReport> = roots.par_iter().map(|&p| search_subtree(cfg, &[p])).collect();
    for part in parts {
        report.merge(part);
    }
    Ok(report)
}

/// The search repeated for every pair of `input_bits`-bit inputs. The limit
/// applies to the total.
pub fn search_all_inputs(template: &SearchConfig, input_bits: usize) -> Result<SearchReport, SearchError> {
    let pairs: Vec<(PartyInput, PartyInput)> =
        PartyInput::all(input_bits).flat_map(|x| PartyInput::all(input_bits).map(move |y| (x.clone(), y))).collect();
    let required = pattern_count(template.horizon, template.budget) * pairs.len() as u128;
    if required > template.limit {
        return Err(SearchError::LimitExceeded { required, limit: template.limit });
    }
    let heads: Vec<(SearchConfig, SearchReport, Vec<u64>)> = pairs
        .into_par_iter()
        .map(|(x, y)| {
            let cfg = SearchConfig { x, y, ..template.clone() };
            let (head, roots) = split_roots(&cfg);
            (cfg, head, roots)
        })
        .collect();
    let tasks: Vec<(&SearchConfig, u64)> =
        heads.iter().flat_map(|(c, _, roots)| roots.iter().map(move |&p| (c, p))).collect();
    let parts: Vec<SearchReport> = tasks.par_iter().map(|&(c, p)| search_subtree(c, &[p])).collect();
    let mut report = SearchReport::default();
    for (_, head, _) in &heads {
        report.merge(head.clone());
    }
    for part in parts {
        report.merge(part);
    }
    Ok(report)
}

/// One sweep point: an erasure budget, optionally derived from a noise
/// fraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub delta: Option<f64>,
    pub t: u64,
}

impl SweepPoint {
    pub fn budgets(t_max: u64) -> Vec<SweepPoint> {
        (0..=t_max).map(|t| SweepPoint { delta: None, t }).collect()
    }

    pub fn deltas(n: u64, deltas: &[f64]) -> Result<Vec<SweepPoint>, AnalysisError> {
        deltas.iter().map(|&d| Ok(SweepPoint { delta: Some(d), t: delta_budget(n, d)? })).collect()
    }
}

/// A CSV row. Column order is the output contract.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub scheme: SchemeKind,
    pub n_bits: u64,
    pub delta: Option<f64>,
    pub t: u64,
    pub transmissions: u64,
    pub cc_sym: u64,
    pub cc_bits: u64,
    pub rc_timesteps: u64,
    pub erasures_counted: u64,
    pub rate: f64,
    pub rate_bound: Option<f64>,
    pub waste: Option<f64>,
    pub marginal_waste: Option<f64>,
    pub waste_analytic: Option<f64>,
    pub correct: bool,
}

pub const SWEEP_HEADER: &str = "scheme,n_bits,delta,t,transmissions,cc_sym,cc_bits,rc_timesteps,erasures_counted,rate,rate_bound,waste,marginal_waste,waste_analytic,correct";

/// Channel bits the scheme's worst case predicts for `t` erasures:
/// `N + 2T` symbols for the fixed schemes, `N + T` for AGS.
pub fn analytic_cc_bits(scheme: SchemeKind, n: u64, t: u64) -> u64 {
    let symbols = if scheme.is_ags() { n + t } else { n + 2 * t };
    symbols * scheme.bits_per_symbol()
}

/// Runs every point against the greedy adversary.
pub fn sweep(
    scheme: SchemeKind,
    protocol: &Protocol,
    x: &PartyInput,
    y: &PartyInput,
    points: &[SweepPoint],
) -> Result<Vec<SweepRow>, HarnessError> {
    let n = protocol.len() as u64;
    let cfg = RunConfig::new(scheme, protocol.clone(), x.clone(), y.clone()).without_trace();
    let base = run(&cfg)?.metrics.cc_bits;
    points
        .par_iter()
        .map(|p| {
            let out = run(&cfg.clone().with_noise(NoiseSource::Greedy { budget: p.t }))?;
            let m = out.metrics;
            let t = m.erasures_counted;
            Ok(SweepRow {
                scheme,
                n_bits: n,
                delta: p.delta,
                t: p.t,
                transmissions: m.transmissions,
                cc_sym: m.cc_sym,
                cc_bits: m.cc_bits,
                rc_timesteps: m.rc_timesteps,
                erasures_counted: t,
                rate: rate(n, m.cc_bits),
                rate_bound: p.delta.map(rate_lower_bound),
                waste: waste(m.cc_bits, t),
                marginal_waste: marginal_waste(m.cc_bits, base, t),
                waste_analytic: (t > 0).then(|| analytic_cc_bits(scheme, n, t) as f64 / t as f64),
                correct: out.outputs_correct(),
            })
        })
        .collect()
}

pub fn write_csv(w: impl std::io::Write, rows: &[SweepRow]) -> Result<(), csv::Error> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(SWEEP_HEADER.split(','))?;
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use erasuresim_core::search::exhaustive_noise_search;

    fn cfg(scheme: SchemeKind, budget: u32, horizon: u64) -> SearchConfig {
        SearchConfig::new(
            scheme,
            Protocol::string_exchange(4).unwrap(),
            "10".parse().unwrap(),
            "01".parse().unwrap(),
            budget,
            horizon,
        )
    }

    #[test]
    fn parallel_search_matches_sequential() {
        for scheme in SchemeKind::ALL {
            let c = cfg(scheme, 2, 16);
            let seq = exhaustive_noise_search(&c).unwrap();
            let par = par_search(&c).unwrap();
            assert_eq!(par.patterns_covered, seq.patterns_covered);
            assert_eq!(par.runs, seq.runs);
            assert_eq!(par.cost_excess, seq.cost_excess);
            assert_eq!(par.failures.len(), seq.failures.len());
            assert_eq!(
                (par.worst_transmissions, par.worst_cc_sym, par.worst_rc_timesteps),
                (seq.worst_transmissions, seq.worst_cc_sym, seq.worst_rc_timesteps)
            );
            assert_eq!(par.worst_by_erasures, seq.worst_by_erasures);
        }
    }

    #[test]
    fn all_inputs_total() {
        let r = search_all_inputs(&cfg(SchemeKind::Basic4, 1, 8), 2).unwrap();
        assert_eq!(r.patterns_covered, 16 * pattern_count(8, 1));
        assert!(r.ok());
        let mut c = cfg(SchemeKind::Basic4, 1, 8);
        c.limit = 100;
        assert!(matches!(search_all_inputs(&c, 2), Err(SearchError::LimitExceeded { required: 144, .. })));
    }

    #[test]
    fn basic4_sweep_is_exact() {
        let p = Protocol::string_exchange(20).unwrap();
        let (x, y) = (PartyInput::default(), PartyInput::default());
        let rows = sweep(SchemeKind::Basic4, &p, &x, &y, &SweepPoint::budgets(6)).unwrap();
        for (t, r) in rows.iter().enumerate() {
            assert_eq!(r.t, t as u64);
            assert_eq!(r.transmissions, 20 + 2 * t as u64);
            assert!(r.correct);
        }
        assert_eq!(rows[0].waste, None);
        assert_eq!(rows[3].waste_analytic, Some((40.0 + 12.0) / 3.0));
    }

    #[test]
    fn csv_layout() {
        let p = Protocol::string_exchange(4).unwrap();
        let pts = SweepPoint::deltas(4, &[0.0, 0.25]).unwrap();
        let rows = sweep(SchemeKind::Basic4, &p, &PartyInput::default(), &PartyInput::default(), &pts).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines[1], "basic4,4,0.0,0,4,4,8,5,0,0.5,0.5,,,,true");
        assert!(SweepPoint::deltas(4, &[0.5]).is_err());
    }

    #[test]
    fn env_limit() {
        assert_eq!(
            pattern_limit_from_env(7),
            std::env::var("ERASURESIM_MAX_PATTERNS").map_or(7, |v| v.parse().unwrap_or(7))
        );
    }
}
