//! Offline invariant checker for run traces.
//!
//! Round `i` starts with the snapshot taken after timestep `2(i-1)`; round 1
//! starts from the initial states. Every check is evaluated on every round it
//! applies to, and reports the first round that violates it.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ags::{AgsAlice, AgsBob, CostLedger, Phase};
use crate::bits::Transcript;
use crate::channel::ChannelToken;
use crate::fixed::{FixedAlice, FixedBob};
use crate::protocol::Role;
use crate::sim::{Event, RunTrace, SchemeKind, Snapshot, StepRecord};

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckResult {
    pub id: String,
    pub description: String,
    pub passed: bool,
    /// Rounds (or steps) the check was evaluated on.
    pub evaluated: u64,
    pub first_violation_round: Option<u32>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            write!(f, "{status} {:<24} {:>6} evaluated  {}", c.id, c.evaluated, c.description)?;
            if let Some(r) = c.first_violation_round {
                write!(f, "  [first violation: round {r}]")?;
            }
            if let Some(d) = &c.detail {
                write!(f, "  {d}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct Check {
    result: CheckResult,
}

impl Check {
    fn new(id: &str, description: &str) -> Self {
        Check {
            result: CheckResult {
                id: id.into(),
                description: description.into(),
                passed: true,
                evaluated: 0,
                first_violation_round: None,
                detail: None,
            },
        }
    }

    fn eval(&mut self, round: u32, ok: bool, detail: impl FnOnce() -> String) {
        self.result.evaluated += 1;
        if !ok && self.result.passed {
            self.result.passed = false;
            self.result.first_violation_round = Some(round);
            self.result.detail = Some(detail());
        }
    }

    fn done(self) -> CheckResult {
        self.result
    }
}

/// The state both parties start round `i` in, with the ledger at that point.
#[derive(Clone)]
struct Start {
    r_a: u32,
    r_b: u32,
    t_a: Transcript,
    t_b: Transcript,
    phase: Option<Phase>,
    ledger: CostLedger,
}

impl Start {
    fn of(snap: &Snapshot, ledger: CostLedger) -> Self {
        let (r_a, r_b) = snap.rounds();
        let (t_a, t_b) = snap.transcripts();
        let phase = match snap {
            Snapshot::Ags { bob, .. } => Some(bob.phase),
            Snapshot::Fixed { .. } => None,
        };
        Start { r_a, r_b, t_a: t_a.clone(), t_b: t_b.clone(), phase, ledger }
    }
}

struct Ctx<'a> {
    trace: &'a RunTrace,
    reference: &'a Transcript,
    n: usize,
    /// `starts[i]` is the start of round `i`; index 0 is unused.
    starts: Vec<Start>,
    /// Main-run records, settle rounds excluded.
    main: &'a [StepRecord],
    settle: &'a [StepRecord],
    t_a: Option<u32>,
    t_b: Option<u32>,
    erasures: u64,
}

impl<'a> Ctx<'a> {
    fn new(trace: &'a RunTrace) -> Self {
        let split = trace.records.iter().position(|r| r.settle).unwrap_or(trace.records.len());
        let (main, settle) = trace.records.split_at(split);
        let initial = if trace.header.scheme.is_ags() {
            Snapshot::Ags { alice: AgsAlice::new(), bob: AgsBob::new() }
        } else {
            Snapshot::Fixed { alice: FixedAlice::new(), bob: FixedBob::new() }
        };
        let mut starts = alloc::vec![Start::of(&initial, CostLedger::default()); 2];
        starts.extend(main.iter().filter(|r| r.timestep % 2 == 0).map(|r| Start::of(&r.state, r.ledger)));
        let event_round = |e: Event| main.iter().find(|r| r.events.contains(&e)).map(StepRecord::round);
        Ctx {
            trace,
            reference: &trace.header.reference,
            n: trace.header.n_bits,
            starts,
            main,
            settle,
            t_a: event_round(Event::AliceTerminated),
            t_b: event_round(Event::BobTerminated),
            erasures: main.iter().filter(|r| r.received.is_erasure()).count() as u64,
        }
    }

    /// Rounds whose start state is known.
    fn rounds_with_start(&self) -> core::ops::RangeInclusive<u32> {
        1..=(self.starts.len() - 1) as u32
    }

    fn start(&self, i: u32) -> Option<&Start> {
        self.starts.get(i as usize).filter(|_| i >= 1)
    }

    fn round_erased(&self, i: u32) -> bool {
        self.main.iter().filter(|r| r.round() == i).any(StepRecord::erased)
    }

    fn logical_erasures_in(&self, i: u32) -> u64 {
        self.main.iter().filter(|r| r.round() == i && r.received.is_erasure()).count() as u64
    }

    /// Bob's termination-phase answers received as erasures before round `i`.
    fn erased_final_answers_before(&self, i: u32) -> u64 {
        self.main
            .iter()
            .filter(|r| r.round() < i && r.sender == Role::Bob && r.sent.is_symbol() && r.received.is_erasure())
            .filter(|r| matches!(&r.state, Snapshot::Ags { bob, .. } if bob.phase == Phase::Termination))
            .count() as u64
    }

    fn transmissions(&self) -> u64 {
        self.main.iter().filter(|r| !r.injected && r.sent.is_symbol()).count() as u64
    }

    fn bits(&self, from: usize, to: usize) -> Option<&[bool]> {
        self.reference.bits().get(from..to)
    }
}

/// Evaluates every invariant applicable to the trace's scheme.
pub fn verify_trace(trace: &RunTrace) -> VerifyReport {
    let ctx = Ctx::new(trace);
    let mut checks = alloc::vec![well_formed(&ctx), ledger_monotone(&ctx), ledger_consistent(&ctx)];
    checks.push(step_growth(&ctx));
    checks.push(sync(&ctx));
    if trace.header.scheme.is_ags() {
        checks.push(ags_cost(&ctx));
        checks.push(ags_cost_adjusted(&ctx));
        checks.push(ags_progress(&ctx));
        checks.push(ags_simulating_rate(&ctx));
        checks.push(ags_termination_stall(&ctx));
        checks.push(ags_silent_after_exit(&ctx));
        checks.extend(ags_bounds(&ctx));
        checks.push(semi_termination(&ctx));
    } else {
        checks.push(fixed_bob_final(&ctx));
        checks.push(fixed_clean_progress(&ctx));
        checks.push(fixed_bounds(&ctx));
    }
    VerifyReport { checks }
}

fn well_formed(ctx: &Ctx) -> CheckResult {
    let mut c = Check::new("trace-well-formed", "timesteps consecutive from 1, one sender each, erasures only erase");
    let width = ctx.trace.header.scheme.layer().width() as u64;
    if ctx.trace.records.is_empty() {
        c.eval(0, false, || "empty trace".into());
    }
    let mut seen_settle = false;
    for (k, r) in ctx.trace.records.iter().enumerate() {
        let round = r.round();
        c.eval(round, r.timestep == k as u64 + 1, || format!("timestep {} at index {k}", r.timestep));
        c.eval(round, r.sender == Role::of_timestep(r.timestep), || {
            format!("sender {} at timestep {}", r.sender, r.timestep)
        });
        c.eval(round, !r.sent.is_erasure(), || "erasure mark sent".into());
        c.eval(round, r.received == r.sent || r.received.is_erasure(), || {
            format!("sent {} but received {}", r.sent, r.received)
        });
        c.eval(round, r.erased() || r.received == r.sent, || "unerased token changed".into());
        let lo = (r.timestep - 1) * width;
        c.eval(round, r.erased_slots.iter().all(|&t| t > lo && t <= lo + width), || {
            "erased slot outside its timestep".into()
        });
        c.eval(round, !seen_settle || r.settle, || "main-run record after settle rounds".into());
        seen_settle |= r.settle;
        if r.settle {
            c.eval(round, r.erased_slots.is_empty(), || "erasure in a settle round".into());
        }
        if !ctx.trace.header.scheme.is_ags() && r.sender == Role::Alice && !r.injected {
            c.eval(round, r.sent.is_symbol(), || "active Alice was silent".into());
        }
        if !ctx.trace.header.scheme.is_ags() && r.sender == Role::Bob {
            c.eval(round, r.sent.is_symbol(), || "active Bob was silent".into());
        }
    }
    c.done()
}

fn ledger_monotone(ctx: &Ctx) -> CheckResult {
    let mut c =
        Check::new("ledger-monotone", "cost counters never decrease and grow by at most one per party per step");
    let mut prev = CostLedger::default();
    for r in ctx.main {
        let l = r.ledger;
        let ok = l.c_a >= prev.c_a
            && l.c_b >= prev.c_b
            && l.c_ch >= prev.c_ch
            && l.c_a - prev.c_a <= u64::from(r.sender == Role::Alice)
            && l.c_b - prev.c_b <= u64::from(r.sender == Role::Bob)
            && l.c_ch - prev.c_ch <= 1;
        c.eval(r.round(), ok, || format!("ledger {prev:?} -> {l:?} at timestep {}", r.timestep));
        prev = l;
    }
    c.done()
}

fn ledger_consistent(ctx: &Ctx) -> CheckResult {
    let mut c = Check::new("ledger-consistent", "cost counters match the tokens sent and erasures received");
    let mut want = CostLedger::default();
    for r in ctx.main {
        want.record(r.sender, r.sent, r.received);
        c.eval(r.round(), r.ledger == want, || format!("recorded {:?}, recomputed {want:?}", r.ledger));
    }
    c.done()
}

fn step_growth(ctx: &Ctx) -> CheckResult {
    let mut c =
        Check::new("round-step", "per round each party keeps (r, T) or advances by one round and two bits; |T| = 2r");
    let grows = |r0: u32, t0: &Transcript, r1: u32, t1: &Transcript| {
        (r1 == r0 && t1 == t0) || (r1 == r0 + 1 && t1.len() == t0.len() + 2 && t0.is_prefix_of(t1))
    };
    for i in ctx.rounds_with_start() {
        let s = ctx.start(i).expect("in range");
        c.eval(i, s.t_a.len() == 2 * s.r_a as usize && s.t_b.len() == 2 * s.r_b as usize, || {
            format!("|T^A|={} r_A={} |T^B|={} r_B={}", s.t_a.len(), s.r_a, s.t_b.len(), s.r_b)
        });
        if let Some(n) = ctx.start(i + 1) {
            c.eval(i, grows(s.r_a, &s.t_a, n.r_a, &n.t_a), || format!("Alice r {} -> {}", s.r_a, n.r_a));
            c.eval(i, grows(s.r_b, &s.t_b, n.r_b, &n.t_b), || format!("Bob r {} -> {}", s.r_b, n.r_b));
        }
    }
    c.done()
}

fn sync(ctx: &Ctx) -> CheckResult {
    let mut c = Check::new(
        "transcript-sync",
        "Bob equals Alice or leads by exactly the next two correct bits; both prefixes of the reference",
    );
    let last = ctx.t_a.map_or(u32::MAX, |t| t + 1);
    for i in ctx.rounds_with_start().filter(|&i| i <= last) {
        let s = ctx.start(i).expect("in range");
        let la = s.t_a.len();
        let even = s.r_b == s.r_a && s.t_b == s.t_a;
        let ahead = s.r_b == s.r_a + 1
            && s.t_a.is_prefix_of(&s.t_b)
            && s.t_b.len() == la + 2
            && ctx.bits(la, la + 2) == s.t_b.bits().get(la..);
        let prefixes = s.t_a.is_prefix_of(ctx.reference) && s.t_b.is_prefix_of(ctx.reference);
        c.eval(i, (even || ahead) && prefixes, || {
            format!("r_A={} T^A={} r_B={} T^B={} ref={}", s.r_a, s.t_a, s.r_b, s.t_b, ctx.reference)
        });
    }
    c.done()
}

fn fixed_bob_final(ctx: &Ctx) -> CheckResult {
    let mut c = Check::new("bob-final-after-alice", "after Alice exits Bob holds the full transcript until he exits");
    let (Some(t_a), Some(t_b)) = (ctx.t_a, ctx.t_b) else {
        c.eval(0, false, || "missing termination event".into());
        return c.done();
    };
    for i in (t_a + 1)..=t_b {
        match ctx.start(i) {
            Some(s) => c.eval(i, s.r_b as usize == ctx.n / 2 && &s.t_b == ctx.reference, || {
                format!("r_B={} T^B={}", s.r_b, s.t_b)
            }),
            None => c.eval(i, false, || "missing round start".into()),
        }
    }
    c.done()
}

fn fixed_clean_progress(ctx: &Ctx) -> CheckResult {
    let mut c = Check::new("clean-round-progress", "an erasure-free round before Alice exits advances r_A by one");
    let t_a = ctx.t_a.unwrap_or(0);
    for i in 1..=t_a {
        if ctx.round_erased(i) {
            continue;
        }
        if let (Some(s), Some(n)) = (ctx.start(i), ctx.start(i + 1)) {
            c.eval(i, n.r_a == s.r_a + 1, || format!("r_A {} -> {}", s.r_a, n.r_a));
        }
    }
    c.done()
}

fn fixed_bounds(ctx: &Ctx) -> CheckResult {
    let mut c = Check::new("fixed-bounds", "both outputs equal the reference and transmissions <= N + 2T");
    let last = ctx.main.last();
    let (out_a, out_b) = last.map_or((None, None), |r| {
        let (a, b) = r.state.transcripts();
        (Some(a), Some(b))
    });
    let round = last.map_or(0, StepRecord::round);
    c.eval(round, out_a == Some(ctx.reference) && out_b == Some(ctx.reference), || {
        format!("outputs {out_a:?} / {out_b:?}, reference {}", ctx.reference)
    });
    let tx = ctx.transmissions();
    let bound = ctx.n as u64 + 2 * ctx.erasures;
    c.eval(round, tx <= bound, || format!("transmissions {tx} > {bound}"));
    c.eval(round, ctx.t_b.is_some() && ctx.t_a.is_some(), || "a party never exited".into());
    c.done()
}

fn ags_cost(ctx: &Ctx) -> CheckResult {
    let mut c = Check::new("ags-cost-ledger", "|T^B| + c_ch covers c_A + c_B, plus one when Bob leads");
    let last = ctx.t_a.map_or(u32::MAX, |t| t + 1);
    for i in ctx.rounds_with_start().filter(|&i| i <= last) {
        let s = ctx.start(i).expect("in range");
        let have = s.t_b.len() as u64 + s.ledger.c_ch;
        let need = s.ledger.cc_sym() + u64::from(s.r_b == s.r_a + 1);
        c.eval(i, have >= need, || format!("|T^B| + c_ch = {have} < {need} ({:?})", s.ledger));
    }
    c.done()
}

fn ags_cost_adjusted(ctx: &Ctx) -> CheckResult {
    let mut c = Check::new(
        "ags-cost-ledger-adjusted",
        "the cost ledger holds once each erased termination-phase answer is charged twice",
    );
    let last = ctx.t_a.map_or(u32::MAX, |t| t + 1);
    for i in ctx.rounds_with_start().filter(|&i| i <= last) {
        let s = ctx.start(i).expect("in range");
        let e = ctx.erased_final_answers_before(i);
        let have = s.t_b.len() as u64 + s.ledger.c_ch + e;
        let need = s.ledger.cc_sym() + u64::from(s.r_b == s.r_a + 1);
        c.eval(i, have >= need, || format!("|T^B| + c_ch + E = {have} < {need} ({:?})", s.ledger));
    }
    c.done()
}

fn ags_progress(ctx: &Ctx) -> CheckResult {
    let mut c = Check::new("ags-two-round-progress", "two erasure-free rounds with Alice active advance r_A");
    let t_a = ctx.t_a.unwrap_or(0);
    for i in 1..t_a {
        if ctx.round_erased(i) || ctx.round_erased(i + 1) {
            continue;
        }
        if let (Some(s), Some(n)) = (ctx.start(i), ctx.start(i + 2)) {
            c.eval(i, n.r_a > s.r_a, || format!("r_A {} -> {} over rounds {i},{}", s.r_a, n.r_a, i + 1));
        }
    }
    c.done()
}

fn ags_simulating_rate(ctx: &Ctx) -> CheckResult {
    let mut c = Check::new("ags-simulating-rate", "while Bob simulates, r_A >= (i - 1) - c_ch");
    let last = ctx.t_a.map_or(u32::MAX, |t| t + 1);
    for i in ctx.rounds_with_start().filter(|&i| i <= last) {
        let s = ctx.start(i).expect("in range");
        if s.phase != Some(Phase::Simulating) {
            continue;
        }
        let floor = i64::from(i) - 1 - s.ledger.c_ch as i64;
        c.eval(i, i64::from(s.r_a) >= floor, || format!("r_A = {} < {floor}", s.r_a));
    }
    c.done()
}

fn ags_termination_stall(ctx: &Ctx) -> CheckResult {
    let mut c = Check::new(
        "ags-termination-stall",
        "in Bob's termination phase each erasure stalls r_A for at most two rounds",
    );
    let t_a = ctx.t_a.unwrap_or(0);
    let Some(switch) = ctx.main.iter().find(|r| r.events.contains(&Event::TerminationPhase)).map(StepRecord::round)
    else {
        return c.done();
    };
    let mut stalls = 0u64;
    let mut erasures = ctx.logical_erasures_in(switch);
    for i in (switch + 1)..=t_a {
        erasures += ctx.logical_erasures_in(i);
        if let (Some(s), Some(n)) = (ctx.start(i), ctx.start(i + 1)) {
            if n.r_a <= s.r_a {
                stalls += 1;
            }
        }
        c.eval(i, stalls <= 2 * erasures, || format!("{stalls} stalled rounds after {erasures} erasures"));
    }
    c.done()
}

fn ags_silent_after_exit(ctx: &Ctx) -> CheckResult {
    let mut c = Check::new("ags-silent-after-exit", "after Alice exits both hold N/2 rounds and Bob is silent");
    for r in ctx.settle {
        let (r_a, r_b) = r.state.rounds();
        let half = (ctx.n / 2) as u32;
        c.eval(r.round(), r_a == half && r_b == half, || format!("r_A={r_a} r_B={r_b}"));
        if r.sender == Role::Bob {
            c.eval(r.round(), r.sent.is_silence(), || format!("Bob sent {}", r.sent));
        }
    }
    c.done()
}

fn ags_bounds(ctx: &Ctx) -> [CheckResult; 4] {
    let mut outputs = Check::new("ags-outputs", "both outputs equal the reference");
    let mut cc = Check::new("ags-cc-bound", "CC_sym <= N + T");
    let mut cc_adj = Check::new("ags-cc-bound-adjusted", "CC_sym <= N + T + E, E erased termination-phase answers");
    let mut rc = Check::new("ags-rc-bound", "RC <= N + 4T");
    let Some(t_a) = ctx.t_a else {
        for c in [&mut outputs, &mut cc, &mut cc_adj, &mut rc] {
            c.eval(0, false, || "Alice never exited".into());
        }
        return [outputs.done(), cc.done(), cc_adj.done(), rc.done()];
    };
    let (a, b) = ctx.main.last().map(|r| r.state.transcripts()).expect("Alice exited so records exist");
    outputs.eval(t_a, a == ctx.reference && b == ctx.reference, || {
        format!("outputs {a} / {b}, reference {}", ctx.reference)
    });
    let n = ctx.n as u64;
    let sent = ctx.transmissions();
    let e = ctx.erased_final_answers_before(t_a + 1);
    cc.eval(t_a, sent <= n + ctx.erasures, || format!("CC_sym {sent} > {}", n + ctx.erasures));
    cc_adj.eval(t_a, sent <= n + ctx.erasures + e, || format!("CC_sym {sent} > {}", n + ctx.erasures + e));
    let rounds = 2 * u64::from(t_a);
    rc.eval(t_a, rounds <= n + 4 * ctx.erasures, || format!("RC {rounds} > {}", n + 4 * ctx.erasures));
    [outputs.done(), cc.done(), cc_adj.done(), rc.done()]
}

fn semi_termination(ctx: &Ctx) -> CheckResult {
    let mut c = Check::new("semi-termination", "noise-free settle rounds keep both outputs and Bob silent");
    let k = ctx.trace.header.settle_rounds;
    let round = ctx.t_a.unwrap_or(0) + 1;
    c.eval(round, k >= 1 && ctx.settle.len() as u32 == 2 * k, || {
        format!("{} settle records for {k} settle rounds", ctx.settle.len())
    });
    for r in ctx.settle {
        let (a, b) = r.state.transcripts();
        let phase_done =
            matches!(&r.state, Snapshot::Ags { bob, alice } if bob.phase == Phase::Termination && alice.terminated);
        c.eval(r.round(), a == ctx.reference && b == ctx.reference && phase_done, || "state moved after exit".into());
        c.eval(r.round(), r.sent == ChannelToken::Silence, || format!("{} sent {}", r.sender, r.sent));
    }
    c.done()
}

/// The scheme-specific check identifiers [`verify_trace`] reports.
pub fn check_ids(scheme: SchemeKind) -> &'static [&'static str] {
    if scheme.is_ags() {
        &[
            "trace-well-formed",
            "ledger-monotone",
            "ledger-consistent",
            "round-step",
            "transcript-sync",
            "ags-cost-ledger",
            "ags-cost-ledger-adjusted",
            "ags-two-round-progress",
            "ags-simulating-rate",
            "ags-termination-stall",
            "ags-silent-after-exit",
            "ags-outputs",
            "ags-cc-bound",
            "ags-cc-bound-adjusted",
            "ags-rc-bound",
            "semi-termination",
        ]
    } else {
        &[
            "trace-well-formed",
            "ledger-monotone",
            "ledger-consistent",
            "round-step",
            "transcript-sync",
            "bob-final-after-alice",
            "clean-round-progress",
            "fixed-bounds",
        ]
    }
}

/// Checks that fail exactly when an erased termination-phase answer costs
/// Alice a resend; their `-adjusted` counterparts charge for it.
pub const UNADJUSTED_COST_CHECKS: &[&str] = &["ags-cost-ledger", "ags-cc-bound"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Protocol;
    use crate::sim::{run, RunConfig};

    fn trace(scheme: SchemeKind, pattern: &[u64]) -> RunTrace {
        let cfg =
            RunConfig::new(scheme, Protocol::string_exchange(4).unwrap(), "10".parse().unwrap(), "01".parse().unwrap())
                .with_pattern(pattern.iter().copied());
        run(&cfg).unwrap().trace
    }

    #[test]
    fn clean_traces_pass() {
        for scheme in SchemeKind::ALL {
            for pattern in [&[][..], &[2], &[1, 3], &[3, 6, 7]] {
                let report = verify_trace(&trace(scheme, pattern));
                assert!(report.passed(), "{scheme} {pattern:?}\n{report}");
                let ids: Vec<_> = report.checks.iter().map(|c| c.id.as_str()).collect();
                assert_eq!(ids, check_ids(scheme));
            }
        }
    }

    #[test]
    fn truncated_bob_transcript_fails_at_round_two() {
        for scheme in [SchemeKind::Basic4, SchemeKind::Ags4] {
            let mut t = trace(scheme, &[]);
            let rec = t.records.iter_mut().find(|r| r.timestep == 2).unwrap();
            match &mut rec.state {
                Snapshot::Fixed { bob, .. } => bob.transcript.truncate(1),
                Snapshot::Ags { bob, .. } => bob.transcript.truncate(1),
            }
            let report = verify_trace(&t);
            let sync = report.get("transcript-sync").unwrap();
            assert!(!sync.passed);
            assert_eq!(sync.first_violation_round, Some(2), "{scheme}\n{report}");
        }
    }

    #[test]
    fn decremented_erasure_count_fails_monotonicity() {
        let mut t = trace(SchemeKind::Ags4, &[3]);
        let last = t.records.iter().filter(|r| !r.settle).count() - 1;
        t.records[last].ledger.c_ch -= 1;
        let report = verify_trace(&t);
        assert!(!report.get("ledger-monotone").unwrap().passed, "{report}");
        assert!(!report.passed());
    }

    #[test]
    fn erased_final_answer_breaks_only_unadjusted_cost() {
        let report = verify_trace(&trace(SchemeKind::Ags4, &[4]));
        let failed: Vec<_> = report.failures().map(|c| c.id.as_str()).collect();
        assert_eq!(failed, UNADJUSTED_COST_CHECKS, "{report}");
        assert_eq!(report.get("ags-cost-ledger").unwrap().first_violation_round, Some(5));
    }

    #[test]
    fn empty_trace_fails() {
        let mut t = trace(SchemeKind::Basic4, &[]);
        t.records.clear();
        assert!(!verify_trace(&t).passed());
    }
}
