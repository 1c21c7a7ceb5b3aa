//! `erasuresim` command-line driver.
//!
//! Exit codes: 0 success, 1 an invariant, bound or correctness check failed,
//! 2 usage or IO error.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use erasuresim::net::{self, NetError};
use erasuresim::par::{self, SweepPoint};
use erasuresim::specs::{parse_protocol, NoiseSpec, SpecError};
use erasuresim::trace_io::{read_trace, write_trace};
use erasuresim_core::analysis::bound_violations;
use erasuresim_core::search::{SearchConfig, SearchReport, DEFAULT_PATTERN_LIMIT};
use erasuresim_core::{run, search, verify_trace, HarnessError, NoiseSource, PartyInput, Role, RunConfig, SchemeKind};

#[derive(Parser)]
#[command(name = "erasuresim", version, about = "Interactive coding over erasure channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    Alice,
    Bob,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one run, verify its trace and check the scheme's bounds.
    Run {
        #[arg(long)]
        scheme: SchemeKind,
        #[arg(long)]
        protocol: String,
        #[arg(long, default_value = "")]
        x: PartyInput,
        #[arg(long, default_value = "")]
        y: PartyInput,
        #[arg(long, default_value = "none")]
        noise: String,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
        /// Write the JSON-lines trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        max_rounds: Option<u32>,
        /// Noise-free rounds run after Alice exits in AGS schemes.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
        settle: u32,
    },
    /// Greedy-adversary sweep over erasure budgets or noise fractions, as CSV.
    Sweep {
        #[arg(long, default_value = "basic4")]
        scheme: SchemeKind,
        /// Defaults to builtin:string-exchange:N.
        #[arg(long)]
        protocol: Option<String>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value = "")]
        x: PartyInput,
        #[arg(long, default_value = "")]
        y: PartyInput,
        /// Sweep T = 0..=T_MAX.
        #[arg(long, conflicts_with = "deltas", required_unless_present = "deltas")]
        t_max: Option<u64>,
        /// Comma-separated noise fractions in [0, 0.5).
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
    },
    /// Re-check a JSON-lines trace offline.
    Verify { trace: PathBuf },
    /// Exhaustive worst-case search over all erasure patterns up to a budget.
    Search {
        #[arg(long)]
        scheme: SchemeKind,
        #[arg(long)]
        protocol: String,
        #[arg(long, default_value = "")]
        x: PartyInput,
        #[arg(long, default_value = "")]
        y: PartyInput,
        /// Search every input pair of this many bits instead of --x/--y.
        #[arg(long)]
        all_inputs: Option<usize>,
        #[arg(long)]
        budget: u32,
        #[arg(long)]
        horizon: u64,
        /// Overrides ERASURESIM_MAX_PATTERNS.
        #[arg(long)]
        limit: Option<u128>,
    },
    /// Build and replay a pattern that makes Bob exit `gap` rounds after Alice.
    Unsync {
        #[arg(long)]
        protocol: String,
        #[arg(long, default_value = "")]
        x: PartyInput,
        #[arg(long, default_value = "")]
        y: PartyInput,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        gap: u32,
    },
    /// Run one party against a relay.
    Serve {
        #[arg(long, value_enum)]
        role: RoleArg,
        #[arg(long)]
        scheme: SchemeKind,
        #[arg(long)]
        protocol: String,
        #[arg(long, default_value = "")]
        input: PartyInput,
        #[arg(long)]
        connect: String,
        #[arg(long, default_value_t = 1_000_000)]
        max_rounds: u32,
    },
    /// Accept Alice on --a and Bob on --b and forward frames, erasing per --noise.
    Relay {
        #[arg(long)]
        a: u16,
        #[arg(long)]
        b: u16,
        #[arg(long, default_value = "none")]
        noise: String,
        /// Sets the frame layout and the greedy adversary's shape.
        #[arg(long, default_value = "basic4")]
        scheme: SchemeKind,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

enum Failure {
    Check,
    Usage(String),
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn check(ok: bool) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn emit(value: &serde_json::Value) -> Outcome {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn noise_source(spec: &str) -> Result<NoiseSource, Failure> {
    Ok(spec.parse::<NoiseSpec>()?.source()?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Run { scheme, protocol, x, y, noise, out, trace, max_rounds, settle } => {
            let mut cfg = RunConfig::new(scheme, parse_protocol(&protocol)?, x, y).with_noise(noise_source(&noise)?);
            cfg.max_rounds = max_rounds;
            cfg.settle_rounds = settle;
            cmd_run(&cfg, out, trace)
        }
        Command::Sweep { scheme, protocol, n, x, y, t_max, deltas } => {
            let protocol = parse_protocol(&protocol.unwrap_or_else(|| format!("builtin:string-exchange:{n}")))?;
            let points = match (t_max, deltas) {
                (Some(t), _) => SweepPoint::budgets(t),
                (None, Some(d)) => {
                    SweepPoint::deltas(protocol.len() as u64, &d).map_err(|e| Failure::Usage(e.to_string()))?
                }
                (None, None) => unreachable!("clap requires one"),
            };
            let rows = par::sweep(scheme, &protocol, &x, &y, &points).map_err(|e| {
                eprintln!("error: {e}");
                Failure::Check
            })?;
            par::write_csv(io::stdout().lock(), &rows).map_err(|e| Failure::Usage(e.to_string()))?;
            check(rows.iter().all(|r| r.correct))
        }
        Command::Verify { trace } => {
            let file = File::open(&trace).map_err(|e| Failure::Usage(format!("{}: {e}", trace.display())))?;
            let t =
                read_trace(BufReader::new(file)).map_err(|e| Failure::Usage(format!("{}: {e}", trace.display())))?;
            let report = verify_trace(&t);
            print!("{report}");
            check(report.passed())
        }
        Command::Search { scheme, protocol, x, y, all_inputs, budget, horizon, limit } => {
            let mut cfg = SearchConfig::new(scheme, parse_protocol(&protocol)?, x, y, budget, horizon);
            cfg.limit = limit.unwrap_or_else(|| par::pattern_limit_from_env(DEFAULT_PATTERN_LIMIT));
            let report = match all_inputs {
                Some(bits) => par::search_all_inputs(&cfg, bits),
                None => par::par_search(&cfg),
            }
            .map_err(|e| Failure::Usage(e.to_string()))?;
            emit(&search_json(&report))?;
            check(report.ok() && report.cost_excess == 0)
        }
        Command::Unsync { protocol, x, y, gap } => {
            let protocol = parse_protocol(&protocol)?;
            let pattern = search::unsync_termination_demo(SchemeKind::Basic4, &protocol, &x, &y, gap)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let out =
                run(&RunConfig::new(SchemeKind::Basic4, protocol, x, y)
                    .with_noise(NoiseSource::Pattern(pattern.clone())))
                .map_err(|e| {
                    eprintln!("error: {e}");
                    Failure::Check
                })?;
            let m = out.metrics;
            let achieved = m.t_b.map(|t_b| t_b - m.t_a);
            emit(&json!({
                "pattern": pattern.iter().collect::<Vec<_>>(),
                "erasures": pattern.len(),
                "t_a": m.t_a,
                "t_b": m.t_b,
                "gap": achieved,
                "correct": out.outputs_correct(),
            }))?;
            check(achieved == Some(gap) && out.outputs_correct())
        }
        Command::Serve { role, scheme, protocol, input, connect, max_rounds } => {
            let protocol = parse_protocol(&protocol)?;
            let role = match role {
                RoleArg::Alice => Role::Alice,
                RoleArg::Bob => Role::Bob,
            };
            let stream = net::connect(connect.as_str())?;
            let report = net::serve_party(role, scheme, &protocol, &input, stream, max_rounds).map_err(net_failure)?;
            emit(&serde_json::to_value(&report).map_err(io::Error::from)?)
        }
        Command::Relay { a, b, noise, scheme, host } => {
            let noise = noise_source(&noise)?;
            let la = TcpListener::bind((host.as_str(), a))?;
            let lb = TcpListener::bind((host.as_str(), b))?;
            let (sa, _) = la.accept()?;
            let (sb, _) = lb.accept()?;
            let mut adversary = net::adversary_for(scheme, &noise);
            let stats = net::relay(sa, sb, scheme, adversary.as_mut()).map_err(net_failure)?;
            emit(&json!({ "relay": stats, "erased": stats.erased() }))
        }
    }
}

fn net_failure(e: NetError) -> Failure {
    match e {
        NetError::Transport(_) | NetError::Unsupported(_) => Failure::Usage(e.to_string()),
        _ => {
            eprintln!("error: {e}");
            Failure::Check
        }
    }
}

fn cmd_run(cfg: &RunConfig, out: OutFormat, trace_path: Option<PathBuf>) -> Outcome {
    let n = cfg.protocol.len() as u64;
    let outcome = match run(cfg) {
        Ok(o) => o,
        Err(HarnessError::RoundCap { cap, partial }) => {
            eprintln!("error: no exit within {cap} rounds");
            if let Some(path) = trace_path {
                write_trace(BufWriter::new(File::create(path)?), &partial.trace)
                    .map_err(|e| Failure::Usage(e.to_string()))?;
            }
            return Err(Failure::Check);
        }
        Err(HarnessError::Contract(c)) => {
            eprintln!("error: contract violation: {c}");
            return Err(Failure::Check);
        }
    };
    if let Some(path) = trace_path {
        write_trace(BufWriter::new(File::create(&path)?), &outcome.trace)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    let report = verify_trace(&outcome.trace);
    let violations = bound_violations(cfg.scheme, n, &outcome.metrics);
    let correct = outcome.outputs_correct();
    let m = &outcome.metrics;
    match out {
        OutFormat::Json => emit(&json!({
            "scheme": cfg.scheme,
            "n_bits": n,
            "metrics": m,
            "alice_output": outcome.alice_output,
            "bob_output": outcome.bob_output,
            "reference": outcome.reference(),
            "correct": correct,
            "verify": if report.passed() { "pass" } else { "fail" },
            "failed_checks": report.failures().map(|c| json!({
                "id": c.id,
                "first_violation_round": c.first_violation_round,
                "detail": c.detail,
            })).collect::<Vec<_>>(),
            "bound_violations": violations.iter().map(|v| &v.detail).collect::<Vec<_>>(),
        }))?,
        OutFormat::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            let row = [
                ("scheme", cfg.scheme.to_string()),
                ("n_bits", n.to_string()),
                ("transmissions", m.transmissions.to_string()),
                ("cc_sym", m.cc_sym.to_string()),
                ("cc_bits", m.cc_bits.to_string()),
                ("rc_timesteps", m.rc_timesteps.to_string()),
                ("erasures_counted", m.erasures_counted.to_string()),
                ("erasures_logical", m.erasures_logical.to_string()),
                ("t_a", m.t_a.to_string()),
                ("t_b", m.t_b.map_or(String::new(), |t| t.to_string())),
                ("semi_terminated", m.semi_terminated.to_string()),
                ("correct", correct.to_string()),
                ("verify", if report.passed() { "pass" } else { "fail" }.to_string()),
            ];
            let csv_err = |e: csv::Error| Failure::Usage(e.to_string());
            w.write_record(row.iter().map(|(k, _)| *k)).map_err(csv_err)?;
            w.write_record(row.iter().map(|(_, v)| v)).map_err(csv_err)?;
            w.flush()?;
        }
    }
    check(correct && report.passed() && violations.is_empty())
}

fn search_json(r: &SearchReport) -> serde_json::Value {
    let failure = |f: &search::Failure| {
        json!({
            "x": f.x.to_string(),
            "y": f.y.to_string(),
            "pattern": f.pattern.iter().collect::<Vec<_>>(),
            "reason": f.reason,
        })
    };
    json!({
        "patterns_covered": r.patterns_covered.to_string(),
        "runs": r.runs,
        "worst_transmissions": r.worst_transmissions,
        "worst_cc_sym": r.worst_cc_sym,
        "worst_rc_timesteps": r.worst_rc_timesteps,
        "worst_by_erasures": r.worst_by_erasures,
        "worst_pattern": r.worst_pattern.as_ref().map(|p| p.iter().collect::<Vec<_>>()),
        "failure_count": r.failures.len(),
        "failures": r.failures.iter().take(20).map(failure).collect::<Vec<_>>(),
        "cost_excess": r.cost_excess.to_string(),
        "cost_excess_examples": r.cost_excess_examples.iter().map(failure).collect::<Vec<_>>(),
    })
}
