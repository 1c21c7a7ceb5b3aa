//! Command-line specifications of protocols and noise sources.
//!
//! Protocols are `builtin:string-exchange:N`, `builtin:constant:N[:BIT]`,
//! `builtin:hashed:N:SEED`, or a path (optionally prefixed `file:`) to a
//! table file `{"n_bits": N, "entries": {"<prefix>": 0|1}}`.
//!
//! Noise is `none`, `file:PATH` holding `{"erase": [t1, t2, ...]}`,
//! `random:p=P,seed=S,horizon=H`, `burst:start=A,len=B` or
//! `adversary:greedy,budget=T`. Timesteps are physical channel uses, 1-based.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use erasuresim_core::protocol::TableOracle;
use erasuresim_core::{NoisePattern, NoiseSource, Protocol, ProtocolError, Transcript};

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("{0}")]
    Syntax(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

fn syntax(msg: impl Into<String>) -> SpecError {
    SpecError::Syntax(msg.into())
}

fn read(path: &Path) -> Result<String, SpecError> {
    std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.into(), source })
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, SpecError> {
    value.parse().map_err(|_| syntax(format!("{key}: cannot parse {value:?}")))
}

/// A table protocol file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    pub n_bits: usize,
    pub entries: BTreeMap<String, u8>,
}

impl TableFile {
    /// Odd lengths are rejected, not padded: the last message must be Bob's.
    pub fn to_protocol(&self) -> Result<Protocol, SpecError> {
        let mut table = TableOracle::zeros(self.n_bits)?;
        for (key, &bit) in &self.entries {
            let prefix: Transcript = key.parse()?;
            if bit > 1 {
                return Err(syntax(format!("entry {key:?}: bit must be 0 or 1, got {bit}")));
            }
            table.set(prefix.bits(), bit == 1)?;
        }
        Ok(Protocol::table(table)?)
    }

    /// Every prefix shorter than `n_bits` with its bit.
    pub fn from_fn(n_bits: usize, mut bit: impl FnMut(&[bool]) -> bool) -> Self {
        let mut entries = BTreeMap::new();
        for len in 0..n_bits {
            for v in 0u64..1 << len {
                let prefix: Vec<bool> = (0..len).map(|i| v >> (len - 1 - i) & 1 == 1).collect();
                let key = Transcript::from_bits(prefix.clone()).to_bit_string();
                entries.insert(key, u8::from(bit(&prefix)));
            }
        }
        TableFile { n_bits, entries }
    }
}

pub fn load_table(path: &Path) -> Result<Protocol, SpecError> {
    let text = read(path)?;
    let file: TableFile =
        serde_json::from_str(&text).map_err(|source| SpecError::Json { path: path.into(), source })?;
    file.to_protocol()
}

pub fn parse_protocol(spec: &str) -> Result<Protocol, SpecError> {
    let Some(rest) = spec.strip_prefix("builtin:") else {
        return load_table(Path::new(spec.strip_prefix("file:").unwrap_or(spec)));
    };
    let parts: Vec<&str> = rest.split(':').collect();
    let n = |s: &str| number::<usize>("N", s);
    match parts.as_slice() {
        ["string-exchange", len] => Ok(Protocol::string_exchange(n(len)?)?),
        ["constant", len] => Ok(Protocol::constant(n(len)?, false)?),
        ["constant", len, bit] => Ok(Protocol::constant(n(len)?, number::<u8>("bit", bit)? == 1)?),
        ["hashed", len, seed] => Ok(Protocol::hashed(n(len)?, number("seed", seed)?)?),
        _ => Err(syntax(format!(
            "unknown protocol {spec:?}; expected builtin:string-exchange:N, builtin:constant:N[:BIT], builtin:hashed:N:SEED or a table file"
        ))),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseFile {
    pub erase: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSpec {
    None,
    File(PathBuf),
    Random { p: f64, seed: u64, horizon: u64 },
    Burst { start: u64, len: u64 },
    Greedy { budget: u64 },
}

impl NoiseSpec {
    pub fn source(&self) -> Result<NoiseSource, SpecError> {
        Ok(match self {
            NoiseSpec::None => NoiseSource::None,
            NoiseSpec::File(path) => {
                let text = read(path)?;
                let file: NoiseFile =
                    serde_json::from_str(&text).map_err(|source| SpecError::Json { path: path.clone(), source })?;
                if file.erase.contains(&0) {
                    return Err(syntax(format!("{}: timesteps start at 1", path.display())));
                }
                NoiseSource::Pattern(file.erase.into_iter().collect())
            }
            &NoiseSpec::Random { p, seed, horizon } => NoiseSource::Pattern(random_pattern(p, seed, horizon)),
            &NoiseSpec::Burst { start, len } => NoiseSource::Pattern((start..start + len).collect()),
            &NoiseSpec::Greedy { budget } => NoiseSource::Greedy { budget },
        })
    }
}

/// Each timestep in `1..=horizon` erased independently with probability `p`.
pub fn random_pattern(p: f64, seed: u64, horizon: u64) -> NoisePattern {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=horizon).filter(|_| rng.random_bool(p)).collect()
}

fn fields<'a>(body: &'a str, allowed: &[&str]) -> Result<BTreeMap<&'a str, &'a str>, SpecError> {
    let mut out = BTreeMap::new();
    for item in body.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| syntax(format!("expected key=value, got {item:?}")))?;
        if !allowed.contains(&k) {
            return Err(syntax(format!("unknown key {k:?}; expected one of {allowed:?}")));
        }
        if out.insert(k, v).is_some() {
            return Err(syntax(format!("duplicate key {k:?}")));
        }
    }
    Ok(out)
}

fn required<T: FromStr>(map: &BTreeMap<&str, &str>, key: &str) -> Result<T, SpecError> {
    let v = map.get(key).ok_or_else(|| syntax(format!("missing {key}=")))?;
    number(key, v)
}

impl FromStr for NoiseSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        if s == "none" {
            return Ok(NoiseSpec::None);
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(NoiseSpec::File(path.into()));
        }
        if let Some(body) = s.strip_prefix("random:") {
            let f = fields(body, &["p", "seed", "horizon"])?;
            let p: f64 = required(&f, "p")?;
            if !(0.0..=1.0).contains(&p) {
                return Err(syntax(format!("p must lie in [0, 1], got {p}")));
            }
            return Ok(NoiseSpec::Random { p, seed: required(&f, "seed")?, horizon: required(&f, "horizon")? });
        }
        if let Some(body) = s.strip_prefix("burst:") {
            let f = fields(body, &["start", "len"])?;
            let start: u64 = required(&f, "start")?;
            if start == 0 {
                return Err(syntax("burst start is a 1-based timestep"));
            }
            return Ok(NoiseSpec::Burst { start, len: required(&f, "len")? });
        }
        if let Some(body) = s.strip_prefix("adversary:") {
            let (name, rest) = body.split_once(',').unwrap_or((body, ""));
            if name != "greedy" {
                return Err(syntax(format!("unknown adversary {name:?}; expected greedy")));
            }
            let f = fields(rest, &["budget"])?;
            return Ok(NoiseSpec::Greedy { budget: required(&f, "budget")? });
        }
        Err(syntax(format!(
            "unknown noise {s:?}; expected none, file:PATH, random:p=,seed=,horizon=, burst:start=,len= or adversary:greedy,budget="
        )))
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::None => f.write_str("none"),
            NoiseSpec::File(p) => write!(f, "file:{}", p.display()),
            NoiseSpec::Random { p, seed, horizon } => write!(f, "random:p={p},seed={seed},horizon={horizon}"),
            NoiseSpec::Burst { start, len } => write!(f, "burst:start={start},len={len}"),
            NoiseSpec::Greedy { budget } => write!(f, "adversary:greedy,budget={budget}"),
        }
    }
}
