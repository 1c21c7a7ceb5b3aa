//! Rate, waste and worst-case bound helpers.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::sim::{Metrics, SchemeKind};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("noise fraction must lie in [0, 1/2), got {0}")]
    BadDelta(f64),
}

/// Largest erasure count a `delta` fraction of the communication can reach
/// against a length-`n` protocol: `floor(delta * n / (1 - 2 * delta))`.
pub fn delta_budget(n: u64, delta: f64) -> Result<u64, AnalysisError> {
    if !(0.0..0.5).contains(&delta) {
        return Err(AnalysisError::BadDelta(delta));
    }
    Ok((delta * n as f64 / (1.0 - 2.0 * delta) + 1e-9) as u64)
}

/// Protocol bits per channel bit.
pub fn rate(n_bits: u64, cc_bits: u64) -> f64 {
    n_bits as f64 / cc_bits as f64
}

pub fn rate_lower_bound(delta: f64) -> f64 {
    0.5 - delta
}

/// Channel bits per erasure, `CC_bits / T`.
pub fn waste(cc_bits: u64, erasures: u64) -> Option<f64> {
    (erasures > 0).then(|| cc_bits as f64 / erasures as f64)
}

/// Extra channel bits per erasure over the noise-free run.
pub fn marginal_waste(cc_bits: u64, noise_free_cc_bits: u64, erasures: u64) -> Option<f64> {
    (erasures > 0).then(|| (cc_bits as f64 - noise_free_cc_bits as f64) / erasures as f64)
}

/// `(2N + 4T) / T`, the waste of the basic scheme against a worst-case
/// adversary.
pub fn basic_waste(n: u64, erasures: u64) -> f64 {
    (2 * n + 4 * erasures) as f64 / erasures as f64
}

/// A worst-case guarantee a run can exceed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    /// `CC_sym <= N + T`.
    CcSym,
    /// `CC_sym <= N + T + E`, `E` counting erased termination-phase answers.
    CcSymAdjusted,
    /// `RC <= N + 4T`.
    Rc,
    SemiTermination,
    /// Unary energy `<= N + T` over erased slots.
    Energy,
    /// Unary energy `<= N + T + E` over erased slots.
    EnergyAdjusted,
    /// Unary slots `<= 4(N + 4T)` over erased slots.
    Slots,
    /// Fixed schemes: `transmissions <= N + 2T`.
    Transmissions,
}

impl Bound {
    /// Bounds that only hold once erased termination-phase answers are
    /// charged twice; exceeding them alone is not a correctness failure.
    pub fn is_unadjusted_cost(self) -> bool {
        matches!(self, Bound::CcSym | Bound::Energy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub bound: Bound,
    pub detail: String,
}

/// Checks a run's metrics against the scheme's worst-case guarantees.
///
/// `T` is the number of tokens received as erasures. For the unary scheme the
/// energy and slot bounds are also checked against erased slots.
pub fn bound_violations(scheme: SchemeKind, n: u64, m: &Metrics) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |bound, detail| out.push(Violation { bound, detail });
    let t = m.erasures_logical;
    let e = m.erased_final_answers;
    let width = scheme.layer().width() as u64;
    if scheme.is_ags() {
        if m.cc_sym > n + t {
            push(Bound::CcSym, format!("CC_sym {} > N + T = {}", m.cc_sym, n + t));
        }
        if m.cc_sym > n + t + e {
            push(Bound::CcSymAdjusted, format!("CC_sym {} > N + T + E = {}", m.cc_sym, n + t + e));
        }
        let rc = m.rc_timesteps / width;
        if rc > n + 4 * t {
            push(Bound::Rc, format!("RC {rc} > N + 4T = {}", n + 4 * t));
        }
        if !m.semi_terminated {
            push(Bound::SemiTermination, "semi-termination not certified".into());
        }
        if scheme == SchemeKind::Ags1 {
            let tp = m.erasures_counted;
            if m.cc_sym > n + tp {
                push(Bound::Energy, format!("energy {} > N + T = {}", m.cc_sym, n + tp));
            }
            if m.cc_sym > n + tp + e {
                push(Bound::EnergyAdjusted, format!("energy {} > N + T + E = {}", m.cc_sym, n + tp + e));
            }
            if m.rc_timesteps > 4 * (n + 4 * tp) {
                push(Bound::Slots, format!("slots {} > 4(N + 4T) = {}", m.rc_timesteps, 4 * (n + 4 * tp)));
            }
        }
    } else if m.transmissions > n + 2 * t {
        push(Bound::Transmissions, format!("transmissions {} > N + 2T = {}", m.transmissions, n + 2 * t));
    }
    out
}
