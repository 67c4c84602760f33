use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Level-`k` rate of a code concatenated `k` times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcatProjection {
    pub p: f64,
    pub p_t: f64,
    pub k: u32,
    pub p_k: f64,
    pub qubits_per_logical: u64,
}

/// Deepest level whose qubit count `7^k` fits in a `u64`.
const MAX_LEVEL: u32 = 22;

fn check(p: f64, p_t: f64, k: u32) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Precondition(format!("p must be positive, got {p}")));
    }
    if !(p_t > 0.0 && p_t.is_finite()) {
        return Err(Error::Precondition(format!("p_T must be positive, got {p_t}")));
    }
    if k > MAX_LEVEL {
        return Err(Error::Precondition(format!(
            "at most {MAX_LEVEL} levels supported, got {k}"
        )));
    }
    Ok(())
}

/// `p_k = p_T (p / p_T)^(2^k)` and `7^k` qubits per logical qubit.
pub fn concat_project(p: f64, p_t: f64, k: u32) -> Result<ConcatProjection> {
    check(p, p_t, k)?;
    let p_k = p_t * (p / p_t).powf(2f64.powi(k as i32));
    Ok(ConcatProjection {
        p,
        p_t,
        k,
        p_k,
        qubits_per_logical: 7u64.pow(k),
    })
}

/// The same quantity by iterating `p ← C p²` with `C = 1 / p_T`.
pub fn concat_iterate(p: f64, p_t: f64, k: u32) -> Result<f64> {
    check(p, p_t, k)?;
    let c = 1.0 / p_t;
    Ok((0..k).fold(p, |acc, _| c * acc * acc))
}

/// Smallest `k` with `p_k ≤ epsilon`.
pub fn levels_for_target(p: f64, p_t: f64, epsilon: f64) -> Result<(u32, u64)> {
    check(p, p_t, 0)?;
    if !(epsilon > 0.0) {
        return Err(Error::Precondition(format!("epsilon must be positive, got {epsilon}")));
    }
    if epsilon >= p {
        return Ok((0, 1));
    }
    if p >= p_t {
        return Err(Error::NoConvergence { p, p_t });
    }
    for k in 1..=MAX_LEVEL {
        let proj = concat_project(p, p_t, k)?;
        // relative slack absorbs rounding when p_k lands exactly on epsilon
        if proj.p_k <= epsilon * (1.0 + 1e-9) {
            return Ok((k, proj.qubits_per_logical));
        }
    }
    Err(Error::Precondition(format!(
        "target {epsilon} needs more than {MAX_LEVEL} levels"
    )))
}
