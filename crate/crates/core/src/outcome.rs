//! Assessment states and the exhaustive enumeration of outcome vectors.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::predict::term_count;

/// Refuse to materialize more outcome vectors (or rules) than this.
pub const MATERIALIZE_LIMIT: u64 = 1 << 24;

/// State of one assessed leaf. With `T` states the codes run `0..T`; the
/// highest code is "pass" and every other code is a flavour of "fail". For
/// the usual two states, `1` is pass (`P`) and `0` is fail (`F`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutcomeState {
    code: u32,
    top: u32,
}

impl OutcomeState {
    pub const PASS: OutcomeState = OutcomeState { code: 1, top: 1 };
    pub const FAIL: OutcomeState = OutcomeState { code: 0, top: 1 };

    pub fn new(code: u32, states: u32) -> Result<Self> {
        if states == 0 || code >= states {
            return Err(Error::InvalidState {
                index: code,
                states,
            });
        }
        Ok(OutcomeState {
            code,
            top: states - 1,
        })
    }

    pub fn pass(states: u32) -> Result<Self> {
        Self::new(states.saturating_sub(1), states)
    }

    pub fn code(self) -> u32 {
        self.code
    }

    pub fn states(self) -> u32 {
        self.top + 1
    }

    pub fn is_pass(self) -> bool {
        self.code == self.top
    }

    /// `P` for pass; `F` for fail when there are two states, `F<code>` otherwise.
    pub fn symbol(self) -> String {
        if self.is_pass() {
            "P".to_string()
        } else if self.top == 1 {
            "F".to_string()
        } else {
            format!("F{}", self.code)
        }
    }

    /// Inverse of [`OutcomeState::symbol`]; also accepts the bare numeric code.
    pub fn parse(symbol: &str, states: u32) -> Result<Self> {
        let s = symbol.trim();
        let bad = || Error::InvalidArgument(format!("invalid outcome state {symbol:?}"));
        match s {
            "P" | "p" => Self::pass(states),
            "F" | "f" if states == 2 => Ok(Self::FAIL),
            _ => {
                let digits = s.strip_prefix(['F', 'f']).unwrap_or(s);
                let code: u32 = digits.parse().map_err(|_| bad())?;
                let state = Self::new(code, states)?;
                if s.starts_with(['F', 'f']) && state.is_pass() {
                    return Err(bad());
                }
                Ok(state)
            }
        }
    }
}

impl fmt::Display for OutcomeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol())
    }
}

impl Serialize for OutcomeState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.symbol())
    }
}

/// States aligned positionally with a parent class's leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct OutcomeVector(pub Vec<OutcomeState>);

impl OutcomeVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn states(&self) -> &[OutcomeState] {
        &self.0
    }

    pub fn all_pass(&self) -> bool {
        self.0.iter().all(|s| s.is_pass())
    }
}

impl fmt::Display for OutcomeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for state in &self.0 {
            write!(f, "{state}")?;
        }
        Ok(())
    }
}

/// All `states^leaves` outcome vectors in canonical order: read as base-T
/// numbers (first leaf most significant, pass = T-1), they descend. For two
/// states that is `PP..P` first and `FF..F` last.
pub fn enumerate_outcomes(leaves: usize, states: u32) -> Result<Vec<OutcomeVector>> {
    if leaves == 0 || states == 0 {
        return Err(Error::InvalidArgument(
            "leaf count and state count must be at least 1".to_string(),
        ));
    }
    let total = term_count(states, leaves)?;
    if total > MATERIALIZE_LIMIT {
        return Err(Error::Overflow(format!(
            "{states}^{leaves} = {total} outcome vectors exceeds the materialization limit {MATERIALIZE_LIMIT}"
        )));
    }
    let base = u64::from(states);
    Ok((0..total)
        .rev()
        .map(|mut k| {
            let mut digits = vec![OutcomeState::FAIL; leaves];
            for slot in digits.iter_mut().rev() {
                // k % base < states, so the constructor cannot fail.
                *slot = OutcomeState {
                    code: (k % base) as u32,
                    top: states - 1,
                };
                k /= base;
            }
            OutcomeVector(digits)
        })
        .collect())
}
