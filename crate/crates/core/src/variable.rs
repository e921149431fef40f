use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The thirteen random variables of the model: the time-sharing variable Q,
/// the auxiliaries, the three channel inputs and the two channel outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VariableId {
    Q,
    W1,
    U1,
    X1,
    W2,
    V2,
    X2,
    WB,
    UB,
    VB,
    XB,
    Y1,
    Y2,
}

use VariableId::*;

impl VariableId {
    /// Canonical ordering used for the full joint tensor.
    pub const ALL: [VariableId; 13] = [Q, W1, U1, X1, W2, V2, X2, WB, UB, VB, XB, Y1, Y2];

    /// Input-side variables (everything but the channel outputs).
    pub const INPUT_SIDE: [VariableId; 11] = [Q, W1, U1, X1, W2, V2, X2, WB, UB, VB, XB];

    /// Variables that may be degenerated (forced to a singleton alphabet).
    pub const AUXILIARY: [VariableId; 8] = [Q, W1, U1, W2, V2, WB, UB, VB];

    pub fn name(self) -> &'static str {
        match self {
            Q => "Q",
            W1 => "W1",
            U1 => "U1",
            X1 => "X1",
            W2 => "W2",
            V2 => "V2",
            X2 => "X2",
            WB => "WB",
            UB => "UB",
            VB => "VB",
            XB => "XB",
            Y1 => "Y1",
            Y2 => "Y2",
        }
    }

    pub fn is_auxiliary(self) -> bool {
        Self::AUXILIARY.contains(&self)
    }

    pub fn is_channel_input(self) -> bool {
        matches!(self, X1 | X2 | XB)
    }

    pub fn is_output(self) -> bool {
        matches!(self, Y1 | Y2)
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VariableId::ALL
            .iter()
            .copied()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownVariable(s.to_string()))
    }
}

/// Checks that the given sets are pairwise disjoint and each internally
/// duplicate-free; returns the offending variable otherwise.
pub fn check_disjoint(sets: &[&[VariableId]]) -> Result<()> {
    let mut seen = Vec::new();
    for set in sets {
        for v in *set {
            if seen.contains(v) {
                return Err(Error::OverlappingVarSets(v.name().to_string()));
            }
            seen.push(*v);
        }
    }
    Ok(())
}
