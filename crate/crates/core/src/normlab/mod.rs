//! Norm computations: a dense SDP solver, diamond and cb norms, and tensor-norm brackets.
//!
//! Every norm is reported as a [`NormBracket`]: a certified upper bound from a feasible
//! primal object, a lower bound from an explicit witness, and a status saying how close
//! the two are.

mod ascent;
mod diamond;
pub mod sdp;
mod tensor;
mod twoblock;

use serde::{Deserialize, Serialize};

use crate::matcore::CMatrix;

pub use ascent::{amplified_trace_lower, map_ascent, AscentResult};
pub use diamond::{cb_norm, cb_norm_with, diamond_norm, diamond_norm_sdp, diamond_norm_with, Picture};
pub use sdp::{sdp_solve, SdpOutcome, SdpProblem, SdpSolution};
pub use tensor::{
    haagerup_bracket, haagerup_sdp, inj_norm, proj_bracket, proj_upper, tensor_level_matrix, Factorization, TensorShape,
};
pub use twoblock::Dims;

/// Relative width under which a bracket counts as exact.
pub const EXACT_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormStatus {
    Exact,
    Bracket,
    UpperOnly,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// Unit vectors `ψ, φ` on ancilla ⊗ input with `‖(id⊗s)(ψφ*)‖_tr` equal to the lower bound.
    Inputs {
        psi: Vec<crate::C64>,
        phi: Vec<crate::C64>,
    },
    /// `v = x ⊙ y`.
    Factorization {
        x: CMatrix,
        y: CMatrix,
    },
    /// A dual-side certificate value, e.g. an SDP dual objective.
    DualValue {
        value: f64,
    },
    Note(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub status: NormStatus,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub witnesses: Vec<Witness>,
}

impl NormBracket {
    /// Bracket from two certified bounds; status is exact when they meet within [`EXACT_REL`].
    pub fn new(lower: f64, upper: f64) -> Self {
        let scale = upper.abs().max(1.0);
        let lower = if lower > upper && lower - upper <= 1e-9 * scale {
            upper
        } else {
            lower
        };
        let status = if upper - lower <= EXACT_REL * scale {
            NormStatus::Exact
        } else {
            NormStatus::Bracket
        };
        NormBracket {
            lower,
            upper,
            status,
            witnesses: vec![],
        }
    }

    pub fn exact(v: f64) -> Self {
        Self::new(v, v)
    }

    pub fn upper_only(upper: f64, lower: f64) -> Self {
        NormBracket {
            lower,
            upper,
            status: NormStatus::UpperOnly,
            witnesses: vec![],
        }
    }

    pub fn unknown() -> Self {
        NormBracket {
            lower: 0.0,
            upper: f64::INFINITY,
            status: NormStatus::Unknown,
            witnesses: vec![],
        }
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witnesses.push(w);
        self
    }

    pub fn is_exact(&self) -> bool {
        self.status == NormStatus::Exact
    }

    /// Midpoint for exact or bracketed results; `None` when unbounded.
    pub fn value(&self) -> Option<f64> {
        self.upper.is_finite().then_some(0.5 * (self.lower + self.upper))
    }

    /// Max of lower bounds and min of upper bounds, for two brackets of the same quantity.
    pub fn intersect(&self, other: &NormBracket) -> NormBracket {
        let mut b = NormBracket::new(self.lower.max(other.lower), self.upper.min(other.upper));
        if !b.upper.is_finite() {
            b.status = NormStatus::Unknown;
        }
        b.witnesses = self.witnesses.iter().chain(&other.witnesses).cloned().collect();
        b
    }

    /// Applies a nonnegative scalar to both bounds.
    pub fn scaled(&self, s: f64) -> NormBracket {
        NormBracket {
            lower: self.lower * s,
            upper: self.upper * s,
            status: self.status,
            witnesses: self.witnesses.clone(),
        }
    }
}

/// Seeds and caps shared by the randomized parts of the norm oracles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormConfig {
    pub seed: u64,
    /// Alternating-minimization restarts for Haagerup factorizations.
    pub restarts: usize,
    /// Random starts for witness ascent.
    pub witness_starts: usize,
    /// Cap on the inner rank of Haagerup factorizations; `None` means `k·min(dim X, dim Y)`.
    pub rank_cap: Option<usize>,
    /// Solve the Haagerup SDP when it fits under the PSD cap.
    pub use_sdp: bool,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            seed: 0x05ca7,
            restarts: 8,
            witness_starts: 64,
            rank_cap: None,
            use_sdp: true,
        }
    }
}
