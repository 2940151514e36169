//! Diamond norm (cb-norm of the trace picture) via the factorization SDP on the Choi
//! matrix, with the lower bound supplied by witness ascent seeded from the SDP's
//! primal states.

use serde::{Deserialize, Serialize};

use super::ascent::map_ascent;
use super::twoblock::{two_block_sdp, Dims};
use super::{NormBracket, NormConfig, Witness};
use crate::error::Result;
use crate::matcore::{op_norm, tr_norm};
use crate::random::rng;
use crate::supop::{adjoint_map, SuperOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Picture {
    /// `M_dom → M_cod` with operator norms.
    Operator,
    /// `T_dom → T_cod` with trace norms.
    Trace,
}

pub fn diamond_norm(s: &SuperOp) -> Result<NormBracket> {
    diamond_norm_with(s, &NormConfig::default())
}

pub fn diamond_norm_with(s: &SuperOp, cfg: &NormConfig) -> Result<NormBracket> {
    if let Some(b) = scalar_case(s, Picture::Trace)? {
        return Ok(b);
    }
    diamond_norm_sdp(s, cfg)
}

pub fn cb_norm(s: &SuperOp, picture: Picture) -> Result<NormBracket> {
    cb_norm_with(s, picture, &NormConfig::default())
}

pub fn cb_norm_with(s: &SuperOp, picture: Picture, cfg: &NormConfig) -> Result<NormBracket> {
    if let Some(b) = scalar_case(s, picture)? {
        return Ok(b);
    }
    match picture {
        Picture::Trace => diamond_norm_sdp(s, cfg),
        Picture::Operator => diamond_norm_sdp(&adjoint_map(s), cfg),
    }
}

/// Scalar domain or codomain: the cb-norm is the norm, read off the Choi matrix.
fn scalar_case(s: &SuperOp, picture: Picture) -> Result<Option<NormBracket>> {
    let n: usize = s.dom().iter().sum();
    let m: usize = s.cod().iter().sum();
    if n == 0 || m == 0 {
        return Ok(Some(NormBracket::exact(0.0)));
    }
    let j = s.full_choi();
    let v = match (n == 1, m == 1, picture) {
        (true, true, _) => j[(0, 0)].norm(),
        (false, true, Picture::Operator) | (true, false, Picture::Trace) => tr_norm(&j)?,
        (false, true, Picture::Trace) | (true, false, Picture::Operator) => op_norm(&j)?,
        (false, false, _) => return Ok(None),
    };
    Ok(Some(
        NormBracket::exact(v).with_witness(Witness::Note("scalar domain or codomain".into())),
    ))
}

/// Always runs the SDP, without the scalar shortcuts.
pub fn diamond_norm_sdp(s: &SuperOp, cfg: &NormConfig) -> Result<NormBracket> {
    let n: usize = s.dom().iter().sum();
    let m: usize = s.cod().iter().sum();
    let j_raw = s.full_choi();
    let scale = op_norm(&j_raw)?;
    if scale == 0.0 {
        return Ok(NormBracket::exact(0.0));
    }
    let j = j_raw.scale_re(1.0 / scale);
    let dims = Dims {
        n1: n,
        m1: m,
        n2: n,
        m2: m,
    };
    let (upper, seeds) = match two_block_sdp(&j, dims)? {
        Some(r) => (r.upper, r.seeds),
        None => (tr_norm(&j)?, vec![]),
    };
    let mut r = rng(cfg.seed);
    let asc = map_ascent(&j, dims, n, &seeds, cfg.witness_starts.min(4), &mut r)?;
    Ok(NormBracket::new(asc.value * scale, upper * scale)
        .with_witness(Witness::Inputs {
            psi: asc.psi.vec(),
            phi: asc.phi.vec(),
        })
        .with_witness(Witness::DualValue { value: upper * scale }))
}
