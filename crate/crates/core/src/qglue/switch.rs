//! The pure quantum switch `qsw(a ⊗ b) = |0⟩⟨0| ⊗ ab + |1⟩⟨1| ⊗ ba` on `M_n ⊗ M_n`,
//! identified with `M_{n²}` through the Kronecker product.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::member::Membership;
use super::{connective, kron_coords, Connective, QObject};
use crate::error::{OscatError, Result};
use crate::matcore::{op_norm, BlockMatrix, CMatrix};
use crate::normlab::{haagerup_bracket, proj_upper, NormBracket, NormConfig, TensorShape};
use crate::random::{below, complex_gaussian, random_matrix, random_unitary, split, Rng};
use crate::supop::SuperOp;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchCaps {
    /// Largest `n` accepted.
    pub max_n: usize,
    pub unitary_pairs: usize,
    pub contractivity_samples: usize,
    /// Highest amplification level used by the searches.
    pub max_level: usize,
    pub violation_starts: usize,
    pub ascent_steps: usize,
    /// Required ratio excess over the certified Haagerup upper bound.
    pub margin: f64,
}

impl Default for SwitchCaps {
    fn default() -> Self {
        SwitchCaps {
            max_n: 6,
            unitary_pairs: 20,
            contractivity_samples: 200,
            max_level: 4,
            violation_starts: 512,
            ascent_steps: 4,
            margin: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryEvidence {
    pub pairs: usize,
    pub max_defect: f64,
    /// `qsw` carries `{u ⊗ v}` into the singleton of the expected unitary.
    pub singleton_typing: Membership,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractivityEvidence {
    pub samples: usize,
    pub levels: Vec<usize>,
    /// Samples with `‖qsw_k(v)‖` above the certified projective upper bound by more than `1e-9`.
    pub violations: usize,
    /// `max (‖qsw_k(v)‖ − U)`; negative when every image sits strictly inside.
    pub max_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationWitness {
    pub level: usize,
    /// Level matrix of `v ∈ M_k(M_n ⊗ M_n)`.
    pub v: CMatrix,
    pub h_bracket: NormBracket,
    pub image_norm: f64,
    /// `‖qsw_k(v)‖ / h_upper`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Found,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationSearch {
    pub status: SearchStatus,
    pub structured_candidates: usize,
    pub random_starts: usize,
    pub max_level: usize,
    pub best_ratio: f64,
    pub witness: Option<ViolationWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchReport {
    pub n: usize,
    pub caps: SwitchCaps,
    pub unitary: UnitaryEvidence,
    pub contractivity: ContractivityEvidence,
    pub violation: ViolationSearch,
}

impl SwitchReport {
    /// `{claim, verdict, evidence}` records, one per evidence kind.
    pub fn records(&self) -> Vec<serde_json::Value> {
        let verdict = |ok: bool| if ok { "pass" } else { "fail" };
        vec![
            serde_json::json!({
                "claim": format!("qsw(u⊗v) = |0⟩⟨0|⊗uv + |1⟩⟨1|⊗vu on M_{}", self.n),
                "verdict": verdict(self.unitary.max_defect <= 1e-12 && self.unitary.singleton_typing == Membership::Yes),
                "evidence": self.unitary,
            }),
            serde_json::json!({
                "claim": "qsw is a complete contraction on the projective tensor",
                "verdict": verdict(self.contractivity.violations == 0),
                "evidence": self.contractivity,
            }),
            serde_json::json!({
                "claim": "qsw is not a complete contraction on the Haagerup tensor",
                "verdict": match self.violation.status { SearchStatus::Found => "pass", SearchStatus::Unknown => "unknown" },
                "evidence": self.violation,
            }),
        ]
    }
}

/// `qsw(x)` for `x ∈ M_{n²}` in Kronecker layout.
pub fn qsw_apply(n: usize, x: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let z = x[(i * n + k, j * n + l)];
                    // e_ij e_kl = δ_jk e_il,  e_kl e_ij = δ_li e_kj
                    if j == k {
                        out[(i, l)] += z;
                    }
                    if l == i {
                        out[(n + k, n + j)] += z;
                    }
                }
            }
        }
    }
    out
}

pub fn qsw_map(n: usize) -> Result<SuperOp> {
    SuperOp::from_action(&[n * n], &[2 * n], |x| {
        BlockMatrix::single(qsw_apply(n, &x.blocks()[0])).expect("square output")
    })
}

/// `qsw_k` applied blockwise to a level-`k` matrix.
fn qsw_level(n: usize, v: &CMatrix) -> CMatrix {
    let (d, k) = (n * n, v.rows() / (n * n));
    let mut out = CMatrix::zeros(2 * n * k, 2 * n * k);
    for p in 0..k {
        for q in 0..k {
            out.set_submatrix(p * 2 * n, q * 2 * n, &qsw_apply(n, &v.submatrix(p * d, q * d, d, d)));
        }
    }
    out
}

fn expected(u: &CMatrix, v: &CMatrix) -> CMatrix {
    u.matmul(v).direct_sum(&v.matmul(u))
}

fn unitary_evidence(n: usize, pairs: usize, seed: u64) -> Result<UnitaryEvidence> {
    let mut max_defect: f64 = 0.0;
    let mut typing = Membership::Yes;
    for i in 0..pairs as u64 {
        let mut r = split(seed, i);
        let (u, v) = (random_unitary(&mut r, n), random_unitary(&mut r, n));
        max_defect = max_defect.max(qsw_apply(n, &u.kron(&v)).max_abs_diff(&expected(&u, &v)));
        if i == 0 {
            typing = singleton_typing(n, &u, &v)?;
        }
    }
    Ok(UnitaryEvidence {
        pairs,
        max_defect,
        singleton_typing: typing,
    })
}

/// Whether `qsw` maps the generator of `(M_n, {u}) ⊗̂ (M_n, {v})` into the target singleton.
fn singleton_typing(n: usize, u: &CMatrix, v: &CMatrix) -> Result<Membership> {
    let src = connective(
        Connective::Tensor,
        &QObject::unitary(&BlockMatrix::single(u.clone())?)?,
        Some(&QObject::unitary(&BlockMatrix::single(v.clone())?)?),
    )?;
    let target = QObject::unitary(&BlockMatrix::single(expected(u, v))?)?;
    let gens = src.set.generators().unwrap_or_default();
    let mut acc = if gens.is_empty() {
        Membership::Unknown
    } else {
        Membership::Yes
    };
    for g in gens {
        // tensor coordinates (i j)(k l) to the Kronecker matrix
        let x = CMatrix::from_fn(n * n, n * n, |r, c| {
            g[((r / n) * n + c / n) * n * n + (r % n) * n + c % n]
        });
        let img = qsw_apply(n, &x);
        if target.contains(&img.vec(), 1e-9)? != Membership::Yes {
            acc = Membership::No;
        }
    }
    debug_assert_eq!(kron_coords(&u.vec(), &v.vec()).len(), n.pow(4));
    Ok(acc)
}

fn random_level(r: &mut Rng, n: usize, k: usize) -> CMatrix {
    let d = k * n * n;
    let terms = 1 + below(r, 3);
    let mut v = CMatrix::zeros(d, d);
    let shape = TensorShape::square(n, n);
    for _ in 0..terms {
        let a = random_matrix(r, k * n, k * n);
        let b = random_matrix(r, n, n);
        v = &v + &crate::normlab::tensor_level_matrix(shape, k, &[(a, b)]).expect("term shapes");
    }
    // a small generic part keeps the samples off the elementary-tensor set
    let noise = CMatrix::from_fn(d, d, |_, _| complex_gaussian(r) * 0.1);
    &v + &noise
}

fn contractivity_evidence(n: usize, caps: &SwitchCaps, seed: u64) -> Result<ContractivityEvidence> {
    let shape = TensorShape::square(n, n);
    let levels: Vec<usize> = (1..=caps.max_level.min(2)).collect();
    let excess: Vec<Result<f64>> = (0..caps.contractivity_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = split(seed ^ 0xc0, i);
            let k = levels[i as usize % levels.len()];
            let v = random_level(&mut r, n, k);
            let bound = proj_upper(&v, shape)?;
            Ok(op_norm(&qsw_level(n, &v))? - bound)
        })
        .collect();
    let mut max_excess = f64::NEG_INFINITY;
    let mut violations = 0;
    for e in excess {
        let e = e?;
        max_excess = max_excess.max(e);
        violations += (e > 1e-9) as usize;
    }
    Ok(ContractivityEvidence {
        samples: caps.contractivity_samples,
        levels,
        violations,
        max_excess,
    })
}

/// `Σ_l e_l0 ⊗ e_0l` and its flip: a column against a row, and the reverse.
fn structured_candidates(n: usize) -> Vec<CMatrix> {
    let shape = TensorShape::square(n, n);
    let col_row: Vec<_> = (0..n)
        .map(|l| (CMatrix::unit(n, n, l, 0), CMatrix::unit(n, n, 0, l)))
        .collect();
    let row_col: Vec<_> = (0..n)
        .map(|l| (CMatrix::unit(n, n, 0, l), CMatrix::unit(n, n, l, 0)))
        .collect();
    [col_row, row_col]
        .iter()
        .map(|t| crate::normlab::tensor_level_matrix(shape, 1, t).expect("unit terms"))
        .collect()
}

fn ratio_cheap(n: usize, v: &CMatrix, cfg: &NormConfig) -> Result<f64> {
    let h = haagerup_bracket(v, TensorShape::square(n, n), cfg)?;
    Ok(op_norm(&qsw_level(n, v))? / h.upper)
}

fn certify(n: usize, v: CMatrix, cfg: &NormConfig) -> Result<ViolationWitness> {
    let shape = TensorShape::square(n, n);
    let h = haagerup_bracket(&v, shape, cfg)?;
    let image_norm = op_norm(&qsw_level(n, &v))?;
    Ok(ViolationWitness {
        level: shape.level_of(&v)?,
        ratio: image_norm / h.upper,
        h_bracket: h,
        image_norm,
        v,
    })
}

fn violation_search(n: usize, caps: &SwitchCaps, cfg: &NormConfig) -> Result<ViolationSearch> {
    let threshold = 1.0 + caps.margin;
    let mut best: Option<ViolationWitness> = None;
    let consider = |w: ViolationWitness, best: &mut Option<ViolationWitness>| {
        if best.as_ref().is_none_or(|b| w.ratio > b.ratio) {
            *best = Some(w);
        }
    };
    let structured = structured_candidates(n);
    let n_structured = structured.len();
    for v in structured {
        consider(certify(n, v, cfg)?, &mut best);
    }
    let mut starts = 0;
    if best.as_ref().is_none_or(|b| b.ratio <= threshold) {
        let cheap = NormConfig {
            restarts: 1,
            use_sdp: false,
            ..*cfg
        };
        for i in 0..caps.violation_starts as u64 {
            starts += 1;
            let mut r = split(cfg.seed ^ 0x5e4c, i);
            let k = 1 + (i as usize % caps.max_level.max(1));
            let mut v = random_level(&mut r, n, k);
            let mut score = ratio_cheap(n, &v, &cheap)?;
            for _ in 0..caps.ascent_steps {
                let step = CMatrix::from_fn(v.rows(), v.cols(), |_, _| complex_gaussian(&mut r) * 0.2);
                let cand = &v + &step;
                let s = ratio_cheap(n, &cand, &cheap)?;
                if s > score {
                    v = cand;
                    score = s;
                }
            }
            if score > threshold {
                let w = certify(n, v, cfg)?;
                let found = w.ratio > threshold;
                consider(w, &mut best);
                if found {
                    break;
                }
            }
        }
    }
    let best_ratio = best.as_ref().map_or(0.0, |b| b.ratio);
    let found = best_ratio > threshold;
    Ok(ViolationSearch {
        status: if found {
            SearchStatus::Found
        } else {
            SearchStatus::Unknown
        },
        structured_candidates: n_structured,
        random_starts: starts,
        max_level: caps.max_level,
        best_ratio,
        witness: if found { best } else { None },
    })
}

/// Builds `qsw` and collects the three kinds of evidence.
pub fn quantum_switch(n: usize, caps: &SwitchCaps, cfg: &NormConfig) -> Result<(SuperOp, SwitchReport)> {
    if n == 0 {
        return Err(OscatError::InvalidInput("quantum switch needs n ≥ 1".into()));
    }
    if n > caps.max_n {
        return Err(OscatError::SizeLimit {
            what: "quantum switch size n",
            requested: n,
            cap: caps.max_n,
        });
    }
    let map = qsw_map(n)?;
    let report = SwitchReport {
        n,
        caps: *caps,
        unitary: unitary_evidence(n, caps.unitary_pairs, cfg.seed)?,
        contractivity: contractivity_evidence(n, caps, cfg.seed)?,
        violation: violation_search(n, caps, cfg)?,
    };
    Ok((map, report))
}
