//! Built-in channels with closed-form Kraus operators.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{cq_channel_from_pure_states, CqGraph, KrausChannel};
use crate::matrix::{self, c, ket_bra, ComplexMatrix};

/// Noiseless channel on `C^d`.
pub fn identity_channel(d: usize) -> KrausChannel {
    KrausChannel::new(d, d, vec![matrix::identity(d)]).expect("unitary")
}

/// Completely depolarizing channel `ρ ↦ tr(ρ) 1/d`, Kraus `|i⟩⟨j| / √d`.
pub fn depolarizing_channel(d: usize) -> KrausChannel {
    let s = 1.0 / (d as f64).sqrt();
    let kraus = (0..d)
        .flat_map(|i| (0..d).map(move |j| ket_bra(d, i, j).scale(s)))
        .collect();
    KrausChannel::new(d, d, kraus).expect("complete Kraus set")
}

/// Noiseless classical channel with `ℓ` symbols: measure in the computational
/// basis, Kraus `|i⟩⟨i|`. Its graph is `delta(ℓ)`.
pub fn classical_channel(ell: usize) -> Result<KrausChannel> {
    if ell == 0 {
        return Err(Error::InvalidChannel("ℓ must be at least 1".into()));
    }
    KrausChannel::new(ell, ell, (0..ell).map(|i| ket_bra(ell, i, i)).collect())
}

/// Output states `α|0⟩ ± β|1⟩`, `β = √(1 - α²)`.
pub fn example4_states(alpha_sq: f64) -> Result<[DVector<Complex64>; 2]> {
    if !(alpha_sq > 0.0 && alpha_sq <= 1.0) {
        return Err(Error::InvalidChannel(format!("alpha_sq = {alpha_sq} must lie in (0, 1]")));
    }
    let a = alpha_sq.sqrt();
    let b = (1.0 - alpha_sq).max(0.0).sqrt();
    Ok([
        DVector::from_vec(vec![c(a, 0.0), c(b, 0.0)]),
        DVector::from_vec(vec![c(a, 0.0), c(-b, 0.0)]),
    ])
}

/// Two-input cq channel with pure outputs `α|0⟩ ± β|1⟩`.
pub fn example4_channel(alpha_sq: f64) -> Result<KrausChannel> {
    cq_channel_from_pure_states(&example4_states(alpha_sq)?)
}

pub fn example4_cq(alpha_sq: f64) -> Result<CqGraph> {
    let projections = example4_states(alpha_sq)?
        .iter()
        .map(|psi| matrix::outer(psi, psi))
        .collect();
    CqGraph::new(projections)
}

/// Qubit amplitude damping with decay probability `r`.
pub fn amplitude_damping(r: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidChannel(format!("damping r = {r} must lie in [0, 1]")));
    }
    let e0 = matrix::diag(&[1.0, (1.0 - r).sqrt()]);
    let e1 = ket_bra(2, 0, 1).scale(r.sqrt());
    KrausChannel::new(2, 2, vec![e0, e1])
}

/// Qutrit channel whose activated capacity exceeds its semidefinite packing
/// number.
pub fn prop11_channel() -> KrausChannel {
    let s = 0.5f64.sqrt();
    let e0 = (ket_bra(3, 0, 0) + ket_bra(3, 2, 0)).scale(s);
    let e1 = ket_bra(3, 0, 2).scale((50.0f64 / 99.0).sqrt())
        + ket_bra(3, 1, 1).scale((1.0f64 / 99.0).sqrt())
        + ket_bra(3, 2, 2).scale((49.0f64 / 99.0).sqrt());
    let e2 = ket_bra(3, 0, 1).scale((98.0f64 / 99.0).sqrt());
    KrausChannel::new(3, 3, vec![e0, e1, e2]).expect("trace preserving by construction")
}

/// Rank-one dual witness `|0⟩⟨0| + √t(|0⟩⟨2| + |2⟩⟨0|) + t|2⟩⟨2|`, `t = 0.1751`,
/// bounding the packing number of [`prop11_channel`] by its trace.
pub fn prop11_dual_witness() -> ComplexMatrix {
    let t: f64 = 0.1751;
    ket_bra(3, 0, 0) + (ket_bra(3, 0, 2) + ket_bra(3, 2, 0)).scale(t.sqrt()) + ket_bra(3, 2, 2).scale(t)
}

/// Descriptor of a built-in channel family.
#[derive(Debug, Clone, Copy)]
pub struct BuiltinInfo {
    pub name: &'static str,
    pub params: &'static str,
    pub description: &'static str,
}

pub const BUILTINS: &[BuiltinInfo] = &[
    BuiltinInfo { name: "identity", params: "d (≥ 1, default 2)", description: "noiseless quantum channel on C^d" },
    BuiltinInfo {
        name: "depolarizing",
        params: "d (≥ 1, default 2)",
        description: "completely depolarizing channel; Kraus span is all operators",
    },
    BuiltinInfo {
        name: "example4",
        params: "alpha_sq ∈ (0, 1]",
        description: "two-input cq channel with pure outputs α|0⟩ ± β|1⟩; activated capacity 1/α²",
    },
    BuiltinInfo {
        name: "amplitude-damping",
        params: "r ∈ [0, 1]",
        description: "qubit amplitude damping; superdense bound (4-2r)/(3-r)",
    },
    BuiltinInfo {
        name: "prop11",
        params: "none",
        description: "qutrit channel with activated capacity ≈ 1.1767 above its packing number ≤ 1.1751",
    },
    BuiltinInfo { name: "delta", params: "ell (≥ 1)", description: "noiseless classical channel with ℓ symbols" },
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{delta, NcGraph};
    use crate::matrix::{max_abs_diff, DEFAULT_RANK_TOL};

    #[test]
    fn classical_channel_has_delta_graph() {
        for ell in 1..=4 {
            let k = NcGraph::from_channel(&classical_channel(ell).unwrap(), DEFAULT_RANK_TOL).unwrap();
            assert!(max_abs_diff(k.projection(), delta(ell).unwrap().projection()) < 1e-14);
        }
        assert!(classical_channel(0).is_err());
    }

    #[test]
    fn qutrit_witness_trace() {
        assert!((matrix::trace_re(&prop11_dual_witness()) - 1.1751).abs() < 1e-15);
    }
}
