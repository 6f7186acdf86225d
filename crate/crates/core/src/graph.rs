//! Channels, their Choi supports, and the structural constructions on
//! non-commutative bipartite graphs.
//!
//! A graph on `A ⊗ B` is stored as the orthogonal projector `P_AB` onto the
//! support of the Choi matrix, with `A` as the leading tensor factor.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{
    self, generalized_paulis, identity, ket_bra, max_abs_diff, partial_trace, permute_systems,
    support_basis, support_projection, tensor, trace_re, ComplexMatrix, Subsystem, SupportBasis,
    ZERO,
};

/// Tolerance on `Σ E†E = 1` for channel validation.
pub const TRACE_PRESERVING_TOL: f64 = 1e-8;

/// Tolerance on `P² = P = P†` for graph validation.
pub const PROJECTOR_TOL: f64 = 1e-9;

/// A channel `L(A) → L(B)` given by Kraus operators `E_i : A → B`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<ComplexMatrix>,
    subnormalized: bool,
}

impl KrausChannel {
    /// Builds a trace-preserving channel, rejecting `Σ E†E ≠ 1`.
    pub fn new(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = Self::build(d_in, d_out, kraus)?;
        let dev = max_abs_diff(&ch.kraus_sum(), &identity(d_in));
        if dev > TRACE_PRESERVING_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators are not trace preserving (|ΣE†E - 1| = {dev:.3e})"
            )));
        }
        Ok(ch)
    }

    /// Accepts trace non-increasing Kraus sets `Σ E†E ≤ 1`.
    ///
    /// [`KrausChannel::is_subnormalized`] reports whether the input fell short
    /// of trace preservation.
    pub fn new_relaxed(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let mut ch = Self::build(d_in, d_out, kraus)?;
        let sum = ch.kraus_sum();
        let excess = matrix::lambda_max(&(&sum - identity(d_in)))?;
        if excess > TRACE_PRESERVING_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators increase trace (λ_max(ΣE†E) - 1 = {excess:.3e})"
            )));
        }
        ch.subnormalized = max_abs_diff(&sum, &identity(d_in)) > TRACE_PRESERVING_TOL;
        Ok(ch)
    }

    fn build(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidChannel("dimensions must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        for (i, e) in kraus.iter().enumerate() {
            if e.nrows() != d_out || e.ncols() != d_in {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator {i} is {}x{}, expected {d_out}x{d_in}",
                    e.nrows(),
                    e.ncols()
                )));
            }
        }
        Ok(Self { d_in, d_out, kraus, subnormalized: false })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }

    /// `Σ_i E_i† E_i`.
    pub fn kraus_sum(&self) -> ComplexMatrix {
        self.kraus
            .iter()
            .fold(matrix::zeros(self.d_in, self.d_in), |acc, e| acc + e.adjoint() * e)
    }

    /// `N(ρ) = Σ E ρ E†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.kraus
            .iter()
            .fold(matrix::zeros(self.d_out, self.d_out), |acc, e| acc + e * rho * e.adjoint())
    }

    /// Choi vector `Σ_i |i⟩ ⊗ E|i⟩` of one Kraus operator.
    fn choi_vector(&self, e: &ComplexMatrix) -> DVector<Complex64> {
        let mut v = DVector::zeros(self.d_in * self.d_out);
        for i in 0..self.d_in {
            for b in 0..self.d_out {
                v[i * self.d_out + b] = e[(b, i)];
            }
        }
        v
    }
}

/// `J_AB = Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|)`.
pub fn choi_matrix(ch: &KrausChannel) -> ComplexMatrix {
    let n = ch.d_in * ch.d_out;
    ch.kraus.iter().fold(matrix::zeros(n, n), |acc, e| {
        let v = ch.choi_vector(e);
        acc + matrix::outer(&v, &v)
    })
}

/// Non-commutative bipartite graph, represented by its Choi support projector.
#[derive(Debug, Clone)]
pub struct NcGraph {
    d_a: usize,
    d_b: usize,
    projection: ComplexMatrix,
}

impl NcGraph {
    /// Validates `P² = P = P†` on `C^{d_a} ⊗ C^{d_b}`.
    pub fn new(d_a: usize, d_b: usize, projection: ComplexMatrix) -> Result<Self> {
        let n = d_a * d_b;
        if n == 0 || projection.nrows() != n || projection.ncols() != n {
            return Err(Error::InvalidGraph(format!(
                "projection is {}x{}, expected {n}x{n}",
                projection.nrows(),
                projection.ncols()
            )));
        }
        let herm = matrix::hermitian_deviation(&projection);
        let idem = max_abs_diff(&(&projection * &projection), &projection);
        if herm > PROJECTOR_TOL || idem > PROJECTOR_TOL {
            return Err(Error::InvalidGraph(format!(
                "not an orthogonal projector (hermiticity {herm:.2e}, idempotency {idem:.2e})"
            )));
        }
        Ok(Self { d_a, d_b, projection })
    }

    pub fn from_channel(ch: &KrausChannel, rank_tol: f64) -> Result<Self> {
        let p = support_projection(&choi_matrix(ch), rank_tol)?;
        Self::new(ch.d_in, ch.d_out, p)
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    /// Dimension of `A ⊗ B`.
    pub fn dim(&self) -> usize {
        self.d_a * self.d_b
    }

    /// `P_AB`.
    pub fn projection(&self) -> &ComplexMatrix {
        &self.projection
    }

    /// `Q_AB = 1 - P_AB`.
    pub fn complement(&self) -> ComplexMatrix {
        identity(self.dim()) - &self.projection
    }

    /// `P_B = tr_A P_AB`.
    pub fn p_b(&self) -> ComplexMatrix {
        partial_trace(&self.projection, self.d_a, self.d_b, Subsystem::First)
            .expect("shape checked on construction")
    }

    /// Orthonormal bases of `range(P)` and `range(1 - P)`.
    pub fn basis(&self) -> SupportBasis {
        support_basis(&matrix::hermitian_part(&self.projection), 0.5)
            .expect("projector is PSD")
    }

    pub fn rank(&self) -> usize {
        trace_re(&self.projection).round() as usize
    }
}

/// Graph of a classical-quantum channel: one output support projector per input.
#[derive(Debug, Clone)]
pub struct CqGraph {
    projections: Vec<ComplexMatrix>,
}

impl CqGraph {
    pub fn new(projections: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = projections.first() else {
            return Err(Error::InvalidGraph("cq-graph needs at least one output".into()));
        };
        let d = first.nrows();
        for (i, p) in projections.iter().enumerate() {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::InvalidGraph(format!("projection {i} has wrong shape")));
            }
            let herm = matrix::hermitian_deviation(p);
            let idem = max_abs_diff(&(p * p), p);
            if herm > PROJECTOR_TOL || idem > PROJECTOR_TOL {
                return Err(Error::InvalidGraph(format!("projection {i} is not a projector")));
            }
        }
        Ok(Self { projections })
    }

    pub fn projections(&self) -> &[ComplexMatrix] {
        &self.projections
    }

    pub fn num_inputs(&self) -> usize {
        self.projections.len()
    }

    pub fn d_b(&self) -> usize {
        self.projections[0].nrows()
    }

    /// The same channel as a non-commutative bipartite graph:
    /// `P_AB = Σ_i |i⟩⟨i| ⊗ P_i`.
    pub fn to_ncgraph(&self) -> NcGraph {
        let na = self.num_inputs();
        let p = self
            .projections
            .iter()
            .enumerate()
            .fold(matrix::zeros(na * self.d_b(), na * self.d_b()), |acc, (i, pi)| {
                acc + tensor(&ket_bra(na, i, i), pi)
            });
        NcGraph::new(na, self.d_b(), p).expect("block-diagonal projector")
    }
}

/// Noiseless classical channel with `ell` symbols: `P = Σ_i |ii⟩⟨ii|`.
pub fn delta(ell: usize) -> Result<NcGraph> {
    if ell == 0 {
        return Err(Error::InvalidGraph("delta requires ℓ ≥ 1".into()));
    }
    let n = ell * ell;
    let p = (0..ell).fold(matrix::zeros(n, n), |acc, i| acc + ket_bra(n, i * ell + i, i * ell + i));
    NcGraph::new(ell, ell, p)
}

/// Product graph on `(A A')(B B')`.
pub fn tensor_graph(k1: &NcGraph, k2: &NcGraph) -> NcGraph {
    let joint = tensor(&k1.projection, &k2.projection);
    let p = permute_systems(&joint, &[k1.d_a, k1.d_b, k2.d_a, k2.d_b], &[0, 2, 1, 3])
        .expect("dimensions consistent");
    NcGraph::new(k1.d_a * k2.d_a, k1.d_b * k2.d_b, p).expect("product of projectors")
}

/// `K^{⊗n}`.
pub fn tensor_power(k: &NcGraph, n: usize) -> NcGraph {
    assert!(n >= 1, "tensor power needs n ≥ 1");
    (1..n).fold(k.clone(), |acc, _| tensor_graph(&acc, k))
}

/// Direct sum `K1 ⊕ K2` with input `A1 ⊕ A2` and output `B1 ⊕ B2`.
///
/// For equal dimensions this is the flag construction
/// `|00⟩⟨00| ⊗ P1 + |11⟩⟨11| ⊗ P2` with the flag as the leading factor of
/// both `A` and `B`.
pub fn direct_sum(k1: &NcGraph, k2: &NcGraph) -> NcGraph {
    let d_a = k1.d_a + k2.d_a;
    let d_b = k1.d_b + k2.d_b;
    let mut p = matrix::zeros(d_a * d_b, d_a * d_b);
    for (k, a_off, b_off) in [(k1, 0, 0), (k2, k1.d_a, k1.d_b)] {
        let idx = |i: usize| {
            let (a, b) = (i / k.d_b, i % k.d_b);
            (a + a_off) * d_b + b + b_off
        };
        for i in 0..k.dim() {
            for j in 0..k.dim() {
                p[(idx(i), idx(j))] = k.projection[(i, j)];
            }
        }
    }
    NcGraph::new(d_a, d_b, p).expect("block sum of projectors")
}

/// The cq-graph obtained by superdense coding over `K`:
/// `{(U_m ⊗ 1_B) P_AB (U_m ⊗ 1_B)†}` over all generalized Paulis `U_m`.
pub fn superdense_cq(k: &NcGraph) -> CqGraph {
    let id_b = identity(k.d_b);
    let projections = generalized_paulis(k.d_a)
        .iter()
        .map(|u| {
            let w = tensor(u, &id_b);
            matrix::hermitian_part(&(&w * &k.projection * w.adjoint()))
        })
        .collect();
    CqGraph::new(projections).expect("unitary conjugates of a projector")
}

/// cq-graph from the output states of a classical-quantum channel.
pub fn cq_from_states(outputs: &[ComplexMatrix], rank_tol: f64) -> Result<CqGraph> {
    let projections = outputs
        .iter()
        .enumerate()
        .map(|(i, rho)| {
            let tr = rho.trace();
            if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
                return Err(Error::InvalidChannel(format!("output {i} has trace {tr}")));
            }
            support_projection(rho, rank_tol)
        })
        .collect::<Result<Vec<_>>>()?;
    CqGraph::new(projections)
}

/// Kraus representation `E_i = |ψ_i⟩⟨i|` of a cq-channel with pure outputs.
pub fn cq_channel_from_pure_states(states: &[DVector<Complex64>]) -> Result<KrausChannel> {
    let n = states.len();
    let Some(d) = states.first().map(|s| s.len()) else {
        return Err(Error::InvalidChannel("no output states".into()));
    };
    let kraus = states
        .iter()
        .enumerate()
        .map(|(i, psi)| {
            let mut e = matrix::zeros(d, n);
            for b in 0..d {
                e[(b, i)] = psi.get(b).copied().unwrap_or(ZERO);
            }
            e
        })
        .collect();
    KrausChannel::new(n, d, kraus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::matrix::{c, lambda_max, ONE};

    #[test]
    fn identity_channel_choi() {
        let ch = builtin::identity_channel(2);
        let j = choi_matrix(&ch);
        let expected = ComplexMatrix::from_fn(4, 4, |r, col| if r % 3 == 0 && col % 3 == 0 { ONE } else { ZERO });
        assert!(max_abs_diff(&j, &expected) < 1e-15);
        let k = NcGraph::from_channel(&ch, 1e-9).unwrap();
        assert_eq!(k.rank(), 1);
    }

    #[test]
    fn choi_marginal_is_identity() {
        for ch in [
            builtin::amplitude_damping(0.3).unwrap(),
            builtin::prop11_channel(),
            builtin::depolarizing_channel(3),
        ] {
            let j = choi_matrix(&ch);
            let m = partial_trace(&j, ch.d_in(), ch.d_out(), Subsystem::Second).unwrap();
            assert!(max_abs_diff(&m, &identity(ch.d_in())) < 1e-8);
        }
    }

    #[test]
    fn two_state_choi_has_rank_two() {
        let ch = builtin::example4_channel(0.75).unwrap();
        let vals = matrix::eigvals_hermitian(&choi_matrix(&ch)).unwrap();
        let rank = vals.iter().filter(|&&l| l > 1e-9).count();
        assert_eq!(rank, 2);
    }

    #[test]
    fn depolarizing_has_full_support() {
        let k = NcGraph::from_channel(&builtin::depolarizing_channel(2), 1e-9).unwrap();
        assert!(max_abs_diff(k.projection(), &identity(4)) < 1e-9);
    }

    #[test]
    fn qutrit_support_matches_closed_form() {
        let k = NcGraph::from_channel(&builtin::prop11_channel(), 1e-9).unwrap();
        let s = 0.5f64.sqrt();
        let mut v0 = DVector::zeros(9);
        v0[0] = c(s, 0.0);
        v0[2] = c(s, 0.0);
        let mut v1 = DVector::zeros(9);
        v1[3] = ONE;
        let mut v2 = DVector::zeros(9);
        v2[4] = c(0.1, 0.0);
        v2[6] = c(s, 0.0);
        v2[8] = c(0.7, 0.0);
        let expected = matrix::outer(&v0, &v0) + matrix::outer(&v1, &v1) + matrix::outer(&v2, &v2);
        let diff = k.projection() - expected;
        assert!(lambda_max(&(&diff * &diff)).unwrap().sqrt() < 1e-8);
    }

    #[test]
    fn delta_graphs() {
        let d1 = delta(1).unwrap();
        assert_eq!(d1.projection()[(0, 0)], ONE);
        let d2 = delta(2).unwrap();
        assert_eq!(d2.rank(), 2);
        assert_eq!(d2.projection(), &matrix::diag(&[1.0, 0.0, 0.0, 1.0]));
        assert!(delta(0).is_err());
    }

    #[test]
    fn delta_products_relabel_to_larger_delta() {
        let p = tensor_graph(&delta(2).unwrap(), &delta(2).unwrap());
        // |a a' b b'⟩ with a=b, a'=b' : indices (2a+a')*4 + (2b+b')
        let d4 = delta(4).unwrap();
        assert!(max_abs_diff(p.projection(), d4.projection()) < 1e-15);
    }

    #[test]
    fn direct_sum_of_trivial_deltas_is_delta2() {
        let s = direct_sum(&delta(1).unwrap(), &delta(1).unwrap());
        assert_eq!((s.d_a(), s.d_b()), (2, 2));
        assert!(max_abs_diff(s.projection(), delta(2).unwrap().projection()) < 1e-15);
    }

    #[test]
    fn direct_sum_unequal_dimensions() {
        let k1 = NcGraph::from_channel(&builtin::amplitude_damping(0.5).unwrap(), 1e-9).unwrap();
        let k2 = NcGraph::from_channel(&builtin::prop11_channel(), 1e-9).unwrap();
        let s = direct_sum(&k1, &k2);
        assert_eq!((s.d_a(), s.d_b()), (5, 5));
        assert_eq!(s.rank(), k1.rank() + k2.rank());
        // Every input keeps Choi support.
        let tr_b = partial_trace(s.projection(), 5, 5, Subsystem::Second).unwrap();
        assert!(matrix::lambda_min(&tr_b).unwrap() > 0.1);
    }

    #[test]
    fn superdense_of_identity_is_bell_basis() {
        let k = NcGraph::from_channel(&builtin::identity_channel(2), 1e-9).unwrap();
        let cq = superdense_cq(&k);
        assert_eq!(cq.num_inputs(), 4);
        let sum = cq.projections().iter().fold(matrix::zeros(4, 4), |acc, p| acc + p);
        assert!(max_abs_diff(&sum, &identity(4)) < 1e-12);
        for p in cq.projections() {
            assert!((trace_re(p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn superdense_twirl_identity() {
        let k = NcGraph::from_channel(&builtin::amplitude_damping(0.75).unwrap(), 1e-9).unwrap();
        let cq = superdense_cq(&k);
        let sum = cq.projections().iter().fold(matrix::zeros(4, 4), |acc, p| acc + p);
        let expected = tensor(&identity(2), &k.p_b()).scale(2.0);
        assert!(max_abs_diff(&sum, &expected) < 1e-9);
    }

    #[test]
    fn cq_from_states_validates_trace() {
        let rho = matrix::diag(&[0.5, 0.6]);
        assert!(cq_from_states(&[rho], 1e-9).is_err());
        let pure = matrix::diag(&[1.0, 0.0]);
        let cq = cq_from_states(&[pure.clone(), matrix::diag(&[0.0, 1.0])], 1e-9).unwrap();
        assert_eq!(cq.num_inputs(), 2);
        assert_eq!(cq.to_ncgraph().rank(), 2);
    }

    #[test]
    fn balanced_two_state_outputs_are_orthogonal() {
        let states = builtin::example4_states(0.5).unwrap();
        let overlap = states[0].dotc(&states[1]).norm();
        assert!(overlap < 1e-15);
    }

    #[test]
    fn relaxed_channel_flags_subnormalization() {
        let e = matrix::diag(&[1.0, 0.5]);
        assert!(KrausChannel::new(2, 2, vec![e.clone()]).is_err());
        let ch = KrausChannel::new_relaxed(2, 2, vec![e]).unwrap();
        assert!(ch.is_subnormalized());
        assert!(KrausChannel::new_relaxed(2, 2, vec![matrix::diag(&[1.1, 0.0])]).is_err());
    }

    #[test]
    fn bad_projector_rejected() {
        assert!(NcGraph::new(1, 2, matrix::diag(&[0.5, 1.0])).is_err());
        assert!(NcGraph::new(2, 2, identity(3)).is_err());
    }
}
