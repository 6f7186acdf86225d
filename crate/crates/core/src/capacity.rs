//! Zero-error capacity programs for non-commutative bipartite graphs and
//! cq-graphs, with witnesses that can be re-checked outside the solver.
//!
//! The one-shot programs carry the condition `⟨P, S⊗1 − U⟩ = 0`. Since
//! `S⊗1 − U ⪰ 0`, this says the slack `W = S⊗1 − U` lives on the range of
//! `Q = 1 − P`, so it is parametrized as `W = Q̃ W' Q̃†` with `Q̃` an isometry
//! onto `range(Q)`. All matrices on `A⊗B` are stored in the eigenbasis
//! `Ω = [Q̃ | P̃]` of `P`, where the linking constraints become sparse.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{superdense_cq, CqGraph, NcGraph};
use crate::matrix::{
    self, hermitian_part, identity, lambda_max, lambda_min, partial_trace, support_basis, tensor, trace_re,
    ComplexMatrix, Subsystem,
};
use crate::sdp::{self, hermitian_basis, BlockKind, Coefficient, SdpOptions, SdpProblem, SdpSolution, Term};

pub use crate::sdp::SolveStatus;

/// Default limit on the Choi dimension `d_A·d_B` of any graph handed to a solver.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Environment variable overriding [`DEFAULT_MAX_DIM`].
pub const MAX_DIM_ENV: &str = "NSZCAP_MAX_DIM";

/// Margin used to decide strict inequalities numerically.
pub const STRICT_TOL: f64 = 1e-7;

/// Default margin for [`is_activatable`].
pub const ACTIVATION_EPS: f64 = 1e-6;

/// Active Choi dimension limit.
pub fn max_choi_dim() -> usize {
    std::env::var(MAX_DIM_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_DIM)
}

pub fn check_size(dim: usize) -> Result<()> {
    let limit = max_choi_dim();
    if dim > limit {
        Err(Error::SizeGuard { dim, limit })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    Upsilon,
    UpsilonHat,
    Aram,
    UpsilonCq,
    UpsilonHatCq,
    AramCq,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::Upsilon,
        Quantity::UpsilonHat,
        Quantity::Aram,
        Quantity::UpsilonCq,
        Quantity::UpsilonHatCq,
        Quantity::AramCq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Upsilon => "upsilon",
            Quantity::UpsilonHat => "upsilon-hat",
            Quantity::Aram => "aram",
            Quantity::UpsilonCq => "upsilon-cq",
            Quantity::UpsilonHatCq => "upsilon-hat-cq",
            Quantity::AramCq => "aram-cq",
        }
    }

    pub fn is_cq(self) -> bool {
        matches!(self, Quantity::UpsilonCq | Quantity::UpsilonHatCq | Quantity::AramCq)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == norm)
            .ok_or_else(|| Error::InvalidProblem(format!("unknown quantity '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct NamedMatrix {
    pub name: String,
    pub matrix: ComplexMatrix,
}

impl NamedMatrix {
    fn new(name: impl Into<String>, matrix: ComplexMatrix) -> Self {
        Self { name: name.into(), matrix }
    }
}

/// Optimal value of a capacity program together with its certificates.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub quantity: Quantity,
    /// Number of messages (linear scale).
    pub value: f64,
    pub log2_value: f64,
    /// `|primal − dual|` reported by the solver.
    pub gap: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// `S_A, U_AB` for the graph programs, `s, R_i` for cq programs, `S_A` for the packing number.
    pub primal_witness: Vec<NamedMatrix>,
    /// `T_B` and, where applicable, `V_AB`.
    pub dual_witness: Vec<NamedMatrix>,
    /// Largest violation of the original constraints by the primal witness.
    pub primal_violation: f64,
    /// Same for the dual witness, when the dual program is checked.
    pub dual_violation: Option<f64>,
}

impl CapacityResult {
    pub fn primal(&self, name: &str) -> Option<&ComplexMatrix> {
        self.primal_witness.iter().find(|w| w.name == name).map(|w| &w.matrix)
    }

    pub fn dual(&self, name: &str) -> Option<&ComplexMatrix> {
        self.dual_witness.iter().find(|w| w.name == name).map(|w| &w.matrix)
    }
}

/// Capacity programs solved with a fixed set of solver options.
#[derive(Debug, Clone, Copy, Default)]
pub struct CapacitySolver {
    pub sdp: SdpOptions,
}

/// Negative part of a smallest eigenvalue.
fn neg(lmin: f64) -> f64 {
    (-lmin).max(0.0)
}

fn psd_violation(m: &ComplexMatrix) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    Ok(neg(lambda_min(&hermitian_part(m))?))
}

fn expand(coeffs: &[Coefficient], weights: &[f64], dim: usize) -> ComplexMatrix {
    coeffs
        .iter()
        .zip(weights)
        .fold(matrix::zeros(dim, dim), |acc, (c, &w)| acc + c.to_dense(dim).scale(w))
}

/// Eigenbasis of `P` with the kernel first.
struct Frame {
    d_a: usize,
    d_b: usize,
    n: usize,
    r_q: usize,
    omega: ComplexMatrix,
}

impl Frame {
    fn new(k: &NcGraph) -> Self {
        let basis = k.basis();
        let n = k.dim();
        let r_q = basis.kernel.ncols();
        let mut omega = matrix::zeros(n, n);
        omega.columns_mut(0, r_q).copy_from(&basis.kernel);
        omega.columns_mut(r_q, n - r_q).copy_from(&basis.support);
        Self { d_a: k.d_a(), d_b: k.d_b(), n, r_q, omega }
    }

    fn q_tilde(&self) -> ComplexMatrix {
        self.omega.columns(0, self.r_q).into_owned()
    }

    fn rotate_in(&self, m: &ComplexMatrix) -> ComplexMatrix {
        hermitian_part(&(self.omega.adjoint() * m * &self.omega))
    }

    fn rotate_out(&self, m: &ComplexMatrix) -> ComplexMatrix {
        hermitian_part(&(&self.omega * m * self.omega.adjoint()))
    }

    /// `tr_B(Ω H Ω†)` for a sparse coefficient `H` on the rotated space.
    fn tr_b_rotated(&self, h: &Coefficient) -> ComplexMatrix {
        let (da, db) = (self.d_a, self.d_b);
        let mut out = matrix::zeros(da, da);
        let mut add = |p: usize, q: usize, v: num_complex::Complex64| {
            // v · tr_B(ω_p ω_q†)
            for a in 0..da {
                for a2 in 0..da {
                    let mut acc = matrix::ZERO;
                    for b in 0..db {
                        acc += self.omega[(a * db + b, p)] * self.omega[(a2 * db + b, q)].conj();
                    }
                    out[(a, a2)] += v * acc;
                }
            }
        };
        match h {
            Coefficient::Sparse(entries) => {
                for &(p, q, v) in entries {
                    add(p, q, v);
                    if p != q {
                        add(q, p, v.conj());
                    }
                }
            }
            Coefficient::Dense(m) => {
                let full = &self.omega * m * self.omega.adjoint();
                out = partial_trace(&full, da, db, Subsystem::Second).expect("shape");
            }
        }
        hermitian_part(&out)
    }
}

/// Sparse coefficient with every index below `r` (lives on the kernel corner).
fn within_corner(h: &Coefficient, r: usize) -> bool {
    match h {
        Coefficient::Sparse(e) => e.iter().all(|&(_, q, _)| q < r),
        Coefficient::Dense(_) => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CqMode {
    /// `Σ (s_i P_i + R_i) = 1`
    Exact,
    /// `Σ (s_i P_i + R_i) ⪯ 1`
    Relaxed,
    /// `Σ s_i P_i ⪯ 1`
    Packing,
}

impl CapacitySolver {
    pub fn new(sdp: SdpOptions) -> Self {
        Self { sdp }
    }

    fn run(&self, problem: &SdpProblem, what: &str) -> Result<SdpSolution> {
        let sol = sdp::solve(problem, &self.sdp)?;
        if !sol.is_optimal() {
            return Err(Error::Solver(format!(
                "{what}: status {} after {} iterations (primal {:.6e}, dual {:.6e}, gap {:.2e}, pinf {:.2e}, dinf {:.2e})",
                sol.status,
                sol.iterations,
                sol.primal_value,
                sol.dual_value,
                sol.gap,
                sol.primal_infeasibility,
                sol.dual_infeasibility
            )));
        }
        Ok(sol)
    }

    /// One-shot capacity `Υ(K)`.
    pub fn upsilon(&self, k: &NcGraph) -> Result<CapacityResult> {
        self.upsilon_impl(k, false)
    }

    /// Activated capacity `Υ̂(K)` from the primal program.
    pub fn upsilon_hat(&self, k: &NcGraph) -> Result<CapacityResult> {
        self.upsilon_impl(k, true)
    }

    fn upsilon_impl(&self, k: &NcGraph, hat: bool) -> Result<CapacityResult> {
        check_size(k.dim())?;
        let f = Frame::new(k);
        let (da, db, n, rq) = (f.d_a, f.d_b, f.n, f.r_q);
        let mut p = SdpProblem::new();
        let s_blk = p.add_block(BlockKind::Hermitian, da);
        let u_blk = p.add_block(BlockKind::Hermitian, n);
        let w_blk = (rq > 0).then(|| p.add_block(BlockKind::Hermitian, rq));
        let r_blk = hat.then(|| p.add_block(BlockKind::Hermitian, db));
        p.add_objective(s_blk, Coefficient::scaled_identity(da, 1.0));

        // Ω†(S⊗1)Ω = Û + W'⊕0
        let link_basis = hermitian_basis(n);
        for h in &link_basis {
            let mut terms = vec![
                Term::new(s_blk, Coefficient::Dense(f.tr_b_rotated(h))),
                Term::new(u_blk, h.scaled(-1.0)),
            ];
            if let Some(w) = w_blk {
                if within_corner(h, rq) {
                    terms.push(Term::new(w, h.scaled(-1.0)));
                }
            }
            p.add_constraint(terms, 0.0);
        }
        // tr_A U (+ R) = 1_B
        let out_basis = hermitian_basis(db);
        for g in &out_basis {
            let gd = g.to_dense(db);
            let mut terms = vec![Term::new(u_blk, Coefficient::Dense(f.rotate_in(&tensor(&identity(da), &gd))))];
            if let Some(r) = r_blk {
                terms.push(Term::new(r, g.clone()));
            }
            p.add_constraint(terms, trace_re(&gd));
        }

        let quantity = if hat { Quantity::UpsilonHat } else { Quantity::Upsilon };
        let sol = self.run(&p, quantity.name())?;
        let s = hermitian_part(&sol.primal_blocks[s_blk]);
        let u = f.rotate_out(&sol.primal_blocks[u_blk]);
        let y = &sol.dual_multipliers;
        let v = f.rotate_out(&expand(&link_basis, &y[..n * n], n));
        let t = hermitian_part(&expand(&out_basis, &y[n * n..], db));

        let primal_violation = upsilon_primal_violation(k, &s, &u, hat)?;
        let dual_violation = Some(upsilon_dual_violation(k, &t, &v, hat)?);
        Ok(CapacityResult {
            quantity,
            value: sol.primal_value,
            log2_value: sol.primal_value.log2(),
            gap: sol.gap,
            status: sol.status,
            iterations: sol.iterations,
            primal_witness: vec![NamedMatrix::new("S_A", s), NamedMatrix::new("U_AB", u)],
            dual_witness: vec![NamedMatrix::new("T_B", t), NamedMatrix::new("V_AB", v)],
            primal_violation,
            dual_violation,
        })
    }

    /// `Υ̂(K)` computed from the minimization over `(T_B, V_AB)`, solved as a
    /// separate program.
    pub fn upsilon_hat_dual(&self, k: &NcGraph) -> Result<CapacityResult> {
        check_size(k.dim())?;
        let f = Frame::new(k);
        let (da, db, n, rq) = (f.d_a, f.d_b, f.n, f.r_q);
        let q_tilde = f.q_tilde();
        // V = 1⊗T − Y1,  Y2 = tr_B V − 1_A,  Y3 = −Q̃†VQ̃
        let mut p = SdpProblem::new();
        let t_blk = p.add_block(BlockKind::Hermitian, db);
        let y1_blk = p.add_block(BlockKind::Hermitian, n);
        let y2_blk = p.add_block(BlockKind::Hermitian, da);
        let y3_blk = (rq > 0).then(|| p.add_block(BlockKind::Hermitian, rq));
        p.add_objective(t_blk, Coefficient::scaled_identity(db, -1.0));

        let in_basis = hermitian_basis(da);
        for g in &in_basis {
            let gd = g.to_dense(da);
            let tr = trace_re(&gd);
            p.add_constraint(
                vec![
                    Term::new(y2_blk, g.clone()),
                    Term::new(y1_blk, Coefficient::Dense(f.rotate_in(&tensor(&gd, &identity(db))))),
                    Term::new(t_blk, Coefficient::scaled_identity(db, -tr)),
                ],
                -tr,
            );
        }
        let corner_basis = hermitian_basis(rq);
        if let Some(y3) = y3_blk {
            for h in &corner_basis {
                let hd = h.to_dense(rq);
                let lifted = &q_tilde * &hd * q_tilde.adjoint();
                let t_coeff = hermitian_part(&partial_trace(&lifted, da, db, Subsystem::First)?);
                p.add_constraint(
                    vec![
                        Term::new(y3, h.clone()),
                        Term::new(y1_blk, h.scaled(-1.0)),
                        Term::new(t_blk, Coefficient::Dense(t_coeff)),
                    ],
                    0.0,
                );
            }
        }

        let sol = self.run(&p, "upsilon-hat (dual program)")?;
        let t = hermitian_part(&sol.primal_blocks[t_blk]);
        let v = hermitian_part(&(tensor(&identity(da), &t) - f.rotate_out(&sol.primal_blocks[y1_blk])));
        let y = &sol.dual_multipliers;
        let s = hermitian_part(&expand(&in_basis, &y[..da * da], da));
        let w = expand(&corner_basis, &y[da * da..], rq);
        let u = hermitian_part(&(tensor(&s, &identity(db)) - &q_tilde * &w * q_tilde.adjoint()));

        let value = -sol.primal_value;
        let dual_violation = Some(upsilon_dual_violation(k, &t, &v, true)?);
        let primal_violation = upsilon_primal_violation(k, &s, &u, true)?;
        Ok(CapacityResult {
            quantity: Quantity::UpsilonHat,
            value,
            log2_value: value.log2(),
            gap: sol.gap,
            status: sol.status,
            iterations: sol.iterations,
            primal_witness: vec![NamedMatrix::new("S_A", s), NamedMatrix::new("U_AB", u)],
            dual_witness: vec![NamedMatrix::new("T_B", t), NamedMatrix::new("V_AB", v)],
            primal_violation,
            dual_violation,
        })
    }

    /// Semidefinite packing number `A(K)`.
    pub fn aram(&self, k: &NcGraph) -> Result<CapacityResult> {
        check_size(k.dim())?;
        let (da, db) = (k.d_a(), k.d_b());
        let mut p = SdpProblem::new();
        let s_blk = p.add_block(BlockKind::Hermitian, da);
        let r_blk = p.add_block(BlockKind::Hermitian, db);
        p.add_objective(s_blk, Coefficient::scaled_identity(da, 1.0));
        let out_basis = hermitian_basis(db);
        for g in &out_basis {
            let gd = g.to_dense(db);
            // tr(G tr_A(P(S⊗1))) = tr(S tr_B((1⊗G)P))
            let coeff = partial_trace(&(tensor(&identity(da), &gd) * k.projection()), da, db, Subsystem::Second)?;
            p.add_constraint(
                vec![Term::new(s_blk, Coefficient::Dense(hermitian_part(&coeff))), Term::new(r_blk, g.clone())],
                trace_re(&gd),
            );
        }
        let sol = self.run(&p, "aram")?;
        let s = hermitian_part(&sol.primal_blocks[s_blk]);
        let t = hermitian_part(&expand(&out_basis, &sol.dual_multipliers, db));
        let primal_violation = aram_primal_violation(k, &s)?;
        let dual_violation = Some(aram_dual_violation(k, &t)?);
        Ok(CapacityResult {
            quantity: Quantity::Aram,
            value: sol.primal_value,
            log2_value: sol.primal_value.log2(),
            gap: sol.gap,
            status: sol.status,
            iterations: sol.iterations,
            primal_witness: vec![NamedMatrix::new("S_A", s)],
            dual_witness: vec![NamedMatrix::new("T_B", t)],
            primal_violation,
            dual_violation,
        })
    }

    pub fn upsilon_cq(&self, c: &CqGraph) -> Result<CapacityResult> {
        self.cq_impl(c, CqMode::Exact)
    }

    pub fn upsilon_hat_cq(&self, c: &CqGraph) -> Result<CapacityResult> {
        self.cq_impl(c, CqMode::Relaxed)
    }

    pub fn aram_cq(&self, c: &CqGraph) -> Result<CapacityResult> {
        self.cq_impl(c, CqMode::Packing)
    }

    fn cq_impl(&self, c: &CqGraph, mode: CqMode) -> Result<CapacityResult> {
        let (na, db) = (c.num_inputs(), c.d_b());
        check_size(na * db)?;
        let kernels: Vec<ComplexMatrix> = c
            .projections()
            .iter()
            .map(|pi| support_basis(&hermitian_part(pi), 0.5).map(|b| b.kernel))
            .collect::<Result<_>>()?;

        let mut p = SdpProblem::new();
        let s_blk = p.add_block(BlockKind::NonnegDiagonal, na);
        // R_i = Q̃_i R'_i Q̃_i†,  Y'_i = s_i 1 − R'_i
        let mut r_blks: Vec<Option<(usize, usize)>> = vec![None; na];
        if mode != CqMode::Packing {
            for (i, q) in kernels.iter().enumerate() {
                let r = q.ncols();
                if r > 0 {
                    let rb = p.add_block(BlockKind::Hermitian, r);
                    let yb = p.add_block(BlockKind::Hermitian, r);
                    r_blks[i] = Some((rb, yb));
                }
            }
        }
        let slack_blk = (mode != CqMode::Exact).then(|| p.add_block(BlockKind::Hermitian, db));
        p.add_objective(s_blk, Coefficient::scaled_identity(na, 1.0));

        let out_basis = hermitian_basis(db);
        for g in &out_basis {
            let gd = g.to_dense(db);
            let weights = c.projections().iter().enumerate().map(|(i, pi)| (i, matrix::inner_re(&gd, pi)));
            let mut terms = vec![Term::new(s_blk, Coefficient::diagonal(weights))];
            for (i, blk) in r_blks.iter().enumerate() {
                if let Some((rb, _)) = blk {
                    let q = &kernels[i];
                    terms.push(Term::new(*rb, Coefficient::Dense(hermitian_part(&(q.adjoint() * &gd * q)))));
                }
            }
            if let Some(sb) = slack_blk {
                terms.push(Term::new(sb, g.clone()));
            }
            p.add_constraint(terms, trace_re(&gd));
        }
        for (i, blk) in r_blks.iter().enumerate() {
            if let Some((rb, yb)) = *blk {
                for h in hermitian_basis(kernels[i].ncols()) {
                    let tr = trace_re(&h.to_dense(kernels[i].ncols()));
                    p.add_constraint(
                        vec![
                            Term::new(yb, h.clone()),
                            Term::new(rb, h),
                            Term::new(s_blk, Coefficient::diagonal([(i, -tr)])),
                        ],
                        0.0,
                    );
                }
            }
        }

        let quantity = match mode {
            CqMode::Exact => Quantity::UpsilonCq,
            CqMode::Relaxed => Quantity::UpsilonHatCq,
            CqMode::Packing => Quantity::AramCq,
        };
        let sol = self.run(&p, quantity.name())?;
        let s: Vec<f64> = (0..na).map(|i| sol.primal_blocks[s_blk][(i, i)].re).collect();
        let r: Vec<ComplexMatrix> = r_blks
            .iter()
            .enumerate()
            .map(|(i, blk)| match blk {
                Some((rb, _)) => hermitian_part(&(&kernels[i] * &sol.primal_blocks[*rb] * kernels[i].adjoint())),
                None => matrix::zeros(db, db),
            })
            .collect();
        let t = hermitian_part(&expand(&out_basis, &sol.dual_multipliers[..db * db], db));

        let primal_violation = cq_primal_violation(c, &s, &r, mode)?;
        let dual_violation = match mode {
            CqMode::Packing => Some(aram_cq_dual_violation(c, &t)?),
            _ => None,
        };
        let mut primal_witness = vec![NamedMatrix::new("s", matrix::diag(&s))];
        if mode != CqMode::Packing {
            primal_witness.extend(r.into_iter().enumerate().map(|(i, m)| NamedMatrix::new(format!("R_{i}"), m)));
        }
        Ok(CapacityResult {
            quantity,
            value: sol.primal_value,
            log2_value: sol.primal_value.log2(),
            gap: sol.gap,
            status: sol.status,
            iterations: sol.iterations,
            primal_witness,
            dual_witness: vec![NamedMatrix::new("T_B", t)],
            primal_violation,
            dual_violation,
        })
    }

    /// Computes `quantity` for a graph. The cq quantities require `cq`.
    pub fn compute(&self, quantity: Quantity, k: &NcGraph, cq: Option<&CqGraph>) -> Result<CapacityResult> {
        match quantity {
            Quantity::Upsilon => self.upsilon(k),
            Quantity::UpsilonHat => self.upsilon_hat(k),
            Quantity::Aram => self.aram(k),
            _ => {
                let c = cq.ok_or_else(|| {
                    Error::InvalidProblem(format!("{quantity} needs a classical-quantum channel"))
                })?;
                match quantity {
                    Quantity::UpsilonCq => self.upsilon_cq(c),
                    Quantity::UpsilonHatCq => self.upsilon_hat_cq(c),
                    _ => self.aram_cq(c),
                }
            }
        }
    }

    /// `Υ̂(K) > Υ(K) + eps`.
    pub fn is_activatable(&self, k: &NcGraph, eps: f64) -> Result<bool> {
        Ok(self.upsilon_hat(k)?.value > self.upsilon(k)?.value + eps)
    }

    /// Least `n ≤ n_max` with `Υ(K^{⊗n}) ≥ 2`.
    pub fn find_n0(&self, k: &NcGraph, n_max: usize) -> Result<Option<usize>> {
        let mut power = k.clone();
        for n in 1..=n_max {
            if n > 1 {
                let dim = (k.dim() as u128).pow(n as u32);
                check_size(usize::try_from(dim).unwrap_or(usize::MAX))?;
                power = crate::graph::tensor_graph(&power, k);
            }
            if self.upsilon(&power)?.value >= 2.0 - 1e-7 {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    /// The four equivalent conditions for a positive activated capacity.
    pub fn thm9_report(&self, k: &NcGraph) -> Result<Thm9Report> {
        let aram = self.aram(k)?.value;
        let upsilon_hat = self.upsilon_hat(k)?.value;
        let pb_max = lambda_max(&k.p_b())?;
        let trq = partial_trace(&k.complement(), k.d_a(), k.d_b(), Subsystem::First)?;
        let trq_min = lambda_min(&hermitian_part(&trq))?;
        Ok(Thm9Report { d_a: k.d_a(), aram, upsilon_hat, pb_max, trq_min, strict_tol: STRICT_TOL })
    }

    /// Like [`CapacitySolver::thm9_report`], but disagreement between the
    /// conditions is an error.
    pub fn thm9_criteria(&self, k: &NcGraph) -> Result<Thm9Report> {
        let report = self.thm9_report(k)?;
        if report.consistent() {
            Ok(report)
        } else {
            Err(Error::Inconsistent(format!("equivalent conditions disagree: {report}")))
        }
    }
}

/// Values behind the four equivalent conditions.
#[derive(Debug, Clone, Copy)]
pub struct Thm9Report {
    pub d_a: usize,
    pub aram: f64,
    pub upsilon_hat: f64,
    /// `λ_max(tr_A P)`
    pub pb_max: f64,
    /// `λ_min(tr_A Q)`
    pub trq_min: f64,
    pub strict_tol: f64,
}

impl Thm9Report {
    pub fn aram_gt_1(&self) -> bool {
        self.aram_margin() > self.strict_tol
    }

    pub fn pb_strict(&self) -> bool {
        self.pb_margin() > self.strict_tol
    }

    pub fn trq_posdef(&self) -> bool {
        self.trq_margin() > self.strict_tol
    }

    pub fn uhat_gt_1(&self) -> bool {
        self.uhat_margin() > self.strict_tol
    }

    pub fn aram_margin(&self) -> f64 {
        self.aram - 1.0
    }

    pub fn pb_margin(&self) -> f64 {
        self.d_a as f64 - self.pb_max
    }

    pub fn trq_margin(&self) -> f64 {
        self.trq_min
    }

    pub fn uhat_margin(&self) -> f64 {
        self.upsilon_hat - 1.0
    }

    pub fn flags(&self) -> [bool; 4] {
        [self.aram_gt_1(), self.pb_strict(), self.trq_posdef(), self.uhat_gt_1()]
    }

    pub fn consistent(&self) -> bool {
        let f = self.flags();
        f.iter().all(|&b| b == f[0])
    }
}

impl fmt::Display for Thm9Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "A>1: {} ({:+.3e}), P_B<d_A: {} ({:+.3e}), tr_A Q>0: {} ({:+.3e}), Υ̂>1: {} ({:+.3e})",
            self.aram_gt_1(),
            self.aram_margin(),
            self.pb_strict(),
            self.pb_margin(),
            self.trq_posdef(),
            self.trq_margin(),
            self.uhat_gt_1(),
            self.uhat_margin()
        )
    }
}

/// `d_A / ‖tr_A P‖_∞`, the rate of superdense coding through `K`.
pub fn superdense_bound(k: &NcGraph) -> f64 {
    let norm = lambda_max(&k.p_b()).expect("tr_A P is Hermitian");
    k.d_a() as f64 / norm
}

/// Constraint violation of `(S, U)` for the one-shot program (`hat = false`,
/// `tr_A U = 1`) or the activated one (`tr_A U ⪯ 1`).
pub fn upsilon_primal_violation(k: &NcGraph, s: &ComplexMatrix, u: &ComplexMatrix, hat: bool) -> Result<f64> {
    let (da, db) = (k.d_a(), k.d_b());
    let slack = tensor(s, &identity(db)) - u;
    let tr_u = partial_trace(u, da, db, Subsystem::First)?;
    let marginal = if hat {
        psd_violation(&(identity(db) - &tr_u))?
    } else {
        matrix::op_norm(&hermitian_part(&(tr_u - identity(db))))?
    };
    let support = matrix::inner_re(k.projection(), &slack).abs();
    Ok([psd_violation(s)?, psd_violation(u)?, psd_violation(&slack)?, marginal, support]
        .into_iter()
        .fold(0.0, f64::max))
}

/// Constraint violation of `(T, V)` for the minimization dual to the
/// activated program. With `require_t_psd = false` the condition `T ⪰ 0` is
/// dropped, which gives the dual of the one-shot program.
pub fn upsilon_dual_violation(k: &NcGraph, t: &ComplexMatrix, v: &ComplexMatrix, require_t_psd: bool) -> Result<f64> {
    let (da, db) = (k.d_a(), k.d_b());
    let q = k.complement();
    let upper = psd_violation(&(tensor(&identity(da), t) - v))?;
    let marginal = psd_violation(&(partial_trace(v, da, db, Subsystem::Second)? - identity(da)))?;
    let kernel = psd_violation(&-(&q * v * &q))?;
    let t_psd = if require_t_psd { psd_violation(t)? } else { 0.0 };
    Ok([upper, marginal, kernel, t_psd].into_iter().fold(0.0, f64::max))
}

/// Constraint violation of `S` in the packing program.
pub fn aram_primal_violation(k: &NcGraph, s: &ComplexMatrix) -> Result<f64> {
    let (da, db) = (k.d_a(), k.d_b());
    let load = partial_trace(&(k.projection() * tensor(s, &identity(db))), da, db, Subsystem::First)?;
    Ok(psd_violation(s)?.max(psd_violation(&(identity(db) - hermitian_part(&load)))?))
}

/// Constraint violation of `T` in the dual of the packing program:
/// `T ⪰ 0`, `tr_B(P(1⊗T)) ⪰ 1_A`.
pub fn aram_dual_violation(k: &NcGraph, t: &ComplexMatrix) -> Result<f64> {
    let (da, db) = (k.d_a(), k.d_b());
    let cover = partial_trace(&(k.projection() * tensor(&identity(da), t)), da, db, Subsystem::Second)?;
    Ok(psd_violation(t)?.max(psd_violation(&(hermitian_part(&cover) - identity(da)))?))
}

/// Dual of the cq packing program: `T ⪰ 0`, `tr(P_i T) ≥ 1`.
pub fn aram_cq_dual_violation(c: &CqGraph, t: &ComplexMatrix) -> Result<f64> {
    let cover = c.projections().iter().map(|p| neg(matrix::inner_re(p, t) - 1.0)).fold(0.0, f64::max);
    Ok(psd_violation(t)?.max(cover))
}

fn cq_primal_violation(c: &CqGraph, s: &[f64], r: &[ComplexMatrix], mode: CqMode) -> Result<f64> {
    let db = c.d_b();
    let mut worst = s.iter().map(|&v| neg(v)).fold(0.0, f64::max);
    let mut total = matrix::zeros(db, db);
    for (i, pi) in c.projections().iter().enumerate() {
        total += pi.scale(s[i]);
        if mode != CqMode::Packing {
            total += &r[i];
            worst = worst.max(psd_violation(&r[i])?);
            worst = worst.max(psd_violation(&((identity(db) - pi).scale(s[i]) - &r[i]))?);
        }
    }
    let marginal = match mode {
        CqMode::Exact => matrix::op_norm(&hermitian_part(&(total - identity(db))))?,
        _ => psd_violation(&(identity(db) - total))?,
    };
    Ok(worst.max(marginal))
}

/// `Υ(K)` with default solver options.
pub fn upsilon(k: &NcGraph) -> Result<CapacityResult> {
    CapacitySolver::default().upsilon(k)
}

/// `Υ̂(K)` with default solver options.
pub fn upsilon_hat(k: &NcGraph) -> Result<CapacityResult> {
    CapacitySolver::default().upsilon_hat(k)
}

/// `Υ̂(K)` from the minimization program, with default solver options.
pub fn upsilon_hat_dual(k: &NcGraph) -> Result<CapacityResult> {
    CapacitySolver::default().upsilon_hat_dual(k)
}

/// `A(K)` with default solver options.
pub fn aram(k: &NcGraph) -> Result<CapacityResult> {
    CapacitySolver::default().aram(k)
}

pub fn upsilon_cq(c: &CqGraph) -> Result<CapacityResult> {
    CapacitySolver::default().upsilon_cq(c)
}

pub fn upsilon_hat_cq(c: &CqGraph) -> Result<CapacityResult> {
    CapacitySolver::default().upsilon_hat_cq(c)
}

pub fn aram_cq(c: &CqGraph) -> Result<CapacityResult> {
    CapacitySolver::default().aram_cq(c)
}

pub fn is_activatable(k: &NcGraph, eps: f64) -> Result<bool> {
    CapacitySolver::default().is_activatable(k, eps)
}

pub fn find_n0(k: &NcGraph, n_max: usize) -> Result<Option<usize>> {
    CapacitySolver::default().find_n0(k, n_max)
}

pub fn thm9_criteria(k: &NcGraph) -> Result<Thm9Report> {
    CapacitySolver::default().thm9_criteria(k)
}

/// `A` of the superdense-coding cq-graph of `K`.
pub fn superdense_aram(k: &NcGraph) -> Result<CapacityResult> {
    check_size(k.dim())?;
    aram_cq(&superdense_cq(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{amplitude_damping, depolarizing_channel, example4_cq, identity_channel};
    use crate::graph::{delta, CqGraph, NcGraph};
    use crate::matrix::{ket_bra, DEFAULT_RANK_TOL};

    fn graph(ch: &crate::graph::KrausChannel) -> NcGraph {
        NcGraph::from_channel(ch, DEFAULT_RANK_TOL).unwrap()
    }

    #[test]
    fn delta_values() {
        for ell in 1..=5 {
            let k = delta(ell).unwrap();
            let l = ell as f64;
            assert!((upsilon(&k).unwrap().value - l).abs() < 1e-7);
            assert!((upsilon_hat(&k).unwrap().value - l).abs() < 1e-7);
            assert!((aram(&k).unwrap().value - l).abs() < 1e-7);
        }
    }

    #[test]
    fn delta_dual_witness_matches_closed_form() {
        // T = 1, V = Σ|ii⟩⟨ii| is optimal for Δ_ℓ.
        let k = delta(3).unwrap();
        let t = identity(3);
        let v = k.projection().clone();
        assert!(upsilon_dual_violation(&k, &t, &v, true).unwrap() < 1e-12);
        let r = upsilon_hat_dual(&k).unwrap();
        assert!((r.value - 3.0).abs() < 1e-7);
        assert!(r.dual_violation.unwrap() < 1e-7);
    }

    #[test]
    fn two_state_channel_at_three_quarters() {
        let k = graph(&crate::builtin::example4_channel(0.75).unwrap());
        let u = upsilon(&k).unwrap();
        assert!((u.value - 1.0).abs() < 1e-6, "{}", u.value);
        let uh = upsilon_hat(&k).unwrap();
        assert!((uh.value - 4.0 / 3.0).abs() < 1e-6);
        let ud = upsilon_hat_dual(&k).unwrap();
        assert!((ud.value - 4.0 / 3.0).abs() < 1e-6);
        assert!((aram(&k).unwrap().value - 4.0 / 3.0).abs() < 1e-6);
        assert!(uh.primal_violation < 1e-7 && ud.dual_violation.unwrap() < 1e-7);
    }

    #[test]
    fn witnesses_reproduce_values() {
        let k = graph(&amplitude_damping(0.75).unwrap());
        for r in [upsilon(&k).unwrap(), upsilon_hat(&k).unwrap(), upsilon_hat_dual(&k).unwrap()] {
            let s = r.primal("S_A").unwrap();
            let t = r.dual("T_B").unwrap();
            assert!((trace_re(s) - r.value).abs() < 1e-6);
            assert!((trace_re(t) - r.value).abs() < 1e-6);
            assert!(r.primal_violation < 1e-7, "{:?} {}", r.quantity, r.primal_violation);
            assert!(r.dual_violation.unwrap() < 1e-7);
        }
    }

    #[test]
    fn amplitude_damping_witness_is_feasible() {
        let k = graph(&amplitude_damping(0.75).unwrap());
        let s = matrix::diag(&[3.0 / 8.0, 3.0 / 4.0]);
        let u = (ket_bra(4, 0, 0) + ket_bra(4, 0, 3) + ket_bra(4, 3, 0) + ket_bra(4, 3, 3)).scale(0.25)
            + ket_bra(4, 2, 2).scale(0.75);
        assert!(upsilon_primal_violation(&k, &s, &u, true).unwrap() < 1e-12);
        assert!(upsilon_primal_violation(&k, &s, &u, false).unwrap() > 1e-3);
        assert!(upsilon_hat(&k).unwrap().value >= trace_re(&s) - 1e-6);
    }

    #[test]
    fn superdense_examples() {
        assert!((superdense_bound(&graph(&identity_channel(2))) - 4.0).abs() < 1e-12);
        assert!((superdense_bound(&delta(3).unwrap()) - 3.0).abs() < 1e-12);
        assert!((superdense_bound(&graph(&amplitude_damping(0.75).unwrap())) - 10.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn cq_examples() {
        let orth = CqGraph::new(vec![ket_bra(2, 0, 0), ket_bra(2, 1, 1)]).unwrap();
        for r in [upsilon_cq(&orth).unwrap(), upsilon_hat_cq(&orth).unwrap(), aram_cq(&orth).unwrap()] {
            assert!((r.value - 2.0).abs() < 1e-7);
        }
        let single = CqGraph::new(vec![ket_bra(2, 0, 0)]).unwrap();
        assert!((upsilon_cq(&single).unwrap().value - 1.0).abs() < 1e-7);
        let same = CqGraph::new(vec![ket_bra(2, 0, 0), ket_bra(2, 0, 0)]).unwrap();
        assert!((aram_cq(&same).unwrap().value - 1.0).abs() < 1e-7);
        let c = example4_cq(0.75).unwrap();
        assert!((upsilon_cq(&c).unwrap().value - 1.0).abs() < 1e-6);
        assert!((upsilon_hat_cq(&c).unwrap().value - 4.0 / 3.0).abs() < 1e-6);
        let a = aram_cq(&c).unwrap();
        assert!((a.value - 4.0 / 3.0).abs() < 1e-6);
        assert!(a.dual_violation.unwrap() < 1e-7);
    }

    #[test]
    fn positivity_conditions_examples() {
        let r = thm9_criteria(&delta(1).unwrap()).unwrap();
        assert_eq!(r.flags(), [false; 4]);
        let r = thm9_criteria(&graph(&depolarizing_channel(2))).unwrap();
        assert_eq!(r.flags(), [false; 4]);
        let r = thm9_criteria(&graph(&crate::builtin::example4_channel(0.75).unwrap())).unwrap();
        assert_eq!(r.flags(), [true; 4]);
    }

    #[test]
    fn activation_and_n0() {
        assert!(is_activatable(&graph(&crate::builtin::example4_channel(0.75).unwrap()), ACTIVATION_EPS).unwrap());
        assert!(!is_activatable(&delta(2).unwrap(), ACTIVATION_EPS).unwrap());
        assert_eq!(find_n0(&delta(2).unwrap(), 2).unwrap(), Some(1));
        assert_eq!(find_n0(&delta(3).unwrap(), 1).unwrap(), Some(1));
    }

    #[test]
    fn quantity_names_round_trip() {
        for q in Quantity::ALL {
            assert_eq!(q.name().parse::<Quantity>().unwrap(), q);
        }
        assert!("upsilon_hat".parse::<Quantity>().is_ok());
        assert!("theta".parse::<Quantity>().is_err());
    }
}
