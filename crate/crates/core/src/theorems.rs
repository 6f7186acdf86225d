//! Numerical checks of the structural identities and inequalities satisfied
//! by the capacity programs, on built-in channels and seeded random ones.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;

use crate::builtin;
use crate::capacity::{
    aram_dual_violation, superdense_bound, upsilon_primal_violation, CapacitySolver, Thm9Report, STRICT_TOL,
};
use crate::error::Result;
use crate::graph::{delta, direct_sum, superdense_cq, tensor_graph, KrausChannel, NcGraph};
use crate::matrix::{self, ket_bra, lambda_max, lambda_min, partial_trace, Subsystem, DEFAULT_RANK_TOL};
use crate::random::{random_cq, RandomChannelSpec};

/// Default tolerance for identities between two solver outputs.
pub const EQUALITY_TOL: f64 = 1e-5;

/// `(1 + √5) / 2`
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// Offset separating the second member of a random pair from the first.
const PAIR_SEED_OFFSET: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
    /// `lhs ≠ 0` implies `rhs ≠ 0`.
    Implies,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Eq => "eq",
            Relation::Ge => "ge",
            Relation::Le => "le",
            Relation::Implies => "implies",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// Both sides were computed and compared.
    Substantive,
    /// The hypothesis does not hold, so there is nothing to compare.
    Vacuous,
    /// Not attempted (size budget or missing precondition).
    Skipped,
}

/// One verified relation `lhs ~ rhs`.
#[derive(Debug, Clone)]
pub struct TheoremCheck {
    pub name: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub passed: bool,
    pub kind: CheckKind,
    pub note: String,
}

impl TheoremCheck {
    pub fn new(
        name: impl Into<String>,
        instance: impl Into<String>,
        lhs: f64,
        relation: Relation,
        rhs: f64,
        tolerance: f64,
    ) -> Self {
        let mut c = Self {
            name: name.into(),
            instance: instance.into(),
            lhs,
            rhs,
            relation,
            tolerance,
            passed: false,
            kind: CheckKind::Substantive,
            note: String::new(),
        };
        c.passed = c.holds();
        c
    }

    fn not_run(name: &str, instance: &str, kind: CheckKind, passed: bool, note: String) -> Self {
        Self {
            name: name.into(),
            instance: instance.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            relation: Relation::Eq,
            tolerance: 0.0,
            passed,
            kind,
            note,
        }
    }

    pub fn vacuous(name: &str, instance: &str, note: impl Into<String>) -> Self {
        Self::not_run(name, instance, CheckKind::Vacuous, true, note.into())
    }

    pub fn skipped(name: &str, instance: &str, note: impl Into<String>) -> Self {
        Self::not_run(name, instance, CheckKind::Skipped, true, note.into())
    }

    /// A check that could not be evaluated because a computation failed.
    pub fn errored(name: &str, instance: &str, note: impl Into<String>) -> Self {
        Self::not_run(name, instance, CheckKind::Substantive, false, note.into())
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Slack of the relation; nonnegative exactly when it holds.
    pub fn margin(&self) -> f64 {
        match self.relation {
            Relation::Eq => self.tolerance - (self.lhs - self.rhs).abs(),
            Relation::Ge => self.lhs - self.rhs + self.tolerance,
            Relation::Le => self.rhs - self.lhs + self.tolerance,
            Relation::Implies => {
                if self.lhs == 0.0 || self.rhs != 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    fn holds(&self) -> bool {
        self.margin() >= 0.0
    }

    /// Re-evaluates a substantive check under a different tolerance.
    pub fn set_tolerance(&mut self, tolerance: f64) {
        if self.kind == CheckKind::Substantive && self.lhs.is_finite() && self.relation != Relation::Implies {
            self.tolerance = tolerance;
            self.passed = self.holds();
        }
    }

    /// Family part of the name (before any `/`).
    pub fn family(&self) -> &str {
        self.name.split('/').next().unwrap_or(&self.name)
    }
}

impl fmt::Display for TheoremCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match (self.kind, self.passed) {
            (CheckKind::Vacuous, _) => "VACUOUS",
            (CheckKind::Skipped, _) => "SKIP",
            (_, true) => "PASS",
            (_, false) => "FAIL",
        };
        write!(f, "{tag:<7} {} [{}]", self.name, self.instance)?;
        if self.lhs.is_finite() || self.rhs.is_finite() {
            write!(
                f,
                " lhs={:.10} {} rhs={:.10} tol={:.1e} margin={:+.3e}",
                self.lhs,
                self.relation,
                self.rhs,
                self.tolerance,
                self.margin()
            )?;
        }
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

/// A graph together with a stable label used in reports and as cache key.
#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub graph: NcGraph,
}

impl Instance {
    pub fn new(label: impl Into<String>, graph: NcGraph) -> Self {
        Self { label: label.into(), graph }
    }

    pub fn from_channel(label: impl Into<String>, ch: &KrausChannel) -> Result<Self> {
        Ok(Self::new(label, NcGraph::from_channel(ch, DEFAULT_RANK_TOL)?))
    }

    pub fn random(seed: u64) -> Self {
        let spec = RandomChannelSpec::from_seed(seed);
        Self::from_channel(spec.describe(), &spec.sample()).expect("random channels are valid")
    }

    pub fn delta(ell: usize) -> Self {
        Self::new(format!("delta({ell})"), delta(ell).expect("ell ≥ 1"))
    }

    pub fn example4(alpha_sq: f64) -> Self {
        Self::from_channel(format!("example4({alpha_sq:.6})"), &builtin::example4_channel(alpha_sq).expect("valid α²"))
            .expect("valid channel")
    }

    pub fn amplitude_damping(r: f64) -> Self {
        Self::from_channel(format!("amplitude-damping({r})"), &builtin::amplitude_damping(r).expect("valid r"))
            .expect("valid channel")
    }

    pub fn prop11() -> Self {
        Self::from_channel("prop11", &builtin::prop11_channel()).expect("valid channel")
    }

    pub fn tensor(&self, other: &Instance) -> Instance {
        Instance::new(format!("{}⊗{}", self.label, other.label), tensor_graph(&self.graph, &other.graph))
    }

    pub fn direct_sum(&self, other: &Instance) -> Instance {
        Instance::new(format!("{}⊕{}", self.label, other.label), direct_sum(&self.graph, &other.graph))
    }

    pub fn power(&self, n: usize) -> Instance {
        let graph = (1..n).fold(self.graph.clone(), |acc, _| tensor_graph(&acc, &self.graph));
        Instance::new(format!("({})^{n}", self.label), graph)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Program {
    Upsilon,
    UpsilonHat,
    UpsilonHatDual,
    Aram,
}

/// Why a value is unavailable.
#[derive(Debug, Clone)]
enum Miss {
    TooLarge(String),
    Failed(String),
}

type Value = std::result::Result<f64, Miss>;

/// Runs checks with a shared solver configuration, size budget and cache of
/// solved programs.
pub struct Verifier {
    solver: CapacitySolver,
    max_dim: usize,
    cache: RefCell<BTreeMap<(String, Program), Value>>,
}

impl Verifier {
    pub fn new(solver: CapacitySolver, max_dim: usize) -> Self {
        Self { solver, max_dim, cache: RefCell::new(BTreeMap::new()) }
    }

    fn fits(&self, inst: &Instance) -> std::result::Result<(), Miss> {
        if inst.graph.dim() > self.max_dim {
            Err(Miss::TooLarge(format!(
                "{} has Choi dimension {} above the budget {}",
                inst.label,
                inst.graph.dim(),
                self.max_dim
            )))
        } else {
            Ok(())
        }
    }

    fn value(&self, inst: &Instance, program: Program) -> Value {
        let key = (inst.label.clone(), program);
        if let Some(v) = self.cache.borrow().get(&key) {
            return v.clone();
        }
        let v = self.fits(inst).and_then(|()| {
            let s = &self.solver;
            let r = match program {
                Program::Upsilon => s.upsilon(&inst.graph),
                Program::UpsilonHat => s.upsilon_hat(&inst.graph),
                Program::UpsilonHatDual => s.upsilon_hat_dual(&inst.graph),
                Program::Aram => s.aram(&inst.graph),
            };
            r.map(|r| r.value).map_err(|e| Miss::Failed(format!("{}: {e}", inst.label)))
        });
        self.cache.borrow_mut().insert(key, v.clone());
        v
    }

    fn upsilon(&self, inst: &Instance) -> Value {
        self.value(inst, Program::Upsilon)
    }

    fn upsilon_hat(&self, inst: &Instance) -> Value {
        self.value(inst, Program::UpsilonHat)
    }

    fn aram(&self, inst: &Instance) -> Value {
        self.value(inst, Program::Aram)
    }

    /// Builds a check from a fallible computation of `(lhs, rhs)`.
    fn compare(
        name: &str,
        instance: &str,
        relation: Relation,
        tolerance: f64,
        sides: std::result::Result<(f64, f64), Miss>,
    ) -> TheoremCheck {
        match sides {
            Ok((lhs, rhs)) => TheoremCheck::new(name, instance, lhs, relation, rhs, tolerance),
            Err(Miss::TooLarge(note)) => TheoremCheck::skipped(name, instance, note),
            Err(Miss::Failed(note)) => TheoremCheck::errored(name, instance, note),
        }
    }

    /// `Υ̂(K⊗Δ_ℓ) = ℓ Υ̂(K)`.
    pub fn check_lemma2(&self, k: &Instance, ell: usize) -> TheoremCheck {
        let kd = k.tensor(&Instance::delta(ell));
        let l = ell as f64;
        let sides = (|| {
            let base = self.upsilon_hat(k)?;
            Ok((self.upsilon_hat(&kd)?, l * base))
        })();
        let tol = sides.as_ref().map(|(_, rhs)| EQUALITY_TOL * (l + rhs)).unwrap_or(EQUALITY_TOL);
        Self::compare("lemma2", &format!("{}, ℓ={ell}", k.label), Relation::Eq, tol, sides)
    }

    /// `Υ(K⊗Δ_ℓ)/ℓ = Υ̂(K)`.
    pub fn check_main_theorem(&self, k: &Instance, ell: usize) -> TheoremCheck {
        let kd = k.tensor(&Instance::delta(ell));
        let sides = (|| Ok((self.upsilon(&kd)? / ell as f64, self.upsilon_hat(k)?)))();
        Self::compare("main-theorem", &format!("{}, ℓ={ell}", k.label), Relation::Eq, EQUALITY_TOL, sides)
    }

    /// Cross-activation: if `Υ(K2) − 1 ≥ 1/Υ̂(K1)` then
    /// `Υ(K1⊗K2) ≥ Υ̂(K1) Υ(K2)`.
    pub fn check_theorem5(&self, k1: &Instance, k2: &Instance) -> TheoremCheck {
        const NAME: &str = "theorem5";
        let instance = format!("{}, {}", k1.label, k2.label);
        let hyp = (|| Ok((self.upsilon_hat(k1)?, self.upsilon(k2)?)))();
        let (uh1, u2) = match hyp {
            Ok(v) => v,
            Err(e) => return Self::compare(NAME, &instance, Relation::Ge, EQUALITY_TOL, Err(e)),
        };
        if u2 <= 1.0 + STRICT_TOL {
            return TheoremCheck::vacuous(NAME, &instance, format!("Υ(K2) = {u2:.9} leaves no room for activation"));
        }
        if u2 - 1.0 < 1.0 / uh1 - STRICT_TOL {
            return TheoremCheck::vacuous(
                NAME,
                &instance,
                format!("hypothesis fails: Υ(K2) − 1 = {:.6} < 1/Υ̂(K1) = {:.6}", u2 - 1.0, 1.0 / uh1),
            );
        }
        let joint = k1.tensor(k2);
        let sides = self.upsilon(&joint).map(|u| (u, uh1 * u2));
        Self::compare(NAME, &instance, Relation::Ge, EQUALITY_TOL, sides)
    }

    /// If `Υ(K) ≥ (1+√5)/2` then `Υ(K⊗K) ≥ Υ̂(K) Υ(K)`.
    pub fn check_corollary6(&self, k: &Instance) -> TheoremCheck {
        const NAME: &str = "corollary6";
        let u = match self.upsilon(k) {
            Ok(u) => u,
            Err(e) => return Self::compare(NAME, &k.label, Relation::Ge, EQUALITY_TOL, Err(e)),
        };
        if u < GOLDEN_RATIO - 1e-9 {
            return TheoremCheck::vacuous(NAME, &k.label, format!("Υ(K) = {u:.9} below the golden ratio"));
        }
        let kk = k.tensor(k);
        let sides = (|| Ok((self.upsilon(&kk)?, self.upsilon_hat(k)? * u)))();
        Self::compare(NAME, &k.label, Relation::Ge, EQUALITY_TOL, sides)
    }

    /// `Υ(K1⊕K2) = Υ̂(K1) + Υ̂(K2)`.
    pub fn check_theorem7(&self, k1: &Instance, k2: &Instance) -> TheoremCheck {
        let sum = k1.direct_sum(k2);
        let sides = (|| Ok((self.upsilon(&sum)?, self.upsilon_hat(k1)? + self.upsilon_hat(k2)?)))();
        Self::compare("theorem7", &sum.label, Relation::Eq, EQUALITY_TOL, sides)
    }

    /// Agreement of the four equivalent conditions, the superdense lower bound
    /// on `Υ̂`, and the packing number of the superdense cq-graph.
    pub fn check_theorem9(&self, k: &Instance) -> Vec<TheoremCheck> {
        let bound = superdense_bound(&k.graph);
        let report: std::result::Result<Thm9Report, Miss> = (|| {
            let pb_max = lambda_max(&k.graph.p_b()).map_err(|e| Miss::Failed(e.to_string()))?;
            let trq = partial_trace(&k.graph.complement(), k.graph.d_a(), k.graph.d_b(), Subsystem::First)
                .map_err(|e| Miss::Failed(e.to_string()))?;
            let trq_min = lambda_min(&matrix::hermitian_part(&trq)).map_err(|e| Miss::Failed(e.to_string()))?;
            Ok(Thm9Report {
                d_a: k.graph.d_a(),
                aram: self.aram(k)?,
                upsilon_hat: self.upsilon_hat(k)?,
                pb_max,
                trq_min,
                strict_tol: STRICT_TOL,
            })
        })();
        let equivalence = match &report {
            Ok(r) => {
                let count = r.flags().iter().filter(|&&b| b).count() as f64;
                let expected = if r.aram_gt_1() { 4.0 } else { 0.0 };
                TheoremCheck::new("theorem9/equivalence", &k.label, count, Relation::Eq, expected, 0.0)
                    .with_note(r.to_string())
            }
            Err(e) => Self::compare("theorem9/equivalence", &k.label, Relation::Eq, 0.0, Err(e.clone())),
        };
        let lower = Self::compare(
            "theorem9/superdense-bound",
            &k.label,
            Relation::Ge,
            1e-6,
            self.upsilon_hat(k).map(|u| (u, bound)),
        );
        let cq = superdense_cq(&k.graph);
        let cq_sides = self.fits(k).and_then(|()| {
            self.solver
                .aram_cq(&cq)
                .map(|r| (r.value, bound))
                .map_err(|e| Miss::Failed(format!("superdense cq-graph: {e}")))
        });
        let packing = Self::compare("theorem9/superdense-packing", &k.label, Relation::Eq, EQUALITY_TOL, cq_sides);
        vec![equivalence, lower, packing]
    }

    /// The activated capacity of the built-in qutrit channel strictly exceeds
    /// its packing number, certified by the closed-form dual witness.
    pub fn check_prop11(&self) -> Vec<TheoremCheck> {
        let k = Instance::prop11();
        let t = builtin::prop11_dual_witness();
        let mut out = vec![
            Self::compare("prop11/value", &k.label, Relation::Eq, 2e-3, self.upsilon_hat(&k).map(|u| (u, 1.1767))),
            Self::compare(
                "prop11/separation",
                &k.label,
                Relation::Ge,
                0.0,
                (|| Ok((self.upsilon_hat(&k)? - self.aram(&k)?, 1e-3)))(),
            ),
            Self::compare("prop11/aram-bound", &k.label, Relation::Le, 1e-4, self.aram(&k).map(|a| (a, 1.1751))),
        ];
        let violation = aram_dual_violation(&k.graph, &t).unwrap_or(f64::INFINITY);
        out.push(TheoremCheck::new("prop11/witness-feasible", "T_B", violation, Relation::Le, 0.0, 1e-6));
        out.push(TheoremCheck::new("prop11/witness-trace", "T_B", matrix::trace_re(&t), Relation::Eq, 1.1751, 1e-6));
        out
    }

    /// `2 Υ̂(K^{⊗(n−n₀)}) ≤ Υ(K^{⊗n}) ≤ Υ̂(K^{⊗n})` with `n₀` the least power
    /// reaching two messages.
    pub fn check_sandwich(&self, k: &Instance, n: usize) -> Vec<TheoremCheck> {
        let instance = format!("{}, n={n}", k.label);
        let mut n0 = None;
        for j in 1..=n {
            match self.upsilon(&k.power(j)) {
                Ok(u) if u >= 2.0 - 1e-7 => {
                    n0 = Some(j);
                    break;
                }
                Ok(_) => {}
                Err(Miss::TooLarge(note)) => {
                    return vec![TheoremCheck::skipped("sandwich", &instance, format!("n₀ search stopped: {note}"))]
                }
                Err(Miss::Failed(note)) => return vec![TheoremCheck::errored("sandwich", &instance, note)],
            }
        }
        let Some(n0) = n0 else {
            return vec![TheoremCheck::skipped("sandwich", &instance, format!("Υ(K^⊗j) < 2 for all j ≤ {n}"))];
        };
        let kn = k.power(n);
        let instance = format!("{instance}, n₀={n0}");
        let lower = (|| {
            let rest = if n == n0 { 1.0 } else { self.upsilon_hat(&k.power(n - n0))? };
            Ok((2.0 * rest, self.upsilon(&kn)?))
        })();
        let upper = (|| Ok((self.upsilon(&kn)?, self.upsilon_hat(&kn)?)))();
        vec![
            Self::compare("sandwich/lower", &instance, Relation::Le, EQUALITY_TOL, lower),
            Self::compare("sandwich/upper", &instance, Relation::Le, EQUALITY_TOL, upper),
        ]
    }

    /// The activated program and its minimization dual agree.
    pub fn check_duality(&self, k: &Instance) -> TheoremCheck {
        let sides = (|| Ok((self.upsilon_hat(k)?, self.value(k, Program::UpsilonHatDual)?)))();
        Self::compare("duality", &k.label, Relation::Eq, 1e-6, sides)
    }

    /// `1 ≤ Υ(K) ≤ Υ̂(K)` and `d_A/‖P_B‖ ≤ Υ̂(K)`.
    pub fn check_bounds(&self, k: &Instance) -> Vec<TheoremCheck> {
        vec![
            Self::compare("bounds/upsilon-at-least-one", &k.label, Relation::Ge, 1e-7, self.upsilon(k).map(|u| (u, 1.0))),
            Self::compare(
                "bounds/upsilon-below-hat",
                &k.label,
                Relation::Le,
                1e-6,
                (|| Ok((self.upsilon(k)?, self.upsilon_hat(k)?)))(),
            ),
        ]
    }

    /// `Υ̂(K1⊗K2) ≥ Υ̂(K1) Υ̂(K2)`.
    pub fn check_supermultiplicativity(&self, k1: &Instance, k2: &Instance) -> TheoremCheck {
        let joint = k1.tensor(k2);
        let sides = (|| Ok((self.upsilon_hat(&joint)?, self.upsilon_hat(k1)? * self.upsilon_hat(k2)?)))();
        Self::compare("supermultiplicativity", &joint.label, Relation::Ge, EQUALITY_TOL, sides)
    }

    /// `Υ = Υ̂ = A = ℓ` on the noiseless channel with `ℓ` symbols.
    pub fn check_delta(&self, ell: usize) -> Vec<TheoremCheck> {
        let k = Instance::delta(ell);
        let l = ell as f64;
        [(Program::Upsilon, "delta/upsilon"), (Program::UpsilonHat, "delta/upsilon-hat"), (Program::Aram, "delta/aram")]
            .into_iter()
            .map(|(p, name)| Self::compare(name, &k.label, Relation::Eq, 1e-7, self.value(&k, p).map(|v| (v, l))))
            .collect()
    }

    /// Closed forms for the two-state cq channel: `Υ = 1`, `Υ̂ = A = 1/α²`.
    pub fn check_example4(&self, alpha_sq: f64) -> Vec<TheoremCheck> {
        let k = Instance::example4(alpha_sq);
        let inv = 1.0 / alpha_sq;
        let mut out = vec![
            Self::compare("example4/upsilon", &k.label, Relation::Eq, 1e-6, self.upsilon(&k).map(|v| (v, 1.0))),
            Self::compare("example4/upsilon-hat", &k.label, Relation::Eq, 1e-6, self.upsilon_hat(&k).map(|v| (v, inv))),
            Self::compare("example4/aram", &k.label, Relation::Eq, 1e-6, self.aram(&k).map(|v| (v, inv))),
        ];
        let cq = builtin::example4_cq(alpha_sq).expect("valid α²");
        let cq_value = self
            .solver
            .upsilon_hat_cq(&cq)
            .map(|r| (r.value, inv))
            .map_err(|e| Miss::Failed(e.to_string()));
        out.push(Self::compare("example4/upsilon-hat-cq", &k.label, Relation::Eq, 1e-6, cq_value));
        out
    }

    /// Amplitude damping at `r = 3/4`: `Υ = 1`, the closed-form witness of
    /// value 9/8, and the superdense bound 10/9.
    pub fn check_example10(&self) -> Vec<TheoremCheck> {
        let k = Instance::amplitude_damping(0.75);
        let s = matrix::diag(&[3.0 / 8.0, 3.0 / 4.0]);
        let u = (ket_bra(4, 0, 0) + ket_bra(4, 0, 3) + ket_bra(4, 3, 0) + ket_bra(4, 3, 3)).scale(0.25)
            + ket_bra(4, 2, 2).scale(0.75);
        let violation = upsilon_primal_violation(&k.graph, &s, &u, true).unwrap_or(f64::INFINITY);
        let bound = superdense_bound(&k.graph);
        vec![
            Self::compare("example10/upsilon", &k.label, Relation::Eq, 1e-6, self.upsilon(&k).map(|v| (v, 1.0))),
            TheoremCheck::new("example10/witness-feasible", &k.label, violation, Relation::Le, 0.0, 1e-9),
            Self::compare(
                "example10/upsilon-hat",
                &k.label,
                Relation::Ge,
                1e-6,
                self.upsilon_hat(&k).map(|v| (v, matrix::trace_re(&s))),
            ),
            TheoremCheck::new("example10/superdense", &k.label, bound, Relation::Eq, 10.0 / 9.0, 1e-9),
            Self::compare(
                "example10/hat-above-superdense",
                &k.label,
                Relation::Ge,
                1e-6,
                self.upsilon_hat(&k).map(|v| (v, bound)),
            ),
        ]
    }

    /// cq programs agree with the general ones on the embedded graph.
    pub fn check_cq_consistency(&self, seed: u64) -> Vec<TheoremCheck> {
        let c = random_cq(seed, 4, 3);
        let label = format!("random-cq(inputs={}, d_B={}, seed={seed})", c.num_inputs(), c.d_b());
        let k = Instance::new(label.clone(), c.to_ncgraph());
        let s = &self.solver;
        let failed = |e: crate::Error| Miss::Failed(e.to_string());
        let exact = (|| Ok((s.upsilon_cq(&c).map_err(failed)?.value, self.upsilon(&k)?)))();
        let relaxed = (|| Ok((s.upsilon_hat_cq(&c).map_err(failed)?.value, s.aram_cq(&c).map_err(failed)?.value)))();
        let hat = (|| Ok((s.upsilon_hat_cq(&c).map_err(failed)?.value, self.upsilon_hat(&k)?)))();
        vec![
            Self::compare("cq-consistency/upsilon", &label, Relation::Eq, 2e-6, exact),
            Self::compare("cq-consistency/hat-equals-aram", &label, Relation::Eq, 1e-6, relaxed),
            Self::compare("cq-consistency/upsilon-hat", &label, Relation::Eq, 2e-6, hat),
        ]
    }
}

/// Check families known to [`run_suite`].
pub const CHECK_FAMILIES: &[&str] = &[
    "bounds",
    "corollary6",
    "cq-consistency",
    "delta",
    "duality",
    "example10",
    "example4",
    "lemma2",
    "main-theorem",
    "prop11",
    "sandwich",
    "supermultiplicativity",
    "theorem5",
    "theorem7",
    "theorem9",
];

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    /// Seeds of the random channels; empty means built-in instances only.
    pub seeds: Vec<u64>,
    /// Largest Choi dimension the suite hands to the solver; bigger instances
    /// are reported as skipped.
    pub max_dim: usize,
    /// Replaces the tolerance of every substantive check.
    pub tolerance: Option<f64>,
    /// Restricts the run to one check family.
    pub only: Option<String>,
    pub solver: CapacitySolver,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seeds: vec![1, 2, 3], max_dim: 36, tolerance: None, only: None, solver: CapacitySolver::default() }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub checks: Vec<TheoremCheck>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &TheoremCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn count(&self, kind: CheckKind) -> usize {
        self.checks.iter().filter(|c| c.kind == kind).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failures().next().is_none()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(
            f,
            "{} checks: {} substantive, {} vacuous, {} skipped, {} failed",
            self.checks.len(),
            self.count(CheckKind::Substantive),
            self.count(CheckKind::Vacuous),
            self.count(CheckKind::Skipped),
            self.failures().count()
        )
    }
}

/// Runs every check family (or the one named in `config.only`) over the
/// built-in channels and the seeded random channels. Checks come back sorted
/// by name and instance.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    if let Some(only) = &config.only {
        if !CHECK_FAMILIES.contains(&only.as_str()) {
            return Err(crate::Error::InvalidProblem(format!(
                "unknown check '{only}', expected one of: {}",
                CHECK_FAMILIES.join(", ")
            )));
        }
    }
    let wants = |family: &str| config.only.as_deref().is_none_or(|o| o == family);
    let v = Verifier::new(config.solver, config.max_dim);

    let ex4 = Instance::example4(0.75);
    let damping = Instance::amplitude_damping(0.75);
    let prop11 = Instance::prop11();
    let depolarizing = Instance::from_channel("depolarizing(2)", &builtin::depolarizing_channel(2))?;
    let randoms: Vec<Instance> = config.seeds.iter().map(|&s| Instance::random(s)).collect();
    let partners: Vec<Instance> =
        config.seeds.iter().map(|&s| Instance::random(s.wrapping_add(PAIR_SEED_OFFSET))).collect();
    let mut general = vec![ex4.clone(), damping.clone(), prop11.clone()];
    general.extend(randoms.iter().cloned());

    let mut checks = Vec::new();
    if wants("delta") {
        let mut ell = 1;
        while ell * ell <= config.max_dim {
            checks.extend(v.check_delta(ell));
            ell += 1;
        }
    }
    if wants("example4") {
        for a in [2.0 / 3.0, 0.75, 0.9] {
            checks.extend(v.check_example4(a));
        }
    }
    if wants("example10") {
        checks.extend(v.check_example10());
    }
    if wants("prop11") {
        checks.extend(v.check_prop11());
    }
    if wants("bounds") {
        for k in &general {
            checks.extend(v.check_bounds(k));
        }
    }
    if wants("duality") {
        for k in &general {
            checks.push(v.check_duality(k));
        }
    }
    if wants("lemma2") {
        checks.push(v.check_lemma2(&ex4, 2));
        checks.push(v.check_lemma2(&Instance::delta(2), 3));
        for k in &randoms {
            checks.push(v.check_lemma2(k, 2));
        }
    }
    if wants("main-theorem") {
        for k in [&ex4, &Instance::delta(2), &damping].into_iter().chain(&randoms) {
            checks.push(v.check_main_theorem(k, 2));
        }
    }
    if wants("theorem5") {
        checks.push(v.check_theorem5(&ex4, &Instance::delta(2)));
        checks.push(v.check_theorem5(&ex4, &Instance::delta(1)));
        for (k1, k2) in randoms.iter().zip(&partners) {
            checks.push(v.check_theorem5(k1, k2));
        }
    }
    if wants("corollary6") {
        for k in [&Instance::delta(2), &ex4].into_iter().chain(&randoms) {
            checks.push(v.check_corollary6(k));
        }
    }
    if wants("theorem7") {
        checks.push(v.check_theorem7(&ex4, &ex4));
        checks.push(v.check_theorem7(&Instance::delta(1), &Instance::delta(1)));
        for (k1, k2) in randoms.iter().zip(&partners) {
            checks.push(v.check_theorem7(k1, k2));
        }
    }
    if wants("theorem9") {
        for k in [&damping, &depolarizing, &ex4, &Instance::delta(1), &prop11].into_iter().chain(&randoms) {
            checks.extend(v.check_theorem9(k));
        }
    }
    if wants("sandwich") {
        checks.extend(v.check_sandwich(&Instance::delta(2), 2));
        for k in &randoms {
            checks.extend(v.check_sandwich(k, 2));
        }
    }
    if wants("supermultiplicativity") {
        checks.push(v.check_supermultiplicativity(&ex4, &damping));
        for (k1, k2) in randoms.iter().zip(&partners) {
            checks.push(v.check_supermultiplicativity(k1, k2));
        }
    }
    if wants("cq-consistency") {
        for &s in &config.seeds {
            checks.extend(v.check_cq_consistency(s));
        }
    }

    if let Some(t) = config.tolerance {
        for c in &mut checks {
            c.set_tolerance(t);
        }
    }
    checks.sort_by(|a, b| (&a.name, &a.instance).cmp(&(&b.name, &b.instance)));
    Ok(SuiteReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verifier() -> Verifier {
        Verifier::new(CapacitySolver::default(), 36)
    }

    #[test]
    fn relation_semantics() {
        assert!(TheoremCheck::new("x", "i", 1.0, Relation::Eq, 1.0 + 1e-6, 1e-5).passed);
        assert!(!TheoremCheck::new("x", "i", 1.0, Relation::Eq, 1.1, 1e-5).passed);
        assert!(TheoremCheck::new("x", "i", 0.9, Relation::Ge, 1.0, 0.2).passed);
        assert!(!TheoremCheck::new("x", "i", 1.2, Relation::Le, 1.0, 0.1).passed);
        assert!(TheoremCheck::new("x", "i", 0.0, Relation::Implies, 0.0, 0.0).passed);
        assert!(!TheoremCheck::new("x", "i", 1.0, Relation::Implies, 0.0, 0.0).passed);
        let mut c = TheoremCheck::new("x", "i", 1.0, Relation::Eq, 1.0 + 1e-8, 1e-5);
        c.set_tolerance(1e-12);
        assert!(!c.passed);
    }

    #[test]
    fn delta_tensor_scaling_examples() {
        let v = verifier();
        let c = v.check_lemma2(&Instance::example4(0.75), 2);
        assert!(c.passed, "{c}");
        assert!((c.lhs - 8.0 / 3.0).abs() < 1e-5);
        let c = v.check_lemma2(&Instance::delta(2), 3);
        assert!(c.passed && (c.lhs - 6.0).abs() < 1e-5, "{c}");
    }

    #[test]
    fn one_bit_activation_examples() {
        let v = verifier();
        let c = v.check_main_theorem(&Instance::example4(0.75), 2);
        assert!(c.passed && (c.rhs - 4.0 / 3.0).abs() < 1e-6, "{c}");
        let c = v.check_main_theorem(&Instance::delta(2), 2);
        assert!(c.passed && (c.lhs - 2.0).abs() < 1e-6, "{c}");
    }

    #[test]
    fn cross_activation_examples() {
        let v = verifier();
        let c = v.check_theorem5(&Instance::example4(0.75), &Instance::delta(2));
        assert_eq!(c.kind, CheckKind::Substantive);
        assert!(c.passed && (c.lhs - 8.0 / 3.0).abs() < 1e-5, "{c}");
        let c = v.check_theorem5(&Instance::example4(0.75), &Instance::delta(1));
        assert_eq!(c.kind, CheckKind::Vacuous);
    }

    #[test]
    fn self_activation_examples() {
        let v = verifier();
        let c = v.check_corollary6(&Instance::delta(2));
        assert!(c.passed && c.kind == CheckKind::Substantive && (c.lhs - 4.0).abs() < 1e-6, "{c}");
        assert_eq!(v.check_corollary6(&Instance::example4(0.75)).kind, CheckKind::Vacuous);
    }

    #[test]
    fn direct_sum_examples() {
        let v = verifier();
        let c = v.check_theorem7(&Instance::example4(0.75), &Instance::example4(0.75));
        assert!(c.passed && (c.lhs - 8.0 / 3.0).abs() < 1e-5, "{c}");
        let c = v.check_theorem7(&Instance::delta(1), &Instance::delta(1));
        assert!(c.passed && (c.lhs - 2.0).abs() < 1e-6, "{c}");
    }

    #[test]
    fn superdense_condition_examples() {
        let v = verifier();
        for c in v.check_theorem9(&Instance::amplitude_damping(0.75)) {
            assert!(c.passed, "{c}");
        }
        let dep = Instance::from_channel("dep", &builtin::depolarizing_channel(2)).unwrap();
        let checks = v.check_theorem9(&dep);
        assert!(checks.iter().all(|c| c.passed));
        assert_eq!(checks[0].lhs, 0.0);
    }

    #[test]
    fn qutrit_separation_holds() {
        for c in verifier().check_prop11() {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn sandwich_examples() {
        let v = verifier();
        let checks = v.check_sandwich(&Instance::delta(2), 2);
        assert_eq!(checks.len(), 2);
        for c in &checks {
            assert!(c.passed && c.kind == CheckKind::Substantive, "{c}");
        }
        assert!((checks[0].lhs - 4.0).abs() < 1e-6);
        let small = Verifier::new(CapacitySolver::default(), 4);
        let checks = small.check_sandwich(&Instance::example4(0.75), 2);
        assert_eq!(checks[0].kind, CheckKind::Skipped);
    }

    #[test]
    fn size_budget_skips() {
        let v = Verifier::new(CapacitySolver::default(), 4);
        let c = v.check_main_theorem(&Instance::example4(0.75), 2);
        assert_eq!(c.kind, CheckKind::Skipped);
        assert!(c.passed);
    }

    #[test]
    fn suite_filters_and_sorts() {
        let cfg = SuiteConfig { seeds: vec![], only: Some("delta".into()), max_dim: 9, ..Default::default() };
        let r = run_suite(&cfg).unwrap();
        assert_eq!(r.checks.len(), 9);
        assert!(r.all_passed());
        let names: Vec<_> = r.checks.iter().map(|c| (c.name.clone(), c.instance.clone())).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        let bad = SuiteConfig { only: Some("lemma3".into()), ..Default::default() };
        assert!(run_suite(&bad).is_err());
    }

    #[test]
    fn tight_tolerance_fails() {
        let cfg = SuiteConfig {
            seeds: vec![],
            only: Some("delta".into()),
            max_dim: 9,
            tolerance: Some(1e-15),
            ..Default::default()
        };
        assert!(!run_suite(&cfg).unwrap().all_passed());
    }
}
