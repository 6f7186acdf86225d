//! Seeded random channels for property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{cq_from_states, CqGraph, KrausChannel};
use crate::matrix::{self, c, ComplexMatrix, DEFAULT_RANK_TOL};

/// Shape and seed of a random channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomChannelSpec {
    pub d_in: usize,
    pub d_out: usize,
    pub num_kraus: usize,
    pub seed: u64,
}

impl RandomChannelSpec {
    pub fn new(d_in: usize, d_out: usize, num_kraus: usize, seed: u64) -> Result<Self> {
        if d_in == 0 || d_out == 0 || num_kraus == 0 {
            return Err(Error::InvalidChannel("random channel dimensions must be positive".into()));
        }
        if d_out * num_kraus < d_in {
            return Err(Error::InvalidChannel(format!(
                "{num_kraus} Kraus operators of shape {d_out}x{d_in} cannot be trace preserving"
            )));
        }
        Ok(Self { d_in, d_out, num_kraus, seed })
    }

    /// Shape drawn from `d_in, d_out ∈ {2, 3}` and `num_kraus ∈ {1, 2, 3}`,
    /// rejecting shapes that admit no isometry.
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed_5eed_5eed);
        loop {
            let d_in = rng.random_range(2..=3);
            let d_out = rng.random_range(2..=3);
            let num_kraus = rng.random_range(1..=3);
            if d_out * num_kraus >= d_in {
                return Self { d_in, d_out, num_kraus, seed };
            }
        }
    }

    /// Kraus operators sliced from a Haar-random isometry `A → B ⊗ E`.
    pub fn sample(&self) -> KrausChannel {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let v = haar_isometry(&mut rng, self.d_out * self.num_kraus, self.d_in);
        let kraus = (0..self.num_kraus)
            .map(|e| ComplexMatrix::from_fn(self.d_out, self.d_in, |b, a| v[(b * self.num_kraus + e, a)]))
            .collect();
        KrausChannel::new(self.d_in, self.d_out, kraus).expect("isometry gives a trace-preserving channel")
    }

    pub fn describe(&self) -> String {
        format!("random(d_in={}, d_out={}, kraus={}, seed={})", self.d_in, self.d_out, self.num_kraus, self.seed)
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Haar-distributed `rows × cols` isometry (`rows ≥ cols`): QR of a complex
/// Gaussian matrix with the phases of `R`'s diagonal moved into `Q`.
pub fn haar_isometry(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows ≥ cols");
    let g = gaussian(rng, rows, cols);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { matrix::ONE };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random density matrix of the given rank (normalized Wishart).
pub fn random_state(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> ComplexMatrix {
    let g = gaussian(rng, dim, rank);
    let rho = &g * g.adjoint();
    let tr = matrix::trace_re(&rho);
    matrix::hermitian_part(&rho.unscale(tr))
}

/// Random cq-graph with 2 to `max_inputs` inputs and output dimension 2 to
/// `max_d_b`. Output ranks stay below `d_B` so the projections are proper.
pub fn random_cq(seed: u64, max_inputs: usize, max_d_b: usize) -> CqGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = rng.random_range(2..=max_inputs.max(2));
    let d_b = rng.random_range(2..=max_d_b.max(2));
    let states: Vec<ComplexMatrix> = (0..inputs)
        .map(|_| {
            let rank = rng.random_range(1..d_b);
            random_state(&mut rng, d_b, rank)
        })
        .collect();
    cq_from_states(&states, DEFAULT_RANK_TOL).expect("normalized random states")
}
