//! Infeasible-start primal–dual path following with the HKM search
//! direction and Mehrotra predictor–corrector steps.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;

use super::block::{apply_a, apply_at, Mat, RealBlock, RealCoeff};
use super::realify::{realify_unchecked, unrealify};
use super::{schur, BlockKind, Coefficient, SdpOptions, SdpProblem, SdpSolution, SolveStatus};
use crate::error::Result;
use crate::matrix::{self, ComplexMatrix};

/// Relative pivot threshold below which a constraint counts as linearly
/// dependent on the others.
const REDUNDANCY_TOL: f64 = 1e-10;

/// Iterations without halving the best residual before giving up.
const STALL_ITERATIONS: usize = 20;

/// Objective magnitude treated as divergence.
const DIVERGENCE: f64 = 1e8;

/// Solves `problem` to the tolerances in `opts`.
///
/// Only malformed problems produce `Err`; solver trouble is reported through
/// [`SdpSolution::status`] together with the best iterate.
pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let m_full = problem.constraints.len();
    let full_blocks = real_blocks(problem);
    let b_full = DVector::from_iterator(m_full, problem.constraints.iter().map(|c| c.rhs));

    let keep = {
        let ident: Vec<Mat> = full_blocks.iter().map(|b| Mat::identity(b.dim, b.diag, 1.0)).collect();
        let gram = schur::build(&full_blocks, &ident, &ident, m_full);
        schur::independent_rows(&gram, REDUNDANCY_TOL)
    };
    let mut new_index = vec![None; m_full];
    for (pos, &k) in keep.iter().enumerate() {
        new_index[k] = Some(pos);
    }
    let blocks: Vec<RealBlock> = full_blocks.iter().map(|b| b.restrict(&new_index)).collect();
    let b = DVector::from_iterator(keep.len(), keep.iter().map(|&k| b_full[k]));

    let mut it = Iterate::run(&blocks, &b, opts);

    // Residuals against every original constraint, including dropped ones.
    let ax_full = apply_a(&full_blocks, &it.x, m_full);
    let primal_infeasibility = (&b_full - &ax_full).norm() / (1.0 + b_full.norm());
    if it.status == SolveStatus::Optimal && primal_infeasibility > 10.0 * opts.feas_tol {
        it.status = SolveStatus::Infeasible;
    }

    let mut y_full = vec![0.0; m_full];
    for (pos, &k) in keep.iter().enumerate() {
        y_full[k] = it.y[pos];
    }
    let primal_blocks = problem
        .blocks
        .iter()
        .zip(&it.x)
        .map(|(spec, xb)| to_complex(spec.kind, xb, 1.0))
        .collect();
    let dual_slack = problem
        .blocks
        .iter()
        .zip(&it.z)
        .map(|(spec, zb)| to_complex(spec.kind, zb, 2.0))
        .collect();

    Ok(SdpSolution {
        status: it.status,
        primal_value: it.pobj,
        dual_value: it.dobj,
        primal_blocks,
        dual_multipliers: y_full,
        dual_slack,
        gap: (it.pobj - it.dobj).abs(),
        primal_infeasibility,
        dual_infeasibility: it.dinf,
        iterations: it.iterations,
        redundant_constraints: m_full - keep.len(),
    })
}

/// Converts a real block back to the complex domain. Realified blocks carry
/// `hermitian_scale` (dual slacks are stored at half scale).
fn to_complex(kind: BlockKind, m: &Mat, hermitian_scale: f64) -> ComplexMatrix {
    match (kind, m) {
        (BlockKind::Hermitian, Mat::Dense(x)) => unrealify(x).scale(hermitian_scale),
        (BlockKind::NonnegDiagonal, Mat::Diag(v)) => {
            matrix::diag(v.as_slice())
        }
        _ => unreachable!("block kind mismatch"),
    }
}

/// Realifies every coefficient. Hermitian coefficients are halved so that
/// `⟨½ realify(A), realify(X)⟩ = tr(A X)`.
fn real_blocks(problem: &SdpProblem) -> Vec<RealBlock> {
    let mut per_block: Vec<BTreeMap<usize, Vec<&Coefficient>>> =
        vec![BTreeMap::new(); problem.blocks.len()];
    for (k, c) in problem.constraints.iter().enumerate() {
        for t in &c.terms {
            per_block[t.block].entry(k).or_default().push(&t.coeff);
        }
    }
    problem
        .blocks
        .iter()
        .enumerate()
        .map(|(bi, spec)| {
            let diag = spec.kind == BlockKind::NonnegDiagonal;
            let coeffs = per_block[bi]
                .iter()
                .map(|(&k, parts)| (k, real_coeff(spec.kind, spec.dim, parts)))
                .collect();
            let objective_parts: Vec<&Coefficient> =
                problem.objective.iter().filter(|t| t.block == bi).map(|t| &t.coeff).collect();
            let dim = if diag { spec.dim } else { 2 * spec.dim };
            let mut objective = Mat::identity(dim, diag, 0.0);
            if !objective_parts.is_empty() {
                real_coeff(spec.kind, spec.dim, &objective_parts).add_to(1.0, &mut objective);
            }
            RealBlock { dim, diag, coeffs, objective }
        })
        .collect()
}

fn real_coeff(kind: BlockKind, dim: usize, parts: &[&Coefficient]) -> RealCoeff {
    match kind {
        BlockKind::NonnegDiagonal => {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for part in parts {
                match part {
                    Coefficient::Sparse(e) => {
                        for &(i, _, v) in e {
                            *acc.entry(i).or_default() += v.re;
                        }
                    }
                    Coefficient::Dense(m) => {
                        for i in 0..dim {
                            *acc.entry(i).or_default() += m[(i, i)].re;
                        }
                    }
                }
            }
            RealCoeff::Sparse(acc.into_iter().filter(|(_, v)| *v != 0.0).map(|(i, v)| (i, i, v)).collect())
        }
        BlockKind::Hermitian => {
            if parts.iter().any(|p| matches!(p, Coefficient::Dense(_))) {
                let sum = parts.iter().fold(matrix::zeros(dim, dim), |acc, p| acc + p.to_dense(dim));
                RealCoeff::Dense(realify_unchecked(&matrix::hermitian_part(&sum)) * 0.5)
            } else {
                let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
                for part in parts {
                    if let Coefficient::Sparse(e) = part {
                        for &(i, j, v) in e {
                            *acc.entry((i, j)).or_default() += v;
                        }
                    }
                }
                let mut full: BTreeMap<(usize, usize), f64> = BTreeMap::new();
                for ((i, j), v) in acc {
                    let (re, im) = (0.5 * v.re, 0.5 * v.im);
                    let mut put = |r: usize, s: usize, val: f64| {
                        if val != 0.0 {
                            *full.entry((r, s)).or_default() += val;
                        }
                    };
                    if i == j {
                        put(i, i, re);
                        put(i + dim, i + dim, re);
                    } else {
                        for (r, s) in [(i, j), (j, i), (i + dim, j + dim), (j + dim, i + dim)] {
                            put(r, s, re);
                        }
                        // [[Re, −Im], [Im, Re]] with Im A_ij = im, Im A_ji = −im.
                        put(i + dim, j, im);
                        put(j, i + dim, im);
                        put(j + dim, i, -im);
                        put(i, j + dim, -im);
                    }
                }
                RealCoeff::Sparse(full.into_iter().filter(|(_, v)| *v != 0.0).map(|((r, s), v)| (r, s, v)).collect())
            }
        }
    }
}

#[derive(Clone)]
struct Iterate {
    x: Vec<Mat>,
    y: DVector<f64>,
    z: Vec<Mat>,
    pobj: f64,
    dobj: f64,
    dinf: f64,
    status: SolveStatus,
    iterations: usize,
}

fn dot_all(a: &[Mat], b: &[Mat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn norm_all(a: &[Mat]) -> f64 {
    a.iter().map(Mat::norm_sq).sum::<f64>().sqrt()
}

impl Iterate {
    fn run(blocks: &[RealBlock], b: &DVector<f64>, opts: &SdpOptions) -> Iterate {
        let m = b.len();
        let n_total: f64 = blocks.iter().map(|blk| blk.dim as f64).sum();
        let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let c: Vec<Mat> = blocks.iter().map(|blk| blk.objective.clone()).collect();
        let c_norm = norm_all(&c);
        let b_norm = b.norm();

        let mut it = Iterate {
            x: blocks.iter().map(|blk| Mat::identity(blk.dim, blk.diag, scale)).collect(),
            y: DVector::zeros(m),
            z: blocks.iter().map(|blk| Mat::identity(blk.dim, blk.diag, scale)).collect(),
            pobj: 0.0,
            dobj: 0.0,
            dinf: f64::INFINITY,
            status: SolveStatus::MaxIter,
            iterations: 0,
        };

        let mut best: Option<(f64, Iterate)> = None;
        let mut since_best = 0;
        let finish = |status: SolveStatus, it: Iterate, best: Option<(f64, Iterate)>| {
            let mut out = best.map(|(_, b)| b).unwrap_or(it);
            out.status = status;
            out
        };

        for iter in 0..=opts.max_iter {
            it.iterations = iter;
            let ax = apply_a(blocks, &it.x, m);
            let rp = b - &ax;
            let aty = apply_at(blocks, &it.y);
            let rd: Vec<Mat> = c
                .iter()
                .zip(&aty)
                .zip(&it.z)
                .map(|((cb, ab), zb)| cb.axpy(-1.0, ab).axpy(1.0, zb))
                .collect();
            it.pobj = dot_all(&c, &it.x);
            it.dobj = b.dot(&it.y);
            let pinf = rp.norm() / (1.0 + b_norm);
            it.dinf = norm_all(&rd) / (1.0 + c_norm);
            let gap = (it.pobj - it.dobj).abs();

            if gap <= opts.gap_tol * (1.0 + it.pobj.abs()) && pinf <= opts.feas_tol && it.dinf <= opts.feas_tol {
                it.status = SolveStatus::Optimal;
                return it;
            }
            if it.pobj > DIVERGENCE && pinf <= opts.feas_tol.sqrt() {
                it.status = SolveStatus::Unbounded;
                return it;
            }
            if it.dobj < -DIVERGENCE && it.dinf <= opts.feas_tol.sqrt() {
                it.status = SolveStatus::Infeasible;
                return it;
            }
            let merit = pinf.max(it.dinf).max(gap / (1.0 + it.pobj.abs()));
            match &best {
                Some((bm, _)) if merit >= 0.5 * bm => since_best += 1,
                _ => since_best = 0,
            }
            if best.as_ref().is_none_or(|(bm, _)| merit < *bm) {
                best = Some((merit, it.clone()));
            }
            if since_best >= STALL_ITERATIONS {
                return finish(SolveStatus::NumericalFailure, it, best);
            }
            if iter == opts.max_iter {
                break;
            }

            let Some(zinv) = it.z.iter().map(Mat::inverse_pd).collect::<Option<Vec<_>>>() else {
                return finish(SolveStatus::NumericalFailure, it, best);
            };
            let schur_m = schur::build(blocks, &it.x, &zinv, m);
            let Some(chol) = schur::factor(schur_m) else {
                return finish(SolveStatus::NumericalFailure, it, best);
            };
            let x_rd_zinv: Vec<Mat> = it
                .x
                .iter()
                .zip(&rd)
                .zip(&zinv)
                .map(|((xb, rb), zi)| xb.mul(rb).mul(zi))
                .collect();

            let direction = |mu: f64, corr: Option<&[Mat]>| {
                let h: Vec<Mat> = x_rd_zinv
                    .iter()
                    .zip(&zinv)
                    .enumerate()
                    .map(|(i, (xrz, zi))| {
                        let mut hb = xrz.axpy(mu, zi);
                        if let Some(cr) = corr {
                            hb = hb.axpy(-1.0, &cr[i]);
                        }
                        hb
                    })
                    .collect();
                let rhs = apply_a(blocks, &h, m) - b;
                let dy = chol.solve(&rhs);
                let atdy = apply_at(blocks, &dy);
                let dz: Vec<Mat> = atdy.iter().zip(&rd).map(|(a, r)| a.axpy(-1.0, r)).collect();
                let dx: Vec<Mat> = it
                    .x
                    .iter()
                    .zip(&dz)
                    .zip(&zinv)
                    .enumerate()
                    .map(|(i, ((xb, dzb), zi))| {
                        let mut d = zi.scale(mu).axpy(-1.0, xb).axpy(-1.0, &xb.mul(dzb).mul(zi));
                        if let Some(cr) = corr {
                            d = d.axpy(-1.0, &cr[i]);
                        }
                        d.symmetrize()
                    })
                    .collect();
                (dx, dy, dz)
            };

            let step = |v: &[Mat], d: &[Mat]| -> f64 {
                v.iter().zip(d).map(|(vb, db)| vb.max_step(db, 1e30)).fold(1e30, f64::min)
            };

            let mu = dot_all(&it.x, &it.z) / n_total;
            let (dx_a, _, dz_a) = direction(0.0, None);
            let ap_a = step(&it.x, &dx_a).min(1.0);
            let ad_a = step(&it.z, &dz_a).min(1.0);
            let x_a: Vec<Mat> = it.x.iter().zip(&dx_a).map(|(x, d)| x.axpy(ap_a, d)).collect();
            let z_a: Vec<Mat> = it.z.iter().zip(&dz_a).map(|(z, d)| z.axpy(ad_a, d)).collect();
            let mu_a = dot_all(&x_a, &z_a) / n_total;
            let sigma = (mu_a / mu).clamp(0.0, 1.0).powi(3);

            let corr: Vec<Mat> = dx_a
                .iter()
                .zip(&dz_a)
                .zip(&zinv)
                .map(|((dxb, dzb), zi)| dxb.mul(dzb).mul(zi))
                .collect();
            let (dx, dy, dz) = direction(sigma * mu, Some(&corr));
            let gamma = 0.9 + 0.09 * ap_a.min(ad_a);
            let ap = (gamma * step(&it.x, &dx)).min(1.0);
            let ad = (gamma * step(&it.z, &dz)).min(1.0);
            if ap < 1e-12 && ad < 1e-12 {
                return finish(SolveStatus::NumericalFailure, it, best);
            }
            it.x = it.x.iter().zip(&dx).map(|(x, d)| x.axpy(ap, d)).collect();
            it.z = it.z.iter().zip(&dz).map(|(z, d)| z.axpy(ad, d)).collect();
            it.y += dy * ad;
        }
        finish(SolveStatus::MaxIter, it, best)
    }
}
