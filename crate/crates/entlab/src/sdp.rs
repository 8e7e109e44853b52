//! Dense solver for the fully-decomposable-witness program
//!
//!   min ⟨W, ρ⟩   s.t.   W = P_λ + Q_λ^{T_λ},  0 ⪯ P_λ ⪯ I,  0 ⪯ Q_λ ⪯ I
//!
//! over one representative λ per complementary bipartition pair. Solved by
//! consensus ADMM over the per-bipartition decompositions: the W update is a
//! closed-form average, the (P, Q) update is a short alternating projection
//! onto the spectral box [0, I].
//!
//! A negative optimum certifies that ρ is not a PPT mixture; −value is the
//! multipartite negativity.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{EntLabError, Result};
use crate::qstate::{self, DensityMatrix};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Problem data: the state, its register size, and the bipartition list
/// (one representative per complementary pair, each containing qubit 0).
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub rho: DMatrix<C64>,
    pub n_qubits: usize,
    pub bipartitions: Vec<Vec<usize>>,
}

impl SdpProblem {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let n = rho.n_qubits();
        if n > 4 {
            return Err(EntLabError::capacity("solver is sized for at most 4 qubits"));
        }
        if n < 2 {
            return Err(EntLabError::argument("need at least 2 qubits"));
        }
        let mut bipartitions = Vec::new();
        for mask in 1usize..(1 << n) - 1 {
            if mask & 1 == 1 {
                bipartitions.push((0..n).filter(|q| mask >> q & 1 == 1).collect());
            }
        }
        Ok(SdpProblem { rho: rho.matrix().clone(), n_qubits: n, bipartitions })
    }
}

/// Solver output: optimal witness, value, a rigorous lower-bound gap,
/// iteration count, and the per-bipartition decomposition certificates.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub w_min: DMatrix<C64>,
    pub value: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    /// (P_λ, Q_λ) pairs certifying W ∈ {P + Q^{T_λ}} for each λ.
    pub certificates: Vec<(DMatrix<C64>, DMatrix<C64>)>,
    /// max_λ ‖W − P_λ − Q_λ^{T_λ}‖_F at return.
    pub cone_residual: f64,
}

/// Spectral clip of a Hermitian matrix onto 0 ⪯ M ⪯ I.
fn clip_box(m: &DMatrix<C64>) -> DMatrix<C64> {
    let h = (m + m.adjoint()) * c(0.5);
    let (vals, vecs) = qstate::eigh(&h);
    let d = h.nrows();
    let mut out = DMatrix::<C64>::zeros(d, d);
    for (i, &l) in vals.iter().enumerate() {
        let lc = l.clamp(0.0, 1.0);
        if lc > 0.0 {
            let col = vecs.column(i);
            // out += lc * col col†
            for r in 0..d {
                for s in 0..d {
                    out[(r, s)] += col[r] * col[s].conj() * c(lc);
                }
            }
        }
    }
    out
}

pub const DEFAULT_MAX_ITERS: usize = 5000;

/// Runs the witness program for `rho`. `max_iters` caps the ADMM loop
/// (default 5000 via [`DEFAULT_MAX_ITERS`]).
pub fn solve_fully_decomposable(rho: &DensityMatrix, max_iters: usize) -> Result<SdpSolution> {
    let problem = SdpProblem::new(rho)?;
    let n = problem.n_qubits;
    let d = 1usize << n;
    let lams = &problem.bipartitions;
    let count = lams.len();
    let rho_m = &problem.rho;

    // rigorous lower bound: for any feasible W and any single bipartition,
    // <rho, W> >= sum of negative eigenvalues of rho^{T_lambda}
    let mut lower_bound = f64::NEG_INFINITY;
    for lam in lams {
        let pt = qstate::partial_transpose_raw(rho_m, n, lam);
        let neg_sum: f64 = qstate::eigvalsh(&pt).iter().filter(|&&x| x < 0.0).sum();
        lower_bound = lower_bound.max(neg_sum);
    }

    let sigma = 1.0;
    let inner = 3;
    let mut w = DMatrix::<C64>::zeros(d, d);
    let mut ps = vec![DMatrix::<C64>::zeros(d, d); count];
    let mut qs = vec![DMatrix::<C64>::zeros(d, d); count];
    let mut us = vec![DMatrix::<C64>::zeros(d, d); count];

    let objective = |w: &DMatrix<C64>| -> f64 {
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (w[(i, j)].conj() * rho_m[(i, j)]).re;
            }
        }
        acc
    };

    let mut prev_obj = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        // W update: average of the decompositions minus the objective pull
        let mut acc = rho_m * c(-1.0 / sigma);
        for l in 0..count {
            acc += &ps[l] + qstate::partial_transpose_raw(&qs[l], n, &lams[l]) - &us[l];
        }
        w = acc * c(1.0 / count as f64);
        w = (&w + w.adjoint()) * c(0.5);
        // (P, Q) updates with warm-started alternating projections
        for l in 0..count {
            let m = &w + &us[l];
            for _ in 0..inner {
                ps[l] = clip_box(&(&m - qstate::partial_transpose_raw(&qs[l], n, &lams[l])));
                qs[l] = clip_box(&qstate::partial_transpose_raw(&(&m - &ps[l]), n, &lams[l]));
            }
            us[l] = &us[l] + &w - &ps[l] - qstate::partial_transpose_raw(&qs[l], n, &lams[l]);
        }
        if iterations % 50 == 0 {
            let res = cone_residual(&w, &ps, &qs, lams, n);
            let obj = objective(&w);
            if res < 1e-7 && (obj - prev_obj).abs() < 1e-7 {
                converged = true;
                break;
            }
            prev_obj = obj;
        }
    }

    let res = cone_residual(&w, &ps, &qs, lams, n);
    let value = objective(&w);
    let gap = value - lower_bound;
    if !converged && res > 1e-5 {
        return Err(EntLabError::Convergence {
            reason: format!(
                "witness program did not converge in {iterations} iterations (duality gap {gap:.3e})"
            ),
            residual: res,
        });
    }
    Ok(SdpSolution {
        w_min: w,
        value,
        duality_gap: gap,
        iterations,
        certificates: ps.into_iter().zip(qs).collect(),
        cone_residual: res,
    })
}

fn cone_residual(
    w: &DMatrix<C64>,
    ps: &[DMatrix<C64>],
    qs: &[DMatrix<C64>],
    lams: &[Vec<usize>],
    n: usize,
) -> f64 {
    let mut worst: f64 = 0.0;
    for l in 0..ps.len() {
        let diff = w - &ps[l] - qstate::partial_transpose_raw(&qs[l], n, &lams[l]);
        worst = worst.max(diff.norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;
    use approx::assert_abs_diff_eq;

    #[test]
    fn maximally_mixed_has_nonnegative_value() {
        let rho = DensityMatrix::maximally_mixed(3);
        let sol = solve_fully_decomposable(&rho, DEFAULT_MAX_ITERS).unwrap();
        assert!(sol.value >= -1e-7, "value {}", sol.value);
    }

    #[test]
    fn ghz3_reaches_minus_half() {
        let rho = states::ghz(3).density();
        let sol = solve_fully_decomposable(&rho, DEFAULT_MAX_ITERS).unwrap();
        assert_abs_diff_eq!(sol.value, -0.5, epsilon = 1e-3);
        assert!(sol.cone_residual < 1e-6);
        assert!(sol.duality_gap.abs() < 1e-3);
    }

    #[test]
    fn certificates_are_feasible() {
        let rho = states::ghz(3).density();
        let sol = solve_fully_decomposable(&rho, DEFAULT_MAX_ITERS).unwrap();
        for (p, q) in &sol.certificates {
            let pe = qstate::eigvalsh(p);
            let qe = qstate::eigvalsh(q);
            assert!(pe.last().unwrap() >= &-1e-7);
            assert!(qe.last().unwrap() >= &-1e-7);
            assert!(pe.first().unwrap() <= &(1.0 + 1e-7));
            assert!(qe.first().unwrap() <= &(1.0 + 1e-7));
        }
    }

    #[test]
    fn biseparable_mixture_is_ppt_mixture() {
        let rho = states::biseparable_npt_mixture();
        // sanity: NPT in every cut, yet the witness value stays nonnegative
        for block in [[0usize], [1], [2]] {
            let pt = qstate::partial_transpose(&rho, &block).unwrap();
            assert!(qstate::eigvalsh(&pt).last().unwrap() < &-1e-3);
        }
        let sol = solve_fully_decomposable(&rho, DEFAULT_MAX_ITERS).unwrap();
        assert!(sol.value >= -1e-6, "value {}", sol.value);
    }

    #[test]
    fn restart_stability() {
        // longer runs perturb the optimum by less than 1e-5
        let rho = states::ghz(3).density();
        let a = solve_fully_decomposable(&rho, DEFAULT_MAX_ITERS).unwrap();
        let b = solve_fully_decomposable(&rho, DEFAULT_MAX_ITERS + 500).unwrap();
        assert!((a.value - b.value).abs() < 1e-5);
    }

    #[test]
    fn rejects_oversized_register() {
        let rho = DensityMatrix::maximally_mixed(5);
        assert!(SdpProblem::new(&rho).is_err());
    }

    #[test]
    fn two_qubit_value_matches_min_pt_eigenvalue() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let psi = states::haar_random_pure_with(2, &mut rng);
            let rho = psi.density();
            let sol = solve_fully_decomposable(&rho, DEFAULT_MAX_ITERS).unwrap();
            let neg = crate::measures::negativity(&rho, &[0]).unwrap();
            assert_abs_diff_eq!(-sol.value, neg, epsilon = 1e-5);
        }
    }
}
