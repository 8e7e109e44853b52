//! Minimal two-qumode Gaussian layer: covariance matrices in the
//! (q₁,p₁,q₂,p₂) ordering with vacuum γ = I, symplectic eigenvalues, and the
//! total-variance and PPT separability criteria.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::criteria::{CriterionVerdict, Outcome, DETECTION_TOL};
use crate::error::{EntLabError, Result};
use crate::qstate;

/// Real symmetric second-moment matrix for m qumodes
/// (γᵢⱼ = ⟨ΔεᵢΔεⱼ + ΔεⱼΔεᵢ⟩ with [q,p] = i).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix {
    pub modes: usize,
    pub gamma: Vec<Vec<f64>>,
}

impl CovarianceMatrix {
    pub fn new(modes: usize, gamma: Vec<Vec<f64>>) -> Result<Self> {
        let d = 2 * modes;
        if gamma.len() != d || gamma.iter().any(|r| r.len() != d) {
            return Err(EntLabError::argument(format!("covariance matrix must be {d}x{d}")));
        }
        for (i, row) in gamma.iter().enumerate() {
            for (j, &val) in row.iter().enumerate() {
                if (val - gamma[j][i]).abs() > 1e-10 {
                    return Err(EntLabError::argument("covariance matrix must be symmetric"));
                }
            }
        }
        let cov = CovarianceMatrix { modes, gamma };
        let min_eig = cov.physicality_min_eigenvalue();
        if min_eig < -1e-9 {
            return Err(EntLabError::argument(format!(
                "unphysical covariance matrix: min eig of gamma + i Omega is {min_eig:.3e}"
            )));
        }
        Ok(cov)
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.gamma[i][j])
    }

    /// Minimum eigenvalue of γ + iΩ (≥ 0 for physical states).
    pub fn physicality_min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let omega = symplectic_form(self.modes);
        let mut h = DMatrix::<C64>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                h[(i, j)] = C64::new(self.gamma[i][j], omega[(i, j)]);
            }
        }
        qstate::eigvalsh(&h).last().copied().unwrap()
    }

    /// Vacuum state of m modes: γ = I.
    pub fn vacuum(modes: usize) -> Self {
        let d = 2 * modes;
        let gamma = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        CovarianceMatrix { modes, gamma }
    }

    /// Two-mode squeezed vacuum with squeezing r: cosh 2r on the diagonal,
    /// q-q correlations −sinh 2r and p-p correlations +sinh 2r, so the
    /// squeezed quadratures are q₁+q₂ and p₁−p₂.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let ch = (2.0 * r).cosh();
        let sh = (2.0 * r).sinh();
        let gamma = vec![
            vec![ch, 0.0, -sh, 0.0],
            vec![0.0, ch, 0.0, sh],
            vec![-sh, 0.0, ch, 0.0],
            vec![0.0, sh, 0.0, ch],
        ];
        CovarianceMatrix { modes: 2, gamma }
    }

    /// Product of thermal modes with occupations ν_i ≥ 1 on the diagonal.
    pub fn thermal_product(nus: &[f64]) -> Result<Self> {
        if nus.iter().any(|&v| v < 1.0) {
            return Err(EntLabError::argument("thermal occupations must be at least 1"));
        }
        let modes = nus.len();
        let d = 2 * modes;
        let mut gamma = vec![vec![0.0; d]; d];
        for (m, &v) in nus.iter().enumerate() {
            gamma[2 * m][2 * m] = v;
            gamma[2 * m + 1][2 * m + 1] = v;
        }
        CovarianceMatrix::new(modes, gamma)
    }
}

/// Block-diagonal symplectic form Ω = ⊕ [[0,1],[−1,0]].
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let d = 2 * modes;
    let mut omega = DMatrix::<f64>::zeros(d, d);
    for m in 0..modes {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    omega
}

/// Symplectic eigenvalues: moduli of the eigenvalues of iΩγ with duplicates
/// collapsed, descending. When `partial_transpose_mode` is given, the p row
/// and column of that mode are sign-flipped first (phase-space mirror).
pub fn symplectic_eigenvalues(
    cov: &CovarianceMatrix,
    partial_transpose_mode: Option<usize>,
) -> Result<Vec<f64>> {
    let d = cov.dim();
    let mut gamma = cov.to_dmatrix();
    if let Some(mode) = partial_transpose_mode {
        if mode >= cov.modes {
            return Err(EntLabError::argument("mode index out of range"));
        }
        let p_idx = 2 * mode + 1;
        for k in 0..d {
            gamma[(p_idx, k)] = -gamma[(p_idx, k)];
            gamma[(k, p_idx)] = -gamma[(k, p_idx)];
        }
    }
    // eigenvalues of i Omega gamma are i times those of the real matrix
    // Omega gamma, so the moduli agree
    let m = symplectic_form(cov.modes) * gamma;
    let eigs = m.complex_eigenvalues();
    let mut moduli: Vec<f64> = eigs.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // pairs (+ie, -ie): keep one of each
    Ok(moduli.into_iter().step_by(2).collect())
}

/// Total-variance criterion with EPR operators u = a q₁ + q₂/a,
/// v = a p₁ − p₂/a: any separable state satisfies
/// ⟨Δu²⟩ + ⟨Δv²⟩ ≥ a² + 1/a². Detected = entangled.
pub fn duan_check(cov: &CovarianceMatrix, a: f64) -> Result<CriterionVerdict> {
    if cov.modes != 2 {
        return Err(EntLabError::argument("total-variance check needs exactly 2 modes"));
    }
    if a <= 0.0 {
        return Err(EntLabError::argument("a must be positive"));
    }
    let g = &cov.gamma;
    let inv = 1.0 / a;
    // gamma holds doubled symmetrized moments: Var(x) = gamma_xx / 2
    let var_u = 0.5 * (a * a * g[0][0] + inv * inv * g[2][2] + 2.0 * g[0][2]);
    let var_v = 0.5 * (a * a * g[1][1] + inv * inv * g[3][3] - 2.0 * g[1][3]);
    let bound = a * a + inv * inv;
    let margin = bound - (var_u + var_v);
    let outcome = if margin > DETECTION_TOL { Outcome::Detected } else { Outcome::NotDetected };
    Ok(CriterionVerdict { name: "duan".into(), outcome, margin })
}

/// Gaussian PPT criterion: entangled iff the smallest partially transposed
/// symplectic eigenvalue drops below 1. Exact for Gaussian states.
pub fn ppt_qumode_check(cov: &CovarianceMatrix) -> Result<CriterionVerdict> {
    if cov.modes != 2 {
        return Err(EntLabError::argument("PPT check needs exactly 2 modes"));
    }
    let eigs = symplectic_eigenvalues(cov, Some(1))?;
    let min = eigs.last().copied().unwrap();
    let margin = 1.0 - min;
    let outcome = if margin > DETECTION_TOL { Outcome::Detected } else { Outcome::NotDetected };
    Ok(CriterionVerdict { name: "ppt-cv".into(), outcome, margin })
}
