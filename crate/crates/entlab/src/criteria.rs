//! Separability, biseparability, distillability, and nonlocality criteria,
//! plus entanglement witnesses.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{EntLabError, Result};

use crate::qstate::{self, DensityMatrix, PartitionSpec};
use crate::sdp;
use crate::states::{pauli_x, pauli_z, GhzDiagonalCoeffs};

pub const DETECTION_TOL: f64 = 1e-9;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Detected,
    NotDetected,
}

/// Result of a criterion evaluation; `margin` is the signed distance to the
/// detection threshold (positive means detected).
#[derive(Debug, Clone, Serialize)]
pub struct CriterionVerdict {
    pub name: String,
    pub outcome: Outcome,
    pub margin: f64,
}

impl CriterionVerdict {
    fn from_margin(name: impl Into<String>, margin: f64) -> Self {
        let outcome = if margin > DETECTION_TOL { Outcome::Detected } else { Outcome::NotDetected };
        CriterionVerdict { name: name.into(), outcome, margin }
    }

    pub fn detected(&self) -> bool {
        self.outcome == Outcome::Detected
    }
}

/// Peres PPT criterion: detected (NPT ⇒ entangled) iff the partial transpose
/// over `block` has an eigenvalue below −1e-9. Margin = −(min eigenvalue).
pub fn ppt(rho: &DensityMatrix, block: &[usize]) -> Result<CriterionVerdict> {
    let pt = qstate::partial_transpose(rho, block)?;
    let min_eig = qstate::eigvalsh(&pt).last().copied().unwrap();
    Ok(CriterionVerdict::from_margin(format!("ppt[{block:?}]"), -min_eig))
}

/// Index of the GHZ-diagonal coefficient associated with a bipartition of
/// the register given as a qubit subset (qubit 0 is the MSB of the index).
pub fn split_index(n: usize, block: &[usize]) -> usize {
    let mut mask = 0usize;
    for &q in block {
        mask |= 1 << (n - 1 - q);
    }
    let full = (1usize << n) - 1;
    mask.min(full ^ mask)
}

/// PPT of one bipartition of a strict GHZ-diagonal state: the split-k PT
/// eigenvalue is λ_k − |Δ|/2, so PPT ⟺ λ_k ≥ |Δ|/2 (boundary inclusive).
/// The sign of the corner coherence is a local phase and does not matter.
pub fn ghz_diag_split_ppt(coeffs: &GhzDiagonalCoeffs, k: usize) -> Result<CriterionVerdict> {
    if !coeffs.is_strict(1e-10) {
        return Err(EntLabError::argument("coefficients are not strict GHZ-diagonal"));
    }
    if k == 0 || k >= coeffs.plus.len() {
        return Err(EntLabError::argument(format!("split index {k} out of range")));
    }
    let margin = coeffs.delta().abs() / 2.0 - coeffs.plus[k];
    Ok(CriterionVerdict::from_margin(format!("ghz-diag-ppt[k={k}]"), margin))
}

fn diag(m: &DMatrix<C64>, k: usize) -> f64 {
    m[(k, k)].re
}

/// Biseparability test tuned to the GHZ₃ vicinity: every biseparable
/// three-qubit state satisfies
/// |ρ₀₀₀,₁₁₁| ≤ √(ρ₀₀₁ρ₁₁₀) + √(ρ₀₁₀ρ₁₀₁) + √(ρ₀₁₁ρ₁₀₀);
/// violation ⇒ genuine tripartite entanglement.
pub fn bisep_ghz3(rho: &DensityMatrix) -> Result<CriterionVerdict> {
    if rho.n_qubits() != 3 {
        return Err(EntLabError::argument("bisep_ghz3 requires 3 qubits"));
    }
    let m = rho.matrix();
    let lhs = m[(0b000, 0b111)].norm();
    let rhs = (diag(m, 0b001) * diag(m, 0b110)).max(0.0).sqrt()
        + (diag(m, 0b010) * diag(m, 0b101)).max(0.0).sqrt()
        + (diag(m, 0b011) * diag(m, 0b100)).max(0.0).sqrt();
    Ok(CriterionVerdict::from_margin("bisep-ghz3", lhs - rhs))
}

/// W₃-vicinity biseparability test.
pub fn bisep_w3(rho: &DensityMatrix) -> Result<CriterionVerdict> {
    if rho.n_qubits() != 3 {
        return Err(EntLabError::argument("bisep_w3 requires 3 qubits"));
    }
    let m = rho.matrix();
    let lhs = m[(0b001, 0b010)].norm() + m[(0b001, 0b100)].norm() + m[(0b010, 0b100)].norm();
    let rhs = (diag(m, 0b000) * diag(m, 0b011)).max(0.0).sqrt()
        + (diag(m, 0b000) * diag(m, 0b101)).max(0.0).sqrt()
        + (diag(m, 0b000) * diag(m, 0b110)).max(0.0).sqrt()
        + 0.5 * (diag(m, 0b001) + diag(m, 0b010) + diag(m, 0b100));
    Ok(CriterionVerdict::from_margin("bisep-w3", lhs - rhs))
}

/// N-qubit GHZ-vicinity biseparability test:
/// |ρ₀…₀,₁…₁| ≤ Σ_{k=1}^{2^{N-1}-1} √(ρ_k ρ_k̄). Exact (necessary and
/// sufficient) on generalized GHZ-diagonal states.
pub fn bisep_ghz_n(rho: &DensityMatrix) -> Result<CriterionVerdict> {
    let n = rho.n_qubits();
    if n < 2 {
        return Err(EntLabError::argument("need at least 2 qubits"));
    }
    let d = 1usize << n;
    let m = rho.matrix();
    let lhs = m[(0, d - 1)].norm();
    let mut rhs = 0.0;
    for k in 1..d / 2 {
        rhs += (diag(m, k) * diag(m, d - 1 - k)).max(0.0).sqrt();
    }
    Ok(CriterionVerdict::from_margin("bisep-ghzN", lhs - rhs))
}

/// W₄-vicinity biseparability test.
pub fn bisep_w4(rho: &DensityMatrix) -> Result<CriterionVerdict> {
    if rho.n_qubits() != 4 {
        return Err(EntLabError::argument("bisep_w4 requires 4 qubits"));
    }
    let m = rho.matrix();
    let singles: Vec<usize> = (0..16).filter(|k: &usize| k.count_ones() == 1).collect();
    let mut lhs = 0.0;
    for (i, &a) in singles.iter().enumerate() {
        for &b in singles.iter().skip(i + 1) {
            lhs += m[(a.min(b), a.max(b))].norm();
        }
    }
    let mut rhs = 0.0;
    for k in (0..16usize).filter(|k| k.count_ones() == 2) {
        rhs += (diag(m, 0) * diag(m, k)).max(0.0).sqrt();
    }
    for &k in &singles {
        rhs += diag(m, k);
    }
    Ok(CriterionVerdict::from_margin("bisep-w4", lhs - rhs))
}

/// Dicke(4,2)-vicinity biseparability test.
pub fn bisep_dicke4(rho: &DensityMatrix) -> Result<CriterionVerdict> {
    if rho.n_qubits() != 4 {
        return Err(EntLabError::argument("bisep_dicke4 requires 4 qubits"));
    }
    let m = rho.matrix();
    let doubles: Vec<usize> = (0..16).filter(|k: &usize| k.count_ones() == 2).collect();
    let mut lhs = 0.0;
    for (i, &a) in doubles.iter().enumerate() {
        for &b in doubles.iter().skip(i + 1) {
            lhs += m[(a.min(b), a.max(b))].norm();
        }
    }
    let mut rhs = (diag(m, 0b0000) * diag(m, 0b1111)).max(0.0).sqrt();
    for k in (0..16usize).filter(|k| k.count_ones() == 1) {
        for l in (0..16usize).filter(|l| l.count_ones() == 3) {
            rhs += (diag(m, k) * diag(m, l)).max(0.0).sqrt();
        }
    }
    let weight2_sum: f64 = doubles.iter().map(|&k| diag(m, k)).sum();
    rhs += 1.5 * weight2_sum;
    Ok(CriterionVerdict::from_margin("bisep-dicke4", lhs - rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessTarget {
    Ghz3,
    W3,
}

/// Fidelity-based genuine-multipartite-entanglement witness for the built-in
/// three-qubit targets.
///
/// GHZ₃: detected iff F > 1/2. W₃: the sharper member of the family,
/// W = (2/3)(I − |111⟩⟨111|) − |W₃⟩⟨W₃|, i.e. detected iff
/// F > (2/3)(1 − ⟨111|ρ|111⟩); this reduces to F > 2/3 when ρ₁₁₁ = 0.
/// `alpha_override` replaces the threshold with a plain fidelity bound.
pub fn ghz_fidelity_witness(
    rho: &DensityMatrix,
    target: WitnessTarget,
    alpha_override: Option<f64>,
) -> Result<CriterionVerdict> {
    if rho.n_qubits() != 3 {
        return Err(EntLabError::argument("built-in witness targets are three-qubit states"));
    }
    let (psi, name) = match target {
        WitnessTarget::Ghz3 => (crate::states::ghz(3), "witness-ghz3"),
        WitnessTarget::W3 => (crate::states::w_state(3), "witness-w3"),
    };
    let f = qstate::fidelity_with_pure(rho, &psi)?;
    let threshold = match (target, alpha_override) {
        (_, Some(a)) => a,
        (WitnessTarget::Ghz3, None) => 0.5,
        (WitnessTarget::W3, None) => (2.0 / 3.0) * (1.0 - rho.matrix()[(7, 7)].re),
    };
    Ok(CriterionVerdict::from_margin(name, f - threshold))
}

/// Witness for an NPT state: W = (|η⁻⟩⟨η⁻|)^{T_block} built from the most
/// negative eigenvector of ρ^{T_block}. Returns (W, Tr[Wρ]); the expectation
/// equals the negative eigenvalue.
pub fn npt_witness(rho: &DensityMatrix, block: &[usize]) -> Result<(DMatrix<C64>, f64)> {
    let n = rho.n_qubits();
    let pt = qstate::partial_transpose(rho, block)?;
    let (vals, vecs) = qstate::eigh(&pt);
    let (idx, &min_eig) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    if min_eig >= -DETECTION_TOL {
        return Err(EntLabError::argument(format!(
            "state is PPT in this block (min eigenvalue {min_eig:.3e}); no NPT witness exists"
        )));
    }
    let eta = vecs.column(idx).into_owned();
    let proj = &eta * eta.adjoint();
    let w = qstate::partial_transpose_raw(&proj, n, block);
    let mut expect = 0.0;
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            expect += (w[(i, j)].conj() * rho.matrix()[(i, j)]).re;
        }
    }
    Ok((w, expect))
}

/// Dichotomic two-outcome observables for a CHSH evaluation.
pub struct ChshSettings {
    pub a0: DMatrix<C64>,
    pub a1: DMatrix<C64>,
    pub b0: DMatrix<C64>,
    pub b1: DMatrix<C64>,
}

/// Settings that reach +2√2 on the singlet |Ψ⁻⟩:
/// A₀ = Z, A₁ = X, B₀ = −(X+Z)/√2, B₁ = (X−Z)/√2.
pub fn chsh_optimal_bell() -> ChshSettings {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ChshSettings {
        a0: pauli_z(),
        a1: pauli_x(),
        b0: (pauli_x() + pauli_z()) * c(-s),
        b1: (pauli_x() - pauli_z()) * c(s),
    }
}

fn check_dichotomic(o: &DMatrix<C64>) -> Result<()> {
    if o.nrows() != 2 || o.ncols() != 2 {
        return Err(EntLabError::argument("observables must be 2x2"));
    }
    if (o - o.adjoint()).norm() > 1e-9 {
        return Err(EntLabError::argument("observable not Hermitian"));
    }
    let sq = o * o;
    if (&sq - DMatrix::<C64>::identity(2, 2)).norm() > 1e-9 {
        return Err(EntLabError::argument("observable is not dichotomic (O^2 != I)"));
    }
    Ok(())
}

/// ⟨A₀B₀⟩ + ⟨A₁B₀⟩ + ⟨A₀B₁⟩ − ⟨A₁B₁⟩ on a two-qubit state.
pub fn chsh_value(rho: &DensityMatrix, settings: &ChshSettings) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(EntLabError::argument("CHSH needs a two-qubit state"));
    }
    for o in [&settings.a0, &settings.a1, &settings.b0, &settings.b1] {
        check_dichotomic(o)?;
    }
    let bell_op = settings.a0.kronecker(&settings.b0)
        + settings.a1.kronecker(&settings.b0)
        + settings.a0.kronecker(&settings.b1)
        - settings.a1.kronecker(&settings.b1);
    let mut v = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            v += (bell_op[(j, i)] * rho.matrix()[(i, j)]).re;
        }
    }
    Ok(v)
}

/// Blockwise M-party distillability for strict GHZ-diagonal states: detected
/// iff every bipartition that separates the given blocks is NPT
/// (λ_k < Δ/2). Margin = min over those splits of (Δ/2 − λ_k).
pub fn m_party_distillability_ghzdiag(
    coeffs: &GhzDiagonalCoeffs,
    partition: &PartitionSpec,
) -> Result<CriterionVerdict> {
    if !coeffs.is_strict(1e-10) {
        return Err(EntLabError::argument("coefficients are not strict GHZ-diagonal"));
    }
    let n = coeffs.n_qubits();
    let blocks = partition.blocks();
    let m = blocks.len();
    if m < 2 {
        return Err(EntLabError::argument("partition must have at least two blocks"));
    }
    if blocks.iter().flatten().any(|&q| q >= n) {
        return Err(EntLabError::argument("partition qubits out of range"));
    }
    let mut worst = f64::INFINITY;
    // all ways of splitting the M blocks into two nonempty sides
    for side_mask in 1usize..(1 << m) - 1 {
        if side_mask & 1 == 0 {
            continue; // representative per complementary pair
        }
        let qubits: Vec<usize> = (0..m)
            .filter(|b| side_mask >> b & 1 == 1)
            .flat_map(|b| blocks[b].iter().copied())
            .collect();
        let k = split_index(n, &qubits);
        let margin = coeffs.delta().abs() / 2.0 - coeffs.plus[k];
        worst = worst.min(margin);
    }
    Ok(CriterionVerdict::from_margin(format!("{m}-party-distillable"), worst))
}

/// Multipartite negativity: max{−Tr[W_min ρ], 0} from the
/// fully-decomposable-witness program. Zero for every PPT mixture.
pub fn multipartite_negativity(rho: &DensityMatrix) -> Result<f64> {
    let sol = sdp::solve_fully_decomposable(rho, sdp::DEFAULT_MAX_ITERS)?;
    Ok((-sol.value).max(0.0))
}

/// Evaluates every built-in criterion applicable to the state.
pub fn standard_battery(rho: &DensityMatrix) -> Vec<CriterionVerdict> {
    let n = rho.n_qubits();
    let mut out = Vec::new();
    for mask in 1usize..(1 << n) - 1 {
        if mask & 1 == 1 {
            let block: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
            if let Ok(v) = ppt(rho, &block) {
                out.push(v);
            }
        }
    }
    if n >= 2 {
        if let Ok(v) = bisep_ghz_n(rho) {
            out.push(v);
        }
    }
    if n == 3 {
        for f in [bisep_ghz3, bisep_w3] {
            if let Ok(v) = f(rho) {
                out.push(v);
            }
        }
        for t in [WitnessTarget::Ghz3, WitnessTarget::W3] {
            if let Ok(v) = ghz_fidelity_witness(rho, t, None) {
                out.push(v);
            }
        }
    }
    if n == 4 {
        for f in [bisep_w4, bisep_dicke4] {
            if let Ok(v) = f(rho) {
                out.push(v);
            }
        }
    }
    out
}
