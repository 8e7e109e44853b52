//! Factories for the named state families: GHZ, W, Dicke, graph, Werner,
//! isotropic, Smolin, GHZ-diagonal, Haar-random.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{EntLabError, Result};
use crate::qstate::{DensityMatrix, PureState};

/// Bell-state ordering convention: (Ψ⁺, Ψ⁻, Φ⁺, Φ⁻).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellKind {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

pub const BELL_BASIS: [BellKind; 4] = [
    BellKind::PsiPlus,
    BellKind::PsiMinus,
    BellKind::PhiPlus,
    BellKind::PhiMinus,
];

pub fn bell(kind: BellKind) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = DVector::<C64>::zeros(4);
    match kind {
        BellKind::PsiPlus => {
            v[1] = C64::new(s, 0.0);
            v[2] = C64::new(s, 0.0);
        }
        BellKind::PsiMinus => {
            v[1] = C64::new(s, 0.0);
            v[2] = C64::new(-s, 0.0);
        }
        BellKind::PhiPlus => {
            v[0] = C64::new(s, 0.0);
            v[3] = C64::new(s, 0.0);
        }
        BellKind::PhiMinus => {
            v[0] = C64::new(s, 0.0);
            v[3] = C64::new(-s, 0.0);
        }
    }
    PureState::new(2, v).unwrap()
}

/// (|00…0⟩ + |11…1⟩)/√2.
pub fn ghz(n: usize) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = DVector::<C64>::zeros(1 << n);
    v[0] = C64::new(s, 0.0);
    v[(1 << n) - 1] = C64::new(s, 0.0);
    PureState::new(n, v).unwrap()
}

/// α|k⟩ ± β|k̄⟩ with k̄ the bitwise complement of k.
pub fn generalized_ghz(n: usize, k: usize, alpha: C64, beta: C64, plus: bool) -> Result<PureState> {
    let d = 1usize << n;
    if k >= d {
        return Err(EntLabError::argument(format!("k = {k} out of range for {n} qubits")));
    }
    if (alpha.norm_sqr() + beta.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(EntLabError::argument("|alpha|^2 + |beta|^2 must be 1"));
    }
    let kbar = d - 1 - k;
    let mut v = DVector::<C64>::zeros(d);
    v[k] = alpha;
    v[kbar] += if plus { beta } else { -beta };
    PureState::new(n, v)
}

/// Single excitation shared equally: (|0…01⟩ + |0…10⟩ + … + |10…0⟩)/√N.
pub fn w_state(n: usize) -> PureState {
    dicke(n, 1).unwrap()
}

/// Symmetric Dicke state with k excitations (equal superposition of all
/// weight-k basis strings).
pub fn dicke(n: usize, k: usize) -> Result<PureState> {
    if k == 0 || k >= n {
        return Err(EntLabError::argument(format!("k = {k} must satisfy 0 < k < n = {n}")));
    }
    let d = 1usize << n;
    let mut v = DVector::<C64>::zeros(d);
    let mut count = 0usize;
    for idx in 0..d {
        if (idx as u32).count_ones() as usize == k {
            v[idx] = C64::new(1.0, 0.0);
            count += 1;
        }
    }
    let norm = (count as f64).sqrt();
    for idx in 0..d {
        v[idx] /= C64::new(norm, 0.0);
    }
    PureState::new(n, v)
}

/// Undirected graph without self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &edges {
            if a == b {
                return Err(EntLabError::argument(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(EntLabError::argument(format!("edge ({a},{b}) out of range")));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(EntLabError::argument(format!("duplicate edge ({a},{b})")));
            }
        }
        Ok(Graph { n, edges })
    }

    /// Line graph 0-1-2-…-(n−1).
    pub fn linear_cluster(n: usize) -> Self {
        Graph { n, edges: (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect() }
    }

    /// Star with vertex 0 at the center.
    pub fn star(n: usize) -> Self {
        Graph { n, edges: (1..n).map(|i| (0, i)).collect() }
    }

    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            if a == v {
                out.push(b);
            } else if b == v {
                out.push(a);
            }
        }
        out.sort_unstable();
        out
    }

    /// Parses the JSON wire format {"n": int, "edges": [[i,j], ...]}.
    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Wire {
            n: usize,
            edges: Vec<(usize, usize)>,
        }
        let w: Wire = serde_json::from_str(s)
            .map_err(|e| EntLabError::argument(format!("bad graph JSON: {e}")))?;
        Graph::new(w.n, w.edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({"n": self.n, "edges": self.edges}).to_string()
    }
}

/// CZ gates along the edges applied to |+⟩^⊗n.
pub fn graph_state(g: &Graph) -> PureState {
    graph_basis_state(g, 0)
}

/// Graph-basis state |G_μ⟩ = ⊗ᵢ Zᵢ^{μᵢ} |G₀⟩; μ is a bitstring with
/// qubit 0 in the most significant position.
pub fn graph_basis_state(g: &Graph, mu: usize) -> PureState {
    let n = g.n;
    let d = 1usize << n;
    let amp = 1.0 / (d as f64).sqrt();
    let mut v = DVector::<C64>::zeros(d);
    for idx in 0..d {
        let mut sign = 1.0;
        for &(a, b) in &g.edges {
            let ba = idx >> (n - 1 - a) & 1;
            let bb = idx >> (n - 1 - b) & 1;
            if ba == 1 && bb == 1 {
                sign = -sign;
            }
        }
        // Z_i^{mu_i} contributes (-1)^{mu_i * bit_i}
        let flips = (mu & idx).count_ones();
        if flips % 2 == 1 {
            sign = -sign;
        }
        v[idx] = C64::new(sign * amp, 0.0);
    }
    PureState::new(n, v).unwrap()
}

/// Stabilizer generator S_i = X_i ⊗_{j∈N(i)} Z_j as a dense matrix.
pub fn stabilizer_generator(g: &Graph, i: usize) -> DMatrix<C64> {
    let n = g.n;
    let d = 1usize << n;
    let nbrs = g.neighbours(i);
    let mut m = DMatrix::<C64>::zeros(d, d);
    for col in 0..d {
        let row = col ^ (1 << (n - 1 - i)); // X on qubit i
        let mut sign = 1.0;
        for &j in &nbrs {
            if col >> (n - 1 - j) & 1 == 1 {
                sign = -sign;
            }
        }
        m[(row, col)] = C64::new(sign, 0.0);
    }
    m
}

/// Werner state p|Ψ⁻⟩⟨Ψ⁻| + (1−p)I/4.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EntLabError::argument(format!("p = {p} outside [0,1]")));
    }
    let singlet = bell(BellKind::PsiMinus).density();
    let m = singlet.matrix() * C64::new(p, 0.0)
        + DMatrix::identity(4, 4) * C64::new((1.0 - p) / 4.0, 0.0);
    DensityMatrix::new(2, m)
}

/// Two-qudit isotropic state with singlet fraction f (d×d ⊗ d×d).
///
/// Returned as a raw matrix because d need not be a power of two.
pub fn isotropic_matrix(d: usize, f: f64) -> Result<DMatrix<C64>> {
    if d < 2 {
        return Err(EntLabError::argument("d must be at least 2"));
    }
    if !(0.0..=1.0).contains(&f) {
        return Err(EntLabError::argument(format!("f = {f} outside [0,1]")));
    }
    let dim = d * d;
    let mut phi = DVector::<C64>::zeros(dim);
    let amp = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        phi[j * d + j] = C64::new(amp, 0.0);
    }
    let proj = &phi * phi.adjoint();
    let m = (DMatrix::identity(dim, dim) - &proj) * C64::new((1.0 - f) / (dim as f64 - 1.0), 0.0)
        + proj * C64::new(f, 0.0);
    Ok(m)
}

/// Two-qubit isotropic state as a DensityMatrix.
pub fn isotropic_2q(f: f64) -> Result<DensityMatrix> {
    DensityMatrix::new(2, isotropic_matrix(2, f)?)
}

/// Equal mixture of Φ⁺ pairs across the three cuts of three qubits:
/// biseparable (hence a PPT mixture) yet NPT in every bipartition.
pub fn biseparable_npt_mixture() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = DMatrix::<C64>::zeros(8, 8);
    for pair in [(0b000usize, 0b110usize), (0b000, 0b011), (0b000, 0b101)] {
        let mut v = DVector::<C64>::zeros(8);
        v[pair.0] = C64::new(s, 0.0);
        v[pair.1] = C64::new(s, 0.0);
        m += &v * v.adjoint() * C64::new(1.0 / 3.0, 0.0);
    }
    DensityMatrix::new(3, m).unwrap()
}

/// Four-qubit Smolin state (1/4)(I⊗⁴ + Σ_μ σ_μ⊗⁴).
pub fn smolin() -> DensityMatrix {
    let mut acc = DMatrix::<C64>::identity(16, 16);
    for p in [pauli_x(), pauli_y(), pauli_z()] {
        let p4 = p.kronecker(&p).kronecker(&p).kronecker(&p);
        acc += p4;
    }
    DensityMatrix::new(4, acc * C64::new(1.0 / 16.0, 0.0)).unwrap()
}

pub fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
}

pub fn pauli_y() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)])
}

pub fn pauli_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)])
}

pub fn pauli(i: usize) -> DMatrix<C64> {
    match i {
        0 => DMatrix::identity(2, 2),
        1 => pauli_x(),
        2 => pauli_y(),
        3 => pauli_z(),
        _ => panic!("Pauli index {i} out of range"),
    }
}

/// Mixing weights for the GHZ basis states (|k⟩ ± |k̄⟩)/√2, 0 ≤ k < 2^{n−1}.
///
/// The strict GHZ-diagonal form requires λ_k⁺ = λ_k⁻ for every k ≠ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GhzDiagonalCoeffs {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl GhzDiagonalCoeffs {
    pub fn new(plus: Vec<f64>, minus: Vec<f64>) -> Result<Self> {
        if plus.len() != minus.len() || plus.is_empty() || !plus.len().is_power_of_two() {
            return Err(EntLabError::argument(
                "plus/minus must have equal power-of-two length 2^{n-1}",
            ));
        }
        if plus.iter().chain(minus.iter()).any(|&x| x < -1e-12) {
            return Err(EntLabError::argument("coefficients must be nonnegative"));
        }
        let total: f64 = plus.iter().sum::<f64>() + minus.iter().sum::<f64>();
        if (total - 1.0).abs() > 1e-10 {
            return Err(EntLabError::argument(format!("coefficients sum to {total}, not 1")));
        }
        Ok(GhzDiagonalCoeffs { plus, minus })
    }

    pub fn n_qubits(&self) -> usize {
        self.plus.len().trailing_zeros() as usize + 1
    }

    /// Is the strict form (λ_k⁺ = λ_k⁻ for k ≠ 0) satisfied?
    pub fn is_strict(&self, tol: f64) -> bool {
        self.plus
            .iter()
            .zip(self.minus.iter())
            .skip(1)
            .all(|(&p, &m)| (p - m).abs() <= tol)
    }

    /// Corner coherence Δ = λ₀⁺ − λ₀⁻ (the matrix corner element is Δ/2).
    pub fn delta(&self) -> f64 {
        self.plus[0] - self.minus[0]
    }
}

/// Assembles the density matrix Σ_k (λ_k⁺ ψ_k⁺ + λ_k⁻ ψ_k⁻).
pub fn ghz_diagonal(n: usize, coeffs: &GhzDiagonalCoeffs) -> Result<DensityMatrix> {
    if coeffs.n_qubits() != n {
        return Err(EntLabError::argument(format!(
            "coefficient vector implies {} qubits, expected {n}",
            coeffs.n_qubits()
        )));
    }
    let d = 1usize << n;
    let mut m = DMatrix::<C64>::zeros(d, d);
    for k in 0..d / 2 {
        let kbar = d - 1 - k;
        let (lp, lm) = (coeffs.plus[k], coeffs.minus[k]);
        let diag = 0.5 * (lp + lm);
        let coh = 0.5 * (lp - lm);
        m[(k, k)] += C64::new(diag, 0.0);
        m[(kbar, kbar)] += C64::new(diag, 0.0);
        m[(k, kbar)] += C64::new(coh, 0.0);
        m[(kbar, k)] += C64::new(coh, 0.0);
    }
    DensityMatrix::new(n, m)
}

/// Extracts GHZ-diagonal coefficients from a state, failing when the state is
/// not GHZ-diagonal within `tol`.
pub fn ghz_diagonal_coeffs_of(rho: &DensityMatrix, tol: f64) -> Result<GhzDiagonalCoeffs> {
    let n = rho.n_qubits();
    let d = 1usize << n;
    let m = rho.matrix();
    for i in 0..d {
        for j in 0..d {
            if i != j && j != d - 1 - i && m[(i, j)].norm() > tol {
                return Err(EntLabError::argument("state is not GHZ-diagonal"));
            }
        }
    }
    let mut plus = vec![0.0; d / 2];
    let mut minus = vec![0.0; d / 2];
    for k in 0..d / 2 {
        let kbar = d - 1 - k;
        let diag = 0.5 * (m[(k, k)].re + m[(kbar, kbar)].re);
        let coh = m[(k, kbar)].re;
        plus[k] = diag + coh;
        minus[k] = diag - coh;
    }
    GhzDiagonalCoeffs::new(plus, minus)
}

/// Haar-random pure state: i.i.d. standard complex Gaussian amplitudes,
/// normalized. Deterministic for a fixed seed.
pub fn haar_random_pure(n: usize, seed: u64) -> PureState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_random_pure_with(n, &mut rng)
}

pub fn haar_random_pure_with<R: Rng>(n: usize, rng: &mut R) -> PureState {
    let d = 1usize << n;
    let mut v = DVector::<C64>::zeros(d);
    for i in 0..d {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        v[i] = C64::new(re, im);
    }
    PureState::from_unnormalized(n, v).unwrap()
}
