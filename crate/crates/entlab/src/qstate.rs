//! Dense complex linear algebra for multiqubit registers: pure states,
//! density matrices, tensor products, partial trace/transpose, spectra,
//! entropies.
//!
//! Convention: qubit 0 is the leftmost tensor factor, i.e. the most
//! significant bit of a computational-basis index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{EntLabError, Result};

/// Default cap on the total Hilbert-space dimension (2^12).
pub const DEFAULT_DIM_CAP: usize = 1 << 12;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = -1e-9;

/// Normalized state vector on an n-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: DVector<C64>,
}

impl PureState {
    /// Builds a pure state, checking normalization (1e-10) and length 2^n.
    pub fn new(n_qubits: usize, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != 1 << n_qubits {
            return Err(EntLabError::argument(format!(
                "amplitude vector has length {}, expected 2^{}",
                amplitudes.len(),
                n_qubits
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(EntLabError::argument(format!(
                "state vector norm {norm} is not 1"
            )));
        }
        Ok(PureState { n_qubits, amplitudes })
    }

    /// Normalizes an arbitrary non-zero vector into a pure state.
    pub fn from_unnormalized(n_qubits: usize, mut v: DVector<C64>) -> Result<Self> {
        let norm = v.norm();
        if norm < 1e-14 {
            return Err(EntLabError::Degenerate("zero state vector".into()));
        }
        v /= C64::new(norm, 0.0);
        PureState::new(n_qubits, v)
    }

    /// Computational basis state |k⟩.
    pub fn basis(n_qubits: usize, k: usize) -> Self {
        let mut v = DVector::zeros(1 << n_qubits);
        v[k] = C64::new(1.0, 0.0);
        PureState { n_qubits, amplitudes: v }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// |ψ⟩⟨ψ| as a density matrix.
    pub fn density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix { n_qubits: self.n_qubits, matrix: m }
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let n = self.n_qubits + other.n_qubits;
        if 1usize << n > DEFAULT_DIM_CAP {
            return Err(EntLabError::capacity(format!(
                "tensor product dimension 2^{n} exceeds cap {DEFAULT_DIM_CAP}"
            )));
        }
        let v = self.amplitudes.kronecker(&other.amplitudes);
        Ok(PureState { n_qubits: n, amplitudes: v })
    }
}

/// Hermitian, trace-one, positive-semidefinite operator on an n-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Builds a density matrix, enforcing Hermiticity (1e-10 elementwise),
    /// unit trace (1e-10) and min eigenvalue ≥ −1e-9.
    pub fn new(n_qubits: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let d = 1usize << n_qubits;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(EntLabError::argument(format!(
                "matrix is {}x{}, expected {d}x{d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for i in 0..d {
            for j in 0..=i {
                let delta = matrix[(i, j)] - matrix[(j, i)].conj();
                if delta.norm() > HERMITICITY_TOL {
                    return Err(EntLabError::argument(format!(
                        "matrix not Hermitian at ({i},{j}): asymmetry {:.3e}",
                        delta.norm()
                    )));
                }
            }
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(EntLabError::argument(format!("trace {tr} is not 1")));
        }
        let min_eig = eigvalsh(&matrix).last().copied().unwrap_or(0.0);
        if min_eig < POSITIVITY_TOL {
            return Err(EntLabError::argument(format!(
                "matrix not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(DensityMatrix { n_qubits, matrix })
    }

    /// Builds without the (cubic-cost) positivity check. Hermiticity and trace
    /// are still enforced. Intended for outputs of operations that preserve
    /// positivity by construction.
    pub(crate) fn new_unchecked(n_qubits: usize, matrix: DMatrix<C64>) -> Self {
        DensityMatrix { n_qubits, matrix }
    }

    /// Maximally mixed state I/2^n.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let m = DMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
        DensityMatrix { n_qubits, matrix: m }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        trace(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        let mut p = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                p += self.matrix[(i, j)].norm_sqr();
            }
        }
        p
    }

    /// Checks the state invariants, returning the offending quantity on failure.
    pub fn validate(&self) -> Result<()> {
        DensityMatrix::new(self.n_qubits, self.matrix.clone()).map(|_| ())
    }
}

pub(crate) fn trace(m: &DMatrix<C64>) -> C64 {
    let mut t = C64::new(0.0, 0.0);
    for i in 0..m.nrows() {
        t += m[(i, i)];
    }
    t
}

/// Labeled split of the register into disjoint, covering, nonempty blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    blocks: Vec<Vec<usize>>,
}

impl PartitionSpec {
    pub fn new(n_qubits: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|b| b.is_empty()) {
            return Err(EntLabError::argument("blocks must be nonempty"));
        }
        let mut seen = vec![false; n_qubits];
        for b in &blocks {
            for &q in b {
                if q >= n_qubits {
                    return Err(EntLabError::argument(format!(
                        "qubit index {q} out of range for {n_qubits} qubits"
                    )));
                }
                if seen[q] {
                    return Err(EntLabError::argument(format!("qubit {q} appears twice")));
                }
                seen[q] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(EntLabError::argument("blocks do not cover the register"));
        }
        Ok(PartitionSpec { blocks })
    }

    /// Bipartition: the given block versus its complement.
    pub fn bipartition(n_qubits: usize, block: &[usize]) -> Result<Self> {
        let rest: Vec<usize> = (0..n_qubits).filter(|q| !block.contains(q)).collect();
        PartitionSpec::new(n_qubits, vec![block.to_vec(), rest])
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }
}

/// Tensor product of two density matrices.
///
/// Trace multiplies; fails with a capacity error when the joint dimension
/// exceeds [`DEFAULT_DIM_CAP`].
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    tensor_with_cap(a, b, DEFAULT_DIM_CAP)
}

/// Tensor product under an explicit dimension cap.
pub fn tensor_with_cap(a: &DensityMatrix, b: &DensityMatrix, cap: usize) -> Result<DensityMatrix> {
    let n = a.n_qubits + b.n_qubits;
    if 1usize << n > cap {
        return Err(EntLabError::capacity(format!(
            "tensor product dimension 2^{n} exceeds cap {cap}"
        )));
    }
    let m = a.matrix.kronecker(&b.matrix);
    Ok(DensityMatrix::new_unchecked(n, m))
}

/// Traces out every qubit not in `keep`; the result lives on the `keep`
/// qubits in their original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits;
    if keep.is_empty() {
        return Err(EntLabError::argument("keep set must be nonempty"));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() || sorted.iter().any(|&q| q >= n) {
        return Err(EntLabError::argument("keep set has duplicates or out-of-range indices"));
    }
    let m = partial_trace_raw(rho.matrix(), n, keep);
    Ok(DensityMatrix::new_unchecked(keep.len(), m))
}

pub(crate) fn partial_trace_raw(m: &DMatrix<C64>, n: usize, keep: &[usize]) -> DMatrix<C64> {
    let k = keep.len();
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let dk = 1usize << k;
    let dt = 1usize << traced.len();
    let mut out = DMatrix::<C64>::zeros(dk, dk);
    // scatter kept-index bits and traced-index bits into a full register index
    let compose = |kept_idx: usize, tr_idx: usize| -> usize {
        let mut full = 0usize;
        for (pos, &q) in keep.iter().enumerate() {
            if kept_idx >> (k - 1 - pos) & 1 == 1 {
                full |= 1 << (n - 1 - q);
            }
        }
        for (pos, &q) in traced.iter().enumerate() {
            if tr_idx >> (traced.len() - 1 - pos) & 1 == 1 {
                full |= 1 << (n - 1 - q);
            }
        }
        full
    };
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                acc += m[(compose(i, t), compose(j, t))];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Partial transpose over the given block of qubits. The result is Hermitian
/// with unit trace but may have negative eigenvalues.
pub fn partial_transpose(rho: &DensityMatrix, block: &[usize]) -> Result<DMatrix<C64>> {
    let n = rho.n_qubits;
    if block.iter().any(|&q| q >= n) {
        return Err(EntLabError::argument("block index out of range"));
    }
    let mut sorted = block.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != block.len() {
        return Err(EntLabError::argument("block has duplicate indices"));
    }
    Ok(partial_transpose_raw(rho.matrix(), n, block))
}

/// Partial transpose of a raw square matrix on an n-qubit index space; no
/// state validation, for operators that are not density matrices.
pub fn partial_transpose_matrix(m: &DMatrix<C64>, n: usize, block: &[usize]) -> Result<DMatrix<C64>> {
    if m.nrows() != 1 << n || m.ncols() != 1 << n {
        return Err(EntLabError::argument("matrix dimension is not 2^n"));
    }
    if block.iter().any(|&q| q >= n) {
        return Err(EntLabError::argument("block index out of range"));
    }
    Ok(partial_transpose_raw(m, n, block))
}

pub(crate) fn partial_transpose_raw(m: &DMatrix<C64>, n: usize, block: &[usize]) -> DMatrix<C64> {
    let d = 1usize << n;
    let mut mask = 0usize;
    for &q in block {
        mask |= 1 << (n - 1 - q);
    }
    let mut out = DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            // swap the block bits between row and column index
            let i2 = (i & !mask) | (j & mask);
            let j2 = (j & !mask) | (i & mask);
            out[(i2, j2)] = m[(i, j)];
        }
    }
    out
}

/// Real eigenvalues of a Hermitian matrix, sorted descending.
///
/// Checks Hermiticity (1e-8) and the reconstruction residual
/// ‖H − VΛV†‖₂ < 1e-8.
pub fn spectrum(h: &DMatrix<C64>) -> Result<Vec<f64>> {
    let d = h.nrows();
    if d != h.ncols() {
        return Err(EntLabError::argument("matrix not square"));
    }
    for i in 0..d {
        for j in 0..=i {
            if (h[(i, j)] - h[(j, i)].conj()).norm() > 1e-8 {
                return Err(EntLabError::argument("matrix not Hermitian within 1e-8"));
            }
        }
    }
    let eig = h.clone().symmetric_eigen();
    let recon = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| C64::new(x, 0.0)))
        * eig.eigenvectors.adjoint();
    let resid = (h - recon).norm();
    if resid > 1e-8 {
        return Err(EntLabError::Convergence {
            reason: "eigendecomposition reconstruction residual too large".into(),
            residual: resid,
        });
    }
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

/// Dimension below which the full-precision Jacobi sweep is used instead of
/// the tridiagonal QR path.
const JACOBI_DIM: usize = 32;

/// Eigenvalues only, descending, no validation. Internal fast path.
pub(crate) fn eigvalsh(h: &DMatrix<C64>) -> Vec<f64> {
    if h.nrows() <= JACOBI_DIM {
        return jacobi_hermitian(h, false).0;
    }
    let mut vals: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}

/// Full Hermitian eigendecomposition, eigenvalues descending with matching
/// eigenvector columns. No validation.
pub(crate) fn eigh(h: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    if h.nrows() <= JACOBI_DIM {
        let (vals, vecs) = jacobi_hermitian(h, true);
        return (vals, vecs.unwrap());
    }
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let d = h.nrows();
    let mut vecs = DMatrix::<C64>::zeros(d, d);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Cyclic Jacobi diagonalization of a complex Hermitian matrix. Quadratic
/// convergence to full machine precision; used for the small dense blocks
/// where downstream tolerances are tight.
fn jacobi_hermitian(h: &DMatrix<C64>, want_vectors: bool) -> (Vec<f64>, Option<DMatrix<C64>>) {
    let d = h.nrows();
    let mut a = h.clone();
    let mut v = if want_vectors { Some(DMatrix::<C64>::identity(d, d)) } else { None };
    let norm = a.norm().max(1e-300);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..d {
            for q in p + 1..d {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() < 1e-15 * norm {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let z = a[(p, q)];
                let m = z.norm();
                if m < 1e-300 {
                    continue;
                }
                let u = z / C64::new(m, 0.0); // phase of the pivot
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // rotation angle for the phase-aligned real 2x2 block
                let theta = 0.5 * (2.0 * m).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                // J acts on columns (p, q): col_p' = c col_p + s u* col_q,
                // col_q' = -s u col_p + c col_q (so that J† A J kills a_pq)
                let su = u * C64::new(s, 0.0);
                let cc = C64::new(c, 0.0);
                for r in 0..d {
                    let (arp, arq) = (a[(r, p)], a[(r, q)]);
                    a[(r, p)] = arp * cc + arq * su.conj();
                    a[(r, q)] = -arp * su + arq * cc;
                }
                for r in 0..d {
                    let (apr, aqr) = (a[(p, r)], a[(q, r)]);
                    a[(p, r)] = apr * cc + aqr * su;
                    a[(q, r)] = -apr * su.conj() + aqr * cc;
                }
                if let Some(vm) = v.as_mut() {
                    for r in 0..d {
                        let (vrp, vrq) = (vm[(r, p)], vm[(r, q)]);
                        vm[(r, p)] = vrp * cc + vrq * su.conj();
                        vm[(r, q)] = -vrp * su + vrq * cc;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let vecs = v.map(|vm| {
        let mut out = DMatrix::<C64>::zeros(d, d);
        for (col, &i) in order.iter().enumerate() {
            out.set_column(col, &vm.column(i));
        }
        out
    });
    (vals, vecs)
}

/// Von Neumann entropy (nats, 0·ln 0 = 0) and linear entropy 1 − Tr ρ².
pub fn entropies(rho: &DensityMatrix) -> (f64, f64) {
    let eigs = eigvalsh(rho.matrix());
    let mut s = 0.0;
    for &l in &eigs {
        if l > 1e-15 {
            s -= l * l.ln();
        }
    }
    let sl = 1.0 - rho.purity();
    (s.max(0.0), sl.max(-1e-12))
}

/// Overlap Tr[|ψ⟩⟨ψ| ρ] ∈ [0, 1].
pub fn fidelity_with_pure(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(EntLabError::argument(format!(
            "dimension mismatch: state {} vs {}",
            rho.dim(),
            psi.dim()
        )));
    }
    let v = psi.amplitudes();
    let f = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
    Ok(f.clamp(0.0, 1.0 + 1e-10).min(1.0))
}

/// Trace distance (1/2)‖ρ − σ‖₁ between two states of equal dimension.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(EntLabError::argument("dimension mismatch"));
    }
    let diff = a.matrix() - b.matrix();
    let eigs = eigvalsh(&diff);
    Ok(0.5 * eigs.iter().map(|x| x.abs()).sum::<f64>())
}

/// JSON wire format for complex matrices: {"n", "re", "im"}, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        let re = (0..n)
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
            .collect();
        let im = (0..n)
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
            .collect();
        MatrixJson { n, re, im }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<C64>> {
        let n = self.n;
        if self.re.len() != n || self.im.len() != n {
            return Err(EntLabError::argument("row count does not match n"));
        }
        let mut m = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            if self.re[i].len() != n || self.im[i].len() != n {
                return Err(EntLabError::argument("column count does not match n"));
            }
            for j in 0..n {
                m[(i, j)] = C64::new(self.re[i][j], self.im[i][j]);
            }
        }
        Ok(m)
    }
}
