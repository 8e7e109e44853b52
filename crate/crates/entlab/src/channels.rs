//! Noise processes as completely positive trace-preserving maps: the
//! single-qubit catalog, independent composition, Choi duals,
//! entanglement-breaking tests, and a Lindblad integrator cross-check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{EntLabError, Result};
use crate::qstate::{trace, DensityMatrix, MatrixJson, PureState, DEFAULT_DIM_CAP};
use crate::states::{pauli, pauli_x, pauli_y, pauli_z};

const KRAUS_PRUNE_TOL: f64 = 1e-14;
const COMPLETENESS_TOL: f64 = 1e-9;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Trace-preserving map in operator-sum form.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    label: String,
    param: f64,
    ops: Vec<DMatrix<C64>>,
}

impl KrausChannel {
    /// Builds a channel, pruning near-zero operators and checking the
    /// completeness relation Σ K†K = I within 1e-9.
    pub fn new(label: impl Into<String>, param: f64, ops: Vec<DMatrix<C64>>) -> Result<Self> {
        let ops: Vec<_> = ops.into_iter().filter(|k| k.norm() >= KRAUS_PRUNE_TOL).collect();
        if ops.is_empty() {
            return Err(EntLabError::argument("channel has no Kraus operators"));
        }
        let d = ops[0].nrows();
        if ops.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(EntLabError::argument("Kraus operators must share a square shape"));
        }
        if ops.len() > d * d {
            return Err(EntLabError::argument(format!(
                "{} Kraus operators exceed dim^2 = {}",
                ops.len(),
                d * d
            )));
        }
        let chan = KrausChannel { label: label.into(), param, ops };
        let resid = chan.completeness_residual();
        if resid > COMPLETENESS_TOL {
            return Err(EntLabError::argument(format!(
                "completeness violated: residual {resid:.3e}"
            )));
        }
        Ok(chan)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn param(&self) -> f64 {
        self.param
    }

    pub fn ops(&self) -> &[DMatrix<C64>] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    /// Max-abs-entry of Σ K†K − I.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let mut acc = DMatrix::<C64>::zeros(d, d);
        for k in &self.ops {
            acc += k.adjoint() * k;
        }
        acc -= DMatrix::<C64>::identity(d, d);
        acc.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Σ K m K† on a raw matrix of matching dimension.
    pub fn apply_matrix(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::<C64>::zeros(m.nrows(), m.ncols());
        for k in &self.ops {
            out += k * m * k.adjoint();
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(EntLabError::argument(format!(
                "channel dim {} does not match state dim {}",
                self.dim(),
                rho.dim()
            )));
        }
        Ok(DensityMatrix::new_unchecked(rho.n_qubits(), self.apply_matrix(rho.matrix())))
    }

    /// Applies this single-qubit channel to qubit `q` of an n-qubit matrix.
    pub fn apply_on_qubit(&self, m: &DMatrix<C64>, n: usize, q: usize) -> Result<DMatrix<C64>> {
        if self.dim() != 2 {
            return Err(EntLabError::argument("apply_on_qubit requires a single-qubit channel"));
        }
        if q >= n || m.nrows() != 1 << n {
            return Err(EntLabError::argument("qubit index or matrix dimension mismatch"));
        }
        let bit = 1usize << (n - 1 - q);
        let d = 1usize << n;
        let mut out = DMatrix::<C64>::zeros(d, d);
        let mut tmp = DMatrix::<C64>::zeros(d, d);
        for k in &self.ops {
            let k00 = k[(0, 0)];
            let k01 = k[(0, 1)];
            let k10 = k[(1, 0)];
            let k11 = k[(1, 1)];
            // tmp = K_q m
            for i in 0..d {
                let (i0, i1) = (i & !bit, i | bit);
                let (a, b) = if i & bit == 0 { (k00, k01) } else { (k10, k11) };
                for j in 0..d {
                    tmp[(i, j)] = a * m[(i0, j)] + b * m[(i1, j)];
                }
            }
            // out += tmp K_q†
            for j in 0..d {
                let (j0, j1) = (j & !bit, j | bit);
                let (a, b) = if j & bit == 0 { (k00.conj(), k01.conj()) } else { (k10.conj(), k11.conj()) };
                for i in 0..d {
                    out[(i, j)] += tmp[(i, j0)] * a + tmp[(i, j1)] * b;
                }
            }
        }
        Ok(out)
    }

    /// Composition self ∘ other (other acts first).
    pub fn compose(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if self.dim() != other.dim() {
            return Err(EntLabError::argument("composition dimension mismatch"));
        }
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for a in &self.ops {
            for b in &other.ops {
                ops.push(a * b);
            }
        }
        KrausChannel::new(format!("{}∘{}", self.label, other.label), self.param, ops)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wire<'a> {
            label: &'a str,
            param: f64,
            kraus: Vec<MatrixJson>,
        }
        let w = Wire {
            label: &self.label,
            param: self.param,
            kraus: self.ops.iter().map(MatrixJson::from_matrix).collect(),
        };
        serde_json::to_string(&w).unwrap()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Wire {
            label: String,
            param: f64,
            kraus: Vec<MatrixJson>,
        }
        let w: Wire = serde_json::from_str(s)
            .map_err(|e| EntLabError::argument(format!("bad channel JSON: {e}")))?;
        let ops = w.kraus.iter().map(|m| m.to_matrix()).collect::<Result<Vec<_>>>()?;
        KrausChannel::new(w.label, w.param, ops)
    }

    /// If every Kraus operator is proportional to a Pauli, returns the
    /// four probabilities (p_I, p_X, p_Y, p_Z).
    pub fn pauli_probabilities(&self) -> Option<[f64; 4]> {
        if self.dim() != 2 {
            return None;
        }
        let mut probs = [0.0; 4];
        for k in &self.ops {
            let mut matched = false;
            for (i, sigma) in [pauli(0), pauli_x(), pauli_y(), pauli_z()].iter().enumerate() {
                // overlap coefficient: Tr[sigma† K]/2
                let coeff = trace(&(sigma.adjoint() * k)) / c(2.0);
                let resid = (k - sigma * coeff).norm();
                if resid < 1e-12 && coeff.norm() > 0.0 {
                    probs[i] += coeff.norm_sqr();
                    matched = true;
                    break;
                }
            }
            if !matched {
                return None;
            }
        }
        Some(probs)
    }
}

/// Catalog of named single-qubit channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Depolarizing,
    PhaseDamping,
    PhaseFlip,
    BitFlip,
    BitPhaseFlip,
    AmplitudeDamping,
    GeneralizedAmplitudeDamping,
    /// The infinite-temperature diffusive limit of GAD, as a Pauli channel.
    DiffusiveGad,
}

impl ChannelKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "d" | "depolarizing" => Ok(ChannelKind::Depolarizing),
            "pd" | "dephasing" | "phase-damping" => Ok(ChannelKind::PhaseDamping),
            "pf" | "phase-flip" => Ok(ChannelKind::PhaseFlip),
            "bf" | "bit-flip" => Ok(ChannelKind::BitFlip),
            "bpf" | "bit-phase-flip" => Ok(ChannelKind::BitPhaseFlip),
            "ad" | "amplitude-damping" => Ok(ChannelKind::AmplitudeDamping),
            "gad" => Ok(ChannelKind::GeneralizedAmplitudeDamping),
            "gad-diff" | "diffusive" => Ok(ChannelKind::DiffusiveGad),
            other => Err(EntLabError::argument(format!("unknown channel '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Depolarizing => "D",
            ChannelKind::PhaseDamping => "PD",
            ChannelKind::PhaseFlip => "PF",
            ChannelKind::BitFlip => "BF",
            ChannelKind::BitPhaseFlip => "BPF",
            ChannelKind::AmplitudeDamping => "AD",
            ChannelKind::GeneralizedAmplitudeDamping => "GAD",
            ChannelKind::DiffusiveGad => "GAD-DIFF",
        }
    }

    /// Noise strength as a function of time under the fixed rate maps:
    /// D/PD/flips use p = 1 − e^{−ξt}; AD uses p = 1 − e^{−γt};
    /// GAD uses p = 1 − e^{−γ(2n̄+1)t}, the population-relaxation exponent of
    /// the thermal bath with jump rates γ(n̄+1) and γn̄ (this reduces to the
    /// AD map at n̄ = 0 and makes each family a semigroup in t).
    pub fn strength_from_time(&self, t: f64, rate: f64, nbar: f64) -> f64 {
        match self {
            ChannelKind::GeneralizedAmplitudeDamping | ChannelKind::DiffusiveGad => {
                1.0 - (-rate * (2.0 * nbar + 1.0) * t).exp()
            }
            _ => 1.0 - (-rate * t).exp(),
        }
    }
}

/// Builds a catalog channel at strength p. `extra` carries n̄ for GAD and is
/// ignored elsewhere.
pub fn catalog(kind: ChannelKind, p: f64, extra: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EntLabError::argument(format!("p = {p} outside [0,1]")));
    }
    let id = DMatrix::<C64>::identity(2, 2);
    let ops = match kind {
        // rho -> (1-p) rho + p I/2
        ChannelKind::Depolarizing => vec![
            &id * c((1.0 - 3.0 * p / 4.0).sqrt()),
            pauli_x() * c((p / 4.0).sqrt()),
            pauli_y() * c((p / 4.0).sqrt()),
            pauli_z() * c((p / 4.0).sqrt()),
        ],
        ChannelKind::PhaseDamping => vec![
            &id * c((1.0 - p / 2.0).sqrt()),
            pauli_z() * c((p / 2.0).sqrt()),
        ],
        ChannelKind::PhaseFlip => vec![&id * c((1.0 - p).sqrt()), pauli_z() * c(p.sqrt())],
        ChannelKind::BitFlip => vec![&id * c((1.0 - p).sqrt()), pauli_x() * c(p.sqrt())],
        ChannelKind::BitPhaseFlip => vec![&id * c((1.0 - p).sqrt()), pauli_y() * c(p.sqrt())],
        ChannelKind::AmplitudeDamping => vec![
            DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - p).sqrt())]),
            DMatrix::from_row_slice(2, 2, &[c(0.0), c(p.sqrt()), c(0.0), c(0.0)]),
        ],
        ChannelKind::GeneralizedAmplitudeDamping => {
            let nbar = extra;
            if nbar < 0.0 {
                return Err(EntLabError::argument("nbar must be nonnegative"));
            }
            let w_dn = (nbar + 1.0) / (2.0 * nbar + 1.0);
            let w_up = nbar / (2.0 * nbar + 1.0);
            vec![
                DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - p).sqrt())])
                    * c(w_dn.sqrt()),
                DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)])
                    * c((w_dn * p).sqrt()),
                DMatrix::from_row_slice(2, 2, &[c((1.0 - p).sqrt()), c(0.0), c(0.0), c(1.0)])
                    * c(w_up.sqrt()),
                DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)])
                    * c((w_up * p).sqrt()),
            ]
        }
        ChannelKind::DiffusiveGad => {
            // n̄→∞, γ→0, n̄γ = Γ: Pauli probabilities
            // p0 = (1 - p/2 + sqrt(1-p))/2, p1 = p2 = p/4, p3 = (1 - p/2 - sqrt(1-p))/2
            let s = (1.0 - p).sqrt();
            let p0 = 0.5 * (1.0 - p / 2.0 + s);
            let p3 = 0.5 * (1.0 - p / 2.0 - s);
            vec![
                &id * c(p0.sqrt()),
                pauli_x() * c((p / 4.0).sqrt()),
                pauli_y() * c((p / 4.0).sqrt()),
                pauli_z() * c(p3.max(0.0).sqrt()),
            ]
        }
    };
    KrausChannel::new(kind.name(), p, ops)
}

/// Identity channel on `dim` levels.
pub fn identity_channel(dim: usize) -> KrausChannel {
    KrausChannel::new("I", 0.0, vec![DMatrix::identity(dim, dim)]).unwrap()
}

/// Resonant Jaynes–Cummings channel at time t (vacuum field): a textbook
/// non-Markovian counterexample to the composition rule.
pub fn jc_channel(t: f64, omega0: f64) -> KrausChannel {
    let half = 0.5 * omega0 * t;
    let k0 = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(half.cos())]);
    let k1 = DMatrix::from_row_slice(
        2,
        2,
        &[c(0.0), C64::new(0.0, -half.sin()), c(0.0), c(0.0)],
    );
    KrausChannel::new("JC", t, vec![k0, k1]).unwrap()
}

/// Product of single-qubit channels, one per qubit, applied factor by factor.
#[derive(Debug, Clone)]
pub struct IndependentChannel {
    factors: Vec<KrausChannel>,
}

impl IndependentChannel {
    pub fn new(factors: Vec<KrausChannel>) -> Result<Self> {
        if factors.is_empty() {
            return Err(EntLabError::argument("no factors"));
        }
        if factors.iter().any(|f| f.dim() != 2) {
            return Err(EntLabError::argument("factors must be single-qubit channels"));
        }
        Ok(IndependentChannel { factors })
    }

    /// The same channel on every one of n qubits.
    pub fn uniform(chan: KrausChannel, n: usize) -> Result<Self> {
        IndependentChannel::new(vec![chan; n])
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.factors.len()
    }

    pub fn factors(&self) -> &[KrausChannel] {
        &self.factors
    }

    pub fn apply_matrix(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let n = self.factors.len();
        let mut out = m.clone();
        for (q, f) in self.factors.iter().enumerate() {
            out = f.apply_on_qubit(&out, n, q).unwrap();
        }
        out
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(EntLabError::argument("dimension mismatch"));
        }
        Ok(DensityMatrix::new_unchecked(rho.n_qubits(), self.apply_matrix(rho.matrix())))
    }

    /// Materializes the full tensor-product Kraus set. The operator count is
    /// the product of the factor counts; guarded by the dimension cap.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let dim = self.dim();
        if dim > DEFAULT_DIM_CAP {
            return Err(EntLabError::capacity("materialized channel exceeds dimension cap"));
        }
        let count: usize = self.factors.iter().map(|f| f.ops().len()).product();
        if count > dim * dim {
            return Err(EntLabError::capacity(format!(
                "materialized Kraus count {count} exceeds dim^2"
            )));
        }
        let mut ops: Vec<DMatrix<C64>> = vec![DMatrix::identity(1, 1)];
        for f in &self.factors {
            let mut next = Vec::with_capacity(ops.len() * f.ops().len());
            for base in &ops {
                for k in f.ops() {
                    next.push(base.kronecker(k));
                }
            }
            ops = next;
        }
        KrausChannel::new("⊗", self.factors[0].param(), ops)
    }
}

/// Builds the independent channel from a list of single-qubit factors.
pub fn independent(factors: Vec<KrausChannel>) -> Result<IndependentChannel> {
    IndependentChannel::new(factors)
}

/// Any CPTP map this crate can apply to a register.
#[derive(Debug, Clone)]
pub enum ChannelOp {
    Kraus(KrausChannel),
    Independent(IndependentChannel),
    /// Collective depolarization ρ → (1−p)ρ + p I/2^n ("global white noise").
    GlobalWhiteNoise { n_qubits: usize, p: f64 },
}

impl ChannelOp {
    pub fn dim(&self) -> usize {
        match self {
            ChannelOp::Kraus(k) => k.dim(),
            ChannelOp::Independent(i) => i.dim(),
            ChannelOp::GlobalWhiteNoise { n_qubits, .. } => 1 << n_qubits,
        }
    }

    pub fn apply_matrix(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        match self {
            ChannelOp::Kraus(k) => k.apply_matrix(m),
            ChannelOp::Independent(i) => i.apply_matrix(m),
            ChannelOp::GlobalWhiteNoise { n_qubits, p } => {
                let d = 1usize << n_qubits;
                let tr = trace(m);
                m * c(1.0 - p) + DMatrix::identity(d, d) * (tr * c(p / d as f64))
            }
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(EntLabError::argument("dimension mismatch"));
        }
        Ok(DensityMatrix::new_unchecked(rho.n_qubits(), self.apply_matrix(rho.matrix())))
    }
}

/// Choi dual (E ⊗ I)|Φ⁺_d⟩⟨Φ⁺_d| of a square channel on d levels.
///
/// For a qubit channel the result is a two-qubit state whose partial trace
/// over the system side is I/2.
pub fn choi_dual(chan: &KrausChannel) -> Result<DensityMatrix> {
    let d = chan.dim();
    let dim = d * d;
    if !dim.is_power_of_two() || dim > DEFAULT_DIM_CAP {
        return Err(EntLabError::capacity("Choi dual dimension unsupported"));
    }
    let mut phi = DVector::<C64>::zeros(dim);
    let amp = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        phi[j * d + j] = c(amp);
    }
    let proj = &phi * phi.adjoint();
    let id = DMatrix::<C64>::identity(d, d);
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for k in chan.ops() {
        let big = k.kronecker(&id);
        out += &big * &proj * big.adjoint();
    }
    let n_qubits = dim.trailing_zeros() as usize;
    Ok(DensityMatrix::new_unchecked(n_qubits, out))
}

/// For qubit channels, PPT of the Choi dual is necessary and sufficient for
/// the channel to be entanglement breaking.
pub fn is_entanglement_breaking(chan: &KrausChannel) -> Result<bool> {
    if chan.dim() != 2 {
        return Err(EntLabError::unsupported(
            "EB test is exact only for qubit channels (PPT of the dual is merely necessary above d = 2)",
        ));
    }
    let dual = choi_dual(chan)?;
    let pt = crate::qstate::partial_transpose(&dual, &[1])?;
    let min_eig = crate::qstate::eigvalsh(&pt).last().copied().unwrap();
    Ok(min_eig >= -1e-9)
}

/// Sup-norm difference between E(t₁+t₂) and E(t₂)∘E(t₁) over the matrix-unit
/// operator basis. Zero (to rounding) exactly for Markovian families.
pub fn markov_composition_check<F>(family: F, t1: f64, t2: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<KrausChannel>,
{
    let e1 = family(t1)?;
    let e2 = family(t2)?;
    let e12 = family(t1 + t2)?;
    let d = e1.dim();
    if e2.dim() != d || e12.dim() != d {
        return Err(EntLabError::argument("family changes dimension"));
    }
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let mut basis = DMatrix::<C64>::zeros(d, d);
            basis[(a, b)] = c(1.0);
            let direct = e12.apply_matrix(&basis);
            let composed = e2.apply_matrix(&e1.apply_matrix(&basis));
            let diff = (&direct - &composed).iter().map(|z| z.norm()).fold(0.0, f64::max);
            worst = worst.max(diff);
        }
    }
    Ok(worst)
}

/// Conditions on the no-jump Kraus branch K₀: returns K₀ρK₀†/Tr and the
/// success probability Tr[K₀ρK₀†].
pub fn condition_no_jump(chan: &KrausChannel, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    if chan.dim() != rho.dim() {
        return Err(EntLabError::argument("dimension mismatch"));
    }
    let k0 = &chan.ops()[0];
    let cond = k0 * rho.matrix() * k0.adjoint();
    let p = trace(&cond).re;
    if p < 1e-12 {
        return Err(EntLabError::Degenerate(format!(
            "no-jump branch has vanishing probability {p:.3e}"
        )));
    }
    let out = cond / c(p);
    Ok((DensityMatrix::new_unchecked(rho.n_qubits(), out), p))
}

/// Lindblad generator: Hamiltonian plus weighted jump operators.
#[derive(Debug, Clone)]
pub struct LindbladSpec {
    hamiltonian: DMatrix<C64>,
    jumps: Vec<(f64, DMatrix<C64>)>,
}

impl LindbladSpec {
    pub fn new(hamiltonian: DMatrix<C64>, jumps: Vec<(f64, DMatrix<C64>)>) -> Result<Self> {
        let d = hamiltonian.nrows();
        if hamiltonian.ncols() != d {
            return Err(EntLabError::argument("Hamiltonian must be square"));
        }
        if (&hamiltonian - hamiltonian.adjoint()).iter().any(|z| z.norm() > 1e-10) {
            return Err(EntLabError::argument("Hamiltonian not Hermitian within 1e-10"));
        }
        for (rate, op) in &jumps {
            if *rate <= 0.0 {
                return Err(EntLabError::argument("jump rates must be strictly positive"));
            }
            if op.nrows() != d || op.ncols() != d {
                return Err(EntLabError::argument("jump operator dimension mismatch"));
            }
        }
        Ok(LindbladSpec { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn max_rate(&self) -> f64 {
        self.jumps.iter().map(|(r, _)| *r).fold(0.0, f64::max)
    }

    /// Suggested fixed step: min(1e-3/γ_max, t/100).
    pub fn default_dt(&self, t: f64) -> f64 {
        let g = self.max_rate();
        let a = if g > 0.0 { 1e-3 / g } else { f64::INFINITY };
        a.min(t / 100.0).max(1e-12)
    }

    fn rhs(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let i = C64::new(0.0, 1.0);
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * (-i);
        for (rate, l) in &self.jumps {
            let ldag = l.adjoint();
            let ldl = &ldag * l;
            out += (l * rho * &ldag - (&ldl * rho + rho * &ldl) * c(0.5)) * c(*rate);
        }
        out
    }
}

/// Fixed-step fourth-order integration of the Lindblad master equation.
///
/// Fails when the trace drifts by more than 1e-5 (step too large).
pub fn lindblad_evolve(
    spec: &LindbladSpec,
    rho0: &DensityMatrix,
    t: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    if dt <= 0.0 || t < 0.0 {
        return Err(EntLabError::argument("need dt > 0 and t >= 0"));
    }
    if spec.dim() != rho0.dim() {
        return Err(EntLabError::argument("dimension mismatch"));
    }
    let steps = (t / dt).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut rho = rho0.matrix().clone();
    for _ in 0..steps {
        let k1 = spec.rhs(&rho);
        let k2 = spec.rhs(&(&rho + &k1 * c(h / 2.0)));
        let k3 = spec.rhs(&(&rho + &k2 * c(h / 2.0)));
        let k4 = spec.rhs(&(&rho + &k3 * c(h)));
        rho += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
        let drift = (trace(&rho).re - 1.0).abs();
        if drift > 1e-5 {
            return Err(EntLabError::Convergence {
                reason: "trace drift exceeds 1e-5; reduce the step".into(),
                residual: drift,
            });
        }
    }
    let drift = (trace(&rho).re - 1.0).abs();
    if drift > 1e-7 {
        return Err(EntLabError::Convergence { reason: "trace not preserved within 1e-7".into(), residual: drift });
    }
    let min_eig = crate::qstate::eigvalsh(&rho).last().copied().unwrap_or(0.0);
    if min_eig < -1e-6 {
        return Err(EntLabError::Convergence {
            reason: "positivity lost beyond -1e-6".into(),
            residual: -min_eig,
        });
    }
    Ok(DensityMatrix::new_unchecked(rho0.n_qubits(), rho))
}

/// Probability distribution over N-qubit Pauli strings (0=I,1=X,2=Y,3=Z).
#[derive(Debug, Clone)]
pub enum PauliChannelSpec {
    /// Explicit list of (string, probability) pairs.
    General { n_qubits: usize, probs: Vec<(Vec<u8>, f64)> },
    /// Product distribution: one (p_I, p_X, p_Y, p_Z) per qubit.
    Independent { qubit_probs: Vec<[f64; 4]> },
}

impl PauliChannelSpec {
    pub fn general(n_qubits: usize, probs: Vec<(Vec<u8>, f64)>) -> Result<Self> {
        let mut total = 0.0;
        for (s, p) in &probs {
            if s.len() != n_qubits || s.iter().any(|&x| x > 3) {
                return Err(EntLabError::argument("bad Pauli string"));
            }
            if *p < -1e-12 {
                return Err(EntLabError::argument("negative probability"));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(EntLabError::argument(format!("probabilities sum to {total}, not 1")));
        }
        Ok(PauliChannelSpec::General { n_qubits, probs })
    }

    pub fn independent(qubit_probs: Vec<[f64; 4]>) -> Result<Self> {
        for qp in &qubit_probs {
            let total: f64 = qp.iter().sum();
            if (total - 1.0).abs() > 1e-10 || qp.iter().any(|&x| x < -1e-12) {
                return Err(EntLabError::argument("per-qubit probabilities must be a distribution"));
            }
        }
        Ok(PauliChannelSpec::Independent { qubit_probs })
    }

    /// Uniform independent spec from a single-qubit Pauli channel.
    pub fn from_channel(chan: &KrausChannel, n: usize) -> Result<Self> {
        let probs = chan
            .pauli_probabilities()
            .ok_or_else(|| EntLabError::unsupported(format!("channel {} is not Pauli", chan.label())))?;
        PauliChannelSpec::independent(vec![probs; n])
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            PauliChannelSpec::General { n_qubits, .. } => *n_qubits,
            PauliChannelSpec::Independent { qubit_probs } => qubit_probs.len(),
        }
    }

    /// Dense application to a register (exponential in n; for oracles).
    pub fn apply_matrix(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let n = self.n_qubits();
        match self {
            PauliChannelSpec::Independent { qubit_probs } => {
                let mut out = m.clone();
                for (q, qp) in qubit_probs.iter().enumerate() {
                    let ops = vec![
                        pauli(0) * c(qp[0].sqrt()),
                        pauli_x() * c(qp[1].sqrt()),
                        pauli_y() * c(qp[2].sqrt()),
                        pauli_z() * c(qp[3].sqrt()),
                    ];
                    let chan = KrausChannel::new("pauli", 0.0, ops).unwrap();
                    out = chan.apply_on_qubit(&out, n, q).unwrap();
                }
                out
            }
            PauliChannelSpec::General { probs, .. } => {
                let mut out = DMatrix::<C64>::zeros(m.nrows(), m.ncols());
                for (s, p) in probs {
                    if *p <= 0.0 {
                        continue;
                    }
                    let mut op = DMatrix::<C64>::identity(1, 1);
                    for &letter in s {
                        op = op.kronecker(&pauli(letter as usize));
                    }
                    out += &op * m * op.adjoint() * c(*p);
                }
                out
            }
        }
    }
}

/// Dilation of a single-qubit channel applied to every qubit: the joint
/// system+environment pure state, one environment register (⌈log₂ m⌉ qubits
/// for m Kraus operators) per system qubit. System qubits come first.
pub fn purified_independent(psi: &PureState, chan: &KrausChannel) -> Result<PureState> {
    if chan.dim() != 2 {
        return Err(EntLabError::argument("purification requires a single-qubit channel"));
    }
    let m = chan.ops().len();
    let env_bits = (usize::BITS - (m - 1).leading_zeros()) as usize; // ceil(log2 m), 0 for m=1
    let n = psi.n_qubits();
    let total = n + n * env_bits;
    if 1usize << total > DEFAULT_DIM_CAP {
        return Err(EntLabError::capacity("purified register exceeds the dimension cap"));
    }
    // start with |psi> ⊗ |0...0>_env
    let d_env = 1usize << (n * env_bits);
    let mut v = DVector::<C64>::zeros(1 << total);
    for (i, amp) in psi.amplitudes().iter().enumerate() {
        v[i * d_env] = *amp;
    }
    // per system qubit q: |s>_q |0>_{env q} -> sum_mu (K_mu |s>)_q |mu>_{env q}
    for q in 0..n {
        let mut next = DVector::<C64>::zeros(1 << total);
        let sys_bit = 1usize << (total - 1 - q);
        let env_shift = total - 1 - (n + (q + 1) * env_bits - 1); // LSB of env block q
        for idx in 0..1usize << total {
            let a = v[idx];
            if a.norm() < 1e-300 {
                continue;
            }
            let s = usize::from(idx & sys_bit != 0);
            for (mu, k) in chan.ops().iter().enumerate() {
                for s2 in 0..2usize {
                    let coeff = k[(s2, s)];
                    if coeff.norm() == 0.0 {
                        continue;
                    }
                    let mut j = idx & !sys_bit;
                    if s2 == 1 {
                        j |= sys_bit;
                    }
                    j |= mu << env_shift;
                    next[j] += a * coeff;
                }
            }
        }
        v = next;
    }
    PureState::new(total, v)
}
