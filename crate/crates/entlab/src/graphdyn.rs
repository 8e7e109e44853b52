//! Graph-state decoherence machinery: Pauli-map substitution onto the
//! graph basis, exact boundary-reduced entanglement, traced lower bounds,
//! the thermal-dephasing equivalence, and a Z-measurement pair-distillation
//! bound.
//!
//! Throughout, a graph-basis index μ is a bitstring with qubit 0 in the most
//! significant position, matching the register convention.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::channels::PauliChannelSpec;
use crate::criteria::{CriterionVerdict, DETECTION_TOL};
use crate::error::{EntLabError, Result};
use crate::measures;
use crate::qstate::{self, DensityMatrix};
use crate::states::{graph_state, Graph};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Mixture of graph-basis states Σ_μ p_μ |G_μ⟩⟨G_μ|.
#[derive(Debug, Clone)]
pub struct GraphDiagonalState {
    pub graph: Graph,
    pub probs: Vec<f64>,
}

impl GraphDiagonalState {
    pub fn new(graph: Graph, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1 << graph.n {
            return Err(EntLabError::argument("probability vector length must be 2^n"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 || probs.iter().any(|&p| p < -1e-12) {
            return Err(EntLabError::argument("probabilities must be a distribution"));
        }
        Ok(GraphDiagonalState { graph, probs })
    }

    /// The pure graph state |G₀⟩.
    pub fn pure(graph: Graph) -> Self {
        let mut probs = vec![0.0; 1 << graph.n];
        probs[0] = 1.0;
        GraphDiagonalState { graph, probs }
    }

    /// Dense matrix: ρ_{ij} = ψ_i ψ_j (Wp)(i⊕j) with ψ the graph-state
    /// amplitudes and Wp the Walsh–Hadamard transform of the probabilities.
    pub fn to_density(&self) -> DensityMatrix {
        let n = self.graph.n;
        let d = 1usize << n;
        let psi = graph_state(&self.graph);
        let w = walsh_hadamard(&self.probs);
        let mut m = DMatrix::<C64>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = psi.amplitudes()[i] * psi.amplitudes()[j].conj() * c(w[i ^ j]);
            }
        }
        DensityMatrix::new_unchecked(n, m)
    }
}

fn walsh_hadamard(p: &[f64]) -> Vec<f64> {
    let mut v = p.to_vec();
    let n = v.len();
    let mut h = 1usize;
    while h < n {
        let mut i = 0;
        while i < n {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
            i += 2 * h;
        }
        h *= 2;
    }
    v
}

/// The Z-pattern a single-qubit Pauli letter imprints on the graph basis:
/// X_i flips the neighbours of i, Y_i flips i and its neighbours,
/// Z_i flips i, the identity flips nothing.
fn letter_pattern(g: &Graph, qubit: usize, letter: usize) -> usize {
    let n = g.n;
    let ei = 1usize << (n - 1 - qubit);
    let mut nbr = 0usize;
    for j in g.neighbours(qubit) {
        nbr |= 1 << (n - 1 - j);
    }
    match letter {
        0 => 0,
        1 => nbr,
        2 => ei | nbr,
        3 => ei,
        _ => unreachable!(),
    }
}

/// Pushes a Pauli channel through the graph structure: the output is again
/// graph-diagonal, with probabilities obtained by XOR-accumulating the
/// per-letter Z-patterns.
pub fn pauli_to_graph_diagonal(
    g: &Graph,
    spec: &PauliChannelSpec,
    input: &GraphDiagonalState,
) -> Result<GraphDiagonalState> {
    if spec.n_qubits() != g.n || input.graph.n != g.n {
        return Err(EntLabError::argument("qubit count mismatch"));
    }
    let n = g.n;
    let size = 1usize << n;
    let mut probs = input.probs.clone();
    match spec {
        PauliChannelSpec::Independent { qubit_probs } => {
            for (q, qp) in qubit_probs.iter().enumerate() {
                let patterns: Vec<usize> = (0..4).map(|l| letter_pattern(g, q, l)).collect();
                let mut next = vec![0.0; size];
                for (mu, &p) in probs.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    for l in 0..4 {
                        if qp[l] > 0.0 {
                            next[mu ^ patterns[l]] += p * qp[l];
                        }
                    }
                }
                probs = next;
            }
        }
        PauliChannelSpec::General { probs: strings, .. } => {
            let mut next = vec![0.0; size];
            for (s, ps) in strings {
                if *ps <= 0.0 {
                    continue;
                }
                let mut pattern = 0usize;
                for (q, &letter) in s.iter().enumerate() {
                    pattern ^= letter_pattern(g, q, letter as usize);
                }
                for (mu, &p) in probs.iter().enumerate() {
                    next[mu ^ pattern] += p * ps;
                }
            }
            probs = next;
        }
    }
    GraphDiagonalState::new(g.clone(), probs)
}

/// Boundary data of a cut: the boundary vertices, the crossing edges, and
/// the joint distribution over (boundary pattern γ, non-boundary pattern δ).
#[derive(Debug, Clone)]
pub struct BoundaryDecomposition {
    pub boundary: Vec<usize>,
    pub crossing_edges: Vec<(usize, usize)>,
    /// probs[δ * 2^{|boundary|} + γ]
    pub joint: Vec<f64>,
}

fn split_boundary(g: &Graph, block: &[usize]) -> (Vec<usize>, Vec<(usize, usize)>) {
    let in_block = |q: usize| block.contains(&q);
    let mut boundary = std::collections::BTreeSet::new();
    let mut crossing = Vec::new();
    for &(a, b) in &g.edges {
        if in_block(a) != in_block(b) {
            crossing.push((a, b));
            boundary.insert(a);
            boundary.insert(b);
        }
    }
    (boundary.into_iter().collect(), crossing)
}

/// The boundary graph as a standalone graph on relabeled vertices
/// 0..|boundary|−1 (ascending original order).
fn boundary_graph(boundary: &[usize], crossing: &[(usize, usize)]) -> Graph {
    let local = |q: usize| boundary.iter().position(|&b| b == q).unwrap();
    Graph {
        n: boundary.len(),
        edges: crossing.iter().map(|&(a, b)| (local(a), local(b))).collect(),
    }
}

/// Splits a full pattern μ into (γ over boundary qubits, δ over the rest).
fn project_pattern(n: usize, mu: usize, boundary: &[usize]) -> (usize, usize) {
    let mut gamma = 0usize;
    let mut delta = 0usize;
    let rest: Vec<usize> = (0..n).filter(|q| !boundary.contains(q)).collect();
    for (pos, &q) in boundary.iter().enumerate() {
        if mu >> (n - 1 - q) & 1 == 1 {
            gamma |= 1 << (boundary.len() - 1 - pos);
        }
    }
    for (pos, &q) in rest.iter().enumerate() {
        if mu >> (n - 1 - q) & 1 == 1 {
            delta |= 1 << (rest.len() - 1 - pos);
        }
    }
    (gamma, delta)
}

pub fn boundary_decomposition(
    g: &Graph,
    spec: &PauliChannelSpec,
    block: &[usize],
) -> Result<BoundaryDecomposition> {
    let evolved = pauli_to_graph_diagonal(g, spec, &GraphDiagonalState::pure(g.clone()))?;
    let (boundary, crossing) = split_boundary(g, block);
    if boundary.is_empty() {
        return Err(EntLabError::argument("cut has no crossing edges"));
    }
    let nb = boundary.len();
    let joint_len = 1usize << g.n;
    let mut joint = vec![0.0; joint_len];
    for (mu, &p) in evolved.probs.iter().enumerate() {
        let (gamma, delta) = project_pattern(g.n, mu, &boundary);
        joint[(delta << nb) | gamma] += p;
    }
    Ok(BoundaryDecomposition { boundary, crossing_edges: crossing, joint })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMeasure {
    Negativity,
    Eof2q,
}

fn measure_boundary_state(
    bg: &Graph,
    probs: &[f64],
    local_block: &[usize],
    measure: BoundaryMeasure,
) -> Result<f64> {
    let state = GraphDiagonalState::new(bg.clone(), probs.to_vec())?.to_density();
    match measure {
        BoundaryMeasure::Negativity => measures::negativity(&state, local_block),
        BoundaryMeasure::Eof2q => {
            if bg.n != 2 {
                return Err(EntLabError::argument("eof_2q needs a two-qubit boundary"));
            }
            measures::eof_2q(&state)
        }
    }
}

/// Exact entanglement of the evolved graph state across the cut, computed as
/// the flag-averaged entanglement of boundary-graph states:
/// Σ_δ p̃_δ E(Σ_γ p̃(γ|δ) |G^∂_γ⟩⟨G^∂_γ|).
pub fn boundary_exact_entanglement(
    g: &Graph,
    spec: &PauliChannelSpec,
    block: &[usize],
    measure: BoundaryMeasure,
) -> Result<f64> {
    let bd = boundary_decomposition(g, spec, block)?;
    let nb = bd.boundary.len();
    let bg = boundary_graph(&bd.boundary, &bd.crossing_edges);
    let local_block: Vec<usize> = bd
        .boundary
        .iter()
        .enumerate()
        .filter(|(_, q)| block.contains(q))
        .map(|(pos, _)| pos)
        .collect();
    let n_delta = 1usize << (g.n - nb);
    let mut total = 0.0;
    for delta in 0..n_delta {
        let slice = &bd.joint[(delta << nb)..((delta + 1) << nb)];
        let p_delta: f64 = slice.iter().sum();
        if p_delta < 1e-15 {
            continue;
        }
        let cond: Vec<f64> = slice.iter().map(|&x| x / p_delta).collect();
        total += p_delta * measure_boundary_state(&bg, &cond, &local_block, measure)?;
    }
    Ok(total)
}

/// Lower bound from tracing the non-boundary qubits out (no flag
/// information). For independent channels the boundary marginal depends only
/// on the boundary and its first neighbours, so the value is bit-identical
/// across system sizes at a fixed boundary.
pub fn traced_lower_bound(
    g: &Graph,
    spec: &PauliChannelSpec,
    block: &[usize],
    measure: BoundaryMeasure,
) -> Result<f64> {
    let (boundary, crossing) = split_boundary(g, block);
    if boundary.is_empty() {
        return Err(EntLabError::argument("cut has no crossing edges"));
    }
    let nb = boundary.len();
    let marginal = match spec {
        PauliChannelSpec::Independent { qubit_probs } => {
            // only qubits in the boundary or adjacent to it can flip a
            // boundary pattern bit
            let mut relevant: Vec<usize> = Vec::new();
            for q in 0..g.n {
                let touches = boundary.contains(&q)
                    || g.neighbours(q).iter().any(|j| boundary.contains(j));
                if touches {
                    relevant.push(q);
                }
            }
            let mut probs = vec![0.0; 1 << nb];
            probs[0] = 1.0;
            for &q in &relevant {
                let qp = qubit_probs[q];
                let mut patterns = [0usize; 4];
                for (l, pat) in patterns.iter_mut().enumerate() {
                    let full = letter_pattern(g, q, l);
                    let mut restricted = 0usize;
                    for (pos, &b) in boundary.iter().enumerate() {
                        if full >> (g.n - 1 - b) & 1 == 1 {
                            restricted |= 1 << (nb - 1 - pos);
                        }
                    }
                    *pat = restricted;
                }
                let mut next = vec![0.0; 1 << nb];
                for (gam, &p) in probs.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    for l in 0..4 {
                        if qp[l] > 0.0 {
                            next[gam ^ patterns[l]] += p * qp[l];
                        }
                    }
                }
                probs = next;
            }
            probs
        }
        PauliChannelSpec::General { .. } => {
            let bd = boundary_decomposition(g, spec, block)?;
            let mut probs = vec![0.0; 1 << nb];
            for (idx, &p) in bd.joint.iter().enumerate() {
                probs[idx & ((1 << nb) - 1)] += p;
            }
            probs
        }
    };
    let bg = boundary_graph(&boundary, &crossing);
    let local_block: Vec<usize> = boundary
        .iter()
        .enumerate()
        .filter(|(_, q)| block.contains(q))
        .map(|(pos, _)| pos)
        .collect();
    measure_boundary_state(&bg, &marginal, &local_block, measure)
}

/// Thermal state e^{−H/T}/Z of the graph Hamiltonian
/// H = −(1/2) Σ Δᵢ Sᵢ. Equals the pure graph state independently dephased
/// with pᵢ = 2/(1 + e^{Δᵢ/T}).
pub fn thermal_graph_state(g: &Graph, couplings: &[f64], temperature: f64) -> Result<DensityMatrix> {
    if couplings.len() != g.n {
        return Err(EntLabError::argument("one coupling per vertex required"));
    }
    if couplings.iter().any(|&d| d <= 0.0) {
        return Err(EntLabError::argument("couplings must be positive"));
    }
    if temperature < 0.0 {
        return Err(EntLabError::argument("temperature must be nonnegative"));
    }
    let state = thermal_graph_diagonal(g, couplings, temperature)?;
    Ok(state.to_density())
}

pub fn thermal_graph_diagonal(
    g: &Graph,
    couplings: &[f64],
    temperature: f64,
) -> Result<GraphDiagonalState> {
    let n = g.n;
    // stabilizer flips are independent: P(mu_i = 1) = 1/(1 + e^{Delta_i/T})
    let flip: Vec<f64> = couplings
        .iter()
        .map(|&d| {
            if temperature == 0.0 {
                0.0
            } else {
                1.0 / (1.0 + (d / temperature).exp())
            }
        })
        .collect();
    let mut probs = vec![0.0; 1 << n];
    for (mu, slot) in probs.iter_mut().enumerate() {
        let mut p = 1.0;
        for (q, &f) in flip.iter().enumerate() {
            p *= if mu >> (n - 1 - q) & 1 == 1 { f } else { 1.0 - f };
        }
        *slot = p;
    }
    GraphDiagonalState::new(g.clone(), probs)
}

/// Z-measures every qubit except {k, j} on the noisy graph state, applies
/// the outcome-dependent Z corrections, and averages the conditional pair
/// states. NPT of the average certifies that a singlet is distillable
/// between k and j.
pub fn pair_distill_bound(
    g: &Graph,
    spec: &PauliChannelSpec,
    pair: (usize, usize),
) -> Result<CriterionVerdict> {
    let n = g.n;
    if n > 8 {
        return Err(EntLabError::capacity("pair distillation bound limited to 8 qubits"));
    }
    let (k, j) = pair;
    if k == j || k >= n || j >= n {
        return Err(EntLabError::argument("bad pair"));
    }
    let evolved = pauli_to_graph_diagonal(g, spec, &GraphDiagonalState::pure(g.clone()))?;
    let rho = evolved.to_density();
    let m = rho.matrix();
    let others: Vec<usize> = (0..n).filter(|&q| q != k && q != j).collect();
    let (first, second) = (k.min(j), k.max(j));
    let bit_k = 1usize << (n - 1 - first);
    let bit_j = 1usize << (n - 1 - second);
    let mut avg = DMatrix::<C64>::zeros(4, 4);
    for outcome in 0..1usize << others.len() {
        // measured index bits
        let mut base = 0usize;
        for (pos, &q) in others.iter().enumerate() {
            if outcome >> (others.len() - 1 - pos) & 1 == 1 {
                base |= 1 << (n - 1 - q);
            }
        }
        // Z corrections on the kept pair: parity of measured-1 neighbours
        let parity = |target: usize| -> bool {
            let mut acc = false;
            for (pos, &q) in others.iter().enumerate() {
                if outcome >> (others.len() - 1 - pos) & 1 == 1 && g.neighbours(q).contains(&target) {
                    acc = !acc;
                }
            }
            acc
        };
        let zk = parity(first);
        let zj = parity(second);
        let sign = |idx2: usize| -> f64 {
            let mut s = 1.0;
            if zk && idx2 & 0b10 != 0 {
                s = -s;
            }
            if zj && idx2 & 0b01 != 0 {
                s = -s;
            }
            s
        };
        for a in 0..4usize {
            for b in 0..4usize {
                let ia = base | if a & 0b10 != 0 { bit_k } else { 0 } | if a & 0b01 != 0 { bit_j } else { 0 };
                let ib = base | if b & 0b10 != 0 { bit_k } else { 0 } | if b & 0b01 != 0 { bit_j } else { 0 };
                avg[(a, b)] += m[(ia, ib)] * c(sign(a) * sign(b));
            }
        }
    }
    let tr = qstate::trace(&avg).re;
    let avg = avg / c(tr);
    let pair_state = DensityMatrix::new_unchecked(2, avg);
    let pt = qstate::partial_transpose(&pair_state, &[0])?;
    let min_eig = qstate::eigvalsh(&pt).last().copied().unwrap();
    let margin = -min_eig;
    let name = format!("pair-distill[{first},{second}]");
    Ok(if margin > DETECTION_TOL {
        CriterionVerdict { name, outcome: crate::criteria::Outcome::Detected, margin }
    } else {
        CriterionVerdict { name, outcome: crate::criteria::Outcome::NotDetected, margin }
    })
}

/// Dense-matrix oracle for the boundary formula: evolves the full state,
/// strips the non-crossing CZ gates, projects the non-boundary qubits onto
/// the |±⟩ product basis, and averages the measure over outcomes.
pub fn boundary_measure_dense_oracle(
    g: &Graph,
    spec: &PauliChannelSpec,
    block: &[usize],
    measure: BoundaryMeasure,
) -> Result<f64> {
    let n = g.n;
    let psi = graph_state(g).density();
    let mut m = spec.apply_matrix(psi.matrix());
    let (boundary, crossing) = split_boundary(g, block);
    let nb = boundary.len();
    // conjugate away the non-crossing CZ gates (diagonal sign flips)
    for &(a, b) in &g.edges {
        if crossing.contains(&(a, b)) {
            continue;
        }
        let (ba, bb) = (1usize << (n - 1 - a), 1usize << (n - 1 - b));
        for i in 0..1usize << n {
            for jj in 0..1usize << n {
                let si = i & ba != 0 && i & bb != 0;
                let sj = jj & ba != 0 && jj & bb != 0;
                if si != sj {
                    m[(i, jj)] = -m[(i, jj)];
                }
            }
        }
    }
    let rest: Vec<usize> = (0..n).filter(|q| !boundary.contains(q)).collect();
    let local_block: Vec<usize> = boundary
        .iter()
        .enumerate()
        .filter(|(_, q)| block.contains(q))
        .map(|(pos, _)| pos)
        .collect();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut total = 0.0;
    for delta in 0..1usize << rest.len() {
        // phi_delta amplitude on a rest-index r: prod (+-1)/sqrt2, sign when
        // both the outcome bit and the index bit are 1
        let phi = |r: usize| -> f64 {
            let mut amp = 1.0;
            for pos in 0..rest.len() {
                let minus = delta >> (rest.len() - 1 - pos) & 1 == 1;
                let bit = r >> (rest.len() - 1 - pos) & 1 == 1;
                amp *= if minus && bit { -s } else { s };
            }
            amp
        };
        let compose = |bnd: usize, r: usize| -> usize {
            let mut full = 0usize;
            for (pos, &q) in boundary.iter().enumerate() {
                if bnd >> (nb - 1 - pos) & 1 == 1 {
                    full |= 1 << (n - 1 - q);
                }
            }
            for (pos, &q) in rest.iter().enumerate() {
                if r >> (rest.len() - 1 - pos) & 1 == 1 {
                    full |= 1 << (n - 1 - q);
                }
            }
            full
        };
        let mut cond = DMatrix::<C64>::zeros(1 << nb, 1 << nb);
        for a in 0..1usize << nb {
            for b in 0..1usize << nb {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..1usize << rest.len() {
                    for t in 0..1usize << rest.len() {
                        acc += m[(compose(a, r), compose(b, t))] * c(phi(r) * phi(t));
                    }
                }
                cond[(a, b)] = acc;
            }
        }
        let p_delta = qstate::trace(&cond).re;
        if p_delta < 1e-15 {
            continue;
        }
        let cond = cond / c(p_delta);
        let state = DensityMatrix::new_unchecked(nb, cond);
        let value = match measure {
            BoundaryMeasure::Negativity => measures::negativity(&state, &local_block)?,
            BoundaryMeasure::Eof2q => measures::eof_2q(&state)?,
        };
        total += p_delta * value;
    }
    Ok(total)
}
