//! Entanglement quantifiers with closed forms: concurrence (two-qubit,
//! pure-bipartite, multipartite), entanglement of formation, negativity,
//! the two-copy symmetric-subspace probability, and the isotropic-state
//! concurrence.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{EntLabError, Result};
use crate::qstate::{self, DensityMatrix, PureState};
use crate::states::pauli_y;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Value of a measure together with what was measured and where.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureResult {
    pub value: f64,
    pub measure_name: String,
    pub partition: String,
}

impl MeasureResult {
    pub fn new(value: f64, measure_name: impl Into<String>, partition: impl Into<String>) -> Self {
        MeasureResult {
            value: value.max(0.0),
            measure_name: measure_name.into(),
            partition: partition.into(),
        }
    }
}

/// Wootters concurrence of a two-qubit state.
///
/// The square-rooted eigenvalues ξᵢ of ρρ̃ are computed from the similar
/// Hermitian form √ρ ρ̃ √ρ so they come out real and nonnegative.
pub fn concurrence_2q(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(EntLabError::argument("concurrence_2q requires a 4x4 state"));
    }
    let yy = pauli_y().kronecker(&pauli_y());
    let conj = rho.matrix().map(|z| z.conj());
    let rho_tilde = &yy * conj * &yy;
    // sqrt(rho) via eigendecomposition
    let (vals, vecs) = qstate::eigh(rho.matrix());
    let sqrt_diag = DMatrix::from_diagonal(&DVector::from_iterator(
        4,
        vals.iter().map(|&l| c(l.max(0.0).sqrt())),
    ));
    let sqrt_rho = &vecs * sqrt_diag * vecs.adjoint();
    let m = &sqrt_rho * rho_tilde * &sqrt_rho;
    let eigs = qstate::eigvalsh(&m);
    if eigs.iter().any(|&l| l < -1e-10) {
        return Err(EntLabError::argument("state produced negative spectrum beyond tolerance"));
    }
    // eigenvalues of M carry absolute noise ~ eps * lambda_max; square roots
    // amplify it, so anything below the noise floor counts as zero
    let cutoff = eigs[0].max(0.0) * 1e-14;
    let mut xis: Vec<f64> = eigs.iter().map(|&l| if l > cutoff { l.sqrt() } else { 0.0 }).collect();
    xis.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((xis[0] - xis[1] - xis[2] - xis[3]).max(0.0))
}

/// Dyadic Shannon entropy H₂ (base-2 logarithm).
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Entanglement of formation of a two-qubit state (bits),
/// H₂((1 + √(1 − C²))/2).
pub fn eof_2q(rho: &DensityMatrix) -> Result<f64> {
    let conc = concurrence_2q(rho)?;
    Ok(eof_from_concurrence(conc))
}

pub fn eof_from_concurrence(conc: f64) -> f64 {
    let x = 0.5 * (1.0 + (1.0 - conc * conc).max(0.0).sqrt());
    binary_entropy(x)
}

/// Bipartite concurrence of a pure state across the given block:
/// √(2 S_L(ρ_block)). Rejects mixed input (purity below 1 − 1e-8).
pub fn concurrence_pure_bipartite(psi: &PureState, block: &[usize]) -> Result<f64> {
    let rho = psi.density();
    concurrence_pure_bipartite_of_density(&rho, block)
}

pub(crate) fn concurrence_pure_bipartite_of_density(
    rho: &DensityMatrix,
    block: &[usize],
) -> Result<f64> {
    if rho.purity() < 1.0 - 1e-8 {
        return Err(EntLabError::argument("input is mixed; pure-state concurrence undefined"));
    }
    let red = qstate::partial_trace(rho, block)?;
    let sl = 1.0 - red.purity();
    Ok((2.0 * sl.max(0.0)).sqrt())
}

/// Multipartite concurrence of a pure N-qubit state:
/// 2^{1−N/2} √((2^N − 2) − Σ_I Tr ρ_{R_I}²) over all 2^N − 2 proper subsets.
pub fn concurrence_multipartite(psi: &PureState) -> Result<f64> {
    let n = psi.n_qubits();
    if n < 2 {
        return Err(EntLabError::argument("need at least two qubits"));
    }
    if n > 12 {
        return Err(EntLabError::capacity("2^N - 2 subset traces above N = 12"));
    }
    let rho = psi.density();
    let mut purity_sum = 0.0;
    for mask in 1..(1usize << n) - 1 {
        let keep: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
        let red = qstate::partial_trace(&rho, &keep)?;
        purity_sum += red.purity();
    }
    let count = (1usize << n) - 2;
    let radicand = (count as f64 - purity_sum).max(0.0);
    Ok(2f64.powf(1.0 - n as f64 / 2.0) * radicand.sqrt())
}

/// Probability p₊ of finding every subsystem of ψ⊗ψ in the symmetric
/// subspace with its copy. Satisfies C_N = 2√(1 − p₊).
pub fn two_copy_probability(psi: &PureState) -> Result<f64> {
    let n = psi.n_qubits();
    if n > 6 {
        return Err(EntLabError::capacity("two-copy register dimension 4^N above N = 6"));
    }
    // doubled register: original qubits 0..n-1, copy qubits n..2n-1
    let total = 2 * n;
    let copy = psi.amplitudes().kronecker(psi.amplitudes());
    let mut v = copy;
    // project each pair (q, n+q) onto its symmetric subspace (I + SWAP)/2
    for q in 0..n {
        let b1 = 1usize << (total - 1 - q);
        let b2 = 1usize << (total - 1 - (n + q));
        let mut next = DVector::<C64>::zeros(v.len());
        for idx in 0..v.len() {
            let a = v[idx];
            if a.norm() == 0.0 {
                continue;
            }
            let s1 = idx & b1 != 0;
            let s2 = idx & b2 != 0;
            let swapped = if s1 != s2 { idx ^ b1 ^ b2 } else { idx };
            next[idx] += a * c(0.5);
            next[swapped] += a * c(0.5);
        }
        v = next;
    }
    let p = psi
        .amplitudes()
        .kronecker(psi.amplitudes())
        .dotc(&v)
        .re;
    Ok(p.clamp(0.0, 1.0))
}

/// Negativity (‖ρ^{T_block}‖₁ − 1)/2 = |sum of negative PT eigenvalues|.
pub fn negativity(rho: &DensityMatrix, block: &[usize]) -> Result<f64> {
    let pt = qstate::partial_transpose(rho, block)?;
    Ok(negativity_of_pt_eigs(&qstate::eigvalsh(&pt)))
}

pub(crate) fn negativity_of_pt_eigs(eigs: &[f64]) -> f64 {
    let total: f64 = eigs.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    total.max(0.0)
}

/// Closed-form concurrence of the two-qudit isotropic state:
/// 0 for f ≤ 1/d, (f − 1/d)√(2d/(d−1)) above.
pub fn isotropic_concurrence(d: usize, f: f64) -> Result<f64> {
    if d < 2 {
        return Err(EntLabError::argument("d must be at least 2"));
    }
    if !(0.0..=1.0).contains(&f) {
        return Err(EntLabError::argument("f outside [0,1]"));
    }
    let inv_d = 1.0 / d as f64;
    if f <= inv_d {
        Ok(0.0)
    } else {
        Ok((f - inv_d) * (2.0 * d as f64 / (d as f64 - 1.0)).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{catalog, ChannelKind, IndependentChannel};
    use crate::qstate::tensor;
    use crate::states;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn concurrence_extremes() {
        let bell = states::ghz(2).density();
        assert_abs_diff_eq!(concurrence_2q(&bell).unwrap(), 1.0, epsilon = 1e-10);
        let prod = PureState::basis(2, 0).density();
        assert_abs_diff_eq!(concurrence_2q(&prod).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn concurrence_wrong_dimension() {
        assert!(concurrence_2q(&DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn ad_trajectory_closed_form() {
        // C(p) = max{0, 2 (1-p) |beta| (|alpha| - p |beta|)}
        let (alpha, beta) = (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
        let psi = states::generalized_ghz(2, 0, c(alpha), c(beta), true).unwrap();
        let p = 0.5;
        let ad = catalog(ChannelKind::AmplitudeDamping, p, 0.0).unwrap();
        let out = IndependentChannel::uniform(ad, 2).unwrap().apply(&psi.density()).unwrap();
        let expect = (2.0 * (1.0 - p) * beta * (alpha - p * beta)).max(0.0);
        assert_abs_diff_eq!(concurrence_2q(&out).unwrap(), expect, epsilon = 1e-10);
        assert_abs_diff_eq!(expect, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn eof_values() {
        assert_abs_diff_eq!(eof_from_concurrence(1.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eof_from_concurrence(0.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eof_from_concurrence(0.5), 0.35457890266527003, epsilon = 1e-10);
        let bell = states::ghz(2).density();
        assert_abs_diff_eq!(eof_2q(&bell).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn pure_bipartite_concurrence() {
        let bell = states::ghz(2);
        assert_abs_diff_eq!(concurrence_pure_bipartite(&bell, &[0]).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(concurrence_pure_bipartite(&bell, &[1]).unwrap(), 1.0, epsilon = 1e-10);
        let prod = PureState::basis(2, 2);
        assert_abs_diff_eq!(concurrence_pure_bipartite(&prod, &[0]).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pure_bipartite_rejects_mixed() {
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(concurrence_pure_bipartite_of_density(&mixed, &[0]).is_err());
    }

    #[test]
    fn system_environment_concurrence_formula() {
        // joint AD purification of alpha|00> + beta|11>:
        // C_SR = 2 sqrt(2) |b| sqrt(p(1-p)) sqrt(1 - |b|^2 p(1-p))
        let (alpha, beta) = (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
        let p = 0.5;
        let psi = states::generalized_ghz(2, 0, c(alpha), c(beta), true).unwrap();
        let ad = catalog(ChannelKind::AmplitudeDamping, p, 0.0).unwrap();
        let joint = crate::channels::purified_independent(&psi, &ad).unwrap();
        let got = concurrence_pure_bipartite(&joint, &[0, 1]).unwrap();
        let expect = 2.0
            * 2f64.sqrt()
            * beta
            * (p * (1.0 - p)).sqrt()
            * (1.0 - beta * beta * p * (1.0 - p)).sqrt();
        assert_abs_diff_eq!(got, expect, epsilon = 1e-10);
        assert_abs_diff_eq!(expect, (7.0f64 / 8.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn multipartite_concurrence_reduces_to_two_qubit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let psi = states::haar_random_pure_with(2, &mut rng);
            let c2 = concurrence_2q(&psi.density()).unwrap();
            let cn = concurrence_multipartite(&psi).unwrap();
            assert_abs_diff_eq!(c2, cn, epsilon = 1e-9);
        }
    }

    #[test]
    fn multipartite_concurrence_ghz3_w3() {
        // GHZ3: all six reduced purities are 1/2 -> C = sqrt(3/2)
        let cn = concurrence_multipartite(&states::ghz(3)).unwrap();
        assert_abs_diff_eq!(cn, (1.5f64).sqrt(), epsilon = 1e-10);
        // W3: all six reduced purities are 5/9 -> C = 2/sqrt(3)
        let cn = concurrence_multipartite(&states::w_state(3)).unwrap();
        assert_abs_diff_eq!(cn, 2.0 / 3f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn two_copy_probability_values() {
        let prod = PureState::basis(3, 5);
        assert_abs_diff_eq!(two_copy_probability(&prod).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(two_copy_probability(&states::ghz(2)).unwrap(), 0.75, epsilon = 1e-10);
        assert_abs_diff_eq!(two_copy_probability(&states::ghz(3)).unwrap(), 0.625, epsilon = 1e-10);
    }

    #[test]
    fn two_copy_identity_with_multipartite_concurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=4usize {
            let psi = states::haar_random_pure_with(n, &mut rng);
            let p_plus = two_copy_probability(&psi).unwrap();
            let cn = concurrence_multipartite(&psi).unwrap();
            assert_abs_diff_eq!(2.0 * (1.0 - p_plus).max(0.0).sqrt(), cn, epsilon = 1e-9);
        }
    }

    #[test]
    fn negativity_values() {
        let bell = states::ghz(2).density();
        assert_abs_diff_eq!(negativity(&bell, &[0]).unwrap(), 0.5, epsilon = 1e-10);
        let sep = tensor(&PureState::basis(1, 0).density(), &DensityMatrix::maximally_mixed(1)).unwrap();
        assert_abs_diff_eq!(negativity(&sep, &[0]).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn negativity_complement_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let psi = states::haar_random_pure_with(3, &mut rng);
            let rho = psi.density();
            let a = negativity(&rho, &[0]).unwrap();
            let b = negativity(&rho, &[1, 2]).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn concurrence_is_twice_negativity_on_pure_two_qubit() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let psi = states::haar_random_pure_with(2, &mut rng);
            let rho = psi.density();
            let conc = concurrence_2q(&rho).unwrap();
            let neg = negativity(&rho, &[1]).unwrap();
            assert_abs_diff_eq!(conc, 2.0 * neg, epsilon = 1e-9);
        }
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let psi = states::haar_random_pure_with(2, &mut rng);
        let rho = psi.density();
        let base_c = concurrence_2q(&rho).unwrap();
        let base_n = negativity(&rho, &[0]).unwrap();
        for _ in 0..200 {
            let u = random_local_unitary(&mut rng);
            let m = &u * rho.matrix() * u.adjoint();
            let rotated = DensityMatrix::new_unchecked(2, m);
            assert!((concurrence_2q(&rotated).unwrap() - base_c).abs() < 1e-8);
            assert!((negativity(&rotated, &[0]).unwrap() - base_n).abs() < 1e-8);
        }
    }

    fn random_local_unitary(rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        random_su2(rng).kronecker(&random_su2(rng))
    }

    fn random_su2(rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        use rand::Rng;
        let t: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let a: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let b: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let ct = (t / 2.0).cos();
        let st = (t / 2.0).sin();
        DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::from_polar(ct, a),
                C64::from_polar(st, b),
                C64::from_polar(-st, -b),
                C64::from_polar(ct, -a),
            ],
        )
    }

    #[test]
    fn negativity_monotone_under_separable_kraus() {
        // explicit one-sided separable maps on 2 qubits: never increase negativity
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..20 {
            let psi = states::haar_random_pure_with(2, &mut rng);
            let rho = psi.density();
            let before = negativity(&rho, &[0]).unwrap();
            use rand::Rng;
            let p: f64 = rng.random();
            let chan = catalog(ChannelKind::Depolarizing, p, 0.0).unwrap();
            let after_m = chan.apply_on_qubit(rho.matrix(), 2, 1).unwrap();
            let after = negativity(&DensityMatrix::new_unchecked(2, after_m), &[0]).unwrap();
            assert!(after <= before + 1e-10);
        }
    }

    #[test]
    fn isotropic_concurrence_closed_form() {
        assert_abs_diff_eq!(isotropic_concurrence(2, 0.5).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(isotropic_concurrence(3, 1.0 / 3.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(isotropic_concurrence(2, 1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            isotropic_concurrence(3, 1.0).unwrap(),
            2.0 / 3.0 * 3f64.sqrt(),
            epsilon = 1e-10
        );
        // must match the two-qubit concurrence on assembled isotropic states
        for f in [0.3, 0.6, 0.9] {
            let iso = states::isotropic_2q(f).unwrap();
            assert_abs_diff_eq!(
                concurrence_2q(&iso).unwrap(),
                isotropic_concurrence(2, f).unwrap(),
                epsilon = 1e-10
            );
        }
    }
}
