//! Sweep engine, root finders for disentanglement and biseparability
//! thresholds, closed-form time laws, bound-entanglement window detection,
//! the concurrence equation-of-motion checks, universal decay bounds, and
//! Haar-concentration statistics.


use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{
    catalog, choi_dual, ChannelKind, ChannelOp, IndependentChannel, KrausChannel,
};
use crate::criteria;
use crate::error::{EntLabError, Result};
use crate::measures;
use crate::qstate::{self, DensityMatrix};
use crate::states;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Decision threshold below which an entanglement value counts as zero.
pub const ZERO_ENT_TOL: f64 = 1e-9;
/// Bisection tolerance in the noise strength p.
pub const BISECTION_TOL: f64 = 1e-6;

/// Evenly spaced grid in [start, stop].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) || start >= stop {
            return Err(EntLabError::argument("grid must be strictly increasing within [0,1]"));
        }
        if points < 2 {
            return Err(EntLabError::argument("grid needs at least 2 points"));
        }
        Ok(GridSpec { start, stop, points })
    }

    pub fn values(&self) -> Vec<f64> {
        let h = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.start + h * i as f64).collect()
    }
}

/// Result of a parameter sweep: the grid and one or more named series.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub series: Vec<(String, Vec<f64>)>,
    pub state: String,
    pub channel: String,
    pub partition: String,
}

impl SweepResult {
    /// CSV with header "p,<series names>", 12 significant digits, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p");
        for (name, _) in &self.series {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, p) in self.grid.iter().enumerate() {
            out.push_str(&format!("{:.11e}", p));
            for (_, vals) in &self.series {
                out.push_str(&format!(",{:.11e}", vals[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Evaluates `measure` on `family(p)(state)` over the grid.
pub fn sweep<F, M>(
    rho0: &DensityMatrix,
    family: F,
    measure: M,
    grid: &GridSpec,
    meta: (&str, &str, &str),
) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<ChannelOp>,
    M: Fn(&DensityMatrix) -> Result<f64>,
{
    let ps = grid.values();
    let mut vals = Vec::with_capacity(ps.len());
    for &p in &ps {
        let evolved = family(p)?.apply(rho0)?;
        vals.push(measure(&evolved)?);
    }
    Ok(SweepResult {
        grid: ps,
        series: vec![("value".into(), vals)],
        state: meta.0.into(),
        channel: meta.1.into(),
        partition: meta.2.into(),
    })
}

/// Bisection root finder for a boolean predicate over p, assumed monotone on
/// the bracket. A 50-point pre-scan validates monotonicity; non-monotone
/// predicates fall back to the first truth flip found by the scan.
pub fn find_threshold<P>(predicate: P, bracket: (f64, f64)) -> Result<f64>
where
    P: Fn(f64) -> Result<bool>,
{
    let (mut lo, mut hi) = bracket;
    if lo >= hi {
        return Err(EntLabError::Bracket("empty bracket".into()));
    }
    let scan = 50usize;
    let mut flips = Vec::new();
    let mut prev = predicate(lo)?;
    let mut xs = vec![lo];
    for i in 1..=scan {
        let x = lo + (hi - lo) * i as f64 / scan as f64;
        let v = predicate(x)?;
        if v != prev {
            flips.push((xs[xs.len() - 1], x));
        }
        prev = v;
        xs.push(x);
    }
    if flips.is_empty() {
        return Err(EntLabError::Bracket(
            "predicate does not change truth value across the bracket".into(),
        ));
    }
    // monotone: exactly one flip; otherwise bisect the first one
    (lo, hi) = flips[0];
    let flo = predicate(lo)?;
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if predicate(mid)? == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Per-qubit dephasing strength q for which the corner coherence of a pair
/// damps by exactly (1−p): q = 1 − √(1−p). The two-qubit dephasing
/// trajectory C(p) = 2(1−p)|αβ| and the joint four-party concurrence
/// |αβ|√(4+4p−p²) are parameterized by this pair-level p.
pub fn pd_pair_strength(p: f64) -> f64 {
    1.0 - (1.0 - p).max(0.0).sqrt()
}

/// Independent single-qubit channel family at uniform strength.
pub fn uniform_family(kind: ChannelKind, nbar: f64, n: usize) -> impl Fn(f64) -> Result<ChannelOp> {
    move |p: f64| {
        let chan = catalog(kind, p, nbar)?;
        Ok(ChannelOp::Independent(IndependentChannel::uniform(chan, n)?))
    }
}

/// Collective depolarization family ρ → (1−p)ρ + p I/2ⁿ.
pub fn gwn_family(n: usize) -> impl Fn(f64) -> Result<ChannelOp> {
    move |p: f64| {
        if !(0.0..=1.0).contains(&p) {
            return Err(EntLabError::argument("p outside [0,1]"));
        }
        Ok(ChannelOp::GlobalWhiteNoise { n_qubits: n, p })
    }
}

fn balanced_block(n: usize) -> Vec<usize> {
    (0..n / 2).collect()
}

fn npt_in_block(rho: &DensityMatrix, block: &[usize]) -> Result<bool> {
    Ok(criteria::ppt(rho, block)?.detected())
}

/// Closed-form disentanglement and biseparability laws for generalized GHZ
/// states under the named channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeLaw {
    /// Full-separability point under independent depolarization.
    D,
    /// Dephasing disentangles only asymptotically (p = 1).
    Pd,
    /// Zero-temperature damping: min{1, |α/β|^{2/N}}.
    Ad,
    /// Infinite-temperature diffusive limit.
    Diffusive,
    /// Strength at which the balanced-split negativity falls to ε of its
    /// initial value: ≈ −κ ln(ε)/N.
    PEpsilon,
    /// Biseparability of GHZ under global white noise.
    GwnBisep,
    /// Full separability of GHZ under global white noise.
    GwnSep,
    /// Biseparability of GHZ under independent amplitude damping.
    AdBisep,
}

impl TimeLaw {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d" => Ok(TimeLaw::D),
            "pd" => Ok(TimeLaw::Pd),
            "ad" => Ok(TimeLaw::Ad),
            "diffusive" => Ok(TimeLaw::Diffusive),
            "p-epsilon" | "p_epsilon" => Ok(TimeLaw::PEpsilon),
            "gwn-bisep" | "gwn_bisep" => Ok(TimeLaw::GwnBisep),
            "gwn-sep" | "gwn_sep" => Ok(TimeLaw::GwnSep),
            "ad-bisep" | "ad_bisep" => Ok(TimeLaw::AdBisep),
            other => Err(EntLabError::argument(format!("unknown law '{other}'"))),
        }
    }
}

/// Closed form next to its numerically root-found counterpart.
#[derive(Debug, Clone, Serialize)]
pub struct TimeLawReport {
    pub law: TimeLaw,
    pub closed_form: f64,
    pub root_found: Option<f64>,
    pub difference: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Evaluates a closed-form law and, for n ≤ 6, cross-checks it by bisection
/// on assembled matrices. PASS iff |closed − root| < tolerance (1e-4 except
/// for the asymptotic ε-law, which carries its own second-order allowance).
///
/// The pair (α, β) is scaled to unit norm, so truncated decimals are fine.
pub fn time_law(
    law: TimeLaw,
    n: usize,
    alpha: f64,
    beta: f64,
    epsilon: Option<f64>,
) -> Result<TimeLawReport> {
    if n < 2 {
        return Err(EntLabError::argument("laws need at least 2 qubits"));
    }
    let norm = (alpha * alpha + beta * beta).sqrt();
    if norm < 1e-12 {
        return Err(EntLabError::argument("alpha and beta cannot both vanish"));
    }
    let (alpha, beta) = (alpha / norm, beta / norm);
    let ab = (alpha * beta).abs();
    let c_nn = ab.powf(2.0 / n as f64);
    let mut tolerance = 1e-4;
    let matrix_check = n <= 6;
    let ghz_state = || states::generalized_ghz(n, 0, c(alpha), c(beta), true).map(|s| s.density());

    let closed_form = match law {
        TimeLaw::D => 1.0 - (1.0 + 4.0 * c_nn).powf(-0.5),
        TimeLaw::Pd => 1.0,
        TimeLaw::Ad => (alpha / beta).abs().powf(2.0 / n as f64).min(1.0),
        TimeLaw::Diffusive => 1.0 + 2.0 * c_nn - (1.0 + 4.0 * c_nn * c_nn).sqrt(),
        TimeLaw::PEpsilon => {
            let eps = epsilon.ok_or_else(|| EntLabError::argument("epsilon required"))?;
            if !(0.0..1.0).contains(&eps) || eps == 0.0 {
                return Err(EntLabError::argument("epsilon must lie in (0,1)"));
            }
            -eps.ln() / n as f64 // kappa = 1 for D and PD
        }
        TimeLaw::GwnBisep => 1.0 / (2.0 * (1.0 - 2f64.powi(-(n as i32)))),
        TimeLaw::GwnSep => 1.0 / (1.0 + 2f64.powi(1 - n as i32)),
        TimeLaw::AdBisep => ((1usize << (n - 1)) as f64 - 1.0).powf(-2.0 / n as f64),
    };

    let root_found: Option<f64> = match law {
        TimeLaw::D => {
            if matrix_check {
                let rho0 = ghz_state()?;
                let fam = uniform_family(ChannelKind::Depolarizing, 0.0, n);
                let block = balanced_block(n);
                Some(find_threshold(
                    |p| {
                        let rho = fam(p)?.apply(&rho0)?;
                        Ok(!npt_in_block(&rho, &block)?)
                    },
                    (1e-4, 1.0 - 1e-9),
                )?)
            } else {
                None
            }
        }
        TimeLaw::Pd => {
            if matrix_check {
                // NPT persists arbitrarily close to p = 1
                let rho0 = ghz_state()?;
                let fam = uniform_family(ChannelKind::PhaseDamping, 0.0, n);
                let probe = fam(1.0 - 1e-4)?.apply(&rho0)?;
                if npt_in_block(&probe, &balanced_block(n))? {
                    Some(1.0)
                } else {
                    Some(f64::NAN)
                }
            } else {
                None
            }
        }
        TimeLaw::Ad => {
            if matrix_check && beta.abs() > alpha.abs() {
                let rho0 = ghz_state()?;
                let fam = uniform_family(ChannelKind::AmplitudeDamping, 0.0, n);
                let block = balanced_block(n);
                Some(find_threshold(
                    |p| {
                        let rho = fam(p)?.apply(&rho0)?;
                        Ok(!npt_in_block(&rho, &block)?)
                    },
                    (1e-4, 1.0 - 1e-9),
                )?)
            } else if matrix_check {
                // |alpha| >= |beta|: asymptotic, same probe as PD
                let rho0 = ghz_state()?;
                let fam = uniform_family(ChannelKind::AmplitudeDamping, 0.0, n);
                let probe = fam(1.0 - 1e-4)?.apply(&rho0)?;
                if npt_in_block(&probe, &balanced_block(n))? {
                    Some(1.0)
                } else {
                    Some(f64::NAN)
                }
            } else {
                None
            }
        }
        TimeLaw::Diffusive => {
            if matrix_check {
                let rho0 = ghz_state()?;
                let fam = uniform_family(ChannelKind::DiffusiveGad, 0.0, n);
                let block = balanced_block(n);
                Some(find_threshold(
                    |p| {
                        let rho = fam(p)?.apply(&rho0)?;
                        Ok(!npt_in_block(&rho, &block)?)
                    },
                    (1e-4, 1.0 - 1e-9),
                )?)
            } else {
                None
            }
        }
        TimeLaw::PEpsilon => {
            // exact solution of (1-p)^N = eps, independent of the asymptotic form
            let eps = epsilon.unwrap();
            let exact = 1.0 - eps.powf(1.0 / n as f64);
            // second-order allowance: the law is the first Taylor term of the
            // exact root, so the two differ by about (ln eps / N)^2 / 2
            let lead = -eps.ln() / n as f64;
            tolerance = (0.5 * lead * lead).max(1e-4) * 1.2;
            Some(exact)
        }
        TimeLaw::GwnBisep => {
            if matrix_check {
                let rho0 = states::ghz(n).density();
                let fam = gwn_family(n);
                Some(find_threshold(
                    |p| {
                        let rho = fam(p)?.apply(&rho0)?;
                        Ok(!criteria::bisep_ghz_n(&rho)?.detected())
                    },
                    (1e-4, 1.0 - 1e-9),
                )?)
            } else {
                None
            }
        }
        TimeLaw::GwnSep => {
            if matrix_check {
                let rho0 = states::ghz(n).density();
                let fam = gwn_family(n);
                let block = balanced_block(n);
                Some(find_threshold(
                    |p| {
                        let rho = fam(p)?.apply(&rho0)?;
                        Ok(!npt_in_block(&rho, &block)?)
                    },
                    (1e-4, 1.0 - 1e-9),
                )?)
            } else {
                None
            }
        }
        TimeLaw::AdBisep => {
            if matrix_check {
                let rho0 = states::ghz(n).density();
                let fam = uniform_family(ChannelKind::AmplitudeDamping, 0.0, n);
                Some(find_threshold(
                    |p| {
                        let rho = fam(p)?.apply(&rho0)?;
                        Ok(!criteria::bisep_ghz_n(&rho)?.detected())
                    },
                    (1e-4, 1.0 - 1e-9),
                )?)
            } else {
                None
            }
        }
    };

    let difference = root_found.map(|r| (r - closed_form).abs());
    let pass = match difference {
        Some(d) => d.is_finite() && d < tolerance,
        None => true, // closed form only; nothing to contradict
    };
    Ok(TimeLawReport { law, closed_form, root_found, difference, tolerance, pass })
}

/// Noise window in which every 1:(n−1) split is PPT while some balanced
/// split is still NPT: the state is entangled but nothing can be distilled
/// from it. Returns None when the window is empty.
pub fn bound_entanglement_window<F>(n: usize, family: F) -> Result<Option<(f64, f64)>>
where
    F: Fn(f64) -> Result<ChannelOp>,
{
    if n > 6 {
        return Err(EntLabError::capacity("window detection limited to 6 qubits"));
    }
    let rho0 = states::ghz(n).density();
    let single_cut_npt = |p: f64| -> Result<bool> {
        let rho = family(p)?.apply(&rho0)?;
        for q in 0..n {
            if npt_in_block(&rho, &[q])? {
                return Ok(true);
            }
        }
        Ok(false)
    };
    let balanced_npt = |p: f64| -> Result<bool> {
        let rho = family(p)?.apply(&rho0)?;
        let mut any = false;
        for mask in 1usize..(1 << n) - 1 {
            if mask & 1 == 1 && (mask.count_ones() as usize) == n / 2 {
                let block: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
                if npt_in_block(&rho, &block)? {
                    any = true;
                    break;
                }
            }
        }
        Ok(any)
    };
    let hi = 1.0 - 1e-7;
    // when the least-balanced cuts stay NPT all the way there is no window
    if single_cut_npt(hi)? {
        return Ok(None);
    }
    let p_lo = bisect_flag(&single_cut_npt, 1e-4, hi, 1e-5)?;
    if balanced_npt(hi)? {
        return Ok(None);
    }
    let p_hi = bisect_flag(&balanced_npt, 1e-4, hi, 1e-5)?;
    if p_lo + 1e-4 >= p_hi {
        return Ok(None);
    }
    // verify the defining conditions at the midpoint; channels whose splits
    // all disentangle at the same instant leave hairline tolerance-crossing
    // gaps whose midpoint NPT margin sits at the noise scale, so the
    // balanced-split violation must clear a floor well above it
    let mid = 0.5 * (p_lo + p_hi);
    if single_cut_npt(mid)? {
        return Ok(None);
    }
    let rho_mid = family(mid)?.apply(&rho0)?;
    let mut best_margin: f64 = 0.0;
    for mask in 1usize..(1 << n) - 1 {
        if mask & 1 == 1 && (mask.count_ones() as usize) == n / 2 {
            let block: Vec<usize> = (0..n).filter(|q| mask >> q & 1 == 1).collect();
            best_margin = best_margin.max(criteria::ppt(&rho_mid, &block)?.margin);
        }
    }
    if best_margin < 1e-6 {
        return Ok(None);
    }
    Ok(Some((p_lo, p_hi)))
}

fn bisect_flag<P>(pred: &P, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    P: Fn(f64) -> Result<bool>,
{
    let flo = pred(lo)?;
    if pred(hi)? == flo {
        return Err(EntLabError::Bracket("no truth change across bracket".into()));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Residual of the pure-state concurrence equation of motion
/// C((1⊗E)ψ) = C(ψ) · C((1⊗E)Φ⁺) for a single-sided qubit channel.
pub fn motion_residual_pure(psi: &crate::qstate::PureState, chan: &KrausChannel) -> Result<f64> {
    if psi.n_qubits() != 2 || chan.dim() != 2 {
        return Err(EntLabError::argument("needs a two-qubit pure state and a qubit channel"));
    }
    let rho = psi.density();
    let evolved = chan.apply_on_qubit(rho.matrix(), 2, 1)?;
    let lhs = measures::concurrence_2q(&DensityMatrix::new_unchecked(2, evolved))?;
    let c_psi = measures::concurrence_2q(&rho)?;
    let dual = one_sided_dual(chan)?;
    let c_dual = measures::concurrence_2q(&dual)?;
    Ok((lhs - c_psi * c_dual).abs())
}

/// (1⊗E)|Φ⁺⟩⟨Φ⁺| — the dual state with the channel on the second qubit.
fn one_sided_dual(chan: &KrausChannel) -> Result<DensityMatrix> {
    let phi = states::bell(states::BellKind::PhiPlus).density();
    let m = chan.apply_on_qubit(phi.matrix(), 2, 1)?;
    Ok(DensityMatrix::new_unchecked(2, m))
}

/// Slack of the two-sided mixed-state bound
/// C(E₁⊗E₂ ρ) ≤ C(ρ) · C(E₁⊗I Φ⁺) · C(I⊗E₂ Φ⁺); nonnegative when the
/// bound holds.
pub fn motion_slack_mixed(
    rho: &DensityMatrix,
    chan1: &KrausChannel,
    chan2: &KrausChannel,
) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(EntLabError::argument("needs a two-qubit state"));
    }
    let m = chan1.apply_on_qubit(rho.matrix(), 2, 0)?;
    let m = chan2.apply_on_qubit(&m, 2, 1)?;
    let lhs = measures::concurrence_2q(&DensityMatrix::new_unchecked(2, m))?;
    let c_rho = measures::concurrence_2q(rho)?;
    let c1 = measures::concurrence_2q(&one_sided_dual(chan1)?)?;
    let c2 = measures::concurrence_2q(&one_sided_dual(chan2)?)?;
    Ok(c_rho * c1 * c2 - lhs)
}

/// Slack of the universal decay bound for generalized GHZ-diagonal states:
/// D/PD: Neg(Eρ) ≤ (1−p)^N Neg(ρ); GAD: Neg(Eρ) ≤ (1 − n̄p/(2n̄+1))^N /2.
pub fn universal_bound_check(
    rho: &DensityMatrix,
    kind: ChannelKind,
    nbar: f64,
    p: f64,
    block: &[usize],
) -> Result<f64> {
    let n = rho.n_qubits();
    // membership check: generalized GHZ-diagonal states live on the diagonal
    // plus the anti-diagonal
    let d = 1usize << n;
    let m = rho.matrix();
    for i in 0..d {
        for j in 0..d {
            if i != j && j != d - 1 - i && m[(i, j)].norm() > 1e-10 {
                return Err(EntLabError::argument(
                    "state is not generalized GHZ-diagonal (support off the two diagonals)",
                ));
            }
        }
    }
    let bound = match kind {
        ChannelKind::Depolarizing | ChannelKind::PhaseDamping => {
            (1.0 - p).powi(n as i32) * measures::negativity(rho, block)?
        }
        ChannelKind::GeneralizedAmplitudeDamping => {
            let e_max = 0.5;
            (1.0 - nbar * p / (2.0 * nbar + 1.0)).powi(n as i32) * e_max
        }
        _ => {
            return Err(EntLabError::argument("bound covers channels D, PD, and GAD"));
        }
    };
    let chan = catalog(kind, p, nbar)?;
    let evolved = IndependentChannel::uniform(chan, n)?.apply(rho)?;
    let neg = measures::negativity(&evolved, block)?;
    Ok(bound - neg)
}

/// Statistics of an entanglement distribution over Haar-random pure states.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationStats {
    pub mean: f64,
    pub std: f64,
    /// Fixed 50 bins over [0, 0.5]: counts per bin.
    pub histogram: Vec<u64>,
    pub samples: usize,
}

/// Distribution of first-vs-rest negativity of Haar-random pure states under
/// an independent single-qubit channel. Deterministic for a fixed seed: each
/// sample derives its own generator from (seed, index), so thread count does
/// not affect the output.
pub fn haar_concentration_stats(
    n: usize,
    kind: ChannelKind,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<ConcentrationStats> {
    if !(2..=7).contains(&n) {
        return Err(EntLabError::argument("register size must lie in 2..=7"));
    }
    if samples < 100 {
        return Err(EntLabError::argument("need at least 100 samples"));
    }
    let chan = catalog(kind, p, 0.0)?;
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, i as u64));
            let psi = states::haar_random_pure_with(n, &mut rng);
            let rho = psi.density();
            let evolved = IndependentChannel::uniform(chan.clone(), n).unwrap().apply(&rho).unwrap();
            measures::negativity(&evolved, &[0]).unwrap()
        })
        .collect();
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / samples as f64;
    let mut histogram = vec![0u64; 50];
    for &v in &values {
        let bin = ((v / 0.5) * 50.0).floor().clamp(0.0, 49.0) as usize;
        histogram[bin] += 1;
    }
    Ok(ConcentrationStats { mean, std: var.sqrt(), histogram, samples })
}

fn mix_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 step keyed by the sample index
    let mut z = seed ^ index.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Least-balanced-split negativity of GHZ_n under transversal bit-flip
/// noise, reported next to the reference level 1−p.
///
/// The strength p parameterizes the X-basis coherence factor 1−p, i.e. each
/// qubit is flipped with probability p/2 (the BF analogue of the PD
/// parameterization), which is the regime in which the value approaches
/// (1−p)/2 for large n.
pub fn bitflip_robustness_check(n: usize, grid: &GridSpec) -> Result<SweepResult> {
    if !(3..=8).contains(&n) {
        return Err(EntLabError::argument("register size must lie in 3..=8"));
    }
    let rho0 = states::ghz(n).density();
    let ps = grid.values();
    let mut neg_vals = Vec::with_capacity(ps.len());
    let mut reference = Vec::with_capacity(ps.len());
    for &p in &ps {
        let chan = catalog(ChannelKind::BitFlip, p / 2.0, 0.0)?;
        let evolved = IndependentChannel::uniform(chan, n)?.apply(&rho0)?;
        neg_vals.push(measures::negativity(&evolved, &[0])?);
        reference.push(1.0 - p);
    }
    Ok(SweepResult {
        grid: ps,
        series: vec![("negativity_1_vs_rest".into(), neg_vals), ("one_minus_p".into(), reference)],
        state: format!("ghz:{n}"),
        channel: "bf".into(),
        partition: "1:rest".into(),
    })
}

/// Entanglement-breaking strength of one-sided depolarization on Φ⁺_d via
/// the isotropic closed form: the dual singlet fraction is 1 − p + p/d².
pub fn isotropic_eb_strength(d: usize) -> f64 {
    d as f64 / (d as f64 + 1.0)
}

/// Entanglement-breaking time of one-sided depolarization on Φ⁺_d for
/// p(t) = 1 − e^{−d²γt}: t = ln(d+1)/(d²γ).
pub fn isotropic_eb_time(d: usize, gamma: f64) -> f64 {
    ((d + 1) as f64).ln() / (d as f64 * d as f64 * gamma)
}

/// Numerical EB time for the qubit depolarizing channel via PPT of the Choi
/// dual, for cross-checking the closed form at d = 2.
pub fn depolarizing_eb_time_numeric(gamma: f64) -> Result<f64> {
    let pred = |t: f64| -> Result<bool> {
        let p = 1.0 - (-4.0 * gamma * t).exp();
        let chan = catalog(ChannelKind::Depolarizing, p, 0.0)?;
        let dual = choi_dual(&chan)?;
        let pt = qstate::partial_transpose(&dual, &[1])?;
        Ok(qstate::eigvalsh(&pt).last().copied().unwrap() >= -ZERO_ENT_TOL)
    };
    // bracket in t: EB time is ln(3)/(4 gamma) ~ 0.27/gamma
    let hi = 2.0 / gamma;
    let mut lo = 1e-6 / gamma;
    if pred(lo)? {
        return Err(EntLabError::Bracket("channel already EB at t ~ 0".into()));
    }
    let mut hi_t = hi;
    while hi_t - lo > 1e-6 / gamma * 0.5 {
        let mid = 0.5 * (lo + hi_t);
        if pred(mid)? {
            hi_t = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi_t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::BellKind;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use rand::Rng;

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0.0, 1.0, 11).is_ok());
        assert!(GridSpec::new(0.5, 0.2, 11).is_err());
        assert!(GridSpec::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn sweep_pd_concurrence_closed_form() {
        let (alpha, beta) = (0.6, 0.8);
        let psi = states::generalized_ghz(2, 0, c(alpha), c(beta), true).unwrap();
        let grid = GridSpec::new(0.0, 1.0, 21).unwrap();
        let base = uniform_family(ChannelKind::PhaseDamping, 0.0, 2);
        let fam = move |p: f64| base(pd_pair_strength(p));
        let res = sweep(
            &psi.density(),
            fam,
            |rho| measures::concurrence_2q(rho),
            &grid,
            ("ggz", "pd", "1:1"),
        )
        .unwrap();
        for (i, &p) in res.grid.iter().enumerate() {
            assert_abs_diff_eq!(res.series[0].1[i], 2.0 * (1.0 - p) * alpha * beta, epsilon = 1e-9);
        }
    }

    #[test]
    fn environment_pair_concurrence_under_ad() {
        // C_env(p) = max{0, 2 p |b| (|a| - (1-p)|b|)}: the system formula
        // with p <-> 1-p
        let (alpha, beta) = (0.5, 0.75f64.sqrt());
        let psi = states::generalized_ghz(2, 0, c(alpha), c(beta), true).unwrap();
        for p in [0.2, 0.6, 0.9] {
            let ad = catalog(ChannelKind::AmplitudeDamping, p, 0.0).unwrap();
            let joint = crate::channels::purified_independent(&psi, &ad).unwrap();
            let env = qstate::partial_trace(&joint.density(), &[2, 3]).unwrap();
            let conc = measures::concurrence_2q(&env).unwrap();
            let expect = (2.0 * p * beta * (alpha - (1.0 - p) * beta)).max(0.0);
            assert_abs_diff_eq!(conc, expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn four_party_concurrence_under_pd_purification() {
        let (alpha, beta) = (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
        let psi = states::generalized_ghz(2, 0, c(alpha), c(beta), true).unwrap();
        for p in [0.0, 0.5, 1.0] {
            let pd = catalog(ChannelKind::PhaseDamping, pd_pair_strength(p), 0.0).unwrap();
            let joint = crate::channels::purified_independent(&psi, &pd).unwrap();
            let c4 = measures::concurrence_multipartite(&joint).unwrap();
            let expect = alpha * beta * (4.0 + 4.0 * p - p * p).sqrt();
            assert_abs_diff_eq!(c4, expect, epsilon = 1e-9);
        }
        // at p = 1 the joint state reaches GHZ-type four-party entanglement
        let pd = catalog(ChannelKind::PhaseDamping, 1.0, 0.0).unwrap();
        let joint = crate::channels::purified_independent(&psi, &pd).unwrap();
        let c4 = measures::concurrence_multipartite(&joint).unwrap();
        assert_abs_diff_eq!(c4, 0.5 * 7f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn threshold_ad_esd() {
        let alpha = 0.5;
        let beta = (1.0f64 - alpha * alpha).sqrt(); // beta = sqrt(3) alpha
        let psi = states::generalized_ghz(2, 0, c(alpha), c(beta), true).unwrap();
        let rho0 = psi.density();
        let fam = uniform_family(ChannelKind::AmplitudeDamping, 0.0, 2);
        let p_star = find_threshold(
            |p| {
                let rho = fam(p)?.apply(&rho0)?;
                Ok(measures::concurrence_2q(&rho)? < ZERO_ENT_TOL)
            },
            (0.0, 1.0),
        )
        .unwrap();
        assert_abs_diff_eq!(p_star, 1.0 / 3f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn threshold_no_change_errors() {
        let r = find_threshold(|_| Ok(false), (0.0, 1.0));
        assert!(matches!(r, Err(EntLabError::Bracket(_))));
    }

    #[test]
    fn threshold_is_idempotent() {
        let rho0 = states::ghz(2).density();
        let fam = uniform_family(ChannelKind::Depolarizing, 0.0, 2);
        let pred = |p: f64| {
            let rho = fam(p)?.apply(&rho0)?;
            Ok(!npt_in_block(&rho, &[0])?)
        };
        let p1 = find_threshold(pred, (0.0, 1.0)).unwrap();
        let p2 = find_threshold(pred, (p1 - 1e-3, p1 + 1e-3)).unwrap();
        assert!((p1 - p2).abs() < 1e-6 + 1e-9);
    }

    #[test]
    fn gwn_thresholds_n3() {
        let bisep = time_law(TimeLaw::GwnBisep, 3, std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, None).unwrap();
        assert_abs_diff_eq!(bisep.closed_form, 4.0 / 7.0, epsilon = 1e-12);
        assert!(bisep.pass, "{bisep:?}");
        let sep = time_law(TimeLaw::GwnSep, 3, std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, None).unwrap();
        assert_abs_diff_eq!(sep.closed_form, 0.8, epsilon = 1e-12);
        assert!(sep.pass, "{sep:?}");
    }

    #[test]
    fn d_law_n2() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rep = time_law(TimeLaw::D, 2, s, s, None).unwrap();
        assert_abs_diff_eq!(rep.closed_form, 1.0 - 1.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn ad_law_example() {
        // alpha = 0.5, beta = sqrt(3)/2: p* = (alpha/beta)^{2/3} for N = 3
        let rep = time_law(TimeLaw::Ad, 3, 0.5, 0.75f64.sqrt(), None).unwrap();
        assert_abs_diff_eq!(rep.closed_form, (0.5 / 0.75f64.sqrt()).powf(2.0 / 3.0), epsilon = 1e-10);
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn diffusive_limit_value() {
        // closed form approaches 3 - sqrt(5) as N grows
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let big = time_law(TimeLaw::PEpsilon, 100, s, s, Some(0.01)).unwrap();
        assert_abs_diff_eq!(big.closed_form, 0.046051701859880914, epsilon = 1e-12);
        assert!(big.pass, "{big:?}");
        // diffusive closed form at a huge N
        let c_nn = 0.5f64.powf(2.0 / 1e6);
        let lim = 1.0 + 2.0 * c_nn - (1.0 + 4.0 * c_nn * c_nn).sqrt();
        assert_abs_diff_eq!(lim, 3.0 - 5f64.sqrt(), epsilon = 1e-4);
    }

    #[test]
    fn ghz4_window_under_depolarization() {
        let fam = uniform_family(ChannelKind::Depolarizing, 0.0, 4);
        let window = bound_entanglement_window(4, fam).unwrap();
        let (lo, hi) = window.expect("depolarization opens a window");
        assert!(lo < hi);
        // endpoints match the closed forms for the 1:3 and 2:2 PPT points
        let d_law = 1.0 - (1.0f64 + 4.0 * 0.5f64.powf(2.0 / 4.0)).powf(-0.5);
        assert_abs_diff_eq!(hi, d_law, epsilon = 1e-4);
    }

    #[test]
    fn no_window_for_pd_or_ad() {
        for kind in [ChannelKind::PhaseDamping, ChannelKind::AmplitudeDamping] {
            let fam = uniform_family(kind, 0.0, 4);
            assert!(bound_entanglement_window(4, fam).unwrap().is_none(), "{kind:?}");
        }
    }

    #[test]
    fn thermal_damping_window_opens_at_positive_temperature() {
        let fam = uniform_family(ChannelKind::GeneralizedAmplitudeDamping, 1.0, 4);
        let (lo, hi) = bound_entanglement_window(4, fam).unwrap().expect("window at nbar = 1");
        assert!(lo < hi);
    }

    #[test]
    fn trajectory_topology() {
        // dephasing keeps the evolved pair rank-deficient (the trajectory
        // rides the state-space boundary, so disentanglement is asymptotic),
        // while damping and depolarization produce full-rank interior states
        let psi = states::generalized_ghz(2, 0, c(0.6), c(0.8), true).unwrap();
        for i in 1..10 {
            let p = i as f64 / 10.0;
            let pd = uniform_family(ChannelKind::PhaseDamping, 0.0, 2)(p)
                .unwrap()
                .apply(&psi.density())
                .unwrap();
            let min_pd = *crate::qstate::spectrum(pd.matrix()).unwrap().last().unwrap();
            assert!(min_pd.abs() < 1e-12, "p={p}: dephased state grew rank, min eig {min_pd}");
            for kind in [ChannelKind::AmplitudeDamping, ChannelKind::Depolarizing] {
                let out = uniform_family(kind, 0.0, 2)(p).unwrap().apply(&psi.density()).unwrap();
                let min = *crate::qstate::spectrum(out.matrix()).unwrap().last().unwrap();
                assert!(min > 1e-12, "{kind:?} p={p}: expected full rank, min eig {min}");
            }
        }
    }

    #[test]
    fn motion_law_residual_zero_for_bell_input() {
        let phi = states::bell(BellKind::PhiPlus);
        for p in [0.2, 0.7] {
            let chan = catalog(ChannelKind::AmplitudeDamping, p, 0.0).unwrap();
            assert!(motion_residual_pure(&phi, &chan).unwrap() < 1e-12);
        }
    }

    #[test]
    fn motion_law_on_random_states_and_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..40 {
            let psi = states::haar_random_pure_with(2, &mut rng);
            let chan = random_qubit_channel(&mut rng);
            let resid = motion_residual_pure(&psi, &chan).unwrap();
            assert!(resid < 1e-8, "residual {resid:.2e}");
        }
    }

    pub(crate) fn random_qubit_channel(rng: &mut ChaCha8Rng) -> KrausChannel {
        // random isometry from a Haar 4x4 unitary: K_mu = <mu|U|0>
        let g = random_unitary(rng, 4);
        let mut ops = Vec::new();
        for mu in 0..2usize {
            let mut k = DMatrix::<C64>::zeros(2, 2);
            for r in 0..2 {
                for s in 0..2 {
                    // basis ordering: |system, env>
                    k[(r, s)] = g[(r * 2 + mu, s * 2)];
                }
            }
            ops.push(k);
        }
        KrausChannel::new("random", 0.0, ops).unwrap()
    }

    fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
        use rand_distr::{Distribution, StandardNormal};
        let mut g = DMatrix::<C64>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                g[(i, j)] = C64::new(re, im);
            }
        }
        // Gram-Schmidt
        for col in 0..d {
            for prev in 0..col {
                let proj = g.column(prev).dotc(&g.column(col));
                let prev_col = g.column(prev).into_owned();
                let mut col_mut = g.column_mut(col);
                col_mut -= prev_col * proj;
            }
            let norm = g.column(col).norm();
            g.column_mut(col).unscale_mut(norm);
        }
        g
    }

    #[test]
    fn mixed_state_bound_has_nonnegative_slack() {
        let w = states::werner(0.8).unwrap();
        let ad = catalog(ChannelKind::AmplitudeDamping, 0.3, 0.0).unwrap();
        let slack = motion_slack_mixed(&w, &ad, &ad).unwrap();
        assert!(slack >= -1e-9, "slack {slack}");
    }

    #[test]
    fn universal_bound_nonnegative_on_random_ghz_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 4;
        for _ in 0..10 {
            let half = 1usize << (n - 1);
            let mut plus: Vec<f64> = (0..half).map(|_| rng.random::<f64>()).collect();
            let mut minus: Vec<f64> = (0..half).map(|_| rng.random::<f64>()).collect();
            let total: f64 = plus.iter().sum::<f64>() + minus.iter().sum::<f64>();
            plus.iter_mut().for_each(|x| *x /= total);
            minus.iter_mut().for_each(|x| *x /= total);
            let coeffs = states::GhzDiagonalCoeffs::new(plus, minus).unwrap();
            let rho = states::ghz_diagonal(n, &coeffs).unwrap();
            for i in 0..20 {
                let p = i as f64 / 19.0;
                let slack =
                    universal_bound_check(&rho, ChannelKind::Depolarizing, 0.0, p, &[0, 1]).unwrap();
                assert!(slack >= -1e-9, "p={p} slack={slack}");
            }
        }
    }

    #[test]
    fn universal_bound_rejects_generic_states() {
        let w = states::w_state(3).density();
        assert!(universal_bound_check(&w, ChannelKind::Depolarizing, 0.0, 0.3, &[0]).is_err());
    }

    #[test]
    fn universal_bound_under_thermal_damping() {
        let rho = states::ghz(4).density();
        for nbar in [0.5, 1.0, 2.0] {
            for i in 0..10 {
                let p = i as f64 / 9.0;
                let slack = universal_bound_check(
                    &rho,
                    ChannelKind::GeneralizedAmplitudeDamping,
                    nbar,
                    p,
                    &[0, 1],
                )
                .unwrap();
                assert!(slack >= -1e-9, "nbar={nbar} p={p} slack={slack}");
            }
        }
    }

    #[test]
    fn pd_universal_bound_is_tight() {
        // both sides vanish at p = 1 and the ratio is exact throughout
        let rho = states::ghz(4).density();
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            let slack = universal_bound_check(&rho, ChannelKind::PhaseDamping, 0.0, p, &[0, 1]).unwrap();
            assert!(slack.abs() < 1e-9, "p={p} slack={slack}");
        }
    }

    #[test]
    fn concentration_deterministic_and_shrinking() {
        let a = haar_concentration_stats(3, ChannelKind::PhaseDamping, 0.2, 400, 42).unwrap();
        let b = haar_concentration_stats(3, ChannelKind::PhaseDamping, 0.2, 400, 42).unwrap();
        assert_eq!(a.histogram, b.histogram);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        let big = haar_concentration_stats(5, ChannelKind::PhaseDamping, 0.2, 400, 42).unwrap();
        assert!(big.std < a.std, "std {} !< {}", big.std, a.std);
    }

    #[test]
    fn concentration_mean_matches_independent_oracle() {
        // p = 0, n = 2: compare against an independently seeded Monte-Carlo
        // estimate of the Haar-average two-qubit negativity
        let stats = haar_concentration_stats(2, ChannelKind::PhaseDamping, 0.0, 4000, 7).unwrap();
        let oracle_samples = 100_000usize;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for i in 0..oracle_samples {
            let psi = states::haar_random_pure(2, 900_000 + i as u64);
            let v = measures::negativity(&psi.density(), &[0]).unwrap();
            acc += v;
            acc2 += v * v;
        }
        let mean = acc / oracle_samples as f64;
        let std_err = ((acc2 / oracle_samples as f64 - mean * mean) / oracle_samples as f64).sqrt();
        let tol = 2.0 * (std_err + stats.std / (stats.samples as f64).sqrt());
        assert!(
            (stats.mean - mean).abs() < tol,
            "mean {} vs oracle {} (tol {tol})",
            stats.mean,
            mean
        );
    }

    #[test]
    fn bitflip_robustness_trends() {
        let grid = GridSpec::new(1e-6, 0.3, 2).unwrap();
        let mut last = 0.0;
        for n in 4..=8usize {
            let res = bitflip_robustness_check(n, &grid).unwrap();
            let v = res.series[0].1[1];
            assert!(v + 1e-12 >= last, "n={n}: {v} < {last}");
            last = v;
        }
        // n=8, p=0.3: within 10% of (1-p)/2
        let res = bitflip_robustness_check(8, &grid).unwrap();
        let v = res.series[0].1[1];
        let target = (1.0 - 0.3) / 2.0;
        assert!((v - target).abs() / target < 0.10, "{v} vs {target}");
        // p = 0: negativity 1/2
        assert_abs_diff_eq!(res.series[0].1[0], 0.5, epsilon = 1e-6);
    }

    #[test]
    fn eb_times() {
        assert_abs_diff_eq!(isotropic_eb_time(2, 1.0), 3f64.ln() / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(isotropic_eb_time(3, 1.0), 4f64.ln() / 9.0, epsilon = 1e-15);
        let numeric = depolarizing_eb_time_numeric(1.0).unwrap();
        assert_abs_diff_eq!(numeric, 3f64.ln() / 4.0, epsilon = 1e-6);
    }

    #[test]
    fn sweep_csv_shape() {
        let grid = GridSpec::new(0.0, 1.0, 5).unwrap();
        let psi = states::ghz(2).density();
        let fam = uniform_family(ChannelKind::PhaseDamping, 0.0, 2);
        let res = sweep(&psi, fam, |r| measures::negativity(r, &[0]), &grid, ("ghz:2", "pd", "1:1")).unwrap();
        let csv = res.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[0].starts_with("p,"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn balanced_splits_are_most_robust() {
        // Neg_1(p) <= Neg_2(p) <= ... <= Neg_{N/2}(p) for GHZ_N under
        // independent depolarization
        for n in [4usize, 6] {
            let rho0 = states::ghz(n).density();
            let fam = uniform_family(ChannelKind::Depolarizing, 0.0, n);
            for i in 0..50 {
                let p = i as f64 / 49.0 * 0.9;
                let rho = fam(p).unwrap().apply(&rho0).unwrap();
                let mut prev = -1.0;
                for k in 1..=n / 2 {
                    let block: Vec<usize> = (0..k).collect();
                    let neg = measures::negativity(&rho, &block).unwrap();
                    assert!(neg + 1e-10 >= prev, "n={n} p={p} k={k}: {neg} < {prev}");
                    prev = neg;
                }
            }
        }
    }

    #[test]
    fn monotone_decay_under_semigroup_channels() {
        // measure series non-increasing in p for D/PD/AD on the covered family
        let psi = states::ghz(3).density();
        let grid = GridSpec::new(0.0, 0.9, 16).unwrap();
        for kind in [ChannelKind::Depolarizing, ChannelKind::PhaseDamping, ChannelKind::AmplitudeDamping] {
            let fam = uniform_family(kind, 0.0, 3);
            let res = sweep(&psi, fam, |r| measures::negativity(r, &[0]), &grid, ("", "", "")).unwrap();
            for w in res.series[0].1.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{kind:?}: {w:?}");
            }
        }
    }
}
