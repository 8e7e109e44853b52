//! Python bindings for the entlab core: state factories, channel
//! application, entanglement measures, and the main criteria. Density
//! matrices cross the boundary as nested lists of Python complex numbers,
//! row-major, with qubit 0 as the most significant bit.

use num_complex::Complex64 as C64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use entlab::channels::{catalog, ChannelKind, IndependentChannel};
use entlab::criteria;
use entlab::cvgauss::{duan_check, ppt_qumode_check, symplectic_eigenvalues, CovarianceMatrix};
use entlab::dynamics;
use entlab::measures;
use entlab::qstate::{self, DensityMatrix};
use entlab::states::{self, Graph};

type PyMatrix = Vec<Vec<C64>>;

fn to_py(m: &nalgebra::DMatrix<C64>) -> PyMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn from_py(rows: PyMatrix) -> PyResult<DensityMatrix> {
    let d = rows.len();
    if d == 0 || !d.is_power_of_two() || rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("matrix must be square with power-of-two size"));
    }
    let n = d.trailing_zeros() as usize;
    let mut m = nalgebra::DMatrix::<C64>::zeros(d, d);
    for (i, row) in rows.iter().enumerate() {
        for (j, &z) in row.iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    DensityMatrix::new(n, m).map_err(err)
}

fn err(e: entlab::EntLabError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// GHZ state density matrix on n qubits.
#[pyfunction]
fn ghz(n: usize) -> PyMatrix {
    to_py(states::ghz(n).density().matrix())
}

/// W state density matrix on n qubits.
#[pyfunction]
fn w_state(n: usize) -> PyMatrix {
    to_py(states::w_state(n).density().matrix())
}

/// Symmetric Dicke state with k excitations.
#[pyfunction]
fn dicke(n: usize, k: usize) -> PyResult<PyMatrix> {
    Ok(to_py(states::dicke(n, k).map_err(err)?.density().matrix()))
}

/// Werner state p|Ψ⁻⟩⟨Ψ⁻| + (1−p)I/4.
#[pyfunction]
fn werner(p: f64) -> PyResult<PyMatrix> {
    Ok(to_py(states::werner(p).map_err(err)?.matrix()))
}

/// Two-qubit isotropic state with singlet fraction f.
#[pyfunction]
fn isotropic(f: f64) -> PyResult<PyMatrix> {
    Ok(to_py(states::isotropic_2q(f).map_err(err)?.matrix()))
}

/// Four-qubit Smolin state.
#[pyfunction]
fn smolin() -> PyMatrix {
    to_py(states::smolin().matrix())
}

/// Graph state from an edge list on n vertices.
#[pyfunction]
fn graph_state(n: usize, edges: Vec<(usize, usize)>) -> PyResult<PyMatrix> {
    let g = Graph::new(n, edges).map_err(err)?;
    Ok(to_py(states::graph_state(&g).density().matrix()))
}

/// Haar-random pure-state density matrix (deterministic per seed).
#[pyfunction]
fn haar_random(n: usize, seed: u64) -> PyMatrix {
    to_py(states::haar_random_pure(n, seed).density().matrix())
}

/// Applies a catalog channel independently to every qubit.
/// Channels: d, pd, pf, bf, bpf, ad, gad, gad-diff; nbar only matters for gad.
#[pyfunction]
#[pyo3(signature = (rho, channel, p, nbar = 0.0))]
fn apply_channel(rho: PyMatrix, channel: &str, p: f64, nbar: f64) -> PyResult<PyMatrix> {
    let state = from_py(rho)?;
    let kind = ChannelKind::parse(channel).map_err(err)?;
    let chan = catalog(kind, p, nbar).map_err(err)?;
    let out = IndependentChannel::uniform(chan, state.n_qubits())
        .and_then(|c| c.apply(&state))
        .map_err(err)?;
    Ok(to_py(out.matrix()))
}

/// Negativity across the cut `block` versus the rest.
#[pyfunction]
fn negativity(rho: PyMatrix, block: Vec<usize>) -> PyResult<f64> {
    measures::negativity(&from_py(rho)?, &block).map_err(err)
}

/// Wootters concurrence of a two-qubit state.
#[pyfunction]
fn concurrence(rho: PyMatrix) -> PyResult<f64> {
    measures::concurrence_2q(&from_py(rho)?).map_err(err)
}

/// Entanglement of formation of a two-qubit state (bits).
#[pyfunction]
fn eof(rho: PyMatrix) -> PyResult<f64> {
    measures::eof_2q(&from_py(rho)?).map_err(err)
}

/// Von Neumann entropy (nats) and linear entropy.
#[pyfunction]
fn entropies(rho: PyMatrix) -> PyResult<(f64, f64)> {
    Ok(qstate::entropies(&from_py(rho)?))
}

/// Signed PPT margin for the cut (positive means NPT, hence entangled).
#[pyfunction]
fn ppt_margin(rho: PyMatrix, block: Vec<usize>) -> PyResult<f64> {
    Ok(criteria::ppt(&from_py(rho)?, &block).map_err(err)?.margin)
}

/// Multipartite negativity from the fully-decomposable-witness program.
#[pyfunction]
fn multipartite_negativity(rho: PyMatrix) -> PyResult<f64> {
    criteria::multipartite_negativity(&from_py(rho)?).map_err(err)
}

/// CHSH value at the singlet-optimal settings.
#[pyfunction]
fn chsh_optimal_value(rho: PyMatrix) -> PyResult<f64> {
    criteria::chsh_value(&from_py(rho)?, &criteria::chsh_optimal_bell()).map_err(err)
}

/// Closed-form threshold law next to its root-found counterpart; returns
/// (closed_form, root_found_or_None, pass).
#[pyfunction]
#[pyo3(signature = (law, n, alpha, beta, epsilon = None))]
fn time_law(law: &str, n: usize, alpha: f64, beta: f64, epsilon: Option<f64>) -> PyResult<(f64, Option<f64>, bool)> {
    let report = dynamics::time_law(dynamics::TimeLaw::parse(law).map_err(err)?, n, alpha, beta, epsilon)
        .map_err(err)?;
    Ok((report.closed_form, report.root_found, report.pass))
}

/// Partially transposed symplectic spectrum of a two-mode squeezed state,
/// plus the Duan and PPT verdicts: (pt_eigs, duan_detected, ppt_detected).
#[pyfunction]
fn tmsv_checks(r: f64) -> PyResult<(Vec<f64>, bool, bool)> {
    let cov = CovarianceMatrix::two_mode_squeezed(r);
    let pt = symplectic_eigenvalues(&cov, Some(1)).map_err(err)?;
    let duan = duan_check(&cov, 1.0).map_err(err)?;
    let ppt = ppt_qumode_check(&cov).map_err(err)?;
    Ok((pt, duan.detected(), ppt.detected()))
}

#[pymodule]
fn entlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(ghz, m)?)?;
    m.add_function(wrap_pyfunction!(w_state, m)?)?;
    m.add_function(wrap_pyfunction!(dicke, m)?)?;
    m.add_function(wrap_pyfunction!(werner, m)?)?;
    m.add_function(wrap_pyfunction!(isotropic, m)?)?;
    m.add_function(wrap_pyfunction!(smolin, m)?)?;
    m.add_function(wrap_pyfunction!(graph_state, m)?)?;
    m.add_function(wrap_pyfunction!(haar_random, m)?)?;
    m.add_function(wrap_pyfunction!(apply_channel, m)?)?;
    m.add_function(wrap_pyfunction!(negativity, m)?)?;
    m.add_function(wrap_pyfunction!(concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(eof, m)?)?;
    m.add_function(wrap_pyfunction!(entropies, m)?)?;
    m.add_function(wrap_pyfunction!(ppt_margin, m)?)?;
    m.add_function(wrap_pyfunction!(multipartite_negativity, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_optimal_value, m)?)?;
    m.add_function(wrap_pyfunction!(time_law, m)?)?;
    m.add_function(wrap_pyfunction!(tmsv_checks, m)?)?;
    Ok(())
}
