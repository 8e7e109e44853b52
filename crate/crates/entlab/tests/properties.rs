//! Property tests for the structural invariants of the state and channel
//! layers.

use entlab::channels::{catalog, ChannelKind, IndependentChannel};
use entlab::measures;
use entlab::qstate::{self, DensityMatrix};
use entlab::states;
use proptest::prelude::*;

fn mixed_state(n: usize, seed: u64) -> DensityMatrix {
    // induced measure: trace out one qubit of a Haar pure state
    let psi = states::haar_random_pure(n + 1, seed);
    qstate::partial_trace(&psi.density(), &(0..n).collect::<Vec<_>>()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_inverts_tensor(seed in any::<u64>()) {
        let a = mixed_state(2, seed);
        let b = mixed_state(1, seed.wrapping_add(1));
        let joint = qstate::tensor(&a, &b).unwrap();
        let back = qstate::partial_trace(&joint, &[0, 1]).unwrap();
        prop_assert!((back.matrix() - a.matrix()).norm() < 1e-12);
        let back_b = qstate::partial_trace(&joint, &[2]).unwrap();
        prop_assert!((back_b.matrix() - b.matrix()).norm() < 1e-12);
    }

    #[test]
    fn partial_transpose_is_involution(seed in any::<u64>(), block_sel in 1usize..4) {
        let rho = mixed_state(2, seed);
        let block: Vec<usize> = (0..2).filter(|q| block_sel >> q & 1 == 1).collect();
        let once = qstate::partial_transpose(&rho, &block).unwrap();
        let twice = qstate::partial_transpose_matrix(&once, 2, &block).unwrap();
        prop_assert_eq!(&twice, rho.matrix());
    }

    #[test]
    fn channels_preserve_state_invariants(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let rho = mixed_state(2, seed);
        for kind in [
            ChannelKind::Depolarizing,
            ChannelKind::AmplitudeDamping,
            ChannelKind::GeneralizedAmplitudeDamping,
            ChannelKind::DiffusiveGad,
        ] {
            let chan = catalog(kind, p, 0.4).unwrap();
            let out = IndependentChannel::uniform(chan, 2).unwrap().apply(&rho).unwrap();
            prop_assert!((out.trace().re - 1.0).abs() < 1e-9);
            let spectrum = qstate::spectrum(out.matrix()).unwrap();
            prop_assert!(spectrum.last().unwrap() > &-1e-8);
            prop_assert!((spectrum.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn negativity_is_cut_symmetric(seed in any::<u64>()) {
        let rho = mixed_state(3, seed);
        let a = measures::negativity(&rho, &[0]).unwrap();
        let b = measures::negativity(&rho, &[1, 2]).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn graph_bases_stay_orthonormal(edge_mask in 0u32..64) {
        let n = 4usize;
        let all_pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let edges: Vec<(usize, usize)> = all_pairs
            .iter()
            .enumerate()
            .filter(|(idx, _)| edge_mask >> idx & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let g = states::Graph::new(n, edges).unwrap();
        for a in 0..1usize << n {
            let sa = states::graph_basis_state(&g, a);
            for b in a..1usize << n {
                let sb = states::graph_basis_state(&g, b);
                let ip = sa.amplitudes().dotc(sb.amplitudes()).norm();
                let expect = if a == b { 1.0 } else { 0.0 };
                prop_assert!((ip - expect).abs() < 1e-9);
            }
        }
    }
}
