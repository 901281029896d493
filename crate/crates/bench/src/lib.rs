//! Shared fixtures for the criterion benches in `benches/`.

use pdql_core::env::{make_lattice, most_square_dims};
use pdql_core::mdp::value_iteration;
use pdql_core::{LatticeConfig, MdpSpec, ValueTable};

/// A most-square 2-D lattice with light slip and its oracle values.
pub fn lattice_with_oracle(states: usize, gamma: f64) -> (MdpSpec, ValueTable) {
    let cfg = LatticeConfig {
        slip_prob: 0.1,
        seed: 11,
        ..LatticeConfig::new(most_square_dims(states))
    };
    let spec = make_lattice(&cfg, gamma).expect("valid lattice");
    let (oracle, _) = value_iteration(&spec, 1e-10).expect("oracle converges");
    (spec, oracle)
}
