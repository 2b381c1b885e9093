//! Complete determination of a qubit state from one repeatedly measured
//! factorized observable.
//!
//! The qubit is coupled to an assistant through a Heisenberg XYZ interaction;
//! the joint evolution maps the unknown state onto the four outcome
//! probabilities of a single x-basis product measurement, which a 4x4
//! transfer matrix then inverts. The crate covers the whole pipeline: the
//! closed-form eigensystem and propagator, the transfer map with its
//! determinant and error coefficients, conditioning optimization over the
//! Hamiltonian family, NMR pulse-sequence realizations of the coupling
//! (short-period expansion and exact decomposition), and the simulated
//! end-to-end experiment with noise, readout, sweeps and entanglement
//! tracking.

// index loops are the house style for the fixed-size matrix math
#![allow(clippy::needless_range_loop)]

pub mod evolve;
pub mod experiment;
pub mod model;
pub mod optimize;
pub mod pulsesim;
pub mod qmat;
pub mod transfer;

/// Stable seed derivation for per-candidate / per-record RNG streams
/// (splitmix64 finalizer), so parallel or reordered evaluation cannot change
/// results.
pub(crate) fn seed_mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
