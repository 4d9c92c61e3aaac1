//! Gate-teleportation compilation of CNOT circuits to constant depth, exact
//! simulation and post-selection, density computation, coin maps and a
//! set-size game harness.

pub mod am_game;
pub mod bits;
pub mod circuit;
pub mod density;
pub mod error;
pub mod gate;
pub mod gc_compile;
pub mod metrics;
pub mod random;
pub mod rng;
pub mod statevector;
pub mod tolerances;

pub use bits::BitString;
pub use error::{Error, Result};
pub use gate::Gate;
pub use statevector::StateVector;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/teleported-cnot.md")]
    mod teleported_cnot {}
    #[doc = include_str!("../../../book/src/density.md")]
    mod density {}
    #[doc = include_str!("../../../book/src/coin-simulation.md")]
    mod coin_simulation {}
    #[doc = include_str!("../../../book/src/set-size-game.md")]
    mod set_size_game {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
