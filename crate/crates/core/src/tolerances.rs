//! Numerical tolerances shared by the library, the CLI and the test suites.

/// Norm drift allowed after any sequence of gate applications.
pub const NORM: f64 = 1e-10;

/// Entrywise bound on `U^dag U - I` for a matrix to count as unitary.
pub const UNITARY: f64 = 1e-12;

/// Probabilities at or below this are treated as exactly zero when
/// conditioning or choosing a measurement branch.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// Teleported-CNOT fidelity shortfall.
pub const GADGET_FIDELITY: f64 = 1e-10;

/// Deviation of each Bell-outcome marginal from 1/4.
pub const BELL_UNIFORMITY: f64 = 1e-10;

/// Total-variation distance between post-selected and source distributions.
pub const POSTSELECTION_TV: f64 = 1e-9;

/// Exact guess-hit probability against 2^-k.
pub const GUESS_HIT: f64 = 1e-10;

/// Depth-3 block simulator against the brute-force oracle.
pub const DEPTH3: f64 = 1e-9;

/// Staged adaptive sampler against outcome-path enumeration.
pub const STAGED: f64 = 1e-9;

/// Outcome-independence of final distributions across outcome paths.
pub const FIX_PROPERTY: f64 = 1e-10;

/// Agreement between fixed-circuit oracles built from different guesses.
pub const FIXED_ORACLE: f64 = 1e-9;

/// Chain-rule consistency of conditional oracles.
pub const CHAIN_RULE: f64 = 1e-9;
