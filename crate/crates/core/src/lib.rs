//! Simulation and verification workbench for one-time memories built from
//! 2↦1 quantum random access codes and random binary linear codes.
//!
//! Modules, bottom up:
//! - [`f2codes`]: linear codes over F₂, binary symmetric channel, exhaustive decoding.
//! - [`qrac`]: the single-qubit random access code and its measurement statistics.
//! - [`collinfo`]: collision entropy and collision mutual information on exact tables.
//! - [`povmsearch`]: certified upper bounds on what any qubit POVM learns about the encoded bits.
//! - [`lightcone`]: grid partitions for shallow local circuits and parameter feasibility.
//! - [`protocol`]: the one-time random memory and one-time memory constructions.

pub mod collinfo;
pub mod f2codes;
pub mod lightcone;
pub mod linalg;
pub mod povmsearch;
pub mod protocol;
pub mod qrac;
pub mod seed;
