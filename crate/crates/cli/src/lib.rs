//! Configuration, run execution and the acceptance suite behind the `rvdp`
//! binary.

pub mod config;
pub mod run;
pub mod suite;
