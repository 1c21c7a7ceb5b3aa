//! Host-side tooling around `erasuresim-core`: protocol and noise
//! specifications, JSON-lines trace files, a TCP relay that erases frames in
//! flight, and parallel drivers for searches and sweeps.

pub mod net;
pub mod par;
pub mod specs;
pub mod trace_io;

pub use erasuresim_core as core;
