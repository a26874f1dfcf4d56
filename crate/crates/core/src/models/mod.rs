//! Concrete processes: the Lorentzian dephasing model and three small
//! counterexamples.

pub mod counterexamples;
pub mod dephasing;
pub mod quadrature;
