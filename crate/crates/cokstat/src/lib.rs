//! Cokernels of products of random matrices over Z/p^L and their limit laws.
//!
//! Modules, bottom up: [`arith`] (big integers, reals, q-series kernels),
//! [`partition`] (index algebra), [`pgroup`] (exact p-group counts),
//! [`lab`] (random matrices and Smith valuations), [`limit`] (limit laws and
//! moment inversion) and [`harness`] (experiments, comparison, self checks).

pub mod arith;
pub mod harness;
pub mod lab;
pub mod limit;
pub mod partition;
pub mod pgroup;
