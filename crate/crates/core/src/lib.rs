//! nonceforge: a DSA signing toolkit whose per-signature nonce comes from a
//! multi-stage keyed pipeline instead of a bare PRNG draw.
//!
//! The crate is organized around the pipeline and the things needed to trust
//! it:
//!
//! * [`rng`] — the random byte source: OS entropy for production signing and
//!   a bit-exact seeded mode for tests and golden vectors.
//! * [`constants`] — the fixed A/P/Q/Z tables the pipeline mixes in, shipped
//!   as a checksummed data file.
//! * [`noncegen`] — the nonce pipeline itself: key expansion, Feistel block
//!   substitution, keyed permutation, 7:4 compression, byte substitution,
//!   and digest compression down to a 224-bit nonce.
//! * [`shabal`] — the keyed permutation primitive used by the pipeline.
//! * [`dsa`] — domain parameters, keys, signing, verification, and the
//!   nonce-reuse key-recovery demonstration.
//! * [`randlab`] — avalanche, Monte-Carlo pi, and chi-square harnesses for
//!   measuring the pipeline's statistical behaviour.
//! * [`cli`] — the `nonceforge` command-line surface.
//!
//! Signing never exposes, logs, or lets the caller choose the nonce; the
//! pipeline output is used directly (rejection-sampled into `[1, q-1]`,
//! never reduced mod q).

pub mod cli;
pub mod constants;
pub mod dsa;
pub mod noncegen;
pub mod prime;
pub mod randlab;
pub mod rng;
pub mod shabal;

mod error;

pub use error::{Error, Result};
