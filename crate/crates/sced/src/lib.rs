//! Subcode ensemble decoding laboratory.
//!
//! This crate implements the machinery for decoding binary linear block
//! codes with an ensemble of belief-propagation decoders running on
//! *subcodes* of the code: bit-packed GF(2) linear algebra, parity-check
//! matrix ingestion (alist), subcode construction by row appending,
//! linear-covering row triples, coverage-driven candidate selection, the
//! ML-in-the-list combiner, and a seeded Monte-Carlo AWGN/BPSK harness
//! for frame-error-rate campaigns.
//!
//! Modules mirror the pipeline:
//!
//! - [`gf2`]: dense bit-packed matrices and vectors over GF(2).
//! - [`code`]: code models, alist I/O, Tanner adjacency, subcode induction.
//! - [`bpdec`]: flooding sum-product / normalized min-sum decoder.
//! - [`ensemble`]: candidate row sampling, 4-cycle-free generation,
//!   linear coverings, pools, coverage records, greedy selection.
//! - [`sceddec`]: the multi-path combiner with the ML-in-the-list rule.
//! - [`simlab`]: AWGN channel, FER campaigns, error-frame collection.

pub mod bpdec;
pub mod code;
pub mod ensemble;
pub mod gf2;
pub mod sceddec;
pub mod simlab;
