//! The ensemble combiner: run K decoding paths on one received LLR
//! vector and pick the final estimate with an ML-in-the-list rule.
//!
//! The list is the set of path estimates that are valid in the *base*
//! code when at least one exists, otherwise all estimates. The winner
//! maximizes the channel log-likelihood, computed as a correlation over
//! transmitted (non-punctured) positions. Latency is the maximum of the
//! per-path iteration counts, complexity their sum.

use std::sync::Arc;

use thiserror::Error;

use crate::bpdec::{DecodeError, DecodeOutcome, Decoder, DecoderConfig};
use crate::code::{CodeModel, DecodePath};
use crate::gf2::BitVector;

#[derive(Debug, Error)]
pub enum ScedError {
    #[error("path base code does not match ensemble base code")]
    BaseMismatch,
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// An ordered set of decoding paths. Path 0 is always the base code
/// with its original PCM.
#[derive(Debug, Clone)]
pub struct ScedEnsemble {
    base: Arc<CodeModel>,
    paths: Vec<(DecodePath, DecoderConfig)>,
}

impl ScedEnsemble {
    /// Ensemble containing only the base path; `push_path` adds
    /// auxiliary paths.
    pub fn new(base: &Arc<CodeModel>, cfg: DecoderConfig) -> Self {
        let paths = vec![(DecodePath::base_path(base), cfg)];
        ScedEnsemble {
            base: Arc::clone(base),
            paths,
        }
    }

    pub fn push_path(&mut self, path: DecodePath, cfg: DecoderConfig) -> Result<(), ScedError> {
        if !Arc::ptr_eq(path.base(), &self.base) {
            return Err(ScedError::BaseMismatch);
        }
        self.paths.push((path, cfg));
        Ok(())
    }

    pub fn base(&self) -> &Arc<CodeModel> {
        &self.base
    }

    pub fn paths(&self) -> &[(DecodePath, DecoderConfig)] {
        &self.paths
    }

    /// Number of paths K.
    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }
}

/// Outcome of one ensemble decode.
#[derive(Debug, Clone)]
pub struct ScedResult {
    /// The ML-in-the-list winner.
    pub estimate: BitVector,
    /// Per-path decode outcomes, in path order.
    pub list_members: Vec<DecodeOutcome>,
    /// Path index the winning estimate came from (lowest on ties).
    pub winner_path: usize,
    /// max over paths of the iteration count.
    pub latency: u32,
    /// Sum over paths of the iteration counts.
    pub complexity: u64,
    /// Whether the winner satisfies the base code.
    pub winner_valid: bool,
}

/// Correlation metric `sum_j llr_j * (1 - 2 x_j)` over transmitted
/// positions; equivalent to the log-likelihood for a memoryless
/// symmetric channel. Returns the index of the maximizing candidate
/// (first on ties) and its metric. `candidates` must be non-empty.
pub fn ml_in_list(candidates: &[&BitVector], llrs: &[f64], mask: &BitVector) -> (usize, f64) {
    assert!(!candidates.is_empty(), "ml_in_list needs candidates");
    let metric = |x: &BitVector| -> f64 {
        let mut acc = 0.0;
        for (j, &l) in llrs.iter().enumerate() {
            if !mask.get(j) {
                acc += if x.get(j) { -l } else { l };
            }
        }
        acc
    };
    let mut best = 0usize;
    let mut best_metric = metric(candidates[0]);
    for (i, cand) in candidates.iter().enumerate().skip(1) {
        let m = metric(cand);
        if m > best_metric {
            best = i;
            best_metric = m;
        }
    }
    (best, best_metric)
}

/// Reusable workspace holding one [`Decoder`] per path.
pub struct ScedDecoder<'a> {
    ens: &'a ScedEnsemble,
    decoders: Vec<Decoder<'a>>,
}

impl<'a> ScedDecoder<'a> {
    pub fn new(ens: &'a ScedEnsemble) -> Result<Self, ScedError> {
        let decoders = ens
            .paths
            .iter()
            .map(|(path, cfg)| Decoder::new(path, *cfg))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ScedDecoder { ens, decoders })
    }

    /// Decode one received word on every path and combine. Paths run in
    /// fixed order; results are identical to any parallel execution.
    pub fn decode(&mut self, llrs: &[f64]) -> Result<ScedResult, ScedError> {
        let outcomes: Vec<DecodeOutcome> = self
            .decoders
            .iter_mut()
            .map(|dec| dec.decode(llrs))
            .collect::<Result<_, _>>()?;

        let any_valid = outcomes.iter().any(|o| o.valid_in_base);
        // Candidate (path, estimate) pairs after the list rule, with
        // duplicate estimates kept once (first path wins).
        let mut cand_paths: Vec<usize> = Vec::with_capacity(outcomes.len());
        let mut cand_words: Vec<&BitVector> = Vec::with_capacity(outcomes.len());
        for (i, o) in outcomes.iter().enumerate() {
            if any_valid && !o.valid_in_base {
                continue;
            }
            if !cand_words.contains(&&o.hard_decision) {
                cand_paths.push(i);
                cand_words.push(&o.hard_decision);
            }
        }

        let mask = self.ens.base.puncture_mask();
        let (win, _metric) = ml_in_list(&cand_words, llrs, mask);
        let winner_path = cand_paths[win];
        let estimate = outcomes[winner_path].hard_decision.clone();
        let winner_valid = outcomes[winner_path].valid_in_base;
        let latency = outcomes.iter().map(|o| o.iterations).max().unwrap_or(0);
        let complexity = outcomes.iter().map(|o| o.iterations as u64).sum();
        Ok(ScedResult {
            estimate,
            list_members: outcomes,
            winner_path,
            latency,
            complexity,
            winner_valid,
        })
    }
}

/// One-shot ensemble decode.
pub fn sced_decode(ens: &ScedEnsemble, llrs: &[f64]) -> Result<ScedResult, ScedError> {
    ScedDecoder::new(ens)?.decode(llrs)
}
