//! Flooding belief-propagation decoding over a decode path's Tanner
//! graph: sum-product and normalized min-sum, with syndrome-based early
//! stopping.
//!
//! LLR convention: positive means bit 0 is more likely; punctured or
//! unknown positions carry LLR 0. One iteration is: all check-node
//! updates, all variable-node updates, hard decision, syndrome check
//! against the path's effective PCM. The syndrome is also checked before
//! the first iteration, so a clean channel word decodes with zero
//! iterations.

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::code::DecodePath;
use crate::gf2::BitVector;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("LLR vector length {actual} does not match block length {expected}")]
    Dimension { expected: usize, actual: usize },
    #[error("non-finite channel LLR at position {index}")]
    NonFinite { index: usize },
    #[error("invalid decoder config: {0}")]
    Config(String),
}

/// Message update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    /// Sum-product (tanh/atanh in the LLR domain).
    Spa,
    /// Normalized min-sum.
    Nms,
}

impl DecoderKind {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderKind::Spa => "spa",
            DecoderKind::Nms => "nms",
        }
    }
}

/// Decoder parameters shared by every path of an ensemble run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub kind: DecoderKind,
    /// Check-message scaling for min-sum, in (0, 1]. Ignored by SPA.
    pub normalization: f64,
    pub max_iterations: u32,
    /// Message magnitude bound. Applied to tanh/atanh inputs and to all
    /// outgoing messages of both kinds.
    pub llr_clip: f64,
}

impl DecoderConfig {
    pub const DEFAULT_CLIP: f64 = 30.0;

    pub fn spa(max_iterations: u32) -> Self {
        DecoderConfig {
            kind: DecoderKind::Spa,
            normalization: 1.0,
            max_iterations,
            llr_clip: Self::DEFAULT_CLIP,
        }
    }

    pub fn nms(normalization: f64, max_iterations: u32) -> Self {
        DecoderConfig {
            kind: DecoderKind::Nms,
            normalization,
            max_iterations,
            llr_clip: Self::DEFAULT_CLIP,
        }
    }

    pub fn validate(&self) -> Result<(), DecodeError> {
        if !(self.normalization > 0.0 && self.normalization <= 1.0) {
            return Err(DecodeError::Config(format!(
                "normalization {} outside (0, 1]",
                self.normalization
            )));
        }
        if self.max_iterations < 1 {
            return Err(DecodeError::Config("max_iterations must be >= 1".into()));
        }
        if !(self.llr_clip > 0.0) {
            return Err(DecodeError::Config("llr_clip must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 over the exact parameter bits; identifies the config in
    /// frame-set headers.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.kind.name().as_bytes());
        h.update(self.normalization.to_bits().to_le_bytes());
        h.update(self.max_iterations.to_le_bytes());
        h.update(self.llr_clip.to_bits().to_le_bytes());
        h.finalize().into()
    }

    pub fn content_hash_hex(&self) -> String {
        self.content_hash()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Result of one decode call.
#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    /// Hard decision on all n variable nodes.
    pub hard_decision: BitVector,
    /// Completed iterations; 0 when the channel hard decision already
    /// satisfied the path's syndrome.
    pub iterations: u32,
    /// True iff the stop was a zero syndrome under the path's PCM.
    pub converged: bool,
    /// True iff the hard decision has zero syndrome under the base PCM.
    pub valid_in_base: bool,
}

/// Hard decision per position: bit 1 iff the LLR is negative; an exact
/// zero maps to bit 0.
pub fn hard_decide(llrs: &[f64]) -> BitVector {
    BitVector::from_bits(llrs.iter().map(|&l| l < 0.0))
}

#[inline]
fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Check-node update into a caller buffer; `out.len() == incoming.len()`.
///
/// SPA: `out[j] = 2 atanh(prod_{j' != j} tanh(in[j'] / 2))`, inputs and
/// outputs bounded to `clip`. NMS: sign product times the minimum of the
/// other magnitudes, scaled by `normalization`, bounded to `clip`. A
/// degree-1 check emits `+clip` (the empty product pins the bit to 0).
pub fn cn_update_into(
    incoming: &[f64],
    out: &mut [f64],
    kind: DecoderKind,
    normalization: f64,
    clip: f64,
    scratch: &mut Vec<f64>,
) {
    let deg = incoming.len();
    debug_assert_eq!(out.len(), deg);
    if deg == 1 {
        out[0] = clip;
        return;
    }
    match kind {
        DecoderKind::Spa => {
            // Work on magnitudes with signs tracked separately, so sign
            // flips of the inputs commute exactly through the update.
            // tanh(a/2) = 1 - 2/(e^a + 1) and 2 atanh(p) = ln((1+p)/(1-p))
            // keep all transcendentals on nonnegative arguments.
            scratch.clear();
            let mut sign_prod = 1.0f64;
            for &x in incoming {
                sign_prod *= sgn(x);
                let a = x.abs().min(clip);
                scratch.push(1.0 - 2.0 / (a.exp() + 1.0));
            }
            let mut acc = 1.0f64;
            for j in 0..deg {
                out[j] = acc;
                acc *= scratch[j];
            }
            acc = 1.0;
            for j in (0..deg).rev() {
                let p = out[j] * acc;
                acc *= scratch[j];
                let mag = ((1.0 + p) / (1.0 - p)).ln().min(clip);
                out[j] = sign_prod * sgn(incoming[j]) * mag;
            }
        }
        DecoderKind::Nms => {
            let mut min1 = f64::INFINITY;
            let mut min2 = f64::INFINITY;
            let mut min_at = 0usize;
            let mut sign_prod = 1.0f64;
            for (j, &x) in incoming.iter().enumerate() {
                sign_prod *= sgn(x);
                let a = x.abs();
                if a < min1 {
                    min2 = min1;
                    min1 = a;
                    min_at = j;
                } else if a < min2 {
                    min2 = a;
                }
            }
            for (j, &x) in incoming.iter().enumerate() {
                let mag = if j == min_at { min2 } else { min1 };
                let s = sign_prod * sgn(x);
                out[j] = (normalization * s * mag).clamp(-clip, clip);
            }
        }
    }
}

/// Allocating wrapper around [`cn_update_into`].
pub fn cn_update(
    incoming: &[f64],
    kind: DecoderKind,
    normalization: f64,
    clip: f64,
) -> Vec<f64> {
    let mut out = vec![0.0; incoming.len()];
    let mut scratch = Vec::with_capacity(incoming.len());
    cn_update_into(incoming, &mut out, kind, normalization, clip, &mut scratch);
    out
}

/// A reusable decoder for one path: flattened adjacency plus message
/// workspaces. One instance per thread; calls are deterministic.
pub struct Decoder<'a> {
    path: &'a DecodePath,
    cfg: DecoderConfig,
    // CSR layout: edges grouped by check.
    check_off: Vec<u32>,
    edge_var: Vec<u32>,
    var_off: Vec<u32>,
    var_edge: Vec<u32>,
    // VN -> CN and CN -> VN messages, indexed by edge.
    q: Vec<f64>,
    r: Vec<f64>,
    posterior: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> Decoder<'a> {
    pub fn new(path: &'a DecodePath, cfg: DecoderConfig) -> Result<Self, DecodeError> {
        cfg.validate()?;
        let tanner = path.tanner();
        let n = path.n();
        let mut check_off = Vec::with_capacity(tanner.check_neighbors.len() + 1);
        let mut edge_var = Vec::new();
        check_off.push(0u32);
        for cols in &tanner.check_neighbors {
            edge_var.extend_from_slice(cols);
            check_off.push(edge_var.len() as u32);
        }
        let mut var_edge_lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edge_lists[v as usize].push(e as u32);
        }
        let mut var_off = Vec::with_capacity(n + 1);
        let mut var_edge = Vec::new();
        var_off.push(0u32);
        for list in &var_edge_lists {
            var_edge.extend_from_slice(list);
            var_off.push(var_edge.len() as u32);
        }
        let edges = edge_var.len();
        let max_deg = tanner
            .check_neighbors
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(0);
        Ok(Decoder {
            path,
            cfg,
            check_off,
            edge_var,
            var_off,
            var_edge,
            q: vec![0.0; edges],
            r: vec![0.0; edges],
            posterior: vec![0.0; n],
            scratch: Vec::with_capacity(max_deg),
        })
    }

    pub fn path(&self) -> &DecodePath {
        self.path
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    /// Posterior LLRs after the most recent decode (channel LLRs plus
    /// all check messages per variable).
    pub fn posterior_llrs(&self) -> &[f64] {
        &self.posterior
    }

    fn validate_input(&self, llrs: &[f64]) -> Result<(), DecodeError> {
        if llrs.len() != self.path.n() {
            return Err(DecodeError::Dimension {
                expected: self.path.n(),
                actual: llrs.len(),
            });
        }
        if let Some(index) = llrs.iter().position(|x| !x.is_finite()) {
            return Err(DecodeError::NonFinite { index });
        }
        Ok(())
    }

    fn syndrome_ok(&self, hard: &BitVector) -> bool {
        let checks = self.check_off.len() - 1;
        (0..checks).all(|c| {
            let span = self.check_off[c] as usize..self.check_off[c + 1] as usize;
            !self.edge_var[span]
                .iter()
                .fold(false, |p, &v| p ^ hard.get(v as usize))
        })
    }

    fn run(
        &mut self,
        llrs: &[f64],
        iterations: u32,
        early_stop: bool,
    ) -> Result<DecodeOutcome, DecodeError> {
        self.validate_input(llrs)?;
        let n = self.path.n();
        self.posterior.copy_from_slice(llrs);
        let mut hard = hard_decide(llrs);
        if early_stop && self.syndrome_ok(&hard) {
            let valid_in_base = self.path.valid_in_base(&hard);
            return Ok(DecodeOutcome {
                hard_decision: hard,
                iterations: 0,
                converged: true,
                valid_in_base,
            });
        }
        for (e, &v) in self.edge_var.iter().enumerate() {
            self.q[e] = llrs[v as usize];
        }
        let checks = self.check_off.len() - 1;
        let clip = self.cfg.llr_clip;
        let mut completed = 0u32;
        let mut converged = false;
        while completed < iterations {
            for c in 0..checks {
                let span = self.check_off[c] as usize..self.check_off[c + 1] as usize;
                let (q, r) = (&self.q[span.clone()], &mut self.r[span]);
                cn_update_into(
                    q,
                    r,
                    self.cfg.kind,
                    self.cfg.normalization,
                    clip,
                    &mut self.scratch,
                );
            }
            for v in 0..n {
                let span = self.var_off[v] as usize..self.var_off[v + 1] as usize;
                let mut total = llrs[v];
                for &e in &self.var_edge[span.clone()] {
                    total += self.r[e as usize];
                }
                self.posterior[v] = total;
                hard.set(v, total < 0.0);
                for &e in &self.var_edge[span] {
                    self.q[e as usize] = (total - self.r[e as usize]).clamp(-clip, clip);
                }
            }
            completed += 1;
            if early_stop && self.syndrome_ok(&hard) {
                converged = true;
                break;
            }
        }
        if !early_stop {
            converged = self.syndrome_ok(&hard);
        }
        let valid_in_base = if converged && self.path.is_subcode() {
            true
        } else {
            self.path.valid_in_base(&hard)
        };
        Ok(DecodeOutcome {
            hard_decision: hard,
            iterations: completed,
            converged,
            valid_in_base,
        })
    }

    /// Decode with syndrome-based early stopping, up to the configured
    /// iteration budget.
    pub fn decode(&mut self, llrs: &[f64]) -> Result<DecodeOutcome, DecodeError> {
        let imax = self.cfg.max_iterations;
        self.run(llrs, imax, true)
    }

    /// Run exactly `iterations` iterations with no early stop; used to
    /// read converged soft outputs, e.g. on cycle-free graphs.
    pub fn decode_fixed_iterations(
        &mut self,
        llrs: &[f64],
        iterations: u32,
    ) -> Result<DecodeOutcome, DecodeError> {
        self.run(llrs, iterations, false)
    }
}

/// One-shot decode with a scratch decoder.
pub fn decode(
    path: &DecodePath,
    llrs: &[f64],
    cfg: &DecoderConfig,
) -> Result<DecodeOutcome, DecodeError> {
    Decoder::new(path, *cfg)?.decode(llrs)
}
