//! Construction and selection of auxiliary decoding paths: Bernoulli
//! row sampling, 4-cycle-free row generation, linear-covering triples,
//! candidate pools (including the row-removal baseline), error-frame
//! coverage evaluation, and greedy maximum-coverage selection.
//!
//! A *linear covering* is a set of subcodes whose union is the whole
//! code. Appending `h1`, `h2` and `h3 = h1 xor h2` always yields one:
//! any codeword with `h1 x = h2 x = 1` necessarily has `h3 x = 0`.

use std::collections::HashSet;
use std::sync::Arc;

use rand::distr::Bernoulli;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bpdec::{Decoder, DecoderConfig};
use crate::code::{induce_subcode, CodeModel, DecodePath, SubcodeSpec};
use crate::gf2::{self, BitVector};
use crate::simlab::ErrorFrameSet;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("feasible set exhausted at weight {reached} of {wanted}")]
    RowGenFailure { reached: usize, wanted: usize },
    #[error("gave up after {0} attempts")]
    AttemptsExhausted(usize),
    #[error("enumeration refused: k = {0} exceeds the 2^24 guard")]
    EnumerationTooLarge(usize),
    #[error("row-removal pool needs m >= 2, matrix has {0} rows")]
    TooFewRows(usize),
    #[error("no coverage records given")]
    EmptyRecords,
    #[error("bad pool/records file: {0}")]
    BadFile(String),
    #[error("file references hash {expected} but the supplied input hashes to {actual}")]
    HashMismatch { expected: String, actual: String },
    #[error("candidate construction: {0}")]
    Code(#[from] crate::code::CodeError),
    #[error(transparent)]
    Decode(#[from] crate::bpdec::DecodeError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// Row sampling
// ---------------------------------------------------------------------------

/// A non-zero length-`n` row with iid Bernoulli(p) bits, conditioned on
/// being non-zero by rejection resampling.
pub fn sample_bernoulli_row<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> BitVector {
    assert!(p > 0.0 && p < 1.0, "p must lie in (0, 1)");
    let dist = Bernoulli::new(p).expect("valid probability");
    loop {
        let row = BitVector::from_bits((0..n).map(|_| rng.sample(dist)));
        if !row.is_zero() {
            return row;
        }
    }
}

/// One step of the 4-cycle-free row generator: draw a weight-`d_c` row
/// whose support shares at most one column with every base check.
///
/// The feasible set starts as all columns (or `feasible_init` for
/// linear-covering continuation). Each chosen index is uniform over the
/// current feasible set; choosing `j` removes `j` itself and every
/// column sharing a check with `j`. Fails when the feasible set runs
/// dry before the weight target; the caller retries. On success the
/// remaining feasible set is returned for continuation.
pub fn gen_cycle_free_row<R: Rng + ?Sized>(
    model: &CodeModel,
    d_c: usize,
    feasible_init: Option<&[usize]>,
    rng: &mut R,
) -> Result<(BitVector, Vec<usize>), EnsembleError> {
    let n = model.n();
    if d_c < 1 || d_c > n {
        return Err(EnsembleError::InvalidParam(format!(
            "row weight {d_c} outside 1..={n}"
        )));
    }
    let mut feasible: Vec<usize> = match feasible_init {
        Some(f) => f.to_vec(),
        None => (0..n).collect(),
    };
    let tanner = model.tanner();
    let mut row = BitVector::zeros(n);
    let mut removed = vec![false; n];
    for weight in 0..d_c {
        if feasible.is_empty() {
            return Err(EnsembleError::RowGenFailure {
                reached: weight,
                wanted: d_c,
            });
        }
        let j = feasible[rng.random_range(0..feasible.len())];
        row.set(j, true);
        // Drop j and every column that would close a 4-cycle with it. A
        // column with no checks still drops j itself.
        removed[j] = true;
        for &check in &tanner.var_neighbors[j] {
            for &col in &tanner.check_neighbors[check as usize] {
                removed[col as usize] = true;
            }
        }
        feasible.retain(|&c| !removed[c]);
    }
    Ok((row, feasible))
}

/// How auxiliary rows are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SampleMode {
    Bernoulli { p: f64 },
    CycleFree { d_c: usize },
}

/// A linear-covering triple `(h1, h2, h3 = h1 xor h2)` with `h1`, `h2`
/// independent of the base PCM rows (resampled until they are).
///
/// In cycle-free mode `h2` continues from the feasible set left by
/// `h1`, so the supports are disjoint, `h3` has weight `2 d_c`, and no
/// appended row adds a 4-cycle.
pub fn make_lc_triple<R: Rng + ?Sized>(
    model: &CodeModel,
    mode: SampleMode,
    rng: &mut R,
    max_attempts: usize,
) -> Result<[BitVector; 3], EnsembleError> {
    let pcm = model.pcm();
    let independent = |h: &BitVector| !gf2::in_rowspace(pcm, h).expect("row length n");
    let mut attempts = 0usize;
    let spend = |attempts: &mut usize| -> Result<(), EnsembleError> {
        *attempts += 1;
        if *attempts > max_attempts {
            Err(EnsembleError::AttemptsExhausted(max_attempts))
        } else {
            Ok(())
        }
    };
    match mode {
        SampleMode::Bernoulli { p } => {
            let h1 = loop {
                spend(&mut attempts)?;
                let h = sample_bernoulli_row(model.n(), p, rng);
                if independent(&h) {
                    break h;
                }
            };
            let h2 = loop {
                spend(&mut attempts)?;
                let h = sample_bernoulli_row(model.n(), p, rng);
                if independent(&h) && h != h1 {
                    break h;
                }
            };
            let h3 = h1.xor(&h2);
            Ok([h1, h2, h3])
        }
        SampleMode::CycleFree { d_c } => loop {
            spend(&mut attempts)?;
            let Ok((h1, f_old)) = gen_cycle_free_row(model, d_c, None, rng) else {
                continue;
            };
            if !independent(&h1) {
                continue;
            }
            let Ok((h2, _)) = gen_cycle_free_row(model, d_c, Some(&f_old), rng) else {
                continue;
            };
            if !independent(&h2) {
                continue;
            }
            let h3 = h1.xor(&h2);
            return Ok([h1, h2, h3]);
        },
    }
}

// ---------------------------------------------------------------------------
// Linear-covering verification
// ---------------------------------------------------------------------------

/// How [`verify_lc`] checks coverage.
#[derive(Debug, Clone, Copy)]
pub enum LcMethod {
    /// Exhaustive over all 2^k codewords; refused above k = 24.
    Enumerate,
    /// Monte-Carlo over the given number of random codewords.
    Sample(usize),
}

/// Result of a covering check.
#[derive(Debug, Clone, Copy)]
pub struct LcReport {
    /// No uncovered codeword found (exact under enumeration).
    pub is_cover: bool,
    /// Fraction of checked codewords in none of the subcodes.
    pub uncovered_fraction: f64,
    /// Number of codewords checked.
    pub checked: u64,
}

/// Check whether the union of the given subcodes is the whole base
/// code.
pub fn verify_lc<R: Rng + ?Sized>(
    model: &CodeModel,
    specs: &[SubcodeSpec],
    method: LcMethod,
    rng: &mut R,
) -> Result<LcReport, EnsembleError> {
    if specs.is_empty() {
        return Err(EnsembleError::InvalidParam("no subcodes given".into()));
    }
    // Membership in a subcode of a word already in C only needs the
    // appended rows to be orthogonal to it.
    let covered = |x: &BitVector| {
        specs.iter().any(|spec| {
            spec.appended_rows()
                .iter()
                .all(|row| !row.dot(x).expect("length n"))
        })
    };
    match method {
        LcMethod::Enumerate => {
            let k = model.k();
            if k > 24 {
                return Err(EnsembleError::EnumerationTooLarge(k));
            }
            let gen = model.generator();
            let total = 1u64 << k;
            let mut x = BitVector::zeros(model.n());
            let mut uncovered = 0u64;
            // Gray-code walk: message i ^ (i >> 1) flips one generator
            // row per step.
            if !covered(&x) {
                uncovered += 1;
            }
            for i in 1..total {
                let bit = i.trailing_zeros() as usize;
                x.xor_assign(&gen.row(bit));
                if !covered(&x) {
                    uncovered += 1;
                }
            }
            Ok(LcReport {
                is_cover: uncovered == 0,
                uncovered_fraction: uncovered as f64 / total as f64,
                checked: total,
            })
        }
        LcMethod::Sample(count) => {
            if count == 0 {
                return Err(EnsembleError::InvalidParam("sample count 0".into()));
            }
            let mut uncovered = 0u64;
            for _ in 0..count {
                let x = model.random_codeword(rng);
                if !covered(&x) {
                    uncovered += 1;
                }
            }
            Ok(LcReport {
                is_cover: uncovered == 0,
                uncovered_fraction: uncovered as f64 / count as f64,
                checked: count as u64,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Candidate pools
// ---------------------------------------------------------------------------

/// How a pool was generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "provenance")]
pub enum Provenance {
    Bernoulli { p: f64 },
    CycleFree { d_c: usize },
    LcTriple { p: Option<f64>, d_c: Option<usize> },
    RowRemoved,
}

impl Provenance {
    fn header_text(&self) -> String {
        match self {
            Provenance::Bernoulli { p } => format!("bernoulli p={p}"),
            Provenance::CycleFree { d_c } => format!("cycle_free dc={d_c}"),
            Provenance::LcTriple { p: Some(p), .. } => format!("lc_triple p={p}"),
            Provenance::LcTriple { d_c: Some(d_c), .. } => format!("lc_triple dc={d_c}"),
            Provenance::LcTriple { .. } => "lc_triple".to_owned(),
            Provenance::RowRemoved => "row_removed".to_owned(),
        }
    }

    fn from_header_text(text: &str) -> Result<Self, EnsembleError> {
        let mut parts = text.split_whitespace();
        let kind = parts.next().unwrap_or("");
        let param = parts.next();
        let parse_p = |s: &str| -> Result<f64, EnsembleError> {
            s.strip_prefix("p=")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| EnsembleError::BadFile(format!("bad provenance param {s:?}")))
        };
        let parse_dc = |s: &str| -> Result<usize, EnsembleError> {
            s.strip_prefix("dc=")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| EnsembleError::BadFile(format!("bad provenance param {s:?}")))
        };
        match (kind, param) {
            ("bernoulli", Some(s)) => Ok(Provenance::Bernoulli { p: parse_p(s)? }),
            ("cycle_free", Some(s)) => Ok(Provenance::CycleFree { d_c: parse_dc(s)? }),
            ("lc_triple", Some(s)) if s.starts_with("p=") => Ok(Provenance::LcTriple {
                p: Some(parse_p(s)?),
                d_c: None,
            }),
            ("lc_triple", Some(s)) => Ok(Provenance::LcTriple {
                p: None,
                d_c: Some(parse_dc(s)?),
            }),
            ("row_removed", None) => Ok(Provenance::RowRemoved),
            _ => Err(EnsembleError::BadFile(format!(
                "unknown provenance {text:?}"
            ))),
        }
    }
}

/// One pool entry: either rows to append or a base row to remove.
#[derive(Debug, Clone, PartialEq)]
pub enum Candidate {
    Appended(Vec<BitVector>),
    RowRemoved(usize),
}

/// A pool of candidate decoding paths over one base code.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    base: Arc<CodeModel>,
    provenance: Provenance,
    candidates: Vec<Candidate>,
}

impl CandidatePool {
    pub fn base(&self) -> &Arc<CodeModel> {
        &self.base
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Deterministic label for candidate `index`.
    pub fn label(&self, index: usize) -> String {
        match &self.candidates[index] {
            Candidate::Appended(_) => format!("c{index}"),
            Candidate::RowRemoved(row) => format!("rm{row}"),
        }
    }

    /// Build the decode path for candidate `index`.
    pub fn path(&self, index: usize) -> Result<DecodePath, EnsembleError> {
        match &self.candidates[index] {
            Candidate::Appended(rows) => {
                let spec = induce_subcode(&self.base, rows.clone(), self.label(index))?;
                Ok(DecodePath::from_subcode(&spec))
            }
            Candidate::RowRemoved(row) => {
                Ok(DecodePath::row_removed(&self.base, *row, self.label(index))?)
            }
        }
    }

    /// The subcode specs of all appended-row candidates (used by the
    /// covering verifier; row-removal candidates are ambient codes, not
    /// subcodes, and are skipped).
    pub fn subcode_specs(
        &self,
        indices: &[usize],
    ) -> Result<Vec<SubcodeSpec>, EnsembleError> {
        indices
            .iter()
            .filter_map(|&i| match &self.candidates[i] {
                Candidate::Appended(rows) => Some(
                    induce_subcode(&self.base, rows.clone(), self.label(i))
                        .map_err(EnsembleError::from),
                ),
                Candidate::RowRemoved(_) => None,
            })
            .collect()
    }

    /// Text serialization: a header naming the base code hash,
    /// provenance and count, then one line per candidate holding either
    /// hex-packed appended rows or a removed-row index.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# sced pool v1\n");
        out.push_str(&format!("code_hash: {}\n", self.base.content_hash_hex()));
        out.push_str(&format!("n: {}\n", self.base.n()));
        out.push_str(&format!("provenance: {}\n", self.provenance.header_text()));
        out.push_str(&format!("candidates: {}\n", self.candidates.len()));
        out.push_str("---\n");
        for cand in &self.candidates {
            match cand {
                Candidate::Appended(rows) => {
                    let line: Vec<String> = rows.iter().map(|r| r.to_hex()).collect();
                    out.push_str(&line.join(" "));
                }
                Candidate::RowRemoved(row) => out.push_str(&row.to_string()),
            }
            out.push('\n');
        }
        out
    }

    /// Parse [`to_text`](Self::to_text) output against the base model
    /// it was written for; the stored code hash must match.
    pub fn from_text(text: &str, base: &Arc<CodeModel>) -> Result<Self, EnsembleError> {
        let mut lines = text.lines();
        let magic = lines.next().unwrap_or("");
        if magic.trim() != "# sced pool v1" {
            return Err(EnsembleError::BadFile("missing pool magic line".into()));
        }
        let mut code_hash = None;
        let mut n = None;
        let mut provenance = None;
        let mut count = None;
        for line in lines.by_ref() {
            let line = line.trim();
            if line == "---" {
                break;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| EnsembleError::BadFile(format!("bad header line {line:?}")))?;
            let value = value.trim();
            match key.trim() {
                "code_hash" => code_hash = Some(value.to_owned()),
                "n" => {
                    n = Some(value.parse::<usize>().map_err(|_| {
                        EnsembleError::BadFile(format!("bad n {value:?}"))
                    })?)
                }
                "provenance" => provenance = Some(Provenance::from_header_text(value)?),
                "candidates" => {
                    count = Some(value.parse::<usize>().map_err(|_| {
                        EnsembleError::BadFile(format!("bad count {value:?}"))
                    })?)
                }
                other => {
                    return Err(EnsembleError::BadFile(format!(
                        "unknown header key {other:?}"
                    )))
                }
            }
        }
        let code_hash =
            code_hash.ok_or_else(|| EnsembleError::BadFile("missing code_hash".into()))?;
        let actual = base.content_hash_hex();
        if code_hash != actual {
            return Err(EnsembleError::HashMismatch {
                expected: code_hash,
                actual,
            });
        }
        let n = n.ok_or_else(|| EnsembleError::BadFile("missing n".into()))?;
        if n != base.n() {
            return Err(EnsembleError::BadFile(format!(
                "pool n = {n} but base n = {}",
                base.n()
            )));
        }
        let provenance =
            provenance.ok_or_else(|| EnsembleError::BadFile("missing provenance".into()))?;
        let count = count.ok_or_else(|| EnsembleError::BadFile("missing candidates".into()))?;
        let mut candidates = Vec::with_capacity(count);
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if provenance == Provenance::RowRemoved {
                let row = line.parse::<usize>().map_err(|_| {
                    EnsembleError::BadFile(format!("bad removed-row index {line:?}"))
                })?;
                candidates.push(Candidate::RowRemoved(row));
            } else {
                let rows: Option<Vec<BitVector>> = line
                    .split_whitespace()
                    .map(|hex| BitVector::from_hex(n, hex))
                    .collect();
                let rows = rows
                    .ok_or_else(|| EnsembleError::BadFile(format!("bad hex row in {line:?}")))?;
                candidates.push(Candidate::Appended(rows));
            }
        }
        if candidates.len() != count {
            return Err(EnsembleError::BadFile(format!(
                "header declares {count} candidates but file holds {}",
                candidates.len()
            )));
        }
        Ok(CandidatePool {
            base: Arc::clone(base),
            provenance,
            candidates,
        })
    }
}

fn dedup_key(rows: &[BitVector]) -> Vec<u8> {
    let mut key = Vec::new();
    for r in rows {
        key.extend_from_slice(&r.to_bytes());
        key.push(0xFF);
    }
    key
}

/// Generate a pool of `count` candidates with the given provenance.
/// Candidates are deduplicated by appended-row content; duplicates are
/// resampled within the attempt budget.
pub fn build_pool<R: Rng + ?Sized>(
    model: &Arc<CodeModel>,
    provenance: Provenance,
    count: usize,
    rng: &mut R,
    max_attempts: usize,
) -> Result<CandidatePool, EnsembleError> {
    if count == 0 {
        return Err(EnsembleError::InvalidParam("empty pool requested".into()));
    }
    if provenance == Provenance::RowRemoved {
        return build_rae_pool(model);
    }
    let mut candidates: Vec<Candidate> = Vec::with_capacity(count);
    let mut seen: HashSet<Vec<u8>> = HashSet::with_capacity(count);
    let mut attempts = 0usize;
    let push_unique =
        |rows: Vec<BitVector>, candidates: &mut Vec<Candidate>, seen: &mut HashSet<Vec<u8>>| {
            if seen.insert(dedup_key(&rows)) {
                candidates.push(Candidate::Appended(rows));
            }
        };
    while candidates.len() < count {
        attempts += 1;
        if attempts > max_attempts {
            return Err(EnsembleError::AttemptsExhausted(max_attempts));
        }
        match provenance {
            Provenance::Bernoulli { p } => {
                let row = sample_bernoulli_row(model.n(), p, rng);
                push_unique(vec![row], &mut candidates, &mut seen);
            }
            Provenance::CycleFree { d_c } => {
                if let Ok((row, _)) = gen_cycle_free_row(model, d_c, None, rng) {
                    push_unique(vec![row], &mut candidates, &mut seen);
                }
            }
            Provenance::LcTriple { p, d_c } => {
                let mode = match (p, d_c) {
                    (Some(p), _) => SampleMode::Bernoulli { p },
                    (None, Some(d_c)) => SampleMode::CycleFree { d_c },
                    (None, None) => {
                        return Err(EnsembleError::InvalidParam(
                            "lc_triple provenance needs p or d_c".into(),
                        ))
                    }
                };
                if let Ok(triple) = make_lc_triple(model, mode, rng, max_attempts) {
                    for row in triple {
                        push_unique(vec![row], &mut candidates, &mut seen);
                    }
                }
            }
            Provenance::RowRemoved => unreachable!("handled above"),
        }
    }
    candidates.truncate(count);
    Ok(CandidatePool {
        base: Arc::clone(model),
        provenance,
        candidates,
    })
}

/// The row-automorphism baseline pool: one candidate per base PCM row,
/// with that row removed. Every candidate's code contains the base
/// code.
pub fn build_rae_pool(model: &Arc<CodeModel>) -> Result<CandidatePool, EnsembleError> {
    if model.m() < 2 {
        return Err(EnsembleError::TooFewRows(model.m()));
    }
    Ok(CandidatePool {
        base: Arc::clone(model),
        provenance: Provenance::RowRemoved,
        candidates: (0..model.m()).map(Candidate::RowRemoved).collect(),
    })
}

// ---------------------------------------------------------------------------
// Coverage evaluation and selection
// ---------------------------------------------------------------------------

/// Which stored error frames one candidate decodes.
#[derive(Debug, Clone)]
pub struct CoverageRecord {
    pub candidate_index: usize,
    /// Bitmap over the frame set: bit j set iff the candidate's decoder
    /// output equals the stored codeword of frame j exactly.
    pub decoded: BitVector,
}

impl CoverageRecord {
    pub fn decoded_count(&self) -> usize {
        self.decoded.weight()
    }
}

/// Decode every stored frame with every candidate path.
///
/// Frame `j` enters a candidate's record iff the full n-bit hard
/// decision equals the stored transmitted codeword. Candidates are
/// evaluated in parallel; records come back in candidate order.
pub fn evaluate_candidates(
    pool: &CandidatePool,
    frames: &ErrorFrameSet,
    cfg: &DecoderConfig,
) -> Result<Vec<CoverageRecord>, EnsembleError> {
    if frames.is_empty() {
        return Err(EnsembleError::InvalidParam("empty frame set".into()));
    }
    if frames.n() != pool.base.n() {
        return Err(EnsembleError::InvalidParam(format!(
            "frame length {} does not match code n = {}",
            frames.n(),
            pool.base.n()
        )));
    }
    (0..pool.len())
        .into_par_iter()
        .map(|index| {
            let path = pool.path(index)?;
            let mut dec = Decoder::new(&path, *cfg)?;
            let mut decoded = BitVector::zeros(frames.len());
            let mut llrs = vec![0.0f64; frames.n()];
            for (j, frame) in frames.frames.iter().enumerate() {
                for (dst, &src) in llrs.iter_mut().zip(&frame.llrs) {
                    *dst = src as f64;
                }
                let out = dec.decode(&llrs)?;
                if out.hard_decision == frame.codeword {
                    decoded.set(j, true);
                }
            }
            Ok(CoverageRecord {
                candidate_index: index,
                decoded,
            })
        })
        .collect()
}

/// A chosen set of auxiliary paths with its coverage.
#[derive(Debug, Clone)]
pub struct EnsembleSelection {
    /// Chosen candidate indices in pick order; may be shorter than the
    /// request when additional picks stop helping.
    pub chosen: Vec<usize>,
    /// Union bitmap over the frame set.
    pub covered: BitVector,
    /// covered / N.
    pub relative_coverage: f64,
}

/// Greedy maximum coverage: repeatedly pick the candidate decoding the
/// most not-yet-covered frames, ties broken by lowest candidate index.
/// Stops early once no candidate adds coverage.
pub fn greedy_max_coverage(
    records: &[CoverageRecord],
    k_tilde: usize,
) -> Result<EnsembleSelection, EnsembleError> {
    if records.is_empty() {
        return Err(EnsembleError::EmptyRecords);
    }
    if k_tilde == 0 {
        return Err(EnsembleError::InvalidParam("K~ must be >= 1".into()));
    }
    let n_frames = records[0].decoded.len();
    let mut covered = BitVector::zeros(n_frames);
    let mut chosen = Vec::new();
    let mut used = vec![false; records.len()];
    for _ in 0..k_tilde {
        let mut best: Option<(usize, usize)> = None;
        for (i, rec) in records.iter().enumerate() {
            if used[i] {
                continue;
            }
            let gain = rec.decoded.count_and_not(&covered);
            if best.map_or(true, |(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        match best {
            Some((i, gain)) if gain > 0 => {
                used[i] = true;
                chosen.push(records[i].candidate_index);
                covered.or_assign(&records[i].decoded);
            }
            _ => break,
        }
    }
    let relative_coverage = covered.weight() as f64 / n_frames as f64;
    Ok(EnsembleSelection {
        chosen,
        covered,
        relative_coverage,
    })
}

/// Relative coverage of a specific candidate subset: the fraction of
/// the N frames decoded by at least one chosen candidate.
pub fn relative_coverage(records: &[CoverageRecord], chosen: &[usize], n_frames: usize) -> f64 {
    assert!(n_frames >= 1);
    let mut covered = BitVector::zeros(n_frames);
    for &c in chosen {
        let rec = records
            .iter()
            .find(|r| r.candidate_index == c)
            .expect("chosen index has a record");
        covered.or_assign(&rec.decoded);
    }
    covered.weight() as f64 / n_frames as f64
}

/// Greedy coverage as a function of the ensemble size: one (K~,
/// coverage) points per pick, up to the size where coverage saturates.
pub fn coverage_curve(records: &[CoverageRecord]) -> Result<Vec<(usize, f64)>, EnsembleError> {
    let full = greedy_max_coverage(records, records.len())?;
    let n_frames = records[0].decoded.len() as f64;
    let mut covered = BitVector::zeros(records[0].decoded.len());
    let mut curve = Vec::with_capacity(full.chosen.len());
    for (step, &c) in full.chosen.iter().enumerate() {
        let rec = records
            .iter()
            .find(|r| r.candidate_index == c)
            .expect("chosen index has a record");
        covered.or_assign(&rec.decoded);
        curve.push((step + 1, covered.weight() as f64 / n_frames));
    }
    Ok(curve)
}

// ---------------------------------------------------------------------------
// Record and selection serialization
// ---------------------------------------------------------------------------

/// Coverage records as text: frame-set hash, frame count and candidate
/// count, then one hex bitmap per candidate in index order.
pub fn records_to_text(records: &[CoverageRecord], frames: &ErrorFrameSet) -> String {
    let mut out = String::new();
    out.push_str("# sced coverage v1\n");
    out.push_str(&format!("frames_hash: {}\n", frames.content_hash_hex()));
    out.push_str(&format!("n_frames: {}\n", frames.len()));
    out.push_str(&format!("candidates: {}\n", records.len()));
    out.push_str("---\n");
    for rec in records {
        out.push_str(&rec.decoded.to_hex());
        out.push('\n');
    }
    out
}

/// Parse [`records_to_text`] output. Returns the stored frame-set hash
/// alongside the records so callers can pin them to a frame set.
pub fn records_from_text(
    text: &str,
) -> Result<(String, usize, Vec<CoverageRecord>), EnsembleError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("# sced coverage v1") {
        return Err(EnsembleError::BadFile("missing coverage magic line".into()));
    }
    let mut frames_hash = None;
    let mut n_frames = None;
    let mut count = None;
    for line in lines.by_ref() {
        let line = line.trim();
        if line == "---" {
            break;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| EnsembleError::BadFile(format!("bad header line {line:?}")))?;
        let value = value.trim();
        match key.trim() {
            "frames_hash" => frames_hash = Some(value.to_owned()),
            "n_frames" => {
                n_frames = Some(value.parse::<usize>().map_err(|_| {
                    EnsembleError::BadFile(format!("bad n_frames {value:?}"))
                })?)
            }
            "candidates" => {
                count = Some(value.parse::<usize>().map_err(|_| {
                    EnsembleError::BadFile(format!("bad candidates {value:?}"))
                })?)
            }
            other => {
                return Err(EnsembleError::BadFile(format!(
                    "unknown header key {other:?}"
                )))
            }
        }
    }
    let frames_hash =
        frames_hash.ok_or_else(|| EnsembleError::BadFile("missing frames_hash".into()))?;
    let n_frames = n_frames.ok_or_else(|| EnsembleError::BadFile("missing n_frames".into()))?;
    let count = count.ok_or_else(|| EnsembleError::BadFile("missing candidates".into()))?;
    let mut records = Vec::with_capacity(count);
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let decoded = BitVector::from_hex(n_frames, line)
            .ok_or_else(|| EnsembleError::BadFile(format!("bad bitmap {line:?}")))?;
        records.push(CoverageRecord {
            candidate_index: records.len(),
            decoded,
        });
    }
    if records.len() != count {
        return Err(EnsembleError::BadFile(format!(
            "header declares {count} records but file holds {}",
            records.len()
        )));
    }
    Ok((frames_hash, n_frames, records))
}

/// Serializable selection artifact tying chosen candidates to the pool
/// and frame set they came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionFile {
    pub pool_hash: String,
    pub frames_hash: String,
    pub n_frames: usize,
    pub k_tilde_requested: usize,
    pub chosen: Vec<usize>,
    pub covered_count: usize,
    pub relative_coverage: f64,
}

impl SelectionFile {
    pub fn new(
        selection: &EnsembleSelection,
        pool: &CandidatePool,
        frames: &ErrorFrameSet,
        k_tilde_requested: usize,
    ) -> Self {
        SelectionFile {
            pool_hash: pool_hash_hex(pool),
            frames_hash: frames.content_hash_hex(),
            n_frames: frames.len(),
            k_tilde_requested,
            chosen: selection.chosen.clone(),
            covered_count: selection.covered.weight(),
            relative_coverage: selection.relative_coverage,
        }
    }
}

/// SHA-256 over the pool's text form.
pub fn pool_hash_hex(pool: &CandidatePool) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(pool.to_text().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
