//! Code models: parity-check matrix ingestion, Tanner adjacency, subcode
//! induction by row appending, codeword sampling and membership.
//!
//! A [`CodeModel`] owns a PCM together with derived quantities (rank,
//! dimension, generator, puncture mask, Tanner adjacency). A
//! [`SubcodeSpec`] is the base model plus an ordered list of appended
//! rows; stacking them yields the effective PCM of one decoding path.
//! [`DecodePath`] is the graph carrier the decoder runs on and also
//! covers ambient paths obtained by *removing* a row of the base PCM.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gf2::{self, BitMatrix, BitVector};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("alist parse error at line {line}: {message}")]
    AlistParse { line: usize, message: String },
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("appended row {index} is zero; a zero row has no effect and is rejected")]
    ZeroRow { index: usize },
    #[error("appended row list is empty")]
    NoRows,
    #[error("invalid puncture mask: {0}")]
    InvalidMask(String),
    #[error("row removal needs at least 2 rows, matrix has {0}")]
    TooFewRows(usize),
}

/// Check-node and variable-node adjacency of a PCM.
#[derive(Debug, Clone)]
pub struct Tanner {
    /// Column indices per row (check node neighbors), ascending.
    pub check_neighbors: Vec<Vec<u32>>,
    /// Row indices per column (variable node neighbors), ascending.
    pub var_neighbors: Vec<Vec<u32>>,
}

impl Tanner {
    pub fn from_pcm(h: &BitMatrix) -> Self {
        let mut check_neighbors = vec![Vec::new(); h.rows()];
        let mut var_neighbors = vec![Vec::new(); h.cols()];
        for i in 0..h.rows() {
            for j in 0..h.cols() {
                if h.get(i, j) {
                    check_neighbors[i].push(j as u32);
                    var_neighbors[j].push(i as u32);
                }
            }
        }
        Tanner {
            check_neighbors,
            var_neighbors,
        }
    }
}

/// A binary linear code defined by a parity-check matrix.
#[derive(Debug, Clone)]
pub struct CodeModel {
    pcm: BitMatrix,
    rank: usize,
    generator: BitMatrix,
    puncture_mask: BitVector,
    tanner: Tanner,
}

impl CodeModel {
    /// Build the model from a PCM: computes rank, dimension, a generator
    /// from the null space, and the Tanner adjacency. The puncture mask
    /// starts all-zero.
    pub fn from_pcm(pcm: BitMatrix) -> Self {
        let rank = gf2::rank(&pcm);
        let generator = gf2::nullspace_basis(&pcm);
        let puncture_mask = BitVector::zeros(pcm.cols());
        let tanner = Tanner::from_pcm(&pcm);
        CodeModel {
            pcm,
            rank,
            generator,
            puncture_mask,
            tanner,
        }
    }

    pub fn pcm(&self) -> &BitMatrix {
        &self.pcm
    }

    /// Block length n.
    pub fn n(&self) -> usize {
        self.pcm.cols()
    }

    /// PCM row count m (not necessarily the rank).
    pub fn m(&self) -> usize {
        self.pcm.rows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Code dimension k = n - rank.
    pub fn k(&self) -> usize {
        self.n() - self.rank
    }

    /// Generator matrix (k x n) whose rows span the code.
    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    pub fn puncture_mask(&self) -> &BitVector {
        &self.puncture_mask
    }

    /// Number of transmitted bits: n minus punctured positions.
    pub fn n_tx(&self) -> usize {
        self.n() - self.puncture_mask.weight()
    }

    /// Code rate used for SNR conversion: k / n_tx.
    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n_tx() as f64
    }

    pub fn tanner(&self) -> &Tanner {
        &self.tanner
    }

    /// Return a copy with the puncture mask installed. The mask must have
    /// length n and leave at least k transmitted bits (rate <= 1).
    pub fn with_puncture_mask(&self, mask: BitVector) -> Result<CodeModel, CodeError> {
        if mask.len() != self.n() {
            return Err(CodeError::Dimension {
                expected: self.n(),
                actual: mask.len(),
            });
        }
        let n_tx = self.n() - mask.weight();
        if n_tx < self.k() {
            return Err(CodeError::InvalidMask(format!(
                "mask leaves {} transmitted bits but k = {} (rate > 1)",
                n_tx,
                self.k()
            )));
        }
        let mut out = self.clone();
        out.puncture_mask = mask;
        Ok(out)
    }

    /// True iff `x` has zero syndrome under the PCM.
    pub fn contains(&self, x: &BitVector) -> Result<bool, CodeError> {
        gf2::syndrome(&self.pcm, x)
            .map(|s| s.is_zero())
            .map_err(|_| CodeError::Dimension {
                expected: self.n(),
                actual: x.len(),
            })
    }

    /// Uniformly random codeword: uniform k-bit message times the
    /// generator. The k message bits are drawn in index order, one
    /// `next_u32` parity each. Returns the zero word when k = 0.
    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVector {
        let mut x = BitVector::zeros(self.n());
        for i in 0..self.k() {
            if rng.next_u32() & 1 == 1 {
                x.xor_assign(&self.generator.row(i));
            }
        }
        x
    }

    /// SHA-256 over the canonical alist text of the PCM plus the puncture
    /// mask line; identifies the code in pool / frame-set headers.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(write_alist(&self.pcm).as_bytes());
        hasher.update(b"mask:");
        hasher.update(self.puncture_mask.to_bytes());
        hasher.finalize().into()
    }

    pub fn content_hash_hex(&self) -> String {
        self.content_hash()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// One decoding path's definition: the base code plus appended rows.
#[derive(Debug, Clone)]
pub struct SubcodeSpec {
    base: Arc<CodeModel>,
    appended_rows: Vec<BitVector>,
    label: String,
}

impl SubcodeSpec {
    pub fn base(&self) -> &Arc<CodeModel> {
        &self.base
    }

    pub fn appended_rows(&self) -> &[BitVector] {
        &self.appended_rows
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The stacked PCM: base rows first, appended rows in order.
    pub fn effective_pcm(&self) -> BitMatrix {
        self.base.pcm.stack(&self.appended_rows)
    }

    /// True iff `x` has zero syndrome under the effective PCM.
    pub fn contains(&self, x: &BitVector) -> Result<bool, CodeError> {
        if x.len() != self.base.n() {
            return Err(CodeError::Dimension {
                expected: self.base.n(),
                actual: x.len(),
            });
        }
        if !self.base.contains(x)? {
            return Ok(false);
        }
        for row in &self.appended_rows {
            if row.dot(x).expect("length checked") {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Stack rows onto the base PCM to induce a subcode. Rows must have
/// length n and be non-zero; the null space of the stacked PCM is a
/// subspace of the base code.
pub fn induce_subcode(
    base: &Arc<CodeModel>,
    rows: Vec<BitVector>,
    label: impl Into<String>,
) -> Result<SubcodeSpec, CodeError> {
    if rows.is_empty() {
        return Err(CodeError::NoRows);
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != base.n() {
            return Err(CodeError::Dimension {
                expected: base.n(),
                actual: row.len(),
            });
        }
        if row.is_zero() {
            return Err(CodeError::ZeroRow { index: i });
        }
    }
    Ok(SubcodeSpec {
        base: Arc::clone(base),
        appended_rows: rows,
        label: label.into(),
    })
}

/// The graph a decoder actually runs on: effective-PCM adjacency plus
/// validity bookkeeping. Subcode paths (base PCM fully contained in the
/// effective PCM) have `converged => valid_in_base`; ambient paths from
/// row removal do not.
#[derive(Debug, Clone)]
pub struct DecodePath {
    base: Arc<CodeModel>,
    tanner: Tanner,
    label: String,
    /// True iff the effective PCM contains every base PCM row.
    subcode: bool,
}

impl DecodePath {
    /// Path 0 of every ensemble: the base code with its original PCM.
    pub fn base_path(base: &Arc<CodeModel>) -> Self {
        DecodePath {
            base: Arc::clone(base),
            tanner: base.tanner.clone(),
            label: "base".to_owned(),
            subcode: true,
        }
    }

    /// Path for an induced subcode: base adjacency plus one check node
    /// per appended row.
    pub fn from_subcode(spec: &SubcodeSpec) -> Self {
        let base = &spec.base;
        let mut tanner = base.tanner.clone();
        for row in &spec.appended_rows {
            let check = tanner.check_neighbors.len() as u32;
            let cols: Vec<u32> = row.support().iter().map(|&j| j as u32).collect();
            for &j in &cols {
                tanner.var_neighbors[j as usize].push(check);
            }
            tanner.check_neighbors.push(cols);
        }
        DecodePath {
            base: Arc::clone(base),
            tanner,
            label: spec.label.clone(),
            subcode: true,
        }
    }

    /// Ambient path: the base PCM with row `index` removed. Its code
    /// contains the base code, so a converged estimate may still be
    /// invalid in the base code.
    pub fn row_removed(
        base: &Arc<CodeModel>,
        index: usize,
        label: impl Into<String>,
    ) -> Result<Self, CodeError> {
        if base.m() < 2 {
            return Err(CodeError::TooFewRows(base.m()));
        }
        if index >= base.m() {
            return Err(CodeError::Dimension {
                expected: base.m(),
                actual: index,
            });
        }
        let pcm = base.pcm.without_row(index);
        Ok(DecodePath {
            base: Arc::clone(base),
            tanner: Tanner::from_pcm(&pcm),
            label: label.into(),
            subcode: false,
        })
    }

    pub fn base(&self) -> &Arc<CodeModel> {
        &self.base
    }

    pub fn tanner(&self) -> &Tanner {
        &self.tanner
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Whether the path decodes a subcode of the base code (as opposed
    /// to an ambient code).
    pub fn is_subcode(&self) -> bool {
        self.subcode
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Syndrome check of `bits` against the path's effective PCM,
    /// evaluated on the adjacency lists.
    pub fn syndrome_ok(&self, bits: &BitVector) -> bool {
        self.tanner.check_neighbors.iter().all(|cols| {
            !cols
                .iter()
                .fold(false, |p, &j| p ^ bits.get(j as usize))
        })
    }

    /// Syndrome check against the base PCM.
    pub fn valid_in_base(&self, bits: &BitVector) -> bool {
        self.base
            .contains(bits)
            .expect("path bits have base length")
    }
}

/// Number of 4-cycles of a PCM: over unordered row pairs, the number of
/// unordered column pairs shared by both rows, i.e. sum of C(s, 2)
/// where s is the support intersection size.
pub fn count_4cycles(h: &BitMatrix) -> u64 {
    let mut total = 0u64;
    for i in 0..h.rows() {
        for j in (i + 1)..h.rows() {
            let shared: u64 = h
                .row_words(i)
                .iter()
                .zip(h.row_words(j))
                .map(|(a, b)| (a & b).count_ones() as u64)
                .sum();
            total += shared * shared.saturating_sub(1) / 2;
        }
    }
    total
}

// ---------------------------------------------------------------------------
// alist I/O (MacKay convention, 1-based indices, zero padding permitted)
// ---------------------------------------------------------------------------

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<usize>, CodeError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| CodeError::AlistParse {
                line: lineno,
                message: format!("expected integer, got {tok:?}"),
            })
        })
        .collect()
}

/// Parse an alist file into a [`CodeModel`]. The puncture mask is left
/// all-zero; install one with [`CodeModel::with_puncture_mask`].
///
/// Layout: `n m`, then `max_col_deg max_row_deg`, then n column degrees,
/// m row degrees, n column index lists, m row index lists. Indices are
/// 1-based; zero entries are padding and are ignored. Column and row
/// lists must describe the same matrix.
pub fn parse_alist(text: &str) -> Result<CodeModel, CodeError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let mut cursor = 0usize;
    let mut next_line = |what: &str| -> Result<(usize, &str), CodeError> {
        let item = lines.get(cursor).copied().ok_or_else(|| CodeError::AlistParse {
            line: lines.last().map_or(1, |(n, _)| *n),
            message: format!("unexpected end of file, expected {what}"),
        })?;
        cursor += 1;
        Ok(item)
    };

    let (lineno, header) = next_line("n m header")?;
    let dims = parse_numbers(header, lineno)?;
    if dims.len() != 2 {
        return Err(CodeError::AlistParse {
            line: lineno,
            message: format!("header must be `n m`, got {} fields", dims.len()),
        });
    }
    let (n, m) = (dims[0], dims[1]);
    if n == 0 || m == 0 {
        return Err(CodeError::AlistParse {
            line: lineno,
            message: "n and m must be positive".into(),
        });
    }

    let (lineno, maxdeg) = next_line("max degrees")?;
    let maxdeg = parse_numbers(maxdeg, lineno)?;
    if maxdeg.len() != 2 {
        return Err(CodeError::AlistParse {
            line: lineno,
            message: "expected `max_col_degree max_row_degree`".into(),
        });
    }

    let (lineno, col_deg_line) = next_line("column degrees")?;
    let col_degrees = parse_numbers(col_deg_line, lineno)?;
    if col_degrees.len() != n {
        return Err(CodeError::AlistParse {
            line: lineno,
            message: format!("expected {n} column degrees, got {}", col_degrees.len()),
        });
    }
    let (lineno, row_deg_line) = next_line("row degrees")?;
    let row_degrees = parse_numbers(row_deg_line, lineno)?;
    if row_degrees.len() != m {
        return Err(CodeError::AlistParse {
            line: lineno,
            message: format!("expected {m} row degrees, got {}", row_degrees.len()),
        });
    }

    let mut from_cols = BitMatrix::zeros(m, n);
    for col in 0..n {
        let (lineno, line) = next_line("column index list")?;
        let entries = parse_numbers(line, lineno)?;
        let nonzero: Vec<usize> = entries.iter().copied().filter(|&e| e != 0).collect();
        if nonzero.len() != col_degrees[col] {
            return Err(CodeError::AlistParse {
                line: lineno,
                message: format!(
                    "column {} lists {} entries but declares degree {}",
                    col + 1,
                    nonzero.len(),
                    col_degrees[col]
                ),
            });
        }
        for e in nonzero {
            if e > m {
                return Err(CodeError::AlistParse {
                    line: lineno,
                    message: format!("row index {e} out of range 1..={m}"),
                });
            }
            from_cols.set(e - 1, col, true);
        }
    }

    let mut from_rows = BitMatrix::zeros(m, n);
    for row in 0..m {
        let (lineno, line) = next_line("row index list")?;
        let entries = parse_numbers(line, lineno)?;
        let nonzero: Vec<usize> = entries.iter().copied().filter(|&e| e != 0).collect();
        if nonzero.len() != row_degrees[row] {
            return Err(CodeError::AlistParse {
                line: lineno,
                message: format!(
                    "row {} lists {} entries but declares degree {}",
                    row + 1,
                    nonzero.len(),
                    row_degrees[row]
                ),
            });
        }
        for e in nonzero {
            if e > n {
                return Err(CodeError::AlistParse {
                    line: lineno,
                    message: format!("column index {e} out of range 1..={n}"),
                });
            }
            from_rows.set(row, e - 1, true);
        }
    }

    if from_cols != from_rows {
        return Err(CodeError::AlistParse {
            line: lines.last().map_or(1, |(n, _)| *n),
            message: "column lists and row lists describe different matrices".into(),
        });
    }

    Ok(CodeModel::from_pcm(from_rows))
}

/// Canonical alist text of a PCM: unpadded index lists, 1-based,
/// newline-terminated. `parse_alist(write_alist(h))` reproduces `h`
/// exactly.
pub fn write_alist(h: &BitMatrix) -> String {
    let (m, n) = (h.rows(), h.cols());
    let col_lists: Vec<Vec<usize>> = (0..n)
        .map(|j| (0..m).filter(|&i| h.get(i, j)).map(|i| i + 1).collect())
        .collect();
    let row_lists: Vec<Vec<usize>> = (0..m)
        .map(|i| (0..n).filter(|&j| h.get(i, j)).map(|j| j + 1).collect())
        .collect();
    let max_col = col_lists.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = row_lists.iter().map(Vec::len).max().unwrap_or(0);

    let mut out = String::new();
    let _ = writeln!(out, "{n} {m}");
    let _ = writeln!(out, "{max_col} {max_row}");
    // Degree-0 lists are written as a single padding 0 so no line is empty.
    let join = |v: &[usize]| {
        if v.is_empty() {
            return "0".to_owned();
        }
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(out, "{}", join(&col_lists.iter().map(Vec::len).collect::<Vec<_>>()));
    let _ = writeln!(out, "{}", join(&row_lists.iter().map(Vec::len).collect::<Vec<_>>()));
    for list in &col_lists {
        let _ = writeln!(out, "{}", join(list));
    }
    for list in &row_lists {
        let _ = writeln!(out, "{}", join(list));
    }
    out
}

/// Read a puncture-mask side file: a single line of n characters in
/// `{0, 1}`, 1 marking a punctured (untransmitted) position.
pub fn parse_puncture_mask(text: &str, n: usize) -> Result<BitVector, CodeError> {
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| CodeError::InvalidMask("empty mask file".into()))?
        .trim();
    let mask = BitVector::from_binary_str(line)
        .ok_or_else(|| CodeError::InvalidMask("mask must contain only 0 and 1".into()))?;
    if mask.len() != n {
        return Err(CodeError::Dimension {
            expected: n,
            actual: mask.len(),
        });
    }
    Ok(mask)
}

/// Render a puncture mask as its side-file line.
pub fn write_puncture_mask(mask: &BitVector) -> String {
    let mut s: String = mask.iter().map(|b| if b { '1' } else { '0' }).collect();
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::rank;

    pub(crate) fn hamming74() -> BitMatrix {
        let rows = ["1010101", "0110011", "0001111"]
            .iter()
            .map(|s| BitVector::from_binary_str(s).unwrap())
            .collect::<Vec<_>>();
        BitMatrix::from_rows(&rows)
    }

    pub(crate) fn hamming_model() -> Arc<CodeModel> {
        Arc::new(CodeModel::from_pcm(hamming74()))
    }

    fn hamming_alist() -> String {
        write_alist(&hamming74())
    }

    /// All 16 codewords of Hamming(7,4) by exhaustive syndrome search.
    fn hamming_codebook() -> Vec<BitVector> {
        let h = hamming74();
        (0u32..(1 << 7))
            .map(|x| BitVector::from_bits((0..7).map(|i| (x >> i) & 1 == 1)))
            .filter(|v| gf2::syndrome(&h, v).unwrap().is_zero())
            .collect()
    }

    #[test]
    fn alist_parse_hamming() {
        let model = parse_alist(&hamming_alist()).unwrap();
        assert_eq!(model.n(), 7);
        assert_eq!(model.m(), 3);
        // Oracle: rank by brute-force span size is 2^3.
        assert_eq!(model.rank(), 3);
        assert_eq!(model.k(), 4);
        assert_eq!(model.pcm(), &hamming74());
    }

    #[test]
    fn alist_zero_padding_ignored() {
        // Same matrix, but column lists padded with 0 entries.
        let text = "7 3\n3 4\n1 1 2 1 2 2 3\n4 4 4\n1 0 0\n2 0 0\n1 2 0\n3 0 0\n1 3 0\n2 3 0\n1 2 3\n1 3 5 7 0\n2 3 6 7 0\n4 5 6 7 0\n";
        let model = parse_alist(text).unwrap();
        assert_eq!(model.pcm(), &hamming74());
    }

    #[test]
    fn alist_inconsistent_lists_rejected() {
        // Row list for check 1 disagrees with the column lists.
        let mut good = hamming_alist();
        good = good.replace("1 3 5 7", "1 3 5 6");
        let err = parse_alist(&good).unwrap_err();
        match err {
            CodeError::AlistParse { message, .. } => {
                assert!(message.contains("different matrices"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn alist_bad_header_has_line_number() {
        let err = parse_alist("7\n").unwrap_err();
        match err {
            CodeError::AlistParse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn alist_round_trip_is_identity() {
        let text = hamming_alist();
        let m1 = parse_alist(&text).unwrap();
        let text2 = write_alist(m1.pcm());
        let m2 = parse_alist(&text2).unwrap();
        assert_eq!(m1.pcm(), m2.pcm());
        assert_eq!(text, text2);
    }

    #[test]
    fn puncture_mask_rates() {
        let model = hamming_model();
        let zero = BitVector::zeros(7);
        let m = model.with_puncture_mask(zero).unwrap();
        assert_eq!(m.rate(), 4.0 / 7.0);
        // One punctured bit: rate k / (n - 1).
        let mask = BitVector::from_binary_str("1000000").unwrap();
        let m = model.with_puncture_mask(mask).unwrap();
        assert_eq!(m.n_tx(), 6);
        assert_eq!(m.rate(), 4.0 / 6.0);
        // Mask of weight n - k + 1 pushes rate above 1.
        let mask = BitVector::from_binary_str("1111000").unwrap();
        assert!(model.with_puncture_mask(mask).is_err());
        // Wrong length.
        assert!(model
            .with_puncture_mask(BitVector::zeros(6))
            .is_err());
    }

    #[test]
    fn count_4cycles_cases() {
        let id = BitMatrix::from_fn(4, 4, |i, j| i == j);
        assert_eq!(count_4cycles(&id), 0);
        let two = BitMatrix::from_rows(&[
            BitVector::from_binary_str("110").unwrap(),
            BitVector::from_binary_str("110").unwrap(),
        ]);
        assert_eq!(count_4cycles(&two), 1);
    }

    #[test]
    fn count_4cycles_matches_bruteforce() {
        let h = BitMatrix::from_rows(&[
            BitVector::from_binary_str("1110").unwrap(),
            BitVector::from_binary_str("0111").unwrap(),
            BitVector::from_binary_str("1011").unwrap(),
        ]);
        // Oracle: exhaustive row-pair / column-pair enumeration.
        let mut expect = 0u64;
        for i in 0..h.rows() {
            for ip in (i + 1)..h.rows() {
                for a in 0..h.cols() {
                    for b in (a + 1)..h.cols() {
                        if h.get(i, a) && h.get(i, b) && h.get(ip, a) && h.get(ip, b) {
                            expect += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count_4cycles(&h), expect);
        assert_eq!(count_4cycles(&h), 3);
    }

    #[test]
    fn induce_subcode_dimensions() {
        let model = hamming_model();
        // A row already in the row space: dimension unchanged.
        let dependent = model.pcm().row(0).xor(&model.pcm().row(1));
        let spec = induce_subcode(&model, vec![dependent], "dep").unwrap();
        assert_eq!(rank(&spec.effective_pcm()), model.rank());
        // An independent row: dimension k - 1.
        let indep = BitVector::from_binary_str("1000000").unwrap();
        assert!(!gf2::in_rowspace(model.pcm(), &indep).unwrap());
        let spec = induce_subcode(&model, vec![indep.clone()], "ind").unwrap();
        assert_eq!(rank(&spec.effective_pcm()), model.rank() + 1);
        // Two independent rows with independent sum: dimension k - 2.
        let second = BitVector::from_binary_str("0100000").unwrap();
        let spec = induce_subcode(&model, vec![indep, second], "two").unwrap();
        assert_eq!(rank(&spec.effective_pcm()), model.rank() + 2);
        // Zero rows are rejected.
        assert!(matches!(
            induce_subcode(&model, vec![BitVector::zeros(7)], "z"),
            Err(CodeError::ZeroRow { index: 0 })
        ));
        assert!(matches!(
            induce_subcode(&model, vec![], "e"),
            Err(CodeError::NoRows)
        ));
    }

    #[test]
    fn subcode_row_in_rowspace_preserves_membership() {
        let model = hamming_model();
        let dependent = model.pcm().row(0).xor(&model.pcm().row(2));
        let spec = induce_subcode(&model, vec![dependent], "dep").unwrap();
        for x in hamming_codebook() {
            assert!(spec.contains(&x).unwrap());
        }
    }

    #[test]
    fn contains_matches_enumeration() {
        let model = hamming_model();
        let codebook = hamming_codebook();
        assert_eq!(codebook.len(), 16);
        for x in 0u32..(1 << 7) {
            let v = BitVector::from_bits((0..7).map(|i| (x >> i) & 1 == 1));
            let expect = codebook.contains(&v);
            assert_eq!(model.contains(&v).unwrap(), expect);
        }
        // Subcode induced by h with h . x = 1 excludes x.
        let x = codebook.iter().find(|c| !c.is_zero()).unwrap();
        let mut h = BitVector::zeros(7);
        let support = x.support();
        h.set(support[0], true);
        assert!(h.dot(x).unwrap());
        let spec = induce_subcode(&model, vec![h], "cut").unwrap();
        assert!(!spec.contains(x).unwrap());
        assert!(model.contains(x).unwrap());
    }

    #[test]
    fn random_codeword_uniform_chi_square() {
        use rand::SeedableRng;
        let model = hamming_model();
        let codebook = hamming_codebook();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let draws = 16_000usize;
        let mut counts = vec![0usize; codebook.len()];
        for _ in 0..draws {
            let x = model.random_codeword(&mut rng);
            assert!(model.contains(&x).unwrap());
            let idx = codebook.iter().position(|c| c == &x).unwrap();
            counts[idx] += 1;
        }
        // Each bucket within 3 sigma of draws/16 (binomial).
        let p = 1.0 / 16.0;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for &c in &counts {
            assert!(
                (c as f64 - mean).abs() < 3.0 * sigma,
                "bucket count {c} outside {mean} +- 3*{sigma}"
            );
        }
    }

    #[test]
    fn zero_dimension_code_yields_zero_word() {
        use rand::SeedableRng;
        let pcm = BitMatrix::from_fn(3, 3, |i, j| i == j);
        let model = CodeModel::from_pcm(pcm);
        assert_eq!(model.k(), 0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert!(model.random_codeword(&mut rng).is_zero());
    }

    #[test]
    fn decode_path_flags_and_syndromes() {
        let model = hamming_model();
        let base = DecodePath::base_path(&model);
        assert!(base.is_subcode());
        for x in hamming_codebook() {
            assert!(base.syndrome_ok(&x));
            assert!(base.valid_in_base(&x));
        }
        let rem = DecodePath::row_removed(&model, 1, "rm1").unwrap();
        assert!(!rem.is_subcode());
        // Base codewords satisfy the ambient code too.
        for x in hamming_codebook() {
            assert!(rem.syndrome_ok(&x));
        }
        // Some ambient-code word violates the base code.
        let ambient_pcm = model.pcm().without_row(1);
        let amb_code = gf2::nullspace_basis(&ambient_pcm);
        let extra = (0..amb_code.rows())
            .map(|i| amb_code.row(i))
            .find(|v| !model.contains(v).unwrap())
            .expect("row removal must enlarge the code here");
        assert!(rem.syndrome_ok(&extra));
        assert!(!rem.valid_in_base(&extra));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_sparse_pcm() -> impl Strategy<Value = BitMatrix> {
            (2usize..6, 4usize..10).prop_flat_map(|(m, n)| {
                proptest::collection::vec(proptest::bool::weighted(0.3), m * n)
                    .prop_map(move |bits| BitMatrix::from_fn(m, n, |i, j| bits[i * n + j]))
            })
        }

        proptest! {
            #[test]
            fn alist_round_trip(h in arb_sparse_pcm()) {
                let text = write_alist(&h);
                let model = parse_alist(&text).unwrap();
                prop_assert_eq!(model.pcm(), &h);
            }

            #[test]
            fn four_cycles_invariant_under_permutation(h in arb_sparse_pcm(), seed in any::<u64>()) {
                use rand::seq::SliceRandom;
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let mut rowp: Vec<usize> = (0..h.rows()).collect();
                let mut colp: Vec<usize> = (0..h.cols()).collect();
                rowp.shuffle(&mut rng);
                colp.shuffle(&mut rng);
                let permuted = BitMatrix::from_fn(h.rows(), h.cols(), |i, j| h.get(rowp[i], colp[j]));
                prop_assert_eq!(count_4cycles(&h), count_4cycles(&permuted));
            }

            #[test]
            fn subcode_contains_implies_base_contains(
                h in arb_sparse_pcm(),
                row_bits in proptest::collection::vec(any::<bool>(), 10),
                word_bits in proptest::collection::vec(any::<bool>(), 10),
            ) {
                let model = Arc::new(CodeModel::from_pcm(h));
                let n = model.n();
                let row = BitVector::from_bits(row_bits[..n].iter().copied());
                prop_assume!(!row.is_zero());
                let spec = induce_subcode(&model, vec![row], "p").unwrap();
                let x = BitVector::from_bits(word_bits[..n].iter().copied());
                if spec.contains(&x).unwrap() {
                    prop_assert!(model.contains(&x).unwrap());
                }
            }
        }
    }
}
