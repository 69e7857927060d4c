//! Dense bit-packed linear algebra over GF(2).
//!
//! Matrices and vectors are stored row-major in 64-bit words, least
//! significant bit first within a word. Padding bits beyond the logical
//! length are always zero, which lets weight and equality work on whole
//! words. All types are immutable in spirit: the mutating helpers are
//! only used while building a value, and every operation here is pure.

use thiserror::Error;

/// Errors from shape-checked GF(2) operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

const WORD_BITS: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// Mask selecting the valid bits of the last word of a `len`-bit row.
fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A packed bit vector over GF(2).
///
/// Bit `i` lives in word `i / 64` at position `i % 64`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    /// All-zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Build from an iterator of bits; length is the iterator count.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for bit in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if bit {
                *words.last_mut().unwrap() |= 1u64 << (len % WORD_BITS);
            }
            len += 1;
        }
        BitVector { len, words }
    }

    /// Parse from a string of `0`/`1` characters.
    pub fn from_binary_str(s: &str) -> Option<Self> {
        let mut v = BitVector::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                _ => return None,
            }
        }
        Some(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let (w, b) = (i / WORD_BITS, i % WORD_BITS);
        if bit {
            self.words[w] |= 1u64 << b;
        } else {
            self.words[w] &= !(1u64 << b);
        }
    }

    /// Number of set bits (Hamming weight).
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// In-place XOR with another vector of the same length.
    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// XOR returning a new vector.
    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// GF(2) inner product: parity of the AND of the two vectors.
    pub fn dot(&self, other: &BitVector) -> Result<bool, Gf2Error> {
        if self.len != other.len {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        Ok(acc.count_ones() % 2 == 1)
    }

    /// In-place OR with another vector of the same length.
    pub fn or_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "or of unequal lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Count of positions set in `self` but not in `other`.
    pub fn count_and_not(&self, other: &BitVector) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum()
    }

    /// Indices of set bits, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    /// Iterate over the bits as booleans.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Raw packed words (padding bits are zero).
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Pack into bytes, bit `i` at byte `i / 8`, position `i % 8` (LSB first).
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        let mut out = vec![0u8; nbytes];
        for (i, byte) in out.iter_mut().enumerate() {
            let word = self.words[i * 8 / WORD_BITS];
            *byte = (word >> ((i * 8) % WORD_BITS)) as u8;
        }
        if self.len % 8 != 0 {
            let last = out.len() - 1;
            out[last] &= (1u8 << (self.len % 8)) - 1;
        }
        out
    }

    /// Inverse of [`to_bytes`](Self::to_bytes) for a known length.
    pub fn from_bytes(len: usize, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        let mut v = BitVector::zeros(len);
        for (i, &byte) in bytes.iter().enumerate() {
            v.words[i * 8 / WORD_BITS] |= (byte as u64) << ((i * 8) % WORD_BITS);
        }
        // Reject dirty padding so equality stays meaningful.
        if let Some(last) = v.words.last() {
            if last & !tail_mask(len) != 0 {
                return None;
            }
        }
        Some(v)
    }

    /// Lowercase hex of [`to_bytes`](Self::to_bytes).
    pub fn to_hex(&self) -> String {
        self.to_bytes().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Inverse of [`to_hex`](Self::to_hex) for a known length.
    pub fn from_hex(len: usize, hex: &str) -> Option<Self> {
        if hex.len() % 2 != 0 {
            return None;
        }
        let bytes: Option<Vec<u8>> = (0..hex.len() / 2)
            .map(|i| u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).ok())
            .collect();
        Self::from_bytes(len, &bytes?)
    }
}

impl std::fmt::Debug for BitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitVector(")?;
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        write!(f, ")")
    }
}

/// A packed row-major bit matrix over GF(2).
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    /// Words per row.
    pitch: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    /// All-zero matrix. `cols` must be at least 1.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(cols >= 1, "matrix must have at least one column");
        let pitch = words_for(cols);
        BitMatrix {
            rows,
            cols,
            pitch,
            data: vec![0; rows * pitch],
        }
    }

    /// Build from rows, which must all share one length.
    pub fn from_rows(rows: &[BitVector]) -> Self {
        assert!(!rows.is_empty(), "from_rows needs at least one row");
        let cols = rows[0].len();
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row length mismatch");
            m.data[i * m.pitch..(i + 1) * m.pitch].copy_from_slice(&r.words);
        }
        m
    }

    /// Build from a predicate over (row, col).
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = BitMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(row < self.rows && col < self.cols);
        (self.data[row * self.pitch + col / WORD_BITS] >> (col % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, bit: bool) {
        debug_assert!(row < self.rows && col < self.cols);
        let idx = row * self.pitch + col / WORD_BITS;
        let b = col % WORD_BITS;
        if bit {
            self.data[idx] |= 1u64 << b;
        } else {
            self.data[idx] &= !(1u64 << b);
        }
    }

    /// Packed words of one row.
    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.data[row * self.pitch..(row + 1) * self.pitch]
    }

    /// Copy one row out as a vector.
    pub fn row(&self, row: usize) -> BitVector {
        BitVector {
            len: self.cols,
            words: self.row_words(row).to_vec(),
        }
    }

    /// All rows as vectors.
    pub fn to_rows(&self) -> Vec<BitVector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    /// New matrix with `extra` rows appended below `self`.
    pub fn stack(&self, extra: &[BitVector]) -> BitMatrix {
        let mut rows = self.to_rows();
        for r in extra {
            assert_eq!(r.len(), self.cols, "stacked row length mismatch");
            rows.push(r.clone());
        }
        BitMatrix::from_rows(&rows)
    }

    /// New matrix with row `index` removed.
    pub fn without_row(&self, index: usize) -> BitMatrix {
        assert!(index < self.rows && self.rows >= 2);
        let rows: Vec<BitVector> = (0..self.rows)
            .filter(|&i| i != index)
            .map(|i| self.row(i))
            .collect();
        BitMatrix::from_rows(&rows)
    }

    fn row_xor(&mut self, from: usize, to: usize) {
        let (f, t) = (from * self.pitch, to * self.pitch);
        for w in 0..self.pitch {
            let v = self.data[f + w];
            self.data[t + w] ^= v;
        }
    }

    fn row_swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.pitch {
            self.data.swap(a * self.pitch + w, b * self.pitch + w);
        }
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMatrix({}x{})", self.rows, self.cols)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                write!(f, "{}", self.get(i, j) as u8)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Result of [`rref`].
#[derive(Debug, Clone)]
pub struct Rref {
    /// The reduced row-echelon form, same shape as the input.
    pub matrix: BitMatrix,
    /// Pivot column per pivot row, ascending.
    pub pivot_columns: Vec<usize>,
    /// Number of pivots.
    pub rank: usize,
}

/// Reduced row-echelon form over GF(2).
///
/// Pivots are chosen as the first row with a nonzero entry in the sweep
/// column, so the output is deterministic. The row space is preserved.
pub fn rref(m: &BitMatrix) -> Rref {
    let mut r = m.clone();
    let mut pivot_columns = Vec::new();
    let mut pivot_row = 0;
    for col in 0..r.cols {
        if pivot_row == r.rows {
            break;
        }
        let found = (pivot_row..r.rows).find(|&i| r.get(i, col));
        let Some(src) = found else { continue };
        r.row_swap(pivot_row, src);
        for i in 0..r.rows {
            if i != pivot_row && r.get(i, col) {
                r.row_xor(pivot_row, i);
            }
        }
        pivot_columns.push(col);
        pivot_row += 1;
    }
    Rref {
        matrix: r,
        rank: pivot_columns.len(),
        pivot_columns,
    }
}

/// Rank over GF(2).
pub fn rank(m: &BitMatrix) -> usize {
    rref(m).rank
}

/// Basis of the null space of `h`: a `(cols - rank) x cols` matrix whose
/// rows are independent and all satisfy `h * g = 0`. Zero rows when `h`
/// has full column rank.
pub fn nullspace_basis(h: &BitMatrix) -> BitMatrix {
    let red = rref(h);
    let n = h.cols;
    let pivots = &red.pivot_columns;
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; n];
        for &p in pivots {
            v[p] = true;
        }
        v
    };
    let free: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
    let mut basis = BitMatrix::zeros(free.len(), n);
    for (bi, &fj) in free.iter().enumerate() {
        basis.set(bi, fj, true);
        // Pivot variable p equals the sum of free variables in its row.
        for (pr, &pc) in pivots.iter().enumerate() {
            if red.matrix.get(pr, fj) {
                basis.set(bi, pc, true);
            }
        }
    }
    basis
}

/// True iff `v` is a GF(2) linear combination of the rows of `m`.
pub fn in_rowspace(m: &BitMatrix, v: &BitVector) -> Result<bool, Gf2Error> {
    if v.len() != m.cols {
        return Err(Gf2Error::DimensionMismatch {
            expected: m.cols,
            actual: v.len(),
        });
    }
    let red = rref(m);
    let mut residual = v.clone();
    for (pr, &pc) in red.pivot_columns.iter().enumerate() {
        if residual.get(pc) {
            residual.xor_assign(&red.matrix.row(pr));
        }
    }
    Ok(residual.is_zero())
}

/// Syndrome `h * x` over GF(2), one bit per row of `h`.
pub fn syndrome(h: &BitMatrix, x: &BitVector) -> Result<BitVector, Gf2Error> {
    if x.len() != h.cols {
        return Err(Gf2Error::DimensionMismatch {
            expected: h.cols,
            actual: x.len(),
        });
    }
    let mut s = BitVector::zeros(h.rows);
    for i in 0..h.rows {
        let mut acc = 0u64;
        for (a, b) in h.row_words(i).iter().zip(x.words()) {
            acc ^= a & b;
        }
        if acc.count_ones() % 2 == 1 {
            s.set(i, true);
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn mat(rows: &[&str]) -> BitMatrix {
        let v: Vec<BitVector> = rows
            .iter()
            .map(|s| BitVector::from_binary_str(s).unwrap())
            .collect();
        BitMatrix::from_rows(&v)
    }

    fn vec_(s: &str) -> BitVector {
        BitVector::from_binary_str(s).unwrap()
    }

    /// Hamming(7,4) parity-check matrix, column j+1 in binary.
    pub(crate) fn hamming74() -> BitMatrix {
        mat(&["1010101", "0110011", "0001111"])
    }

    /// Brute-force row span of a matrix (all 2^rows combinations).
    fn row_span(m: &BitMatrix) -> HashSet<Vec<u64>> {
        assert!(m.rows() <= 16);
        let mut out = HashSet::new();
        for mask in 0u32..(1 << m.rows()) {
            let mut acc = BitVector::zeros(m.cols());
            for i in 0..m.rows() {
                if (mask >> i) & 1 == 1 {
                    acc.xor_assign(&m.row(i));
                }
            }
            out.insert(acc.words().to_vec());
        }
        out
    }

    #[test]
    fn rref_identity_is_fixed_point() {
        let id = mat(&["10", "01"]);
        let r = rref(&id);
        assert_eq!(r.matrix, id);
        assert_eq!(r.pivot_columns, vec![0, 1]);
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn rref_dependent_row() {
        let m = mat(&["110", "011", "101"]);
        assert_eq!(rref(&m).rank, 2);
    }

    #[test]
    fn rref_hamming_rank_matches_span_enumeration() {
        let h = hamming74();
        // Oracle: span size 2^rank by brute-force enumeration.
        let span = row_span(&h);
        assert_eq!(span.len(), 1 << 3);
        assert_eq!(rref(&h).rank, 3);
    }

    #[test]
    fn rref_idempotent_and_rank_stable() {
        let m = mat(&["1101", "0111", "1010", "1000"]);
        let r1 = rref(&m);
        let r2 = rref(&r1.matrix);
        assert_eq!(r1.matrix, r2.matrix);
        assert_eq!(r1.rank, r2.rank);
        // Row space preserved.
        assert_eq!(row_span(&m), row_span(&r1.matrix));
    }

    #[test]
    fn nullspace_full_rank_is_empty() {
        let h = mat(&["1"]);
        let g = nullspace_basis(&h);
        assert_eq!(g.rows(), 0);
        assert_eq!(g.cols(), 1);
    }

    #[test]
    fn nullspace_single_parity_check() {
        let h = mat(&["111"]);
        let g = nullspace_basis(&h);
        assert_eq!(g.rows(), 2);
        for i in 0..g.rows() {
            assert_eq!(g.row(i).weight() % 2, 0);
            assert!(syndrome(&h, &g.row(i)).unwrap().is_zero());
        }
        assert_eq!(rank(&g), 2);
    }

    #[test]
    fn nullspace_hamming_spans_the_code() {
        let h = hamming74();
        let g = nullspace_basis(&h);
        assert_eq!(g.rows(), 4);
        assert_eq!(rank(&g), 4);
        // Oracle: every span element has zero syndrome, and the span has 16 elements.
        let span = row_span(&g);
        assert_eq!(span.len(), 16);
        for words in &span {
            let x = BitVector {
                len: 7,
                words: words.clone(),
            };
            assert!(syndrome(&h, &x).unwrap().is_zero());
        }
    }

    #[test]
    fn in_rowspace_basics() {
        let m = mat(&["110", "011"]);
        assert!(in_rowspace(&m, &vec_("000")).unwrap());
        assert!(in_rowspace(&m, &vec_("101")).unwrap());
        assert!(!in_rowspace(&m, &vec_("100")).unwrap());
        assert!(matches!(
            in_rowspace(&m, &vec_("10")),
            Err(Gf2Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn in_rowspace_matches_enumeration_on_hamming() {
        let h = hamming74();
        let span = row_span(&h);
        for x in 0u32..(1 << 7) {
            let v = BitVector::from_bits((0..7).map(|i| (x >> i) & 1 == 1));
            let expect = span.contains(&v.words().to_vec());
            assert_eq!(in_rowspace(&h, &v).unwrap(), expect);
        }
    }

    #[test]
    fn syndrome_identity_and_zero() {
        let id = mat(&["100", "010", "001"]);
        let x = vec_("101");
        assert_eq!(syndrome(&id, &x).unwrap(), x);
        let h = hamming74();
        assert!(syndrome(&h, &BitVector::zeros(7)).unwrap().is_zero());
    }

    #[test]
    fn syndrome_hamming_separates_codewords() {
        let h = hamming74();
        let g = nullspace_basis(&h);
        let code = row_span(&g);
        let mut zero_count = 0;
        for x in 0u32..(1 << 7) {
            let v = BitVector::from_bits((0..7).map(|i| (x >> i) & 1 == 1));
            let s = syndrome(&h, &v).unwrap();
            if code.contains(&v.words().to_vec()) {
                assert!(s.is_zero());
                zero_count += 1;
            } else {
                assert!(!s.is_zero());
            }
        }
        assert_eq!(zero_count, 16);
    }

    #[test]
    fn bytes_and_hex_round_trip() {
        let v = vec_("10110001101");
        let b = v.to_bytes();
        assert_eq!(BitVector::from_bytes(11, &b).unwrap(), v);
        let h = v.to_hex();
        assert_eq!(BitVector::from_hex(11, &h).unwrap(), v);
        // Dirty padding is rejected.
        assert!(BitVector::from_bytes(3, &[0xFF]).is_none());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_matrix(max_r: usize, max_c: usize) -> impl Strategy<Value = BitMatrix> {
            (1..=max_r, 1..=max_c).prop_flat_map(|(r, c)| {
                proptest::collection::vec(any::<bool>(), r * c).prop_map(move |bits| {
                    BitMatrix::from_fn(r, c, |i, j| bits[i * c + j])
                })
            })
        }

        proptest! {
            #[test]
            fn rref_is_idempotent(m in arb_matrix(8, 12)) {
                let r = rref(&m);
                let r2 = rref(&r.matrix);
                prop_assert_eq!(&r.matrix, &r2.matrix);
                prop_assert_eq!(r.rank, r2.rank);
            }

            #[test]
            fn nullspace_rows_have_zero_syndrome(m in arb_matrix(8, 12)) {
                let g = nullspace_basis(&m);
                for i in 0..g.rows() {
                    prop_assert!(syndrome(&m, &g.row(i)).unwrap().is_zero());
                }
                prop_assert_eq!(if g.rows() > 0 { rank(&g) } else { 0 }, m.cols() - rank(&m));
            }

            #[test]
            fn syndrome_is_linear(
                m in arb_matrix(6, 10),
                bits_a in proptest::collection::vec(any::<bool>(), 10),
                bits_b in proptest::collection::vec(any::<bool>(), 10),
            ) {
                let n = m.cols();
                let a = BitVector::from_bits(bits_a[..n].iter().copied());
                let b = BitVector::from_bits(bits_b[..n].iter().copied());
                let lhs = syndrome(&m, &a.xor(&b)).unwrap();
                let rhs = syndrome(&m, &a).unwrap().xor(&syndrome(&m, &b).unwrap());
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn in_rowspace_matches_bruteforce(m in arb_matrix(6, 8), bits in proptest::collection::vec(any::<bool>(), 8)) {
                let n = m.cols();
                let v = BitVector::from_bits(bits[..n].iter().copied());
                let mut found = false;
                for mask in 0u32..(1 << m.rows()) {
                    let mut acc = BitVector::zeros(n);
                    for i in 0..m.rows() {
                        if (mask >> i) & 1 == 1 {
                            acc.xor_assign(&m.row(i));
                        }
                    }
                    if acc == v {
                        found = true;
                        break;
                    }
                }
                prop_assert_eq!(in_rowspace(&m, &v).unwrap(), found);
            }
        }
    }
}
