//! Dense linear algebra over GF(2).
//!
//! Vectors hold at most 64 entries packed into a `u64`; entry `i` lives in
//! bit `i`. When a vector is read as a binary integer (for canonical
//! ordering) the *first* entry is the most significant digit, so that
//! `(1,0)` sorts above `(0,1)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vector length (and matrix column count) supported.
pub const MAX_LEN: usize = 64;

/// Largest block-size exponent accepted by [`enumerate_xq`].
pub const MAX_Q: u32 = 16;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gf2Vector {
    len: u8,
    bits: u64,
}

impl Gf2Vector {
    pub fn zero(len: usize) -> Result<Self> {
        check_len(len)?;
        Ok(Self {
            len: len as u8,
            bits: 0,
        })
    }

    /// Builds a vector from a low-bit-first mask; bits past `len` are rejected.
    pub fn from_mask(len: usize, bits: u64) -> Result<Self> {
        check_len(len)?;
        if len < 64 && bits >> len != 0 {
            return Err(Error::Shape(format!(
                "mask {bits:#x} has bits beyond length {len}"
            )));
        }
        Ok(Self {
            len: len as u8,
            bits,
        })
    }

    pub fn from_entries(entries: &[u8]) -> Result<Self> {
        check_len(entries.len())?;
        let mut bits = 0u64;
        for (i, &e) in entries.iter().enumerate() {
            match e {
                0 => {}
                1 => bits |= 1 << i,
                _ => return Err(Error::Parse(format!("GF(2) entry must be 0 or 1, got {e}"))),
            }
        }
        Ok(Self {
            len: entries.len() as u8,
            bits,
        })
    }

    /// Inverse of [`Gf2Vector::key`].
    pub fn from_key(len: usize, key: u64) -> Result<Self> {
        check_len(len)?;
        let bits = reverse_low(key, len);
        Self::from_mask(len, bits)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len(),
            "index {i} out of range for length {}",
            self.len
        );
        (self.bits >> i) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len(),
            "index {i} out of range for length {}",
            self.len
        );
        if value {
            self.bits |= 1 << i;
        } else {
            self.bits &= !(1 << i);
        }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Parity of the inner product.
    #[inline]
    pub fn dot(&self, other: &Self) -> bool {
        debug_assert_eq!(self.len, other.len);
        (self.bits & other.bits).count_ones() & 1 == 1
    }

    #[inline]
    pub fn xor(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        Self {
            len: self.len,
            bits: self.bits ^ other.bits,
        }
    }

    /// The vector read as a binary integer, first entry most significant.
    #[inline]
    pub fn key(&self) -> u64 {
        reverse_low(self.bits, self.len())
    }

    pub fn entries(&self) -> Vec<u8> {
        (0..self.len()).map(|i| u8::from(self.get(i))).collect()
    }
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for i in 0..self.len() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        f.write_str(")")
    }
}

impl PartialOrd for Gf2Vector {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Gf2Vector {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.len, self.key()).cmp(&(other.len, other.key()))
    }
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 || len > MAX_LEN {
        return Err(Error::Shape(format!(
            "vector length must be in 1..={MAX_LEN}, got {len}"
        )));
    }
    Ok(())
}

#[inline]
fn reverse_low(bits: u64, len: usize) -> u64 {
    if len == 0 {
        0
    } else {
        bits.reverse_bits() >> (64 - len)
    }
}

/// A `rows × cols` matrix over GF(2), stored as one bitmask per row.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 {
            return Err(Error::Shape("matrix needs at least one row".into()));
        }
        check_len(cols)?;
        Ok(Self {
            rows,
            cols,
            data: vec![0; rows],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i] = 1 << i;
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            m.data[i] = Gf2Vector::from_entries(row)?.bits();
        }
        Ok(m)
    }

    pub fn from_row_vectors(rows: &[Gf2Vector]) -> Result<Self> {
        let cols = rows.first().map_or(0, Gf2Vector::len);
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has length {}, expected {cols}",
                    row.len()
                )));
            }
            m.data[i] = row.bits();
        }
        Ok(m)
    }

    /// Builds a matrix from its columns; each column has length `rows`.
    pub fn from_columns(columns: &[Gf2Vector]) -> Result<Self> {
        let rows = columns.first().map_or(0, Gf2Vector::len);
        let mut m = Self::zeros(rows, columns.len())?;
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::Shape(format!(
                    "column {j} has length {}, expected {rows}",
                    col.len()
                )));
            }
            for i in 0..rows {
                if col.get(i) {
                    m.data[i] |= 1 << j;
                }
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        (self.data[r] >> c) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols);
        if value {
            self.data[r] |= 1 << c;
        } else {
            self.data[r] &= !(1 << c);
        }
    }

    pub fn row(&self, r: usize) -> Gf2Vector {
        Gf2Vector {
            len: self.cols as u8,
            bits: self.data[r],
        }
    }

    pub fn row_masks(&self) -> &[u64] {
        &self.data
    }

    /// Column `c` as a vector of length `rows` (requires `rows <= 64`).
    pub fn column(&self, c: usize) -> Gf2Vector {
        assert!(
            self.rows <= MAX_LEN,
            "column extraction needs at most 64 rows"
        );
        let mut bits = 0u64;
        for (r, &row) in self.data.iter().enumerate() {
            bits |= ((row >> c) & 1) << r;
        }
        Gf2Vector {
            len: self.rows as u8,
            bits,
        }
    }

    pub fn columns(&self) -> Vec<Gf2Vector> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn transpose(&self) -> Result<Self> {
        Self::from_row_vectors(&self.columns())
    }

    /// Element-wise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|r| self.row(r).entries()).collect()
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r))?;
        }
        Ok(())
    }
}

/// Row rank over GF(2) by Gaussian elimination.
pub fn rank(m: &Gf2Matrix) -> usize {
    rank_of_masks(&m.data)
}

/// Rank of a set of bitmask vectors.
pub fn rank_of_masks(vectors: &[u64]) -> usize {
    // xor basis keyed by highest set bit
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for &v in vectors {
        let mut x = v;
        while x != 0 {
            let top = 63 - x.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = x;
                rank += 1;
                break;
            }
            x ^= basis[top];
        }
    }
    rank
}

/// `a · bᵀ` over GF(2): entry `(i, j)` is the parity of row `i` of `a`
/// against row `j` of `b`.
pub fn mat_mul_t(a: &Gf2Matrix, b: &Gf2Matrix) -> Result<Gf2Matrix> {
    if a.cols != b.cols {
        return Err(Error::Shape(format!(
            "mat_mul_t needs equal column counts, got {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Gf2Matrix::zeros(a.rows, b.rows)?;
    for (i, &ra) in a.data.iter().enumerate() {
        for (j, &rb) in b.data.iter().enumerate() {
            if (ra & rb).count_ones() & 1 == 1 {
                out.data[i] |= 1 << j;
            }
        }
    }
    Ok(out)
}

/// The `2^q - 1` nonzero vectors of length `q`, in descending binary order.
pub fn enumerate_xq(q: u32) -> Result<Vec<Gf2Vector>> {
    if q == 0 || q > MAX_Q {
        return Err(Error::ExponentOutOfRange(q));
    }
    let len = q as usize;
    let top = (1u64 << q) - 1;
    (1..=top)
        .rev()
        .map(|key| Gf2Vector::from_key(len, key))
        .collect()
}

/// Position of a nonzero length-`q` vector within [`enumerate_xq`].
#[inline]
pub fn xq_index(v: &Gf2Vector) -> usize {
    debug_assert!(!v.is_zero());
    let top = (1u64 << v.len()) - 1;
    (top - v.key()) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[u8]]) -> Gf2Matrix {
        Gf2Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&m(&[&[1, 1, 1, 0, 0], &[1, 0, 1, 1, 1]])), 2);
        for q in 1..=6 {
            assert_eq!(rank(&Gf2Matrix::identity(q).unwrap()), q);
        }
        assert_eq!(rank(&m(&[&[1, 0], &[1, 0]])), 1);
        assert_eq!(rank(&m(&[&[0, 0], &[0, 0]])), 0);
    }

    #[test]
    fn xq_order() {
        let x2 = enumerate_xq(2).unwrap();
        let got: Vec<Vec<u8>> = x2.iter().map(Gf2Vector::entries).collect();
        assert_eq!(got, vec![vec![1, 1], vec![1, 0], vec![0, 1]]);
        assert_eq!(enumerate_xq(1).unwrap()[0].entries(), vec![1]);
        assert_eq!(enumerate_xq(3).unwrap().len(), 7);
        for (i, v) in x2.iter().enumerate() {
            assert_eq!(xq_index(v), i);
        }
        assert!(enumerate_xq(0).is_err());
        assert!(enumerate_xq(17).is_err());
    }

    #[test]
    fn xq_distinct_nonzero() {
        for q in 1..=8 {
            let xs = enumerate_xq(q).unwrap();
            assert_eq!(xs.len(), (1 << q) - 1);
            let set: std::collections::HashSet<_> = xs.iter().map(|v| v.bits()).collect();
            assert_eq!(set.len(), xs.len());
            assert!(xs.iter().all(|v| !v.is_zero()));
        }
    }

    #[test]
    fn mat_mul_t_duplicated_column() {
        // first five columns of a 3x6 generator; Z = (1,1,1,1,1) yields the sixth
        let xi = m(&[&[1, 0, 0, 1, 1], &[0, 1, 1, 1, 1], &[0, 0, 1, 0, 1]]);
        let z = m(&[&[1, 1, 1, 1, 1]]);
        let xii = mat_mul_t(&xi, &z).unwrap();
        assert_eq!(xii.to_rows(), vec![vec![1], vec![0], vec![0]]);
        // equal to the first column of X^I
        assert_eq!(xii.column(0), xi.column(0));
    }

    #[test]
    fn mat_mul_t_trivial_cases() {
        let b = m(&[&[1, 0, 1], &[0, 1, 1]]);
        let id = Gf2Matrix::identity(3).unwrap();
        assert_eq!(mat_mul_t(&id, &b).unwrap(), b.transpose().unwrap());
        let zero = Gf2Matrix::zeros(2, 3).unwrap();
        assert_eq!(
            mat_mul_t(&b, &zero).unwrap(),
            Gf2Matrix::zeros(2, 2).unwrap()
        );
        assert!(matches!(
            mat_mul_t(&b, &Gf2Matrix::zeros(1, 2).unwrap()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn vector_key_roundtrip() {
        let v = Gf2Vector::from_entries(&[1, 0, 1, 1]).unwrap();
        assert_eq!(v.key(), 0b1011);
        assert_eq!(Gf2Vector::from_key(4, 0b1011).unwrap(), v);
        assert!(Gf2Vector::from_entries(&[2]).is_err());
        assert!(Gf2Vector::from_mask(3, 0b1000).is_err());
    }

    fn arb_matrix() -> impl Strategy<Value = Gf2Matrix> {
        (1usize..6, 1usize..9).prop_flat_map(|(r, c)| {
            prop::collection::vec(0u64..(1 << c), r).prop_map(move |rows| {
                let mut m = Gf2Matrix::zeros(r, c).unwrap();
                m.data = rows;
                m
            })
        })
    }

    proptest! {
        #[test]
        fn rank_bounded_and_transpose_invariant(a in arb_matrix()) {
            let r = rank(&a);
            prop_assert!(r <= a.rows().min(a.cols()));
            prop_assert_eq!(r, rank(&a.transpose().unwrap()));
        }

        #[test]
        fn rank_invariant_under_row_operations(a in arb_matrix(), i in 0usize..6, j in 0usize..6, swap in any::<bool>()) {
            let (i, j) = (i % a.rows(), j % a.rows());
            let mut b = a.clone();
            if swap {
                b.data.swap(i, j);
            } else if i != j {
                b.data[i] ^= b.data[j];
            }
            prop_assert_eq!(rank(&a), rank(&b));
        }

        #[test]
        fn mat_mul_t_is_linear(a1 in arb_matrix(), seed in any::<u64>(), p in 1usize..5) {
            let mut a2 = a1.clone();
            let mut b = Gf2Matrix::zeros(p, a1.cols()).unwrap();
            let mask = if a1.cols() == 64 { u64::MAX } else { (1 << a1.cols()) - 1 };
            let mut s = seed;
            for row in a2.data.iter_mut().chain(b.data.iter_mut()) {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *row = (s >> 11) & mask;
            }
            let lhs = mat_mul_t(&a1.add(&a2).unwrap(), &b).unwrap();
            let rhs = mat_mul_t(&a1, &b).unwrap().add(&mat_mul_t(&a2, &b).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
