//! Signed GF(2) tableaux over the symplectic (x|z) encoding of Pauli strings.
//!
//! Rows are bit-packed into machine words so that elimination is word-level
//! XOR. Sign bits are carried through row additions using the Pauli product
//! phase rules; for a stabilizer group all additions combine commuting rows,
//! so the accumulated i-power is always 0 or 2 and the sign stays in {+1, -1}.

use crate::error::{Error, Result};
use crate::pauli::{code_to_xz, pauli_product, xz_to_code, PauliString};
use std::fmt;
use std::str::FromStr;

/// One bit-packed row: x bits, z bits, and a sign bit (true = -1).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Row {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
    pub sign: bool,
}

fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

impl Row {
    fn zero(n: usize) -> Self {
        let w = words_for(n);
        Row { x: vec![0; w], z: vec![0; w], sign: false }
    }

    fn get(&self, v: &[u64], q: usize) -> bool {
        (v[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.get(&self.x, q)
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.get(&self.z, q)
    }

    fn set_bit(v: &mut [u64], q: usize, val: bool) {
        if val {
            v[q / 64] |= 1 << (q % 64);
        } else {
            v[q / 64] &= !(1 << (q % 64));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// Column convention: columns 0..N are x bits, N..2N are z bits.
    fn col_bit(&self, n: usize, col: usize) -> bool {
        if col < n {
            self.x_bit(col)
        } else {
            self.z_bit(col - n)
        }
    }
}

/// Encode a Pauli string into a tableau row: I->(0,0), X->(1,0), Y->(1,1), Z->(0,1).
pub fn encode(p: &PauliString) -> Row {
    let n = p.len();
    let mut row = Row::zero(n);
    for (q, &c) in p.codes().iter().enumerate() {
        let (x, z) = code_to_xz(c);
        Row::set_bit(&mut row.x, q, x);
        Row::set_bit(&mut row.z, q, z);
    }
    row.sign = p.sign() == Some(-1);
    row
}

/// Decode a row back to a (signed) Pauli string.
pub fn decode(row: &Row, n: usize) -> PauliString {
    let codes: Vec<u8> = (0..n).map(|q| xz_to_code(row.x_bit(q), row.z_bit(q))).collect();
    PauliString::with_sign(codes, if row.sign { -1 } else { 1 })
}

/// Symplectic product of two rows: 0 iff the encoded Pauli strings commute.
pub fn symplectic_product(a: &Row, b: &Row) -> u8 {
    let mut acc = 0u32;
    for i in 0..a.x.len() {
        acc += (a.x[i] & b.z[i]).count_ones();
        acc += (a.z[i] & b.x[i]).count_ones();
    }
    (acc % 2) as u8
}

/// A K x 2N signed tableau with an optional cached reduced form.
#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    rows: Vec<Row>,
    /// Pivot column of each row when in reduced row-echelon form.
    pivots: Option<Vec<usize>>,
}

impl Tableau {
    pub fn new(n: usize) -> Self {
        Tableau { n, rows: Vec::new(), pivots: Some(Vec::new()) }
    }

    pub fn from_strings(n: usize, strings: &[PauliString]) -> Self {
        let rows = strings
            .iter()
            .map(|p| {
                assert_eq!(p.len(), n, "string length does not match tableau width");
                encode(p)
            })
            .collect();
        Tableau { n, rows, pivots: None }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_reduced(&self) -> bool {
        self.pivots.is_some()
    }

    /// Rank of the row space. Reduces a copy if not already reduced.
    pub fn rank(&self) -> usize {
        match &self.pivots {
            Some(_) => self.rows.len(),
            None => self.gaussian_eliminate().rows.len(),
        }
    }

    pub fn strings(&self) -> Vec<PauliString> {
        self.rows.iter().map(|r| decode(r, self.n)).collect()
    }

    pub fn row(&self, i: usize) -> &Row {
        &self.rows[i]
    }

    /// In-place signed product: `dst *= src`. Returns the accumulated i-power
    /// mod 4 (0 or 2 when the rows commute).
    fn row_mul(n: usize, dst: &mut Row, src: &Row) -> u8 {
        let mut t = 0u32;
        for q in 0..n {
            let a = xz_to_code(dst.x_bit(q), dst.z_bit(q));
            let b = xz_to_code(src.x_bit(q), src.z_bit(q));
            t += pauli_product(a, b).1 as u32;
        }
        for i in 0..dst.x.len() {
            dst.x[i] ^= src.x[i];
            dst.z[i] ^= src.z[i];
        }
        let t = (t % 4) as u8;
        dst.sign ^= src.sign ^ (t == 2);
        t
    }

    /// Reduced row-echelon form over GF(2). Pivot selection takes the lowest
    /// column index first (x columns before z columns); zero rows are dropped.
    pub fn gaussian_eliminate(&self) -> Tableau {
        let n = self.n;
        let mut rows = self.rows.clone();
        let mut basis: Vec<Row> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        for col in 0..2 * n {
            let Some(idx) = rows.iter().position(|r| r.col_bit(n, col)) else {
                continue;
            };
            let pivot = rows.swap_remove(idx);
            for r in rows.iter_mut() {
                if r.col_bit(n, col) {
                    Self::row_mul(n, r, &pivot);
                }
            }
            // back-substitute into rows already in the basis
            for b in basis.iter_mut() {
                if b.col_bit(n, col) {
                    Self::row_mul(n, b, &pivot);
                }
            }
            let pos = pivots.partition_point(|&p| p < col);
            pivots.insert(pos, col);
            basis.insert(pos, pivot);
            rows.retain(|r| !r.is_zero());
            if rows.is_empty() {
                break;
            }
        }
        Tableau { n, rows: basis, pivots: Some(pivots) }
    }

    fn ensure_reduced(&mut self) {
        if self.pivots.is_none() {
            *self = self.gaussian_eliminate();
        }
    }

    /// Reduce `row` against the current basis. The basis must be in reduced form.
    fn reduce_row(&self, mut row: Row) -> Row {
        let pivots = self.pivots.as_ref().expect("tableau must be reduced");
        for (r, &col) in self.rows.iter().zip(pivots) {
            if row.col_bit(self.n, col) {
                Self::row_mul(self.n, &mut row, r);
            }
        }
        row
    }

    /// Insert new rows, keeping the tableau reduced. Returns the rank increase.
    ///
    /// Rows that anticommute with the stored group, and rows that reduce to the
    /// identity with a negative sign (which would put -1 in the group), are
    /// rejected with an inconsistency error.
    pub fn insert_and_reduce(&mut self, new_rows: &[PauliString]) -> Result<usize> {
        self.ensure_reduced();
        let n = self.n;
        let mut delta = 0usize;
        for p in new_rows {
            if p.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row of length {} in width-{} tableau",
                    p.len(),
                    n
                )));
            }
            let row = encode(p);
            for existing in &self.rows {
                if symplectic_product(&row, existing) != 0 {
                    return Err(Error::Inconsistency(format!(
                        "inserted row {} anticommutes with stored generator {}",
                        p,
                        decode(existing, n)
                    )));
                }
            }
            let reduced = self.reduce_row(row);
            if reduced.is_zero() {
                if reduced.sign && p.sign().is_some() {
                    return Err(Error::Inconsistency(format!(
                        "row {} reduces to -identity against the stored group",
                        p
                    )));
                }
                continue;
            }
            // find the new row's pivot and splice it into the ordered basis
            let col = (0..2 * n)
                .find(|&c| reduced.col_bit(n, c))
                .expect("nonzero row has a pivot");
            let pivots = self.pivots.as_mut().unwrap();
            let pos = pivots.partition_point(|&pc| pc < col);
            pivots.insert(pos, col);
            self.rows.insert(pos, reduced.clone());
            for (i, r) in self.rows.iter_mut().enumerate() {
                if i != pos && r.col_bit(n, col) {
                    Self::row_mul(n, r, &reduced);
                }
            }
            delta += 1;
        }
        Ok(delta)
    }

    /// True iff encode(p) lies in the row space (phaseless membership).
    pub fn group_membership(&self, p: &PauliString) -> bool {
        let reduced = if self.pivots.is_some() { self.clone() } else { self.gaussian_eliminate() };
        reduced.reduce_row(encode(p)).is_zero()
    }

    /// Membership including the sign: Some(true/false) if the bits are spanned
    /// (sign match / mismatch), None if not spanned at all.
    pub fn signed_membership(&self, p: &PauliString) -> Option<bool> {
        let reduced = if self.pivots.is_some() { self.clone() } else { self.gaussian_eliminate() };
        let r = reduced.reduce_row(encode(p));
        if r.is_zero() {
            Some(!r.sign)
        } else {
            None
        }
    }

    /// Enumerate all 2^rank signed group elements. Only sensible for small rank.
    pub fn enumerate_group(&self) -> Vec<PauliString> {
        let reduced = if self.pivots.is_some() { self.clone() } else { self.gaussian_eliminate() };
        let k = reduced.rows.len();
        assert!(k <= 24, "group too large to enumerate");
        let mut out = Vec::with_capacity(1 << k);
        for mask in 0u32..(1 << k) {
            let mut acc = Row::zero(self.n);
            for (j, r) in reduced.rows.iter().enumerate() {
                if (mask >> j) & 1 == 1 {
                    Self::row_mul(self.n, &mut acc, r);
                }
            }
            out.push(decode(&acc, self.n));
        }
        out
    }
}

impl fmt::Display for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            writeln!(f, "{}", decode(r, self.n))?;
        }
        Ok(())
    }
}

impl FromStr for Tableau {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut strings = Vec::new();
        for line in s.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            strings.push(line.parse::<PauliString>()?);
        }
        if strings.is_empty() {
            return Err(Error::Parse("empty tableau".into()));
        }
        let n = strings[0].len();
        if strings.iter().any(|p| p.len() != n) {
            return Err(Error::Parse("rows of unequal length".into()));
        }
        Ok(Tableau::from_strings(n, &strings))
    }
}
