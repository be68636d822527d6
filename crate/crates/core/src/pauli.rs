//! Pauli strings and single-qubit Pauli algebra.
//!
//! Codes follow the usual numbering: 0 = I, 1 = X, 2 = Y, 3 = Z.

use crate::error::{Error, Result};
use ndarray::array;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::fmt;
use std::str::FromStr;

pub const PAULI_CHARS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// 2x2 matrix of the single-qubit Pauli with the given code.
pub fn pauli_matrix(code: u8) -> Array2<C64> {
    let o = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match code {
        0 => array![[o, z], [z, o]],
        1 => array![[z, o], [o, z]],
        2 => array![[z, -i], [i, z]],
        3 => array![[o, z], [z, -o]],
        _ => panic!("invalid Pauli code {code}"),
    }
}

/// (x, z) symplectic bits of a Pauli code: I->(0,0), X->(1,0), Y->(1,1), Z->(0,1).
pub fn code_to_xz(code: u8) -> (bool, bool) {
    match code {
        0 => (false, false),
        1 => (true, false),
        2 => (true, true),
        3 => (false, true),
        _ => panic!("invalid Pauli code {code}"),
    }
}

pub fn xz_to_code(x: bool, z: bool) -> u8 {
    match (x, z) {
        (false, false) => 0,
        (true, false) => 1,
        (true, true) => 2,
        (false, true) => 3,
    }
}

/// Single-qubit product: sigma_a sigma_b = i^t sigma_c. Returns (c, t mod 4).
pub fn pauli_product(a: u8, b: u8) -> (u8, u8) {
    let (xa, za) = code_to_xz(a);
    let (xb, zb) = code_to_xz(b);
    let c = xz_to_code(xa ^ xb, za ^ zb);
    // i-power table for the Hermitian letters: XY = iZ, YZ = iX, ZX = iY,
    // and the reverse orders pick up -i.
    let t = match (a, b) {
        (1, 2) | (2, 3) | (3, 1) => 1,
        (2, 1) | (3, 2) | (1, 3) => 3,
        _ => 0,
    };
    (c, t)
}

/// A length-N Pauli string with an optional verified sign.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PauliString {
    codes: Vec<u8>,
    sign: Option<i8>,
}

impl PauliString {
    pub fn new(codes: Vec<u8>) -> Self {
        assert!(codes.iter().all(|&c| c < 4), "Pauli codes must be in 0..4");
        Self { codes, sign: None }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![0; n])
    }

    pub fn with_sign(codes: Vec<u8>, sign: i8) -> Self {
        assert!(sign == 1 || sign == -1);
        let mut p = Self::new(codes);
        p.sign = Some(sign);
        p
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    pub fn code(&self, site: usize) -> u8 {
        self.codes[site]
    }

    pub fn sign(&self) -> Option<i8> {
        self.sign
    }

    pub fn set_sign(&mut self, sign: i8) {
        assert!(sign == 1 || sign == -1);
        self.sign = Some(sign);
    }

    pub fn clear_sign(&mut self) -> &mut Self {
        self.sign = None;
        self
    }

    pub fn is_identity(&self) -> bool {
        self.codes.iter().all(|&c| c == 0)
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        self.codes.iter().filter(|&&c| c != 0).count()
    }

    /// String with sites in reverse order (used by the backward sweep).
    pub fn reversed(&self) -> Self {
        let mut codes = self.codes.clone();
        codes.reverse();
        Self { codes, sign: self.sign }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        assert_eq!(self.len(), other.len());
        let mut anti = 0usize;
        for (&a, &b) in self.codes.iter().zip(&other.codes) {
            let (xa, za) = code_to_xz(a);
            let (xb, zb) = code_to_xz(b);
            if (xa & zb) ^ (za & xb) {
                anti += 1;
            }
        }
        anti % 2 == 0
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Some(-1) => write!(f, "-")?,
            Some(1) => write!(f, "+")?,
            _ => {}
        }
        for &c in &self.codes {
            write!(f, "{}", PAULI_CHARS[c as usize])?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign, body) = match s.chars().next() {
            Some('+') => (Some(1), &s[1..]),
            Some('-') | Some('\u{2212}') => {
                let off = s.chars().next().unwrap().len_utf8();
                (Some(-1), &s[off..])
            }
            _ => (None, s),
        };
        let mut codes = Vec::with_capacity(body.len());
        for ch in body.chars() {
            let code = match ch {
                'I' => 0,
                'X' => 1,
                'Y' => 2,
                'Z' => 3,
                _ => return Err(Error::Parse(format!("invalid Pauli character '{ch}'"))),
            };
            codes.push(code);
        }
        if codes.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        let mut p = PauliString::new(codes);
        if let Some(sg) = sign {
            p.set_sign(sg);
        }
        Ok(p)
    }
}
