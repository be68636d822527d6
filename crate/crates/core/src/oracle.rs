//! Brute-force reference implementations on dense state vectors.
//!
//! Everything here scales exponentially and exists to validate the MPS-based
//! code paths on small systems. Dense vectors use site 0 as the most
//! significant bit, matching `MpsState::to_dense`.

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::tableau::Tableau;
use num_complex::Complex64 as C64;

/// Largest system for full 4^N distribution enumeration.
pub const MAX_DISTRIBUTION_QUBITS: usize = 8;
/// Largest system for brute-force stabilizer group search.
pub const MAX_GROUP_QUBITS: usize = 12;

fn qubit_count(psi: &[C64]) -> Result<usize> {
    let len = psi.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::InvalidInput(format!("state length {len} is not a power of two")));
    }
    Ok(len.trailing_zeros() as usize)
}

/// <psi| sigma |psi> for a normalized dense state.
pub fn dense_pauli_expectation(psi: &[C64], p: &PauliString) -> f64 {
    let n = p.len();
    assert_eq!(psi.len(), 1usize << n, "state length does not match Pauli string");
    let mut xmask = 0usize;
    let mut zmask = 0usize;
    let mut ny = 0u32;
    for (q, &code) in p.codes().iter().enumerate() {
        let bit = 1usize << (n - 1 - q);
        match code {
            1 => xmask |= bit,
            2 => {
                xmask |= bit;
                zmask |= bit;
                ny += 1;
            }
            3 => zmask |= bit,
            _ => {}
        }
    }
    // sigma |b> = i^{#Y} (-1)^{popcount(b & zmask)} |b ^ xmask>
    let phase = C64::new(0.0, 1.0).powu(ny % 4);
    let mut acc = C64::new(0.0, 0.0);
    for (b, &amp) in psi.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let sgn = if (b & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        acc += psi[b ^ xmask].conj() * amp * sgn;
    }
    (phase * acc).re
}

fn index_to_codes(idx: usize, n: usize) -> Vec<u8> {
    (0..n).map(|q| ((idx >> (2 * (n - 1 - q))) & 3) as u8).collect()
}

/// Full probability table over all 4^N Pauli strings, indexed base-4 with
/// site 0 as the most significant digit. Entries are <sigma>^2 / 2^N.
pub fn exact_pauli_distribution(psi: &[C64]) -> Result<Vec<f64>> {
    let n = qubit_count(psi)?;
    if n > MAX_DISTRIBUTION_QUBITS {
        return Err(Error::Capacity(format!(
            "distribution enumeration limited to {MAX_DISTRIBUTION_QUBITS} qubits, got {n}"
        )));
    }
    let norm = 1.0 / (1usize << n) as f64;
    let mut out = Vec::with_capacity(1usize << (2 * n));
    for idx in 0..1usize << (2 * n) {
        let p = PauliString::new(index_to_codes(idx, n));
        let e = dense_pauli_expectation(psi, &p);
        out.push(e * e * norm);
    }
    let total: f64 = out.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::NumericalConsistency(format!(
            "Pauli distribution sums to {total}, expected 1"
        )));
    }
    Ok(out)
}

/// All signed Pauli strings sigma with <sigma> = +/-1 (within 1e-8), identity
/// excluded.
pub fn exact_stabilizer_members(psi: &[C64]) -> Result<Vec<PauliString>> {
    let n = qubit_count(psi)?;
    if n > MAX_GROUP_QUBITS {
        return Err(Error::Capacity(format!(
            "group search limited to {MAX_GROUP_QUBITS} qubits, got {n}"
        )));
    }
    let mut members = Vec::new();
    for idx in 1..1usize << (2 * n) {
        let mut p = PauliString::new(index_to_codes(idx, n));
        let e = dense_pauli_expectation(psi, &p);
        if e.abs() >= 1.0 - 1e-8 {
            p.set_sign(if e > 0.0 { 1 } else { -1 });
            members.push(p);
        }
    }
    Ok(members)
}

/// Signed generator tableau of the full stabilizer group, found by exhaustive
/// search over all Pauli strings.
pub fn exact_stabilizer_group(psi: &[C64]) -> Result<Tableau> {
    let n = qubit_count(psi)?;
    let members = exact_stabilizer_members(psi)?;
    let mut tab = Tableau::new(n);
    tab.insert_and_reduce(&members)?;
    Ok(tab)
}

/// Probability mass of all strings beginning with `prefix`, by brute-force
/// summation over every completion.
pub fn exact_partial_probability(psi: &[C64], prefix: &[u8]) -> Result<f64> {
    let n = qubit_count(psi)?;
    if n > MAX_DISTRIBUTION_QUBITS {
        return Err(Error::Capacity(format!(
            "marginal enumeration limited to {MAX_DISTRIBUTION_QUBITS} qubits, got {n}"
        )));
    }
    let k = prefix.len();
    if k > n {
        return Err(Error::InvalidInput("prefix longer than system".into()));
    }
    let norm = 1.0 / (1usize << n) as f64;
    let tail = n - k;
    let mut acc = 0.0;
    for suffix in 0..1usize << (2 * tail) {
        let mut codes = prefix.to_vec();
        codes.extend(index_to_codes(suffix, tail));
        let e = dense_pauli_expectation(psi, &PauliString::new(codes));
        acc += e * e * norm;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::{random_mps, MpsState};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn t_state_dense() -> Vec<C64> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        vec![c(r, 0.0), C64::from_polar(r, std::f64::consts::FRAC_PI_4)]
    }

    fn ghz(n: usize) -> Vec<C64> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![c(0.0, 0.0); 1 << n];
        v[0] = c(r, 0.0);
        v[(1 << n) - 1] = c(r, 0.0);
        v
    }

    #[test]
    fn single_qubit_magic_distribution() {
        let dist = exact_pauli_distribution(&t_state_dense()).unwrap();
        let expect = [0.5, 0.25, 0.25, 0.0];
        for (got, want) in dist.iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn ghz_group() {
        let tab = exact_stabilizer_group(&ghz(3)).unwrap();
        assert_eq!(tab.rank(), 3);
        let members = exact_stabilizer_members(&ghz(3)).unwrap();
        assert_eq!(members.len(), 7);
        let signs: std::collections::HashMap<String, i8> = members
            .iter()
            .map(|p| (p.clone().clear_sign().to_string(), p.sign().unwrap()))
            .collect();
        assert_eq!(signs["XXX"], 1);
        assert_eq!(signs["ZZI"], 1);
        assert_eq!(signs["XYY"], -1);
    }

    #[test]
    fn expectation_matches_mps() {
        let st = random_mps(5, 4, 17);
        let psi = st.to_dense().unwrap();
        for s in ["XZIYX", "YYZZI", "IIIIZ", "XXXXX"] {
            let p: PauliString = s.parse().unwrap();
            assert_abs_diff_eq!(
                dense_pauli_expectation(&psi, &p),
                st.expectation_pauli(&p).unwrap(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn marginals_are_consistent() {
        let psi = random_mps(4, 3, 5).to_dense().unwrap();
        assert_abs_diff_eq!(exact_partial_probability(&psi, &[]).unwrap(), 1.0, epsilon = 1e-9);
        for prefix in [vec![0u8], vec![1], vec![2, 3], vec![0, 1, 2]] {
            let whole = exact_partial_probability(&psi, &prefix).unwrap();
            let mut split = 0.0;
            for a in 0..4u8 {
                let mut ext = prefix.clone();
                ext.push(a);
                split += exact_partial_probability(&psi, &ext).unwrap();
            }
            assert_abs_diff_eq!(whole, split, epsilon = 1e-9);
        }
    }

    #[test]
    fn product_zero_state_group_is_full_rank() {
        let psi = MpsState::zeros(4).to_dense().unwrap();
        let tab = exact_stabilizer_group(&psi).unwrap();
        assert_eq!(tab.rank(), 4);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(exact_pauli_distribution(&[c(1.0, 0.0); 3]).is_err());
        let big = vec![c(0.0, 0.0); 1 << 9];
        assert!(matches!(exact_pauli_distribution(&big), Err(Error::Capacity(_))));
    }
}
