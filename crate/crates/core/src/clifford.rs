//! Clifford circuits: gate matrices, conjugation action on Pauli strings, and
//! random circuit generation.
//!
//! The two-qubit Clifford group (11520 elements modulo global phase) is built
//! once by closing {H, S, CNOT} products and indexed in a canonical order, so
//! uniform sampling is a single bounded integer draw and the dense matrix of
//! every element is consistent with its conjugation action by construction.

use crate::error::{Error, Result};
use crate::pauli::{code_to_xz, pauli_matrix, xz_to_code, PauliString};
use ndarray::{array, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::OnceLock;

pub const TWO_QUBIT_CLIFFORD_COUNT: usize = 11520;

/// One circuit element. `Cnot(i)` and `TwoQubit(i, _)` act on the adjacent
/// pair (i, i+1) with qubit i as control / first factor.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Gate {
    H(usize),
    S(usize),
    Cnot(usize),
    TwoQubit(usize, u16),
}

impl Gate {
    /// Lowest qubit the gate touches.
    pub fn site(&self) -> usize {
        match *self {
            Gate::H(i) | Gate::S(i) | Gate::Cnot(i) | Gate::TwoQubit(i, _) => i,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot(_) | Gate::TwoQubit(_, _))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Geometry {
    /// Layers of gates drawn from {H, S, CNOT} at random positions.
    GeneratorLayers,
    /// Staircase layers of uniform two-qubit Clifford elements on pairs
    /// (0,1), (1,2), ..., (N-2, N-1).
    StaircaseUniform,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CliffordCircuit {
    n: usize,
    depth: usize,
    gates: Vec<Gate>,
}

impl CliffordCircuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            let span = if g.is_two_qubit() { 2 } else { 1 };
            if g.site() + span > n {
                return Err(Error::InvalidInput(format!(
                    "gate {:?} out of range for {} qubits",
                    g, n
                )));
            }
        }
        Ok(CliffordCircuit { n, depth: 0, gates })
    }

    pub fn empty(n: usize) -> Self {
        CliffordCircuit { n, depth: 0, gates: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Formal inverse: reversed gate order with each gate inverted.
    /// S^-1 is expressed as S.S.S; two-qubit elements via the group table.
    pub fn inverse(&self) -> CliffordCircuit {
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in self.gates.iter().rev() {
            match *g {
                Gate::H(i) => gates.push(Gate::H(i)),
                Gate::Cnot(i) => gates.push(Gate::Cnot(i)),
                Gate::S(i) => {
                    gates.push(Gate::S(i));
                    gates.push(Gate::S(i));
                    gates.push(Gate::S(i));
                }
                Gate::TwoQubit(i, idx) => {
                    gates.push(Gate::TwoQubit(i, two_qubit_table().elems[idx as usize].inv));
                }
            }
        }
        CliffordCircuit { n: self.n, depth: self.depth, gates }
    }
}

pub fn hadamard() -> Array2<C64> {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    array![[h, h], [h, -h]]
}

pub fn s_gate() -> Array2<C64> {
    array![[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(0.0, 1.0)]]
}

/// T = diag(1, e^{i pi/4}). Not a Clifford gate; used to build doped states.
pub fn t_gate() -> Array2<C64> {
    array![
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]
    ]
}

pub fn cnot_matrix() -> Array2<C64> {
    let o = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    array![[o, z, z, z], [z, o, z, z], [z, z, z, o], [z, z, o, z]]
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Dense matrix of a gate: 2x2 for H/S, 4x4 for CNOT and two-qubit elements.
pub fn gate_unitary(g: Gate) -> Array2<C64> {
    match g {
        Gate::H(_) => hadamard(),
        Gate::S(_) => s_gate(),
        Gate::Cnot(_) => cnot_matrix(),
        Gate::TwoQubit(_, idx) => two_qubit_table().elems[idx as usize].unitary.clone(),
    }
}

#[derive(Clone, Copy, Debug)]
struct LocalImage {
    c0: u8,
    c1: u8,
    sign: i8,
}

struct TwoQubitElement {
    unitary: Array2<C64>,
    /// Conjugation image of each of the 16 two-qubit Paulis, indexed 4*c0 + c1.
    images: [LocalImage; 16],
    inv: u16,
}

struct TwoQubitTable {
    elems: Vec<TwoQubitElement>,
}

/// Signed Pauli image of `kron(p_c0, p_c1)` under conjugation by `u`.
fn local_image(u: &Array2<C64>, c0: u8, c1: u8) -> LocalImage {
    let p = kron(&pauli_matrix(c0), &pauli_matrix(c1));
    let m = u.dot(&p).dot(&u.mapv(|v| v.conj()).reversed_axes());
    for a in 0..4u8 {
        for b in 0..4u8 {
            let q = kron(&pauli_matrix(a), &pauli_matrix(b));
            // Tr[q m] without forming the product
            let mut tr = C64::new(0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    tr += q[(i, j)] * m[(j, i)];
                }
            }
            let s = tr / 4.0;
            if (s - 1.0).norm() < 1e-9 {
                return LocalImage { c0: a, c1: b, sign: 1 };
            }
            if (s + 1.0).norm() < 1e-9 {
                return LocalImage { c0: a, c1: b, sign: -1 };
            }
        }
    }
    panic!("conjugated Pauli is not a signed Pauli; matrix is not Clifford");
}

/// 20-bit key identifying a two-qubit Clifford modulo global phase: the signed
/// images of X0, Z0, X1, Z1.
fn action_key(u: &Array2<C64>) -> u32 {
    let gens = [(1u8, 0u8), (3, 0), (0, 1), (0, 3)];
    let mut key = 0u32;
    for &(c0, c1) in &gens {
        let im = local_image(u, c0, c1);
        let bits = (im.c0 as u32) | ((im.c1 as u32) << 2) | (((im.sign < 0) as u32) << 4);
        key = (key << 5) | bits;
    }
    key
}

fn build_two_qubit_table() -> TwoQubitTable {
    let id = kron(&pauli_matrix(0), &pauli_matrix(0));
    let generators = [
        kron(&hadamard(), &pauli_matrix(0)),
        kron(&pauli_matrix(0), &hadamard()),
        kron(&s_gate(), &pauli_matrix(0)),
        kron(&pauli_matrix(0), &s_gate()),
        cnot_matrix(),
        {
            // CNOT with control on the second qubit
            let o = C64::new(1.0, 0.0);
            let z = C64::new(0.0, 0.0);
            array![[o, z, z, z], [z, z, z, o], [z, z, o, z], [z, o, z, z]]
        },
    ];
    let mut seen: HashMap<u32, Array2<C64>> = HashMap::new();
    seen.insert(action_key(&id), id.clone());
    let mut frontier = vec![id];
    while let Some(u) = frontier.pop() {
        for g in &generators {
            let v = g.dot(&u);
            let key = action_key(&v);
            if !seen.contains_key(&key) {
                seen.insert(key, v.clone());
                frontier.push(v);
            }
        }
    }
    assert_eq!(seen.len(), TWO_QUBIT_CLIFFORD_COUNT, "two-qubit Clifford closure");

    let mut keyed: Vec<(u32, Array2<C64>)> = seen.into_iter().collect();
    keyed.sort_by_key(|(k, _)| *k);
    let index_of: HashMap<u32, u16> =
        keyed.iter().enumerate().map(|(i, (k, _))| (*k, i as u16)).collect();

    let elems = keyed
        .into_iter()
        .map(|(_, u)| {
            let mut images = [LocalImage { c0: 0, c1: 0, sign: 1 }; 16];
            for c0 in 0..4u8 {
                for c1 in 0..4u8 {
                    images[(4 * c0 + c1) as usize] = local_image(&u, c0, c1);
                }
            }
            let u_dag = u.mapv(|v| v.conj()).reversed_axes();
            let inv = index_of[&action_key(&u_dag)];
            TwoQubitElement { unitary: u, images, inv }
        })
        .collect();
    TwoQubitTable { elems }
}

fn two_qubit_table() -> &'static TwoQubitTable {
    static TABLE: OnceLock<TwoQubitTable> = OnceLock::new();
    TABLE.get_or_init(build_two_qubit_table)
}

/// Number of elements in the two-qubit Clifford group modulo phase.
pub fn two_qubit_clifford_count() -> usize {
    two_qubit_table().elems.len()
}

/// Conjugate a Pauli string by a circuit: returns U p U^dag, sign included.
/// An unset input sign is treated as +1.
pub fn conjugate(p: &PauliString, c: &CliffordCircuit) -> PauliString {
    assert_eq!(p.len(), c.n(), "string length must match circuit width");
    let mut codes = p.codes().to_vec();
    let mut sign = p.sign().unwrap_or(1);
    for g in c.gates() {
        match *g {
            Gate::H(q) => match codes[q] {
                1 => codes[q] = 3,
                3 => codes[q] = 1,
                2 => sign = -sign,
                _ => {}
            },
            Gate::S(q) => match codes[q] {
                1 => codes[q] = 2,
                2 => {
                    codes[q] = 1;
                    sign = -sign;
                }
                _ => {}
            },
            Gate::Cnot(q) => {
                let (xc, zc) = code_to_xz(codes[q]);
                let (xt, zt) = code_to_xz(codes[q + 1]);
                if xc && zt && (xt == zc) {
                    sign = -sign;
                }
                codes[q + 1] = xz_to_code(xt ^ xc, zt);
                codes[q] = xz_to_code(xc, zc ^ zt);
            }
            Gate::TwoQubit(q, idx) => {
                let im = two_qubit_table().elems[idx as usize].images
                    [(4 * codes[q] + codes[q + 1]) as usize];
                codes[q] = im.c0;
                codes[q + 1] = im.c1;
                sign *= im.sign;
            }
        }
    }
    PauliString::with_sign(codes, sign)
}

/// Deterministic random circuit of `depth` layers.
pub fn random_clifford_circuit(n: usize, depth: usize, geometry: Geometry, seed: u64) -> CliffordCircuit {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::new();
    for _ in 0..depth {
        match geometry {
            Geometry::GeneratorLayers => {
                let mut i = 0;
                while i < n {
                    let choices = if i + 1 < n { 3 } else { 2 };
                    match rng.random_range(0..choices) {
                        0 => {
                            gates.push(Gate::H(i));
                            i += 1;
                        }
                        1 => {
                            gates.push(Gate::S(i));
                            i += 1;
                        }
                        _ => {
                            gates.push(Gate::Cnot(i));
                            i += 2;
                        }
                    }
                }
            }
            Geometry::StaircaseUniform => {
                for i in 0..n.saturating_sub(1) {
                    let idx = rng.random_range(0..TWO_QUBIT_CLIFFORD_COUNT as u32) as u16;
                    gates.push(Gate::TwoQubit(i, idx));
                }
            }
        }
    }
    CliffordCircuit { n, depth, gates }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
        (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Dense unitary of a circuit on n qubits, site 0 as the most significant bit.
    fn circuit_unitary(c: &CliffordCircuit) -> Array2<C64> {
        let n = c.n();
        let mut u = Array2::<C64>::eye(1 << n);
        for g in c.gates() {
            let gm = gate_unitary(*g);
            let span = if g.is_two_qubit() { 2 } else { 1 };
            let i = g.site();
            let left = Array2::<C64>::eye(1 << i);
            let right = Array2::<C64>::eye(1 << (n - i - span));
            let full = kron(&kron(&left, &gm), &right);
            u = full.dot(&u);
        }
        u
    }

    fn dense_pauli(p: &PauliString) -> Array2<C64> {
        let mut m = pauli_matrix(p.code(0));
        for q in 1..p.len() {
            m = kron(&m, &pauli_matrix(p.code(q)));
        }
        m
    }

    #[test]
    fn single_gate_conjugation_examples() {
        let h = CliffordCircuit::new(1, vec![Gate::H(0)]).unwrap();
        assert_eq!(conjugate(&ps("X"), &h), ps("+Z"));
        assert_eq!(conjugate(&ps("Z"), &h), ps("+X"));
        assert_eq!(conjugate(&ps("Y"), &h), ps("-Y"));
        let s = CliffordCircuit::new(1, vec![Gate::S(0)]).unwrap();
        assert_eq!(conjugate(&ps("X"), &s), ps("+Y"));
        assert_eq!(conjugate(&ps("Y"), &s), ps("-X"));
        let cx = CliffordCircuit::new(2, vec![Gate::Cnot(0)]).unwrap();
        assert_eq!(conjugate(&ps("XI"), &cx), ps("+XX"));
        assert_eq!(conjugate(&ps("IZ"), &cx), ps("+ZZ"));
        assert_eq!(conjugate(&ps("ZI"), &cx), ps("+ZI"));
    }

    #[test]
    fn two_qubit_group_has_expected_order() {
        assert_eq!(two_qubit_clifford_count(), TWO_QUBIT_CLIFFORD_COUNT);
    }

    #[test]
    fn gate_matrices_are_unitary() {
        for g in [
            Gate::H(0),
            Gate::S(0),
            Gate::Cnot(0),
            Gate::TwoQubit(0, 0),
            Gate::TwoQubit(0, 777),
            Gate::TwoQubit(0, 11519),
        ] {
            let u = gate_unitary(g);
            let ud = u.mapv(|v| v.conj()).reversed_axes();
            let eye = Array2::<C64>::eye(u.nrows());
            assert!(max_abs_diff(&u.dot(&ud), &eye) < 1e-12);
        }
        let t = t_gate();
        let td = t.mapv(|v| v.conj()).reversed_axes();
        assert!(max_abs_diff(&t.dot(&td), &Array2::eye(2)) < 1e-12);
        assert!((t_gate()[(1, 1)] - C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)).norm() < 1e-15);
    }

    #[test]
    fn tableau_action_matches_matrix_conjugation() {
        // a handful of elements, all 16 Paulis each
        for idx in [0u16, 1, 57, 1000, 5555, 11519] {
            let u = gate_unitary(Gate::TwoQubit(0, idx));
            let ud = u.mapv(|v| v.conj()).reversed_axes();
            let circ = CliffordCircuit::new(2, vec![Gate::TwoQubit(0, idx)]).unwrap();
            for c0 in 0..4u8 {
                for c1 in 0..4u8 {
                    let p = PauliString::new(vec![c0, c1]);
                    let img = conjugate(&p, &circ);
                    let lhs = u.dot(&dense_pauli(&p)).dot(&ud);
                    let rhs = dense_pauli(&img)
                        .mapv(|v| v * C64::new(img.sign().unwrap() as f64, 0.0));
                    assert!(max_abs_diff(&lhs, &rhs) < 1e-10, "idx {idx} pauli {c0}{c1}");
                }
            }
        }
    }

    #[test]
    fn random_circuit_conjugation_matches_dense() {
        for seed in 0..6 {
            let n = 3;
            let geom = if seed % 2 == 0 { Geometry::GeneratorLayers } else { Geometry::StaircaseUniform };
            let c = random_clifford_circuit(n, 3, geom, seed);
            let u = circuit_unitary(&c);
            let ud = u.mapv(|v| v.conj()).reversed_axes();
            for codes in [[1, 0, 0], [0, 3, 0], [2, 1, 3], [3, 3, 3]] {
                let p = PauliString::new(codes.to_vec());
                let img = conjugate(&p, &c);
                let lhs = u.dot(&dense_pauli(&p)).dot(&ud);
                let rhs =
                    dense_pauli(&img).mapv(|v| v * C64::new(img.sign().unwrap() as f64, 0.0));
                assert!(max_abs_diff(&lhs, &rhs) < 1e-9, "seed {seed}");
            }
        }
    }

    #[test]
    fn inverse_circuit_undoes_conjugation() {
        for seed in 0..5 {
            let c = random_clifford_circuit(4, 3, Geometry::GeneratorLayers, seed);
            let inv = c.inverse();
            for codes in [[1, 2, 3, 0], [3, 0, 0, 1], [2, 2, 2, 2]] {
                let p = PauliString::with_sign(codes.to_vec(), 1);
                let round = conjugate(&conjugate(&p, &c), &inv);
                assert_eq!(round, p);
            }
        }
    }

    #[test]
    fn conjugation_is_group_action() {
        for seed in 0..4 {
            let c1 = random_clifford_circuit(4, 2, Geometry::GeneratorLayers, seed);
            let c2 = random_clifford_circuit(4, 2, Geometry::StaircaseUniform, seed + 100);
            // composite circuit: c2 then c1
            let mut gates = c2.gates().to_vec();
            gates.extend_from_slice(c1.gates());
            let comp = CliffordCircuit::new(4, gates).unwrap();
            let p = PauliString::new(vec![1, 3, 2, 0]);
            assert_eq!(conjugate(&p, &comp), conjugate(&conjugate(&p, &c2), &c1));
        }
    }

    #[test]
    fn conjugation_preserves_commutation() {
        for seed in 0..4 {
            let c = random_clifford_circuit(3, 4, Geometry::StaircaseUniform, seed);
            for (a, b) in [([1, 0, 3], [3, 1, 0]), ([2, 2, 0], [0, 3, 1]), ([1, 1, 1], [3, 3, 3])] {
                let pa = PauliString::new(a.to_vec());
                let pb = PauliString::new(b.to_vec());
                assert_eq!(
                    pa.commutes_with(&pb),
                    conjugate(&pa, &c).commutes_with(&conjugate(&pb, &c))
                );
            }
        }
    }

    #[test]
    fn random_circuits_deterministic() {
        let a = random_clifford_circuit(8, 5, Geometry::GeneratorLayers, 42);
        let b = random_clifford_circuit(8, 5, Geometry::GeneratorLayers, 42);
        assert_eq!(a, b);
        let c = random_clifford_circuit(8, 0, Geometry::StaircaseUniform, 1);
        assert!(c.is_empty());
    }

    #[test]
    fn staircase_uniform_index_distribution() {
        // chi-squared goodness of fit for the sampled element index
        let draws = 100_000usize;
        let mut counts = vec![0u32; TWO_QUBIT_CLIFFORD_COUNT];
        for seed in 0..draws as u64 {
            let c = random_clifford_circuit(2, 1, Geometry::StaircaseUniform, seed);
            let Gate::TwoQubit(_, idx) = c.gates()[0] else { panic!() };
            counts[idx as usize] += 1;
        }
        let expected = draws as f64 / TWO_QUBIT_CLIFFORD_COUNT as f64;
        let stat: f64 = counts.iter().map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        }).sum();
        let dof = (TWO_QUBIT_CLIFFORD_COUNT - 1) as f64;
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let crit = ChiSquared::new(dof).unwrap().inverse_cdf(0.99);
        assert!(stat < crit, "chi2 {stat} >= {crit}");
    }
}
