//! Matrix Product State representation: canonical forms, gate application with
//! truncation, Pauli expectation values, dense conversion, and binary I/O.
//!
//! Site tensors are stored as a pair of chi_l x chi_r matrices (one per
//! physical basis state), with chi_0 = chi_N = 1. Right gauge means
//! sum_s A^s (A^s)^dag = 1 at every site; left gauge is the mirror condition.

use crate::clifford::{gate_unitary, CliffordCircuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{pauli_matrix, PauliString};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::{s, Array1, Array2};
use ndarray_linalg::{JobSvd, SVDDC, QR};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::{Read, Write};
use std::path::Path;

/// Largest system accepted by `to_dense`.
pub const MAX_DENSE_QUBITS: usize = 14;

const GAUGE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Gauge {
    Right,
    Left,
    None,
}

/// Relative singular-value cutoff and optional hard bond cap.
#[derive(Clone, Copy, Debug)]
pub struct TruncationConfig {
    /// Discard singular values below `cutoff * s_max`. Must be in [0, 1).
    pub cutoff: f64,
    pub max_bond: Option<usize>,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig { cutoff: 1e-12, max_bond: None }
    }
}

impl TruncationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.cutoff) {
            return Err(Error::InvalidInput(format!("cutoff {} not in [0, 1)", self.cutoff)));
        }
        if self.max_bond == Some(0) {
            return Err(Error::InvalidInput("max_bond must be >= 1".into()));
        }
        Ok(())
    }
}

pub(crate) fn dag(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|v| v.conj())
}

fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn check_unitary(g: &Array2<C64>) -> Result<()> {
    let d = g.nrows();
    if g.ncols() != d {
        return Err(Error::InvalidInput("gate matrix is not square".into()));
    }
    let dev = max_abs(&(g.dot(&dag(g)) - Array2::<C64>::eye(d)));
    if dev > 1e-10 {
        return Err(Error::InvalidInput(format!("gate is not unitary (deviation {dev:.2e})")));
    }
    Ok(())
}

/// Factor m = q * r with q having orthonormal columns (q^dag q = 1).
fn col_orthonormal_factor(m: &Array2<C64>) -> Result<(Array2<C64>, Array2<C64>)> {
    let (p, q) = m.dim();
    if p >= q {
        let (qm, r) = m
            .qr()
            .map_err(|e| Error::NumericalConsistency(format!("QR failed: {e}")))?;
        Ok((qm, r))
    } else {
        // wide matrix: fall back to a thin SVD
        let (u, sv, vt) = m
            .svddc(JobSvd::Some)
            .map_err(|e| Error::NumericalConsistency(format!("SVD failed: {e}")))?;
        let u = u.expect("requested U");
        let vt = vt.expect("requested VT");
        let mut r = vt;
        for (i, &x) in sv.iter().enumerate() {
            r.row_mut(i).map_inplace(|v| *v *= x);
        }
        Ok((u, r))
    }
}

/// Factor m = l * q with q having orthonormal rows (q q^dag = 1).
fn row_orthonormal_factor(m: &Array2<C64>) -> Result<(Array2<C64>, Array2<C64>)> {
    let (qc, rc) = col_orthonormal_factor(&dag(m))?;
    Ok((dag(&rc), dag(&qc)))
}

#[derive(Clone, Debug)]
pub struct MpsState {
    /// sites[i] = [A^0, A^1], each chi_{i-1} x chi_i.
    sites: Vec<[Array2<C64>; 2]>,
    gauge: Gauge,
}

impl MpsState {
    /// Build a chi = 1 MPS for a product state. Each local vector must be
    /// normalized within 1e-12.
    pub fn from_product_state(local_vectors: &[[C64; 2]]) -> Result<Self> {
        if local_vectors.is_empty() {
            return Err(Error::InvalidInput("empty product state".into()));
        }
        let mut sites = Vec::with_capacity(local_vectors.len());
        for (i, v) in local_vectors.iter().enumerate() {
            let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "local vector at site {i} has norm {norm}, expected 1"
                )));
            }
            sites.push([
                Array2::from_elem((1, 1), v[0]),
                Array2::from_elem((1, 1), v[1]),
            ]);
        }
        Ok(MpsState { sites, gauge: Gauge::Right })
    }

    /// The all-zeros computational basis state.
    pub fn zeros(n: usize) -> Self {
        Self::from_product_state(&vec![[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]; n]).unwrap()
    }

    pub fn from_site_tensors(sites: Vec<[Array2<C64>; 2]>, gauge: Gauge) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidInput("no site tensors".into()));
        }
        for i in 0..sites.len() {
            let (l, r) = sites[i][0].dim();
            if sites[i][1].dim() != (l, r) {
                return Err(Error::InvalidInput(format!("site {i}: mismatched physical blocks")));
            }
            let expect_l = if i == 0 { 1 } else { sites[i - 1][0].ncols() };
            if l != expect_l {
                return Err(Error::InvalidInput(format!("site {i}: left bond {l} != {expect_l}")));
            }
        }
        if sites.last().unwrap()[0].ncols() != 1 {
            return Err(Error::InvalidInput("right boundary bond must be 1".into()));
        }
        Ok(MpsState { sites, gauge })
    }

    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn site(&self, i: usize) -> &[Array2<C64>; 2] {
        &self.sites[i]
    }

    /// chi_0 .. chi_N (length N+1, boundaries are 1).
    pub fn bond_profile(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n() + 1);
        out.push(1);
        for site in &self.sites {
            out.push(site[0].ncols());
        }
        out
    }

    pub fn max_bond(&self) -> usize {
        self.bond_profile().into_iter().max().unwrap()
    }

    /// <psi|psi> by exact transfer contraction (no gauge assumption).
    pub fn norm_sq(&self) -> f64 {
        let mut r = Array2::<C64>::eye(1);
        for site in self.sites.iter().rev() {
            let mut next = Array2::<C64>::zeros((site[0].nrows(), site[0].nrows()));
            for a in site {
                next = next + a.dot(&r).dot(&dag(a));
            }
            r = next;
        }
        r[(0, 0)].re
    }

    /// <self|other>.
    pub fn overlap(&self, other: &MpsState) -> Result<C64> {
        if self.n() != other.n() {
            return Err(Error::InvalidInput("overlap of states with different sizes".into()));
        }
        let mut e = Array2::<C64>::eye(1);
        for (sa, sb) in self.sites.iter().zip(&other.sites) {
            let mut next = Array2::<C64>::zeros((sa[0].ncols(), sb[0].ncols()));
            for s in 0..2 {
                next = next + dag(&sa[s]).dot(&e).dot(&sb[s]);
            }
            e = next;
        }
        Ok(e[(0, 0)])
    }

    /// Verify the declared gauge condition site by site (tolerance 1e-10).
    pub fn check_gauge(&self) -> Result<()> {
        match self.gauge {
            Gauge::None => Ok(()),
            Gauge::Right => {
                for (i, site) in self.sites.iter().enumerate() {
                    let d = site[0].nrows();
                    let mut acc = Array2::<C64>::zeros((d, d));
                    for a in site {
                        acc = acc + a.dot(&dag(a));
                    }
                    let dev = max_abs(&(acc - Array2::<C64>::eye(d)));
                    if dev > GAUGE_TOL {
                        return Err(Error::NumericalConsistency(format!(
                            "right gauge violated at site {i} (deviation {dev:.2e})"
                        )));
                    }
                }
                Ok(())
            }
            Gauge::Left => {
                for (i, site) in self.sites.iter().enumerate() {
                    let d = site[0].ncols();
                    let mut acc = Array2::<C64>::zeros((d, d));
                    for a in site {
                        acc = acc + dag(a).dot(a);
                    }
                    let dev = max_abs(&(acc - Array2::<C64>::eye(d)));
                    if dev > GAUGE_TOL {
                        return Err(Error::NumericalConsistency(format!(
                            "left gauge violated at site {i} (deviation {dev:.2e})"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Sweep N-1 .. 0 making every site right-normalized. The physical state
    /// is unchanged up to global phase; the norm is fixed to 1.
    pub fn right_normalize(&self) -> Result<MpsState> {
        let mut st = self.clone();
        st.right_normalize_from(st.n() - 1)?;
        Ok(st)
    }

    pub fn left_normalize(&self) -> Result<MpsState> {
        let mut st = self.clone();
        st.left_normalize_from(0)?;
        Ok(st)
    }

    /// Right-normalize sites start..=0, absorbing carries leftward and
    /// dropping the final boundary scalar (keeping its phase).
    fn right_normalize_from(&mut self, start: usize) -> Result<()> {
        for j in (0..=start).rev() {
            let (chi_l, chi_r) = self.sites[j][0].dim();
            // stack physical blocks side by side: (chi_l, 2 chi_r)
            let mut m = Array2::<C64>::zeros((chi_l, 2 * chi_r));
            for (sidx, a) in self.sites[j].iter().enumerate() {
                m.slice_mut(s![.., sidx * chi_r..(sidx + 1) * chi_r]).assign(a);
            }
            let (l, q) = row_orthonormal_factor(&m)?;
            let k = q.nrows();
            self.sites[j] = [
                q.slice(s![.., 0..chi_r]).to_owned(),
                q.slice(s![.., chi_r..2 * chi_r]).to_owned(),
            ];
            if j > 0 {
                for a in self.sites[j - 1].iter_mut() {
                    *a = a.dot(&l);
                }
                let _ = k;
            } else {
                let c = l[(0, 0)];
                if c.norm() < 1e-12 {
                    return Err(Error::DegenerateState("state has vanishing norm".into()));
                }
                let phase = c / c.norm();
                for a in self.sites[0].iter_mut() {
                    a.map_inplace(|v| *v *= phase);
                }
            }
        }
        self.gauge = Gauge::Right;
        Ok(())
    }

    fn left_normalize_from(&mut self, start: usize) -> Result<()> {
        let n = self.n();
        for j in start..n {
            let (chi_l, chi_r) = self.sites[j][0].dim();
            // stack physical blocks on top of each other: (2 chi_l, chi_r)
            let mut m = Array2::<C64>::zeros((2 * chi_l, chi_r));
            for (sidx, a) in self.sites[j].iter().enumerate() {
                m.slice_mut(s![sidx * chi_l..(sidx + 1) * chi_l, ..]).assign(a);
            }
            let (q, r) = col_orthonormal_factor(&m)?;
            self.sites[j] = [
                q.slice(s![0..chi_l, ..]).to_owned(),
                q.slice(s![chi_l..2 * chi_l, ..]).to_owned(),
            ];
            if j + 1 < n {
                for a in self.sites[j + 1].iter_mut() {
                    *a = r.dot(a);
                }
            } else {
                let c = r[(0, 0)];
                if c.norm() < 1e-12 {
                    return Err(Error::DegenerateState("state has vanishing norm".into()));
                }
                let phase = c / c.norm();
                for a in self.sites[n - 1].iter_mut() {
                    a.map_inplace(|v| *v *= phase);
                }
            }
        }
        self.gauge = Gauge::Left;
        Ok(())
    }

    pub fn apply_single_qubit_gate(&mut self, site: usize, gate: &Array2<C64>) -> Result<()> {
        if site >= self.n() {
            return Err(Error::InvalidInput(format!("site {site} out of range")));
        }
        if gate.dim() != (2, 2) {
            return Err(Error::InvalidInput("single-qubit gate must be 2x2".into()));
        }
        check_unitary(gate)?;
        let old = self.sites[site].clone();
        for snew in 0..2 {
            let mut acc = Array2::<C64>::zeros(old[0].dim());
            for (sold, a) in old.iter().enumerate() {
                acc = acc + a.mapv(|v| v * gate[(snew, sold)]);
            }
            self.sites[site][snew] = acc;
        }
        // unitary single-site gates preserve both gauge conditions
        Ok(())
    }

    /// Apply a 4x4 unitary on the adjacent pair (site, site+1), truncate the
    /// new bond, and restore the declared gauge. Returns the discarded
    /// squared singular-value weight (relative).
    pub fn apply_two_qubit_gate(
        &mut self,
        site: usize,
        gate: &Array2<C64>,
        trunc: &TruncationConfig,
    ) -> Result<f64> {
        trunc.validate()?;
        if site + 1 >= self.n() {
            return Err(Error::InvalidInput(format!(
                "two-qubit gate at site {site} needs an adjacent neighbour; route distant pairs with swaps"
            )));
        }
        if gate.dim() != (4, 4) {
            return Err(Error::InvalidInput("two-qubit gate must be 4x4".into()));
        }
        check_unitary(gate)?;

        let chi_l = self.sites[site][0].nrows();
        let chi_r = self.sites[site + 1][0].ncols();

        // two-site block P^{ab} and gate contraction
        let mut theta = Array2::<C64>::zeros((2 * chi_l, 2 * chi_r));
        for a in 0..2usize {
            for b in 0..2usize {
                let p = self.sites[site][a].dot(&self.sites[site + 1][b]);
                for snew in 0..2usize {
                    for tnew in 0..2usize {
                        let coef = gate[(2 * snew + tnew, 2 * a + b)];
                        if coef.norm() == 0.0 {
                            continue;
                        }
                        let mut block = theta.slice_mut(s![
                            snew * chi_l..(snew + 1) * chi_l,
                            tnew * chi_r..(tnew + 1) * chi_r
                        ]);
                        block.zip_mut_with(&p, |t, &v| *t += coef * v);
                    }
                }
            }
        }

        let (u, sv, vt) = theta
            .svddc(JobSvd::Some)
            .map_err(|e| Error::NumericalConsistency(format!("SVD failed: {e}")))?;
        let u = u.expect("requested U");
        let vt = vt.expect("requested VT");
        let s_max = sv[0];
        if s_max <= 0.0 {
            return Err(Error::DegenerateState("two-site block has zero norm".into()));
        }
        let total: f64 = sv.iter().map(|x| x * x).sum();
        let mut keep = sv.iter().filter(|&&x| x >= trunc.cutoff * s_max).count().max(1);
        if let Some(cap) = trunc.max_bond {
            keep = keep.min(cap);
        }
        let kept: f64 = sv.iter().take(keep).map(|x| x * x).sum();
        let discarded = 1.0 - kept / total;

        let sv_kept: Array1<f64> = sv.slice(s![0..keep]).to_owned();

        match self.gauge {
            Gauge::Right | Gauge::None => {
                // site+1 from VT rows (right-normalized); carry U*S at `site`
                self.sites[site + 1] = [
                    vt.slice(s![0..keep, 0..chi_r]).to_owned(),
                    vt.slice(s![0..keep, chi_r..2 * chi_r]).to_owned(),
                ];
                let mut us = u.slice(s![.., 0..keep]).to_owned();
                for (j, &x) in sv_kept.iter().enumerate() {
                    us.column_mut(j).map_inplace(|v| *v *= C64::new(x, 0.0));
                }
                self.sites[site] = [
                    us.slice(s![0..chi_l, ..]).to_owned(),
                    us.slice(s![chi_l..2 * chi_l, ..]).to_owned(),
                ];
                if self.gauge == Gauge::Right {
                    self.right_normalize_from(site)?;
                }
            }
            Gauge::Left => {
                // `site` from U columns (left-normalized); carry S*VT at site+1
                self.sites[site] = [
                    u.slice(s![0..chi_l, 0..keep]).to_owned(),
                    u.slice(s![chi_l..2 * chi_l, 0..keep]).to_owned(),
                ];
                let mut svt = vt.slice(s![0..keep, ..]).to_owned();
                for (j, &x) in sv_kept.iter().enumerate() {
                    svt.row_mut(j).map_inplace(|v| *v *= C64::new(x, 0.0));
                }
                self.sites[site + 1] = [
                    svt.slice(s![.., 0..chi_r]).to_owned(),
                    svt.slice(s![.., chi_r..2 * chi_r]).to_owned(),
                ];
                self.left_normalize_from(site + 1)?;
            }
        }
        Ok(discarded)
    }

    /// Apply one circuit gate (H/S/CNOT/two-qubit Clifford element).
    pub fn apply_gate(&mut self, g: Gate, trunc: &TruncationConfig) -> Result<()> {
        let m = gate_unitary(g);
        if g.is_two_qubit() {
            self.apply_two_qubit_gate(g.site(), &m, trunc)?;
        } else {
            self.apply_single_qubit_gate(g.site(), &m)?;
        }
        Ok(())
    }

    /// Apply a whole Clifford circuit. `bond_cap` is a hard limit: exceeding
    /// it is a capacity error, not a truncation.
    pub fn apply_circuit(
        &mut self,
        c: &CliffordCircuit,
        trunc: &TruncationConfig,
        bond_cap: Option<usize>,
    ) -> Result<()> {
        if c.n() != self.n() {
            return Err(Error::InvalidInput("circuit width does not match state".into()));
        }
        for g in c.gates() {
            self.apply_gate(*g, trunc)?;
            if let Some(cap) = bond_cap {
                let chi = self.max_bond();
                if chi > cap {
                    return Err(Error::Capacity(format!("bond dimension {chi} exceeds cap {cap}")));
                }
            }
        }
        Ok(())
    }

    /// <psi| sigma |psi> for a normalized state. Errors if the imaginary
    /// residue exceeds 1e-8.
    pub fn expectation_pauli(&self, p: &PauliString) -> Result<f64> {
        if p.len() != self.n() {
            return Err(Error::InvalidInput("Pauli string length does not match state".into()));
        }
        let mut x = Array2::<C64>::eye(1);
        for (site, &code) in self.sites.iter().zip(p.codes()) {
            let sigma = pauli_matrix(code);
            let chi_r = site[0].ncols();
            let mut next = Array2::<C64>::zeros((chi_r, chi_r));
            for sp in 0..2usize {
                for sq in 0..2usize {
                    let coef = sigma[(sp, sq)];
                    if coef.norm() == 0.0 {
                        continue;
                    }
                    let term = dag(&site[sp]).dot(&x).dot(&site[sq]);
                    next.zip_mut_with(&term, |t, &v| *t += coef * v);
                }
            }
            x = next;
        }
        let e = x[(0, 0)];
        if e.im.abs() > 1e-8 {
            return Err(Error::NumericalConsistency(format!(
                "Pauli expectation has imaginary residue {:.2e}",
                e.im
            )));
        }
        Ok(e.re.clamp(-1.0, 1.0))
    }

    /// Exact contraction to a 2^N amplitude vector, site 0 as the most
    /// significant bit.
    pub fn to_dense(&self) -> Result<Vec<C64>> {
        let n = self.n();
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity(format!(
                "dense conversion limited to {MAX_DENSE_QUBITS} qubits, got {n}"
            )));
        }
        let mut v = Array2::<C64>::eye(1);
        for site in &self.sites {
            let d = v.nrows();
            let chi_r = site[0].ncols();
            let mut next = Array2::<C64>::zeros((2 * d, chi_r));
            for (sidx, a) in site.iter().enumerate() {
                let prod = v.dot(a);
                // basis index b*2 + s
                next.slice_mut(s![sidx..;2, ..]).assign(&prod);
            }
            v = next;
        }
        Ok(v.column(0).to_vec())
    }

    /// Reverse site order, swapping each tensor's bond indices. A left-gauged
    /// state mirrors to a right-gauged one and vice versa.
    pub fn mirrored(&self) -> MpsState {
        let sites = self
            .sites
            .iter()
            .rev()
            .map(|site| [site[0].t().to_owned(), site[1].t().to_owned()])
            .collect();
        let gauge = match self.gauge {
            Gauge::Right => Gauge::Left,
            Gauge::Left => Gauge::Right,
            Gauge::None => Gauge::None,
        };
        MpsState { sites, gauge }
    }

    pub fn save<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(b"MPS1")?;
        w.write_u32::<LittleEndian>(self.n() as u32)?;
        for chi in self.bond_profile() {
            w.write_u32::<LittleEndian>(chi as u32)?;
        }
        for site in &self.sites {
            let (chi_l, chi_r) = site[0].dim();
            for l in 0..chi_l {
                for a in site {
                    for r in 0..chi_r {
                        let v = a[(l, r)];
                        w.write_f64::<LittleEndian>(v.re)?;
                        w.write_f64::<LittleEndian>(v.im)?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn load<R: Read>(r: &mut R) -> Result<MpsState> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"MPS1" {
            return Err(Error::Parse("bad magic bytes, expected MPS1".into()));
        }
        let n = r.read_u32::<LittleEndian>()? as usize;
        if n == 0 {
            return Err(Error::Parse("empty MPS".into()));
        }
        let mut bonds = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            let chi = r.read_u32::<LittleEndian>()? as usize;
            if chi == 0 {
                return Err(Error::Parse("zero bond dimension".into()));
            }
            bonds.push(chi);
        }
        if bonds[0] != 1 || bonds[n] != 1 {
            return Err(Error::Parse("boundary bonds must be 1".into()));
        }
        let mut sites = Vec::with_capacity(n);
        for i in 0..n {
            let (chi_l, chi_r) = (bonds[i], bonds[i + 1]);
            let mut site = [
                Array2::<C64>::zeros((chi_l, chi_r)),
                Array2::<C64>::zeros((chi_l, chi_r)),
            ];
            for l in 0..chi_l {
                for sidx in 0..2 {
                    for c in 0..chi_r {
                        let re = r.read_f64::<LittleEndian>()?;
                        let im = r.read_f64::<LittleEndian>()?;
                        site[sidx][(l, c)] = C64::new(re, im);
                    }
                }
            }
            sites.push(site);
        }
        MpsState::from_site_tensors(sites, Gauge::None)
    }

    pub fn save_to_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        self.save(&mut f)
    }

    pub fn load_from_path<P: AsRef<Path>>(path: P) -> Result<MpsState> {
        let mut f = std::fs::File::open(path)?;
        Self::load(&mut f)
    }
}

/// Random right-normalized MPS with bond dimension up to `chi`.
pub fn random_mps(n: usize, chi: usize, seed: u64) -> MpsState {
    assert!(n >= 1 && chi >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bonds = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let e = i.min(n - i).min(60);
        bonds.push(chi.min(1usize << e));
    }
    let mut sites = Vec::with_capacity(n);
    for i in 0..n {
        let (l, r) = (bonds[i], bonds[i + 1]);
        let mut site = [Array2::<C64>::zeros((l, r)), Array2::<C64>::zeros((l, r))];
        for a in site.iter_mut() {
            a.map_inplace(|v| {
                *v = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
        }
        sites.push(site);
    }
    MpsState::from_site_tensors(sites, Gauge::None)
        .unwrap()
        .right_normalize()
        .expect("random state is non-degenerate")
}
