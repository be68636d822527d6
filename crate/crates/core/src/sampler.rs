//! Biased Pauli sampling from an MPS.
//!
//! The sweep walks the chain once, keeping a beam of Pauli prefixes. Each
//! branch carries its partial probability and a normalized environment
//! matrix L with Tr[L L^dag] = 1. Branches whose probability falls below the
//! provable stabilizer floor 1/(2^i chi_i) are discarded; the rest compete
//! for the top-M slots. The sweep is fully deterministic; randomness only
//! enters through `perfect_sample`.

use crate::error::{Error, Result};
use crate::mps::{dag, Gauge, MpsState};
use crate::pauli::PauliString;
use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug)]
pub struct SamplerConfig {
    /// Beam width M: maximum number of branches kept at any site.
    pub max_branches: usize,
    pub direction: Direction,
    /// Slack on the pruning bound: keep 2^i chi_i pi >= 1 - prune_slack.
    pub prune_slack: f64,
    /// Final acceptance slack: keep strings with Pi * 2^N >= 1 - accept_tol.
    pub accept_tol: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            max_branches: 256,
            direction: Direction::Forward,
            prune_slack: 1e-10,
            accept_tol: 1e-8,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_branches == 0 {
            return Err(Error::InvalidInput("max_branches must be >= 1".into()));
        }
        for (name, v) in [("prune_slack", self.prune_slack), ("accept_tol", self.accept_tol)] {
            if !(0.0..=1e-4).contains(&v) {
                return Err(Error::InvalidInput(format!("{name} {v} not in [0, 1e-4]")));
            }
        }
        Ok(())
    }
}

/// One sampler hypothesis: a Pauli prefix with its probability mass and
/// environment matrix.
#[derive(Clone, Debug)]
pub struct Branch {
    pub prefix: Vec<u8>,
    pub partial_prob: f64,
    pub environment: Array2<C64>,
}

impl Branch {
    /// The empty-prefix branch with trivial environment.
    pub fn root() -> Self {
        Branch {
            prefix: Vec::new(),
            partial_prob: 1.0,
            environment: Array2::eye(1),
        }
    }
}

/// M^alpha = sum_{s',s} (sigma^alpha)_{s's} (A^{s'})^dag L A^s for all four
/// Paulis, assembled from the four C^{s's} = (A^{s'})^dag L A^s blocks.
fn branch_transfer(l: &Array2<C64>, a: &[Array2<C64>; 2]) -> [Array2<C64>; 4] {
    let c = |sp: usize, sq: usize| dag(&a[sp]).dot(l).dot(&a[sq]);
    let (c00, c01, c10, c11) = (c(0, 0), c(0, 1), c(1, 0), c(1, 1));
    let i = C64::new(0.0, 1.0);
    [
        &c00 + &c11,
        &c01 + &c10,
        (&c10 - &c01).mapv(|v| v * i),
        &c00 - &c11,
    ]
}

fn frob_sq(m: &Array2<C64>) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum()
}

fn check_conditionals(raw: [f64; 4]) -> Result<[f64; 4]> {
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::NumericalConsistency(format!(
            "conditional probabilities sum to {sum}, expected 1"
        )));
    }
    let mut out = [0.0; 4];
    for (o, &p) in out.iter_mut().zip(&raw) {
        if p < -1e-10 {
            return Err(Error::NumericalConsistency(format!(
                "negative conditional probability {p}"
            )));
        }
        *o = p.max(0.0);
    }
    Ok(out)
}

/// pi(alpha | branch) for the four Pauli continuations at one site.
pub fn conditional_probs(branch: &Branch, site: &[Array2<C64>; 2]) -> Result<[f64; 4]> {
    if branch.environment.nrows() != site[0].nrows() {
        return Err(Error::InvalidInput(
            "environment dimension does not match site tensor".into(),
        ));
    }
    let m = branch_transfer(&branch.environment, site);
    check_conditionals([0, 1, 2, 3].map(|a| 0.5 * frob_sq(&m[a])))
}

/// Extend a branch by Pauli `alpha`, renormalizing the environment.
pub fn update_environment(branch: &Branch, alpha: u8, site: &[Array2<C64>; 2]) -> Result<Branch> {
    let probs = conditional_probs(branch, site)?;
    let pi = probs[alpha as usize];
    if pi <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "cannot extend along zero-probability Pauli {alpha}"
        )));
    }
    let m = branch_transfer(&branch.environment, site);
    let env = m[alpha as usize].mapv(|v| v / C64::new((2.0 * pi).sqrt(), 0.0));
    let tr: f64 = frob_sq(&env);
    if (tr - 1.0).abs() > 1e-10 {
        return Err(Error::NumericalConsistency(format!(
            "environment normalization drifted to {tr}"
        )));
    }
    let mut prefix = branch.prefix.clone();
    prefix.push(alpha);
    Ok(Branch {
        prefix,
        partial_prob: branch.partial_prob * pi,
        environment: env,
    })
}

/// Keep candidates passing the stabilizer floor 2^i chi_i pi >= 1 - slack.
/// `i` is the prefix length after extension, `chi_i` the bond cut there.
pub fn prune_by_bound(
    candidates: Vec<(usize, u8, f64)>,
    i: usize,
    chi_i: usize,
    slack: f64,
) -> Vec<(usize, u8, f64)> {
    let scale = 2f64.powi(i as i32) * chi_i as f64;
    candidates
        .into_iter()
        .filter(|&(_, _, p)| scale * p >= 1.0 - slack)
        .collect()
}

/// Top-M candidates by probability; ties broken by input order, which callers
/// keep lexicographic in (prefix, alpha).
pub fn select_top_m(mut candidates: Vec<(usize, u8, f64)>, m: usize) -> Vec<(usize, u8, f64)> {
    candidates.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap_or(std::cmp::Ordering::Equal));
    candidates.truncate(m);
    candidates
}

struct SiteTransfer {
    // stacked C^{s's} blocks, one chi_r x chi_r block per branch
    c: [Array2<C64>; 4],
    chi_r: usize,
}

impl SiteTransfer {
    /// Batched computation of all four C^{s's} for every branch, using a
    /// handful of large matrix products instead of per-branch small ones.
    fn new(branches: &[Branch], a: &[Array2<C64>; 2]) -> Self {
        let k = branches.len();
        let (chi_l, chi_r) = a[0].dim();
        // L blocks side by side: (chi_l, K chi_l)
        let mut lh = Array2::<C64>::zeros((chi_l, k * chi_l));
        for (mu, b) in branches.iter().enumerate() {
            lh.slice_mut(s![.., mu * chi_l..(mu + 1) * chi_l]).assign(&b.environment);
        }
        let adag = [dag(&a[0]), dag(&a[1])];
        let mut dv = Vec::with_capacity(2);
        for ad in &adag {
            let d = ad.dot(&lh); // (chi_r, K chi_l)
            // restack branch blocks vertically: (K chi_r, chi_l)
            let mut v = Array2::<C64>::zeros((k * chi_r, chi_l));
            for mu in 0..k {
                v.slice_mut(s![mu * chi_r..(mu + 1) * chi_r, ..])
                    .assign(&d.slice(s![.., mu * chi_l..(mu + 1) * chi_l]));
            }
            dv.push(v);
        }
        let c = [
            dv[0].dot(&a[0]),
            dv[0].dot(&a[1]),
            dv[1].dot(&a[0]),
            dv[1].dot(&a[1]),
        ];
        SiteTransfer { c, chi_r }
    }

    fn block(&self, which: usize, mu: usize) -> ndarray::ArrayView2<'_, C64> {
        self.c[which].slice(s![mu * self.chi_r..(mu + 1) * self.chi_r, ..])
    }

    /// M^alpha for one branch.
    fn m_alpha(&self, mu: usize, alpha: u8) -> Array2<C64> {
        let (c00, c01, c10, c11) =
            (self.block(0, mu), self.block(1, mu), self.block(2, mu), self.block(3, mu));
        match alpha {
            0 => &c00 + &c11,
            1 => &c01 + &c10,
            2 => (&c10 - &c01).mapv(|v| v * C64::new(0.0, 1.0)),
            3 => &c00 - &c11,
            _ => unreachable!(),
        }
    }

    fn probs(&self, mu: usize) -> Result<[f64; 4]> {
        check_conditionals([0u8, 1, 2, 3].map(|a| 0.5 * frob_sq(&self.m_alpha(mu, a))))
    }
}

pub(crate) struct SweepStats {
    pub strings: Vec<PauliString>,
    pub max_branch_count: usize,
}

fn forward_sweep(state: &MpsState, cfg: &SamplerConfig) -> Result<SweepStats> {
    let n = state.n();
    let bonds = state.bond_profile();
    let mut branches = vec![Branch::root()];
    let mut max_branch_count = 1usize;

    for site in 0..n {
        let a = state.site(site);
        let has_identity = branches.iter().any(|b| b.prefix.iter().all(|&c| c == 0));
        let transfer = SiteTransfer::new(&branches, a);
        let mut candidates = Vec::with_capacity(4 * branches.len());
        let mut probs = Vec::with_capacity(branches.len());
        for (mu, b) in branches.iter().enumerate() {
            let pi = transfer.probs(mu)?;
            for alpha in 0..4u8 {
                let p = b.partial_prob * pi[alpha as usize];
                if p > 0.0 {
                    candidates.push((mu, alpha, p));
                }
            }
            probs.push(pi);
        }
        let kept = prune_by_bound(candidates, site + 1, bonds[site + 1], cfg.prune_slack);
        let kept = select_top_m(kept, cfg.max_branches);
        if kept.is_empty() {
            if has_identity {
                // the identity prefix provably passes the bound at every site;
                // losing it here means the arithmetic broke down
                return Err(Error::InvariantViolation(format!(
                    "all branches pruned at site {site} although the identity prefix was present"
                )));
            }
            // the identity branch was evicted by an earlier top-M cut and the
            // remaining beam died out: a legitimately empty harvest
            return Ok(SweepStats { strings: Vec::new(), max_branch_count });
        }
        let mut next = Vec::with_capacity(kept.len());
        for (mu, alpha, p) in kept {
            let pi = probs[mu][alpha as usize];
            let env = transfer
                .m_alpha(mu, alpha)
                .mapv(|v| v / C64::new((2.0 * pi).sqrt(), 0.0));
            let mut prefix = branches[mu].prefix.clone();
            prefix.push(alpha);
            next.push(Branch { prefix, partial_prob: p, environment: env });
        }
        branches = next;
        max_branch_count = max_branch_count.max(branches.len());
    }

    let scale = 2f64.powi(n as i32);
    let strings = branches
        .into_iter()
        .filter(|b| b.partial_prob * scale >= 1.0 - cfg.accept_tol)
        .map(|b| PauliString::new(b.prefix))
        .collect();
    Ok(SweepStats { strings, max_branch_count })
}

pub(crate) fn sweep_with_stats(state: &MpsState, cfg: &SamplerConfig) -> Result<SweepStats> {
    cfg.validate()?;
    match cfg.direction {
        Direction::Forward => {
            let owned;
            let st = if state.gauge() == Gauge::Right {
                state
            } else {
                owned = state.right_normalize()?;
                &owned
            };
            forward_sweep(st, cfg)
        }
        Direction::Backward => {
            let mirrored = state.left_normalize()?.mirrored();
            let mut stats = forward_sweep(&mirrored, cfg)?;
            for p in stats.strings.iter_mut() {
                *p = p.reversed();
            }
            Ok(stats)
        }
    }
}

/// One pruned beam sweep over the chain. Returns up to `max_branches`
/// unsigned Pauli strings whose full-string probability reaches the
/// stabilizer value 1/2^N (within `accept_tol`).
pub fn stabilizer_sweep(state: &MpsState, cfg: &SamplerConfig) -> Result<Vec<PauliString>> {
    Ok(sweep_with_stats(state, cfg)?.strings)
}

/// Draw one Pauli string from the exact distribution Pi_rho by sampling each
/// site conditionally. Returns the string and its realized probability.
pub fn perfect_sample_with_rng<R: Rng>(state: &MpsState, rng: &mut R) -> Result<(PauliString, f64)> {
    let owned;
    let st = if state.gauge() == Gauge::Right {
        state
    } else {
        owned = state.right_normalize()?;
        &owned
    };
    let mut branch = Branch::root();
    for site in 0..st.n() {
        let a = st.site(site);
        let probs = conditional_probs(&branch, a)?;
        let mut u: f64 = rng.random::<f64>();
        let mut alpha = 3u8;
        for (j, &p) in probs.iter().enumerate() {
            if u < p {
                alpha = j as u8;
                break;
            }
            u -= p;
        }
        // guard against landing on a zero-probability tail cell
        while probs[alpha as usize] <= 0.0 {
            alpha -= 1;
        }
        branch = update_environment(&branch, alpha, a)?;
    }
    Ok((PauliString::new(branch.prefix), branch.partial_prob))
}

pub fn perfect_sample(state: &MpsState, seed: u64) -> Result<(PauliString, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perfect_sample_with_rng(state, &mut rng)
}

/// Accept `p` as a stabilizer of `state` iff |<p>| >= 1 - tol; on success
/// returns the string with its sign attached.
pub fn verify_stabilizer(
    state: &MpsState,
    p: &PauliString,
    tol: f64,
) -> Result<Option<PauliString>> {
    let e = state.expectation_pauli(p)?;
    if e.abs() >= 1.0 - tol {
        let mut signed = p.clone();
        signed.set_sign(if e > 0.0 { 1 } else { -1 });
        Ok(Some(signed))
    } else {
        Ok(None)
    }
}

/// Backward environments R_i of a fixed Pauli string, index 0..=N, built by
/// the transfer recursion R_{k-1} = (1/sqrt(2)) sum (sigma^*)_{s's} A^{s'} R_k (A^s)^dag.
/// For a right-gauged state their squared Frobenius norm obeys
/// ||R_i||^2 <= chi_i / 2^{N-i}.
pub fn right_environments(state: &MpsState, p: &PauliString) -> Result<Vec<Array2<C64>>> {
    if p.len() != state.n() {
        return Err(Error::InvalidInput("Pauli string length does not match state".into()));
    }
    let n = state.n();
    let mut envs = vec![Array2::<C64>::eye(1); n + 1];
    let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for k in (0..n).rev() {
        let a = state.site(k);
        let sigma = crate::pauli::pauli_matrix(p.code(k));
        let r = &envs[k + 1];
        let chi_l = a[0].nrows();
        let mut next = Array2::<C64>::zeros((chi_l, chi_l));
        for sp in 0..2usize {
            for sq in 0..2usize {
                let coef = sigma[(sp, sq)].conj();
                if coef.norm() == 0.0 {
                    continue;
                }
                let term = a[sp].dot(r).dot(&dag(&a[sq]));
                next.zip_mut_with(&term, |t, &v| *t += coef * inv_sqrt2 * v);
            }
        }
        envs[k] = next;
    }
    Ok(envs)
}
