//! Outer learning loop: sweep, modify the state with shallow random Clifford
//! circuits, map sampled strings back, verify signs, and accumulate a signed
//! generator tableau.

use crate::clifford::{conjugate, random_clifford_circuit, CliffordCircuit, Geometry};
use crate::error::{Error, Result};
use crate::mps::{MpsState, TruncationConfig};
use crate::pauli::PauliString;
use crate::sampler::{sweep_with_stats, verify_stabilizer, Direction, SamplerConfig};
use crate::tableau::Tableau;
use serde::Serialize;
use std::collections::HashSet;
use std::time::Instant;

/// Sign-acceptance tolerance for verified stabilizers.
pub const SIGN_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug)]
pub struct LearnerConfig {
    pub sampler: SamplerConfig,
    /// Maximum number of outer iterations.
    pub iterations: usize,
    /// Clifford layers per state modification.
    pub modifier_depth: usize,
    /// Stop after this many iterations without a rank increase.
    pub patience: usize,
    pub seed: u64,
    /// Hard bond-dimension limit while modifying the state.
    pub bond_cap: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            sampler: SamplerConfig::default(),
            iterations: 10,
            modifier_depth: 1,
            patience: 5,
            seed: 0,
            bond_cap: 4096,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        if self.iterations == 0 {
            return Err(Error::InvalidInput("iterations must be >= 1".into()));
        }
        if self.patience == 0 {
            return Err(Error::InvalidInput("patience must be >= 1".into()));
        }
        if self.bond_cap == 0 {
            return Err(Error::InvalidInput("bond_cap must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Rank after this iteration.
    pub k: usize,
    /// Strings returned by the sweeps of this iteration.
    pub sampled: usize,
    /// Strings that passed sign verification on the original state.
    pub accepted: usize,
    /// Largest beam width observed during the sweeps.
    pub max_branches: usize,
    pub wall_secs: f64,
}

#[derive(Clone, Debug)]
pub struct LearnResult {
    pub n: usize,
    /// Reduced signed generator tableau.
    pub generators: Tableau,
    pub k: usize,
    pub nullity: usize,
    pub history: Vec<IterationRecord>,
}

impl LearnResult {
    /// Human-readable report: summary, generator list, iteration history.
    pub fn report(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("qubits: {}\n", self.n));
        out.push_str(&format!("generators (k): {}\n", self.k));
        out.push_str(&format!("nullity: {}\n", self.nullity));
        out.push_str("generator list:\n");
        for p in self.generators.strings() {
            out.push_str(&format!("{p}\n"));
        }
        out.push_str("history (iteration,k,sampled,accepted,max_branches,wall_secs):\n");
        for r in &self.history {
            out.push_str(&format!(
                "{},{},{},{},{},{:.6}\n",
                r.iteration, r.k, r.sampled, r.accepted, r.max_branches, r.wall_secs
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "k": self.k,
            "nullity": self.nullity,
            "generators": self.generators.strings().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "history": self.history,
        })
    }
}

/// Deterministic seed splitting: derive an independent stream for `idx`.
pub fn split_seed(seed: u64, idx: u64) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix64(seed ^ splitmix64(idx))
}

/// Copy of `state` evolved by `circuit`, with a hard bond cap.
pub fn modified_state(
    state: &MpsState,
    circuit: &CliffordCircuit,
    bond_cap: usize,
) -> Result<MpsState> {
    let mut st = state.clone();
    st.apply_circuit(circuit, &TruncationConfig::default(), Some(bond_cap))?;
    Ok(st)
}

/// Re-derive every row's sign from expectation values on `state`. A row whose
/// expectation magnitude has fallen below 1 - 1e-6 is reported as stale.
pub fn assign_signs(state: &MpsState, t: &Tableau) -> Result<Tableau> {
    let mut out = Tableau::new(t.n());
    for p in t.strings() {
        match verify_stabilizer(state, &p, SIGN_TOL)? {
            Some(signed) => {
                out.insert_and_reduce(&[signed])?;
            }
            None => {
                return Err(Error::StaleRow(format!(
                    "row {} no longer stabilizes the state",
                    p
                )));
            }
        }
    }
    Ok(out)
}

/// Learn the stabilizer group of `state`. Iteration 1 sweeps the original
/// state in both directions; each later iteration sweeps a copy evolved by a
/// fresh shallow random Clifford circuit, conjugating the sampled strings
/// back before sign verification on the original state.
pub fn learn(state: &MpsState, cfg: &LearnerConfig) -> Result<LearnResult> {
    learn_seeded(state, cfg, None)
}

/// Like `learn`, but first inserts every still-valid row of `warm_start`.
pub fn learn_seeded(
    state: &MpsState,
    cfg: &LearnerConfig,
    warm_start: Option<&Tableau>,
) -> Result<LearnResult> {
    cfg.validate()?;
    let base = state.right_normalize()?;
    let n = base.n();
    let mut tableau = Tableau::new(n);
    if let Some(warm) = warm_start {
        if warm.n() != n {
            return Err(Error::InvalidInput("warm-start tableau width mismatch".into()));
        }
        let mut verified = Vec::new();
        for p in warm.strings() {
            if let Some(signed) = verify_stabilizer(&base, &p, SIGN_TOL)? {
                verified.push(signed);
            }
        }
        tableau.insert_and_reduce(&verified)?;
    }

    let mut history = Vec::new();
    let mut last_increase = 0usize;
    let mut k = tableau.rank();

    for iteration in 1..=cfg.iterations {
        let start = Instant::now();
        let (sweep_state, back_map) = if iteration == 1 {
            (base.clone(), None)
        } else {
            let circuit = random_clifford_circuit(
                n,
                cfg.modifier_depth,
                Geometry::GeneratorLayers,
                split_seed(cfg.seed, iteration as u64),
            );
            let st = modified_state(&base, &circuit, cfg.bond_cap)?.right_normalize()?;
            (st, Some(circuit.inverse()))
        };

        let mut sampled = 0usize;
        let mut max_branches = 0usize;
        let mut unique: HashSet<Vec<u8>> = HashSet::new();
        let mut ordered: Vec<PauliString> = Vec::new();
        for direction in [Direction::Forward, Direction::Backward] {
            let sweep_cfg = SamplerConfig { direction, ..cfg.sampler };
            let stats = sweep_with_stats(&sweep_state, &sweep_cfg)?;
            max_branches = max_branches.max(stats.max_branch_count);
            sampled += stats.strings.len();
            for p in stats.strings {
                let mapped = match &back_map {
                    Some(inv) => {
                        let mut q = conjugate(&p, inv);
                        q.clear_sign();
                        q
                    }
                    None => p,
                };
                if mapped.is_identity() {
                    continue;
                }
                if unique.insert(mapped.codes().to_vec()) {
                    ordered.push(mapped);
                }
            }
        }

        let mut verified = Vec::new();
        for p in &ordered {
            if let Some(signed) = verify_stabilizer(&base, p, SIGN_TOL)? {
                verified.push(signed);
            }
        }
        let accepted = verified.len();
        tableau.insert_and_reduce(&verified)?;
        let new_k = tableau.rank();
        if new_k > k {
            last_increase = iteration;
        }
        k = new_k;
        history.push(IterationRecord {
            iteration,
            k,
            sampled,
            accepted,
            max_branches,
            wall_secs: start.elapsed().as_secs_f64(),
        });
        if k == n || iteration - last_increase.max(1) >= cfg.patience {
            break;
        }
    }

    Ok(LearnResult { n, generators: tableau, k, nullity: n - k, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::MpsState;
    use crate::oracle;
    use num_complex::Complex64 as C64;

    fn t_local() -> [C64; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        [C64::new(r, 0.0), C64::from_polar(r, std::f64::consts::FRAC_PI_4)]
    }

    fn doped_state(n: usize, nt: usize, seed: u64) -> MpsState {
        let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let mut locals = vec![zero; n - nt];
        locals.extend(vec![t_local(); nt]);
        let mut st = MpsState::from_product_state(&locals).unwrap();
        let circ = random_clifford_circuit(n, n, Geometry::GeneratorLayers, seed);
        st.apply_circuit(&circ, &TruncationConfig::default(), None).unwrap();
        st
    }

    fn cfg(m: usize, iterations: usize, seed: u64) -> LearnerConfig {
        LearnerConfig {
            sampler: SamplerConfig { max_branches: m, ..SamplerConfig::default() },
            iterations,
            seed,
            ..LearnerConfig::default()
        }
    }

    fn groups_match(res: &LearnResult, oracle_tab: &Tableau) -> bool {
        res.k == oracle_tab.rank()
            && res
                .generators
                .strings()
                .iter()
                .all(|p| oracle_tab.signed_membership(p) == Some(true))
    }

    #[test]
    fn stabilizer_state_learned_in_one_iteration() {
        let st = doped_state(8, 0, 31);
        let res = learn(&st, &cfg(256, 5, 1)).unwrap();
        assert_eq!(res.k, 8);
        assert_eq!(res.nullity, 0);
        assert_eq!(res.history.len(), 1);
        let psi = st.right_normalize().unwrap().to_dense().unwrap();
        let oracle_tab = oracle::exact_stabilizer_group(&psi).unwrap();
        assert!(groups_match(&res, &oracle_tab));
    }

    #[test]
    fn doped_state_matches_oracle_group() {
        let st = doped_state(8, 3, 7);
        let res = learn(&st, &cfg(256, 8, 2)).unwrap();
        let psi = st.right_normalize().unwrap().to_dense().unwrap();
        let oracle_tab = oracle::exact_stabilizer_group(&psi).unwrap();
        assert_eq!(oracle_tab.rank(), 5);
        assert_eq!(res.k, 5);
        assert!(groups_match(&res, &oracle_tab));
        // soundness of the final generators
        for p in res.generators.strings() {
            assert!(verify_stabilizer(&st, &p, SIGN_TOL).unwrap().is_some());
        }
    }

    #[test]
    fn magic_qubit_has_trivial_group() {
        let st = MpsState::from_product_state(&[t_local()]).unwrap();
        let res = learn(&st, &cfg(16, 3, 5)).unwrap();
        assert_eq!(res.k, 0);
        assert_eq!(res.nullity, 1);
    }

    #[test]
    fn rank_is_monotone_across_iterations() {
        let st = doped_state(8, 4, 17);
        let small = LearnerConfig { patience: 10, ..cfg(8, 10, 3) };
        let res = learn(&st, &small).unwrap();
        for w in res.history.windows(2) {
            assert!(w[1].k >= w[0].k);
        }
        assert_eq!(res.k, res.generators.rank());
    }

    #[test]
    fn clifford_invariance() {
        let st = doped_state(6, 2, 23);
        let circ = random_clifford_circuit(6, 6, Geometry::GeneratorLayers, 91);
        let moved = modified_state(&st, &circ, 4096).unwrap();
        let res_direct = learn(&st, &cfg(128, 6, 4)).unwrap();
        let res_moved = learn(&moved, &cfg(128, 6, 4)).unwrap();
        assert_eq!(res_direct.k, res_moved.k);
        // conjugating the moved group back must reproduce the direct group
        let inv = circ.inverse();
        let back: Vec<PauliString> =
            res_moved.generators.strings().iter().map(|p| conjugate(p, &inv)).collect();
        for p in &back {
            assert_eq!(res_direct.generators.signed_membership(p), Some(true), "row {p}");
        }
    }

    #[test]
    fn warm_start_keeps_valid_rows() {
        let st = doped_state(6, 2, 29);
        let full = learn(&st, &cfg(128, 6, 6)).unwrap();
        let res = learn_seeded(&st, &cfg(128, 1, 6), Some(&full.generators)).unwrap();
        assert_eq!(res.k, full.k);
    }

    #[test]
    fn assign_signs_examples() {
        let st = MpsState::zeros(3);
        let t = Tableau::from_strings(
            3,
            &["ZII".parse().unwrap(), "IZI".parse().unwrap(), "IIZ".parse().unwrap()],
        );
        let signed = assign_signs(&st, &t).unwrap();
        for p in signed.strings() {
            assert_eq!(p.sign(), Some(1));
        }

        let one = MpsState::from_product_state(&[[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]])
            .unwrap();
        let t = Tableau::from_strings(1, &["Z".parse().unwrap()]);
        let signed = assign_signs(&one, &t).unwrap();
        assert_eq!(signed.strings()[0].sign(), Some(-1));

        let stale = Tableau::from_strings(1, &["X".parse().unwrap()]);
        assert!(matches!(assign_signs(&one, &stale), Err(Error::StaleRow(_))));
    }

    #[test]
    fn bond_cap_is_enforced() {
        let st = doped_state(8, 4, 41);
        let tight = LearnerConfig { bond_cap: 1, ..cfg(32, 3, 9) };
        match learn(&st, &tight) {
            Err(Error::Capacity(_)) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(16, 0, 0).validate().is_err());
        let bad = LearnerConfig { patience: 0, ..LearnerConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn seed_splitting_is_stable_and_spread() {
        let a = split_seed(42, 1);
        assert_eq!(a, split_seed(42, 1));
        let vals: std::collections::HashSet<u64> =
            (0..100).map(|i| split_seed(42, i)).collect();
        assert_eq!(vals.len(), 100);
    }
}
