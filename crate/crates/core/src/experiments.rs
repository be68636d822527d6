//! Seeded, reproducible experiment drivers behind the CLI: success-rate
//! benchmarks on scrambled doped states, beam-width sweeps, and doped circuit
//! dynamics. All drivers emit stable CSV schemas and are byte-deterministic
//! for a fixed spec.

use crate::clifford::{conjugate, random_clifford_circuit, CliffordCircuit, Geometry};
use crate::error::{Error, Result};
use crate::learner::{learn_seeded, split_seed, LearnerConfig};
use crate::mps::{MpsState, TruncationConfig};
use crate::pauli::PauliString;
use crate::sampler::SamplerConfig;
use crate::tableau::Tableau;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExperimentKind {
    /// Success probability of recovering all N - N_T generators per iteration.
    Fig2SuccessProb,
    /// Discovered generator count vs iteration for a sweep of beam widths.
    Fig3KVsIter,
    /// Generator count along doped circuit dynamics.
    Fig4DopedDynamics,
    LearnSingle,
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n: usize,
    /// Number of trailing magic qubits (doped-state experiments).
    pub nt: usize,
    /// T gates per circuit layer (dynamics experiment).
    pub tau: usize,
    /// Beam widths; a sweep for Fig3KVsIter, a single value otherwise.
    pub m_values: Vec<usize>,
    pub iterations: usize,
    pub modifier_depth: usize,
    pub trajectories: usize,
    /// Circuit layers for the dynamics experiment.
    pub steps: usize,
    pub seed: u64,
    pub bond_cap: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            kind: ExperimentKind::LearnSingle,
            n: 8,
            nt: 0,
            tau: 1,
            m_values: vec![256],
            iterations: 5,
            modifier_depth: 1,
            trajectories: 100,
            steps: 8,
            seed: 0,
            bond_cap: 4096,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be >= 1".into()));
        }
        if self.nt > self.n {
            return Err(Error::InvalidInput(format!("nt {} exceeds n {}", self.nt, self.n)));
        }
        if self.kind == ExperimentKind::Fig4DopedDynamics && self.tau > self.n {
            return Err(Error::InvalidInput(format!("tau {} exceeds n {}", self.tau, self.n)));
        }
        if self.trajectories == 0 {
            return Err(Error::InvalidInput("trajectories must be >= 1".into()));
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return Err(Error::InvalidInput("beam widths must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidInput("iterations must be >= 1".into()));
        }
        Ok(())
    }

    fn learner_config(&self, m: usize, seed: u64) -> LearnerConfig {
        LearnerConfig {
            sampler: SamplerConfig { max_branches: m, ..SamplerConfig::default() },
            iterations: self.iterations,
            modifier_depth: self.modifier_depth,
            // run every iteration so per-iteration statistics are complete
            patience: self.iterations,
            seed,
            bond_cap: self.bond_cap,
        }
    }
}

/// |T> = (|0> + e^{i pi/4} |1>)/sqrt(2).
pub fn t_local_state() -> [C64; 2] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [C64::new(r, 0.0), C64::from_polar(r, std::f64::consts::FRAC_PI_4)]
}

/// Scrambled doped state: |0>^(n-nt) |T>^nt evolved by a depth-n random
/// Clifford circuit. Returns the state, the scrambling circuit, and the
/// reference tableau obtained by conjugating the surviving +Z generators
/// through the circuit.
pub fn prepare_doped_state(
    n: usize,
    nt: usize,
    seed: u64,
) -> Result<(MpsState, CliffordCircuit, Tableau)> {
    if nt > n {
        return Err(Error::InvalidInput(format!("nt {nt} exceeds n {n}")));
    }
    let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let mut locals = vec![zero; n - nt];
    locals.extend(vec![t_local_state(); nt]);
    let mut st = MpsState::from_product_state(&locals)?;
    let circuit = random_clifford_circuit(n, n, Geometry::GeneratorLayers, seed);
    st.apply_circuit(&circuit, &TruncationConfig::default(), None)?;
    let st = st.right_normalize()?;

    let mut reference = Tableau::new(n);
    for j in 0..n - nt {
        let mut codes = vec![0u8; n];
        codes[j] = 3;
        let row = conjugate(&PauliString::with_sign(codes, 1), &circuit);
        reference.insert_and_reduce(&[row])?;
    }
    Ok((st, circuit, reference))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig2Row {
    pub n: usize,
    pub nt: usize,
    pub iter: usize,
    pub success_rate: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig3Row {
    pub m: usize,
    pub iter: usize,
    pub mean_k: f64,
    pub min_k: usize,
    pub max_k: usize,
    pub trials: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig4Row {
    pub traj: usize,
    pub n_step: usize,
    pub k: usize,
    pub chi_max: usize,
}

/// k after each iteration for one learning run, carried forward over early
/// stops so every iteration index has a value.
fn k_per_iteration(
    state: &MpsState,
    cfg: &LearnerConfig,
    iterations: usize,
) -> Result<Vec<usize>> {
    let res = crate::learner::learn(state, cfg)?;
    let mut out = Vec::with_capacity(iterations);
    let mut last = 0usize;
    for it in 1..=iterations {
        if let Some(rec) = res.history.iter().find(|r| r.iteration == it) {
            last = rec.k;
        }
        out.push(last);
    }
    Ok(out)
}

/// Success probability of recovering all n - nt generators, per iteration,
/// over seeded trajectories.
pub fn run_fig2(spec: &ExperimentSpec) -> Result<Vec<Fig2Row>> {
    spec.validate()?;
    let m = spec.m_values[0];
    let target = spec.n - spec.nt;
    let mut successes = vec![0usize; spec.iterations];
    for traj in 0..spec.trajectories {
        let traj_seed = split_seed(spec.seed, traj as u64);
        let (state, _, _) = prepare_doped_state(spec.n, spec.nt, split_seed(traj_seed, 0))?;
        let cfg = spec.learner_config(m, split_seed(traj_seed, 1));
        let ks = k_per_iteration(&state, &cfg, spec.iterations)?;
        for (it, &k) in ks.iter().enumerate() {
            if k == target {
                successes[it] += 1;
            }
        }
    }
    let trials = spec.trajectories;
    Ok(successes
        .iter()
        .enumerate()
        .map(|(it, &s)| {
            let p = s as f64 / trials as f64;
            Fig2Row {
                n: spec.n,
                nt: spec.nt,
                iter: it + 1,
                success_rate: p,
                stderr: (p * (1.0 - p) / trials as f64).sqrt(),
                trials,
            }
        })
        .collect())
}

/// Discovered generator count vs iteration for each beam width.
pub fn run_fig3(spec: &ExperimentSpec) -> Result<Vec<Fig3Row>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &m in &spec.m_values {
        let mut per_iter: Vec<Vec<usize>> = vec![Vec::new(); spec.iterations];
        for traj in 0..spec.trajectories {
            let traj_seed = split_seed(spec.seed, traj as u64);
            let (state, _, _) = prepare_doped_state(spec.n, spec.nt, split_seed(traj_seed, 0))?;
            let cfg = spec.learner_config(m, split_seed(traj_seed, 1));
            let ks = k_per_iteration(&state, &cfg, spec.iterations)?;
            for (it, &k) in ks.iter().enumerate() {
                per_iter[it].push(k);
            }
        }
        for (it, ks) in per_iter.iter().enumerate() {
            rows.push(Fig3Row {
                m,
                iter: it + 1,
                mean_k: ks.iter().sum::<usize>() as f64 / ks.len() as f64,
                min_k: *ks.iter().min().unwrap(),
                max_k: *ks.iter().max().unwrap(),
                trials: ks.len(),
            });
        }
    }
    Ok(rows)
}

/// One dynamics trajectory: starting from |0...0>, alternate a staircase
/// layer of uniform two-qubit Cliffords with tau T gates on distinct random
/// sites, learning the group after each step. `on_step` observes every
/// recorded (state, step, k). A bond-cap overflow truncates the trajectory.
pub fn run_fig4_trajectory(
    spec: &ExperimentSpec,
    traj: usize,
    mut on_step: impl FnMut(&MpsState, usize, usize) -> Result<()>,
) -> Result<Vec<Fig4Row>> {
    let traj_seed = split_seed(spec.seed, traj as u64);
    let m = spec.m_values[0];
    let mut state = MpsState::zeros(spec.n);
    let mut warm: Option<Tableau> = None;
    let mut rows = Vec::new();
    for step in 0..=spec.steps {
        if step > 0 {
            let layer = random_clifford_circuit(
                spec.n,
                1,
                Geometry::StaircaseUniform,
                split_seed(traj_seed, 2 * step as u64),
            );
            let evolved = state.apply_circuit(&layer, &TruncationConfig::default(), Some(spec.bond_cap));
            if matches!(evolved, Err(Error::Capacity(_))) {
                break;
            }
            evolved?;
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(traj_seed, 2 * step as u64 + 1));
            let sites = rand::seq::index::sample(&mut rng, spec.n, spec.tau.min(spec.n));
            let mut ordered: Vec<usize> = sites.into_iter().collect();
            ordered.sort_unstable();
            for site in ordered {
                state.apply_single_qubit_gate(site, &crate::clifford::t_gate())?;
            }
            state = state.right_normalize()?;
        }
        let cfg = spec.learner_config(m, split_seed(traj_seed, 1_000_003 + step as u64));
        let res = match learn_seeded(&state, &cfg, warm.as_ref()) {
            Err(Error::Capacity(_)) => break,
            other => other?,
        };
        let floor = spec.n.saturating_sub(step * spec.tau);
        if res.k < floor {
            return Err(Error::InvariantViolation(format!(
                "trajectory {traj} step {step}: k = {} below the floor {floor}",
                res.k
            )));
        }
        on_step(&state, step, res.k)?;
        rows.push(Fig4Row { traj, n_step: step, k: res.k, chi_max: state.max_bond() });
        warm = Some(res.generators);
    }
    Ok(rows)
}

pub fn run_fig4(spec: &ExperimentSpec) -> Result<Vec<Fig4Row>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for traj in 0..spec.trajectories {
        rows.extend(run_fig4_trajectory(spec, traj, |_, _, _| Ok(()))?);
    }
    Ok(rows)
}

pub fn fig2_csv(rows: &[Fig2Row]) -> String {
    let mut out = String::from("n,nt,iter,success_rate,stderr,trials\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{}\n",
            r.n, r.nt, r.iter, r.success_rate, r.stderr, r.trials
        ));
    }
    out
}

pub fn fig3_csv(rows: &[Fig3Row]) -> String {
    let mut out = String::from("m,iter,mean_k,min_k,max_k,trials\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{},{},{}\n",
            r.m, r.iter, r.mean_k, r.min_k, r.max_k, r.trials
        ));
    }
    out
}

pub fn fig4_csv(rows: &[Fig4Row]) -> String {
    let mut out = String::from("traj,n,k,chi_max\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.traj, r.n_step, r.k, r.chi_max));
    }
    out
}
