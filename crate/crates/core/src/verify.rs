//! Self-check suite: indexed scoring against direct evaluation on random
//! instances, and maintained indexes against from-scratch rebuilds during
//! training. Every instance derives its own seed, which is reported with
//! any failure so it can be replayed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bank::{ClauseBank, TmConfig};
use crate::error::Result;
use crate::index::{InclusionIndex, Scorer, WorkCounters};
use crate::machine::{Backend, Machine};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub equivalence_instances: usize,
    pub training_instances: usize,
    pub training_steps: usize,
    /// Corrupt one index entry before checking; the run must then fail.
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            equivalence_instances: 200,
            training_instances: 20,
            training_steps: 500,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub check: &'static str,
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub checks: usize,
    pub failures: Vec<Failure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} checks, {} failures: {}\n",
            self.checks,
            self.failures.len(),
            if self.passed() { "PASS" } else { "FAIL" }
        );
        for f in &self.failures {
            s.push_str(&format!("  [{}] seed {}: {}\n", f.check, f.seed, f.detail));
        }
        s
    }
}

fn instance_seed(base: u64, i: usize) -> u64 {
    base.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(i as u64)
}

/// Small random shape: m in 1..=3, even n in 2..=20, o in 1..=6.
fn random_config(rng: &mut ChaCha8Rng, seed: u64) -> TmConfig {
    let mut cfg = TmConfig::new(
        rng.random_range(1..=3),
        2 * rng.random_range(1..=10),
        rng.random_range(1..=6),
    );
    cfg.seed = seed;
    cfg
}

fn corrupt(index: &mut InclusionIndex) -> Option<String> {
    for class in 0..index.classes() {
        for literal in 0..index.literals() {
            if let Some(&clause) = index.list(class, literal).first() {
                index.inject_fault(class, clause as usize, literal);
                return Some(format!(
                    "injected at class {class}, clause {clause}, literal {literal}"
                ));
            }
        }
    }
    None
}

fn check_equivalence(seed: u64, inject: bool) -> Result<Option<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = random_config(&mut rng, seed);
    let density = rng.random_range(0.0..0.4);
    let bank = ClauseBank::random(&cfg, density, &mut rng)?;
    let mut index = InclusionIndex::build(&bank)?;
    if inject && corrupt(&mut index).is_none() {
        return Ok(None);
    }
    if let Err(e) = index.check_coherence() {
        return Ok(Some(e.to_string()));
    }
    let mut scorer = Scorer::new(&index);
    let mut counters = WorkCounters::default();
    let mut got = vec![0; cfg.classes];
    let o = cfg.features;
    for bits in 0..1u32 << o {
        let x: Vec<u8> = (0..o).map(|k| ((bits >> k) & 1) as u8).collect();
        scorer.class_scores(&index, &x, &mut counters, &mut got)?;
        let want = bank.class_scores(&x)?;
        if got != want {
            return Ok(Some(format!(
                "shape m={} n={} o={o}, input {x:?}: indexed {got:?} vs direct {want:?}",
                cfg.classes, cfg.clauses
            )));
        }
    }
    Ok(None)
}

fn check_training(seed: u64, steps: usize, inject: bool) -> Result<Option<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = random_config(&mut rng, seed);
    if cfg.classes == 1 {
        cfg.classes = 2;
    }
    let mut machine = Machine::new(cfg.clone(), Backend::Indexed)?;
    let mut injected = false;
    for step in 0..steps {
        let x: Vec<u8> = (0..cfg.features).map(|_| rng.random_range(0..=1)).collect();
        let y = rng.random_range(0..cfg.classes);
        if let Err(e) = machine.train_step(&x, y) {
            return Ok(Some(format!("step {}: {e}", step + 1)));
        }
        if inject && !injected {
            if let Some(idx) = machine.index_mut() {
                injected = corrupt(idx).is_some();
            }
        }
        if (step + 1) % 100 == 0 || step + 1 == steps {
            let index = machine.index().expect("indexed machine");
            if let Err(e) = index
                .check_coherence()
                .and_then(|_| index.check_against(machine.bank()))
            {
                return Ok(Some(format!("after step {}: {e}", step + 1)));
            }
        }
    }
    Ok(None)
}

/// Runs both suites. Failures carry the instance seed; rerunning with the
/// same options reproduces the same list.
pub fn verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    for i in 0..opts.equivalence_instances {
        let seed = instance_seed(opts.seed, i);
        report.checks += 1;
        if let Some(detail) = check_equivalence(seed, opts.inject_fault && i == 0)? {
            report.failures.push(Failure {
                check: "equivalence",
                seed,
                detail,
            });
        }
    }
    for i in 0..opts.training_instances {
        let seed = instance_seed(opts.seed ^ 0xa5a5, i);
        report.checks += 1;
        if let Some(detail) =
            check_training(seed, opts.training_steps, opts.inject_fault && i == 0)?
        {
            report.failures.push(Failure {
                check: "maintenance",
                seed,
                detail,
            });
        }
    }
    Ok(report)
}
