//! A trainable machine bound to one evaluation backend.
//!
//! Both backends draw from the same generator in the same order and differ
//! only in how clause outputs are computed, so a shared seed yields the
//! same automaton trajectory either way.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bank::{argmax, ClauseBank, Flip, TmConfig, TrainParams};
use crate::error::{Error, Result};
use crate::index::{direct_visits, InclusionIndex, Scorer, WorkCounters};

/// Name of the pseudo-random generator driving training.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9), seeded via seed_from_u64";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Backend {
    Direct,
    Indexed,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Direct => "direct",
            Backend::Indexed => "indexed",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Backend::Direct),
            "indexed" => Ok(Backend::Indexed),
            other => Err(Error::Config(format!("unknown backend {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
struct IndexedState {
    index: InclusionIndex,
    scorer: Scorer,
}

#[derive(Debug, Clone)]
pub struct Machine {
    config: TmConfig,
    bank: ClauseBank,
    indexed: Option<IndexedState>,
    rng: ChaCha8Rng,
    counters: WorkCounters,
}

impl Machine {
    pub fn new(config: TmConfig, backend: Backend) -> Result<Self> {
        let bank = ClauseBank::new(&config)?;
        Self::from_bank(config, bank, backend)
    }

    /// Wraps an existing bank; the index, if any, is built from it.
    pub fn from_bank(config: TmConfig, bank: ClauseBank, backend: Backend) -> Result<Self> {
        config.validate()?;
        if (
            config.classes,
            config.clauses,
            config.features,
            config.half_range,
        ) != (
            bank.classes(),
            bank.clauses(),
            bank.features(),
            bank.half_range(),
        ) {
            return Err(Error::Config("config shape differs from bank".into()));
        }
        let indexed = match backend {
            Backend::Direct => None,
            Backend::Indexed => {
                let index = InclusionIndex::build(&bank)?;
                let scorer = Scorer::new(&index);
                Some(IndexedState { index, scorer })
            }
        };
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            bank,
            indexed,
            counters: WorkCounters::default(),
        })
    }

    pub fn backend(&self) -> Backend {
        if self.indexed.is_some() {
            Backend::Indexed
        } else {
            Backend::Direct
        }
    }

    pub fn config(&self) -> &TmConfig {
        &self.config
    }

    pub fn bank(&self) -> &ClauseBank {
        &self.bank
    }

    pub fn into_bank(self) -> ClauseBank {
        self.bank
    }

    pub fn index(&self) -> Option<&InclusionIndex> {
        self.indexed.as_ref().map(|s| &s.index)
    }

    #[doc(hidden)]
    pub fn index_mut(&mut self) -> Option<&mut InclusionIndex> {
        self.indexed.as_mut().map(|s| &mut s.index)
    }

    /// Work accumulated by scoring and training calls so far.
    pub fn counters(&self) -> WorkCounters {
        self.counters
    }

    pub fn reset_counters(&mut self) {
        self.counters = WorkCounters::default();
    }

    pub fn class_scores_into(&mut self, x: &[u8], out: &mut [i32]) -> Result<()> {
        if out.len() != self.bank.classes() {
            return Err(Error::Shape {
                expected: self.bank.classes(),
                actual: out.len(),
            });
        }
        match &mut self.indexed {
            Some(st) => st
                .scorer
                .class_scores(&st.index, x, &mut self.counters, out),
            None => {
                self.bank.check_input(x)?;
                for (class, slot) in out.iter_mut().enumerate() {
                    *slot = self.bank.score_unchecked(class, x);
                }
                self.counters.literal_visits += direct_visits(
                    self.bank.classes(),
                    self.bank.clauses(),
                    self.bank.features(),
                );
                Ok(())
            }
        }
    }

    pub fn class_scores(&mut self, x: &[u8]) -> Result<Vec<i32>> {
        let mut out = vec![0; self.bank.classes()];
        self.class_scores_into(x, &mut out)?;
        Ok(out)
    }

    /// Class with the highest score (lowest index on ties). A single-class
    /// machine returns the thresholded vote, 0 or 1.
    pub fn predict(&mut self, x: &[u8]) -> Result<usize> {
        let scores = self.class_scores(x)?;
        if scores.len() == 1 {
            return Ok(usize::from(scores[0] >= 0));
        }
        Ok(argmax(&scores))
    }

    pub fn train_step(&mut self, x: &[u8], label: usize) -> Result<Vec<Flip>> {
        let params: TrainParams = self.config.train_params();
        let flips = match &mut self.indexed {
            None => {
                let per_class = (self.bank.clauses() * self.bank.literals()) as u64;
                let counters = &mut self.counters;
                self.bank.train_step_with(
                    &params,
                    x,
                    label,
                    &mut self.rng,
                    |bank, class, x, out| {
                        bank.clause_outputs_into(class, x, out);
                        counters.literal_visits += per_class;
                    },
                )?
            }
            Some(st) => {
                let counters = &mut self.counters;
                let mut failed = None;
                let flips = self.bank.train_step_with(
                    &params,
                    x,
                    label,
                    &mut self.rng,
                    |_, class, x, out| {
                        if let Err(e) = st.scorer.clause_outputs(&st.index, class, x, counters, out)
                        {
                            failed.get_or_insert(e);
                        }
                    },
                )?;
                if let Some(e) = failed {
                    return Err(e);
                }
                st.index.apply_flips(&flips)?;
                flips
            }
        };
        Ok(flips)
    }

    /// One pass over `rows` in the given order.
    pub fn train_epoch<'a, I>(&mut self, rows: I) -> Result<()>
    where
        I: IntoIterator<Item = (&'a [u8], usize)>,
    {
        for (x, y) in rows {
            self.train_step(x, y)?;
        }
        Ok(())
    }
}
