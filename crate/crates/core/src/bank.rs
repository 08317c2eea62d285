//! Clause banks: automaton teams, direct clause evaluation, class voting
//! and the reward/penalty training update.
//!
//! Literal `k < o` reads feature `x_k`; literal `k >= o` reads `¬x_{k-o}`.
//! In every class the first `n/2` clauses vote for the class and the
//! remaining `n/2` vote against it.

use rand::Rng;

use crate::automaton::{self, ta_apply, TaState, DEFAULT_HALF_RANGE, MAX_HALF_RANGE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TmConfig {
    pub classes: usize,
    pub clauses: usize,
    pub features: usize,
    pub half_range: u8,
    pub threshold: u32,
    pub specificity: f64,
    pub seed: u64,
    pub boost_true_positive: bool,
}

impl TmConfig {
    /// Config with default half-range, `T = 15`, `s = 3.9` and seed 0.
    pub fn new(classes: usize, clauses: usize, features: usize) -> Self {
        Self {
            classes,
            clauses,
            features,
            half_range: DEFAULT_HALF_RANGE,
            threshold: 15,
            specificity: 3.9,
            seed: 0,
            boost_true_positive: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes == 0 {
            return Err(Error::Config("class count must be at least 1".into()));
        }
        if self.clauses == 0 || !self.clauses.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "clause count must be positive and even, got {}",
                self.clauses
            )));
        }
        if self.features == 0 {
            return Err(Error::Config("feature count must be at least 1".into()));
        }
        if self.half_range == 0 || self.half_range > MAX_HALF_RANGE {
            return Err(Error::Config(format!(
                "half-range must be in 1..={MAX_HALF_RANGE}, got {}",
                self.half_range
            )));
        }
        if self.threshold < 1 {
            return Err(Error::Config("threshold T must be at least 1".into()));
        }
        if self.specificity.is_nan() || self.specificity <= 1.0 || !self.specificity.is_finite() {
            return Err(Error::Config(format!(
                "specificity s must be a finite value above 1, got {}",
                self.specificity
            )));
        }
        Ok(())
    }

    pub fn train_params(&self) -> TrainParams {
        TrainParams {
            threshold: self.threshold,
            specificity: self.specificity,
            boost_true_positive: self.boost_true_positive,
        }
    }
}

/// Learning controls consumed by [`ClauseBank::train_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub threshold: u32,
    pub specificity: f64,
    pub boost_true_positive: bool,
}

/// An owned team of `2o` automata controlling one clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaTeam {
    states: Vec<u8>,
    half_range: u8,
}

impl TaTeam {
    /// All automata at state `N`, i.e. excluding and next to the boundary.
    pub fn new(features: usize, half_range: u8) -> Self {
        Self {
            states: vec![half_range; 2 * features],
            half_range,
        }
    }

    pub fn features(&self) -> usize {
        self.states.len() / 2
    }

    pub fn state(&self, literal: usize) -> TaState {
        TaState::new(self.states[literal], self.half_range).expect("team holds valid states")
    }

    pub fn set_state(&mut self, literal: usize, state: TaState) {
        self.states[literal] = state.value();
    }

    /// Moves the automaton for `literal` to the first include or exclude state.
    pub fn set_include(&mut self, literal: usize, include: bool) {
        self.states[literal] = if include {
            self.half_range + 1
        } else {
            self.half_range
        };
    }

    pub fn includes(&self, literal: usize) -> bool {
        self.states[literal] > self.half_range
    }

    pub fn evaluate(&self, x: &[u8]) -> Result<bool> {
        evaluate_clause(&self.states, self.half_range, x)
    }
}

/// Evaluates a conjunctive clause given its automaton states.
///
/// An empty clause (nothing included) is true.
pub fn evaluate_clause(states: &[u8], half_range: u8, x: &[u8]) -> Result<bool> {
    if states.len() != 2 * x.len() {
        return Err(Error::Shape {
            expected: states.len() / 2,
            actual: x.len(),
        });
    }
    Ok(!clause_falsified(states, half_range, x))
}

/// Full scan over every literal of the clause. No early exit, so the work
/// per clause is always `2o` literal inspections.
#[inline]
pub(crate) fn clause_falsified(states: &[u8], half_range: u8, x: &[u8]) -> bool {
    let (plain, negated) = states.split_at(x.len());
    let mut falsified = 0u8;
    for (&s, &v) in plain.iter().zip(x) {
        falsified |= (s > half_range) as u8 & (v == 0) as u8;
    }
    for (&s, &v) in negated.iter().zip(x) {
        falsified |= (s > half_range) as u8 & (v != 0) as u8;
    }
    falsified != 0
}

#[inline]
pub(crate) fn literal_value(x: &[u8], literal: usize) -> bool {
    let o = x.len();
    if literal < o {
        x[literal] != 0
    } else {
        x[literal - o] == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlipDirection {
    /// exclude → include
    Included,
    /// include → exclude
    Excluded,
}

/// An automaton whose action changed during a training step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flip {
    pub class: usize,
    pub clause: usize,
    pub literal: usize,
    pub direction: FlipDirection,
}

/// Role a class plays in one training step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Target,
    Negative,
}

/// `m` classes of `n` clauses, each clause a team of `2o` automata.
///
/// States are stored row-major by (class, clause, literal).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseBank {
    classes: usize,
    clauses: usize,
    features: usize,
    half_range: u8,
    states: Vec<u8>,
}

impl ClauseBank {
    /// Fresh bank with every automaton at state `N` (exclude).
    pub fn new(config: &TmConfig) -> Result<Self> {
        config.validate()?;
        let len = config.classes * config.clauses * 2 * config.features;
        Ok(Self {
            classes: config.classes,
            clauses: config.clauses,
            features: config.features,
            half_range: config.half_range,
            states: vec![config.half_range; len],
        })
    }

    pub fn from_states(
        classes: usize,
        clauses: usize,
        features: usize,
        half_range: u8,
        states: Vec<u8>,
    ) -> Result<Self> {
        let mut probe = TmConfig::new(classes, clauses, features);
        probe.half_range = half_range;
        probe.validate()?;
        let expected = classes * clauses * 2 * features;
        if states.len() != expected {
            return Err(Error::Shape {
                expected,
                actual: states.len(),
            });
        }
        let top = 2 * half_range;
        if let Some(bad) = states.iter().find(|&&s| s == 0 || s > top) {
            return Err(Error::Config(format!(
                "automaton state {bad} outside 1..={top}"
            )));
        }
        Ok(Self {
            classes,
            clauses,
            features,
            half_range,
            states,
        })
    }

    /// Random bank: each automaton includes with probability `density`;
    /// states are drawn uniformly within the chosen action's half.
    pub fn random<R: Rng + ?Sized>(config: &TmConfig, density: f64, rng: &mut R) -> Result<Self> {
        let mut bank = Self::new(config)?;
        let n = bank.half_range;
        for s in bank.states.iter_mut() {
            *s = if rng.random::<f64>() < density {
                rng.random_range(n + 1..=2 * n)
            } else {
                rng.random_range(1..=n)
            };
        }
        Ok(bank)
    }

    /// Random bank in which every clause includes exactly
    /// `literals_per_clause` distinct literals.
    pub fn with_clause_length<R: Rng + ?Sized>(
        config: &TmConfig,
        literals_per_clause: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut bank = Self::new(config)?;
        let width = bank.literals();
        if literals_per_clause > width {
            return Err(Error::Config(format!(
                "{literals_per_clause} literals per clause exceed {width} literals"
            )));
        }
        let n = bank.half_range;
        for team in bank.states.chunks_mut(width) {
            for k in rand::seq::index::sample(rng, width, literals_per_clause) {
                team[k] = rng.random_range(n + 1..=2 * n);
            }
        }
        Ok(bank)
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn clauses(&self) -> usize {
        self.clauses
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn literals(&self) -> usize {
        2 * self.features
    }

    pub fn half_range(&self) -> u8 {
        self.half_range
    }

    /// Raw automaton states, row-major by (class, clause, literal).
    pub fn states(&self) -> &[u8] {
        &self.states
    }

    pub fn is_positive(&self, clause: usize) -> bool {
        clause < self.clauses / 2
    }

    #[inline]
    fn offset(&self, class: usize, clause: usize) -> usize {
        (class * self.clauses + clause) * self.literals()
    }

    /// Automaton states of one clause.
    pub fn team(&self, class: usize, clause: usize) -> &[u8] {
        let start = self.offset(class, clause);
        &self.states[start..start + self.literals()]
    }

    pub fn state(&self, class: usize, clause: usize, literal: usize) -> TaState {
        let v = self.states[self.offset(class, clause) + literal];
        TaState::new(v, self.half_range).expect("bank holds valid states")
    }

    pub fn set_state(&mut self, class: usize, clause: usize, literal: usize, state: TaState) {
        let at = self.offset(class, clause) + literal;
        self.states[at] = state.value();
    }

    pub fn includes(&self, class: usize, clause: usize, literal: usize) -> bool {
        self.states[self.offset(class, clause) + literal] > self.half_range
    }

    /// Overwrites one clause with an owned team.
    pub fn set_team(&mut self, class: usize, clause: usize, team: &TaTeam) -> Result<()> {
        if team.states.len() != self.literals() {
            return Err(Error::Shape {
                expected: self.features,
                actual: team.features(),
            });
        }
        if team.half_range != self.half_range {
            return Err(Error::Config("team half-range differs from bank".into()));
        }
        let start = self.offset(class, clause);
        let len = self.literals();
        self.states[start..start + len].copy_from_slice(&team.states);
        Ok(())
    }

    /// Include flags for every automaton, in storage order.
    pub fn include_snapshot(&self) -> Vec<bool> {
        self.states.iter().map(|&s| s > self.half_range).collect()
    }

    pub(crate) fn check_input(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.features {
            return Err(Error::Shape {
                expected: self.features,
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_class(&self, class: usize) -> Result<()> {
        if class >= self.classes {
            return Err(Error::ClassOutOfRange {
                class,
                classes: self.classes,
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, class: usize, clause: usize, x: &[u8]) -> Result<bool> {
        self.check_class(class)?;
        self.check_input(x)?;
        Ok(!clause_falsified(
            self.team(class, clause),
            self.half_range,
            x,
        ))
    }

    /// Clause outputs of one class, by direct evaluation.
    pub(crate) fn clause_outputs_into(&self, class: usize, x: &[u8], out: &mut [bool]) {
        for (clause, slot) in out.iter_mut().enumerate() {
            *slot = !clause_falsified(self.team(class, clause), self.half_range, x);
        }
    }

    pub(crate) fn score_unchecked(&self, class: usize, x: &[u8]) -> i32 {
        let half = self.clauses / 2;
        let mut score = 0i32;
        for clause in 0..self.clauses {
            if !clause_falsified(self.team(class, clause), self.half_range, x) {
                score += if clause < half { 1 } else { -1 };
            }
        }
        score
    }

    /// Positive votes minus negative votes for `class`.
    pub fn class_score(&self, class: usize, x: &[u8]) -> Result<i32> {
        self.check_class(class)?;
        self.check_input(x)?;
        Ok(self.score_unchecked(class, x))
    }

    pub fn class_scores(&self, x: &[u8]) -> Result<Vec<i32>> {
        self.check_input(x)?;
        Ok((0..self.classes)
            .map(|c| self.score_unchecked(c, x))
            .collect())
    }

    /// Single-vote output: 1 iff the score is non-negative.
    pub fn predict_binary(&self, x: &[u8]) -> Result<u8> {
        if self.classes != 1 {
            return Err(Error::Usage(format!(
                "binary prediction needs exactly one class, bank has {}",
                self.classes
            )));
        }
        Ok(u8::from(self.class_score(0, x)? >= 0))
    }

    pub fn predict_multiclass(&self, x: &[u8]) -> Result<usize> {
        Ok(argmax(&self.class_scores(x)?))
    }

    /// One training update using direct clause evaluation.
    pub fn train_step<R: Rng + ?Sized>(
        &mut self,
        params: &TrainParams,
        x: &[u8],
        label: usize,
        rng: &mut R,
    ) -> Result<Vec<Flip>> {
        self.train_step_with(params, x, label, rng, |bank, class, x, out| {
            bank.clause_outputs_into(class, x, out)
        })
    }

    /// One training update with clause outputs supplied by `outputs`.
    ///
    /// `outputs(bank, class, x, out)` must fill `out` with the output of
    /// every clause of `class`. Outputs for both updated classes are taken
    /// before any automaton changes. Returns every action flip, in the
    /// order they happened.
    ///
    /// With more than one class, `label` is the target class and one other
    /// class is drawn uniformly as the negative class. A single-class bank
    /// takes `label` in `{0, 1}` and updates class 0 as target or negative.
    pub fn train_step_with<R, F>(
        &mut self,
        params: &TrainParams,
        x: &[u8],
        label: usize,
        rng: &mut R,
        mut outputs: F,
    ) -> Result<Vec<Flip>>
    where
        R: Rng + ?Sized,
        F: FnMut(&ClauseBank, usize, &[u8], &mut [bool]),
    {
        self.check_input(x)?;
        if params.threshold < 1 || params.specificity.is_nan() || params.specificity <= 1.0 {
            return Err(Error::Config("training needs T >= 1 and s > 1".into()));
        }
        let plan: [(usize, Role); 2];
        let updates: &[(usize, Role)] = if self.classes == 1 {
            if label > 1 {
                return Err(Error::InvalidLabel { label, classes: 2 });
            }
            plan = [(
                0,
                if label == 1 {
                    Role::Target
                } else {
                    Role::Negative
                },
            ); 2];
            &plan[..1]
        } else {
            if label >= self.classes {
                return Err(Error::InvalidLabel {
                    label,
                    classes: self.classes,
                });
            }
            let mut negative = rng.random_range(0..self.classes - 1);
            if negative >= label {
                negative += 1;
            }
            plan = [(label, Role::Target), (negative, Role::Negative)];
            &plan[..]
        };

        let mut clause_out = vec![false; self.clauses * updates.len()];
        for (slot, &(class, _)) in clause_out.chunks_mut(self.clauses).zip(updates) {
            outputs(self, class, x, slot);
        }

        let mut flips = Vec::new();
        for (out, &(class, role)) in clause_out.chunks(self.clauses).zip(updates) {
            self.feedback_class(params, class, role, x, out, rng, &mut flips);
        }
        Ok(flips)
    }

    #[allow(clippy::too_many_arguments)]
    fn feedback_class<R: Rng + ?Sized>(
        &mut self,
        params: &TrainParams,
        class: usize,
        role: Role,
        x: &[u8],
        outputs: &[bool],
        rng: &mut R,
        flips: &mut Vec<Flip>,
    ) {
        let half = self.clauses / 2;
        let t = params.threshold as i64;
        let votes: i64 = outputs
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(|(j, _)| if j < half { 1 } else { -1 })
            .sum();
        let v = votes.clamp(-t, t);
        let p_activate = match role {
            Role::Target => (t - v) as f64 / (2 * t) as f64,
            Role::Negative => (t + v) as f64 / (2 * t) as f64,
        };
        for (clause, &output) in outputs.iter().enumerate() {
            if rng.random::<f64>() >= p_activate {
                continue;
            }
            let positive = clause < half;
            let type_one = matches!(
                (role, positive),
                (Role::Target, true) | (Role::Negative, false)
            );
            if type_one {
                self.type_i(params, class, clause, x, output, rng, flips);
            } else {
                self.type_ii(class, clause, x, output, flips);
            }
        }
    }

    fn nudge(
        &mut self,
        class: usize,
        clause: usize,
        literal: usize,
        to_include: bool,
        flips: &mut Vec<Flip>,
    ) {
        let state = self.state(class, clause, literal);
        let signal = if to_include {
            automaton::toward_include(state)
        } else {
            automaton::toward_exclude(state)
        };
        let t = ta_apply(state, signal);
        self.set_state(class, clause, literal, t.state);
        if t.flipped {
            flips.push(Flip {
                class,
                clause,
                literal,
                direction: if t.state.includes() {
                    FlipDirection::Included
                } else {
                    FlipDirection::Excluded
                },
            });
        }
    }

    // Type I: reinforce true literals of firing clauses, erode everything else.
    #[allow(clippy::too_many_arguments)]
    fn type_i<R: Rng + ?Sized>(
        &mut self,
        params: &TrainParams,
        class: usize,
        clause: usize,
        x: &[u8],
        output: bool,
        rng: &mut R,
        flips: &mut Vec<Flip>,
    ) {
        let s = params.specificity;
        let p_strengthen = (s - 1.0) / s;
        let p_weaken = 1.0 / s;
        for literal in 0..self.literals() {
            if output && literal_value(x, literal) {
                if params.boost_true_positive || rng.random::<f64>() < p_strengthen {
                    self.nudge(class, clause, literal, true, flips);
                }
            } else if rng.random::<f64>() < p_weaken {
                self.nudge(class, clause, literal, false, flips);
            }
        }
    }

    // Type II: include a false literal so the clause stops firing.
    fn type_ii(
        &mut self,
        class: usize,
        clause: usize,
        x: &[u8],
        output: bool,
        flips: &mut Vec<Flip>,
    ) {
        if !output {
            return;
        }
        for literal in 0..self.literals() {
            if !literal_value(x, literal) && !self.includes(class, clause, literal) {
                self.nudge(class, clause, literal, true, flips);
            }
        }
    }
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[i32]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
