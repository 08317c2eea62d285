//! Falsification index over a [`ClauseBank`].
//!
//! For every (class, literal) pair the index keeps an inclusion list: the
//! ids of the clauses of that class whose automaton for the literal selects
//! include. A position matrix records where each clause sits in each list,
//! so both insertion (append) and removal (swap with the last entry) touch
//! a fixed number of cells regardless of list length.
//!
//! Scoring walks only the lists of the literals that are false under the
//! input. Every clause found there is falsified; clauses never reached are
//! true. A class score is then the number of falsified negative clauses
//! minus the number of falsified positive clauses.
//!
//! Storage follows the fixed-capacity table layout: each list owns `n`
//! slots and every table entry is an [`Entry`] word, two bytes by default.
//! Clause ids are class-local, ids below `n/2` have positive polarity, and
//! position `0` means "not in the list" (positions are 1-based).

use std::collections::BTreeSet;
use std::fmt::Debug;

use crate::bank::{argmax, ClauseBank, Flip, FlipDirection};
use crate::error::{Error, Result};

/// Position sentinel for a clause absent from a list.
pub const NA: usize = 0;

/// Largest clause count addressable with two-byte entries.
pub const MAX_CLAUSES: usize = u16::MAX as usize;

/// Unsigned word used for clause ids, list sizes and positions.
pub trait Entry: Copy + Ord + Default + Debug + Send + Sync + 'static {
    /// Largest clause count (and hence position) the word can hold.
    const MAX: usize;
    fn from_usize(v: usize) -> Self;
    fn to_usize(self) -> usize;
}

macro_rules! entry {
    ($($t:ty),*) => {$(
        impl Entry for $t {
            const MAX: usize = <$t>::MAX as usize;
            #[inline]
            fn from_usize(v: usize) -> Self {
                v as $t
            }
            #[inline]
            fn to_usize(self) -> usize {
                self as usize
            }
        }
    )*};
}

entry!(u16, u32);

/// Work done by one or more scoring calls.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkCounters {
    /// Clause ids fetched from inclusion lists (indexed path) or literals
    /// inspected (direct path).
    pub literal_visits: u64,
    /// Clauses marked falsified for the first time.
    pub clauses_falsified: u64,
}

impl WorkCounters {
    pub fn add(&mut self, other: &WorkCounters) {
        self.literal_visits += other.literal_visits;
        self.clauses_falsified += other.clauses_falsified;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InclusionIndex<E: Entry = u16> {
    classes: usize,
    clauses: usize,
    literals: usize,
    // (class * literals + literal) * clauses + slot
    lists: Vec<E>,
    // class * literals + literal
    sizes: Vec<E>,
    // (class * clauses + clause) * literals + literal
    positions: Vec<E>,
    accesses: u64,
}

impl InclusionIndex {
    /// Empty index with two-byte entries.
    pub fn empty(classes: usize, clauses: usize, features: usize) -> Result<Self> {
        Self::empty_sized(classes, clauses, features)
    }

    /// Builds a two-byte index from the include actions of `bank`.
    pub fn build(bank: &ClauseBank) -> Result<Self> {
        Self::build_sized(bank)
    }
}

impl<E: Entry> InclusionIndex<E> {
    /// Empty index for the given shape, entries of type `E`.
    pub fn empty_sized(classes: usize, clauses: usize, features: usize) -> Result<Self> {
        if clauses > E::MAX {
            return Err(Error::Capacity(format!(
                "{clauses} clauses per class exceed the index limit of {}",
                E::MAX
            )));
        }
        if !clauses.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "clause count must be even, got {clauses}"
            )));
        }
        let literals = 2 * features;
        let cells = classes
            .checked_mul(clauses)
            .and_then(|v| v.checked_mul(literals))
            .ok_or_else(|| Error::Capacity("index dimensions overflow".into()))?;
        Ok(Self {
            classes,
            clauses,
            literals,
            lists: vec![E::default(); cells],
            sizes: vec![E::default(); classes * literals],
            positions: vec![E::default(); cells],
            accesses: 0,
        })
    }

    /// Builds the index from the include actions of `bank`.
    pub fn build_sized(bank: &ClauseBank) -> Result<Self> {
        let mut idx = Self::empty_sized(bank.classes(), bank.clauses(), bank.features())?;
        let half = bank.half_range();
        for class in 0..bank.classes() {
            for clause in 0..bank.clauses() {
                for (literal, &s) in bank.team(class, clause).iter().enumerate() {
                    if s > half {
                        idx.insert(class, literal, clause)?;
                    }
                }
            }
        }
        idx.accesses = 0;
        Ok(idx)
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn clauses(&self) -> usize {
        self.clauses
    }

    pub fn literals(&self) -> usize {
        self.literals
    }

    pub fn features(&self) -> usize {
        self.literals / 2
    }

    #[inline]
    fn list_base(&self, class: usize, literal: usize) -> usize {
        (class * self.literals + literal) * self.clauses
    }

    #[inline]
    fn pos_at(&self, class: usize, clause: usize, literal: usize) -> usize {
        (class * self.clauses + clause) * self.literals + literal
    }

    /// The inclusion list for (class, literal), in list order.
    pub fn list(&self, class: usize, literal: usize) -> &[E] {
        let base = self.list_base(class, literal);
        let len = self.sizes[class * self.literals + literal].to_usize();
        &self.lists[base..base + len]
    }

    pub fn list_len(&self, class: usize, literal: usize) -> usize {
        self.sizes[class * self.literals + literal].to_usize()
    }

    /// 1-based position of `clause` in the (class, literal) list, or [`NA`].
    pub fn position(&self, class: usize, clause: usize, literal: usize) -> usize {
        self.positions[self.pos_at(class, clause, literal)].to_usize()
    }

    pub fn contains(&self, class: usize, literal: usize, clause: usize) -> bool {
        self.position(class, clause, literal) != NA
    }

    /// Element reads and writes performed by insert/remove since the last
    /// [`reset_access_count`](Self::reset_access_count).
    pub fn access_count(&self) -> u64 {
        self.accesses
    }

    pub fn reset_access_count(&mut self) {
        self.accesses = 0;
    }

    // Counted cell accessors used by insert and remove.
    #[inline]
    fn read_size(&mut self, slot: usize) -> usize {
        self.accesses += 1;
        self.sizes[slot].to_usize()
    }

    #[inline]
    fn write_size(&mut self, slot: usize, v: usize) {
        self.accesses += 1;
        self.sizes[slot] = E::from_usize(v);
    }

    #[inline]
    fn read_list(&mut self, at: usize) -> usize {
        self.accesses += 1;
        self.lists[at].to_usize()
    }

    #[inline]
    fn write_list(&mut self, at: usize, clause: usize) {
        self.accesses += 1;
        self.lists[at] = E::from_usize(clause);
    }

    #[inline]
    fn read_pos(&mut self, at: usize) -> usize {
        self.accesses += 1;
        self.positions[at].to_usize()
    }

    #[inline]
    fn write_pos(&mut self, at: usize, p: usize) {
        self.accesses += 1;
        self.positions[at] = E::from_usize(p);
    }

    fn check_coords(&self, class: usize, literal: usize, clause: usize) -> Result<()> {
        if class >= self.classes || literal >= self.literals || clause >= self.clauses {
            return Err(Error::Integrity(format!(
                "coordinates (class {class}, literal {literal}, clause {clause}) outside index"
            )));
        }
        Ok(())
    }

    /// Appends `clause` to the (class, literal) list.
    pub fn insert(&mut self, class: usize, literal: usize, clause: usize) -> Result<()> {
        self.check_coords(class, literal, clause)?;
        let pos = self.pos_at(class, clause, literal);
        if self.read_pos(pos) != NA {
            return Err(Error::Integrity(format!(
                "clause {clause} already in list (class {class}, literal {literal})"
            )));
        }
        let slot = class * self.literals + literal;
        let len = self.read_size(slot) + 1;
        self.write_size(slot, len);
        let base = self.list_base(class, literal);
        self.write_list(base + len - 1, clause);
        self.write_pos(pos, len);
        Ok(())
    }

    /// Removes `clause` from the (class, literal) list by moving the last
    /// entry into its slot.
    pub fn remove(&mut self, class: usize, literal: usize, clause: usize) -> Result<()> {
        self.check_coords(class, literal, clause)?;
        let pos = self.pos_at(class, clause, literal);
        let p = self.read_pos(pos);
        if p == NA {
            return Err(Error::Integrity(format!(
                "clause {clause} not in list (class {class}, literal {literal})"
            )));
        }
        let slot = class * self.literals + literal;
        let base = self.list_base(class, literal);
        let len = self.read_size(slot);
        if p > len {
            return Err(Error::Integrity(format!(
                "clause {clause} recorded at position {p} of a {len}-entry list (class {class}, literal {literal})"
            )));
        }
        let last = self.read_list(base + len - 1);
        self.write_list(base + p - 1, last);
        self.write_size(slot, len - 1);
        let moved = self.pos_at(class, last, literal);
        self.write_pos(moved, p);
        self.write_pos(pos, NA);
        Ok(())
    }

    /// Mirrors a batch of training flips, in order.
    pub fn apply_flips(&mut self, flips: &[Flip]) -> Result<()> {
        for f in flips {
            match f.direction {
                FlipDirection::Included => self.insert(f.class, f.literal, f.clause)?,
                FlipDirection::Excluded => self.remove(f.class, f.literal, f.clause)?,
            }
        }
        Ok(())
    }

    /// Checks that every list entry points back at its own position, that
    /// lists hold no duplicates, and that no stray positions exist.
    pub fn check_coherence(&self) -> Result<()> {
        let mut listed = 0usize;
        for class in 0..self.classes {
            for literal in 0..self.literals {
                let len = self.list_len(class, literal);
                if len > self.clauses {
                    return Err(Error::Integrity(format!(
                        "list (class {class}, literal {literal}) has length {len} > {}",
                        self.clauses
                    )));
                }
                for (i, &clause) in self.list(class, literal).iter().enumerate() {
                    let clause = clause.to_usize();
                    if clause >= self.clauses {
                        return Err(Error::Integrity(format!(
                            "list (class {class}, literal {literal}) holds invalid clause {clause}"
                        )));
                    }
                    let p = self.position(class, clause, literal);
                    if p != i + 1 {
                        return Err(Error::Integrity(format!(
                            "class {class} literal {literal} clause {clause}: listed at {} but position matrix says {p}",
                            i + 1
                        )));
                    }
                }
                listed += len;
            }
        }
        let recorded = self.positions.iter().filter(|p| p.to_usize() != NA).count();
        if recorded != listed {
            return Err(Error::Integrity(format!(
                "position matrix holds {recorded} entries but lists hold {listed}"
            )));
        }
        Ok(())
    }

    /// Compares list membership (as sets) with the include actions of `bank`.
    pub fn check_against(&self, bank: &ClauseBank) -> Result<()> {
        if bank.classes() != self.classes
            || bank.clauses() != self.clauses
            || bank.literals() != self.literals
        {
            return Err(Error::Integrity("index shape differs from bank".into()));
        }
        for class in 0..self.classes {
            for literal in 0..self.literals {
                let have: BTreeSet<usize> = self
                    .list(class, literal)
                    .iter()
                    .map(|c| c.to_usize())
                    .collect();
                if have.len() != self.list_len(class, literal) {
                    return Err(Error::Integrity(format!(
                        "duplicate entries in list (class {class}, literal {literal})"
                    )));
                }
                let want: BTreeSet<usize> = (0..self.clauses)
                    .filter(|&j| bank.includes(class, j, literal))
                    .collect();
                if have != want {
                    let missing: Vec<_> = want.difference(&have).collect();
                    let extra: Vec<_> = have.difference(&want).collect();
                    return Err(Error::Integrity(format!(
                        "list (class {class}, literal {literal}) differs from bank: missing {missing:?}, extra {extra:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Deliberately corrupts one position entry. Used to exercise the
    /// integrity checks.
    #[doc(hidden)]
    pub fn inject_fault(&mut self, class: usize, clause: usize, literal: usize) {
        let at = self.pos_at(class, clause, literal);
        self.positions[at] = E::from_usize(self.positions[at].to_usize().wrapping_add(1));
    }
}

/// Per-reader scratch for indexed scoring.
///
/// Holds one generation stamp per clause: a clause is falsified in the
/// current call iff its stamp equals the current generation, so nothing
/// has to be cleared between calls.
#[derive(Debug, Clone)]
pub struct Scorer {
    stamps: Vec<u32>,
    generation: u32,
    false_literals: Vec<usize>,
}

impl Scorer {
    pub fn new<E: Entry>(index: &InclusionIndex<E>) -> Self {
        Self {
            stamps: vec![0; index.classes * index.clauses],
            generation: 0,
            false_literals: Vec::with_capacity(index.features()),
        }
    }

    fn next_generation(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamps.fill(0);
            self.generation = 1;
        }
    }

    fn collect_false_literals(&mut self, x: &[u8]) {
        let o = x.len();
        self.false_literals.clear();
        self.false_literals.extend(
            x.iter()
                .enumerate()
                .map(|(k, &v)| if v == 0 { k } else { o + k }),
        );
    }

    fn check<E: Entry>(&mut self, index: &InclusionIndex<E>, x: &[u8]) -> Result<()> {
        if x.len() != index.features() {
            return Err(Error::Shape {
                expected: index.features(),
                actual: x.len(),
            });
        }
        if self.stamps.len() != index.classes * index.clauses {
            *self = Scorer::new(index);
        }
        Ok(())
    }

    /// Marks the falsified clauses of `class`; returns (positive, negative)
    /// falsified counts.
    fn falsify_class<E: Entry>(
        &mut self,
        index: &InclusionIndex<E>,
        class: usize,
        counters: &mut WorkCounters,
    ) -> (i32, i32) {
        let half = index.clauses / 2;
        let stamps = &mut self.stamps[class * index.clauses..(class + 1) * index.clauses];
        let gen = self.generation;
        let mut pos = 0i32;
        let mut neg = 0i32;
        for &literal in &self.false_literals {
            let list = index.list(class, literal);
            counters.literal_visits += list.len() as u64;
            for &clause in list {
                let clause = clause.to_usize();
                let stamp = &mut stamps[clause];
                if *stamp != gen {
                    *stamp = gen;
                    if clause < half {
                        pos += 1;
                    } else {
                        neg += 1;
                    }
                }
            }
        }
        counters.clauses_falsified += (pos + neg) as u64;
        (pos, neg)
    }

    /// Score of every class from the falsified-set cardinalities.
    pub fn class_scores<E: Entry>(
        &mut self,
        index: &InclusionIndex<E>,
        x: &[u8],
        counters: &mut WorkCounters,
        out: &mut [i32],
    ) -> Result<()> {
        self.check(index, x)?;
        if out.len() != index.classes {
            return Err(Error::Shape {
                expected: index.classes,
                actual: out.len(),
            });
        }
        self.next_generation();
        self.collect_false_literals(x);
        for (class, slot) in out.iter_mut().enumerate() {
            let (pos, neg) = self.falsify_class(index, class, counters);
            *slot = neg - pos;
        }
        Ok(())
    }

    pub fn predict<E: Entry>(
        &mut self,
        index: &InclusionIndex<E>,
        x: &[u8],
        counters: &mut WorkCounters,
    ) -> Result<usize> {
        let mut scores = vec![0; index.classes];
        self.class_scores(index, x, counters, &mut scores)?;
        Ok(argmax(&scores))
    }

    /// Clause outputs of one class via falsification (true = not falsified).
    pub fn clause_outputs<E: Entry>(
        &mut self,
        index: &InclusionIndex<E>,
        class: usize,
        x: &[u8],
        counters: &mut WorkCounters,
        out: &mut [bool],
    ) -> Result<()> {
        self.check(index, x)?;
        if class >= index.classes {
            return Err(Error::ClassOutOfRange {
                class,
                classes: index.classes,
            });
        }
        if out.len() != index.clauses {
            return Err(Error::Shape {
                expected: index.clauses,
                actual: out.len(),
            });
        }
        self.next_generation();
        self.collect_false_literals(x);
        self.falsify_class(index, class, counters);
        let gen = self.generation;
        let stamps = &self.stamps[class * index.clauses..(class + 1) * index.clauses];
        for (o, &s) in out.iter_mut().zip(stamps) {
            *o = s != gen;
        }
        Ok(())
    }
}

/// Convenience wrapper: indexed class scores with a throwaway scorer.
pub fn indexed_class_scores<E: Entry>(
    index: &InclusionIndex<E>,
    x: &[u8],
    counters: &mut WorkCounters,
) -> Result<Vec<i32>> {
    let mut scorer = Scorer::new(index);
    let mut out = vec![0; index.classes];
    scorer.class_scores(index, x, counters, &mut out)?;
    Ok(out)
}

pub fn indexed_predict<E: Entry>(index: &InclusionIndex<E>, x: &[u8]) -> Result<usize> {
    Scorer::new(index).predict(index, x, &mut WorkCounters::default())
}

/// Literal inspections made by a full direct evaluation of one input.
pub fn direct_visits(classes: usize, clauses: usize, features: usize) -> u64 {
    (classes * clauses * 2 * features) as u64
}

/// Memory estimate for a bank and its index, in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryEstimate {
    pub tm_bytes: u64,
    pub index_bytes: u64,
    pub total: u64,
}

/// Byte-per-automaton bank plus two 2-byte tables of `m·o` rows by `n`
/// columns.
pub fn estimate_memory(classes: u64, clauses: u64, features: u64) -> Result<MemoryEstimate> {
    if classes == 0 || clauses == 0 || features == 0 {
        return Err(Error::Config("dimensions must be positive".into()));
    }
    let overflow = || Error::Capacity("memory estimate overflows u64".into());
    let tm_bytes = 2u64
        .checked_mul(classes)
        .and_then(|v| v.checked_mul(clauses))
        .and_then(|v| v.checked_mul(features))
        .ok_or_else(overflow)?;
    let index_bytes = tm_bytes.checked_mul(2).ok_or_else(overflow)?;
    let total = tm_bytes.checked_add(index_bytes).ok_or_else(overflow)?;
    Ok(MemoryEstimate {
        tm_bytes,
        index_bytes,
        total,
    })
}
