//! Two-action Tsetlin automata.
//!
//! An automaton with half-range `N` moves through the states `1..=2N`.
//! States above `N` select the include action, the rest select exclude.
//! States are stored as bytes, so `N` is limited to [`MAX_HALF_RANGE`].

/// Largest supported half-range; keeps `2N` inside a byte.
pub const MAX_HALF_RANGE: u8 = 127;

/// Default half-range: states `1..=200`.
pub const DEFAULT_HALF_RANGE: u8 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Reward,
    Penalty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Include,
    Exclude,
}

/// State of a single automaton together with its half-range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaState {
    value: u8,
    half_range: u8,
}

/// Result of applying one signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub state: TaState,
    pub flipped: bool,
}

impl TaState {
    /// Returns `None` when `value` is outside `1..=2N` or `N` is unsupported.
    pub fn new(value: u8, half_range: u8) -> Option<Self> {
        if half_range == 0 || half_range > MAX_HALF_RANGE {
            return None;
        }
        if value == 0 || value > 2 * half_range {
            return None;
        }
        Some(Self { value, half_range })
    }

    pub fn value(self) -> u8 {
        self.value
    }

    pub fn half_range(self) -> u8 {
        self.half_range
    }

    pub fn action(self) -> Action {
        if self.value > self.half_range {
            Action::Include
        } else {
            Action::Exclude
        }
    }

    pub fn includes(self) -> bool {
        self.action() == Action::Include
    }
}

/// Applies a reward or penalty and reports whether the action flipped.
pub fn ta_apply(state: TaState, signal: Signal) -> Transition {
    let top = 2 * state.half_range;
    let value = match (state.action(), signal) {
        (Action::Include, Signal::Reward) => (state.value + 1).min(top),
        (Action::Include, Signal::Penalty) => state.value - 1,
        (Action::Exclude, Signal::Reward) => state.value.saturating_sub(1).max(1),
        (Action::Exclude, Signal::Penalty) => state.value + 1,
    };
    let next = TaState { value, ..state };
    Transition {
        state: next,
        flipped: next.action() != state.action(),
    }
}

/// Signal that moves an automaton one step toward including its literal.
pub(crate) fn toward_include(state: TaState) -> Signal {
    match state.action() {
        Action::Include => Signal::Reward,
        Action::Exclude => Signal::Penalty,
    }
}

/// Signal that moves an automaton one step toward excluding its literal.
pub(crate) fn toward_exclude(state: TaState) -> Signal {
    match state.action() {
        Action::Include => Signal::Penalty,
        Action::Exclude => Signal::Reward,
    }
}
