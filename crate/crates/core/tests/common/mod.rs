#![allow(dead_code)]

use tsetlin_index::{ClauseBank, TaTeam, TmConfig};

// Clause ids of the worked example: ids below n/2 vote for the class.
pub const C1_POS: usize = 0;
pub const C2_POS: usize = 1;
pub const C1_NEG: usize = 2;
pub const C2_NEG: usize = 3;

// Literal ids for o = 2.
pub const X1: usize = 0;
pub const X2: usize = 1;
pub const NOT_X1: usize = 2;
pub const NOT_X2: usize = 3;

/// Class 0 holds the worked-example clauses: C1+ and C2+ include x_1,
/// C1- and C2- include ¬x_1 and x_2. Any further classes stay empty.
pub fn worked_example_bank(classes: usize) -> ClauseBank {
    let mut bank = ClauseBank::new(&TmConfig::new(classes, 4, 2)).unwrap();
    let team = |lits: &[usize]| {
        let mut t = TaTeam::new(2, 100);
        for &k in lits {
            t.set_include(k, true);
        }
        t
    };
    bank.set_team(0, C1_POS, &team(&[X1])).unwrap();
    bank.set_team(0, C2_POS, &team(&[X1])).unwrap();
    bank.set_team(0, C1_NEG, &team(&[NOT_X1, X2])).unwrap();
    bank.set_team(0, C2_NEG, &team(&[NOT_X1, X2])).unwrap();
    bank
}

pub fn all_inputs(o: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1u32 << o).map(move |bits| (0..o).map(|k| ((bits >> k) & 1) as u8).collect())
}
