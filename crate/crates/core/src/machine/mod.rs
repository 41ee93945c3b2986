//! Deterministic single-tape machines over `{0, 1, blank}`.

mod run;
mod table;

pub use run::{
    read_output, run, run_with, Execution, RunOptions, RunOutcome, RunStatus, Tape,
    DEFAULT_LOOP_WINDOW,
};
pub use table::{lines_by_state, Instruction, MachineTable, Move, Symbol, Violation};

use rand::Rng;

/// A random valid table with `n_states` states (s₀ included); each
/// `(state, symbol)` pair gets a line with probability 3/4.
pub fn random_table<R: Rng>(rng: &mut R, n_states: u32) -> MachineTable {
    let mut lines = Vec::new();
    for state in 1..n_states {
        for scanned in Symbol::ALL {
            if rng.gen_range(0..4) == 0 {
                continue;
            }
            lines.push(Instruction::new(
                state,
                scanned,
                Symbol::ALL[rng.gen_range(0..3)],
                [Move::Left, Move::Right, Move::Stay][rng.gen_range(0..3)],
                rng.gen_range(0..n_states),
            ));
        }
    }
    MachineTable::new(n_states, lines)
}
