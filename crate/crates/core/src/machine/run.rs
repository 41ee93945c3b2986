use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use super::table::{Instruction, MachineTable, Symbol};
use crate::error::{Error, Result};
use crate::word::Word;

/// Default number of recent configurations kept for loop detection.
pub const DEFAULT_LOOP_WINDOW: usize = 1 << 16;

/// Two-sided infinite tape over `{0, 1, blank}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tape {
    right: Vec<Symbol>,
    left: Vec<Symbol>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    /// A tape holding `word` at positions `0..len`, blank elsewhere.
    pub fn with_word(word: &Word) -> Self {
        Tape {
            right: word.bits().iter().map(|b| Symbol::from_bit(*b)).collect(),
            left: Vec::new(),
        }
    }

    pub fn get(&self, pos: i64) -> Symbol {
        let cell = if pos >= 0 {
            self.right.get(pos as usize)
        } else {
            self.left.get((-pos - 1) as usize)
        };
        cell.copied().unwrap_or(Symbol::Blank)
    }

    pub fn set(&mut self, pos: i64, sym: Symbol) {
        let (vec, idx) = if pos >= 0 {
            (&mut self.right, pos as usize)
        } else {
            (&mut self.left, (-pos - 1) as usize)
        };
        if idx >= vec.len() {
            if sym == Symbol::Blank {
                return;
            }
            vec.resize(idx + 1, Symbol::Blank);
        }
        vec[idx] = sym;
    }

    /// Smallest and largest non-blank positions, if any.
    pub fn extent(&self) -> Option<(i64, i64)> {
        let lo_left = self.left.iter().rposition(|s| *s != Symbol::Blank);
        let lo = match lo_left {
            Some(i) => Some(-(i as i64) - 1),
            None => self.right.iter().position(|s| *s != Symbol::Blank).map(|i| i as i64),
        };
        let hi_right = self.right.iter().rposition(|s| *s != Symbol::Blank);
        let hi = match hi_right {
            Some(i) => Some(i as i64),
            None => self.left.iter().position(|s| *s != Symbol::Blank).map(|i| -(i as i64) - 1),
        };
        lo.zip(hi)
    }

    /// Non-blank content as `(first position, cells)`; blanks inside are kept.
    pub fn trimmed(&self) -> Option<(i64, Vec<Symbol>)> {
        let (lo, hi) = self.extent()?;
        Some((lo, (lo..=hi).map(|p| self.get(p)).collect()))
    }

    pub fn count(&self, sym: Symbol) -> usize {
        self.right.iter().chain(self.left.iter()).filter(|s| **s == sym).count()
    }

    /// The output word: the maximal non-blank block containing `head`, or the
    /// empty word when the head rests on a blank cell.
    pub fn read_output(&self, head: i64) -> Word {
        if self.get(head) == Symbol::Blank {
            return Word::empty();
        }
        let mut lo = head;
        while self.get(lo - 1) != Symbol::Blank {
            lo -= 1;
        }
        let mut bits = Vec::new();
        let mut p = lo;
        while let Some(b) = self.get(p).bit() {
            bits.push(b);
            p += 1;
        }
        Word::from_bits(bits)
    }
}

/// Free-function form of [`Tape::read_output`].
pub fn read_output(tape: &Tape, head: i64) -> Word {
    tape.read_output(head)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Halted,
    BudgetExhausted,
    LoopDetected,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub status: RunStatus,
    /// Present iff halted.
    pub output: Option<Word>,
    /// `|input| + steps_used`, present iff halted.
    pub op_time: Option<u64>,
    pub steps_used: u64,
}

impl RunOutcome {
    pub fn halted(&self) -> bool {
        self.status == RunStatus::Halted
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub budget: u64,
    /// Number of recent configurations remembered; `0` turns loop detection off.
    pub loop_window: usize,
}

impl RunOptions {
    pub fn budget(budget: u64) -> Self {
        RunOptions {
            budget,
            loop_window: DEFAULT_LOOP_WINDOW,
        }
    }

    pub fn without_loop_detection(budget: u64) -> Self {
        RunOptions {
            budget,
            loop_window: 0,
        }
    }
}

/// A running single-tape machine.
///
/// Starts in s₁ with the head on the leftmost input cell (a blank cell for the
/// empty input). A table without working states starts in s₀. A missing line
/// for the scanned `(state, symbol)` pair moves to s₀ without writing or
/// moving, and counts as one cycle.
#[derive(Clone, Debug)]
pub struct Execution {
    dense: Vec<Option<Instruction>>,
    pub tape: Tape,
    pub head: i64,
    pub state: u32,
    pub steps: u64,
}

impl Execution {
    pub fn new(table: &MachineTable, input: &Word) -> Result<Self> {
        table
            .validate()
            .map_err(Error::InvalidTable)?;
        Ok(Self::new_unchecked(table, Tape::with_word(input)))
    }

    pub(crate) fn new_unchecked(table: &MachineTable, tape: Tape) -> Self {
        Execution {
            dense: table.dense(),
            tape,
            head: 0,
            state: if table.is_trivial() { 0 } else { 1 },
            steps: 0,
        }
    }

    pub fn is_halted(&self) -> bool {
        self.state == 0
    }

    /// Performs one cycle. No-op once halted.
    #[inline]
    pub fn step(&mut self) {
        if self.state == 0 {
            return;
        }
        let sym = self.tape.get(self.head);
        match self.dense[self.state as usize * 3 + sym.index()] {
            Some(ins) => {
                self.tape.set(self.head, ins.write);
                self.head += ins.mv.delta();
                self.state = ins.next;
            }
            None => self.state = 0,
        }
        self.steps += 1;
    }

    /// Zobrist hash of the tape contents; `run_execution` updates it incrementally.
    fn tape_hash(&self) -> u64 {
        let mut h = 0u64;
        if let Some((lo, cells)) = self.tape.trimmed() {
            for (i, s) in cells.iter().enumerate() {
                h ^= cell_key(lo + i as i64, *s);
            }
        }
        h
    }

    fn same_config(&self, other: &Execution) -> bool {
        self.state == other.state && self.head == other.head && self.tape.trimmed() == other.tape.trimmed()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn cell_key(pos: i64, sym: Symbol) -> u64 {
    match sym {
        Symbol::Blank => 0,
        _ => splitmix((pos as u64).wrapping_mul(4) ^ sym.index() as u64),
    }
}

#[inline]
fn head_key(state: u32, head: i64) -> u64 {
    splitmix(0xdead_beef_u64 ^ ((state as u64) << 40) ^ (head as u64).wrapping_mul(0x1_0000_0001))
}

/// Runs `table` on `input` for at most `budget` cycles with the default loop window.
pub fn run(table: &MachineTable, input: &Word, budget: u64) -> Result<RunOutcome> {
    run_with(table, input, RunOptions::budget(budget))
}

pub fn run_with(table: &MachineTable, input: &Word, opts: RunOptions) -> Result<RunOutcome> {
    let exec = Execution::new(table, input)?;
    Ok(run_execution(exec, input.len() as u64, opts, || {
        Execution::new_unchecked(table, Tape::with_word(input))
    })
    .0)
}

/// Drives an execution to completion. `restart` rebuilds the initial execution
/// so that a suspected repeat can be confirmed exactly by replay.
pub(crate) fn run_execution(
    mut exec: Execution,
    input_len: u64,
    opts: RunOptions,
    restart: impl Fn() -> Execution,
) -> (RunOutcome, Execution) {
    let mut tape_hash = exec.tape_hash();
    let mut seen: HashMap<u64, u64> = HashMap::new();
    let mut order: VecDeque<(u64, u64)> = VecDeque::new();
    let detect = opts.loop_window > 0;

    loop {
        if exec.is_halted() {
            let output = exec.tape.read_output(exec.head);
            let outcome = RunOutcome {
                status: RunStatus::Halted,
                output: Some(output),
                op_time: Some(input_len + exec.steps),
                steps_used: exec.steps,
            };
            return (outcome, exec);
        }
        if exec.steps >= opts.budget {
            return (
                RunOutcome {
                    status: RunStatus::BudgetExhausted,
                    output: None,
                    op_time: None,
                    steps_used: exec.steps,
                },
                exec,
            );
        }
        if detect {
            let h = tape_hash ^ head_key(exec.state, exec.head);
            if let Some(&earlier) = seen.get(&h) {
                if confirm_repeat(&exec, earlier, &restart) {
                    return (
                        RunOutcome {
                            status: RunStatus::LoopDetected,
                            output: None,
                            op_time: None,
                            steps_used: exec.steps,
                        },
                        exec,
                    );
                }
            }
            seen.insert(h, exec.steps);
            order.push_back((h, exec.steps));
            if order.len() > opts.loop_window {
                let (old, at) = order.pop_front().expect("nonempty");
                if seen.get(&old) == Some(&at) {
                    seen.remove(&old);
                }
            }
        }
        let before = exec.tape.get(exec.head);
        let pos = exec.head;
        exec.step();
        if detect {
            let after = exec.tape.get(pos);
            if after != before {
                tape_hash ^= cell_key(pos, before) ^ cell_key(pos, after);
            }
        }
    }
}

fn confirm_repeat(current: &Execution, earlier: u64, restart: &impl Fn() -> Execution) -> bool {
    let mut replay = restart();
    while replay.steps < earlier {
        replay.step();
    }
    replay.same_config(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::table::Move;

    #[test]
    fn empty_table_is_identity() {
        let out = run(&MachineTable::empty(), &Word::from("01"), 10).unwrap();
        assert_eq!(out.status, RunStatus::Halted);
        assert_eq!(out.output, Some(Word::from("01")));
        assert_eq!(out.steps_used, 0);
        assert_eq!(out.op_time, Some(2));
    }

    #[test]
    fn zero_budget_exhausts() {
        let t: MachineTable = "1 0 -> 0 R 1\n1 1 -> 1 R 1".parse().unwrap();
        let out = run(&t, &Word::from("0110"), 0).unwrap();
        assert_eq!(out.status, RunStatus::BudgetExhausted);
        assert_eq!(out.output, None);
        assert_eq!(out.op_time, None);
    }

    #[test]
    fn missing_line_halts_in_place() {
        let t: MachineTable = "1 0 -> 1 R 1".parse().unwrap();
        let out = run(&t, &Word::from("001"), 100).unwrap();
        assert_eq!(out.output, Some(Word::from("111")));
        assert_eq!(out.steps_used, 3);
        assert_eq!(out.op_time, Some(6));
    }

    #[test]
    fn output_block_rules() {
        let mut tape = Tape::new();
        for (p, s) in [(0, Symbol::One), (1, Symbol::Zero), (2, Symbol::One)] {
            tape.set(p, s);
        }
        assert_eq!(tape.read_output(1), Word::from("101"));
        assert_eq!(tape.read_output(3), Word::empty());
        let mut tape = Tape::new();
        tape.set(0, Symbol::One);
        tape.set(2, Symbol::One);
        assert_eq!(tape.read_output(0), Word::from("1"));
        assert_eq!(read_output(&tape, -5), Word::empty());
    }

    #[test]
    fn ping_pong_loop_is_detected() {
        let t: MachineTable = "states 3\n1 _ -> _ R 2\n2 _ -> _ L 1".parse().unwrap();
        let out = run(&t, &Word::empty(), 1_000).unwrap();
        assert_eq!(out.status, RunStatus::LoopDetected);
        assert!(out.steps_used <= 3);
        let off = run_with(&t, &Word::empty(), RunOptions::without_loop_detection(1000)).unwrap();
        assert_eq!(off.status, RunStatus::BudgetExhausted);
    }

    #[test]
    fn runaway_is_not_a_loop() {
        let t: MachineTable = "1 _ -> 1 R 1".parse().unwrap();
        let out = run(&t, &Word::empty(), 500).unwrap();
        assert_eq!(out.status, RunStatus::BudgetExhausted);
        assert_eq!(out.steps_used, 500);
    }

    #[test]
    fn invalid_table_is_an_error() {
        let t = MachineTable::new(
            2,
            vec![
                Instruction::new(1, Symbol::Zero, Symbol::One, Move::Right, 0),
                Instruction::new(1, Symbol::Zero, Symbol::Zero, Move::Left, 0),
            ],
        );
        assert!(matches!(run(&t, &Word::empty(), 5), Err(Error::InvalidTable(_))));
    }

    #[test]
    fn tape_extent_spans_both_sides() {
        let mut t = Tape::new();
        assert_eq!(t.extent(), None);
        t.set(-3, Symbol::Zero);
        t.set(4, Symbol::One);
        assert_eq!(t.extent(), Some((-3, 4)));
        t.set(4, Symbol::Blank);
        assert_eq!(t.extent(), Some((-3, -3)));
    }
}
