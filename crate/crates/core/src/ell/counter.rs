//! Counter programs compiled to single-tape machine tables.
//!
//! A program manipulates `k` unary counters, consumes its input word bit by
//! bit from the left and builds its output word bit by bit from the right.
//! The compiled machine keeps counter `j` as the block `0 1^v` and the blocks
//! side by side separated by single blanks, to the right of the input:
//!
//! ```text
//!   … _ input-or-output _ 0111 _ 01 _ 0 _ …
//!                         ^ home (marker of counter 0)
//! ```
//!
//! Every compiled operation starts and ends with the head on the home marker.
//! On `Halt` the counters are erased and the head is parked on the leftmost
//! output bit, so compiled machines halt with a clean tape.

use std::collections::VecDeque;

use crate::machine::{Instruction, MachineTable, Move, Symbol};
use crate::word::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Label(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Inc(usize),
    /// Jump if the counter is zero, otherwise decrement and fall through.
    DecJz(usize, Label),
    Jmp(Label),
    /// Consume the leftmost remaining input bit.
    ReadBit { zero: Label, one: Label, empty: Label },
    /// Prepend a bit to the output word.
    WriteBit(bool),
    Halt,
}

/// A program over `counters` counters. Programs read all the input they need
/// before they write output.
#[derive(Clone, Debug)]
pub struct CounterProgram {
    pub counters: usize,
    ops: Vec<Op>,
    targets: Vec<usize>,
}

#[derive(Debug, Default)]
pub struct ProgramBuilder {
    counters: usize,
    ops: Vec<Op>,
    labels: Vec<Option<usize>>,
}

impl ProgramBuilder {
    pub fn new(counters: usize) -> Self {
        assert!(counters >= 1);
        ProgramBuilder {
            counters,
            ..Default::default()
        }
    }

    pub fn label(&mut self) -> Label {
        self.labels.push(None);
        Label(self.labels.len() - 1)
    }

    pub fn place(&mut self, l: Label) {
        assert!(self.labels[l.0].is_none(), "label placed twice");
        self.labels[l.0] = Some(self.ops.len());
    }

    pub fn here(&mut self) -> Label {
        let l = self.label();
        self.place(l);
        l
    }

    pub fn op(&mut self, op: Op) -> &mut Self {
        match op {
            Op::Inc(c) | Op::DecJz(c, _) => assert!(c < self.counters, "counter {c} out of range"),
            _ => {}
        }
        self.ops.push(op);
        self
    }

    pub fn inc(&mut self, c: usize) -> &mut Self {
        self.op(Op::Inc(c))
    }

    /// `to += from; from = 0`.
    pub fn drain(&mut self, from: usize, to: &[usize]) {
        let top = self.here();
        let done = self.label();
        self.op(Op::DecJz(from, done));
        for &t in to {
            self.inc(t);
        }
        self.op(Op::Jmp(top));
        self.place(done);
    }

    pub fn clear(&mut self, c: usize) {
        self.drain(c, &[]);
    }

    /// `to += from`, preserving `from`, using the zero counter `tmp`.
    pub fn add_copy(&mut self, from: usize, to: usize, tmp: usize) {
        self.drain(from, &[to, tmp]);
        self.drain(tmp, &[from]);
    }

    /// `c = 2c + 1 + bit`, using the zero counter `tmp`.
    pub fn shift_in(&mut self, c: usize, bit: bool, tmp: usize) {
        self.drain(c, &[tmp, tmp]);
        self.drain(tmp, &[c]);
        self.inc(c);
        if bit {
            self.inc(c);
        }
    }

    /// Reads the whole input word into counter `c` (its canonical index).
    pub fn read_input(&mut self, c: usize, tmp: usize) {
        let top = self.here();
        let (zero, one, done) = (self.label(), self.label(), self.label());
        self.op(Op::ReadBit { zero, one, empty: done });
        self.place(zero);
        self.shift_in(c, false, tmp);
        self.op(Op::Jmp(top));
        self.place(one);
        self.shift_in(c, true, tmp);
        self.op(Op::Jmp(top));
        self.place(done);
    }

    /// Adds the canonical index of `w` to the zero counter `c`.
    pub fn load_word(&mut self, c: usize, w: &Word, tmp: usize) {
        for &b in w.bits() {
            self.shift_in(c, b, tmp);
        }
    }

    /// Writes the canonical word of counter `c` as the output, emptying `c`
    /// and using the zero counter `half`.
    pub fn write_output(&mut self, c: usize, half: usize) {
        // v = 2u + 1 + b: the low bit of the word is b, the rest is word(u).
        let top = self.here();
        let (done, even, odd) = (self.label(), self.label(), self.label());
        self.op(Op::DecJz(c, done));
        let halve = self.here();
        self.op(Op::DecJz(c, even));
        self.op(Op::DecJz(c, odd));
        self.inc(half);
        self.op(Op::Jmp(halve));
        self.place(even);
        self.op(Op::WriteBit(false));
        self.drain(half, &[c]);
        self.op(Op::Jmp(top));
        self.place(odd);
        self.op(Op::WriteBit(true));
        self.drain(half, &[c]);
        self.op(Op::Jmp(top));
        self.place(done);
    }

    pub fn build(mut self) -> CounterProgram {
        if self.ops.last() != Some(&Op::Halt) {
            self.ops.push(Op::Halt);
        }
        let labels = self.labels;
        let resolve = |l: Label| labels[l.0].expect("unplaced label");
        let targets = self
            .ops
            .iter()
            .map(|op| match *op {
                Op::DecJz(_, l) | Op::Jmp(l) => resolve(l),
                _ => usize::MAX,
            })
            .collect();
        let ops = self
            .ops
            .iter()
            .map(|op| match *op {
                Op::DecJz(c, l) => Op::DecJz(c, Label(resolve(l))),
                Op::Jmp(l) => Op::Jmp(Label(resolve(l))),
                Op::ReadBit { zero, one, empty } => Op::ReadBit {
                    zero: Label(resolve(zero)),
                    one: Label(resolve(one)),
                    empty: Label(resolve(empty)),
                },
                other => other,
            })
            .collect();
        CounterProgram {
            counters: self.counters,
            ops,
            targets,
        }
    }
}

/// Result of interpreting a counter program directly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpreted {
    pub output: Word,
    pub counters: Vec<u64>,
    pub ops_executed: u64,
}

impl CounterProgram {
    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    /// Reference semantics, used as the oracle for [`CounterProgram::compile`].
    /// Returns `None` if `max_ops` operations do not reach `Halt`.
    pub fn interpret(&self, input: &Word, max_ops: u64) -> Option<Interpreted> {
        let mut counters = vec![0u64; self.counters];
        let mut input: VecDeque<bool> = input.bits().iter().copied().collect();
        let mut output = VecDeque::new();
        let mut pc = 0usize;
        let mut executed = 0u64;
        loop {
            if executed >= max_ops {
                return None;
            }
            executed += 1;
            match self.ops[pc] {
                Op::Inc(c) => {
                    counters[c] += 1;
                    pc += 1;
                }
                Op::DecJz(c, Label(t)) => {
                    if counters[c] == 0 {
                        pc = t;
                    } else {
                        counters[c] -= 1;
                        pc += 1;
                    }
                }
                Op::Jmp(Label(t)) => pc = t,
                Op::ReadBit { zero, one, empty } => {
                    pc = match input.pop_front() {
                        None => empty.0,
                        Some(false) => zero.0,
                        Some(true) => one.0,
                    }
                }
                Op::WriteBit(b) => {
                    output.push_front(b);
                    pc += 1;
                }
                Op::Halt => {
                    return Some(Interpreted {
                        output: Word::from_bits(output.into_iter().collect()),
                        counters,
                        ops_executed: executed,
                    })
                }
            }
        }
    }

    pub fn compile(&self) -> MachineTable {
        let mut c = Compiler::new(self.counters);
        let entries: Vec<u32> = (0..self.ops.len()).map(|_| c.alloc()).collect();
        let start = c.alloc();
        debug_assert_eq!(start as usize, self.ops.len() + 1);
        c.setup(start, entries[0]);
        for (k, op) in self.ops.iter().enumerate() {
            let entry = entries[k];
            let next = entries.get(k + 1).copied().unwrap_or(0);
            match *op {
                Op::Inc(i) => c.inc(entry, i, next),
                Op::DecJz(i, _) => c.dec_jz(entry, i, entries[self.targets[k]], next),
                Op::Jmp(_) => c.jump(entry, entries[self.targets[k]]),
                Op::ReadBit { zero, one, empty } => {
                    c.read_bit(entry, entries[zero.0], entries[one.0], entries[empty.0])
                }
                Op::WriteBit(b) => c.write_bit(entry, b, next),
                Op::Halt => c.halt(entry),
            }
        }
        // The machine starts in state 1; swap it with the setup state.
        c.finish(start)
    }
}

const ZERO: Symbol = Symbol::Zero;
const ONE: Symbol = Symbol::One;
const BLANK: Symbol = Symbol::Blank;
const BITS: [Symbol; 2] = [ZERO, ONE];

struct Compiler {
    k: usize,
    next_state: u32,
    lines: Vec<Instruction>,
}

impl Compiler {
    fn new(k: usize) -> Self {
        Compiler {
            k,
            next_state: 1,
            lines: Vec::new(),
        }
    }

    fn alloc(&mut self) -> u32 {
        self.next_state += 1;
        self.next_state - 1
    }

    fn line(&mut self, state: u32, scanned: Symbol, write: Symbol, mv: Move, next: u32) {
        self.lines.push(Instruction::new(state, scanned, write, mv, next));
    }

    /// Keep the scanned symbol.
    fn pass(&mut self, state: u32, scanned: Symbol, mv: Move, next: u32) {
        self.line(state, scanned, scanned, mv, next);
    }

    fn jump(&mut self, entry: u32, target: u32) {
        self.pass(entry, ZERO, Move::Stay, target);
    }

    /// From the marker of some block, hop `count` blocks right; returns the
    /// entry state (expects the head on a marker).
    fn hop_right(&mut self, count: usize, exit: u32) -> u32 {
        let mut target = exit;
        for _ in 0..count {
            let a = self.alloc();
            let b = self.alloc();
            self.pass(a, ZERO, Move::Right, b);
            self.pass(b, ONE, Move::Right, b);
            self.pass(b, BLANK, Move::Right, target);
            target = a;
        }
        target
    }

    /// From the marker of block `count`, hop back to the home marker.
    fn hop_left(&mut self, count: usize, exit: u32) -> u32 {
        let mut target = exit;
        for _ in 0..count {
            let a = self.alloc();
            let b = self.alloc();
            let c = self.alloc();
            self.pass(a, ZERO, Move::Left, b);
            self.pass(b, BLANK, Move::Left, c);
            self.pass(c, ONE, Move::Left, c);
            self.pass(c, ZERO, Move::Stay, target);
            target = a;
        }
        target
    }

    /// From a non-blank cell inside block `block`, walk back to the home marker.
    fn home_from_inside(&mut self, block: usize, exit: u32) -> u32 {
        let back = self.hop_left(block, exit);
        let s = self.alloc();
        self.pass(s, ONE, Move::Left, s);
        self.pass(s, ZERO, Move::Stay, back);
        s
    }

    fn setup(&mut self, start: u32, first: u32) {
        let k = self.k;
        let back = self.hop_left(k - 1, first);
        let skip = start;
        let markers: Vec<u32> = (0..k).map(|_| self.alloc()).collect();
        self.pass(skip, ZERO, Move::Right, skip);
        self.pass(skip, ONE, Move::Right, skip);
        self.pass(skip, BLANK, Move::Right, markers[0]);
        for j in 0..k {
            if j + 1 < k {
                let sep = self.alloc();
                self.line(markers[j], BLANK, ZERO, Move::Right, sep);
                self.pass(sep, BLANK, Move::Right, markers[j + 1]);
            } else {
                self.line(markers[j], BLANK, ZERO, Move::Stay, back);
            }
        }
    }

    fn inc(&mut self, entry: u32, i: usize, exit: u32) {
        let k = self.k;
        let home_last = self.home_from_inside(k - 1, exit);
        let at_marker = self.alloc();
        let walk = self.alloc();
        let go = self.hop_right(i, at_marker);
        self.jump(entry, go);
        self.pass(at_marker, ZERO, Move::Right, walk);
        self.pass(walk, ONE, Move::Right, walk);
        if i + 1 == k {
            self.line(walk, BLANK, ONE, Move::Stay, home_last);
            return;
        }
        // carry[(sym, picked)] where picked counts separators read so far.
        let seps = k - 1 - i;
        let carry: Vec<[u32; 3]> = (0..=seps).map(|_| [self.alloc(), self.alloc(), self.alloc()]).collect();
        self.line(walk, BLANK, ONE, Move::Right, carry[1][BLANK.index()]);
        for picked in 1..=seps {
            for sym in Symbol::ALL {
                let s = carry[picked][sym.index()];
                for read in Symbol::ALL {
                    if read == BLANK && picked == seps {
                        // Terminal blank: the carried symbol ends the last block.
                        self.line(s, read, sym, Move::Stay, home_last);
                    } else {
                        let np = picked + (read == BLANK) as usize;
                        self.line(s, read, sym, Move::Right, carry[np][read.index()]);
                    }
                }
            }
        }
    }

    fn dec_jz(&mut self, entry: u32, i: usize, if_zero: u32, exit: u32) {
        let k = self.k;
        let back_zero = self.hop_left(i, if_zero);
        let at_marker = self.alloc();
        let probe = self.alloc();
        let walk = self.alloc();
        let last_one = self.alloc();
        let go = self.hop_right(i, at_marker);
        self.jump(entry, go);
        self.pass(at_marker, ZERO, Move::Right, probe);
        self.pass(probe, BLANK, Move::Left, back_zero);
        self.pass(probe, ONE, Move::Right, walk);
        self.pass(walk, ONE, Move::Right, walk);
        self.pass(walk, BLANK, Move::Left, last_one);
        if i + 1 == k {
            let home = self.home_from_inside(i, exit);
            self.line(last_one, ONE, BLANK, Move::Left, home);
            return;
        }
        // Shift everything right of the removed cell one place left.
        let home_last = self.home_from_inside(k - 1, exit);
        let seps = k - 1 - i;
        let fill: Vec<u32> = (0..=seps).map(|_| self.alloc()).collect();
        let read: Vec<u32> = (0..=seps).map(|_| self.alloc()).collect();
        let put: Vec<[u32; 3]> = (0..=seps).map(|_| [self.alloc(), self.alloc(), self.alloc()]).collect();
        let put_terminal = self.alloc();
        self.pass(last_one, ONE, Move::Stay, fill[0]);
        for picked in 0..=seps {
            for sym in Symbol::ALL {
                self.pass(fill[picked], sym, Move::Right, read[picked]);
            }
            for sym in Symbol::ALL {
                if sym == BLANK && picked == seps {
                    self.pass(read[picked], sym, Move::Left, put_terminal);
                } else {
                    let np = picked + (sym == BLANK) as usize;
                    self.pass(read[picked], sym, Move::Left, put[np][sym.index()]);
                }
            }
            for carried in Symbol::ALL {
                let s = put[picked][carried.index()];
                for under in Symbol::ALL {
                    self.line(s, under, carried, Move::Right, fill[picked]);
                }
            }
        }
        for under in Symbol::ALL {
            self.line(put_terminal, under, BLANK, Move::Left, home_last);
        }
    }

    fn read_bit(&mut self, entry: u32, zero: u32, one: u32, empty: u32) {
        let gap = self.alloc();
        let edge = self.alloc();
        let gap_back = self.alloc();
        let seek = self.alloc();
        let take = self.alloc();
        let back = [self.alloc(), self.alloc()];
        self.pass(entry, ZERO, Move::Left, gap);
        self.pass(gap, BLANK, Move::Left, edge);
        self.pass(edge, BLANK, Move::Right, gap_back);
        self.pass(gap_back, BLANK, Move::Right, empty);
        for b in BITS {
            self.pass(edge, b, Move::Left, seek);
            self.pass(seek, b, Move::Left, seek);
        }
        self.pass(seek, BLANK, Move::Right, take);
        for (bi, b) in BITS.into_iter().enumerate() {
            self.line(take, b, BLANK, Move::Right, back[bi]);
            let target = if bi == 0 { zero } else { one };
            for x in BITS {
                self.pass(back[bi], x, Move::Right, back[bi]);
            }
            self.pass(back[bi], BLANK, Move::Right, target);
        }
    }

    fn write_bit(&mut self, entry: u32, bit: bool, exit: u32) {
        let sym = Symbol::from_bit(bit);
        let gap = self.alloc();
        let edge = self.alloc();
        let seek = self.alloc();
        let forward = self.alloc();
        self.pass(entry, ZERO, Move::Left, gap);
        self.pass(gap, BLANK, Move::Left, edge);
        self.line(edge, BLANK, sym, Move::Right, forward);
        for b in BITS {
            self.pass(edge, b, Move::Left, seek);
            self.pass(seek, b, Move::Left, seek);
            self.pass(forward, b, Move::Right, forward);
        }
        self.line(seek, BLANK, sym, Move::Right, forward);
        self.pass(forward, BLANK, Move::Right, exit);
    }

    fn halt(&mut self, entry: u32) {
        let k = self.k;
        let at_last = self.alloc();
        let to_end = self.alloc();
        let erase: Vec<u32> = (0..k).map(|_| self.alloc()).collect();
        let sep: Vec<u32> = (0..k).map(|_| self.alloc()).collect();
        let gap = self.alloc();
        let edge = self.alloc();
        let seek = self.alloc();
        let go = self.hop_right(k - 1, at_last);
        self.jump(entry, go);
        self.pass(at_last, ZERO, Move::Right, to_end);
        self.pass(to_end, ONE, Move::Right, to_end);
        self.pass(to_end, BLANK, Move::Left, erase[k - 1]);
        for j in (0..k).rev() {
            self.line(erase[j], ONE, BLANK, Move::Left, erase[j]);
            if j > 0 {
                self.line(erase[j], ZERO, BLANK, Move::Left, sep[j - 1]);
                self.pass(sep[j - 1], BLANK, Move::Left, erase[j - 1]);
            } else {
                self.line(erase[j], ZERO, BLANK, Move::Left, gap);
            }
        }
        self.pass(gap, BLANK, Move::Left, edge);
        self.pass(edge, BLANK, Move::Stay, 0);
        for b in BITS {
            self.pass(edge, b, Move::Left, seek);
            self.pass(seek, b, Move::Left, seek);
        }
        self.pass(seek, BLANK, Move::Right, 0);
    }

    fn finish(self, start: u32) -> MachineTable {
        // Relabel so that the setup state becomes s₁.
        let swap = |s: u32| {
            if s == start {
                1
            } else if s == 1 {
                start
            } else {
                s
            }
        };
        let lines = self
            .lines
            .into_iter()
            .map(|l| Instruction {
                state: swap(l.state),
                next: swap(l.next),
                ..l
            })
            .collect();
        MachineTable::new(self.next_state, lines)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{index_of_word, word_of_u64};
    use crate::machine::{run_with, RunOptions};

    fn run_compiled(p: &CounterProgram, input: &Word) -> Word {
        let table = p.compile();
        table.validate().unwrap();
        let out = run_with(&table, input, RunOptions::without_loop_detection(50_000_000)).unwrap();
        assert!(out.halted(), "compiled program did not halt: {out:?}");
        out.output.unwrap()
    }

    fn echo() -> CounterProgram {
        let mut b = ProgramBuilder::new(2);
        b.read_input(0, 1);
        b.write_output(0, 1);
        b.build()
    }

    #[test]
    fn echo_program_round_trips_words() {
        let p = echo();
        for i in 0..40u64 {
            let w = word_of_u64(i);
            assert_eq!(p.interpret(&w, 1_000_000).unwrap().output, w);
            assert_eq!(run_compiled(&p, &w), w, "input {w}");
        }
    }

    #[test]
    fn read_input_yields_canonical_index() {
        let mut b = ProgramBuilder::new(2);
        b.read_input(0, 1);
        let p = b.build();
        for i in 0..30u64 {
            let r = p.interpret(&word_of_u64(i), 100_000).unwrap();
            assert_eq!(r.counters[0], i);
        }
    }

    #[test]
    fn constant_and_arithmetic() {
        // out = 3·x + index("101")
        let mut b = ProgramBuilder::new(4);
        b.read_input(0, 3);
        b.drain(0, &[1, 1, 1]);
        b.load_word(2, &Word::from("101"), 3);
        b.drain(2, &[1]);
        b.write_output(1, 2);
        let p = b.build();
        let k = index_of_word(&Word::from("101"));
        for x in 0..12u64 {
            let expected = word_of_u64(3 * x + u64::try_from(k.clone()).unwrap());
            assert_eq!(p.interpret(&word_of_u64(x), 1_000_000).unwrap().output, expected);
            assert_eq!(run_compiled(&p, &word_of_u64(x)), expected);
        }
    }

    #[test]
    fn every_counter_position_increments_and_decrements() {
        for target in 0..5usize {
            let tmp = (target + 1) % 5;
            let other = (target + 2) % 5;
            let mut b = ProgramBuilder::new(5);
            b.read_input(target, tmp);
            for c in 0..5 {
                b.inc(c).inc(c);
            }
            let skip = b.label();
            b.op(Op::DecJz(target, skip));
            b.place(skip);
            b.clear(tmp);
            b.add_copy(other, target, tmp);
            b.clear(tmp);
            b.write_output(target, tmp);
            let p = b.build();
            for x in [0u64, 1, 2, 5] {
                let oracle = p.interpret(&word_of_u64(x), 1_000_000).unwrap();
                assert_eq!(oracle.output, word_of_u64(x + 1 + 2));
                assert_eq!(run_compiled(&p, &word_of_u64(x)), oracle.output, "target {target} x {x}");
            }
        }
    }

    #[test]
    fn compiled_machines_halt_clean() {
        let table = echo().compile();
        let mut exec = crate::machine::Execution::new(&table, &Word::from("0110")).unwrap();
        while !exec.is_halted() {
            exec.step();
        }
        let (lo, cells) = exec.tape.trimmed().unwrap();
        assert_eq!(exec.head, lo);
        assert_eq!(cells.len(), 4);
    }
}
