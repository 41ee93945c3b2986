//! ℓ-machines: machines carrying a parameter word on a second tape, and the
//! kit that emulates them with ordinary one-tape machines (`M ∘ τ ∘ iₙ`).

pub mod counter;
mod two_tape;

use num_bigint::BigUint;

use crate::codec::{table_index, word_of_index};
use crate::error::Result;
use crate::machine::{Instruction, MachineTable, Move, Symbol};
pub use counter::{CounterProgram, Label, Op, ProgramBuilder};
pub use two_tape::{run_ell, run_ell_with, EllBase, EllMachine, Instruction2, MachineTable2};

/// Cantor pairing `τ(n, x) = (n + x)(n + x + 1)/2 + x`.
pub fn pairing(n: &BigUint, x: &BigUint) -> BigUint {
    let s = n + x;
    ((&s * (&s + 1u32)) >> 1u32) + x
}

/// Inverse of [`pairing`].
pub fn unpair(z: &BigUint) -> (BigUint, BigUint) {
    let mut s = ((z * 8u32 + 1u32).sqrt() - 1u32) >> 1u32;
    // Guard the integer square root against off-by-one at the boundary.
    while triangle(&(&s + 1u32)) <= *z {
        s += 1u32;
    }
    while triangle(&s) > *z {
        s -= 1u32;
    }
    let x = z - triangle(&s);
    let n = &s - &x;
    (n, x)
}

fn triangle(s: &BigUint) -> BigUint {
    (s * (s + 1u32)) >> 1u32
}

/// The constant machine `iₙ`: prints the canonical word of `n` over any
/// input. It does not scan the input; the output is written leftwards from
/// two cells left of it, so `op_time = |x| + |word(n)| + 2`.
pub fn make_constant(n: &BigUint) -> MachineTable {
    let w = word_of_index(n);
    let bits = w.bits();
    let mut lines = Vec::new();
    // 1: step off the input; 2: cross the gap cell.
    for s in Symbol::ALL {
        lines.push(Instruction::new(1, s, s, Move::Left, 2));
    }
    if bits.is_empty() {
        lines.push(Instruction::new(2, Symbol::Blank, Symbol::Blank, Move::Stay, 0));
        return MachineTable::new(3, lines);
    }
    lines.push(Instruction::new(2, Symbol::Blank, Symbol::Blank, Move::Left, 3));
    // States 3.. write the word right to left.
    let len = bits.len() as u32;
    for (j, &b) in bits.iter().rev().enumerate() {
        let state = 3 + j as u32;
        let last = j as u32 + 1 == len;
        let (mv, next) = if last { (Move::Stay, 0) } else { (Move::Left, state + 1) };
        lines.push(Instruction::new(state, Symbol::Blank, Symbol::from_bit(b), mv, next));
    }
    MachineTable::new(3 + len, lines)
}

/// Sequential composition. When `first` halts, the head is moved to the
/// leftmost symbol of the output block (or left on the blank for an empty
/// output) and `second` starts there. Foreign tape content left behind by
/// `first` is not erased; for a `first` that halts with only its output on
/// the tape, the composite computes `second(first(x))`.
pub fn compose(first: &MachineTable, second: &MachineTable) -> Result<MachineTable> {
    first.validate().map_err(crate::Error::InvalidTable)?;
    second.validate().map_err(crate::Error::InvalidTable)?;
    let fa = first.n_states.max(1);
    let seek_entry = fa;
    let seek_left = fa + 1;
    let offset = fa + 1;
    let sb = second.n_states.max(1);
    let second_start = if second.is_trivial() { 0 } else { 1 + offset };
    let mut lines: Vec<Instruction> = first
        .lines
        .iter()
        .map(|l| Instruction {
            next: if l.next == 0 { seek_entry } else { l.next },
            ..*l
        })
        .collect();
    lines.push(Instruction::new(seek_entry, Symbol::Blank, Symbol::Blank, Move::Stay, second_start));
    for b in [Symbol::Zero, Symbol::One] {
        lines.push(Instruction::new(seek_entry, b, b, Move::Left, seek_left));
        lines.push(Instruction::new(seek_left, b, b, Move::Left, seek_left));
    }
    lines.push(Instruction::new(seek_left, Symbol::Blank, Symbol::Blank, Move::Right, second_start));
    lines.extend(second.lines.iter().map(|l| Instruction {
        state: l.state + offset,
        next: if l.next == 0 { 0 } else { l.next + offset },
        ..*l
    }));
    Ok(MachineTable::new(offset + sb, lines))
}

/// Counter program for `x ↦ τ(n, x)` with `n` built in: the fused `τ ∘ iₙ`.
pub fn pairing_program(n: &BigUint) -> CounterProgram {
    // 0: x, 1: n then s, 2: acc, 3: tmp, 4: tmp2
    let mut b = ProgramBuilder::new(5);
    b.read_input(0, 3);
    b.load_word(1, &word_of_index(n), 3);
    b.add_copy(0, 1, 3);
    // acc = s + (s-1) + … + 1
    let top = b.here();
    let done = b.label();
    b.add_copy(1, 2, 3);
    b.op(Op::DecJz(1, done));
    b.op(Op::Jmp(top));
    b.place(done);
    b.drain(0, &[2]);
    b.write_output(2, 3);
    b.build()
}

/// Which component an unpairing program hands on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Parameter,
    Argument,
}

/// Counter program `z ↦ n` or `z ↦ x` where `(n, x) = unpair(z)`.
pub fn unpair_program(which: Component) -> CounterProgram {
    // 0: t (starts at z), 1: w, 2: need, 3: taken, 4: tmp
    let mut b = ProgramBuilder::new(5);
    b.read_input(0, 4);
    let outer = b.here();
    let (ok, fail, finish) = (b.label(), b.label(), b.label());
    b.add_copy(1, 2, 4);
    b.inc(2);
    let sub = b.here();
    b.op(Op::DecJz(2, ok));
    b.op(Op::DecJz(0, fail));
    b.inc(3);
    b.op(Op::Jmp(sub));
    b.place(ok);
    b.clear(3);
    b.inc(1);
    b.op(Op::Jmp(outer));
    b.place(fail);
    b.drain(3, &[0]);
    b.clear(2);
    b.place(finish);
    match which {
        Component::Argument => b.write_output(0, 4),
        Component::Parameter => {
            let end = b.label();
            let lp = b.here();
            b.op(Op::DecJz(0, end));
            b.op(Op::DecJz(1, end));
            b.op(Op::Jmp(lp));
            b.place(end);
            b.write_output(1, 4);
        }
    }
    b.build()
}

/// Compiled `τ ∘ iₙ`.
pub fn pairing_machine(n: &BigUint) -> MachineTable {
    pairing_program(n).compile()
}

/// One-tape machine behaving as the ℓ-machine `⟨n, base⟩` whose base
/// receives `τ(n, x)`: realized as `base ∘ τ ∘ iₙ`.
pub fn emulate_ell(base: &MachineTable, n: &BigUint) -> Result<MachineTable> {
    compose(&pairing_machine(n), base)
}

/// Index of the emulating machine, computed from the base table and `n`.
pub fn composition_index(base: &MachineTable, n: &BigUint) -> Result<BigUint> {
    Ok(table_index(&emulate_ell(base, n)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::word_of_u64;
    use crate::machine::{run, run_with, RunOptions};
    use crate::word::Word;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn cantor_values() {
        assert_eq!(pairing(&big(0), &big(0)), big(0));
        assert_eq!(pairing(&big(1), &big(0)), big(1));
        assert_eq!(pairing(&big(0), &big(1)), big(2));
        // anti-diagonal walk: z enumerates (s,0),(s-1,1),…,(0,s)
        let mut z = 0u64;
        for s in 0..20u64 {
            for x in 0..=s {
                assert_eq!(pairing(&big(s - x), &big(x)), big(z));
                z += 1;
            }
        }
    }

    #[test]
    fn unpair_inverts_on_grid() {
        for n in 0..100u64 {
            for x in 0..100u64 {
                assert_eq!(unpair(&pairing(&big(n), &big(x))), (big(n), big(x)));
            }
        }
    }

    #[test]
    fn constants() {
        let t = make_constant(&big(5));
        for w in ["", "1101", "0"] {
            let out = run(&t, &Word::from(w), 100).unwrap();
            assert_eq!(out.output, Some(word_of_u64(5)));
            assert_eq!(out.op_time, Some(w.len() as u64 + 2 + 2));
        }
        let zero = make_constant(&big(0));
        assert_eq!(run(&zero, &Word::from("11"), 10).unwrap().output, Some(Word::empty()));
    }

    #[test]
    fn constant_time_bound() {
        for n in 0..40u64 {
            let t = make_constant(&big(n));
            for x in 0..20u64 {
                let w = word_of_u64(x);
                let out = run(&t, &w, 1000).unwrap();
                let bound = w.len() + word_of_u64(n).len() + 2;
                assert!(out.op_time.unwrap() <= bound as u64);
            }
        }
    }

    #[test]
    fn compose_with_constants() {
        let c = compose(&make_constant(&big(3)), &make_constant(&big(8))).unwrap();
        for x in 0..10 {
            assert_eq!(run(&c, &word_of_u64(x), 200).unwrap().output, Some(word_of_u64(8)));
        }
    }

    #[test]
    fn pairing_program_matches_cantor() {
        for n in 0..6u64 {
            let p = pairing_program(&big(n));
            let table = p.compile();
            for x in 0..6u64 {
                let expected = crate::codec::word_of_index(&pairing(&big(n), &big(x)));
                assert_eq!(p.interpret(&word_of_u64(x), 10_000_000).unwrap().output, expected);
                let out = run_with(&table, &word_of_u64(x), RunOptions::without_loop_detection(50_000_000)).unwrap();
                assert_eq!(out.output, Some(expected), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn unpair_programs_match() {
        for which in [Component::Argument, Component::Parameter] {
            let p = unpair_program(which);
            for z in 0..60u64 {
                let (n, x) = unpair(&big(z));
                let want = word_of_index(if which == Component::Argument { &x } else { &n });
                assert_eq!(p.interpret(&word_of_u64(z), 10_000_000).unwrap().output, want, "z={z}");
            }
        }
    }

    #[test]
    fn emulation_matches_direct_evaluation() {
        let echo_x = unpair_program(Component::Argument).compile();
        let echo_n = unpair_program(Component::Parameter).compile();
        for n in [0u64, 1, 4, 9] {
            let ex = emulate_ell(&echo_x, &big(n)).unwrap();
            let en = emulate_ell(&echo_n, &big(n)).unwrap();
            for x in [0u64, 2, 7] {
                let opts = RunOptions::without_loop_detection(200_000_000);
                let out = run_with(&ex, &word_of_u64(x), opts).unwrap();
                assert_eq!(out.output, Some(word_of_u64(x)), "echo-x n={n} x={x}");
                let out = run_with(&en, &word_of_u64(x), opts).unwrap();
                assert_eq!(out.output, Some(word_of_u64(n)), "echo-n n={n} x={x}");
            }
        }
    }

    #[test]
    fn composition_index_is_deterministic() {
        let base = make_constant(&big(2));
        let a = composition_index(&base, &big(3)).unwrap();
        assert_eq!(a, composition_index(&base, &big(3)).unwrap());
        assert_ne!(a, composition_index(&base, &big(4)).unwrap());
    }
}
