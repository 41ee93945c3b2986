use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::word::Word;

/// Tape symbol. Blank is distinct from `0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Zero,
    One,
    Blank,
}

impl Symbol {
    pub const ALL: [Symbol; 3] = [Symbol::Zero, Symbol::One, Symbol::Blank];

    pub fn index(self) -> usize {
        match self {
            Symbol::Zero => 0,
            Symbol::One => 1,
            Symbol::Blank => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Symbol> {
        Symbol::ALL.get(i).copied()
    }

    pub fn from_bit(bit: bool) -> Symbol {
        if bit {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    pub fn bit(self) -> Option<bool> {
        match self {
            Symbol::Zero => Some(false),
            Symbol::One => Some(true),
            Symbol::Blank => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Blank => '_',
        }
    }

    fn parse(tok: &str) -> Option<Symbol> {
        match tok {
            "0" => Some(Symbol::Zero),
            "1" => Some(Symbol::One),
            "_" => Some(Symbol::Blank),
            _ => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Left,
    Right,
    Stay,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::Left, Move::Right, Move::Stay];

    pub fn delta(self) -> i64 {
        match self {
            Move::Left => -1,
            Move::Right => 1,
            Move::Stay => 0,
        }
    }

    fn as_char(self) -> char {
        match self {
            Move::Left => 'L',
            Move::Right => 'R',
            Move::Stay => 'S',
        }
    }

    fn parse(tok: &str) -> Option<Move> {
        match tok {
            "L" => Some(Move::Left),
            "R" => Some(Move::Right),
            "S" => Some(Move::Stay),
            _ => None,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// One table line: in `state` reading `scanned`, write, move, and go to `next`.
/// `next == 0` is the final state s₀.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub state: u32,
    pub scanned: Symbol,
    pub write: Symbol,
    pub mv: Move,
    pub next: u32,
}

impl Instruction {
    pub fn new(state: u32, scanned: Symbol, write: Symbol, mv: Move, next: u32) -> Self {
        Instruction {
            state,
            scanned,
            write,
            mv,
            next,
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} -> {} {} {}",
            self.state, self.scanned, self.write, self.mv, self.next
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Violation {
    NondeterministicPair { state: u32, scanned: Symbol },
    DanglingState { line: usize, state: u32 },
    HaltStateLine { line: usize },
    LinesWithoutStates,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NondeterministicPair { state, scanned } => {
                write!(f, "nondeterministic pair ({state}, {scanned})")
            }
            Violation::DanglingState { line, state } => {
                write!(f, "dangling state {state} on line {line}")
            }
            Violation::HaltStateLine { line } => {
                write!(f, "line {line} is a transition out of the halt state")
            }
            Violation::LinesWithoutStates => {
                write!(f, "a table without working states must be empty")
            }
        }
    }
}

/// A single-tape machine table. `n_states` counts the halt state s₀, so the
/// working states are `1..n_states`. A table with `n_states <= 1` has no working
/// state and is the trivial (identity) machine.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MachineTable {
    pub n_states: u32,
    pub lines: Vec<Instruction>,
}

impl MachineTable {
    pub fn new(n_states: u32, lines: Vec<Instruction>) -> Self {
        MachineTable { n_states, lines }
    }

    /// The empty table: the trivial machine.
    pub fn empty() -> Self {
        MachineTable::default()
    }

    pub fn is_trivial(&self) -> bool {
        self.n_states <= 1
    }

    /// Validates and returns the table, or the list of violations as an error.
    pub fn checked(self) -> Result<Self> {
        match self.validate() {
            Ok(()) => Ok(self),
            Err(v) => Err(Error::InvalidTable(v)),
        }
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        if self.n_states <= 1 && !self.lines.is_empty() {
            violations.push(Violation::LinesWithoutStates);
        }
        let mut seen = HashSet::new();
        for (i, line) in self.lines.iter().enumerate() {
            if line.state == 0 {
                violations.push(Violation::HaltStateLine { line: i });
            } else if line.state >= self.n_states {
                violations.push(Violation::DanglingState {
                    line: i,
                    state: line.state,
                });
            }
            if line.next != 0 && line.next >= self.n_states {
                violations.push(Violation::DanglingState {
                    line: i,
                    state: line.next,
                });
            }
            if !seen.insert((line.state, line.scanned)) {
                violations.push(Violation::NondeterministicPair {
                    state: line.state,
                    scanned: line.scanned,
                });
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Reorders the lines: line `i` of the result is line `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<MachineTable> {
        let len = self.lines.len();
        let mut hit = vec![false; len];
        if perm.len() != len {
            return Err(Error::NotAPermutation { len });
        }
        for &p in perm {
            if p >= len || std::mem::replace(&mut hit[p], true) {
                return Err(Error::NotAPermutation { len });
            }
        }
        Ok(MachineTable {
            n_states: self.n_states,
            lines: perm.iter().map(|&p| self.lines[p]).collect(),
        })
    }

    /// Dense transition lookup indexed by `state * 3 + symbol`.
    pub(crate) fn dense(&self) -> Vec<Option<Instruction>> {
        let n = self.n_states.max(1) as usize;
        let mut dense = vec![None; n * 3];
        for line in &self.lines {
            dense[line.state as usize * 3 + line.scanned.index()] = Some(*line);
        }
        dense
    }

    /// Binary serialization used for machine indices.
    ///
    /// Layout: Elias-gamma code of `n_states + 1`, then every line in table
    /// order as `state | scanned | write | move | next`, with states in
    /// `w = max(1, bitlen(n_states - 1))` bits and symbols/moves in two bits.
    pub fn to_word(&self) -> Word {
        let mut bits = Vec::new();
        push_gamma(&mut bits, self.n_states as u64 + 1);
        let w = state_width(self.n_states);
        for line in &self.lines {
            push_fixed(&mut bits, line.state as u64, w);
            push_fixed(&mut bits, line.scanned.index() as u64, 2);
            push_fixed(&mut bits, line.write.index() as u64, 2);
            push_fixed(&mut bits, move_code(line.mv), 2);
            push_fixed(&mut bits, line.next as u64, w);
        }
        Word::from_bits(bits)
    }

    /// Inverse of [`MachineTable::to_word`]. Returns `None` for words that are
    /// not the serialization of a valid table.
    pub fn from_word(word: &Word) -> Option<MachineTable> {
        let bits = word.bits();
        let (value, mut pos) = read_gamma(bits)?;
        let n_states = u32::try_from(value - 1).ok()?;
        let w = state_width(n_states);
        let line_len = 2 * w + 6;
        let rest = bits.len() - pos;
        if !rest.is_multiple_of(line_len) {
            return None;
        }
        let mut lines = Vec::with_capacity(rest / line_len);
        while pos < bits.len() {
            let state = read_fixed(bits, &mut pos, w) as u32;
            let scanned = Symbol::from_index(read_fixed(bits, &mut pos, 2) as usize)?;
            let write = Symbol::from_index(read_fixed(bits, &mut pos, 2) as usize)?;
            let mv = Move::ALL.get(read_fixed(bits, &mut pos, 2) as usize).copied()?;
            let next = read_fixed(bits, &mut pos, w) as u32;
            lines.push(Instruction::new(state, scanned, write, mv, next));
        }
        let table = MachineTable { n_states, lines };
        table.validate().ok()?;
        Some(table)
    }
}

pub(crate) fn state_width(n_states: u32) -> usize {
    let top = n_states.saturating_sub(1);
    (32 - top.leading_zeros()).max(1) as usize
}

fn move_code(m: Move) -> u64 {
    match m {
        Move::Left => 0,
        Move::Right => 1,
        Move::Stay => 2,
    }
}

pub(crate) fn push_gamma(bits: &mut Vec<bool>, value: u64) {
    debug_assert!(value >= 1);
    let len = 64 - value.leading_zeros() as usize;
    bits.extend(std::iter::repeat_n(false, len - 1));
    push_fixed(bits, value, len);
}

fn read_gamma(bits: &[bool]) -> Option<(u64, usize)> {
    let zeros = bits.iter().take_while(|b| !**b).count();
    if zeros >= 40 || zeros + zeros + 1 > bits.len() {
        return None;
    }
    let mut pos = zeros;
    let value = read_fixed(bits, &mut pos, zeros + 1);
    Some((value, pos))
}

fn push_fixed(bits: &mut Vec<bool>, value: u64, width: usize) {
    for i in (0..width).rev() {
        bits.push(value >> i & 1 == 1);
    }
}

fn read_fixed(bits: &[bool], pos: &mut usize, width: usize) -> u64 {
    let mut v = 0u64;
    for _ in 0..width {
        v = v << 1 | bits[*pos] as u64;
        *pos += 1;
    }
    v
}

impl fmt::Display for MachineTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states {}", self.n_states)?;
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

impl FromStr for MachineTable {
    type Err = Error;

    /// Parses the line format `state scanned -> write move next`. A `states N`
    /// directive fixes the state count; without it the count is one more than
    /// the largest state mentioned.
    fn from_str(s: &str) -> Result<Self> {
        let mut declared = None;
        let mut lines = Vec::new();
        for (i, raw) in s.lines().enumerate() {
            let lineno = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let toks: Vec<&str> = text.split_whitespace().collect();
            let err = |message: String| Error::Parse {
                line: lineno,
                message,
            };
            if toks[0] == "states" {
                if toks.len() != 2 {
                    return Err(err("expected `states N`".into()));
                }
                declared = Some(
                    toks[1]
                        .parse::<u32>()
                        .map_err(|e| err(format!("bad state count: {e}")))?,
                );
                continue;
            }
            if toks.len() != 6 || toks[2] != "->" {
                return Err(err(format!("expected `state scanned -> write move next`, got `{text}`")));
            }
            let num = |t: &str| {
                t.parse::<u32>()
                    .map_err(|e| err(format!("bad state `{t}`: {e}")))
            };
            let sym = |t: &str| Symbol::parse(t).ok_or_else(|| err(format!("bad symbol `{t}`")));
            lines.push(Instruction {
                state: num(toks[0])?,
                scanned: sym(toks[1])?,
                write: sym(toks[3])?,
                mv: Move::parse(toks[4]).ok_or_else(|| err(format!("bad move `{}`", toks[4])))?,
                next: num(toks[5])?,
            });
        }
        let n_states = declared.unwrap_or_else(|| {
            lines
                .iter()
                .map(|l: &Instruction| l.state.max(l.next) + 1)
                .max()
                .unwrap_or(0)
        });
        Ok(MachineTable { n_states, lines })
    }
}

/// Groups lines by state for display and analysis.
pub fn lines_by_state(table: &MachineTable) -> BTreeMap<u32, Vec<Instruction>> {
    let mut map: BTreeMap<u32, Vec<Instruction>> = BTreeMap::new();
    for l in &table.lines {
        map.entry(l.state).or_default().push(*l);
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MachineTable {
        "states 3\n1 0 -> 1 R 2\n1 _ -> 0 L 0 # halt\n2 1 -> _ S 1\n"
            .parse()
            .unwrap()
    }

    #[test]
    fn empty_table_is_valid() {
        assert!(MachineTable::empty().validate().is_ok());
        assert!(MachineTable::empty().is_trivial());
    }

    #[test]
    fn nondeterministic_pair_is_reported() {
        let t: MachineTable = "1 0 -> 1 R 0\n1 0 -> 0 L 0".parse().unwrap();
        let v = t.validate().unwrap_err();
        assert!(v
            .iter()
            .any(|x| x.to_string().starts_with("nondeterministic pair")));
    }

    #[test]
    fn dangling_state_is_reported() {
        let t = MachineTable::new(
            2,
            vec![Instruction::new(1, Symbol::Zero, Symbol::One, Move::Right, 5)],
        );
        let v = t.validate().unwrap_err();
        assert!(v.iter().any(|x| x.to_string().starts_with("dangling state")));
    }

    #[test]
    fn text_round_trip() {
        let t = sample();
        assert!(t.validate().is_ok());
        let printed = t.to_string();
        assert_eq!(printed.parse::<MachineTable>().unwrap(), t);
        assert_eq!(printed, t.to_string().parse::<MachineTable>().unwrap().to_string());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = "states 2\n1 0 -> 2 R 0".parse::<MachineTable>().unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn binary_round_trip() {
        let t = sample();
        assert_eq!(MachineTable::from_word(&t.to_word()), Some(t));
        let e = MachineTable::empty();
        assert_eq!(e.to_word().to_string(), "1");
        assert_eq!(MachineTable::from_word(&e.to_word()), Some(e));
        assert_eq!(MachineTable::from_word(&Word::from("0")), None);
        assert_eq!(MachineTable::from_word(&Word::empty()), None);
    }

    #[test]
    fn permute_identity_and_inverse() {
        let t = sample();
        assert_eq!(t.permute(&[0, 1, 2]).unwrap(), t);
        let p = t.permute(&[2, 0, 1]).unwrap();
        // inverse of [2,0,1] is [1,2,0]
        assert_eq!(p.permute(&[1, 2, 0]).unwrap(), t);
        assert!(t.permute(&[0, 0, 1]).is_err());
        assert!(t.permute(&[0, 1]).is_err());
    }
}
