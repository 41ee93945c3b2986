use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::codec::word_of_index;
use crate::error::{Error, Result};
use crate::machine::{MachineTable, Move, RunOptions, RunOutcome, RunStatus, Symbol, Tape};
use crate::word::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Instruction2 {
    pub state: u32,
    pub scanned: (Symbol, Symbol),
    pub write: (Symbol, Symbol),
    pub mv: (Move, Move),
    pub next: u32,
}

impl fmt::Display for Instruction2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {},{} -> {},{} {},{} {}",
            self.state,
            self.scanned.0,
            self.scanned.1,
            self.write.0,
            self.write.1,
            self.mv.0,
            self.mv.1,
            self.next
        )
    }
}

/// Two-tape table; same state conventions as [`MachineTable`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MachineTable2 {
    pub n_states: u32,
    pub lines: Vec<Instruction2>,
}

impl MachineTable2 {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let mut problems = Vec::new();
        if self.n_states <= 1 && !self.lines.is_empty() {
            problems.push("a table without working states must be empty".to_string());
        }
        for (i, l) in self.lines.iter().enumerate() {
            if l.state == 0 || l.state >= self.n_states {
                problems.push(format!("dangling state {} on line {i}", l.state));
            }
            if l.next != 0 && l.next >= self.n_states {
                problems.push(format!("dangling state {} on line {i}", l.next));
            }
            if !seen.insert((l.state, l.scanned)) {
                problems.push(format!(
                    "nondeterministic pair ({}, {},{})",
                    l.state, l.scanned.0, l.scanned.1
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Refused(problems.join("; ")))
        }
    }

    /// Lifts a one-tape table to act on tape 1 only.
    pub fn lift(table: &MachineTable) -> MachineTable2 {
        let lines = table
            .lines
            .iter()
            .flat_map(|l| {
                Symbol::ALL.into_iter().map(move |other| Instruction2 {
                    state: l.state,
                    scanned: (l.scanned, other),
                    write: (l.write, other),
                    mv: (l.mv, Move::Stay),
                    next: l.next,
                })
            })
            .collect();
        MachineTable2 {
            n_states: table.n_states,
            lines,
        }
    }

    /// Erases the input on tape 1 and copies the parameter from tape 2 in
    /// its place.
    pub fn copy_parameter() -> MachineTable2 {
        use Move::*;
        use Symbol::*;
        let mut lines = Vec::new();
        let mut add = |state, scanned, write, mv, next| {
            lines.push(Instruction2 {
                state,
                scanned,
                write,
                mv,
                next,
            })
        };
        for a in [Zero, One] {
            for c in Symbol::ALL {
                add(1, (a, c), (Blank, c), (Right, Stay), 1);
            }
        }
        for c in Symbol::ALL {
            add(1, (Blank, c), (Blank, c), (Stay, Stay), 2);
        }
        for c in [Zero, One] {
            add(2, (Blank, c), (c, c), (Right, Right), 2);
        }
        add(2, (Blank, Blank), (Blank, Blank), (Left, Stay), 0);
        MachineTable2 { n_states: 3, lines }
    }
}

impl fmt::Display for MachineTable2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states {}", self.n_states)?;
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for MachineTable2 {
    type Err = Error;

    /// `state a,b -> c,d M1,M2 next`, with the same `states N` directive and
    /// `#` comments as the one-tape format.
    fn from_str(s: &str) -> Result<Self> {
        let mut declared = None;
        let mut lines = Vec::new();
        for (i, raw) in s.lines().enumerate() {
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let toks: Vec<&str> = text.split_whitespace().collect();
            if toks[0] == "states" && toks.len() == 2 {
                declared = Some(toks[1].parse().map_err(|e| err(format!("{e}")))?);
                continue;
            }
            if toks.len() != 6 || toks[2] != "->" {
                return Err(err(format!("expected `state a,b -> c,d M,M next`, got `{text}`")));
            }
            let pair = |t: &str| -> Result<(String, String)> {
                let (a, b) = t.split_once(',').ok_or_else(|| err(format!("expected a pair, got `{t}`")))?;
                Ok((a.to_string(), b.to_string()))
            };
            let sym = |t: &str| -> Result<Symbol> {
                let one: MachineTable = format!("1 {t} -> 0 S 0").parse().map_err(|_| err(format!("bad symbol `{t}`")))?;
                Ok(one.lines[0].scanned)
            };
            let mv = |t: &str| -> Result<Move> {
                let one: MachineTable = format!("1 0 -> 0 {t} 0").parse().map_err(|_| err(format!("bad move `{t}`")))?;
                Ok(one.lines[0].mv)
            };
            let num = |t: &str| t.parse::<u32>().map_err(|e| err(format!("bad state `{t}`: {e}")));
            let (s0, s1) = pair(toks[1])?;
            let (w0, w1) = pair(toks[3])?;
            let (m0, m1) = pair(toks[4])?;
            lines.push(Instruction2 {
                state: num(toks[0])?,
                scanned: (sym(&s0)?, sym(&s1)?),
                write: (sym(&w0)?, sym(&w1)?),
                mv: (mv(&m0)?, mv(&m1)?),
                next: num(toks[5])?,
            });
        }
        let n_states = declared.unwrap_or_else(|| {
            lines
                .iter()
                .map(|l: &Instruction2| l.state.max(l.next) + 1)
                .max()
                .unwrap_or(0)
        });
        Ok(MachineTable2 { n_states, lines })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EllBase {
    TwoTape(MachineTable2),
    Lifted(MachineTable),
}

/// An ℓ-machine `⟨n, M⟩`: the parameter `n` sits on tape 2 as its canonical word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllMachine {
    pub parameter: BigUint,
    pub base: EllBase,
}

impl EllMachine {
    pub fn new(parameter: BigUint, base: EllBase) -> Self {
        EllMachine { parameter, base }
    }

    /// The trivial ℓ-machine `⟨0, 0⟩`.
    pub fn trivial() -> Self {
        EllMachine::new(BigUint::default(), EllBase::Lifted(MachineTable::empty()))
    }

    fn table2(&self) -> MachineTable2 {
        match &self.base {
            EllBase::TwoTape(t) => t.clone(),
            EllBase::Lifted(t) => MachineTable2::lift(t),
        }
    }
}

/// Runs an ℓ-machine on `input` (tape 1); the output is read from tape 1.
pub fn run_ell(m: &EllMachine, input: &Word, budget: u64) -> Result<RunOutcome> {
    run_ell_with(m, input, RunOptions::budget(budget))
}

pub fn run_ell_with(m: &EllMachine, input: &Word, opts: RunOptions) -> Result<RunOutcome> {
    if let EllBase::Lifted(t) = &m.base {
        t.validate().map_err(Error::InvalidTable)?;
    }
    let table = m.table2();
    table.validate()?;
    let mut dense: HashMap<(u32, Symbol, Symbol), Instruction2> = HashMap::new();
    for l in &table.lines {
        dense.insert((l.state, l.scanned.0, l.scanned.1), *l);
    }
    let mut t1 = Tape::with_word(input);
    let mut t2 = Tape::with_word(&word_of_index(&m.parameter));
    let (mut h1, mut h2) = (0i64, 0i64);
    let mut state = if table.n_states <= 1 { 0 } else { 1 };
    let mut steps = 0u64;
    let mut seen: HashSet<Snapshot> = HashSet::new();
    let mut order: VecDeque<Snapshot> = VecDeque::new();
    loop {
        if state == 0 {
            return Ok(RunOutcome {
                status: RunStatus::Halted,
                output: Some(t1.read_output(h1)),
                op_time: Some(input.len() as u64 + steps),
                steps_used: steps,
            });
        }
        if steps >= opts.budget {
            return Ok(RunOutcome {
                status: RunStatus::BudgetExhausted,
                output: None,
                op_time: None,
                steps_used: steps,
            });
        }
        if opts.loop_window > 0 {
            let snap = Snapshot {
                state,
                h1,
                h2,
                t1: t1.trimmed(),
                t2: t2.trimmed(),
            };
            if !seen.insert(snap.clone()) {
                return Ok(RunOutcome {
                    status: RunStatus::LoopDetected,
                    output: None,
                    op_time: None,
                    steps_used: steps,
                });
            }
            order.push_back(snap);
            if order.len() > opts.loop_window {
                let old = order.pop_front().expect("nonempty");
                seen.remove(&old);
            }
        }
        match dense.get(&(state, t1.get(h1), t2.get(h2))) {
            Some(ins) => {
                t1.set(h1, ins.write.0);
                t2.set(h2, ins.write.1);
                h1 += ins.mv.0.delta();
                h2 += ins.mv.1.delta();
                state = ins.next;
            }
            None => state = 0,
        }
        steps += 1;
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Snapshot {
    state: u32,
    h1: i64,
    h2: i64,
    t1: Option<(i64, Vec<Symbol>)>,
    t2: Option<(i64, Vec<Symbol>)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::word_of_u64;
    use crate::machine::run;

    #[test]
    fn trivial_ell_machine_is_identity() {
        for w in ["", "0", "1011"] {
            let out = run_ell(&EllMachine::trivial(), &Word::from(w), 1).unwrap();
            assert_eq!(out.output, Some(Word::from(w)));
        }
    }

    #[test]
    fn lifted_table_ignores_parameter() {
        let t: MachineTable = "states 3\n1 0 -> 1 R 1\n1 1 -> 0 R 1\n1 _ -> _ L 2\n2 0 -> 0 L 2\n2 1 -> 1 L 2\n2 _ -> _ R 0"
            .parse()
            .unwrap();
        let m = EllMachine::new(BigUint::from(7u32), EllBase::Lifted(t.clone()));
        for i in 0..20 {
            let w = word_of_u64(i);
            assert_eq!(run_ell(&m, &w, 500).unwrap(), run(&t, &w, 500).unwrap());
        }
    }

    #[test]
    fn copier_prints_the_parameter() {
        for n in 0..30u64 {
            let m = EllMachine::new(BigUint::from(n), EllBase::TwoTape(MachineTable2::copy_parameter()));
            for x in [0u64, 3, 12] {
                let out = run_ell(&m, &word_of_u64(x), 1000).unwrap();
                assert_eq!(out.output, Some(word_of_u64(n)), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn two_tape_text_round_trip() {
        let t = MachineTable2::copy_parameter();
        let back: MachineTable2 = t.to_string().parse().unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn two_tape_loop_is_detected() {
        let t: MachineTable2 = "states 2\n1 _,_ -> _,_ S,S 1".parse().unwrap();
        let m = EllMachine::new(BigUint::default(), EllBase::TwoTape(t));
        assert_eq!(run_ell(&m, &Word::empty(), 100).unwrap().status, RunStatus::LoopDetected);
    }
}
