//! Busy Beaver search over Rado machines (two symbols, explicit halt), the
//! map from machine indices to state counts, and the generalized `B′`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::codec::word_of_index;
use crate::error::{Error, Result};
use crate::factory::Registry;
use crate::growth::{g_at_index, GValue, Search};
use crate::machine::{Instruction, MachineTable, Move, Symbol};
use crate::word::Word;

pub const DEFAULT_MAX_STATES: u8 = 4;
pub const DEFAULT_DECIDER_STEPS: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub write: u8,
    pub right: bool,
    /// `None` is the halt state.
    pub next: Option<u8>,
}

impl Transition {
    pub const HALT_ONE: Transition = Transition {
        write: 1,
        right: true,
        next: None,
    };
}

/// An `N`-state machine; `None` entries are undefined (only in partial
/// machines built during search).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RadoMachine {
    pub table: Vec<[Option<Transition>; 2]>,
}

impl RadoMachine {
    pub fn blank(states: u8) -> Self {
        RadoMachine {
            table: vec![[None; 2]; states as usize],
        }
    }

    pub fn states(&self) -> u8 {
        self.table.len() as u8
    }

    pub fn get(&self, state: u8, sym: u8) -> Option<Transition> {
        self.table[state as usize][sym as usize]
    }

    /// Undefined transitions become `1RH`.
    pub fn completed(&self) -> RadoMachine {
        let table = self
            .table
            .iter()
            .map(|row| row.map(|t| Some(t.unwrap_or(Transition::HALT_ONE))))
            .collect();
        RadoMachine { table }
    }

    /// Number of states named so far (states are introduced in order).
    fn used_states(&self) -> u8 {
        let named = self
            .table
            .iter()
            .flatten()
            .flatten()
            .filter_map(|t| t.next)
            .max()
            .map_or(0, |s| s + 1);
        named.max(1)
    }

    /// Core table with the blank read as `0`.
    pub fn to_table(&self) -> MachineTable {
        let mut lines = Vec::new();
        for (s, row) in self.table.iter().enumerate() {
            for (sym, t) in row.iter().enumerate() {
                let Some(t) = t else { continue };
                let scanned: &[Symbol] = if sym == 0 {
                    &[Symbol::Zero, Symbol::Blank]
                } else {
                    &[Symbol::One]
                };
                for &sc in scanned {
                    lines.push(Instruction::new(
                        s as u32 + 1,
                        sc,
                        if t.write == 1 { Symbol::One } else { Symbol::Zero },
                        if t.right { Move::Right } else { Move::Left },
                        t.next.map_or(0, |n| n as u32 + 1),
                    ));
                }
            }
        }
        MachineTable::new(self.table.len() as u32 + 1, lines)
    }
}

fn state_letter(s: u8) -> char {
    (b'A' + s) as char
}

impl fmt::Display for RadoMachine {
    /// Standard notation, e.g. `1RB1LB_1LA1RH`; `---` marks undefined entries.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.table.iter().enumerate() {
            if i > 0 {
                write!(f, "_")?;
            }
            for t in row {
                match t {
                    None => write!(f, "---")?,
                    Some(t) => write!(
                        f,
                        "{}{}{}",
                        t.write,
                        if t.right { 'R' } else { 'L' },
                        t.next.map_or('H', state_letter)
                    )?,
                }
            }
        }
        Ok(())
    }
}

impl FromStr for RadoMachine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rows: Vec<&str> = s.trim().split('_').collect();
        let n = rows.len();
        let bad = |m: &str| Error::Parse { line: 1, message: m.to_string() };
        let mut table = Vec::with_capacity(n);
        for row in rows {
            let b = row.as_bytes();
            if b.len() != 6 {
                return Err(bad(&format!("row `{row}` must have two 3-character entries")));
            }
            let mut entries = [None; 2];
            for (k, e) in b.chunks(3).enumerate() {
                if e == b"---" {
                    continue;
                }
                let write = match e[0] {
                    b'0' => 0,
                    b'1' => 1,
                    _ => return Err(bad("write must be 0 or 1")),
                };
                let right = match e[1] {
                    b'R' => true,
                    b'L' => false,
                    _ => return Err(bad("move must be L or R")),
                };
                let next = match e[2] {
                    b'H' | b'Z' => None,
                    c @ b'A'..=b'G' if ((c - b'A') as usize) < n => Some(c - b'A'),
                    _ => return Err(bad("bad next state")),
                };
                entries[k] = Some(Transition { write, right, next });
            }
            table.push(entries);
        }
        Ok(RadoMachine { table })
    }
}

/// Starting tape: bits placed from position 0 on an otherwise 0 tape.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StartTape(Vec<u8>);

impl StartTape {
    pub fn zeros() -> Self {
        StartTape(Vec::new())
    }

    pub fn from_word(w: &Word) -> Self {
        let mut v: Vec<u8> = w.bits().iter().map(|&b| b as u8).collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        StartTape(v)
    }

    pub fn is_zeros(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    /// Positions of the first and last 1.
    fn extent(&self) -> Option<(i64, i64)> {
        let first = self.0.iter().position(|&b| b == 1)?;
        let last = self.0.iter().rposition(|&b| b == 1)?;
        Some((first as i64, last as i64))
    }
}

#[derive(Clone, Debug)]
struct Tape {
    cells: Vec<u8>,
    /// Absolute position of `cells[0]`.
    origin: i64,
}

impl Tape {
    fn new(start: &StartTape) -> Self {
        Tape {
            cells: if start.0.is_empty() { vec![0] } else { start.0.clone() },
            origin: 0,
        }
    }

    fn get(&self, pos: i64) -> u8 {
        let i = pos - self.origin;
        if i < 0 || i >= self.cells.len() as i64 {
            0
        } else {
            self.cells[i as usize]
        }
    }

    fn set(&mut self, pos: i64, v: u8) {
        let mut i = pos - self.origin;
        if i < 0 {
            let grow = (-i) as usize;
            self.cells.splice(0..0, std::iter::repeat_n(0, grow));
            self.origin = pos;
            i = 0;
        }
        let i = i as usize;
        if i >= self.cells.len() {
            self.cells.resize(i + 1, 0);
        }
        self.cells[i] = v;
    }

    fn ones(&self) -> u64 {
        self.cells.iter().filter(|&&c| c == 1).count() as u64
    }

    /// Content of `[lo, hi]`.
    fn segment(&self, lo: i64, hi: i64) -> Vec<u8> {
        (lo..=hi).map(|p| self.get(p)).collect()
    }

    /// Canonical content: nonzero span with its absolute start.
    fn canonical(&self) -> (i64, &[u8]) {
        let first = self.cells.iter().position(|&c| c != 0);
        match first {
            None => (0, &[]),
            Some(f) => {
                let l = self.cells.iter().rposition(|&c| c != 0).expect("nonzero");
                (self.origin + f as i64, &self.cells[f..=l])
            }
        }
    }
}

struct Sim<'a> {
    m: &'a RadoMachine,
    tape: Tape,
    head: i64,
    state: u8,
    steps: u64,
}

enum StepResult {
    Running,
    Halted,
    Undefined,
}

impl<'a> Sim<'a> {
    fn new(m: &'a RadoMachine, start: &StartTape) -> Self {
        Sim {
            m,
            tape: Tape::new(start),
            head: 0,
            state: 0,
            steps: 0,
        }
    }

    fn step(&mut self) -> StepResult {
        let sym = self.tape.get(self.head);
        let Some(t) = self.m.get(self.state, sym) else {
            return StepResult::Undefined;
        };
        self.tape.set(self.head, t.write);
        self.head += if t.right { 1 } else { -1 };
        self.steps += 1;
        match t.next {
            None => StepResult::Halted,
            Some(n) => {
                self.state = n;
                StepResult::Running
            }
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
enum Fate {
    Halted { ones: u64, steps: u64 },
    Undefined { state: u8, sym: u8 },
    NonHalting,
    Unresolved,
}

/// Runs `m` for `cutoff` steps; past the cutoff, cycle deciders get
/// `decider_steps` more steps to prove non-halting.
fn fate(m: &RadoMachine, start: &StartTape, cutoff: u64, decider_steps: u64) -> Fate {
    let halt_reachable = can_stop(m);
    let mut sim = Sim::new(m, start);
    let mut cycles = CycleWatch::new(start);
    let limit = cutoff + decider_steps;
    loop {
        if sim.steps >= cutoff {
            if sim.steps == cutoff && (!halt_reachable || stop_unreachable(m, start)) {
                return Fate::NonHalting;
            }
            cycles.observe(&sim);
            if cycles.proven {
                return Fate::NonHalting;
            }
            if sim.steps >= limit {
                return Fate::Unresolved;
            }
        }
        let (state, sym) = (sim.state, sim.tape.get(sim.head));
        match sim.step() {
            StepResult::Running => {}
            StepResult::Halted => {
                if sim.steps > cutoff {
                    return Fate::Unresolved;
                }
                return Fate::Halted {
                    ones: sim.tape.ones(),
                    steps: sim.steps,
                };
            }
            StepResult::Undefined => {
                if sim.steps >= cutoff {
                    // Reaching an undefined entry only after the cutoff.
                    return Fate::Unresolved;
                }
                return Fate::Undefined { state, sym };
            }
        }
    }
}

/// Whether a halting or undefined entry is reachable from state A in the
/// transition graph. If not, the machine runs forever.
fn can_stop(m: &RadoMachine) -> bool {
    let mut seen = vec![false; m.table.len()];
    let mut todo = vec![0u8];
    seen[0] = true;
    while let Some(s) = todo.pop() {
        for t in m.table[s as usize] {
            match t.and_then(|t| t.next) {
                None => return true,
                Some(n) if !seen[n as usize] => {
                    seen[n as usize] = true;
                    todo.push(n);
                }
                Some(_) => {}
            }
        }
    }
    false
}

const BACKWARD_DEPTH: usize = 64;
const BACKWARD_NODES: usize = 20_000;

/// A backward-reasoning node: state, head, and the cells the future run
/// depends on.
#[derive(Clone)]
struct Backward {
    state: u8,
    head: i64,
    cells: Vec<(i64, u8)>,
    depth: usize,
}

impl Backward {
    fn cell(&self, pos: i64) -> Option<u8> {
        self.cells.iter().find(|c| c.0 == pos).map(|c| c.1)
    }

    fn with(&self, pos: i64, v: u8) -> Vec<(i64, u8)> {
        let mut cells: Vec<(i64, u8)> = self.cells.iter().copied().filter(|c| c.0 != pos).collect();
        cells.push((pos, v));
        cells
    }

    /// Could this be the starting configuration?
    fn matches_start(&self, start: &StartTape) -> bool {
        let tape = Tape::new(start);
        self.state == 0 && self.cells.iter().all(|&(p, v)| tape.get(p - self.head) == v)
    }
}

/// Proves that no stopping configuration (a halting or undefined entry) can
/// be reached from `start`, by exhausting the finite tree of possible
/// predecessors. Gives up (returns false) past fixed depth and size limits.
fn stop_unreachable(m: &RadoMachine, start: &StartTape) -> bool {
    let mut todo = Vec::new();
    for (s, row) in m.table.iter().enumerate() {
        for (sym, t) in row.iter().enumerate() {
            if t.is_none_or(|t| t.next.is_none()) {
                todo.push(Backward {
                    state: s as u8,
                    head: 0,
                    cells: vec![(0, sym as u8)],
                    depth: 0,
                });
            }
        }
    }
    let mut visited = 0;
    while let Some(node) = todo.pop() {
        visited += 1;
        if node.depth >= BACKWARD_DEPTH || visited > BACKWARD_NODES || node.matches_start(start) {
            return false;
        }
        for (s, row) in m.table.iter().enumerate() {
            for (sym, t) in row.iter().enumerate() {
                let Some(t) = t else { continue };
                if t.next != Some(node.state) {
                    continue;
                }
                let prev = node.head - if t.right { 1 } else { -1 };
                if node.cell(prev).is_some_and(|v| v != t.write) {
                    continue;
                }
                todo.push(Backward {
                    state: s as u8,
                    head: prev,
                    cells: node.with(prev, sym as u8),
                    depth: node.depth + 1,
                });
            }
        }
    }
    true
}

/// Non-halting proofs: exact repetition of a configuration (checked against
/// snapshots taken at power-of-two times) and translated cycles (a
/// record-breaking configuration repeating shifted, with the swept region
/// matching).
struct CycleWatch {
    proven: bool,
    snapshot: Option<(u8, i64, i64, Vec<u8>)>,
    next_snapshot: u64,
    extent: Option<(i64, i64)>,
    max_pos: i64,
    min_pos: i64,
    /// Head positions by time, for sweep minima/maxima.
    trail: Vec<i64>,
    right_records: HashMap<u8, Vec<Record>>,
    left_records: HashMap<u8, Vec<Record>>,
}

#[derive(Clone)]
struct Record {
    time: usize,
    pos: i64,
    tape: Tape,
}

const RECORDS_COMPARED: usize = 64;

impl CycleWatch {
    fn new(start: &StartTape) -> Self {
        CycleWatch {
            proven: false,
            snapshot: None,
            next_snapshot: 0,
            extent: start.extent(),
            max_pos: i64::MIN,
            min_pos: i64::MAX,
            trail: Vec::new(),
            right_records: HashMap::new(),
            left_records: HashMap::new(),
        }
    }

    fn observe(&mut self, sim: &Sim) {
        let (lo, content) = sim.tape.canonical();
        if let Some((s, h, l, c)) = &self.snapshot {
            if *s == sim.state && *h == sim.head && *l == lo && c.as_slice() == content {
                self.proven = true;
                return;
            }
        }
        if sim.steps >= self.next_snapshot {
            self.snapshot = Some((sim.state, sim.head, lo, content.to_vec()));
            self.next_snapshot = (sim.steps * 2).max(1);
        }
        let time = self.trail.len();
        self.trail.push(sim.head);
        let beyond_input_right = self.extent.is_none_or(|(_, hi)| sim.head > hi);
        let beyond_input_left = self.extent.is_none_or(|(lo, _)| sim.head < lo);
        if sim.head > self.max_pos {
            self.max_pos = sim.head;
            if beyond_input_right && self.translated(sim, time, true) {
                self.proven = true;
                return;
            }
        }
        if sim.head < self.min_pos {
            self.min_pos = sim.head;
            if beyond_input_left && self.translated(sim, time, false) {
                self.proven = true;
            }
        }
    }

    fn translated(&mut self, sim: &Sim, time: usize, right: bool) -> bool {
        let book = if right { &mut self.right_records } else { &mut self.left_records };
        let records = book.entry(sim.state).or_default();
        let found = records.iter().rev().take(RECORDS_COMPARED).any(|r| {
            let window = &self.trail[r.time..=time];
            if right {
                // Everything right of a record is untouched, so only the
                // swept region [m, p] has to repeat shifted.
                let m = *window.iter().min().expect("nonempty");
                let d = sim.head - r.pos;
                r.tape.segment(m, r.pos) == sim.tape.segment(m + d, sim.head)
            } else {
                let m = *window.iter().max().expect("nonempty");
                let d = r.pos - sim.head;
                r.tape.segment(r.pos, m) == sim.tape.segment(sim.head, m - d)
            }
        });
        records.push(Record {
            time,
            pos: sim.head,
            tape: sim.tape.clone(),
        });
        found
    }
}

/// Outcome of a search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BBResult {
    pub states: u8,
    pub value: u64,
    pub exact: bool,
    /// Completed witness in standard notation.
    pub witness: Option<String>,
    pub witness_table: Option<String>,
    pub cutoff_used: u64,
    pub unresolved_count: u64,
    pub halted_count: u64,
    pub nonhalting_count: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Acc {
    best: Option<(u64, String)>,
    halted: u64,
    nonhalting: u64,
    unresolved: u64,
}

impl Acc {
    fn offer(&mut self, ones: u64, m: &RadoMachine) {
        let text = m.completed().to_string();
        let better = match &self.best {
            None => true,
            Some((v, t)) => ones > *v || (ones == *v && text < *t),
        };
        if better {
            self.best = Some((ones, text));
        }
    }

    fn merge(&mut self, other: Acc) {
        if let Some((v, t)) = other.best {
            let m: RadoMachine = t.parse().expect("own notation");
            self.offer(v, &m);
        }
        self.halted += other.halted;
        self.nonhalting += other.nonhalting;
        self.unresolved += other.unresolved;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub cutoff: u64,
    pub decider_steps: u64,
    pub shards: usize,
    pub max_states: u8,
}

impl SearchOptions {
    pub fn new(cutoff: u64) -> Self {
        SearchOptions {
            cutoff,
            decider_steps: DEFAULT_DECIDER_STEPS,
            shards: 1,
            max_states: DEFAULT_MAX_STATES,
        }
    }

    pub fn shards(mut self, shards: usize) -> Self {
        self.shards = shards.max(1);
        self
    }
}

/// Children of a node stopped at an undefined entry: halt (writing 1), or
/// any write/move with a next state among those named plus one new one.
fn children(m: &RadoMachine, state: u8, sym: u8, mirror_free: bool) -> Vec<RadoMachine> {
    let n = m.states();
    let mut out = Vec::new();
    let mut halt = m.clone();
    halt.table[state as usize][sym as usize] = Some(Transition::HALT_ONE);
    out.push(halt);
    let reach = (m.used_states() + 1).min(n);
    for write in 0..2u8 {
        for right in [false, true] {
            if !right && !mirror_free {
                continue;
            }
            for next in 0..reach {
                let mut c = m.clone();
                c.table[state as usize][sym as usize] = Some(Transition {
                    write,
                    right,
                    next: Some(next),
                });
                out.push(c);
            }
        }
    }
    out
}

fn is_root(m: &RadoMachine) -> bool {
    m.table.iter().flatten().all(|t| t.is_none())
}

fn explore(m: RadoMachine, start: &StartTape, opts: &SearchOptions, acc: &mut Acc) {
    let mut stack = vec![m];
    while let Some(m) = stack.pop() {
        expand(m, start, opts, acc, &mut |c| stack.push(c));
    }
}

/// Classifies one node; unfinished nodes hand their children to `push`.
fn expand(m: RadoMachine, start: &StartTape, opts: &SearchOptions, acc: &mut Acc, push: &mut dyn FnMut(RadoMachine)) {
    match fate(&m, start, opts.cutoff, opts.decider_steps) {
        Fate::Halted { ones, .. } => {
            acc.halted += 1;
            acc.offer(ones, &m);
        }
        Fate::NonHalting => acc.nonhalting += 1,
        Fate::Unresolved => acc.unresolved += 1,
        Fate::Undefined { state, sym } => {
            // On an all-0 tape the left/right mirror image of a machine
            // prints the same, so the first move can be fixed.
            let mirror_free = !(start.is_zeros() && is_root(&m));
            let mut kids = children(&m, state, sym, mirror_free);
            kids.reverse();
            for c in kids {
                push(c);
            }
        }
    }
}

fn search(states: u8, start: &StartTape, opts: &SearchOptions) -> Acc {
    let root = RadoMachine::blank(states);
    if opts.shards <= 1 {
        let mut acc = Acc::default();
        explore(root, start, opts, &mut acc);
        return acc;
    }
    // Split the tree into subtrees two levels down.
    let mut frontier = vec![root];
    let mut acc = Acc::default();
    for _ in 0..2 {
        let mut next = Vec::new();
        for m in frontier {
            expand(m, start, opts, &mut acc, &mut |c| next.push(c));
        }
        frontier = next;
    }
    let shards = opts.shards;
    let parts: Vec<Acc> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..shards)
            .map(|i| {
                let mine: Vec<RadoMachine> = frontier.iter().skip(i).step_by(shards).cloned().collect();
                scope.spawn(move || {
                    let mut a = Acc::default();
                    for m in mine {
                        explore(m, start, opts, &mut a);
                    }
                    a
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("shard panicked")).collect()
    });
    for p in parts {
        acc.merge(p);
    }
    acc
}

fn result_of(states: u8, acc: Acc, cutoff: u64) -> BBResult {
    let (value, witness) = match acc.best {
        Some((v, t)) => (v, Some(t)),
        None => (0, None),
    };
    let witness_table = witness
        .as_ref()
        .map(|t| t.parse::<RadoMachine>().expect("own notation").to_table().to_string());
    BBResult {
        states,
        value,
        exact: acc.unresolved == 0,
        witness,
        witness_table,
        cutoff_used: cutoff,
        unresolved_count: acc.unresolved,
        halted_count: acc.halted,
        nonhalting_count: acc.nonhalting,
    }
}

fn check_states(states: u8, opts: &SearchOptions) -> Result<()> {
    if states > opts.max_states {
        return Err(Error::Refused(format!(
            "{states} states exceeds the configured maximum of {}",
            opts.max_states
        )));
    }
    Ok(())
}

/// `Σ(N)` by tree-normal-form search from the all-0 tape.
pub fn sigma(states: u8, opts: SearchOptions) -> Result<BBResult> {
    sigma_from(states, &StartTape::zeros(), opts)
}

/// Maximum number of 1s left by a halting `N`-state machine started on `start`.
pub fn sigma_from(states: u8, start: &StartTape, opts: SearchOptions) -> Result<BBResult> {
    check_states(states, &opts)?;
    if states == 0 {
        let ones = start.0.iter().filter(|&&b| b == 1).count() as u64;
        return Ok(BBResult {
            states,
            value: ones,
            exact: true,
            witness: None,
            witness_table: None,
            cutoff_used: opts.cutoff,
            unresolved_count: 0,
            halted_count: 1,
            nonhalting_count: 0,
        });
    }
    Ok(result_of(states, search(states, start, &opts), opts.cutoff))
}

/// Every complete `N`-state machine, in a fixed order: `(4(N+1))^(2N)` tables.
pub fn enumerate_rado(states: u8) -> impl Iterator<Item = RadoMachine> {
    let n = states as u64;
    let choices = 4 * (n + 1);
    let entries = 2 * n as u32;
    let total = choices.pow(entries);
    (0..total).map(move |mut code| {
        let mut m = RadoMachine::blank(states);
        for e in 0..entries as usize {
            let d = code % choices;
            code /= choices;
            let next = (d / 4) as u8;
            m.table[e / 2][e % 2] = Some(Transition {
                write: (d % 2) as u8,
                right: (d / 2) % 2 == 1,
                next: (next < states).then_some(next),
            });
        }
        m
    })
}

/// `Σ(N)` by brute force over [`enumerate_rado`].
pub fn sigma_unpruned(states: u8, opts: SearchOptions) -> Result<BBResult> {
    check_states(states, &opts)?;
    let mut acc = Acc::default();
    for m in enumerate_rado(states) {
        match fate(&m, &StartTape::zeros(), opts.cutoff, opts.decider_steps) {
            Fate::Halted { ones, .. } => {
                acc.halted += 1;
                acc.offer(ones, &m);
            }
            Fate::NonHalting => acc.nonhalting += 1,
            Fate::Unresolved => acc.unresolved += 1,
            Fate::Undefined { .. } => unreachable!("complete machines"),
        }
    }
    Ok(result_of(states, acc, opts.cutoff))
}

/// Number of leaves of the pruned search tree.
pub fn pruned_count(states: u8, opts: SearchOptions) -> Result<u64> {
    let r = sigma(states, opts)?;
    Ok(r.halted_count + r.nonhalting_count + r.unresolved_count)
}

/// Bits needed to write an `N`-state table as a `(3N+1) × 4` matrix with one
/// byte per entry.
pub fn matrix_bits(states: u64) -> u64 {
    32 * (3 * states + 1)
}

/// Least `N` whose `(3N+1) × 4` matrices reach canonical index `m`, i.e.
/// `m ≤ 2^(32(3N+1)+1) − 2`.
pub fn states_of_index(m: &BigUint) -> u64 {
    // The word of index m has length bitlen(m + 1) − 1.
    let needed_len = (m + 1u32).bits() - 1;
    let mut n = needed_len.saturating_sub(32).div_ceil(96);
    while n > 0 && matrix_bits(n - 1) >= needed_len {
        n -= 1;
    }
    while matrix_bits(n) < needed_len {
        n += 1;
    }
    n
}

fn evaluable_states(m: &BigUint, opts: &SearchOptions) -> Result<u8> {
    let n = states_of_index(m);
    if n > opts.max_states as u64 {
        return Err(Error::Refused(format!(
            "index needs {n} states, beyond the searchable maximum of {}",
            opts.max_states
        )));
    }
    Ok(n as u8)
}

/// `B(m) = Σ(states_of_index(m))`.
pub fn b_of_index(m: &BigUint, opts: SearchOptions) -> Result<BBResult> {
    sigma(evaluable_states(m, &opts)?, opts)
}

/// Result of `B′` at one index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BPrime {
    #[serde(serialize_with = "crate::ser::big")]
    pub index: BigUint,
    pub states: u8,
    pub g: GValue,
    pub value: u64,
    pub exact: bool,
    pub tapes: u64,
    pub witness: Option<String>,
}

pub const DEFAULT_INPUT_BUDGET: u64 = 64;

/// `B′(m)`: maximum 1s over all `N(m)`-state machines started on the all-0
/// tape or on the canonical word of any `x ≤ g(m)`.
pub fn b_prime(m: &BigUint, registry: &Registry, opts: SearchOptions, input_budget: u64) -> Result<BPrime> {
    let states = evaluable_states(m, &opts)?;
    let g = g_at_index(m, registry, Search::default())?;
    let gv = match &g {
        GValue::Value { value } => value.clone(),
        GValue::Unresolved { .. } => return Err(Error::Refused(format!("g({m}) is unresolved"))),
    };
    let top = gv
        .to_u64()
        .filter(|&t| t <= input_budget)
        .ok_or_else(|| Error::Refused(format!("g({m}) = {gv} exceeds the input budget of {input_budget}")))?;
    let mut tapes = vec![StartTape::zeros()];
    for x in 0..=top {
        let t = StartTape::from_word(&word_of_index(&BigUint::from(x)));
        if !tapes.contains(&t) {
            tapes.push(t);
        }
    }
    let mut best: Option<BBResult> = None;
    let mut exact = true;
    for t in &tapes {
        let r = sigma_from(states, t, opts)?;
        exact &= r.exact;
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    let best = best.expect("at least the zero tape");
    Ok(BPrime {
        index: m.clone(),
        states,
        g,
        value: best.value,
        exact,
        tapes: tapes.len() as u64,
        witness: best.witness,
    })
}

/// One row of the `B′` versus `g` table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BPrimeRow {
    #[serde(serialize_with = "crate::ser::big")]
    pub index: BigUint,
    pub states: u64,
    pub certified: bool,
    pub g: Option<String>,
    pub b_prime: Option<u64>,
    pub b_prime_at_least_g: Option<bool>,
    pub refusal: Option<String>,
}

pub fn bprime_vs_g_report(indices: &[BigUint], registry: &Registry, opts: SearchOptions) -> Vec<BPrimeRow> {
    indices
        .iter()
        .map(|m| {
            let mut row = BPrimeRow {
                index: m.clone(),
                states: states_of_index(m),
                certified: registry.is_certified(m),
                g: None,
                b_prime: None,
                b_prime_at_least_g: None,
                refusal: None,
            };
            match b_prime(m, registry, opts, DEFAULT_INPUT_BUDGET) {
                Ok(bp) => {
                    row.b_prime_at_least_g = bp.g.value().map(|g| BigUint::from(bp.value) >= *g);
                    row.g = Some(bp.g.to_string());
                    row.b_prime = Some(bp.value);
                }
                Err(e) => {
                    row.g = g_at_index(m, registry, Search::default()).ok().map(|g| g.to_string());
                    row.refusal = Some(e.to_string());
                }
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{run, RunStatus};

    #[test]
    fn notation_round_trip() {
        for s in ["1RB1LB_1LA1RH", "1RB---_0LA1RH", "1RH1RH"] {
            let m: RadoMachine = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert!("1RB".parse::<RadoMachine>().is_err());
        assert!("1RC1RH_1LA1RH".parse::<RadoMachine>().is_err());
    }

    #[test]
    fn champion_two_state() {
        let m: RadoMachine = "1RB1LB_1LA1RH".parse().unwrap();
        assert_eq!(fate(&m, &StartTape::zeros(), 30, 0), Fate::Halted { ones: 4, steps: 6 });
        // The core simulator agrees through the adapter.
        let out = run(&m.to_table(), &Word::empty(), 100).unwrap();
        assert_eq!(out.status, RunStatus::Halted);
        assert_eq!(out.steps_used, 6);
    }

    #[test]
    fn deciders_catch_simple_non_halters() {
        let z = StartTape::zeros();
        // Ping-pong on blank cells: an exact repeat.
        let stay: RadoMachine = "0LB1RH_0RA1RH".parse().unwrap();
        let mut sim = Sim::new(&stay, &z);
        let mut watch = CycleWatch::new(&z);
        while !watch.proven && sim.steps < 100 {
            sim.step();
            watch.observe(&sim);
        }
        assert!(watch.proven && sim.steps < 10);
        // Walks right forever writing 1s: a translated cycle.
        let runner: RadoMachine = "1RA1RH".parse().unwrap();
        let mut sim = Sim::new(&runner, &z);
        let mut watch = CycleWatch::new(&z);
        while !watch.proven && sim.steps < 100 {
            sim.step();
            watch.observe(&sim);
        }
        assert!(watch.proven);
        assert_eq!(fate(&runner, &z, 10, 1000), Fate::NonHalting);
        // No halting entry at all: a binary counter.
        let counter: RadoMachine = "0RB0LA_1LA1RB".parse().unwrap();
        assert!(!can_stop(&counter));
        assert_eq!(fate(&counter, &z, 10, 0), Fate::NonHalting);
        // The undefined entry A1 is never entered: A is only reached on a 0.
        let guarded: RadoMachine = "1RB---_1LC1RB_0RA0LC".parse().unwrap();
        assert!(can_stop(&guarded) && stop_unreachable(&guarded, &z));
        // Backward reasoning must not claim machines that do halt.
        let champion: RadoMachine = "1RB1LB_1LA1RH".parse().unwrap();
        assert!(!stop_unreachable(&champion, &z));
    }

    #[test]
    fn unpruned_counts() {
        assert_eq!(enumerate_rado(1).count(), 64);
        let all: std::collections::HashSet<String> = enumerate_rado(1).map(|m| m.to_string()).collect();
        assert_eq!(all.len(), 64);
        assert!(pruned_count(1, SearchOptions::new(10)).unwrap() < 64);
    }

    #[test]
    fn small_sigma() {
        let r = sigma(1, SearchOptions::new(10)).unwrap();
        assert_eq!((r.value, r.exact), (1, true));
        let r = sigma(2, SearchOptions::new(30)).unwrap();
        assert_eq!((r.value, r.exact), (4, true));
        for n in 1..=2 {
            let cut = [0, 10, 30][n as usize];
            let a = sigma(n, SearchOptions::new(cut)).unwrap();
            let b = sigma_unpruned(n, SearchOptions::new(cut)).unwrap();
            assert_eq!(a.value, b.value);
            assert!(b.exact);
        }
    }

    #[test]
    fn states_of_index_values() {
        assert_eq!(states_of_index(&BigUint::from(0u32)), 0);
        let edge = (BigUint::from(1u32) << 33u32) - 2u32;
        assert_eq!(states_of_index(&edge), 0);
        assert_eq!(states_of_index(&(&edge + 1u32)), 1);
        let mut last = 0;
        for i in 0..2000u32 {
            let s = states_of_index(&(BigUint::from(1u32) << i));
            assert!(s >= last);
            last = s;
        }
        assert!(last > 15);
    }

    #[test]
    fn zero_state_search() {
        let r = b_of_index(&BigUint::from(0u32), SearchOptions::new(10)).unwrap();
        assert_eq!(r.value, 0);
        let t = StartTape::from_word(&Word::from("101"));
        assert_eq!(sigma_from(0, &t, SearchOptions::new(10)).unwrap().value, 2);
    }

    #[test]
    fn sharding_is_deterministic() {
        let base = sigma(2, SearchOptions::new(30)).unwrap();
        for s in [2, 3, 8] {
            assert_eq!(sigma(2, SearchOptions::new(30).shards(s)).unwrap(), base);
        }
    }

    #[test]
    fn sigma_three() {
        let r = sigma(3, SearchOptions::new(50)).unwrap();
        assert_eq!((r.value, r.exact), (6, true));
    }

    #[test]
    fn b_prime_dominates_b_and_g_on_basic_registry() {
        let reg = Registry::with_basics();
        let opts = SearchOptions::new(50);
        for cm in reg.iter() {
            let m = &cm.ell_index;
            let bp = b_prime(m, &reg, opts, DEFAULT_INPUT_BUDGET).unwrap();
            let b = b_of_index(m, opts).unwrap();
            assert!(bp.exact && b.exact);
            assert!(bp.value >= b.value, "{m}");
            assert!(BigUint::from(bp.value) >= *bp.g.value().unwrap());
        }
        // The constant 2 has g = 2 and sits at one state: the input "1"
        // lets B′ exceed B(1) = 1.
        let two = reg.iter().find(|c| c.kind == crate::factory::Kind::Constant(BigUint::from(2u32))).unwrap();
        let bp = b_prime(&two.ell_index, &reg, opts, DEFAULT_INPUT_BUDGET).unwrap();
        assert_eq!((bp.states, bp.value), (1, 2));
    }

    #[test]
    fn b_prime_equals_b_when_uncertified() {
        let reg = Registry::with_basics();
        let opts = SearchOptions::new(50);
        let one = BigUint::from(1u32);
        for m in [BigUint::from(0u32), one.clone(), (&one << 33u32) - 1u32, &one << 200u32, &one << 300u32] {
            assert!(!reg.is_certified(&m));
            let bp = b_prime(&m, &reg, opts, DEFAULT_INPUT_BUDGET).unwrap();
            assert_eq!(bp.value, b_of_index(&m, opts).unwrap().value);
            assert_eq!(bp.tapes, 1);
        }
        let rows = bprime_vs_g_report(&[one.clone(), &one << 2000u32], &reg, opts);
        assert_eq!(rows[0].b_prime_at_least_g, Some(true));
        assert!(rows[1].refusal.is_some());
        assert_eq!(rows, bprime_vs_g_report(&[one.clone(), &one << 2000u32], &reg, opts));
    }
}
