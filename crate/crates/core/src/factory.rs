//! The machines O, O′, constants and quasi-trivial families, with polynomial
//! time certificates and the registry of certified indices.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::codec::{ell_index, index_of_word, table_index, word_of_index};
use crate::ell::make_constant;
use crate::error::{Error, Result};
use crate::growth::GrowthFunction;
use crate::machine::{run_with, Instruction, MachineTable, Move, RunOptions, Symbol};
use crate::word::Word;

pub const DEFAULT_TABLE_BUDGET: usize = 4096;

/// Claims `op_time(x) ≤ c·(|x|+1)^k + c`; output length is held to the same
/// bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyCertificate {
    pub k: u32,
    pub c: u64,
}

impl PolyCertificate {
    pub fn linear(c: u64) -> Self {
        PolyCertificate { k: 1, c }
    }

    pub fn bound(&self, len: u64) -> BigUint {
        BigUint::from(self.c) * BigUint::from(len + 1).pow(self.k) + self.c
    }

    pub fn check(&self, input: &BigUint, eval: &Evaluation) -> Result<()> {
        let len = word_of_index(input).len() as u64;
        let bound = self.bound(len);
        let violation = |detail: String| Error::CertificateViolation {
            input: input.to_string(),
            detail,
        };
        if BigUint::from(eval.op_time) > bound {
            return Err(violation(format!("op_time {} > {bound}", eval.op_time)));
        }
        if BigUint::from(eval.output.len()) > bound {
            return Err(violation(format!("output length {} > {bound}", eval.output.len())));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub value: BigUint,
    pub output: Word,
    pub op_time: u64,
}

/// `Q^{H,H′,n}`: `H′(x)` for `x ≤ H(n)`, `0` beyond.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiTrivialSpec {
    threshold: GrowthFunction,
    payload: GrowthFunction,
    n: u64,
    k_n: BigUint,
}

impl QuasiTrivialSpec {
    /// Computes `k_n = H(n)` and checks `H′(x) ≥ 2^x` at `x ∈ {0, k_n/2, k_n}`.
    pub fn new(threshold: GrowthFunction, payload: GrowthFunction, n: u64) -> Result<Self> {
        let k_n = threshold.eval_u64(n)?;
        for x in [BigUint::zero(), &k_n / 2u32, k_n.clone()] {
            let v = payload.eval(&x)?;
            let e = x.to_u64().ok_or_else(|| Error::SpecViolation(format!("probe {x} too large")))?;
            if v.bits() <= e {
                return Err(Error::SpecViolation(format!("H′({x}) = {v} is below 2^{x}")));
            }
        }
        Ok(QuasiTrivialSpec {
            threshold,
            payload,
            n,
            k_n,
        })
    }

    pub fn threshold(&self) -> &GrowthFunction {
        &self.threshold
    }

    pub fn payload(&self) -> &GrowthFunction {
        &self.payload
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k_n(&self) -> &BigUint {
        &self.k_n
    }

    pub fn eval(&self, x: &BigUint) -> Result<BigUint> {
        if *x <= self.k_n {
            self.payload.eval(x)
        } else {
            Ok(BigUint::zero())
        }
    }

    /// Longest output word over `x ≤ k_n`.
    fn max_output_len(&self) -> Result<u64> {
        if self.payload.is_monotone() {
            return Ok(word_of_index(&self.payload.eval(&self.k_n)?).len() as u64);
        }
        let top = self.k_n.to_u64().filter(|&k| k <= 1 << 16).ok_or_else(|| {
            Error::Refused("cannot bound the output of a non-monotone payload over a large threshold".into())
        })?;
        let mut best = 0;
        for x in 0..=top {
            best = best.max(word_of_index(&self.payload.eval_u64(x)?).len() as u64);
        }
        Ok(best)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    /// `O`: the identity.
    Identity,
    /// `O′`: constant `0`.
    Zero,
    Constant(BigUint),
    QuasiTrivial {
        spec: QuasiTrivialSpec,
        /// Table index of the family template.
        family: BigUint,
    },
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Identity => "O",
            Kind::Zero => "Oprime",
            Kind::Constant(_) => "constant",
            Kind::QuasiTrivial { .. } => "quasi_trivial",
        }
    }
}

/// A machine with a polynomial time certificate and its ℓ-index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedMachine {
    pub kind: Kind,
    pub table: Option<MachineTable>,
    pub certificate: PolyCertificate,
    pub ell_index: BigUint,
}

impl CertifiedMachine {
    fn plain(kind: Kind, table: MachineTable, certificate: PolyCertificate) -> Self {
        let ell_index = ell_index(&BigUint::zero(), &table_index(&table));
        CertifiedMachine {
            kind,
            table: Some(table),
            certificate,
            ell_index,
        }
    }

    pub fn quasi_trivial(&self) -> Option<&QuasiTrivialSpec> {
        match &self.kind {
            Kind::QuasiTrivial { spec, .. } => Some(spec),
            _ => None,
        }
    }

    /// Semantic value on `x`.
    pub fn eval(&self, x: &BigUint) -> Result<BigUint> {
        match &self.kind {
            Kind::Identity => Ok(x.clone()),
            Kind::Zero => Ok(BigUint::zero()),
            Kind::Constant(n) => Ok(n.clone()),
            Kind::QuasiTrivial { spec, .. } => spec.eval(x),
        }
    }

    /// Operation time of the compiled machine on `x`, as a closed form.
    pub fn time_model(&self, x: &BigUint, value: &BigUint) -> u64 {
        let len = word_of_index(x).len() as u64;
        let out = word_of_index(value).len() as u64;
        match &self.kind {
            Kind::Identity => len + 1,
            Kind::Zero => 2 * len + 1,
            Kind::Constant(n) => len + word_of_index(n).len() as u64 + 2,
            Kind::QuasiTrivial { .. } => 2 * len + out.max(1),
        }
    }

    /// Semantic evaluation with the certificate checked.
    pub fn evaluate(&self, x: &BigUint) -> Result<Evaluation> {
        let value = self.eval(x)?;
        let eval = Evaluation {
            op_time: self.time_model(x, &value),
            output: word_of_index(&value),
            value,
        };
        self.certificate.check(x, &eval)?;
        Ok(eval)
    }

    /// Runs the compiled table with the certificate checked.
    pub fn evaluate_compiled(&self, x: &BigUint, opts: RunOptions) -> Result<Evaluation> {
        let table = self
            .table
            .as_ref()
            .ok_or_else(|| Error::Refused(format!("no compiled table for {}", self.kind.name())))?;
        let out = run_with(table, &word_of_index(x), opts)?;
        let (Some(output), Some(op_time)) = (out.output, out.op_time) else {
            return Err(Error::Refused(format!("compiled machine did not halt on {x}: {:?}", out.status)));
        };
        let eval = Evaluation {
            value: index_of_word(&output),
            output,
            op_time,
        };
        self.certificate.check(x, &eval)?;
        Ok(eval)
    }
}

fn o_table() -> MachineTable {
    let lines = Symbol::ALL
        .into_iter()
        .map(|s| Instruction::new(1, s, s, Move::Stay, 0))
        .collect();
    MachineTable::new(2, lines)
}

fn oprime_table() -> MachineTable {
    use Symbol::*;
    MachineTable::new(
        2,
        vec![
            Instruction::new(1, Zero, Blank, Move::Right, 1),
            Instruction::new(1, One, Blank, Move::Right, 1),
            Instruction::new(1, Blank, Blank, Move::Stay, 0),
        ],
    )
}

/// `O`: outputs its input.
#[allow(non_snake_case)]
pub fn make_O() -> CertifiedMachine {
    CertifiedMachine::plain(Kind::Identity, o_table(), PolyCertificate::linear(1))
}

/// `O′`: erases its input and outputs `0` (the empty word).
#[allow(non_snake_case)]
pub fn make_Oprime() -> CertifiedMachine {
    CertifiedMachine::plain(Kind::Zero, oprime_table(), PolyCertificate::linear(2))
}

/// `iₙ` with its linear certificate.
pub fn make_constant_machine(n: &BigUint) -> CertifiedMachine {
    let c = word_of_index(n).len() as u64 + 2;
    CertifiedMachine::plain(Kind::Constant(n.clone()), make_constant(n), PolyCertificate::linear(c))
}

/// Semantic quasi-trivial machine, indexed as `⟨n, family⟩`.
pub fn make_quasi_trivial(spec: QuasiTrivialSpec, family: &BigUint) -> Result<CertifiedMachine> {
    let c = spec.max_output_len()?.max(2);
    Ok(CertifiedMachine {
        ell_index: ell_index(&BigUint::from(spec.n), family),
        kind: Kind::QuasiTrivial {
            spec,
            family: family.clone(),
        },
        table: None,
        certificate: PolyCertificate::linear(c),
    })
}

/// Lookup-table machine for a quasi-trivial spec.
///
/// Reads and erases the input through a trie of depth `|word(k_n)|`, then
/// writes the tabulated output rightwards and halts on its last bit; inputs
/// longer than the trie are drained and give the empty word.
pub fn compile_quasi_trivial(spec: &QuasiTrivialSpec, budget: usize) -> Result<MachineTable> {
    let depth = word_of_index(&spec.k_n).len();
    let nodes = if depth >= 40 { usize::MAX } else { (1usize << (depth + 1)) - 1 };
    let over = |needed: usize| Error::TableBudget { needed, budget };
    if nodes.saturating_add(1) > budget {
        return Err(over(nodes.saturating_add(1)));
    }
    let k = spec.k_n.to_u64().expect("small threshold");
    let mut outputs = Vec::with_capacity(k as usize + 1);
    let mut needed = nodes + 1;
    for x in 0..=k {
        let w = word_of_index(&spec.payload.eval_u64(x)?);
        needed += w.len().saturating_sub(1);
        if needed > budget {
            return Err(over(needed));
        }
        outputs.push(w);
    }
    // Node for prefix p is state index(p) + 1, so the root is state 1.
    let drain = nodes as u32 + 1;
    let mut next_free = drain + 1;
    let mut lines = Vec::new();
    use Symbol::*;
    for node in 0..nodes as u64 {
        let state = node as u32 + 1;
        let prefix = word_of_index(&BigUint::from(node));
        for (b, sym) in [(false, Zero), (true, One)] {
            let next = if prefix.len() < depth {
                let mut child = prefix.clone();
                child.push(b);
                index_of_word(&child).to_u32().expect("small trie") + 1
            } else {
                drain
            };
            lines.push(Instruction::new(state, sym, Blank, Move::Right, next));
        }
        match outputs.get(node as usize).filter(|w| !w.is_empty()) {
            None => lines.push(Instruction::new(state, Blank, Blank, Move::Stay, 0)),
            Some(w) => {
                let bits = w.bits();
                let mut current = state;
                for (j, &b) in bits.iter().enumerate() {
                    let last = j + 1 == bits.len();
                    let (mv, next) = if last {
                        (Move::Stay, 0)
                    } else {
                        next_free += 1;
                        (Move::Right, next_free - 1)
                    };
                    lines.push(Instruction::new(current, Blank, Symbol::from_bit(b), mv, next));
                    current = next;
                }
            }
        }
    }
    lines.push(Instruction::new(drain, Zero, Blank, Move::Right, drain));
    lines.push(Instruction::new(drain, One, Blank, Move::Right, drain));
    lines.push(Instruction::new(drain, Blank, Blank, Move::Stay, 0));
    let table = MachineTable::new(next_free, lines);
    debug_assert!(table.validate().is_ok());
    Ok(table)
}

/// Registered certified machines keyed by ℓ-index.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    machines: BTreeMap<BigUint, CertifiedMachine>,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    /// `O`, `O′` and the constants `i₀ … i₇`.
    pub fn with_basics() -> Self {
        let mut r = Registry::new();
        let mut all = vec![make_O(), make_Oprime()];
        all.extend((0u32..8).map(|n| make_constant_machine(&BigUint::from(n))));
        for cm in all {
            r.register(cm).expect("distinct tables");
        }
        r
    }

    pub fn register(&mut self, cm: CertifiedMachine) -> Result<()> {
        if self.machines.contains_key(&cm.ell_index) {
            return Err(Error::Registry(format!("index {} already registered", cm.ell_index)));
        }
        self.machines.insert(cm.ell_index.clone(), cm);
        Ok(())
    }

    pub fn lookup(&self, index: &BigUint) -> Option<&CertifiedMachine> {
        self.machines.get(index)
    }

    pub fn is_certified(&self, index: &BigUint) -> bool {
        self.machines.contains_key(index)
    }

    pub fn len(&self) -> usize {
        self.machines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.machines.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CertifiedMachine> {
        self.machines.values()
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<Entry> = self.iter().map(Entry::from).collect();
        serde_json::to_string_pretty(&entries).expect("serializable")
    }

    /// Rebuilds a registry; every entry's index is recomputed and checked.
    pub fn from_json(text: &str) -> Result<Self> {
        let entries: Vec<Entry> = serde_json::from_str(text).map_err(|e| Error::Registry(e.to_string()))?;
        let mut r = Registry::new();
        for e in entries {
            let cm = e.rebuild()?;
            r.register(cm)?;
        }
        Ok(r)
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    ell_index: String,
    kind: String,
    params: Params,
    certificate: PolyCertificate,
}

#[derive(Serialize, Deserialize, Default)]
struct Params {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    threshold: Option<GrowthFunction>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    payload: Option<GrowthFunction>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    family: Option<String>,
}

impl From<&CertifiedMachine> for Entry {
    fn from(cm: &CertifiedMachine) -> Self {
        let params = match &cm.kind {
            Kind::Identity | Kind::Zero => Params::default(),
            Kind::Constant(v) => Params {
                value: Some(v.to_string()),
                ..Params::default()
            },
            Kind::QuasiTrivial { spec, family } => Params {
                threshold: Some(spec.threshold.clone()),
                payload: Some(spec.payload.clone()),
                n: Some(spec.n),
                family: Some(family.to_string()),
                ..Params::default()
            },
        };
        Entry {
            ell_index: cm.ell_index.to_string(),
            kind: cm.kind.name().to_string(),
            params,
            certificate: cm.certificate,
        }
    }
}

impl Entry {
    fn rebuild(self) -> Result<CertifiedMachine> {
        let missing = |what: &str| Error::Registry(format!("{} entry without {what}", self.kind));
        let big = |s: &Option<String>, what: &str| -> Result<BigUint> {
            s.as_deref()
                .ok_or_else(|| missing(what))?
                .parse()
                .map_err(|e| Error::Registry(format!("{what}: {e}")))
        };
        let cm = match self.kind.as_str() {
            "O" => make_O(),
            "Oprime" => make_Oprime(),
            "constant" => make_constant_machine(&big(&self.params.value, "value")?),
            "quasi_trivial" => {
                let p = &self.params;
                let spec = QuasiTrivialSpec::new(
                    p.threshold.clone().ok_or_else(|| missing("threshold"))?,
                    p.payload.clone().ok_or_else(|| missing("payload"))?,
                    p.n.ok_or_else(|| missing("n"))?,
                )?;
                let mut cm = make_quasi_trivial(spec, &big(&p.family, "family")?)?;
                cm.table = cm.quasi_trivial().and_then(|s| compile_quasi_trivial(s, DEFAULT_TABLE_BUDGET).ok());
                cm
            }
            other => return Err(Error::Registry(format!("unknown kind `{other}`"))),
        };
        if cm.ell_index.to_string() != self.ell_index {
            return Err(Error::Registry(format!(
                "stored index {} does not match the rebuilt machine ({})",
                self.ell_index, cm.ell_index
            )));
        }
        if cm.certificate != self.certificate {
            return Err(Error::Registry(format!("certificate mismatch at {}", self.ell_index)));
        }
        Ok(cm)
    }
}

/// Registers a quasi-trivial family sharing `H` and `H′`. The family
/// template is the compiled member with the smallest `n`; member `n` gets
/// the ℓ-index of `⟨n, m_family⟩`. Members whose tables fit the budget carry
/// them.
pub fn register_family(
    registry: &mut Registry,
    specs: &[QuasiTrivialSpec],
    table_budget: usize,
) -> Result<Vec<CertifiedMachine>> {
    let first = specs
        .iter()
        .min_by_key(|s| s.n)
        .ok_or_else(|| Error::Refused("empty family".into()))?;
    if specs
        .iter()
        .any(|s| s.threshold.expr() != first.threshold.expr() || s.payload.expr() != first.payload.expr())
    {
        return Err(Error::Refused("family members must share H and H′".into()));
    }
    let template = compile_quasi_trivial(first, table_budget)?;
    let family = table_index(&template);
    let mut out = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut cm = make_quasi_trivial(spec.clone(), &family)?;
        cm.table = compile_quasi_trivial(spec, table_budget).ok();
        registry.register(cm.clone())?;
        out.push(cm);
    }
    Ok(out)
}

/// The toy family `H(n) = 2^(n+3)`, `H′(x) = 4^(x+1)`.
pub fn toy_specs(ns: impl IntoIterator<Item = u64>) -> Result<Vec<QuasiTrivialSpec>> {
    let h = GrowthFunction::parse("2^(n+3)")?;
    let hp = GrowthFunction::parse("4^(n+1)")?;
    ns.into_iter()
        .map(|n| QuasiTrivialSpec::new(h.clone(), hp.clone(), n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{linear_law, word_of_u64};
    use crate::machine::run;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn o_and_oprime() {
        let (o, op) = (make_O(), make_Oprime());
        assert_eq!(o.evaluate(&big(13)).unwrap().value, big(13));
        assert_eq!(op.evaluate(&big(13)).unwrap().value, big(0));
        for x in 0..64u64 {
            let w = word_of_u64(x);
            for cm in [&o, &op] {
                let e = cm.evaluate_compiled(&big(x), RunOptions::budget(1000)).unwrap();
                assert_eq!(e.value, cm.eval(&big(x)).unwrap());
                assert_eq!(e.op_time, cm.time_model(&big(x), &e.value));
                assert!(e.op_time <= 2 * w.len() as u64 + 1);
            }
            assert_eq!(run(&MachineTable::empty(), &w, 1).unwrap().output, Some(w.clone()));
        }
    }

    #[test]
    fn toy_quasi_trivial_values() {
        let spec = toy_specs([0]).unwrap().remove(0);
        assert_eq!(spec.k_n(), &big(8));
        let cm = make_quasi_trivial(spec, &big(0)).unwrap();
        assert_eq!(cm.eval(&big(5)).unwrap(), big(4096));
        assert_eq!(cm.eval(&big(9)).unwrap(), big(0));
        assert_eq!(cm.eval(&big(8)).unwrap(), big(4).pow(9));
    }

    #[test]
    fn spec_violation_when_payload_too_small() {
        let h = GrowthFunction::parse("8").unwrap();
        let small = GrowthFunction::parse("n").unwrap();
        assert!(matches!(
            QuasiTrivialSpec::new(h, small, 0),
            Err(Error::SpecViolation(_))
        ));
    }

    #[test]
    fn compiled_tier_agrees_with_semantics() {
        let h = GrowthFunction::parse("2").unwrap();
        let hp = GrowthFunction::parse("4^(n+1)").unwrap();
        let spec = QuasiTrivialSpec::new(h, hp, 0).unwrap();
        let mut cm = make_quasi_trivial(spec.clone(), &big(0)).unwrap();
        cm.table = Some(compile_quasi_trivial(&spec, DEFAULT_TABLE_BUDGET).unwrap());
        for x in 0..=5u64 {
            let s = cm.evaluate(&big(x)).unwrap();
            let c = cm.evaluate_compiled(&big(x), RunOptions::budget(10_000)).unwrap();
            assert_eq!(s, c, "x={x}");
            let len = word_of_u64(x).len() as u64;
            assert!(c.op_time <= cm.certificate.c * (len + 1) + cm.certificate.c);
        }
        for spec in toy_specs(0..=1).unwrap() {
            let table = compile_quasi_trivial(&spec, DEFAULT_TABLE_BUDGET).unwrap();
            let cm = make_quasi_trivial(spec.clone(), &big(0)).unwrap();
            for x in 0..=spec.k_n().to_u64().unwrap() + 6 {
                let out = run(&table, &word_of_u64(x), 100_000).unwrap();
                assert_eq!(out.output.map(|w| index_of_word(&w)), Some(cm.eval(&big(x)).unwrap()));
            }
        }
    }

    #[test]
    fn budget_refusal() {
        let spec = toy_specs([4]).unwrap().remove(0);
        assert!(matches!(
            compile_quasi_trivial(&spec, DEFAULT_TABLE_BUDGET),
            Err(Error::TableBudget { .. })
        ));
    }

    #[test]
    fn certificate_violation_is_reported() {
        let mut o = make_O();
        o.certificate = PolyCertificate { k: 0, c: 1 };
        assert!(matches!(o.evaluate(&big(100)), Err(Error::CertificateViolation { .. })));
    }

    #[test]
    fn family_indices_follow_the_linear_law() {
        let mut reg = Registry::new();
        let members = register_family(&mut reg, &toy_specs(0..=4).unwrap(), DEFAULT_TABLE_BUDGET).unwrap();
        let Kind::QuasiTrivial { family, .. } = &members[0].kind else { panic!() };
        let law = linear_law(family, 0..5).unwrap();
        for (n, cm) in members.iter().enumerate() {
            assert_eq!(cm.ell_index, law.at(&big(n as u64)));
            assert_eq!(reg.lookup(&cm.ell_index), Some(cm));
        }
        assert!(!reg.is_certified(&big(12345)));
        assert!(members[0].table.is_some() && members[1].table.is_some());
        assert!(members[4].table.is_none());
    }

    #[test]
    fn collisions_are_rejected() {
        let mut reg = Registry::with_basics();
        assert!(matches!(reg.register(make_O()), Err(Error::Registry(_))));
    }

    #[test]
    fn registry_json_round_trip() {
        let mut reg = Registry::with_basics();
        register_family(&mut reg, &toy_specs(0..=2).unwrap(), DEFAULT_TABLE_BUDGET).unwrap();
        let back = Registry::from_json(&reg.to_json()).unwrap();
        assert_eq!(back.len(), reg.len());
        for cm in reg.iter() {
            assert_eq!(back.lookup(&cm.ell_index), Some(cm));
        }
    }
}
