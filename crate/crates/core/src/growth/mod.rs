//! Growth functions, the overtaking functions `g₀`, `g*` and `g`, finite-window
//! domination and the counterexample family construction.

mod expr;

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factory::{register_family, CertifiedMachine, QuasiTrivialSpec, Registry, DEFAULT_TABLE_BUDGET};
use crate::machine::RunOptions;
pub use expr::{Expr, Limits, DEFAULT_CEILING_BITS};

/// A total function on the naturals given by an expression in `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthFunction {
    name: String,
    expr: Expr,
    limits: Limits,
}

impl GrowthFunction {
    pub fn parse(src: &str) -> Result<Self> {
        let expr = Expr::parse(src)?;
        Ok(GrowthFunction {
            name: expr.to_string(),
            expr,
            limits: Limits::default(),
        })
    }

    pub fn from_expr(name: impl Into<String>, expr: Expr) -> Self {
        GrowthFunction {
            name: name.into(),
            expr,
            limits: Limits::default(),
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn is_monotone(&self) -> bool {
        self.expr.is_monotone()
    }

    pub fn eval(&self, n: &BigUint) -> Result<BigUint> {
        self.expr.eval(n, &self.limits)
    }

    pub fn eval_u64(&self, n: u64) -> Result<BigUint> {
        self.eval(&BigUint::from(n))
    }
}

impl fmt::Display for GrowthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

impl FromStr for GrowthFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GrowthFunction::parse(s)
    }
}

impl Serialize for GrowthFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.expr.to_string())
    }
}

impl<'de> Deserialize<'de> for GrowthFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        GrowthFunction::parse(&s).map_err(serde::de::Error::custom)
    }
}

pub fn fgh(k: u32, n: &BigUint, limits: &Limits) -> Result<BigUint> {
    expr::fgh(k, n, limits)
}

pub fn f_omega(n: &BigUint, limits: &Limits) -> Result<BigUint> {
    expr::f_omega(n, limits)
}

/// `h*(n) = n + max{h(k) : k ≤ n}`, strictly increasing and `≥ h`.
pub fn monotonize(h: &GrowthFunction) -> GrowthFunction {
    GrowthFunction {
        name: format!("mono({})", h.name),
        expr: Expr::Mono {
            body: Box::new(h.expr.clone()),
            arg: Box::new(Expr::Var),
        },
        limits: h.limits,
    }
}

/// `h′ = h* ∘ F_ω`.
pub fn derive_hprime(h: &GrowthFunction) -> GrowthFunction {
    GrowthFunction {
        name: format!("hprime({})", h.name),
        expr: Expr::Mono {
            body: Box::new(h.expr.clone()),
            arg: Box::new(Expr::Fw(Box::new(Expr::Var))),
        },
        limits: h.limits,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuMode {
    /// Least `x` with `x^m < 2^x`.
    #[default]
    First,
    /// Least `x` from which `y^m < 2^y` holds for every `y ≥ x`.
    Crossover,
}

impl FromStr for MuMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(MuMode::First),
            "crossover" => Ok(MuMode::Crossover),
            _ => Err(Error::Refused(format!("unknown mode `{s}` (first|crossover)"))),
        }
    }
}

fn below_exponential(x: u64, m: u32) -> bool {
    // 0^0 = 1
    BigUint::from(x).pow(m) < BigUint::one() << x
}

/// `g₀(m)`.
pub fn g0(m: u32, mode: MuMode) -> u64 {
    match mode {
        MuMode::First => (0..).find(|&x| below_exponential(x, m)).expect("2^x eventually wins"),
        MuMode::Crossover => {
            // If y^m < 2^y and (y+1)^m ≤ 2·y^m then (y+1)^m < 2^(y+1); the
            // second condition, ((y+1)/y)^m ≤ 2, persists for larger y, so
            // both hold from y on and the run of successes never breaks.
            let mut run_start = None;
            for y in 0u64.. {
                if !below_exponential(y, m) {
                    run_start = None;
                    continue;
                }
                let start = *run_start.get_or_insert(y);
                let by = BigUint::from(y);
                if y > 0 && (&by + 1u32).pow(m) <= by.pow(m) * 2u32 {
                    return start;
                }
            }
            unreachable!()
        }
    }
}

/// Outcome of a μ-search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GValue {
    Value {
        #[serde(serialize_with = "crate::ser::big")]
        value: BigUint,
    },
    Unresolved { searched: u64 },
}

impl GValue {
    pub fn value(&self) -> Option<&BigUint> {
        match self {
            GValue::Value { value } => Some(value),
            GValue::Unresolved { .. } => None,
        }
    }

    fn of(v: impl Into<BigUint>) -> GValue {
        GValue::Value { value: v.into() }
    }
}

impl fmt::Display for GValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GValue::Value { value } => write!(f, "{value}"),
            GValue::Unresolved { .. } => write!(f, "unresolved"),
        }
    }
}

/// How `g` of a machine is searched for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Search {
    /// Inputs `0..max_inputs` are tried.
    pub max_inputs: u64,
    /// Use the quasi-trivial shortcut when available.
    pub structural: bool,
    /// Run compiled tables (with this many steps per input) instead of the
    /// semantic evaluator.
    pub compiled_steps: Option<u64>,
}

impl Default for Search {
    fn default() -> Self {
        Search {
            max_inputs: 1 << 12,
            structural: true,
            compiled_steps: None,
        }
    }
}

/// `g(m) = μ_x [M_m(x) < 2^x]` for a certified machine.
pub fn g_of_machine(cm: &CertifiedMachine, search: Search) -> Result<GValue> {
    if search.structural {
        if let Some(spec) = cm.quasi_trivial() {
            return structural_g(spec);
        }
    }
    for x in 0..search.max_inputs {
        let input = BigUint::from(x);
        let value = match search.compiled_steps {
            Some(steps) => cm.evaluate_compiled(&input, RunOptions::without_loop_detection(steps))?.value,
            None => cm.evaluate(&input)?.value,
        };
        if value < BigUint::one() << x {
            return Ok(GValue::of(x));
        }
    }
    Ok(GValue::Unresolved {
        searched: search.max_inputs,
    })
}

fn structural_g(spec: &QuasiTrivialSpec) -> Result<GValue> {
    let k = spec.k_n();
    for x in [BigUint::zero(), k / 2u32, k.clone()] {
        let v = spec.payload().eval(&x)?;
        let bits = u64::try_from(&x).map_err(|_| Error::Overflow {
            what: "probe point".into(),
            ceiling_bits: 64,
        })?;
        if v < BigUint::one() << bits {
            return Err(Error::SpecViolation(format!("payload at {x} is below 2^{x}")));
        }
    }
    Ok(GValue::of(k + 1u32))
}

/// `g` at an arbitrary index: uncertified indices give 0.
pub fn g_at_index(i: &BigUint, registry: &Registry, search: Search) -> Result<GValue> {
    match registry.lookup(i) {
        Some(cm) => g_of_machine(cm, search),
        None => Ok(GValue::of(0u32)),
    }
}

/// `g*(m)`: `g` of the `m`-th machine of a supplied enumeration.
pub fn g_star(enumeration: &[CertifiedMachine], m: usize, search: Search) -> Result<GValue> {
    let cm = enumeration.get(m).ok_or(Error::OutOfRange {
        index: m,
        len: enumeration.len(),
    })?;
    g_of_machine(cm, search)
}

/// Finite evidence for `f ≻ g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominationReport {
    pub window: (u64, u64),
    /// Least `y` in the window with `f(x) ≥ g(x)` for every window `x ≥ y`.
    pub witness: Option<u64>,
    /// Every window point with `f(x) < g(x)`.
    pub failures: Vec<u64>,
}

pub fn dominates_on_window(
    f: &GrowthFunction,
    g: &GrowthFunction,
    window: RangeInclusive<u64>,
) -> Result<DominationReport> {
    let mut failures = Vec::new();
    for x in window.clone() {
        let n = BigUint::from(x);
        if f.eval(&n)? < g.eval(&n)? {
            failures.push(x);
        }
    }
    let (lo, hi) = (*window.start(), *window.end());
    let witness = match failures.last() {
        None => Some(lo),
        Some(&last) if last < hi => Some(last + 1),
        Some(_) => None,
    };
    Ok(DominationReport {
        window: (lo, hi),
        witness,
        failures,
    })
}

/// One member of a counterexample family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyRow {
    pub n: u64,
    #[serde(serialize_with = "crate::ser::big")]
    pub index: BigUint,
    #[serde(serialize_with = "crate::ser::big")]
    pub hprime: BigUint,
    pub g: GValue,
    /// `h` at the index, as a bit length when the value is too large to print.
    pub h_at_index_bits: u64,
    pub g_is_hprime_plus_one: bool,
    pub g_exceeds_h: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CounterexampleReport {
    pub h: String,
    pub hprime: String,
    pub rows: Vec<FamilyRow>,
    /// Values of `n` that could not be built, with the reason.
    pub refused: Vec<(u64, String)>,
    /// Family members at whose index `h` does not stay below `g`.
    pub h_not_below_g: Vec<u64>,
}

impl CounterexampleReport {
    pub fn holds(&self) -> bool {
        self.refused.is_empty() && self.rows.iter().all(|r| r.g_is_hprime_plus_one && r.g_exceeds_h)
    }
}

/// The payload of counterexample families, `K(x) = 4^(x+1)`.
pub fn default_payload() -> GrowthFunction {
    GrowthFunction::parse("4^(n+1)").expect("literal")
}

/// Builds the quasi-trivial family with threshold source `h′ = h* ∘ F_ω`
/// and payload `K`, registers it in `registry` and evaluates `g` at each
/// member's index.
pub fn build_counterexample_family(
    h: &GrowthFunction,
    ns: RangeInclusive<u64>,
    registry: &mut Registry,
) -> Result<CounterexampleReport> {
    let hprime = derive_hprime(h);
    let payload = default_payload().with_limits(h.limits());
    let mut specs = Vec::new();
    let mut refused = Vec::new();
    for n in ns {
        match QuasiTrivialSpec::new(hprime.clone(), payload.clone(), n) {
            Ok(s) => specs.push(s),
            Err(e) => refused.push((n, e.to_string())),
        }
    }
    let members = if specs.is_empty() {
        Vec::new()
    } else {
        register_family(registry, &specs, DEFAULT_TABLE_BUDGET)?
    };
    let mut rows = Vec::new();
    let mut h_not_below_g = Vec::new();
    for (spec, cm) in specs.iter().zip(&members) {
        let g = g_at_index(&cm.ell_index, registry, Search::default())?;
        let h_at = h.eval(&cm.ell_index);
        let gv = g.value().cloned().unwrap_or_default();
        let (h_bits, exceeds) = match &h_at {
            Ok(v) => (v.bits(), gv > *v),
            Err(_) => (u64::MAX, false),
        };
        if !exceeds {
            h_not_below_g.push(spec.n());
        }
        rows.push(FamilyRow {
            n: spec.n(),
            index: cm.ell_index.clone(),
            hprime: spec.k_n().clone(),
            g_is_hprime_plus_one: g.value() == Some(&(spec.k_n() + 1u32)),
            g,
            h_at_index_bits: h_bits,
            g_exceeds_h: exceeds,
        });
    }
    Ok(CounterexampleReport {
        h: h.to_string(),
        hprime: hprime.to_string(),
        rows,
        refused,
        h_not_below_g,
    })
}
