//! Command-line front end. Every command writes JSON lines (one report row
//! each) or, with `--pretty`, an aligned table.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::ops::RangeInclusive;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use overtake::acceptance::{self, Profile};
use overtake::busy_beaver::{b_of_index, b_prime, bprime_vs_g_report, sigma, states_of_index, SearchOptions, DEFAULT_INPUT_BUDGET};
use overtake::codec::{decode_word, ell_index, encode_pair, index_of_word, linear_law, table_index, to_standard, word_of_index};
use overtake::factory::{register_family, QuasiTrivialSpec, Registry, DEFAULT_TABLE_BUDGET};
use overtake::growth::{
    build_counterexample_family, dominates_on_window, f_omega, fgh, g0, g_at_index, GrowthFunction, Limits, MuMode, Search,
    DEFAULT_CEILING_BITS,
};
use overtake::machine::{run, MachineTable};
use overtake::{Error, Word};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUSED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "overtake", version, about = "Turing-machine workbench: codec, quasi-trivial families, g, Busy Beaver")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Print an aligned table instead of JSON lines.
    #[arg(long, global = true, env = "OVERTAKE_PRETTY")]
    pub pretty: bool,
    /// Step budget for machine runs and input budget for μ-searches.
    #[arg(long, global = true, env = "OVERTAKE_BUDGET", default_value_t = 1_000_000)]
    pub budget: u64,
    /// Halting cutoff for Busy Beaver searches.
    #[arg(long, global = true, env = "OVERTAKE_CUTOFF", default_value_t = 50)]
    pub cutoff: u64,
    /// Largest intermediate value, in bits, before refusing with an overflow.
    #[arg(long, global = true, env = "OVERTAKE_CEILING_BITS", default_value_t = DEFAULT_CEILING_BITS)]
    pub ceiling_bits: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Canonical word enumeration and the pair code.
    #[command(subcommand)]
    Codec(CodecCmd),
    /// Run or inspect machine tables in the text format.
    #[command(subcommand)]
    Machine(MachineCmd),
    /// Quasi-trivial families and the registry of certified machines.
    #[command(subcommand)]
    Family(FamilyCmd),
    /// g₀, g, and the fast-growing hierarchy.
    #[command(subcommand)]
    Gfun(GfunCmd),
    /// Finite-window domination check of f over g.
    Dominate {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long, value_parser = parse_range)]
        window: RangeInclusive<u64>,
    },
    /// Busy Beaver searches.
    #[command(subcommand)]
    Bb(BbCmd),
    /// Worked demonstrations.
    #[command(subcommand)]
    Demo(DemoCmd),
    /// Run the acceptance criteria.
    Acceptance {
        #[arg(long, default_value = "full", env = "OVERTAKE_PROFILE")]
        profile: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum CodecCmd {
    /// Code word of the pair ⟨n, m⟩.
    Encode {
        #[arg(long)]
        n: BigUint,
        #[arg(long)]
        m: BigUint,
    },
    /// Decode a binary word (junk decodes to ⟨0, 0⟩).
    Decode {
        #[arg(long)]
        word: String,
    },
    /// ℓ-index of ⟨n, m⟩.
    Index {
        #[arg(long)]
        n: BigUint,
        #[arg(long)]
        m: BigUint,
    },
    /// Fit and verify N(n) = a·n + b for machine code m.
    Law {
        #[arg(long)]
        m: BigUint,
        #[arg(long, value_parser = parse_range, default_value = "0..99")]
        probe: RangeInclusive<u64>,
    },
    /// Canonical word of an index, or index of a word.
    Word {
        #[arg(long, conflicts_with = "word")]
        index: Option<BigUint>,
        #[arg(long)]
        word: Option<String>,
    },
    /// Index of the emulating one-tape machine.
    ToStandard {
        #[arg(long)]
        index: BigUint,
    },
}

#[derive(Subcommand, Debug)]
pub enum MachineCmd {
    /// Run a table (text format) on an input word.
    Run {
        #[arg(long)]
        table: std::path::PathBuf,
        #[arg(long, default_value = "")]
        input: String,
    },
    /// Validate a table and print its canonical index.
    Index {
        #[arg(long)]
        table: std::path::PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum FamilyCmd {
    /// Build and register a quasi-trivial family.
    Build {
        #[arg(long, default_value = "2^(n+3)")]
        h: String,
        #[arg(long, default_value = "4^(n+1)")]
        hprime: String,
        #[arg(long, value_parser = parse_range, default_value = "0..4")]
        n_range: RangeInclusive<u64>,
        #[arg(long, default_value_t = DEFAULT_TABLE_BUDGET, env = "OVERTAKE_TABLE_BUDGET")]
        table_budget: usize,
        /// Write the registry as JSON here.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum GfunCmd {
    G0 {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value = "first")]
        mode: String,
    },
    /// g at an index, against a registry file (default: O, O′, i₀…i₇).
    G {
        #[arg(long)]
        index: BigUint,
        #[arg(long, env = "OVERTAKE_REGISTRY")]
        registry: Option<std::path::PathBuf>,
    },
    Fgh {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: BigUint,
    },
    Fw {
        #[arg(long)]
        n: BigUint,
    },
    /// Evaluate a growth expression on a range.
    Eval {
        #[arg(long)]
        f: String,
        #[arg(long, value_parser = parse_range)]
        n: RangeInclusive<u64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum BbCmd {
    Sigma {
        #[arg(long)]
        n: u8,
        #[arg(long, default_value_t = 1)]
        shards: usize,
    },
    /// State count of an index and B at it.
    B {
        #[arg(long)]
        index: BigUint,
    },
    Bprime {
        #[arg(long)]
        index: BigUint,
        #[arg(long, env = "OVERTAKE_REGISTRY")]
        registry: Option<std::path::PathBuf>,
    },
    /// B′ against g on several indices.
    Report {
        #[arg(long, value_delimiter = ',')]
        indices: Vec<BigUint>,
        #[arg(long, env = "OVERTAKE_REGISTRY")]
        registry: Option<std::path::PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum DemoCmd {
    /// Counterexample family showing h fails to dominate g at the built indices.
    Nondomination {
        #[arg(long, default_value = "n + 1")]
        h: String,
        #[arg(long, value_parser = parse_range, default_value = "0..3")]
        n: RangeInclusive<u64>,
    },
}

fn parse_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected a range `a..b` (inclusive), got `{s}`"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|e| format!("{e}"))?;
    if a > b {
        return Err(format!("empty range `{s}`"));
    }
    Ok(a..=b)
}

/// One line of output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Computed,
    Refused,
}

struct Report {
    command: String,
    rows: Vec<ReportRow>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, inputs: &[(&str, String)], outcome: overtake::Result<Value>) {
        let inputs = inputs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        let row = match outcome {
            Ok(v) => ReportRow {
                command: self.command.clone(),
                inputs,
                provenance: Provenance::Computed,
                result: Some(v),
                reason: None,
            },
            Err(e) => ReportRow {
                command: self.command.clone(),
                inputs,
                provenance: Provenance::Refused,
                result: None,
                reason: Some(e.to_string()),
            },
        };
        self.rows.push(row);
    }

    fn refused(&self) -> bool {
        self.rows.iter().any(|r| r.provenance == Provenance::Refused)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn big_str(v: &BigUint) -> Value {
    Value::String(v.to_string())
}

fn parse_word(s: &str) -> overtake::Result<Word> {
    s.parse::<Word>().map_err(|e| Error::Refused(format!("{e}")))
}

fn read_table(path: &std::path::Path) -> overtake::Result<MachineTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let t: MachineTable = text.parse()?;
    t.checked()
}

fn load_registry(path: Option<&std::path::Path>) -> overtake::Result<Registry> {
    match path {
        None => Ok(Registry::with_basics()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            Registry::from_json(&text)
        }
    }
}

fn growth(src: &str, g: &Global) -> overtake::Result<GrowthFunction> {
    Ok(GrowthFunction::parse(src)?.with_limits(limits(g)))
}

fn limits(g: &Global) -> Limits {
    Limits {
        ceiling_bits: g.ceiling_bits,
        ..Limits::default()
    }
}

fn search(g: &Global) -> Search {
    Search {
        max_inputs: g.budget.min(1 << 20),
        ..Search::default()
    }
}

fn range_str(r: &RangeInclusive<u64>) -> String {
    format!("{}..{}", r.start(), r.end())
}

fn execute(cli: &Cli) -> Report {
    let g = &cli.global;
    match &cli.command {
        Command::Codec(c) => {
            let mut r = Report::new("codec");
            match c {
                CodecCmd::Encode { n, m } => {
                    let code = encode_pair(n, m);
                    r.push(
                        &[("n", n.to_string()), ("m", m.to_string())],
                        Ok(json!({"n": big_str(n), "m": big_str(m), "code": code.to_string(), "index": big_str(&index_of_word(&code))})),
                    );
                }
                CodecCmd::Decode { word } => {
                    let out = parse_word(word).map(|w| {
                        let (n, m) = decode_word(&w);
                        json!({"code": w.to_string(), "n": big_str(&n), "m": big_str(&m), "valid": encode_pair(&n, &m) == w})
                    });
                    r.push(&[("word", word.clone())], out);
                }
                CodecCmd::Index { n, m } => {
                    let i = ell_index(n, m);
                    r.push(
                        &[("n", n.to_string()), ("m", m.to_string())],
                        Ok(json!({"n": big_str(n), "m": big_str(m), "code": encode_pair(n, m).to_string(), "index": big_str(&i)})),
                    );
                }
                CodecCmd::Law { m, probe } => {
                    let out = linear_law(m, *probe.start()..probe.end() + 1).map(|law| json!({"m": big_str(m), "law": to_value(&law)}));
                    r.push(&[("m", m.to_string()), ("probe", range_str(probe))], out);
                }
                CodecCmd::Word { index, word } => match (index, word) {
                    (Some(i), _) => r.push(&[("index", i.to_string())], Ok(json!({"index": big_str(i), "word": word_of_index(i).to_string()}))),
                    (None, Some(w)) => {
                        let out = parse_word(w).map(|w| json!({"word": w.to_string(), "index": big_str(&index_of_word(&w))}));
                        r.push(&[("word", w.clone())], out)
                    }
                    (None, None) => r.push(&[], Err(Error::Refused("give --index or --word".into()))),
                },
                CodecCmd::ToStandard { index } => {
                    let (n, m) = decode_word(&word_of_index(index));
                    r.push(
                        &[("index", index.to_string())],
                        Ok(json!({"index": big_str(index), "n": big_str(&n), "m": big_str(&m), "standard": big_str(&to_standard(index))})),
                    );
                }
            }
            r
        }
        Command::Machine(c) => {
            let mut r = Report::new("machine");
            match c {
                MachineCmd::Run { table, input } => {
                    let out = (|| {
                        let t = read_table(table)?;
                        let w = parse_word(input)?;
                        let o = run(&t, &w, g.budget)?;
                        Ok(json!({
                            "status": to_value(&o.status),
                            "output": o.output.map(|w| w.to_string()),
                            "op_time": o.op_time,
                            "steps": o.steps_used,
                        }))
                    })();
                    r.push(&[("table", table.display().to_string()), ("input", input.clone())], out);
                }
                MachineCmd::Index { table } => {
                    let out = read_table(table).map(|t| {
                        json!({"states": t.n_states, "lines": t.lines.len(), "index": big_str(&table_index(&t)), "serialized": t.to_word().to_string()})
                    });
                    r.push(&[("table", table.display().to_string())], out);
                }
            }
            r
        }
        Command::Family(FamilyCmd::Build {
            h,
            hprime,
            n_range,
            table_budget,
            out,
        }) => {
            let mut r = Report::new("family");
            let inputs = [("h", h.clone()), ("hprime", hprime.clone())];
            let built = (|| {
                let (hf, hp) = (growth(h, g)?, growth(hprime, g)?);
                let specs = n_range
                    .clone()
                    .map(|n| QuasiTrivialSpec::new(hf.clone(), hp.clone(), n))
                    .collect::<overtake::Result<Vec<_>>>()?;
                let mut reg = Registry::with_basics();
                let members = register_family(&mut reg, &specs, *table_budget)?;
                if let Some(path) = out {
                    std::fs::write(path, reg.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                }
                Ok(members)
            })();
            match built {
                Ok(members) => {
                    for cm in members {
                        let spec = cm.quasi_trivial().expect("family member");
                        let mut inp = inputs.to_vec();
                        inp.push(("n", spec.n().to_string()));
                        r.push(
                            &inp,
                            Ok(json!({
                                "n": spec.n(),
                                "k_n": big_str(spec.k_n()),
                                "ell_index": big_str(&cm.ell_index),
                                "certificate": to_value(&cm.certificate),
                                "compiled": cm.table.is_some(),
                            })),
                        );
                    }
                }
                Err(e) => r.push(&inputs, Err(e)),
            }
            r
        }
        Command::Gfun(c) => {
            let mut r = Report::new("gfun");
            match c {
                GfunCmd::G0 { m, mode } => {
                    let out = mode.parse::<MuMode>().map(|md| json!({"m": m, "mode": to_value(&md), "value": g0(*m, md)}));
                    r.push(&[("m", m.to_string()), ("mode", mode.clone())], out);
                }
                GfunCmd::G { index, registry } => {
                    let out = load_registry(registry.as_deref()).and_then(|reg| {
                        let v = g_at_index(index, &reg, search(g))?;
                        Ok(json!({"index": big_str(index), "certified": reg.is_certified(index), "value": v.to_string()}))
                    });
                    r.push(&[("index", index.to_string())], out);
                }
                GfunCmd::Fgh { k, n } => {
                    let out = fgh(*k, n, &limits(g)).map(|v| json!({"value": big_str(&v)}));
                    r.push(&[("k", k.to_string()), ("n", n.to_string())], out);
                }
                GfunCmd::Fw { n } => {
                    let out = f_omega(n, &limits(g)).map(|v| json!({"value": big_str(&v)}));
                    r.push(&[("n", n.to_string())], out);
                }
                GfunCmd::Eval { f, n } => match growth(f, g) {
                    Err(e) => r.push(&[("f", f.clone())], Err(e)),
                    Ok(func) => {
                        for x in n.clone() {
                            let out = func.eval_u64(x).map(|v| json!({"value": big_str(&v)}));
                            r.push(&[("f", f.clone()), ("n", x.to_string())], out);
                        }
                    }
                },
            }
            r
        }
        Command::Dominate { f, g: gsrc, window } => {
            let mut r = Report::new("dominate");
            let out = (|| {
                let report = dominates_on_window(&growth(f, g)?, &growth(gsrc, g)?, window.clone())?;
                Ok(to_value(&report))
            })();
            r.push(&[("f", f.clone()), ("g", gsrc.clone()), ("window", range_str(window))], out);
            r
        }
        Command::Bb(c) => {
            let mut r = Report::new("bb");
            let opts = SearchOptions::new(g.cutoff);
            match c {
                BbCmd::Sigma { n, shards } => {
                    let out = sigma(*n, opts.shards(*shards)).map(|v| to_value(&v));
                    r.push(&[("n", n.to_string()), ("cutoff", g.cutoff.to_string())], out);
                }
                BbCmd::B { index } => {
                    let out = b_of_index(index, opts).map(|v| {
                        let mut v = to_value(&v);
                        v["index"] = big_str(index);
                        v
                    });
                    r.push(&[("index", index.to_string()), ("states", states_of_index(index).to_string())], out);
                }
                BbCmd::Bprime { index, registry } => {
                    let out = load_registry(registry.as_deref())
                        .and_then(|reg| b_prime(index, &reg, opts, DEFAULT_INPUT_BUDGET))
                        .map(|v| to_value(&v));
                    r.push(&[("index", index.to_string()), ("cutoff", g.cutoff.to_string())], out);
                }
                BbCmd::Report { indices, registry } => match load_registry(registry.as_deref()) {
                    Err(e) => r.push(&[], Err(e)),
                    Ok(reg) => {
                        for row in bprime_vs_g_report(indices, &reg, opts) {
                            let inputs = [("index", row.index.to_string())];
                            match &row.refusal {
                                Some(why) => r.push(&inputs, Err(Error::Refused(why.clone()))),
                                None => r.push(&inputs, Ok(to_value(&row))),
                            }
                        }
                    }
                },
            }
            r
        }
        Command::Demo(DemoCmd::Nondomination { h, n }) => {
            let mut r = Report::new("demo");
            match growth(h, g) {
                Err(e) => r.push(&[("h", h.clone())], Err(e)),
                Ok(hf) => match build_counterexample_family(&hf, n.clone(), &mut Registry::new()) {
                    Err(e) => r.push(&[("h", h.clone())], Err(e)),
                    Ok(report) => {
                        for row in &report.rows {
                            r.push(&[("h", h.clone()), ("n", row.n.to_string())], Ok(to_value(row)));
                        }
                        for (k, why) in &report.refused {
                            r.push(&[("h", h.clone()), ("n", k.to_string())], Err(Error::Refused(why.clone())));
                        }
                    }
                },
            }
            r
        }
        Command::Acceptance { profile } => {
            let mut r = Report::new("acceptance");
            match profile.parse::<Profile>() {
                Err(e) => r.push(&[("profile", profile.clone())], Err(e)),
                Ok(p) => {
                    for c in acceptance::run_all(p) {
                        let inputs = [("profile", profile.clone()), ("criterion", c.id.to_string())];
                        let v = json!({"criterion": c.id, "name": c.name, "passed": c.passed, "detail": c.detail, "elapsed_ms": c.elapsed_ms});
                        if c.passed {
                            r.push(&inputs, Ok(v));
                        } else {
                            r.push(&inputs, Err(Error::Refused(format!("criterion {} failed: {}", c.id, c.detail))));
                        }
                    }
                }
            }
            r
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn render_pretty(rows: &[ReportRow]) -> String {
    let mut columns: Vec<String> = Vec::new();
    let mut table: Vec<BTreeMap<String, String>> = Vec::new();
    let add = |columns: &mut Vec<String>, k: &str| {
        if !columns.iter().any(|c| c == k) {
            columns.push(k.to_string());
        }
    };
    for row in rows {
        let mut cells = BTreeMap::new();
        for (k, v) in &row.inputs {
            add(&mut columns, k);
            cells.insert(k.clone(), v.clone());
        }
        match (&row.result, &row.reason) {
            (Some(Value::Object(map)), _) => {
                for (k, v) in map {
                    if row.inputs.contains_key(k) {
                        continue;
                    }
                    add(&mut columns, k);
                    cells.insert(k.clone(), cell(v));
                }
            }
            (Some(v), _) => {
                add(&mut columns, "result");
                cells.insert("result".into(), cell(v));
            }
            (None, Some(why)) => {
                add(&mut columns, "refused");
                cells.insert("refused".into(), why.clone());
            }
            (None, None) => {}
        }
        table.push(cells);
    }
    let widths: Vec<usize> = columns
        .iter()
        .map(|c| table.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).chain([c.chars().count()]).max().unwrap_or(0))
        .collect();
    let line = |vals: Vec<&str>| {
        vals.iter()
            .zip(&widths)
            .map(|(v, w)| format!("{v:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = String::new();
    out.push_str(&line(columns.iter().map(String::as_str).collect()));
    out.push('\n');
    for r in &table {
        out.push_str(&line(columns.iter().map(|c| r.get(c).map_or("", String::as_str)).collect()));
        out.push('\n');
    }
    out
}

/// Parses `args` (program name first), runs the command and writes its
/// report to `out`. Returns the process exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let report = execute(&cli);
    let written = if cli.global.pretty {
        write!(out, "{}", render_pretty(&report.rows))
    } else {
        report.rows.iter().try_for_each(|row| {
            writeln!(out, "{}", serde_json::to_string(row).expect("serializable"))
        })
    };
    if written.is_err() {
        return EXIT_REFUSED;
    }
    if report.refused() {
        EXIT_REFUSED
    } else {
        EXIT_OK
    }
}
