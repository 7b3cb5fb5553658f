//! The `wabisim` command-line front end.
//!
//! Exit codes: 0 success or decided, 1 property refuted, 2 usage or parse
//! error, 3 undecided (refinement bound hit, or no solver for the semiring).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::automata::{AnyAutomaton, WeightedAutomaton};
use crate::error::Error;
use crate::language::{build_functional_table, csv_field, oracle_equiv, sigma_lwa, OracleVerdict, Word};
use crate::linalg::Vector;
use crate::linearpr::{
    check_linear_bisimulation, decide_equiv, default_max_iter, run_refinement, Generator,
    RefinementOutcome,
};
use crate::linsolve::SpanSolver;
use crate::partition::Partition;
use crate::setbisim::{largest_weighted_bisimulation_with_rounds, BisimVerdict};
use crate::with_automaton;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "wabisim",
    version,
    about = "Weighted bisimilarity and weighted language equivalence over semirings"
)]
struct Cli {
    /// Automaton file (JSON)
    #[arg(long, global = true, value_name = "FILE")]
    input: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Shorthand for --format json
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Expectation {
    Equiv,
    Inequiv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and check an automaton file
    Validate {
        /// Print the canonical serialization instead of a report
        #[arg(long)]
        canonical: bool,
    },
    /// Weight of a word from a vector, or the table of word functionals
    Sigma {
        /// State id, inline JSON vector or path to a JSON vector
        #[arg(long, value_name = "VEC", requires = "word")]
        state_vec: Option<String>,
        /// Word: letters, comma-separated letters, or "" / ε for the empty word
        #[arg(long, requires = "state_vec")]
        word: Option<String>,
        /// Print σ(·)(w) for every word shorter than N, as CSV
        #[arg(long, value_name = "N", conflicts_with_all = ["state_vec", "word"])]
        table: Option<usize>,
    },
    /// Largest weighted bisimulation
    Wbisim {
        /// Also write the quotient automaton here
        #[arg(long, value_name = "FILE")]
        quotient_out: Option<PathBuf>,
    },
    /// Quotient by a partition (default: the largest weighted bisimulation)
    Quotient {
        /// JSON list of blocks, checked to be a weighted bisimulation
        #[arg(long, value_name = "FILE")]
        partition: Option<PathBuf>,
    },
    /// Weighted language equivalence by linear partition refinement
    Langequiv {
        /// Pair of vectors to decide (repeatable)
        #[arg(long, num_args = 2, value_names = ["U", "V"])]
        pair: Vec<String>,
        /// Refinement rounds before giving up
        #[arg(long, value_name = "N")]
        max_iter: Option<usize>,
        /// Cross-check every pair against the brute-force oracle up to length L
        #[arg(long, value_name = "L")]
        oracle_check: Option<usize>,
        /// Exit 1 unless every pair gets this verdict
        #[arg(long, value_enum)]
        expect: Option<Expectation>,
    },
    /// Brute-force search for a distinguishing word
    Oracle {
        /// Pair of vectors to separate
        #[arg(long, num_args = 2, value_names = ["U", "V"], required = true)]
        pair: Vec<String>,
        /// Longest word tried (default 2·|X|)
        #[arg(long, value_name = "L")]
        max_len: Option<usize>,
    },
    /// Compare weighted bisimilarity with language equivalence on states
    Compare {
        #[arg(long, value_name = "N")]
        max_iter: Option<usize>,
    },
}

/// Ordered output fields, rendered as `key: value` lines or a JSON object.
#[derive(Default)]
struct Report {
    fields: Vec<(&'static str, Value)>,
}

impl Report {
    fn field(&mut self, key: &'static str, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key, value.into()));
        self
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let obj: serde_json::Map<String, Value> = self
                    .fields
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.clone()))
                    .collect();
                let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json");
                s.push('\n');
                s
            }
            Format::Text => {
                let mut s = String::new();
                for (k, v) in &self.fields {
                    match v {
                        Value::String(t) if t.contains('\n') => {
                            s.push_str(&format!("{k}:\n{t}"));
                            if !t.ends_with('\n') {
                                s.push('\n');
                            }
                        }
                        Value::Array(items) if items.iter().all(Value::is_object) && !items.is_empty() => {
                            s.push_str(&format!("{k}:\n"));
                            for item in items {
                                s.push_str(&format!("  - {}\n", inline(item)));
                            }
                        }
                        _ => s.push_str(&format!("{k}: {}\n", inline(v))),
                    }
                }
                s
            }
        }
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => format!(
            "[{}]",
            items.iter().map(inline).collect::<Vec<_>>().join(",")
        ),
        Value::Object(m) => m
            .iter()
            .map(|(k, v)| match v {
                Value::Object(_) => format!("{k}=({})", inline(v)),
                _ => format!("{k}={}", inline(v)),
            })
            .collect::<Vec<_>>()
            .join(" "),
        other => other.to_string(),
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotABisimulation(_) => EXIT_REFUTED,
            Error::SolverUnavailable { .. } => EXIT_UNDECIDED,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let format = if cli.json { Format::Json } else { cli.format };
    match execute(&cli, format) {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: &Cli, format: Format) -> Result<(String, i32), Failure> {
    let path = cli
        .input
        .as_deref()
        .ok_or_else(|| usage("--input <FILE> is required"))?;
    let source = read_file(path)?;
    let any = AnyAutomaton::parse(&source)?;
    if let Command::Validate { canonical: true } = cli.command {
        return Ok((any.serialize(), EXIT_OK));
    }
    with_automaton!(&any, aut => dispatch(aut, &cli.command, &source, format))
}

fn dispatch<K: SpanSolver>(
    aut: &WeightedAutomaton<K>,
    command: &Command,
    source: &str,
    format: Format,
) -> Result<(String, i32), Failure> {
    match command {
        Command::Validate { .. } => Ok((validate(aut, source).render(format), EXIT_OK)),
        Command::Sigma {
            state_vec,
            word,
            table,
        } => sigma(aut, state_vec.as_deref(), word.as_deref(), *table, format),
        Command::Wbisim { quotient_out } => wbisim(aut, quotient_out.as_deref(), format),
        Command::Quotient { partition } => quotient(aut, partition.as_deref()),
        Command::Langequiv {
            pair,
            max_iter,
            oracle_check,
            expect,
        } => langequiv(aut, pair, *max_iter, *oracle_check, *expect, format),
        Command::Oracle { pair, max_len } => oracle(aut, pair, *max_len, format),
        Command::Compare { max_iter } => compare(aut, *max_iter, format),
    }
}

fn validate<K: SpanSolver>(aut: &WeightedAutomaton<K>, source: &str) -> Report {
    let mut r = Report::default();
    r.field("status", "valid")
        .field("semiring", aut.descriptor().name())
        .field("states", aut.states().len())
        .field("letters", aut.alphabet().len())
        .field("transitions", aut.edges().count())
        .field("output_support", aut.output().row().len())
        .field("canonical", aut.serialize() == source)
        .field("span_solver", aut.descriptor().span_solver_available());
    r
}

/// A vector given as a state id, an inline JSON object or a JSON file.
fn parse_vector<K: SpanSolver>(aut: &WeightedAutomaton<K>, spec: &str) -> Result<Vector<K>, Failure> {
    let v = if aut.has_state(spec) {
        Vector::unit(spec)
    } else if spec.trim_start().starts_with('{') {
        Vector::from_json(spec)?
    } else if Path::new(spec).is_file() {
        Vector::from_json(&read_file(Path::new(spec))?)?
    } else {
        return Err(usage(format!(
            "`{spec}` is not a state, a JSON vector or a readable file"
        )));
    };
    if let Some(s) = v.support().find(|s| !aut.has_state(s.as_str())) {
        return Err(Error::UnknownState {
            location: format!("vector `{spec}`"),
            state: s.to_string(),
        }
        .into());
    }
    Ok(v)
}

fn vector_json<K: SpanSolver>(v: &Vector<K>) -> Value {
    v.to_json_value()
}

fn sigma<K: SpanSolver>(
    aut: &WeightedAutomaton<K>,
    state_vec: Option<&str>,
    word: Option<&str>,
    table: Option<usize>,
    format: Format,
) -> Result<(String, i32), Failure> {
    let mut r = Report::default();
    match (state_vec, word, table) {
        (Some(spec), Some(w), None) => {
            let v = parse_vector(aut, spec)?;
            let w = Word::parse(w, aut.alphabet())?;
            let weight = sigma_lwa(aut, &v, &w)?;
            r.field("vector", vector_json(&v))
                .field("word", w.to_string())
                .field("weight", weight.to_string());
        }
        (None, None, Some(n)) => {
            let t = build_functional_table(aut, n);
            match format {
                Format::Text => {
                    r.field("bound", format!("|w| < {n}"));
                    r.field("table", t.to_csv(aut.states()));
                }
                Format::Json => {
                    r.field("bound", n);
                    r.field(
                        "table",
                        t.rows()
                            .iter()
                            .map(|(w, f)| json!({"word": w.to_string(), "row": f.row().to_json_value()}))
                            .collect::<Vec<_>>(),
                    );
                }
            }
        }
        _ => return Err(usage("sigma needs either --state-vec and --word, or --table")),
    }
    Ok((r.render(format), EXIT_OK))
}

fn partition_json(p: &Partition) -> Value {
    serde_json::to_value(p.blocks()).expect("state ids serialize")
}

fn wbisim<K: SpanSolver>(
    aut: &WeightedAutomaton<K>,
    quotient_out: Option<&Path>,
    format: Format,
) -> Result<(String, i32), Failure> {
    let (p, rounds) = largest_weighted_bisimulation_with_rounds(aut);
    let mut r = Report::default();
    r.field("partition", partition_json(&p))
        .field("blocks", p.len())
        .field("rounds", rounds);
    if let Some(path) = quotient_out {
        write_file(path, &aut.quotient(&p)?.serialize())?;
        r.field("quotient_out", path.display().to_string());
    }
    Ok((r.render(format), EXIT_OK))
}

fn quotient<K: SpanSolver>(
    aut: &WeightedAutomaton<K>,
    partition: Option<&Path>,
) -> Result<(String, i32), Failure> {
    let p = match partition {
        Some(path) => Partition::from_json(aut.states(), &read_file(path)?)?,
        None => largest_weighted_bisimulation_with_rounds(aut).0,
    };
    if let BisimVerdict::Violation(w) = crate::setbisim::is_weighted_bisimulation(aut, &p)? {
        return Err(Failure {
            code: EXIT_REFUTED,
            message: format!("partition is not a weighted bisimulation: {w}"),
        });
    }
    Ok((aut.quotient(&p)?.serialize(), EXIT_OK))
}

fn generators_csv<K: SpanSolver>(aut: &WeightedAutomaton<K>, gens: &[Generator<K>]) -> String {
    let mut s = String::from("word");
    for x in aut.states() {
        s.push(',');
        s.push_str(x.as_str());
    }
    s.push('\n');
    for g in gens {
        s.push_str(&csv_field(&g.word.to_string()));
        for x in aut.states() {
            s.push(',');
            s.push_str(&g.row.get(x.as_str()).to_string());
        }
        s.push('\n');
    }
    s
}

fn generators_json<K: SpanSolver>(gens: &[Generator<K>]) -> Value {
    Value::Array(
        gens.iter()
            .map(|g| json!({"word": g.word.to_string(), "row": g.row.row().to_json_value()}))
            .collect(),
    )
}

/// Verdict on one pair: `Some(true)` equivalent, `Some(false)` not, `None` unknown.
struct PairResult {
    fields: serde_json::Map<String, Value>,
    verdict: Option<bool>,
    oracle_disagrees: bool,
}

fn oracle_json<K: SpanSolver>(v: &OracleVerdict<K>) -> Value {
    match v {
        OracleVerdict::DistinguishedBy { word, left, right } => json!({
            "result": "distinguished",
            "word": word.to_string(),
            "weights": [left.to_string(), right.to_string()],
        }),
        OracleVerdict::EquivalentUpTo(n) => json!({"result": "agree", "max_len": n}),
    }
}

fn pairs<'a>(raw: &'a [String]) -> impl Iterator<Item = (&'a str, &'a str)> {
    raw.chunks(2).map(|c| (c[0].as_str(), c[1].as_str()))
}

fn langequiv<K: SpanSolver>(
    aut: &WeightedAutomaton<K>,
    raw_pairs: &[String],
    max_iter: Option<usize>,
    oracle_check: Option<usize>,
    expect: Option<Expectation>,
    format: Format,
) -> Result<(String, i32), Failure> {
    let max_iter = max_iter.unwrap_or_else(|| default_max_iter(aut));
    if max_iter == 0 {
        return Err(usage("--max-iter must be at least 1"));
    }
    let vectors = pairs(raw_pairs)
        .map(|(a, b)| Ok((a, b, parse_vector(aut, a)?, parse_vector(aut, b)?)))
        .collect::<Result<Vec<_>, Failure>>()?;

    let mut r = Report::default();
    r.field("semiring", aut.descriptor().name());
    let outcome = match run_refinement(aut, max_iter) {
        Ok(o) => Some(o),
        Err(Error::SolverUnavailable { reason, .. }) => {
            r.field("status", "solver_unavailable").field("reason", reason);
            None
        }
        Err(e) => return Err(e.into()),
    };
    match &outcome {
        Some(RefinementOutcome::Stabilized {
            iterations,
            generators,
            rational_fallback,
            presentation,
        }) => {
            r.field("status", "stabilized")
                .field("iterations", *iterations)
                .field("generator_count", generators.len());
            if *rational_fallback {
                r.field("note", "some rows were pruned by a rational span, not a nonnegative one");
            }
            let cert = check_linear_bisimulation(presentation, aut)?;
            r.field("certificate", if cert.is_ok() { "ok" } else { "not_certified" });
        }
        Some(RefinementOutcome::BoundExceeded {
            generators,
            max_iter,
            ..
        }) => {
            r.field("status", "bound_exceeded")
                .field("max_iter", *max_iter)
                .field("generator_count", generators.len());
        }
        None => {}
    }
    if let Some(o) = &outcome {
        match format {
            Format::Text => r.field("generators", generators_csv(aut, o.generators())),
            Format::Json => r.field("generators", generators_json(o.generators())),
        };
    }

    let fallback_len = 2 * aut.states().len();
    // Rows pruned through a rational span are cross-checked even if not asked.
    let used_fallback = matches!(
        &outcome,
        Some(RefinementOutcome::Stabilized { rational_fallback: true, .. })
    );
    let check_len = oracle_check.or(used_fallback.then_some(fallback_len));
    let mut results = Vec::new();
    for (a, b, u, v) in &vectors {
        let mut fields = serde_json::Map::new();
        fields.insert("left".into(), Value::String(a.to_string()));
        fields.insert("right".into(), Value::String(b.to_string()));
        let mut witness_len = None;
        let verdict = match &outcome {
            Some(o) => match o.separating_word(u, v) {
                Some((w, l, rr)) => {
                    witness_len = Some(w.len());
                    fields.insert("word".into(), Value::String(w.to_string()));
                    fields.insert("weights".into(), json!([l.to_string(), rr.to_string()]));
                    Some(false)
                }
                None if o.is_stabilized() => Some(decide_equiv(o, u, v)?),
                None => None,
            },
            None => match oracle_equiv(aut, u, v, oracle_check.unwrap_or(fallback_len))? {
                OracleVerdict::DistinguishedBy { word, left, right } => {
                    fields.insert("word".into(), Value::String(word.to_string()));
                    fields.insert("weights".into(), json!([left.to_string(), right.to_string()]));
                    Some(false)
                }
                OracleVerdict::EquivalentUpTo(n) => {
                    fields.insert("agree_up_to".into(), Value::from(n));
                    None
                }
            },
        };
        fields.insert(
            "verdict".into(),
            Value::String(
                match verdict {
                    Some(true) => "equivalent",
                    Some(false) => "inequivalent",
                    None => "unknown",
                }
                .into(),
            ),
        );
        let mut oracle_disagrees = false;
        if let (Some(len), Some(_)) = (check_len, &outcome) {
            let ov = oracle_equiv(aut, u, v, len)?;
            oracle_disagrees = match verdict {
                Some(true) => ov.is_distinguished(),
                // A separating generator of length > L is beyond the oracle's reach.
                Some(false) => !ov.is_distinguished() && witness_len.map_or(false, |n| n <= len),
                None => false,
            };
            fields.insert("oracle".into(), oracle_json(&ov));
        }
        results.push(PairResult {
            fields,
            verdict,
            oracle_disagrees,
        });
    }
    if !results.is_empty() {
        r.field(
            "pairs",
            results.iter().map(|p| Value::Object(p.fields.clone())).collect::<Vec<_>>(),
        );
    }

    let code = if results.iter().any(|p| p.oracle_disagrees) {
        EXIT_REFUTED
    } else if let Some(e) = expect {
        let want = e == Expectation::Equiv;
        if results.iter().any(|p| p.verdict == Some(!want)) {
            EXIT_REFUTED
        } else if results.iter().any(|p| p.verdict.is_none()) {
            EXIT_UNDECIDED
        } else {
            EXIT_OK
        }
    } else if results.iter().any(|p| p.verdict.is_none())
        || (results.is_empty() && !outcome.as_ref().map_or(false, |o| o.is_stabilized()))
    {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    };
    if results.iter().any(|p| p.oracle_disagrees) {
        r.field("oracle_check", "disagreement");
    }
    Ok((r.render(format), code))
}

fn oracle<K: SpanSolver>(
    aut: &WeightedAutomaton<K>,
    raw_pairs: &[String],
    max_len: Option<usize>,
    format: Format,
) -> Result<(String, i32), Failure> {
    let len = max_len.unwrap_or(2 * aut.states().len());
    let mut results = Vec::new();
    for (a, b) in pairs(raw_pairs) {
        let (u, v) = (parse_vector(aut, a)?, parse_vector(aut, b)?);
        let mut obj = json!({"left": a, "right": b});
        if let (Value::Object(m), Value::Object(o)) = (&mut obj, oracle_json(&oracle_equiv(aut, &u, &v, len)?)) {
            m.extend(o);
        }
        results.push(obj);
    }
    let mut r = Report::default();
    r.field("max_len", len).field("pairs", results);
    Ok((r.render(format), EXIT_OK))
}

fn compare<K: SpanSolver>(
    aut: &WeightedAutomaton<K>,
    max_iter: Option<usize>,
    format: Format,
) -> Result<(String, i32), Failure> {
    let (p, _) = largest_weighted_bisimulation_with_rounds(aut);
    let max_iter = max_iter.unwrap_or_else(|| default_max_iter(aut));
    let mut r = Report::default();
    r.field("partition", partition_json(&p));
    let outcome = match run_refinement(aut, max_iter) {
        Ok(o) => Some(o),
        Err(Error::SolverUnavailable { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let fallback_len = 2 * aut.states().len();
    let states = aut.states();
    let mut violations = Vec::new();
    let mut language_only = Vec::new();
    let mut undecided = false;
    for (i, x) in states.iter().enumerate() {
        for y in &states[i + 1..] {
            let (u, v) = (Vector::unit(x.clone()), Vector::unit(y.clone()));
            let equiv = match &outcome {
                Some(o) if o.is_stabilized() => Some(decide_equiv(o, &u, &v)?),
                Some(o) => o.separating_word(&u, &v).map(|_| false),
                None => oracle_equiv(aut, &u, &v, fallback_len)?
                    .is_distinguished()
                    .then_some(false),
            };
            let same = p.same_block(x.as_str(), y.as_str());
            match (same, equiv) {
                (true, Some(false)) => violations.push(json!([x.as_str(), y.as_str()])),
                (false, Some(true)) => language_only.push(json!([x.as_str(), y.as_str()])),
                (false, None) => undecided = true,
                _ => {}
            }
        }
    }
    r.field(
        "language_status",
        match &outcome {
            Some(o) if o.is_stabilized() => "stabilized",
            Some(_) => "bound_exceeded",
            None => "solver_unavailable",
        },
    )
    .field("bisimilar_but_not_equivalent", violations.clone())
    .field("equivalent_but_not_bisimilar", language_only);
    let code = if !violations.is_empty() {
        EXIT_REFUTED
    } else if undecided {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    };
    Ok((r.render(format), code))
}
