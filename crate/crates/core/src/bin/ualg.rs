//! Command-line surface of the workbench.
//!
//! Exit codes: 0 = verdict computed (including negative verdicts), 1 =
//! usage or parse error, 2 = budget exceeded.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ualg::fmt::{
    parse_algebra, parse_equation_system, parse_query, parse_variety, parse_word_system,
    print_algebra, print_word_system,
};
use ualg::freealg::{act_variety, automaton_variety, VarietyId};
use ualg::geometry::{closure_member, geom_equivalent, GeometryBudget, GeometryError, GeomVerdict};
use ualg::model::{enumerate_homs, in_variety, witness_violation, FiniteAlgebra, ModelError};
use ualg::report::Report;
use ualg::search::{
    auto_equivalent, classify_strongly_stable, counterexample_search, AutoVerdict, SearchConfig,
    SearchError,
};
use ualg::signature::{validate_variety, VarietySpec};
use ualg::verbal::derive_algebra;

const ACT_VAR: &str = include_str!("../../fixtures/act.var");
const AUTOMATON_VAR: &str = include_str!("../../fixtures/automaton.var");

#[derive(Parser)]
#[command(
    name = "ualg",
    version,
    about = "Workbench for many-sorted universal algebra over finite models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Variety: a builtin id (`act`, `automaton`) or a file path.
    #[arg(long)]
    variety: String,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Scalar budget applied to every internal cap.
    #[arg(long)]
    budget: Option<u128>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a variety file, and optionally an algebra file against it.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Algebra file to validate against the signature.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Also check that the model satisfies every identity.
        #[arg(long)]
        check_variety: bool,
    },
    /// Enumerate all homomorphisms between two finite algebras.
    Homs {
        #[command(flatten)]
        common: Common,
        /// Source algebra file.
        model_a: PathBuf,
        /// Target algebra file.
        model_b: PathBuf,
    },
    /// Decide membership of a pair in the algebraic closure of a system.
    Closure {
        #[command(flatten)]
        common: Common,
        /// Algebra file the closure is taken over.
        #[arg(long)]
        model: PathBuf,
        /// Equation system file.
        #[arg(long)]
        system: PathBuf,
        /// Query pair, e.g. "mul(x1,x2) = x2".
        #[arg(long)]
        query: String,
    },
    /// Decide geometric equivalence of two algebras up to a generator bound.
    GeomEq {
        #[command(flatten)]
        common: Common,
        model_a: PathBuf,
        model_b: PathBuf,
        /// Generators per sort scanned.
        #[arg(long, default_value_t = 2)]
        max_generators: usize,
    },
    /// Materialize the derived algebra of a model under a word system.
    Derive {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// Word system file (`op := term` lines).
        #[arg(long)]
        words: PathBuf,
    },
    /// Search and classify word systems for a builtin variety.
    SearchWords {
        #[command(flatten)]
        common: Common,
        /// Generator-occurrence cap per candidate word.
        #[arg(long, default_value_t = 3)]
        max_word_size: usize,
        /// Fragment size cap for the bijection checks.
        #[arg(long, default_value_t = 6)]
        fragment_bound: usize,
        /// Probe models are enumerated up to this many elements per sort.
        #[arg(long, default_value_t = 2)]
        probe_size: usize,
        /// Include bare-projection words among the candidates.
        #[arg(long)]
        include_projections: bool,
    },
    /// Decide automorphic equivalence of two algebras up to bounds.
    AutoEq {
        #[command(flatten)]
        common: Common,
        model_a: PathBuf,
        model_b: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_word_size: usize,
        #[arg(long, default_value_t = 6)]
        fragment_bound: usize,
        #[arg(long, default_value_t = 2)]
        max_generators: usize,
    },
    /// Scan finite models for one not geometrically equivalent to its
    /// derived algebra under a word system.
    Counterexample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        words: PathBuf,
        /// Elements per sort scanned.
        #[arg(long, default_value_t = 2)]
        max_model_size: usize,
        #[arg(long, default_value_t = 2)]
        max_generators: usize,
    },
}

enum Failure {
    Usage(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Budget(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<ualg::fmt::ParseError> for Failure {
    fn from(e: ualg::fmt::ParseError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::Budget { .. } => Failure::Budget(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Budget { .. } => Failure::Budget(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Budget { .. } => Failure::Budget(e.to_string()),
            SearchError::Geometry(GeometryError::Budget { .. }) => Failure::Budget(e.to_string()),
            SearchError::Model(ModelError::Budget { .. }) => Failure::Budget(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<ualg::verbal::VerbalError> for Failure {
    fn from(e: ualg::verbal::VerbalError) -> Self {
        Failure::Usage(e.to_string())
    }
}

struct LoadedVariety {
    spec: VarietySpec,
    builtin: Option<VarietyId>,
    source: String,
    label: String,
}

/// Resolves `act`/`automaton` to the embedded files, anything else to a
/// path. A user file structurally identical to a builtin also gets the
/// builtin's free-algebra support.
fn load_variety(arg: &str) -> Result<LoadedVariety, Failure> {
    let (source, label) = match arg {
        "act" => (ACT_VAR.to_string(), "builtin:act".to_string()),
        "automaton" => (AUTOMATON_VAR.to_string(), "builtin:automaton".to_string()),
        path => (std::fs::read_to_string(path)?, path.to_string()),
    };
    let spec = parse_variety(&source)?;
    let builtin = if spec == act_variety() {
        Some(VarietyId::Act)
    } else if spec == automaton_variety() {
        Some(VarietyId::Automaton)
    } else {
        None
    };
    Ok(LoadedVariety {
        spec,
        builtin,
        source,
        label,
    })
}

fn load_algebra(path: &Path, spec: &VarietySpec) -> Result<(FiniteAlgebra, String), Failure> {
    let text = std::fs::read_to_string(path)?;
    let alg = parse_algebra(&text, &spec.signature)?;
    Ok((alg, text))
}

fn geometry_budget(budget: Option<u128>) -> GeometryBudget {
    match budget {
        None => GeometryBudget::default(),
        Some(n) => GeometryBudget {
            max_assignments: n,
            max_diagonal: n,
            max_kernels: n,
        },
    }
}

fn require_builtin(v: &LoadedVariety) -> Result<VarietyId, Failure> {
    v.builtin.ok_or_else(|| {
        Failure::Usage(format!(
            "`{}` is not a builtin variety; the word-system search needs the \
             builtin free algebras (act, automaton)",
            v.label
        ))
    })
}

fn finish(report: &mut Report, started: Instant, json: &Option<PathBuf>) -> Result<(), Failure> {
    report.timing_ms = started.elapsed().as_millis();
    if let Some(path) = json {
        std::fs::write(path, report.to_json())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let started = Instant::now();
    match cli.command {
        Command::Validate {
            common,
            model,
            check_variety,
        } => {
            let mut report = Report::new("validate");
            let loaded = load_variety(&common.variety)?;
            report.record_input(&loaded.label, loaded.source.as_bytes());
            let variety_report = validate_variety(&loaded.spec);
            println!("variety: {variety_report}");
            let mut verdict = json!({ "variety": variety_report.violations });
            let mut witnesses = serde_json::Value::Null;
            if let Some(path) = &model {
                let (alg, text) = load_algebra(path, &loaded.spec)?;
                report.record_input(&path.display().to_string(), text.as_bytes());
                println!("model: ok");
                verdict["model"] = json!("ok");
                if check_variety {
                    let mut failing = None;
                    for identity in &loaded.spec.identities {
                        if let Some(assignment) = witness_violation(&alg, identity) {
                            failing = Some((identity, assignment));
                            break;
                        }
                    }
                    match failing {
                        None => {
                            println!("variety membership: true");
                            verdict["member"] = json!(true);
                        }
                        Some((identity, assignment)) => {
                            println!("variety membership: false");
                            println!("  failing identity: {identity}");
                            let named: BTreeMap<String, String> = assignment
                                .values
                                .iter()
                                .map(|(v, &e)| {
                                    let sort = identity.alphabet.sort_of(v).unwrap_or("?");
                                    (v.clone(), alg.element_name(sort, e).to_string())
                                })
                                .collect();
                            for (v, e) in &named {
                                println!("  {v} = {e}");
                            }
                            verdict["member"] = json!(false);
                            witnesses = json!({
                                "identity": identity.to_string(),
                                "assignment": named,
                            });
                        }
                    }
                }
            }
            report.verdict = verdict;
            report.witnesses = witnesses;
            report.bounds = json!({});
            finish(&mut report, started, &common.json)
        }
        Command::Homs {
            common,
            model_a,
            model_b,
        } => {
            let mut report = Report::new("homs");
            let loaded = load_variety(&common.variety)?;
            report.record_input(&loaded.label, loaded.source.as_bytes());
            let (a, text_a) = load_algebra(&model_a, &loaded.spec)?;
            let (b, text_b) = load_algebra(&model_b, &loaded.spec)?;
            report.record_input(&model_a.display().to_string(), text_a.as_bytes());
            report.record_input(&model_b.display().to_string(), text_b.as_bytes());
            let budget = common.budget.unwrap_or(1 << 20);
            let homs = enumerate_homs(&a, &b, budget)?;
            println!("homomorphisms: {}", homs.len());
            let rendered: Vec<BTreeMap<String, Vec<String>>> = homs
                .iter()
                .map(|h| {
                    h.maps
                        .iter()
                        .map(|(sort, map)| {
                            (
                                sort.clone(),
                                map.iter()
                                    .enumerate()
                                    .map(|(i, &img)| {
                                        format!(
                                            "{}->{}",
                                            a.element_name(sort, i),
                                            b.element_name(sort, img)
                                        )
                                    })
                                    .collect(),
                            )
                        })
                        .collect()
                })
                .collect();
            for (i, h) in rendered.iter().enumerate() {
                let flat: Vec<String> = h
                    .iter()
                    .map(|(sort, entries)| format!("{sort}: {}", entries.join(" ")))
                    .collect();
                println!("hom {i}: {}", flat.join("; "));
            }
            report.verdict = json!({ "count": homs.len() });
            report.witnesses = json!(rendered);
            report.bounds = json!({ "budget": budget.to_string() });
            finish(&mut report, started, &common.json)
        }
        Command::Closure {
            common,
            model,
            system,
            query,
        } => {
            let mut report = Report::new("closure");
            let loaded = load_variety(&common.variety)?;
            report.record_input(&loaded.label, loaded.source.as_bytes());
            let (alg, text_m) = load_algebra(&model, &loaded.spec)?;
            report.record_input(&model.display().to_string(), text_m.as_bytes());
            let text_s = std::fs::read_to_string(&system)?;
            report.record_input(&system.display().to_string(), text_s.as_bytes());
            report.record_input("query", query.as_bytes());
            let system = parse_equation_system(&text_s, &loaded.spec.signature)?;
            let (lhs, rhs) = parse_query(&query, &loaded.spec.signature, &system.alphabet)?;
            let budget = geometry_budget(common.budget);
            let member = closure_member(&system, &alg, (&lhs, &rhs), &budget)?;
            println!("member: {member}");
            report.verdict = json!({ "member": member });
            report.witnesses = json!({ "lhs": lhs.to_string(), "rhs": rhs.to_string() });
            report.bounds = serde_json::to_value(budget).expect("budget serializes");
            finish(&mut report, started, &common.json)
        }
        Command::GeomEq {
            common,
            model_a,
            model_b,
            max_generators,
        } => {
            let mut report = Report::new("geom-eq");
            let loaded = load_variety(&common.variety)?;
            report.record_input(&loaded.label, loaded.source.as_bytes());
            let (a, text_a) = load_algebra(&model_a, &loaded.spec)?;
            let (b, text_b) = load_algebra(&model_b, &loaded.spec)?;
            report.record_input(&model_a.display().to_string(), text_a.as_bytes());
            report.record_input(&model_b.display().to_string(), text_b.as_bytes());
            let budget = geometry_budget(common.budget);
            let verdict = geom_equivalent(&a, &b, max_generators, &budget)?;
            match &verdict {
                GeomVerdict::EquivalentUpToBound => println!("verdict: EQUIVALENT_UP_TO_BOUND"),
                GeomVerdict::NotEquivalent(w) => {
                    println!("verdict: NOT_EQUIVALENT");
                    println!("  closed over algebra {}", w.closed_over);
                    println!("  separating pair: {} = {}", w.lhs, w.rhs);
                }
            }
            report.verdict = serde_json::to_value(&verdict).expect("verdict serializes");
            report.bounds = json!({
                "max_generators": max_generators,
                "geometry": serde_json::to_value(budget).expect("budget serializes"),
            });
            finish(&mut report, started, &common.json)
        }
        Command::Derive {
            common,
            model,
            words,
        } => {
            let mut report = Report::new("derive");
            let loaded = load_variety(&common.variety)?;
            report.record_input(&loaded.label, loaded.source.as_bytes());
            let (alg, text_m) = load_algebra(&model, &loaded.spec)?;
            report.record_input(&model.display().to_string(), text_m.as_bytes());
            let text_w = std::fs::read_to_string(&words)?;
            report.record_input(&words.display().to_string(), text_w.as_bytes());
            let system = parse_word_system(&text_w, &loaded.spec.signature)?;
            let derived = derive_algebra(&alg, &system)?;
            print!("{}", print_algebra(&derived.algebra));
            report.verdict = json!({
                "algebra": print_algebra(&derived.algebra),
                "in_variety": in_variety(&derived.algebra, &loaded.spec),
            });
            report.bounds = json!({});
            finish(&mut report, started, &common.json)
        }
        Command::SearchWords {
            common,
            max_word_size,
            fragment_bound,
            probe_size,
            include_projections,
        } => {
            let mut report = Report::new("search-words");
            let loaded = load_variety(&common.variety)?;
            report.record_input(&loaded.label, loaded.source.as_bytes());
            let id = require_builtin(&loaded)?;
            let mut cfg = SearchConfig::new(id);
            cfg.max_word_size = max_word_size;
            cfg.fragment_bound = fragment_bound;
            cfg.probe_max_elems = probe_size;
            cfg.include_projections = include_projections;
            cfg.geometry = geometry_budget(common.budget);
            if let Some(n) = common.budget {
                cfg.max_models = n;
            }
            let classification = classify_strongly_stable(&cfg)?;
            println!("examined: {}", classification.examined);
            println!("accepted: {}", classification.accepted.len());
            for system in &classification.accepted {
                for line in print_word_system(system).lines() {
                    println!("  {line}");
                }
            }
            println!("rejected: {}", classification.rejected.len());
            for r in &classification.rejected {
                let words: Vec<String> = r
                    .system
                    .words
                    .iter()
                    .map(|(op, w)| format!("{op}:={}", w.body))
                    .collect();
                let reason = match &r.reason {
                    ualg::search::RejectReason::ProbeViolation { identity, .. } => {
                        format!("probe model violates `{identity}`")
                    }
                    ualg::search::RejectReason::Fragment { rejection, .. } => match rejection {
                        ualg::verbal::SRejection::NotInjective { first, second, .. } => {
                            format!("induced map not injective ({first} and {second} collide)")
                        }
                        ualg::verbal::SRejection::NotSurjective { missing } => {
                            format!("induced map not surjective (misses {missing})")
                        }
                    },
                };
                println!("  [{}] {reason}", words.join(" "));
            }
            report.verdict = json!({
                "examined": classification.examined,
                "accepted": classification.accepted.len(),
                "rejected": classification.rejected.len(),
            });
            report.witnesses =
                serde_json::to_value(&classification).expect("classification serializes");
            report.bounds = json!({
                "max_word_size": max_word_size,
                "fragment_bound": fragment_bound,
                "probe_size": probe_size,
                "include_projections": include_projections,
            });
            finish(&mut report, started, &common.json)
        }
        Command::AutoEq {
            common,
            model_a,
            model_b,
            max_word_size,
            fragment_bound,
            max_generators,
        } => {
            let mut report = Report::new("auto-eq");
            let loaded = load_variety(&common.variety)?;
            report.record_input(&loaded.label, loaded.source.as_bytes());
            let id = require_builtin(&loaded)?;
            let (a, text_a) = load_algebra(&model_a, &loaded.spec)?;
            let (b, text_b) = load_algebra(&model_b, &loaded.spec)?;
            report.record_input(&model_a.display().to_string(), text_a.as_bytes());
            report.record_input(&model_b.display().to_string(), text_b.as_bytes());
            let mut cfg = SearchConfig::new(id);
            cfg.max_word_size = max_word_size;
            cfg.fragment_bound = fragment_bound;
            cfg.max_generators = max_generators;
            cfg.geometry = geometry_budget(common.budget);
            if let Some(n) = common.budget {
                cfg.max_models = n;
            }
            let verdict = auto_equivalent(&a, &b, &cfg)?;
            match &verdict {
                AutoVerdict::Yes { system } => {
                    println!("verdict: YES");
                    for line in print_word_system(system).lines() {
                        println!("  {line}");
                    }
                }
                AutoVerdict::NoUpToBounds { attempts } => {
                    println!("verdict: NO_UP_TO_BOUNDS");
                    println!("  word systems tried: {}", attempts.len());
                }
            }
            report.verdict = serde_json::to_value(&verdict).expect("verdict serializes");
            report.bounds = json!({
                "max_word_size": max_word_size,
                "fragment_bound": fragment_bound,
                "max_generators": max_generators,
            });
            finish(&mut report, started, &common.json)
        }
        Command::Counterexample {
            common,
            words,
            max_model_size,
            max_generators,
        } => {
            let mut report = Report::new("counterexample");
            let loaded = load_variety(&common.variety)?;
            report.record_input(&loaded.label, loaded.source.as_bytes());
            let text_w = std::fs::read_to_string(&words)?;
            report.record_input(&words.display().to_string(), text_w.as_bytes());
            let system = parse_word_system(&text_w, &loaded.spec.signature)?;
            // the config's variety id only seeds defaults; the scan itself
            // runs over the loaded spec
            let mut cfg = SearchConfig::new(loaded.builtin.unwrap_or(VarietyId::Act));
            cfg.max_generators = max_generators;
            cfg.geometry = geometry_budget(common.budget);
            if let Some(n) = common.budget {
                cfg.max_models = n;
            }
            let hit = counterexample_search(&loaded.spec, &system, max_model_size, &cfg)?;
            match &hit {
                None => println!("counterexample: none"),
                Some(c) => {
                    println!("counterexample: found");
                    print!("{}", print_algebra(&c.model));
                    println!("separating pair: {} = {}", c.witness.lhs, c.witness.rhs);
                }
            }
            report.verdict = json!({ "found": hit.is_some() });
            report.witnesses = serde_json::to_value(&hit).expect("hit serializes");
            report.bounds = json!({
                "max_model_size": max_model_size,
                "max_generators": max_generators,
            });
            finish(&mut report, started, &common.json)
        }
    }
}

/// Restore the default SIGPIPE disposition so piping into tools like
/// `head` terminates quietly instead of panicking on a closed stdout.
fn reset_sigpipe() {
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are not failures
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
