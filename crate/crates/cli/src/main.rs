use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use powerspace_core::json::{
    self as docs, convergence_json, decision_json, error_json, graph_entries, mass_to_valuation,
    valuation_json, FamilyDoc, MapDoc, PosetDoc, SpaceRef, ValuationDoc,
};
use powerspace_core::laws::{run_suites, Suite, SuiteConfig};
use powerspace_core::poset::DEFAULT_ENUM_CAP;
use powerspace_core::{
    converge_p, denote, extend, map_pp, parse, rational_cone, DirectedFamily, Error, MonotoneMap,
    PosetMap, Rational, Relation, Result, SimpleValuation, Space,
};

const ENUM_CAP_VAR: &str = "POWERSPACE_ENUM_CAP";

/// Largest number of upper sets for which closure under union and
/// intersection is checked pair by pair.
const CLOSURE_CHECK_LIMIT: usize = 1024;

#[derive(Parser)]
#[command(name = "powerspace", version, about = "Simple valuations on finite posets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a poset and summarize it as a directed space.
    CheckSpace { poset: PathBuf },
    /// Decide an order relation between two valuations.
    Order {
        lhs: PathBuf,
        rhs: PathBuf,
        #[arg(long, default_value = "leq")]
        relation: String,
    },
    /// Apply the extension of a monotone map to a valuation.
    Extend { map: PathBuf, valuation: PathBuf },
    /// Decide whether a directed family converges to a valuation.
    Converge { family: PathBuf, valuation: PathBuf },
    /// Evaluate a program over a state poset.
    Denote { program: PathBuf, poset: PathBuf },
    /// Run the seeded property suites.
    Proptest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value = "all")]
        suite: String,
        /// Run the cases on every poset up to --max-elements.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 5)]
        max_elements: usize,
    },
}

/// A command's JSON output and whether its verdict was positive.
struct Outcome {
    body: Value,
    positive: bool,
}

impl Outcome {
    fn success(body: Value) -> Self {
        Outcome { body, positive: true }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Document(format!("{}: {e}", path.display())))
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    docs::from_str(&read(path)?).map_err(|e| match e {
        Error::Document(m) => Error::Document(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn load_poset(path: &Path) -> Result<Space> {
    docs::space_from_doc(&load::<PosetDoc>(path)?)
}

/// Resolves a space given inline or by a path relative to `origin`'s directory.
fn resolve(space: &SpaceRef, origin: &Path) -> Result<Space> {
    match space {
        SpaceRef::Inline(doc) => docs::space_from_doc(doc),
        SpaceRef::Path(p) => load_poset(&origin.parent().unwrap_or(Path::new(".")).join(p)),
    }
}

fn load_valuation(path: &Path) -> Result<SimpleValuation> {
    let doc: ValuationDoc = load(path)?;
    mass_to_valuation(&resolve(&doc.space, path)?, &doc.mass)
}

fn enum_cap() -> Result<usize> {
    match std::env::var(ENUM_CAP_VAR) {
        Ok(v) => v
            .parse()
            .map_err(|_| Error::Document(format!("{ENUM_CAP_VAR} must be a nonnegative integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_ENUM_CAP),
    }
}

fn check_space(path: &Path) -> Result<Outcome> {
    let p = load_poset(path)?;
    let edges: Vec<[&str; 2]> = p.hasse_edges().into_iter().map(|(a, b)| [p.name(a), p.name(b)]).collect();
    let mut body = json!({ "elements": p.len(), "hasse_edges": edges });
    match p.upper_sets_with_cap(enum_cap()?) {
        Ok(iter) => {
            let ups: Vec<_> = iter.collect();
            body["upper_sets"] = json!(ups.len());
            if ups.len() <= CLOSURE_CHECK_LIMIT {
                let mut closed = true;
                for a in &ups {
                    for b in &ups {
                        closed &= p.is_upper(&a.union(b).copied().collect())?
                            && p.is_upper(&a.intersection(b).copied().collect())?;
                    }
                }
                body["closed_under_union_and_intersection"] = json!(closed);
            }
        }
        Err(Error::SizeLimitExceeded { cap, .. }) => {
            body["upper_sets"] = Value::Null;
            body["note"] = json!(format!("upper sets not enumerated: more than {cap} elements"));
        }
        Err(e) => return Err(e),
    }
    Ok(Outcome::success(body))
}

fn order(lhs: &Path, rhs: &Path, relation: &str) -> Result<Outcome> {
    let relation: Relation = relation
        .parse()
        .map_err(|_| Error::Document(format!("unknown relation {relation:?}; expected leq, prec or llcurly")))?;
    let xi = load_valuation(lhs)?;
    let eta = load_valuation(rhs)?;
    let decision = relation.decide(&xi, &eta)?;
    Ok(Outcome {
        body: decision_json(&decision, xi.space()),
        positive: decision.verdict,
    })
}

fn extend_cmd(map: &Path, valuation: &Path) -> Result<Outcome> {
    let doc: MapDoc = load(map)?;
    let source = resolve(&doc.source, map)?;
    let xi = load_valuation(valuation)?;
    let images = graph_entries(&source, &doc.graph)?;
    if doc.targets_rational_cone() {
        let graph = images
            .iter()
            .map(|s| s.parse::<Rational>().map_err(|e| Error::Document(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let f = MonotoneMap::new(&source, rational_cone(), graph)?;
        Ok(Outcome::success(json!(extend(&f, &xi)?.to_string())))
    } else {
        let target = resolve(&doc.target, map)?;
        let graph = images.iter().map(|s| target.index_of(s)).collect::<Result<Vec<_>>>()?;
        let f = PosetMap::new(&source, &target, graph)?;
        Ok(Outcome::success(valuation_json(&map_pp(&f, &xi)?)))
    }
}

fn converge_cmd(family: &Path, valuation: &Path) -> Result<Outcome> {
    let doc: FamilyDoc = load(family)?;
    let space = resolve(&doc.space, family)?;
    let members = doc
        .members
        .iter()
        .map(|m| mass_to_valuation(&space, m))
        .collect::<Result<Vec<_>>>()?;
    let family = DirectedFamily::new(members)?;
    let xi = load_valuation(valuation)?;
    let c = converge_p(&family, &xi)?;
    Ok(Outcome {
        body: convergence_json(&c, &space),
        positive: c.verdict,
    })
}

fn denote_cmd(program: &Path, poset: &Path) -> Result<Outcome> {
    let space = load_poset(poset)?;
    let prog = parse(&read(program)?, &space)?;
    Ok(Outcome::success(valuation_json(&denote(&prog, &space)?)))
}

fn proptest(config: SuiteConfig, suite: &str) -> Result<Outcome> {
    let suites = Suite::select(suite)?;
    let reports = run_suites(&suites, &config);
    let passed = reports.iter().all(|r| r.passed());
    Ok(Outcome {
        body: json!({ "seed": config.seed, "passed": passed, "suites": reports }),
        positive: passed,
    })
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::CheckSpace { poset } => check_space(&poset),
        Command::Order { lhs, rhs, relation } => order(&lhs, &rhs, &relation),
        Command::Extend { map, valuation } => extend_cmd(&map, &valuation),
        Command::Converge { family, valuation } => converge_cmd(&family, &valuation),
        Command::Denote { program, poset } => denote_cmd(&program, &poset),
        Command::Proptest {
            seed,
            cases,
            suite,
            exhaustive,
            max_elements,
        } => proptest(
            SuiteConfig {
                seed,
                cases,
                exhaustive,
                max_elements,
            },
            &suite,
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            println!("{}", out.body);
            ExitCode::from(if out.positive { 0 } else { 1 })
        }
        Err(e) => {
            println!("{}", error_json(&e));
            ExitCode::from(2)
        }
    }
}
