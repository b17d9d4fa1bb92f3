//! Command-line front end for the finite-algebra workbench: loads menu or
//! JSON algebras, evaluates formulas, runs the partition and census
//! machinery, and processes batch closure queries.
//!
//! Exit codes: 0 success, 1 false verdict under `--strict`, 2 bad input or
//! usage, 3 a size guard refused the computation.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::{self, ExitCode};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use logeo_core::algebra::FiniteAlgebra;
use logeo_core::axioms::run_axiom_suite;
use logeo_core::formula::{parse_formula, print_formula, value, Formula};
use logeo_core::geometry::{
    elementary_set, in_logical_closure, quasi_implies, EquationSystem, FormulaSystem,
};
use logeo_core::signature::{Signature, VarSort, Variety};
use logeo_core::space::{Point, PointSet};
use logeo_core::typesys::{
    chain_check, exponent_p_census, homogeneity, isotyped, order_formula_census, perfection,
    type_census, Partition,
};
use logeo_core::zline::z_isotyped;
use logeo_core::{Error as CoreError, Guards};

#[derive(Parser)]
#[command(
    name = "logeo",
    version,
    about = "Logical geometry over finite algebras: formula values, type censuses, \
             point equivalences, isotypy and closure queries.",
    after_help = "Algebras are named from the bundled menu (triv, z2, ..., z30, z2xz4, e2_3, \
                  d4, q8, s3) or loaded from a JSON file. Sorts are comma-separated variable \
                  lists such as `x` or `x,y`. The LOGEO_GUARDS environment variable \
                  (`points=N,carrier=N,zentry=N`) overrides the default guards; explicit \
                  flags win over the environment."
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Cap on the size of any constructed assignment space.
    #[arg(long, global = true, value_name = "N")]
    guard_points: Option<u64>,
    /// Cap on the carrier size accepted by the search routines.
    #[arg(long, global = true, value_name = "N")]
    guard_carrier: Option<usize>,
    /// Seed for the randomized law suite.
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    seed: u64,
    /// Exit with status 1 when the answer to a boolean query is false.
    #[arg(long, global = true)]
    strict: bool,
    /// Print point sets as a hex bit-vector (little-endian point indices,
    /// least significant byte first) instead of tuples.
    #[arg(long, global = true)]
    hex: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula over a sort and print its value set.
    Eval { algebra: String, sort: String, formula: String },
    /// One row per logical-indistinguishability class of the point space.
    Types { algebra: String, sort: String },
    /// The kernel, logical and orbit partitions side by side.
    Partitions { algebra: String, sort: String },
    /// Check that logically indistinguishable points lie in one orbit.
    Perfect { algebra: String, sort: String },
    /// Check that kernel-equal points already lie in one orbit.
    Homogeneous { algebra: String, sort: String },
    /// Decide whether two algebras realize the same types at this width.
    Isotyped { alg1: String, alg2: String, sort: String },
    /// Answer CLOSURE? (and QUASI?) queries from a batch file.
    Closure { algebra: String, sort: String, batch: PathBuf },
    /// Answer QUASI? (and CLOSURE?) queries from a batch file.
    Quasi { algebra: String, sort: String, batch: PathBuf },
    /// Census reports.
    #[command(subcommand)]
    Census(CensusCommand),
    /// Run the randomized quantifier, equality and sort-map law suite.
    Axioms {
        algebra: String,
        sort: String,
        /// Instances per law.
        #[arg(long, default_value_t = 500)]
        samples: u32,
    },
    /// Queries about integer tuples on the line.
    #[command(subcommand)]
    Zline(ZlineCommand),
}

#[derive(Subcommand)]
enum CensusCommand {
    /// Vanishing-pattern census over the elementary algebra of exponent p
    /// and rank m, with n sort variables.
    #[command(name = "exp-p")]
    ExpP { p: u32, m: usize, n: usize },
    /// Element-order census over a commutative algebra of squarefree
    /// exponent.
    Orders { algebra: String, sort: String },
}

#[derive(Subcommand)]
enum ZlineCommand {
    /// Decide whether two integer tuples satisfy the same line formulas.
    Isotyped {
        /// First tuple, comma separated, e.g. `2,4`.
        #[arg(allow_hyphen_values = true)]
        a: String,
        /// Second tuple, e.g. `-2,-4`.
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
}

enum Failure {
    Core(CoreError),
    Input(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(
                CoreError::PointsGuard { .. }
                | CoreError::CarrierGuard { .. }
                | CoreError::CarrierTooLarge { .. }
                | CoreError::ZEntryBound { .. },
            ) => 3,
            _ => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Input(m) => m.clone(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Failure {
        Failure::Core(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(verdict) => {
            if cli.common.strict && verdict == Some(false) {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

/// A report printer: accumulates the text body and its JSON twin, emits
/// whichever the format flag selects.
struct Report {
    format: Format,
    text: String,
}

impl Report {
    fn new(format: Format) -> Report {
        Report { format, text: String::new() }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        if self.format == Format::Text {
            self.text.push_str(s.as_ref());
            self.text.push('\n');
        }
    }

    fn emit(self, twin: Value) {
        let body = match self.format {
            Format::Text => self.text,
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&twin).expect("serializable twin");
                s.push('\n');
                s
            }
        };
        // A closed pipe downstream (`logeo ... | head`) is not our error;
        // leave quietly instead of panicking mid-print.
        let mut stdout = io::stdout().lock();
        if let Err(e) = stdout.write_all(body.as_bytes()).and_then(|()| stdout.flush()) {
            if e.kind() == io::ErrorKind::BrokenPipe {
                process::exit(0);
            }
            eprintln!("error: cannot write output: {e}");
            process::exit(2);
        }
    }
}

fn guards_from(common: &Common) -> Result<Guards, Failure> {
    let mut guards = Guards::default();
    if let Ok(text) = std::env::var("LOGEO_GUARDS") {
        for piece in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, val) = piece.split_once('=').ok_or_else(|| {
                Failure::Input(format!("LOGEO_GUARDS: `{piece}` is not key=value"))
            })?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| Failure::Input(format!("LOGEO_GUARDS: bad number `{v}`")))
            };
            match key.trim() {
                "points" => guards.max_points = parse(val)?,
                "carrier" => guards.max_carrier = parse(val)? as usize,
                "zentry" => guards.z_entry_bound = parse(val)? as i64,
                other => {
                    return Err(Failure::Input(format!("LOGEO_GUARDS: unknown key `{other}`")))
                }
            }
        }
    }
    if let Some(p) = common.guard_points {
        guards.max_points = p;
    }
    if let Some(c) = common.guard_carrier {
        guards.max_carrier = c;
    }
    if guards.max_points == 0 || guards.max_carrier == 0 {
        return Err(Failure::Input("guards must be positive".into()));
    }
    Ok(guards)
}

#[derive(Deserialize)]
struct AlgebraFile {
    name: String,
    signature: SignatureFile,
    variety: VarietyFile,
    carrier: usize,
    tables: serde_json::Map<String, Value>,
}

#[derive(Deserialize)]
struct SignatureFile {
    #[serde(default)]
    infix: Option<String>,
    ops: Vec<OpFile>,
}

#[derive(Deserialize)]
struct OpFile {
    sym: String,
    arity: usize,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum VarietyFile {
    Generic,
    Group,
    AbelianGroup,
    AbelianExponentP(u32),
}

/// Flattens a nested row-major table; the first argument indexes the
/// outermost array.
fn flatten_table(v: &Value, arity: usize, carrier: usize, out: &mut Vec<u8>) -> Result<(), String> {
    if arity == 0 {
        let n = v.as_u64().ok_or("expected an integer entry")?;
        out.push(u8::try_from(n).map_err(|_| "entry exceeds 255".to_string())?);
        return Ok(());
    }
    let rows = v.as_array().ok_or("expected a nested array")?;
    if rows.len() != carrier {
        return Err(format!("expected {carrier} rows, found {}", rows.len()));
    }
    for row in rows {
        flatten_table(row, arity - 1, carrier, out)?;
    }
    Ok(())
}

fn load_algebra_file(path: &str) -> Result<FiniteAlgebra, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read `{path}`: {e}")))?;
    let file: AlgebraFile = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("`{path}`: {e}")))?;
    let variety = match file.variety {
        VarietyFile::Generic => Variety::Generic,
        VarietyFile::Group => Variety::Group,
        VarietyFile::AbelianGroup => Variety::AbelianGroup,
        VarietyFile::AbelianExponentP(p) => Variety::AbelianExponentP(p),
    };
    let ops: Vec<(&str, usize)> =
        file.signature.ops.iter().map(|o| (o.sym.as_str(), o.arity)).collect();
    let sig = Signature::new(&file.name, &ops, file.signature.infix.as_deref(), variety)?;
    let mut tables = Vec::new();
    for decl in &sig.ops {
        let entry = file.tables.get(&decl.sym).ok_or_else(|| {
            Failure::Input(format!("`{path}`: no table for operation `{}`", decl.sym))
        })?;
        let mut flat = Vec::new();
        flatten_table(entry, decl.arity, file.carrier, &mut flat)
            .map_err(|e| Failure::Input(format!("`{path}`: table `{}`: {e}", decl.sym)))?;
        tables.push(flat);
    }
    Ok(FiniteAlgebra::new(&file.name, sig, file.carrier, tables)?)
}

/// A menu name resolves to the bundled group; anything else is read as a
/// JSON algebra file.
fn load_algebra(name_or_path: &str) -> Result<FiniteAlgebra, Failure> {
    if let Some(alg) = FiniteAlgebra::menu().into_iter().find(|a| a.name == name_or_path) {
        return Ok(alg);
    }
    load_algebra_file(name_or_path)
}

fn parse_sort(text: &str) -> Result<VarSort, Failure> {
    Ok(VarSort::parse(text)?)
}

fn point_text(p: &Point) -> String {
    if p.values.len() == 1 {
        p.values[0].to_string()
    } else {
        let inner: Vec<String> = p.values.iter().map(u8::to_string).collect();
        format!("({})", inner.join(", "))
    }
}

fn set_text(set: &PointSet, hex: bool) -> String {
    if hex {
        let mut bytes = Vec::new();
        for w in set.words() {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        bytes.truncate(set.space_len().div_ceil(8) as usize);
        return bytes.iter().map(|b| format!("{b:02x}")).collect();
    }
    let inner: Vec<String> = set.points().iter().map(point_text).collect();
    format!("{{{}}}", inner.join(", "))
}

fn point_json(p: &Point) -> Value {
    json!(p.values)
}

fn set_json(set: &PointSet) -> Value {
    json!({
        "size": set.len(),
        "space": set.space_len(),
        "points": set.points().iter().map(point_json).collect::<Vec<_>>(),
    })
}

fn partition_json(p: &Partition, nvars: usize, carrier: usize) -> Value {
    let classes: Vec<Value> = p
        .classes()
        .iter()
        .map(|class| {
            json!(class
                .iter()
                .map(|&i| point_json(&Point::from_index(i, nvars, carrier)))
                .collect::<Vec<_>>())
        })
        .collect();
    json!({ "classes": classes })
}

fn partition_text(p: &Partition, nvars: usize, carrier: usize) -> String {
    let classes: Vec<String> = p
        .classes()
        .iter()
        .map(|class| {
            let pts: Vec<String> = class
                .iter()
                .map(|&i| point_text(&Point::from_index(i, nvars, carrier)))
                .collect();
            format!("{{{}}}", pts.join(", "))
        })
        .collect();
    classes.join("  ")
}

fn run(cli: &Cli) -> Result<Option<bool>, Failure> {
    let guards = guards_from(&cli.common)?;
    let mut report = Report::new(cli.common.format);
    match &cli.command {
        Command::Eval { algebra, sort, formula } => {
            let alg = load_algebra(algebra)?;
            let sort = parse_sort(sort)?;
            let f = parse_formula(formula, &alg.signature, &sort)?;
            let set = value(&f, &sort, &alg, &guards)?;
            report.line(set_text(&set, cli.common.hex));
            report.emit(json!({
                "algebra": alg.name,
                "sort": sort.to_string(),
                "formula": print_formula(&f, &alg.signature, &sort),
                "value": set_json(&set),
            }));
            Ok(None)
        }
        Command::Types { algebra, sort } => {
            let alg = load_algebra(algebra)?;
            let sort = parse_sort(sort)?;
            let census = type_census(&alg, &sort, &guards)?;
            report.line(format!("{:<6} {:<8} {:<16} {:<6} defining", "class", "size", "rep", "orbit"));
            let mut rows = Vec::new();
            for (i, row) in census.rows.iter().enumerate() {
                let defining = row
                    .defining
                    .as_ref()
                    .map(|f| print_formula(f, &alg.signature, &sort));
                report.line(format!(
                    "{:<6} {:<8} {:<16} {:<6} {}",
                    i,
                    row.size,
                    point_text(&row.representative),
                    if row.matches_orbit { "yes" } else { "no" },
                    defining.as_deref().unwrap_or("-"),
                ));
                rows.push(json!({
                    "class": i,
                    "size": row.size,
                    "representative": point_json(&row.representative),
                    "matches_orbit": row.matches_orbit,
                    "defining": defining,
                }));
            }
            report.line(format!(
                "aux vars used: {}  converged: {}",
                census.aux_vars_used, census.converged
            ));
            report.emit(json!({
                "algebra": alg.name,
                "sort": sort.to_string(),
                "rows": rows,
                "aux_vars_used": census.aux_vars_used,
                "converged": census.converged,
            }));
            Ok(None)
        }
        Command::Partitions { algebra, sort } => {
            let alg = load_algebra(algebra)?;
            let sort = parse_sort(sort)?;
            let chain = chain_check(&alg, &sort, &guards)?;
            let n = sort.len();
            let c = alg.carrier;
            let small = chain.tau.len() <= 512;
            report.line(format!("kernel partition: {} classes", chain.tau.num_classes()));
            if small {
                report.line(format!("  {}", partition_text(&chain.tau, n, c)));
            }
            report.line(format!(
                "logical partition: {} classes (aux vars {}, converged: {})",
                chain.rho.partition.num_classes(),
                chain.rho.aux_vars_used,
                chain.rho.converged
            ));
            if small {
                report.line(format!("  {}", partition_text(&chain.rho.partition, n, c)));
            }
            report.line(format!("orbit partition: {} classes", chain.orbit.num_classes()));
            if small {
                report.line(format!("  {}", partition_text(&chain.orbit, n, c)));
            }
            report.line(format!("orbits refine logical: {}", chain.orbit_refines_rho));
            report.line(format!("logical refines kernel: {}", chain.rho_refines_tau));
            report.emit(json!({
                "algebra": alg.name,
                "sort": sort.to_string(),
                "kernel": partition_json(&chain.tau, n, c),
                "logical": partition_json(&chain.rho.partition, n, c),
                "orbit": partition_json(&chain.orbit, n, c),
                "aux_vars_used": chain.rho.aux_vars_used,
                "converged": chain.rho.converged,
                "orbit_refines_logical": chain.orbit_refines_rho,
                "logical_refines_kernel": chain.rho_refines_tau,
            }));
            Ok(None)
        }
        Command::Perfect { algebra, sort } => {
            let alg = load_algebra(algebra)?;
            let sort = parse_sort(sort)?;
            let p = perfection(&alg, &sort, &guards)?;
            report.line(format!("logically perfect: {}", p.logically_perfect));
            report.line(format!("strictly perfect: {}", p.strictly_perfect));
            report.line(format!(
                "classes: orbit {}, logical {}, plain-fragment {}",
                p.orbit_classes, p.rho_classes, p.pebble_classes
            ));
            report.line(format!(
                "aux vars used: {}  converged: {}",
                p.aux_vars_used, p.rho_converged
            ));
            report.emit(json!({
                "algebra": alg.name,
                "sort": sort.to_string(),
                "logically_perfect": p.logically_perfect,
                "strictly_perfect": p.strictly_perfect,
                "orbit_classes": p.orbit_classes,
                "logical_classes": p.rho_classes,
                "plain_fragment_classes": p.pebble_classes,
                "aux_vars_used": p.aux_vars_used,
                "converged": p.rho_converged,
            }));
            Ok(Some(p.logically_perfect))
        }
        Command::Homogeneous { algebra, sort } => {
            let alg = load_algebra(algebra)?;
            let sort = parse_sort(sort)?;
            let h = homogeneity(&alg, &sort, &guards)?;
            report.line(format!("homogeneous: {}", h.homogeneous));
            report.line(format!(
                "classes: kernel {}, orbit {}",
                h.tau_classes, h.orbit_classes
            ));
            let separating = h.separating.as_ref().map(|s| {
                json!({
                    "sort": s.sort.to_string(),
                    "formula": print_formula(&s.formula, &alg.signature, &s.sort),
                    "holds_at": point_json(&s.holds_at),
                    "fails_at": point_json(&s.fails_at),
                })
            });
            if let Some(s) = &h.separating {
                report.line(format!(
                    "separating formula (over {}): {}",
                    s.sort,
                    print_formula(&s.formula, &alg.signature, &s.sort)
                ));
                report.line(format!(
                    "holds at {}, fails at {}",
                    point_text(&s.holds_at),
                    point_text(&s.fails_at)
                ));
            }
            report.emit(json!({
                "algebra": alg.name,
                "sort": sort.to_string(),
                "homogeneous": h.homogeneous,
                "kernel_classes": h.tau_classes,
                "orbit_classes": h.orbit_classes,
                "separating": separating,
            }));
            Ok(Some(h.homogeneous))
        }
        Command::Isotyped { alg1, alg2, sort } => {
            let h1 = load_algebra(alg1)?;
            let h2 = load_algebra(alg2)?;
            let sort = parse_sort(sort)?;
            let r = isotyped(&h1, &h2, sort.len(), &guards)?;
            report.line(if r.isotyped { "true" } else { "false" });
            let witness = r.witness.as_ref().map(|w| {
                json!({
                    "sort": w.sort.to_string(),
                    "formula": print_formula(&w.formula, &h1.signature, &w.sort),
                    "holds_in": if w.holds_in_first { &h1.name } else { &h2.name },
                })
            });
            if let Some(w) = &r.witness {
                report.line(format!(
                    "witness (over {}): {}",
                    w.sort,
                    print_formula(&w.formula, &h1.signature, &w.sort)
                ));
                report.line(format!(
                    "holds in: {}",
                    if w.holds_in_first { &h1.name } else { &h2.name }
                ));
            }
            report.line(format!(
                "aux vars used: {}  converged: {}",
                r.aux_vars_used, r.converged
            ));
            report.emit(json!({
                "algebras": [h1.name, h2.name],
                "width": sort.len(),
                "isotyped": r.isotyped,
                "witness": witness,
                "aux_vars_used": r.aux_vars_used,
                "converged": r.converged,
            }));
            Ok(Some(r.isotyped))
        }
        Command::Closure { algebra, sort, batch } | Command::Quasi { algebra, sort, batch } => {
            let alg = load_algebra(algebra)?;
            let sort = parse_sort(sort)?;
            run_batch(&alg, &sort, batch, &guards, report)
        }
        Command::Census(CensusCommand::ExpP { p, m, n }) => {
            let census = exponent_p_census(*p, *m, *n, &guards)?;
            report.line(format!(
                "algebra {}, sort {}",
                census.algebra.name, census.sort
            ));
            report.line(format!("{:<4} {:<8} {:<13} {:<24} formula", "row", "size", "single-orbit", "subgroup"));
            let mut rows = Vec::new();
            let mut all_single = true;
            for (i, row) in census.rows.iter().enumerate() {
                all_single &= row.single_orbit;
                let subgroup: Vec<String> = row
                    .subgroup
                    .iter()
                    .map(|v| {
                        let coords: Vec<String> = v.iter().map(u8::to_string).collect();
                        format!("({})", coords.join(","))
                    })
                    .collect();
                let formula = print_formula(&row.formula, &census.algebra.signature, &census.sort);
                report.line(format!(
                    "{:<4} {:<8} {:<13} {:<24} {}",
                    i,
                    row.value_size,
                    if row.single_orbit { "yes" } else { "no" },
                    subgroup.join(" "),
                    formula,
                ));
                rows.push(json!({
                    "row": i,
                    "size": row.value_size,
                    "single_orbit": row.single_orbit,
                    "subgroup": row.subgroup,
                    "formula": formula,
                }));
            }
            report.emit(json!({
                "algebra": census.algebra.name,
                "sort": census.sort.to_string(),
                "rows": rows,
            }));
            Ok(Some(all_single))
        }
        Command::Census(CensusCommand::Orders { algebra, sort }) => {
            let alg = load_algebra(algebra)?;
            let sort = parse_sort(sort)?;
            let census = order_formula_census(&alg, &sort, &guards)?;
            report.line(format!("{:<4} {:<8} {:<13} {:<12} formula", "row", "size", "single-orbit", "orders"));
            let mut rows = Vec::new();
            let mut all_single = true;
            for (i, row) in census.rows.iter().enumerate() {
                all_single &= row.single_orbit;
                let orders: Vec<String> = row.orders.iter().map(u32::to_string).collect();
                let formula = print_formula(&row.formula, &alg.signature, &sort);
                report.line(format!(
                    "{:<4} {:<8} {:<13} {:<12} {}",
                    i,
                    row.value_size,
                    if row.single_orbit { "yes" } else { "no" },
                    format!("({})", orders.join(",")),
                    formula,
                ));
                rows.push(json!({
                    "row": i,
                    "size": row.value_size,
                    "single_orbit": row.single_orbit,
                    "orders": row.orders,
                    "formula": formula,
                }));
            }
            report.emit(json!({
                "algebra": alg.name,
                "sort": sort.to_string(),
                "rows": rows,
            }));
            Ok(Some(all_single))
        }
        Command::Axioms { algebra, sort, samples } => {
            let alg = load_algebra(algebra)?;
            let sort = parse_sort(sort)?;
            let reports = run_axiom_suite(&alg, &sort, *samples, cli.common.seed, &guards)?;
            let mut rows = Vec::new();
            let mut total = 0u32;
            report.line(format!("{:<40} {:<8} violations", "law", "samples"));
            for r in &reports {
                total += r.violations;
                report.line(format!("{:<40} {:<8} {}", r.name, r.samples, r.violations));
                if let Some(first) = &r.first_failure {
                    report.line(format!("  first failure: {first}"));
                }
                rows.push(json!({
                    "law": r.name,
                    "samples": r.samples,
                    "violations": r.violations,
                    "first_failure": r.first_failure,
                }));
            }
            report.line(format!("total violations: {total}"));
            report.emit(json!({
                "algebra": alg.name,
                "sort": sort.to_string(),
                "seed": cli.common.seed,
                "laws": rows,
                "total_violations": total,
            }));
            Ok(Some(total == 0))
        }
        Command::Zline(ZlineCommand::Isotyped { a, b }) => {
            let ta = parse_tuple(a)?;
            let tb = parse_tuple(b)?;
            let r = z_isotyped(&ta, &tb, &guards)?;
            report.line(if r.isotyped { "true" } else { "false" });
            let witness = r.witness.as_ref().map(|w| {
                json!({
                    "formula": w.formula.to_string(),
                    "holds_at_first": w.holds_at_first,
                })
            });
            if let Some(w) = &r.witness {
                report.line(format!("witness: {}", w.formula));
                report.line(format!("holds at first tuple: {}", w.holds_at_first));
            }
            report.emit(json!({
                "tuples": [ta, tb],
                "isotyped": r.isotyped,
                "witness": witness,
            }));
            Ok(Some(r.isotyped))
        }
    }
}

fn parse_tuple(text: &str) -> Result<Vec<i64>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<i64>()
                .map_err(|_| Failure::Input(format!("`{s}` is not a 64-bit integer")))
        })
        .collect()
}

/// Batch query lines: `CLOSURE? <formula-file> |- <formula>` asks whether
/// the formula holds on the solution set of the file's formula system;
/// `QUASI? <equations-file> |- <w> == <w'>` asks whether the equation
/// follows from the file's equations. File paths are resolved against the
/// batch file's directory. Blank lines and `#` comments are skipped.
fn run_batch(
    alg: &FiniteAlgebra,
    sort: &VarSort,
    batch: &Path,
    guards: &Guards,
    mut report: Report,
) -> Result<Option<bool>, Failure> {
    let text = fs::read_to_string(batch)
        .map_err(|e| Failure::Input(format!("cannot read `{}`: {e}", batch.display())))?;
    let base = batch.parent().unwrap_or(Path::new("."));
    let mut results = Vec::new();
    let mut all = true;
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (kind, rest) = if let Some(rest) = line.strip_prefix("CLOSURE?") {
            ("CLOSURE", rest)
        } else if let Some(rest) = line.strip_prefix("QUASI?") {
            ("QUASI", rest)
        } else {
            return Err(Failure::Input(format!(
                "{}:{}: expected `CLOSURE?` or `QUASI?`",
                batch.display(),
                lineno + 1
            )));
        };
        let (path_part, query_part) = rest.split_once("|-").ok_or_else(|| {
            Failure::Input(format!("{}:{}: missing `|-`", batch.display(), lineno + 1))
        })?;
        let sys_path = base.join(path_part.trim());
        let sys_text = fs::read_to_string(&sys_path)
            .map_err(|e| Failure::Input(format!("cannot read `{}`: {e}", sys_path.display())))?;
        let verdict = if kind == "CLOSURE" {
            let sys = FormulaSystem::parse(&sys_text, &alg.signature, sort)?;
            let set = elementary_set(&sys, sort, alg, guards)?;
            let f: Formula = parse_formula(query_part.trim(), &alg.signature, sort)?;
            in_logical_closure(&f, &set, guards)?
        } else {
            let sys = EquationSystem::parse(&sys_text, &alg.signature, sort)?;
            let target = EquationSystem::parse(query_part.trim(), &alg.signature, sort)?;
            let (w, w2) = target.equations.first().ok_or_else(|| {
                Failure::Input(format!(
                    "{}:{}: empty target equation",
                    batch.display(),
                    lineno + 1
                ))
            })?;
            quasi_implies(&sys, w, w2, sort, alg, guards)?
        };
        all &= verdict;
        report.line(format!("{}: {} {}", lineno + 1, kind, verdict));
        results.push(json!({
            "line": lineno + 1,
            "kind": kind,
            "query": line,
            "verdict": verdict,
        }));
    }
    report.emit(json!({
        "algebra": alg.name,
        "sort": sort.to_string(),
        "results": results,
    }));
    Ok(Some(all))
}
