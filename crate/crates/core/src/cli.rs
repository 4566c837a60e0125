//! Command-line front end. Every subcommand maps to one library operation;
//! exit code 0 means the checked property holds (or the command succeeded),
//! 1 means the property fails (a witness is printed), and 2 means an input
//! or guard error.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coalgebra::{
    behaviourally_equivalent, companion, greatest_l_bisimulation, is_l_bisimulation,
    FinCoalgebra,
};
use crate::functor::{check_lax_laws, barr_lift, FunctorExpr, LawSample, LawStatus};
use crate::nabla::{box_, diamond, eval_nabla, generated_clopen_algebra, NablaFormula};
use crate::output::{machine_relation, nbisim_lines, text_relation, vietoris_lines, Format};
use crate::parse;
use crate::relation::Relation;
use crate::stone::{
    greatest_neighbourhood_bisimulation, is_neighbourhood_bisimulation,
    is_vietoris_bisimulation, nbisim_join, nbisim_meet,
};
use crate::tower::{
    cantor_shift_example, check_nbisim_to_depth, closure_approx, closure_theorem_probe,
    eventually_constant_thread, BisimPresentation, LevelRelation, LevelVerdict, Thread, Tower,
};
use crate::value::FinSet;
use crate::{Error, Limits, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Machine,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Text => Format::Text,
            FormatArg::Machine => Format::Machine,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "stonebis",
    about = "Coalgebraic bisimulation workbench: Barr lifting, nabla semantics, neighbourhood and Vietoris bisimulations, profinite towers",
    version
)]
struct Cli {
    /// Report rendering.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Enumeration guard override (default 2^20 values).
    #[arg(long, global = true)]
    guard: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Barr lifting of a relation file.
    Lift {
        /// Functor expression, e.g. 'P' or 'Id * P'.
        #[arg(long)]
        functor: String,
        /// Relation file with 'dom =', 'cod =' and 'x ~ y' lines.
        relation: PathBuf,
    },
    /// Nabla semantics and the diamond/box shorthands.
    #[command(subcommand)]
    Nabla(NablaCmd),
    /// Generators and atoms of the clopen algebra over T X.
    Algebra {
        #[arg(long)]
        functor: String,
        /// Base carrier, e.g. '{0,1}'.
        #[arg(long)]
        base: String,
    },
    /// Barr bisimulation checks on finite coalgebras.
    #[command(subcommand)]
    Bisim(BisimCmd),
    /// Behavioural equivalence of two pointed coalgebras.
    Beq {
        left: PathBuf,
        left_state: String,
        right: PathBuf,
        right_state: String,
    },
    /// Companion of a finite coalgebra: algebra atoms and structure.
    Companion { coalgebra: PathBuf },
    /// Neighbourhood bisimulation checks on companions.
    #[command(subcommand)]
    Nbisim(NbisimCmd),
    /// Vietoris bisimulation check for powerset coalgebras.
    #[command(subcommand)]
    Vietoris(VietorisCmd),
    /// Lattice operations on neighbourhood bisimulations.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Tower validation, level-wise closure and the closure probe.
    #[command(subcommand)]
    Tower(TowerCmd),
    /// Lax-extension law report over random samples.
    Laws {
        #[arg(long)]
        functor: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_carrier: usize,
    },
    /// DOT export of a powerset coalgebra as a directed graph.
    Dot { coalgebra: PathBuf },
}

#[derive(Debug, Subcommand)]
enum NablaCmd {
    /// Semantic set of a formula.
    Eval {
        #[arg(long)]
        functor: String,
        #[arg(long)]
        base: String,
        /// Formula body: a value literal over the subsets of the base.
        #[arg(long)]
        formula: String,
    },
    /// All subsets meeting Z.
    Diamond {
        #[arg(long)]
        base: String,
        #[arg(long)]
        z: String,
    },
    /// All subsets of Z.
    Box {
        #[arg(long)]
        base: String,
        #[arg(long)]
        z: String,
    },
}

#[derive(Debug, Subcommand)]
enum BisimCmd {
    /// Check that a relation is a Barr bisimulation.
    Check {
        left: PathBuf,
        right: PathBuf,
        relation: PathBuf,
    },
    /// Greatest Barr bisimulation.
    Greatest { left: PathBuf, right: PathBuf },
}

#[derive(Debug, Subcommand)]
enum NbisimCmd {
    /// Check a relation on the companions of two coalgebras.
    Check {
        left: PathBuf,
        right: PathBuf,
        relation: PathBuf,
    },
    /// Greatest neighbourhood bisimulation on the companions.
    Greatest { left: PathBuf, right: PathBuf },
}

#[derive(Debug, Subcommand)]
enum VietorisCmd {
    Check {
        left: PathBuf,
        right: PathBuf,
        relation: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum LatticeCmd {
    /// Largest neighbourhood bisimulation below the intersection.
    Meet {
        left: PathBuf,
        right: PathBuf,
        #[arg(required = true)]
        relations: Vec<PathBuf>,
    },
    /// Union of the members (closure is the identity on finite carriers).
    Join {
        left: PathBuf,
        right: PathBuf,
        #[arg(required = true)]
        relations: Vec<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct TowerSource {
    /// Built-in tower name ('cantor-shift').
    name: Option<String>,
    /// Tower file in the level-block grammar.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Depth for built-in towers, and the check depth.
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum TowerCmd {
    /// Surjectivity and morphism squares at every level.
    Validate(TowerSource),
    /// Level projection of a thread relation.
    Closure {
        #[command(flatten)]
        source: TowerSource,
        /// 'dense-identity', 'complement', 'zeros', or a thread-pair file.
        #[arg(long)]
        pairs: String,
        /// Level to project to.
        #[arg(long)]
        level: usize,
    },
    /// Closure probe: project a thread relation to every level and check.
    Probe {
        #[command(flatten)]
        source: TowerSource,
        #[arg(long)]
        pairs: String,
    },
    /// Depth-bounded neighbourhood check of a level-relation file.
    Check {
        #[command(flatten)]
        source: TowerSource,
        /// Level-relation file ('level N' blocks of 'x ~ y' lines).
        #[arg(long)]
        levels: PathBuf,
    },
}

/// Result of one CLI invocation.
#[derive(Debug)]
pub struct CliOutcome {
    pub code: i32,
    pub output: String,
}

/// Runs the CLI on explicit arguments and returns the exit code and report
/// instead of printing and exiting.
pub fn run<I, S>(args: I) -> CliOutcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, usage errors are
            // input errors.
            let code = if e.use_stderr() { 2 } else { 0 };
            return CliOutcome {
                code,
                output: e.to_string(),
            };
        }
    };
    let limits = cli
        .guard
        .map(Limits::new)
        .unwrap_or_default();
    let format: Format = cli.format.into();
    match dispatch(cli.command, format, limits) {
        Ok((code, output)) => CliOutcome { code, output },
        Err(e) => CliOutcome {
            code: 2,
            output: format!("error: {e}\n"),
        },
    }
}

fn load_coalgebra(path: &PathBuf) -> Result<FinCoalgebra> {
    parse::parse_coalgebra(&fs::read_to_string(path)?)
}

fn load_relation(
    path: &PathBuf,
    dom: Option<&FinSet>,
    cod: Option<&FinSet>,
) -> Result<Relation> {
    parse::parse_relation(&fs::read_to_string(path)?, dom, cod)
}

fn dispatch(command: Command, format: Format, limits: Limits) -> Result<(i32, String)> {
    match command {
        Command::Lift { functor, relation } => {
            let expr = parse::parse_functor(&functor)?;
            let rel = load_relation(&relation, None, None)?;
            let lifted = barr_lift(&expr, &rel, limits)?;
            let out = match format {
                Format::Machine => machine_relation(&lifted),
                Format::Text => text_relation(&lifted),
            };
            Ok((0, out))
        }
        Command::Nabla(cmd) => run_nabla(cmd, format, limits),
        Command::Algebra { functor, base } => {
            let expr = parse::parse_functor(&functor)?;
            let base = parse::parse_set(&base)?;
            let algebra = generated_clopen_algebra(&expr, &base, limits)?;
            let mut out = String::new();
            match format {
                Format::Machine => {
                    let _ = writeln!(out, "universe={}", algebra.universe());
                    for g in algebra.generators() {
                        let _ = writeln!(out, "generator={g}");
                    }
                    for a in algebra.atoms() {
                        let _ = writeln!(out, "atom={a}");
                    }
                }
                Format::Text => {
                    let _ = writeln!(
                        out,
                        "universe has {} values; {} generators, {} atoms",
                        algebra.universe().len(),
                        algebra.generators().len(),
                        algebra.atoms().len()
                    );
                    for g in algebra.generators() {
                        let _ = writeln!(out, "  generator {g}");
                    }
                    for a in algebra.atoms() {
                        let _ = writeln!(out, "  atom {a}");
                    }
                }
            }
            Ok((0, out))
        }
        Command::Bisim(cmd) => run_bisim(cmd, format),
        Command::Beq {
            left,
            left_state,
            right,
            right_state,
        } => {
            let a = load_coalgebra(&left)?;
            let b = load_coalgebra(&right)?;
            let u = parse::parse_value(&left_state)?;
            let v = parse::parse_value(&right_state)?;
            let verdict = behaviourally_equivalent(&a, &u, &b, &v)?;
            let mut out = String::new();
            match format {
                Format::Machine => {
                    let _ = writeln!(out, "equivalent={}", verdict.equivalent);
                    if let Some(n) = verdict.separated_at {
                        let _ = writeln!(out, "separated_at={n}");
                    }
                }
                Format::Text => {
                    if verdict.equivalent {
                        let _ = writeln!(out, "{u} and {v} are behaviourally equivalent");
                    } else {
                        let _ = writeln!(
                            out,
                            "{u} and {v} differ at stage {}",
                            verdict.separated_at.expect("separating stage")
                        );
                    }
                }
            }
            Ok((if verdict.equivalent { 0 } else { 1 }, out))
        }
        Command::Companion { coalgebra } => {
            let a = load_coalgebra(&coalgebra)?;
            let hat = companion(&a, limits)?;
            let mut out = String::new();
            match format {
                Format::Machine => {
                    for (i, atom) in hat.algebra().atoms().iter().enumerate() {
                        let _ = writeln!(out, "atom.{i}={atom}");
                    }
                    for x in a.carrier().iter() {
                        let _ = writeln!(out, "structure.{x}={}", hat.structure_atom(x)?);
                    }
                }
                Format::Text => {
                    let _ = writeln!(
                        out,
                        "companion over {} functor values, {} atoms",
                        hat.algebra().universe().len(),
                        hat.algebra().atoms().len()
                    );
                    for x in a.carrier().iter() {
                        let _ = writeln!(out, "  {x} -> atom {}", hat.atom_set(x)?);
                    }
                }
            }
            Ok((0, out))
        }
        Command::Nbisim(cmd) => run_nbisim(cmd, format, limits),
        Command::Vietoris(VietorisCmd::Check {
            left,
            right,
            relation,
        }) => {
            let a = load_coalgebra(&left)?;
            let b = load_coalgebra(&right)?;
            let rel = load_relation(&relation, Some(a.carrier()), Some(b.carrier()))?;
            let verdict = is_vietoris_bisimulation(&rel, &a, &b)?;
            let mut out = String::new();
            vietoris_lines(&mut out, &verdict, format);
            Ok((if verdict.holds { 0 } else { 1 }, out))
        }
        Command::Lattice(cmd) => run_lattice(cmd, format, limits),
        Command::Tower(cmd) => run_tower(cmd, format, limits),
        Command::Laws {
            functor,
            samples,
            seed,
            max_carrier,
        } => {
            let expr = parse::parse_functor(&functor)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let batch: Vec<LawSample> = (0..samples)
                .map(|_| LawSample::random(&mut rng, max_carrier.max(1)))
                .collect();
            let report = check_lax_laws(&expr, batch, limits)?;
            let mut out = String::new();
            let law = |out: &mut String, name: &str, status: &LawStatus| match format {
                Format::Machine => {
                    let _ = writeln!(out, "law.{name}={}", if status.holds { "holds" } else { "fails" });
                    if let Some((a, b)) = &status.counterexample {
                        let _ = writeln!(out, "law.{name}.counterexample=({a},{b})");
                    }
                }
                Format::Text => {
                    let _ = writeln!(
                        out,
                        "{name}: {}",
                        if status.holds { "holds" } else { "FAILS" }
                    );
                    if let Some((a, b)) = &status.counterexample {
                        let _ = writeln!(out, "  counterexample: ({a},{b})");
                    }
                }
            };
            if format == Format::Machine {
                let _ = writeln!(out, "samples={}", report.samples);
            } else {
                let _ = writeln!(out, "{} samples over {expr}", report.samples);
            }
            law(&mut out, "l1", &report.l1);
            law(&mut out, "l2", &report.l2);
            if format == Format::Machine {
                let _ = writeln!(out, "law.l2.equality={}", report.l2_equality);
            } else {
                let _ = writeln!(
                    out,
                    "l2 equality (functoriality): {}",
                    if report.l2_equality { "holds" } else { "FAILS" }
                );
            }
            law(&mut out, "l3", &report.l3);
            law(&mut out, "symmetry", &report.symmetry);
            Ok((if report.all_hold() { 0 } else { 1 }, out))
        }
        Command::Dot { coalgebra } => {
            let a = load_coalgebra(&coalgebra)?;
            if a.functor() != &FunctorExpr::Powerset {
                return Err(Error::InvalidInput(
                    "DOT export is defined for powerset coalgebras".into(),
                ));
            }
            let mut out = String::new();
            let _ = writeln!(out, "digraph frame {{");
            for x in a.carrier().iter() {
                let _ = writeln!(out, "  \"{x}\";");
            }
            for (x, t) in a.states() {
                for y in t.as_set().expect("powerset structure") {
                    let _ = writeln!(out, "  \"{x}\" -> \"{y}\";");
                }
            }
            let _ = writeln!(out, "}}");
            Ok((0, out))
        }
    }
}

fn run_nabla(cmd: NablaCmd, format: Format, limits: Limits) -> Result<(i32, String)> {
    let result = match cmd {
        NablaCmd::Eval {
            functor,
            base,
            formula,
        } => {
            let expr = parse::parse_functor(&functor)?;
            let base = parse::parse_set(&base)?;
            let body = parse::parse_value(&formula)?;
            eval_nabla(&NablaFormula::new(expr, base, body)?, limits)?
        }
        NablaCmd::Diamond { base, z } => {
            let base = parse::parse_set(&base)?;
            let z = parse::parse_set(&z)?;
            diamond(&base, &z, limits)?
        }
        NablaCmd::Box { base, z } => {
            let base = parse::parse_set(&base)?;
            let z = parse::parse_set(&z)?;
            box_(&base, &z, limits)?
        }
    };
    let out = match format {
        Format::Machine => format!("result={result}\n"),
        Format::Text => format!("{} values: {result}\n", result.len()),
    };
    Ok((0, out))
}

fn run_bisim(cmd: BisimCmd, format: Format) -> Result<(i32, String)> {
    match cmd {
        BisimCmd::Check {
            left,
            right,
            relation,
        } => {
            let a = load_coalgebra(&left)?;
            let b = load_coalgebra(&right)?;
            let rel = load_relation(&relation, Some(a.carrier()), Some(b.carrier()))?;
            let verdict = is_l_bisimulation(&rel, &a, &b)?;
            let mut out = String::new();
            match format {
                Format::Machine => {
                    let _ = writeln!(out, "holds={}", verdict.holds);
                    if let Some((x, y)) = &verdict.witness {
                        let _ = writeln!(out, "witness.u={x}");
                        let _ = writeln!(out, "witness.v={y}");
                    }
                }
                Format::Text => {
                    let _ = writeln!(out, "{}", if verdict.holds { "holds" } else { "fails" });
                    if let Some((x, y)) = &verdict.witness {
                        let _ = writeln!(out, "witness: ({x},{y})");
                    }
                }
            }
            Ok((if verdict.holds { 0 } else { 1 }, out))
        }
        BisimCmd::Greatest { left, right } => {
            let a = load_coalgebra(&left)?;
            let b = load_coalgebra(&right)?;
            let rel = greatest_l_bisimulation(&a, &b)?;
            let out = match format {
                Format::Machine => machine_relation(&rel),
                Format::Text => text_relation(&rel),
            };
            Ok((0, out))
        }
    }
}

fn run_nbisim(cmd: NbisimCmd, format: Format, limits: Limits) -> Result<(i32, String)> {
    match cmd {
        NbisimCmd::Check {
            left,
            right,
            relation,
        } => {
            let a = load_coalgebra(&left)?;
            let b = load_coalgebra(&right)?;
            let rel = load_relation(&relation, Some(a.carrier()), Some(b.carrier()))?;
            let start = Instant::now();
            let ha = companion(&a, limits)?;
            let hb = companion(&b, limits)?;
            let verdict = is_neighbourhood_bisimulation(&rel, &ha, &hb, limits)?;
            let elapsed = start.elapsed().as_millis();
            let mut out = String::new();
            nbisim_lines(&mut out, "", &verdict, format);
            match format {
                Format::Machine => {
                    let _ = writeln!(out, "time_ms={elapsed}");
                }
                Format::Text => {
                    let _ = writeln!(out, "elapsed: {elapsed} ms");
                }
            }
            Ok((if verdict.holds { 0 } else { 1 }, out))
        }
        NbisimCmd::Greatest { left, right } => {
            let a = load_coalgebra(&left)?;
            let b = load_coalgebra(&right)?;
            let ha = companion(&a, limits)?;
            let hb = companion(&b, limits)?;
            let rel = greatest_neighbourhood_bisimulation(&ha, &hb, limits)?;
            let out = match format {
                Format::Machine => machine_relation(&rel),
                Format::Text => text_relation(&rel),
            };
            Ok((0, out))
        }
    }
}

fn run_lattice(cmd: LatticeCmd, format: Format, limits: Limits) -> Result<(i32, String)> {
    let (left, right, relations, is_meet) = match cmd {
        LatticeCmd::Meet {
            left,
            right,
            relations,
        } => (left, right, relations, true),
        LatticeCmd::Join {
            left,
            right,
            relations,
        } => (left, right, relations, false),
    };
    let a = load_coalgebra(&left)?;
    let b = load_coalgebra(&right)?;
    let members = relations
        .iter()
        .map(|p| load_relation(p, Some(a.carrier()), Some(b.carrier())))
        .collect::<Result<Vec<_>>>()?;
    let ha = companion(&a, limits)?;
    let hb = companion(&b, limits)?;
    let rel = if is_meet {
        nbisim_meet(&members, &ha, &hb, limits)?
    } else {
        nbisim_join(&members, &ha, &hb, limits)?
    };
    let out = match format {
        Format::Machine => machine_relation(&rel),
        Format::Text => text_relation(&rel),
    };
    Ok((0, out))
}

fn load_tower(source: &TowerSource, limits: Limits) -> Result<Tower> {
    match (&source.name, &source.file) {
        (Some(name), None) if name == "cantor-shift" => {
            let depth = source.depth.ok_or_else(|| {
                Error::InvalidInput("built-in towers need --depth".into())
            })?;
            cantor_shift_example(depth, limits)
        }
        (Some(name), None) => Err(Error::InvalidInput(format!(
            "unknown built-in tower '{name}' (try 'cantor-shift' or --file)"
        ))),
        (None, Some(path)) => parse::parse_tower(&fs::read_to_string(path)?),
        _ => Err(Error::InvalidInput(
            "give exactly one of a built-in tower name or --file".into(),
        )),
    }
}

fn load_pairs(spec: &str, tower: &Tower, depth: usize) -> Result<BisimPresentation> {
    match spec {
        "dense-identity" => Ok(BisimPresentation::DenseIdentity),
        "complement" => {
            let mut pairs = Vec::new();
            for w in all_words(depth) {
                let comp: String = w
                    .chars()
                    .map(|c| if c == '0' { '1' } else { '0' })
                    .collect();
                pairs.push((
                    eventually_constant_thread(tower, '0', &w, depth)?,
                    eventually_constant_thread(tower, '1', &comp, depth)?,
                ));
            }
            Ok(BisimPresentation::ThreadPairs(pairs))
        }
        "zeros" => {
            let zeros = eventually_constant_thread(tower, '0', "", depth)?;
            Ok(BisimPresentation::ThreadPairs(vec![(
                zeros.clone(),
                zeros,
            )]))
        }
        path => {
            let raw = parse::parse_thread_pairs(&fs::read_to_string(PathBuf::from(path))?)?;
            let mut pairs = Vec::new();
            for (l, r) in raw {
                pairs.push((
                    Thread::from_components(tower, l)?,
                    Thread::from_components(tower, r)?,
                ));
            }
            Ok(BisimPresentation::ThreadPairs(pairs))
        }
    }
}

fn all_words(n: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|w| [format!("{w}0"), format!("{w}1")])
            .collect();
    }
    out
}

fn level_verdict_lines(out: &mut String, verdicts: &[LevelVerdict], format: Format) {
    for lv in verdicts {
        match format {
            Format::Machine => {
                let mut inner = String::new();
                nbisim_lines(&mut inner, &format!("level.{}.", lv.level), &lv.verdict, format);
                out.push_str(&inner);
            }
            Format::Text => {
                let _ = write!(out, "level {}: ", lv.level);
                nbisim_lines(out, "", &lv.verdict, format);
            }
        }
    }
}

fn run_tower(cmd: TowerCmd, format: Format, limits: Limits) -> Result<(i32, String)> {
    match cmd {
        TowerCmd::Validate(source) => {
            let tower = load_tower(&source, limits)?;
            let verdict = tower.validate();
            let mut out = String::new();
            match format {
                Format::Machine => {
                    let _ = writeln!(out, "valid={}", verdict.valid);
                    if let Some((level, reason)) = &verdict.first_failure {
                        let _ = writeln!(out, "failure.level={level}");
                        let _ = writeln!(out, "failure.reason={reason}");
                    }
                }
                Format::Text => {
                    if verdict.valid {
                        let _ = writeln!(out, "tower is valid to depth {}", tower.depth());
                    } else {
                        let (level, reason) = verdict.first_failure.as_ref().expect("failure");
                        let _ = writeln!(out, "invalid at level {level}: {reason}");
                    }
                }
            }
            Ok((if verdict.valid { 0 } else { 1 }, out))
        }
        TowerCmd::Closure {
            source,
            pairs,
            level,
        } => {
            let tower = load_tower(&source, limits)?;
            let b = load_pairs(&pairs, &tower, tower.depth())?;
            let rel = closure_approx(&b, &tower, &tower, level)?;
            let out = match format {
                Format::Machine => machine_relation(&rel),
                Format::Text => text_relation(&rel),
            };
            Ok((0, out))
        }
        TowerCmd::Probe { source, pairs } => {
            let tower = load_tower(&source, limits)?;
            let depth = source.depth.unwrap_or(tower.depth()).min(tower.depth());
            let b = load_pairs(&pairs, &tower, depth)?;
            let report = closure_theorem_probe(&b, &tower, &tower, depth, limits)?;
            let mut out = String::new();
            level_verdict_lines(&mut out, &report.levels, format);
            if format == Format::Machine {
                let _ = writeln!(out, "all_pass={}", report.all_pass());
            } else {
                let _ = writeln!(
                    out,
                    "closure probe {} at all {} levels",
                    if report.all_pass() { "passes" } else { "FAILS" },
                    report.levels.len()
                );
            }
            Ok((if report.all_pass() { 0 } else { 1 }, out))
        }
        TowerCmd::Check { source, levels } => {
            let tower = load_tower(&source, limits)?;
            let raw = parse::parse_level_relation_pairs(&fs::read_to_string(&levels)?)?;
            let mut rels = Vec::new();
            for (n, pairs) in raw.iter().enumerate() {
                rels.push(Relation::new(
                    tower.level(n)?.carrier().clone(),
                    tower.level(n)?.carrier().clone(),
                    pairs.iter().cloned(),
                )?);
            }
            let rel = LevelRelation::new(&tower, &tower, rels)?;
            let depth = source.depth.unwrap_or(rel.depth()).min(rel.depth());
            let verdicts = check_nbisim_to_depth(&rel, &tower, &tower, depth, limits)?;
            let all = verdicts.iter().all(|lv| lv.verdict.holds);
            let mut out = String::new();
            level_verdict_lines(&mut out, &verdicts, format);
            if format == Format::Machine {
                let _ = writeln!(out, "all_pass={all}");
            }
            Ok((if all { 0 } else { 1 }, out))
        }
    }
}
