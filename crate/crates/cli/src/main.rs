//! Command-line surface: parse instances, run solvers and verifiers,
//! generate seeded random instances, and cross-check everything against the
//! brute-force oracle.
//!
//! Exit codes: 0 = found / holds, 1 = provably none exists / fails,
//! 2 = input or usage error, 3 = enumeration budget exceeded.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use popmatch::gen::{generate, FlavorConfig, GeneratorConfig};
use popmatch::instance::{
    parse_instance, parse_matching, serialize_instance, serialize_matching, Error,
    MarketInstance, Matching, ScenarioSet, ScenarioWitness, Side, Verdict, Witness,
};
use popmatch::one_sided::{
    aggregate_to_partial_order, certainly_popular_ha, k_robust_popular_ha, popular_ha, verify_ha,
    HaCriterion,
};
use popmatch::oracle::{brute_check, brute_exists, EnumerationBudget, Property};
use popmatch::two_sided::{
    certainly_dominant, certainly_stable, duplicate_instance, gale_shapley, robust_to_uncertain,
    solve_robust_two_sided, verify_two_sided, RobustTarget, TwoSidedCriterion,
};

#[derive(Parser)]
#[command(name = "popmatch", version, about = "Popular, dominant and stable matchings under preference uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance for the given problem and write the matching.
    Solve(SolveArgs),
    /// Verify a matching against a criterion.
    Verify(VerifyArgs),
    /// Generate a seeded random instance.
    Gen(GenArgs),
    /// Decide a property by exhaustive enumeration.
    Oracle(OracleArgs),
    /// Emit a derived instance: duplicated, robust-to-uncertain, or the
    /// two-layer partial-order reduction.
    Convert(ConvertArgs),
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long)]
    problem: Problem,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Debug)]
enum Problem {
    Stable,
    CertainlyStable,
    CertainlyDominant,
    KRobustStable,
    KRobustDominant,
    PopularHa,
    CertainlyPopularHa,
    KRobustPopularHa,
    // Recognized so the user gets pointed at the oracle instead of a
    // confusing parse error; their existence versions are NP-hard.
    CertainlyPopular,
    SumPopular,
    SumDominant,
    KRobustPopular,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    matching: PathBuf,
    #[arg(long)]
    criterion: Criterion,
}

#[derive(Clone, Copy, ValueEnum, Debug)]
enum Criterion {
    Popular,
    Dominant,
    SumPopular,
    SumDominant,
    CertainlyPopularHa,
    SumPopularHa,
    KRobustPopularHa,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "two-sided")]
    model: ModelArg,
    #[arg(long)]
    na: usize,
    #[arg(long)]
    nb: usize,
    /// Inclusive list-length range, e.g. `2:4`.
    #[arg(long, default_value = "1:4", value_parser = parse_range)]
    list_len: (u64, u64),
    /// layers:<count>, independent:<set-size>, or robust:<k>.
    #[arg(long, default_value = "layers:1", value_parser = parse_flavor)]
    flavor: FlavorConfig,
    /// Inclusive capacity range for houses, e.g. `1:2`.
    #[arg(long, default_value = "1:1", value_parser = parse_range)]
    capacity: (u64, u64),
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Debug)]
enum ModelArg {
    TwoSided,
    Ha,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long)]
    property: PropertyArg,
    /// Check this matching file instead of searching for one.
    #[arg(long, conflicts_with = "exists")]
    check: Option<PathBuf>,
    /// Search for a matching with the property.
    #[arg(long)]
    exists: bool,
    #[arg(long, default_value_t = 1_000_000)]
    budget_matchings: u64,
    #[arg(long, default_value_t = 10_000)]
    budget_profiles: u64,
}

#[derive(Clone, Copy, ValueEnum, Debug)]
enum PropertyArg {
    Stable,
    Popular,
    Dominant,
    CertainlyStable,
    CertainlyPopular,
    CertainlyDominant,
    SumPopular,
    SumDominant,
    KRobustStable,
    KRobustPopular,
    KRobustDominant,
}

impl From<PropertyArg> for Property {
    fn from(p: PropertyArg) -> Property {
        match p {
            PropertyArg::Stable => Property::Stable,
            PropertyArg::Popular => Property::Popular,
            PropertyArg::Dominant => Property::Dominant,
            PropertyArg::CertainlyStable => Property::CertainlyStable,
            PropertyArg::CertainlyPopular => Property::CertainlyPopular,
            PropertyArg::CertainlyDominant => Property::CertainlyDominant,
            PropertyArg::SumPopular => Property::SumPopular,
            PropertyArg::SumDominant => Property::SumDominant,
            PropertyArg::KRobustStable => Property::KRobustStable,
            PropertyArg::KRobustPopular => Property::KRobustPopular,
            PropertyArg::KRobustDominant => Property::KRobustDominant,
        }
    }
}

#[derive(Args)]
struct ConvertArgs {
    instance: PathBuf,
    #[arg(long)]
    to: ConvertTarget,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Debug)]
enum ConvertTarget {
    Duplicated,
    Uncertain,
    PartialOrder,
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected `lo:hi`, got `{s}`"))?;
    let lo = lo.parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi = hi.parse().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((lo, hi))
}

fn parse_flavor(s: &str) -> Result<FlavorConfig, String> {
    let (name, arg) = s
        .split_once(':')
        .ok_or_else(|| format!("expected `layers:K`, `independent:S` or `robust:K`, got `{s}`"))?;
    let n: u64 = arg.parse().map_err(|e| format!("bad flavor argument: {e}"))?;
    match name {
        "layers" => Ok(FlavorConfig::Layers { count: n as usize }),
        "independent" => Ok(FlavorConfig::Independent {
            set_size: n as usize,
        }),
        "robust" => Ok(FlavorConfig::Robust { k: n as u32 }),
        other => Err(format!("unknown flavor `{other}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Verify(args) => run_verify(args),
        Command::Gen(args) => run_gen(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Convert(args) => run_convert(args),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e.downcast_ref::<Error>() {
                Some(Error::BudgetExceeded(_)) => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

type AnyError = Box<dyn std::error::Error>;

fn load_instance(path: &PathBuf) -> Result<MarketInstance, AnyError> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_instance(&text)?)
}

fn load_matching(path: &PathBuf, inst: &MarketInstance) -> Result<Matching, AnyError> {
    let text = std::fs::read_to_string(path)?;
    let m = parse_matching(&text)?;
    m.validate(inst)?;
    Ok(m)
}

fn emit(out: &Option<PathBuf>, payload: &str) -> Result<(), AnyError> {
    match out {
        Some(path) => std::fs::write(path, payload)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(payload.as_bytes())?;
        }
    }
    Ok(())
}

fn run_solve(args: SolveArgs) -> Result<u8, AnyError> {
    let inst = load_instance(&args.instance)?;
    let solved: Option<Matching> = match args.problem {
        Problem::Stable => {
            let Some(profile) = inst.single_profile() else {
                return Err(Error::Unsupported(
                    "`stable` needs a deterministic instance; pick a certainly-* problem".into(),
                )
                .into());
            };
            Some(gale_shapley(&inst, &profile)?)
        }
        Problem::CertainlyStable => certainly_stable(&require_independent(&inst)?)?,
        Problem::CertainlyDominant => certainly_dominant(&require_independent(&inst)?)?,
        Problem::KRobustStable => solve_robust_two_sided(&inst, RobustTarget::Stable)?,
        Problem::KRobustDominant => solve_robust_two_sided(&inst, RobustTarget::Dominant)?,
        Problem::PopularHa => {
            let Some(profile) = inst.single_profile() else {
                return Err(Error::Unsupported(
                    "`popular-ha` needs a deterministic instance; use certainly-popular-ha".into(),
                )
                .into());
            };
            popular_ha(&inst, &profile)?
        }
        Problem::CertainlyPopularHa => certainly_popular_ha(&inst)?,
        Problem::KRobustPopularHa => k_robust_popular_ha(&inst)?,
        Problem::CertainlyPopular
        | Problem::SumPopular
        | Problem::SumDominant
        | Problem::KRobustPopular => {
            return Err(Error::Unsupported(format!(
                "solving `{:?}` is NP-hard in two-sided markets; use `popmatch oracle` at small scale",
                args.problem
            ))
            .into());
        }
    };
    match solved {
        Some(m) => {
            emit(&args.out, &serialize_matching(&m))?;
            eprintln!("found a matching with {} pairs", m.len());
            Ok(0)
        }
        None => {
            eprintln!("no such matching exists");
            Ok(1)
        }
    }
}

/// Layered scenarios gate the certainly-* solvers (the correlated problem is
/// a different, harder one); a single layer converts losslessly.
fn require_independent(inst: &MarketInstance) -> Result<MarketInstance, AnyError> {
    match inst.scenarios() {
        ScenarioSet::Independent(_) => Ok(inst.clone()),
        ScenarioSet::Layers(_) if inst.single_profile().is_some() => Ok(inst.to_independent()?),
        ScenarioSet::Layers(_) => Err(Error::Unsupported(
            "certainly-stable/dominant over correlated layers is NP-hard; \
             use independent list sets, or `popmatch oracle` at small scale"
                .into(),
        )
        .into()),
        ScenarioSet::Robust { .. } => Err(Error::Unsupported(
            "use k-robust-stable / k-robust-dominant for robust instances".into(),
        )
        .into()),
    }
}

fn verdict_json(v: &Verdict) -> String {
    let witness = match &v.witness {
        None => serde_json::Value::Null,
        Some(Witness::Edge((a, b))) => serde_json::json!({ "edge": [a, b] }),
        Some(Witness::Matching(m)) => {
            let pairs: Vec<[&String; 2]> = m.pairs().map(|(a, b)| [a, b]).collect();
            serde_json::json!({ "matching": pairs })
        }
    };
    let scenario = match &v.scenario {
        None => serde_json::Value::Null,
        Some(ScenarioWitness::Layer(i)) => serde_json::json!({ "layer": i }),
        Some(ScenarioWitness::Profile(p)) => serde_json::json!({ "profile": p.0 }),
    };
    let value = serde_json::json!({
        "holds": v.holds,
        "witness": witness,
        "scenario": scenario,
    });
    let mut s = serde_json::to_string_pretty(&value).expect("verdict serializes");
    s.push('\n');
    s
}

fn run_verify(args: VerifyArgs) -> Result<u8, AnyError> {
    let inst = load_instance(&args.instance)?;
    let m = load_matching(&args.matching, &inst)?;
    let verdict = match args.criterion {
        Criterion::Popular => verify_two_sided(&inst, &m, TwoSidedCriterion::Popular, false)?,
        Criterion::Dominant => verify_two_sided(&inst, &m, TwoSidedCriterion::Dominant, false)?,
        Criterion::SumPopular => verify_two_sided(&inst, &m, TwoSidedCriterion::Popular, true)?,
        Criterion::SumDominant => verify_two_sided(&inst, &m, TwoSidedCriterion::Dominant, true)?,
        Criterion::CertainlyPopularHa => verify_ha(&inst, &m, HaCriterion::CertainlyPopular)?,
        Criterion::SumPopularHa => verify_ha(&inst, &m, HaCriterion::SumPopular)?,
        Criterion::KRobustPopularHa => verify_ha(&inst, &m, HaCriterion::KRobustPopular)?,
    };
    print!("{}", verdict_json(&verdict));
    if verdict.holds {
        eprintln!("criterion holds");
        Ok(0)
    } else {
        eprintln!("criterion fails; witness printed");
        Ok(1)
    }
}

fn run_gen(args: GenArgs) -> Result<u8, AnyError> {
    let cfg = GeneratorConfig {
        seed: args.seed,
        model: match args.model {
            ModelArg::TwoSided => Side::TwoSided,
            ModelArg::Ha => Side::Ha,
        },
        n_a: args.na,
        n_b: args.nb,
        list_len: (args.list_len.0 as usize, args.list_len.1 as usize),
        flavor: args.flavor,
        capacity: (args.capacity.0 as u32, args.capacity.1 as u32),
    };
    let inst = generate(&cfg)?;
    emit(&args.out, &serialize_instance(&inst))?;
    eprintln!(
        "generated {} + {} agents, {} edges",
        inst.agents_a().len(),
        inst.agents_b().len(),
        inst.edges().len()
    );
    Ok(0)
}

fn run_oracle(args: OracleArgs) -> Result<u8, AnyError> {
    let inst = load_instance(&args.instance)?;
    let budget = EnumerationBudget {
        max_matchings: args.budget_matchings,
        max_profiles: args.budget_profiles,
    };
    let property: Property = args.property.into();
    if let Some(path) = &args.check {
        let m = load_matching(path, &inst)?;
        let verdict = brute_check(&inst, &m, property, &budget)?;
        print!("{}", verdict_json(&verdict));
        return Ok(if verdict.holds { 0 } else { 1 });
    }
    if !args.exists {
        return Err(Error::Unsupported("pass either --check <matching> or --exists".into()).into());
    }
    match brute_exists(&inst, property, &budget)? {
        Some(m) => {
            print!("{}", serialize_matching(&m));
            eprintln!("found a matching with {} pairs", m.len());
            Ok(0)
        }
        None => {
            eprintln!("no matching has the property");
            Ok(1)
        }
    }
}

fn run_convert(args: ConvertArgs) -> Result<u8, AnyError> {
    let inst = load_instance(&args.instance)?;
    let payload = match args.to {
        ConvertTarget::Duplicated => {
            let dup = duplicate_instance(&inst)?;
            let lists = |side: &std::collections::BTreeMap<String, Vec<Vec<popmatch::two_sided::EdgeCopy>>>| {
                side.iter()
                    .map(|(u, ls)| {
                        (
                            u.clone(),
                            ls.iter()
                                .map(|l| l.iter().map(|c| c.to_string()).collect::<Vec<_>>())
                                .collect::<Vec<_>>(),
                        )
                    })
                    .collect::<std::collections::BTreeMap<_, _>>()
            };
            let value = serde_json::json!({
                "agents_a": inst.agents_a(),
                "agents_b": inst.agents_b(),
                "lists_a": lists(&dup.lists_a),
                "lists_b": lists(&dup.lists_b),
            });
            let mut s = serde_json::to_string_pretty(&value)?;
            s.push('\n');
            s
        }
        ConvertTarget::Uncertain => serialize_instance(&robust_to_uncertain(&inst)?),
        ConvertTarget::PartialOrder => {
            let po = aggregate_to_partial_order(&inst)?;
            let mut s = serde_json::to_string_pretty(&serde_json::to_value(&po)?)?;
            s.push('\n');
            s
        }
    };
    emit(&args.out, &payload)?;
    Ok(0)
}
