use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use ebmc::dynamics::{enumerate_pne, DEFAULT_ENUMERATION_CAP};
use ebmc::experiment::{
    run_plan, verify_counterexamples, verify_theory, AlgorithmSpec, ExperimentPlan,
    InstanceSource, TimeLimits, TheoryOptions,
};
use ebmc::instance_io::{self, GenParams};
use ebmc::solver;
use ebmc::UtilityKind;

#[derive(Parser)]
#[command(name = "ebmc", version, about = "Equilibria of county AIS inspection games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it as JSON.
    Generate(GenerateArgs),
    /// Run algorithms over instances and write a results CSV.
    Run(RunArgs),
    /// Exhaustively check the bundled no-equilibrium examples.
    VerifyCounterexamples,
    /// Check the potential-game identities on an instance.
    VerifyTheory(TheoryArgs),
    /// List every pure equilibrium of a small instance.
    EnumeratePne(EnumerateArgs),
    /// Solve the social model of an instance.
    Solve(SolveArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    counties: usize,
    #[arg(long)]
    lakes: usize,
    #[arg(long, default_value_t = 1)]
    types: usize,
    /// Budget as a fraction of each county's infested lakes.
    #[arg(long)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of ordered lake pairs deleted (default 0.2 for one type, 0.5 otherwise).
    #[arg(long)]
    deletion: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
    traffic: Option<Vec<i64>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Instance files, or `builtin:fig2`, `builtin:k1ce`, `builtin:k2ce`.
    #[arg(required = true)]
    instances: Vec<String>,
    /// Comma-separated algorithm labels, e.g. `BRS(0),BRP(0),ZR(pne2)`.
    #[arg(long, value_delimiter = ',', default_value = "BRS(0),BRP(0),ZR(0)")]
    algorithms: Vec<AlgorithmSpec>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seconds; `inf` disables the limit.
    #[arg(long, default_value_t = 1800.0)]
    time_limit_sb: f64,
    #[arg(long, default_value_t = 300.0)]
    time_limit_sbw: f64,
    #[arg(long, default_value_t = 1800.0)]
    time_limit_zr: f64,
    /// Limit for the bounded social model inside BR-plus.
    #[arg(long, default_value_t = 300.0)]
    time_limit_bounded: f64,
    #[arg(long, default_value_t = 60)]
    t_max: usize,
    #[arg(long, default_value_t = 3)]
    init_max: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Cut every deviating county per separation round in ZR.
    #[arg(long)]
    zr_all_cuts: bool,
    /// Results CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TheoryArgs {
    instance: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    profiles: usize,
    #[arg(long, default_value_t = 100)]
    deviations: usize,
    #[arg(long, default_value_t = 60.0)]
    time_limit_sb: f64,
}

#[derive(Args)]
struct EnumerateArgs {
    instance: String,
    #[arg(long, default_value = "selfish")]
    utility: UtilityKind,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u128,
}

#[derive(Args)]
struct SolveArgs {
    instance: String,
    #[arg(long, default_value_t = 1800.0)]
    time_limit_sb: f64,
}

fn limit(secs: f64) -> Option<Duration> {
    Duration::try_from_secs_f64(secs).ok()
}

fn cmd_generate(a: GenerateArgs) -> ebmc::Result<ExitCode> {
    let mut p = GenParams::new(a.counties, a.lakes, a.types, a.ratio, a.seed);
    if let Some(d) = a.deletion {
        p.edge_deletion_ratio = d;
    }
    if let Some(t) = a.traffic {
        p.traffic_range = (t[0], t[1]);
    }
    let inst = instance_io::generate(&p)?;
    instance_io::save_instance(&inst, &a.out)?;
    let budgets: Vec<String> = inst.counties().iter().map(|c| c.budget.to_string()).collect();
    println!(
        "{}: {} lakes ({} infested), {} arcs, budgets [{}]",
        a.out.display(),
        inst.num_lakes(),
        inst.infested_lakes().count(),
        inst.num_arcs(),
        budgets.join(", ")
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(a: RunArgs) -> ebmc::Result<ExitCode> {
    let plan = ExperimentPlan {
        instances: a.instances.iter().map(|s| InstanceSource::parse(s)).collect(),
        algorithms: a.algorithms,
        limits: TimeLimits {
            sb: limit(a.time_limit_sb),
            sbw: limit(a.time_limit_sbw),
            zr: limit(a.time_limit_zr),
            bounded: limit(a.time_limit_bounded),
        },
        t_max: a.t_max,
        init_max: a.init_max,
        seed: a.seed,
        zr_cut_all_deviations: a.zr_all_cuts,
    };
    let results = run_plan(&plan, a.workers)?;
    match &a.out {
        Some(path) => results.write_csv(BufWriter::new(File::create(path)?))?,
        None => results.write_csv(io::stdout().lock())?,
    }
    let mut summary: Box<dyn Write> = if a.out.is_some() {
        Box::new(io::stdout())
    } else {
        Box::new(io::stderr())
    };
    for e in &results.og {
        match e.og {
            Some(v) => writeln!(summary, "OG {}: {:.4}", e.instance, v)?,
            None => writeln!(summary, "OG {}: n/a (ZR verified no equilibrium)", e.instance)?,
        }
    }
    let failed = results.rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        writeln!(summary, "{} row(s) reported errors", failed)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_counterexamples() -> ExitCode {
    let reports = verify_counterexamples();
    let mut ok = true;
    for r in &reports {
        print!("{}", r);
        for msg in r.failures() {
            eprintln!("violated: {}", msg);
            ok = false;
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cmd_verify_theory(a: TheoryArgs) -> ebmc::Result<ExitCode> {
    let inst = InstanceSource::parse(&a.instance).load()?;
    let opts = TheoryOptions {
        seed: a.seed,
        profiles: a.profiles,
        deviations: a.deviations,
        sb_time_limit: limit(a.time_limit_sb),
    };
    let report = verify_theory(&inst, &opts)?;
    print!("{}", report);
    if let Some(fail) = report.first_failure() {
        eprintln!("failed: {}", fail.name);
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_enumerate(a: EnumerateArgs) -> ebmc::Result<ExitCode> {
    let inst = InstanceSource::parse(&a.instance).load()?;
    let list = enumerate_pne(&inst, a.utility, a.cap)?;
    println!("{} {} equilibria", list.len(), a.utility);
    for (x, v) in list {
        println!("{}\tphi={}", x, v);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(a: SolveArgs) -> ebmc::Result<ExitCode> {
    let inst = InstanceSource::parse(&a.instance).load()?;
    let mut model = solver::build_sb(&inst);
    model.time_limit = limit(a.time_limit_sb);
    let res = solver::solve(&model)?;
    match res.profile {
        Some(x) => println!("{} phi={} profile={}", res.status.as_str(), res.objective, x),
        None => println!("{}", res.status.as_str()),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a),
        Command::VerifyCounterexamples => Ok(cmd_verify_counterexamples()),
        Command::VerifyTheory(a) => cmd_verify_theory(a),
        Command::EnumeratePne(a) => cmd_enumerate(a),
        Command::Solve(a) => cmd_solve(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
