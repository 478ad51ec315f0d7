use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use subcount::audit::{audit, AuditVerdict, Protocol};
use subcount::criad::{implied_epsilon, objective, select_params, CriadOptions, ParamSearch, ParamTriple};
use subcount::data::{generate_synthetic, save_transactions, Shape, SyntheticSpec};
use subcount::experiment::{param_study, run_experiment, write_records, write_summary, DataSource, ExperimentConfig};
use subcount::{CategoryView, PiDistribution};

#[derive(Parser)]
#[command(name = "subcount", version, about = "Subset counting under local differential privacy")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic transaction file.
    Gen(GenArgs),
    /// Run an experiment described by a config file.
    Run(RunArgs),
    /// Choose CRIAD parameters (m, s, g).
    SelectParams(SelectArgs),
    /// Exact privacy audit on a small category.
    Audit(AuditArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Config file; only its synthetic dataset keys are used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 2000)]
    domain_size: u32,
    /// uniform | zipf | zipf:<a>
    #[arg(long, default_value = "zipf:1.2")]
    shape: String,
    #[arg(long, default_value_t = 8.0)]
    mean_set_size: f64,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Record CSV; the summary goes next to it unless the config names one.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    /// Experiment config naming the dataset and category. Without it the
    /// count distribution is a point mass at `--t`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epsilon: f64,
    /// Category size (without --config).
    #[arg(long)]
    d: Option<usize>,
    /// Number of users (without --config).
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Ones count of every user (without --config).
    #[arg(long, default_value_t = 0)]
    t: usize,
    /// Fix the sample count.
    #[arg(long)]
    s: Option<usize>,
    /// Fix the group count.
    #[arg(long)]
    g: Option<usize>,
    #[arg(long, default_value_t = 64)]
    s_max: usize,
    /// Use the exact count distribution instead of the Square Wave prelude.
    #[arg(long)]
    exact_pi: bool,
    /// Repeat the prelude with distinct seeds and tabulate the choices.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the choice table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AuditProtocol {
    Cri,
    Criad,
    Rr,
}

#[derive(Args)]
struct AuditArgs {
    /// Protocol to audit; without it a built-in suite runs.
    #[arg(long, value_enum)]
    protocol: Option<AuditProtocol>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    s: usize,
    #[arg(long, default_value_t = 1)]
    g: usize,
    /// Flag budget for CRI.
    #[arg(long, default_value_t = 1.0)]
    epsilon_prime: f64,
    /// Budget for RR.
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    partition_seed: u64,
    /// Write the verdict table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit code 2 for anything wrong with the request, 1 for failures while
/// running it.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

type CliResult = Result<ExitCode, Failure>;

fn config_err<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn runtime_err<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a),
        Command::SelectParams(a) => select(a),
        Command::Audit(a) => audit_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(runtime_err)
}

fn gen(a: GenArgs) -> CliResult {
    let mut spec = match &a.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path).map_err(config_err)?;
            match cfg.source {
                DataSource::Synthetic(spec) => spec,
                DataSource::File { .. } => {
                    return Err(config_err(anyhow!("{} does not describe a synthetic dataset", path.display())))
                }
            }
        }
        None => SyntheticSpec {
            n: a.n,
            domain_size: a.domain_size,
            shape: a.shape.parse::<Shape>().map_err(config_err)?,
            mean_set_size: a.mean_set_size,
            seed: 0,
        },
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let ds = generate_synthetic(&spec).map_err(config_err)?;
    save_transactions(&ds, &a.out).map_err(runtime_err)?;
    println!("wrote {} users over {} items to {}", ds.len(), spec.domain_size, a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("records");
    out.with_file_name(format!("{stem}_summary.csv"))
}

fn load_view(cfg: &ExperimentConfig) -> Result<CategoryView, Failure> {
    let ds = cfg.source.load().map_err(config_err)?;
    cfg.category.validate(ds.domain()).map_err(config_err)?;
    Ok(CategoryView::new(&ds, &cfg.category))
}

fn run(a: RunArgs) -> CliResult {
    let mut cfg = ExperimentConfig::load(&a.config).map_err(config_err)?;
    if let Some(seed) = a.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = a.out {
        cfg.output = Some(out);
    }
    if cfg.summary.is_none() {
        cfg.summary = cfg.output.as_deref().map(summary_path);
    }
    let view = load_view(&cfg)?;
    let result = run_experiment(&cfg, &view).map_err(runtime_err)?;
    if let Some(p) = &cfg.output {
        let mut w = create(p)?;
        write_records(&mut w, &result.records)
            .and_then(|_| w.flush())
            .map_err(runtime_err)?;
    }
    if let Some(p) = &cfg.summary {
        let mut w = create(p)?;
        write_summary(&mut w, &result.summary)
            .and_then(|_| w.flush())
            .map_err(runtime_err)?;
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    write_summary(&mut out, &result.summary).map_err(runtime_err)?;
    for (m, e) in &result.skipped {
        eprintln!("skipped {m} at epsilon {e}: budget below the sampling cost");
    }
    Ok(ExitCode::SUCCESS)
}

fn select(a: SelectArgs) -> CliResult {
    let search = ParamSearch {
        s_max: a.s_max,
        g: a.g,
        s: a.s,
    };
    if !(a.epsilon > 0.0) {
        return Err(config_err(anyhow!("epsilon must be positive")));
    }
    let (table, d, n, pi): (Vec<(ParamTriple, usize)>, usize, usize, Option<PiDistribution>) = match &a.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path).map_err(config_err)?;
            let view = load_view(&cfg)?;
            let opts = CriadOptions {
                search,
                exact_pi: a.exact_pi,
                ..cfg.criad.clone()
            };
            let seed = a.seed.unwrap_or(cfg.master_seed);
            let table = param_study(&view, a.epsilon, a.repeats, seed, &opts).map_err(config_err)?;
            let pi = view.pi().ok();
            (table, view.d(), view.n(), pi)
        }
        None => {
            let d = a.d.ok_or_else(|| config_err(anyhow!("--d is required without --config")))?;
            let pi = PiDistribution::point_mass(d, a.t).map_err(config_err)?;
            let p = select_params(d, a.epsilon, &pi, a.n, &search).map_err(config_err)?;
            (vec![(p, 1)], d, a.n, Some(pi))
        }
    };
    let mut lines = vec!["m,s,g,count,implied_epsilon,objective".to_string()];
    for (p, count) in &table {
        let eps = implied_epsilon(p, d).map_err(runtime_err)?;
        let obj = match &pi {
            Some(pi) => objective(p, d, n, pi).map_err(runtime_err)?.to_string(),
            None => String::new(),
        };
        lines.push(format!("{},{},{},{count},{eps},{obj}", p.m, p.s, p.g));
    }
    let text = lines.join("\n") + "\n";
    print!("{text}");
    if let Some(path) = &a.out {
        let mut w = create(path)?;
        w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(runtime_err)?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Configurations audited when no protocol is named.
fn default_suite() -> Vec<(Protocol, usize)> {
    let criad = |m, s, g| Protocol::Criad {
        params: ParamTriple { m, s, g },
        partition_seed: 0,
    };
    vec![
        (criad(1, 1, 1), 4),
        (criad(2, 2, 1), 8),
        (criad(1, 1, 2), 6),
        (criad(1, 1, 3), 9),
        (Protocol::Cri { epsilon_prime: 1.0 }, 5),
        (Protocol::RrIndex { epsilon: 1.0 }, 6),
    ]
}

fn verdict_line(v: &AuditVerdict) -> String {
    format!(
        "{},{},{},{},{},{}",
        v.protocol.name(),
        v.protocol.describe(),
        v.d,
        v.claimed_epsilon,
        v.max_log_ratio,
        if v.pass { "pass" } else { "fail" }
    )
}

fn audit_cmd(a: AuditArgs) -> CliResult {
    let jobs = match a.protocol {
        None => default_suite(),
        Some(p) => {
            let d = a.d.ok_or_else(|| config_err(anyhow!("--d is required with --protocol")))?;
            let proto = match p {
                AuditProtocol::Cri => Protocol::Cri {
                    epsilon_prime: a.epsilon_prime,
                },
                AuditProtocol::Criad => Protocol::Criad {
                    params: ParamTriple { m: a.m, s: a.s, g: a.g },
                    partition_seed: a.partition_seed,
                },
                AuditProtocol::Rr => Protocol::RrIndex { epsilon: a.epsilon },
            };
            vec![(proto, d)]
        }
    };
    let mut lines = vec!["protocol,params,d,claimed_epsilon,max_log_ratio,verdict".to_string()];
    let mut all_pass = true;
    for (proto, d) in &jobs {
        let v = audit(proto, *d).map_err(config_err)?;
        all_pass &= v.pass;
        lines.push(verdict_line(&v));
    }
    let text = lines.join("\n") + "\n";
    print!("{text}");
    if let Some(path) = &a.out {
        let mut w = create(path)?;
        w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(runtime_err)?;
    }
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
