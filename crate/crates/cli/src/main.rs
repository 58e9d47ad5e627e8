//! Command-line front end: generate problem instances, run single solves
//! with per-iteration trace output, and run benchmark manifests that
//! aggregate iteration counts across replicates.
//!
//! Exit codes: 0 success, 2 nonconvergence within the iteration cap,
//! 3 configuration error, 4 I/O or input-file error.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use scfw_core::barrier::BarrierParams;
use scfw_core::instances::{canonical_diag_fstar, gen_diag, gen_rnd, load_instance, save_instance};
use scfw_core::oracle::{ExactOracle, LanczosOracle, Oracle, OracleConfig};
use scfw_core::sampling::dump_state;
use scfw_core::solver::{solve, trace_to_csv, Mode, SolveResult, SolverConfig, StopReason};
use scfw_core::{Error, Instance};

const EXIT_NONCONVERGENCE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "scfw", version, about = "Matrix-free Frank-Wolfe solver for barrier objectives over the spectrahedron")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance file and print its checksum.
    Generate {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance and write trace/summary files.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1)]
        l: usize,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, default_value_t = 0.1)]
        pbar: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Matrix)]
        mode: ModeArg,
        /// Track the exact duality gap each iteration (small n only).
        #[arg(long)]
        diagnostics: bool,
        #[arg(long, default_value_t = 1_000_000)]
        max_iters: usize,
        /// Known optimal value; auto-detected for canonical diag instances.
        #[arg(long)]
        fstar: Option<f64>,
        /// Start from a random trace-normalized PSD matrix instead of I/n.
        #[arg(long)]
        random_init: bool,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        summary_out: Option<PathBuf>,
        /// Dump the final sampling-mode state (z, v) to this file.
        #[arg(long)]
        state_out: Option<PathBuf>,
    },
    /// Run a manifest of solves and emit an aggregated summary CSV.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        /// Summary CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Expand each manifest row into this many replicates with seeds
        /// seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        replicates: u64,
        /// Run the manifest rows in parallel.
        #[arg(long)]
        parallel: bool,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum KindArg {
    Diag,
    Rnd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    #[value(name = "approxI")]
    ApproxI,
    #[value(name = "approxII")]
    ApproxII,
    #[value(name = "exact")]
    Exact,
}

impl VariantArg {
    fn parse_manifest(s: &str) -> Option<Self> {
        match s {
            "approxI" => Some(Self::ApproxI),
            "approxII" => Some(Self::ApproxII),
            "exact" => Some(Self::Exact),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::ApproxI => "GFW-ApproxI",
            Self::ApproxII => "GFW-ApproxII",
            Self::Exact => "GFW-Exact",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Matrix,
    Sampling,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Matrix => Mode::Matrix,
            ModeArg::Sampling => Mode::Sampling,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems are configuration errors; keep clap's message.
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CONFIG)
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::NotPsd { .. }
        | Error::NotSymmetric { .. }
        | Error::NonpositiveTrace { .. } => EXIT_IO,
        Error::Config(_)
        | Error::CapExceeded { .. }
        | Error::DimensionMismatch { .. }
        | Error::DomainViolation(_) => EXIT_CONFIG,
        Error::EigNonconvergence | Error::MissingOptGap | Error::Internal(_) => 1,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Generate {
            kind,
            n,
            d,
            seed,
            out,
        } => cmd_generate(kind, n, d, seed, &out),
        Command::Solve {
            instance,
            variant,
            epsilon,
            l,
            p,
            pbar,
            seed,
            mode,
            diagnostics,
            max_iters,
            fstar,
            random_init,
            trace_out,
            summary_out,
            state_out,
        } => {
            let args = SolveArgs {
                instance,
                variant,
                epsilon,
                l,
                p,
                pbar,
                seed,
                mode,
                diagnostics,
                max_iters,
                fstar,
                random_init,
                trace_out,
                summary_out,
                state_out,
            };
            cmd_solve(&args)
        }
        Command::Bench {
            manifest,
            out,
            replicates,
            parallel,
        } => cmd_bench(&manifest, out.as_deref(), replicates, parallel),
    }
}

fn cmd_generate(kind: KindArg, n: usize, d: usize, seed: u64, out: &Path) -> Result<u8, Error> {
    let instance = match kind {
        KindArg::Diag => gen_diag(n, d)?,
        KindArg::Rnd => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            gen_rnd(n, d, &mut rng)?
        }
    };
    save_instance(&instance, out)?;
    let bytes = fs::read(out).map_err(|e| Error::Io {
        path: out.display().to_string(),
        source: e,
    })?;
    let digest = Sha256::digest(&bytes);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    println!(
        "wrote {} ({} bytes, sha256 {})",
        out.display(),
        bytes.len(),
        hex
    );
    Ok(0)
}

struct SolveArgs {
    instance: PathBuf,
    variant: VariantArg,
    epsilon: f64,
    l: usize,
    p: f64,
    pbar: f64,
    seed: u64,
    mode: ModeArg,
    diagnostics: bool,
    max_iters: usize,
    fstar: Option<f64>,
    random_init: bool,
    trace_out: Option<PathBuf>,
    summary_out: Option<PathBuf>,
    state_out: Option<PathBuf>,
}

fn build_config(args: &SolveArgs, instance: &Instance) -> SolverConfig {
    let mut config = match args.variant {
        VariantArg::ApproxI => SolverConfig::approx_i(args.epsilon, args.seed),
        VariantArg::ApproxII => SolverConfig::approx_ii(args.epsilon, args.seed),
        VariantArg::Exact => SolverConfig::exact(args.epsilon, args.seed),
    };
    config.l = args.l;
    config.p = args.p;
    config.p_bar = args.pbar;
    config.mode = args.mode.into();
    config.diagnostics = args.diagnostics;
    config.max_iters = args.max_iters;
    config.f_star = args.fstar.or_else(|| canonical_diag_fstar(instance));
    if args.random_init {
        config.init = scfw_core::solver::InitMode::RandomPsd;
    }
    config
}

fn build_oracle_for(variant: VariantArg, config: &SolverConfig) -> Box<dyn Oracle> {
    match variant {
        VariantArg::Exact => Box::new(ExactOracle {
            dense_cap: config.dense_cap,
        }),
        _ => Box::new(LanczosOracle {
            config: OracleConfig {
                c: config.c,
                dense_cap: config.dense_cap,
                ..OracleConfig::lanczos(config.p)
            },
        }),
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<u8, Error> {
    let instance = load_instance(&args.instance)?;
    let params = BarrierParams::sc_gmean(instance.d());
    let config = build_config(args, &instance);
    if args.random_init && config.f_star.is_none() {
        eprintln!(
            "warning: random initialization without a known optimum; \
             K_u uses the d log n bound, which assumes the scaled-identity start"
        );
    }
    let oracle = build_oracle_for(args.variant, &config);

    let result = solve(&instance, &params, &config, oracle.as_ref())?;

    if let Some(path) = &args.trace_out {
        write_file(path, &trace_to_csv(&result.trace))?;
    }
    if let Some(path) = &args.summary_out {
        let mut csv = String::from("K,stop_reason,seconds,K_u,seed\n");
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            result.iterations,
            result.stop.as_str(),
            result.seconds,
            result.bounds.k_u,
            args.seed
        ));
        write_file(path, &csv)?;
    }
    if let Some(path) = &args.state_out {
        dump_state(path, &result, &instance, args.seed)?;
    }

    print_summary(args, &result);
    Ok(match result.stop {
        StopReason::Converged => 0,
        StopReason::IterationCap => EXIT_NONCONVERGENCE,
    })
}

fn print_summary(args: &SolveArgs, result: &SolveResult) {
    println!(
        "{} K={} stop={} G_a={} delta_t={} K_u={:.4e} seconds={:.3}",
        args.variant.name(),
        result.iterations,
        result.stop.as_str(),
        result.final_g_approx,
        result.final_delta_t,
        result.bounds.k_u,
        result.seconds
    );
    if let Some(delta) = result.delta_final {
        println!("optimality gap Delta={delta}");
    }
}

struct ManifestRow {
    instance: PathBuf,
    variant: VariantArg,
    epsilon: f64,
    l: usize,
    p: f64,
    seed: u64,
    mode: ModeArg,
}

fn parse_manifest(path: &Path) -> Result<Vec<ManifestRow>, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut rows = Vec::new();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty manifest".into(),
    })?;
    if header.trim() != "instance,variant,epsilon,l,p,seed,mode" {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "bad manifest header `{}`; expected `instance,variant,epsilon,l,p,seed,mode`",
                header.trim()
            ),
        });
    }
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 7 fields, found {}", fields.len()),
            });
        }
        let parse_err = |what: &str, raw: &str| Error::Parse {
            line: lineno,
            msg: format!("bad {what} `{raw}`"),
        };
        rows.push(ManifestRow {
            instance: PathBuf::from(fields[0]),
            variant: VariantArg::parse_manifest(fields[1])
                .ok_or_else(|| parse_err("variant", fields[1]))?,
            epsilon: fields[2]
                .parse()
                .map_err(|_| parse_err("epsilon", fields[2]))?,
            l: fields[3].parse().map_err(|_| parse_err("l", fields[3]))?,
            p: fields[4].parse().map_err(|_| parse_err("p", fields[4]))?,
            seed: fields[5].parse().map_err(|_| parse_err("seed", fields[5]))?,
            mode: match fields[6] {
                "matrix" => ModeArg::Matrix,
                "sampling" => ModeArg::Sampling,
                other => return Err(parse_err("mode", other)),
            },
        });
    }
    Ok(rows)
}

struct RunOutcome {
    group: usize,
    iterations: usize,
    seconds: f64,
    k_u: f64,
    converged: bool,
}

fn cmd_bench(
    manifest: &Path,
    out: Option<&Path>,
    replicates: u64,
    parallel: bool,
) -> Result<u8, Error> {
    let rows = parse_manifest(manifest)?;

    // Load each referenced instance once.
    let mut instances: HashMap<PathBuf, Arc<Instance>> = HashMap::new();
    for row in &rows {
        if !instances.contains_key(&row.instance) {
            instances.insert(row.instance.clone(), Arc::new(load_instance(&row.instance)?));
        }
    }

    // Group key: (instance path, variant), in first-seen order.
    let mut groups: Vec<(PathBuf, VariantArg)> = Vec::new();
    let group_of = |path: &PathBuf, variant: VariantArg, groups: &mut Vec<_>| -> usize {
        if let Some(i) = groups
            .iter()
            .position(|(p, v): &(PathBuf, VariantArg)| p == path && *v == variant)
        {
            i
        } else {
            groups.push((path.clone(), variant));
            groups.len() - 1
        }
    };

    let mut runs: Vec<(usize, Arc<Instance>, SolveArgs)> = Vec::new();
    for row in &rows {
        let group = group_of(&row.instance, row.variant, &mut groups);
        for r in 0..replicates {
            runs.push((
                group,
                Arc::clone(&instances[&row.instance]),
                SolveArgs {
                    instance: row.instance.clone(),
                    variant: row.variant,
                    epsilon: row.epsilon,
                    l: row.l,
                    p: row.p,
                    pbar: 0.1,
                    seed: row.seed + r,
                    mode: row.mode,
                    diagnostics: false,
                    max_iters: 1_000_000,
                    fstar: None,
                    random_init: false,
                    trace_out: None,
                    summary_out: None,
                    state_out: None,
                },
            ));
        }
    }

    let execute = |(group, instance, args): &(usize, Arc<Instance>, SolveArgs)| -> Result<RunOutcome, Error> {
        let params = BarrierParams::sc_gmean(instance.d());
        let config = build_config(args, instance);
        let oracle = build_oracle_for(args.variant, &config);
        let result = solve(instance, &params, &config, oracle.as_ref())?;
        Ok(RunOutcome {
            group: *group,
            iterations: result.iterations,
            seconds: result.seconds,
            k_u: result.bounds.k_u,
            converged: result.stop == StopReason::Converged,
        })
    };

    let outcomes: Vec<RunOutcome> = if parallel {
        runs.par_iter().map(execute).collect::<Result<_, _>>()?
    } else {
        runs.iter().map(execute).collect::<Result<_, _>>()?
    };

    let mut csv = String::from("n,d,algorithm,avg_seconds,K_u,avg_K,std_K\n");
    let mut any_nonconverged = false;
    for (gi, (path, variant)) in groups.iter().enumerate() {
        let ks: Vec<f64> = outcomes
            .iter()
            .filter(|o| o.group == gi)
            .map(|o| o.iterations as f64)
            .collect();
        if ks.is_empty() {
            continue;
        }
        let of_group: Vec<&RunOutcome> = outcomes.iter().filter(|o| o.group == gi).collect();
        any_nonconverged |= of_group.iter().any(|o| !o.converged);
        let avg_k = ks.iter().sum::<f64>() / ks.len() as f64;
        let std_k = if ks.len() > 1 {
            (ks.iter().map(|k| (k - avg_k) * (k - avg_k)).sum::<f64>() / (ks.len() - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        let avg_secs =
            of_group.iter().map(|o| o.seconds).sum::<f64>() / of_group.len() as f64;
        let inst = &instances[path];
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            inst.n(),
            inst.d(),
            variant.name(),
            avg_secs,
            of_group[0].k_u,
            avg_k,
            std_k
        ));
    }

    match out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(if any_nonconverged {
        EXIT_NONCONVERGENCE
    } else {
        0
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}
