use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cgn::harness::{self, ExperimentSpec, HarnessError, Solver, SweepAxis};
use cgn::problems::{DataOptions, ProblemId};
use cgn::ResidualScale;

#[derive(Parser)]
#[command(name = "cgn-solve", version, about = "Cluster Gauss-Newton experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on one problem.
    Run(RunArgs),
    /// Repeat a run over values of gamma or lambda-init.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Tabulate summary.json files from run directories.
    Compare {
        dirs: Vec<PathBuf>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic dataset.
    MakeData {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        residual_scale: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON spec; flags given on the command line override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lambda_init: Option<f64>,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    fd_step: Option<f64>,
    #[arg(long)]
    lm_max_evals: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    residual_scale: Option<String>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the problem's fixed starting points (toy1d).
    #[arg(long)]
    pinned_starts: bool,
}

fn config<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, HarnessError> {
    r.map_err(|e| HarnessError::Config(e.to_string()))
}

impl RunArgs {
    fn into_spec(self) -> Result<ExperimentSpec, HarnessError> {
        let mut spec = match &self.spec {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
                ExperimentSpec::from_json(&text)?
            }
            None => ExperimentSpec::default(),
        };
        if let Some(p) = self.problem {
            spec.problem = config(p.parse::<ProblemId>())?;
        }
        if let Some(s) = self.solver {
            spec.solver = s.parse::<Solver>()?;
        }
        if let Some(s) = self.residual_scale {
            spec.residual_scale = Some(config(s.parse::<ResidualScale>())?);
        }
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { spec.$field = v; })* };
        }
        set!(n, gamma, lambda_init, lambda_max, k_max, seed, workers, out);
        macro_rules! set_opt {
            ($($field:ident),*) => { $(if self.$field.is_some() { spec.$field = self.$field; })* };
        }
        set_opt!(fd_step, lm_max_evals, noise, data);
        spec.pinned_starts |= self.pinned_starts;
        Ok(spec)
    }
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run(args) => {
            let o = harness::run_experiment(&args.into_spec()?)?;
            println!(
                "{} {}: total_evals={} acceptable={}/{} best_ssr={:.6e} truth_ssr={:.6e} -> {}",
                o.summary.solver,
                o.summary.problem,
                o.summary.total_evals,
                o.summary.acceptable_count,
                o.summary.n,
                o.summary.best_ssr,
                o.summary.truth_ssr,
                o.out_dir.display()
            );
        }
        Command::Sweep { run, param, values } => {
            let axis = param.parse::<SweepAxis>()?;
            let spec = run.into_spec()?;
            for (v, o) in values.iter().zip(harness::sweep(&spec, axis, &values)?) {
                println!(
                    "{}={v}: total_evals={} acceptable={}/{}",
                    axis.as_str(),
                    o.summary.total_evals,
                    o.summary.acceptable_count,
                    o.summary.n
                );
            }
        }
        Command::Compare { dirs, out } => {
            let table = harness::compare(&dirs)?;
            match out {
                Some(path) => fs::write(&path, table).map_err(|e| HarnessError::Io {
                    path: path.display().to_string(),
                    source: e,
                })?,
                None => print!("{table}"),
            }
        }
        Command::MakeData { problem, seed, noise, residual_scale, out } => {
            let id = config(problem.parse::<ProblemId>())?;
            let mut opts = DataOptions::defaults_for(id, seed);
            if let Some(n) = noise {
                opts.noise_sd_frac = n;
            }
            if let Some(s) = residual_scale {
                opts.residual_scale = config(s.parse::<ResidualScale>())?;
            }
            let d = harness::make_data(id, &opts, &out)?;
            println!("{} observations, truth_ssr={:.6e} -> {}", d.len(), d.truth_ssr, out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cgn-solve: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
