use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fairpay_cli::config::SimConfig;
use fairpay_cli::ingest::load_salary_csv;
use fairpay_cli::report::{analyze_table, fit_document};
use fairpay_cli::simulate::{self, FinalStateDocument};
use fairpay_cli::solve::{solution_csv, solve};
use fairpay_cli::{to_json, CliError};
use fairpay_core::market::ConvergenceStatus;
use fairpay_core::maxent::{DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use fairpay_core::{ConstraintKind, ConstraintSet, SalaryGrid, SalarySample};

const EXIT_INPUT: u8 = 2;
const EXIT_ROUND_LIMIT: u8 = 3;

/// Salary fairness metrics, market simulation and maximum-entropy tools.
#[derive(Parser, Debug)]
#[command(name = "fairpay", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fairness report for a salary CSV (`salary` column, optional `category`).
    Analyze {
        input: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add a lognormal fit and its KS distance.
        #[arg(long)]
        fit: bool,
    },
    /// Run a replica-company market to equilibrium.
    Simulate {
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for trajectory.csv and final_state.json.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Start from the companies of a previous final_state.json.
        #[arg(long)]
        initial: Option<PathBuf>,
    },
    /// Maximum-entropy distribution on a uniform salary grid.
    Solve {
        /// Grid size.
        #[arg(long, default_value_t = SalaryGrid::DEFAULT_LEVELS)]
        levels: usize,
        #[arg(long, requires = "grid_max")]
        grid_min: Option<f64>,
        #[arg(long, requires = "grid_min")]
        grid_max: Option<f64>,
        /// Grid spans [center/50, 50*center]; defaults to --mean.
        #[arg(long, conflicts_with = "grid_min")]
        center: Option<f64>,
        /// Target E[S].
        #[arg(long)]
        mean: Option<f64>,
        /// Target E[ln S].
        #[arg(long, allow_negative_numbers = true)]
        mean_ln: Option<f64>,
        /// Target E[(ln S)^2].
        #[arg(long)]
        mean_ln_sq: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Directory for solution.csv and multipliers.json.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Lognormal maximum-likelihood fit of a salary CSV.
    Fit {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn read_initial(path: &Path) -> Result<FinalStateDocument, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.display().to_string(), source })
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Analyze { input, out, fit } => {
            let table = load_salary_csv(&input)?;
            let report = analyze_table(&table, &input.display().to_string(), fit)?;
            emit(out.as_deref(), &to_json(&report))?;
        }
        Command::Simulate { config, seed, out_dir, initial } => {
            let cfg = SimConfig::load(&config)?;
            let seed = seed
                .or(cfg.seed)
                .ok_or_else(|| CliError::Usage("no seed: set `seed` in the config or pass --seed".to_string()))?;
            let initial = initial.map(|p| read_initial(&p)).transpose()?.map(|doc| doc.companies);
            let trajectory = simulate::run(&cfg, seed, initial)?;
            std::fs::create_dir_all(&out_dir)
                .map_err(|source| CliError::Io { path: out_dir.display().to_string(), source })?;
            write_file(&out_dir.join("trajectory.csv"), &simulate::trajectory_csv(&trajectory))?;
            let doc = simulate::final_state(&cfg, &trajectory);
            write_file(&out_dir.join("final_state.json"), &to_json(&doc))?;
            println!("{} after {} rounds ({} trades)", doc.status, doc.rounds, doc.total_trades);
            if trajectory.status == ConvergenceStatus::RoundLimit {
                return Ok(ExitCode::from(EXIT_ROUND_LIMIT));
            }
        }
        Command::Solve { levels, grid_min, grid_max, center, mean, mean_ln, mean_ln_sq, tol, max_iter, out_dir } => {
            let grid = match (grid_min, grid_max, center.or(mean)) {
                (Some(lo), Some(hi), _) => SalaryGrid::uniform(lo, hi, levels)?,
                (_, _, Some(c)) => SalaryGrid::around_mean(c, levels)?,
                _ => return Err(CliError::Usage("give --grid-min/--grid-max, --center or --mean".to_string())),
            };
            let targets = [
                (ConstraintKind::MeanS, mean),
                (ConstraintKind::MeanLnS, mean_ln),
                (ConstraintKind::MeanLnSSq, mean_ln_sq),
            ];
            let constraints = ConstraintSet::new(targets.into_iter().filter_map(|(k, t)| t.map(|t| (k, t))).collect())?;
            let (sol, doc) = solve(&grid, &constraints, tol, max_iter)?;
            std::fs::create_dir_all(&out_dir)
                .map_err(|source| CliError::Io { path: out_dir.display().to_string(), source })?;
            write_file(&out_dir.join("solution.csv"), &solution_csv(&grid, &sol))?;
            write_file(&out_dir.join("multipliers.json"), &to_json(&doc))?;
            println!(
                "solved in {} iterations, residual {:e}, entropy {}",
                doc.iterations, doc.residual_norm, doc.entropy_nats
            );
        }
        Command::Fit { input, out } => {
            let table = load_salary_csv(&input)?;
            let doc = fit_document(&SalarySample::new(table.salaries)?)?;
            emit(out.as_deref(), &to_json(&doc))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
