use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cocycles_cli::experiments::{run, run_suite};
use cocycles_cli::{configure_workers, CliError, ExperimentConfig, Report};

#[derive(Parser)]
#[command(name = "cocycles", version, about = "Numerical experiments on quasiperiodic SL(2,R) cocycles")]
struct Cli {
    /// Print every check, not only failures.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lyapunov exponent by orbit, optionally averaged over R_theta.
    Lyapunov(ExperimentConfig),
    /// Fibered rotation number and, with --family, the rho-profile.
    Rotnum(ExperimentConfig),
    /// Monotonicity certificate of a family.
    Monotone(ExperimentConfig),
    /// Certified contracting strip of a family.
    Strip(ExperimentConfig),
    /// Invariant sections and their Lyapunov exponent.
    Section(ExperimentConfig),
    /// Affine profile U(t).
    Uprofile(ExperimentConfig),
    /// Second-derivative limit.
    D2l(ExperimentConfig),
    /// Kotani integrals I+, I-, D2.
    Kotani(ExperimentConfig),
    /// Conformal barycenter of an atom file.
    Barycenter(ExperimentConfig),
    /// Renormalization cascade.
    Renorm(ExperimentConfig),
    /// Conjugacies: --mode l2-from-section, cohomological or push-to-model.
    Conjugate(ExperimentConfig),
    /// Acceptance bundle: identities, kotani, renorm-cascade, monotone-audit or all.
    Suite {
        name: String,
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Any experiment by name, e.g. herman-average, barycenter or A7.
    Run {
        experiment: Option<String>,
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
}

fn named(name: &str, cfg: ExperimentConfig) -> Result<Report, CliError> {
    let flags = ExperimentConfig { experiment: Some(name.into()), ..cfg };
    run(&ExperimentConfig::resolve(flags)?)
}

fn execute(command: Command) -> Result<(Report, Option<std::path::PathBuf>), CliError> {
    let (report, output) = match command {
        Command::Suite { name, cfg } => {
            let cfg = ExperimentConfig::resolve(cfg)?;
            (run_suite(&name, &cfg)?, cfg.output)
        }
        Command::Run { experiment, cfg } => {
            // the positional name wins over an `experiment` key in --config
            let cfg = ExperimentConfig::resolve(ExperimentConfig { experiment, ..cfg })?;
            (run(&cfg)?, cfg.output)
        }
        other => {
            let (name, cfg) = match other {
                Command::Lyapunov(c) => ("lyapunov", c),
                Command::Rotnum(c) => ("rotnum", c),
                Command::Monotone(c) => ("monotone", c),
                Command::Strip(c) => ("strip", c),
                Command::Section(c) => ("section", c),
                Command::Uprofile(c) => ("uprofile", c),
                Command::D2l(c) => ("d2l", c),
                Command::Kotani(c) => ("kotani", c),
                Command::Barycenter(c) => ("barycenter", c),
                Command::Renorm(c) => ("renorm", c),
                Command::Conjugate(c) => ("conjugate", c),
                Command::Suite { .. } | Command::Run { .. } => unreachable!(),
            };
            let output = cfg.output.clone();
            (named(name, cfg)?, output)
        }
    };
    Ok((report, output))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    match execute(cli.command) {
        Ok((report, output)) => {
            print!("{}", report.render(cli.verbose));
            if let Some(dir) = output {
                if let Err(e) = report.write(&dir) {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code());
                }
            }
            if report.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
