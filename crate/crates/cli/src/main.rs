#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use config::Config;

const TOP_HELP: &str = "\
Every subcommand reads an optional key=value config file (one pair per line,
'#' starts a comment) and then applies KEY=VALUE overrides from the command
line. Numbers accept fractions such as 1/128 and 'inf'. Networks (key sigma)
are a file with 'v x y' and 'e i j' lines or a generator: comb:n, grid:n,
oblique:n:angle, point:x:y, tiled:L:s. Coefficients (rho, sigma_coef) are a
number or 'kind=<constant|affine|affine2|radialq|exp> params=<csv>'. CSV goes
to stdout; with out=DIR the CSV and any rasters are also written to DIR.

Exit codes: 0 success, 1 usage or parse error, 2 solver failure,
3 infeasible optimization.";

const SOLVE_HELP: &str = "\
Keys: domain sigma p h rho sigma_coef band tol out
CSV: p,h,lambda,residual,iterations,components,component,converged
Files: solve.csv, eigenfunction.txt and classes.txt (raster: header
'rows cols h x0 y0', then one grid row per line, bottom row first).";

const REFINE_HELP: &str = "\
Keys: domain sigma p hs rho sigma_coef order out
hs is a strictly decreasing list (default 1/32,1/64,1/128,1/256); order is
the assumed convergence order of the Richardson step (default 2).
CSV: h,lambda,extrapolated,observed_order";

const BOUND_HELP: &str = "\
Keys: domain sigma p h rho sigma_coef out
length is that of the network together with the domain boundary. The
lambda column is filled when h is given (p > 1) or p = inf.
CSV: p,length,kappa,tbar,T,bound,lambda";

const STUDY_HELP: &str = "\
Keys: p n_list cells_per_gap out
Unit square structures for each n; h = 1/(cells_per_gap n). With p = inf the
lambda column holds the maximum distance.
CSV: n,L,lambda,ratio,limit";

const GAMMA_HELP: &str = "\
Keys: domain rho sigma_coef p L_list tile_side out
Tiles the optimal density for each budget and compares cell masses.
CSV: L,length,max_deviation,limit
Files: gamma.csv and density_L<L>.csv with columns cell_x,cell_y,mass,target";

const OPTIMIZE_HELP: &str = "\
Keys: domain rho sigma_coef p L strategy h_search h_final eval_budget seed
      tile_side fill orientations out
strategy is comb-family, adapted-tiling, anneal or portfolio; p = inf
minimizes the maximum distance.
CSV: objective,strategy,L,length,value,bound,gap,evaluations,exhausted,seed,label
Files: optimize.csv, best_sigma.txt (network format) and history.csv with
columns iteration,value,best";

const MAXDIST_HELP: &str = "\
Keys: domain sigma tolerance h out
CSV: L,T,x,y,h,level,tbar,LT
Files: maxdist.csv and distance.txt (raster of distances with spacing h)";

const CONSTANTS_HELP: &str = "\
Keys: p_list t_list domain sigma out
Three tables separated by a blank line.
CSV: p,Lambda_p
CSV: length,area,kappa,tbar
CSV: t,H
Files: constants.csv, tbar.csv, h_of_t.csv";

#[derive(Parser)]
#[command(name = "stiffrib", version, about = "Dirichlet eigenvalues of domains cut by length-constrained networks", after_help = TOP_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// key=value config file
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// KEY=VALUE overrides applied after the config file
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// One eigensolve with eigenfunction raster
    #[command(after_help = SOLVE_HELP)]
    Solve(RunArgs),
    /// Eigenvalue against grid spacing with Richardson extrapolation
    #[command(after_help = REFINE_HELP)]
    Refine(RunArgs),
    /// Length-based upper bound for the eigenvalue
    #[command(after_help = BOUND_HELP)]
    Bound(RunArgs),
    /// Scaled objective of the comb structures
    #[command(name = "comb-study", after_help = STUDY_HELP)]
    CombStudy(RunArgs),
    /// Scaled objective of the grid structures
    #[command(name = "grid-study", after_help = STUDY_HELP)]
    GridStudy(RunArgs),
    /// Limit value and density convergence of tiled networks
    #[command(name = "gamma-study", after_help = GAMMA_HELP)]
    GammaStudy(RunArgs),
    /// Search for a network maximizing the eigenvalue
    #[command(after_help = OPTIMIZE_HELP)]
    Optimize(RunArgs),
    /// Maximum distance to the network and the boundary
    #[command(after_help = MAXDIST_HELP)]
    Maxdist(RunArgs),
    /// One-dimensional constants and sublevel area bounds
    #[command(after_help = CONSTANTS_HELP)]
    Constants(RunArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Library(stiffrib::Error),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use stiffrib::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Library(E::Parse { .. } | E::InvalidInput(_) | E::InvalidGeometry(_)) => 1,
            CliError::Library(E::Infeasible(_) | E::BudgetTooSmall(_)) => 3,
            CliError::Library(_) | CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl From<stiffrib::Error> for CliError {
    fn from(e: stiffrib::Error) -> Self {
        CliError::Library(e)
    }
}

fn load(args: &RunArgs) -> Result<Config, CliError> {
    let mut cfg = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for o in &args.overrides {
        cfg.apply_override(o)?;
    }
    Ok(cfg)
}

fn dispatch(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Solve(a) => commands::solve(&load(a)?),
        Command::Refine(a) => commands::refine(&load(a)?),
        Command::Bound(a) => commands::bound(&load(a)?),
        Command::CombStudy(a) => commands::study(&load(a)?, false),
        Command::GridStudy(a) => commands::study(&load(a)?, true),
        Command::GammaStudy(a) => commands::gamma_study(&load(a)?),
        Command::Optimize(a) => commands::optimize(&load(a)?),
        Command::Maxdist(a) => commands::maxdist(&load(a)?),
        Command::Constants(a) => commands::constants(&load(a)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(&cli.command) {
        Ok(csv) => {
            print!("{csv}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use stiffrib::Error;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Library(Error::Parse { line: 3, message: "x".into() }).exit_code(), 1);
        assert_eq!(CliError::Library(Error::Infeasible("x".into())).exit_code(), 3);
        assert_eq!(CliError::Library(Error::BudgetTooSmall("x".into())).exit_code(), 3);
        assert_eq!(CliError::Library(Error::NotConverged { iterations: 1, residual: 1.0 }).exit_code(), 2);
        assert_eq!(CliError::Library(Error::ResolutionTooCoarse("x".into())).exit_code(), 2);
    }

    #[test]
    fn command_line_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
