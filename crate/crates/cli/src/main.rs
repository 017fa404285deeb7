use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use toric_cli::{
    cmd_matrix, cmd_mv, cmd_solve, exit_code, load_system, CommonOpts, MatrixAlgo, MatrixOpts,
    SolveOpts,
};

#[derive(Parser)]
#[command(name = "toric", about = "Sparse elimination: mixed volumes, resultant matrices, roots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algo {
    Subdivision,
    Incremental,
}

impl From<Algo> for MatrixAlgo {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Subdivision => MatrixAlgo::Subdivision,
            Algo::Incremental => MatrixAlgo::Incremental,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// System file
    file: PathBuf,
    /// Add a linear u-polynomial f0
    #[arg(long)]
    u: bool,
    /// Hide variable k (1-based) in the coefficient field
    #[arg(long, conflicts_with = "u")]
    hide: Option<usize>,
    /// Random seed (overrides any SEED line in the file)
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn opts(&self) -> CommonOpts {
        CommonOpts {
            u_mode: self.u,
            hide: self.hide,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mixed volume and mixed cells of the square system
    Mv {
        #[command(flatten)]
        common: Common,
    },
    /// Build a sparse resultant matrix and check the evaluation identity
    Matrix {
        #[command(flatten)]
        common: Common,
        /// Construction algorithm
        #[arg(long, value_enum, default_value = "subdivision")]
        algo: Algo,
        /// Write the matrix definition to this path
        #[arg(long)]
        store: Option<PathBuf>,
        /// Read a matrix definition instead of constructing one
        #[arg(long, conflicts_with = "store")]
        load: Option<PathBuf>,
    },
    /// Solve the system through the resultant-matrix eigenproblem
    Solve {
        #[command(flatten)]
        common: Common,
        /// Construction algorithm (default: subdivision for --u, incremental for --hide)
        #[arg(long, value_enum)]
        algo: Option<Algo>,
        /// Skip the Schur complement and use the whole matrix
        #[arg(long)]
        whole_matrix: bool,
        /// Condition-number threshold for block growth and rank balancing
        #[arg(long)]
        cond: Option<f64>,
        /// Residual threshold for accepting a root
        #[arg(long)]
        accept: Option<f64>,
        /// Rank-balancing attempts
        #[arg(long)]
        tries: Option<usize>,
        /// Read a matrix definition instead of constructing one
        #[arg(long)]
        matrix_in: Option<PathBuf>,
        /// Write the matrix definition to this path
        #[arg(long)]
        matrix_out: Option<PathBuf>,
    },
}

fn run() -> toric_core::Result<String> {
    let cli = Cli::parse();
    let report = match &cli.command {
        Command::Mv { common } => {
            let sf = load_system(&common.file)?;
            cmd_mv(&sf, &common.opts())?
        }
        Command::Matrix {
            common,
            algo,
            store,
            load,
        } => {
            let sf = load_system(&common.file)?;
            let mopts = MatrixOpts {
                algo: (*algo).into(),
                store: store.clone(),
                load: load.clone(),
            };
            cmd_matrix(&sf, &common.opts(), &mopts)?
        }
        Command::Solve {
            common,
            algo,
            whole_matrix,
            cond,
            accept,
            tries,
            matrix_in,
            matrix_out,
        } => {
            let sf = load_system(&common.file)?;
            let sopts = SolveOpts {
                algo: algo.map(Into::into),
                whole_matrix: *whole_matrix,
                cond: *cond,
                accept: *accept,
                tries: *tries,
                matrix_in: matrix_in.clone(),
                matrix_out: matrix_out.clone(),
            };
            cmd_solve(&sf, &common.opts(), &sopts)?
        }
    };
    Ok(report.render())
}

fn main() -> ExitCode {
    match run() {
        Ok(text) => {
            print!("{}", text);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
