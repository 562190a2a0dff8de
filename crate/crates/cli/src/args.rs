use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use tenkit::network::Strategy;

use crate::{
    cmd_contract, cmd_decompose, cmd_info, cmd_reshape, cmd_verify, CommandResult, Method,
    ReshapeAction, EXIT_OK, EXIT_USER,
};

/// Dense tensor algebra, tensor networks and decompositions.
#[derive(Parser, Debug)]
#[command(name = "tenkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print order, shape, norm and value range of a .ten file.
    Info { file: PathBuf },
    /// Permute, unfold or fold a tensor and write the result.
    Reshape {
        file: PathBuf,
        /// Output .ten file.
        #[arg(long, short, global = true)]
        out: Option<PathBuf>,
        #[command(subcommand)]
        action: ActionArg,
    },
    /// Fit a factored model and write it to a model directory.
    Decompose {
        file: PathBuf,
        /// Output model directory.
        #[arg(long, short, global = true)]
        out: Option<PathBuf>,
        /// Seed for randomized initialization.
        #[arg(long, global = true, default_value_t = 0)]
        seed: u64,
        #[command(subcommand)]
        method: MethodArg,
    },
    /// Plan and evaluate a .tn tensor network.
    Contract {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = StrategyArg::Exhaustive)]
        strategy: StrategyArg,
        /// Contraction step `LEFT,RIGHT` for the given strategy; repeat in order.
        #[arg(long = "step", value_name = "LEFT,RIGHT")]
        steps: Vec<String>,
        /// Write the result tensor here.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Report per-step, total and peak costs.
        #[arg(long)]
        report_cost: bool,
    },
    /// Compare a model directory against a tensor.
    Verify {
        tensor: PathBuf,
        model: PathBuf,
        /// Largest accepted relative Frobenius error.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Subcommand, Debug)]
enum ActionArg {
    /// Reorder modes; the 1-based permutation lists the source mode of each output mode.
    Permute {
        #[arg(required = true, num_args = 1..)]
        perm: Vec<usize>,
    },
    /// Mode-n matricization.
    Unfold { n: usize },
    /// k-unfolding (no mode permutation).
    Kunfold { k: usize },
    /// Refold the data to a new shape.
    Fold {
        #[arg(num_args = 0..)]
        shape: Vec<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum MethodArg {
    /// Full higher-order SVD.
    Hosvd,
    /// Truncated HOSVD with one rank per mode.
    Thosvd {
        #[arg(required = true, num_args = 1..)]
        ranks: Vec<usize>,
    },
    /// CP decomposition by alternating least squares.
    Cp { rank: usize },
    /// Tensor-train SVD.
    Tt {
        /// Caps on the internal bond ranks R_1 .. R_{N-1}.
        #[arg(long, num_args = 1..)]
        ranks: Option<Vec<usize>>,
        /// Per-split discarded-norm budget relative to the tensor norm.
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum StrategyArg {
    Exhaustive,
    Greedy,
    Given,
}

fn strategy(kind: StrategyArg, steps: &[String]) -> Result<Strategy, String> {
    if kind != StrategyArg::Given && !steps.is_empty() {
        return Err("--step is only valid with --strategy given".into());
    }
    Ok(match kind {
        StrategyArg::Exhaustive => Strategy::Exhaustive,
        StrategyArg::Greedy => Strategy::Greedy,
        StrategyArg::Given => {
            let mut order = Vec::with_capacity(steps.len());
            for s in steps {
                let (a, b) = s
                    .split_once(',')
                    .ok_or_else(|| format!("step '{s}' is not of the form LEFT,RIGHT"))?;
                order.push((a.trim().to_string(), b.trim().to_string()));
            }
            Strategy::Given(order)
        }
    })
}

fn missing_out() -> CommandResult {
    CommandResult::failure(EXIT_USER, "error: the --out argument is required")
}

/// Parses a full argument list (program name first) and runs the command.
pub fn run<I, A>(args: I) -> CommandResult
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USER } else { EXIT_OK };
            let mut r = CommandResult::failure(code, e.render().to_string());
            if code == EXIT_OK {
                r.report = r.error.take().unwrap_or_default();
            }
            return r;
        }
    };
    match cli.command {
        Command::Info { file } => cmd_info(&file),
        Command::Reshape { file, out, action } => {
            let action = match action {
                ActionArg::Permute { perm } => ReshapeAction::Permute(perm),
                ActionArg::Unfold { n } => ReshapeAction::Unfold(n),
                ActionArg::Kunfold { k } => ReshapeAction::Kunfold(k),
                ActionArg::Fold { shape } => ReshapeAction::Fold(shape),
            };
            match out {
                Some(out) => cmd_reshape(&file, &action, &out),
                None => missing_out(),
            }
        }
        Command::Decompose {
            file,
            out,
            seed,
            method,
        } => {
            let method = match method {
                MethodArg::Hosvd => Method::Hosvd,
                MethodArg::Thosvd { ranks } => Method::Thosvd(ranks),
                MethodArg::Cp { rank } => Method::Cp(rank),
                MethodArg::Tt { ranks, tol } => Method::Tt { ranks, tol },
            };
            match out {
                Some(out) => cmd_decompose(&file, &method, &out, seed),
                None => missing_out(),
            }
        }
        Command::Contract {
            file,
            strategy: kind,
            steps,
            out,
            report_cost,
        } => match strategy(kind, &steps) {
            Ok(s) => cmd_contract(&file, &s, out.as_deref(), report_cost),
            Err(msg) => CommandResult::failure(EXIT_USER, format!("error: {msg}")),
        },
        Command::Verify { tensor, model, tol } => cmd_verify(&tensor, &model, tol),
    }
}
