//! `tenkit` command implementations.
//!
//! Each command returns a [`CommandResult`] holding an exit code, a prose
//! report, and machine-readable `::key value` lines. Floating-point values in
//! those lines carry 17 significant digits.

mod args;

use std::fmt::Write as _;
use std::path::Path;

use tenkit::decomp::{
    cp_als, hosvd, load_model, save_model, truncated_hosvd, tt_svd, CpOptions, Model,
};
use tenkit::elementwise::{frobenius_norm, sub};
use tenkit::io::{fmt_f64, read_ten, write_ten};
use tenkit::network::{evaluate, plan, read_network, Strategy};
use tenkit::{Error, Tensor};

pub use args::run;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommandResult {
    pub code: i32,
    pub report: String,
    /// `(key, value)` pairs printed as `::key value`.
    pub machine: Vec<(String, String)>,
    pub error: Option<String>,
}

impl CommandResult {
    fn ok() -> Self {
        CommandResult::default()
    }

    pub fn failure(code: i32, message: impl Into<String>) -> Self {
        CommandResult {
            code,
            error: Some(message.into()),
            ..CommandResult::default()
        }
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.report.push_str(text.as_ref());
        self.report.push('\n');
    }

    fn put(&mut self, key: &str, value: impl Into<String>) {
        self.machine.push((key.into(), value.into()));
    }

    /// The `::` block exactly as printed.
    pub fn machine_block(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.machine {
            if v.is_empty() {
                let _ = writeln!(s, "::{k}");
            } else {
                let _ = writeln!(s, "::{k} {v}");
            }
        }
        s
    }

    pub fn stdout(&self) -> String {
        format!("{}{}", self.report, self.machine_block())
    }
}

impl From<Error> for CommandResult {
    fn from(e: Error) -> Self {
        let code = if e.is_numeric() { EXIT_NUMERIC } else { EXIT_USER };
        CommandResult::failure(code, format!("error: {e}"))
    }
}

fn ints(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn floats(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(" ")
}

/// Plain decimal for moderate magnitudes, exponent form otherwise.
fn human(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e6).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn rel_error(x: &Tensor, approx: &Tensor) -> tenkit::Result<f64> {
    let err = frobenius_norm(&sub(x, approx)?);
    let norm = frobenius_norm(x);
    Ok(if norm > 0.0 { err / norm } else { err })
}

fn wrap(f: impl FnOnce() -> tenkit::Result<CommandResult>) -> CommandResult {
    f().unwrap_or_else(CommandResult::from)
}

pub fn cmd_info(file: &Path) -> CommandResult {
    wrap(|| {
        let t: Tensor = read_ten(file)?;
        let min = t.data().iter().copied().fold(f64::INFINITY, f64::min);
        let max = t.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let norm = frobenius_norm(&t);
        let mut r = CommandResult::ok();
        r.line(format!("{}: order {} tensor of shape {}", file.display(), t.order(), t.shape()));
        r.line(format!(
            "{} elements, Frobenius norm {}, entries in [{}, {}]",
            t.numel(),
            human(norm),
            human(min),
            human(max)
        ));
        r.put("order", t.order().to_string());
        r.put("shape", ints(t.extents()));
        r.put("numel", t.numel().to_string());
        r.put("fro_norm", fmt_f64(norm));
        r.put("min", fmt_f64(min));
        r.put("max", fmt_f64(max));
        Ok(r)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReshapeAction {
    Permute(Vec<usize>),
    /// Mode-`n` matricization.
    Unfold(usize),
    /// `k`-unfolding.
    Kunfold(usize),
    /// Refolds the data, in vectorization order, to a new shape.
    Fold(Vec<usize>),
}

pub fn cmd_reshape(file: &Path, action: &ReshapeAction, out: &Path) -> CommandResult {
    wrap(|| {
        let t: Tensor = read_ten(file)?;
        let (y, what) = match action {
            ReshapeAction::Permute(p) => (t.permute(p)?, format!("permuted by ({})", ints(p))),
            ReshapeAction::Unfold(n) => (t.matricize(*n)?, format!("mode-{n} unfolding")),
            ReshapeAction::Kunfold(k) => (t.k_unfold(*k)?, format!("{k}-unfolding")),
            ReshapeAction::Fold(shape) => (t.vec().fold(shape.clone())?, "folded".to_string()),
        };
        write_ten(out, &y)?;
        let mut r = CommandResult::ok();
        r.line(format!("{what}: {} -> {}, written to {}", t.shape(), y.shape(), out.display()));
        r.put("shape", ints(y.extents()));
        Ok(r)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    Hosvd,
    Thosvd(Vec<usize>),
    Cp(usize),
    /// Optional caps on the internal bonds and a per-split tolerance.
    Tt {
        ranks: Option<Vec<usize>>,
        tol: Option<f64>,
    },
}

pub fn cmd_decompose(file: &Path, method: &Method, outdir: &Path, seed: u64) -> CommandResult {
    wrap(|| {
        let x: Tensor = read_ten(file)?;
        let mut r = CommandResult::ok();
        let model = match method {
            Method::Hosvd => Model::Tucker(hosvd(&x)?),
            Method::Thosvd(ranks) => Model::Tucker(truncated_hosvd(&x, ranks)?),
            Method::Cp(rank) => {
                let opts = CpOptions {
                    seed,
                    ..CpOptions::default()
                };
                let fit = cp_als(&x, *rank, &opts)?;
                let xn = frobenius_norm(&x);
                let trace: Vec<f64> = fit
                    .objective
                    .iter()
                    .map(|&e| if xn > 0.0 { e / xn } else { e })
                    .collect();
                r.put("sweeps", fit.sweeps().to_string());
                r.put("fit_trace", floats(&trace));
                Model::Cp(fit.model)
            }
            Method::Tt { ranks, tol } => {
                let s = tt_svd(&x, ranks.as_deref(), *tol)?;
                r.put("discarded", fmt_f64(s.discarded));
                Model::Tt(s.train)
            }
        };
        let err = rel_error(&x, &model.reconstruct()?)?;
        save_model(outdir, &model)?;
        r.line(format!(
            "{} model with ranks ({}), relative error {err:e}, written to {}",
            model.kind(),
            ints(&model.ranks()),
            outdir.display()
        ));
        r.machine.insert(0, ("ranks".into(), ints(&model.ranks())));
        r.machine.insert(0, ("rel_error".into(), fmt_f64(err)));
        r.machine.insert(0, ("kind".into(), model.kind().into()));
        Ok(r)
    })
}

pub fn cmd_contract(
    netfile: &Path,
    strategy: &Strategy,
    out: Option<&Path>,
    report_cost: bool,
) -> CommandResult {
    wrap(|| {
        let net = read_network::<f64>(netfile)?;
        let p = plan(&net, strategy)?;
        let y = evaluate(&net, &p)?;
        if let Some(out) = out {
            write_ten(out, &y)?;
        }
        let mut r = CommandResult::ok();
        r.line(format!(
            "{} nodes contracted in {} steps; result shape {}",
            net.nodes().len(),
            p.steps.len(),
            y.shape()
        ));
        if report_cost {
            for line in p.to_string().lines() {
                r.line(line);
            }
        }
        let steps: Vec<String> = p.steps.iter().map(|s| format!("{},{}", s.left, s.right)).collect();
        r.put("steps", steps.join(" "));
        if report_cost {
            let costs: Vec<String> = p.steps.iter().map(|s| s.cost.to_string()).collect();
            r.put("step_cost", costs.join(" "));
            r.put("total_cost", p.total_cost.to_string());
            r.put("peak_cost", p.peak_cost.to_string());
            r.put("peak_size", p.peak_size.to_string());
        }
        r.put("shape", ints(y.extents()));
        r.put("fro_norm", fmt_f64(frobenius_norm(&y)));
        Ok(r)
    })
}

pub fn cmd_verify(tensorfile: &Path, modeldir: &Path, tol: f64) -> CommandResult {
    wrap(|| {
        let x: Tensor = read_ten(tensorfile)?;
        let model: Model<f64> = load_model(modeldir)?;
        if model.extents() != x.extents() {
            return Err(Error::Shape(format!(
                "model shape ({}) does not match tensor shape {}",
                ints(&model.extents()),
                x.shape()
            )));
        }
        let err = rel_error(&x, &model.reconstruct()?)?;
        let pass = err <= tol;
        let mut r = CommandResult::ok();
        r.line(format!(
            "{} model: relative error {err:e} {} tolerance {tol:e}",
            model.kind(),
            if pass { "within" } else { "exceeds" }
        ));
        r.put("rel_error", fmt_f64(err));
        r.put("pass", pass.to_string());
        r.code = if pass { EXIT_OK } else { EXIT_USER };
        Ok(r)
    })
}
