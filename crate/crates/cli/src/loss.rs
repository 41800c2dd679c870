use std::path::{Path, PathBuf};

use clap::Args;
use cvs_core::sobel_loss::{
    finite_difference_grad, grad_total_loss, loss_parts_raw, max_relative_error, normwise_relative_error, ChannelReduce,
    OneHotMap, ProbMap, Tensor3,
};
use cvs_core::tensor_text::{format_tensor, parse_tensor};
use serde::Serialize;

use crate::error::{io_error, CliError, CliResult};
use crate::output::write_text;

/// Finite-difference step used by --check-grad.
const CHECK_STEP: f64 = 1e-5;

#[derive(Args, Debug)]
pub struct LossArgs {
    /// One-hot ground truth tensor (text format).
    #[arg(long)]
    g: PathBuf,
    /// Predicted probability tensor (text format).
    #[arg(long)]
    p: PathBuf,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// sum or max
    #[arg(long)]
    reduce: Option<String>,
    /// Write d total / d p as a text tensor.
    #[arg(long)]
    grad_out: Option<PathBuf>,
    /// Compare the analytic gradient with central finite differences.
    #[arg(long)]
    check_grad: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Serialize)]
struct GradCheck {
    h: f64,
    /// `||analytic - numeric|| / ||numeric||`
    rel_err: f64,
    max_entry_rel_err: f64,
}

#[derive(Serialize)]
struct LossReport {
    ce: f64,
    sobel: f64,
    total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    grad_check: Option<GradCheck>,
}

fn read_tensor(path: &Path) -> CliResult<Tensor3<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Ok(parse_tensor(&text)?)
}

pub fn run(a: LossArgs) -> CliResult<()> {
    let cfg = crate::load_config(a.config.as_ref())?;
    let mut loss = cfg.loss;
    if let Some(l) = a.lambda {
        loss.lambda = l;
    }
    if let Some(b) = a.beta {
        loss.smooth_l1_beta = b;
    }
    if let Some(r) = &a.reduce {
        loss.channel_reduce = r.parse::<ChannelReduce>().map_err(|e| CliError::input("InvalidArgument", e))?;
    }
    if !(loss.lambda >= 0.0 && loss.lambda.is_finite()) || !(loss.smooth_l1_beta > 0.0 && loss.smooth_l1_beta.is_finite()) {
        return Err(CliError::input("InvalidArgument", "lambda must be >= 0 and beta > 0"));
    }

    let g = OneHotMap::new(read_tensor(&a.g)?)?;
    let p = ProbMap::new(read_tensor(&a.p)?)?;
    let parts = loss_parts_raw(g.tensor(), p.tensor(), &loss)?;
    let grad = grad_total_loss(&g, &p, &loss)?;
    let grad_check = if a.check_grad {
        let numeric = finite_difference_grad(g.tensor(), p.tensor(), &loss, CHECK_STEP)?;
        Some(GradCheck {
            h: CHECK_STEP,
            rel_err: normwise_relative_error(&grad, &numeric),
            max_entry_rel_err: max_relative_error(&grad, &numeric),
        })
    } else {
        None
    };
    if let Some(path) = &a.grad_out {
        write_text(path, &format_tensor(&grad))?;
    }
    let report = LossReport { ce: parts.ce, sobel: parts.sobel, total: parts.total, grad_check };
    println!("{}", serde_json::to_string(&report).expect("loss report serializes"));
    Ok(())
}
