//! The `latentmap` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latentmap_core::{
    compare_maps, cosine_matrix, edit_batch, fit, loss, synth_ground_truth, top_correlated, Link, Schedule,
    SyntheticSpec, TrainConfig, TrainMeta, DEFAULT_LAMBDA,
};

use crate::dataset::{load_dataset, load_latents, save_dataset, save_latents};
use crate::error::{Error, Result};
use crate::model::{load_model, save_model};
use crate::report::{report_table, save_report};

#[derive(Parser, Debug)]
#[command(name = "latentmap", version)]
#[command(about = "Fit, analyze and apply linear attribute directions in a generator latent space")]
struct Cli {
    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Suppress progress and summary output
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic dataset with a planted ground-truth map
    Synth(SynthArgs),
    /// Fit a map to a dataset by gradient descent
    Fit(FitArgs),
    /// Print the loss of a map on a dataset and its direction alignment
    Eval(EvalArgs),
    /// List the attributes whose directions are most aligned with one attribute
    Cosine(CosineArgs),
    /// Move every latent along one attribute direction
    Edit(EditArgs),
    /// Compare an edit under an unregularized and a regularized map
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 512)]
    dim: usize,
    #[arg(long, default_value_t = 40)]
    attrs: usize,
    #[arg(long, default_value_t = 3000)]
    n: usize,
    /// Pairwise correlation of the planted directions
    #[arg(long, default_value_t = 0.6)]
    rho: f64,
    /// Standard deviation of the label noise
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = LinkArg::Linear)]
    link: LinkArg,
    /// Output directory for latents.csv, labels.csv and truth_model.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LinkArg {
    Linear,
    Sigmoid,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScheduleArg {
    Constant,
    OneCycle,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    latents: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Weight of the orthogonality penalty
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Constant)]
    schedule: ScheduleArg,
    #[arg(long, default_value_t = TrainConfig::default().lr_max)]
    lr_max: f64,
    #[arg(long, default_value_t = TrainConfig::default().max_iters)]
    max_iters: usize,
    /// Stop once the relative change of the loss falls below this
    #[arg(long, default_value_t = TrainConfig::default().tol)]
    tol: f64,
    /// Heavy-ball momentum; 0 gives plain gradient descent
    #[arg(long, default_value_t = TrainConfig::default().momentum)]
    momentum: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    latents: PathBuf,
    #[arg(long)]
    labels: PathBuf,
}

#[derive(Args, Debug)]
struct CosineArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    attr: String,
    /// Number of attributes to list [default: all]
    #[arg(long)]
    top: Option<usize>,
}

#[derive(Args, Debug)]
struct EditArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    latents: PathBuf,
    #[arg(long)]
    attr: String,
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Unregularized map
    #[arg(long)]
    model_a: PathBuf,
    /// Regularized map
    #[arg(long)]
    model_b: PathBuf,
    /// Latents file; only the first row is edited
    #[arg(long)]
    latents: PathBuf,
    #[arg(long)]
    attr: String,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long)]
    out: PathBuf,
}

/// Runs one invocation and returns the process exit code: 0 on success, 1
/// for invalid input or usage, 2 for I/O failures, 3 for numerical failures.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut stdout = |text: String| {
        out.write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>".as_ref(), e))
    };
    match &cli.command {
        Command::Synth(a) => synth(a, cli, err),
        Command::Fit(a) => fit_cmd(a, cli, err),
        Command::Eval(a) => stdout(eval(a)?),
        Command::Cosine(a) => stdout(cosine(a)?),
        Command::Edit(a) => {
            let map = load_model(&a.model)?;
            let z = load_latents(&a.latents)?;
            save_latents(&a.out, &edit_batch(&map, &z, &a.attr, a.alpha)?)
        }
        Command::Report(a) => {
            let no_reg = load_model(&a.model_a)?;
            let reg = load_model(&a.model_b)?;
            let z = load_latents(&a.latents)?;
            let report = compare_maps(&no_reg, &reg, z.row(0), &a.attr, a.alpha)?;
            save_report(&a.out, &report)?;
            if cli.quiet {
                Ok(())
            } else {
                stdout(report_table(&report))
            }
        }
    }
}

fn note(cli: &Cli, err: &mut dyn Write, text: std::fmt::Arguments) {
    if !cli.quiet {
        let _ = writeln!(err, "{text}");
    }
}

fn synth(a: &SynthArgs, cli: &Cli, err: &mut dyn Write) -> Result<()> {
    let spec = SyntheticSpec {
        d: a.dim,
        a: a.attrs,
        n: a.n,
        rho: a.rho,
        noise_sigma: a.sigma,
        link: match a.link {
            LinkArg::Linear => Link::Linear,
            LinkArg::Sigmoid => Link::Sigmoid,
        },
        seed: cli.seed,
    };
    let (ds, truth) = synth_ground_truth(&spec)?;
    let l = loss(&truth, &ds, 0.0)?;
    let truth = truth.with_meta(TrainMeta {
        lambda: 0.0,
        iterations: 0,
        final_total_loss: l.total,
        final_mse: l.mse,
        final_penalty: l.penalty,
        seed: cli.seed,
        schedule: "planted".into(),
    });
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    save_dataset(&ds, &a.out.join("latents.csv"), &a.out.join("labels.csv"))?;
    save_model(&a.out.join("truth_model.json"), &truth)?;
    note(
        cli,
        err,
        format_args!(
            "wrote {} samples (D={}, A={}) to {}",
            a.n,
            a.dim,
            a.attrs,
            a.out.display()
        ),
    );
    Ok(())
}

fn fit_cmd(a: &FitArgs, cli: &Cli, err: &mut dyn Write) -> Result<()> {
    let ds = load_dataset(&a.latents, &a.labels)?;
    let cfg = TrainConfig {
        lambda: a.lambda,
        max_iters: a.max_iters,
        tol: a.tol,
        schedule: match a.schedule {
            ScheduleArg::Constant => Schedule::Constant,
            ScheduleArg::OneCycle => Schedule::OneCycle,
        },
        lr_max: a.lr_max,
        seed: cli.seed,
        momentum: a.momentum,
        ..TrainConfig::default()
    };
    let (map, report) = fit(&ds, &cfg)?;
    save_model(&a.out, &map)?;
    let meta = map.meta().expect("fit records metadata");
    note(
        cli,
        err,
        format_args!(
            "{} after {} iterations in {:.1}s: total {:.6e} (mse {:.6e}, penalty {:.6e})",
            if report.converged {
                "converged"
            } else {
                "stopped without converging"
            },
            report.iterations_run,
            report.wall_time,
            meta.final_total_loss,
            meta.final_mse,
            meta.final_penalty,
        ),
    );
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<String> {
    let map = load_model(&a.model)?;
    let ds = load_dataset(&a.latents, &a.labels)?;
    let lambda = map.meta().map_or(0.0, |m| m.lambda);
    let l = loss(&map, &ds, lambda)?;
    let c = cosine_matrix(&map);
    Ok(format!(
        "metric,value\nlambda,{}\nmse,{}\npenalty,{}\ntotal,{}\nmean_abs_cosine,{}\nmax_abs_cosine,{}\n",
        l.lambda,
        l.mse,
        l.penalty,
        l.total,
        c.mean_abs_off_diagonal(),
        c.max_abs_off_diagonal()
    ))
}

fn cosine(a: &CosineArgs) -> Result<String> {
    let map = load_model(&a.model)?;
    let k = a.top.unwrap_or(map.attrs());
    let ranked = top_correlated(&map, &a.attr, k)?;
    let mut text = format!("attribute,cosine\n{},{:.6}\n", a.attr, 1.0);
    for (name, c) in ranked {
        text.push_str(&format!("{name},{c:.6}\n"));
    }
    Ok(text)
}
