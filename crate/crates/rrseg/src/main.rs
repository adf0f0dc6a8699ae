//! `rrseg` — build, inspect, validate and score robust referring image
//! segmentation benchmarks, plus desk-scale model demos.
//!
//! Exit codes: 0 success, 2 input/validation error, 3 generation failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rrseg::dataset::{
    build_robust_split, compute_stats, strategy_counts, validate_dataset_negatives, BuildOptions,
    Dataset, Split,
};
use rrseg::error::Error;
use rrseg::evalio::{assemble_reference_evals, render_report_json, render_report_table};
use rrseg::formats::PredictionJson;
use rrseg::json::{fixed6, read_json, to_canonical_string, write_canonical};
use rrseg::modelio::{gradcheck_json, load_model_config, trace_json};
use rrseg_core::lexicon::Lexicons;
use rrseg_core::metrics::aggregate_report;
use rrseg_core::model::{
    init_flat, model_grad_check, predict_mask, run_model, synthetic_batch, synthetic_input,
    train_demo, ToyModelParams, DEFAULT_STEP, DEFAULT_TOLERANCE,
};

#[derive(Parser)]
#[command(
    name = "rrseg",
    version,
    about = "Robust referring image segmentation benchmark toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print progress diagnostics to stderr.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate negative sentences for an annotation file.
    Build(BuildArgs),
    /// Print per-split dataset statistics.
    Stats(StatsArgs),
    /// Score a predictions file against a built dataset.
    Eval(EvalArgs),
    /// Re-validate every stored negative sentence.
    Validate(ValidateArgs),
    /// Run the desk-scale model on synthetic input and dump its trace.
    DemoModel(DemoArgs),
    /// Check reverse-mode gradients against central differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Annotation JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Where to write the built robust dataset.
    #[arg(long)]
    output: PathBuf,
    /// "val" generates a fixed number of negatives per reference; "train"
    /// generates one per positive sentence.
    #[arg(long, default_value = "val", value_parser = ["train", "val"])]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Negatives per reference in val mode.
    #[arg(long, default_value_t = 10)]
    negatives_per_ref: usize,
    /// Override the built-in lexicon (sectioned plain-text file).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Drop absolute-position words from the attribute lexicons.
    #[arg(long)]
    exclude_absolute_positions: bool,
    /// Machine-readable summary on stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Built robust dataset.
    #[arg(long)]
    input: PathBuf,
    /// Predictions JSON covering every (reference, sentence) pair.
    #[arg(long)]
    predictions: PathBuf,
    /// Where to write the metric report JSON.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Precision thresholds, strictly inside (0, 1).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.7, 0.9])]
    thresholds: Vec<f64>,
    /// Print JSON instead of the table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    /// Model configuration JSON; defaults apply when omitted.
    #[arg(long)]
    model_config: Option<PathBuf>,
    /// Where to write the full trace JSON.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Seed for the synthetic input (model weights use the config seed).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run this many full-batch gradient-descent steps on synthetic data.
    #[arg(long, default_value_t = 0)]
    train_steps: usize,
    /// Step size for the training demo.
    #[arg(long, default_value_t = 0.02)]
    learning_rate: f64,
    /// Print the trace JSON on stdout instead of a summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long)]
    model_config: Option<PathBuf>,
    /// Number of sampled parameters.
    #[arg(long, default_value_t = 120)]
    samples: usize,
    /// Seed for input synthesis and parameter sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Deliberately offset the analytic gradient; the check must then fail.
    #[arg(long)]
    corrupt_gradient: bool,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_lexicons(path: Option<&PathBuf>) -> Result<Lexicons, Error> {
    match path {
        None => Ok(Lexicons::builtin()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| Error::Read {
                path: p.clone(),
                source,
            })?;
            Ok(Lexicons::parse(&text)?)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Build(args) => cmd_build(args, verbose),
        Command::Stats(args) => cmd_stats(args),
        Command::Eval(args) => cmd_eval(args, verbose),
        Command::Validate(args) => cmd_validate(args),
        Command::DemoModel(args) => cmd_demo_model(args, verbose),
        Command::Gradcheck(args) => cmd_gradcheck(args, verbose),
    }
}

fn cmd_build(args: BuildArgs, verbose: bool) -> Result<(), Error> {
    let dataset = Dataset::load(&args.input)?;
    if verbose {
        eprintln!(
            "loaded {} references over {} images",
            dataset.references.len(),
            dataset.images.len()
        );
    }
    let options = BuildOptions {
        mode: Split::from_label(&args.mode).expect("clap-validated"),
        negatives_per_ref: args.negatives_per_ref,
        seed: args.seed,
        lexicons: load_lexicons(args.lexicon.as_ref())?,
        exclude_absolute_positions: args.exclude_absolute_positions,
    };
    let built = build_robust_split(&dataset, &options)?;
    built.save(&args.output)?;
    let counts = strategy_counts(&built);
    let total: usize = counts.values().sum();
    if args.json {
        print!(
            "{}",
            to_canonical_string(&json!({
                "references": built.references.len(),
                "negatives": total,
                "strategies": counts,
            }))
        );
    } else {
        println!("references: {}", built.references.len());
        println!("negatives: {total}");
        for (strategy, count) in &counts {
            println!("  {strategy}: {count}");
        }
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), Error> {
    let dataset = Dataset::load(&args.input)?;
    let stats = compute_stats(&dataset)?;
    if args.json {
        let value: serde_json::Map<String, serde_json::Value> = stats
            .iter()
            .map(|(split, s)| {
                (
                    split.label().to_string(),
                    json!({
                        "reference_count": s.reference_count,
                        "sentences_per_reference": s.sentences_per_reference,
                        "negatives_per_reference": s.negatives_per_reference,
                    }),
                )
            })
            .collect();
        print!("{}", to_canonical_string(&value));
    } else {
        println!(
            "{:<6}  {:>10}  {:>13}  {:>13}",
            "split", "references", "sentences/ref", "negatives/ref"
        );
        for (split, s) in &stats {
            println!(
                "{:<6}  {:>10}  {:>13}  {:>13}",
                split.label(),
                s.reference_count,
                fixed6(s.sentences_per_reference),
                fixed6(s.negatives_per_reference)
            );
        }
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs, verbose: bool) -> Result<(), Error> {
    for t in &args.thresholds {
        if !(*t > 0.0 && *t < 1.0) {
            return Err(Error::Validation(format!(
                "threshold {t} must be strictly between 0 and 1"
            )));
        }
    }
    let dataset = Dataset::load(&args.input)?;
    let predictions: Vec<PredictionJson> = read_json(&args.predictions)?;
    if verbose {
        eprintln!(
            "evaluating {} predictions against {} references",
            predictions.len(),
            dataset.references.len()
        );
    }
    let evals = assemble_reference_evals(&dataset, &predictions)?;
    let report = aggregate_report(&evals, &args.thresholds)?;
    let rendered = render_report_json(&report);
    if let Some(path) = &args.output {
        std::fs::write(path, &rendered).map_err(|source| Error::Write {
            path: path.clone(),
            source,
        })?;
    }
    if args.json {
        print!("{rendered}");
    } else {
        print!("{}", render_report_table(&report));
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Error> {
    let dataset = Dataset::load(&args.input)?;
    let lexicons = load_lexicons(args.lexicon.as_ref())?;
    let offending = validate_dataset_negatives(&dataset, &lexicons);
    if offending.is_empty() {
        let total: usize = dataset.references.iter().map(|r| r.negatives.len()).sum();
        println!("ok: {total} negatives validated");
        return Ok(());
    }
    for (ref_id, text) in &offending {
        eprintln!("invalid negative in reference {ref_id}: {text:?}");
    }
    Err(Error::Validation(format!(
        "{} invalid negatives found",
        offending.len()
    )))
}

fn cmd_demo_model(args: DemoArgs, verbose: bool) -> Result<(), Error> {
    let cfg = load_model_config(args.model_config.as_deref())?;
    let (mut theta, _) = ToyModelParams::init(&cfg)?;

    if args.train_steps > 0 {
        let batch = synthetic_batch(&cfg, 32, 32, 2, args.seed);
        let losses = train_demo(
            &cfg,
            &mut theta,
            &batch,
            args.train_steps,
            args.learning_rate,
        )?;
        println!(
            "training demo ({} steps, batch 2, 1:1 labels):",
            args.train_steps
        );
        for (i, loss) in losses.iter().enumerate() {
            println!("  step {i}: loss {}", fixed6(*loss));
        }
    }

    let params = ToyModelParams::from_slice(&cfg, &theta)?;
    let input = synthetic_input(&cfg, 32, 32, args.seed);
    let trace = run_model(&params, &cfg, &input.image, &input.token_ids)?;

    let mut max_row_deviation: f64 = 0.0;
    let mut map_count = 0usize;
    for (_, attn) in trace.attention_maps() {
        let lanes = attn.shape()[attn.shape().len() - 1];
        for row in 0..attn.numel() / lanes {
            let sum: f64 = (0..lanes).map(|j| attn.data()[row * lanes + j]).sum();
            max_row_deviation = max_row_deviation.max((sum - 1.0).abs());
        }
        map_count += 1;
    }
    let mask = predict_mask(&trace);

    if let Some(path) = &args.output {
        write_canonical(path, &trace_json(&trace))?;
        if verbose {
            eprintln!("trace written to {}", path.display());
        }
    }
    if args.json {
        print!("{}", to_canonical_string(&trace_json(&trace)));
    } else {
        println!("exist_prob: {}", fixed6(trace.exist_prob));
        println!("attention maps: {map_count} (max row-sum deviation {max_row_deviation:.2e})");
        println!(
            "predicted mask: {} of {} pixels",
            mask.area(),
            mask.pixel_count()
        );
    }
    Ok(())
}

fn cmd_gradcheck(args: GradcheckArgs, verbose: bool) -> Result<(), Error> {
    let cfg = load_model_config(args.model_config.as_deref())?;
    let theta = init_flat(&cfg)?;
    let input = synthetic_input(&cfg, 32, 32, args.seed);
    if verbose {
        eprintln!(
            "checking {} of {} parameters (step {DEFAULT_STEP:.0e})",
            args.samples,
            theta.len()
        );
    }
    let report = model_grad_check(
        &cfg,
        &theta,
        &input,
        args.samples,
        DEFAULT_STEP,
        DEFAULT_TOLERANCE,
        args.seed,
        args.corrupt_gradient,
    )?;
    if args.json {
        print!("{}", to_canonical_string(&gradcheck_json(&report)));
    } else {
        println!(
            "gradient check: {} samples, max relative error {:.3e} (tolerance {:.0e}): {}",
            report.samples.len(),
            report.max_rel_error,
            report.tolerance,
            if report.passed() { "PASS" } else { "FAIL" }
        );
    }
    if !report.passed() {
        return Err(Error::Validation(format!(
            "gradient check failed: max relative error {:.3e} exceeds {:.0e}",
            report.max_rel_error, report.tolerance
        )));
    }
    Ok(())
}
