mod settings;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beamalign::{
    build_channel_codebook_with, build_sounding_codebook, run_experiment, Codebook, Error,
    ExperimentSummary, Result,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "beamalign", version, about = "Closed-loop beam alignment simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte-Carlo comparison of closed-loop and open-loop alignment.
    Run(RunArgs),
    /// Write a codebook in the `re:im` text format.
    Codebook(CodebookArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// key=value settings file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    antennas: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    snr_db: Option<f64>,
    /// Noise variance (defaults to 1; transmit power follows from the SNR).
    #[arg(long)]
    noise_variance: Option<f64>,
    #[arg(long)]
    channel_uses: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// exact-binary, union or two-term.
    #[arg(long)]
    strategy: Option<String>,
    /// grid or continuous.
    #[arg(long)]
    draw_mode: Option<String>,
    /// Posterior refresh: marginal (gain integrated out) or glrt.
    #[arg(long)]
    posterior: Option<String>,
    /// Channel codebook size as a multiple of the antenna count.
    #[arg(long)]
    codebook_mult: Option<usize>,
    #[arg(long)]
    sounding_size: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Keep aliased channel codebook entries instead of nudging them apart.
    #[arg(long)]
    no_dedup: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum CodebookKind {
    Channel,
    Sounding,
}

#[derive(Args, Debug)]
struct CodebookArgs {
    #[arg(long, value_enum)]
    kind: CodebookKind,
    #[arg(long)]
    antennas: usize,
    /// Number of entries (defaults to 2M for channel, M for sounding).
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    no_dedup: bool,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Codebook(args) => export_codebook(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        _ => 2,
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut values = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            settings::parse_file(&text)?
        }
        None => BTreeMap::new(),
    };
    merge_overrides(&mut values, &args);
    let run = settings::resolve(&values)?;

    let summary = run_experiment(&run.config, run.threads)?;
    summary.save_csv(&run.out)?;
    print_summary(&summary, &run.out);
    Ok(())
}

fn merge_overrides(values: &mut BTreeMap<String, String>, args: &RunArgs) {
    let mut set = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            values.insert(key.to_string(), v);
        }
    };
    set("antennas", args.antennas.map(|v| v.to_string()));
    set("snr-db", args.snr_db.map(|v| v.to_string()));
    set("noise-variance", args.noise_variance.map(|v| v.to_string()));
    set("channel-uses", args.channel_uses.map(|v| v.to_string()));
    set("trials", args.trials.map(|v| v.to_string()));
    set("seed", args.seed.map(|v| v.to_string()));
    set("strategy", args.strategy.clone());
    set("draw-mode", args.draw_mode.clone());
    set("posterior", args.posterior.clone());
    set("codebook-mult", args.codebook_mult.map(|v| v.to_string()));
    set("sounding-size", args.sounding_size.map(|v| v.to_string()));
    set("out", args.out.as_ref().map(|p| p.display().to_string()));
    set("threads", args.threads.map(|v| v.to_string()));
    if args.no_dedup {
        set("no-dedup", Some("true".into()));
    }
}

fn print_summary(summary: &ExperimentSummary, out: &Path) {
    let cfg = &summary.config;
    println!(
        "M={} N={} L={} SNR={} dB strategy={} posterior={} trials={} seed={}",
        cfg.num_antennas,
        cfg.channel_codebook_size,
        cfg.sounding_codebook_size,
        cfg.snr_db(),
        cfg.strategy,
        cfg.posterior,
        summary.trials,
        cfg.rng_seed
    );
    println!("{:>4} {:>12} {:>12} {:>10}", "k", "closed [dB]", "open [dB]", "delta");
    for p in &summary.closed_loop {
        match summary.open_loop.iter().find(|o| o.k == p.k) {
            Some(o) => println!(
                "{:>4} {:>12.3} {:>12.3} {:>10.3}",
                p.k,
                p.mean_db(),
                o.mean_db(),
                p.mean_db() - o.mean_db()
            ),
            None => println!("{:>4} {:>12.3} {:>12} {:>10}", p.k, p.mean_db(), "-", "-"),
        }
    }
    println!(
        "final alignment rate {:.3}, {} PEP evaluations, {:.2?}",
        summary.alignment_rate, summary.pep_calls, summary.elapsed
    );
    println!("wrote {}", out.display());
}

fn export_codebook(args: CodebookArgs) -> Result<()> {
    let m = args.antennas;
    if m == 0 {
        return Err(Error::Config("antennas must be at least 1".into()));
    }
    let book: Codebook = match args.kind {
        CodebookKind::Channel => {
            let n = args.size.unwrap_or(2 * m);
            if n == 0 {
                return Err(Error::Config("size must be at least 1".into()));
            }
            build_channel_codebook_with(m, n, !args.no_dedup)
        }
        CodebookKind::Sounding => {
            let l = args.size.unwrap_or(m);
            if l == 0 {
                return Err(Error::Config("size must be at least 1".into()));
            }
            build_sounding_codebook(m, l)
        }
    };
    let path = &args.out;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    book.write_text(&mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
