use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairpost_core::runner::{audit, preset_text, PolicyFile, PRESET_NAMES};
use fairpost_core::{
    load_config, parse_config, run_scenario, Error, ErrorCategory, Population, ReportFormat,
    ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "fairpost",
    version,
    about = "Fairness post-processing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, env = "FAIRPOST_OUT_DIR", default_value = "fairpost-out")]
        out: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Write a shipped scenario to `<out>/config.toml` and run it.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
        name: String,
        #[arg(long, env = "FAIRPOST_OUT_DIR")]
        out: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Recompute metrics for a population dump under a policy file.
    Audit {
        population_dump: PathBuf,
        policy_file: PathBuf,
        /// Write `audit.csv`/`audit.txt` here instead of printing.
        #[arg(long, env = "FAIRPOST_OUT_DIR")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Rows)]
        format: Format,
    },
}

#[derive(Args)]
struct RunOpts {
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the replicate count.
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Rows)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Rows,
    Structured,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Rows => ReportFormat::Rows,
            Format::Structured => ReportFormat::Structured,
        }
    }
}

/// Writes next to the target, then renames over it.
fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, &target)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| Error::file(&target, e))?;
    Ok(target)
}

fn run_config(mut cfg: ScenarioConfig, out: &Path, opts: &RunOpts) -> Result<(), Error> {
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(r) = opts.replicates {
        if r == 0 {
            return Err(Error::ConfigField {
                field: "replicates".into(),
                message: "must be at least 1".into(),
            });
        }
        cfg.replicates = r;
    }
    let report = run_scenario(&cfg)?;
    for (name, contents) in report.files(opts.format.into())? {
        let path = write_atomic(out, &name, contents.as_bytes())?;
        println!("wrote {}", path.display());
    }
    println!("verdict {}", report.utility.verdict);
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, out, opts } => run_config(load_config(&config)?, &out, &opts),
        Command::Preset { name, out, opts } => {
            let text = preset_text(&name).expect("clap restricts preset names");
            let cfg = parse_config(text)?;
            let path = write_atomic(&out, "config.toml", text.as_bytes())?;
            println!("wrote {}", path.display());
            run_config(cfg, &out, &opts)
        }
        Command::Audit {
            population_dump,
            policy_file,
            out,
            format,
        } => {
            let dump =
                fs::File::open(&population_dump).map_err(|e| Error::file(&population_dump, e))?;
            let population = Population::read_dump(dump)?;
            let policy_text =
                fs::read_to_string(&policy_file).map_err(|e| Error::file(&policy_file, e))?;
            let policy = PolicyFile::parse(&policy_text)?;
            let report = audit(&population, &policy)?;
            let format: ReportFormat = format.into();
            let text = report.render(format);
            match out {
                Some(dir) => {
                    let name = match format {
                        ReportFormat::Rows => "audit.csv",
                        ReportFormat::Structured => "audit.txt",
                    };
                    let path = write_atomic(&dir, name, text.as_bytes())?;
                    println!("wrote {}", path.display());
                }
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        ErrorCategory::Validation => 2,
        ErrorCategory::Io => 3,
        ErrorCategory::Runtime => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
