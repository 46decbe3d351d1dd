use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use latgate_cli::{emit, run, template, CliError, CliResult, ExperimentConfig};

#[derive(Parser)]
#[command(name = "latgate", version, about = "Two-species optical lattice gate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override one config value, e.g. `--set model.u_ab=2.0` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps; default uses all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Leave the timestamp out of the metadata so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,

    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Plot,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Simulate { config: PathBuf },
    /// Exchange dynamics from |01> over the action axis.
    Figure3 {
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// sqrt(SWAP) populations and fidelity against U/J.
    Figure4 {
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// C2P gate and the Toffoli built from it.
    Toffoli {
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print a shipped template (defaults, figure3, figure4, toffoli).
    Template { name: String },
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn execute(cli: Cli) -> CliResult<()> {
    let (text, mut overrides) = match &cli.command {
        Command::Simulate { config } => {
            let text = std::fs::read_to_string(config).map_err(|source| CliError::Io {
                path: config.clone(),
                source,
            })?;
            (text, Vec::new())
        }
        Command::Figure3 { overrides } | Command::Figure4 { overrides } | Command::Toffoli { overrides } => {
            let name = match cli.command {
                Command::Figure3 { .. } => "figure3",
                Command::Figure4 { .. } => "figure4",
                _ => "toffoli",
            };
            (template(name).expect("shipped").to_string(), overrides.clone())
        }
        Command::Template { name } => {
            let text = template(name).ok_or_else(|| CliError::Usage(format!("no template named `{name}`")))?;
            print!("{text}");
            return Ok(());
        }
    };
    overrides.extend(cli.set.iter().cloned());
    if let Some(dir) = &cli.out {
        overrides.push(format!("output.dir={}", quoted(&dir.to_string_lossy())));
    }
    if cli.no_timestamp {
        overrides.push("output.timestamp=false".into());
    }
    if let Some(f) = cli.format {
        let f = match f {
            FormatArg::Csv => "csv",
            FormatArg::Plot => "plot",
        };
        overrides.push(format!("output.format={}", quoted(f)));
    }
    let cfg = ExperimentConfig::parse_with(&text, &overrides)?;
    let outputs = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(|| run(&cfg))?,
        None => run(&cfg)?,
    };
    for path in emit(&cfg, &outputs)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
