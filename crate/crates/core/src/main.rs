use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ssd_core::cli::{emit_plotdata, parse_key_values, run, validate, ValidationReport};

#[derive(Parser)]
#[command(name = "ssd", version, about = "Stochastic steepest descent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write history.csv plus manifest.json.
    Run(ConfigArgs),
    /// Check a configuration without running it.
    Validate(ConfigArgs),
    /// Convert a history CSV into whitespace-separated plot columns.
    Plotdata {
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    iters: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    kmax: Option<String>,
    #[arg(long)]
    t0: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    energy_every: Option<String>,
    #[arg(long)]
    mc_samples: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ValidationReport, String> {
        let mut raw = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                parse_key_values(&text).map_err(|e| e.to_string())?
            }
            None => BTreeMap::new(),
        };
        let overrides = [
            ("experiment", &self.experiment),
            ("mesh", &self.mesh),
            ("p", &self.p),
            ("iters", &self.iters),
            ("seed", &self.seed),
            ("beta", &self.beta),
            ("tau", &self.tau),
            ("alpha", &self.alpha),
            ("kmax", &self.kmax),
            ("t0", &self.t0),
            ("gamma", &self.gamma),
            ("energy_every", &self.energy_every),
            ("mc_samples", &self.mc_samples),
            ("out", &self.out),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                raw.insert(key.to_string(), v.clone());
            }
        }
        Ok(validate(&raw))
    }
}

fn resolve_or_report(args: &ConfigArgs) -> Option<ValidationReport> {
    match args.resolve() {
        Ok(report) if report.is_valid() => Some(report),
        Ok(report) => {
            for e in &report.errors {
                eprintln!("error: {e}");
            }
            None
        }
        Err(e) => {
            eprintln!("error: {e}");
            None
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate(args) => match resolve_or_report(&args) {
            Some(report) => {
                let cfg = report.config.expect("valid report");
                println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
                ExitCode::SUCCESS
            }
            None => ExitCode::from(2),
        },
        Command::Run(args) => {
            let Some(report) = resolve_or_report(&args) else {
                return ExitCode::from(2);
            };
            let cfg = report.config.expect("valid report");
            match run(&cfg) {
                Ok(summary) => {
                    for h in &summary.histories {
                        println!(
                            "{}: {} iterations -> {}",
                            h.name,
                            h.iterations,
                            cfg.out.join(&h.file).display()
                        );
                    }
                    if let Some(d) = summary.identity_max_abs_diff {
                        println!("sgd vs scaled ssd max nodal difference: {d:.3e}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Plotdata { input, output } => {
            let result = std::fs::read_to_string(&input)
                .map_err(|e| e.to_string())
                .and_then(|text| emit_plotdata(&text).map_err(|e| e.to_string()));
            match result {
                Ok(data) => {
                    match output {
                        Some(path) => {
                            if let Err(e) = std::fs::write(&path, data) {
                                eprintln!("error: cannot write {}: {e}", path.display());
                                return ExitCode::FAILURE;
                            }
                        }
                        None => print!("{data}"),
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {}: {e}", input.display());
                    ExitCode::FAILURE
                }
            }
        }
    }
}
