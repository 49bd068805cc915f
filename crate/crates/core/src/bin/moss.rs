use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use moss::gas::GasPrice;
use moss::scenario::{
    events_jsonl, run_scenario, tx_log_jsonl, tx_log_text, verify_chain_file, RunOptions, ScenarioConfig,
    SettlementReport,
};

#[derive(Parser)]
#[command(name = "moss", version, about = "Spectrum-sharing ledger: run scenarios, verify chain files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Format of the transaction log written to stdout.
    #[arg(long, value_enum, global = true, default_value_t = LogFormat::Text)]
    log_format: LogFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario through consensus and the contract.
    Run {
        config: PathBuf,
        /// Network seed, overriding `consensus.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Gas price in Gwei, e.g. 4.3.
        #[arg(long)]
        gas_price: Option<GasPrice>,
        /// Write the settlement report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Directory for chain.moss, events.jsonl and trace.jsonl.
        #[arg(long, default_value = "moss-out")]
        out: PathBuf,
    },
    /// Re-verify a chain file and replay its contract state.
    Verify { chain: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LogFormat {
    Text,
    Jsonl,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, gas_price, report, out } => {
            run(&config, RunOptions { seed, gas_price }, report.as_deref(), &out, cli.log_format)
        }
        Command::Verify { chain } => verify(&chain, cli.log_format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(
    path: &Path,
    options: RunOptions,
    report_path: Option<&Path>,
    out: &Path,
    format: LogFormat,
) -> Result<(), String> {
    let config = ScenarioConfig::load(path)?;
    let run = run_scenario(&config, &options).map_err(|e| e.to_string())?;

    match format {
        LogFormat::Text => print!("{}", tx_log_text(&run)),
        LogFormat::Jsonl => print!("{}", tx_log_jsonl(&run)),
    }

    fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    let write = |name: &str, bytes: &[u8]| {
        let file = out.join(name);
        fs::write(&file, bytes).map_err(|e| format!("{}: {e}", file.display()))
    };
    write("chain.moss", &run.chain_file)?;
    write("events.jsonl", events_jsonl(&run).as_bytes())?;
    write("trace.jsonl", run.trace_jsonl.as_bytes())?;

    let report = SettlementReport::from_run(&run).render();
    match report_path {
        Some(p) => fs::write(p, &report).map_err(|e| format!("{}: {e}", p.display()))?,
        None if format == LogFormat::Text => print!("\n{report}"),
        None => eprint!("{report}"),
    }
    eprintln!("artifacts written to {}", out.display());
    Ok(())
}

fn verify(path: &Path, format: LogFormat) -> Result<(), String> {
    let verified = verify_chain_file(path).map_err(|e| e.to_string())?;
    match format {
        LogFormat::Text => {
            println!("ok: {} ({} blocks)", verified.name, verified.blocks);
            println!("head digest  {}", verified.head_digest);
            println!("state digest {}", verified.state_digest);
        }
        LogFormat::Jsonl => println!(
            "{}",
            serde_json::json!({
                "status": "ok",
                "scenario": verified.name,
                "blocks": verified.blocks,
                "head_digest": verified.head_digest,
                "state_digest": verified.state_digest,
            })
        ),
    }
    Ok(())
}
