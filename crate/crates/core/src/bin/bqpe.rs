use std::path::PathBuf;
use std::process::ExitCode;

use bayes_qpe::harness::config::{self, KEYS};
use bayes_qpe::harness::{run_batch, ConfigMap, RunConfig};
use clap::{Arg, ArgAction, Command};

fn cli() -> Command {
    let mut cmd = Command::new("bqpe")
        .about("Batch driver for Bayesian phase estimation experiments")
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("key=value file; flags override its entries"),
        )
        .arg(
            Arg::new("print-config")
                .long("print-config")
                .action(ArgAction::SetTrue)
                .help("print the resolved configuration and exit"),
        );
    for &key in KEYS {
        cmd = cmd.arg(Arg::new(key).long(key).value_name("VALUE").allow_hyphen_values(true));
    }
    cmd
}

fn resolve(matches: &clap::ArgMatches) -> bayes_qpe::Result<RunConfig> {
    let base = match matches.get_one::<PathBuf>("config") {
        Some(path) => config::load_config_file(path)?,
        None => ConfigMap::new(),
    };
    let flags: ConfigMap = KEYS
        .iter()
        .filter_map(|&k| matches.get_one::<String>(k).map(|v| (k.to_string(), v.clone())))
        .collect();
    RunConfig::from_map(&config::merge(base, flags)?)
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let cfg = match resolve(&matches) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("bqpe: {e}");
            return ExitCode::from(2);
        }
    };
    if matches.get_flag("print-config") {
        for (k, v) in cfg.to_map() {
            println!("{k}={v}");
        }
        return ExitCode::SUCCESS;
    }
    match run_batch(&cfg) {
        Ok(report) => {
            let successes = report.outcomes.iter().filter(|o| o.success).count();
            let diverged = report.outcomes.iter().filter(|o| o.log.diverged_at.is_some()).count();
            if let Some(last) = report.aggregate.last() {
                println!(
                    "{} trials in {:.2}s: median phase error {:.3e}, median weight error {:.3e} at iteration {}",
                    report.outcomes.len(),
                    report.wall_seconds,
                    last.phase_error,
                    last.weight_error,
                    last.iteration
                );
            }
            println!("successes {successes}, diverged {diverged}, output in {}", cfg.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("bqpe: {e}");
            ExitCode::FAILURE
        }
    }
}
