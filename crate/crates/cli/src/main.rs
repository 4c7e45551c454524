use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};
use mera_cli::{parse_config_file, run, CliError, CliResult, ExperimentConfig, Plan, COMMANDS};

fn cli() -> Command {
    let mut cmd = Command::new("mera")
        .about("Random MERA entanglement and super-operator spectra workbench")
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("flat key = value file; flags override its entries"),
        );
    for spec in COMMANDS {
        let mut sub = Command::new(spec.name).about(spec.about);
        for k in spec.keys {
            let help = match k.default {
                Some(d) => format!("{} [default: {d}]", k.help),
                None => k.help.to_string(),
            };
            sub = sub.arg(Arg::new(k.name).long(k.name).value_name("VALUE").help(help));
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn resolve(name: &str, m: &ArgMatches) -> CliResult<Plan> {
    let spec = mera_cli::command_spec(name).expect("subcommands come from the table");
    let file = match m.get_one::<String>("config") {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("config {p}: {e}")))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    let flags = spec
        .keys
        .iter()
        .filter_map(|k| m.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone())))
        .collect();
    Plan::from_config(&ExperimentConfig::resolve(name, file, flags)?)
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let result = resolve(name, sub).and_then(|plan| {
        let to_stdout = plan.out.is_none();
        let summary = run(&plan)?;
        if to_stdout {
            eprintln!("{summary}");
        } else {
            println!("{summary}");
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
