use std::process::exit;

use clap::Parser;

use abperc::cli::{exit_code, run, Cli, RunOutcome};

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
                eprintln!("abperc: failed to size thread pool: {e}");
                exit(2);
            }
        }
    }
    match run(&cli) {
        Ok(RunOutcome::Wrote(path)) => println!("{}", path.display()),
        Ok(RunOutcome::Violations(v)) if v.is_empty() => println!("ok"),
        Ok(RunOutcome::Violations(v)) => {
            for line in &v {
                println!("{line}");
            }
            exit(2);
        }
        Err(e) => {
            eprintln!("abperc: {e}");
            exit(exit_code(&e));
        }
    }
}
