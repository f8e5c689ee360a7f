use clap::Parser;
use hofmat::{exit_code, run, Cli, RunOptions};

fn main() {
    let cli = Cli::parse();
    let Some(config) = cli.config else {
        eprintln!("config error: --config PATH is required");
        std::process::exit(2);
    };
    let opts = RunOptions {
        config,
        out: cli.out,
        threads: cli.threads,
        seed: cli.seed,
    };
    let result = run(cli.command, &opts);
    match &result {
        Ok(s) => {
            for c in s.checks.iter().filter(|c| !c.passed) {
                let kind = if c.hard { "FAIL" } else { "WARN" };
                eprintln!("{kind} {}: {} (tolerance {})", c.name, c.value, c.tolerance);
            }
            for w in &s.warnings {
                eprintln!("WARN {w}");
            }
            println!("{} {}", s.command, if s.passed { "passed" } else { "failed" });
        }
        Err(e) => eprintln!("{e}"),
    }
    std::process::exit(exit_code(&result));
}
