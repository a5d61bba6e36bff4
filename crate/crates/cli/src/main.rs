//! Command-line driver: reads a script from a file or stdin and prints one
//! JSON report per command.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use semilin_core::cohom::CoeffRing;
use semilin_core::dsl::{error_json, exit_code, load, parse, reports_json, run, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "semilin", version, about = "Topology and cohomology of semilinear sets over the rationals with infinity")]
struct Args {
    /// Script file; reads stdin when absent or `-`.
    script: Option<PathBuf>,

    /// Coefficient ring: Q, Z or Z2.
    #[arg(long, default_value = "Q")]
    coeff: CoeffRing,

    /// Emit JSON (the default).
    #[arg(long, conflicts_with = "text")]
    json: bool,

    /// Emit one human-readable line per command instead of JSON.
    #[arg(long)]
    text: bool,

    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Stop at the first failing command.
    #[arg(long)]
    strict: bool,

    /// Run symbolic audits alongside each command.
    #[arg(long)]
    validate: bool,

    /// Evaluate commands concurrently; output keeps script order.
    #[arg(long)]
    parallel: bool,

    /// Report 0 for every timing so output is byte-for-byte reproducible.
    #[arg(long)]
    no_timing: bool,
}

fn read_source(path: &Option<PathBuf>) -> std::io::Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p),
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let src = match read_source(&args.script) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("semilin: cannot read script: {e}");
            return ExitCode::from(2);
        }
    };
    let loaded = parse(&src).and_then(|script| load(&src, &script));
    let loaded = match loaded {
        Ok(l) => l,
        Err(e) => {
            eprintln!("semilin: {e}");
            if !args.text {
                println!("{}", serde_json::to_string_pretty(&error_json(&e)).expect("json"));
            }
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions {
        coeff: args.coeff,
        seed: args.seed,
        strict: args.strict,
        validate: args.validate,
        parallel: args.parallel,
        timing: !args.no_timing,
    };
    let reports = run(&loaded, &opts);
    if args.text {
        for r in &reports {
            let status = if r.ok { "ok" } else { "FAILED" };
            println!("{status}  {}  {}", r.command, r.result);
            for d in &r.diagnostics {
                println!("    {d}");
            }
        }
    } else {
        println!("{}", serde_json::to_string_pretty(&reports_json(&reports)).expect("json"));
    }
    ExitCode::from(exit_code(&reports) as u8)
}
