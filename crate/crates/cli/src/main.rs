use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cosetc::{execute, init_threads, Format, Overrides};

/// Finite balls of coset intersection complexes and related graphs.
#[derive(Parser, Debug)]
#[command(name = "cosetc", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for artifacts; without it they are printed.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    max_dim: Option<usize>,
    #[arg(long)]
    cap_vertices: Option<usize>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        seed: args.seed,
        radius: args.radius,
        tau: args.tau,
        max_dim: args.max_dim,
        cap_vertices: args.cap_vertices,
        format: args.format,
        out: args.out.clone(),
    };
    let result = init_threads().and_then(|_| {
        let text = std::fs::read_to_string(&args.config)?;
        execute(&text, &overrides)
    });
    match result {
        Ok((artifacts, written)) => {
            if !written {
                for a in &artifacts {
                    print!("{}", a.contents);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprint!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
