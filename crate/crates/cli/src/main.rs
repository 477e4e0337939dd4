// SPDX-License-Identifier: MIT OR Apache-2.0

use clap::Parser;

use eras_cli::args::{Cli, Command};
use eras_cli::{run_calibrate, run_detect, run_plot};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on malformed flags, before anything is read
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Detect(args) => run_detect(args).map(|(path, text)| {
            print!("{text}");
            eprintln!("wrote {}", path.display());
        }),
        Command::Calibrate(args) => run_calibrate(args).map(|path| eprintln!("wrote {}", path.display())),
        Command::Plot(args) => run_plot(args).map(|paths| {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }),
    };
    if let Err(e) = outcome {
        eprintln!("eras: {e}");
        std::process::exit(e.exit_code());
    }
}
