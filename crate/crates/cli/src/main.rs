use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let args = rabi::Args::parse();
    match rabi::run(&args) {
        Ok(summary) => {
            for f in summary.files.iter().chain(std::iter::once(&summary.meta)) {
                println!("{}", args.out.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rabi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
