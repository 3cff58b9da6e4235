use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spicegen::{check, generate_file, GenError, GenOptions};

#[derive(Parser, Debug)]
#[command(name = "spicegen", about = "Generate a web application from an ER model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the application source tree.
    Generate {
        /// Model in `.erdterm` notation.
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write into a nonempty output directory.
        #[arg(long)]
        force: bool,
        /// Runtime library path used in the generated Cargo.toml.
        #[arg(long)]
        runtime: Option<String>,
    },
    /// Validate a model without generating anything.
    Check { file: PathBuf },
    /// Print the generator version.
    Version,
}

fn fail(e: &GenError) -> ExitCode {
    eprintln!("spicegen: {e}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate {
            file,
            out,
            force,
            runtime,
        } => {
            let mut options = GenOptions::default();
            if let Some(r) = runtime {
                options.runtime_path = r;
            }
            match generate_file(&file, &out, force, &options) {
                Ok(tree) => {
                    for path in tree.keys() {
                        println!("{}", out.join(path).display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Check { file } => {
            let source = match fs::read_to_string(&file) {
                Ok(s) => s,
                Err(source) => return fail(&GenError::Io { path: file, source }),
            };
            match check(&source) {
                Ok(erd) => {
                    eprintln!("{}: model {} is valid", file.display(), erd.name);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Version => {
            println!("spicegen {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
    }
}
