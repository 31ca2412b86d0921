use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use kato_cli::commands::{exit, json_indent, output_path, run, tolerances_json, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::INPUT as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let Some(command) = cli.command else {
        if cli.tolerances {
            println!("{}", tolerances_json(2));
            return ExitCode::SUCCESS;
        }
        eprintln!("error: no command given; see --help");
        return ExitCode::from(exit::INPUT as u8);
    };
    if cli.tolerances {
        println!("{}", tolerances_json(json_indent(&command)));
        return ExitCode::SUCCESS;
    }
    let output = output_path(&command).map(|p| p.to_path_buf());
    let outcome = run(command);
    let mut code = outcome.code;
    if let Some(text) = &outcome.output {
        let written = match &output {
            Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .and_then(|_| if text.ends_with('\n') { Ok(()) } else { stdout.write_all(b"\n") })
                    .map_err(|e| e.to_string())
            }
        };
        if let Err(e) = written {
            eprintln!("error: {e}");
            code = exit::INPUT;
        }
    }
    if let Some(msg) = &outcome.message {
        eprintln!("{}: {msg}", if code == exit::OK { "note" } else { "error" });
    }
    ExitCode::from(code as u8)
}
