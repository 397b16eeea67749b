// Copyright 2026 The ctxbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ctxbridge::contract::parse_contract;
use ctxbridge::harness::{self, server};
use ctxbridge::registry::Registry;

#[derive(Parser)]
#[command(name = "ctxbridge", version, about = "Context-aware platform bridge simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file and check its expectations.
    Run {
        scenario: PathBuf,
        /// Write the event log here as NDJSON.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory for registry tables and logs.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Contract documents.
    Contract {
        #[command(subcommand)]
        cmd: ContractCmd,
    },
    /// Registry tables.
    Registry {
        #[command(subcommand)]
        cmd: RegistryCmd,
    },
}

#[derive(Subcommand)]
enum ContractCmd {
    /// Parse a contract and report whether it is in canonical form.
    Check {
        file: PathBuf,
        /// Print the canonical rendering.
        #[arg(long)]
        render: bool,
    },
}

#[derive(Subcommand)]
enum RegistryCmd {
    /// Validate the TSV tables in a directory, optionally copying them
    /// into a state directory.
    Import {
        dir: PathBuf,
        #[arg(long)]
        state: Option<PathBuf>,
    },
}

fn run(scenario: PathBuf, log: Option<PathBuf>) -> ExitCode {
    let sc = match harness::load_scenario(&scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match harness::run(&sc) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(path) = log {
        if let Err(e) = std::fs::write(&path, report.log().to_ndjson()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    let total = sc.expectations().count();
    for f in &report.failures {
        println!("FAIL {f}");
    }
    println!(
        "{}: {} events, {}/{} expectations passed",
        sc.name.as_deref().unwrap_or("scenario"),
        report.log().len(),
        total - report.failures.len(),
        total
    );
    if report.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn serve(port: u16, state: Option<PathBuf>) -> ExitCode {
    let rt = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return ExitCode::from(2);
        }
    };
    eprintln!("ctxbridge: listening on 127.0.0.1:{port}");
    match rt.block_on(server::serve(port, state.as_deref())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn contract_check(file: PathBuf, render: bool) -> ExitCode {
    let src = match std::fs::read_to_string(&file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return ExitCode::from(2);
        }
    };
    match parse_contract(&src) {
        Ok(c) => {
            let canonical = c.render();
            if render {
                println!("{canonical}");
            } else {
                let form = if canonical == src { "canonical" } else { "not canonical" };
                println!("{}: {} operation(s), {form}", c.name, c.operations.len());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            ExitCode::FAILURE
        }
    }
}

fn registry_import(dir: PathBuf, state: Option<PathBuf>) -> ExitCode {
    let reg = match Registry::load(&dir) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!(
        "{} profiles, {} services, {} locations",
        reg.profiles().count(),
        reg.services().count(),
        reg.locations().count()
    );
    if let Some(state) = state {
        if let Err(e) = std::fs::create_dir_all(&state).map_err(|e| e.to_string()).and_then(|_| {
            reg.save(&state).map_err(|e| e.to_string())
        }) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        println!("imported into {}", state.display());
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run { scenario, log } => run(scenario, log),
        Cmd::Serve { port, state } => serve(port, state),
        Cmd::Contract { cmd: ContractCmd::Check { file, render } } => contract_check(file, render),
        Cmd::Registry { cmd: RegistryCmd::Import { dir, state } } => registry_import(dir, state),
    }
}
