// SPDX-License-Identifier: Apache-2.0

//! File-based interface to an external DIMACS solver.

use std::io::Read;
use std::process::{Command, Stdio};
use std::time::Duration;

use super::cnf::{parse_solver_output, Cnf, CnfResult};
use super::sat::Budget;

/// Writes `cnf` to a temporary file, runs `command` with its path appended
/// and parses the `s`/`v` lines. The process is killed when the budget runs
/// out.
pub fn run_external_solver(cnf: &Cnf, command: &[String], budget: &Budget) -> CnfResult {
    let Some((program, args)) = command.split_first() else {
        return CnfResult::Unknown("no external solver command".to_owned());
    };
    let file = match tempfile::Builder::new().suffix(".cnf").tempfile() {
        Ok(f) => f,
        Err(e) => return CnfResult::Unknown(format!("temporary file: {e}")),
    };
    if let Err(e) = std::fs::write(file.path(), cnf.to_dimacs()) {
        return CnfResult::Unknown(format!("writing CNF: {e}"));
    }
    let mut child = match Command::new(program)
        .args(args)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return CnfResult::Unknown(format!("cannot run `{program}`: {e}")),
    };
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if let Some(why) = budget.expired() {
                    let _ = child.kill();
                    let _ = child.wait();
                    let _ = reader.join();
                    return CnfResult::Unknown(why.to_owned());
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return CnfResult::Unknown(format!("waiting for solver: {e}")),
        }
    }
    let out = reader.join().unwrap_or_default();
    parse_solver_output(&out, cnf.num_vars)
}
