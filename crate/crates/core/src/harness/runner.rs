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


//! Deterministic scenario runs.

use std::fmt;

use thiserror::Error;

use crate::events::EventLog;
use crate::registry::RegistryError;

use super::dsl::{Scenario, StepKind};
use super::engine::Engine;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub tick: u64,
    pub line: usize,
    pub expectation: String,
    pub actual: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tick {} line {}: expected {}, got {}",
            self.tick, self.line, self.expectation, self.actual
        )
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot seed registry: {0}")]
    Seed(#[from] RegistryError),
    #[error("{} expectation(s) failed:\n{}", .0.len(), .0.iter().map(|f| format!("  {f}")).collect::<Vec<_>>().join("\n"))]
    ExpectationFailed(Vec<Failure>),
}

#[derive(Debug)]
pub struct RunReport {
    pub engine: Engine,
    pub failures: Vec<Failure>,
}

impl RunReport {
    pub fn log(&self) -> &EventLog {
        self.engine.log()
    }
}

/// Plays every step in order, then releases whatever is still scheduled.
/// Failed commands are logged and do not stop the run.
pub fn run(sc: &Scenario) -> Result<RunReport, RunError> {
    let mut engine = Engine::from_seed(&sc.seed)?;
    let mut failures = Vec::new();
    for step in &sc.steps {
        match &step.kind {
            StepKind::Command(c) => {
                let _ = engine.execute(step.tick, c);
            }
            StepKind::Expect(e) => {
                engine.advance_to(step.tick);
                if let Err(actual) = engine.check(step.line, e) {
                    failures.push(Failure {
                        tick: step.tick,
                        line: step.line,
                        expectation: e.to_string(),
                        actual,
                    });
                }
            }
        }
    }
    engine.drain_schedule();
    Ok(RunReport { engine, failures })
}

/// Like [`run`], but any failed expectation is an error.
pub fn run_checked(sc: &Scenario) -> Result<EventLog, RunError> {
    let r = run(sc)?;
    if r.failures.is_empty() {
        Ok(r.engine.log().clone())
    } else {
        Err(RunError::ExpectationFailed(r.failures))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::dsl::parse_scenario;

    #[test]
    fn empty_scenario_completes() {
        let log = run_checked(&parse_scenario("").unwrap()).unwrap();
        assert!(log.records().iter().all(|r| r.tick == 0));
    }

    #[test]
    fn failures_name_tick_and_line() {
        let sc = parse_scenario("at 0 device tv power off\n\nat 2 expect device tv on\n").unwrap();
        match run_checked(&sc) {
            Err(RunError::ExpectationFailed(f)) => {
                assert_eq!(f.len(), 1);
                assert_eq!((f[0].tick, f[0].line), (2, 3));
                assert_eq!(f[0].actual, "off");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trailing_schedule_is_drained() {
        let sc = parse_scenario("at 0 alarm schedule tick=7 source=s severity=normal text=t\n").unwrap();
        let log = run_checked(&sc).unwrap();
        assert_eq!(log.records().last().unwrap().tick, 7);
    }
}
