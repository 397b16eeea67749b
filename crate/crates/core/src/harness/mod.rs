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


//! Scenario language, command engine, runner and HTTP service.

pub mod dsl;
pub mod engine;
pub mod runner;
pub mod server;

pub use dsl::{load_scenario, parse_scenario, Command, Expectation, Scenario, ScenarioSyntaxError, Seed};
pub use engine::Engine;
pub use runner::{run, run_checked, Failure, RunError, RunReport};
