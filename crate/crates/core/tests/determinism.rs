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


mod common;

use std::path::Path;

use ctxbridge::events::EventLog;
use ctxbridge::gateway::Gateway;
use ctxbridge::harness::{load_scenario, parse_scenario, run, run_checked};
use ctxbridge::orb::Severity;

fn case_study_path() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/scenarios/case_study.scn"))
}

#[test]
fn case_study_twice_is_byte_identical() {
    let sc = load_scenario(case_study_path()).unwrap();
    let a = run_checked(&sc).unwrap().to_ndjson();
    let b = run_checked(&sc).unwrap().to_ndjson();
    assert_eq!(a, b);
}

#[test]
fn storm_twice_is_byte_identical() {
    let sc = parse_scenario(&common::alarm_storm(11, 150)).unwrap();
    assert_eq!(run(&sc).unwrap().log().to_ndjson(), run(&sc).unwrap().log().to_ndjson());
}

#[test]
fn log_file_round_trips() {
    let sc = load_scenario(case_study_path()).unwrap();
    let log = run_checked(&sc).unwrap();
    let text = log.to_ndjson();
    let back = EventLog::from_ndjson(&text).unwrap();
    assert_eq!(back, log);
    assert_eq!(back.to_ndjson(), text);
}

#[test]
fn log_ticks_and_seqs_increase() {
    let log = run_checked(&load_scenario(case_study_path()).unwrap()).unwrap();
    for w in log.records().windows(2) {
        assert!((w[0].tick, w[0].seq) < (w[1].tick, w[1].seq));
        assert_eq!(w[1].seq, w[0].seq + 1);
    }
}

#[test]
fn bridge_is_transparent_for_every_exported_method() {
    let mut g = Gateway::case_study();
    assert_eq!(common::transparency(&mut g).unwrap(), 2);
    g.inject_alarm("pump-7", Severity::Critical, "pressure high").unwrap();
    g.inject_alarm("pump-7", Severity::Normal, "ok").unwrap();
    assert_eq!(common::transparency(&mut g).unwrap(), 2);
}
