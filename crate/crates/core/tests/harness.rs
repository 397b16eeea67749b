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


use std::path::Path;

use proptest::prelude::*;

use ctxbridge::gateway::{Device, Route};
use ctxbridge::harness::dsl::{parse_command_line, AlarmRef, StepKind};
use ctxbridge::harness::{load_scenario, parse_scenario, run, run_checked, Command, Expectation, RunError, Seed};
use ctxbridge::orb::Severity;
use ctxbridge::registry::Registry;
use ctxbridge::weaver::Action;

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenarios").join(name)
}

#[test]
fn case_study_file_shape() {
    let sc = load_scenario(&fixture("case_study.scn")).unwrap();
    assert_eq!(sc.name.as_deref(), Some("case-study"));
    assert_eq!(sc.seed, Seed::CaseStudy);
    assert!(sc.commands().count() >= 12, "{}", sc.commands().count());
    assert!(sc.steps.windows(2).all(|w| w[0].tick <= w[1].tick));
}

#[test]
fn case_study_passes() {
    let r = run(&load_scenario(&fixture("case_study.scn")).unwrap()).unwrap();
    assert!(r.failures.is_empty(), "{:?}", r.failures);
}

#[test]
fn wrong_expectation_names_its_tick() {
    match run_checked(&load_scenario(&fixture("wrong_expectation.scn")).unwrap()) {
        Err(RunError::ExpectationFailed(f)) => {
            assert_eq!(f.len(), 1);
            assert_eq!(f[0].tick, 3);
            assert_eq!(f[0].line, 4);
            assert_eq!(f[0].actual, "PDA");
            assert!(f[0].to_string().contains("tick 3"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn empty_file_runs_to_completion() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.scn");
    std::fs::write(&p, "").unwrap();
    let sc = load_scenario(&p).unwrap();
    assert!(sc.steps.is_empty());
    let log = run_checked(&sc).unwrap();
    assert!(log.records().iter().all(|r| r.tick == 0));
}

#[test]
fn decreasing_ticks_are_a_syntax_error() {
    let e = parse_scenario("at 5 device pda power off\nat 4 device pda power on\n").unwrap_err();
    assert_eq!(e.line, 2);
}

#[test]
fn seed_directory_is_relative_to_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut reg = Registry::new();
    reg.upsert_profile(ctxbridge::registry::Profile {
        id_profile: "42".into(),
        name: "Solo".into(),
        sex: ctxbridge::registry::Sex::M,
        job: "x".into(),
        age: 30,
        handicap: ctxbridge::registry::Handicap::None,
        subscriptions: vec![],
    })
    .unwrap();
    std::fs::create_dir(dir.path().join("tables")).unwrap();
    reg.save(&dir.path().join("tables")).unwrap();
    let p = dir.path().join("s.scn");
    std::fs::write(
        &p,
        "seed tables\nat 1 user 42 identify lon=10 lat=36\nat 1 expect error none\nat 2 user 1234 identify lon=10 lat=36\nat 2 expect error UnknownUser\n",
    )
    .unwrap();
    let sc = load_scenario(&p).unwrap();
    assert_eq!(sc.seed, Seed::Dir(dir.path().join("tables")));
    run_checked(&sc).unwrap();
}

#[test]
fn spec_example_lines_parse() {
    assert_eq!(
        parse_command_line("user 1234 request category=Assurance max_km=1.0").unwrap(),
        Command::Request { user_id: "1234".into(), category: Some("Assurance".into()), max_km: Some(1.0) }
    );
    let sc = parse_scenario("at 4 expect route last PDA").unwrap();
    assert_eq!(
        sc.steps[0].kind,
        StepKind::Expect(Expectation::Route { alarm: AlarmRef::Last, route: Route::Pda })
    );
}

fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-zA-Z0-9_-]{1,10}",
        any::<String>(),
        Just(String::new()),
        Just("a \"quoted\" # not a comment \\ end".to_string()),
    ]
}

fn key() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9_.:-]{1,12}"
}

fn severity() -> impl Strategy<Value = Severity> {
    prop_oneof![Just(Severity::Normal), Just(Severity::Critical)]
}

fn command() -> impl Strategy<Value = Command> {
    let coord = -90.0f64..90.0;
    prop_oneof![
        (key(), coord.clone(), coord.clone())
            .prop_map(|(user_id, longitude, latitude)| Command::Identify { user_id, longitude, latitude }),
        (key(), coord.clone(), coord)
            .prop_map(|(user_id, longitude, latitude)| Command::Move { user_id, longitude, latitude }),
        (key(), prop::option::of(text()), prop::option::of(0.0f64..100.0))
            .prop_map(|(user_id, category, max_km)| Command::Request { user_id, category, max_km }),
        (key(), text()).prop_map(|(user_id, id_service)| Command::Select { user_id, id_service }),
        (any::<bool>(), any::<bool>()).prop_map(|(p, on)| Command::Power {
            device: if p { Device::Pda } else { Device::Tv },
            on
        }),
        (text(), severity(), text()).prop_map(|(source, severity, text)| Command::AlarmInject { source, severity, text }),
        (any::<u64>(), text(), severity(), text())
            .prop_map(|(tick, source, severity, text)| Command::AlarmSchedule { tick, source, severity, text }),
        (key(), text()).prop_map(|(action_id, t)| Command::AspectAction { action_id, action: Action::Log(t) }),
        (key(), text()).prop_map(|(action_id, t)| Command::AspectAction { action_id, action: Action::Veto(t) }),
        key().prop_map(|aa_id| Command::AaApply { aa_id }),
        (text(), text()).prop_map(|(field, value)| Command::HmiOverride { field, value }),
        text().prop_map(|field| Command::HmiClear { field }),
        (key(), any::<bool>()).prop_map(|(id_service, available)| Command::Availability { id_service, available }),
        (text(), text(), text()).prop_map(|(contract, target, url)| Command::EndpointExport { contract, target, url }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn command_lines_round_trip(c in command()) {
        let line = c.to_string();
        prop_assert_eq!(parse_command_line(&line).unwrap(), c);
    }
}
