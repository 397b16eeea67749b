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


//! One code path for every command, whether it comes from a scenario file
//! or a live request.

use std::collections::BTreeSet;

use serde_json::{json, Value as Json};

use crate::adaptation::Field;
use crate::events::{Event, EventLog, EventRecord, ServiceHit};
use crate::gateway::{Gateway, GatewayError, Route};
use crate::registry::{Registry, RegistryError};

use super::dsl::{AlarmRef, Command, Expectation, Scenario, Seed, Step, StepKind};

pub fn registry_for(seed: &Seed) -> Result<Registry, RegistryError> {
    match seed {
        Seed::Empty => Ok(Registry::new()),
        Seed::CaseStudy => Ok(Registry::case_study()),
        Seed::Dir(d) => Registry::load(d),
    }
}

#[derive(Debug, Clone)]
pub struct Engine {
    gateway: Gateway,
    seed: Seed,
    last_error: Option<String>,
    /// Log position of the latest `command` record.
    last_command: Option<usize>,
    recorded: Vec<Step>,
}

impl Engine {
    pub fn new(registry: Registry, seed: Seed) -> Self {
        Engine {
            gateway: Gateway::new(registry),
            seed,
            last_error: None,
            last_command: None,
            recorded: Vec::new(),
        }
    }

    pub fn from_seed(seed: &Seed) -> Result<Self, RegistryError> {
        Ok(Engine::new(registry_for(seed)?, seed.clone()))
    }

    pub fn case_study() -> Self {
        Engine::new(Registry::case_study(), Seed::CaseStudy)
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    pub fn log(&self) -> &EventLog {
        self.gateway.log()
    }

    pub fn tick(&self) -> u64 {
        self.gateway.tick()
    }

    pub fn last_error(&self) -> Option<&str> {
        self.last_error.as_deref()
    }

    /// Moves the clock to `tick`, releasing scheduled alarms on the ticks
    /// they were due.
    pub fn advance_to(&mut self, tick: u64) {
        while let Some(t) = self.gateway.orb().next_scheduled(self.gateway.tick()) {
            if t > tick {
                break;
            }
            self.gateway.set_tick(t);
            self.gateway.fire_scheduled();
        }
        self.gateway.set_tick(tick);
    }

    /// Runs the clock forward until nothing is scheduled.
    pub fn drain_schedule(&mut self) {
        while let Some(t) = self.gateway.orb().next_scheduled(self.gateway.tick()) {
            self.advance_to(t);
        }
    }

    /// Executes `cmd` at `tick` and logs it. The result is the JSON body a
    /// live caller receives.
    pub fn execute(&mut self, tick: u64, cmd: &Command) -> Result<Json, GatewayError> {
        self.advance_to(tick);
        let line = cmd.to_string();
        self.last_command = Some(self.gateway.log().len());
        self.gateway.record(Event::Command { line });
        self.recorded.push(Step {
            tick: self.gateway.tick(),
            line: self.recorded.len() + 1,
            kind: StepKind::Command(cmd.clone()),
        });
        let r = self.dispatch(cmd);
        match &r {
            Ok(_) => self.last_error = None,
            Err(e) => {
                self.last_error = Some(e.code().to_string());
                self.gateway.record(Event::CommandFailed {
                    code: e.code().to_string(),
                    message: e.to_string(),
                });
            }
        }
        r
    }

    fn dispatch(&mut self, cmd: &Command) -> Result<Json, GatewayError> {
        let g = &mut self.gateway;
        Ok(match cmd {
            Command::ProfileUpsert(p) => {
                g.upsert_profile(p.clone())?;
                json!({ "id_profile": p.id_profile })
            }
            Command::Identify { user_id, longitude, latitude } => {
                let id = g.identify(user_id, *longitude, *latitude)?;
                json!({
                    "profile": id.profile,
                    "descriptor": id.descriptor,
                    "services": id.services.iter().map(ServiceHit::from).collect::<Vec<_>>(),
                })
            }
            Command::Request { user_id, category, max_km } => {
                let found = g.query_services(user_id, category.as_deref(), *max_km)?;
                json!({
                    "services": found.iter().map(ServiceHit::from).collect::<Vec<_>>(),
                    "descriptor": g.session().map(|s| &s.descriptor),
                })
            }
            Command::Move { user_id, longitude, latitude } => {
                let pushed = g.move_user(user_id, *longitude, *latitude)?;
                json!({
                    "pushed": pushed.map(|v| v.iter().map(ServiceHit::from).collect::<Vec<_>>()),
                })
            }
            Command::Select { user_id, id_service } => {
                let r = g.select_service(user_id, id_service)?;
                json!({ "selected": ServiceHit::from(&r) })
            }
            Command::Power { device, on } => {
                let flushed = g.set_power(*device, *on);
                json!({ "devices": g.devices(), "flushed": flushed })
            }
            Command::AlarmInject { source, severity, text } => {
                let d = g.inject_alarm(source, *severity, text)?;
                json!({ "decision": d })
            }
            Command::AlarmSchedule { tick, source, severity, text } => {
                g.schedule_alarm(*tick, source, *severity, text);
                if *tick == g.tick() {
                    g.fire_scheduled();
                }
                json!({ "tick_due": tick })
            }
            Command::AspectAction { action_id, action } => {
                g.register_action(action_id, action.clone())?;
                json!({ "action_id": action_id })
            }
            Command::AspectWeave(doc) => {
                g.weave(doc)?;
                json!({ "aspect_id": doc.aspect_id })
            }
            Command::AspectUnweave { aspect_id } => {
                g.unweave(aspect_id)?;
                json!({ "aspect_id": aspect_id })
            }
            Command::AaApply { aa_id } => {
                g.apply_aa(aa_id)?;
                json!({ "applied": g.assembly().applied_aas().collect::<Vec<_>>() })
            }
            Command::AaRevert { aa_id } => {
                g.revert_aa(aa_id)?;
                json!({ "applied": g.assembly().applied_aas().collect::<Vec<_>>() })
            }
            Command::HmiOverride { field, value } => {
                g.set_override(field, value)?;
                json!({ "descriptor": g.session().map(|s| &s.descriptor) })
            }
            Command::HmiClear { field } => {
                g.clear_override(field)?;
                json!({ "descriptor": g.session().map(|s| &s.descriptor) })
            }
            Command::Availability { id_service, available } => {
                g.set_availability(id_service, *available)?;
                json!({ "id_service": id_service, "available": available })
            }
            Command::EndpointExport { contract, target, url } => {
                g.export_endpoint(contract, target, url)?;
                json!({ "url": url })
            }
            Command::EndpointUnexport { url } => {
                g.unexport_endpoint(url)?;
                json!({ "url": url })
            }
        })
    }

    /// Records produced by the latest command, its own record excluded.
    fn latest(&self) -> &[EventRecord] {
        let recs = self.gateway.log().records();
        match self.last_command {
            Some(i) => &recs[(i + 1).min(recs.len())..],
            None => recs,
        }
    }

    /// Checks `e` against the current state. `Err` carries the actual value.
    pub fn evaluate(&self, e: &Expectation) -> Result<(), String> {
        let g = &self.gateway;
        let descriptor = g.session().map(|s| &s.descriptor);
        let want = |ok: bool, actual: String| if ok { Ok(()) } else { Err(actual) };
        let no_session = || "no session".to_string();
        match e {
            Expectation::Route { alarm, route } => {
                let id = self.alarm_id(alarm);
                let got = g.log().events().rev().find_map(|ev| match ev {
                    Event::AlarmRouted { decision } if id.as_deref().is_none_or(|i| i == decision.alarm_id) => {
                        Some(decision.route)
                    }
                    _ => None,
                });
                match got {
                    Some(r) => want(r == *route, r.to_string()),
                    None => Err("no routing decision".into()),
                }
            }
            Expectation::Delivered { alarm, device } => {
                let id = self.alarm_id(alarm).ok_or("no alarm raised")?;
                let hit = g.log().events().any(|ev| {
                    matches!(ev, Event::AlarmDelivered { alarm_id, device: d, .. }
                        if *alarm_id == id && *d == device.to_string())
                });
                want(hit, format!("{id} not delivered to {device}"))
            }
            Expectation::Greeting(t) => {
                let d = descriptor.ok_or_else(no_session)?;
                want(d.greeting == *t, d.greeting.clone())
            }
            Expectation::Title(t) => {
                let d = descriptor.ok_or_else(no_session)?;
                want(d.title == *t, d.title.clone())
            }
            Expectation::Theme(t) => {
                let got = descriptor.ok_or_else(no_session)?.get(Field::ThemeColor);
                want(got == *t, got)
            }
            Expectation::Vocal(b) => {
                let d = descriptor.ok_or_else(no_session)?;
                want(d.vocal == *b, d.vocal.to_string())
            }
            Expectation::DisplayMode(m) => {
                let got = descriptor.ok_or_else(no_session)?.get(Field::DisplayMode);
                want(got == *m, got)
            }
            Expectation::Widget { index, text } => {
                let d = descriptor.ok_or_else(no_session)?;
                match d.widgets.get(*index) {
                    Some(w) => want(w.text() == text, w.text().to_string()),
                    None => Err(format!("{} widgets", d.widgets.len())),
                }
            }
            Expectation::Services(names) => {
                let got: Vec<String> = self.latest_services()?.into_iter().map(|h| h.service_name).collect();
                want(got == *names, got.join(","))
            }
            Expectation::Categories(cats) => {
                let got: BTreeSet<String> = self.latest_services()?.into_iter().map(|h| h.category).collect();
                let exp: BTreeSet<String> = cats.iter().cloned().collect();
                want(got == exp, got.into_iter().collect::<Vec<_>>().join(","))
            }
            Expectation::Steps(kinds) => {
                let got: Vec<String> = self
                    .latest()
                    .iter()
                    .map(|r| r.event.kind())
                    .filter(|k| kinds.contains(k))
                    .collect();
                want(got == *kinds, got.join(","))
            }
            Expectation::Before { text, kind } => {
                let recs = self.latest();
                let log_at = recs
                    .iter()
                    .position(|r| matches!(&r.event, Event::AdviceLog { text: t, .. } if t == text));
                let kind_at = recs.iter().position(|r| r.event.kind() == *kind);
                match (log_at, kind_at) {
                    (Some(a), Some(b)) => want(a < b, format!("advice log at +{a}, {kind} at +{b}")),
                    (None, _) => Err("advice log line absent".into()),
                    (_, None) => Err(format!("no {kind} event")),
                }
            }
            Expectation::AdviceLog(t) => {
                let hit = g
                    .log()
                    .events()
                    .any(|ev| matches!(ev, Event::AdviceLog { text, .. } if text == t));
                want(hit, "absent".into())
            }
            Expectation::Pushed(b) => {
                let got = self
                    .latest()
                    .iter()
                    .any(|r| matches!(r.event, Event::ServicesPushed { .. }));
                want(got == *b, got.to_string())
            }
            Expectation::Queue(n) => {
                let got = g.queue().count();
                want(got == *n, got.to_string())
            }
            Expectation::Device { device, on } => {
                let got = g.devices().get(*device);
                want(got == *on, if got { "on" } else { "off" }.into())
            }
            Expectation::Textbox { component, text } => {
                let c = g
                    .assembly()
                    .component(component)
                    .ok_or_else(|| format!("no component {component}"))?;
                let got = c.properties.get("text").map(|v| v.to_text()).unwrap_or_default();
                want(got == *text, got)
            }
            Expectation::Error(code) => want(
                self.last_error == *code,
                self.last_error.clone().unwrap_or_else(|| "none".into()),
            ),
            Expectation::Count { kind, n } => {
                let got = g.log().events().filter(|ev| ev.kind() == *kind).count();
                want(got == *n, got.to_string())
            }
            Expectation::Conservation => check_conservation(g),
        }
    }

    /// Evaluates `e` and logs the verdict.
    pub fn check(&mut self, line: usize, e: &Expectation) -> Result<(), String> {
        let r = self.evaluate(e);
        let expectation = e.to_string();
        let ev = match &r {
            Ok(()) => Event::ExpectationPassed { line, expectation },
            Err(actual) => Event::ExpectationFailed {
                line,
                expectation,
                actual: actual.clone(),
            },
        };
        self.gateway.record(ev);
        r
    }

    fn alarm_id(&self, a: &AlarmRef) -> Option<String> {
        match a {
            AlarmRef::Id(id) => Some(id.clone()),
            AlarmRef::Last => self.gateway.orb().alarm_log().last().map(|a| a.alarm_id.clone()),
        }
    }

    fn latest_services(&self) -> Result<Vec<ServiceHit>, String> {
        self.gateway
            .log()
            .events()
            .rev()
            .find_map(|ev| match ev {
                Event::ServicesFound { services, .. } | Event::ServicesPushed { services, .. } => {
                    Some(services.clone())
                }
                _ => None,
            })
            .ok_or_else(|| "no service results".into())
    }

    /// The commands executed so far as a replayable scenario.
    pub fn recorded(&self) -> Scenario {
        Scenario {
            name: None,
            seed: self.seed.clone(),
            steps: self.recorded.clone(),
        }
    }
}

/// Every raised alarm is logged once and ends exactly one way: stored
/// (normal), delivered or failed on a device, or waiting in the queue.
fn check_conservation(g: &Gateway) -> Result<(), String> {
    let mut raised = Vec::new();
    let mut routes: std::collections::BTreeMap<String, Vec<Route>> = Default::default();
    for ev in g.log().events() {
        match ev {
            Event::AlarmRaised { alarm } => raised.push(alarm.clone()),
            Event::AlarmRouted { decision } => routes
                .entry(decision.alarm_id.clone())
                .or_default()
                .push(decision.route),
            _ => {}
        }
    }
    let logged: Vec<&str> = g.orb().alarm_log().iter().map(|a| a.alarm_id.as_str()).collect();
    let ids: Vec<&str> = raised.iter().map(|a| a.alarm_id.as_str()).collect();
    if logged != ids {
        return Err(format!("raised {} alarms, orb logged {}", ids.len(), logged.len()));
    }
    if let Some(stray) = routes.keys().find(|k| !ids.contains(&k.as_str())) {
        return Err(format!("route for unraised alarm {stray}"));
    }
    let queued: BTreeSet<String> = g.queue().map(|a| a.alarm_id.clone()).collect();
    for a in &raised {
        let rs = routes.get(&a.alarm_id).map(Vec::as_slice).unwrap_or(&[]);
        let Some((last, earlier)) = rs.split_last() else {
            return Err(format!("{} never routed", a.alarm_id));
        };
        if !a.is_critical() {
            if rs != [Route::DbOnly] {
                return Err(format!("normal alarm {} routed {rs:?}", a.alarm_id));
            }
            continue;
        }
        if earlier.iter().any(|r| *r != Route::Queued) || *last == Route::DbOnly {
            return Err(format!("critical alarm {} routed {rs:?}", a.alarm_id));
        }
        if (*last == Route::Queued) != queued.contains(&a.alarm_id) {
            return Err(format!("alarm {} lost between queue and routing", a.alarm_id));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::Device;
    use crate::harness::dsl::parse_command_line;

    fn run(e: &mut Engine, tick: u64, line: &str) -> Result<Json, GatewayError> {
        e.execute(tick, &parse_command_line(line).unwrap())
    }

    #[test]
    fn scheduled_alarms_fire_on_their_tick() {
        let mut e = Engine::case_study();
        run(&mut e, 0, "alarm schedule tick=3 source=s severity=critical text=x").unwrap();
        run(&mut e, 5, "device pda power off").unwrap();
        let raised = e
            .log()
            .records()
            .iter()
            .find(|r| matches!(r.event, Event::AlarmRaised { .. }))
            .unwrap();
        assert_eq!(raised.tick, 3);
        assert_eq!(e.evaluate(&Expectation::Route { alarm: AlarmRef::Last, route: Route::Pda }), Ok(()));
    }

    #[test]
    fn failures_are_logged_with_codes() {
        let mut e = Engine::case_study();
        let err = run(&mut e, 0, "user nobody identify lon=10 lat=36").unwrap_err();
        assert_eq!(err.code(), "UnknownUser");
        assert_eq!(e.last_error(), Some("UnknownUser"));
        assert!(matches!(
            e.log().events().last(),
            Some(Event::CommandFailed { code, .. }) if code == "UnknownUser"
        ));
        run(&mut e, 1, "device tv power off").unwrap();
        assert_eq!(e.last_error(), None);
        assert_eq!(e.evaluate(&Expectation::Device { device: Device::Tv, on: false }), Ok(()));
    }

    #[test]
    fn conservation_holds_through_queue() {
        let mut e = Engine::case_study();
        run(&mut e, 0, "device pda power off").unwrap();
        run(&mut e, 0, "device tv power off").unwrap();
        run(&mut e, 1, "alarm inject source=a severity=critical text=one").unwrap();
        run(&mut e, 1, "alarm inject source=a severity=normal text=two").unwrap();
        assert_eq!(e.evaluate(&Expectation::Queue(1)), Ok(()));
        assert_eq!(e.evaluate(&Expectation::Conservation), Ok(()));
        run(&mut e, 2, "device pda power on").unwrap();
        assert_eq!(e.evaluate(&Expectation::Queue(0)), Ok(()));
        assert_eq!(e.evaluate(&Expectation::Conservation), Ok(()));
    }

    #[test]
    fn recorded_session_replays() {
        let mut e = Engine::case_study();
        run(&mut e, 0, "user 1234 identify lon=10.1955 lat=36.8065").unwrap();
        run(&mut e, 1, "alarm inject source=a severity=critical text=\"x y\"").unwrap();
        let sc = e.recorded();
        let again = super::super::dsl::parse_scenario(&sc.render()).unwrap();
        let mut replay = Engine::from_seed(&again.seed).unwrap();
        for (s, c) in again.commands() {
            let _ = replay.execute(s.tick, c);
        }
        assert_eq!(replay.log(), e.log());
    }
}
