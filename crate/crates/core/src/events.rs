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


//! The append-only event log: one typed record per line, ordered by
//! `(tick, seq)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adaptation::PresentationDescriptor;
use crate::gateway::RoutingDecision;
use crate::orb::Alarm;
use crate::registry::RankedService;
use crate::weaver::AdviceKind;

/// A service as reported in the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceHit {
    pub id_service: String,
    pub service_name: String,
    pub category: String,
    pub distance_km: f64,
}

impl From<&RankedService> for ServiceHit {
    fn from(r: &RankedService) -> Self {
        ServiceHit {
            id_service: r.entry.id_service.clone(),
            service_name: r.entry.service_name.clone(),
            category: r.entry.category.clone(),
            distance_km: r.distance_km,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    /// A command accepted for execution, in scenario syntax.
    Command { line: String },
    CommandFailed { code: String, message: String },

    RecvLocation { user_id: String, longitude: f64, latitude: f64 },
    Authenticate { user_id: String, ok: bool },
    ProfileLoaded { user_id: String, name: String },
    HmiAdapted { user_id: String, descriptor: PresentationDescriptor },
    ServicesFound {
        user_id: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        category: Option<String>,
        max_km: f64,
        services: Vec<ServiceHit>,
    },
    ServicesSent { user_id: String, descriptor: PresentationDescriptor },
    ServicesPushed { user_id: String, services: Vec<ServiceHit> },
    ServiceSelected { user_id: String, id_service: String, service_name: String },
    UserMoved { user_id: String, longitude: f64, latitude: f64 },
    /// A line spoken by the vocal interface.
    Vocal { user_id: String, text: String },
    ProfileUpserted { id_profile: String },
    AvailabilityChanged { id_service: String, available: bool },

    Advice { aspect_id: String, advice: AdviceKind, joinpoint: String },
    AdviceLog { aspect_id: String, text: String },
    AdviceVetoed { aspect_id: String, joinpoint: String, reason: String },
    ActionRegistered { action_id: String },
    AspectWoven { aspect_id: String, pointcut: String },
    AspectUnwoven { aspect_id: String },
    OverrideSet { field: String, value: String },
    OverrideCleared { field: String },

    SoapRequest { url: String, action: String, message_id: String },
    SoapResponse { url: String, message_id: String, correlation_id: String, envelope_kind: String },
    EndpointExported { url: String, contract: String },
    EndpointUnexported { url: String },

    ComponentArrived { component_id: String, component_kind: String },
    ComponentDeparted { component_id: String },
    AaApplied { aa_id: String },
    AaReverted { aa_id: String },
    AssemblyStep { link: String, payload: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        failure: Option<String> },

    DevicePower { device: String, on: bool },
    AlarmScheduled { tick_due: u64, source: String },
    AlarmRaised { alarm: Alarm },
    AlarmRouted { decision: RoutingDecision },
    AlarmDelivered { alarm_id: String, device: String, text: String },
    AlarmDeliveryFailed { alarm_id: String, detail: String },

    ExpectationPassed { line: usize, expectation: String },
    ExpectationFailed { line: usize, expectation: String, actual: String },
}

impl Event {
    /// The `kind` tag as it appears on the wire.
    pub fn kind(&self) -> String {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(m)) => {
                m.get("kind").and_then(|k| k.as_str()).unwrap_or_default().to_string()
            }
            _ => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub tick: u64,
    pub seq: u64,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("event log line {line}: {detail}")]
    Format { line: usize, detail: String },
    #[error("event log line {line}: (tick, seq) does not increase")]
    Order { line: usize },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    records: Vec<EventRecord>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends at `tick` and returns the new record's sequence number.
    /// `tick` is clamped so that ticks never decrease.
    pub fn push(&mut self, tick: u64, event: Event) -> u64 {
        let (tick, seq) = match self.records.last() {
            Some(r) => (tick.max(r.tick), r.seq + 1),
            None => (tick, 0),
        };
        self.records.push(EventRecord { tick, seq, event });
        seq
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn since(&self, seq: u64) -> &[EventRecord] {
        let start = self.records.partition_point(|r| r.seq < seq);
        &self.records[start..]
    }

    pub fn events(&self) -> impl DoubleEndedIterator<Item = &Event> {
        self.records.iter().map(|r| &r.event)
    }

    pub fn to_ndjson(&self) -> String {
        render_records(&self.records)
    }

    pub fn from_ndjson(src: &str) -> Result<EventLog, LogError> {
        let mut records: Vec<EventRecord> = Vec::new();
        for (i, line) in src.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let r: EventRecord = serde_json::from_str(line).map_err(|e| LogError::Format {
                line: i + 1,
                detail: e.to_string(),
            })?;
            if let Some(prev) = records.last() {
                if (r.tick, r.seq) <= (prev.tick, prev.seq) {
                    return Err(LogError::Order { line: i + 1 });
                }
            }
            records.push(r);
        }
        Ok(EventLog { records })
    }
}

pub fn render_record(r: &EventRecord) -> String {
    serde_json::to_string(r).expect("event serializes")
}

pub fn render_records(records: &[EventRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&render_record(r));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_layout() {
        let mut log = EventLog::new();
        log.push(3, Event::Authenticate { user_id: "1234".into(), ok: true });
        assert_eq!(
            log.to_ndjson(),
            "{\"tick\":3,\"seq\":0,\"kind\":\"authenticate\",\"user_id\":\"1234\",\"ok\":true}\n"
        );
        assert_eq!(log.records()[0].event.kind(), "authenticate");
    }

    #[test]
    fn roundtrip_and_order() {
        let mut log = EventLog::new();
        log.push(1, Event::RecvLocation { user_id: "u".into(), longitude: 10.1, latitude: 36.8 });
        log.push(0, Event::DevicePower { device: "pda".into(), on: false });
        log.push(2, Event::ServicesFound {
            user_id: "u".into(),
            category: None,
            max_km: 1.0,
            services: vec![ServiceHit {
                id_service: "s".into(),
                service_name: "S".into(),
                category: "Bank".into(),
                distance_km: 0.28893,
            }],
        });
        assert_eq!(log.records()[1].tick, 1);
        let text = log.to_ndjson();
        let back = EventLog::from_ndjson(&text).unwrap();
        assert_eq!(back, log);
        assert_eq!(back.to_ndjson(), text);
        assert_eq!(log.since(1).len(), 2);
        let swapped: Vec<&str> = text.lines().rev().collect();
        assert!(matches!(
            EventLog::from_ndjson(&swapped.join("\n")),
            Err(LogError::Order { line: 2 })
        ));
    }
}
