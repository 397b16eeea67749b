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


//! Simulated reflective object broker: named servants behind IOR-like
//! references, invoke-by-name, an interceptor chain and the alarm generator.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contract::{MethodSig, TargetResolver};
use crate::value::{is_identifier, SimpleType, Value};

pub const IOR_PREFIX: &str = "IOR:";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrbError {
    #[error("name `{0}` is already bound")]
    DuplicateName(String),
    #[error("no object bound at {0}")]
    UnknownObject(String),
    #[error("malformed IOR `{0}`")]
    MalformedIor(String),
    #[error("{object} has no method `{method}`")]
    UnknownMethod { object: String, method: String },
    #[error("type mismatch calling {method}: {detail}")]
    TypeMismatch { method: String, detail: String },
    #[error("interceptor `{0}` is already in the chain")]
    DuplicateInterceptor(String),
    #[error("no interceptor `{0}` in the chain")]
    UnknownInterceptor(String),
    #[error("no interceptor action `{0}`")]
    UnknownAction(String),
    #[error("invocation rejected by interceptor `{interceptor_id}`: {reason}")]
    Rejected { interceptor_id: String, reason: String },
    #[error("no alarm `{0}` in the log")]
    UnknownAlarm(String),
    #[error("alarm at tick {tick} precedes the last logged tick {last}")]
    ClockRegression { tick: u64, last: u64 },
    #[error("alarm log line {line}: {detail}")]
    AlarmLogFormat { line: usize, detail: String },
}

/// Reference of the form `IOR:<platform_id>/<object_name>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectRef {
    pub platform_id: String,
    pub object_name: String,
}

impl ObjectRef {
    pub fn new(platform_id: &str, object_name: &str) -> Self {
        ObjectRef {
            platform_id: platform_id.to_string(),
            object_name: object_name.to_string(),
        }
    }

    pub fn ior(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ObjectRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{IOR_PREFIX}{}/{}", self.platform_id, self.object_name)
    }
}

impl FromStr for ObjectRef {
    type Err = OrbError;

    fn from_str(s: &str) -> Result<Self, OrbError> {
        let malformed = || OrbError::MalformedIor(s.to_string());
        let rest = s.strip_prefix(IOR_PREFIX).ok_or_else(malformed)?;
        let (platform, name) = rest.split_once('/').ok_or_else(malformed)?;
        if !is_identifier(platform) || !is_identifier(name) {
            return Err(malformed());
        }
        Ok(ObjectRef::new(platform, name))
    }
}

/// What a servant method does when invoked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "behavior", rename_all = "snake_case")]
pub enum Behavior {
    /// `status=<normal|critical>; queue=<logged alarms>`.
    EnterpriseStatus,
    /// Text of the logged alarm named by the first argument.
    AlarmText,
    Constant { value: Value },
    /// Returns the first argument.
    Echo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServantMethod {
    pub params: Vec<SimpleType>,
    pub returns: SimpleType,
    pub behavior: Behavior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Servant {
    pub name: String,
    pub methods: BTreeMap<String, ServantMethod>,
}

impl Servant {
    pub fn new(name: &str) -> Self {
        Servant {
            name: name.to_string(),
            methods: BTreeMap::new(),
        }
    }

    pub fn with_method(
        mut self,
        name: &str,
        params: &[SimpleType],
        returns: SimpleType,
        behavior: Behavior,
    ) -> Self {
        self.methods.insert(
            name.to_string(),
            ServantMethod {
                params: params.to_vec(),
                returns,
                behavior,
            },
        );
        self
    }

    /// The case-study servant: status display plus alarm-body lookup.
    pub fn enterprise() -> Self {
        Servant::new("Enterprise")
            .with_method(
                "AfficherNormal",
                &[],
                SimpleType::String,
                Behavior::EnterpriseStatus,
            )
            .with_method(
                "AfficherAlarme",
                &[SimpleType::String],
                SimpleType::String,
                Behavior::AlarmText,
            )
    }

    pub fn signatures(&self) -> Vec<MethodSig> {
        self.methods
            .iter()
            .map(|(name, m)| MethodSig {
                name: name.clone(),
                params: m.params.clone(),
                returns: m.returns,
            })
            .collect()
    }
}

/// Actions an interceptor may run around an invocation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum InterceptorAction {
    /// Records the interceptor in the invocation trace.
    Trace,
    /// Records the interceptor, then refuses the call.
    Reject { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interceptor {
    pub interceptor_id: String,
    pub action_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Normal,
    Critical,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Normal => "normal",
            Severity::Critical => "critical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "normal" => Some(Severity::Normal),
            "critical" => Some(Severity::Critical),
            _ => None,
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One equipment report. Field order is the persisted log's column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alarm {
    pub alarm_id: String,
    #[serde(rename = "tick")]
    pub timestamp: u64,
    pub source: String,
    pub severity: Severity,
    pub text: String,
}

impl Alarm {
    pub fn is_critical(&self) -> bool {
        self.severity == Severity::Critical
    }
}

/// An alarm waiting in the generator schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledAlarm {
    pub source: String,
    pub severity: Severity,
    pub text: String,
}

/// Result of a successful invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    /// `None` for unit-returning methods.
    pub value: Option<Value>,
    /// Interceptor ids in the order they ran.
    pub trace: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Orb {
    platform_id: String,
    servants: BTreeMap<String, Servant>,
    actions: BTreeMap<String, InterceptorAction>,
    interceptors: Vec<Interceptor>,
    schedule: BTreeMap<u64, VecDeque<ScheduledAlarm>>,
    alarm_log: Vec<Alarm>,
}

impl Orb {
    pub fn new(platform_id: &str) -> Self {
        let mut actions = BTreeMap::new();
        actions.insert("trace".to_string(), InterceptorAction::Trace);
        Orb {
            platform_id: platform_id.to_string(),
            servants: BTreeMap::new(),
            actions,
            interceptors: Vec::new(),
            schedule: BTreeMap::new(),
            alarm_log: Vec::new(),
        }
    }

    pub fn platform_id(&self) -> &str {
        &self.platform_id
    }

    pub fn bind(&mut self, servant: Servant) -> Result<ObjectRef, OrbError> {
        if self.servants.contains_key(&servant.name) {
            return Err(OrbError::DuplicateName(servant.name));
        }
        let r = ObjectRef::new(&self.platform_id, &servant.name);
        self.servants.insert(servant.name.clone(), servant);
        Ok(r)
    }

    pub fn resolve(&self, ior: &str) -> Result<&Servant, OrbError> {
        let r: ObjectRef = ior.parse()?;
        self.resolve_ref(&r)
    }

    pub fn resolve_ref(&self, r: &ObjectRef) -> Result<&Servant, OrbError> {
        if r.platform_id != self.platform_id {
            return Err(OrbError::UnknownObject(r.to_string()));
        }
        self.servants
            .get(&r.object_name)
            .ok_or_else(|| OrbError::UnknownObject(r.to_string()))
    }

    pub fn register_action(&mut self, action_id: &str, action: InterceptorAction) {
        self.actions.insert(action_id.to_string(), action);
    }

    pub fn add_interceptor(&mut self, i: Interceptor) -> Result<(), OrbError> {
        if self
            .interceptors
            .iter()
            .any(|x| x.interceptor_id == i.interceptor_id)
        {
            return Err(OrbError::DuplicateInterceptor(i.interceptor_id));
        }
        if !self.actions.contains_key(&i.action_id) {
            return Err(OrbError::UnknownAction(i.action_id));
        }
        self.interceptors.push(i);
        Ok(())
    }

    pub fn remove_interceptor(&mut self, interceptor_id: &str) -> Result<Interceptor, OrbError> {
        let idx = self
            .interceptors
            .iter()
            .position(|x| x.interceptor_id == interceptor_id)
            .ok_or_else(|| OrbError::UnknownInterceptor(interceptor_id.to_string()))?;
        Ok(self.interceptors.remove(idx))
    }

    pub fn interceptors(&self) -> &[Interceptor] {
        &self.interceptors
    }

    pub fn invoke(&self, r: &ObjectRef, method: &str, args: &[Value]) -> Result<Invocation, OrbError> {
        let servant = self.resolve_ref(r)?;
        let m = servant
            .methods
            .get(method)
            .ok_or_else(|| OrbError::UnknownMethod {
                object: r.to_string(),
                method: method.to_string(),
            })?;
        let actual: Vec<SimpleType> = args.iter().map(Value::simple_type).collect();
        if actual != m.params {
            return Err(OrbError::TypeMismatch {
                method: method.to_string(),
                detail: format!("expected {:?}, got {:?}", m.params, actual),
            });
        }
        let mut trace = Vec::with_capacity(self.interceptors.len());
        for i in &self.interceptors {
            trace.push(i.interceptor_id.clone());
            if let Some(InterceptorAction::Reject { reason }) = self.actions.get(&i.action_id) {
                return Err(OrbError::Rejected {
                    interceptor_id: i.interceptor_id.clone(),
                    reason: reason.clone(),
                });
            }
        }
        let value = self.run_behavior(&m.behavior, args)?;
        let value = if m.returns == SimpleType::Unit { None } else { Some(value) };
        Ok(Invocation { value, trace })
    }

    fn run_behavior(&self, b: &Behavior, args: &[Value]) -> Result<Value, OrbError> {
        match b {
            Behavior::EnterpriseStatus => {
                let status = match self.alarm_log.last() {
                    Some(a) if a.is_critical() => "critical",
                    _ => "normal",
                };
                Ok(Value::Str(format!(
                    "status={status}; queue={}",
                    self.alarm_log.len()
                )))
            }
            Behavior::AlarmText => {
                let id = args.first().and_then(Value::as_str).unwrap_or_default();
                self.alarm(id)
                    .map(|a| Value::Str(a.text.clone()))
                    .ok_or_else(|| OrbError::UnknownAlarm(id.to_string()))
            }
            Behavior::Constant { value } => Ok(value.clone()),
            Behavior::Echo => Ok(args.first().cloned().unwrap_or(Value::Str(String::new()))),
        }
    }

    pub fn schedule_alarm(&mut self, tick: u64, alarm: ScheduledAlarm) {
        self.schedule.entry(tick).or_default().push_back(alarm);
    }

    /// Earliest pending scheduled tick at or after `from`.
    pub fn next_scheduled(&self, from: u64) -> Option<u64> {
        self.schedule.range(from..).next().map(|(t, _)| *t)
    }

    /// Fires at most one scheduled alarm for `tick`. Several alarms scheduled
    /// on one tick are released on successive calls.
    pub fn alarm_tick(&mut self, tick: u64) -> Option<Alarm> {
        let queue = self.schedule.get_mut(&tick)?;
        let next = queue.pop_front();
        if queue.is_empty() {
            self.schedule.remove(&tick);
        }
        let s = next?;
        self.ingest(tick, &s.source, s.severity, &s.text).ok()
    }

    /// Logs an alarm raised at `tick` and returns it with its fresh id.
    pub fn ingest(
        &mut self,
        tick: u64,
        source: &str,
        severity: Severity,
        text: &str,
    ) -> Result<Alarm, OrbError> {
        if let Some(last) = self.alarm_log.last() {
            if tick < last.timestamp {
                return Err(OrbError::ClockRegression {
                    tick,
                    last: last.timestamp,
                });
            }
        }
        let alarm = Alarm {
            alarm_id: format!("a{}", self.alarm_log.len() + 1),
            timestamp: tick,
            source: source.to_string(),
            severity,
            text: text.to_string(),
        };
        self.alarm_log.push(alarm.clone());
        Ok(alarm)
    }

    pub fn alarm(&self, alarm_id: &str) -> Option<&Alarm> {
        self.alarm_log.iter().find(|a| a.alarm_id == alarm_id)
    }

    pub fn alarm_log(&self) -> &[Alarm] {
        &self.alarm_log
    }

    pub fn render_alarm_log(&self) -> String {
        render_alarm_log(&self.alarm_log)
    }
}

impl TargetResolver for Orb {
    fn target_methods(&self, platform_id: &str, target_path: &str) -> Option<Vec<MethodSig>> {
        if platform_id != self.platform_id {
            return None;
        }
        self.servants.get(target_path).map(Servant::signatures)
    }
}

pub fn render_alarm_log(alarms: &[Alarm]) -> String {
    let mut out = String::new();
    for a in alarms {
        out.push_str(&serde_json::to_string(a).expect("alarm serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_alarm_log(src: &str) -> Result<Vec<Alarm>, OrbError> {
    src.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| OrbError::AlarmLogFormat {
                line: i + 1,
                detail: e.to_string(),
            })
        })
        .collect()
}
