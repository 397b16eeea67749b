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


//! Simulated component-assembly platform: components with input methods and
//! output events, links between them, discovery announcements and Aspect
//! Assemblies (AAs) that add or remove components and links as a unit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contract::ProxyDescriptor;
use crate::value::{is_identifier, quote, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssemblyError {
    #[error("component `{0}` is already registered")]
    DuplicateComponent(String),
    #[error("no component `{0}`")]
    UnknownComponent(String),
    #[error("unknown endpoint {0}")]
    UnknownEndpoint(String),
    #[error("link {0} already exists")]
    DuplicateLink(String),
    #[error("no link {0}")]
    UnknownLink(String),
    #[error("no applied assembly aspect `{0}`")]
    UnknownAA(String),
    #[error("assembly aspect conflicts with the current assembly: {0}")]
    ConflictingAA(String),
    #[error("invalid component: {0}")]
    InvalidComponent(String),
    #[error("malformed link `{0}`")]
    MalformedLink(String),
}

/// Built-in component kinds. Anything else is inert: it accepts its declared
/// input methods and never emits.
pub mod kinds {
    pub const BUTTON: &str = "Button";
    pub const RADIO_BUTTON: &str = "RadioButton";
    pub const TEXTBOX: &str = "Textbox";
    pub const EVENT_TOGGLER: &str = "EventToggler";
    pub const SOAP_PROXY: &str = "SoapProxy";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub component_id: String,
    pub kind: String,
    pub properties: BTreeMap<String, Value>,
    pub input_methods: BTreeSet<String>,
    pub output_events: BTreeSet<String>,
    #[serde(skip)]
    pub proxy: Option<ProxyDescriptor>,
}

fn names(list: &[&str]) -> BTreeSet<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl Component {
    pub fn new(component_id: &str, kind: &str, inputs: &[&str], outputs: &[&str]) -> Self {
        Component {
            component_id: component_id.to_string(),
            kind: kind.to_string(),
            properties: BTreeMap::new(),
            input_methods: names(inputs),
            output_events: names(outputs),
            proxy: None,
        }
    }

    pub fn with_property(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.properties.insert(name.to_string(), value.into());
        self
    }

    /// `press` emits `click` with the pressed payload.
    pub fn button(id: &str) -> Self {
        Component::new(id, kinds::BUTTON, &["press"], &["click"])
    }

    /// `route` re-emits on `whenChecked` or `whenUnchecked` depending on
    /// `checked`; `check`, `uncheck` and `toggle` change it and emit `changed`.
    pub fn radio_button(id: &str, checked: bool) -> Self {
        Component::new(
            id,
            kinds::RADIO_BUTTON,
            &["check", "uncheck", "toggle", "route"],
            &["whenChecked", "whenUnchecked", "changed"],
        )
        .with_property("checked", checked)
    }

    pub fn textbox(id: &str) -> Self {
        Component::new(id, kinds::TEXTBOX, &["setText"], &["textChanged"]).with_property("text", "")
    }

    /// Each `toggle` flips `target_component.target_property`, then emits
    /// `toggled` with the incoming payload.
    pub fn event_toggler(id: &str, target_component: &str, target_property: &str) -> Self {
        Component::new(id, kinds::EVENT_TOGGLER, &["toggle"], &["toggled"])
            .with_property("target_component", target_component)
            .with_property("target_property", target_property)
    }

    /// `invoke` calls `operation` through the proxy and emits `result`, or
    /// `fault` with the error text.
    pub fn soap_proxy(id: &str, proxy: ProxyDescriptor, operation: &str) -> Self {
        let mut c = Component::new(id, kinds::SOAP_PROXY, &["invoke"], &["result", "fault"])
            .with_property("endpoint", proxy.endpoint_url.to_string())
            .with_property("operation", operation);
        c.proxy = Some(proxy);
        c
    }

    fn validate(&self) -> Result<(), AssemblyError> {
        let bad = |d: String| Err(AssemblyError::InvalidComponent(d));
        if !is_identifier(&self.component_id) {
            return bad(format!("`{}` is not an identifier", self.component_id));
        }
        if !is_identifier(&self.kind) {
            return bad(format!("kind `{}` is not an identifier", self.kind));
        }
        for n in self
            .input_methods
            .iter()
            .chain(&self.output_events)
            .chain(self.properties.keys())
        {
            if !is_identifier(n) {
                return bad(format!("`{n}` is not an identifier"));
            }
        }
        if self.kind == kinds::SOAP_PROXY && self.proxy.is_none() {
            return bad(format!("{} has no proxy descriptor", self.component_id));
        }
        Ok(())
    }

    fn text_property(&self, name: &str) -> Option<&str> {
        self.properties.get(name).and_then(Value::as_str)
    }
}

/// One end of a link: an event on the source side, a method on the sink side.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Port {
    pub component_id: String,
    pub name: String,
}

impl Port {
    pub fn new(component_id: &str, name: &str) -> Self {
        Port {
            component_id: component_id.to_string(),
            name: name.to_string(),
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component_id, self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link {
    pub src: Port,
    pub dst: Port,
}

impl Link {
    pub fn new(src: (&str, &str), dst: (&str, &str)) -> Self {
        Link {
            src: Port::new(src.0, src.1),
            dst: Port::new(dst.0, dst.1),
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.src, self.dst)
    }
}

impl FromStr for Link {
    type Err = AssemblyError;

    /// Parses `a.event -> b.method`.
    fn from_str(s: &str) -> Result<Self, AssemblyError> {
        let bad = || AssemblyError::MalformedLink(s.to_string());
        let (l, r) = s.split_once("->").ok_or_else(bad)?;
        let port = |p: &str| -> Result<Port, AssemblyError> {
            let (c, n) = p.trim().split_once('.').ok_or_else(bad)?;
            if !is_identifier(c) || !is_identifier(n) {
                return Err(bad());
            }
            Ok(Port::new(c, n))
        };
        Ok(Link {
            src: port(l)?,
            dst: port(r)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyAspect {
    pub aa_id: String,
    #[serde(default)]
    pub add_components: Vec<Component>,
    #[serde(default)]
    pub remove_components: Vec<String>,
    #[serde(default)]
    pub add_links: Vec<Link>,
    #[serde(default)]
    pub remove_links: Vec<Link>,
}

impl AssemblyAspect {
    pub fn new(aa_id: &str) -> Self {
        AssemblyAspect {
            aa_id: aa_id.to_string(),
            add_components: Vec::new(),
            remove_components: Vec::new(),
            add_links: Vec::new(),
            remove_links: Vec::new(),
        }
    }
}

/// UPnP-like announcements and AA bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Discovery {
    ComponentArrived { component_id: String, kind: String },
    ComponentDeparted { component_id: String },
    AaApplied { aa_id: String },
    AaReverted { aa_id: String },
}

/// One link firing during an emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub link: Link,
    pub payload: Value,
    /// Set when the sink could not handle the call.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Remote calls issued by `SoapProxy` components.
pub trait RemoteCaller {
    fn call(
        &mut self,
        proxy: &ProxyDescriptor,
        operation: &str,
        args: Vec<Value>,
    ) -> Result<Option<Value>, String>;
}

/// A caller with no transport: every call fails.
pub struct Offline;

impl RemoteCaller for Offline {
    fn call(&mut self, proxy: &ProxyDescriptor, _: &str, _: Vec<Value>) -> Result<Option<Value>, String> {
        Err(format!("no transport to {}", proxy.endpoint_url))
    }
}

/// What an applied AA changed, kept for `revert_aa`.
#[derive(Debug, Clone, PartialEq)]
struct AppliedAa {
    aa_id: String,
    added_components: Vec<String>,
    added_links: Vec<u64>,
    removed_components: Vec<Component>,
    removed_links: Vec<(u64, Link)>,
}

/// The structural part of an assembly, for equality checks.
#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyGraph {
    pub components: BTreeMap<String, Component>,
    pub links: Vec<Link>,
}

#[derive(Debug, Clone, PartialEq)]
struct Structure {
    components: BTreeMap<String, Component>,
    links: BTreeMap<u64, Link>,
    next_seq: u64,
}

impl Structure {
    fn has_link(&self, l: &Link) -> Option<u64> {
        self.links.iter().find(|(_, x)| *x == l).map(|(s, _)| *s)
    }

    fn check_link(&self, l: &Link) -> Result<(), AssemblyError> {
        let src = self.components.get(&l.src.component_id);
        if !src.is_some_and(|c| c.output_events.contains(&l.src.name)) {
            return Err(AssemblyError::UnknownEndpoint(l.src.to_string()));
        }
        let dst = self.components.get(&l.dst.component_id);
        if !dst.is_some_and(|c| c.input_methods.contains(&l.dst.name)) {
            return Err(AssemblyError::UnknownEndpoint(l.dst.to_string()));
        }
        if self.has_link(l).is_some() {
            return Err(AssemblyError::DuplicateLink(l.to_string()));
        }
        Ok(())
    }

    fn insert_link(&mut self, l: Link) -> Result<u64, AssemblyError> {
        self.check_link(&l)?;
        let seq = self.next_seq;
        self.next_seq += 1;
        self.links.insert(seq, l);
        Ok(seq)
    }

    fn remove_component(&mut self, id: &str) -> Result<(Component, Vec<(u64, Link)>), AssemblyError> {
        let c = self
            .components
            .remove(id)
            .ok_or_else(|| AssemblyError::UnknownComponent(id.to_string()))?;
        let attached: Vec<u64> = self
            .links
            .iter()
            .filter(|(_, l)| l.src.component_id == id || l.dst.component_id == id)
            .map(|(s, _)| *s)
            .collect();
        let removed = attached
            .into_iter()
            .map(|s| (s, self.links.remove(&s).expect("link present")))
            .collect();
        Ok((c, removed))
    }
}

#[derive(Debug, Clone)]
pub struct Assembly {
    platform_id: String,
    s: Structure,
    applied: Vec<AppliedAa>,
    discovery: Vec<Discovery>,
}

impl Assembly {
    pub fn new(platform_id: &str) -> Self {
        Assembly {
            platform_id: platform_id.to_string(),
            s: Structure {
                components: BTreeMap::new(),
                links: BTreeMap::new(),
                next_seq: 1,
            },
            applied: Vec::new(),
            discovery: Vec::new(),
        }
    }

    pub fn platform_id(&self) -> &str {
        &self.platform_id
    }

    pub fn register(&mut self, c: Component) -> Result<(), AssemblyError> {
        c.validate()?;
        if self.s.components.contains_key(&c.component_id) {
            return Err(AssemblyError::DuplicateComponent(c.component_id));
        }
        self.discovery.push(Discovery::ComponentArrived {
            component_id: c.component_id.clone(),
            kind: c.kind.clone(),
        });
        self.s.components.insert(c.component_id.clone(), c);
        Ok(())
    }

    /// Removes a component together with every link touching it.
    pub fn unregister(&mut self, component_id: &str) -> Result<Component, AssemblyError> {
        let (c, _) = self.s.remove_component(component_id)?;
        self.discovery.push(Discovery::ComponentDeparted {
            component_id: component_id.to_string(),
        });
        Ok(c)
    }

    pub fn connect(&mut self, link: Link) -> Result<u64, AssemblyError> {
        self.s.insert_link(link)
    }

    pub fn disconnect(&mut self, link: &Link) -> Result<(), AssemblyError> {
        let seq = self
            .s
            .has_link(link)
            .ok_or_else(|| AssemblyError::UnknownLink(link.to_string()))?;
        self.s.links.remove(&seq);
        Ok(())
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.s.components.get(id)
    }

    pub fn components(&self) -> impl Iterator<Item = &Component> {
        self.s.components.values()
    }

    /// Links in creation order.
    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.s.links.values()
    }

    pub fn graph(&self) -> AssemblyGraph {
        AssemblyGraph {
            components: self.s.components.clone(),
            links: self.s.links.values().cloned().collect(),
        }
    }

    pub fn discovery(&self) -> &[Discovery] {
        &self.discovery
    }

    /// Removes and returns the announcements accumulated so far.
    pub fn take_discovery(&mut self) -> Vec<Discovery> {
        std::mem::take(&mut self.discovery)
    }

    pub fn applied_aas(&self) -> impl Iterator<Item = &str> {
        self.applied.iter().map(|a| a.aa_id.as_str())
    }

    pub fn set_property(&mut self, component_id: &str, name: &str, value: Value) -> Result<(), AssemblyError> {
        let c = self
            .s
            .components
            .get_mut(component_id)
            .ok_or_else(|| AssemblyError::UnknownComponent(component_id.to_string()))?;
        c.properties.insert(name.to_string(), value);
        Ok(())
    }

    /// Emits `event` on `component_id` and propagates depth-first along links
    /// in creation order. A link fires at most once per call.
    pub fn emit(
        &mut self,
        component_id: &str,
        event: &str,
        payload: Value,
        remote: &mut dyn RemoteCaller,
    ) -> Result<Vec<TraceStep>, AssemblyError> {
        let c = self
            .s
            .components
            .get(component_id)
            .ok_or_else(|| AssemblyError::UnknownComponent(component_id.to_string()))?;
        if !c.output_events.contains(event) {
            return Err(AssemblyError::UnknownEndpoint(format!("{component_id}.{event}")));
        }
        let mut visited = BTreeSet::new();
        let mut trace = Vec::new();
        self.propagate(component_id, event, payload, &mut visited, &mut trace, remote);
        Ok(trace)
    }

    /// Calls an input method directly, as if a link had delivered to it.
    pub fn call_input(
        &mut self,
        component_id: &str,
        method: &str,
        payload: Value,
        remote: &mut dyn RemoteCaller,
    ) -> Result<Vec<TraceStep>, AssemblyError> {
        let c = self
            .s
            .components
            .get(component_id)
            .ok_or_else(|| AssemblyError::UnknownComponent(component_id.to_string()))?;
        if !c.input_methods.contains(method) {
            return Err(AssemblyError::UnknownEndpoint(format!("{component_id}.{method}")));
        }
        let mut visited = BTreeSet::new();
        let mut trace = Vec::new();
        let emitted = self
            .handle(component_id, method, &payload, remote)
            .map_err(AssemblyError::InvalidComponent)?;
        for (ev, p) in emitted {
            self.propagate(component_id, &ev, p, &mut visited, &mut trace, remote);
        }
        Ok(trace)
    }

    fn propagate(
        &mut self,
        component_id: &str,
        event: &str,
        payload: Value,
        visited: &mut BTreeSet<u64>,
        trace: &mut Vec<TraceStep>,
        remote: &mut dyn RemoteCaller,
    ) {
        let outgoing: Vec<(u64, Link)> = self
            .s
            .links
            .iter()
            .filter(|(_, l)| l.src.component_id == component_id && l.src.name == event)
            .map(|(s, l)| (*s, l.clone()))
            .collect();
        for (seq, link) in outgoing {
            if !visited.insert(seq) || !self.s.links.contains_key(&seq) {
                continue;
            }
            let step = trace.len();
            trace.push(TraceStep {
                link: link.clone(),
                payload: payload.clone(),
                failure: None,
            });
            match self.handle(&link.dst.component_id, &link.dst.name, &payload, remote) {
                Ok(emitted) => {
                    for (ev, p) in emitted {
                        self.propagate(&link.dst.component_id, &ev, p, visited, trace, remote);
                    }
                }
                Err(e) => trace[step].failure = Some(e),
            }
        }
    }

    /// Runs the behavior of `method` on a component; returns its emissions.
    fn handle(
        &mut self,
        component_id: &str,
        method: &str,
        payload: &Value,
        remote: &mut dyn RemoteCaller,
    ) -> Result<Vec<(String, Value)>, String> {
        let c = self
            .s
            .components
            .get_mut(component_id)
            .ok_or_else(|| format!("no component `{component_id}`"))?;
        let one = |ev: &str, p: Value| Ok(vec![(ev.to_string(), p)]);
        match (c.kind.as_str(), method) {
            (kinds::BUTTON, "press") => one("click", payload.clone()),
            (kinds::RADIO_BUTTON, "route") => {
                let checked = c.properties.get("checked").and_then(Value::as_bool).unwrap_or(false);
                one(if checked { "whenChecked" } else { "whenUnchecked" }, payload.clone())
            }
            (kinds::RADIO_BUTTON, "check" | "uncheck" | "toggle") => {
                let old = c.properties.get("checked").and_then(Value::as_bool).unwrap_or(false);
                let new = match method {
                    "check" => true,
                    "uncheck" => false,
                    _ => !old,
                };
                c.properties.insert("checked".into(), Value::Bool(new));
                one("changed", Value::Bool(new))
            }
            (kinds::TEXTBOX, "setText") => {
                c.properties.insert("text".into(), Value::Str(payload.to_text()));
                one("textChanged", payload.clone())
            }
            (kinds::EVENT_TOGGLER, "toggle") => {
                let target = c
                    .text_property("target_component")
                    .ok_or("toggler has no target_component")?
                    .to_string();
                let prop = c
                    .text_property("target_property")
                    .ok_or("toggler has no target_property")?
                    .to_string();
                let t = self
                    .s
                    .components
                    .get_mut(&target)
                    .ok_or_else(|| format!("toggle target `{target}` is missing"))?;
                let cur = t
                    .properties
                    .get(&prop)
                    .and_then(Value::as_bool)
                    .ok_or_else(|| format!("{target}.{prop} is not boolean"))?;
                t.properties.insert(prop, Value::Bool(!cur));
                one("toggled", payload.clone())
            }
            (kinds::SOAP_PROXY, "invoke") => {
                let proxy = c.proxy.clone().ok_or("proxy descriptor missing")?;
                let op_name = c
                    .text_property("operation")
                    .ok_or("proxy has no operation")?
                    .to_string();
                let op = proxy
                    .contract
                    .operation(&op_name)
                    .ok_or_else(|| format!("contract has no operation `{op_name}`"))?;
                let args = match op.params.len() {
                    0 => Vec::new(),
                    1 => vec![payload.clone()],
                    n => return Err(format!("{op_name} takes {n} arguments")),
                };
                match remote.call(&proxy, &op_name, args) {
                    Ok(v) => one("result", v.unwrap_or(Value::Str(String::new()))),
                    Err(e) => one("fault", Value::Str(e)),
                }
            }
            _ if c.input_methods.contains(method) => Ok(Vec::new()),
            _ => Err(format!("{component_id} has no input `{method}`")),
        }
    }

    /// Applies an AA atomically: removals first, then additions.
    pub fn apply_aa(&mut self, aa: &AssemblyAspect) -> Result<(), AssemblyError> {
        let conflict = |d: String| AssemblyError::ConflictingAA(d);
        if self.applied.iter().any(|a| a.aa_id == aa.aa_id) {
            return Err(conflict(format!("`{}` is already applied", aa.aa_id)));
        }
        let mut s = self.s.clone();
        let mut rec = AppliedAa {
            aa_id: aa.aa_id.clone(),
            added_components: Vec::new(),
            added_links: Vec::new(),
            removed_components: Vec::new(),
            removed_links: Vec::new(),
        };
        let mut events = Vec::new();
        for l in &aa.remove_links {
            let seq = s
                .has_link(l)
                .ok_or_else(|| conflict(format!("link {l} does not exist")))?;
            s.links.remove(&seq);
            rec.removed_links.push((seq, l.clone()));
        }
        for id in &aa.remove_components {
            let (c, links) = s
                .remove_component(id)
                .map_err(|_| conflict(format!("component `{id}` does not exist")))?;
            rec.removed_components.push(c);
            rec.removed_links.extend(links);
            events.push(Discovery::ComponentDeparted {
                component_id: id.clone(),
            });
        }
        for c in &aa.add_components {
            c.validate().map_err(|e| conflict(e.to_string()))?;
            if s.components.contains_key(&c.component_id) {
                return Err(conflict(format!("component `{}` already exists", c.component_id)));
            }
            s.components.insert(c.component_id.clone(), c.clone());
            rec.added_components.push(c.component_id.clone());
            events.push(Discovery::ComponentArrived {
                component_id: c.component_id.clone(),
                kind: c.kind.clone(),
            });
        }
        for l in &aa.add_links {
            let seq = s.insert_link(l.clone()).map_err(|e| conflict(e.to_string()))?;
            rec.added_links.push(seq);
        }
        self.s = s;
        self.applied.push(rec);
        self.discovery.extend(events);
        self.discovery.push(Discovery::AaApplied {
            aa_id: aa.aa_id.clone(),
        });
        Ok(())
    }

    /// Undoes an applied AA, restoring removed links at their original
    /// position in creation order.
    pub fn revert_aa(&mut self, aa_id: &str) -> Result<(), AssemblyError> {
        let idx = self
            .applied
            .iter()
            .position(|a| a.aa_id == aa_id)
            .ok_or_else(|| AssemblyError::UnknownAA(aa_id.to_string()))?;
        let rec = &self.applied[idx];
        let conflict = |d: String| AssemblyError::ConflictingAA(d);
        let mut s = self.s.clone();
        let mut events = Vec::new();
        for seq in &rec.added_links {
            s.links.remove(seq);
        }
        for id in &rec.added_components {
            s.remove_component(id)
                .map_err(|_| conflict(format!("component `{id}` is no longer present")))?;
            events.push(Discovery::ComponentDeparted {
                component_id: id.clone(),
            });
        }
        for c in &rec.removed_components {
            if s.components.contains_key(&c.component_id) {
                return Err(conflict(format!("component `{}` was re-added", c.component_id)));
            }
            s.components.insert(c.component_id.clone(), c.clone());
            events.push(Discovery::ComponentArrived {
                component_id: c.component_id.clone(),
                kind: c.kind.clone(),
            });
        }
        for (seq, l) in &rec.removed_links {
            if s.links.contains_key(seq) {
                return Err(conflict(format!("link slot {seq} is occupied")));
            }
            s.check_link(l).map_err(|e| conflict(e.to_string()))?;
            s.links.insert(*seq, l.clone());
        }
        self.s = s;
        self.applied.remove(idx);
        self.discovery.extend(events);
        self.discovery.push(Discovery::AaReverted {
            aa_id: aa_id.to_string(),
        });
        Ok(())
    }

    /// Line-oriented dump: components by id, then links in creation order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for c in self.s.components.values() {
            out.push_str(&format!("component {} {}", c.component_id, c.kind));
            for (k, v) in &c.properties {
                out.push_str(&format!(" {k}={}", dump_value(v)));
            }
            out.push('\n');
        }
        for l in self.s.links.values() {
            out.push_str(&format!("link {l}\n"));
        }
        out
    }
}

fn dump_value(v: &Value) -> String {
    match v {
        Value::Str(s) => quote(s),
        other => other.to_text(),
    }
}

/// Ids used by the alarm display chain.
pub mod chain {
    pub const AA_ID: &str = "alarm-display-chain";
    pub const BUTTON: &str = "button1";
    pub const PROXY: &str = "enterprise31";
    pub const RADIO: &str = "radiobutton1";
    pub const TOGGLER: &str = "eventToggler1";
    pub const PDA_SWITCH: &str = "pdaSwitch";
    pub const PDA: &str = "PDA";
    pub const TV: &str = "TV";
}

/// Base components of the alarm display assembly. `radiobutton1` starts
/// checked, mirroring a PDA that is switched on.
pub fn alarm_components(alarm_proxy: ProxyDescriptor) -> Vec<Component> {
    use chain::*;
    vec![
        Component::button(BUTTON),
        Component::soap_proxy(PROXY, alarm_proxy, "AfficherAlarme"),
        Component::radio_button(RADIO, true),
        Component::event_toggler(TOGGLER, RADIO, "checked"),
        Component::button(PDA_SWITCH),
        Component::textbox(PDA),
        Component::textbox(TV),
    ]
}

/// The AA wiring the chain: button to proxy, proxy result through the radio
/// gate to PDA or TV, and the PDA switch through the toggler.
pub fn alarm_chain_aa() -> AssemblyAspect {
    use chain::*;
    let mut aa = AssemblyAspect::new(AA_ID);
    aa.add_links = vec![
        Link::new((BUTTON, "click"), (PROXY, "invoke")),
        Link::new((PROXY, "result"), (RADIO, "route")),
        Link::new((PDA_SWITCH, "click"), (TOGGLER, "toggle")),
        Link::new((RADIO, "whenChecked"), (PDA, "setText")),
        Link::new((RADIO, "whenUnchecked"), (TV, "setText")),
    ];
    aa
}
