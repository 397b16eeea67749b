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


//! The service gateway: exports broker targets as contract endpoints, runs
//! the identification flow for the mobile HMI and routes equipment alarms.

mod routing;
mod transport;

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::adaptation::{
    self, build_service_widgets, category_prompt, AdaptError, AdaptationRule, Context, Field,
    Override, OverrideStore, PresentationDescriptor, SERVICE_PROMPT,
};
use crate::assembly::{self, chain, Assembly, AssemblyAspect, AssemblyError, Discovery, TraceStep};
use crate::contract::{
    make_proxy, make_stub, Contract, ContractError, EndpointUrl, OperationDecl, Param, ProxyDescriptor,
};
use crate::envelope::EnvelopeError;
use crate::events::{Event, EventLog, ServiceHit};
use crate::orb::{Alarm, Orb, OrbError, ScheduledAlarm, Servant, Severity};
use crate::registry::{LocationFix, Profile, RankedService, Registry, RegistryError, DEFAULT_RADIUS_KM};
use crate::value::{SimpleType, Value};
use crate::weaver::{Action, AspectDoc, Effect, FiredAdvice, Joinpoint, Outcome, Weaver, WeaverError};

pub use routing::{route_alarm, route_for, Device, DeviceStates, Route, RoutingDecision, ASSEMBLY_ID, GATEWAY_ID, ORB_ID};
pub use transport::{Endpoint, Transport};

pub const ANDROID_ID: &str = "android1";
/// Class path of the mobile HMI service whose methods are joinpoints.
pub const HMI_PATH: &str = "com.Android_Location_Profile_Service.Android_Profile_Service";
pub const ENT_IMPL_URL: &str = "http://192.168.1.2:8080/Enterprise/services/EntImpl";
pub const ALARM_IMPL_URL: &str = "http://192.168.1.2:8080/Enterprise/services/AlarmImpl";
pub const ENTERPRISE_PROXY: &str = "enterprise";
pub const ALARMS_PROXY: &str = "alarms";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("unknown user `{0}`")]
    UnknownUser(String),
    #[error(transparent)]
    Registry(RegistryError),
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    Orb(#[from] OrbError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Weaver(#[from] WeaverError),
    #[error(transparent)]
    Adapt(#[from] AdaptError),
    #[error("an endpoint is already exported at {0}")]
    DuplicateUrl(String),
    #[error("no endpoint exported at {0}")]
    UnknownUrl(String),
    #[error("no contract named `{0}`")]
    UnknownContract(String),
    #[error("no proxy named `{0}`")]
    UnknownProxy(String),
    #[error("no assembly aspect `{0}` in the catalog")]
    UnknownAA(String),
    #[error("transport error: {0}")]
    TransportError(String),
    #[error("remote fault {code}: {reason}")]
    RemoteFault { code: String, reason: String },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("no active session")]
    NoSession,
    #[error("no known location for user `{0}`")]
    NoLocation(String),
    #[error("service `{0}` was not offered in this session")]
    NotOffered(String),
    #[error("vetoed by `{aspect_id}`: {reason}")]
    Vetoed { aspect_id: String, reason: String },
}

impl From<RegistryError> for GatewayError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::UnknownUser(u) => GatewayError::UnknownUser(u),
            other => GatewayError::Registry(other),
        }
    }
}

pub fn orb_code(e: &OrbError) -> &'static str {
    match e {
        OrbError::DuplicateName(_) => "DuplicateName",
        OrbError::UnknownObject(_) => "UnknownObject",
        OrbError::MalformedIor(_) => "MalformedIor",
        OrbError::UnknownMethod { .. } => "UnknownMethod",
        OrbError::TypeMismatch { .. } => "TypeMismatch",
        OrbError::DuplicateInterceptor(_) => "DuplicateInterceptor",
        OrbError::UnknownInterceptor(_) => "UnknownInterceptor",
        OrbError::UnknownAction(_) => "UnknownAction",
        OrbError::Rejected { .. } => "Rejected",
        OrbError::UnknownAlarm(_) => "UnknownAlarm",
        OrbError::ClockRegression { .. } => "ClockRegression",
        OrbError::AlarmLogFormat { .. } => "AlarmLogFormat",
    }
}

impl GatewayError {
    /// Stable error code, used in the log, the API and scenario expectations.
    pub fn code(&self) -> &'static str {
        match self {
            GatewayError::UnknownUser(_) => "UnknownUser",
            GatewayError::Registry(e) => match e {
                RegistryError::InvalidProfile(_) => "InvalidProfile",
                RegistryError::InvalidService(_) => "InvalidService",
                RegistryError::InvalidLocation(_) => "InvalidLocation",
                RegistryError::UnknownUser(_) => "UnknownUser",
                RegistryError::UnknownService(_) => "UnknownService",
                RegistryError::InvalidRadius(_) => "InvalidRadius",
                RegistryError::Io { .. } => "IoError",
                RegistryError::Format { .. } => "FormatError",
            },
            GatewayError::Contract(e) => match e {
                ContractError::Syntax { .. } => "SyntaxError",
                ContractError::DuplicateOperation(_) => "DuplicateOperation",
                ContractError::DuplicateParam { .. } => "DuplicateParam",
                ContractError::MissingNamespace => "MissingNamespace",
                ContractError::UnknownOperation(_) => "UnknownOperation",
                ContractError::InvalidEndpoint(_) => "InvalidEndpoint",
                ContractError::UnresolvableTarget(_) => "UnresolvableTarget",
            },
            GatewayError::Envelope(e) => match e {
                EnvelopeError::MalformedEnvelope { .. } => "MalformedEnvelope",
                EnvelopeError::UnknownKind(_) => "UnknownKind",
                EnvelopeError::TypeMismatch(_) => "TypeMismatch",
                EnvelopeError::InvalidMessage(_) => "InvalidMessage",
            },
            GatewayError::Orb(e) => orb_code(e),
            GatewayError::Assembly(e) => match e {
                AssemblyError::DuplicateComponent(_) => "DuplicateComponent",
                AssemblyError::UnknownComponent(_) => "UnknownComponent",
                AssemblyError::UnknownEndpoint(_) => "UnknownEndpoint",
                AssemblyError::DuplicateLink(_) => "DuplicateLink",
                AssemblyError::UnknownLink(_) => "UnknownLink",
                AssemblyError::UnknownAA(_) => "UnknownAA",
                AssemblyError::ConflictingAA(_) => "ConflictingAA",
                AssemblyError::InvalidComponent(_) => "InvalidComponent",
                AssemblyError::MalformedLink(_) => "MalformedLink",
            },
            GatewayError::Weaver(e) => match e {
                WeaverError::DuplicateAspect(_) => "DuplicateAspect",
                WeaverError::UnknownAspect(_) => "UnknownAspect",
                WeaverError::UnknownAction(_) => "UnknownAction",
                WeaverError::DuplicateAction(_) => "DuplicateAction",
                WeaverError::InvalidAdvice(_) => "InvalidAdvice",
                WeaverError::Pointcut(_) => "PointcutSyntax",
            },
            GatewayError::Adapt(e) => match e {
                AdaptError::UnknownField(_) => "UnknownField",
                AdaptError::InvalidValue { .. } => "InvalidValue",
            },
            GatewayError::DuplicateUrl(_) => "DuplicateUrl",
            GatewayError::UnknownUrl(_) => "UnknownUrl",
            GatewayError::UnknownContract(_) => "UnknownContract",
            GatewayError::UnknownProxy(_) => "UnknownProxy",
            GatewayError::UnknownAA(_) => "UnknownAA",
            GatewayError::TransportError(_) => "TransportError",
            GatewayError::RemoteFault { .. } => "RemoteFault",
            GatewayError::TypeMismatch(_) => "TypeMismatch",
            GatewayError::NoSession => "NoSession",
            GatewayError::NoLocation(_) => "NoLocation",
            GatewayError::NotOffered(_) => "NotOffered",
            GatewayError::Vetoed { .. } => "Vetoed",
        }
    }
}

/// The contract exported for the broker's status display.
pub fn enterprise_contract() -> Contract {
    Contract::new(
        "Enterprise",
        "http://Ent",
        vec![OperationDecl::shorthand("AfficherNormal", vec![], SimpleType::String)],
    )
    .expect("valid contract")
}

/// The contract used to fetch alarm bodies.
pub fn enterprise_alarms_contract() -> Contract {
    Contract::new(
        "EnterpriseAlarms",
        "http://Ent",
        vec![OperationDecl::shorthand(
            "AfficherAlarme",
            vec![Param::new("alarm_id", SimpleType::String)],
            SimpleType::String,
        )],
    )
    .expect("valid contract")
}

pub(crate) fn log_advice(log: &mut EventLog, tick: u64, jp: &Joinpoint, trace: &[FiredAdvice]) {
    for f in trace {
        log.push(
            tick,
            Event::Advice {
                aspect_id: f.aspect_id.clone(),
                advice: f.kind,
                joinpoint: jp.qualified_name(),
            },
        );
        if let Some(Effect::Log { text }) = &f.effect {
            log.push(
                tick,
                Event::AdviceLog {
                    aspect_id: f.aspect_id.clone(),
                    text: text.clone(),
                },
            );
        }
    }
}

fn hmi_joinpoint(method: &str, arg: &str) -> Joinpoint {
    Joinpoint::execution(ANDROID_ID, HMI_PATH, method).with_signature("void", &[arg])
}

/// State of the identified mobile user.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Session {
    pub user_id: String,
    #[serde(skip)]
    pub overrides: OverrideStore,
    /// Assignments requested by advice, applied under the overrides.
    pub advised: Vec<(Field, String)>,
    pub prompt: String,
    pub offered: Vec<RankedService>,
    /// Services last pushed or sent for the unfiltered default query.
    pub baseline: Vec<String>,
    pub descriptor: PresentationDescriptor,
}

/// Outcome of the identification flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Identified {
    pub profile: Profile,
    pub descriptor: PresentationDescriptor,
    pub services: Vec<RankedService>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AspectView {
    pub aspect_id: String,
    pub pointcut: String,
    pub advices: Vec<crate::weaver::Advice>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionView {
    pub user_id: String,
    pub overrides: Vec<Override>,
    pub offered: Vec<ServiceHit>,
}

/// Read-only snapshot served at `/state`.
#[derive(Debug, Clone, Serialize)]
pub struct StateSnapshot {
    pub tick: u64,
    pub log_len: usize,
    pub devices: DeviceStates,
    pub queue_depth: usize,
    pub queue: Vec<String>,
    pub descriptor: Option<PresentationDescriptor>,
    pub session: Option<SessionView>,
    pub aspects: Vec<AspectView>,
    pub applied_aas: Vec<String>,
    pub aa_catalog: Vec<String>,
    pub endpoints: Vec<String>,
    pub alarms_logged: usize,
    pub assembly: String,
}

/// Advice fired so far and the presentation fields it set.
type Advised = (Vec<FiredAdvice>, Vec<(Field, String)>);

#[derive(Debug, Clone)]
pub struct Gateway {
    registry: Registry,
    orb: Orb,
    assembly: Assembly,
    weaver: Weaver,
    rules: Vec<AdaptationRule>,
    contracts: BTreeMap<String, Contract>,
    endpoints: BTreeMap<String, Endpoint>,
    proxies: BTreeMap<String, ProxyDescriptor>,
    aa_catalog: BTreeMap<String, AssemblyAspect>,
    devices: DeviceStates,
    queue: VecDeque<Alarm>,
    user_locations: BTreeMap<String, LocationFix>,
    session: Option<Session>,
    log: EventLog,
    tick: u64,
    msg_seq: u64,
}

impl Gateway {
    /// The case-study world around `registry`: the Enterprise servant on the
    /// broker, its two endpoints, and the alarm display assembly.
    pub fn new(registry: Registry) -> Self {
        let mut g = Gateway {
            registry,
            orb: Orb::new(ORB_ID),
            assembly: Assembly::new(ASSEMBLY_ID),
            weaver: Weaver::new(),
            rules: adaptation::builtin_rules(),
            contracts: BTreeMap::new(),
            endpoints: BTreeMap::new(),
            proxies: BTreeMap::new(),
            aa_catalog: BTreeMap::new(),
            devices: DeviceStates::default(),
            queue: VecDeque::new(),
            user_locations: BTreeMap::new(),
            session: None,
            log: EventLog::new(),
            tick: 0,
            msg_seq: 0,
        };
        g.orb.bind(Servant::enterprise()).expect("fresh orb");
        for c in [enterprise_contract(), enterprise_alarms_contract()] {
            g.contracts.insert(c.name.clone(), c);
        }
        g.export_endpoint("Enterprise", "Enterprise", ENT_IMPL_URL)
            .expect("fixture endpoint");
        g.export_endpoint("EnterpriseAlarms", "Enterprise", ALARM_IMPL_URL)
            .expect("fixture endpoint");
        let ent = make_proxy(&g.contracts["Enterprise"], ENT_IMPL_URL).expect("fixture url");
        let alarms = make_proxy(&g.contracts["EnterpriseAlarms"], ALARM_IMPL_URL).expect("fixture url");
        g.proxies.insert(ENTERPRISE_PROXY.into(), ent);
        g.proxies.insert(ALARMS_PROXY.into(), alarms.clone());
        for c in assembly::alarm_components(alarms) {
            g.assembly.register(c).expect("fixture component");
        }
        let aa = assembly::alarm_chain_aa();
        g.aa_catalog.insert(aa.aa_id.clone(), aa);
        g.flush_discovery();
        g
    }

    pub fn case_study() -> Self {
        Gateway::new(Registry::case_study())
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }
    pub fn orb(&self) -> &Orb {
        &self.orb
    }
    pub fn orb_mut(&mut self) -> &mut Orb {
        &mut self.orb
    }
    pub fn assembly(&self) -> &Assembly {
        &self.assembly
    }
    pub fn weaver(&self) -> &Weaver {
        &self.weaver
    }
    pub fn log(&self) -> &EventLog {
        &self.log
    }
    pub fn tick(&self) -> u64 {
        self.tick
    }
    pub fn devices(&self) -> DeviceStates {
        self.devices
    }
    pub fn queue(&self) -> impl Iterator<Item = &Alarm> {
        self.queue.iter()
    }
    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }
    pub fn endpoints(&self) -> impl Iterator<Item = &Endpoint> {
        self.endpoints.values()
    }
    pub fn contract(&self, name: &str) -> Option<&Contract> {
        self.contracts.get(name)
    }
    pub fn proxy(&self, name: &str) -> Option<&ProxyDescriptor> {
        self.proxies.get(name)
    }

    /// Advances the logical clock. Ticks never go backwards.
    pub fn set_tick(&mut self, tick: u64) {
        self.tick = self.tick.max(tick);
    }

    pub fn record(&mut self, event: Event) -> u64 {
        self.log.push(self.tick, event)
    }

    fn flush_discovery(&mut self) {
        for d in self.assembly.take_discovery() {
            let e = match d {
                Discovery::ComponentArrived { component_id, kind } => Event::ComponentArrived {
                    component_id,
                    component_kind: kind,
                },
                Discovery::ComponentDeparted { component_id } => Event::ComponentDeparted { component_id },
                Discovery::AaApplied { aa_id } => Event::AaApplied { aa_id },
                Discovery::AaReverted { aa_id } => Event::AaReverted { aa_id },
            };
            self.record(e);
        }
    }

    fn transport(&mut self) -> (Transport<'_>, &mut Assembly) {
        (
            Transport {
                endpoints: &self.endpoints,
                orb: &self.orb,
                weaver: &self.weaver,
                msg_seq: &mut self.msg_seq,
                log: &mut self.log,
                tick: self.tick,
            },
            &mut self.assembly,
        )
    }

    // ----- endpoints and cross-platform calls -----

    pub fn export_endpoint(&mut self, contract: &str, target_path: &str, url: &str) -> Result<(), GatewayError> {
        let c = self
            .contracts
            .get(contract)
            .ok_or_else(|| GatewayError::UnknownContract(contract.to_string()))?;
        let parsed: EndpointUrl = url.parse()?;
        let key = parsed.to_string();
        if self.endpoints.contains_key(&key) {
            return Err(GatewayError::DuplicateUrl(key));
        }
        let stub = make_stub(c, ORB_ID, target_path, &self.orb)?;
        let name = c.name.clone();
        self.endpoints.insert(key.clone(), Endpoint { url: key.clone(), stub });
        self.record(Event::EndpointExported { url: key, contract: name });
        Ok(())
    }

    pub fn unexport_endpoint(&mut self, url: &str) -> Result<Endpoint, GatewayError> {
        let ep = self
            .endpoints
            .remove(url)
            .ok_or_else(|| GatewayError::UnknownUrl(url.to_string()))?;
        self.record(Event::EndpointUnexported { url: url.to_string() });
        Ok(ep)
    }

    /// The canonical contract served at `/<app>/services/<impl>`.
    pub fn wsdl(&self, app: &str, imp: &str) -> Option<String> {
        self.endpoints.values().find_map(|ep| {
            let url: EndpointUrl = ep.url.parse().ok()?;
            (url.service_parts() == Some((app, imp))).then(|| ep.stub.contract.render())
        })
    }

    pub fn call_remote(&mut self, proxy: &ProxyDescriptor, op: &str, args: Vec<Value>) -> Result<Option<Value>, GatewayError> {
        self.transport().0.call(proxy, op, args)
    }

    pub fn call_proxy(&mut self, proxy_name: &str, op: &str, args: Vec<Value>) -> Result<Option<Value>, GatewayError> {
        let p = self
            .proxies
            .get(proxy_name)
            .cloned()
            .ok_or_else(|| GatewayError::UnknownProxy(proxy_name.to_string()))?;
        self.call_remote(&p, op, args)
    }

    /// Feeds raw envelope bytes to the endpoint at `url`.
    pub fn handle_envelope(&mut self, url: &str, bytes: &[u8]) -> Result<Vec<u8>, GatewayError> {
        self.transport().0.serve(url, bytes)
    }

    // ----- mobile user flows -----

    fn context(&self) -> Context {
        let mut cx = Context::new();
        cx.insert("pda".into(), on_off(self.devices.pda_on).into());
        cx.insert("tv".into(), on_off(self.devices.tv_on).into());
        cx
    }

    fn ensure_session(&mut self, user_id: &str) {
        if self.session.as_ref().is_some_and(|s| s.user_id == user_id) {
            return;
        }
        self.session = Some(Session {
            user_id: user_id.to_string(),
            overrides: OverrideStore::new(),
            advised: Vec::new(),
            prompt: String::new(),
            offered: Vec::new(),
            baseline: Vec::new(),
            descriptor: PresentationDescriptor::neutral(),
        });
    }

    fn render(&self, profile: &Profile, s: &Session) -> PresentationDescriptor {
        let mut d = adaptation::adapt_with(profile, &self.context(), &OverrideStore::new(), &self.rules);
        for (f, v) in &s.advised {
            let _ = d.set(*f, v);
        }
        for o in s.overrides.iter() {
            d.set(o.field, &o.value).expect("stored overrides are valid");
        }
        if !s.prompt.is_empty() {
            d.widgets.extend(build_service_widgets(&s.offered, &s.prompt));
        }
        d
    }

    fn refresh_descriptor(&mut self, profile: &Profile) -> PresentationDescriptor {
        let s = self.session.as_ref().expect("session");
        let d = self.render(profile, s);
        self.session.as_mut().expect("session").descriptor = d.clone();
        d
    }

    fn speak(&mut self, user_id: &str, d: &PresentationDescriptor) {
        if !d.vocal {
            return;
        }
        let lines: Vec<String> = d
            .widgets
            .iter()
            .filter(|w| !matches!(w, adaptation::Widget::Text { .. }))
            .map(|w| w.text().to_string())
            .collect();
        for text in lines {
            self.record(Event::Vocal {
                user_id: user_id.to_string(),
                text,
            });
        }
    }

    fn advised_fields(effects: &[&Effect]) -> Vec<(Field, String)> {
        effects
            .iter()
            .filter_map(|e| match e {
                Effect::SetPresentation { field, value } => Some((Field::parse(field).ok()?, value.clone())),
                Effect::Log { .. } => None,
            })
            .collect()
    }

    /// Runs advice at `jp` around a body executed by the caller: befores and
    /// arounds are logged now, afters are returned for logging after the body.
    fn advise(&mut self, jp: &Joinpoint) -> Result<Advised, GatewayError> {
        let d = self.weaver.dispatch(jp, || ());
        let advised = Self::advised_fields(&d.effects().collect::<Vec<_>>());
        let (early, late): (Vec<FiredAdvice>, Vec<FiredAdvice>) = d
            .trace
            .into_iter()
            .partition(|f| f.kind != crate::weaver::AdviceKind::After);
        log_advice(&mut self.log, self.tick, jp, &early);
        if let Outcome::Vetoed { aspect_id, reason } = d.outcome {
            self.record(Event::AdviceVetoed {
                aspect_id: aspect_id.clone(),
                joinpoint: jp.qualified_name(),
                reason: reason.clone(),
            });
            return Err(GatewayError::Vetoed { aspect_id, reason });
        }
        Ok((late, advised))
    }

    fn finish_advice(&mut self, jp: &Joinpoint, late: Vec<FiredAdvice>) {
        log_advice(&mut self.log, self.tick, jp, &late);
    }

    fn fix_for(user_id: &str, longitude: f64, latitude: f64) -> Result<LocationFix, GatewayError> {
        Ok(LocationFix::new(format!("at-{user_id}"), longitude, latitude)?)
    }

    /// Location and user id in; profile, adapted HMI and nearby services out.
    pub fn identify(&mut self, user_id: &str, longitude: f64, latitude: f64) -> Result<Identified, GatewayError> {
        let fix = Self::fix_for(user_id, longitude, latitude)?;
        self.record(Event::RecvLocation {
            user_id: user_id.to_string(),
            longitude,
            latitude,
        });
        let profile = match self.registry.authenticate(user_id) {
            Ok(p) => p.clone(),
            Err(e) => {
                self.record(Event::Authenticate {
                    user_id: user_id.to_string(),
                    ok: false,
                });
                return Err(e.into());
            }
        };
        self.record(Event::Authenticate {
            user_id: user_id.to_string(),
            ok: true,
        });
        self.record(Event::ProfileLoaded {
            user_id: user_id.to_string(),
            name: profile.name.clone(),
        });
        self.user_locations.insert(user_id.to_string(), fix.clone());
        self.ensure_session(user_id);

        let jp = hmi_joinpoint("onCreate", "Bundle");
        let (late, advised) = self.advise(&jp)?;
        {
            let s = self.session.as_mut().expect("session");
            s.advised = advised;
            s.prompt.clear();
            s.offered.clear();
        }
        let adapted = self.refresh_descriptor(&profile);
        self.record(Event::HmiAdapted {
            user_id: user_id.to_string(),
            descriptor: adapted,
        });
        let services = self.registry.find_services(user_id, &fix, DEFAULT_RADIUS_KM, None)?;
        self.record(Event::ServicesFound {
            user_id: user_id.to_string(),
            category: None,
            max_km: DEFAULT_RADIUS_KM,
            services: services.iter().map(ServiceHit::from).collect(),
        });
        {
            let s = self.session.as_mut().expect("session");
            s.prompt = SERVICE_PROMPT.to_string();
            s.offered = services.clone();
            s.baseline = services.iter().map(|r| r.entry.id_service.clone()).collect();
        }
        let descriptor = self.refresh_descriptor(&profile);
        self.record(Event::ServicesSent {
            user_id: user_id.to_string(),
            descriptor: descriptor.clone(),
        });
        self.speak(user_id, &descriptor);
        self.finish_advice(&jp, late);
        Ok(Identified {
            profile,
            descriptor,
            services,
        })
    }

    /// Pull query: services around the user's last known location.
    pub fn query_services(
        &mut self,
        user_id: &str,
        category: Option<&str>,
        max_km: Option<f64>,
    ) -> Result<Vec<RankedService>, GatewayError> {
        let profile = self.registry.authenticate(user_id)?.clone();
        let fix = self
            .user_locations
            .get(user_id)
            .cloned()
            .ok_or_else(|| GatewayError::NoLocation(user_id.to_string()))?;
        let max_km = max_km.unwrap_or(DEFAULT_RADIUS_KM);
        let jp = hmi_joinpoint("requestServices", "String");
        let (late, advised) = self.advise(&jp)?;
        let services = self.registry.find_services(user_id, &fix, max_km, category)?;
        self.record(Event::ServicesFound {
            user_id: user_id.to_string(),
            category: category.map(str::to_string),
            max_km,
            services: services.iter().map(ServiceHit::from).collect(),
        });
        self.ensure_session(user_id);
        {
            let s = self.session.as_mut().expect("session");
            if !advised.is_empty() {
                s.advised = advised;
            }
            s.prompt = category.map(category_prompt).unwrap_or_else(|| SERVICE_PROMPT.to_string());
            s.offered = services.clone();
        }
        let descriptor = self.refresh_descriptor(&profile);
        self.record(Event::ServicesSent {
            user_id: user_id.to_string(),
            descriptor: descriptor.clone(),
        });
        self.speak(user_id, &descriptor);
        self.finish_advice(&jp, late);
        Ok(services)
    }

    /// Location change. For the session user, the default query is re-run
    /// and pushed when its result set changed.
    pub fn move_user(&mut self, user_id: &str, longitude: f64, latitude: f64) -> Result<Option<Vec<RankedService>>, GatewayError> {
        let fix = Self::fix_for(user_id, longitude, latitude)?;
        self.registry.authenticate(user_id)?;
        self.record(Event::UserMoved {
            user_id: user_id.to_string(),
            longitude,
            latitude,
        });
        self.user_locations.insert(user_id.to_string(), fix.clone());
        if !self.session.as_ref().is_some_and(|s| s.user_id == user_id) {
            return Ok(None);
        }
        let jp = hmi_joinpoint("onLocationChanged", "Location");
        let (late, _) = self.advise(&jp)?;
        let services = self.registry.find_services(user_id, &fix, DEFAULT_RADIUS_KM, None)?;
        let ids: Vec<String> = services.iter().map(|r| r.entry.id_service.clone()).collect();
        let changed = self.session.as_ref().expect("session").baseline != ids;
        let pushed = if changed {
            self.record(Event::ServicesPushed {
                user_id: user_id.to_string(),
                services: services.iter().map(ServiceHit::from).collect(),
            });
            let s = self.session.as_mut().expect("session");
            s.baseline = ids;
            s.prompt = SERVICE_PROMPT.to_string();
            s.offered = services.clone();
            let profile = self.registry.authenticate(user_id)?.clone();
            let descriptor = self.refresh_descriptor(&profile);
            self.record(Event::ServicesSent {
                user_id: user_id.to_string(),
                descriptor: descriptor.clone(),
            });
            self.speak(user_id, &descriptor);
            Some(services)
        } else {
            None
        };
        self.finish_advice(&jp, late);
        Ok(pushed)
    }

    pub fn select_service(&mut self, user_id: &str, id_service: &str) -> Result<RankedService, GatewayError> {
        let s = self
            .session
            .as_ref()
            .filter(|s| s.user_id == user_id)
            .ok_or(GatewayError::NoSession)?;
        let chosen = s
            .offered
            .iter()
            .find(|r| r.entry.id_service == id_service)
            .cloned()
            .ok_or_else(|| GatewayError::NotOffered(id_service.to_string()))?;
        self.record(Event::ServiceSelected {
            user_id: user_id.to_string(),
            id_service: id_service.to_string(),
            service_name: chosen.entry.service_name.clone(),
        });
        Ok(chosen)
    }

    pub fn set_override(&mut self, field: &str, value: &str) -> Result<(), GatewayError> {
        let tick = self.tick;
        let s = self.session.as_mut().ok_or(GatewayError::NoSession)?;
        let f = s.overrides.set(field, value, tick)?;
        let stored = s.overrides.get(f).expect("just set").value.clone();
        let user_id = s.user_id.clone();
        self.record(Event::OverrideSet {
            field: f.to_string(),
            value: stored,
        });
        self.readapt(&user_id)
    }

    pub fn clear_override(&mut self, field: &str) -> Result<(), GatewayError> {
        let s = self.session.as_mut().ok_or(GatewayError::NoSession)?;
        let f = Field::parse(field)?;
        s.overrides.clear(field)?;
        let user_id = s.user_id.clone();
        self.record(Event::OverrideCleared { field: f.to_string() });
        self.readapt(&user_id)
    }

    fn readapt(&mut self, user_id: &str) -> Result<(), GatewayError> {
        let profile = self.registry.authenticate(user_id)?.clone();
        let descriptor = self.refresh_descriptor(&profile);
        self.record(Event::HmiAdapted {
            user_id: user_id.to_string(),
            descriptor,
        });
        Ok(())
    }

    // ----- registry edits -----

    pub fn upsert_profile(&mut self, p: Profile) -> Result<(), GatewayError> {
        let id = self.registry.upsert_profile(p)?;
        self.record(Event::ProfileUpserted { id_profile: id });
        Ok(())
    }

    pub fn set_availability(&mut self, id_service: &str, available: bool) -> Result<(), GatewayError> {
        self.registry.set_availability(id_service, available)?;
        self.record(Event::AvailabilityChanged {
            id_service: id_service.to_string(),
            available,
        });
        Ok(())
    }

    // ----- weaving and assembly -----

    pub fn register_action(&mut self, action_id: &str, action: Action) -> Result<(), GatewayError> {
        self.weaver.register_action(action_id, action)?;
        self.record(Event::ActionRegistered {
            action_id: action_id.to_string(),
        });
        Ok(())
    }

    pub fn weave(&mut self, doc: &AspectDoc) -> Result<(), GatewayError> {
        self.weaver.weave_doc(doc)?;
        let pointcut = self.weaver.woven().last().expect("just woven").pointcut.to_string();
        self.record(Event::AspectWoven {
            aspect_id: doc.aspect_id.clone(),
            pointcut,
        });
        Ok(())
    }

    pub fn unweave(&mut self, aspect_id: &str) -> Result<(), GatewayError> {
        self.weaver.unweave(aspect_id)?;
        self.record(Event::AspectUnwoven {
            aspect_id: aspect_id.to_string(),
        });
        Ok(())
    }

    pub fn define_aa(&mut self, aa: AssemblyAspect) {
        self.aa_catalog.insert(aa.aa_id.clone(), aa);
    }

    pub fn apply_aa(&mut self, aa_id: &str) -> Result<(), GatewayError> {
        let aa = self
            .aa_catalog
            .get(aa_id)
            .cloned()
            .ok_or_else(|| GatewayError::UnknownAA(aa_id.to_string()))?;
        self.assembly.apply_aa(&aa)?;
        self.flush_discovery();
        Ok(())
    }

    pub fn revert_aa(&mut self, aa_id: &str) -> Result<(), GatewayError> {
        self.assembly.revert_aa(aa_id)?;
        self.flush_discovery();
        Ok(())
    }

    fn log_steps(&mut self, steps: &[TraceStep]) {
        for s in steps {
            self.record(Event::AssemblyStep {
                link: s.link.to_string(),
                payload: s.payload.to_text(),
                failure: s.failure.clone(),
            });
        }
    }

    // ----- alarms -----

    pub fn schedule_alarm(&mut self, tick_due: u64, source: &str, severity: Severity, text: &str) {
        self.orb.schedule_alarm(
            tick_due,
            ScheduledAlarm {
                source: source.to_string(),
                severity,
                text: text.to_string(),
            },
        );
        self.record(Event::AlarmScheduled {
            tick_due,
            source: source.to_string(),
        });
    }

    /// Releases every alarm scheduled for the current tick.
    pub fn fire_scheduled(&mut self) -> Vec<RoutingDecision> {
        let mut out = Vec::new();
        while let Some(a) = self.orb.alarm_tick(self.tick) {
            out.push(self.raise(a));
        }
        out
    }

    pub fn inject_alarm(&mut self, source: &str, severity: Severity, text: &str) -> Result<RoutingDecision, GatewayError> {
        let a = self.orb.ingest(self.tick, source, severity, text)?;
        Ok(self.raise(a))
    }

    fn raise(&mut self, a: Alarm) -> RoutingDecision {
        self.record(Event::AlarmRaised { alarm: a.clone() });
        self.dispatch_alarm(a)
    }

    fn dispatch_alarm(&mut self, a: Alarm) -> RoutingDecision {
        let d = route_alarm(&a, self.devices);
        self.record(Event::AlarmRouted { decision: d.clone() });
        match d.route {
            Route::DbOnly => {}
            Route::Queued => self.queue.push_back(a),
            Route::Pda => self.deliver_pda(&a),
            Route::Tv => self.deliver_tv(&a),
        }
        d
    }

    fn deliver_pda(&mut self, a: &Alarm) {
        let r = self.call_proxy(ALARMS_PROXY, "AfficherAlarme", vec![Value::Str(a.alarm_id.clone())]);
        let e = match r {
            Ok(v) => Event::AlarmDelivered {
                alarm_id: a.alarm_id.clone(),
                device: Device::Pda.to_string(),
                text: v.map(|v| v.to_text()).unwrap_or_default(),
            },
            Err(e) => Event::AlarmDeliveryFailed {
                alarm_id: a.alarm_id.clone(),
                detail: e.to_string(),
            },
        };
        self.record(e);
    }

    fn deliver_tv(&mut self, a: &Alarm) {
        let (mut t, asm) = self.transport();
        let steps = asm.call_input(chain::BUTTON, "press", Value::Str(a.alarm_id.clone()), &mut t);
        let e = match steps {
            Ok(steps) => {
                self.log_steps(&steps);
                let reached = steps
                    .iter()
                    .any(|s| s.link.dst.component_id == chain::TV && s.failure.is_none());
                if reached {
                    let text = self
                        .assembly
                        .component(chain::TV)
                        .and_then(|c| c.properties.get("text"))
                        .map(Value::to_text)
                        .unwrap_or_default();
                    Event::AlarmDelivered {
                        alarm_id: a.alarm_id.clone(),
                        device: Device::Tv.to_string(),
                        text,
                    }
                } else {
                    Event::AlarmDeliveryFailed {
                        alarm_id: a.alarm_id.clone(),
                        detail: "assembly chain did not reach TV".into(),
                    }
                }
            }
            Err(e) => Event::AlarmDeliveryFailed {
                alarm_id: a.alarm_id.clone(),
                detail: e.to_string(),
            },
        };
        self.record(e);
    }

    /// Power change. Switching the PDA presses the assembly's PDA switch;
    /// switching any device on flushes the queue in FIFO order.
    pub fn set_power(&mut self, device: Device, on: bool) -> Vec<RoutingDecision> {
        let was = self.devices.get(device);
        self.devices.set(device, on);
        self.record(Event::DevicePower {
            device: device.to_string(),
            on,
        });
        if device == Device::Pda && was != on {
            let (mut t, asm) = self.transport();
            if let Ok(steps) = asm.call_input(chain::PDA_SWITCH, "press", Value::Str(String::new()), &mut t) {
                self.log_steps(&steps);
            }
        }
        if !on {
            return Vec::new();
        }
        let pending: Vec<Alarm> = self.queue.drain(..).collect();
        pending.into_iter().map(|a| self.dispatch_alarm(a)).collect()
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            tick: self.tick,
            log_len: self.log.len(),
            devices: self.devices,
            queue_depth: self.queue.len(),
            queue: self.queue.iter().map(|a| a.alarm_id.clone()).collect(),
            descriptor: self.session.as_ref().map(|s| s.descriptor.clone()),
            session: self.session.as_ref().map(|s| SessionView {
                user_id: s.user_id.clone(),
                overrides: s.overrides.iter().cloned().collect(),
                offered: s.offered.iter().map(ServiceHit::from).collect(),
            }),
            aspects: self
                .weaver
                .woven()
                .iter()
                .map(|a| AspectView {
                    aspect_id: a.aspect_id.clone(),
                    pointcut: a.pointcut.to_string(),
                    advices: a.advices.clone(),
                })
                .collect(),
            applied_aas: self.assembly.applied_aas().map(str::to_string).collect(),
            aa_catalog: self.aa_catalog.keys().cloned().collect(),
            endpoints: self.endpoints.keys().cloned().collect(),
            alarms_logged: self.orb.alarm_log().len(),
            assembly: self.assembly.dump(),
        }
    }
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}
