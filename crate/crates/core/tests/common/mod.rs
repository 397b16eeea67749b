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


//! Oracles and generators shared by the integration tests and the
//! acceptance suite.

#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;

use ctxbridge::contract::{Contract, OperationDecl, Param};
use ctxbridge::envelope::{Arg, Kind, Message};
use ctxbridge::value::{SimpleType, Value};
use ctxbridge::weaver::{Action, Advice, AdviceKind, Aspect, Joinpoint, Weaver};

pub const BANNER: &str = "*****Provide available services please : *****";

// ----- geometry -----

/// Great-circle distance on a sphere of radius 6371 km.
pub fn haversine_km(lon1: f64, lat1: f64, lon2: f64, lat2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = (lat2 - lat1).to_radians();
    let dl = (lon2 - lon1).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * 6371.0 * h.sqrt().asin()
}

// ----- pointcuts -----

pub const RETURNS: &[&str] = &["void", "string"];
pub const SEGMENTS: &[&str] = &["a", "b"];
pub const METHODS: &[&str] = &["m", "n"];
pub const ARG_LISTS: &[&[&str]] = &[&[], &["String"], &["int", "String"]];

/// Every joinpoint over the small alphabets above, paths of 1 to 3 segments.
pub fn joinpoint_corpus() -> Vec<Joinpoint> {
    let mut paths: Vec<Vec<&str>> = vec![vec![]];
    let mut all = Vec::new();
    for _ in 0..3 {
        paths = paths
            .iter()
            .flat_map(|p| SEGMENTS.iter().map(move |s| [p.clone(), vec![*s]].concat()))
            .collect();
        all.extend(paths.clone());
    }
    let mut out = Vec::new();
    for r in RETURNS {
        for p in &all {
            for m in METHODS {
                for a in ARG_LISTS {
                    out.push(Joinpoint::execution("p", &p.join("."), m).with_signature(r, a));
                }
            }
        }
    }
    out
}

/// A pointcut as its parts: `None` is `*`, `args: None` is `..`.
#[derive(Debug, Clone)]
pub struct PointcutParts {
    pub ret: Option<&'static str>,
    pub path: Vec<Option<&'static str>>,
    pub method: Option<&'static str>,
    pub args: Option<&'static [&'static str]>,
}

impl PointcutParts {
    pub fn text(&self) -> String {
        let star = |p: &Option<&str>| p.map(str::to_string).unwrap_or_else(|| "*".into());
        let path: Vec<String> = self.path.iter().map(star).collect();
        let args = match self.args {
            None => "..".to_string(),
            Some(a) => a.join(", "),
        };
        format!("execution({} {}.{}({}))", star(&self.ret), path.join("."), star(&self.method), args)
    }

    /// Regex over `RET PATH.METHOD(ARGS)` signature strings.
    pub fn regex(&self) -> Regex {
        let ident = r"[A-Za-z_][A-Za-z0-9_]*";
        let pat = |p: &Option<&str>| p.map(regex::escape).unwrap_or_else(|| ident.to_string());
        let path: Vec<String> = self.path.iter().map(pat).collect();
        let args = match self.args {
            None => ".*".to_string(),
            Some(a) => regex::escape(&a.join(",")),
        };
        Regex::new(&format!(r"^{} {}\.{}\({}\)$", pat(&self.ret), path.join(r"\."), pat(&self.method), args)).unwrap()
    }
}

pub fn signature(jp: &Joinpoint) -> String {
    format!("{} {}.{}({})", jp.returns, jp.target_path.join("."), jp.method, jp.arg_types.join(","))
}

/// Every pointcut over the corpus alphabets plus `*`.
pub fn pointcut_corpus() -> Vec<PointcutParts> {
    let opt = |xs: &'static [&'static str]| -> Vec<Option<&'static str>> {
        std::iter::once(None).chain(xs.iter().copied().map(Some)).collect()
    };
    let mut paths: Vec<Vec<Option<&'static str>>> = vec![vec![]];
    let mut all_paths = Vec::new();
    for _ in 0..3 {
        paths = paths
            .iter()
            .flat_map(|p| opt(SEGMENTS).into_iter().map(move |s| [p.clone(), vec![s]].concat()))
            .collect();
        all_paths.extend(paths.clone());
    }
    let mut args: Vec<Option<&'static [&'static str]>> = vec![None];
    args.extend(ARG_LISTS.iter().map(|a| Some(*a)));
    let mut out = Vec::new();
    for ret in opt(RETURNS) {
        for path in &all_paths {
            for method in opt(METHODS) {
                for a in &args {
                    out.push(PointcutParts {
                        ret,
                        path: path.clone(),
                        method,
                        args: *a,
                    });
                }
            }
        }
    }
    out
}

/// Runs the matcher against the regex oracle over the full corpus and
/// returns the number of checks, or the first disagreement.
pub fn pointcut_agreement() -> Result<usize, String> {
    let jps = joinpoint_corpus();
    let sigs: Vec<String> = jps.iter().map(signature).collect();
    let mut checks = 0;
    for parts in pointcut_corpus() {
        let pc: ctxbridge::weaver::Pointcut = parts.text().parse().map_err(|e| format!("{}: {e}", parts.text()))?;
        let re = parts.regex();
        for (jp, sig) in jps.iter().zip(&sigs) {
            if pc.matches(jp) != re.is_match(sig) {
                return Err(format!("{} on {sig}: matcher {}", parts.text(), pc.matches(jp)));
            }
            checks += 1;
        }
    }
    Ok(checks)
}

/// Fired advice order predicted for aspects woven in `order`, each with
/// one before, around and after advice.
pub fn expected_advice_order(order: &[String]) -> Vec<(String, AdviceKind)> {
    let mut out: Vec<(String, AdviceKind)> = order.iter().map(|a| (a.clone(), AdviceKind::Before)).collect();
    out.extend(order.iter().map(|a| (a.clone(), AdviceKind::Around)));
    out.extend(order.iter().rev().map(|a| (a.clone(), AdviceKind::After)));
    out
}

fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head.clone());
            out.push(p);
        }
    }
    out
}

/// Checks the advice ordering law for every weave order of up to four
/// aspects, returning the number of orders checked.
pub fn advice_order_law() -> Result<usize, String> {
    let jp = Joinpoint::execution("p", "a.b", "m");
    let mut checked = 0;
    for k in 1..=4 {
        let ids: Vec<String> = (0..k).map(|i| format!("A{i}")).collect();
        for order in permutations(&ids) {
            let mut w = Weaver::new();
            w.register_action("say", Action::Log("x".into())).unwrap();
            w.register_action("pass", Action::Proceed).unwrap();
            for id in &order {
                w.weave(Aspect {
                    aspect_id: id.clone(),
                    pointcut: "execution(* a.b.m(..))".parse().unwrap(),
                    advices: vec![
                        Advice { kind: AdviceKind::After, action_id: "say".into() },
                        Advice { kind: AdviceKind::Around, action_id: "pass".into() },
                        Advice { kind: AdviceKind::Before, action_id: "say".into() },
                    ],
                })
                .map_err(|e| e.to_string())?;
            }
            let mut ran = false;
            let d = w.dispatch(&jp, || ran = true);
            let got: Vec<(String, AdviceKind)> = d.trace.iter().map(|f| (f.aspect_id.clone(), f.kind)).collect();
            if got != expected_advice_order(&order) || !ran {
                return Err(format!("order {order:?} fired {got:?}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

// ----- wire generators -----

pub fn ident() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,8}"
}

pub fn simple_type() -> impl Strategy<Value = SimpleType> {
    prop_oneof![
        Just(SimpleType::String),
        Just(SimpleType::Int),
        Just(SimpleType::Float),
        Just(SimpleType::Bool),
    ]
}

pub fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        any::<String>().prop_map(Value::Str),
        any::<i64>().prop_map(Value::Int),
        any::<f64>().prop_filter("finite", |x| x.is_finite()).prop_map(Value::Float),
        any::<bool>().prop_map(Value::Bool),
    ]
}

pub fn args() -> impl Strategy<Value = Vec<Arg>> {
    prop::collection::vec((ident(), value()).prop_map(|(n, v)| Arg { name: n, value: v }), 0..5)
}

pub fn message() -> impl Strategy<Value = Message> {
    let action = "[!-~]{1,24}";
    let ns = "[ -~]{0,16}";
    prop_oneof![
        (action, ident(), ident(), ns, args(), any::<bool>()).prop_map(|(a, mid, op, ns, args, ev)| {
            let m = Message::call(a, mid, op, ns, args);
            if ev {
                Message { kind: Kind::Event, ..m }
            } else {
                m
            }
        }),
        (action, ident(), ident(), ident(), ns, args()).prop_map(|(a, mid, cid, op, ns, args)| {
            let req = Message::call("x", cid, op, ns, vec![]);
            Message::response_to(&req, a, mid, args)
        }),
        (ident(), any::<String>(), any::<String>())
            .prop_map(|(cid, code, reason)| ctxbridge::envelope::make_fault(&cid, &code, &reason).unwrap()),
    ]
}

pub fn operation() -> impl Strategy<Value = OperationDecl> {
    (
        ident(),
        prop::collection::vec((ident(), simple_type()), 0..4),
        prop_oneof![simple_type(), Just(SimpleType::Unit)],
        any::<bool>(),
        ident(),
        ident(),
        "[!-~&&[^\"]]{1,16}",
        "[!-~&&[^\"]]{1,16}",
    )
        .prop_map(|(name, params, returns, short, im, om, ia, oa)| {
            let mut seen = std::collections::BTreeSet::new();
            let params = params
                .into_iter()
                .filter(|(n, _)| seen.insert(n.clone()))
                .map(|(n, t)| Param::new(n, t))
                .collect();
            let mut op = OperationDecl::shorthand(name, params, returns);
            if !short {
                op.input_message = im;
                op.output_message = om;
                op.input_action = ia;
                op.output_action = oa;
            }
            op
        })
}

pub fn contract() -> impl Strategy<Value = Contract> {
    (ident(), "[!-~]{1,20}", prop::collection::vec(operation(), 0..5)).prop_map(|(name, ns, ops)| {
        let mut seen = std::collections::BTreeSet::new();
        let ops = ops.into_iter().filter(|o| seen.insert(o.name.clone())).collect();
        Contract::new(name, ns, ops).unwrap()
    })
}

// ----- scenarios -----

/// A scenario of `n` alarms with power changes in between, drawn from a
/// ChaCha generator seeded with `seed`. Ends with a conservation check.
pub fn alarm_storm(seed: u64, n: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("scenario alarm-storm\nseed case-study\nat 0 aa apply alarm-display-chain\n");
    let mut tick = 1u64;
    let mut expected: BTreeMap<&str, usize> = BTreeMap::new();
    for i in 0..n {
        tick += rng.gen_range(0..3);
        if rng.gen_bool(0.3) {
            let dev = if rng.gen_bool(0.5) { "pda" } else { "tv" };
            let on = if rng.gen_bool(0.5) { "on" } else { "off" };
            out.push_str(&format!("at {tick} device {dev} power {on}\n"));
        }
        let sev = if rng.gen_bool(0.6) { "critical" } else { "normal" };
        *expected.entry(sev).or_default() += 1;
        if rng.gen_bool(0.4) {
            let due = tick + rng.gen_range(0..10);
            out.push_str(&format!("at {tick} alarm schedule tick={due} source=s{i} severity={sev} text=\"alarm {i}\"\n"));
        } else {
            out.push_str(&format!("at {tick} alarm inject source=s{i} severity={sev} text=\"alarm {i}\"\n"));
        }
    }
    let end = tick + 10;
    out.push_str(&format!("at {end} expect conservation\n"));
    out.push_str(&format!("at {end} expect count alarm_raised {n}\n"));
    out
}

// ----- platform laws -----

use ctxbridge::assembly::{self as asm, chain, Assembly, AssemblyAspect, Component, Link, RemoteCaller};
use ctxbridge::contract::{make_proxy, ProxyDescriptor};
use ctxbridge::gateway::{self, orb_code, Gateway, GatewayError};
use ctxbridge::orb::{Interceptor, ObjectRef, Orb, Servant};

/// Answers every call with `text of <arg>`.
pub struct Echo;

impl RemoteCaller for Echo {
    fn call(&mut self, _: &ProxyDescriptor, _: &str, args: Vec<Value>) -> Result<Option<Value>, String> {
        let a = args.first().map(Value::to_text).unwrap_or_default();
        Ok(Some(Value::Str(format!("text of {a}"))))
    }
}

fn text_of(a: &Assembly, id: &str) -> String {
    a.component(id)
        .and_then(|c| c.properties.get("text"))
        .map(Value::to_text)
        .unwrap_or_default()
}

fn chain_assembly() -> Assembly {
    let proxy = make_proxy(&gateway::enterprise_alarms_contract(), gateway::ALARM_IMPL_URL).unwrap();
    let mut a = Assembly::new("assembly1");
    for c in asm::alarm_components(proxy) {
        a.register(c).unwrap();
    }
    a.apply_aa(&asm::alarm_chain_aa()).unwrap();
    a
}

/// Pushes `n` messages through the toggler gate, flipping it at random,
/// and checks each lands on PDA when checked and on TV otherwise.
pub fn toggler_gate(seed: u64, n: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = chain_assembly();
    let mut checked = true;
    for i in 0..n {
        if rng.gen_bool(0.5) {
            a.call_input(chain::PDA_SWITCH, "press", Value::Str(String::new()), &mut Echo)
                .map_err(|e| e.to_string())?;
            checked = !checked;
        }
        let (pda0, tv0) = (text_of(&a, chain::PDA), text_of(&a, chain::TV));
        let msg = format!("m{i}");
        a.call_input(chain::BUTTON, "press", Value::Str(msg.clone()), &mut Echo)
            .map_err(|e| e.to_string())?;
        let want = format!("text of {msg}");
        let (pda, tv) = (text_of(&a, chain::PDA), text_of(&a, chain::TV));
        let ok = if checked { pda == want && tv == tv0 } else { tv == want && pda == pda0 };
        if !ok {
            return Err(format!("message {i} (checked={checked}): PDA={pda:?} TV={tv:?}"));
        }
    }
    Ok(n)
}

/// Applies and reverts a set of AAs on the alarm display assembly, alone and
/// stacked, checking the graph comes back equal each time.
pub fn aa_round_trip() -> Result<usize, String> {
    let proxy = make_proxy(&gateway::enterprise_alarms_contract(), gateway::ALARM_IMPL_URL).unwrap();
    let mut base = Assembly::new("assembly1");
    for c in asm::alarm_components(proxy) {
        base.register(c).unwrap();
    }
    let mut extra = AssemblyAspect::new("extra-screen");
    extra.add_components = vec![Component::textbox("Wall")];
    extra.add_links = vec![
        Link::new((chain::RADIO, "changed"), ("Wall", "setText")),
        Link::new((chain::BUTTON, "click"), ("Wall", "setText")),
    ];
    let mut strip = AssemblyAspect::new("strip-tv");
    strip.remove_links = vec![Link::new((chain::RADIO, "whenUnchecked"), (chain::TV, "setText"))];
    strip.remove_components = vec![chain::TOGGLER.to_string()];
    let chain = asm::alarm_chain_aa();

    let mut rounds = 0;
    for aa in [&chain, &extra] {
        let (graph, dump) = (base.graph(), base.dump());
        base.apply_aa(aa).map_err(|e| e.to_string())?;
        base.revert_aa(&aa.aa_id).map_err(|e| e.to_string())?;
        if base.graph() != graph || base.dump() != dump {
            return Err(format!("{} did not round-trip", aa.aa_id));
        }
        rounds += 1;
    }
    let start = base.graph();
    base.apply_aa(&chain).map_err(|e| e.to_string())?;
    let mid = base.graph();
    base.apply_aa(&strip).map_err(|e| e.to_string())?;
    base.apply_aa(&extra).map_err(|e| e.to_string())?;
    base.revert_aa(&extra.aa_id).map_err(|e| e.to_string())?;
    base.revert_aa(&strip.aa_id).map_err(|e| e.to_string())?;
    if base.graph() != mid {
        return Err("stacked revert did not restore the chained graph".into());
    }
    base.revert_aa(&chain.aa_id).map_err(|e| e.to_string())?;
    if base.graph() != start {
        return Err("stacked revert did not restore the base graph".into());
    }
    Ok(rounds + 1)
}

/// Adding interceptors then removing any one yields the same trace as
/// never adding it.
pub fn interceptor_invertibility(seed: u64, rounds: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = ObjectRef::new("orb1", "Enterprise");
    let trace = |o: &Orb| -> Result<Vec<String>, String> {
        o.invoke(&target, "AfficherNormal", &[]).map(|i| i.trace).map_err(|e| e.to_string())
    };
    for _ in 0..rounds {
        let n = rng.gen_range(1..6);
        let ids: Vec<String> = (0..n).map(|i| format!("i{i}")).collect();
        let build = |skip: Option<usize>| {
            let mut o = Orb::new("orb1");
            o.bind(Servant::enterprise()).unwrap();
            for (k, id) in ids.iter().enumerate() {
                if Some(k) != skip {
                    o.add_interceptor(Interceptor { interceptor_id: id.clone(), action_id: "trace".into() }).unwrap();
                }
            }
            o
        };
        let mut full = build(None);
        let plain = {
            let mut o = Orb::new("orb1");
            o.bind(Servant::enterprise()).unwrap();
            trace(&o)?
        };
        if trace(&full)? != ids {
            return Err(format!("trace {:?} for {ids:?}", trace(&full)?));
        }
        let k = rng.gen_range(0..n);
        full.remove_interceptor(&ids[k]).map_err(|e| e.to_string())?;
        if trace(&full)? != trace(&build(Some(k)))? {
            return Err(format!("removing {} left {:?}", ids[k], trace(&full)?));
        }
        for id in ids.iter().filter(|i| **i != ids[k]) {
            full.remove_interceptor(id).map_err(|e| e.to_string())?;
        }
        if trace(&full)? != plain || !full.interceptors().is_empty() {
            return Err("removing all interceptors did not restore the plain trace".into());
        }
    }
    Ok(rounds)
}

fn sample(ty: SimpleType) -> Value {
    match ty {
        SimpleType::String => Value::Str("a1".into()),
        SimpleType::Int => Value::Int(1),
        SimpleType::Float => Value::Float(1.5),
        SimpleType::Bool => Value::Bool(true),
        SimpleType::Unit => unreachable!("unit params do not exist"),
    }
}

/// Calls every operation of every exported endpoint both through the
/// bridge and directly on the broker and compares the outcomes.
pub fn transparency(g: &mut Gateway) -> Result<usize, String> {
    let endpoints: Vec<_> = g.endpoints().cloned().collect();
    let mut calls = 0;
    for ep in endpoints {
        let proxy = make_proxy(&ep.stub.contract, &ep.url).map_err(|e| e.to_string())?;
        for op in &ep.stub.contract.operations {
            let args: Vec<Value> = op.params.iter().map(|p| sample(p.ty)).collect();
            let target = ObjectRef::new(&ep.stub.platform_id, &ep.stub.target_path);
            let direct = g.orb().invoke(&target, &op.name, &args).map(|i| i.value);
            let remote = g.call_remote(&proxy, &op.name, args);
            let same = match (&direct, &remote) {
                (Ok(d), Ok(r)) => d == r,
                (Err(d), Err(GatewayError::RemoteFault { code, .. })) => code == orb_code(d),
                _ => false,
            };
            if !same {
                return Err(format!("{} {}: direct {direct:?}, remote {remote:?}", ep.url, op.name));
            }
            calls += 1;
        }
    }
    Ok(calls)
}

// ----- routing -----

use ctxbridge::events::Event;
use ctxbridge::gateway::{route_for, Device, DeviceStates, Route};
use ctxbridge::harness::{parse_scenario, run, Command, Engine};
use ctxbridge::orb::Severity;

pub fn truth_table(critical: bool, pda_on: bool, tv_on: bool) -> Route {
    match (critical, pda_on, tv_on) {
        (false, _, _) => Route::DbOnly,
        (true, true, _) => Route::Pda,
        (true, false, true) => Route::Tv,
        (true, false, false) => Route::Queued,
    }
}

/// Injects one alarm under each severity and power combination, with the
/// alarm display chain applied, and checks route and delivery.
pub fn eight_cases() -> Result<usize, String> {
    let mut n = 0;
    for critical in [false, true] {
        for pda_on in [false, true] {
            for tv_on in [false, true] {
                let case = format!("critical={critical} pda={pda_on} tv={tv_on}");
                let want = truth_table(critical, pda_on, tv_on);
                let got = route_for(critical, DeviceStates { pda_on, tv_on });
                if got != want {
                    return Err(format!("{case}: route_for gave {got}"));
                }
                let mut e = Engine::case_study();
                let setup = [
                    Command::AaApply { aa_id: "alarm-display-chain".into() },
                    Command::Power { device: Device::Pda, on: pda_on },
                    Command::Power { device: Device::Tv, on: tv_on },
                ];
                for c in &setup {
                    e.execute(0, c).map_err(|err| format!("{case}: {c}: {err}"))?;
                }
                let severity = if critical { Severity::Critical } else { Severity::Normal };
                let out = e
                    .execute(1, &Command::AlarmInject { source: "s".into(), severity, text: "t".into() })
                    .map_err(|err| format!("{case}: {err}"))?;
                if out["decision"]["route"] != want.to_string() {
                    return Err(format!("{case}: engine routed {}", out["decision"]["route"]));
                }
                let delivered: Vec<String> = e
                    .log()
                    .events()
                    .filter_map(|ev| match ev {
                        Event::AlarmDelivered { device, .. } => Some(device.clone()),
                        _ => None,
                    })
                    .collect();
                let expect: &[&str] = match want {
                    Route::Pda => &["pda"],
                    Route::Tv => &["tv"],
                    _ => &[],
                };
                if delivered != expect {
                    return Err(format!("{case}: delivered to {delivered:?}"));
                }
                if want == Route::Tv && !out["decision"]["path"].as_array().is_some_and(|p| p.iter().any(|h| h == "assembly1")) {
                    return Err(format!("{case}: TV path skips the assembly: {}", out["decision"]["path"]));
                }
                n += 1;
            }
        }
    }
    Ok(n)
}

/// Queues two critical alarms with both devices off, then powers the TV
/// on. Returns the routes logged at the flush tick.
pub fn queue_flush() -> Result<Vec<String>, String> {
    let sc = parse_scenario(
        "at 0 device pda power off\n\
         at 0 device tv power off\n\
         at 1 alarm inject source=a severity=critical text=one\n\
         at 2 alarm inject source=b severity=critical text=two\n\
         at 3 alarm inject source=c severity=normal text=three\n\
         at 3 expect queue 2\n\
         at 4 device tv power on\n\
         at 4 expect queue 0\n\
         at 4 expect conservation\n",
    )
    .map_err(|e| e.to_string())?;
    let r = run(&sc).map_err(|e| e.to_string())?;
    if let Some(f) = r.failures.first() {
        return Err(f.to_string());
    }
    Ok(r.log()
        .records()
        .iter()
        .filter(|rec| rec.tick == 4)
        .filter_map(|rec| match &rec.event {
            Event::AlarmRouted { decision } => Some(format!("{}:{}", decision.alarm_id, decision.route)),
            _ => None,
        })
        .collect())
}
