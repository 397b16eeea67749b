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


//! Scenario language. One command per line:
//!
//! ```text
//! seed case-study
//! at 2 user 1234 request category=Assurance max_km=1.0
//! at 4 alarm inject source=pump-7 severity=critical text="pressure high"
//! at 4 expect route last PDA
//! ```
//!
//! `#` starts a comment outside quotes. Quoted strings accept `\"`, `\\`,
//! `\n` and `\t`.

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::adaptation::parse_bool;
use crate::gateway::{Device, Route};
use crate::orb::Severity;
use crate::registry::{Handicap, Profile, Sex};
use crate::value::{is_identifier, quote};
use crate::weaver::{Action, Advice, AdviceKind, AspectDoc};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("scenario line {line}: {detail}")]
pub struct ScenarioSyntaxError {
    pub line: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    ProfileUpsert(Profile),
    Identify { user_id: String, longitude: f64, latitude: f64 },
    Request { user_id: String, category: Option<String>, max_km: Option<f64> },
    Move { user_id: String, longitude: f64, latitude: f64 },
    Select { user_id: String, id_service: String },
    Power { device: Device, on: bool },
    AlarmInject { source: String, severity: Severity, text: String },
    AlarmSchedule { tick: u64, source: String, severity: Severity, text: String },
    AspectAction { action_id: String, action: Action },
    AspectWeave(AspectDoc),
    AspectUnweave { aspect_id: String },
    AaApply { aa_id: String },
    AaRevert { aa_id: String },
    HmiOverride { field: String, value: String },
    HmiClear { field: String },
    Availability { id_service: String, available: bool },
    EndpointExport { contract: String, target: String, url: String },
    EndpointUnexport { url: String },
}

impl Command {
    /// Every `subject verb` pair the language accepts.
    pub const VERBS: &'static [&'static str] = &[
        "profile upsert",
        "user identify",
        "user request",
        "user move",
        "user select",
        "device power",
        "alarm inject",
        "alarm schedule",
        "aspect action",
        "aspect weave",
        "aspect unweave",
        "aa apply",
        "aa revert",
        "hmi override",
        "hmi clear",
        "service available",
        "endpoint export",
        "endpoint unexport",
    ];

    pub fn verb(&self) -> &'static str {
        match self {
            Command::ProfileUpsert(_) => "profile upsert",
            Command::Identify { .. } => "user identify",
            Command::Request { .. } => "user request",
            Command::Move { .. } => "user move",
            Command::Select { .. } => "user select",
            Command::Power { .. } => "device power",
            Command::AlarmInject { .. } => "alarm inject",
            Command::AlarmSchedule { .. } => "alarm schedule",
            Command::AspectAction { .. } => "aspect action",
            Command::AspectWeave(_) => "aspect weave",
            Command::AspectUnweave { .. } => "aspect unweave",
            Command::AaApply { .. } => "aa apply",
            Command::AaRevert { .. } => "aa revert",
            Command::HmiOverride { .. } => "hmi override",
            Command::HmiClear { .. } => "hmi clear",
            Command::Availability { .. } => "service available",
            Command::EndpointExport { .. } => "endpoint export",
            Command::EndpointUnexport { .. } => "endpoint unexport",
        }
    }
}

/// Which alarm an expectation talks about.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlarmRef {
    Last,
    Id(String),
}

impl fmt::Display for AlarmRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlarmRef::Last => f.write_str("last"),
            AlarmRef::Id(id) => f.write_str(id),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expectation {
    Route { alarm: AlarmRef, route: Route },
    Delivered { alarm: AlarmRef, device: Device },
    Greeting(String),
    Title(String),
    Theme(String),
    Vocal(bool),
    DisplayMode(String),
    Widget { index: usize, text: String },
    /// Service names of the latest result, in order.
    Services(Vec<String>),
    /// Category set of the latest result.
    Categories(Vec<String>),
    /// Event kinds produced by the latest command, ignoring advice.
    Steps(Vec<String>),
    /// An advice log line precedes the first event of `kind` produced by
    /// the latest command.
    Before { text: String, kind: String },
    AdviceLog(String),
    Pushed(bool),
    Queue(usize),
    Device { device: Device, on: bool },
    Textbox { component: String, text: String },
    /// Error code of the latest command, `None` for success.
    Error(Option<String>),
    Count { kind: String, n: usize },
    Conservation,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Seed {
    Empty,
    CaseStudy,
    Dir(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepKind {
    Command(Command),
    Expect(Expectation),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub tick: u64,
    pub line: usize,
    pub kind: StepKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub seed: Seed,
    pub steps: Vec<Step>,
}

impl Scenario {
    pub fn commands(&self) -> impl Iterator<Item = (&Step, &Command)> {
        self.steps.iter().filter_map(|s| match &s.kind {
            StepKind::Command(c) => Some((s, c)),
            StepKind::Expect(_) => None,
        })
    }

    pub fn expectations(&self) -> impl Iterator<Item = (&Step, &Expectation)> {
        self.steps.iter().filter_map(|s| match &s.kind {
            StepKind::Expect(e) => Some((s, e)),
            StepKind::Command(_) => None,
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(n) = &self.name {
            out.push_str(&format!("scenario {}\n", word(n)));
        }
        match &self.seed {
            Seed::Empty => out.push_str("seed empty\n"),
            Seed::CaseStudy => out.push_str("seed case-study\n"),
            Seed::Dir(p) => out.push_str(&format!("seed {}\n", word(&p.to_string_lossy()))),
        }
        for s in &self.steps {
            let body = match &s.kind {
                StepKind::Command(c) => c.to_string(),
                StepKind::Expect(e) => format!("expect {e}"),
            };
            out.push_str(&format!("at {} {body}\n", s.tick));
        }
        out
    }
}

// ----- tokens -----

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Pair(String, String),
}

fn read_quoted(chars: &[char], i: &mut usize) -> Result<String, String> {
    debug_assert_eq!(chars[*i], '"');
    *i += 1;
    let mut s = String::new();
    while *i < chars.len() {
        let c = chars[*i];
        *i += 1;
        match c {
            '"' => return Ok(s),
            '\\' => {
                let e = *chars.get(*i).ok_or("dangling escape")?;
                *i += 1;
                s.push(match e {
                    '"' => '"',
                    '\\' => '\\',
                    'n' => '\n',
                    't' => '\t',
                    other => return Err(format!("unknown escape `\\{other}`")),
                });
            }
            c => s.push(c),
        }
    }
    Err("unterminated string".into())
}

fn tokenize(line: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        if c == '"' {
            out.push(Tok::Quoted(read_quoted(&chars, &mut i)?));
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '=' && chars[i] != '"' {
            i += 1;
        }
        let head: String = chars[start..i].iter().collect();
        if i < chars.len() && chars[i] == '=' && is_identifier(&head) {
            i += 1;
            let value = if i < chars.len() && chars[i] == '"' {
                read_quoted(&chars, &mut i)?
            } else {
                let vs = i;
                while i < chars.len() && !chars[i].is_whitespace() {
                    if chars[i] == '"' {
                        return Err(format!("stray quote in value of `{head}`"));
                    }
                    i += 1;
                }
                chars[vs..i].iter().collect()
            };
            out.push(Tok::Pair(head, value));
            continue;
        }
        while i < chars.len() && !chars[i].is_whitespace() {
            if chars[i] == '"' {
                return Err("stray quote".into());
            }
            i += 1;
        }
        out.push(Tok::Word(chars[start..i].iter().collect()));
    }
    Ok(out)
}

/// A bare word if it survives tokenizing unchanged, else a quoted string.
fn word(s: &str) -> String {
    let bare = !s.is_empty()
        && !s.contains(|c: char| c.is_whitespace() || matches!(c, '"' | '#' | '=' | '\\'));
    if bare {
        s.to_string()
    } else {
        quote(s)
    }
}

fn value(s: &str) -> String {
    let bare = !s.is_empty() && !s.contains(|c: char| c.is_whitespace() || matches!(c, '"' | '#' | '\\'));
    if bare {
        s.to_string()
    } else {
        quote(s)
    }
}

struct Args {
    positional: Vec<String>,
    pairs: Vec<(String, String)>,
    pos_idx: usize,
    used: Vec<bool>,
}

type R<T> = Result<T, String>;

impl Args {
    fn new(toks: Vec<Tok>) -> Self {
        let mut positional = Vec::new();
        let mut pairs = Vec::new();
        for t in toks {
            match t {
                Tok::Word(w) | Tok::Quoted(w) => positional.push(w),
                Tok::Pair(k, v) => pairs.push((k, v)),
            }
        }
        let used = vec![false; pairs.len()];
        Args {
            positional,
            pairs,
            pos_idx: 0,
            used,
        }
    }

    fn pos(&mut self, what: &str) -> R<String> {
        let v = self
            .positional
            .get(self.pos_idx)
            .cloned()
            .ok_or_else(|| format!("missing {what}"))?;
        self.pos_idx += 1;
        Ok(v)
    }

    fn opt(&mut self, key: &str) -> R<Option<String>> {
        let mut found = None;
        for (i, (k, v)) in self.pairs.iter().enumerate() {
            if k == key {
                if found.is_some() {
                    return Err(format!("`{key}` given twice"));
                }
                self.used[i] = true;
                found = Some(v.clone());
            }
        }
        Ok(found)
    }

    fn req(&mut self, key: &str) -> R<String> {
        self.opt(key)?.ok_or_else(|| format!("missing `{key}=`"))
    }

    /// Pairs whose key is one of `keys`, in line order.
    fn ordered(&mut self, keys: &[&str]) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (i, (k, v)) in self.pairs.iter().enumerate() {
            if keys.contains(&k.as_str()) {
                self.used[i] = true;
                out.push((k.clone(), v.clone()));
            }
        }
        out
    }

    fn finish(self) -> R<()> {
        if let Some(extra) = self.positional.get(self.pos_idx) {
            return Err(format!("unexpected `{extra}`"));
        }
        if let Some((i, _)) = self.used.iter().enumerate().find(|(_, u)| !**u) {
            return Err(format!("unknown argument `{}=`", self.pairs[i].0));
        }
        Ok(())
    }
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> R<T> {
    s.parse().map_err(|_| format!("bad {what} `{s}`"))
}

fn float(s: &str, what: &str) -> R<f64> {
    let v: f64 = num(s, what)?;
    if !v.is_finite() {
        return Err(format!("bad {what} `{s}`"));
    }
    Ok(v)
}

fn boolean(s: &str) -> R<bool> {
    parse_bool(s).ok_or_else(|| format!("expected true/false or on/off, got `{s}`"))
}

fn severity(s: &str) -> R<Severity> {
    Severity::parse(s).ok_or_else(|| format!("bad severity `{s}`"))
}

fn device(s: &str) -> R<Device> {
    Device::parse(s).ok_or_else(|| format!("bad device `{s}`"))
}

fn list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(str::to_string).collect()
}

fn ident(s: String, what: &str) -> R<String> {
    if is_identifier(&s) || (!s.is_empty() && !s.contains(char::is_whitespace)) {
        Ok(s)
    } else {
        Err(format!("bad {what} `{s}`"))
    }
}

fn parse_command(subject: &str, a: &mut Args) -> R<Command> {
    let verb_err = |v: &str| Err(format!("unknown {subject} verb `{v}`"));
    Ok(match subject {
        "profile" => match a.pos("verb")?.as_str() {
            "upsert" => {
                let sex = a.req("sex")?;
                let handicap = a.opt("handicap")?.unwrap_or_else(|| "none".into());
                Command::ProfileUpsert(Profile {
                    id_profile: a.req("id")?,
                    name: a.req("name")?,
                    sex: Sex::parse(&sex).ok_or_else(|| format!("bad sex `{sex}`"))?,
                    job: a.opt("job")?.unwrap_or_default(),
                    age: num(&a.req("age")?, "age")?,
                    handicap: Handicap::parse(&handicap).ok_or_else(|| format!("bad handicap `{handicap}`"))?,
                    subscriptions: list(&a.opt("subscriptions")?.unwrap_or_default()),
                })
            }
            v => return verb_err(v),
        },
        "user" => {
            let user_id = ident(a.pos("user id")?, "user id")?;
            match a.pos("verb")?.as_str() {
                "identify" => Command::Identify {
                    user_id,
                    longitude: float(&a.req("lon")?, "longitude")?,
                    latitude: float(&a.req("lat")?, "latitude")?,
                },
                "move" => Command::Move {
                    user_id,
                    longitude: float(&a.req("lon")?, "longitude")?,
                    latitude: float(&a.req("lat")?, "latitude")?,
                },
                "request" => Command::Request {
                    user_id,
                    category: a.opt("category")?,
                    max_km: a.opt("max_km")?.map(|s| float(&s, "max_km")).transpose()?,
                },
                "select" => Command::Select {
                    user_id,
                    id_service: a.req("service")?,
                },
                v => return verb_err(v),
            }
        }
        "device" => {
            let d = device(&a.pos("device")?)?;
            match a.pos("verb")?.as_str() {
                "power" => Command::Power {
                    device: d,
                    on: boolean(&a.pos("on|off")?)?,
                },
                v => return verb_err(v),
            }
        }
        "alarm" => match a.pos("verb")?.as_str() {
            "inject" => Command::AlarmInject {
                source: a.req("source")?,
                severity: severity(&a.req("severity")?)?,
                text: a.opt("text")?.unwrap_or_default(),
            },
            "schedule" => Command::AlarmSchedule {
                tick: num(&a.req("tick")?, "tick")?,
                source: a.req("source")?,
                severity: severity(&a.req("severity")?)?,
                text: a.opt("text")?.unwrap_or_default(),
            },
            v => return verb_err(v),
        },
        "aspect" => match a.pos("verb")?.as_str() {
            "action" => {
                let action_id = ident(a.pos("action id")?, "action id")?;
                let kind = a.pos("action kind")?;
                let action = match kind.as_str() {
                    "log" => Action::Log(a.pos("log text")?),
                    "veto" => Action::Veto(a.pos("veto reason")?),
                    "proceed" => Action::Proceed,
                    "set" => Action::SetPresentation {
                        field: a.req("field")?,
                        value: a.req("value")?,
                    },
                    k => return Err(format!("unknown action kind `{k}`")),
                };
                Command::AspectAction { action_id, action }
            }
            "weave" => {
                if let Some(doc) = a.opt("doc")? {
                    let d: AspectDoc = serde_json::from_str(&doc).map_err(|e| format!("bad aspect doc: {e}"))?;
                    Command::AspectWeave(d)
                } else {
                    let aspect_id = ident(a.pos("aspect id")?, "aspect id")?;
                    let pointcut = a.req("pointcut")?;
                    let advices = a
                        .ordered(&["before", "after", "around"])
                        .into_iter()
                        .map(|(k, v)| Advice {
                            kind: match k.as_str() {
                                "before" => AdviceKind::Before,
                                "after" => AdviceKind::After,
                                _ => AdviceKind::Around,
                            },
                            action_id: v,
                        })
                        .collect();
                    Command::AspectWeave(AspectDoc {
                        aspect_id,
                        pointcut,
                        advices,
                        actions: Default::default(),
                    })
                }
            }
            "unweave" => Command::AspectUnweave {
                aspect_id: a.pos("aspect id")?,
            },
            v => return verb_err(v),
        },
        "aa" => match a.pos("verb")?.as_str() {
            "apply" => Command::AaApply { aa_id: a.pos("aa id")? },
            "revert" => Command::AaRevert { aa_id: a.pos("aa id")? },
            v => return verb_err(v),
        },
        "hmi" => match a.pos("verb")?.as_str() {
            "override" => Command::HmiOverride {
                field: a.req("field")?,
                value: a.req("value")?,
            },
            "clear" => Command::HmiClear { field: a.req("field")? },
            v => return verb_err(v),
        },
        "service" => {
            let id_service = a.pos("service id")?;
            match a.pos("verb")?.as_str() {
                "available" => Command::Availability {
                    id_service,
                    available: boolean(&a.pos("true|false")?)?,
                },
                v => return verb_err(v),
            }
        }
        "endpoint" => match a.pos("verb")?.as_str() {
            "export" => Command::EndpointExport {
                contract: a.req("contract")?,
                target: a.req("target")?,
                url: a.req("url")?,
            },
            "unexport" => Command::EndpointUnexport { url: a.req("url")? },
            v => return verb_err(v),
        },
        s => return Err(format!("unknown subject `{s}`")),
    })
}

fn alarm_ref(s: String) -> AlarmRef {
    if s == "last" {
        AlarmRef::Last
    } else {
        AlarmRef::Id(s)
    }
}

fn parse_expectation(a: &mut Args) -> R<Expectation> {
    let what = a.pos("expectation")?;
    Ok(match what.as_str() {
        "route" => {
            let alarm = alarm_ref(a.pos("alarm")?);
            let r = a.pos("route")?;
            Expectation::Route {
                alarm,
                route: Route::parse(&r).ok_or_else(|| format!("bad route `{r}`"))?,
            }
        }
        "delivered" => Expectation::Delivered {
            alarm: alarm_ref(a.pos("alarm")?),
            device: device(&a.pos("device")?)?,
        },
        "greeting" => Expectation::Greeting(a.pos("greeting")?),
        "title" => Expectation::Title(a.pos("title")?),
        "theme" => Expectation::Theme(a.pos("theme")?),
        "vocal" => Expectation::Vocal(boolean(&a.pos("vocal")?)?),
        "display_mode" => Expectation::DisplayMode(a.pos("display mode")?),
        "widget" => Expectation::Widget {
            index: num(&a.pos("index")?, "index")?,
            text: a.pos("text")?,
        },
        "services" => Expectation::Services(list(&a.pos("service names")?)),
        "categories" => Expectation::Categories(list(&a.pos("categories")?)),
        "steps" => Expectation::Steps(list(&a.pos("steps")?)),
        "before" => Expectation::Before {
            text: a.pos("text")?,
            kind: a.pos("event kind")?,
        },
        "advice_log" => Expectation::AdviceLog(a.pos("text")?),
        "pushed" => Expectation::Pushed(boolean(&a.pos("pushed")?)?),
        "queue" => Expectation::Queue(num(&a.pos("depth")?, "depth")?),
        "device" => Expectation::Device {
            device: device(&a.pos("device")?)?,
            on: boolean(&a.pos("on|off")?)?,
        },
        "textbox" => Expectation::Textbox {
            component: a.pos("component")?,
            text: a.pos("text")?,
        },
        "error" => {
            let c = a.pos("error code")?;
            Expectation::Error((c != "none").then_some(c))
        }
        "count" => Expectation::Count {
            kind: a.pos("event kind")?,
            n: num(&a.pos("count")?, "count")?,
        },
        "conservation" => Expectation::Conservation,
        w => return Err(format!("unknown expectation `{w}`")),
    })
}

/// Parses one command line without the `at <tick>` prefix.
pub fn parse_command_line(line: &str) -> Result<Command, String> {
    let mut a = Args::new(tokenize(line)?);
    let subject = a.pos("subject")?;
    if subject == "expect" {
        return Err("expectations are not commands".into());
    }
    let c = parse_command(&subject, &mut a)?;
    a.finish()?;
    Ok(c)
}

pub fn parse_expectation_line(line: &str) -> Result<Expectation, String> {
    let mut a = Args::new(tokenize(line)?);
    let e = parse_expectation(&mut a)?;
    a.finish()?;
    Ok(e)
}

pub fn parse_scenario(src: &str) -> Result<Scenario, ScenarioSyntaxError> {
    let mut sc = Scenario {
        name: None,
        seed: Seed::CaseStudy,
        steps: Vec::new(),
    };
    let mut last_tick = 0u64;
    let mut seen_step = false;
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let err = |detail: String| ScenarioSyntaxError { line, detail };
        let mut a = Args::new(tokenize(raw).map_err(err)?);
        if a.positional.is_empty() && a.pairs.is_empty() {
            continue;
        }
        let head = a.pos("directive").map_err(err)?;
        match head.as_str() {
            "scenario" => {
                sc.name = Some(a.pos("name").map_err(err)?);
            }
            "seed" => {
                if seen_step {
                    return Err(err("`seed` must precede the timeline".into()));
                }
                let s = a.pos("seed").map_err(err)?;
                sc.seed = match s.as_str() {
                    "empty" => Seed::Empty,
                    "case-study" => Seed::CaseStudy,
                    p => Seed::Dir(PathBuf::from(p)),
                };
            }
            "at" => {
                let tick: u64 = num(&a.pos("tick").map_err(err)?, "tick").map_err(err)?;
                if tick < last_tick {
                    return Err(err(format!("tick {tick} after tick {last_tick}")));
                }
                last_tick = tick;
                seen_step = true;
                let subject = a.pos("subject").map_err(err)?;
                let kind = if subject == "expect" {
                    StepKind::Expect(parse_expectation(&mut a).map_err(err)?)
                } else {
                    let c = parse_command(&subject, &mut a).map_err(err)?;
                    if let Command::AlarmSchedule { tick: due, .. } = &c {
                        if *due < tick {
                            return Err(err(format!("alarm scheduled for past tick {due}")));
                        }
                    }
                    StepKind::Command(c)
                };
                a.finish().map_err(err)?;
                sc.steps.push(Step { tick, line, kind });
                continue;
            }
            d => return Err(err(format!("unknown directive `{d}`"))),
        }
        a.finish().map_err(err)?;
    }
    Ok(sc)
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {detail}")]
    Io { path: String, detail: String },
    #[error(transparent)]
    Syntax(#[from] ScenarioSyntaxError),
}

/// Reads a scenario file. A relative seed directory resolves against the
/// file's own directory.
pub fn load_scenario(path: &Path) -> Result<Scenario, LoadError> {
    let src = std::fs::read_to_string(path).map_err(|e| LoadError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let mut sc = parse_scenario(&src)?;
    if let Seed::Dir(d) = &sc.seed {
        if d.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            sc.seed = Seed::Dir(base.join(d));
        }
    }
    Ok(sc)
}

fn kv(out: &mut String, k: &str, v: &str) {
    out.push_str(&format!(" {k}={}", value(v)));
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        match self {
            Command::ProfileUpsert(p) => {
                s.push_str("profile upsert");
                kv(&mut s, "id", &p.id_profile);
                kv(&mut s, "name", &p.name);
                kv(&mut s, "sex", p.sex.as_str());
                kv(&mut s, "job", &p.job);
                kv(&mut s, "age", &p.age.to_string());
                kv(&mut s, "handicap", p.handicap.as_str());
                kv(&mut s, "subscriptions", &p.subscriptions.join(","));
            }
            Command::Identify { user_id, longitude, latitude } => {
                s.push_str(&format!("user {} identify lon={longitude} lat={latitude}", word(user_id)));
            }
            Command::Move { user_id, longitude, latitude } => {
                s.push_str(&format!("user {} move lon={longitude} lat={latitude}", word(user_id)));
            }
            Command::Request { user_id, category, max_km } => {
                s.push_str(&format!("user {} request", word(user_id)));
                if let Some(c) = category {
                    kv(&mut s, "category", c);
                }
                if let Some(m) = max_km {
                    s.push_str(&format!(" max_km={m}"));
                }
            }
            Command::Select { user_id, id_service } => {
                s.push_str(&format!("user {} select", word(user_id)));
                kv(&mut s, "service", id_service);
            }
            Command::Power { device, on } => {
                s.push_str(&format!("device {device} power {}", if *on { "on" } else { "off" }));
            }
            Command::AlarmInject { source, severity, text } => {
                s.push_str("alarm inject");
                kv(&mut s, "source", source);
                kv(&mut s, "severity", severity.as_str());
                kv(&mut s, "text", text);
            }
            Command::AlarmSchedule { tick, source, severity, text } => {
                s.push_str(&format!("alarm schedule tick={tick}"));
                kv(&mut s, "source", source);
                kv(&mut s, "severity", severity.as_str());
                kv(&mut s, "text", text);
            }
            Command::AspectAction { action_id, action } => {
                s.push_str(&format!("aspect action {} ", word(action_id)));
                match action {
                    Action::Log(t) => s.push_str(&format!("log {}", quote(t))),
                    Action::Veto(r) => s.push_str(&format!("veto {}", quote(r))),
                    Action::Proceed => s.push_str("proceed"),
                    Action::SetPresentation { field, value: v } => {
                        s.push_str("set");
                        kv(&mut s, "field", field);
                        kv(&mut s, "value", v);
                    }
                }
            }
            Command::AspectWeave(doc) => {
                if doc.actions.is_empty() && is_identifier(&doc.aspect_id) {
                    s.push_str(&format!("aspect weave {}", doc.aspect_id));
                    kv(&mut s, "pointcut", &doc.pointcut);
                    for adv in &doc.advices {
                        kv(&mut s, &adv.kind.to_string(), &adv.action_id);
                    }
                } else {
                    let json = serde_json::to_string(doc).expect("aspect doc serializes");
                    s.push_str(&format!("aspect weave doc={}", quote(&json)));
                }
            }
            Command::AspectUnweave { aspect_id } => s.push_str(&format!("aspect unweave {}", word(aspect_id))),
            Command::AaApply { aa_id } => s.push_str(&format!("aa apply {}", word(aa_id))),
            Command::AaRevert { aa_id } => s.push_str(&format!("aa revert {}", word(aa_id))),
            Command::HmiOverride { field, value: v } => {
                s.push_str("hmi override");
                kv(&mut s, "field", field);
                kv(&mut s, "value", v);
            }
            Command::HmiClear { field } => {
                s.push_str("hmi clear");
                kv(&mut s, "field", field);
            }
            Command::Availability { id_service, available } => {
                s.push_str(&format!("service {} available {available}", word(id_service)));
            }
            Command::EndpointExport { contract, target, url } => {
                s.push_str("endpoint export");
                kv(&mut s, "contract", contract);
                kv(&mut s, "target", target);
                kv(&mut s, "url", url);
            }
            Command::EndpointUnexport { url } => {
                s.push_str("endpoint unexport");
                kv(&mut s, "url", url);
            }
        }
        f.write_str(&s)
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Route { alarm, route } => write!(f, "route {} {route}", word(&alarm.to_string())),
            Expectation::Delivered { alarm, device } => write!(f, "delivered {} {device}", word(&alarm.to_string())),
            Expectation::Greeting(t) => write!(f, "greeting {}", quote(t)),
            Expectation::Title(t) => write!(f, "title {}", quote(t)),
            Expectation::Theme(t) => write!(f, "theme {}", word(t)),
            Expectation::Vocal(b) => write!(f, "vocal {b}"),
            Expectation::DisplayMode(m) => write!(f, "display_mode {}", word(m)),
            Expectation::Widget { index, text } => write!(f, "widget {index} {}", quote(text)),
            Expectation::Services(v) => write!(f, "services {}", quote(&v.join(","))),
            Expectation::Categories(v) => write!(f, "categories {}", quote(&v.join(","))),
            Expectation::Steps(v) => write!(f, "steps {}", quote(&v.join(","))),
            Expectation::Before { text, kind } => write!(f, "before {} {}", quote(text), word(kind)),
            Expectation::AdviceLog(t) => write!(f, "advice_log {}", quote(t)),
            Expectation::Pushed(b) => write!(f, "pushed {b}"),
            Expectation::Queue(n) => write!(f, "queue {n}"),
            Expectation::Device { device, on } => write!(f, "device {device} {}", if *on { "on" } else { "off" }),
            Expectation::Textbox { component, text } => write!(f, "textbox {} {}", word(component), quote(text)),
            Expectation::Error(None) => f.write_str("error none"),
            Expectation::Error(Some(c)) => write!(f, "error {}", word(c)),
            Expectation::Count { kind, n } => write!(f, "count {} {n}", word(kind)),
            Expectation::Conservation => f.write_str("conservation"),
        }
    }
}
