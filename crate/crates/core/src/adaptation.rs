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


//! HMI plasticity: a presentation descriptor computed from the profile and
//! context by automatic rules, then overridden by explicit user choices.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::registry::{Handicap, Profile, RankedService, Sex};

pub const SERVICE_PROMPT: &str = "Do you want a service?";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdaptError {
    #[error("`{0}` is not an overridable field")]
    UnknownField(String),
    #[error("invalid value `{value}` for {field}")]
    InvalidValue { field: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ThemeColor {
    Pink,
    Blue,
    Neutral,
    /// A user-chosen colour: a lowercase name or `#rrggbb`.
    Custom(String),
}

impl ThemeColor {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "pink" => ThemeColor::Pink,
            "blue" => ThemeColor::Blue,
            "neutral" => ThemeColor::Neutral,
            _ => {
                let hex = s.len() == 7
                    && s.starts_with('#')
                    && s[1..].chars().all(|c| c.is_ascii_hexdigit());
                let name = !s.is_empty() && s.chars().all(|c| c.is_ascii_lowercase());
                if !(hex || name) {
                    return None;
                }
                ThemeColor::Custom(s.to_string())
            }
        })
    }
}

impl fmt::Display for ThemeColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThemeColor::Pink => "pink",
            ThemeColor::Blue => "blue",
            ThemeColor::Neutral => "neutral",
            ThemeColor::Custom(s) => s,
        })
    }
}

impl From<ThemeColor> for String {
    fn from(t: ThemeColor) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for ThemeColor {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        ThemeColor::parse(&s).ok_or_else(|| format!("invalid theme colour `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisplayMode {
    Visual,
    Vocal,
    Both,
}

impl DisplayMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DisplayMode::Visual => "visual",
            DisplayMode::Vocal => "vocal",
            DisplayMode::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "visual" => DisplayMode::Visual,
            "vocal" => DisplayMode::Vocal,
            "both" => DisplayMode::Both,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Widget {
    Text { text: String },
    Button { label: String },
    #[serde(rename = "list")]
    ListItem { text: String },
    Prompt { text: String },
}

impl Widget {
    pub fn text(&self) -> &str {
        match self {
            Widget::Text { text } | Widget::ListItem { text } | Widget::Prompt { text } => text,
            Widget::Button { label } => label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationDescriptor {
    pub theme_color: ThemeColor,
    pub vocal: bool,
    pub display_mode: DisplayMode,
    pub title: String,
    pub greeting: String,
    pub widgets: Vec<Widget>,
}

/// Descriptor fields that rules and overrides may assign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    ThemeColor,
    Vocal,
    DisplayMode,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::ThemeColor, Field::Vocal, Field::DisplayMode];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::ThemeColor => "theme_color",
            Field::Vocal => "vocal",
            Field::DisplayMode => "display_mode",
        }
    }

    pub fn parse(s: &str) -> Result<Self, AdaptError> {
        match s {
            "theme_color" | "theme" => Ok(Field::ThemeColor),
            "vocal" => Ok(Field::Vocal),
            "display_mode" => Ok(Field::DisplayMode),
            _ => Err(AdaptError::UnknownField(s.to_string())),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl PresentationDescriptor {
    pub fn neutral() -> Self {
        PresentationDescriptor {
            theme_color: ThemeColor::Neutral,
            vocal: false,
            display_mode: DisplayMode::Visual,
            title: String::new(),
            greeting: String::new(),
            widgets: Vec::new(),
        }
    }

    /// Assigns one field, adjusting its partner so that a vocal descriptor
    /// never has a purely visual display.
    pub fn set(&mut self, field: Field, value: &str) -> Result<(), AdaptError> {
        let invalid = || AdaptError::InvalidValue {
            field: field.to_string(),
            value: value.to_string(),
        };
        match field {
            Field::ThemeColor => self.theme_color = ThemeColor::parse(value).ok_or_else(invalid)?,
            Field::Vocal => {
                self.vocal = parse_bool(value).ok_or_else(invalid)?;
                if self.vocal && self.display_mode == DisplayMode::Visual {
                    self.display_mode = DisplayMode::Both;
                }
            }
            Field::DisplayMode => {
                self.display_mode = DisplayMode::parse(value).ok_or_else(invalid)?;
                if self.display_mode == DisplayMode::Visual {
                    self.vocal = false;
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, field: Field) -> String {
        match field {
            Field::ThemeColor => self.theme_color.to_string(),
            Field::Vocal => self.vocal.to_string(),
            Field::DisplayMode => self.display_mode.as_str().to_string(),
        }
    }

    pub fn vocal_invariant_holds(&self) -> bool {
        !self.vocal || self.display_mode != DisplayMode::Visual
    }
}

pub fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "on" => Some(true),
        "false" | "off" => Some(false),
        _ => None,
    }
}

/// Extra context for rule conditions (environment, device, time of day...).
pub type Context = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "when", rename_all = "snake_case")]
pub enum Condition {
    Sex { sex: Sex },
    Handicap { handicap: Handicap },
    Fact { key: String, value: String },
}

impl Condition {
    pub fn holds(&self, p: &Profile, cx: &Context) -> bool {
        match self {
            Condition::Sex { sex } => p.sex == *sex,
            Condition::Handicap { handicap } => p.handicap == *handicap,
            Condition::Fact { key, value } => cx.get(key) == Some(value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Automatic,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    User,
    Environment,
    System,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Means {
    TaskModel,
    Rendering,
    Help,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Temporal {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptationRule {
    pub rule_id: String,
    pub condition: Condition,
    pub field: Field,
    pub value: String,
    pub origin: Origin,
    /// Classification tags; evaluation ignores them.
    pub target: Target,
    pub means: Means,
    pub temporal: Temporal,
}

impl AdaptationRule {
    fn automatic(rule_id: &str, condition: Condition, field: Field, value: &str) -> Self {
        AdaptationRule {
            rule_id: rule_id.to_string(),
            condition,
            field,
            value: value.to_string(),
            origin: Origin::Automatic,
            target: Target::User,
            means: Means::Rendering,
            temporal: Temporal::Dynamic,
        }
    }
}

/// Sex chooses the theme, then blindness turns the vocal interface on.
pub fn builtin_rules() -> Vec<AdaptationRule> {
    vec![
        AdaptationRule::automatic("theme-pink", Condition::Sex { sex: Sex::F }, Field::ThemeColor, "pink"),
        AdaptationRule::automatic("theme-blue", Condition::Sex { sex: Sex::M }, Field::ThemeColor, "blue"),
        AdaptationRule::automatic(
            "vocal-blind",
            Condition::Handicap { handicap: Handicap::Blind },
            Field::Vocal,
            "true",
        ),
        AdaptationRule::automatic(
            "display-blind",
            Condition::Handicap { handicap: Handicap::Blind },
            Field::DisplayMode,
            "both",
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Override {
    pub field: Field,
    pub value: String,
    pub set_at: u64,
}

/// Active overrides, at most one per field. Values are stored already
/// reconciled, so replaying them in any order gives the same descriptor.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OverrideStore {
    active: BTreeMap<Field, Override>,
}

impl OverrideStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, field: &str, value: &str, tick: u64) -> Result<Field, AdaptError> {
        let field = Field::parse(field)?;
        let mut probe = PresentationDescriptor::neutral();
        for o in self.active.values() {
            probe.set(o.field, &o.value).expect("stored overrides are valid");
        }
        probe.set(field, value)?;
        let canonical = probe.get(field);
        self.active.insert(
            field,
            Override {
                field,
                value: canonical,
                set_at: tick,
            },
        );
        for partner in [Field::Vocal, Field::DisplayMode] {
            if partner != field {
                if let Some(o) = self.active.get_mut(&partner) {
                    o.value = probe.get(partner);
                }
            }
        }
        Ok(field)
    }

    pub fn clear(&mut self, field: &str) -> Result<Option<Override>, AdaptError> {
        let field = Field::parse(field)?;
        Ok(self.active.remove(&field))
    }

    pub fn get(&self, field: Field) -> Option<&Override> {
        self.active.get(&field)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Override> {
        self.active.values()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }
}

pub fn sex_label(sex: Sex) -> &'static str {
    match sex {
        Sex::F => "Miss",
        Sex::M => "Mr",
        Sex::Unspecified => "",
    }
}

pub fn greeting(p: &Profile) -> String {
    format!("Hello, {} : {} : {}\n", sex_label(p.sex), p.name, p.age)
}

pub fn title(p: &Profile) -> String {
    format!("Profile_location_service: id ={}", p.id_profile)
}

/// The subscribed categories line shown under the greeting.
pub fn services_text(p: &Profile) -> String {
    format!("Services: {}", p.subscriptions.join(", "))
}

/// Prompt offered when the user asks for one category.
pub fn category_prompt(category: &str) -> String {
    format!("Do you want to find a {}", category.to_lowercase())
}

pub fn service_label(s: &RankedService) -> String {
    format!("{} \u{2014} {:.2} km", s.entry.service_name, s.distance_km)
}

pub fn build_service_widgets(services: &[RankedService], prompt: &str) -> Vec<Widget> {
    let mut w = Vec::with_capacity(services.len() + 1);
    w.push(Widget::Prompt {
        text: prompt.to_string(),
    });
    w.extend(services.iter().map(|s| Widget::ListItem {
        text: service_label(s),
    }));
    w
}

/// Rules in order, then overrides. Widgets hold the greeting and the
/// subscribed categories.
pub fn adapt_with(
    p: &Profile,
    cx: &Context,
    overrides: &OverrideStore,
    rules: &[AdaptationRule],
) -> PresentationDescriptor {
    let mut d = PresentationDescriptor::neutral();
    for r in rules.iter().filter(|r| r.condition.holds(p, cx)) {
        // Rule values are fixed at construction; a bad one is skipped.
        let _ = d.set(r.field, &r.value);
    }
    for o in overrides.iter() {
        d.set(o.field, &o.value).expect("stored overrides are valid");
    }
    d.title = title(p);
    d.greeting = greeting(p);
    d.widgets = vec![
        Widget::Text {
            text: d.greeting.clone(),
        },
        Widget::Text {
            text: services_text(p),
        },
    ];
    d
}

pub fn adapt(p: &Profile, cx: &Context, overrides: &OverrideStore) -> PresentationDescriptor {
    adapt_with(p, cx, overrides, &builtin_rules())
}
