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

//! Runtime aspect weaving over operation executions.
//!
//! Advice bodies are named actions from a registry, not arbitrary code, so
//! woven aspects stay deterministic and serializable. For one dispatch the
//! order is: every matching `before` (weave order), every `around` (weave
//! order, outermost first), the body, then every `after` in reverse weave
//! order. An `around` whose action vetoes stops the chain; the body and the
//! `after` advices are then skipped.

mod pointcut;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use pointcut::{matches, ArgsPattern, Joinpoint, Pattern, Phase, Pointcut, PointcutError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdviceKind {
    Before,
    After,
    Around,
}

impl fmt::Display for AdviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdviceKind::Before => "before",
            AdviceKind::After => "after",
            AdviceKind::Around => "around",
        })
    }
}

/// What an advice does when it fires.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// Emit a log line.
    Log(String),
    /// Set a field of the presentation descriptor being built.
    SetPresentation { field: String, value: String },
    /// Refuse the call. Only meaningful in `around` advice.
    Veto(String),
    /// Let the call through unchanged.
    Proceed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Advice {
    pub kind: AdviceKind,
    #[serde(rename = "action")]
    pub action_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aspect {
    pub aspect_id: String,
    pub pointcut: Pointcut,
    pub advices: Vec<Advice>,
}

/// Wire/file form of an aspect, with the pointcut as text and optional
/// inline action definitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectDoc {
    pub aspect_id: String,
    pub pointcut: String,
    pub advices: Vec<Advice>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub actions: BTreeMap<String, Action>,
}

impl AspectDoc {
    pub fn to_aspect(&self) -> Result<Aspect, WeaverError> {
        Ok(Aspect {
            aspect_id: self.aspect_id.clone(),
            pointcut: self.pointcut.parse()?,
            advices: self.advices.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeaverError {
    #[error("aspect `{0}` is already woven")]
    DuplicateAspect(String),
    #[error("no woven aspect `{0}`")]
    UnknownAspect(String),
    #[error("action `{0}` is not registered")]
    UnknownAction(String),
    #[error("action `{0}` is already registered with a different definition")]
    DuplicateAction(String),
    #[error("invalid advice: {0}")]
    InvalidAdvice(String),
    #[error(transparent)]
    Pointcut(#[from] PointcutError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiredAdvice {
    pub aspect_id: String,
    pub kind: AdviceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect: Option<Effect>,
}

impl fmt::Display for FiredAdvice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.aspect_id, self.kind)
    }
}

/// Side effect requested by a fired advice, for the caller to apply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "effect", rename_all = "snake_case")]
pub enum Effect {
    Log { text: String },
    SetPresentation { field: String, value: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<R> {
    Completed(R),
    Vetoed { aspect_id: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dispatch<R> {
    pub outcome: Outcome<R>,
    /// Fired advice in execution order.
    pub trace: Vec<FiredAdvice>,
}

impl<R> Dispatch<R> {
    pub fn effects(&self) -> impl Iterator<Item = &Effect> {
        self.trace.iter().filter_map(|f| f.effect.as_ref())
    }

    pub fn completed(self) -> Option<R> {
        match self.outcome {
            Outcome::Completed(r) => Some(r),
            Outcome::Vetoed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Weaver {
    actions: BTreeMap<String, Action>,
    woven: Vec<Aspect>,
}

impl Weaver {
    pub fn new() -> Self {
        Weaver::default()
    }

    /// Registers `action` under `id`. Re-registering an identical definition
    /// is a no-op.
    pub fn register_action(&mut self, id: &str, action: Action) -> Result<(), WeaverError> {
        match self.actions.get(id) {
            Some(existing) if *existing != action => Err(WeaverError::DuplicateAction(id.to_string())),
            Some(_) => Ok(()),
            None => {
                self.actions.insert(id.to_string(), action);
                Ok(())
            }
        }
    }

    pub fn action(&self, id: &str) -> Option<&Action> {
        self.actions.get(id)
    }

    pub fn weave(&mut self, aspect: Aspect) -> Result<(), WeaverError> {
        if self.woven.iter().any(|a| a.aspect_id == aspect.aspect_id) {
            return Err(WeaverError::DuplicateAspect(aspect.aspect_id));
        }
        for advice in &aspect.advices {
            let action = self
                .actions
                .get(&advice.action_id)
                .ok_or_else(|| WeaverError::UnknownAction(advice.action_id.clone()))?;
            if matches!(action, Action::Veto(_)) && advice.kind != AdviceKind::Around {
                return Err(WeaverError::InvalidAdvice(format!(
                    "`{}` vetoes and can only be used as around advice",
                    advice.action_id
                )));
            }
        }
        self.woven.push(aspect);
        Ok(())
    }

    /// Registers the doc's inline actions, then weaves it. Nothing changes on
    /// error.
    pub fn weave_doc(&mut self, doc: &AspectDoc) -> Result<(), WeaverError> {
        let aspect = doc.to_aspect()?;
        let mut next = self.clone();
        for (id, action) in &doc.actions {
            next.register_action(id, action.clone())?;
        }
        next.weave(aspect)?;
        *self = next;
        Ok(())
    }

    pub fn unweave(&mut self, aspect_id: &str) -> Result<Aspect, WeaverError> {
        let idx = self
            .woven
            .iter()
            .position(|a| a.aspect_id == aspect_id)
            .ok_or_else(|| WeaverError::UnknownAspect(aspect_id.to_string()))?;
        Ok(self.woven.remove(idx))
    }

    pub fn woven(&self) -> &[Aspect] {
        &self.woven
    }

    /// Runs `body` at `jp` with all matching advice applied.
    pub fn dispatch<R>(&self, jp: &Joinpoint, body: impl FnOnce() -> R) -> Dispatch<R> {
        let matching: Vec<&Aspect> = self.woven.iter().filter(|a| a.pointcut.matches(jp)).collect();
        let mut trace = Vec::new();

        let advices_of = |kind: AdviceKind| {
            move |a: &&Aspect| -> Vec<(String, String)> {
                a.advices
                    .iter()
                    .filter(|adv| adv.kind == kind)
                    .map(|adv| (a.aspect_id.clone(), adv.action_id.clone()))
                    .collect()
            }
        };

        let befores: Vec<_> = matching.iter().flat_map(advices_of(AdviceKind::Before)).collect();
        let arounds: Vec<_> = matching.iter().flat_map(advices_of(AdviceKind::Around)).collect();
        let afters: Vec<_> = matching
            .iter()
            .rev()
            .flat_map(advices_of(AdviceKind::After))
            .collect();

        for (aspect_id, action_id) in &befores {
            trace.push(self.fire(aspect_id, AdviceKind::Before, action_id));
        }
        for (aspect_id, action_id) in &arounds {
            trace.push(self.fire(aspect_id, AdviceKind::Around, action_id));
            if let Some(Action::Veto(reason)) = self.actions.get(action_id) {
                return Dispatch {
                    outcome: Outcome::Vetoed {
                        aspect_id: aspect_id.clone(),
                        reason: reason.clone(),
                    },
                    trace,
                };
            }
        }
        let result = body();
        for (aspect_id, action_id) in &afters {
            trace.push(self.fire(aspect_id, AdviceKind::After, action_id));
        }
        Dispatch {
            outcome: Outcome::Completed(result),
            trace,
        }
    }

    fn fire(&self, aspect_id: &str, kind: AdviceKind, action_id: &str) -> FiredAdvice {
        let effect = match self.actions.get(action_id) {
            Some(Action::Log(text)) => Some(Effect::Log { text: text.clone() }),
            Some(Action::SetPresentation { field, value }) => Some(Effect::SetPresentation {
                field: field.clone(),
                value: value.clone(),
            }),
            Some(Action::Proceed) | Some(Action::Veto(_)) | None => None,
        };
        FiredAdvice {
            aspect_id: aspect_id.to_string(),
            kind,
            effect,
        }
    }
}
