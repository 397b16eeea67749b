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

//! SOAP-lite envelope codec.
//!
//! Every cross-platform call, response, fault and pushed event travels as one
//! of these envelopes. Output is canonical (fixed element and attribute order,
//! no whitespace between elements, escape set `& < > "`), so encodings can be
//! compared byte for byte.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{is_identifier, SimpleType, Value};
use crate::xml::{self, Element};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Call,
    Response,
    Fault,
    Event,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Call => "call",
            Kind::Response => "response",
            Kind::Fault => "fault",
            Kind::Event => "event",
        }
    }

    fn parse(s: &str) -> Option<Kind> {
        Some(match s {
            "call" => Kind::Call,
            "response" => Kind::Response,
            "fault" => Kind::Fault,
            "event" => Kind::Event,
            _ => return None,
        })
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arg {
    pub name: String,
    pub value: Value,
}

impl Arg {
    pub fn new(name: impl Into<String>, value: impl Into<Value>) -> Self {
        Arg {
            name: name.into(),
            value: value.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub action: String,
    pub message_id: String,
    /// Empty for calls and events.
    pub correlation_id: String,
    pub kind: Kind,
    /// Empty for faults.
    pub op_name: String,
    /// Empty for faults.
    pub namespace: String,
    pub args: Vec<Arg>,
}

pub const FAULT_ACTION: &str = "urn:Fault";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    #[error("malformed envelope at byte {position}: {detail}")]
    MalformedEnvelope { position: usize, detail: String },
    #[error("unknown message kind `{0}`")]
    UnknownKind(String),
    #[error("argument `{0}` does not match its declared type")]
    TypeMismatch(String),
    #[error("invalid message: {0}")]
    InvalidMessage(String),
}

fn malformed(position: usize, detail: impl Into<String>) -> EnvelopeError {
    EnvelopeError::MalformedEnvelope {
        position,
        detail: detail.into(),
    }
}

impl Message {
    pub fn call(
        action: impl Into<String>,
        message_id: impl Into<String>,
        op_name: impl Into<String>,
        namespace: impl Into<String>,
        args: Vec<Arg>,
    ) -> Self {
        Message {
            action: action.into(),
            message_id: message_id.into(),
            correlation_id: String::new(),
            kind: Kind::Call,
            op_name: op_name.into(),
            namespace: namespace.into(),
            args,
        }
    }

    /// A response to `request`, carrying `args` as the return payload.
    pub fn response_to(
        request: &Message,
        action: impl Into<String>,
        message_id: impl Into<String>,
        args: Vec<Arg>,
    ) -> Self {
        Message {
            action: action.into(),
            message_id: message_id.into(),
            correlation_id: request.message_id.clone(),
            kind: Kind::Response,
            op_name: request.op_name.clone(),
            namespace: request.namespace.clone(),
            args,
        }
    }

    pub fn event(
        action: impl Into<String>,
        message_id: impl Into<String>,
        op_name: impl Into<String>,
        namespace: impl Into<String>,
        args: Vec<Arg>,
    ) -> Self {
        Message {
            kind: Kind::Event,
            ..Message::call(action, message_id, op_name, namespace, args)
        }
    }

    pub fn arg(&self, name: &str) -> Option<&Value> {
        self.args.iter().find(|a| a.name == name).map(|a| &a.value)
    }

    /// For faults, the `(code, reason)` pair.
    pub fn fault_parts(&self) -> Option<(&str, &str)> {
        if self.kind != Kind::Fault {
            return None;
        }
        Some((self.arg("code")?.as_str()?, self.arg("reason")?.as_str()?))
    }

    pub fn validate(&self) -> Result<(), EnvelopeError> {
        let invalid = |d: String| Err(EnvelopeError::InvalidMessage(d));
        if self.action.is_empty() || self.action.chars().any(char::is_whitespace) {
            return invalid(format!("bad action `{}`", self.action));
        }
        if !is_identifier(&self.message_id) {
            return invalid(format!("bad message id `{}`", self.message_id));
        }
        match self.kind {
            Kind::Call | Kind::Event => {
                if !self.correlation_id.is_empty() {
                    return invalid(format!("{} must not carry a correlation id", self.kind));
                }
            }
            Kind::Response | Kind::Fault => {
                if !is_identifier(&self.correlation_id) {
                    return invalid(format!("{} needs a correlation id", self.kind));
                }
            }
        }
        if self.kind == Kind::Fault {
            if !self.op_name.is_empty() || !self.namespace.is_empty() {
                return invalid("faults carry no operation".into());
            }
            let shape_ok = self.args.len() == 2
                && self.args[0].name == "code"
                && self.args[1].name == "reason"
                && self.args.iter().all(|a| a.value.simple_type() == SimpleType::String);
            if !shape_ok {
                return invalid("fault args must be exactly code and reason strings".into());
            }
        } else if !is_identifier(&self.op_name) {
            return invalid(format!("bad operation name `{}`", self.op_name));
        }
        for a in &self.args {
            if !is_identifier(&a.name) {
                return invalid(format!("bad argument name `{}`", a.name));
            }
            if let Value::Float(x) = a.value {
                if !x.is_finite() {
                    return invalid(format!("argument `{}` is not finite", a.name));
                }
            }
        }
        Ok(())
    }
}

/// Builds a fault correlated to `correlation_id`.
pub fn make_fault(correlation_id: &str, code: &str, reason: &str) -> Result<Message, EnvelopeError> {
    if correlation_id.is_empty() {
        return Err(EnvelopeError::InvalidMessage(
            "fault needs a correlation id".into(),
        ));
    }
    let m = Message {
        action: FAULT_ACTION.to_string(),
        message_id: format!("{correlation_id}_fault"),
        correlation_id: correlation_id.to_string(),
        kind: Kind::Fault,
        op_name: String::new(),
        namespace: String::new(),
        args: vec![Arg::new("code", code), Arg::new("reason", reason)],
    };
    m.validate()?;
    Ok(m)
}

fn push_arg(out: &mut String, a: &Arg) {
    out.push_str(&format!(
        r#"<arg name="{}" type="{}">{}</arg>"#,
        xml::escape(&a.name),
        a.value.simple_type(),
        xml::escape(&a.value.to_text())
    ));
}

pub fn encode(m: &Message) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("<Envelope><Header><Action>");
    out.push_str(&xml::escape(&m.action));
    out.push_str("</Action><MessageId>");
    out.push_str(&xml::escape(&m.message_id));
    out.push_str("</MessageId><CorrelationId>");
    out.push_str(&xml::escape(&m.correlation_id));
    out.push_str("</CorrelationId></Header>");
    out.push_str(&format!(r#"<Body kind="{}">"#, m.kind));
    if m.kind == Kind::Fault {
        for a in &m.args {
            push_arg(&mut out, a);
        }
    } else {
        out.push_str(&format!(
            r#"<op name="{}" ns="{}">"#,
            xml::escape(&m.op_name),
            xml::escape(&m.namespace)
        ));
        for a in &m.args {
            push_arg(&mut out, a);
        }
        out.push_str("</op>");
    }
    out.push_str("</Body></Envelope>");
    out.into_bytes()
}

pub fn decode(bytes: &[u8]) -> Result<Message, EnvelopeError> {
    let src = std::str::from_utf8(bytes)
        .map_err(|e| malformed(e.valid_up_to(), "invalid UTF-8"))?;
    let root = xml::parse_document(src).map_err(|e| malformed(e.pos.offset, e.detail))?;
    expect_name(&root, "Envelope")?;
    no_attrs(&root)?;
    let parts = children(&root)?;
    let [header, body] = parts.as_slice() else {
        return Err(malformed(root.offset, "Envelope needs exactly Header and Body"));
    };
    expect_name(header, "Header")?;
    no_attrs(header)?;
    let fields = children(header)?;
    let [action, mid, cid] = fields.as_slice() else {
        return Err(malformed(
            header.offset,
            "Header needs Action, MessageId and CorrelationId",
        ));
    };
    let action = leaf_text(action, "Action")?;
    let message_id = leaf_text(mid, "MessageId")?;
    let correlation_id = leaf_text(cid, "CorrelationId")?;

    expect_name(body, "Body")?;
    if let Some(a) = body.unexpected_attr(&["kind"]) {
        return Err(malformed(body.offset, format!("unexpected attribute `{a}` on Body")));
    }
    let kind_text = body
        .attr("kind")
        .ok_or_else(|| malformed(body.offset, "Body is missing `kind`"))?;
    let kind = Kind::parse(kind_text).ok_or_else(|| EnvelopeError::UnknownKind(kind_text.to_string()))?;

    let body_children = children(body)?;
    let (op_name, namespace, args) = if kind == Kind::Fault {
        let args = body_children
            .iter()
            .map(|e| decode_arg(e))
            .collect::<Result<Vec<_>, _>>()?;
        (String::new(), String::new(), args)
    } else {
        let [op] = body_children.as_slice() else {
            return Err(malformed(body.offset, "Body needs exactly one `op`"));
        };
        expect_name(op, "op")?;
        if let Some(a) = op.unexpected_attr(&["name", "ns"]) {
            return Err(malformed(op.offset, format!("unexpected attribute `{a}` on op")));
        }
        let name = op
            .attr("name")
            .ok_or_else(|| malformed(op.offset, "op is missing `name`"))?;
        let ns = op
            .attr("ns")
            .ok_or_else(|| malformed(op.offset, "op is missing `ns`"))?;
        let args = children(op)?
            .iter()
            .map(|e| decode_arg(e))
            .collect::<Result<Vec<_>, _>>()?;
        (name.to_string(), ns.to_string(), args)
    };

    let m = Message {
        action,
        message_id,
        correlation_id,
        kind,
        op_name,
        namespace,
        args,
    };
    m.validate().map_err(|e| match e {
        EnvelopeError::InvalidMessage(d) => malformed(root.offset, d),
        other => other,
    })?;
    Ok(m)
}

fn expect_name(el: &Element, name: &str) -> Result<(), EnvelopeError> {
    if el.name == name {
        Ok(())
    } else {
        Err(malformed(
            el.offset,
            format!("expected `{name}`, found `{}`", el.name),
        ))
    }
}

fn no_attrs(el: &Element) -> Result<(), EnvelopeError> {
    match el.attrs.first() {
        Some((k, _)) => Err(malformed(
            el.offset,
            format!("unexpected attribute `{k}` on {}", el.name),
        )),
        None => Ok(()),
    }
}

fn children(el: &Element) -> Result<Vec<&Element>, EnvelopeError> {
    el.element_children()
        .map_err(|at| malformed(at, format!("unexpected text in {}", el.name)))
}

fn leaf_text(el: &Element, name: &str) -> Result<String, EnvelopeError> {
    expect_name(el, name)?;
    no_attrs(el)?;
    el.text()
        .map_err(|at| malformed(at, format!("{name} must contain only text")))
}

fn decode_arg(el: &Element) -> Result<Arg, EnvelopeError> {
    expect_name(el, "arg")?;
    if let Some(a) = el.unexpected_attr(&["name", "type"]) {
        return Err(malformed(el.offset, format!("unexpected attribute `{a}` on arg")));
    }
    let name = el
        .attr("name")
        .ok_or_else(|| malformed(el.offset, "arg is missing `name`"))?;
    let ty_text = el
        .attr("type")
        .ok_or_else(|| malformed(el.offset, "arg is missing `type`"))?;
    let ty = match SimpleType::parse(ty_text) {
        Some(SimpleType::Unit) | None => {
            return Err(malformed(el.offset, format!("bad arg type `{ty_text}`")))
        }
        Some(t) => t,
    };
    let text = el
        .text()
        .map_err(|at| malformed(at, "arg must contain only text"))?;
    let value =
        Value::from_text(ty, &text).ok_or_else(|| EnvelopeError::TypeMismatch(name.to_string()))?;
    Ok(Arg {
        name: name.to_string(),
        value,
    })
}
