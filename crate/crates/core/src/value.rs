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

//! Simple-typed values exchanged across platform boundaries.

use std::fmt;

use serde::{Deserialize, Serialize};

/// The closed set of types an operation may accept or return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimpleType {
    String,
    Int,
    Float,
    Bool,
    Unit,
}

impl SimpleType {
    pub fn as_str(self) -> &'static str {
        match self {
            SimpleType::String => "string",
            SimpleType::Int => "int",
            SimpleType::Float => "float",
            SimpleType::Bool => "bool",
            SimpleType::Unit => "unit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "string" => SimpleType::String,
            "int" => SimpleType::Int,
            "float" => SimpleType::Float,
            "bool" => SimpleType::Bool,
            "unit" => SimpleType::Unit,
            _ => return None,
        })
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A value of one of the non-unit simple types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl Value {
    pub fn simple_type(&self) -> SimpleType {
        match self {
            Value::Str(_) => SimpleType::String,
            Value::Int(_) => SimpleType::Int,
            Value::Float(_) => SimpleType::Float,
            Value::Bool(_) => SimpleType::Bool,
        }
    }

    /// Text form used both on the wire and in assembly dumps.
    pub fn to_text(&self) -> String {
        match self {
            Value::Str(s) => s.clone(),
            Value::Int(i) => i.to_string(),
            // `{:?}` keeps a trailing ".0" so the text always reads back as a float
            Value::Float(x) => format!("{x:?}"),
            Value::Bool(b) => b.to_string(),
        }
    }

    /// Parses `text` as a value of type `ty`. `Unit` never has a textual value.
    pub fn from_text(ty: SimpleType, text: &str) -> Option<Value> {
        match ty {
            SimpleType::String => Some(Value::Str(text.to_string())),
            SimpleType::Int => text.parse().ok().map(Value::Int),
            SimpleType::Float => text
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Value::Float),
            SimpleType::Bool => match text {
                "true" => Some(Value::Bool(true)),
                "false" => Some(Value::Bool(false)),
                _ => None,
            },
            SimpleType::Unit => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

/// `[A-Za-z_][A-Za-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Double-quotes `s`, backslash-escaping quotes, backslashes and newlines.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
