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

//! Pointcut expressions: `execution(RET PATH.METHOD(ARGS))`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::value::is_identifier;

/// A single pattern position: `*` or an exact identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Any,
    Exact(String),
}

impl Pattern {
    pub fn matches(&self, s: &str) -> bool {
        match self {
            Pattern::Any => true,
            Pattern::Exact(e) => e == s,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Any => f.write_str("*"),
            Pattern::Exact(e) => f.write_str(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArgsPattern {
    /// `..`
    Any,
    Exact(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Execution,
}

/// An operation execution that advice may attach to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Joinpoint {
    pub platform_id: String,
    pub target_path: Vec<String>,
    pub method: String,
    pub phase: Phase,
    pub returns: String,
    pub arg_types: Vec<String>,
}

impl Joinpoint {
    /// A `void method()` execution on the dotted `target_path`.
    pub fn execution(platform_id: &str, target_path: &str, method: &str) -> Self {
        Joinpoint {
            platform_id: platform_id.to_string(),
            target_path: target_path.split('.').map(str::to_string).collect(),
            method: method.to_string(),
            phase: Phase::Execution,
            returns: "void".to_string(),
            arg_types: Vec::new(),
        }
    }

    pub fn with_signature(mut self, returns: &str, arg_types: &[&str]) -> Self {
        self.returns = returns.to_string();
        self.arg_types = arg_types.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.target_path.join("."), self.method)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pointcut {
    pub return_pattern: Pattern,
    pub path_pattern: Vec<Pattern>,
    pub method_pattern: Pattern,
    pub args_pattern: ArgsPattern,
}

impl Pointcut {
    pub fn matches(&self, jp: &Joinpoint) -> bool {
        jp.phase == Phase::Execution
            && self.return_pattern.matches(&jp.returns)
            && self.path_pattern.len() == jp.target_path.len()
            && self
                .path_pattern
                .iter()
                .zip(&jp.target_path)
                .all(|(p, s)| p.matches(s))
            && self.method_pattern.matches(&jp.method)
            && match &self.args_pattern {
                ArgsPattern::Any => true,
                ArgsPattern::Exact(types) => *types == jp.arg_types,
            }
    }
}

pub fn matches(pc: &Pointcut, jp: &Joinpoint) -> bool {
    pc.matches(jp)
}

impl fmt::Display for Pointcut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "execution({} ", self.return_pattern)?;
        for seg in &self.path_pattern {
            write!(f, "{seg}.")?;
        }
        write!(f, "{}(", self.method_pattern)?;
        match &self.args_pattern {
            ArgsPattern::Any => f.write_str("..")?,
            ArgsPattern::Exact(types) => f.write_str(&types.join(", "))?,
        }
        f.write_str("))")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad pointcut at column {col}: {detail}")]
pub struct PointcutError {
    pub col: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Star,
    Dot,
    DotDot,
    Open,
    Close,
    Comma,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, PointcutError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            c if c.is_whitespace() => i += 1,
            '*' => {
                out.push((col, Tok::Star));
                i += 1;
            }
            '.' if chars.get(i + 1) == Some(&'.') => {
                out.push((col, Tok::DotDot));
                i += 2;
            }
            '.' => {
                out.push((col, Tok::Dot));
                i += 1;
            }
            '(' => {
                out.push((col, Tok::Open));
                i += 1;
            }
            ')' => {
                out.push((col, Tok::Close));
                i += 1;
            }
            ',' => {
                out.push((col, Tok::Comma));
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((col, Tok::Ident(chars[start..i].iter().collect())));
            }
            other => {
                return Err(PointcutError {
                    col,
                    detail: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end_col: usize,
}

impl Cursor {
    fn col(&self) -> usize {
        self.toks.get(self.at).map_or(self.end_col, |(c, _)| *c)
    }

    fn err<T>(&self, detail: impl Into<String>) -> Result<T, PointcutError> {
        Err(PointcutError {
            col: self.col(),
            detail: detail.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), PointcutError> {
        if self.peek() == Some(&want) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn pattern(&mut self) -> Result<Pattern, PointcutError> {
        match self.peek().cloned() {
            Some(Tok::Star) => {
                self.at += 1;
                Ok(Pattern::Any)
            }
            Some(Tok::Ident(s)) => {
                self.at += 1;
                Ok(Pattern::Exact(s))
            }
            _ => self.err("expected identifier or `*`"),
        }
    }
}

impl FromStr for Pointcut {
    type Err = PointcutError;

    fn from_str(src: &str) -> Result<Self, Self::Err> {
        let mut c = Cursor {
            toks: tokenize(src)?,
            at: 0,
            end_col: src.chars().count() + 1,
        };
        match c.next() {
            Some(Tok::Ident(kw)) if kw == "execution" => {}
            _ => {
                c.at = 0;
                return c.err("expected `execution`");
            }
        }
        c.expect(Tok::Open, "`(`")?;
        let return_pattern = c.pattern()?;
        let mut segments = vec![c.pattern()?];
        while c.peek() == Some(&Tok::Dot) {
            c.at += 1;
            segments.push(c.pattern()?);
        }
        if segments.len() < 2 {
            return c.err("expected PATH.METHOD with at least one path segment");
        }
        let method_pattern = segments.pop().expect("len checked");
        c.expect(Tok::Open, "`(` before arguments")?;
        let args_pattern = match c.peek() {
            Some(Tok::DotDot) => {
                c.at += 1;
                ArgsPattern::Any
            }
            Some(Tok::Close) => ArgsPattern::Exact(Vec::new()),
            _ => {
                let mut types = Vec::new();
                loop {
                    match c.next() {
                        Some(Tok::Ident(t)) if is_identifier(&t) => types.push(t),
                        _ => {
                            c.at -= 1;
                            return c.err("expected a type name");
                        }
                    }
                    if c.peek() == Some(&Tok::Comma) {
                        c.at += 1;
                    } else {
                        break;
                    }
                }
                ArgsPattern::Exact(types)
            }
        };
        c.expect(Tok::Close, "`)` after arguments")?;
        c.expect(Tok::Close, "closing `)`")?;
        if c.peek().is_some() {
            return c.err("trailing input");
        }
        Ok(Pointcut {
            return_pattern,
            path_pattern: segments,
            method_pattern,
            args_pattern,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CODE2: &str =
        "execution (*com.Android_Location_Profile_Service. Android_Profile_Service.onCreate (..))";

    fn on_create() -> Joinpoint {
        Joinpoint::execution(
            "android1",
            "com.Android_Location_Profile_Service.Android_Profile_Service",
            "onCreate",
        )
    }

    #[test]
    fn parses_the_before_service_pointcut() {
        let pc: Pointcut = CODE2.parse().unwrap();
        assert_eq!(pc.return_pattern, Pattern::Any);
        assert_eq!(pc.path_pattern.len(), 3);
        assert_eq!(pc.method_pattern, Pattern::Exact("onCreate".into()));
        assert_eq!(pc.args_pattern, ArgsPattern::Any);
        assert!(pc.matches(&on_create()));
    }

    #[test]
    fn other_method_does_not_match() {
        let pc: Pointcut = CODE2.parse().unwrap();
        let mut jp = on_create();
        jp.method = "onDestroy".into();
        assert!(!pc.matches(&jp));
    }

    #[test]
    fn wildcard_segments() {
        let pc: Pointcut = "execution(* *.*.onCreate(..))".parse().unwrap();
        assert!(pc.matches(&Joinpoint::execution("p", "x.y", "onCreate")));
        assert!(!pc.matches(&Joinpoint::execution("p", "x.y.z", "onCreate")));
    }

    #[test]
    fn typed_arguments_and_return() {
        let pc: Pointcut = "execution(String a.get(int, String))".parse().unwrap();
        let jp = Joinpoint::execution("p", "a", "get").with_signature("String", &["int", "String"]);
        assert!(pc.matches(&jp));
        assert!(!pc.matches(&Joinpoint::execution("p", "a", "get")));
        let none: Pointcut = "execution(void a.get())".parse().unwrap();
        assert!(none.matches(&Joinpoint::execution("p", "a", "get")));
    }

    #[test]
    fn display_reparses() {
        for src in [CODE2, "execution(String a.*.get(int, String))", "execution(* a.b())"] {
            let pc: Pointcut = src.parse().unwrap();
            assert_eq!(pc.to_string().parse::<Pointcut>().unwrap(), pc);
        }
    }

    #[test]
    fn errors_name_a_column() {
        let err = "execution(* onCreate(..))".parse::<Pointcut>().unwrap_err();
        assert!(err.detail.contains("path segment"));
        assert!("call(* a.b(..))".parse::<Pointcut>().is_err());
        assert!("execution(* a.b(..)".parse::<Pointcut>().is_err());
        assert_eq!("execution(* a.b(..)) x".parse::<Pointcut>().unwrap_err().col, 22);
    }
}
