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

//! A deliberately small XML subset shared by the contract and envelope codecs.
//!
//! Supported: elements, double-quoted attributes, text, and the five predefined
//! entities. Not supported: prologs, comments, CDATA, processing instructions,
//! numeric character references. Anything outside the subset is a syntax error.

use std::fmt;

/// Byte offset into the source plus its 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub offset: usize,
    pub line: usize,
    pub col: usize,
}

impl Pos {
    pub fn locate(src: &str, offset: usize) -> Pos {
        let offset = offset.min(src.len());
        let before = &src[..offset];
        let line = before.matches('\n').count() + 1;
        let col = match before.rfind('\n') {
            Some(nl) => before[nl + 1..].chars().count() + 1,
            None => before.chars().count() + 1,
        };
        Pos { offset, line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlError {
    pub pos: Pos,
    pub detail: String,
}

impl fmt::Display for XmlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.detail)
    }
}

impl std::error::Error for XmlError {}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Element(Element),
    Text { text: String, offset: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Node>,
    pub offset: usize,
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    /// First attribute whose name is not in `allowed`.
    pub fn unexpected_attr(&self, allowed: &[&str]) -> Option<&str> {
        self.attrs
            .iter()
            .map(|(k, _)| k.as_str())
            .find(|k| !allowed.contains(k))
    }

    /// Child elements, or the offset of the first non-whitespace text node.
    pub fn element_children(&self) -> Result<Vec<&Element>, usize> {
        let mut out = Vec::new();
        for child in &self.children {
            match child {
                Node::Element(e) => out.push(e),
                Node::Text { text, offset } => {
                    if !text.chars().all(char::is_whitespace) {
                        return Err(*offset);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Concatenated text content, or the offset of the first child element.
    pub fn text(&self) -> Result<String, usize> {
        let mut out = String::new();
        for child in &self.children {
            match child {
                Node::Text { text, .. } => out.push_str(text),
                Node::Element(e) => return Err(e.offset),
            }
        }
        Ok(out)
    }
}

/// Escapes the canonical set `& < > "`.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Parses a document consisting of exactly one root element, optionally
/// surrounded by whitespace.
pub fn parse_document(src: &str) -> Result<Element, XmlError> {
    let mut p = Parser { src, pos: 0 };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error(p.pos, "empty document"));
    }
    let root = p.element()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(p.pos, "trailing content after root element"));
    }
    Ok(root)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, offset: usize, detail: impl Into<String>) -> XmlError {
        XmlError {
            pos: Pos::locate(self.src, offset),
            detail: detail.into(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), XmlError> {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            Ok(())
        } else if self.at_end() {
            Err(self.error(self.pos, format!("unexpected end of input, expected `{token}`")))
        } else {
            Err(self.error(self.pos, format!("expected `{token}`")))
        }
    }

    fn name(&mut self) -> Result<String, XmlError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | ':' | '.') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(if self.at_end() {
                self.error(self.pos, "unexpected end of input, expected a name")
            } else {
                self.error(self.pos, "expected a name")
            });
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn element(&mut self) -> Result<Element, XmlError> {
        let offset = self.pos;
        self.expect("<")?;
        let name = self.name()?;
        let mut attrs: Vec<(String, String)> = Vec::new();
        loop {
            let before_ws = self.pos;
            self.skip_ws();
            if self.rest().starts_with("/>") {
                self.pos += 2;
                return Ok(Element {
                    name,
                    attrs,
                    children: Vec::new(),
                    offset,
                });
            }
            if self.rest().starts_with('>') {
                self.pos += 1;
                break;
            }
            if self.at_end() {
                return Err(self.error(self.pos, "unexpected end of input inside tag"));
            }
            if before_ws == self.pos {
                return Err(self.error(self.pos, "expected whitespace before attribute"));
            }
            let attr_at = self.pos;
            let key = self.name()?;
            self.skip_ws();
            self.expect("=")?;
            self.skip_ws();
            self.expect("\"")?;
            let value = self.chars_until('"', true)?;
            self.expect("\"")?;
            if attrs.iter().any(|(k, _)| *k == key) {
                return Err(self.error(attr_at, format!("duplicate attribute `{key}`")));
            }
            attrs.push((key, value));
        }

        let mut children = Vec::new();
        loop {
            if self.at_end() {
                return Err(self.error(self.pos, format!("unexpected end of input, `{name}` not closed")));
            }
            if self.rest().starts_with("</") {
                let close_at = self.pos;
                self.pos += 2;
                let close = self.name()?;
                self.skip_ws();
                self.expect(">")?;
                if close != name {
                    return Err(self.error(
                        close_at,
                        format!("mismatched closing tag `{close}`, expected `{name}`"),
                    ));
                }
                return Ok(Element {
                    name,
                    attrs,
                    children,
                    offset,
                });
            }
            if self.rest().starts_with('<') {
                children.push(Node::Element(self.element()?));
            } else {
                let text_at = self.pos;
                let text = self.chars_until('<', false)?;
                children.push(Node::Text {
                    text,
                    offset: text_at,
                });
            }
        }
    }

    /// Reads and unescapes characters up to (not including) `stop`.
    fn chars_until(&mut self, stop: char, in_attr: bool) -> Result<String, XmlError> {
        let mut out = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(self.error(self.pos, "unexpected end of input"));
            };
            if c == stop {
                return Ok(out);
            }
            if in_attr && c == '<' {
                return Err(self.error(self.pos, "`<` not allowed in attribute value"));
            }
            if c == '&' {
                let at = self.pos;
                let rest = self.rest();
                let Some(end) = rest.find(';') else {
                    return Err(self.error(at, "unterminated entity"));
                };
                let decoded = match &rest[1..end] {
                    "amp" => '&',
                    "lt" => '<',
                    "gt" => '>',
                    "quot" => '"',
                    "apos" => '\'',
                    other => return Err(self.error(at, format!("unknown entity `&{other};`"))),
                };
                out.push(decoded);
                self.pos += end + 1;
            } else {
                out.push(c);
                self.pos += c.len_utf8();
            }
        }
    }
}
