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

//! Interface contracts: a WSDL-like document naming a service's operations,
//! their messages and SOAP actions, plus the proxy and stub descriptors the
//! gateway generates from them.
//!
//! The document grammar is a fixed XML fragment:
//!
//! ```text
//! <contract name="Enterprise" ns="http://Ent">
//!   <operation name="AfficherNormal">
//!     <input message="AfficherNormalRequest" action="urn:AfficherNormal"/>
//!     <output message="AfficherNormalResponse" action="urn:AfficherNormalResponse"/>
//!     <returns type="string"/>
//!   </operation>
//! </contract>
//! ```
//!
//! `<operation name="X"/>` is shorthand for `XRequest`/`XResponse` messages
//! with `urn:X`/`urn:XResponse` actions, no params and a `unit` return.
//! The shorthand also accepts `input`, `output` and `returns` attributes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::value::{is_identifier, SimpleType};
use crate::xml::{self, Element, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: SimpleType,
}

impl Param {
    pub fn new(name: impl Into<String>, ty: SimpleType) -> Self {
        Param {
            name: name.into(),
            ty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperationDecl {
    pub name: String,
    pub input_message: String,
    pub output_message: String,
    pub input_action: String,
    pub output_action: String,
    pub params: Vec<Param>,
    pub returns: SimpleType,
}

impl OperationDecl {
    /// Operation with the default message and action names.
    pub fn shorthand(name: impl Into<String>, params: Vec<Param>, returns: SimpleType) -> Self {
        let name = name.into();
        OperationDecl {
            input_message: format!("{name}Request"),
            output_message: format!("{name}Response"),
            input_action: format!("urn:{name}"),
            output_action: format!("urn:{name}Response"),
            name,
            params,
            returns,
        }
    }

    pub fn param_types(&self) -> Vec<SimpleType> {
        self.params.iter().map(|p| p.ty).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    pub name: String,
    pub namespace: String,
    pub operations: Vec<OperationDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("syntax error at {line}:{col}: {detail}")]
    Syntax {
        line: usize,
        col: usize,
        detail: String,
    },
    #[error("duplicate operation `{0}`")]
    DuplicateOperation(String),
    #[error("operation `{operation}` repeats param `{param}`")]
    DuplicateParam { operation: String, param: String },
    #[error("contract has no namespace")]
    MissingNamespace,
    #[error("unknown operation `{0}`")]
    UnknownOperation(String),
    #[error("invalid endpoint url `{0}`")]
    InvalidEndpoint(String),
    #[error("unresolvable target: {0}")]
    UnresolvableTarget(String),
}

impl ContractError {
    fn syntax(src: &str, offset: usize, detail: impl Into<String>) -> Self {
        let pos = Pos::locate(src, offset);
        ContractError::Syntax {
            line: pos.line,
            col: pos.col,
            detail: detail.into(),
        }
    }
}

impl From<xml::XmlError> for ContractError {
    fn from(e: xml::XmlError) -> Self {
        ContractError::Syntax {
            line: e.pos.line,
            col: e.pos.col,
            detail: e.detail,
        }
    }
}

impl Contract {
    /// Builds a contract, checking the same invariants `parse` enforces.
    pub fn new(
        name: impl Into<String>,
        namespace: impl Into<String>,
        operations: Vec<OperationDecl>,
    ) -> Result<Self, ContractError> {
        let namespace = namespace.into();
        if namespace.is_empty() {
            return Err(ContractError::MissingNamespace);
        }
        let mut seen = BTreeSet::new();
        for op in &operations {
            if !seen.insert(op.name.as_str()) {
                return Err(ContractError::DuplicateOperation(op.name.clone()));
            }
            let mut params = BTreeSet::new();
            if let Some(p) = op.params.iter().find(|p| !params.insert(p.name.as_str())) {
                return Err(ContractError::DuplicateParam {
                    operation: op.name.clone(),
                    param: p.name.clone(),
                });
            }
        }
        Ok(Contract {
            name: name.into(),
            namespace,
            operations,
        })
    }

    pub fn operation(&self, name: &str) -> Option<&OperationDecl> {
        self.operations.iter().find(|op| op.name == name)
    }

    /// The SOAP action header value for `op_name`: namespace and operation
    /// name concatenated with no separator (`http://Ent` + `AfficherNormal`).
    pub fn soap_action(&self, op_name: &str) -> Result<String, ContractError> {
        self.operation(op_name)
            .map(|op| soap_action_for(&self.namespace, &op.name))
            .ok_or_else(|| ContractError::UnknownOperation(op_name.to_string()))
    }

    pub fn render(&self) -> String {
        render_contract(self)
    }
}

impl FromStr for Contract {
    type Err = ContractError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_contract(s)
    }
}

/// Namespace + operation name, verbatim.
pub fn soap_action_for(namespace: &str, op_name: &str) -> String {
    format!("{namespace}{op_name}")
}

pub fn parse_contract(src: &str) -> Result<Contract, ContractError> {
    let root = xml::parse_document(src)?;
    if root.name != "contract" {
        return Err(ContractError::syntax(
            src,
            root.offset,
            format!("expected root element `contract`, found `{}`", root.name),
        ));
    }
    if let Some(attr) = root.unexpected_attr(&["name", "ns"]) {
        return Err(ContractError::syntax(
            src,
            root.offset,
            format!("unexpected attribute `{attr}` on contract"),
        ));
    }
    let name = required_ident(src, &root, "name")?;
    let namespace = match root.attr("ns") {
        Some(ns) if !ns.is_empty() => ns.to_string(),
        _ => return Err(ContractError::MissingNamespace),
    };

    let children = root
        .element_children()
        .map_err(|at| ContractError::syntax(src, at, "unexpected text in contract"))?;
    let mut operations: Vec<OperationDecl> = Vec::new();
    for el in children {
        if el.name != "operation" {
            return Err(ContractError::syntax(
                src,
                el.offset,
                format!("unexpected element `{}` in contract", el.name),
            ));
        }
        let op = parse_operation(src, el)?;
        if operations.iter().any(|o| o.name == op.name) {
            return Err(ContractError::DuplicateOperation(op.name));
        }
        operations.push(op);
    }
    Ok(Contract {
        name,
        namespace,
        operations,
    })
}

fn required_ident(src: &str, el: &Element, attr: &str) -> Result<String, ContractError> {
    match el.attr(attr) {
        Some(v) if is_identifier(v) => Ok(v.to_string()),
        Some(v) => Err(ContractError::syntax(
            src,
            el.offset,
            format!("`{v}` is not a valid identifier for `{attr}`"),
        )),
        None => Err(ContractError::syntax(
            src,
            el.offset,
            format!("`{}` is missing attribute `{attr}`", el.name),
        )),
    }
}

fn parse_type(src: &str, el: &Element, text: &str, allow_unit: bool) -> Result<SimpleType, ContractError> {
    match SimpleType::parse(text) {
        Some(SimpleType::Unit) if !allow_unit => Err(ContractError::syntax(
            src,
            el.offset,
            "parameters cannot have type `unit`",
        )),
        Some(t) => Ok(t),
        None => Err(ContractError::syntax(
            src,
            el.offset,
            format!("unknown type `{text}`"),
        )),
    }
}

fn parse_operation(src: &str, el: &Element) -> Result<OperationDecl, ContractError> {
    if let Some(attr) = el.unexpected_attr(&["name", "input", "output", "returns"]) {
        return Err(ContractError::syntax(
            src,
            el.offset,
            format!("unexpected attribute `{attr}` on operation"),
        ));
    }
    let name = required_ident(src, el, "name")?;
    let mut op = OperationDecl::shorthand(name, Vec::new(), SimpleType::Unit);
    if let Some(m) = el.attr("input") {
        op.input_message = message_name(src, el, m)?;
    }
    if let Some(m) = el.attr("output") {
        op.output_message = message_name(src, el, m)?;
    }
    let mut returns_seen = false;
    if let Some(t) = el.attr("returns") {
        op.returns = parse_type(src, el, t, true)?;
        returns_seen = true;
    }

    let (mut input_seen, mut output_seen) = (el.attr("input").is_some(), el.attr("output").is_some());
    let children = el
        .element_children()
        .map_err(|at| ContractError::syntax(src, at, "unexpected text in operation"))?;
    for child in children {
        let once = |seen: &mut bool| -> Result<(), ContractError> {
            if std::mem::replace(seen, true) {
                Err(ContractError::syntax(
                    src,
                    child.offset,
                    format!("`{}` given more than once", child.name),
                ))
            } else {
                Ok(())
            }
        };
        match child.name.as_str() {
            "input" | "output" => {
                if let Some(attr) = child.unexpected_attr(&["message", "action"]) {
                    return Err(ContractError::syntax(
                        src,
                        child.offset,
                        format!("unexpected attribute `{attr}` on {}", child.name),
                    ));
                }
                let is_input = child.name == "input";
                once(if is_input { &mut input_seen } else { &mut output_seen })?;
                let (message, action) = if is_input {
                    (&mut op.input_message, &mut op.input_action)
                } else {
                    (&mut op.output_message, &mut op.output_action)
                };
                if let Some(m) = child.attr("message") {
                    *message = message_name(src, child, m)?;
                }
                if let Some(a) = child.attr("action") {
                    if a.is_empty() || a.chars().any(char::is_whitespace) {
                        return Err(ContractError::syntax(src, child.offset, "invalid action uri"));
                    }
                    *action = a.to_string();
                }
            }
            "param" => {
                if let Some(attr) = child.unexpected_attr(&["name", "type"]) {
                    return Err(ContractError::syntax(
                        src,
                        child.offset,
                        format!("unexpected attribute `{attr}` on param"),
                    ));
                }
                if returns_seen && el.attr("returns").is_none() {
                    return Err(ContractError::syntax(
                        src,
                        child.offset,
                        "param must come before returns",
                    ));
                }
                let pname = required_ident(src, child, "name")?;
                if op.params.iter().any(|p| p.name == pname) {
                    return Err(ContractError::syntax(
                        src,
                        child.offset,
                        format!("duplicate param `{pname}`"),
                    ));
                }
                let ty = child.attr("type").ok_or_else(|| {
                    ContractError::syntax(src, child.offset, "param is missing attribute `type`")
                })?;
                op.params.push(Param::new(pname, parse_type(src, child, ty, false)?));
            }
            "returns" => {
                if let Some(attr) = child.unexpected_attr(&["type"]) {
                    return Err(ContractError::syntax(
                        src,
                        child.offset,
                        format!("unexpected attribute `{attr}` on returns"),
                    ));
                }
                once(&mut returns_seen)?;
                let ty = child.attr("type").ok_or_else(|| {
                    ContractError::syntax(src, child.offset, "returns is missing attribute `type`")
                })?;
                op.returns = parse_type(src, child, ty, true)?;
            }
            other => {
                return Err(ContractError::syntax(
                    src,
                    child.offset,
                    format!("unexpected element `{other}` in operation"),
                ))
            }
        }
        if !child.children.is_empty() {
            return Err(ContractError::syntax(
                src,
                child.offset,
                format!("`{}` must be empty", child.name),
            ));
        }
    }
    Ok(op)
}

fn message_name(src: &str, el: &Element, m: &str) -> Result<String, ContractError> {
    if is_identifier(m) {
        Ok(m.to_string())
    } else {
        Err(ContractError::syntax(
            src,
            el.offset,
            format!("`{m}` is not a valid message name"),
        ))
    }
}

/// Canonical form: fixed element and attribute order, no whitespace between
/// elements.
pub fn render_contract(c: &Contract) -> String {
    let mut out = format!(
        r#"<contract name="{}" ns="{}">"#,
        xml::escape(&c.name),
        xml::escape(&c.namespace)
    );
    for op in &c.operations {
        out.push_str(&format!(
            r#"<operation name="{}"><input message="{}" action="{}"/><output message="{}" action="{}"/>"#,
            xml::escape(&op.name),
            xml::escape(&op.input_message),
            xml::escape(&op.input_action),
            xml::escape(&op.output_message),
            xml::escape(&op.output_action),
        ));
        for p in &op.params {
            out.push_str(&format!(
                r#"<param name="{}" type="{}"/>"#,
                xml::escape(&p.name),
                p.ty
            ));
        }
        out.push_str(&format!(r#"<returns type="{}"/></operation>"#, op.returns));
    }
    out.push_str("</contract>");
    out
}

/// `scheme://host:port/path`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EndpointUrl {
    pub scheme: String,
    pub host: String,
    pub port: u16,
    pub path: String,
}

impl EndpointUrl {
    /// Splits a `/<app>/services/<impl>` path into `(app, impl)`.
    pub fn service_parts(&self) -> Option<(&str, &str)> {
        let mut segs = self.path.trim_start_matches('/').split('/');
        match (segs.next(), segs.next(), segs.next(), segs.next()) {
            (Some(app), Some("services"), Some(imp), None) if !app.is_empty() && !imp.is_empty() => {
                Some((app, imp))
            }
            _ => None,
        }
    }
}

impl FromStr for EndpointUrl {
    type Err = ContractError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ContractError::InvalidEndpoint(s.to_string());
        let (scheme, rest) = s.split_once("://").ok_or_else(bad)?;
        let scheme_ok = scheme.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && scheme
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
        if !scheme_ok {
            return Err(bad());
        }
        let slash = rest.find('/').ok_or_else(bad)?;
        let (authority, path) = rest.split_at(slash);
        let (host, port) = authority.rsplit_once(':').ok_or_else(bad)?;
        let host_ok = !host.is_empty()
            && host
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_'));
        let port: u16 = port.parse().map_err(|_| bad())?;
        if !host_ok
            || path
                .chars()
                .any(|c| c.is_whitespace() || matches!(c, '?' | '#'))
        {
            return Err(bad());
        }
        Ok(EndpointUrl {
            scheme: scheme.to_string(),
            host: host.to_string(),
            port,
            path: path.to_string(),
        })
    }
}

impl fmt::Display for EndpointUrl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}://{}:{}{}", self.scheme, self.host, self.port, self.path)
    }
}

/// Client-side artifact: the contract plus where to reach it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProxyDescriptor {
    pub contract: Contract,
    pub endpoint_url: EndpointUrl,
}

/// Server-side artifact: the contract bound to a target on a platform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StubDescriptor {
    pub contract: Contract,
    pub platform_id: String,
    pub target_path: String,
}

pub fn make_proxy(contract: &Contract, endpoint: &str) -> Result<ProxyDescriptor, ContractError> {
    Ok(ProxyDescriptor {
        contract: contract.clone(),
        endpoint_url: endpoint.parse()?,
    })
}

/// Signature of a method exposed by a platform target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSig {
    pub name: String,
    pub params: Vec<SimpleType>,
    pub returns: SimpleType,
}

/// Lets stub generation check that a target really implements the contract.
pub trait TargetResolver {
    /// Methods of `target_path` on `platform_id`, or `None` if it does not exist.
    fn target_methods(&self, platform_id: &str, target_path: &str) -> Option<Vec<MethodSig>>;
}

pub fn make_stub(
    contract: &Contract,
    platform_id: &str,
    target_path: &str,
    resolver: &dyn TargetResolver,
) -> Result<StubDescriptor, ContractError> {
    let dotted_ok = !target_path.is_empty() && target_path.split('.').all(is_identifier);
    if !dotted_ok {
        return Err(ContractError::UnresolvableTarget(format!(
            "`{target_path}` is not a dotted path"
        )));
    }
    let methods = resolver
        .target_methods(platform_id, target_path)
        .ok_or_else(|| {
            ContractError::UnresolvableTarget(format!("{platform_id}/{target_path} not found"))
        })?;
    for op in &contract.operations {
        let Some(m) = methods.iter().find(|m| m.name == op.name) else {
            return Err(ContractError::UnresolvableTarget(format!(
                "{platform_id}/{target_path} has no method `{}`",
                op.name
            )));
        };
        if m.params != op.param_types() || m.returns != op.returns {
            return Err(ContractError::UnresolvableTarget(format!(
                "{platform_id}/{target_path}.{} signature does not match the contract",
                op.name
            )));
        }
    }
    Ok(StubDescriptor {
        contract: contract.clone(),
        platform_id: platform_id.to_string(),
        target_path: target_path.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ENTERPRISE: &str = r#"<contract name="Enterprise" ns="http://Ent"><operation name="AfficherNormal"><input message="AfficherNormalRequest" action="urn:AfficherNormal"/><output message="AfficherNormalResponse" action="urn:AfficherNormalResponse"/><returns type="string"/></operation></contract>"#;

    fn enterprise() -> Contract {
        Contract::new(
            "Enterprise",
            "http://Ent",
            vec![OperationDecl::shorthand("AfficherNormal", vec![], SimpleType::String)],
        )
        .unwrap()
    }

    #[test]
    fn rejects_repeated_param_names() {
        let op = OperationDecl::shorthand(
            "Put",
            vec![Param::new("x", SimpleType::Int), Param::new("x", SimpleType::String)],
            SimpleType::Unit,
        );
        assert_eq!(
            Contract::new("C", "urn:c", vec![op]),
            Err(ContractError::DuplicateParam { operation: "Put".into(), param: "x".into() })
        );
    }

    #[test]
    fn parses_enterprise_document() {
        let c = parse_contract(ENTERPRISE).unwrap();
        assert_eq!(c, enterprise());
        assert_eq!(c.operations[0].input_message, "AfficherNormalRequest");
    }

    #[test]
    fn renders_golden_bytes() {
        assert_eq!(enterprise().render(), ENTERPRISE);
    }

    #[test]
    fn shorthand_and_whitespace_are_accepted() {
        let doc = "<contract name=\"Enterprise\" ns=\"http://Ent\">\n  <operation name=\"AfficherNormal\" returns=\"string\"/>\n</contract>\n";
        assert_eq!(parse_contract(doc).unwrap().render(), ENTERPRISE);
    }

    #[test]
    fn explicit_message_attributes_override_shorthand() {
        let doc = r#"<contract name="C" ns="n"><operation name="Op" input="In" output="Out"/></contract>"#;
        let op = &parse_contract(doc).unwrap().operations[0];
        assert_eq!((op.input_message.as_str(), op.output_message.as_str()), ("In", "Out"));
        assert_eq!(op.input_action, "urn:Op");
    }

    #[test]
    fn empty_contract() {
        let c = parse_contract(r#"<contract name="E" ns="x"/>"#).unwrap();
        assert!(c.operations.is_empty());
        assert_eq!(c.render(), r#"<contract name="E" ns="x"></contract>"#);
    }

    #[test]
    fn missing_namespace() {
        assert_eq!(
            parse_contract(r#"<contract name="E"></contract>"#),
            Err(ContractError::MissingNamespace)
        );
        assert_eq!(
            parse_contract(r#"<contract name="E" ns=""></contract>"#),
            Err(ContractError::MissingNamespace)
        );
    }

    #[test]
    fn duplicate_operation_names_second() {
        let doc = r#"<contract name="E" ns="x"><operation name="A"/><operation name="B"/><operation name="A"/></contract>"#;
        assert_eq!(
            parse_contract(doc),
            Err(ContractError::DuplicateOperation("A".into()))
        );
    }

    #[test]
    fn syntax_error_carries_position() {
        let doc = "<contract name=\"E\" ns=\"x\">\n<operation name=\"A\">\n</contract>";
        match parse_contract(doc) {
            Err(ContractError::Syntax { line, col, .. }) => assert_eq!((line, col), (3, 1)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_contract(r#"<contract name="E" ns="x"><operation name="A"><param name="p" type="unit"/></operation></contract>"#),
            Err(ContractError::Syntax { .. })
        ));
    }

    #[test]
    fn soap_action_concatenates_without_separator() {
        assert_eq!(
            enterprise().soap_action("AfficherNormal").unwrap(),
            "http://EntAfficherNormal"
        );
        assert_eq!(soap_action_for("", "x"), "x");
        assert_eq!(
            enterprise().soap_action("Missing"),
            Err(ContractError::UnknownOperation("Missing".into()))
        );
    }

    #[test]
    fn proxy_endpoints() {
        let p = make_proxy(&enterprise(), "http://192.168.1.2:8080/Enterprise/services/EntImpl").unwrap();
        assert_eq!(p.endpoint_url.port, 8080);
        assert_eq!(p.endpoint_url.service_parts(), Some(("Enterprise", "EntImpl")));
        assert_eq!(
            p.endpoint_url.to_string(),
            "http://192.168.1.2:8080/Enterprise/services/EntImpl"
        );
        for bad in ["not a url", "http://host/x", "http://:80/x", "http://h:99999/x", "http://h:80"] {
            assert!(
                matches!(make_proxy(&enterprise(), bad), Err(ContractError::InvalidEndpoint(_))),
                "{bad}"
            );
        }
    }

    struct OneTarget;

    impl TargetResolver for OneTarget {
        fn target_methods(&self, platform_id: &str, target_path: &str) -> Option<Vec<MethodSig>> {
            (platform_id == "orb1" && target_path == "Enterprise").then(|| {
                vec![MethodSig {
                    name: "AfficherNormal".into(),
                    params: vec![],
                    returns: SimpleType::String,
                }]
            })
        }
    }

    #[test]
    fn stubs_resolve_against_platform() {
        let stub = make_stub(&enterprise(), "orb1", "Enterprise", &OneTarget).unwrap();
        assert_eq!(stub.target_path, "Enterprise");
        assert!(matches!(
            make_stub(&enterprise(), "orb1", "Nope", &OneTarget),
            Err(ContractError::UnresolvableTarget(_))
        ));
        let mut wider = enterprise();
        wider
            .operations
            .push(OperationDecl::shorthand("Other", vec![], SimpleType::Unit));
        assert!(matches!(
            make_stub(&wider, "orb1", "Enterprise", &OneTarget),
            Err(ContractError::UnresolvableTarget(_))
        ));
    }
}
