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


//! In-process envelope exchange between a proxy and an exported endpoint.
//! Every call is encoded to bytes and decoded on the far side.

use std::collections::BTreeMap;

use crate::assembly::RemoteCaller;
use crate::contract::{ProxyDescriptor, StubDescriptor};
use crate::envelope::{decode, encode, make_fault, Arg, Kind, Message};
use crate::events::{Event, EventLog};
use crate::orb::{ObjectRef, Orb};
use crate::value::Value;
use crate::weaver::{Joinpoint, Outcome, Weaver};

use super::{log_advice, orb_code, GatewayError};

/// A contract exported at a URL and bound to a platform target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint {
    pub url: String,
    pub stub: StubDescriptor,
}

/// Borrowed view of the gateway pieces a cross-platform call touches.
pub struct Transport<'a> {
    pub endpoints: &'a BTreeMap<String, Endpoint>,
    pub orb: &'a Orb,
    pub weaver: &'a Weaver,
    pub msg_seq: &'a mut u64,
    pub log: &'a mut EventLog,
    pub tick: u64,
}

impl Transport<'_> {
    fn next_id(&mut self, prefix: &str) -> String {
        *self.msg_seq += 1;
        format!("{prefix}{}", self.msg_seq)
    }

    pub fn call(
        &mut self,
        proxy: &ProxyDescriptor,
        op_name: &str,
        args: Vec<Value>,
    ) -> Result<Option<Value>, GatewayError> {
        let c = &proxy.contract;
        let op = c
            .operation(op_name)
            .ok_or_else(|| GatewayError::Contract(crate::contract::ContractError::UnknownOperation(op_name.to_string())))?;
        if args.len() != op.params.len()
            || args.iter().zip(&op.params).any(|(v, p)| v.simple_type() != p.ty)
        {
            return Err(GatewayError::TypeMismatch(format!(
                "{op_name} expects {:?}",
                op.param_types()
            )));
        }
        let url = proxy.endpoint_url.to_string();
        if !self.endpoints.contains_key(&url) {
            return Err(GatewayError::TransportError(format!("no endpoint at {url}")));
        }
        let action = c.soap_action(op_name)?;
        let message_id = self.next_id("m");
        let wire_args = op
            .params
            .iter()
            .zip(args)
            .map(|(p, v)| Arg::new(p.name.clone(), v))
            .collect();
        let request = Message::call(action.clone(), message_id.clone(), op_name, c.namespace.clone(), wire_args);
        self.log.push(
            self.tick,
            Event::SoapRequest {
                url: url.clone(),
                action,
                message_id: message_id.clone(),
            },
        );
        let reply = self.serve(&url, &encode(&request))?;
        let response = decode(&reply)?;
        self.log.push(
            self.tick,
            Event::SoapResponse {
                url,
                message_id: response.message_id.clone(),
                correlation_id: response.correlation_id.clone(),
                envelope_kind: response.kind.to_string(),
            },
        );
        if response.correlation_id != message_id {
            return Err(GatewayError::TransportError(format!(
                "response correlates to `{}`, expected `{message_id}`",
                response.correlation_id
            )));
        }
        if let Some((code, reason)) = response.fault_parts() {
            return Err(GatewayError::RemoteFault {
                code: code.to_string(),
                reason: reason.to_string(),
            });
        }
        Ok(response.arg("return").cloned())
    }

    /// Server side: unmarshals a call at `url`, invokes the bound target and
    /// returns the encoded response or fault.
    pub fn serve(&mut self, url: &str, bytes: &[u8]) -> Result<Vec<u8>, GatewayError> {
        let ep = self
            .endpoints
            .get(url)
            .ok_or_else(|| GatewayError::TransportError(format!("no endpoint at {url}")))?;
        let req = match decode(bytes) {
            Ok(m) => m,
            Err(e) => return Ok(fault_bytes("unknown", "MalformedEnvelope", &e.to_string())),
        };
        let cid = req.message_id.clone();
        let fault = |code: &str, reason: String| Ok(fault_bytes(&cid, code, &reason));
        if req.kind != Kind::Call {
            return fault("UnexpectedKind", format!("expected a call, got {}", req.kind));
        }
        let c = &ep.stub.contract;
        if req.namespace != c.namespace {
            return fault("UnknownNamespace", format!("namespace `{}`", req.namespace));
        }
        let Some(op) = c.operation(&req.op_name) else {
            return fault("UnknownOperation", format!("no operation `{}`", req.op_name));
        };
        let expected_action = c.soap_action(&op.name)?;
        if req.action != expected_action {
            return fault("ActionMismatch", format!("expected action `{expected_action}`"));
        }
        let shape_ok = req.args.len() == op.params.len()
            && req
                .args
                .iter()
                .zip(&op.params)
                .all(|(a, p)| a.name == p.name && a.value.simple_type() == p.ty);
        if !shape_ok {
            return fault("TypeMismatch", format!("{} expects {:?}", op.name, op.param_types()));
        }
        let values: Vec<Value> = req.args.iter().map(|a| a.value.clone()).collect();
        let target = ObjectRef::new(&ep.stub.platform_id, &ep.stub.target_path);
        let arg_types: Vec<&str> = op.params.iter().map(|p| p.ty.as_str()).collect();
        let jp = Joinpoint::execution(&ep.stub.platform_id, &ep.stub.target_path, &op.name)
            .with_signature(op.returns.as_str(), &arg_types);
        let orb = self.orb;
        let d = self.weaver.dispatch(&jp, || orb.invoke(&target, &op.name, &values));
        log_advice(self.log, self.tick, &jp, &d.trace);
        let result = match d.outcome {
            Outcome::Vetoed { aspect_id, reason } => {
                self.log.push(
                    self.tick,
                    Event::AdviceVetoed {
                        aspect_id,
                        joinpoint: jp.qualified_name(),
                        reason: reason.clone(),
                    },
                );
                return fault("Vetoed", reason);
            }
            Outcome::Completed(r) => r,
        };
        match result {
            Err(e) => fault(orb_code(&e), e.to_string()),
            Ok(inv) => {
                let rid = self.next_id("r");
                let args = inv.value.map(|v| vec![Arg::new("return", v)]).unwrap_or_default();
                let resp = Message::response_to(&req, op.output_action.clone(), rid, args);
                Ok(encode(&resp))
            }
        }
    }
}

fn fault_bytes(correlation_id: &str, code: &str, reason: &str) -> Vec<u8> {
    encode(&make_fault(correlation_id, code, reason).expect("fault correlation id is non-empty"))
}

impl RemoteCaller for Transport<'_> {
    fn call(
        &mut self,
        proxy: &ProxyDescriptor,
        operation: &str,
        args: Vec<Value>,
    ) -> Result<Option<Value>, String> {
        Transport::call(self, proxy, operation, args).map_err(|e| e.to_string())
    }
}
