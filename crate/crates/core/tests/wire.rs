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


mod common;

use proptest::prelude::*;

use ctxbridge::contract::{parse_contract, soap_action_for, Contract};
use ctxbridge::envelope::{decode, encode, make_fault, Arg, Message};
use ctxbridge::gateway::enterprise_contract;

const GOLDEN_CONTRACT: &str = include_str!("../fixtures/enterprise.contract");

#[test]
fn soap_action_is_namespace_then_operation() {
    assert_eq!(soap_action_for("http://Ent", "AfficherNormal"), "http://EntAfficherNormal");
    assert_eq!(enterprise_contract().soap_action("AfficherNormal").unwrap(), "http://EntAfficherNormal");
}

#[test]
fn golden_contract_is_canonical() {
    let c = parse_contract(GOLDEN_CONTRACT).unwrap();
    assert_eq!(c, enterprise_contract());
    assert_eq!(c.render(), GOLDEN_CONTRACT);
}

#[test]
fn golden_envelopes_are_stable() {
    let call = Message::call("http://EntAfficherNormal", "m1", "AfficherNormal", "http://Ent", vec![]);
    let resp = Message::response_to(
        &call,
        "urn:AfficherNormalResponse",
        "r1",
        vec![Arg::new("return", "status=normal; queue=0")],
    );
    let fault = make_fault("m2", "UnknownOperation", "no operation `Nope`").unwrap();
    for (m, file) in [
        (call, &include_bytes!("../fixtures/envelopes/afficher_normal_call.xml")[..]),
        (resp, &include_bytes!("../fixtures/envelopes/afficher_normal_response.xml")[..]),
        (fault, &include_bytes!("../fixtures/envelopes/unknown_operation_fault.xml")[..]),
    ] {
        assert_eq!(encode(&m), file);
        assert_eq!(encode(&m), encode(&m));
        assert_eq!(decode(file).unwrap(), m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn envelope_round_trip(m in common::message()) {
        prop_assert_eq!(decode(&encode(&m)).unwrap(), m);
    }

    #[test]
    fn truncated_envelopes_fail_cleanly(m in common::message(), cut in any::<prop::sample::Index>()) {
        let bytes = encode(&m);
        let n = cut.index(bytes.len());
        prop_assert!(decode(&bytes[..n]).is_err());
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
        let _ = decode(&bytes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn contract_render_parse_inverse(c in common::contract()) {
        let text = c.render();
        let back = parse_contract(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.render(), text);
    }

    #[test]
    fn contract_parse_is_fixpoint(c in common::contract()) {
        let once: Contract = c.render().parse().unwrap();
        let twice: Contract = once.render().parse().unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn truncated_contracts_fail_cleanly(c in common::contract(), cut in any::<prop::sample::Index>()) {
        let text = c.render();
        let n = cut.index(text.len());
        if text.is_char_boundary(n) {
            prop_assert!(parse_contract(&text[..n]).is_err());
        }
    }
}
