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

//! Deterministic simulator of a service gateway bridging two context-aware
//! platforms (a component-assembly platform and a reflective object broker)
//! with an adaptable mobile HMI, over a contract + envelope interop layer.

pub mod adaptation;
pub mod assembly;
pub mod contract;
pub mod envelope;
pub mod events;
pub mod gateway;
pub mod harness;
pub mod orb;
pub mod registry;
pub mod value;
pub mod weaver;
pub mod xml;
