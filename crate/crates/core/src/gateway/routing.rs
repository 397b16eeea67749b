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


//! Alarm routing: where a logged alarm goes given the current devices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::orb::Alarm;

pub const ORB_ID: &str = "orb1";
pub const GATEWAY_ID: &str = "gateway";
pub const ASSEMBLY_ID: &str = "assembly1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Device {
    Pda,
    Tv,
}

impl Device {
    pub fn as_str(self) -> &'static str {
        match self {
            Device::Pda => "pda",
            Device::Tv => "tv",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pda" => Some(Device::Pda),
            "tv" => Some(Device::Tv),
            _ => None,
        }
    }
}

impl fmt::Display for Device {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeviceStates {
    pub pda_on: bool,
    pub tv_on: bool,
}

impl Default for DeviceStates {
    fn default() -> Self {
        DeviceStates {
            pda_on: true,
            tv_on: true,
        }
    }
}

impl DeviceStates {
    pub fn get(&self, d: Device) -> bool {
        match d {
            Device::Pda => self.pda_on,
            Device::Tv => self.tv_on,
        }
    }

    pub fn set(&mut self, d: Device, on: bool) {
        match d {
            Device::Pda => self.pda_on = on,
            Device::Tv => self.tv_on = on,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Route {
    #[serde(rename = "DB_ONLY")]
    DbOnly,
    #[serde(rename = "PDA")]
    Pda,
    #[serde(rename = "TV")]
    Tv,
    #[serde(rename = "QUEUED")]
    Queued,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::DbOnly => "DB_ONLY",
            Route::Pda => "PDA",
            Route::Tv => "TV",
            Route::Queued => "QUEUED",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "DB_ONLY" => Some(Route::DbOnly),
            "PDA" => Some(Route::Pda),
            "TV" => Some(Route::Tv),
            "QUEUED" => Some(Route::Queued),
            _ => None,
        }
    }

    /// Hops an alarm travels on this route.
    pub fn path(self) -> Vec<String> {
        let hops: &[&str] = match self {
            Route::DbOnly => &[ORB_ID, "db"],
            Route::Pda => &[ORB_ID, GATEWAY_ID, "PDA"],
            Route::Tv => &[ORB_ID, GATEWAY_ID, ASSEMBLY_ID, "TV"],
            Route::Queued => &[ORB_ID, GATEWAY_ID, "queue"],
        };
        hops.iter().map(|s| s.to_string()).collect()
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingDecision {
    pub alarm_id: String,
    pub route: Route,
    pub path: Vec<String>,
}

pub fn route_for(critical: bool, d: DeviceStates) -> Route {
    match (critical, d.pda_on, d.tv_on) {
        (false, _, _) => Route::DbOnly,
        (true, true, _) => Route::Pda,
        (true, false, true) => Route::Tv,
        (true, false, false) => Route::Queued,
    }
}

pub fn route_alarm(a: &Alarm, d: DeviceStates) -> RoutingDecision {
    let route = route_for(a.is_critical(), d);
    RoutingDecision {
        alarm_id: a.alarm_id.clone(),
        route,
        path: route.path(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_table() {
        let cases = [
            (false, false, false, Route::DbOnly),
            (false, false, true, Route::DbOnly),
            (false, true, false, Route::DbOnly),
            (false, true, true, Route::DbOnly),
            (true, false, false, Route::Queued),
            (true, false, true, Route::Tv),
            (true, true, false, Route::Pda),
            (true, true, true, Route::Pda),
        ];
        for (crit, pda_on, tv_on, want) in cases {
            assert_eq!(route_for(crit, DeviceStates { pda_on, tv_on }), want);
        }
    }

    #[test]
    fn tv_path_crosses_assembly() {
        assert!(Route::Tv.path().iter().any(|h| h == ASSEMBLY_ID));
        assert_eq!(serde_json::to_string(&Route::DbOnly).unwrap(), "\"DB_ONLY\"");
    }
}
