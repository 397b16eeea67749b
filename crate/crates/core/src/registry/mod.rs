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

//! Profile, service and location tables with radius-based service matching.

mod geo;
mod tables;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use geo::{distance_km, EARTH_RADIUS_KM};
pub use tables::{
    load_tables, parse_tables, render_locations, render_profiles, render_services, save_tables,
    LOCATION_FILE, PROFILE_FILE, SERVICE_FILE,
};

/// Radius used when a request does not name one.
pub const DEFAULT_RADIUS_KM: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid service: {0}")]
    InvalidService(String),
    #[error("invalid location: {0}")]
    InvalidLocation(String),
    #[error("unknown user `{0}`")]
    UnknownUser(String),
    #[error("unknown service `{0}`")]
    UnknownService(String),
    #[error("radius must be a positive number of kilometres, got {0}")]
    InvalidRadius(String),
    #[error("cannot access table {table}: {detail}")]
    Io { table: String, detail: String },
    #[error("{table} line {line}: {detail}")]
    Format {
        table: String,
        line: usize,
        detail: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sex {
    F,
    M,
    #[serde(rename = "unspecified")]
    Unspecified,
}

impl Sex {
    pub fn as_str(self) -> &'static str {
        match self {
            Sex::F => "F",
            Sex::M => "M",
            Sex::Unspecified => "unspecified",
        }
    }

    pub fn parse(s: &str) -> Option<Sex> {
        Some(match s {
            "F" => Sex::F,
            "M" => Sex::M,
            "unspecified" => Sex::Unspecified,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handicap {
    None,
    Blind,
}

impl Handicap {
    pub fn as_str(self) -> &'static str {
        match self {
            Handicap::None => "none",
            Handicap::Blind => "blind",
        }
    }

    pub fn parse(s: &str) -> Option<Handicap> {
        Some(match s {
            "none" => Handicap::None,
            "blind" => Handicap::Blind,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub id_profile: String,
    pub name: String,
    pub sex: Sex,
    pub job: String,
    pub age: i64,
    pub handicap: Handicap,
    /// Subscribed categories, in subscription order.
    pub subscriptions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationFix {
    pub id_location: String,
    pub longitude: f64,
    pub latitude: f64,
}

impl LocationFix {
    pub fn new(id: impl Into<String>, longitude: f64, latitude: f64) -> Result<Self, RegistryError> {
        let id = id.into();
        if !is_key(&id) {
            return Err(RegistryError::InvalidLocation(format!("bad id_location `{id}`")));
        }
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(RegistryError::InvalidLocation(format!(
                "longitude {longitude} out of range"
            )));
        }
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(RegistryError::InvalidLocation(format!(
                "latitude {latitude} out of range"
            )));
        }
        Ok(LocationFix {
            id_location: id,
            longitude,
            latitude,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceEntry {
    pub id_service: String,
    pub service_name: String,
    pub description: String,
    pub category: String,
    pub location: LocationFix,
    pub available: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedService {
    pub entry: ServiceEntry,
    pub distance_km: f64,
}

/// Table keys: non-empty, no whitespace, no commas.
fn is_key(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || c == ',')
}

/// Free-text cell: anything but tabs and newlines.
fn is_cell(s: &str) -> bool {
    !s.contains(['\t', '\n', '\r'])
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Registry {
    profiles: BTreeMap<String, Profile>,
    services: BTreeMap<String, ServiceEntry>,
    locations: BTreeMap<String, LocationFix>,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    /// The shipped case-study dataset.
    pub fn case_study() -> Registry {
        parse_tables(
            include_str!("../../fixtures/registry/profile.tsv"),
            include_str!("../../fixtures/registry/service.tsv"),
            include_str!("../../fixtures/registry/location.tsv"),
        )
        .expect("shipped registry fixtures are valid")
    }

    pub fn profiles(&self) -> impl Iterator<Item = &Profile> {
        self.profiles.values()
    }

    pub fn services(&self) -> impl Iterator<Item = &ServiceEntry> {
        self.services.values()
    }

    pub fn locations(&self) -> impl Iterator<Item = &LocationFix> {
        self.locations.values()
    }

    pub fn service(&self, id: &str) -> Option<&ServiceEntry> {
        self.services.get(id)
    }

    pub fn upsert_profile(&mut self, p: Profile) -> Result<String, RegistryError> {
        let bad = |d: String| Err(RegistryError::InvalidProfile(d));
        if !is_key(&p.id_profile) {
            return bad(format!("bad id_profile `{}`", p.id_profile));
        }
        if p.age < 0 {
            return bad(format!("age {} is negative", p.age));
        }
        if !is_cell(&p.name) || !is_cell(&p.job) {
            return bad("name and job must not contain tabs or newlines".into());
        }
        for (i, s) in p.subscriptions.iter().enumerate() {
            if !is_key(s) || p.subscriptions[..i].contains(s) {
                return bad(format!("bad or repeated subscription `{s}`"));
            }
        }
        let id = p.id_profile.clone();
        self.profiles.insert(id.clone(), p);
        Ok(id)
    }

    pub fn authenticate(&self, user_id: &str) -> Result<&Profile, RegistryError> {
        self.profiles
            .get(user_id)
            .ok_or_else(|| RegistryError::UnknownUser(user_id.to_string()))
    }

    pub fn upsert_location(&mut self, fix: LocationFix) -> Result<(), RegistryError> {
        let fix = LocationFix::new(fix.id_location, fix.longitude, fix.latitude)?;
        let clash = self
            .services
            .values()
            .any(|s| s.location.id_location == fix.id_location && s.location != fix);
        if clash {
            return Err(RegistryError::InvalidLocation(format!(
                "`{}` is used by a service at other coordinates",
                fix.id_location
            )));
        }
        self.locations.insert(fix.id_location.clone(), fix);
        Ok(())
    }

    /// Inserts or replaces a service, registering its location.
    pub fn upsert_service(&mut self, s: ServiceEntry) -> Result<(), RegistryError> {
        let bad = |d: String| Err(RegistryError::InvalidService(d));
        if !is_key(&s.id_service) || !is_key(&s.category) {
            return bad(format!("bad id_service or category on `{}`", s.id_service));
        }
        if !is_cell(&s.service_name) || !is_cell(&s.description) {
            return bad("name and description must not contain tabs or newlines".into());
        }
        let loc = LocationFix::new(
            s.location.id_location.clone(),
            s.location.longitude,
            s.location.latitude,
        )?;
        if let Some(existing) = self.locations.get(&loc.id_location) {
            if *existing != loc {
                return bad(format!(
                    "location `{}` already has other coordinates",
                    loc.id_location
                ));
            }
        }
        self.locations.insert(loc.id_location.clone(), loc);
        self.services.insert(s.id_service.clone(), s);
        Ok(())
    }

    pub fn set_availability(&mut self, id_service: &str, available: bool) -> Result<(), RegistryError> {
        let s = self
            .services
            .get_mut(id_service)
            .ok_or_else(|| RegistryError::UnknownService(id_service.to_string()))?;
        s.available = available;
        Ok(())
    }

    /// Available services within `max_km` of `at`, restricted to `category`
    /// when given and to the profile's subscriptions otherwise. Sorted by
    /// distance, then by name.
    pub fn find_services(
        &self,
        profile_id: &str,
        at: &LocationFix,
        max_km: f64,
        category: Option<&str>,
    ) -> Result<Vec<RankedService>, RegistryError> {
        let profile = self.authenticate(profile_id)?;
        if !(max_km > 0.0 && max_km.is_finite()) {
            return Err(RegistryError::InvalidRadius(max_km.to_string()));
        }
        let mut out: Vec<RankedService> = self
            .services
            .values()
            .filter(|s| s.available)
            .filter(|s| match category {
                Some(c) => s.category == c,
                None => profile.subscriptions.contains(&s.category),
            })
            .map(|s| RankedService {
                distance_km: distance_km(at, &s.location),
                entry: s.clone(),
            })
            .filter(|r| r.distance_km <= max_km)
            .collect();
        out.sort_by(|a, b| {
            a.distance_km
                .total_cmp(&b.distance_km)
                .then_with(|| a.entry.service_name.cmp(&b.entry.service_name))
                .then_with(|| a.entry.id_service.cmp(&b.entry.id_service))
        });
        Ok(out)
    }

    pub fn save(&self, dir: &Path) -> Result<(), RegistryError> {
        save_tables(self, dir)
    }

    pub fn load(dir: &Path) -> Result<Registry, RegistryError> {
        load_tables(dir)
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sihem() -> Profile {
        Profile {
            id_profile: "1234".into(),
            name: "Cherif_Sihem".into(),
            sex: Sex::F,
            job: "Student".into(),
            age: 20,
            handicap: Handicap::None,
            subscriptions: vec!["Bank".into()],
        }
    }

    fn user_fix() -> LocationFix {
        LocationFix::new("here", 10.1, 36.8).unwrap()
    }

    #[test]
    fn upsert_and_authenticate() {
        let mut reg = Registry::new();
        assert_eq!(reg.upsert_profile(sihem()).unwrap(), "1234");
        let mut renamed = sihem();
        renamed.job = "Engineer".into();
        reg.upsert_profile(renamed.clone()).unwrap();
        assert_eq!(reg.profiles().count(), 1);
        assert_eq!(reg.authenticate("1234").unwrap(), &renamed);
        assert_eq!(
            reg.authenticate("0000"),
            Err(RegistryError::UnknownUser("0000".into()))
        );
    }

    #[test]
    fn negative_age_is_invalid() {
        let mut p = sihem();
        p.age = -1;
        assert!(matches!(
            Registry::new().upsert_profile(p),
            Err(RegistryError::InvalidProfile(_))
        ));
    }

    #[test]
    fn location_bounds() {
        assert!(LocationFix::new("x", 180.0, -90.0).is_ok());
        assert!(LocationFix::new("x", 180.1, 0.0).is_err());
        assert!(LocationFix::new("x", 0.0, 90.5).is_err());
    }

    #[test]
    fn availability_toggles_results() {
        let mut reg = Registry::case_study();
        let atms = |reg: &Registry| -> Vec<String> {
            reg.find_services("1234", &user_fix(), 1.0, Some("ATM"))
                .unwrap()
                .into_iter()
                .map(|r| r.entry.id_service)
                .collect()
        };
        assert!(atms(&reg).contains(&"BIAT-ATM".to_string()));
        reg.set_availability("BIAT-ATM", false).unwrap();
        assert!(!atms(&reg).contains(&"BIAT-ATM".to_string()));
        reg.set_availability("BIAT-ATM", true).unwrap();
        assert!(atms(&reg).contains(&"BIAT-ATM".to_string()));
        assert_eq!(
            reg.set_availability("nope", true),
            Err(RegistryError::UnknownService("nope".into()))
        );
    }

    #[test]
    fn find_services_checks_inputs() {
        let reg = Registry::case_study();
        assert!(matches!(
            reg.find_services("nobody", &user_fix(), 1.0, None),
            Err(RegistryError::UnknownUser(_))
        ));
        for r in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                reg.find_services("1234", &user_fix(), r, None),
                Err(RegistryError::InvalidRadius(_))
            ));
        }
    }

    #[test]
    fn subscriptions_drive_unfiltered_queries() {
        let reg = Registry::case_study();
        let found = reg.find_services("1234", &user_fix(), 50.0, None).unwrap();
        let profile = reg.authenticate("1234").unwrap();
        assert!(found
            .iter()
            .all(|r| profile.subscriptions.contains(&r.entry.category) && r.entry.available));
        for w in found.windows(2) {
            assert!(w[0].distance_km <= w[1].distance_km);
        }
    }

    #[test]
    fn conflicting_location_is_rejected() {
        let mut reg = Registry::case_study();
        let mut s = reg.service("BIAT-ATM").unwrap().clone();
        s.id_service = "other".into();
        s.location.longitude += 1.0;
        assert!(matches!(reg.upsert_service(s), Err(RegistryError::InvalidService(_))));
    }

    #[test]
    fn tables_round_trip_through_text() {
        let reg = Registry::case_study();
        let again = parse_tables(
            &render_profiles(&reg),
            &render_services(&reg),
            &render_locations(&reg),
        )
        .unwrap();
        assert_eq!(again, reg);
    }

    #[test]
    fn wrong_column_count_names_line() {
        let reg = Registry::case_study();
        let mut profiles = render_profiles(&reg);
        profiles.push_str("9999\tX\tF\n");
        let lines = profiles.lines().count();
        match parse_tables(&profiles, &render_services(&reg), &render_locations(&reg)) {
            Err(RegistryError::Format { table, line, .. }) => {
                assert_eq!(table, PROFILE_FILE);
                assert_eq!(line, lines);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
