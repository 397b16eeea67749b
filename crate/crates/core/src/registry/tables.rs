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

//! TSV persistence for the profile, service and location tables.

use std::fs;
use std::path::Path;

use super::{Handicap, LocationFix, Profile, Registry, RegistryError, ServiceEntry, Sex};

pub const PROFILE_FILE: &str = "profile.tsv";
pub const SERVICE_FILE: &str = "service.tsv";
pub const LOCATION_FILE: &str = "location.tsv";

const PROFILE_COLUMNS: &[&str] = &[
    "id_profile",
    "name",
    "sex",
    "job",
    "age",
    "handicap",
    "subscriptions",
];
const SERVICE_COLUMNS: &[&str] = &[
    "id_service",
    "service_name",
    "description",
    "category",
    "id_location",
    "available",
];
const LOCATION_COLUMNS: &[&str] = &["id_location", "longitude", "latitude"];

fn row(fields: &[String]) -> String {
    let mut line = fields.join("\t");
    line.push('\n');
    line
}

pub fn render_profiles(reg: &Registry) -> String {
    let mut out = row(&PROFILE_COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    for p in reg.profiles.values() {
        out.push_str(&row(&[
            p.id_profile.clone(),
            p.name.clone(),
            p.sex.as_str().to_string(),
            p.job.clone(),
            p.age.to_string(),
            p.handicap.as_str().to_string(),
            p.subscriptions.join(","),
        ]));
    }
    out
}

pub fn render_services(reg: &Registry) -> String {
    let mut out = row(&SERVICE_COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    for s in reg.services.values() {
        out.push_str(&row(&[
            s.id_service.clone(),
            s.service_name.clone(),
            s.description.clone(),
            s.category.clone(),
            s.location.id_location.clone(),
            s.available.to_string(),
        ]));
    }
    out
}

pub fn render_locations(reg: &Registry) -> String {
    let mut out = row(&LOCATION_COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    for l in reg.locations.values() {
        out.push_str(&row(&[
            l.id_location.clone(),
            l.longitude.to_string(),
            l.latitude.to_string(),
        ]));
    }
    out
}

pub fn save_tables(reg: &Registry, dir: &Path) -> Result<(), RegistryError> {
    fs::create_dir_all(dir).map_err(|e| RegistryError::Io {
        table: dir.display().to_string(),
        detail: e.to_string(),
    })?;
    for (file, body) in [
        (PROFILE_FILE, render_profiles(reg)),
        (SERVICE_FILE, render_services(reg)),
        (LOCATION_FILE, render_locations(reg)),
    ] {
        fs::write(dir.join(file), body).map_err(|e| RegistryError::Io {
            table: file.to_string(),
            detail: e.to_string(),
        })?;
    }
    Ok(())
}

pub fn load_tables(dir: &Path) -> Result<Registry, RegistryError> {
    let read = |file: &str| {
        fs::read_to_string(dir.join(file)).map_err(|e| RegistryError::Io {
            table: file.to_string(),
            detail: e.to_string(),
        })
    };
    let (profiles, services, locations) = (read(PROFILE_FILE)?, read(SERVICE_FILE)?, read(LOCATION_FILE)?);
    parse_tables(&profiles, &services, &locations)
}

struct Table<'a> {
    name: &'static str,
    rows: Vec<(usize, Vec<&'a str>)>,
}

fn split_table<'a>(name: &'static str, text: &'a str, columns: &[&str]) -> Result<Table<'a>, RegistryError> {
    let err = |line: usize, detail: String| RegistryError::Format {
        table: name.to_string(),
        line,
        detail,
    };
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = body.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    let Some((_, header)) = lines.next() else {
        return Err(err(1, "missing header".into()));
    };
    if header.split('\t').collect::<Vec<_>>() != columns {
        return Err(err(1, format!("expected header `{}`", columns.join("\\t"))));
    }
    let mut rows = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != columns.len() {
            return Err(err(
                n,
                format!("expected {} columns, found {}", columns.len(), fields.len()),
            ));
        }
        rows.push((n, fields));
    }
    Ok(Table { name, rows })
}

impl Table<'_> {
    fn err(&self, line: usize, detail: impl Into<String>) -> RegistryError {
        RegistryError::Format {
            table: self.name.to_string(),
            line,
            detail: detail.into(),
        }
    }
}

/// Parses the three tables from their text and joins services to locations.
pub fn parse_tables(profiles: &str, services: &str, locations: &str) -> Result<Registry, RegistryError> {
    let mut reg = Registry::default();

    let t = split_table(LOCATION_FILE, locations, LOCATION_COLUMNS)?;
    for (n, f) in &t.rows {
        let num = |s: &str| s.parse::<f64>().map_err(|_| t.err(*n, format!("`{s}` is not a number")));
        let fix = LocationFix::new(f[0], num(f[1])?, num(f[2])?).map_err(|e| t.err(*n, e.to_string()))?;
        if reg.locations.insert(fix.id_location.clone(), fix).is_some() {
            return Err(t.err(*n, format!("duplicate id_location `{}`", f[0])));
        }
    }

    let t = split_table(PROFILE_FILE, profiles, PROFILE_COLUMNS)?;
    for (n, f) in &t.rows {
        let sex = Sex::parse(f[2]).ok_or_else(|| t.err(*n, format!("bad sex `{}`", f[2])))?;
        let age = f[4]
            .parse::<i64>()
            .map_err(|_| t.err(*n, format!("bad age `{}`", f[4])))?;
        let handicap = Handicap::parse(f[5]).ok_or_else(|| t.err(*n, format!("bad handicap `{}`", f[5])))?;
        let subscriptions = if f[6].is_empty() {
            Vec::new()
        } else {
            f[6].split(',').map(str::to_string).collect()
        };
        let p = Profile {
            id_profile: f[0].to_string(),
            name: f[1].to_string(),
            sex,
            job: f[3].to_string(),
            age,
            handicap,
            subscriptions,
        };
        if reg.profiles.contains_key(&p.id_profile) {
            return Err(t.err(*n, format!("duplicate id_profile `{}`", p.id_profile)));
        }
        reg.upsert_profile(p).map_err(|e| t.err(*n, e.to_string()))?;
    }

    let t = split_table(SERVICE_FILE, services, SERVICE_COLUMNS)?;
    for (n, f) in &t.rows {
        let location = reg
            .locations
            .get(f[4])
            .cloned()
            .ok_or_else(|| t.err(*n, format!("unknown id_location `{}`", f[4])))?;
        let available = match f[5] {
            "true" => true,
            "false" => false,
            other => return Err(t.err(*n, format!("bad available flag `{other}`"))),
        };
        if reg.services.contains_key(f[0]) {
            return Err(t.err(*n, format!("duplicate id_service `{}`", f[0])));
        }
        reg.upsert_service(ServiceEntry {
            id_service: f[0].to_string(),
            service_name: f[1].to_string(),
            description: f[2].to_string(),
            category: f[3].to_string(),
            location,
            available,
        })
        .map_err(|e| t.err(*n, e.to_string()))?;
    }
    Ok(reg)
}
