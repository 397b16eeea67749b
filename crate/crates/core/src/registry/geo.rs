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

use std::f64::consts::PI;

use super::LocationFix;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Equirectangular distance between two fixes, in kilometres:
/// `R * sqrt((dlon * cos(mean_lat))^2 + dlat^2)`.
///
/// The longitude difference is taken the short way round the antimeridian.
pub fn distance_km(a: &LocationFix, b: &LocationFix) -> f64 {
    let (lat_a, lat_b) = (a.latitude.to_radians(), b.latitude.to_radians());
    let mut dlon = (b.longitude - a.longitude).to_radians();
    if dlon > PI {
        dlon -= 2.0 * PI;
    } else if dlon < -PI {
        dlon += 2.0 * PI;
    }
    let dlat = lat_b - lat_a;
    let x = dlon * ((lat_a + lat_b) / 2.0).cos();
    EARTH_RADIUS_KM * (x * x + dlat * dlat).sqrt()
}
