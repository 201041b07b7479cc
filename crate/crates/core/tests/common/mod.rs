#![allow(dead_code)]

use chrono::{TimeZone, Utc};

use leo_channel::doppler::Ephemeris;
use leo_channel::frames::NutationModel;
use leo_channel::propagator::{mean_motion_for_altitude, GravityConstants};
use leo_channel::time::Instant;
use leo_channel::tle::{parse_tle, SyntheticElements, Tle};

/// Public element sets with well-known SGP4 reference output.
pub const PUBLIC_TLES: [(&str, &str, &str); 5] = [
    (
        "ISS (ZARYA)",
        "1 25544U 98067A   20194.88612269 -.00002218  00000-0 -31515-4 0  9992",
        "2 25544  51.6461 221.2784 0001413  89.1723 280.4612 15.49507896236008",
    ),
    (
        "00005",
        "1 00005U 58002B   00179.78495062  .00000023  00000-0  28098-4 0  4753",
        "2 00005  34.2682 348.7242 1859667 331.7664  19.3264 10.82419157413667",
    ),
    (
        "06251",
        "1 06251U 62025E   06176.82412014  .00008885  00000-0  12808-3 0  3985",
        "2 06251  58.0579  54.0425 0030035 139.1568 221.1854 15.56387291  6774",
    ),
    (
        "28057",
        "1 28057U 03049A   06177.78615833  .00000060  00000-0  35940-4 0  1836",
        "2 28057  98.4283 247.6961 0000884  88.1964 271.9322 14.35478080140550",
    ),
    (
        "28350",
        "1 28350U 04020A   06167.21788666  .16154492  76267-5  18678-3 0  8894",
        "2 28350  64.9977 345.6130 0024870 260.7578  99.9590 16.47856722116490",
    ),
];

pub fn public_tle(k: usize) -> Tle {
    let (name, l1, l2) = PUBLIC_TLES[k];
    parse_tle(l1, l2, Some(name)).expect("public TLE parses")
}

pub fn public_tle_named(name: &str) -> Tle {
    public_tle(PUBLIC_TLES.iter().position(|t| t.0 == name).expect("known name"))
}

pub fn epoch() -> Instant {
    Utc.with_ymd_and_hms(2022, 6, 1, 0, 0, 0).unwrap()
}

/// Circular orbit at `altitude_km`.
pub fn circular(altitude_km: f64, inclination_deg: f64, raan_deg: f64, mean_anomaly_deg: f64) -> Tle {
    let el = SyntheticElements {
        inclination_deg,
        raan_deg,
        eccentricity: 0.0,
        arg_perigee_deg: 0.0,
        mean_anomaly_deg,
        mean_motion_revs_per_day: mean_motion_for_altitude(altitude_km, &GravityConstants::wgs72()),
        bstar: 0.0,
    };
    Tle::synthetic("SYN", epoch(), &el)
}

pub fn ephemeris(tle: Tle) -> Ephemeris {
    Ephemeris::new(tle, &GravityConstants::wgs72(), NutationModel::Truncated).expect("ephemeris")
}
