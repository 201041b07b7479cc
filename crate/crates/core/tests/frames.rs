use chrono::{TimeZone, Utc};
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

use leo_channel::frames::*;
use leo_channel::time;

fn orthonormality_error(m: &Matrix3<f64>) -> f64 {
    (m * m.transpose() - Matrix3::identity()).abs().max().max((m.determinant() - 1.0).abs())
}

fn instant(offset_days: f64) -> time::Instant {
    time::add_seconds(Utc.with_ymd_and_hms(2022, 6, 1, 0, 0, 0).unwrap(), offset_days * 86_400.0)
}

fn state(frame: Frame, t: time::Instant, p: [f64; 3], v: [f64; 3]) -> StateVector {
    StateVector { frame, t, position: Vector3::from(p), velocity: Vector3::from(v) }
}

#[test]
fn local_axes_are_south_east_zenith() {
    let site = Geodetic::new(0.0, 0.0, 0.0);
    let f = LocalFrame::from_anchor(geodetic_to_ecef(&site));
    let r = f.rotation();
    // ECEF +z (north) maps to local −x (south)
    assert!((r * Vector3::z() - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
    assert!((r * Vector3::y() - Vector3::y()).norm() < 1e-15);
    assert!((r * Vector3::x() - Vector3::z()).norm() < 1e-15);
}

#[test]
fn anchor_maps_to_origin_even_on_the_pole() {
    for site in [Geodetic::new(90.0, 0.0, 0.0), Geodetic::new(-90.0, 12.0, 0.3), Geodetic::new(35.0, 139.0, 0.05)] {
        let anchor = geodetic_to_ecef(&site);
        let f = build_local_frame(&site, &anchor).unwrap();
        assert!(f.point_to_local(&anchor).norm() < 1e-9);
        let up = f.point_to_local(&(anchor * 1.001));
        assert!(up.x.abs() < 1e-9 && up.y.abs() < 1e-9 && up.z > 0.0);
    }
}

#[test]
fn far_anchor_is_rejected() {
    let site = Geodetic::new(10.0, 10.0, 0.0);
    let anchor = geodetic_to_ecef(&Geodetic::new(10.1, 10.0, 0.0));
    assert!(matches!(build_local_frame(&site, &anchor), Err(FrameError::AnchorMismatch(_))));
}

#[test]
fn identity_orientation_collapses_frames() {
    let eo = EarthOrientation::identity();
    let s = state(Frame::Teme, instant(0.0), [7000.0, 10.0, -20.0], [0.1, 7.5, 0.2]);
    let eci = teme_to_eci(&s, &eo).unwrap();
    assert_eq!(eci.position, s.position);
    let ecef = eci_to_ecef(&eci, &eo).unwrap();
    assert!((ecef.position - s.position).norm() < 1e-12);
    let expected_v = s.velocity - Vector3::new(0.0, 0.0, EARTH_ROTATION_RATE).cross(&s.position);
    assert!((ecef.velocity - expected_v).norm() < 1e-15);
}

#[test]
fn teme_to_ecef_is_a_gmst_rotation() {
    for model in [NutationModel::Truncated, NutationModel::Off] {
        let t = instant(123.4);
        let eo = EarthOrientation::at(t, model);
        let m = eo.eci_to_ecef_matrix() * eo.teme_to_eci_matrix();
        let want = rot3(time::gmst(t));
        assert!((m - want).abs().max() < 1e-12, "{model:?}");
    }
}

#[test]
fn frame_mismatch_is_an_error() {
    let eo = EarthOrientation::identity();
    let s = state(Frame::Ecef, instant(0.0), [7000.0, 0.0, 0.0], [0.0; 3]);
    assert!(matches!(teme_to_eci(&s, &eo), Err(FrameError::FrameMismatch { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn eci_ecef_round_trip(
        days in -3000.0f64..3000.0,
        p in prop::array::uniform3(-8000.0f64..8000.0),
        v in prop::array::uniform3(-8.0f64..8.0),
    ) {
        let t = instant(days);
        let eo = EarthOrientation::at(t, NutationModel::Truncated);
        for m in [eo.precession_matrix(), eo.nutation_matrix(), eo.teme_to_eci_matrix(), eo.eci_to_ecef_matrix()] {
            prop_assert!(orthonormality_error(&m) < 1e-12);
        }
        let s = state(Frame::Eci, t, p, v);
        let back = ecef_to_eci(&eci_to_ecef(&s, &eo).unwrap(), &eo).unwrap();
        prop_assert!((back.position - s.position).norm() < 1e-9);
        prop_assert!((back.velocity - s.velocity).norm() < 1e-9);
        let teme = eci_to_teme(&s, &eo).unwrap();
        prop_assert!((teme_to_eci(&teme, &eo).unwrap().position - s.position).norm() < 1e-9);
    }

    #[test]
    fn ecef_local_round_trip(
        lat in -90.0f64..=90.0,
        lon in -180.0f64..180.0,
        alt in -0.5f64..3.0,
        p in prop::array::uniform3(-8000.0f64..8000.0),
        v in prop::array::uniform3(-8.0f64..8.0),
    ) {
        let site = Geodetic::new(lat, lon, alt);
        let f = build_local_frame(&site, &geodetic_to_ecef(&site)).unwrap();
        prop_assert!(orthonormality_error(f.rotation()) < 1e-12);
        let s = state(Frame::Ecef, instant(0.0), p, v);
        let back = local_to_global(&global_to_local(&s, &f).unwrap(), &f).unwrap();
        prop_assert!((back.position - s.position).norm() < 1e-9);
        prop_assert!((back.velocity - s.velocity).norm() < 1e-12);
    }

    #[test]
    fn geodetic_round_trip(lat in -89.9f64..89.9, lon in -179.9f64..179.9, alt in -1.0f64..2000.0) {
        let g = ecef_to_geodetic(&geodetic_to_ecef(&Geodetic::new(lat, lon, alt)));
        prop_assert!((g.lat_deg - lat).abs() < 1e-9);
        prop_assert!((g.lon_deg - lon).abs() < 1e-9);
        prop_assert!((g.alt_km - alt).abs() < 1e-8);
    }

    #[test]
    fn elementary_rotations_are_orthonormal(a in -10.0f64..10.0) {
        for m in [rot1(a), rot2(a), rot3(a), active_rz(a), active_ry(a)] {
            prop_assert!(orthonormality_error(&m) < 1e-12);
        }
        prop_assert!((rot3(a) - active_rz(a).transpose()).abs().max() < 1e-15);
    }
}
