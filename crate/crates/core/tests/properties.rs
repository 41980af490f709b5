use proptest::prelude::*;

use quasishadow::formats::{read_orbit, write_orbit, OrbitHeader};
use quasishadow::model::{BaseMatrix, SkewModel};
use quasishadow::orbit::generate_noisy;
use quasishadow::shadow::{delta_for_epsilon, MARGIN};
use quasishadow::torus::{circle_offset, minimal_displacement, torus_distance, wrap, wrap_unit, TorusPoint};

fn coord() -> impl Strategy<Value = f64> {
    0.0..1.0f64
}

fn point() -> impl Strategy<Value = TorusPoint> {
    (coord(), coord(), coord()).prop_map(|(a, b, c)| TorusPoint::new(a, b, c).unwrap())
}

fn small() -> impl Strategy<Value = f64> {
    -0.1..0.1f64
}

proptest! {
    #[test]
    fn distance_is_symmetric(p in point(), q in point()) {
        prop_assert_eq!(torus_distance(&p, &q), torus_distance(&q, &p));
    }

    #[test]
    fn distance_obeys_triangle_inequality(p in point(), q in point(), r in point()) {
        prop_assert!(torus_distance(&p, &r) <= torus_distance(&p, &q) + torus_distance(&q, &r) + 1e-15);
    }

    #[test]
    fn distance_is_lift_invariant(p in point(), q in point(), n in prop::array::uniform3(-3i32..3)) {
        let c = q.coords();
        let shifted = wrap([c[0] + n[0] as f64, c[1] + n[1] as f64, c[2] + n[2] as f64]).unwrap();
        prop_assert!((torus_distance(&p, &q) - torus_distance(&p, &shifted)).abs() < 1e-14);
    }

    #[test]
    fn diameter_is_half_root_three(p in point(), q in point()) {
        prop_assert!(torus_distance(&p, &q) <= 3f64.sqrt() / 2.0 + 1e-15);
    }

    #[test]
    fn wrap_lands_in_unit_interval(v in -1e6..1e6f64) {
        let w = wrap_unit(v);
        prop_assert!((0.0..1.0).contains(&w));
        prop_assert_eq!(wrap_unit(w), w);
    }

    #[test]
    fn offsets_are_minimal(d in -10.0..10.0f64) {
        let m = circle_offset(d);
        prop_assert!((-0.5..0.5).contains(&m));
        prop_assert!(((d - m) - (d - m).round()).abs() < 1e-9);
    }

    #[test]
    fn translate_inverts_displacement(p in point(), q in point()) {
        let d = minimal_displacement(&p, &q).components();
        prop_assert!(torus_distance(&p.translate(d), &q) < 1e-15);
    }

    #[test]
    fn skew_map_inverse_round_trip(p in point()) {
        let m = SkewModel::default_skew();
        prop_assert!(torus_distance(&m.apply_inverse(&m.apply(&p)), &p) < 1e-13);
    }

    #[test]
    fn stable_transfer_is_an_antisymmetric_cocycle(p in point(), t1 in small(), t2 in small()) {
        let m = SkewModel::default_skew();
        let vs = m.base().frame().v_s;
        let b = p.base();
        let q = [b[0] + t1 * vs[0], b[1] + t1 * vs[1]];
        let r = [b[0] + (t1 + t2) * vs[0], b[1] + (t1 + t2) * vs[1]];
        let tol = 2.0 * m.series_tol();
        let pq = m.transfer_stable(b, q).unwrap();
        let qr = m.transfer_stable(q, r).unwrap();
        let pr = m.transfer_stable(b, r).unwrap();
        prop_assert!((pq + qr - pr).abs() < tol);
        prop_assert!((pq + m.transfer_stable(q, b).unwrap()).abs() < tol);
    }

    #[test]
    fn unstable_transfer_is_an_antisymmetric_cocycle(p in point(), s1 in small(), s2 in small()) {
        let m = SkewModel::default_skew();
        let vu = m.base().frame().v_u;
        let b = p.base();
        let q = [b[0] + s1 * vu[0], b[1] + s1 * vu[1]];
        let r = [b[0] + (s1 + s2) * vu[0], b[1] + (s1 + s2) * vu[1]];
        let tol = 2.0 * m.series_tol();
        let pq = m.transfer_unstable(b, q).unwrap();
        let qr = m.transfer_unstable(q, r).unwrap();
        let pr = m.transfer_unstable(b, r).unwrap();
        prop_assert!((pq + qr - pr).abs() < tol);
        prop_assert!((pq + m.transfer_unstable(q, b).unwrap()).abs() < tol);
    }

    #[test]
    fn orbit_files_round_trip_bit_exactly(p in point(), seed in any::<u64>(), lo in -20i64..0, hi in 0i64..20) {
        let m = SkewModel::default_skew();
        let o = generate_noisy(&m, p, (lo, hi), 1e-3, seed).unwrap();
        let h = OrbitHeader { model: "default".into(), seed: Some(seed) };
        let mut buf = Vec::new();
        write_orbit(&mut buf, &o, &h).unwrap();
        let (back, hb) = read_orbit(buf.as_slice()).unwrap();
        prop_assert_eq!(back, o);
        prop_assert_eq!(hb, h);
    }
}

proptest! {
    // each case certifies the constants by sampling, so keep the count low
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn parameter_invariants_hold_with_margin(eps in 1e-4..0.3f64) {
        for m in [SkewModel::linear(BaseMatrix::cat()), SkewModel::default_skew()] {
            let p = delta_for_epsilon(&m, eps).unwrap();
            for ineq in p.invariants() {
                prop_assert!(ineq.margin() >= MARGIN * (1.0 - 1e-12), "{} {}", ineq.name, ineq.margin());
            }
        }
    }
}
