use csc_core::ephemeris::*;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn snap(body: Body, mu: f64, r: [f64; 3]) -> BodySnapshot {
    BodySnapshot { body, mu, r }
}

fn norm(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Direct minus indirect term in Cartesian coordinates.
fn tidal(r: &[f64; 3], rj: &[f64; 3], mu: f64) -> [f64; 3] {
    let d = [rj[0] - r[0], rj[1] - r[1], rj[2] - r[2]];
    let dn = norm(&d).powi(3);
    let jn = norm(rj).powi(3);
    [mu * (d[0] / dn - rj[0] / jn), mu * (d[1] / dn - rj[1] / jn), mu * (d[2] / dn - rj[2] / jn)]
}

#[test]
fn collinear_far_side_matches_independent_expression() {
    let rj = [5.2, 0.0, 0.0];
    let mu = 9.5e-4;
    let r = [7.0, 0.0, 0.0];
    let v = [0.0, 0.4, 0.0];
    let a = secondary_body_accel(&r, &v, &[snap(Body::Jupiter, mu, rj)], PerturbationForm::Standard, 1e-6).unwrap();
    // Spacecraft beyond the body on the x axis: LVLH radial is +x.
    let want = mu * (-1.0 / (1.8f64 * 1.8) - 1.0 / (5.2f64 * 5.2));
    assert!((a[0] - want).abs() < 1e-15, "{} vs {want}", a[0]);
    assert!(a[1].abs() < 1e-18 && a[2].abs() < 1e-18);
}

#[test]
fn decays_far_from_body() {
    let rj = [1.0, 0.5, 0.1];
    let mu = 3e-6;
    let indirect = [-mu * rj[0] / norm(&rj).powi(3), -mu * rj[1] / norm(&rj).powi(3), -mu * rj[2] / norm(&rj).powi(3)];
    for axis in 0..3 {
        let mut prev = f64::INFINITY;
        for dist in [10.0, 100.0, 1000.0] {
            let mut r = rj;
            r[axis] += dist;
            let a = third_body_accel_inertial(&r, &[snap(Body::Earth, mu, rj)], PerturbationForm::Standard, 1e-6).unwrap();
            let direct = norm(&[a[0] - indirect[0], a[1] - indirect[1], a[2] - indirect[2]]);
            assert!((direct - mu / (dist * dist)).abs() <= 1e-12 * mu);
            assert!(direct < prev);
            prev = direct;
        }
    }
}

#[test]
fn direct_term_vanishes_with_distance() {
    // The tidal sum tends to the indirect term only; the body-relative part decays as 1/d².
    let rj = [1.0, 0.0, 0.0];
    let ind = [-3e-6, 0.0, 0.0];
    let mut prev = f64::INFINITY;
    for d in [10.0, 100.0, 1000.0] {
        let r = [1.0 + d, 0.0, 0.0];
        let a = third_body_accel_inertial(&r, &[snap(Body::Earth, 3e-6, rj)], PerturbationForm::Standard, 1e-6).unwrap();
        let rest = norm(&[a[0] - ind[0], a[1] - ind[1], a[2] - ind[2]]);
        assert!(rest < prev);
        prev = rest;
    }
    assert!(prev < 1e-11);
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    [-6.0f64..6.0, -6.0f64..6.0, -1.0f64..1.0]
}

proptest! {
    #[test]
    fn additive_over_disjoint_sets(r in vec3(), v in vec3(), a in vec3(), b in vec3(), c in vec3()) {
        prop_assume!(norm(&r) > 0.1 && norm(&a) > 0.1 && norm(&b) > 0.1 && norm(&c) > 0.1);
        let d = |x: &[f64; 3]| norm(&[x[0] - r[0], x[1] - r[1], x[2] - r[2]]);
        prop_assume!(d(&a) > 0.05 && d(&b) > 0.05 && d(&c) > 0.05);
        let h = [r[1] * v[2] - r[2] * v[1], r[2] * v[0] - r[0] * v[2], r[0] * v[1] - r[1] * v[0]];
        prop_assume!(norm(&h) > 1e-3 * norm(&r) * norm(&v));
        let s1 = vec![snap(Body::Venus, 2e-6, a)];
        let s2 = vec![snap(Body::Jupiter, 9e-4, b), snap(Body::Saturn, 3e-4, c)];
        let all: Vec<_> = s1.iter().chain(s2.iter()).cloned().collect();
        let f = |s: &[BodySnapshot]| secondary_body_accel(&r, &v, s, PerturbationForm::Standard, 1e-6).unwrap();
        let (x, y, z) = (f(&s1), f(&s2), f(&all));
        for i in 0..3 {
            prop_assert!((x[i] + y[i] - z[i]).abs() <= 1e-12 * norm(&z).max(1e-12));
        }
        let inertial = third_body_accel_inertial(&r, &all, PerturbationForm::Standard, 1e-6).unwrap();
        let want = [tidal(&r, &a, 2e-6), tidal(&r, &b, 9e-4), tidal(&r, &c, 3e-4)];
        for i in 0..3 {
            let s = want[0][i] + want[1][i] + want[2][i];
            prop_assert!((inertial[i] - s).abs() <= 1e-12 * norm(&inertial).max(1e-12));
        }
    }

    #[test]
    fn lagrange_reproduces_polynomials(order in 2usize..9, coef in prop::array::uniform4(-1.0f64..1.0), q in 0.0f64..1.0) {
        let n = order + 6;
        let poly = |t: f64| (0..=order.min(3)).map(|k| coef[k] * t.powi(k as i32)).sum::<f64>() + if order > 3 { 1e-3 * t.powi(order as i32) } else { 0.0 };
        let ep: Vec<f64> = (0..n).map(|i| 2_456_000.0 + i as f64).collect();
        let st: Vec<[f64; 6]> = (0..n).map(|i| [poly(i as f64 / n as f64); 6]).collect();
        let table = EphemerisTable::new(BTreeMap::from([(Body::Mars, ep)]), BTreeMap::from([(Body::Mars, st)]), order).unwrap();
        let jd = 2_456_000.0 + q * (n - 1) as f64;
        let t = jd - 2_456_000.0;
        let s = table.state_at(Body::Mars, jd).unwrap();
        let want = poly(t / n as f64);
        prop_assert!((s.r[0] - want).abs() <= 1e-12 * want.abs().max(1.0), "{} vs {}", s.r[0], want);
    }
}

#[test]
fn literal_form_adds_central_pull_to_the_direct_term() {
    let rj = [5.2, 0.0, 0.0];
    let mu = 9.5e-4;
    let r = [7.0, 0.0, 0.0];
    let s = [snap(Body::Jupiter, mu, rj)];
    let a = third_body_accel_inertial(&r, &s, PerturbationForm::AsPrinted, 1e-6).unwrap();
    // Both terms point towards the origin for a spacecraft beyond the body.
    let want = -mu * (1.0 / 49.0 + 1.0 / (1.8f64 * 1.8));
    assert!((a[0] - want).abs() < 1e-15, "{} vs {want}", a[0]);
    let b = third_body_accel_inertial(&r, &s, PerturbationForm::Standard, 1e-6).unwrap();
    assert!((a[0] - b[0] - mu * (1.0 / (5.2f64 * 5.2) - 1.0 / 49.0)).abs() < 1e-15);
}
