use super::*;
use approx::assert_relative_eq;

fn sup_diff(a: &RadialProfile, b: &RadialProfile) -> f64 {
    a.u.iter().zip(&b.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn ball_volumes() {
    assert_relative_eq!(ball_volume(3), 4.0 * std::f64::consts::PI / 3.0, epsilon = 1e-15);
    assert_relative_eq!(ball_volume(4), std::f64::consts::PI.powi(2) / 2.0, epsilon = 1e-15);
}

#[test]
fn closed_form_values() {
    let (u0, _) = closed_form_q1_at(2, 0.0);
    assert_eq!(u0, 0.125);
    assert!(closed_form_q1_at(2, std::f64::consts::FRAC_1_SQRT_2).0.abs() < 1e-16);
    assert_relative_eq!(closed_form_q1_at(2, 1.0).0, 0.125 - 2f64.ln() / 4.0, epsilon = 1e-15);
    assert_relative_eq!(closed_form_q1_at(3, 0.0).0, 2f64.powf(-2.0 / 3.0) / 6.0, epsilon = 1e-15);
    for n in 2..=8 {
        let a = nodal_radius(n);
        let left = closed_form_q1_at(n, a * (1.0 - 1e-12));
        let right = closed_form_q1_at(n, a * (1.0 + 1e-12));
        assert!((left.0 - right.0).abs() < 1e-11 && (left.1 - right.1).abs() < 1e-11);
        assert!(closed_form_q1_at(n, 1.0).1.abs() < 1e-15);
    }
}

#[test]
fn closed_form_is_decreasing_with_one_zero() {
    for n in 2..=8 {
        let p = closed_form_q1(n, &radial_grid(2000)).unwrap();
        assert!(p.u.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(p.u.windows(2).filter(|w| w[0] * w[1] < 0.0).count(), 1);
    }
}

#[test]
fn residual_of_closed_form() {
    let p = closed_form_q1(2, &radial_grid(2000)).unwrap();
    assert!(radial_residual(&p).unwrap() <= 1e-8);
    let zero = RadialProfile { u: vec![0.0; p.len()], du: vec![0.0; p.len()], ..p.clone() };
    assert_eq!(radial_residual(&zero).unwrap(), 0.0);
    let short = RadialProfile { r: vec![0.5, 1.0], u: vec![0.0; 2], du: vec![0.0; 2], ..p };
    assert!(matches!(radial_residual(&short), Err(Error::TooFewSamples { .. })));
}

#[test]
fn residual_scales_with_noise() {
    let base = closed_form_q1(2, &radial_grid(200)).unwrap();
    let noisy = |eps: f64| {
        let mut p = base.clone();
        for (i, v) in p.u.iter_mut().enumerate() {
            *v += eps * if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        radial_residual(&p).unwrap()
    };
    let (a, b) = (noisy(1e-7), noisy(1e-6));
    let h = 1.0 / 200.0;
    assert!(b > 5.0 * a);
    assert!(b > 1e-6 / (h * h));
}

#[test]
fn shooting_reproduces_closed_forms() {
    let p = shoot(1.0, 2, 0.125, 1e-13).unwrap();
    assert!(p.du.last().unwrap().abs() <= 1e-8);
    let exact = closed_form_q1(2, &p.r).unwrap();
    assert!(sup_diff(&p, &exact) <= 1e-6);
    let a = nodal_radius(3);
    let p3 = shoot(1.0, 3, a * a / 6.0, 1e-13).unwrap();
    assert!(sup_diff(&p3, &closed_form_q1(3, &p3.r).unwrap()) <= 1e-6);
}

#[test]
fn shooting_is_odd() {
    for q in [1.0, 1.5] {
        let p = shoot(q, 3, 0.3, 1e-10).unwrap();
        let m = shoot(q, 3, -0.3, 1e-10).unwrap();
        assert_eq!(m, p.negated());
    }
}

#[test]
fn neumann_shooting_q1_matches_closed_forms() {
    for n in 2..=8 {
        let p = shoot_neumann(1.0, n, 1e-8).unwrap();
        assert_eq!(p.zeros.len(), 1);
        let exact = closed_form_q1(n, &p.r).unwrap();
        assert!(sup_diff(&p, &exact) <= 1e-6, "N = {n}");
    }
}

#[test]
fn neumann_shooting_sublinear() {
    let p = shoot_neumann(1.5, 2, 1e-8).unwrap();
    assert!(p.du.last().unwrap().abs() <= 1e-8);
    assert_eq!(p.zeros.len(), 1);
    assert!(radial_energy(&p).unwrap().energy < 0.0);
}

#[test]
fn liouville_endpoints_and_residual() {
    let grid = radial_grid(4000);
    for n in [2, 3] {
        let l = liouville_transform(&closed_form_q1(n, &grid).unwrap()).unwrap();
        assert_eq!(l.t[0], 1.0);
        assert!(l.residual <= 1e-6, "N = {n}: {}", l.residual);
    }
    let half = RadialProfile { dim: 3, q: 1.0, r: vec![0.5], u: vec![0.0], du: vec![0.0], zeros: vec![] };
    assert_relative_eq!(liouville_transform(&half).unwrap().t[0], 2.0, epsilon = 1e-15);
}

#[test]
fn m_r_values() {
    assert_relative_eq!(m_radial(2, 1.0).unwrap(), -0.0758486, epsilon = 1.5e-7);
    assert_relative_eq!(m_radial(3, 1.0).unwrap(), -0.062746, epsilon = 5e-6);
    for n in 2..=8 {
        let direct = closed_form_energy(n).unwrap();
        let sampled = radial_energy(&closed_form_q1(n, &radial_grid(2000)).unwrap()).unwrap();
        let m = m_radial(n, 1.0).unwrap();
        assert_relative_eq!(direct.energy, m, max_relative = 1e-10);
        assert_relative_eq!(sampled.energy, m, max_relative = 1e-6);
    }
    let target = 2.0 * std::f64::consts::PI * (-1.0 / 16.0 + 2f64.ln() / 8.0);
    let e = radial_energy(&closed_form_q1(2, &radial_grid(2000)).unwrap()).unwrap();
    assert_relative_eq!(e.dirichlet, target, max_relative = 1e-6);
    assert_relative_eq!(e.lq, target, max_relative = 1e-6);
    assert!(matches!(m_radial(1, 1.0), Err(Error::UnsupportedDimension(1))));
}

#[test]
fn test_function_bounds() {
    let pi = std::f64::consts::PI;
    assert_relative_eq!(test_function_bound(2, 0.0).unwrap(), -pi / 18.0, epsilon = 1e-15);
    assert_relative_eq!(test_function_bound(3, -1.0).unwrap(), -pi / 27.0, epsilon = 1e-15);
    assert!(matches!(test_function_bound(2, -1.0), Err(Error::SOutOfRange(_))));
    for n in 2..=10 {
        for k in 0..40 {
            let s = -(n as f64) / 2.0 + 0.01 + 0.2 * k as f64;
            assert!(test_function_bound(n, s).unwrap() < 0.0);
        }
    }
}

#[test]
fn inequality_chain() {
    let c = check_inequality_chain(3).unwrap();
    assert!(c.holds && c.sufficient);
    assert_relative_eq!(c.h3, (5.0 * 2f64.cbrt() - 7.0) / 3.0, epsilon = 1e-15);
    assert!((c.h3 + 0.23346).abs() < 1e-5);
    for n in 3..=10 {
        let c = check_inequality_chain(n).unwrap();
        assert!(c.holds && c.sufficient == c.holds, "N = {n}");
    }
    assert!(test_function_bound(2, 0.0).unwrap() < m_radial(2, 1.0).unwrap());
    assert!(check_inequality_chain(2).is_err());
}

#[test]
fn h_monotone() {
    for n in [2, 5] {
        assert!(h_energy_monotone(&closed_form_q1(n, &radial_grid(1000)).unwrap()).unwrap().monotone);
    }
    let p = closed_form_q1(2, &radial_grid(10)).unwrap();
    let zero = RadialProfile { u: vec![0.0; p.len()], du: vec![0.0; p.len()], ..p.clone() };
    assert_eq!(h_energy_monotone(&zero).unwrap().max_increase, 0.0);
    let wrong = RadialProfile { q: 1.5, ..p };
    assert!(matches!(h_energy_monotone(&wrong), Err(Error::WrongQ(_))));
}
