use super::*;
use crate::homeo::{integral, q, QuadratureConfig};
use crate::tournament::{enumerate, preset};

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| -1.0 + 2.0 * k as f64 / (n - 1) as f64)
}

#[test]
fn legendre_examples() {
    assert_eq!(legendre(0), Polynomial::constant(Rational::one()));
    let l2 = legendre(2);
    assert_eq!(l2.coeffs(), vec![r(-1, 2), r(0, 1), r(3, 2)]);
    assert!(l2.integral().is_zero());
    assert!(legendre(4).inner_product(&l2).is_zero());
}

#[test]
fn special_sequence_examples() {
    let s = special_sequence(6).unwrap();
    assert_eq!(s.len(), 6);
    assert!(s.p(1).eval(&Rational::one()).is_zero());
    assert!(s.p(1).inner_product(s.p(2)).is_zero());
    assert_eq!(s.norm_sq(1), r(7, 180));
    for i in 1..=6i64 {
        // ∫ℓ_m² = 2/(2m+1) and orthogonality of ℓ_{4i}, ℓ_{4i−2}.
        let want = r(1, 16) * (r(2, 8 * i + 1) + r(2, 8 * i - 3));
        assert_eq!(s.norm_sq(i as usize), want);
        assert_eq!(s.c(i as usize), &r(1, 4));
    }
    assert!(special_sequence(0).is_err());
}

#[test]
fn sup_norms_are_at_most_half() {
    let s = special_sequence(6).unwrap();
    for i in 1..=6 {
        let b = sup_norm_bound(&s.p(i).to_series());
        assert!(b <= 0.5, "p_{i}: {b}");
        assert!(b > 0.05);
    }
}

#[test]
fn associated_maps_examples() {
    let s = special_sequence(5).unwrap();
    let g = associated_maps(&s).unwrap();
    let one = Rational::one();
    for i in 1..=5 {
        let p = g.poly(i);
        assert_eq!(p.eval(&one), one);
        assert_eq!(p.eval(&-one.clone()), -one.clone());
        assert!(p.eval(&Rational::zero()).is_zero());
        assert!(p.is_odd());
        for t in grid(2001) {
            let d = g.map(i).derivative(t).unwrap();
            assert!((0.5..=1.5).contains(&d), "g_{i}'({t}) = {d}");
        }
    }
}

#[test]
fn eta_xi_examples() {
    let s = special_sequence(3).unwrap();
    let g = associated_maps(&s).unwrap();
    let c = preset("cycle3").unwrap();

    let first = eta_xi(&c, 1, &s, &g).unwrap();
    assert!(first.eta.is_zero());
    assert!(grid(21).all(|t| first.xi(t).unwrap() == 0.0));

    let third = eta_xi(&c, 3, &s, &g).unwrap();
    assert_eq!(third.eta, s.p(1) - s.p(2));
    let one = Polynomial::constant(Rational::one());
    assert_eq!((&one + s.p(1)).inner_product(&third.eta), s.norm_sq(1));
    assert_eq!((&one + s.p(2)).inner_product(&third.eta), -s.norm_sq(2));

    assert!(third.xi(1.0).unwrap().abs() < 1e-15 && third.xi(-1.0).unwrap().abs() < 1e-15);
    let int = homeo::integrate(
        |t| {
            third.xi(t).map_err(|e| match e {
                SynthError::Homeo(h) => h,
                other => panic!("{other}"),
            })
        },
        -1.0,
        1.0,
        &[],
        &cfg(),
    )
    .unwrap();
    assert!(int.abs() < 1e-10, "∫ξ = {int}");
}

#[test]
fn choose_z_examples() {
    let s = special_sequence(3).unwrap();
    let g = associated_maps(&s).unwrap();
    let c = preset("cycle3").unwrap();
    let first = choose_z(&c, 1, &s, &g, 0.05, &cfg()).unwrap();
    assert_eq!(first.z, 0.0);
    assert_eq!(first.map.eval(0.3).unwrap(), g.map(1).eval(0.3).unwrap());

    let third = choose_z(&c, 3, &s, &g, 0.05, &cfg()).unwrap();
    assert!(third.z > 0.0);
    assert!(q(g.map(1), &third.map, &cfg()).unwrap() > 0.0);
    assert!(q(g.map(2), &third.map, &cfg()).unwrap() < 0.0);
    assert!(third.distance < 0.05);
    let (lo, hi) = third.map.deriv_bounds();
    assert!(lo > 1.0 / 3.0 && hi < 3.0);

    let fam = eta_xi(&c, 3, &s, &g).unwrap().family;
    let anchor = MonotoneMap::perturbed(&fam, 0.0).unwrap().inverse();
    for j in 1..=2 {
        assert!(q(g.map(j), &anchor, &cfg()).unwrap().abs() < 1e-10);
    }
}

#[test]
fn linearization_slope() {
    let s = special_sequence(5).unwrap();
    let g = associated_maps(&s).unwrap();
    let t = preset("rps5").unwrap();
    let z = 1e-3;
    for m in 2..=5 {
        let fam = eta_xi(&t, m, &s, &g).unwrap().family;
        let f = MonotoneMap::perturbed(&fam, z).unwrap().inverse();
        for j in 1..m {
            let slope = q(g.map(j), &f, &cfg()).unwrap() / z;
            let want = s.norm_sq(j).to_f64() * if t.beats(m, j) { 1.0 } else { -1.0 };
            assert!((slope - want).abs() <= 0.1 * want.abs(), "m={m} j={j}: {slope} vs {want}");
        }
    }
}

fn check_result(t: &Tournament, res: &SynthResult, eps: f64) {
    let n = t.n();
    assert_eq!(res.tuple.len(), n);
    assert!(res.achieved_eps < eps);
    let s = special_sequence(n).unwrap();
    let g = associated_maps(&s).unwrap();
    for (i, f) in res.tuple.iter().enumerate() {
        assert!((f.eval(1.0).unwrap() - 1.0).abs() <= 1e-10);
        assert!((f.eval(-1.0).unwrap() + 1.0).abs() <= 1e-10);
        assert!(integral(f, &cfg()).unwrap().abs() <= 1e-8);
        let mut dist: f64 = 0.0;
        for x in grid(2001) {
            let d = f.derivative(x).unwrap();
            assert!(d > 1.0 / 3.0 && d < 3.0);
            dist = dist.max((f.eval(x).unwrap() - g.map(i + 1).eval(x).unwrap()).abs());
        }
        assert!(dist < eps);
    }
    // Independent recomputation of every pairing.
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                let v = q(&res.tuple[j - 1], &res.tuple[i - 1], &cfg()).unwrap();
                assert_eq!(v > 0.0, t.beats(i, j), "Q(f_{j}, f_{i}) = {v}");
                assert!(v.abs() >= res.margin_floor - 1e-9);
            }
        }
    }
    assert!(res.margin_floor > 0.0 || n == 1);
    assert_eq!(res.z_values.len(), n);
}

#[test]
fn synthesize_single_vertex() {
    let t = Tournament::trivial();
    let res = synthesize(&t, 0.05, &cfg()).unwrap();
    assert_eq!(res.tuple.len(), 1);
    assert_eq!(res.achieved_eps, 0.0);
    check_result(&t, &res, 0.05);
}

#[test]
fn synthesize_cycle3() {
    let t = preset("cycle3").unwrap();
    let res = synthesize(&t, 0.05, &cfg()).unwrap();
    check_result(&t, &res, 0.05);
}

#[test]
fn synthesize_rps5() {
    let t = preset("rps5").unwrap();
    let res = synthesize(&t, DEFAULT_EPS, &cfg()).unwrap();
    check_result(&t, &res, DEFAULT_EPS);
    assert_eq!(res.levels.len(), 5);
}

#[test]
fn synthesize_all_four_vertex_tournaments() {
    for t in enumerate(4) {
        let res = synthesize(&t, 0.05, &cfg()).unwrap();
        check_result(&t, &res, 0.05);
    }
}

#[test]
fn rejects_bad_budget() {
    let t = Tournament::trivial();
    assert_eq!(synthesize(&t, 0.0, &cfg()).unwrap_err(), SynthError::InvalidEps(0.0));
    assert!(synthesize(&t, f64::NAN, &cfg()).is_err());
}
