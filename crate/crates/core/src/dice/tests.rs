use proptest::prelude::*;

use super::*;
use crate::homeo::{to_unit_interval, MonotoneMap};
use crate::poly::Polynomial;
use crate::rng;
use crate::tournament::{enumerate, preset};

fn die(faces: &[u32]) -> Die {
    Die::new(faces.to_vec()).unwrap()
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// The three dice of the classic 3-cycle.
fn cycle_dice() -> DiceSet {
    DiceSet::new(vec![die(&[3, 5, 7]), die(&[2, 4, 9]), die(&[1, 6, 8])]).unwrap()
}

/// Each face of `d` repeated `times` times.
fn repeat(d: &Die, times: usize) -> Die {
    die(&d.faces().iter().flat_map(|&f| std::iter::repeat_n(f, times)).collect::<Vec<_>>())
}

/// A proper die obtained from the standard one by `steps` random moves
/// `(a, b) → (a+1, b−1)`, which keep the face sum and the value range.
fn random_proper(k: usize, steps: usize, seed: u64) -> Die {
    let mut faces: Vec<u32> = (1..=k as u32).collect();
    let mut g = rng::seeded(seed);
    for _ in 0..steps {
        let i = rng::below(&mut g, k as u64) as usize;
        let j = rng::below(&mut g, k as u64) as usize;
        if faces[i] + 1 < faces[j] {
            faces[i] += 1;
            faces[j] -= 1;
        }
    }
    Die::new(faces).unwrap()
}

fn uniform() -> DistributionFunction {
    to_unit_interval(&MonotoneMap::identity())
}

/// Distribution function of `t + a(1 − t²)`, whose mean is not ½.
fn skewed(a: i64) -> DistributionFunction {
    let t = Polynomial::t();
    let one = Polynomial::constant(Rational::one());
    let p = &t + &(&one - &(&t * &t)).scale(&r(a, 100));
    to_unit_interval(&MonotoneMap::polynomial(p).unwrap())
}

#[test]
fn beat_prob_examples() {
    let c = beat_prob(&die(&[3, 5, 7]), &die(&[2, 4, 9]));
    assert_eq!(c.p, r(5, 9));
    assert_eq!((c.wins, c.ties, c.losses), (5, 0, 4));
    assert_eq!(beat_prob(&die(&[1, 6, 8]), &die(&[3, 5, 7])).p, r(5, 9));
    assert_eq!(beat_prob(&die(&[2, 4, 9]), &die(&[1, 6, 8])).p, r(5, 9));
    let d = Die::standard(6);
    let c = beat_prob(&d, &d);
    assert_eq!((c.wins, c.ties, c.losses), (15, 6, 15));
    let c = beat_prob(&die(&[2, 2, 3]), &die(&[1, 2, 2, 4]));
    // 2 beats {1}, ties {2,2}; 3 beats {1,2,2}
    assert_eq!((c.wins, c.ties, c.losses), (5, 4, 3));
}

#[test]
fn die_validation() {
    assert_eq!(Die::new(vec![]), Err(DiceError::NoFaces));
    assert_eq!(Die::new(vec![1, 0]), Err(DiceError::ZeroFace));
    assert_eq!(die(&[3, 1, 2]).faces(), &[1, 2, 3]);
    assert!(Die::standard(6).is_proper());
    assert!(!die(&[3, 5, 7]).is_proper());
    assert!(!die(&[1, 1, 4]).is_proper());
    assert_eq!(DiceSet::new(vec![Die::standard(3), Die::standard(4)]), Err(DiceError::SideMismatch(3, 4)));
}

#[test]
fn tournament_of_examples() {
    assert_eq!(tournament_of(&cycle_dice()), preset("cycle3").unwrap());
    let rep = verify(&cycle_dice(), &preset("cycle3").unwrap());
    assert_eq!(rep.matches, Some(true));
    assert!(rep.pairs.iter().all(|p| p.margin.abs() == r(1, 18)));
    let twins = DiceSet::new(vec![Die::standard(6), Die::standard(6)]).unwrap();
    assert_eq!(tournament_of(&twins).edge_count(), 0);
    let rep = inspect(&twins, None);
    assert_eq!(rep.unoriented, vec![(1, 2)]);
    assert_eq!(rep.min_margin, Some(r(-1, 12)));
    assert_eq!(rep.matches, None);
    let rep = verify(&twins, &Tournament::from_edges(2, &[(1, 2)]).unwrap());
    assert_eq!(rep.matches, Some(false));
    assert_eq!(rep.mismatches, vec![(1, 2)]);
}

#[test]
fn quantize_examples() {
    // Face k+1 carries the mass of [k/N, (k+1)/N]; the mean repair then
    // shifts the uniform die up to face sum N(N+2)/2 = 24.
    let d = &quantize(&[uniform()], 6).unwrap()[0];
    assert_eq!(d.sides(), 6);
    assert_eq!(d.sum(), 24);
    assert!(d.faces().iter().all(|&f| (1..=6).contains(&f)));
    assert_eq!(quantize(&[uniform()], 7), Err(DiceError::OddN(7)));
    assert_eq!(quantize(&[uniform()], 2), Err(DiceError::TooFewSides(2)));
    for n in [4, 16, 64, 1024] {
        for a in [-25, -10, 0, 10, 25] {
            let d = &quantize(&[skewed(a)], n).unwrap()[0];
            assert_eq!(d.sides(), n);
            assert_eq!(d.sum(), (n * (n + 2) / 2) as u64, "a={a} n={n}");
            assert!(*d.faces().last().unwrap() as usize <= n);
        }
    }
}

#[test]
fn quantize_tracks_the_distribution() {
    // For an odd map the mean is already right, so the die's empirical
    // distribution function stays within a face or two of N·F.
    let t = Polynomial::t();
    let one = Polynomial::constant(Rational::one());
    let odd = &t + &(&t * &(&one - &(&t * &t))).scale(&r(1, 5));
    let f = to_unit_interval(&MonotoneMap::polynomial(odd).unwrap());
    let n = 256;
    let d = &quantize(std::slice::from_ref(&f), n).unwrap()[0];
    let mut seen = 0usize;
    for k in 0..n {
        seen += d.faces().iter().filter(|&&v| v as usize == k + 1).count();
        let target = n as f64 * f.eval((k + 1) as f64 / n as f64).unwrap();
        assert!((seen as f64 - target).abs() <= 2.0, "boundary {k}: {seen} vs {target:.2}");
    }
}

#[test]
fn make_proper_examples() {
    let d = &quantize(&[uniform()], 6).unwrap()[0];
    let p = make_proper(d).unwrap();
    assert_eq!(p.sides(), 7);
    assert_eq!(p.sum(), 28);
    assert!(p.is_proper());
    assert_eq!(p.faces().iter().filter(|&&f| f == 4).count(), d.faces().iter().filter(|&&f| f == 4).count() + 1);
    assert_eq!(make_proper(&Die::standard(6)), Err(DiceError::WrongSum { got: 21, want: 24 }));
    assert_eq!(make_proper(&Die::standard(5)), Err(DiceError::OddN(5)));
}

#[test]
fn make_proper_keeps_large_margins() {
    // The added face only adds wins, so P̂ ≥ p·(N/(N+1))².
    let fs: Vec<_> = [-25, -12, 0, 12, 25].into_iter().map(skewed).collect();
    for n in [16, 32, 64] {
        let dice = quantize(&fs, n).unwrap();
        for a in &dice {
            for b in &dice {
                let p = beat_prob(a, b).p;
                let shrink = r((n * n) as i64, ((n + 1) * (n + 1)) as i64);
                if &p * &shrink > Rational::half() {
                    let q = beat_prob(&make_proper(a).unwrap(), &make_proper(b).unwrap()).p;
                    assert!(q > Rational::half());
                }
            }
        }
    }
}

#[test]
fn extend_examples() {
    for n in [3, 6] {
        for m in 1..4 {
            assert_eq!(extend(&Die::standard(n), m, 0).unwrap(), Die::standard(m * n));
        }
    }
    let d = random_proper(8, 40, 3);
    assert_eq!(extend(&d, 1, 0).unwrap(), d);
    assert_eq!(extend(&d, 1, 8), Err(DiceError::BadS { s: 8, n: 8 }));
    assert_eq!(extend(&d, 0, 1), Err(DiceError::NoBlocks));
    assert_eq!(extend(&die(&[3, 5, 7]), 2, 0), Err(DiceError::NotProper));
    let e = extend(&d, 3, 5).unwrap();
    assert_eq!(e.sides(), 29);
    assert!(e.is_proper());
}

#[test]
fn double_examples() {
    assert_eq!(double(&Die::standard(6)).unwrap(), Die::standard(12));
    // The 3-cycle dice with every face repeated three times are proper 9-sided
    // dice with margin 1/18; doubling halves it exactly.
    let set: Vec<Die> = cycle_dice().dice().iter().map(|d| repeat(d, 3)).collect();
    assert!(set.iter().all(Die::is_proper));
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        assert_eq!(beat_prob(&set[a], &set[b]).p - Rational::half(), r(1, 18));
        let p = beat_prob(&double(&set[a]).unwrap(), &double(&set[b]).unwrap()).p;
        assert_eq!(p - Rational::half(), r(1, 36));
    }
    let d = random_proper(10, 60, 9);
    assert_eq!(double(&double(&d).unwrap()).unwrap(), extend(&d, 4, 0).unwrap());
}

#[test]
fn dice_json_round_trip() {
    let set = cycle_dice();
    let json = set.to_json();
    assert_eq!(json, r#"{"sides":3,"dice":[[3,5,7],[2,4,9],[1,6,8]]}"#);
    assert_eq!(DiceSet::from_json(&json).unwrap(), set);
    assert!(DiceSet::from_json(r#"{"sides":4,"dice":[[3,5,7]]}"#).is_err());
    assert!(DiceSet::from_json(r#"{"sides":3,"dice":[[3,5,7]],"x":1}"#).is_err());
    assert!(DiceSet::from_json(r#"{"sides":3,"dice":[]}"#).is_err());
    let report = serde_json::to_value(verify(&set, &preset("cycle3").unwrap())).unwrap();
    assert_eq!(report["pairs"][0]["p"], "5/9");
    assert_eq!(report["pairs"][0]["margin"], "1/18");
}

fn opts() -> DiceOptions {
    DiceOptions { quad: QuadratureConfig::default(), ..DiceOptions::default() }
}

#[test]
fn synthesize_dice_cycle3() {
    let t = preset("cycle3").unwrap();
    let ds = synthesize_dice(&t, &opts()).unwrap();
    assert!(ds.is_proper());
    assert_eq!(tournament_of(&ds), t);
    let prov = ds.provenance().unwrap();
    assert_eq!(ds.sides(), prov.quantized_sides + 1);
    assert!(prov.escalation.last().unwrap().proper_ok);
}

#[test]
fn synthesize_dice_all_three_vertex_tournaments() {
    for t in enumerate(3) {
        let ds = synthesize_dice(&t, &opts()).unwrap();
        assert!(ds.is_proper());
        assert_eq!(tournament_of(&ds), t);
    }
}

#[test]
fn synthesize_dice_single_vertex() {
    let ds = synthesize_dice(&Tournament::trivial(), &opts()).unwrap();
    assert_eq!(ds.len(), 1);
    assert_eq!(ds.sides(), FIRST_N + 1);
    assert!(ds.is_proper());
}

#[test]
fn synthesize_dice_to_target_sides() {
    let t = preset("cycle3").unwrap();
    let base = synthesize_dice(&t, &opts()).unwrap();
    let k = base.sides();
    let eps = base.provenance().unwrap().proper_margin.clone();
    // Smallest M with 2MKε > 1, and the largest S allowed with it.
    let mut m = 1;
    while Rational::from_integer(2 * m * k as i64) * &eps <= Rational::one() {
        m += 1;
    }
    let target = m as usize * k + k - 1;
    let ds = synthesize_dice(&t, &DiceOptions { target_sides: Some(target), ..opts() }).unwrap();
    assert_eq!(ds.sides(), target);
    assert!(ds.is_proper());
    assert_eq!(tournament_of(&ds), t);
    assert_eq!(ds.provenance().unwrap().extension, Some((m as usize, k - 1)));
    let small = synthesize_dice(&t, &DiceOptions { target_sides: Some(k - 1), ..opts() });
    assert!(matches!(small, Err(DiceError::TargetUnreachable { .. })));
}

#[test]
fn synthesize_dice_reports_exhaustion() {
    let t = preset("rps5").unwrap();
    let r = synthesize_dice(&t, &DiceOptions { max_n: 16, ..opts() });
    assert!(matches!(r, Err(DiceError::SynthesisFailure(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_are_consistent(a in proptest::collection::vec(1u32..20, 1..30),
                             b in proptest::collection::vec(1u32..20, 1..30)) {
        let (da, db) = (Die::new(a.clone()).unwrap(), Die::new(b.clone()).unwrap());
        let x = beat_prob(&da, &db);
        let y = beat_prob(&db, &da);
        prop_assert_eq!(x.wins + x.ties + x.losses, (a.len() * b.len()) as u64);
        prop_assert_eq!(x.wins, y.losses);
        prop_assert_eq!(x.ties, y.ties);
        let brute = a.iter().flat_map(|p| b.iter().map(move |q| (p, q))).filter(|(p, q)| p > q).count();
        prop_assert_eq!(x.wins, brute as u64);
    }

    #[test]
    fn extension_margin_formula(k in 2usize..12, s1 in any::<u64>(), s2 in any::<u64>(),
                                m in 1usize..6, s in 0usize..12) {
        let s = s % k;
        let (a, b) = (random_proper(k, 5 * k, s1), random_proper(k, 5 * k, s2));
        let eps = beat_prob(&a, &b).p - Rational::half();
        let (ea, eb) = (extend(&a, m, s).unwrap(), extend(&b, m, s).unwrap());
        prop_assert!(ea.is_proper() && eb.is_proper());
        let got = beat_prob(&ea, &eb).p - Rational::half();
        let total = (m * k + s) as i64;
        let want = (Rational::from_integer((m * k * k) as i64) * &eps - r(s as i64, 2))
            / Rational::from_integer(total * total);
        prop_assert_eq!(&got, &want);
        if s == 0 {
            prop_assert_eq!(got, eps / Rational::from_integer(m as i64));
        }
    }

    #[test]
    fn make_proper_preserves_properness(a in -25i64..=25, n in 2usize..40) {
        let n = 2 * n;
        let d = &quantize(&[skewed(a)], n).unwrap()[0];
        let p = make_proper(d).unwrap();
        prop_assert!(p.is_proper());
        prop_assert!(double(&p).unwrap().is_proper());
    }
}
