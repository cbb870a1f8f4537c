use num_traits::Zero;
use proptest::prelude::*;
use pvlab_core::exact::{binomial_usize, int, ratio, Rational};
use pvlab_core::seeding::task_rng;
use pvlab_core::transversality::{
    find_nonvanishing_minor, full_collection, required_minor_order, restrict_matrix, square_transversality_probe,
    taylor_projection, verify_conjecture_samples, Subspace, HEURISTIC_LABEL,
};
use pvlab_core::{MonomialSystem, Poly, RatMatrix};
use rand::Rng;

fn random_rational(rng: &mut impl Rng) -> Rational {
    ratio(rng.gen_range(-30..=30), rng.gen_range(1..=12))
}

/// Second-order Taylor data of `sum c r^i s^j` at `(a, b)`, from binomial expansion
/// of each monomial, rewritten in the basis `r, s, r^2, rs, s^2`.
fn expanded_projection(terms: &[(u32, u32, Rational)], a: &Rational, b: &Rational) -> Vec<Rational> {
    let pw = |x: &Rational, e: i64| {
        if e < 0 {
            Rational::zero()
        } else {
            num_traits::pow(x.clone(), e as usize)
        }
    };
    let choose = |n: u32, k: u32| {
        if k > n {
            0
        } else {
            binomial_usize(n as usize, k as usize) as i64
        }
    };
    // c[p][q] = coefficient of x^p y^q in f(a + x, b + y)
    let mut c = [
        [Rational::zero(), Rational::zero(), Rational::zero()],
        [Rational::zero(), Rational::zero(), Rational::zero()],
        [Rational::zero(), Rational::zero(), Rational::zero()],
    ];
    for (i, j, coef) in terms {
        for p in 0..=2u32 {
            for q in 0..=(2 - p) {
                let v = coef
                    * int(choose(*i, p) * choose(*j, q))
                    * pw(a, *i as i64 - p as i64)
                    * pw(b, *j as i64 - q as i64);
                c[p as usize][q as usize] += v;
            }
        }
    }
    vec![
        &c[1][0] - int(2) * a * &c[2][0] - b * &c[1][1],
        &c[0][1] - int(2) * b * &c[0][2] - a * &c[1][1],
        c[2][0].clone(),
        c[1][1].clone(),
        c[0][2].clone(),
    ]
}

#[test]
fn projection_matches_binomial_expansion() {
    let mut rng = task_rng(1, &[]);
    for _ in 0..20 {
        let terms: Vec<(u32, u32, Rational)> = (0..6)
            .map(|_| (rng.gen_range(0..=4), rng.gen_range(0..=4), random_rational(&mut rng)))
            .collect();
        let f = terms.iter().fold(Poly::zero(2), |acc, (i, j, c)| {
            &acc + &Poly::monomial(vec![*i, *j], c.clone())
        });
        let (a, b) = (random_rational(&mut rng), random_rational(&mut rng));
        assert_eq!(
            taylor_projection((&a, &b), &f).unwrap(),
            expanded_projection(&terms, &a, &b)
        );
    }
}

#[test]
fn certificates_reverify_against_matrix() {
    let sys = MonomialSystem::new(2, 3).unwrap();
    let m = sys.derivative_matrix(2).unwrap();
    let mut rng = task_rng(4, &[]);
    for dim in [2, 4, 6] {
        let v = Subspace::random(9, dim, 9, &mut rng).unwrap();
        let mv = restrict_matrix(&m, &v).unwrap();
        let order = required_minor_order(dim, 2, 3, 2).unwrap().order;
        let cert = find_nonvanishing_minor(&mv, order, 7).unwrap().expect("certificate");
        assert!(cert.verify_against(&mv));
    }
}

#[test]
fn conjecture_report_is_seed_deterministic() {
    let a = verify_conjecture_samples(2, 3, 1, &[3, 5], 10, 9, 9).unwrap();
    let b = verify_conjecture_samples(2, 3, 1, &[3, 5], 10, 9, 9).unwrap();
    assert_eq!(a, b);
    assert!(a.all_certified());
    assert!(verify_conjecture_samples(3, 3, 1, &[3], 1, 0, 9).is_err());
}

#[test]
fn square_probe_is_labelled_and_deterministic() {
    let sq = full_collection(5);
    let a = square_transversality_probe(5, &sq, 2, 50, 4, 3, &[]).unwrap();
    let b = square_transversality_probe(5, &sq, 2, 50, 4, 3, &[]).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.label, HEURISTIC_LABEL);
    assert!(a.estimate >= 0.0);
    assert!(square_transversality_probe(5, &sq[..4], 2, 10, 4, 3, &[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn restriction_rank_is_basis_invariant(seed in 0u64..10_000, dim in 1usize..=9, l in 1u32..=2) {
        let sys = MonomialSystem::new(2, 3).unwrap();
        let m = sys.derivative_matrix(l).unwrap();
        let mut rng = task_rng(seed, &[]);
        let v = Subspace::random(9, dim, 9, &mut rng).unwrap();
        let t = loop {
            let rows: Vec<Vec<Rational>> = (0..dim)
                .map(|_| (0..dim).map(|_| int(rng.gen_range(-5..=5))).collect())
                .collect();
            let t = RatMatrix::from_rows(rows).unwrap();
            if !t.determinant().unwrap().is_zero() {
                break t;
            }
        };
        let w = v.recombine(&t).unwrap();
        let (mv, mw) = (restrict_matrix(&m, &v).unwrap(), restrict_matrix(&m, &w).unwrap());
        for _ in 0..10 {
            let pt = vec![random_rational(&mut rng), random_rational(&mut rng)];
            prop_assert_eq!(mv.eval(&pt).rank(), mw.eval(&pt).rank());
        }
    }
}
