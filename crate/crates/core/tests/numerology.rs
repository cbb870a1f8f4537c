use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use pvlab_core::exact::{int, ratio, Rational};
use pvlab_core::numerology::{
    closed_form_sums, eta, lambda0, max_admissible_u, p_threshold, sequences, series_sums, solve_alphas, EtaParams,
};

fn p_strategy() -> impl Strategy<Value = Rational> {
    (1i64..=2000, 1i64..=100).prop_map(|(a, b)| ratio(72, 5) + ratio(a, b))
}

#[test]
fn threshold_rejects_small_p() {
    assert!(solve_alphas(&p_threshold()).is_err());
    assert!(solve_alphas(&int(14)).is_err());
}

#[test]
fn series_error_exactly_when_ratio_reaches_one() {
    for p in 15..=400 {
        let p = int(p);
        let c = solve_alphas(&p).unwrap();
        assert_eq!(
            series_sums(&p).is_err(),
            c.convergence_ratio() >= Rational::one(),
            "p={p}"
        );
    }
}

#[test]
fn finite_sums_increase_to_limits() {
    let p = int(20);
    let lim = series_sums(&p).unwrap();
    let mut prev = Rational::zero();
    for r in 1..=40 {
        let seq = sequences(&p, r).unwrap();
        let t = seq.sum_b_tau();
        assert!(t > prev && t < lim.s_btau);
        prev = t;
    }
}

#[test]
fn eta_rejects_inadmissible_u() {
    let params = EtaParams {
        p: int(20),
        mu: int(0),
        u: &max_admissible_u(3, 2) * int(2),
        r: 3,
        m: 2,
        eta_p: ratio(91, 100),
    };
    assert!(eta(&params).is_err());
    let ok = EtaParams {
        u: max_admissible_u(3, 2),
        ..params
    };
    let rep = eta(&ok).unwrap();
    assert_eq!(rep.lambda0, lambda0(&int(20)).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn alphas_satisfy_system(p in p_strategy()) {
        let c = solve_alphas(&p).unwrap();
        prop_assert!(c.residuals().iter().all(Zero::is_zero));
        prop_assert!(c.all_in_unit_interval());
    }

    #[test]
    fn partition_of_unity(p in p_strategy(), r in 1usize..=30) {
        prop_assert!(sequences(&p, r).unwrap().partition_sum().is_one());
    }

    #[test]
    fn series_match_closed_forms(p in p_strategy()) {
        if let Ok(s) = series_sums(&p) {
            prop_assert_eq!(s, closed_form_sums(&p));
        }
    }

    #[test]
    fn lambda0_positive(p in p_strategy()) {
        if let Ok(l) = lambda0(&p) {
            prop_assert!(l.is_positive());
        }
    }
}
