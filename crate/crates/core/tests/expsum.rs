use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use proptest::prelude::*;
use pvlab_core::counting::{count_j, CountConfig};
use pvlab_core::exact::ratio;
use pvlab_core::expsum::box_lower_probe;
use pvlab_core::expsum::{
    eval_exp_sum, quadrature_moment, Coefficients, ExpSumSpec, GridSpec, MomentMethod, QuadConfig,
};
use pvlab_core::MonomialSystem;

fn quad(method: MomentMethod) -> QuadConfig {
    QuadConfig {
        method,
        ..QuadConfig::default()
    }
}

fn weighted(sys: &MonomialSystem, n: u64, seed: u64) -> ExpSumSpec {
    let mut rng = pvlab_core::seeding::task_rng(seed, &[]);
    use rand::Rng;
    let mut map = BTreeMap::new();
    let mut t = vec![1u64; sys.d()];
    loop {
        map.insert(
            t.clone(),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
        let mut i = 0;
        while i < t.len() && t[i] == n {
            t[i] = 1;
            i += 1;
        }
        if i == t.len() {
            break;
        }
        t[i] += 1;
    }
    ExpSumSpec::new(sys.clone(), n, Coefficients::Map(map)).unwrap()
}

/// `sum_v |sum_{Phi(t)+Phi(t')=v} a_t a_t'|^2`, the exact fourth moment.
fn fourth_moment_oracle(spec: &ExpSumSpec) -> f64 {
    let Coefficients::Map(m) = &spec.coeffs else {
        unreachable!()
    };
    let mut g: HashMap<Vec<u128>, Complex64> = HashMap::new();
    for (t1, a1) in m {
        for (t2, a2) in m {
            let v: Vec<u128> = spec
                .sys
                .phi_eval_u128(t1)
                .iter()
                .zip(spec.sys.phi_eval_u128(t2))
                .map(|(x, y)| x + y)
                .collect();
            *g.entry(v).or_insert(Complex64::new(0.0, 0.0)) += a1 * a2;
        }
    }
    g.values().map(|z| z.norm_sqr()).sum()
}

#[test]
fn unit_coefficients_recover_counts() {
    let cfg = CountConfig::default();
    for (d, k, n, p) in [(1, 2, 4, 4), (1, 3, 3, 6), (2, 2, 2, 4)] {
        let sys = MonomialSystem::new(d, k).unwrap();
        let spec = ExpSumSpec::ones(sys.clone(), n).unwrap();
        let grid = GridSpec::adequate(&sys, n, p);
        let m = quadrature_moment(&spec, p, &grid, &QuadConfig::default()).unwrap();
        let j: f64 = count_j(&sys, (p / 2) as usize, n, &cfg)
            .unwrap()
            .j
            .to_string()
            .parse()
            .unwrap();
        assert!(m.exact);
        assert!((m.value - j).abs() / j < 1e-9, "{d} {k} {n} {p}: {} vs {j}", m.value);
    }
}

#[test]
fn weighted_fourth_moment_matches_convolution() {
    let sys = MonomialSystem::new(1, 2).unwrap();
    let spec = weighted(&sys, 5, 3);
    let grid = GridSpec::adequate(&sys, 5, 4);
    let m = quadrature_moment(&spec, 4, &grid, &QuadConfig::default()).unwrap();
    let oracle = fourth_moment_oracle(&spec);
    assert!((m.value - oracle).abs() / oracle < 1e-10);
}

#[test]
fn inadequate_grid_is_flagged() {
    let sys = MonomialSystem::new(1, 2).unwrap();
    let spec = ExpSumSpec::ones(sys, 3).unwrap();
    let m = quadrature_moment(&spec, 4, &GridSpec::new(vec![3, 3]).unwrap(), &QuadConfig::default()).unwrap();
    assert!(!m.adequate && !m.exact);
}

#[test]
fn point_cap_degrades_to_sampling() {
    let sys = MonomialSystem::new(1, 3).unwrap();
    let spec = ExpSumSpec::ones(sys.clone(), 4).unwrap();
    let cfg = QuadConfig {
        point_cap: 100,
        fallback_samples: 2000,
        ..QuadConfig::default()
    };
    let m = quadrature_moment(&spec, 4, &GridSpec::adequate(&sys, 4, 4), &cfg).unwrap();
    assert_eq!(m.method, MomentMethod::Sampled);
    assert!(!m.exact);
}

#[test]
fn probe_rejects_large_box() {
    assert!(box_lower_probe(8, &ratio(1, 50), 10, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn parseval_second_moment(n in 1u64..=6, k in 2u32..=3, seed in 0u64..1000) {
        let sys = MonomialSystem::new(1, k).unwrap();
        let spec = weighted(&sys, n, seed);
        let l2: f64 = match &spec.coeffs {
            Coefficients::Map(m) => m.values().map(|c| c.norm_sqr()).sum(),
            Coefficients::Ones => unreachable!(),
        };
        let m = quadrature_moment(&spec, 2, &GridSpec::adequate(&sys, n, 2), &QuadConfig::default()).unwrap();
        prop_assert!((m.value - l2).abs() <= 1e-10 * l2.max(1.0));
    }

    #[test]
    fn direct_and_fft_agree(n in 1u64..=4, d in 1usize..=2, seed in 0u64..1000) {
        let sys = MonomialSystem::new(d, 2).unwrap();
        let spec = weighted(&sys, n, seed);
        let grid = GridSpec::adequate(&sys, n, 4);
        let a = quadrature_moment(&spec, 4, &grid, &quad(MomentMethod::Direct)).unwrap();
        let b = quadrature_moment(&spec, 4, &grid, &quad(MomentMethod::Fft)).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-10 * a.value.max(1.0));
    }

    #[test]
    fn grid_doubling_is_stable(n in 1u64..=4, seed in 0u64..1000) {
        let sys = MonomialSystem::new(1, 2).unwrap();
        let spec = weighted(&sys, n, seed);
        let grid = GridSpec::adequate(&sys, n, 4);
        let a = quadrature_moment(&spec, 4, &grid, &QuadConfig::default()).unwrap();
        let b = quadrature_moment(&spec, 4, &grid.doubled(), &QuadConfig::default()).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-10 * a.value.max(1.0));
    }

    #[test]
    fn unit_sum_is_conjugate_symmetric(x in prop::collection::vec(-1.0f64..1.0, 5), n in 1u64..=6) {
        let spec = ExpSumSpec::ones(MonomialSystem::new(2, 2).unwrap(), n).unwrap();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let a = eval_exp_sum(&spec, &x).unwrap();
        let b = eval_exp_sum(&spec, &neg).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-9 * (n * n) as f64);
    }
}
