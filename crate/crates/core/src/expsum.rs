//! Exponential sums `f(x) = sum_t a_t e(Phi(t) . x)` over `t in {1..N}^d`
//! and their even torus moments.
//!
//! For `p = 2s` the moment `int |f|^p` is a trigonometric polynomial
//! integral, so averaging over a tensor grid with `m_i > 2 s N^{|alpha_i|}`
//! points per axis is exact up to rounding. Grids beyond the point cap fall
//! back to a flagged Monte Carlo estimate.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::exact::{int, ratio, Rational};
use crate::monomial::MonomialSystem;
use crate::seeding::task_rng;

/// Compensated (Neumaier) running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    Ones,
    /// Explicit coefficients on a subset of `{1..N}^d`; missing points are 0.
    Map(BTreeMap<Vec<u64>, Complex64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpSumSpec {
    pub sys: MonomialSystem,
    pub n: u64,
    pub coeffs: Coefficients,
}

/// One nonzero term: coefficient and integer frequency vector `Phi(t)`.
#[derive(Clone, Debug)]
struct Term {
    coeff: Complex64,
    freq: Vec<u128>,
}

impl ExpSumSpec {
    pub fn ones(sys: MonomialSystem, n: u64) -> Result<Self> {
        Self::new(sys, n, Coefficients::Ones)
    }

    pub fn new(sys: MonomialSystem, n: u64, coeffs: Coefficients) -> Result<Self> {
        if n < 1 {
            return Err(LabError::param("N must be >= 1"));
        }
        if let Coefficients::Map(map) = &coeffs {
            for t in map.keys() {
                if t.len() != sys.d() || t.iter().any(|&x| x < 1 || x > n) {
                    return Err(LabError::param(format!(
                        "coefficient support {t:?} outside {{1..{n}}}^{}",
                        sys.d()
                    )));
                }
            }
        }
        let max = (n as u128).checked_pow(sys.k());
        if max.is_none_or(|m| m > 1u128 << 52) {
            return Err(LabError::param("frequencies N^k exceed 2^52; phases lose precision"));
        }
        Ok(ExpSumSpec { sys, n, coeffs })
    }

    /// `sum |a_t|`.
    pub fn l1_norm(&self) -> f64 {
        match &self.coeffs {
            Coefficients::Ones => (self.n as f64).powi(self.sys.d() as i32),
            Coefficients::Map(m) => m.values().map(|c| c.norm()).sum(),
        }
    }

    fn terms(&self) -> Vec<Term> {
        match &self.coeffs {
            Coefficients::Ones => {
                let d = self.sys.d();
                let mut out = Vec::new();
                let mut t = vec![1u64; d];
                loop {
                    out.push(Term {
                        coeff: Complex64::new(1.0, 0.0),
                        freq: self.sys.phi_eval_u128(&t),
                    });
                    let mut i = 0;
                    while i < d && t[i] == self.n {
                        t[i] = 1;
                        i += 1;
                    }
                    if i == d {
                        break;
                    }
                    t[i] += 1;
                }
                out
            }
            Coefficients::Map(m) => m
                .iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(t, c)| Term {
                    coeff: *c,
                    freq: self.sys.phi_eval_u128(t),
                })
                .collect(),
        }
    }
}

fn e(turns: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * turns)
}

fn eval_terms(terms: &[Term], x: &[f64]) -> Complex64 {
    terms
        .iter()
        .map(|t| {
            let phase: f64 = t.freq.iter().zip(x).map(|(&f, &xi)| (f as f64 * xi).fract()).sum();
            t.coeff * e(phase)
        })
        .sum()
}

/// `f(x)` in double precision.
pub fn eval_exp_sum(spec: &ExpSumSpec, x: &[f64]) -> Result<Complex64> {
    if x.len() != spec.sys.n() {
        return Err(LabError::Dimension {
            expected: spec.sys.n(),
            got: x.len(),
        });
    }
    Ok(eval_terms(&spec.terms(), x))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub m: Vec<usize>,
    /// Per-axis shift in turns; all zero by default.
    pub offsets: Vec<f64>,
}

impl GridSpec {
    pub fn new(m: Vec<usize>) -> Result<Self> {
        if m.iter().any(|&mi| mi < 1) {
            return Err(LabError::param("grid counts must be >= 1"));
        }
        let offsets = vec![0.0; m.len()];
        Ok(GridSpec { m, offsets })
    }

    /// `m_i = 2 s N^{|alpha_i|} + 1` for the moment `p = 2s`.
    pub fn adequate(sys: &MonomialSystem, n: u64, p: u32) -> Self {
        GridSpec {
            m: required_grid(sys, n, p),
            offsets: vec![0.0; sys.n()],
        }
    }

    pub fn points(&self) -> u128 {
        self.m.iter().map(|&x| x as u128).product()
    }

    pub fn doubled(&self) -> Self {
        GridSpec {
            m: self.m.iter().map(|x| 2 * x).collect(),
            offsets: self.offsets.clone(),
        }
    }
}

pub fn required_grid(sys: &MonomialSystem, n: u64, p: u32) -> Vec<usize> {
    let s = (p / 2) as u128;
    (0..sys.n())
        .map(|i| (2 * s * (n as u128).pow(sys.degree_of(i)) + 1) as usize)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    Direct,
    Fft,
    /// Pick FFT when the grid fits the cap, direct otherwise.
    Auto,
    Sampled,
}

#[derive(Clone, Debug)]
pub struct QuadConfig {
    pub method: MomentMethod,
    /// Largest tensor grid evaluated before degrading to sampling.
    pub point_cap: u128,
    /// Grid points per summation chunk; fixes the reduction order.
    pub chunk: usize,
    pub fallback_samples: u64,
    pub seed: u64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            method: MomentMethod::Auto,
            point_cap: 1 << 26,
            chunk: 1 << 12,
            fallback_samples: 100_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentResult {
    pub value: f64,
    pub p: u32,
    pub grid: Vec<usize>,
    pub required_grid: Vec<usize>,
    /// Grid meets the exactness rule on every axis.
    pub adequate: bool,
    /// Value is the exact integral up to rounding: adequate grid, not sampled.
    pub exact: bool,
    pub method: MomentMethod,
    pub points: u128,
}

/// Average of `|f|^p` over the grid, or a sampled estimate beyond the cap.
pub fn quadrature_moment(spec: &ExpSumSpec, p: u32, grid: &GridSpec, cfg: &QuadConfig) -> Result<MomentResult> {
    if p == 0 || !p.is_multiple_of(2) {
        return Err(LabError::param("p must be a positive even integer"));
    }
    if grid.m.len() != spec.sys.n() || grid.offsets.len() != spec.sys.n() {
        return Err(LabError::Dimension {
            expected: spec.sys.n(),
            got: grid.m.len(),
        });
    }
    if cfg.chunk == 0 {
        return Err(LabError::param("chunk size must be >= 1"));
    }
    let required = required_grid(&spec.sys, spec.n, p);
    let adequate = grid.m.iter().zip(&required).all(|(m, r)| m >= r);
    let points = grid.points();
    let terms = spec.terms();
    let half = (p / 2) as i32;

    let method = if points > cfg.point_cap || cfg.method == MomentMethod::Sampled {
        MomentMethod::Sampled
    } else if cfg.method == MomentMethod::Auto {
        MomentMethod::Fft
    } else {
        cfg.method
    };
    let (value, used_points) = match method {
        MomentMethod::Direct => (direct_moment(&terms, grid, half, cfg.chunk), points),
        MomentMethod::Fft => (fft_moment(&terms, grid, half, cfg.chunk), points),
        MomentMethod::Sampled => {
            let n = cfg.fallback_samples.max(1);
            (sampled_moment(&terms, spec.sys.n(), half, n, cfg), n as u128)
        }
        MomentMethod::Auto => unreachable!(),
    };
    Ok(MomentResult {
        value,
        p,
        grid: grid.m.clone(),
        required_grid: required,
        adequate,
        exact: adequate && method != MomentMethod::Sampled,
        method,
        points: used_points,
    })
}

fn grid_point(idx: usize, grid: &GridSpec, out: &mut [f64]) {
    let mut rem = idx;
    for axis in (0..grid.m.len()).rev() {
        let m = grid.m[axis];
        out[axis] = (rem % m) as f64 / m as f64 + grid.offsets[axis];
        rem /= m;
    }
}

/// Chunked compensated mean of `g(idx)` over `0..total`.
fn chunked_mean(total: usize, chunk: usize, g: impl Fn(usize) -> f64 + Sync) -> f64 {
    let n_chunks = total.div_ceil(chunk);
    let partial: Vec<CompensatedSum> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = CompensatedSum::default();
            for idx in c * chunk..((c + 1) * chunk).min(total) {
                acc.add(g(idx));
            }
            acc
        })
        .collect();
    let mut acc = CompensatedSum::default();
    for part in &partial {
        acc.merge(part);
    }
    acc.value() / total as f64
}

fn direct_moment(terms: &[Term], grid: &GridSpec, half: i32, chunk: usize) -> f64 {
    let total = grid.points() as usize;
    let zero_offsets = grid.offsets.iter().all(|&o| o == 0.0);
    chunked_mean(total, chunk, |idx| {
        let value: Complex64 = if zero_offsets {
            // reduce each phase exactly modulo m_i before converting
            let mut j = vec![0usize; grid.m.len()];
            let mut rem = idx;
            for axis in (0..grid.m.len()).rev() {
                j[axis] = rem % grid.m[axis];
                rem /= grid.m[axis];
            }
            terms
                .iter()
                .map(|t| {
                    let phase: f64 = t
                        .freq
                        .iter()
                        .zip(&j)
                        .zip(&grid.m)
                        .map(|((&f, &ji), &m)| ((f % m as u128) * ji as u128 % m as u128) as f64 / m as f64)
                        .sum();
                    t.coeff * e(phase)
                })
                .sum()
        } else {
            let mut x = vec![0.0; grid.m.len()];
            grid_point(idx, grid, &mut x);
            eval_terms(terms, &x)
        };
        value.norm_sqr().powi(half)
    })
}

/// Places the coefficients on the frequency lattice mod `m` and applies an
/// unnormalized inverse DFT along every axis, giving `f` on the whole grid.
fn fft_values(terms: &[Term], grid: &GridSpec) -> Vec<Complex64> {
    let total = grid.points() as usize;
    let dims = &grid.m;
    let mut data = vec![Complex64::zero(); total];
    for t in terms {
        let mut idx = 0usize;
        let mut shift = 0.0;
        for ((&f, &m), &off) in t.freq.iter().zip(dims).zip(&grid.offsets) {
            idx = idx * m + (f % m as u128) as usize;
            shift += (f as f64 * off).fract();
        }
        data[idx] += t.coeff * e(shift);
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut stride = 1usize;
    for axis in (0..dims.len()).rev() {
        let m = dims[axis];
        if m > 1 {
            let fft = planner.plan_fft_inverse(m);
            let block = m * stride;
            let mut line = vec![Complex64::zero(); m];
            for base in (0..total).step_by(block) {
                for offset in 0..stride {
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + offset + j * stride];
                    }
                    fft.process(&mut line);
                    for (j, slot) in line.iter().enumerate() {
                        data[base + offset + j * stride] = *slot;
                    }
                }
            }
        }
        stride *= m;
    }
    data
}

fn fft_moment(terms: &[Term], grid: &GridSpec, half: i32, chunk: usize) -> f64 {
    let values = fft_values(terms, grid);
    chunked_mean(values.len(), chunk, |idx| values[idx].norm_sqr().powi(half))
}

fn sampled_moment(terms: &[Term], dim: usize, half: i32, samples: u64, cfg: &QuadConfig) -> f64 {
    let chunk = cfg.chunk as u64;
    let n_chunks = samples.div_ceil(chunk);
    let partial: Vec<CompensatedSum> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = task_rng(cfg.seed, &[0x5a, c]);
            let mut acc = CompensatedSum::default();
            let mut x = vec![0.0; dim];
            for _ in c * chunk..((c + 1) * chunk).min(samples) {
                for xi in x.iter_mut() {
                    *xi = rng.gen::<f64>();
                }
                acc.add(eval_terms(terms, &x).norm_sqr().powi(half));
            }
            acc
        })
        .collect();
    let mut acc = CompensatedSum::default();
    for part in &partial {
        acc.merge(part);
    }
    acc.value() / samples as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    pub n: u64,
    pub c: String,
    pub samples: u64,
    pub seed: u64,
    pub min_abs: f64,
    /// `N^2 / 2`.
    pub threshold: f64,
    pub certified: bool,
}

/// Samples `|x_1|, |x_2| <= c/N`, `|x_3|, |x_4|, |x_5| <= c/N^2` for the
/// all-ones quadratic surface sum and reports the smallest `|f|`.
///
/// Sample `j` is the point `c * u_j` scaled per axis, with `u_j` drawn from
/// a stream fixed by `seed`, so boxes with different `c` share directions.
pub fn box_lower_probe(n: u64, c: &Rational, samples: u64, seed: u64) -> Result<ProbeResult> {
    if !c.is_positive() || *c > ratio(1, 100) {
        return Err(LabError::param("c must lie in (0, 1/100]"));
    }
    if n < 1 {
        return Err(LabError::param("N must be >= 1"));
    }
    let sys = MonomialSystem::new(2, 2)?;
    let spec = ExpSumSpec::ones(sys.clone(), n)?;
    let terms = spec.terms();
    let cf = c.to_f64().expect("small rational");
    let nf = n as f64;
    let scale: Vec<f64> = (0..sys.n()).map(|i| cf / nf.powi(sys.degree_of(i) as i32)).collect();
    let chunk = 1024u64;
    let n_chunks = samples.div_ceil(chunk);
    let mins: Vec<f64> = (0..n_chunks)
        .into_par_iter()
        .map(|ch| {
            let mut rng = task_rng(seed, &[0xb0, ch]);
            let mut x = vec![0.0; scale.len()];
            let mut best = f64::INFINITY;
            for _ in ch * chunk..((ch + 1) * chunk).min(samples) {
                for (xi, s) in x.iter_mut().zip(&scale) {
                    *xi = s * rng.gen_range(-1.0..=1.0);
                }
                best = best.min(eval_terms(&terms, &x).norm());
            }
            best
        })
        .collect();
    let min_abs = mins.into_iter().fold(f64::INFINITY, f64::min);
    let threshold = nf * nf / 2.0;
    Ok(ProbeResult {
        n,
        c: crate::exact::format_rational(c),
        samples,
        seed,
        min_abs,
        threshold,
        certified: samples > 0 && min_abs >= threshold,
    })
}

/// Lower-bound exponent `1 - 2/q` implied by the probe.
pub fn implied_exponent(q: &Rational) -> Result<Rational> {
    if !q.is_positive() {
        return Err(LabError::param("q must be positive"));
    }
    Ok(int(1) - int(2) / q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(d: usize, k: u32) -> MonomialSystem {
        MonomialSystem::new(d, k).unwrap()
    }

    #[test]
    fn origin_gives_box_size() {
        let spec = ExpSumSpec::ones(sys(2, 3), 4).unwrap();
        let v = eval_exp_sum(&spec, &[0.0; 9]).unwrap();
        assert_eq!(v, Complex64::new(16.0, 0.0));
    }

    #[test]
    fn two_term_cancellation() {
        let spec = ExpSumSpec::ones(sys(1, 2), 2).unwrap();
        let v = eval_exp_sum(&spec, &[0.5, 0.0]).unwrap();
        assert!(v.norm() < 1e-15);
        assert!(eval_exp_sum(&spec, &[0.5]).is_err());
    }

    #[test]
    fn support_validated() {
        let mut m = BTreeMap::new();
        m.insert(vec![0u64], Complex64::new(1.0, 0.0));
        assert!(ExpSumSpec::new(sys(1, 2), 3, Coefficients::Map(m)).is_err());
    }

    #[test]
    fn parseval_s1() {
        let spec = ExpSumSpec::ones(sys(1, 2), 2).unwrap();
        let g = GridSpec::adequate(&spec.sys, 2, 2);
        let r = quadrature_moment(&spec, 2, &g, &QuadConfig::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r.exact);
    }

    #[test]
    fn moment_equals_count() {
        let spec = ExpSumSpec::ones(sys(1, 2), 3).unwrap();
        let g = GridSpec::adequate(&spec.sys, 3, 4);
        for method in [MomentMethod::Direct, MomentMethod::Fft] {
            let cfg = QuadConfig {
                method,
                ..QuadConfig::default()
            };
            let r = quadrature_moment(&spec, 4, &g, &cfg).unwrap();
            assert!((r.value - 15.0).abs() / 15.0 < 1e-10, "{method:?} {}", r.value);
        }
    }

    #[test]
    fn small_grid_flagged_and_cap_samples() {
        let spec = ExpSumSpec::ones(sys(1, 2), 3).unwrap();
        let g = GridSpec::new(vec![3, 3]).unwrap();
        let r = quadrature_moment(&spec, 4, &g, &QuadConfig::default()).unwrap();
        assert!(!r.adequate && !r.exact);
        let big = GridSpec::adequate(&spec.sys, 3, 4);
        let cfg = QuadConfig {
            point_cap: 10,
            fallback_samples: 20_000,
            ..QuadConfig::default()
        };
        let r = quadrature_moment(&spec, 4, &big, &cfg).unwrap();
        assert_eq!(r.method, MomentMethod::Sampled);
        assert!(!r.exact);
        assert!((r.value - 15.0).abs() < 3.0);
    }

    #[test]
    fn odd_p_rejected() {
        let spec = ExpSumSpec::ones(sys(1, 2), 3).unwrap();
        let g = GridSpec::adequate(&spec.sys, 3, 4);
        assert!(quadrature_moment(&spec, 3, &g, &QuadConfig::default()).is_err());
    }

    #[test]
    fn probe_origin_and_certificate() {
        let r = box_lower_probe(16, &ratio(1, 100), 10_000, 7).unwrap();
        assert!(r.certified, "{r:?}");
        assert!(r.min_abs <= 256.0);
        assert!(box_lower_probe(16, &ratio(1, 50), 10, 7).is_err());
        assert_eq!(implied_exponent(&int(4)).unwrap(), ratio(1, 2));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::default();
        acc.add(1e16);
        for _ in 0..10 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 10.0);
    }
}
