//! Exact-rational numerology of the cubic-surface decoupling iteration.
//!
//! Everything here is exact: the interpolation coefficients, the iteration
//! sequences, their geometric-series sums, the exponent `lambda_0`, the
//! iterated exponent `eta` and the sign of its dominant term. The only
//! approximation anywhere is the dyadic [`Enclosure`] used by the scan to
//! decide signs quickly, and every sign it cannot decide, as well as every
//! witness it reports, is settled in exact arithmetic.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::enclosure::Enclosure;
use crate::error::{LabError, Result};
use crate::exact::{int, pow, ratio, Rational};

/// The standing lower limit `72/5` on the Lebesgue exponent.
pub fn p_threshold() -> Rational {
    ratio(72, 5)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpolationCoeffs {
    pub p: Rational,
    pub alpha1: Rational,
    pub alpha2: Rational,
    pub beta2: Rational,
}

/// Solves `lhs = c0 + c1 * x` for `x`.
fn solve_linear(lhs: Rational, c0: Rational, c1: Rational) -> Rational {
    (lhs - c0) / c1
}

/// Hoelder exponents defined by
///
/// ```text
/// 9/(2p) = 9 a1/(5p) + (1 - a1)/2
/// 9/(5p) = a2/p + (1 - a2)/8
/// 1/8    = (1 - b2)/2 + 9 b2/(5p)
/// ```
pub fn solve_alphas(p: &Rational) -> Result<InterpolationCoeffs> {
    if *p <= p_threshold() {
        return Err(LabError::param(format!(
            "p must exceed 72/5, got {}",
            crate::exact::format_rational(p)
        )));
    }
    let half = ratio(1, 2);
    let eighth = ratio(1, 8);
    let inv = p.recip();
    let nine_5p = ratio(9, 5) * &inv;
    let alpha1 = solve_linear(ratio(9, 2) * &inv, half.clone(), &nine_5p - &half);
    let alpha2 = solve_linear(nine_5p.clone(), eighth.clone(), &inv - &eighth);
    let beta2 = solve_linear(eighth, half.clone(), &nine_5p - &half);
    Ok(InterpolationCoeffs {
        p: p.clone(),
        alpha1,
        alpha2,
        beta2,
    })
}

impl InterpolationCoeffs {
    /// `lhs - rhs` of the three defining identities; all zero when exact.
    pub fn residuals(&self) -> [Rational; 3] {
        let one = Rational::one();
        let p = &self.p;
        let two_p_9 = ratio(2, 9) * p;
        let five_p_9 = ratio(5, 9) * p;
        [
            two_p_9.recip() - (&self.alpha1 / &five_p_9 + (&one - &self.alpha1) / int(2)),
            five_p_9.recip() - (&self.alpha2 / p + (&one - &self.alpha2) / int(8)),
            ratio(1, 8) - ((&one - &self.beta2) / int(2) + &self.beta2 / &five_p_9),
        ]
    }

    pub fn all_in_unit_interval(&self) -> bool {
        let zero = Rational::zero();
        let one = Rational::one();
        [&self.alpha1, &self.alpha2, &self.beta2]
            .iter()
            .all(|x| **x > zero && **x < one)
    }

    /// `(1 - a2) b2`, the per-step decay of the iteration weights.
    pub fn q(&self) -> Rational {
        (Rational::one() - &self.alpha2) * &self.beta2
    }

    /// `rho = (3/2)(1 - a2) b2`, the ratio of every `b_i`-weighted series.
    pub fn convergence_ratio(&self) -> Rational {
        ratio(3, 2) * self.q()
    }
}

/// `b`, `gamma`, `tau`, `w` for an `r`-step iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationSequences {
    pub coeffs: InterpolationCoeffs,
    pub r: usize,
    pub b: Vec<Rational>,
    pub gamma: Vec<Rational>,
    pub tau: Vec<Rational>,
    pub w: Vec<Rational>,
}

pub fn sequences(p: &Rational, r: usize) -> Result<IterationSequences> {
    if r < 1 {
        return Err(LabError::param("r must be >= 1"));
    }
    let c = solve_alphas(p)?;
    let one = Rational::one();
    let q = c.q();
    let a1 = &c.alpha1;
    let a2 = &c.alpha2;
    let b2 = &c.beta2;

    let b: Vec<Rational> = (0..=r).map(|i| int(2) * pow(&ratio(3, 2), i as u32)).collect();
    let mut gamma = vec![&one - a1];
    let gamma_head = a1 * (&one - a2) * (&one - b2);
    let mut q_pow = one.clone();
    for _ in 1..=r {
        gamma.push(&gamma_head * &q_pow);
        q_pow *= &q;
    }
    let mut tau = Vec::with_capacity(r + 1);
    let mut q_pow = one.clone();
    for _ in 0..r {
        tau.push(a1 * a2 * &q_pow);
        q_pow *= &q;
    }
    tau.push(a1 * &q_pow);
    let w_factor = (&one - a2) / (int(2) * a2);
    let w = tau[..r].iter().map(|t| &w_factor * t).collect();
    Ok(IterationSequences {
        coeffs: c,
        r,
        b,
        gamma,
        tau,
        w,
    })
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

impl IterationSequences {
    /// `sum gamma_i + sum tau_i`; exactly 1.
    pub fn partition_sum(&self) -> Rational {
        self.gamma.iter().chain(&self.tau).fold(Rational::zero(), |a, x| a + x)
    }

    /// `sum_{j<=r} b_j gamma_j`.
    pub fn sum_b_gamma(&self) -> Rational {
        dot(&self.b, &self.gamma)
    }

    /// `sum_{j<=r} b_j tau_j`.
    pub fn sum_b_tau(&self) -> Rational {
        dot(&self.b, &self.tau)
    }

    /// `sum_{j<r} b_j w_j`.
    pub fn sum_b_w(&self) -> Rational {
        dot(&self.b, &self.w)
    }
}

/// Infinite `b`-weighted sums of `gamma`, `w` and `tau`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesSums {
    pub s_bgamma: Rational,
    pub s_bw: Rational,
    pub s_btau: Rational,
}

/// `sum_{i>=0} first * ratio^i`.
fn geometric(first: Rational, ratio_: &Rational) -> Rational {
    first / (Rational::one() - ratio_)
}

/// Sums the three series term by term as geometric series in
/// `rho = (3/2)(1 - a2) b2`; rejects `rho >= 1`.
pub fn series_sums(p: &Rational) -> Result<SeriesSums> {
    let c = solve_alphas(p)?;
    let rho = c.convergence_ratio();
    if rho >= Rational::one() {
        return Err(LabError::Divergent {
            ratio: crate::exact::format_rational(&rho),
        });
    }
    let one = Rational::one();
    let (a1, a2, b2) = (&c.alpha1, &c.alpha2, &c.beta2);
    // gamma_0 stands alone; gamma_i for i >= 1 starts at b_1 = 3
    let s_bgamma = int(2) * (&one - a1) + geometric(int(3) * a1 * (&one - a2) * (&one - b2), &rho);
    // b_i w_i = 2 (3/2)^i (1 - a2)/(2 a2) a1 a2 q^i
    let s_bw = geometric(a1 * (&one - a2), &rho);
    // the last tau carries q^r (3/2)^r -> 0, so only the a1 a2 q^i terms survive
    let s_btau = geometric(int(2) * a1 * a2, &rho);
    Ok(SeriesSums { s_bgamma, s_bw, s_btau })
}

/// The three sums as explicit rational functions of `p`.
pub fn closed_form_sums(p: &Rational) -> SeriesSums {
    let p2 = p * p;
    let den = int(5) * &p2 - int(94) * p + int(144);
    SeriesSums {
        s_bgamma: int(6) * (int(13) * p - int(216)) / &den,
        s_bw: int(32) * (p - int(9)) / &den,
        s_btau: int(2) * (int(648) - int(117) * p + int(5) * &p2) / (int(144) - int(94) * p + int(5) * &p2),
    }
}

fn lambda0_from(p: &Rational, sums: &SeriesSums) -> Rational {
    let eighth = ratio(1, 8);
    &eighth * (&sums.s_bgamma + &sums.s_bw) + (ratio(3, 8) - p.recip()) * &sums.s_btau
}

/// `lambda_0 = (1/2 - 3/8)(S_bgamma + S_bw) + (3/8 - 1/p) S_btau`.
pub fn lambda0(p: &Rational) -> Result<Rational> {
    let sums = series_sums(p)?;
    Ok(lambda0_from(p, &sums))
}

/// Parameters of one `eta` evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaParams {
    pub p: Rational,
    pub mu: Rational,
    pub u: Rational,
    pub r: usize,
    pub m: u32,
    pub eta_p: Rational,
}

/// Everything derived from one set of iteration parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumerologyReport {
    pub params: EtaParams,
    pub coeffs: InterpolationCoeffs,
    pub convergence_ratio: Rational,
    /// Infinite sums (limit checks only).
    pub series: SeriesSums,
    pub lambda0: Rational,
    /// `sum_{j<=r} b_j gamma_j`, `sum_{j<r} b_j w_j`, `sum_{j<=r} b_j tau_j`.
    pub finite_b_gamma: Rational,
    pub finite_b_w: Rational,
    pub finite_b_tau: Rational,
    /// `(1 - g^M)/(1 - g)` for `g = sum_{j<=r} b_j gamma_j`.
    pub geometric_factor: Rational,
    pub eta: Rational,
    pub eta_tilde: Rational,
    /// `lambda_0 - (mu + eta_p)/2 * sum_{j<=r} b_j tau_j`.
    pub leading_coefficient: Rational,
    /// Same with the infinite `tau` sum.
    pub leading_coefficient_limit: Rational,
    pub dominant_term: Rational,
    /// The rewritten right-hand side of `(eta_tilde - eta_p)/u`; `None` when `u = 0`.
    pub normalized_gap: Option<Rational>,
    pub sign: Option<Ordering>,
}

/// `2 / (2 (3/2)^r)^M`, the largest `u` the `M`-fold iteration allows.
pub fn max_admissible_u(r: usize, m: u32) -> Rational {
    let b_r = int(2) * pow(&ratio(3, 2), r as u32);
    int(2) / pow(&b_r, m)
}

fn geometric_partial(g: &Rational, m: u32) -> (Rational, Rational) {
    let g_m = pow(g, m);
    let factor = if g.is_one() {
        int(m as i64)
    } else {
        (Rational::one() - &g_m) / (Rational::one() - g)
    };
    (g_m, factor)
}

/// Iterated exponent `eta_{p,mu,u,r,M}` with finite sums, `eta_tilde = eta + 5u/4`
/// and the dominant term of `(eta_tilde - eta_p)/u`.
pub fn eta(params: &EtaParams) -> Result<NumerologyReport> {
    if params.m < 1 {
        return Err(LabError::param("M must be >= 1"));
    }
    if params.u.is_negative() {
        return Err(LabError::param("u must be >= 0"));
    }
    if params.mu.is_negative() {
        return Err(LabError::param("mu must be >= 0"));
    }
    if params.u > max_admissible_u(params.r, params.m) {
        return Err(LabError::param(format!(
            "u too large: need u * (2 (3/2)^r)^M <= 2 for r={}, M={}",
            params.r, params.m
        )));
    }
    let seqs = sequences(&params.p, params.r)?;
    let series = series_sums(&params.p)?;
    let lambda0 = lambda0_from(&params.p, &series);
    let g = seqs.sum_b_gamma();
    let t = seqs.sum_b_tau();
    let (g_m, factor) = geometric_partial(&g, params.m);
    let u = &params.u;
    let weight = &params.mu + &params.eta_p;
    let half = ratio(1, 2);

    let eta =
        u * &lambda0 * &factor + int(2) * u * &g_m + &weight * (Rational::one() - u * &g_m - &half * u * &t * &factor);
    let eta_tilde = &eta + ratio(5, 4) * u;
    let leading = &lambda0 - &half * &weight * &t;
    let leading_limit = &lambda0 - &half * &weight * &series.s_btau;
    let dominant = &leading * &factor;
    let normalized_gap = if u.is_zero() {
        if params.mu.is_zero() {
            Some(dominant_gap(&dominant, &params.mu, u, &weight, &g_m))
        } else {
            None
        }
    } else {
        Some(dominant_gap(&dominant, &params.mu, u, &weight, &g_m))
    };
    let sign = normalized_gap.as_ref().map(|v| v.cmp(&Rational::zero()));
    Ok(NumerologyReport {
        params: params.clone(),
        convergence_ratio: seqs.coeffs.convergence_ratio(),
        coeffs: seqs.coeffs.clone(),
        series,
        lambda0,
        finite_b_gamma: g,
        finite_b_w: seqs.sum_b_w(),
        finite_b_tau: t,
        geometric_factor: factor,
        eta,
        eta_tilde,
        leading_coefficient: leading,
        leading_coefficient_limit: leading_limit,
        dominant_term: dominant,
        normalized_gap,
        sign,
    })
}

/// `dominant + 5/4 + mu/u + (2 - mu - eta_p) g^M`; the `mu/u` term is taken
/// as 0 when `mu = 0`.
fn dominant_gap(dominant: &Rational, mu: &Rational, u: &Rational, weight: &Rational, g_m: &Rational) -> Rational {
    let mu_over_u = if mu.is_zero() { Rational::zero() } else { mu / u };
    dominant + ratio(5, 4) + mu_over_u + (int(2) - weight) * g_m
}

/// Search window and bounds for [`contradiction_scan`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanConfig {
    pub p_lo: Rational,
    pub p_hi: Rational,
    pub eta_p: Rational,
    pub r_max: usize,
    pub m_max: u32,
    /// Number of rungs `p_hi - (p_hi - p_lo)/2^j`, `j = 1..=ladder_len`.
    pub ladder_len: u32,
    pub mu: Rational,
    /// Requested `u` for the witness report; capped at the admissible maximum.
    pub u: Rational,
    /// Fixed-point bits of the sign-deciding enclosures.
    pub precision: u32,
}

impl ScanConfig {
    pub fn new(eta_p: Rational, p_lo: Rational, p_hi: Rational, r_max: usize, m_max: u32) -> Self {
        ScanConfig {
            p_lo,
            p_hi,
            eta_p,
            r_max,
            m_max,
            ladder_len: 40,
            mu: Rational::zero(),
            u: ratio(1, 1_000_000),
            precision: 256,
        }
    }

    pub fn ladder(&self) -> Vec<Rational> {
        let width = &self.p_hi - &self.p_lo;
        (1..=self.ladder_len)
            .map(|j| &self.p_hi - &width / pow(&int(2), j))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanWitness {
    pub p: Rational,
    pub r: usize,
    pub m: u32,
    pub mu: Rational,
    /// Exact value of the rewritten gap, negative by construction.
    pub gap: Rational,
    /// `u` actually used: `min(requested u, max admissible u)`.
    pub u: Rational,
    pub eta_tilde_below_eta_p: bool,
    pub report: NumerologyReport,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanOutcome {
    pub witness: Option<ScanWitness>,
    pub rungs: Vec<Rational>,
    pub evaluations: u64,
    pub exact_fallbacks: u64,
}

struct RungResult {
    hit: Option<(usize, u32)>,
    evaluations: u64,
    fallbacks: u64,
}

/// Scans `p` down the ladder, then `r = 1..=r_max`, then `M = 1..=M_max`, and
/// returns the first parameters at which the rewritten gap is negative.
pub fn contradiction_scan(cfg: &ScanConfig) -> Result<ScanOutcome> {
    if cfg.p_lo >= cfg.p_hi {
        return Err(LabError::param("empty p window"));
    }
    if cfg.p_lo < p_threshold() {
        return Err(LabError::param("p window must lie above 72/5"));
    }
    if cfg.r_max < 1 || cfg.m_max < 1 {
        return Err(LabError::param("r_max and M_max must be >= 1"));
    }
    let rungs = cfg.ladder();
    let results: Vec<Result<RungResult>> = rungs.par_iter().map(|p| scan_rung(p, cfg)).collect();
    let mut evaluations = 0;
    let mut exact_fallbacks = 0;
    let mut first = None;
    for (p, res) in rungs.iter().zip(results) {
        let res = res?;
        evaluations += res.evaluations;
        exact_fallbacks += res.fallbacks;
        if first.is_none() {
            if let Some((r, m)) = res.hit {
                first = Some((p.clone(), r, m));
            }
        }
    }
    let witness = match first {
        Some((p, r, m)) => Some(confirm_witness(&p, r, m, cfg)?),
        None => None,
    };
    Ok(ScanOutcome {
        witness,
        rungs,
        evaluations,
        exact_fallbacks,
    })
}

fn scan_rung(p: &Rational, cfg: &ScanConfig) -> Result<RungResult> {
    let coeffs = solve_alphas(p)?;
    let lambda0 = lambda0(p)?;
    let one = Rational::one();
    let q = coeffs.q();
    let (a1, a2, b2) = (&coeffs.alpha1, &coeffs.alpha2, &coeffs.beta2);
    let weight = &cfg.mu + &cfg.eta_p;
    let e_coef = int(2) - &weight;
    let constant = if cfg.mu.is_zero() {
        ratio(5, 4)
    } else {
        ratio(5, 4) + &cfg.mu / &cfg.u
    };
    let prec = cfg.precision;
    let e_enc = Enclosure::from_rational(&e_coef, prec);
    let c_enc = Enclosure::from_rational(&constant, prec);

    let gamma_head = a1 * (&one - a2) * (&one - b2);
    let three_halves = ratio(3, 2);
    // running pieces: g_r = 2(1 - a1) + sum_{i=1}^r b_i gamma_i,
    // t_r = sum_{i<r} b_i a1 a2 q^i + b_r a1 q^r
    let mut g = int(2) * (&one - a1);
    let mut tau_prefix = Rational::zero();
    let mut b_i = int(2);
    let mut q_i = one.clone();
    let mut evaluations = 0u64;
    let mut fallbacks = 0u64;
    for r in 1..=cfg.r_max {
        // fold index r-1 into the tau prefix, then advance to index r
        tau_prefix += &b_i * a1 * a2 * &q_i;
        let q_prev = q_i.clone();
        b_i *= &three_halves;
        q_i *= &q;
        g += &b_i * &gamma_head * &q_prev;
        let t = &tau_prefix + &b_i * a1 * &q_i;
        let leading = &lambda0 - ratio(1, 2) * &weight * &t;
        if !leading.is_negative() && !e_coef.is_negative() && !constant.is_negative() {
            // every term of the gap is nonnegative for all M
            continue;
        }
        let g_enc = Enclosure::from_rational(&g, prec);
        let l_enc = Enclosure::from_rational(&leading, prec);
        let mut g_pow = Enclosure::one(prec);
        let mut factor = Enclosure::from_rational(&Rational::zero(), prec);
        for m in 1..=cfg.m_max {
            // factor_M = sum_{i<M} g^i, g_pow = g^M
            factor = factor.add(&g_pow);
            g_pow = g_pow.mul(&g_enc);
            evaluations += 1;
            let value = l_enc.mul(&factor).add(&c_enc).add(&e_enc.mul(&g_pow));
            let negative = match value.sign() {
                Some(ord) => ord == Ordering::Less,
                None => {
                    fallbacks += 1;
                    exact_gap(&g, &leading, &constant, &e_coef, m).is_negative()
                }
            };
            if negative {
                return Ok(RungResult {
                    hit: Some((r, m)),
                    evaluations,
                    fallbacks,
                });
            }
        }
    }
    Ok(RungResult {
        hit: None,
        evaluations,
        fallbacks,
    })
}

fn exact_gap(g: &Rational, leading: &Rational, constant: &Rational, e_coef: &Rational, m: u32) -> Rational {
    let (g_m, factor) = geometric_partial(g, m);
    leading * factor + constant + e_coef * g_m
}

fn confirm_witness(p: &Rational, r: usize, m: u32, cfg: &ScanConfig) -> Result<ScanWitness> {
    let u = cfg.u.clone().min(max_admissible_u(r, m));
    let report = eta(&EtaParams {
        p: p.clone(),
        mu: cfg.mu.clone(),
        u: u.clone(),
        r,
        m,
        eta_p: cfg.eta_p.clone(),
    })?;
    let gap = report
        .normalized_gap
        .clone()
        .ok_or_else(|| LabError::param("gap undefined at u = 0 with mu > 0"))?;
    assert!(gap.is_negative(), "enclosure accepted a non-negative gap");
    let below = report.eta_tilde < cfg.eta_p;
    Ok(ScanWitness {
        p: p.clone(),
        r,
        m,
        mu: cfg.mu.clone(),
        gap,
        u,
        eta_tilde_below_eta_p: below,
        report,
    })
}

/// Constraints of the ball-inflation step for `l in {1, 2}` in dimension `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallInflation {
    pub l: u32,
    pub n: u32,
    /// `16 n / (3 l (l + 3))`.
    pub p_min: Rational,
    /// `l (l + 3) p / (2 n)`.
    pub q_max: Rational,
    pub p_admissible: bool,
    /// `[8/3, q_max at l = 1]`.
    pub q_window: (Rational, Rational),
}

pub fn ball_inflation_constraints(l: u32, n: u32, p: &Rational) -> Result<BallInflation> {
    if !(1..=2).contains(&l) {
        return Err(LabError::param("l must be 1 or 2"));
    }
    if n < 1 {
        return Err(LabError::param("n must be >= 1"));
    }
    if !p.is_positive() {
        return Err(LabError::param("p must be positive"));
    }
    let d0 = |l: u32| int((l * (l + 3)) as i64);
    let p_min = int(16 * n as i64) / (int(3) * d0(l));
    let q_max_for = |l: u32| d0(l) * p / int(2 * n as i64);
    Ok(BallInflation {
        l,
        n,
        p_admissible: *p >= p_min,
        q_max: q_max_for(l),
        q_window: (ratio(8, 3), q_max_for(1)),
        p_min,
    })
}

/// `1/2 - 1/p` (small `p`) and `1 - 5/p` (large `p`): the two branches of
/// the `l^p L^p` exponent for the quadratic surface.
pub fn quadratic_surface_exponent(p: &Rational) -> Rational {
    let a = ratio(1, 2) - p.recip();
    let b = Rational::one() - int(5) / p;
    a.max(b)
}

/// Solves `1/2 - 1/p = 1 - 5/p` exactly (linear in `1/p`).
pub fn quadratic_surface_crossover() -> Rational {
    // (5 - 1) t = 1 - 1/2 with t = 1/p
    let t = (Rational::one() - ratio(1, 2)) / (int(5) - int(1));
    t.recip()
}

pub fn lambda_1(q: &Rational) -> Rational {
    ratio(1, 2) - (int(2) * q).recip() - ratio(3, 16)
}

pub fn lambda_2(q: &Rational) -> Rational {
    ratio(1, 2) - q.recip()
}

/// One row of the table of proved exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentRow {
    pub label: &'static str,
    pub formula: &'static str,
    pub values: Vec<(String, Rational)>,
    pub holds: bool,
}

/// Proved exponents and the exact relations between them.
pub fn critical_exponent_table() -> Vec<ExponentRow> {
    let mut rows = Vec::new();
    let crossover = quadratic_surface_crossover();
    rows.push(ExponentRow {
        label: "S_{2,2} l^p L^p",
        formula: "max(1/2 - 1/p, 1 - 5/p), branches meet at p = 8",
        values: vec![
            ("crossover_p".into(), crossover.clone()),
            ("exponent_at_crossover".into(), quadratic_surface_exponent(&crossover)),
        ],
        holds: crossover == int(8) && ratio(1, 2) - crossover.recip() == Rational::one() - int(5) / &crossover,
    });
    let qs = [ratio(8, 3), int(4), ratio(40, 9), int(8)];
    rows.push(ExponentRow {
        label: "S_{2,2} l^q L^8",
        formula: "1/2 - 1/q for q in [8/3, 8]; lower bound at scale N^2 is 1 - 2/q = 2(1/2 - 1/q)",
        values: qs
            .iter()
            .map(|q| (format!("q={}", crate::exact::format_rational(q)), lambda_2(q)))
            .collect(),
        holds: qs.iter().all(|q| int(2) * lambda_2(q) == Rational::one() - int(2) / q),
    });
    let strict = [ratio(11, 4), int(3), int(4), int(8)];
    rows.push(ExponentRow {
        label: "lambda_1q < lambda_2q",
        formula: "5/16 - 1/(2q) < 1/2 - 1/q for q > 8/3, equality at q = 8/3",
        values: strict
            .iter()
            .flat_map(|q| {
                let tag = crate::exact::format_rational(q);
                [
                    (format!("lambda1(q={tag})"), lambda_1(q)),
                    (format!("lambda2(q={tag})"), lambda_2(q)),
                ]
            })
            .collect(),
        holds: strict.iter().all(|q| lambda_1(q) < lambda_2(q))
            && lambda_1(&ratio(8, 3)) == lambda_2(&ratio(8, 3))
            && lambda_1(&ratio(8, 3)) == ratio(5, 16) - ratio(3, 16),
    });
    let s23 = int(2) * (ratio(1, 2) - ratio(1, 20));
    rows.push(ExponentRow {
        label: "S_{2,3} l^20 L^20",
        formula: "2(1/2 - 1/20)",
        values: vec![("exponent".into(), s23.clone())],
        holds: s23 == ratio(9, 10),
    });
    rows.push(ExponentRow {
        label: "lambda_1 <= lambda_2 iff q >= 8/3",
        formula: "1/2 - 1/(2q) - 3/16 <= 1/2 - 1/q  <=>  q >= 8/3",
        values: vec![("threshold".into(), lambda_crossover())],
        holds: lambda_order_equivalence_holds(),
    });
    rows
}

/// The `q` at which `1/2 - 1/(2q) - 3/16 = 1/2 - 1/q`.
pub fn lambda_crossover() -> Rational {
    // 1/(2q) = 3/16
    (int(2) * ratio(3, 16)).recip()
}

/// Checks the equivalence on a ladder of rationals around the threshold.
pub fn lambda_order_equivalence_holds() -> bool {
    let t = lambda_crossover();
    (1..=80).all(|i| {
        let q = ratio(i, 10);
        (lambda_1(&q) <= lambda_2(&q)) == (q >= t)
    }) && lambda_1(&t) == lambda_2(&t)
}

/// `delta` and its companion `N = delta^{-2}` (so that `delta = N^{-1/2}`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleParams {
    pub delta: Rational,
    pub n: Rational,
}

impl ScaleParams {
    pub fn from_delta(delta: Rational) -> Result<Self> {
        if !delta.is_positive() || delta > Rational::one() {
            return Err(LabError::param("delta must lie in (0, 1]"));
        }
        let n = (&delta * &delta).recip();
        Ok(ScaleParams { delta, n })
    }
}
