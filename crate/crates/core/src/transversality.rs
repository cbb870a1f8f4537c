//! Rank conditions on restricted derivative matrices `M_V^(l)`.
//!
//! Minor certificates, sampled checks of the minor-order conjecture for
//! `d = 2, k = 3`, the rank lemmas behind it, the Brascamp-Lieb dimension
//! inequality at explicit point configurations and a heuristic probe of
//! square transversality. All ranks and determinants are exact; only the
//! square probe works in floating point, and it says so.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::exact::{binomial_usize, format_rational, int, ratio, Rational};
use crate::linalg::{rank_of_rows, PolyMatrix, RatMatrix};
use crate::monomial::MonomialSystem;
use crate::poly::Poly;
use crate::seeding::task_rng;

/// Linear subspace of `Q^n` given by independent basis vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    n: usize,
    basis: Vec<Vec<Rational>>,
}

impl Subspace {
    pub fn new(n: usize, basis: Vec<Vec<Rational>>) -> Result<Self> {
        if basis.is_empty() || basis.len() > n {
            return Err(LabError::param(format!("dimension must lie in 1..={n}")));
        }
        if let Some(v) = basis.iter().find(|v| v.len() != n) {
            return Err(LabError::Dimension {
                expected: n,
                got: v.len(),
            });
        }
        if rank_of_rows(&basis)? != basis.len() {
            return Err(LabError::param("basis vectors are linearly dependent"));
        }
        Ok(Subspace { n, basis })
    }

    /// Span of the standard vectors `e_i`, `i` in `indices` (0-based).
    pub fn coordinate(n: usize, indices: &[usize]) -> Result<Self> {
        let basis = indices
            .iter()
            .map(|&i| {
                if i >= n {
                    return Err(LabError::param(format!("coordinate {i} out of range")));
                }
                let mut v = vec![Rational::zero(); n];
                v[i] = Rational::one();
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        Subspace::new(n, basis)
    }

    pub fn full(n: usize) -> Self {
        Subspace::coordinate(n, &(0..n).collect::<Vec<_>>()).expect("identity basis")
    }

    /// Random subspace with integer entries in `[-bound, bound]`, resampled until full rank.
    pub fn random(n: usize, dim: usize, bound: i64, rng: &mut ChaCha8Rng) -> Result<Self> {
        if dim < 1 || dim > n {
            return Err(LabError::param(format!("dimension must lie in 1..={n}")));
        }
        loop {
            let basis: Vec<Vec<Rational>> = (0..dim)
                .map(|_| (0..n).map(|_| int(rng.gen_range(-bound..=bound))).collect())
                .collect();
            if rank_of_rows(&basis)? == dim {
                return Ok(Subspace { n, basis });
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn basis_matrix(&self) -> RatMatrix {
        RatMatrix::from_rows(self.basis.clone()).expect("rectangular basis")
    }

    /// Same space, basis replaced by `t * basis` for an invertible `t`.
    pub fn recombine(&self, t: &RatMatrix) -> Result<Self> {
        if t.rows() != self.dim() || t.cols() != self.dim() || t.rank() != self.dim() {
            return Err(LabError::param("recombination must be invertible and dim x dim"));
        }
        let b = t.mul(&self.basis_matrix())?;
        Subspace::new(self.n, (0..b.rows()).map(|i| b.row(i).to_vec()).collect())
    }

    pub fn basis_strings(&self) -> Vec<Vec<String>> {
        self.basis
            .iter()
            .map(|v| v.iter().map(format_rational).collect())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinorOrder {
    pub order: usize,
    pub feasible: bool,
    pub columns: usize,
}

/// `floor(dimV (C(d+l,l) - 1)/(C(d+k,k) - 1)) + 1`, flagged infeasible when it
/// exceeds `min(dimV, C(d+l,l) - 1)`.
pub fn required_minor_order(dim_v: usize, d: usize, k: u32, l: u32) -> Result<MinorOrder> {
    let n = binomial_usize(d + k as usize, k as usize) - 1;
    let cols = binomial_usize(d + l as usize, l as usize) - 1;
    if dim_v < 1 || dim_v > n {
        return Err(LabError::param(format!("dimV must lie in 1..={n}")));
    }
    let order = dim_v * cols / n + 1;
    Ok(MinorOrder {
        order,
        feasible: order <= dim_v.min(cols),
        columns: cols,
    })
}

/// `(v_1, ..., v_dim)^T * M`.
pub fn restrict_matrix(m: &PolyMatrix, v: &Subspace) -> Result<PolyMatrix> {
    if v.n() != m.rows() {
        return Err(LabError::Dimension {
            expected: m.rows(),
            got: v.n(),
        });
    }
    m.left_mul(&v.basis_matrix())
}

/// A minor whose determinant polynomial is nonzero at `witness`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorCertificate {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub order: usize,
    pub determinant: Poly,
    pub witness: Vec<Rational>,
    pub value: Rational,
}

impl MinorCertificate {
    /// Re-evaluates the stored determinant at the witness.
    pub fn verify(&self) -> bool {
        !self.value.is_zero()
            && self.rows.len() == self.order
            && self.cols.len() == self.order
            && self.determinant.eval(&self.witness) == self.value
    }

    /// Evaluates the selected submatrix of `m` at the witness and takes its
    /// numeric determinant, independently of the stored polynomial.
    pub fn verify_against(&self, m: &PolyMatrix) -> bool {
        let sub = m.select(&self.rows, &self.cols).eval(&self.witness);
        self.verify() && sub.determinant().is_ok_and(|d| d == self.value)
    }
}

fn random_rational(rng: &mut ChaCha8Rng, num: i64, den: i64, nonzero: bool) -> Rational {
    loop {
        let a = rng.gen_range(-num..=num);
        if nonzero && a == 0 {
            continue;
        }
        return ratio(a, rng.gen_range(1..=den));
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// A nonzero polynomial of degree `<= D` in each variable cannot vanish on
/// all of `{0..D}^nvars`; returns the first grid point where it does not.
fn grid_witness(p: &Poly) -> Option<Vec<Rational>> {
    let deg = p.degree()? as i64;
    let nv = p.nvars();
    let mut idx = vec![0i64; nv];
    loop {
        let point: Vec<Rational> = idx.iter().map(|&x| int(x)).collect();
        if !p.eval(&point).is_zero() {
            return Some(point);
        }
        let mut i = 0;
        while i < nv && idx[i] == deg {
            idx[i] = 0;
            i += 1;
        }
        if i == nv {
            return None;
        }
        idx[i] += 1;
    }
}

/// Searches minors of the given order, columns-first lexicographic, and
/// certifies the first one that is not identically zero.
///
/// Each candidate is evaluated at a few random rational points first; a
/// nonzero value certifies it at once. Otherwise the symbolic determinant
/// decides, and a witness is taken from a small integer grid.
pub fn find_nonvanishing_minor(mv: &PolyMatrix, order: usize, seed: u64) -> Result<Option<MinorCertificate>> {
    if order < 1 || order > mv.rows().min(mv.cols()) {
        return Err(LabError::param(format!(
            "order {order} exceeds matrix shape {}x{}",
            mv.rows(),
            mv.cols()
        )));
    }
    let mut rng = task_rng(seed, &[0x3170]);
    let nv = mv.nvars();
    for cols in subsets(mv.cols(), order) {
        for rows in subsets(mv.rows(), order) {
            let sub = mv.select(&rows, &cols);
            let mut witness = None;
            for _ in 0..3 {
                let point: Vec<Rational> = (0..nv).map(|_| random_rational(&mut rng, 20, 20, false)).collect();
                let value = sub.eval(&point).determinant()?;
                if !value.is_zero() {
                    witness = Some((point, value));
                    break;
                }
            }
            let det = sub.determinant()?;
            let (point, value) = match witness {
                Some(w) => w,
                None => match grid_witness(&det) {
                    Some(point) => {
                        let value = det.eval(&point);
                        (point, value)
                    }
                    None => continue,
                },
            };
            return Ok(Some(MinorCertificate {
                rows,
                cols,
                order,
                determinant: det,
                witness: point,
                value,
            }));
        }
    }
    Ok(None)
}

/// Trial that found no nonvanishing minor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjectureFailure {
    pub trial: u64,
    pub subspace: Subspace,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimReport {
    pub dim: usize,
    pub order: MinorOrder,
    /// Infeasible dimensions are skipped, not failed.
    pub skipped: bool,
    pub trials: u64,
    pub certified: u64,
    pub reverified: u64,
    pub certificates: Vec<MinorCertificate>,
    pub failures: Vec<ConjectureFailure>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjectureReport {
    pub d: usize,
    pub k: u32,
    pub l: u32,
    pub seed: u64,
    pub entry_bound: i64,
    pub dims: Vec<DimReport>,
}

impl ConjectureReport {
    pub fn all_certified(&self) -> bool {
        self.dims
            .iter()
            .filter(|d| !d.skipped)
            .all(|d| d.certified == d.trials && d.reverified == d.trials)
    }
}

/// Trial index, subspace, certificate if found, and whether it re-verified.
type TrialOutcome = (u64, Subspace, Option<MinorCertificate>, bool);

/// Draws `trials` random subspaces per dimension and certifies a nonvanishing
/// minor of the required order for each.
pub fn verify_conjecture_samples(
    d: usize,
    k: u32,
    l: u32,
    dims: &[usize],
    trials: u64,
    seed: u64,
    entry_bound: i64,
) -> Result<ConjectureReport> {
    if (d, k) != (2, 3) {
        return Err(LabError::Unsupported(
            "conjecture sampling is implemented for d = 2, k = 3".into(),
        ));
    }
    let sys = MonomialSystem::new(d, k)?;
    let m = sys.derivative_matrix(l)?;
    let n = sys.n();
    let mut reports = Vec::new();
    for &dim in dims {
        let order = required_minor_order(dim, d, k, l)?;
        if !order.feasible {
            reports.push(DimReport {
                dim,
                order,
                skipped: true,
                trials: 0,
                certified: 0,
                reverified: 0,
                certificates: Vec::new(),
                failures: Vec::new(),
            });
            continue;
        }
        let outcomes: Vec<Result<TrialOutcome>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = task_rng(seed, &[l as u64, dim as u64, t]);
                let v = Subspace::random(n, dim, entry_bound, &mut rng)?;
                let mv = restrict_matrix(&m, &v)?;
                let cert = find_nonvanishing_minor(&mv, order.order, rng.gen())?;
                let ok = cert.as_ref().is_some_and(|c| c.verify_against(&mv));
                Ok((t, v, cert, ok))
            })
            .collect();
        let mut rep = DimReport {
            dim,
            order,
            skipped: false,
            trials,
            certified: 0,
            reverified: 0,
            certificates: Vec::new(),
            failures: Vec::new(),
        };
        for out in outcomes {
            let (trial, subspace, cert, ok) = out?;
            match cert {
                Some(c) => {
                    rep.certified += 1;
                    rep.reverified += ok as u64;
                    rep.certificates.push(c);
                }
                None => rep.failures.push(ConjectureFailure { trial, subspace }),
            }
        }
        reports.push(rep);
    }
    Ok(ConjectureReport {
        d,
        k,
        l,
        seed,
        entry_bound,
        dims: reports,
    })
}

/// Coefficients of the second-order Taylor polynomial of `f` at `xi`,
/// constant dropped, in the basis `(r, s, r^2, rs, s^2)`.
pub fn taylor_projection(xi: (&Rational, &Rational), f: &Poly) -> Result<Vec<Rational>> {
    if f.nvars() != 2 {
        return Err(LabError::Dimension {
            expected: 2,
            got: f.nvars(),
        });
    }
    let (a, b) = xi;
    let at = [a.clone(), b.clone()];
    let d = |o: [u32; 2]| f.derivative_multi(&o).eval(&at);
    let (fr, fs) = (d([1, 0]), d([0, 1]));
    let (frr, frs, fss) = (d([2, 0]), d([1, 1]), d([0, 2]));
    let half = ratio(1, 2);
    Ok(vec![
        &fr - a * &frr - b * &frs,
        &fs - a * &frs - b * &fss,
        &half * &frr,
        frs.clone(),
        &half * &fss,
    ])
}

/// `r^3, r^2 s, r s^2, s^3` for ids 0..4.
pub fn cubic_monomial(id: usize) -> Result<Poly> {
    if id > 3 {
        return Err(LabError::param("cubic monomial id must be 0..=3"));
    }
    Ok(Poly::monomial(vec![3 - id as u32, id as u32], Rational::one()))
}

/// `(a,0,-1,0,0), (0,b,0,0,-1), (-b,-a,0,2,0)`.
pub fn projection_generators(a: &Rational, b: &Rational) -> Vec<Vec<Rational>> {
    let z = Rational::zero;
    vec![
        vec![a.clone(), z(), int(-1), z(), z()],
        vec![z(), b.clone(), z(), z(), int(-1)],
        vec![-b.clone(), -a.clone(), z(), int(2), z()],
    ]
}

/// `(v.w1, v.w2)` with `w1 = (1,0,a,b/2,0)`, `w2 = (0,1,0,a/2,b)` spanning the
/// orthogonal complement of the generators.
fn complement_coords(v: &[Rational], a: &Rational, b: &Rational) -> [Rational; 2] {
    let half = ratio(1, 2);
    [
        &v[0] + a * &v[2] + &half * b * &v[3],
        &v[1] + &half * a * &v[3] + b * &v[4],
    ]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankDrop {
    pub trial: u64,
    pub xi: (Rational, Rational),
    pub vectors: Vec<Vec<Rational>>,
    pub rank: usize,
    /// The input satisfies the vanishing condition of its lemma, checked by substitution.
    pub on_locus: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaTally {
    pub name: &'static str,
    pub expected_rank: usize,
    pub trials: u64,
    pub full_rank: u64,
    pub drops: Vec<RankDrop>,
}

impl LemmaTally {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            return 1.0;
        }
        self.full_rank as f64 / self.trials as f64
    }

    pub fn drops_explained(&self) -> bool {
        self.drops.iter().all(|d| d.on_locus)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppendixReport {
    pub seed: u64,
    pub trials: u64,
    pub lemmas: Vec<LemmaTally>,
}

fn random_int_vector(rng: &mut ChaCha8Rng, len: usize, bound: i64) -> Vec<Rational> {
    (0..len).map(|_| int(rng.gen_range(-bound..=bound))).collect()
}

fn stacked_rank(parts: &[&[Vec<Rational>]]) -> usize {
    let rows: Vec<Vec<Rational>> = parts.iter().flat_map(|p| p.iter().cloned()).collect();
    rank_of_rows(&rows).expect("rectangular rows")
}

enum Outcome {
    Full,
    Drop(RankDrop),
}

/// Rank checks at random `xi = (a, b)`, `a, b != 0`, with integer test vectors in `[-9, 9]`.
pub fn appendix_lemma_checks(seed: u64, trials: u64) -> Result<AppendixReport> {
    type Check = fn(u64, &mut ChaCha8Rng, &Rational, &Rational) -> Outcome;
    let checks: [(&'static str, usize, Check); 4] = [
        ("generators", 3, check_generators),
        ("one_vector", 4, check_one_vector),
        ("three_vectors", 5, check_three_vectors),
        ("two_forms", 2, check_two_forms),
    ];
    let mut lemmas = Vec::new();
    for (idx, (name, expected_rank, check)) in checks.into_iter().enumerate() {
        let outcomes: Vec<Outcome> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = task_rng(seed, &[0xa9, idx as u64, t]);
                let a = random_rational(&mut rng, 9, 9, true);
                let b = random_rational(&mut rng, 9, 9, true);
                check(t, &mut rng, &a, &b)
            })
            .collect();
        let mut tally = LemmaTally {
            name,
            expected_rank,
            trials,
            full_rank: 0,
            drops: Vec::new(),
        };
        for o in outcomes {
            match o {
                Outcome::Full => tally.full_rank += 1,
                Outcome::Drop(d) => tally.drops.push(d),
            }
        }
        lemmas.push(tally);
    }
    Ok(AppendixReport { seed, trials, lemmas })
}

/// The generators have rank 3 and the images of the four cubic monomials lie in their span.
fn check_generators(t: u64, _rng: &mut ChaCha8Rng, a: &Rational, b: &Rational) -> Outcome {
    let gens = projection_generators(a, b);
    let images: Vec<Vec<Rational>> = (0..4)
        .map(|i| taylor_projection((a, b), &cubic_monomial(i).expect("id")).expect("bivariate"))
        .collect();
    let g = stacked_rank(&[&gens]);
    let all = stacked_rank(&[&gens, &images]);
    let im = stacked_rank(&[&images]);
    if g == 3 && all == 3 && im == 3 {
        Outcome::Full
    } else {
        Outcome::Drop(RankDrop {
            trial: t,
            xi: (a.clone(), b.clone()),
            vectors: gens,
            rank: g.min(im),
            on_locus: a.is_zero() || b.is_zero(),
        })
    }
}

/// `v` stacked on the generators has rank 4 unless `v` lies in their span.
fn check_one_vector(t: u64, rng: &mut ChaCha8Rng, a: &Rational, b: &Rational) -> Outcome {
    let v = loop {
        let v = random_int_vector(rng, 5, 9);
        if v.iter().any(|x| !x.is_zero()) {
            break v;
        }
    };
    let gens = projection_generators(a, b);
    let rank = stacked_rank(&[&gens, std::slice::from_ref(&v)]);
    if rank == 4 {
        return Outcome::Full;
    }
    let [c1, c2] = complement_coords(&v, a, b);
    Outcome::Drop(RankDrop {
        trial: t,
        xi: (a.clone(), b.clone()),
        on_locus: c1.is_zero() && c2.is_zero(),
        vectors: vec![v],
        rank,
    })
}

/// Independent `v, w, z` stacked on the generators have rank 5 unless their
/// complement coordinates form a 2x3 matrix of rank < 2.
fn check_three_vectors(t: u64, rng: &mut ChaCha8Rng, a: &Rational, b: &Rational) -> Outcome {
    let vs = loop {
        let vs: Vec<Vec<Rational>> = (0..3).map(|_| random_int_vector(rng, 5, 9)).collect();
        if stacked_rank(&[&vs]) == 3 {
            break vs;
        }
    };
    let gens = projection_generators(a, b);
    let rank = stacked_rank(&[&gens, &vs]);
    if rank == 5 {
        return Outcome::Full;
    }
    let coords: Vec<[Rational; 2]> = vs.iter().map(|v| complement_coords(v, a, b)).collect();
    let m: Vec<Vec<Rational>> = (0..2).map(|i| coords.iter().map(|c| c[i].clone()).collect()).collect();
    Outcome::Drop(RankDrop {
        trial: t,
        xi: (a.clone(), b.clone()),
        on_locus: stacked_rank(&[&m]) < 2,
        vectors: vs,
        rank,
    })
}

/// Independent cubic forms `f1, f2` have 2-dimensional projected span unless
/// their derivative vectors `(f_r, f_s, f_rr, f_rs, f_ss)` at `xi` are dependent.
fn check_two_forms(t: u64, rng: &mut ChaCha8Rng, a: &Rational, b: &Rational) -> Outcome {
    let coeffs = loop {
        let c: Vec<Vec<Rational>> = (0..2).map(|_| random_int_vector(rng, 4, 9)).collect();
        if stacked_rank(&[&c]) == 2 {
            break c;
        }
    };
    let forms: Vec<Poly> = coeffs
        .iter()
        .map(|c| {
            c.iter().enumerate().fold(Poly::zero(2), |acc, (i, ci)| {
                &acc + &cubic_monomial(i).expect("id").scale(ci)
            })
        })
        .collect();
    let images: Vec<Vec<Rational>> = forms
        .iter()
        .map(|f| taylor_projection((a, b), f).expect("bivariate"))
        .collect();
    let rank = stacked_rank(&[&images]);
    if rank == 2 {
        return Outcome::Full;
    }
    let at = [a.clone(), b.clone()];
    let derivs: Vec<Vec<Rational>> = forms
        .iter()
        .map(|f| {
            [[1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
                .iter()
                .map(|o| f.derivative_multi(o).eval(&at))
                .collect()
        })
        .collect();
    Outcome::Drop(RankDrop {
        trial: t,
        xi: (a.clone(), b.clone()),
        on_locus: stacked_rank(&[&derivs]) <= 1,
        vectors: coeffs,
        rank,
    })
}

/// Points of `[0,1]^2`, optionally tagged with squares of side `1/K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointConfig {
    points: Vec<(Rational, Rational)>,
    pub squares: Option<(u32, Vec<(u32, u32)>)>,
}

impl PointConfig {
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<Self> {
        let unit = |x: &Rational| !x.is_negative() && *x <= Rational::one();
        if let Some(p) = points.iter().find(|(r, s)| !unit(r) || !unit(s)) {
            return Err(LabError::param(format!(
                "point ({}, {}) outside [0,1]^2",
                format_rational(&p.0),
                format_rational(&p.1)
            )));
        }
        Ok(PointConfig { points, squares: None })
    }

    pub fn random(m: usize, rng: &mut ChaCha8Rng) -> Self {
        let points = (0..m)
            .map(|_| {
                let den = rng.gen_range(1..=97i64);
                let den2 = rng.gen_range(1..=97i64);
                (ratio(rng.gen_range(0..=den), den), ratio(rng.gen_range(0..=den2), den2))
            })
            .collect();
        PointConfig { points, squares: None }
    }

    pub fn points(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlEvaluation {
    pub dim: usize,
    pub rank_sum: usize,
    /// `(n / (d0 M)) * rank_sum`.
    pub rhs: Rational,
    pub holds: bool,
}

/// `dim V <= (n/(d0 M)) sum_j rank M_V^(l)(r_j, s_j)` for one subspace.
pub fn bl_evaluate(sys: &MonomialSystem, points: &PointConfig, l: u32, v: &Subspace) -> Result<BlEvaluation> {
    let m = sys.derivative_matrix(l)?;
    let mv = restrict_matrix(&m, v)?;
    bl_evaluate_restricted(sys, points, l, &mv, v.dim())
}

fn bl_evaluate_restricted(
    sys: &MonomialSystem,
    points: &PointConfig,
    l: u32,
    mv: &PolyMatrix,
    dim: usize,
) -> Result<BlEvaluation> {
    if points.len() < 5 {
        return Err(LabError::param("need at least 5 points"));
    }
    let d0 = sys.derivative_count(l);
    let rank_sum: usize = points
        .points()
        .iter()
        .map(|(r, s)| mv.eval(&[r.clone(), s.clone()]).rank())
        .sum();
    let rhs = Rational::new((sys.n() * rank_sum).into(), (d0 * points.len()).into());
    Ok(BlEvaluation {
        dim,
        rank_sum,
        holds: int(dim as i64) <= rhs,
        rhs,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlViolation {
    pub sample: u64,
    pub subspace: Subspace,
    pub eval: BlEvaluation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlReport {
    pub l: u32,
    pub d0: usize,
    pub n: usize,
    pub points: usize,
    pub samples: u64,
    pub violations: Vec<BlViolation>,
}

/// Checks the dimension inequality on `samples` random subspaces cycling
/// through every dimension `1..=n`.
pub fn bl_condition_check(
    sys: &MonomialSystem,
    points: &PointConfig,
    l: u32,
    samples: u64,
    seed: u64,
) -> Result<BlReport> {
    if points.len() < 5 {
        return Err(LabError::param("need at least 5 points"));
    }
    let m = sys.derivative_matrix(l)?;
    let n = sys.n();
    let results: Vec<Result<Option<BlViolation>>> = (0..samples)
        .into_par_iter()
        .map(|t| {
            let mut rng = task_rng(seed, &[0xb1, l as u64, t]);
            let dim = 1 + (t as usize % n);
            let v = Subspace::random(n, dim, 9, &mut rng)?;
            let mv = restrict_matrix(&m, &v)?;
            let eval = bl_evaluate_restricted(sys, points, l, &mv, dim)?;
            Ok((!eval.holds).then_some(BlViolation {
                sample: t,
                subspace: v,
                eval,
            }))
        })
        .collect();
    let mut violations = Vec::new();
    for r in results {
        if let Some(v) = r? {
            violations.push(v);
        }
    }
    Ok(BlReport {
        l,
        d0: sys.derivative_count(l),
        n,
        points: points.len(),
        samples,
        violations,
    })
}

/// Orthogonal complement of the column space of `M^(l)` at one point.
pub fn orthogonal_complement_at(sys: &MonomialSystem, l: u32, point: (&Rational, &Rational)) -> Result<Subspace> {
    let m = sys.derivative_matrix(l)?.eval(&[point.0.clone(), point.1.clone()]);
    let basis = m.transpose().null_space();
    Subspace::new(sys.n(), basis)
}

/// `(9/5)(999/1000)(floor(5m/9) + 1) >= m`.
pub fn dimension_count_implication(m: u32) -> bool {
    ratio(9, 5) * ratio(999, 1000) * int((5 * m / 9 + 1) as i64) >= int(m as i64)
}

/// Heuristic estimate of the transversality constant of a set of squares.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareProbe {
    pub k: u32,
    pub squares: usize,
    pub degree_bound: u32,
    /// `[m/5] + 1` sets must avoid every near-zero set.
    pub subset_size: usize,
    pub estimate: f64,
    /// Coefficients of the worst probe polynomial, in graded order `1, r, s, r^2, rs, s^2, ...`.
    pub worst_poly: Vec<f64>,
    pub flagged: Vec<(u32, u32)>,
    pub probes: u64,
    pub label: &'static str,
}

pub const HEURISTIC_LABEL: &str = "heuristic estimate, not a certificate";

fn monomials(deg: u32) -> Vec<(u32, u32)> {
    (0..=deg).flat_map(|t| (0..=t).rev().map(move |a| (a, t - a))).collect()
}

fn eval_f64(coeffs: &[f64], mons: &[(u32, u32)], r: f64, s: f64) -> f64 {
    coeffs
        .iter()
        .zip(mons)
        .map(|(c, &(a, b))| c * r.powi(a as i32) * s.powi(b as i32))
        .sum()
}

/// Score, normalised coefficients, per-square ordering.
type Scored = (f64, Vec<f64>, Vec<usize>);

/// Samples unit-l1 polynomials of degree `<= degree_bound` (random ones,
/// zero sets fitted through random square centres, and any `extra` probes)
/// and reports the smallest value over probes of the `([m/5]+1)`-th
/// smallest per-square infimum of `|Q|`, with infima taken on a
/// `point_samples x point_samples` sub-grid of each closed square.
pub fn square_transversality_probe(
    k: u32,
    squares: &[(u32, u32)],
    degree_bound: u32,
    poly_samples: u64,
    point_samples: u32,
    seed: u64,
    extra: &[Vec<f64>],
) -> Result<SquareProbe> {
    if squares.len() < 5 {
        return Err(LabError::param("need at least 5 squares"));
    }
    if k < 1 || squares.iter().any(|&(i, j)| i >= k || j >= k) {
        return Err(LabError::param("squares must lie in Col_K"));
    }
    let mut sorted = squares.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != squares.len() {
        return Err(LabError::param("squares must be distinct"));
    }
    if squares.len() > 1 << 14 {
        return Err(LabError::param("at most 16384 squares"));
    }
    if degree_bound < 1 || point_samples < 2 {
        return Err(LabError::param("degree bound >= 1 and point samples >= 2 required"));
    }
    let mons = monomials(degree_bound);
    if let Some(e) = extra.iter().find(|e| e.len() != mons.len()) {
        return Err(LabError::Dimension {
            expected: mons.len(),
            got: e.len(),
        });
    }
    let t = squares.len() / 5 + 1;
    let kf = k as f64;
    let g = point_samples;
    let grid: Vec<Vec<(f64, f64)>> = squares
        .iter()
        .map(|&(i, j)| {
            let mut pts = Vec::with_capacity((g * g) as usize);
            for a in 0..g {
                for b in 0..g {
                    let r = (i as f64 + a as f64 / (g - 1) as f64) / kf;
                    let s = (j as f64 + b as f64 / (g - 1) as f64) / kf;
                    pts.push((r, s));
                }
            }
            pts
        })
        .collect();
    let score = |coeffs: &[f64]| -> (f64, Vec<usize>) {
        let mut inf: Vec<(f64, usize)> = grid
            .iter()
            .enumerate()
            .map(|(idx, pts)| {
                let m = pts
                    .iter()
                    .map(|&(r, s)| eval_f64(coeffs, &mons, r, s).abs())
                    .fold(f64::INFINITY, f64::min);
                (m, idx)
            })
            .collect();
        inf.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        (inf[t - 1].0, inf[..t].iter().map(|x| x.1).collect())
    };
    let centres: Vec<(Rational, Rational)> = squares
        .iter()
        .map(|&(i, j)| {
            (
                ratio(2 * i as i64 + 1, 2 * k as i64),
                ratio(2 * j as i64 + 1, 2 * k as i64),
            )
        })
        .collect();
    let fit_degree_max = degree_bound.min(3);
    let candidates: Vec<Vec<f64>> = (0..poly_samples)
        .into_par_iter()
        .map(|p| {
            let mut rng = task_rng(seed, &[0x5c, p]);
            let mut c = vec![0.0; mons.len()];
            if p % 2 == 0 {
                for ci in c.iter_mut() {
                    *ci = rng.gen_range(-1.0..=1.0);
                }
            } else {
                // zero set through random centres at a random degree
                let e = 1 + (p / 2) as u32 % fit_degree_max;
                let sub = monomials(e);
                let need = (sub.len() - 1).min(centres.len());
                let pick = sample(&mut rng, centres.len(), need);
                let rows: Vec<Vec<Rational>> = pick
                    .iter()
                    .map(|idx| {
                        let (r, s) = &centres[idx];
                        sub.iter()
                            .map(|&(a, b)| crate::exact::pow(r, a) * crate::exact::pow(s, b))
                            .collect()
                    })
                    .collect();
                let ns = RatMatrix::from_rows(rows).expect("rectangular").null_space();
                if let Some(v) = ns.first() {
                    for (val, m) in v.iter().zip(&sub) {
                        let pos = mons.iter().position(|x| x == m).expect("graded prefix");
                        c[pos] = val.to_f64().unwrap_or(0.0);
                    }
                }
            }
            c
        })
        .chain(extra.to_vec().into_par_iter())
        .collect();
    let mut best: Option<Scored> = None;
    let scored: Vec<Option<Scored>> = candidates
        .into_par_iter()
        .map(|mut c| {
            let norm: f64 = c.iter().map(|x| x.abs()).sum();
            if norm == 0.0 || !norm.is_finite() {
                return None;
            }
            c.iter_mut().for_each(|x| *x /= norm);
            let (v, idx) = score(&c);
            Some((v, c, idx))
        })
        .collect();
    let probes = scored.len() as u64;
    for s in scored.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| s.0 < b.0) {
            best = Some(s);
        }
    }
    let (estimate, worst_poly, idx) = best.ok_or_else(|| LabError::param("no usable probe polynomial"))?;
    Ok(SquareProbe {
        k,
        squares: squares.len(),
        degree_bound,
        subset_size: t,
        estimate,
        worst_poly,
        flagged: idx.into_iter().map(|i| squares[i]).collect(),
        probes,
        label: HEURISTIC_LABEL,
    })
}

/// All `K^2` squares of `Col_K`.
pub fn full_collection(k: u32) -> Vec<(u32, u32)> {
    (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect()
}

/// Coefficient vector of a probe polynomial given as `(r-exponent, s-exponent, coeff)` terms.
pub fn probe_coefficients(degree_bound: u32, terms: &[(u32, u32, f64)]) -> Result<Vec<f64>> {
    let mons = monomials(degree_bound);
    let mut c = vec![0.0; mons.len()];
    for &(a, b, v) in terms {
        let pos = mons
            .iter()
            .position(|&m| m == (a, b))
            .ok_or_else(|| LabError::param("probe term exceeds degree bound"))?;
        c[pos] += v;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minor_orders() {
        let got: Vec<usize> = [8, 6, 4, 2]
            .iter()
            .map(|&d| required_minor_order(d, 2, 3, 2).unwrap().order)
            .collect();
        assert_eq!(got, vec![5, 4, 3, 2]);
        let e = required_minor_order(9, 2, 3, 1).unwrap();
        assert_eq!((e.order, e.feasible), (3, false));
        assert!(!required_minor_order(9, 2, 3, 2).unwrap().feasible);
    }

    #[test]
    fn cubic_restriction_and_certificate() {
        let sys = MonomialSystem::new(2, 3).unwrap();
        let m2 = sys.derivative_matrix(2).unwrap();
        let v = Subspace::coordinate(9, &[5, 6, 7, 8]).unwrap();
        let mv = restrict_matrix(&m2, &v).unwrap();
        assert_eq!((mv.rows(), mv.cols()), (4, 5));
        let r = Poly::var(2, 0);
        assert_eq!(mv.get(0, 0), &(&(&r * &r) * &Poly::constant(2, int(3))));
        assert_eq!(mv.get(0, 2), &r.scale(&int(6)));
        let det = mv.select(&[0, 1, 3], &[2, 3, 4]).determinant().unwrap();
        assert_eq!(det, Poly::monomial(vec![2, 1], int(72)));
        let cert = find_nonvanishing_minor(&mv, 3, 1).unwrap().unwrap();
        assert!(cert.verify_against(&mv));
    }

    #[test]
    fn degenerate_outer_product() {
        let r = Poly::var(2, 0);
        let s = Poly::var(2, 1);
        let u = [r.clone(), s.clone(), &r + &s];
        let w = [s.clone(), Poly::constant(2, int(1))];
        let cols = w.iter().map(|wj| u.iter().map(|ui| ui * wj).collect()).collect();
        let m = PolyMatrix::from_columns(cols, 2).unwrap();
        assert!(find_nonvanishing_minor(&m, 2, 0).unwrap().is_none());
        assert!(find_nonvanishing_minor(&m, 1, 0).unwrap().is_some());
    }

    #[test]
    fn projection_vectors() {
        let (a, b) = (ratio(2, 3), ratio(-5, 7));
        let r3 = taylor_projection((&a, &b), &cubic_monomial(0).unwrap()).unwrap();
        assert_eq!(r3, vec![int(-3) * &a * &a, int(0), int(3) * &a, int(0), int(0)]);
        let s3 = taylor_projection((&a, &b), &cubic_monomial(3).unwrap()).unwrap();
        assert_eq!(s3, vec![int(0), int(-3) * &b * &b, int(0), int(0), int(3) * &b]);
        let rs = Poly::monomial(vec![1, 1], int(1));
        assert_eq!(
            taylor_projection((&a, &b), &rs).unwrap(),
            vec![int(0), int(0), int(0), int(1), int(0)]
        );
    }

    #[test]
    fn generators_rank_at_one_one() {
        assert_eq!(rank_of_rows(&projection_generators(&int(1), &int(1))).unwrap(), 3);
    }

    #[test]
    fn one_vector_e3() {
        let e3 = vec![int(0), int(0), int(1), int(0), int(0)];
        let gens = projection_generators(&ratio(3, 4), &ratio(-2, 5));
        assert_eq!(stacked_rank(&[&gens, std::slice::from_ref(&e3)]), 4);
    }

    #[test]
    fn complement_is_orthogonal() {
        let (a, b) = (ratio(3, 2), ratio(-1, 3));
        for g in projection_generators(&a, &b) {
            let [c1, c2] = complement_coords(&g, &a, &b);
            assert!(c1.is_zero() && c2.is_zero());
        }
    }

    #[test]
    fn bl_complement_violates() {
        let sys = MonomialSystem::new(2, 3).unwrap();
        let (r, s) = (ratio(1, 3), ratio(2, 5));
        let pts = PointConfig::new(vec![(r.clone(), s.clone()); 5]).unwrap();
        let v = orthogonal_complement_at(&sys, 1, (&r, &s)).unwrap();
        assert_eq!(v.dim(), 7);
        let e = bl_evaluate(&sys, &pts, 1, &v).unwrap();
        assert_eq!(e.rank_sum, 0);
        assert!(!e.holds);
        let full = bl_evaluate(&sys, &pts, 1, &Subspace::full(9)).unwrap();
        assert_eq!(full.rhs, int(9));
        assert!(full.holds);
    }

    #[test]
    fn dimension_count_arithmetic() {
        assert!((1..=9).all(dimension_count_implication));
    }

    #[test]
    fn strip_of_squares_has_small_nu() {
        let sq: Vec<(u32, u32)> = (0..8).map(|i| (i, 0)).collect();
        let p = square_transversality_probe(8, &sq, 2, 200, 5, 3, &[]).unwrap();
        assert!(p.estimate < 1e-12, "{p:?}");
        assert!(square_transversality_probe(8, &sq[..4], 2, 10, 3, 3, &[]).is_err());
    }
}
