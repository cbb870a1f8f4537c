//! Exact solution counts `J_{s,d,k}(N)` for Parsell-Vinogradov systems.
//!
//! `J` is the number of pairs of `s`-tuples in `{1..N}^d` with equal
//! moment-vector sums, i.e. `sum_v r(v)^2` where `r` is the histogram of
//! `s`-fold sums of `Phi`. The histogram is built meet-in-the-middle from a
//! `split`-fold and an `(s - split)`-fold half; a plain enumeration of all
//! `2s`-tuples serves as the oracle.

use std::collections::HashMap;
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{LabError, Result};
use crate::exact::{format_rational, int, Rational};
use crate::monomial::{kappa, MonomialSystem};

pub const DEFAULT_MEM_CAP: u64 = 2 << 30;
pub const DEFAULT_ENUM_CAP: u128 = 1_000_000_000;

/// Rough per-entry overhead of a hash table slot beyond key and count.
const ENTRY_OVERHEAD: u64 = 24;

#[derive(Clone, Debug)]
pub struct CountConfig {
    /// Budget for the estimated histogram size, in bytes.
    pub mem_cap_bytes: u64,
    /// Maximum number of `2s`-tuples the brute-force oracle may visit.
    pub enum_cap: u128,
    /// Number of shards for parallel histogram construction.
    pub shards: usize,
    /// Meet-in-the-middle split; `None` means `ceil(s / 2)`.
    pub split: Option<usize>,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig {
            mem_cap_bytes: DEFAULT_MEM_CAP,
            enum_cap: DEFAULT_ENUM_CAP,
            shards: 8,
            split: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MeetInMiddle,
    BruteForce,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::MeetInMiddle => write!(f, "mitm"),
            Method::BruteForce => write!(f, "brute"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CountResult {
    pub system: MonomialSystem,
    pub s: usize,
    pub n: u64,
    pub j: BigUint,
    pub method: Method,
    pub elapsed: Duration,
}

type Key = SmallVec<[u8; 24]>;

/// Fixed-width big-endian layout of a moment vector. Coordinate `i` gets
/// enough bytes for `s * N^{|alpha_i|}`, so partial sums never carry across
/// fields and key addition is plain big-integer addition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyLayout {
    widths: Vec<usize>,
    bounds: Vec<u128>,
}

impl KeyLayout {
    pub fn new(sys: &MonomialSystem, s: usize, n: u64) -> Result<Self> {
        let mut widths = Vec::with_capacity(sys.n());
        let mut bounds = Vec::with_capacity(sys.n());
        for i in 0..sys.n() {
            let bound = checked_pow(n as u128, sys.degree_of(i))
                .and_then(|p| p.checked_mul(s as u128))
                .ok_or_else(|| LabError::ResourceCap {
                    what: "moment coordinate",
                    needed: format!("{s}*{n}^{}", sys.degree_of(i)),
                    cap: "2^128".into(),
                })?;
            let bits = 128 - bound.leading_zeros() as usize;
            widths.push(bits.div_ceil(8).max(1));
            bounds.push(bound);
        }
        Ok(KeyLayout { widths, bounds })
    }

    pub fn key_len(&self) -> usize {
        self.widths.iter().sum()
    }

    pub fn bounds(&self) -> &[u128] {
        &self.bounds
    }

    pub fn encode(&self, v: &[u128]) -> Key {
        let mut key = Key::with_capacity(self.key_len());
        for (&x, &w) in v.iter().zip(&self.widths) {
            key.extend_from_slice(&x.to_be_bytes()[16 - w..]);
        }
        key
    }

    pub fn decode(&self, key: &[u8]) -> Vec<u128> {
        let mut out = Vec::with_capacity(self.widths.len());
        let mut pos = 0;
        for &w in &self.widths {
            let mut buf = [0u8; 16];
            buf[16 - w..].copy_from_slice(&key[pos..pos + w]);
            out.push(u128::from_be_bytes(buf));
            pos += w;
        }
        out
    }
}

fn add_keys(a: &[u8], b: &[u8]) -> Key {
    let mut out: Key = SmallVec::from_slice(a);
    let mut carry = 0u16;
    for i in (0..out.len()).rev() {
        let v = out[i] as u16 + b[i] as u16 + carry;
        out[i] = v as u8;
        carry = v >> 8;
    }
    debug_assert_eq!(carry, 0, "key addition overflowed its layout");
    out
}

fn checked_pow(base: u128, exp: u32) -> Option<u128> {
    base.checked_pow(exp)
}

/// Histogram `r(v)` of `s`-fold sums of `Phi` over `{1..N}^d`.
#[derive(Clone, Debug)]
pub struct MomentHistogram {
    system: MonomialSystem,
    s: usize,
    n: u64,
    layout: KeyLayout,
    table: HashMap<Key, u64>,
}

impl MomentHistogram {
    pub fn system(&self) -> &MonomialSystem {
        &self.system
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn box_size(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn layout(&self) -> &KeyLayout {
        &self.layout
    }

    /// `r(v)`, zero when `v` is not a key.
    pub fn get(&self, v: &[u128]) -> u64 {
        if v.len() != self.layout.widths.len() || v.iter().zip(&self.layout.bounds).any(|(x, b)| x > b) {
            return 0;
        }
        self.table.get(&self.layout.encode(v)).copied().unwrap_or(0)
    }

    /// Decoded `(v, r(v))` pairs in canonical key order.
    pub fn entries(&self) -> Vec<(Vec<u128>, u64)> {
        let mut keys: Vec<&Key> = self.table.keys().collect();
        keys.sort();
        keys.into_iter()
            .map(|k| (self.layout.decode(k), self.table[k]))
            .collect()
    }

    /// `sum_v r(v)`; equals `N^{ds}`.
    pub fn total(&self) -> BigUint {
        sum_big(self.table.values().map(|&c| c as u128))
    }

    /// `sum_v r(v)^2`, computed as a sharded reduction.
    pub fn sum_of_squares(&self) -> BigUint {
        let counts: Vec<u64> = self.table.values().copied().collect();
        counts
            .par_chunks(4096)
            .map(|chunk| sum_big(chunk.iter().map(|&c| (c as u128) * (c as u128))))
            .reduce(BigUint::zero, |a, b| a + b)
    }

    /// True when both histograms hold identical tables.
    pub fn same_table(&self, other: &MomentHistogram) -> bool {
        self.layout == other.layout && self.table == other.table
    }

    /// Checks `sum r = N^{ds}` and `0 < v_i <= s N^{|alpha_i|}` for every key.
    pub fn check_invariants(&self) -> bool {
        let expected = BigUint::from(self.n).pow((self.system.d() * self.s) as u32);
        if self.total() != expected {
            return false;
        }
        self.table.keys().all(|k| {
            self.layout
                .decode(k)
                .iter()
                .zip(&self.layout.bounds)
                .all(|(&v, &b)| v > 0 && v <= b)
        })
    }
}

/// Sums `u128` terms exactly, spilling into a big integer on overflow.
fn sum_big(values: impl Iterator<Item = u128>) -> BigUint {
    let mut big = BigUint::zero();
    let mut acc: u128 = 0;
    for v in values {
        match acc.checked_add(v) {
            Some(x) => acc = x,
            None => {
                big += BigUint::from(acc);
                acc = v;
            }
        }
    }
    big + BigUint::from(acc)
}

fn validate(sys: &MonomialSystem, s: usize, n: u64) -> Result<()> {
    if s < 1 {
        return Err(LabError::param("s must be >= 1"));
    }
    if n < 1 {
        return Err(LabError::param("N must be >= 1"));
    }
    let tuples = checked_pow(n as u128, (sys.d() * s) as u32);
    if tuples.is_none_or(|t| t > u64::MAX as u128) {
        return Err(LabError::ResourceCap {
            what: "representation count N^(ds)",
            needed: format!("{n}^{}", sys.d() * s),
            cap: "2^64".into(),
        });
    }
    Ok(())
}

fn box_points(d: usize, n: u64) -> Vec<Vec<u64>> {
    let mut points = vec![vec![]];
    for _ in 0..d {
        points = points
            .into_iter()
            .flat_map(|p| {
                (1..=n).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    points
}

fn convolve(a: &HashMap<Key, u64>, b: &HashMap<Key, u64>, shards: usize) -> HashMap<Key, u64> {
    let left: Vec<(&Key, &u64)> = a.iter().collect();
    let right: Vec<(&Key, &u64)> = b.iter().collect();
    let chunk = left.len().div_ceil(shards.max(1)).max(1);
    left.par_chunks(chunk)
        .map(|part| {
            let mut local: HashMap<Key, u64> = HashMap::new();
            for (ka, &ca) in part {
                for (kb, &cb) in &right {
                    *local.entry(add_keys(ka, kb)).or_insert(0) += ca * cb;
                }
            }
            local
        })
        .reduce(HashMap::new, merge_tables)
}

fn merge_tables(a: HashMap<Key, u64>, b: HashMap<Key, u64>) -> HashMap<Key, u64> {
    let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    for (k, c) in small {
        *big.entry(k).or_insert(0) += c;
    }
    big
}

fn estimate_bytes(keys: u128, key_len: usize) -> u128 {
    keys.saturating_mul(key_len as u128 + 8 + ENTRY_OVERHEAD as u128)
}

/// Builds `r` for `s`-fold sums by convolving a `split`-fold and an
/// `(s - split)`-fold histogram.
pub fn build_histogram(
    sys: &MonomialSystem,
    s: usize,
    n: u64,
    split: usize,
    cfg: &CountConfig,
) -> Result<MomentHistogram> {
    validate(sys, s, n)?;
    if split < 1 || split > s {
        return Err(LabError::param(format!("split must lie in 1..={s}, got {split}")));
    }
    let layout = KeyLayout::new(sys, s, n)?;
    let half = split.max(s - split);
    let half_keys = checked_pow(n as u128, (sys.d() * half) as u32).unwrap_or(u128::MAX);
    let box_keys: u128 = layout.bounds.iter().fold(1u128, |acc, &b| acc.saturating_mul(b));
    let full_keys = checked_pow(n as u128, (sys.d() * s) as u32)
        .unwrap_or(u128::MAX)
        .min(box_keys);
    let needed = estimate_bytes(half_keys.max(full_keys), layout.key_len());
    if needed > cfg.mem_cap_bytes as u128 {
        return Err(LabError::ResourceCap {
            what: "histogram memory estimate",
            needed: format!("{needed} bytes"),
            cap: format!("{} bytes", cfg.mem_cap_bytes),
        });
    }

    let mut single: HashMap<Key, u64> = HashMap::new();
    for p in box_points(sys.d(), n) {
        *single.entry(layout.encode(&sys.phi_eval_u128(&p))).or_insert(0) += 1;
    }
    // powers[j] = histogram of j-fold sums, built up to the larger half
    let mut powers = vec![single.clone()];
    while powers.len() < half {
        let next = convolve(powers.last().expect("nonempty"), &single, cfg.shards);
        powers.push(next);
    }
    let table = if split == s {
        powers[s - 1].clone()
    } else {
        convolve(&powers[split - 1], &powers[s - split - 1], cfg.shards)
    };
    Ok(MomentHistogram {
        system: sys.clone(),
        s,
        n,
        layout,
        table,
    })
}

/// `J_{s,d,k}(N) = sum_v r(v)^2` via the meet-in-the-middle histogram.
pub fn count_j(sys: &MonomialSystem, s: usize, n: u64, cfg: &CountConfig) -> Result<CountResult> {
    let start = Instant::now();
    let split = cfg.split.unwrap_or(s.div_ceil(2).max(1));
    let hist = build_histogram(sys, s, n, split, cfg)?;
    let j = hist.sum_of_squares();
    Ok(CountResult {
        system: sys.clone(),
        s,
        n,
        j,
        method: Method::MeetInMiddle,
        elapsed: start.elapsed(),
    })
}

/// Direct enumeration of every `2s`-tuple in `{1..N}^d`.
pub fn brute_force_j(sys: &MonomialSystem, s: usize, n: u64, cfg: &CountConfig) -> Result<CountResult> {
    let start = Instant::now();
    validate(sys, s, n)?;
    let total = checked_pow(n as u128, (2 * sys.d() * s) as u32);
    if total.is_none_or(|t| t > cfg.enum_cap) {
        return Err(LabError::ResourceCap {
            what: "brute-force enumeration",
            needed: format!("{n}^{}", 2 * sys.d() * s),
            cap: cfg.enum_cap.to_string(),
        });
    }
    // moment coordinates are below s*N^k, which the layout check bounds
    KeyLayout::new(sys, s, n)?;
    let phis: Vec<Vec<i128>> = box_points(sys.d(), n)
        .iter()
        .map(|p| sys.phi_eval_u128(p).into_iter().map(|x| x as i128).collect())
        .collect();
    let slots = 2 * s;
    let count: u128 = (0..phis.len())
        .into_par_iter()
        .map(|first| {
            let mut diff = phis[first].clone();
            let mut hits = 0u128;
            enumerate(&phis, s, slots, 1, &mut diff, &mut hits);
            hits
        })
        .sum();
    Ok(CountResult {
        system: sys.clone(),
        s,
        n,
        j: BigUint::from(count),
        method: Method::BruteForce,
        elapsed: start.elapsed(),
    })
}

fn enumerate(phis: &[Vec<i128>], s: usize, slots: usize, pos: usize, diff: &mut [i128], hits: &mut u128) {
    if pos == slots {
        if diff.iter().all(|&x| x == 0) {
            *hits += 1;
        }
        return;
    }
    let sign: i128 = if pos < s { 1 } else { -1 };
    for phi in phis {
        for (d, &x) in diff.iter_mut().zip(phi) {
            *d += sign * x;
        }
        enumerate(phis, s, slots, pos + 1, diff, hits);
        for (d, &x) in diff.iter_mut().zip(phi) {
            *d -= sign * x;
        }
    }
}

/// One term of the classical lower bound: the diagonal `N^{sd}` or the
/// `j`-th term `N^{(2s-1)j + d - K_{j,k}}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum BoundTerm {
    Diagonal,
    J(u32),
}

impl fmt::Display for BoundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundTerm::Diagonal => write!(f, "diagonal"),
            BoundTerm::J(j) => write!(f, "j={j}"),
        }
    }
}

/// Exponent of `N` in each lower-bound term, as a line `slope * (2s) + intercept`.
fn bound_lines(d: usize, k: u32) -> Result<Vec<(BoundTerm, Rational, Rational)>> {
    let mut lines = vec![(
        BoundTerm::Diagonal,
        Rational::new(BigInt::from(d), BigInt::from(2)),
        int(0),
    )];
    for j in 1..=d as u32 {
        // (2s - 1) j + d - K  =  j * (2s) + (d - j - K)
        let intercept = int(d as i64 - j as i64) - kappa(j, k)?;
        lines.push((BoundTerm::J(j), int(j as i64), intercept));
    }
    Ok(lines)
}

fn check_dk(d: usize, k: u32) -> Result<()> {
    MonomialSystem::new(d, k).map(|_| ())
}

/// `max(sd, max_j [(2s-1)j + d - K_{j,k}])` with every maximising term.
pub fn lower_bound_exponent(d: usize, k: u32, s: u64) -> Result<(Rational, Vec<BoundTerm>)> {
    check_dk(d, k)?;
    if s < 1 {
        return Err(LabError::param("s must be >= 1"));
    }
    let x = int(2 * s as i64);
    let values: Vec<(BoundTerm, Rational)> = bound_lines(d, k)?
        .into_iter()
        .map(|(t, m, b)| (t, m * &x + b))
        .collect();
    let best = values.iter().map(|(_, v)| v).max().expect("nonempty").clone();
    let terms = values.into_iter().filter(|(_, v)| *v == best).map(|(t, _)| t).collect();
    Ok((best, terms))
}

/// A maximal interval of `2s` on which one lower-bound term dominates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Regime {
    /// Left end of the interval in `2s`.
    pub from: Rational,
    pub from_closed: bool,
    /// Right end (closed); `None` means unbounded.
    pub to: Option<Rational>,
    pub term: BoundTerm,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.from_closed { "[" } else { "(" };
        match &self.to {
            Some(t) => write!(
                f,
                "2s in {open}{}, {}]: {}",
                format_rational(&self.from),
                format_rational(t),
                self.term
            ),
            None => write!(f, "2s in {open}{}, inf): {}", format_rational(&self.from), self.term),
        }
    }
}

/// Partitions `2s >= 2` by the dominating lower-bound term, by walking the
/// upper envelope of the `d + 1` exponent lines.
pub fn regime_analysis(d: usize, k: u32) -> Result<Vec<Regime>> {
    check_dk(d, k)?;
    let lines = bound_lines(d, k)?;
    let at = |i: usize, x: &Rational| &lines[i].1 * x + &lines[i].2;
    let mut x = int(2);
    // steepest among the maximisers at x = 2 dominates just to the right
    let mut current = (0..lines.len())
        .max_by(|&a, &b| at(a, &x).cmp(&at(b, &x)).then(lines[a].1.cmp(&lines[b].1)))
        .expect("nonempty");
    let mut regimes = Vec::new();
    let mut closed = true;
    loop {
        let mut next: Option<(Rational, usize)> = None;
        for (i, (_, slope, icept)) in lines.iter().enumerate() {
            if *slope <= lines[current].1 {
                continue;
            }
            let cross = (&lines[current].2 - icept) / (slope - &lines[current].1);
            if cross < x {
                continue;
            }
            let better = match &next {
                None => true,
                Some((c, j)) => cross < *c || (cross == *c && *slope > lines[*j].1),
            };
            if better {
                next = Some((cross, i));
            }
        }
        match next {
            Some((cross, i)) => {
                regimes.push(Regime {
                    from: x.clone(),
                    from_closed: closed,
                    to: Some(cross.clone()),
                    term: lines[current].0,
                });
                x = cross;
                current = i;
                closed = false;
            }
            None => {
                regimes.push(Regime {
                    from: x,
                    from_closed: closed,
                    to: None,
                    term: lines[current].0,
                });
                return Ok(regimes);
            }
        }
    }
}

/// Exponent of the proved upper bound for `(d, k)` in `{(1, k), (2, 2), (2, 3)}`.
pub fn upper_bound_exponent(d: usize, k: u32, s: u64) -> Result<Rational> {
    check_dk(d, k)?;
    if s < 1 {
        return Err(LabError::param("s must be >= 1"));
    }
    let supported = d == 1 || (d == 2 && (k == 2 || k == 3));
    if !supported {
        return Err(LabError::Unsupported(format!(
            "upper bound for d={d}, k={k} is conjectural only"
        )));
    }
    let s_r = int(s as i64);
    let d_r = int(d as i64);
    let diagonal = &s_r * &d_r;
    let top = int(2 * d as i64) * &s_r - kappa(d as u32, k)?;
    Ok(diagonal.max(top))
}

/// `N^{sd}` as a big integer.
pub fn diagonal_count(d: usize, s: usize, n: u64) -> BigUint {
    BigUint::from(n).pow((d * s) as u32)
}

/// Least-squares slope of `log J` against `log N`; a diagnostic only.
pub fn loglog_slope(points: &[(u64, BigUint)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|(_, j)| j.to_f64().unwrap_or(f64::INFINITY).ln())
        .collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn sys(d: usize, k: u32) -> MonomialSystem {
        MonomialSystem::new(d, k).unwrap()
    }

    #[test]
    fn single_fold_histogram() {
        let h = build_histogram(&sys(1, 2), 1, 2, 1, &CountConfig::default()).unwrap();
        assert_eq!(h.entries(), vec![(vec![1, 1], 1), (vec![2, 4], 1)]);
        assert!(h.check_invariants());
    }

    #[test]
    fn totals() {
        let cfg = CountConfig::default();
        let h = build_histogram(&sys(1, 2), 2, 2, 1, &cfg).unwrap();
        assert_eq!(h.total(), BigUint::from(4u32));
        let h = build_histogram(&sys(2, 2), 2, 2, 1, &cfg).unwrap();
        assert_eq!(h.total(), BigUint::from(16u32));
        assert!(h.check_invariants());
    }

    #[test]
    fn split_validation() {
        let cfg = CountConfig::default();
        assert!(build_histogram(&sys(1, 2), 2, 2, 0, &cfg).is_err());
        assert!(build_histogram(&sys(1, 2), 2, 2, 3, &cfg).is_err());
        assert!(count_j(&sys(1, 2), 0, 2, &cfg).is_err());
        assert!(count_j(&sys(1, 2), 1, 0, &cfg).is_err());
    }

    #[test]
    fn memory_cap_is_an_error() {
        let cfg = CountConfig {
            mem_cap_bytes: 1000,
            ..CountConfig::default()
        };
        let err = count_j(&sys(2, 3), 3, 6, &cfg).unwrap_err();
        assert!(err.is_resource());
    }

    #[test]
    fn enumeration_cap_is_an_error() {
        let cfg = CountConfig {
            enum_cap: 100,
            ..CountConfig::default()
        };
        assert!(brute_force_j(&sys(1, 2), 2, 4, &cfg).unwrap_err().is_resource());
    }

    #[test]
    fn key_layout_round_trip() {
        let layout = KeyLayout::new(&sys(2, 3), 3, 6).unwrap();
        let v = vec![18, 1, 108, 7, 99, 648, 300, 2, 1];
        assert_eq!(layout.decode(&layout.encode(&v)), v);
        // 18 and 108 fit in a byte, 648 needs two
        assert_eq!(layout.key_len(), 5 + 8);
    }

    #[test]
    fn small_counts() {
        let cfg = CountConfig::default();
        assert_eq!(count_j(&sys(1, 2), 2, 3, &cfg).unwrap().j, BigUint::from(15u32));
        assert_eq!(brute_force_j(&sys(1, 2), 2, 3, &cfg).unwrap().j, BigUint::from(15u32));
        let lin = MonomialSystem::linear_fixture();
        assert_eq!(count_j(&lin, 2, 2, &cfg).unwrap().j, BigUint::from(6u32));
        assert_eq!(brute_force_j(&sys(2, 3), 1, 4, &cfg).unwrap().j, BigUint::from(16u32));
    }

    #[test]
    fn lower_bound_examples() {
        let (e, terms) = lower_bound_exponent(2, 3, 10).unwrap();
        assert_eq!(e, int(20));
        assert_eq!(terms, vec![BoundTerm::Diagonal, BoundTerm::J(2)]);
        for k in 2..=6u32 {
            for s in 1..=40u64 {
                let (e, _) = lower_bound_exponent(1, k, s).unwrap();
                let kk = (k * (k + 1) / 2) as i64;
                assert_eq!(e, int(s as i64).max(int(2 * s as i64 - kk)));
            }
        }
        let (e, terms) = lower_bound_exponent(3, 5, 70).unwrap();
        assert_eq!(terms, vec![BoundTerm::J(2)]);
        assert_eq!(e, int(211));
    }

    #[test]
    fn two_regimes_for_d2() {
        for k in 2..=6i64 {
            let regimes = regime_analysis(2, k as u32).unwrap();
            assert_eq!(regimes.len(), 2, "k={k}");
            assert_eq!(regimes[0].to, Some(ratio(k * (k + 1) * (k + 2), 3)));
            assert_eq!(regimes[1].term, BoundTerm::J(2));
        }
        let r = regime_analysis(1, 4).unwrap();
        assert_eq!(r[0].to, Some(int(20)));
    }

    #[test]
    fn d3_regime_counts() {
        assert_eq!(regime_analysis(3, 4).unwrap().len(), 2);
        let r = regime_analysis(3, 5).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r[0].to, Some(int(138)));
        assert_eq!(r[1].term, BoundTerm::J(2));
        assert_eq!(r[1].to, Some(int(141)));
    }

    #[test]
    fn upper_bounds() {
        for s in 1..=30u64 {
            let si = s as i64;
            assert_eq!(
                upper_bound_exponent(2, 3, s).unwrap(),
                int(2 * si).max(int(4 * si - 20))
            );
            assert_eq!(upper_bound_exponent(2, 2, s).unwrap(), int(2 * si).max(int(4 * si - 8)));
            assert_eq!(upper_bound_exponent(1, 5, s).unwrap(), int(si).max(int(2 * si - 15)));
        }
        assert!(matches!(upper_bound_exponent(3, 3, 4), Err(LabError::Unsupported(_))));
    }
}
