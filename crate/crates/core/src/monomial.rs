//! Parsell-Vinogradov systems: multi-index enumeration, the moment map and
//! its symbolic derivative matrices.
//!
//! Multi-indices are ordered by total degree, ties broken lexicographically
//! with the first variable most significant, so for `d = 2, k = 3` the
//! moment map reads `(r, s, r^2, rs, s^2, r^3, r^2 s, r s^2, s^3)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{LabError, Result};
use crate::exact::{binomial_usize, Rational};
use crate::linalg::PolyMatrix;
use crate::poly::Poly;

/// Exponent vector of a monomial.
pub type MultiIndex = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialSystem {
    d: usize,
    k: u32,
    indices: Vec<MultiIndex>,
}

impl MonomialSystem {
    /// All multi-indices `alpha` in `d` variables with `1 <= |alpha| <= k`.
    pub fn new(d: usize, k: u32) -> Result<Self> {
        if d < 1 {
            return Err(LabError::param(format!("d must be >= 1, got {d}")));
        }
        if k < 2 {
            return Err(LabError::param(format!("k must be >= 2, got {k}")));
        }
        Ok(Self::build(d, k))
    }

    /// The single linear equation `sum x_j = sum y_j` in one variable. Not a
    /// Parsell-Vinogradov system; kept as the smallest counting fixture.
    pub fn linear_fixture() -> Self {
        Self::build(1, 1)
    }

    fn build(d: usize, k: u32) -> Self {
        let mut indices = Vec::new();
        for deg in 1..=k {
            let mut level = Vec::new();
            compositions(d, deg, &mut vec![0; d], 0, &mut level);
            // descending exponent vectors: r^2 before rs before s^2
            level.sort_by(|a, b| b.cmp(a));
            indices.extend(level);
        }
        MonomialSystem { d, k, indices }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Ambient dimension `C(d+k, k) - 1`.
    pub fn n(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn degree_of(&self, i: usize) -> u32 {
        self.indices[i].iter().sum()
    }

    pub fn is_linear_fixture(&self) -> bool {
        self.k == 1
    }

    /// `Phi(t)`: coordinate `i` is `t^{alpha_i}`.
    pub fn phi_eval(&self, t: &[Rational]) -> Result<Vec<Rational>> {
        self.check_len(t.len())?;
        Ok(self
            .indices
            .iter()
            .map(|alpha| {
                let mut acc = Rational::one();
                for (x, &e) in t.iter().zip(alpha) {
                    if e > 0 {
                        acc *= num_traits::pow(x.clone(), e as usize);
                    }
                }
                acc
            })
            .collect())
    }

    /// Integer specialisation of [`phi_eval`](Self::phi_eval).
    pub fn phi_eval_int(&self, t: &[BigInt]) -> Result<Vec<BigInt>> {
        self.check_len(t.len())?;
        Ok(self
            .indices
            .iter()
            .map(|alpha| {
                t.iter().zip(alpha).fold(BigInt::one(), |acc, (x, &e)| {
                    acc * num_traits::pow(x.clone(), e as usize)
                })
            })
            .collect())
    }

    /// Machine-integer moment vector, used by the counters. Overflow is
    /// the caller's responsibility (see the counting module's bounds checks).
    pub fn phi_eval_u128(&self, t: &[u64]) -> Vec<u128> {
        self.indices
            .iter()
            .map(|alpha| {
                t.iter()
                    .zip(alpha)
                    .fold(1u128, |acc, (&x, &e)| acc * (x as u128).pow(e))
            })
            .collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.d {
            return Err(LabError::Dimension {
                expected: self.d,
                got: len,
            });
        }
        Ok(())
    }

    /// Symbolic `Phi` as polynomials in `d` variables.
    pub fn phi_symbolic(&self) -> Vec<Poly> {
        self.indices
            .iter()
            .map(|alpha| Poly::monomial(alpha.clone(), Rational::one()))
            .collect()
    }

    /// `M^(l)(t)`: `n x (C(d+l, l) - 1)` matrix whose columns are the partial
    /// derivatives `Phi^(beta)` for `1 <= |beta| <= l`, in canonical order.
    pub fn derivative_matrix(&self, l: u32) -> Result<PolyMatrix> {
        if !(1..=2).contains(&l) {
            return Err(LabError::param(format!("l must be 1 or 2, got {l}")));
        }
        if l >= self.k {
            return Err(LabError::param(format!("l = {l} must be smaller than k = {}", self.k)));
        }
        let phi = self.phi_symbolic();
        let orders = Self::build(self.d, l).indices;
        let columns = orders
            .iter()
            .map(|beta| phi.iter().map(|p| p.derivative_multi(beta)).collect())
            .collect();
        PolyMatrix::from_columns(columns, self.d)
    }

    /// Number of derivative columns for order `l`.
    pub fn derivative_count(&self, l: u32) -> usize {
        binomial_usize(self.d + l as usize, l as usize) - 1
    }
}

fn compositions(d: usize, remaining: u32, current: &mut Vec<u32>, pos: usize, out: &mut Vec<MultiIndex>) {
    if pos == d - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for e in 0..=remaining {
        current[pos] = e;
        compositions(d, remaining - e, current, pos + 1, out);
    }
    current[pos] = 0;
}

impl fmt::Display for MonomialSystem {
    /// `PV(d=2,k=3) [(1,0),(0,1),...]`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_linear_fixture() {
            write!(f, "LINEAR(d=1)")?;
        } else {
            write!(f, "PV(d={},k={})", self.d, self.k)?;
        }
        let list: Vec<String> = self
            .indices
            .iter()
            .map(|a| {
                let parts: Vec<String> = a.iter().map(u32::to_string).collect();
                format!("({})", parts.join(","))
            })
            .collect();
        write!(f, " [{}]", list.join(","))
    }
}

/// `K_{j,k} = (j k / (j + 1)) * C(k + j, j)`.
pub fn kappa(j: u32, k: u32) -> Result<Rational> {
    if j < 1 {
        return Err(LabError::param("j must be >= 1"));
    }
    if k < 2 {
        return Err(LabError::param("k must be >= 2"));
    }
    let binom = crate::exact::binomial((k + j) as u64, j as u64);
    Ok(Rational::new(
        BigInt::from(j as u64 * k as u64) * BigInt::from(binom),
        BigInt::from(j + 1),
    ))
}

/// True when every coordinate is zero.
pub fn is_zero_vector(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn enumerate_small_systems() {
        let s = MonomialSystem::new(1, 2).unwrap();
        assert_eq!(s.indices(), &[vec![1], vec![2]]);
        assert_eq!(s.n(), 2);

        let s = MonomialSystem::new(2, 2).unwrap();
        assert_eq!(
            s.indices(),
            &[vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        assert_eq!(MonomialSystem::new(2, 3).unwrap().n(), 9);
    }

    #[test]
    fn bad_parameters() {
        assert!(matches!(MonomialSystem::new(0, 3), Err(LabError::Parameter(_))));
        assert!(matches!(MonomialSystem::new(2, 1), Err(LabError::Parameter(_))));
        assert!(kappa(0, 2).is_err());
        assert!(kappa(1, 1).is_err());
    }

    #[test]
    fn canonical_text() {
        let s = MonomialSystem::new(2, 2).unwrap();
        assert_eq!(s.to_string(), "PV(d=2,k=2) [(1,0),(0,1),(2,0),(1,1),(0,2)]");
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(1, 2).unwrap(), int(3));
        assert_eq!(kappa(2, 3).unwrap(), int(20));
        assert_eq!(kappa(3, 2).unwrap(), int(15));
        // d = 3 display: k(k+1)(k+2)(k+3)/8
        for k in 2..=8i64 {
            assert_eq!(kappa(3, k as u32).unwrap(), ratio(k * (k + 1) * (k + 2) * (k + 3), 8));
        }
    }

    #[test]
    fn phi_values() {
        let s23 = MonomialSystem::new(2, 3).unwrap();
        assert_eq!(
            s23.phi_eval(&ints(&[1, 2])).unwrap(),
            ints(&[1, 2, 1, 2, 4, 1, 2, 4, 8])
        );
        assert!(is_zero_vector(&s23.phi_eval(&ints(&[0, 0])).unwrap()));
        let s12 = MonomialSystem::new(1, 2).unwrap();
        assert_eq!(s12.phi_eval(&ints(&[3])).unwrap(), ints(&[3, 9]));
        assert!(matches!(
            s12.phi_eval(&ints(&[1, 2])),
            Err(LabError::Dimension { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn derivative_columns_match_displayed_vectors() {
        let s23 = MonomialSystem::new(2, 3).unwrap();
        let m2 = s23.derivative_matrix(2).unwrap();
        assert_eq!((m2.rows(), m2.cols()), (9, 5));
        let pt = [ratio(3, 7), ratio(-2, 5)];
        let (r, s) = (pt[0].clone(), pt[1].clone());
        let two = int(2);
        let six = int(6);
        let phi_rr: Vec<Rational> = vec![
            int(0),
            int(0),
            int(2),
            int(0),
            int(0),
            &six * &r,
            &two * &s,
            int(0),
            int(0),
        ];
        let col: Vec<Rational> = m2.column(2).iter().map(|p| p.eval(&pt)).collect();
        assert_eq!(col, phi_rr);

        let m1 = s23.derivative_matrix(1).unwrap();
        assert_eq!((m1.rows(), m1.cols()), (9, 2));
        let phi_r: Vec<Rational> = vec![
            int(1),
            int(0),
            &two * &r,
            s.clone(),
            int(0),
            int(3) * &r * &r,
            &two * &r * &s,
            &s * &s,
            int(0),
        ];
        let col: Vec<Rational> = m1.column(0).iter().map(|p| p.eval(&pt)).collect();
        assert_eq!(col, phi_r);

        let s22 = MonomialSystem::new(2, 2).unwrap();
        let m = s22.derivative_matrix(1).unwrap();
        let c0: Vec<Rational> = m.column(0).iter().map(|p| p.eval(&pt)).collect();
        let c1: Vec<Rational> = m.column(1).iter().map(|p| p.eval(&pt)).collect();
        assert_eq!(c0, vec![int(1), int(0), &two * &r, s.clone(), int(0)]);
        assert_eq!(c1, vec![int(0), int(1), int(0), r.clone(), &two * &s]);
    }

    #[test]
    fn derivative_order_validation() {
        let s22 = MonomialSystem::new(2, 2).unwrap();
        assert!(s22.derivative_matrix(2).is_err());
        assert!(s22.derivative_matrix(0).is_err());
        assert!(MonomialSystem::new(2, 5).unwrap().derivative_matrix(3).is_err());
        assert_eq!(s22.derivative_count(1), 2);
    }
}
