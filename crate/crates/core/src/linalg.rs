//! Exact linear algebra over the rationals and over polynomial entries.

use num_traits::{One, Zero};

use crate::error::{LabError, Result};
use crate::exact::Rational;
use crate::poly::Poly;

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LabError::Dimension {
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(RatMatrix { rows: n, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, rhs: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != rhs.rows {
            return Err(LabError::Dimension {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        let mut out = RatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Rational::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if !a.is_zero() {
                        acc += a * rhs.get(k, j);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Row echelon form by Gaussian elimination; returns the rank.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.eliminate()
    }

    fn eliminate(&mut self) -> usize {
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(pivot) = (rank..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            if pivot != rank {
                for j in 0..self.cols {
                    self.data.swap(pivot * self.cols + j, rank * self.cols + j);
                }
            }
            let inv = self.get(rank, col).recip();
            for r in rank + 1..self.rows {
                let factor = self.get(r, col) * &inv;
                if factor.is_zero() {
                    continue;
                }
                for j in col..self.cols {
                    let v = self.get(r, j) - &factor * self.get(rank, j);
                    self.set(r, j, v);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Basis of `{x : self * x = 0}` from the reduced row echelon form.
    pub fn null_space(&self) -> Vec<Vec<Rational>> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pivot) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            for j in 0..m.cols {
                m.data.swap(pivot * m.cols + j, row * m.cols + j);
            }
            let inv = m.get(row, col).recip();
            for j in 0..m.cols {
                let v = m.get(row, j) * &inv;
                m.set(row, j, v);
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for j in 0..m.cols {
                    let v = m.get(r, j) - &factor * m.get(row, j);
                    m.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (0..m.cols)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![Rational::zero(); m.cols];
                v[free] = Rational::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -m.get(r, free).clone();
                }
                v
            })
            .collect()
    }

    pub fn determinant(&self) -> Result<Rational> {
        if self.rows != self.cols {
            return Err(LabError::Dimension {
                expected: self.rows,
                got: self.cols,
            });
        }
        let mut m = self.clone();
        let mut det = Rational::one();
        let n = self.rows;
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !m.get(r, col).is_zero()) else {
                return Ok(Rational::zero());
            };
            if pivot != col {
                for j in 0..n {
                    m.data.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = m.get(col, col).clone();
            det *= &p;
            let inv = p.recip();
            for r in col + 1..n {
                let factor = m.get(r, col) * &inv;
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = m.get(r, j) - &factor * m.get(col, j);
                    m.set(r, j, v);
                }
            }
        }
        Ok(det)
    }
}

/// Rank of a list of row vectors.
pub fn rank_of_rows(rows: &[Vec<Rational>]) -> Result<usize> {
    if rows.is_empty() {
        return Ok(0);
    }
    Ok(RatMatrix::from_rows(rows.to_vec())?.rank())
}

/// Matrix with polynomial entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize, nvars: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            nvars,
            entries: vec![Poly::zero(nvars); rows * cols],
        }
    }

    pub fn from_columns(columns: Vec<Vec<Poly>>, nvars: usize) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        let mut m = PolyMatrix::zeros(rows, cols, nvars);
        for (j, col) in columns.into_iter().enumerate() {
            if col.len() != rows {
                return Err(LabError::Dimension {
                    expected: rows,
                    got: col.len(),
                });
            }
            for (i, p) in col.into_iter().enumerate() {
                m.set(i, j, p);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        assert_eq!(p.nvars(), self.nvars);
        self.entries[i * self.cols + j] = p;
    }

    pub fn column(&self, j: usize) -> Vec<Poly> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.entries.iter().filter_map(Poly::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, point: &[Rational]) -> RatMatrix {
        let mut out = RatMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).eval(point));
            }
        }
        out
    }

    /// Sub-matrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(rows.len(), cols.len(), self.nvars);
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    /// `lhs * self` for a rational left factor.
    pub fn left_mul(&self, lhs: &RatMatrix) -> Result<PolyMatrix> {
        if lhs.cols() != self.rows {
            return Err(LabError::Dimension {
                expected: self.rows,
                got: lhs.cols(),
            });
        }
        let mut out = PolyMatrix::zeros(lhs.rows(), self.cols, self.nvars);
        for i in 0..lhs.rows() {
            for j in 0..self.cols {
                let mut acc = Poly::zero(self.nvars);
                for k in 0..self.rows {
                    let c = lhs.get(i, k);
                    if !c.is_zero() {
                        acc = &acc + &self.get(k, j).scale(c);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Symbolic determinant by division-free expansion over column subsets:
    /// `minor[S]` is the determinant of the first |S| rows on columns S.
    pub fn determinant(&self) -> Result<Poly> {
        if self.rows != self.cols {
            return Err(LabError::Dimension {
                expected: self.rows,
                got: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Poly::constant(self.nvars, Rational::one()));
        }
        assert!(n <= 20, "symbolic determinant limited to order 20");
        let mut minor: Vec<Option<Poly>> = vec![None; 1 << n];
        minor[0] = Some(Poly::constant(self.nvars, Rational::one()));
        for mask in 1usize..(1 << n) {
            let row = mask.count_ones() as usize - 1;
            let mut acc = Poly::zero(self.nvars);
            // expand the last row along the chosen columns, tracking sign by position
            let mut position = 0;
            for col in 0..n {
                if mask & (1 << col) == 0 {
                    continue;
                }
                let entry = self.get(row, col);
                let rest = minor[mask & !(1 << col)].as_ref().expect("subset filled");
                if !entry.is_zero() && !rest.is_zero() {
                    let term = entry * rest;
                    // sign (-1)^(row + position) with the row being the last of the subset
                    if (row + position).is_multiple_of(2) {
                        acc = &acc + &term;
                    } else {
                        acc = &acc - &term;
                    }
                }
                position += 1;
            }
            minor[mask] = Some(acc);
        }
        Ok(minor.pop().flatten().expect("full mask"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn m(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()).unwrap()
    }

    #[test]
    fn rank_and_det() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        assert_eq!(a.determinant().unwrap(), int(0));
        let b = m(&[&[2, 1], &[1, 3]]);
        assert_eq!(b.determinant().unwrap(), int(5));
        let c = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(c.determinant().unwrap(), int(-1));
        assert_eq!(m(&[&[0, 0, 0]]).rank(), 0);
    }

    #[test]
    fn null_space_basis() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = a.null_space();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let col = RatMatrix::from_rows(v.iter().map(|x| vec![x.clone()]).collect()).unwrap();
            assert!(a.mul(&col).unwrap().rank() == 0);
        }
        assert_eq!(rank_of_rows(&ns).unwrap(), 2);
        assert!(m(&[&[1, 0], &[0, 1]]).null_space().is_empty());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(RatMatrix::from_rows(vec![vec![int(1)], vec![int(1), int(2)]]).is_err());
    }

    #[test]
    fn poly_determinant_matches_numeric() {
        let r = Poly::var(2, 0);
        let s = Poly::var(2, 1);
        let one = Poly::constant(2, int(1));
        // [[r, s, 1], [s, 1, r], [1, r, s]]
        let pm = PolyMatrix::from_columns(
            vec![
                vec![r.clone(), s.clone(), one.clone()],
                vec![s.clone(), one.clone(), r.clone()],
                vec![one.clone(), r.clone(), s.clone()],
            ],
            2,
        )
        .unwrap();
        let det = pm.determinant().unwrap();
        for pt in [[int(0), int(0)], [ratio(1, 2), int(3)], [int(-2), ratio(5, 7)]] {
            assert_eq!(det.eval(&pt), pm.eval(&pt).determinant().unwrap());
        }
    }
}
