//! Prime fields `F_p` for the small primes the enumeration supports, and the
//! dense matrix routines the rest of the crate needs.

use serde::{Deserialize, Serialize};

use super::FfrepError;

pub const SUPPORTED_PRIMES: [u32; 5] = [2, 3, 5, 7, 11];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self, FfrepError> {
        if SUPPORTED_PRIMES.contains(&p) {
            Ok(Self { p })
        } else {
            Err(FfrepError::UnsupportedPrime(p))
        }
    }

    pub fn p(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        ((u32::from(a) + u32::from(b)) % self.p) as u8
    }

    #[inline]
    pub fn sub(self, a: u8, b: u8) -> u8 {
        ((u32::from(a) + self.p - u32::from(b)) % self.p) as u8
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        ((u32::from(a) * u32::from(b)) % self.p) as u8
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        self.sub(0, a)
    }

    pub fn inv(self, a: u8) -> Option<u8> {
        if a == 0 {
            return None;
        }
        // a^(p-2) by repeated multiplication; p is tiny
        let mut acc = 1u8;
        for _ in 0..self.p - 2 {
            acc = self.mul(acc, a);
        }
        Some(acc)
    }

    /// Smallest generator of `F_p^×`.
    pub fn primitive_root(self) -> u8 {
        (1..self.p as u8)
            .find(|&g| {
                let mut x = 1u8;
                (1..self.p - 1).all(|_| {
                    x = self.mul(x, g);
                    x != 1
                })
            })
            .expect("prime field has a primitive root")
    }
}

/// Row-major matrix over a prime field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u8>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m.set(k, k, 1);
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, x: u8) {
        self.data[r * self.cols + c] = x;
    }

    pub fn column(&self, c: usize) -> Vec<u8> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn mul(&self, rhs: &Mat, f: PrimeField) -> Mat {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    let cur = out.get(r, c);
                    out.set(r, c, f.add(cur, f.mul(a, rhs.get(k, c))));
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[u8], f: PrimeField) -> Vec<u8> {
        (0..self.rows)
            .map(|r| {
                (0..self.cols).fold(0u8, |acc, c| f.add(acc, f.mul(self.get(r, c), v[c])))
            })
            .collect()
    }

    pub fn rank(&self, f: PrimeField) -> usize {
        let mut rows: Vec<Vec<u8>> = (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].to_vec())
            .collect();
        rref(&mut rows, self.cols, f).len()
    }

    pub fn is_invertible(&self, f: PrimeField) -> bool {
        self.rows == self.cols && self.rank(f) == self.rows
    }

    pub fn inverse(&self, f: PrimeField) -> Option<Mat> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug: Vec<Vec<u8>> = (0..n)
            .map(|r| {
                let mut row = self.data[r * n..(r + 1) * n].to_vec();
                row.extend((0..n).map(|c| u8::from(r == c)));
                row
            })
            .collect();
        let pivots = rref(&mut aug, 2 * n, f);
        if pivots.len() < n || pivots.iter().enumerate().any(|(k, &c)| k != c) {
            return None;
        }
        let data = aug.iter().flat_map(|row| row[n..].to_vec()).collect();
        Some(Mat::from_rows(n, n, data))
    }
}

/// Reduces `rows` (each of length `cols`) to reduced row echelon form in place,
/// dropping zero rows. Returns the pivot column of each remaining row.
pub fn rref(rows: &mut Vec<Vec<u8>>, cols: usize, f: PrimeField) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(sel) = (r..rows.len()).find(|&k| rows[k][c] != 0) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = f.inv(rows[r][c]).unwrap();
        for x in rows[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for k in 0..rows.len() {
            if k != r && rows[k][c] != 0 {
                let factor = rows[k][c];
                let pivot = rows[r].clone();
                for (x, &y) in rows[k].iter_mut().zip(&pivot).take(cols) {
                    *x = f.sub(*x, f.mul(factor, y));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Basis of `{x : A x = 0}` for `A` given as equation rows over `cols` unknowns.
pub fn nullspace(mut equations: Vec<Vec<u8>>, cols: usize, f: PrimeField) -> Vec<Vec<u8>> {
    let pivots = rref(&mut equations, cols, f);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0u8; cols];
            v[fc] = 1;
            for (row, &pc) in equations.iter().zip(&pivots) {
                v[pc] = f.neg(row[fc]);
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_basics() {
        assert!(PrimeField::new(4).is_err());
        for p in SUPPORTED_PRIMES {
            let f = PrimeField::new(p).unwrap();
            for a in 1..p as u8 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
            let g = f.primitive_root();
            let order = (1..p).find(|&k| {
                let mut x = 1u8;
                for _ in 0..k {
                    x = f.mul(x, g);
                }
                x == 1
            });
            assert_eq!(order, Some(p - 1));
        }
    }

    #[test]
    fn inverse_and_rank() {
        let f = PrimeField::new(3).unwrap();
        let m = Mat::from_rows(2, 2, vec![1, 2, 0, 1]);
        let inv = m.inverse(f).unwrap();
        assert_eq!(m.mul(&inv, f), Mat::identity(2));
        let singular = Mat::from_rows(2, 2, vec![1, 2, 2, 1]);
        assert_eq!(singular.rank(f), 1);
        assert!(singular.inverse(f).is_none());
    }

    #[test]
    fn nullspace_dimension() {
        let f = PrimeField::new(5).unwrap();
        let basis = nullspace(vec![vec![1, 1, 0], vec![0, 0, 0]], 3, f);
        assert_eq!(basis.len(), 2);
        for v in basis {
            assert_eq!(f.add(v[0], v[1]), 0);
        }
    }
}
