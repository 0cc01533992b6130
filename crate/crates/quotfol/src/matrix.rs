//! Exact linear algebra over a [`Scalar`](crate::scalar::Scalar) field:
//! reduced row echelon form, rank, kernel bases and linear solving.
//!
//! Matrices are small (coefficient spaces of low-degree polynomials), so a
//! dense row-list representation and plain Gaussian elimination are fine.

use crate::scalar::{Field, Scalar};

#[derive(Debug, Clone)]
pub struct Matrix {
    pub rows: Vec<Vec<Scalar>>,
    pub cols: usize,
    pub field: Field,
}

impl Matrix {
    pub fn new(rows: Vec<Vec<Scalar>>, cols: usize, field: &Field) -> Matrix {
        debug_assert!(rows.iter().all(|r| r.len() == cols));
        Matrix {
            rows,
            cols,
            field: field.clone(),
        }
    }

    pub fn zero(nrows: usize, cols: usize, field: &Field) -> Matrix {
        Matrix {
            rows: vec![vec![Scalar::zero(field); cols]; nrows],
            cols,
            field: field.clone(),
        }
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            let Some(p) = (row..self.rows.len()).find(|&r| !self.rows[r][col].is_zero()) else {
                continue;
            };
            self.rows.swap(row, p);
            let inv = self.rows[row][col].inv().expect("pivot nonzero");
            for c in col..self.cols {
                self.rows[row][c] = self.rows[row][c].mul(&inv).unwrap();
            }
            for r in 0..self.rows.len() {
                if r != row && !self.rows[r][col].is_zero() {
                    let f = self.rows[r][col].clone();
                    for c in col..self.cols {
                        let t = self.rows[row][c].mul(&f).unwrap();
                        self.rows[r][c] = self.rows[r][c].sub(&t).unwrap();
                    }
                }
            }
            pivots.push(col);
            row += 1;
            if row == self.rows.len() {
                break;
            }
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right kernel { v : M v = 0 }, one vector per free column,
    /// in column order (so the output is deterministic).
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::new();
        for &fc in &free {
            let mut v = vec![Scalar::zero(&self.field); self.cols];
            v[fc] = Scalar::one(&self.field);
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = m.rows[ri][fc].neg();
            }
            basis.push(v);
        }
        basis
    }

    /// One solution of M x = b, if the system is consistent.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(b.len(), self.rows.len());
        let mut aug = Matrix {
            rows: self
                .rows
                .iter()
                .zip(b)
                .map(|(r, bi)| {
                    let mut row = r.clone();
                    row.push(bi.clone());
                    row
                })
                .collect(),
            cols: self.cols + 1,
            field: self.field.clone(),
        };
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // a row reduced to 0 = 1
        }
        let mut x = vec![Scalar::zero(&self.field); self.cols];
        for (ri, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.rows[ri][self.cols].clone();
        }
        Some(x)
    }
}
