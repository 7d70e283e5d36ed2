//! Dense Gaussian elimination for the small systems built by the solver.

/// Pivots smaller than this fraction of the largest matrix entry are rejected.
pub(crate) const MIN_RELATIVE_PIVOT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PivotFailure {
    pub column: usize,
    pub pivot_ratio: f64,
}

/// Row-major square system `a * x = b`.
#[derive(Debug, Clone)]
pub(crate) struct DenseSystem {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl DenseSystem {
    pub fn zeros(n: usize) -> Self {
        DenseSystem {
            n,
            a: vec![0.0; n * n],
            b: vec![0.0; n],
        }
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        self.a[row * self.n + col] += value;
    }

    pub fn set_row(&mut self, row: usize, coeffs: &[f64], rhs: f64) {
        self.a[row * self.n..(row + 1) * self.n].copy_from_slice(coeffs);
        self.b[row] = rhs;
    }

    pub fn add_rhs(&mut self, row: usize, value: f64) {
        self.b[row] += value;
    }

    /// Solves with partial pivoting. Returns the solution and the smallest
    /// relative pivot encountered.
    pub fn solve(mut self) -> Result<(Vec<f64>, f64), PivotFailure> {
        let n = self.n;
        if n == 0 {
            return Ok((Vec::new(), 1.0));
        }
        let scale = self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(PivotFailure { column: 0, pivot_ratio: 0.0 });
        }
        let mut min_ratio = f64::INFINITY;
        for col in 0..n {
            let (pivot_row, pivot_abs) = (col..n)
                .map(|r| (r, self.a[r * n + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let ratio = pivot_abs / scale;
            min_ratio = min_ratio.min(ratio);
            if ratio < MIN_RELATIVE_PIVOT {
                return Err(PivotFailure { column: col, pivot_ratio: ratio });
            }
            if pivot_row != col {
                for k in 0..n {
                    self.a.swap(col * n + k, pivot_row * n + k);
                }
                self.b.swap(col, pivot_row);
            }
            let pivot = self.a[col * n + col];
            for r in col + 1..n {
                let factor = self.a[r * n + col] / pivot;
                if factor == 0.0 {
                    continue;
                }
                for k in col..n {
                    self.a[r * n + k] -= factor * self.a[col * n + k];
                }
                self.b[r] -= factor * self.b[col];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let tail: f64 = (r + 1..n).map(|k| self.a[r * n + k] * x[k]).sum();
            x[r] = (self.b[r] - tail) / self.a[r * n + r];
        }
        Ok((x, min_ratio))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let mut sys = DenseSystem::zeros(3);
        sys.set_row(0, &[0.0, 2.0, 1.0], 7.0);
        sys.set_row(1, &[1.0, 1.0, 1.0], 6.0);
        sys.set_row(2, &[2.0, 0.0, -1.0], -1.0);
        let (x, _) = sys.solve().unwrap();
        for (xi, ei) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((xi - ei).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_system_reports_pivot() {
        let mut sys = DenseSystem::zeros(2);
        sys.set_row(0, &[1.0, 2.0], 1.0);
        sys.set_row(1, &[2.0, 4.0], 2.0);
        let err = sys.solve().unwrap_err();
        assert_eq!(err.column, 1);
        assert!(err.pivot_ratio < MIN_RELATIVE_PIVOT);
    }
}
