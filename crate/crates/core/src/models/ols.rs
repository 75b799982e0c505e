use nalgebra::{DMatrix, DVector};

/// Least-squares coefficients; rank-deficient designs get the minimum-norm
/// solution and a flag.
#[derive(Debug, Clone)]
pub(crate) struct LsSolution {
    pub beta: Vec<f64>,
    pub rank_deficient: bool,
}

pub(crate) fn least_squares(x: DMatrix<f64>, y: &[f64]) -> LsSolution {
    let (rows, cols) = x.shape();
    if cols == 0 {
        return LsSolution {
            beta: Vec::new(),
            rank_deficient: false,
        };
    }
    let y = DVector::from_column_slice(y);
    let svd = x.svd(true, true);
    let max_sv = svd.singular_values.max();
    let eps = max_sv * rows.max(cols) as f64 * f64::EPSILON;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let beta = svd
        .solve(&y, eps)
        .map(|b| b.iter().copied().collect())
        .unwrap_or_else(|_| vec![0.0; cols]);
    LsSolution {
        beta,
        rank_deficient: rank < cols,
    }
}

/// Floor applied to residual variances before taking logs, so exact fits
/// yield finite information criteria.
pub(crate) const SIGMA2_FLOOR: f64 = 1e-300;

pub(crate) fn log_sigma2(s2: f64) -> f64 {
    s2.max(SIGMA2_FLOOR).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = DMatrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y: Vec<f64> = (0..5).map(|i| 2.0 + 3.0 * i as f64).collect();
        let s = least_squares(x, &y);
        assert!(!s.rank_deficient);
        assert!((s.beta[0] - 2.0).abs() < 1e-12 && (s.beta[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_gets_min_norm() {
        let x = DMatrix::from_fn(4, 2, |_, _| 1.0);
        let s = least_squares(x, &[2.0; 4]);
        assert!(s.rank_deficient);
        assert!((s.beta[0] - 1.0).abs() < 1e-12 && (s.beta[1] - 1.0).abs() < 1e-12);
        let z = least_squares(DMatrix::zeros(4, 2), &[0.0; 4]);
        assert_eq!(z.beta, vec![0.0, 0.0]);
        assert!(z.rank_deficient);
    }
}
