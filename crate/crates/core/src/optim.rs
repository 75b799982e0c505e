//! Derivative-free minimizers shared by the estimators.

use crate::error::{Error, Result};

/// Grid points scanned before the golden-section refinement.
pub const GRID_POINTS: usize = 41;
pub const DEFAULT_SCALAR_TOL: f64 = 1e-6;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimize a scalar function on `[lo, hi]`.
///
/// A 41-point grid picks the cell around the best point, then golden-section
/// search shrinks that bracket below `tol`. Ties on the grid go to the point
/// closest to the interval midpoint, and the refined point is only kept if
/// it strictly improves on the grid, so a constant objective returns the
/// midpoint. Any non-finite probe is an error.
pub fn minimize_scalar<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::invalid(format!("bad interval [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let mut best: Option<(f64, f64)> = None;
    let mut probe = |x: f64, best: &mut Option<(f64, f64)>| -> Result<f64> {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::failed(
                format!("objective not finite at {x}"),
                *best,
            ));
        }
        if best.is_none_or(|(_, bv)| v < bv) {
            *best = Some((x, v));
        }
        Ok(v)
    };

    if lo == hi {
        let v = probe(lo, &mut best)?;
        return Ok((lo, v));
    }

    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let mid = 0.5 * (lo + hi);
    let grid_x = |k: usize| if k == GRID_POINTS - 1 { hi } else { lo + step * k as f64 };
    let mut k_best = 0;
    let mut v_best = f64::INFINITY;
    for k in 0..GRID_POINTS {
        let x = grid_x(k);
        let v = probe(x, &mut best)?;
        let closer = (x - mid).abs() < (grid_x(k_best) - mid).abs();
        if v < v_best || (v == v_best && closer) {
            k_best = k;
            v_best = v;
        }
    }
    let x_grid = grid_x(k_best);

    let mut a = grid_x(k_best.saturating_sub(1));
    let mut b = grid_x((k_best + 1).min(GRID_POINTS - 1));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = probe(c, &mut best)?;
    let mut fd = probe(d, &mut best)?;
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = probe(c, &mut best)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = probe(d, &mut best)?;
        }
    }
    let (x_gs, v_gs) = if fc < fd { (c, fc) } else { (d, fd) };
    if v_gs < v_best {
        Ok((x_gs, v_gs))
    } else {
        Ok((x_grid, v_best))
    }
}

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_evals: usize,
    /// Stop once the spread of objective values across the simplex falls
    /// below `f_tol * (1 + |f_best|)` ...
    pub f_tol: f64,
    /// ... and every vertex lies within `x_tol` of the best one.
    pub x_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_evals: 4000,
            f_tol: 1e-12,
            x_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex minimization starting from `x0` with per-coordinate
/// initial steps `steps`. Non-finite objective values are treated as `+inf`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        let v = eval(x0, &mut evals);
        return SimplexResult {
            x: Vec::new(),
            value: v,
            evals,
            converged: true,
        };
    }

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    vals.push(eval(x0, &mut evals));
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += steps[i];
        vals.push(eval(&p, &mut evals));
        pts.push(p);
    }

    let mut order: Vec<usize> = (0..=n).collect();
    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];
    loop {
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);

        let spread = vals[worst] - vals[best];
        let f_ok = spread.is_finite() && spread <= opts.f_tol * (1.0 + vals[best].abs());
        let x_ok = pts.iter().all(|p| {
            p.iter()
                .zip(&pts[best])
                .all(|(a, b)| (a - b).abs() <= opts.x_tol * (1.0 + b.abs()))
        });
        if f_ok && x_ok || (f_ok && spread == 0.0) {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&pts[i]) {
                *c += v / n as f64;
            }
        }
        for k in 0..n {
            trial[k] = centroid[k] + (centroid[k] - pts[worst][k]);
        }
        let f_r = eval(&trial, &mut evals);
        if f_r < vals[best] {
            for k in 0..n {
                trial2[k] = centroid[k] + 2.0 * (centroid[k] - pts[worst][k]);
            }
            let f_e = eval(&trial2, &mut evals);
            if f_e < f_r {
                pts[worst].copy_from_slice(&trial2);
                vals[worst] = f_e;
            } else {
                pts[worst].copy_from_slice(&trial);
                vals[worst] = f_r;
            }
            continue;
        }
        if f_r < vals[second] {
            pts[worst].copy_from_slice(&trial);
            vals[worst] = f_r;
            continue;
        }
        // contraction, outside if the reflection helped at all
        let outside = f_r < vals[worst];
        for k in 0..n {
            trial2[k] = if outside {
                centroid[k] + 0.5 * (trial[k] - centroid[k])
            } else {
                centroid[k] + 0.5 * (pts[worst][k] - centroid[k])
            };
        }
        let f_c = eval(&trial2, &mut evals);
        if f_c < vals[worst].min(f_r) {
            pts[worst].copy_from_slice(&trial2);
            vals[worst] = f_c;
            continue;
        }
        // shrink toward the best vertex
        let anchor = pts[best].clone();
        for &i in &order[1..] {
            for k in 0..n {
                pts[i][k] = anchor[k] + 0.5 * (pts[i][k] - anchor[k]);
            }
            vals[i] = eval(&pts[i], &mut evals);
        }
    }
    let best = order
        .iter()
        .copied()
        .min_by(|&i, &j| vals[i].total_cmp(&vals[j]))
        .unwrap_or(0);
    SimplexResult {
        x: pts[best].clone(),
        value: vals[best],
        evals,
        converged,
    }
}
