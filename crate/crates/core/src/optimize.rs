//! Scalar search helpers: golden-section minimization, grid bracketing, and
//! bisection root finding.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// A located minimum.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `tol` (absolute in `x`).
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::NoConvergence(format!(
            "golden section bracket [{lo}, {hi}] is not a finite interval"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    // each step shrinks by 1/φ; 200 steps is far past f64 resolution
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
    if !value.is_finite() {
        return Err(Error::NoConvergence(format!(
            "golden section reached non-finite value at x = {x}"
        )));
    }
    Ok(Minimum { x, value })
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// `n` log-spaced points from `start` to `stop` inclusive (both > 0).
pub fn logspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    linspace(start.ln(), stop.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect()
}

/// Coarse grid scan followed by golden-section refinement around the best
/// grid point.
pub fn bracketed_minimum<F>(mut f: F, lo: f64, hi: f64, grid: usize, tol: f64) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    let points = linspace(lo, hi, grid.max(3));
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (i, &x) in points.iter().enumerate() {
        let v = f(x);
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    if !best_val.is_finite() {
        return Err(Error::NoConvergence(
            "objective is non-finite on the whole grid".into(),
        ));
    }
    let a = points[best.saturating_sub(1)];
    let b = points[(best + 1).min(points.len() - 1)];
    let refined = golden_section(&mut f, a, b, tol)?;
    if refined.value <= best_val {
        Ok(refined)
    } else {
        Ok(Minimum {
            x: points[best],
            value: best_val,
        })
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, to absolute `tol` in x.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoConvergence(format!(
            "no sign change on [{lo}, {hi}]: f = ({fa}, {fb})"
        )));
    }
    for _ in 0..300 {
        let m = 0.5 * (a + b);
        if (b - a) <= tol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Every sign change of `f` over a sorted grid, each refined by bisection.
pub fn grid_roots<F>(mut f: F, grid: &[f64], tol: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> f64,
{
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 1..grid.len() {
        let (v0, v1) = (values[i - 1], values[i]);
        if v0 == 0.0 {
            roots.push(grid[i - 1]);
        } else if v0.signum() != v1.signum() && v1 != 0.0 {
            roots.push(bisect(&mut f, grid[i - 1], grid[i], tol)?);
        }
    }
    if values.last() == Some(&0.0) {
        roots.push(*grid.last().unwrap());
    }
    Ok(roots)
}
