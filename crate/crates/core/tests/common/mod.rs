//! Shared independent oracles for integration tests. Everything here is
//! deliberately written against textbook formulas (composite Simpson,
//! divided differences) so it exercises none of the library's quadrature or
//! assembly paths.

#![allow(dead_code)]

/// Tensor 3x3 Simpson rule on a rectangle.
fn simpson_cell<F: Fn(f64, f64) -> f64>(f: &F, u0: f64, u1: f64, v0: f64, v1: f64) -> f64 {
    let wu = [1.0, 4.0, 1.0];
    let hu = (u1 - u0) / 2.0;
    let hv = (v1 - v0) / 2.0;
    let mut sum = 0.0;
    for (i, wi) in wu.iter().enumerate() {
        for (j, wj) in wu.iter().enumerate() {
            let u = u0 + hu * i as f64;
            let v = v0 + hv * j as f64;
            sum += wi * wj * f(u, v);
        }
    }
    sum * hu * hv / 9.0
}

fn adaptive_recurse<F: Fn(f64, f64) -> f64>(
    f: &F,
    u0: f64,
    u1: f64,
    v0: f64,
    v1: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let coarse = simpson_cell(f, u0, u1, v0, v1);
    let um = 0.5 * (u0 + u1);
    let vm = 0.5 * (v0 + v1);
    let fine = simpson_cell(f, u0, um, v0, vm)
        + simpson_cell(f, um, u1, v0, vm)
        + simpson_cell(f, u0, um, vm, v1)
        + simpson_cell(f, um, u1, vm, v1);
    if depth == 0 || (fine - coarse).abs() <= 15.0 * tol {
        return fine;
    }
    let t = tol / 4.0;
    adaptive_recurse(f, u0, um, v0, vm, t, depth - 1)
        + adaptive_recurse(f, um, u1, v0, vm, t, depth - 1)
        + adaptive_recurse(f, u0, um, vm, v1, t, depth - 1)
        + adaptive_recurse(f, um, u1, vm, v1, t, depth - 1)
}

/// Adaptive 2D quadrature over `[u0,u1] x [v0,v1]` by recursive Simpson
/// subdivision with absolute tolerance `tol`. Handles integrable corner
/// singularities by subdividing toward them.
pub fn adaptive_quad_2d<F: Fn(f64, f64) -> f64>(
    f: &F,
    u0: f64,
    u1: f64,
    v0: f64,
    v1: f64,
    tol: f64,
) -> f64 {
    adaptive_recurse(f, u0, u1, v0, v1, tol, 40)
}

/// Least-squares slope of log(err) against log(h); used for convergence
/// order studies.
pub fn log_log_slope(hs: &[f64], errs: &[f64]) -> f64 {
    assert_eq!(hs.len(), errs.len());
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn adaptive_quad_polynomial() {
        let val = adaptive_quad_2d(&|u, v| u * u * v, 0.0, 1.0, 0.0, 2.0, 1e-12);
        assert!((val - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn adaptive_quad_corner_singularity() {
        // integral of 1/r over the unit square from a corner:
        // 2 ln(1 + sqrt(2))
        let val = adaptive_quad_2d(
            &|u, v| 1.0 / (u * u + v * v).sqrt().max(1e-300),
            0.0,
            1.0,
            0.0,
            1.0,
            1e-10,
        );
        let exact = 2.0 * (1.0 + 2.0_f64.sqrt()).ln();
        assert!(
            (val - exact).abs() / exact < 1e-7,
            "val {val} vs exact {exact}"
        );
    }
}
