//! Quadrature on the reference square: tensor Gauss-Legendre rules for
//! regular panel integrals and a degenerate (Duffy-type) triangle-fan rule
//! that removes the `1/r` kernel singularity when the collocation point is a
//! panel vertex.

use crate::scalar::{real, Float};

/// A quadrature point on the reference square.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint<T> {
    pub u: T,
    pub v: T,
    pub weight: T,
}

/// Gauss-Legendre nodes and weights on [0, 1], computed once in f64 by
/// Newton iteration on the Legendre recurrence.
pub fn gauss_legendre_01(order: usize) -> Vec<(f64, f64)> {
    let n = order.max(1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // initial guess (Chebyshev-like), on [-1, 1]
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0_f64, x);
        for k in 2..=n {
            let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = pk;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Tensor-product Gauss rule on the reference square.
#[derive(Debug, Clone)]
pub struct GaussRule<T> {
    points: Vec<QuadPoint<T>>,
    order: usize,
}

impl<T: Float> GaussRule<T> {
    pub fn tensor(order: usize) -> Self {
        let base = gauss_legendre_01(order);
        let mut points = Vec::with_capacity(order * order);
        for &(u, wu) in &base {
            for &(v, wv) in &base {
                points.push(QuadPoint {
                    u: real(u),
                    v: real(v),
                    weight: real(wu * wv),
                });
            }
        }
        Self { points, order }
    }

    pub fn points(&self) -> &[QuadPoint<T>] {
        &self.points
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

/// Duffy-type rule with the singularity at one of the four panel corners
/// (tensor corner index 0..4). The square is split into two triangles fanned
/// from the singular corner; each is mapped degenerately so the Jacobian
/// cancels the `1/r` singularity of the kernel.
pub fn singular_vertex_rule<T: Float>(corner: usize, order: usize) -> Vec<QuadPoint<T>> {
    assert!(corner < 4, "corner index out of range");
    let base = gauss_legendre_01(order);
    // triangles fanned from (0,0) covering the unit square
    let triangles = [
        [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)],
        [(0.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
    ];
    let mut points = Vec::with_capacity(2 * order * order);
    for tri in triangles {
        let (ax, ay) = tri[0];
        let (bx, by) = tri[1];
        let (cx, cy) = tri[2];
        // map (s, t) in [0,1]^2 -> (1-s) A + s(1-t) B + s t C; Jacobian = s |det(B-A, C-B)|
        let det = f64::abs((bx - ax) * (cy - by) - (by - ay) * (cx - bx));
        for &(s, ws) in &base {
            for &(t, wt) in &base {
                let u = (1.0 - s) * ax + s * (1.0 - t) * bx + s * t * cx;
                let v = (1.0 - s) * ay + s * (1.0 - t) * by + s * t * cy;
                let w = ws * wt * s * det;
                // reflect so the singular vertex lands on the requested corner
                let (u, v) = match corner {
                    0 => (u, v),
                    1 => (1.0 - u, v),
                    2 => (u, 1.0 - v),
                    _ => (1.0 - u, 1.0 - v),
                };
                points.push(QuadPoint {
                    u: real(u),
                    v: real(v),
                    weight: real(w),
                });
            }
        }
    }
    points
}

/// Rule selection parameters for BEM panel integration.
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    regular: GaussRule<T>,
    near: GaussRule<T>,
    singular: [Vec<QuadPoint<T>>; 4],
    /// collocation points closer than this many panel diameters use the
    /// `near` rule
    pub near_radius_diameters: T,
}

impl<T: Float> QuadratureRule<T> {
    pub fn new(regular_order: usize, near_order: usize, singular_order: usize) -> Self {
        Self {
            regular: GaussRule::tensor(regular_order),
            near: GaussRule::tensor(near_order),
            singular: [
                singular_vertex_rule(0, singular_order),
                singular_vertex_rule(1, singular_order),
                singular_vertex_rule(2, singular_order),
                singular_vertex_rule(3, singular_order),
            ],
            near_radius_diameters: T::TWO,
        }
    }

    pub fn regular(&self) -> &[QuadPoint<T>] {
        self.regular.points()
    }

    pub fn near(&self) -> &[QuadPoint<T>] {
        self.near.points()
    }

    pub fn singular_at_corner(&self, corner: usize) -> &[QuadPoint<T>] {
        &self.singular[corner]
    }
}

impl<T: Float> Default for QuadratureRule<T> {
    /// 4x4 regular Gauss, escalated to 8x8 within two panel diameters, 8x8
    /// per triangle for singular integrals.
    fn default() -> Self {
        Self::new(4, 8, 8)
    }
}
