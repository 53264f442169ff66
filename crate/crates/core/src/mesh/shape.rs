//! Bilinear Lagrangian shape functions on the reference square `[0,1]^2`.
//!
//! Node order convention: `(0,0), (1,0), (0,1), (1,1)`.

use crate::error::{Error, Result};
use crate::scalar::Float;

/// Number of local shape functions per bilinear panel.
pub const N_LOCAL: usize = 4;

/// Local corner coordinates in the reference square, following the node
/// order convention.
pub const CORNER_UV: [(f64, f64); N_LOCAL] = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];

/// Local corner index pairs of the four panel edges, ordered as a closed
/// loop: bottom, right, top, left.
pub const EDGE_CORNERS: [(usize, usize); 4] = [(0, 1), (1, 3), (3, 2), (2, 0)];

fn check_range<T: Float>(u: T, v: T) -> Result<()> {
    if u < T::ZERO || u > T::ONE || v < T::ZERO || v > T::ONE {
        return Err(Error::OutOfReferenceSquare {
            u: u.to_f64().unwrap_or(f64::NAN),
            v: v.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Evaluates the four bilinear shape functions at `(u, v)`.
///
/// The values form a partition of unity and interpolate the corners.
pub fn shape_values<T: Float>(u: T, v: T) -> Result<[T; N_LOCAL]> {
    check_range(u, v)?;
    Ok(shape_values_unchecked(u, v))
}

/// Same as [`shape_values`] without the range check; used in quadrature
/// loops where the rule guarantees in-range points.
#[inline]
pub fn shape_values_unchecked<T: Float>(u: T, v: T) -> [T; N_LOCAL] {
    let um = T::ONE - u;
    let vm = T::ONE - v;
    [um * vm, u * vm, um * v, u * v]
}

/// Evaluates the `(d/du, d/dv)` gradients of the four shape functions.
pub fn shape_gradients<T: Float>(u: T, v: T) -> Result<[[T; 2]; N_LOCAL]> {
    check_range(u, v)?;
    Ok(shape_gradients_unchecked(u, v))
}

#[inline]
pub fn shape_gradients_unchecked<T: Float>(u: T, v: T) -> [[T; 2]; N_LOCAL] {
    let um = T::ONE - u;
    let vm = T::ONE - v;
    [
        [-vm, -um],
        [vm, -u],
        [-v, um],
        [v, u],
    ]
}
