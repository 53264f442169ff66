//! Free-space Laplace fundamental solution and its normal gradient.

use crate::error::{Error, Result};
use crate::scalar::Float;
use nalgebra::Vector3;

/// `G(r) = 1 / (4 pi |r|)`.
pub fn green_function<T: Float>(r: &Vector3<T>) -> Result<T> {
    let dist = r.norm();
    if dist == T::ZERO {
        return Err(Error::ZeroSeparation);
    }
    Ok(green_function_unchecked(dist))
}

#[inline]
pub(crate) fn green_function_unchecked<T: Float>(dist: T) -> T {
    T::ONE / (crate::scalar::real::<T>(4.0) * T::PI() * dist)
}

/// `grad G(r) . n = -(r . n) / (4 pi |r|^3)` for a unit normal `n`.
pub fn green_normal_gradient<T: Float>(r: &Vector3<T>, n: &Vector3<T>) -> Result<T> {
    let dist = r.norm();
    if dist == T::ZERO {
        return Err(Error::ZeroSeparation);
    }
    Ok(green_normal_gradient_unchecked(r, n, dist))
}

#[inline]
pub(crate) fn green_normal_gradient_unchecked<T: Float>(
    r: &Vector3<T>,
    n: &Vector3<T>,
    dist: T,
) -> T {
    -r.dot(n) / (crate::scalar::real::<T>(4.0) * T::PI() * dist * dist * dist)
}
