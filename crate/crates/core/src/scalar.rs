//! Scalar abstraction: every geometric and field computation in this crate is
//! generic over a floating point type implementing [`Float`].

use nalgebra as na;
use num_traits as nt;

/// Floating point scalar: `f32` or `f64`.
pub trait Float:
    Copy
    + Default
    + Send
    + Sync
    + nt::FromPrimitive
    + nt::ToPrimitive
    + nt::FloatConst
    + na::RealField
    + std::iter::Sum<Self>
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    const TWO: Self;
    const HALF: Self;

    /// Machine epsilon of the concrete type.
    fn eps() -> Self;

    /// Number of bytes in the raw little-endian encoding.
    const BYTE_WIDTH: usize;

    /// Raw bit pattern, zero-extended to 64 bits. Exact round trip with
    /// [`Float::from_bits_u64`]; used by the checkpoint format.
    fn to_bits_u64(self) -> u64;

    /// Inverse of [`Float::to_bits_u64`].
    fn from_bits_u64(bits: u64) -> Self;
}

macro_rules! impl_float {
    ($f:ty, $w:expr) => {
        impl Float for $f {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            const TWO: Self = 2.0;
            const HALF: Self = 0.5;

            fn eps() -> Self {
                <$f>::EPSILON
            }

            const BYTE_WIDTH: usize = $w;

            fn to_bits_u64(self) -> u64 {
                self.to_bits() as u64
            }

            fn from_bits_u64(bits: u64) -> Self {
                <$f>::from_bits(bits as _)
            }
        }
    };
}

impl_float!(f32, 4);
impl_float!(f64, 8);

/// Converts an `f64` literal into the generic scalar type.
///
/// Panics if the value is not representable, which cannot happen for the
/// compile-time literals this is used with.
#[inline]
pub fn real<T: Float>(v: f64) -> T {
    T::from_f64(v).expect("literal must be representable in the scalar type")
}
