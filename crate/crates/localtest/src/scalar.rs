//! Scalar abstraction: the library is generic over the real floating type.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the whole crate is generic over (`f32`, `f64`).
///
/// `RealField` supplies the analytic operations (`sqrt`, `ln`, ...) for both
/// the real type and `Complex<T>`; the `num-traits` bounds provide lossless
/// conversion to/from `f64` literals used for tolerances and serialization.
pub trait Scalar: RealField + FromPrimitive + ToPrimitive + Copy + Default {
    /// Convert an `f64` constant (tolerances, literal coefficients).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant must convert into the scalar type")
    }

    /// Convert a small non-negative integer (dimensions, multiplicities).
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize must convert into the scalar type")
    }
}

impl<T: RealField + FromPrimitive + ToPrimitive + Copy + Default> Scalar for T {}

/// Dense complex matrix over the generic real scalar.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Dense complex column vector.
pub type CVector<T> = DVector<Complex<T>>;
/// Dense real matrix (orthogonal irrep matrices, Gram matrices).
pub type RMatrix<T> = DMatrix<T>;

/// Complex scalar from a real one.
pub fn c<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}
