//! Exact arithmetic: big integers and rationals, primality, prime streams,
//! F_p kernels, and dense polynomials over Z and F_p.

mod fp;
mod fppoly;
mod int;
mod sieve;
mod zpoly;

pub use fp::Fp;
pub use fppoly::{distinct_root_count, pow_mod, pow_x_mod, roots, FpPoly};
pub use int::{gcd_int, is_prime, is_prime_u64};
pub use sieve::{prime_range, PrimeIter};
pub use zpoly::{resultant_z, sylvester_resultant, ParsePolyError, ZPoly};

pub type Int = num_bigint::BigInt;
pub type Rat = num_rational::BigRational;

/// Largest modulus accepted by the F_p kernels: residues stay machine-width
/// and products fit in u128.
pub const MAX_MODULUS: u64 = 1 << 62;

/// Dense polynomials refuse to grow past this degree.
pub const POLY_DEGREE_CAP: usize = 1 << 16;
