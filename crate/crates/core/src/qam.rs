//! Gray-coded 4QAM mapping and hard decisions.

use num_complex::Complex64;

const SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Unit-energy Gray symbol: bit 0 picks the sign of the real part, bit 1 the
/// sign of the imaginary part, a set bit meaning negative.
pub fn symbol(b0: bool, b1: bool) -> Complex64 {
    let re = if b0 { -SCALE } else { SCALE };
    let im = if b1 { -SCALE } else { SCALE };
    Complex64::new(re, im)
}

/// Hard decision inverting [`symbol`]; each quadrant boundary decides toward
/// the cleared bit.
pub fn slice(z: Complex64) -> (bool, bool) {
    (z.re < 0.0, z.im < 0.0)
}
