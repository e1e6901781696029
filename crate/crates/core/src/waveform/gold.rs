//! Maximal-length and Gold pseudo-noise sequences used to derive
//! time-hopping spreading codes.
//!
//! A Gold family is formed by XOR-combining the outputs of two full-period
//! linear-feedback shift registers (LFSRs) of the same degree.  For degrees
//! where a preferred pair of registers exists, the periodic cross-correlation
//! between any two family members takes only three values, which keeps
//! multi-user collision statistics predictable.  No preferred pair exists for
//! degrees divisible by four (8 and 12 here); for those degrees a pair of
//! full-period primitive registers is used instead, trading the three-valued
//! correlation guarantee for the same period and balance properties.

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Register tables
// ---------------------------------------------------------------------------

/// Feedback polynomials for the two registers used at each supported degree.
///
/// Entries are `(degree, poly_a, poly_b)` with bit `i` of a polynomial word
/// holding the coefficient of `x^i`.  Every listed polynomial is primitive
/// (full period `2^degree - 1`), and for degrees not divisible by four the
/// two polynomials form a preferred pair.
const REGISTER_PAIRS: &[(u32, u32, u32)] = &[
    (5, 0o45, 0o75),
    (6, 0o103, 0o147),
    (7, 0o211, 0o217),
    (8, 0o435, 0o453),
    (9, 0o1021, 0o1131),
    (10, 0o2011, 0o3515),
    (11, 0o4005, 0o4445),
    (12, 0o10123, 0o10151),
];

/// Returns the feedback polynomial pair for `degree`.
///
/// Supported degrees are 5 through 12.
pub fn register_pair(degree: u32) -> Result<(u32, u32)> {
    REGISTER_PAIRS
        .iter()
        .find(|&&(d, _, _)| d == degree)
        .map(|&(_, a, b)| (a, b))
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unsupported spreading-sequence degree {degree} (supported: 5..=12)"
            ))
        })
}

/// Period of a full-length sequence of the given degree.
pub fn sequence_period(degree: u32) -> u64 {
    (1u64 << degree) - 1
}

// ---------------------------------------------------------------------------
// LFSR
// ---------------------------------------------------------------------------

/// Fibonacci-configuration linear-feedback shift register.
///
/// The register holds `degree` bits; each step outputs the lowest bit and
/// shifts in the XOR of the bits selected by the feedback polynomial.
#[derive(Debug, Clone)]
pub struct Lfsr {
    state: u32,
    taps: u32,
    degree: u32,
}

impl Lfsr {
    /// Creates a register from a feedback polynomial, degree, and seed.
    ///
    /// The polynomial must contain both the `x^degree` and constant terms;
    /// the seed is truncated to `degree` bits and must be nonzero (the
    /// all-zero state is a fixed point and never produces output).
    pub fn new(poly: u32, degree: u32, seed: u32) -> Result<Self> {
        if !(2..=24).contains(&degree) {
            return Err(Error::InvalidArgument(format!(
                "LFSR degree {degree} out of range 2..=24"
            )));
        }
        if poly & (1 << degree) == 0 || poly & 1 == 0 {
            return Err(Error::InvalidArgument(format!(
                "feedback polynomial {poly:#o} must include x^{degree} and constant terms"
            )));
        }
        let mask = (1u32 << degree) - 1;
        let state = seed & mask;
        if state == 0 {
            return Err(Error::InvalidArgument(
                "LFSR seed must be nonzero".to_string(),
            ));
        }
        // Bit `degree` of the polynomial lies above the state mask, so the
        // full word can serve directly as the tap mask.
        Ok(Lfsr { state, taps: poly, degree })
    }

    /// Advances the register one step and returns the output bit.
    pub fn next_bit(&mut self) -> u8 {
        let out = (self.state & 1) as u8;
        let fb = (self.state & self.taps).count_ones() & 1;
        self.state = (self.state >> 1) | (fb << (self.degree - 1));
        out
    }

    /// Current register contents (low `degree` bits).
    pub fn state(&self) -> u32 {
        self.state
    }
}

// ---------------------------------------------------------------------------
// Gold sequence generation
// ---------------------------------------------------------------------------

/// Generates `len` bits of the Gold sequence selected by `(seed_a, seed_b)`.
///
/// Distinct seed pairs select distinct relative phases of the two underlying
/// registers and therefore distinct members of the code family.
pub fn gold_bits(degree: u32, seed_a: u32, seed_b: u32, len: usize) -> Result<Vec<u8>> {
    let (poly_a, poly_b) = register_pair(degree)?;
    let mut a = Lfsr::new(poly_a, degree, seed_a)?;
    let mut b = Lfsr::new(poly_b, degree, seed_b)?;
    Ok((0..len).map(|_| a.next_bit() ^ b.next_bit()).collect())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
