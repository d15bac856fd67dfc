//! Numeric abstraction shared by every indicator computation.
//!
//! Indicators are ratios of record counts, so they are computed generically
//! over [`Scalar`]. [`Exact`](crate::Exact) (a reduced `i64` ratio) is used
//! wherever results are compared for equality; `f64` is available for fast
//! exploratory use.

use std::fmt;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};

pub trait Scalar:
    Num + FromPrimitive + ToPrimitive + Copy + PartialOrd + fmt::Debug + Send + Sync + 'static
{
    /// Largest integer not greater than `self`.
    fn floor_int(self) -> i64;

    /// Converts a configuration value written in decimal (`8.7`, `130`)
    /// without picking up binary floating-point noise.
    fn from_decimal(value: f64) -> Self;

    /// Lossless textual form used in exported tables.
    fn raw_string(self) -> String;

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar")
    }

    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer representable in scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn floor_int(self) -> i64 {
        self.floor() as i64
    }

    fn from_decimal(value: f64) -> Self {
        value
    }

    fn raw_string(self) -> String {
        format!("{self}")
    }
}

impl Scalar for f32 {
    fn floor_int(self) -> i64 {
        self.floor() as i64
    }

    fn from_decimal(value: f64) -> Self {
        value as f32
    }

    fn raw_string(self) -> String {
        format!("{self}")
    }
}

impl Scalar for Ratio<i64> {
    fn floor_int(self) -> i64 {
        self.floor().to_integer()
    }

    fn from_decimal(value: f64) -> Self {
        parse_decimal(&format!("{value}"))
            .or_else(|| Ratio::from_f64(value))
            .expect("finite decimal")
    }

    fn raw_string(self) -> String {
        format!("{self}")
    }
}

/// Parses the shortest round-trip decimal form of an `f64` into an exact ratio.
fn parse_decimal(text: &str) -> Option<Ratio<i64>> {
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    if digits.contains(['e', 'E']) {
        return None;
    }
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if frac_part.len() > 12 {
        return None;
    }
    let denom = 10i64.checked_pow(frac_part.len() as u32)?;
    let int: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    let frac: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().ok()? };
    let numer = int.checked_mul(denom)?.checked_add(frac)?;
    Some(Ratio::new(if negative { -numer } else { numer }, denom))
}

/// `num / den` as a scalar. Panics on a zero denominator; callers check first.
pub fn ratio<S: Scalar>(num: u64, den: u64) -> S {
    assert!(den > 0, "ratio with zero denominator");
    S::from_count(num) / S::from_count(den)
}

/// `100 * num / den`.
pub fn percent<S: Scalar>(num: u64, den: u64) -> S {
    ratio::<S>(num, den) * S::from_count(100)
}

/// Rounds half toward positive infinity: `floor(x + 1/2)`.
pub fn round_half_up<S: Scalar>(value: S) -> i64 {
    (value + half::<S>()).floor_int()
}

/// Rounds to one decimal place (half-up) and returns the value in tenths.
pub fn round_tenths_half_up<S: Scalar>(value: S) -> i64 {
    round_half_up(value * S::from_count(10))
}

/// Formats tenths (`64`) as `6.4`.
pub fn format_tenths(tenths: i64) -> String {
    let sign = if tenths < 0 { "-" } else { "" };
    let abs = tenths.unsigned_abs();
    format!("{sign}{}.{}", abs / 10, abs % 10)
}

/// One-decimal display form, e.g. `130.5`.
pub fn display_tenths<S: Scalar>(value: S) -> String {
    format_tenths(round_tenths_half_up(value))
}

pub fn half<S: Scalar>() -> S {
    S::one() / S::from_count(2)
}

/// Median of a non-empty slice; the mean of the two central values for even
/// lengths.
pub fn median<S: Scalar>(values: &[S]) -> Option<S> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("comparable scalars"));
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) * half::<S>()
    })
}
