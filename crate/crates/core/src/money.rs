//! Exact currency arithmetic in integer cents.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub};

use serde::{Deserialize, Serialize};

/// An amount of currency in integer cents.
///
/// All cost bookkeeping happens in this type so that reserve arithmetic is
/// exact. Fractional amounts produced by continuous samplers or percentage
/// rules are brought back to cents with round-half-to-even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cents(pub i64);

const CENTS_PER_UNIT: i64 = 100;

impl Cents {
    pub const ZERO: Cents = Cents(0);

    /// Whole currency units and cents, e.g. `Cents::new(4_118_122, 44)`.
    pub fn new(units: i64, cents: i64) -> Self {
        Cents(units * CENTS_PER_UNIT + cents)
    }

    pub fn from_units(units: i64) -> Self {
        Cents(units * CENTS_PER_UNIT)
    }

    /// Rounds a real-valued amount of cents to the nearest cent, ties to even.
    pub fn round_from_f64(cents: f64) -> Self {
        Cents(cents.round_ties_even() as i64)
    }

    /// Variable cost of `days` working days at `rate` per day.
    pub fn variable_cost(rate: Cents, days: f64) -> Self {
        Self::round_from_f64(rate.0 as f64 * days)
    }

    /// `percent`% of this amount, rounded half-to-even to the cent.
    ///
    /// The percentage is taken at micro-percent resolution and the product is
    /// formed in integer arithmetic, so `10%` of `3,935,888.65` is exactly
    /// `393,588.86`.
    pub fn percent(self, percent: f64) -> Self {
        let micro = (percent * 1e6).round() as i128;
        let numerator = self.0 as i128 * micro;
        Cents(div_round_half_even(numerator, 100 * 1_000_000) as i64)
    }

    /// Drops the sub-unit part (toward zero).
    pub fn truncate_to_units(self) -> Self {
        Cents(self.0 / CENTS_PER_UNIT * CENTS_PER_UNIT)
    }

    /// Nearest whole currency unit, ties to even.
    pub fn round_to_units(self) -> Self {
        Cents(div_round_half_even(self.0 as i128, CENTS_PER_UNIT as i128) as i64 * CENTS_PER_UNIT)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// Amount in currency units (lossy).
    pub fn to_units_f64(self) -> f64 {
        self.0 as f64 / CENTS_PER_UNIT as f64
    }
}

fn div_round_half_even(numerator: i128, denominator: i128) -> i128 {
    debug_assert!(denominator > 0);
    let quotient = numerator.div_euclid(denominator);
    let remainder = numerator.rem_euclid(denominator);
    match (2 * remainder).cmp(&denominator) {
        std::cmp::Ordering::Less => quotient,
        std::cmp::Ordering::Greater => quotient + 1,
        std::cmp::Ordering::Equal => quotient + (quotient & 1),
    }
}

impl fmt::Display for Cents {
    /// Plain decimal with two fractional digits and no grouping: `-1234.05`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl Add for Cents {
    type Output = Cents;
    fn add(self, rhs: Cents) -> Cents {
        Cents(self.0 + rhs.0)
    }
}

impl AddAssign for Cents {
    fn add_assign(&mut self, rhs: Cents) {
        self.0 += rhs.0;
    }
}

impl Sub for Cents {
    type Output = Cents;
    fn sub(self, rhs: Cents) -> Cents {
        Cents(self.0 - rhs.0)
    }
}

impl Neg for Cents {
    type Output = Cents;
    fn neg(self) -> Cents {
        Cents(-self.0)
    }
}

impl Sum for Cents {
    fn sum<I: Iterator<Item = Cents>>(iter: I) -> Cents {
        iter.fold(Cents::ZERO, Add::add)
    }
}
