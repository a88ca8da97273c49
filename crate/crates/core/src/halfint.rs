use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

/// A value on the half-integer lattice, stored as twice its value.
///
/// Sideband labels `n` in the coupled-mode ladder are integers or
/// half-integers; `HalfInt::from_twice(1)` is `+1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const HALF: HalfInt = HalfInt(1);
    pub const MINUS_HALF: HalfInt = HalfInt(-1);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn whole(n: i32) -> Self {
        HalfInt(2 * n)
    }

    /// `k/2` for odd `k`, e.g. `HalfInt::half(7)` is `7/2`.
    pub const fn half(k: i32) -> Self {
        HalfInt(k)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_half_integer(self) -> bool {
        self.0 % 2 != 0
    }

    pub const fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_half_integer() {
            write!(f, "{:+}/2", self.0)
        } else if self.0 == 0 {
            write!(f, "0")
        } else {
            write!(f, "{:+}", self.0 / 2)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"7/2"`, `"-1/2"`, `"+3"`, or a decimal such as `"3.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = Error::InvalidParameter {
            name: "n",
            reason: "expected an integer, a k/2 fraction, or a decimal multiple of 0.5",
        };
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            if den.trim() != "2" {
                return Err(bad);
            }
            let k: i32 = num.trim().parse().map_err(|_| bad.clone())?;
            return Ok(HalfInt(k));
        }
        if let Ok(n) = s.parse::<i32>() {
            return Ok(HalfInt(2 * n));
        }
        let x: f64 = s.parse().map_err(|_| bad.clone())?;
        let twice = x * 2.0;
        if twice != (twice as i32) as f64 {
            return Err(bad);
        }
        Ok(HalfInt(twice as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn display_and_parse() {
        assert_eq!(HalfInt::half(7).to_string(), "+7/2");
        assert_eq!(HalfInt::half(-1).to_string(), "-1/2");
        assert_eq!(HalfInt::whole(-2).to_string(), "-2");
        assert_eq!("7/2".parse::<HalfInt>().unwrap(), HalfInt::half(7));
        assert_eq!("-1.5".parse::<HalfInt>().unwrap(), HalfInt::half(-3));
        assert_eq!("3".parse::<HalfInt>().unwrap(), HalfInt::whole(3));
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("0.3".parse::<HalfInt>().is_err());
    }
}
