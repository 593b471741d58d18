//! Exact rational scalar used throughout the index algebra.
//!
//! Every admissibility range and exponent formula is an algebraic identity in
//! the indices, so they are evaluated in exact arithmetic and only converted
//! to floating point at the numerical boundary.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Rat = Ratio<i64>;

/// Shorthand constructor, reducing on the fly.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(numer, denom)
}

/// Parses "3", "-7/2" or "0.25"-style decimal literals into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad rational numerator in {s:?}")))?;
        let d: i64 = d
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad rational denominator in {s:?}")))?;
        if d == 0 {
            return Err(Error::Format(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let sign = if int.trim_start().starts_with('-') { -1 } else { 1 };
        let int: i64 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse()
                .map_err(|_| Error::Format(format!("bad decimal in {s:?}")))?
        };
        let scale = 10_i64
            .checked_pow(frac.len() as u32)
            .ok_or_else(|| Error::Format(format!("decimal too long in {s:?}")))?;
        let frac: i64 = frac
            .parse()
            .map_err(|_| Error::Format(format!("bad decimal fraction in {s:?}")))?;
        return Ok(Rat::from_integer(int) + Rat::new(sign * frac, scale));
    }
    let n: i64 = s
        .parse()
        .map_err(|_| Error::Format(format!("bad rational literal {s:?}")))?;
    Ok(Rat::from_integer(n))
}

/// Renders a rational as "n" or "n/d".
pub fn format_rational(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Least common multiple of positive rationals: the smallest positive `m`
/// with `m / r` integral for every input.
pub fn rational_lcm(rs: &[Rat]) -> Result<Rat> {
    if rs.is_empty() {
        return Err(Error::InvalidStructure("empty weight vector".into()));
    }
    let mut num = 1_i64;
    let mut den = 0_i64;
    for r in rs {
        if !r.is_positive() {
            return Err(Error::InvalidStructure(format!(
                "nonpositive entry {}",
                format_rational(r)
            )));
        }
        num = num.lcm(r.numer());
        den = den.gcd(r.denom());
    }
    Ok(Rat::new(num, den))
}

/// Exact rational to f64; exact whenever numerator and denominator fit in
/// the mantissa, which holds for every index this crate manipulates.
pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_rational("2/5").unwrap(), rat(2, 5));
        assert_eq!(parse_rational(" -7/2 ").unwrap(), rat(-7, 2));
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn lcm_of_rationals() {
        assert_eq!(rational_lcm(&[rat(1, 1), rat(2, 1)]).unwrap(), rat(2, 1));
        assert_eq!(rational_lcm(&[rat(1, 2), rat(1, 3)]).unwrap(), rat(1, 1));
        assert_eq!(rational_lcm(&[rat(3, 2), rat(2, 1)]).unwrap(), rat(6, 1));
        // m/r integral for all r
        let m = rational_lcm(&[rat(2, 3), rat(1, 2)]).unwrap();
        assert!((m / rat(2, 3)).is_integer());
        assert!((m / rat(1, 2)).is_integer());
        assert!(rational_lcm(&[]).is_err());
        assert!(rational_lcm(&[rat(0, 1)]).is_err());
    }

    #[test]
    fn formats_round_trip() {
        for r in [rat(2, 5), rat(-3, 1), rat(7, 3)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }
}
