//! Exact coefficient arithmetic.
//!
//! All public objective values and QUBO coefficients are [`Rational`]s. Hot
//! loops work on [`ScaledMatrix`], an integer matrix with a common
//! denominator, so they stay exact without paying for a gcd per operation.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(v as i128)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Formats a rational as `p` or `p/q`.
pub fn format_exact(r: &Rational) -> String {
    r.to_string()
}

/// Parses a decimal token such as `-3`, `2.5`, `1e3` or `7/2` exactly.
pub fn parse_rational(token: &str) -> Option<Rational> {
    let t = token.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: i128 = p.trim().parse().ok()?;
        let q: i128 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: String = [int_part, frac_part].concat();
    let numer: i128 = if all.is_empty() { 0 } else { all.parse().ok()? };
    let scale = exp - frac_part.len() as i32;
    if scale.unsigned_abs() > 30 {
        return None;
    }
    let pow = 10i128.checked_pow(scale.unsigned_abs())?;
    let mut r = if scale >= 0 {
        Rational::from_integer(numer.checked_mul(pow)?)
    } else {
        Rational::new(numer, pow)
    };
    if neg {
        r = -r;
    }
    Some(r)
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a, I>(values: I) -> Result<i128>
where
    I: IntoIterator<Item = &'a Rational>,
{
    let mut den: i128 = 1;
    for v in values {
        let d = *v.denom();
        if d != 1 {
            let g = den.gcd(&d);
            den = (den / g)
                .checked_mul(d)
                .ok_or_else(|| Error::Overflow("common denominator".into()))?;
        }
    }
    Ok(den)
}

/// Converts `r` to an integer numerator over the given denominator.
pub fn scale_to(r: &Rational, den: i128) -> Result<i64> {
    let v = r
        .numer()
        .checked_mul(den / r.denom())
        .ok_or_else(|| Error::Overflow("scaled coefficient".into()))?;
    i64::try_from(v).map_err(|_| Error::Overflow(format!("scaled coefficient {v}")))
}

/// Dense row-major square matrix stored as integers over a shared denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledMatrix {
    n: usize,
    values: Vec<i64>,
    denom: i128,
}

impl ScaledMatrix {
    pub fn from_rationals(n: usize, entries: &[Rational]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                got: entries.len(),
            });
        }
        let denom = common_denominator(entries)?;
        let values = entries
            .iter()
            .map(|e| scale_to(e, denom))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, values, denom })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[i64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn denom(&self) -> i128 {
        self.denom
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0)
    }
}
