//! Exact eigenvalue tags: a rational plus rational multiples of declared
//! irrational symbols (square roots of square-free integers, `pi`, `e`).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Square root of a square-free integer `>= 2`.
    Sqrt(u64),
    Pi,
    E,
}

impl Symbol {
    pub fn value(self) -> f64 {
        match self {
            Symbol::Sqrt(n) => (n as f64).sqrt(),
            Symbol::Pi => std::f64::consts::PI,
            Symbol::E => std::f64::consts::E,
        }
    }

    pub fn is_transcendental(self) -> bool {
        matches!(self, Symbol::Pi | Symbol::E)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Sqrt(n) => write!(f, "sqrt({n})"),
            Symbol::Pi => f.write_str("pi"),
            Symbol::E => f.write_str("e"),
        }
    }
}

/// `rational + sum_s coeff_s * s`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExactValue {
    pub rational: BigRational,
    pub terms: BTreeMap<Symbol, BigRational>,
}

impl ExactValue {
    pub fn rational(q: BigRational) -> Self {
        Self {
            rational: q,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::rational(BigRational::new(num.into(), den.into()))
    }

    /// `coeff * sqrt(n)`, normalized so the radicand is square-free.
    pub fn sqrt(n: u64) -> Self {
        let mut v = Self::default();
        v.add_sqrt_term(BigRational::one(), n);
        v
    }

    /// Builds a value from a rational part and `(symbol name, coefficient)`
    /// pairs such as `("sqrt(8)", 1/3)`.
    pub fn from_parts(rational: &str, terms: &[(String, String)]) -> Result<Self> {
        let mut v = Self::rational(parse_rational(rational)?);
        for (name, coeff) in terms {
            let coeff = parse_rational(coeff)?;
            match parse_symbol(name)? {
                ParsedSymbol::Sqrt(n) => {
                    let mut scratch = Self::default();
                    scratch.add_sqrt_term(coeff, n);
                    v = v.add(&scratch);
                }
                ParsedSymbol::Plain(s) => {
                    let e = v.terms.entry(s).or_insert_with(BigRational::zero);
                    *e += coeff;
                }
            }
        }
        v.terms.retain(|_, c| !c.is_zero());
        Ok(v)
    }

    fn add_sqrt_term(&mut self, coeff: BigRational, n: u64) {
        let (outer, radicand) = split_square(n);
        let coeff = coeff * BigRational::from_integer(BigInt::from(outer));
        if radicand == 1 {
            self.rational += coeff;
        } else if radicand != 0 {
            *self
                .terms
                .entry(Symbol::Sqrt(radicand))
                .or_insert_with(BigRational::zero) += coeff;
        }
        self.terms.retain(|_, c| !c.is_zero());
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.rational += &other.rational;
        for (s, c) in &other.terms {
            *out.terms.entry(*s).or_insert_with(BigRational::zero) += c;
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let mut out = Self::rational(&self.rational * q);
        for (s, c) in &self.terms {
            out.terms.insert(*s, c * q);
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn to_f64(&self) -> f64 {
        let mut x = ratio_to_f64(&self.rational);
        for (s, c) in &self.terms {
            x += ratio_to_f64(c) * s.value();
        }
        x
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.terms.keys().copied()
    }

    pub fn coefficient(&self, s: Symbol) -> BigRational {
        self.terms.get(&s).cloned().unwrap_or_else(BigRational::zero)
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rational)?;
        for (s, c) in &self.terms {
            write!(f, " + {c}*{s}")?;
        }
        Ok(())
    }
}

pub(crate) fn ratio_to_f64(q: &BigRational) -> f64 {
    let n = q.numer().to_f64().unwrap_or(f64::NAN);
    let d = q.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() {
        n / d
    } else {
        // huge components: scale down before converting
        let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
        let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
        let d = (q.denom() >> shift).to_f64().unwrap_or(1.0);
        n / d
    }
}

/// Parses `"p/q"`, an integer, or a finite decimal literal exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Config(format!("invalid rational `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Ok(i) = BigInt::from_str(s) {
        return Ok(BigRational::from_integer(i));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').ok_or_else(bad)?;
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) || body == "." {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let q = BigRational::new(numer, denom);
    Ok(if neg { -q } else { q })
}

enum ParsedSymbol {
    Sqrt(u64),
    Plain(Symbol),
}

fn parse_symbol(name: &str) -> Result<ParsedSymbol> {
    let n = name.trim().to_ascii_lowercase();
    match n.as_str() {
        "pi" | "π" => return Ok(ParsedSymbol::Plain(Symbol::Pi)),
        "e" => return Ok(ParsedSymbol::Plain(Symbol::E)),
        _ => {}
    }
    let radicand = n
        .strip_prefix("sqrt(")
        .and_then(|r| r.strip_suffix(')'))
        .or_else(|| n.strip_prefix("sqrt"))
        .or_else(|| n.strip_prefix('√'));
    radicand
        .and_then(|r| r.trim().parse::<u64>().ok())
        .map(ParsedSymbol::Sqrt)
        .ok_or_else(|| Error::Config(format!("unknown irrational symbol `{name}`")))
}

/// Writes `n = outer^2 * radicand` with `radicand` square-free.
fn split_square(mut n: u64) -> (u64, u64) {
    if n == 0 {
        return (0, 0);
    }
    let mut outer = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        while n % (p * p) == 0 {
            n /= p * p;
            outer *= p;
        }
        p += 1;
    }
    (outer, n)
}

/// `|c|` helper for witness bounds.
pub(crate) fn abs_max(c: &[i64]) -> i64 {
    c.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Converts a rational kernel vector into a primitive integer vector whose
/// first nonzero entry is positive. Returns `None` on `i64` overflow.
pub(crate) fn primitive_integer_vector(v: &[BigRational]) -> Option<Vec<i64>> {
    let mut lcm = BigInt::one();
    for q in v {
        lcm = lcm.lcm(q.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|q| (q * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for i in &ints {
        g = g.gcd(i);
    }
    if g.is_zero() {
        return None;
    }
    let sign = ints.iter().find(|i| !i.is_zero()).map(|i| i.signum()).unwrap_or_else(BigInt::one);
    ints.iter().map(|i| (i / &g * &sign).to_i64()).collect()
}
