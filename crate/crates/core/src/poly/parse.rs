use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{MultiIndex, QPoly};
use crate::error::{Error, Result};

/// Parses `c * x1^a1 x2^a2 ... ± ...` with rational `c` written `p/q` or as a decimal.
///
/// Without `dim` the dimension is the largest variable index seen (at least 1).
pub fn parse_poly(src: &str, dim: Option<usize>) -> Result<QPoly> {
    let mut p = Parser {
        s: src.as_bytes(),
        pos: 0,
    };
    let terms = p.poly()?;
    let seen = terms
        .iter()
        .flat_map(|(vars, _)| vars.iter().map(|(i, _)| *i))
        .max()
        .unwrap_or(1);
    let n = dim.unwrap_or(seen);
    if seen > n {
        return Err(Error::Parse {
            pos: 0,
            msg: format!("variable x{seen} exceeds dimension {n}"),
        });
    }
    let mut out = QPoly::zero(n);
    for (vars, c) in terms {
        let mut a = vec![0u32; n];
        for (i, e) in vars {
            a[i - 1] += e;
        }
        out.add_term(MultiIndex(a), c);
    }
    Ok(out)
}

type Term = (Vec<(usize, u32)>, BigRational);

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn poly(&mut self) -> Result<Vec<Term>> {
        let mut terms = Vec::new();
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            Some(_) => 1,
            None => return self.err("empty polynomial"),
        };
        loop {
            let (vars, c) = self.term()?;
            let c = if sign < 0 { -c } else { c };
            terms.push((vars, c));
            match self.peek() {
                None => break,
                Some(b'+') => sign = 1,
                Some(b'-') => sign = -1,
                Some(ch) => return self.err(format!("unexpected '{}'", ch as char)),
            }
            self.pos += 1;
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<Term> {
        let mut c = BigRational::one();
        let mut any = false;
        if matches!(self.peek(), Some(b'0'..=b'9') | Some(b'.')) {
            c = self.number()?;
            any = true;
            if self.peek() == Some(b'*') {
                self.pos += 1;
            }
        }
        let mut vars = Vec::new();
        loop {
            match self.peek() {
                Some(b'x') => {
                    self.pos += 1;
                    let i = self.integer()?;
                    if i == 0 {
                        return self.err("variables are numbered from x1");
                    }
                    let mut e = 1;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        self.skip_ws();
                        e = self.integer()? as u32;
                    }
                    vars.push((i, e));
                    any = true;
                    if self.peek() == Some(b'*') {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
        if !any {
            return self.err("expected a coefficient or a variable");
        }
        Ok((vars, c))
    }

    fn integer(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .map_or_else(|| self.err("integer out of range"), Ok)
    }

    fn digits(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        let t = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits");
        Ok(t.parse().expect("ascii digits parse"))
    }

    fn number(&mut self) -> Result<BigRational> {
        self.skip_ws();
        let whole = if self.s.get(self.pos) == Some(&b'.') {
            BigInt::zero()
        } else {
            self.digits()?
        };
        let mut q = BigRational::from_integer(whole);
        if self.s.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let start = self.pos;
            let frac = self.digits()?;
            let scale = BigInt::from(10).pow((self.pos - start) as u32);
            q += BigRational::new(frac, scale);
        }
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let den = self.digits()?;
            if den.is_zero() {
                return self.err("zero denominator");
            }
            q /= BigRational::from_integer(den);
        }
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::random;
    use proptest::prelude::*;

    #[test]
    fn parses_literal_forms() {
        let p = parse_poly("3/2 * x1^2 x2 - x3 + 0.25", None).unwrap();
        assert_eq!(p.dim(), 3);
        assert_eq!(p.to_string(), "3/2 * x1^2 x2 - x3 + 1/4");
        let q = parse_poly("-x1*x2 + 2x2", Some(2)).unwrap();
        assert_eq!(q.to_string(), "-x1 x2 + 2 * x2");
        assert_eq!(parse_poly("0", Some(2)).unwrap().to_string(), "0");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_poly("", None).is_err());
        assert!(parse_poly("x0", None).is_err());
        assert!(parse_poly("x3", Some(2)).is_err());
        assert!(parse_poly("1/0", None).is_err());
        assert!(parse_poly("x1 + * x2", None).is_err());
    }

    proptest! {
        #[test]
        fn printer_round_trips(seed in any::<u64>(), n in 1usize..5) {
            let mut rng = random::seeded(seed);
            let p = random::polynomial(&mut rng, n, 5);
            let text = p.to_string();
            let back = parse_poly(&text, Some(n)).unwrap();
            prop_assert_eq!(back.to_string(), text);
            prop_assert_eq!(back, p);
        }
    }
}
