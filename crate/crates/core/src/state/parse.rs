//! Recursive-descent parser for ket expressions.
//!
//! ```text
//! state   := sum | "mix{" wterm ("," wterm)* "}"
//! wterm   := number ":" sum
//! sum     := ["+"|"-"] term (("+"|"-") term)*
//! term    := [number ["*"]] basis
//! basis   := "|" [01]{3} ">"
//! number  := decimal ["i"] | "sqrt(" decimal ")" | "1/sqrt(" decimal ")"
//! ```
//!
//! Decimals accept an exponent (`1e-3`). Whitespace is insignificant.
//! Superpositions are normalized; mixture weights are checked, not rescaled.

use super::{check_weights, normalize, Ket, StateSpec};
use crate::error::{Error, Result};
use crate::linalg::{C64, DIM};

pub fn parse_state(expr: &str) -> Result<StateSpec> {
    let mut p = Parser { src: expr.as_bytes(), pos: 0 };
    let spec = p.state()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(spec)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", c as char)))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(kw.as_bytes()) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn state(&mut self) -> Result<StateSpec> {
        if self.eat_keyword("mix") {
            self.expect(b'{')?;
            let mut terms = Vec::new();
            loop {
                let at = self.pos;
                let w = self.number()?;
                if w.im != 0.0 {
                    self.pos = at;
                    return Err(Error::NonPhysical("mixture weight must be real".into()));
                }
                self.expect(b':')?;
                let ket = self.sum()?;
                terms.push((w.re, ket));
                if !self.eat(b',') {
                    break;
                }
            }
            self.expect(b'}')?;
            check_weights(terms.iter().map(|(w, _)| *w))
                .map_err(|e| Error::NonPhysical(e.to_string()))?;
            Ok(StateSpec::Mixture(terms))
        } else {
            Ok(StateSpec::Pure(self.sum()?))
        }
    }

    fn sum(&mut self) -> Result<Ket> {
        let start = self.pos;
        let mut amps = [C64::new(0.0, 0.0); DIM];
        let mut sign = if self.eat(b'-') {
            -1.0
        } else {
            self.eat(b'+');
            1.0
        };
        loop {
            let (coef, idx) = self.term()?;
            amps[idx] += coef * sign;
            sign = if self.eat(b'+') {
                1.0
            } else if self.eat(b'-') {
                -1.0
            } else {
                break;
            };
        }
        normalize(amps).map_err(|_| Error::Syntax {
            offset: start,
            message: "superposition has zero norm".into(),
        })
    }

    fn term(&mut self) -> Result<(C64, usize)> {
        if self.peek() == Some(b'|') {
            return Ok((C64::new(1.0, 0.0), self.basis()?));
        }
        let coef = self.number()?;
        self.eat(b'*');
        if self.peek() != Some(b'|') {
            return Err(self.error("scalar term must multiply a basis ket `|abc>`"));
        }
        Ok((coef, self.basis()?))
    }

    fn basis(&mut self) -> Result<usize> {
        self.expect(b'|')?;
        let mut idx = 0;
        for _ in 0..3 {
            match self.src.get(self.pos) {
                Some(b'0') => idx <<= 1,
                Some(b'1') => idx = (idx << 1) | 1,
                _ => return Err(self.error("basis ket needs exactly three binary digits")),
            }
            self.pos += 1;
        }
        if self.src.get(self.pos) != Some(&b'>') {
            return Err(self.error("expected `>` closing basis ket"));
        }
        self.pos += 1;
        Ok(idx)
    }

    fn number(&mut self) -> Result<C64> {
        if self.eat_keyword("1/sqrt(") {
            let x = self.decimal()?;
            self.expect(b')')?;
            return self.imag_suffix(1.0 / x.sqrt());
        }
        if self.eat_keyword("sqrt(") {
            let x = self.decimal()?;
            self.expect(b')')?;
            return self.imag_suffix(x.sqrt());
        }
        let x = self.decimal()?;
        self.imag_suffix(x)
    }

    fn imag_suffix(&mut self, x: f64) -> Result<C64> {
        if self.src.get(self.pos) == Some(&b'i') {
            self.pos += 1;
            Ok(C64::new(0.0, x))
        } else {
            Ok(C64::new(x, 0.0))
        }
    }

    fn decimal(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.error("expected a number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse::<f64>().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("invalid number `{text}`"),
        })
    }
}
