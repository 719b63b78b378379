use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{ensure, Error, Result};
use crate::exponents::{format_rational, to_f64, Rational};

/// A polynomial in `x1, ..., xn` with rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub nvars: usize,
    /// Exponent vector to coefficient; no zero coefficients.
    pub terms: BTreeMap<Vec<u32>, Rational>,
}

impl Polynomial {
    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; nvars], c);
        }
        Polynomial { nvars, terms }
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Polynomial {
            nvars,
            terms: BTreeMap::from([(e, Rational::one())]),
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn constant_value(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&vec![0; self.nvars]).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let v = terms.entry(e.clone()).or_insert_with(Rational::zero);
            *v += c;
            if v.is_zero() {
                terms.remove(e);
            }
        }
        Polynomial {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Polynomial::constant(self.nvars, Rational::zero());
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Polynomial::constant(self.nvars, Rational::zero());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let t = Polynomial {
                    nvars: self.nvars,
                    terms: BTreeMap::from([(e, c1 * c2)]),
                };
                out = out.add(&t);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(
            Polynomial::constant(self.nvars, Rational::one()),
            |acc, _| acc.mul(self),
        )
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                terms.insert(e2, c * Rational::from_integer(e[i].into()));
            }
        }
        Polynomial {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.nvars).map(|i| self.derivative(i)).collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                to_f64(c)
                    * e.iter()
                        .zip(x)
                        .map(|(k, v)| v.powi(*k as i32))
                        .product::<f64>()
            })
            .sum()
    }

    pub fn eval_exact(&self, x: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (k, v) in e.iter().zip(x) {
                for _ in 0..*k {
                    t *= v;
                }
            }
            acc += t;
        }
        acc
    }

    /// Parses sums of products of rational constants, variables `x1..xn`,
    /// parentheses, and nonnegative integer powers, e.g. `x3 - x1^2 - 1/2*x2^2`.
    /// Division is allowed by constants only.
    pub fn parse(nvars: usize, s: &str) -> Result<Self> {
        let tokens = tokenize(s)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            nvars,
        };
        let out = p.expr()?;
        ensure!(
            p.pos == p.tokens.len(),
            Parse,
            "unexpected trailing input in {s:?}"
        );
        Ok(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(i, k)| {
                    if *k == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, k)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{}", format_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&a), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(Rational),
    Var(usize),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Token::Num(crate::exponents::parse_rational(&text)?));
        } else if c == 'x' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let k: usize = text
                .parse()
                .map_err(|_| Error::Parse(format!("variable without index in {s:?}")))?;
            ensure!(k >= 1, Parse, "variables are numbered from x1");
            out.push(Token::Var(k - 1));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    nvars: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == '+' {
                acc.add(&t)
            } else {
                acc.add(&t.scale(&-Rational::one()))
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().cloned() {
                Some(Token::Op('*')) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(Token::Op('/')) => {
                    self.pos += 1;
                    let den = self.unary()?;
                    let c = den
                        .constant_value()
                        .ok_or_else(|| Error::Parse("division by a non-constant".into()))?;
                    ensure!(!c.is_zero(), Parse, "division by zero");
                    acc = acc.scale(&c.recip());
                }
                // implicit product, as in `2x1`
                Some(Token::Num(_)) | Some(Token::Var(_)) | Some(Token::Op('(')) => {
                    acc = acc.mul(&self.unary()?)
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial> {
        if let Some(Token::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(self.unary()?.scale(&-Rational::one()));
        }
        if let Some(Token::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Token::Num(k)) if k.is_integer() && !k.is_negative() => {
                    self.pos += 1;
                    let k: u32 = k
                        .to_integer()
                        .try_into()
                        .map_err(|_| Error::Parse("exponent too large".into()))?;
                    ensure!(k <= 64, Parse, "exponent {k} too large");
                    return Ok(base.pow(k));
                }
                _ => {
                    return Err(Error::Parse(
                        "exponents must be nonnegative integers".into(),
                    ))
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek().cloned() {
            Some(Token::Num(c)) => {
                self.pos += 1;
                Ok(Polynomial::constant(self.nvars, c))
            }
            Some(Token::Var(i)) => {
                self.pos += 1;
                ensure!(
                    i < self.nvars,
                    Parse,
                    "x{} exceeds the dimension {}",
                    i + 1,
                    self.nvars
                );
                Ok(Polynomial::variable(self.nvars, i))
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                ensure!(
                    self.peek() == Some(&Token::Op(')')),
                    Parse,
                    "missing closing parenthesis"
                );
                self.pos += 1;
                Ok(e)
            }
            other => Err(Error::Parse(format!("expected a term, found {other:?}"))),
        }
    }
}
