use std::fmt;

use num_traits::Zero;

use super::rational::{format_rational, Rational};
use crate::error::{Error, Result};

/// `α ↦ slope·α + intercept` on the half-open interval `(lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub lo: Rational,
    pub hi: Rational,
    pub slope: Rational,
    pub intercept: Rational,
}

impl Piece {
    pub fn new(lo: Rational, hi: Rational, slope: Rational, intercept: Rational) -> Self {
        Piece {
            lo,
            hi,
            slope,
            intercept,
        }
    }

    pub fn contains(&self, alpha: &Rational) -> bool {
        alpha > &self.lo && alpha <= &self.hi
    }

    pub fn value(&self, alpha: &Rational) -> Rational {
        &self.slope * alpha + &self.intercept
    }
}

/// An exact piecewise-affine function of α for a fixed ambient dimension.
///
/// Pieces are stored in increasing order and partition `(lo, hi]` of the
/// first and last piece with shared endpoints. A breakpoint belongs to the
/// piece on its left.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseExponent {
    dim: i64,
    pieces: Vec<Piece>,
}

impl PiecewiseExponent {
    /// Builds from pieces in any order; empty pieces (`lo >= hi`) are dropped.
    pub fn new(dim: i64, mut pieces: Vec<Piece>) -> Result<Self> {
        pieces.retain(|p| p.lo < p.hi);
        pieces.sort_by(|a, b| a.lo.cmp(&b.lo));
        if pieces.is_empty() {
            return Err(Error::Domain("piecewise exponent with no pieces".into()));
        }
        for w in pieces.windows(2) {
            if w[0].hi != w[1].lo {
                return Err(Error::Domain(format!(
                    "pieces do not tile: ({}, {}] then ({}, {}]",
                    format_rational(&w[0].lo),
                    format_rational(&w[0].hi),
                    format_rational(&w[1].lo),
                    format_rational(&w[1].hi)
                )));
            }
        }
        Ok(PiecewiseExponent { dim, pieces })
    }

    pub fn dim(&self) -> i64 {
        self.dim
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Open left end of the domain.
    pub fn domain_lo(&self) -> &Rational {
        &self.pieces[0].lo
    }

    pub fn domain_hi(&self) -> &Rational {
        &self.pieces[self.pieces.len() - 1].hi
    }

    pub fn piece_at(&self, alpha: &Rational) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.contains(alpha))
    }

    pub fn eval(&self, alpha: &Rational) -> Result<Rational> {
        self.piece_at(alpha).map(|p| p.value(alpha)).ok_or_else(|| {
            Error::Domain(format!(
                "alpha = {} outside ({}, {}]",
                format_rational(alpha),
                format_rational(self.domain_lo()),
                format_rational(self.domain_hi())
            ))
        })
    }

    /// Interior breakpoints, in increasing order.
    pub fn breakpoints(&self) -> Vec<Rational> {
        self.pieces[..self.pieces.len() - 1]
            .iter()
            .map(|p| p.hi.clone())
            .collect()
    }

    /// Breakpoints where the adjacent affine pieces disagree, with the left
    /// and right limits.
    pub fn discontinuities(&self) -> Vec<(Rational, Rational, Rational)> {
        self.pieces
            .windows(2)
            .filter_map(|w| {
                let x = &w[0].hi;
                let (l, r) = (w[0].value(x), w[1].value(x));
                (l != r).then(|| (x.clone(), l, r))
            })
            .collect()
    }

    pub fn is_continuous(&self) -> bool {
        self.discontinuities().is_empty()
    }

    /// Merges neighbouring pieces that carry the same affine map.
    pub fn simplified(&self) -> Self {
        let mut out: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            if let Some(last) = out.last_mut() {
                if last.slope == p.slope && last.intercept == p.intercept {
                    last.hi = p.hi.clone();
                    continue;
                }
            }
            out.push(p.clone());
        }
        PiecewiseExponent {
            dim: self.dim,
            pieces: out,
        }
    }

    /// Exact pointwise maximum. Both operands must share the domain.
    pub fn max(&self, other: &Self) -> Result<Self> {
        self.combine(other, true)
    }

    pub fn min(&self, other: &Self) -> Result<Self> {
        self.combine(other, false)
    }

    fn combine(&self, other: &Self, take_max: bool) -> Result<Self> {
        if self.domain_lo() != other.domain_lo() || self.domain_hi() != other.domain_hi() {
            return Err(Error::Domain(
                "max/min of exponents with different domains".into(),
            ));
        }
        let mut cuts: Vec<Rational> = self.breakpoints();
        cuts.extend(other.breakpoints());
        cuts.push(self.domain_lo().clone());
        cuts.push(self.domain_hi().clone());
        cuts.sort();
        cuts.dedup();

        let mut pieces = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            let probe = (lo + hi) / Rational::from_integer(2.into());
            let a = self.piece_at(&probe).expect("probe inside domain");
            let b = other.piece_at(&probe).expect("probe inside domain");
            // d(α) = a(α) - b(α) is affine on (lo, hi]; split at its root if interior.
            let ds = &a.slope - &b.slope;
            let di = &a.intercept - &b.intercept;
            let mut sub = vec![lo.clone()];
            if !ds.is_zero() {
                let root = -&di / &ds;
                if &root > lo && &root < hi {
                    sub.push(root);
                }
            }
            sub.push(hi.clone());
            for s in sub.windows(2) {
                let mid = (&s[0] + &s[1]) / Rational::from_integer(2.into());
                let a_wins = (a.value(&mid) >= b.value(&mid)) == take_max;
                let src = if a_wins { a } else { b };
                pieces.push(Piece::new(
                    s[0].clone(),
                    s[1].clone(),
                    src.slope.clone(),
                    src.intercept.clone(),
                ));
            }
        }
        Ok(PiecewiseExponent {
            dim: self.dim,
            pieces,
        }
        .simplified())
    }
}

impl fmt::Display for PiecewiseExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(
                f,
                "({}, {}]: {}·α + {}",
                format_rational(&p.lo),
                format_rational(&p.hi),
                format_rational(&p.slope),
                format_rational(&p.intercept)
            )?;
        }
        Ok(())
    }
}
