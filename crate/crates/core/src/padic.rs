//! Exact p-adic balls with centers in `Z[1/p]`.
//!
//! A ball is a coset `c + p^m Z_p`. The open ball `B_r(a)` with
//! `r = p^-n` is the coset `a + p^(n+1) Z_p`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::Tree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("{0} is not prime")]
    NotPrime(i128),
    #[error("balls over different primes {0} and {1}")]
    PrimeMismatch(i128, i128),
    #[error("arithmetic overflow")]
    Overflow,
    #[error("cannot parse ball `{0}`: expected p^k*Zp+c")]
    Parse(String),
    #[error("{0} is not of the form u/p^e")]
    NotRepresentable(String),
}

pub fn is_prime(p: i128) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn check_prime(p: i128) -> Result<(), PadicError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(PadicError::NotPrime(p))
    }
}

pub fn pow(p: i128, k: u32) -> Result<i128, PadicError> {
    p.checked_pow(k).ok_or(PadicError::Overflow)
}

/// `mantissa · p^exponent`, normalized so that `p ∤ mantissa` (zero has
/// exponent 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PAdicNumber {
    #[serde(rename = "m")]
    pub mantissa: i128,
    #[serde(rename = "e")]
    pub exponent: i32,
}

impl PAdicNumber {
    pub const ZERO: PAdicNumber = PAdicNumber { mantissa: 0, exponent: 0 };

    pub fn new(p: i128, mut mantissa: i128, mut exponent: i32) -> Self {
        if mantissa == 0 {
            return Self::ZERO;
        }
        while mantissa % p == 0 {
            mantissa /= p;
            exponent += 1;
        }
        Self { mantissa, exponent }
    }

    pub fn integer(p: i128, n: i128) -> Self {
        Self::new(p, n, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    /// `v_p`, with `None` for zero.
    pub fn valuation(&self) -> Option<i32> {
        (!self.is_zero()).then_some(self.exponent)
    }

    pub fn sub(&self, p: i128, other: &Self) -> Result<Self, PadicError> {
        self.add(p, &Self { mantissa: -other.mantissa, exponent: other.exponent })
    }

    pub fn add(&self, p: i128, other: &Self) -> Result<Self, PadicError> {
        if self.is_zero() {
            return Ok(*other);
        }
        if other.is_zero() {
            return Ok(*self);
        }
        let e = self.exponent.min(other.exponent);
        let sa = self
            .mantissa
            .checked_mul(pow(p, (self.exponent - e) as u32)?)
            .ok_or(PadicError::Overflow)?;
        let sb = other
            .mantissa
            .checked_mul(pow(p, (other.exponent - e) as u32)?)
            .ok_or(PadicError::Overflow)?;
        Ok(Self::new(p, sa.checked_add(sb).ok_or(PadicError::Overflow)?, e))
    }

    /// The integer `self · p^shift`, if it is one.
    pub fn scaled_integer(&self, p: i128, shift: i32) -> Result<i128, PadicError> {
        let e = self.exponent + shift;
        if self.is_zero() {
            return Ok(0);
        }
        if e < 0 {
            return Err(PadicError::NotRepresentable(self.display(p)));
        }
        self.mantissa.checked_mul(pow(p, e as u32)?).ok_or(PadicError::Overflow)
    }

    pub fn display(&self, p: i128) -> String {
        if self.exponent >= 0 {
            match pow(p, self.exponent as u32).ok().and_then(|q| q.checked_mul(self.mantissa)) {
                Some(v) => v.to_string(),
                None => format!("{}*{p}^{}", self.mantissa, self.exponent),
            }
        } else {
            match pow(p, (-self.exponent) as u32) {
                Ok(d) => format!("{}/{d}", self.mantissa),
                Err(_) => format!("{}*{p}^{}", self.mantissa, self.exponent),
            }
        }
    }

    /// Parses an integer, `u/d` with `d` a power of `p`, or `u*p^e`.
    pub fn parse(p: i128, s: &str) -> Result<Self, PadicError> {
        let s = s.trim();
        let bad = || PadicError::NotRepresentable(s.to_string());
        if let Some((u, d)) = s.split_once('/') {
            let u: i128 = u.trim().parse().map_err(|_| bad())?;
            let mut d: i128 = d.trim().parse().map_err(|_| bad())?;
            let mut e = 0;
            while d > 1 && d % p == 0 {
                d /= p;
                e -= 1;
            }
            if d != 1 {
                return Err(bad());
            }
            return Ok(Self::new(p, u, e));
        }
        if let Some((u, pe)) = s.split_once('*') {
            let u: i128 = u.trim().parse().map_err(|_| bad())?;
            let (base, e) = pe.split_once('^').ok_or_else(bad)?;
            if base.trim().parse::<i128>().ok() != Some(p) {
                return Err(bad());
            }
            let e: i32 = e.trim().parse().map_err(|_| bad())?;
            return Ok(Self::new(p, u, e));
        }
        let n: i128 = s.parse().map_err(|_| bad())?;
        Ok(Self::integer(p, n))
    }
}

/// The coset `center + p^coset_exp Z_p`, with canonical center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PAdicBall {
    pub p: i128,
    pub center: PAdicNumber,
    pub coset_exp: i32,
}

impl PAdicBall {
    pub fn new(p: i128, center: PAdicNumber, coset_exp: i32) -> Result<Self, PadicError> {
        check_prime(p)?;
        let center = PAdicNumber::new(p, center.mantissa, center.exponent);
        let center = Self::reduce(p, center, coset_exp)?;
        Ok(Self { p, center, coset_exp })
    }

    /// The open ball `B_{p^-n}(a)`.
    pub fn open(p: i128, a: PAdicNumber, n: i32) -> Result<Self, PadicError> {
        Self::new(p, a, n + 1)
    }

    /// Center reduced into `p^e [0, p^(m-e))` with `e = v_p(center)`.
    fn reduce(p: i128, c: PAdicNumber, m: i32) -> Result<PAdicNumber, PadicError> {
        if c.is_zero() || c.exponent >= m {
            return Ok(PAdicNumber::ZERO);
        }
        let modulus = pow(p, (m - c.exponent) as u32)?;
        Ok(PAdicNumber::new(p, c.mantissa.rem_euclid(modulus), c.exponent))
    }

    pub fn from_integer(p: i128, c: i128, m: i32) -> Result<Self, PadicError> {
        Self::new(p, PAdicNumber::integer(p, c), m)
    }

    /// `v_p(x − center) ≥ m`, by exact valuation.
    pub fn contains(&self, x: &PAdicNumber) -> Result<bool, PadicError> {
        let d = x.sub(self.p, &self.center)?;
        Ok(d.valuation().is_none_or(|v| v >= self.coset_exp))
    }

    /// The `p` cosets one level down.
    pub fn children(&self) -> Result<Vec<PAdicBall>, PadicError> {
        let step = PAdicNumber::new(self.p, 1, self.coset_exp);
        let mut out = Vec::with_capacity(self.p as usize);
        let mut c = self.center;
        for _ in 0..self.p {
            out.push(Self::new(self.p, c, self.coset_exp + 1)?);
            c = c.add(self.p, &step)?;
        }
        Ok(out)
    }
}

impl fmt::Display for PAdicBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}*Zp+{}", self.p, self.coset_exp, self.center.display(self.p))
    }
}

impl FromStr for PAdicBall {
    type Err = PadicError;

    /// `p^k*Zp+c`, or just `p^k*Zp`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PadicError::Parse(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (head, center) = match compact.split_once("*Zp") {
            Some((h, "")) => (h, None),
            Some((h, rest)) => (h, Some(rest.strip_prefix('+').ok_or_else(bad)?)),
            None => return Err(bad()),
        };
        let (p, k) = head.split_once('^').ok_or_else(bad)?;
        let p: i128 = p.parse().map_err(|_| bad())?;
        let k: i32 = k.parse().map_err(|_| bad())?;
        check_prime(p)?;
        let c = match center {
            Some(c) => PAdicNumber::parse(p, c)?,
            None => PAdicNumber::ZERO,
        };
        Self::new(p, c, k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BallRelation {
    Disjoint,
    LeftInsideRight,
    RightInsideLeft,
    Equal,
}

pub fn trichotomy(a: &PAdicBall, b: &PAdicBall) -> Result<BallRelation, PadicError> {
    if a.p != b.p {
        return Err(PadicError::PrimeMismatch(a.p, b.p));
    }
    let v = a.center.sub(a.p, &b.center)?.valuation();
    let low = a.coset_exp.min(b.coset_exp);
    if v.is_some_and(|v| v < low) {
        return Ok(BallRelation::Disjoint);
    }
    Ok(match a.coset_exp.cmp(&b.coset_exp) {
        Ordering::Equal => BallRelation::Equal,
        Ordering::Greater => BallRelation::LeftInsideRight,
        Ordering::Less => BallRelation::RightInsideLeft,
    })
}

/// All balls `c + p^m Z_p` inside `p^-lo Z_p` with `-lo ≤ m ≤ hi`, level
/// by level.
pub fn ball_window(p: i128, lo: i32, hi: i32) -> Result<Vec<PAdicBall>, PadicError> {
    check_prime(p)?;
    let mut level = vec![PAdicBall::new(p, PAdicNumber::ZERO, -lo)?];
    let mut out = level.clone();
    for _ in -lo..hi {
        let mut next = Vec::new();
        for b in &level {
            next.extend(b.children()?);
        }
        out.extend_from_slice(&next);
        level = next;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationsReport {
    pub p: i128,
    pub depth: i32,
    pub balls: usize,
    pub pairs: usize,
    /// Pairs whose disjointness verdict disagrees with `|a−b| ≥ r ∨ s`.
    pub separation_defects: usize,
    /// Every grid point is in exactly one ball of each level.
    pub grid_covered: bool,
    /// Balls that are not the disjoint union of their `p` children.
    pub split_defects: usize,
    pub defects: Vec<String>,
}

impl RelationsReport {
    pub fn passed(&self) -> bool {
        self.separation_defects == 0 && self.grid_covered && self.split_defects == 0
    }
}

/// Checks the three defining relations on the window of balls with
/// `|m| ≤ depth`, using the center grid `p^-depth Z / p^depth Z`.
pub fn verify_relations(p: i128, depth: i32) -> Result<RelationsReport, PadicError> {
    let balls = ball_window(p, depth, depth)?;
    let mut defects = Vec::new();
    let mut separation_defects = 0;
    let mut pairs = 0;
    for (i, a) in balls.iter().enumerate() {
        for b in &balls[i..] {
            pairs += 1;
            // radii: B_{p^-n} is stored with m = n + 1, so r = p^(1-m)
            let dist = a.center.sub(p, &b.center)?.valuation().map(|v| -v);
            let big = (1 - a.coset_exp).max(1 - b.coset_exp);
            let separated = dist.is_some_and(|d| d >= big);
            let disjoint = trichotomy(a, b)? == BallRelation::Disjoint;
            if separated != disjoint {
                separation_defects += 1;
                if defects.len() < 8 {
                    defects.push(format!("relation (1) on {a} and {b}"));
                }
            }
        }
    }
    let grid_size = pow(p, (2 * depth) as u32)?;
    let grid: Vec<PAdicNumber> = (0..grid_size).map(|k| PAdicNumber::new(p, k, -depth)).collect();
    let mut grid_covered = true;
    for m in -depth..=depth {
        let level: Vec<&PAdicBall> = balls.iter().filter(|b| b.coset_exp == m).collect();
        for x in &grid {
            let hits = level.iter().filter(|b| b.contains(x).unwrap_or(false)).count();
            if hits != 1 {
                grid_covered = false;
                if defects.len() < 8 {
                    defects.push(format!("relation (2): {} lies in {hits} balls of level {m}", x.display(p)));
                }
            }
        }
    }
    let mut split_defects = 0;
    for b in balls.iter().filter(|b| b.coset_exp < depth) {
        let kids = b.children()?;
        let mut ok = kids.len() == p as usize;
        for (i, x) in kids.iter().enumerate() {
            ok &= trichotomy(x, b)? == BallRelation::LeftInsideRight;
            for y in &kids[i + 1..] {
                ok &= trichotomy(x, y)? == BallRelation::Disjoint;
            }
        }
        for x in grid.iter().filter(|x| b.contains(x).unwrap_or(false)) {
            ok &= kids.iter().filter(|k| k.contains(x).unwrap_or(false)).count() == 1;
        }
        if !ok {
            split_defects += 1;
            if defects.len() < 8 {
                defects.push(format!("relation (3) on {b}"));
            }
        }
    }
    Ok(RelationsReport {
        p,
        depth,
        balls: balls.len(),
        pairs,
        separation_defects,
        grid_covered,
        split_defects,
        defects,
    })
}

/// Complete p-ary tree of the cosets `a + p^k Z_p`, `k = 0..=depth`.
pub fn zp_tree(p: i128, depth: usize) -> Result<(Tree, Vec<PAdicBall>), PadicError> {
    ball_subtree(PAdicBall::new(p, PAdicNumber::ZERO, 0)?, depth)
}

fn ball_subtree(root: PAdicBall, depth: usize) -> Result<(Tree, Vec<PAdicBall>), PadicError> {
    let mut parent = vec![None];
    let mut balls = vec![root];
    let mut frontier = vec![0usize];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &v in &frontier {
            for c in balls[v].children()? {
                parent.push(Some(v));
                balls.push(c);
                next.push(balls.len() - 1);
            }
        }
        frontier = next;
    }
    let labels = balls.iter().map(|b| b.to_string()).collect();
    let tree = Tree::from_parents(parent).expect("coset tree").with_labels(labels);
    Ok((tree, balls))
}

/// The balls between `p^vmin Z_p` and coset exponent `depth`, as a forest
/// rooted at the cosets of `Z_p`.
pub fn qp_ball_tree(p: i128, vmin: i32, depth: usize) -> Result<Vec<(Tree, Vec<PAdicBall>)>, PadicError> {
    check_prime(p)?;
    let vmin = vmin.min(0);
    let roots = ball_window(p, -vmin, 0)?.into_iter().filter(|b| b.coset_exp == 0);
    roots.map(|r| ball_subtree(r, depth)).collect()
}
