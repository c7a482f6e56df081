use std::fmt;

use serde::{Deserialize, Serialize};

use super::FiniteInverseSemigroup;
use crate::error::{Error, Result};

/// Largest `n` for which `PB(X_n)` is enumerated (13327 elements).
pub const MAX_PB_N: usize = 6;

/// Partial bijection of `X_n = {1, …, n}`.
///
/// Stored as an image table; `img[x-1] == 0` means `x` is outside the domain.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialBijection {
    img: Vec<u8>,
}

impl PartialBijection {
    pub fn new(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if n > u8::MAX as usize {
            return Err(Error::Semigroup(format!("universe size {n} too large")));
        }
        let mut img = vec![0u8; n];
        let mut used = vec![false; n + 1];
        for &(a, b) in pairs {
            if a == 0 || a > n || b == 0 || b > n {
                return Err(Error::Semigroup(format!("pair ({a},{b}) outside 1..={n}")));
            }
            if img[a - 1] != 0 {
                return Err(Error::Semigroup(format!("{a} mapped twice")));
            }
            if used[b] {
                return Err(Error::Semigroup(format!("{b} hit twice: not injective")));
            }
            img[a - 1] = b as u8;
            used[b] = true;
        }
        Ok(Self { img })
    }

    pub fn empty(n: usize) -> Self {
        Self { img: vec![0; n] }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            img: (1..=n as u8).collect(),
        }
    }

    /// Identity map of `set ⊂ X_n`.
    pub fn identity_on(n: usize, set: impl IntoIterator<Item = usize>) -> Result<Self> {
        let pairs: Vec<_> = set.into_iter().map(|x| (x, x)).collect();
        Self::new(n, &pairs)
    }

    pub fn universe(&self) -> usize {
        self.img.len()
    }

    pub fn apply(&self, x: usize) -> Option<usize> {
        match self.img.get(x.wrapping_sub(1)) {
            Some(&y) if y != 0 => Some(y as usize),
            _ => None,
        }
    }

    /// Sorted by domain point.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.img
            .iter()
            .enumerate()
            .filter(|(_, &y)| y != 0)
            .map(|(x, &y)| (x + 1, y as usize))
            .collect()
    }

    pub fn domain(&self) -> Vec<usize> {
        self.pairs().into_iter().map(|p| p.0).collect()
    }

    pub fn image(&self) -> Vec<usize> {
        let mut v: Vec<_> = self.pairs().into_iter().map(|p| p.1).collect();
        v.sort_unstable();
        v
    }

    pub fn rank(&self) -> usize {
        self.img.iter().filter(|&&y| y != 0).count()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        debug_assert_eq!(self.universe(), other.universe());
        Self {
            img: other
                .img
                .iter()
                .map(|&y| if y == 0 { 0 } else { self.img[y as usize - 1] })
                .collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut img = vec![0u8; self.img.len()];
        for (x, &y) in self.img.iter().enumerate() {
            if y != 0 {
                img[y as usize - 1] = (x + 1) as u8;
            }
        }
        Self { img }
    }

    pub fn is_idempotent(&self) -> bool {
        self.img.iter().enumerate().all(|(x, &y)| y == 0 || y as usize == x + 1)
    }
}

impl fmt::Debug for PartialBijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PartialBijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.pairs().iter().map(|(a, b)| format!("{a}↦{b}")).collect();
        write!(f, "{{{}}}/{}", body.join(","), self.universe())
    }
}

/// JSON shape `{n, pairs: [[a, b], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialBijectionDoc {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl From<&PartialBijection> for PartialBijectionDoc {
    fn from(p: &PartialBijection) -> Self {
        Self {
            n: p.universe(),
            pairs: p.pairs(),
        }
    }
}

impl TryFrom<&PartialBijectionDoc> for PartialBijection {
    type Error = Error;

    fn try_from(d: &PartialBijectionDoc) -> Result<Self> {
        PartialBijection::new(d.n, &d.pairs)
    }
}

/// The symmetric inverse monoid `PB(X_n)`.
#[derive(Clone, Debug)]
pub struct PbSemigroup {
    n: usize,
    elements: Vec<PartialBijection>,
}

/// Enumerate `PB(X_n)`, sorted by rank and then lexicographically.
pub fn pb_semigroup(n: usize) -> Result<PbSemigroup> {
    if n > MAX_PB_N {
        return Err(Error::TooLarge(n));
    }
    let mut elements = Vec::new();
    let mut img = vec![0u8; n];
    let mut used = vec![false; n + 1];
    fn rec(x: usize, n: usize, img: &mut Vec<u8>, used: &mut Vec<bool>, out: &mut Vec<PartialBijection>) {
        if x == n {
            out.push(PartialBijection { img: img.clone() });
            return;
        }
        img[x] = 0;
        rec(x + 1, n, img, used, out);
        for y in 1..=n {
            if !used[y] {
                used[y] = true;
                img[x] = y as u8;
                rec(x + 1, n, img, used, out);
                used[y] = false;
            }
        }
        img[x] = 0;
    }
    rec(0, n, &mut img, &mut used, &mut elements);
    elements.sort_by(|a, b| a.rank().cmp(&b.rank()).then_with(|| a.cmp(b)));
    Ok(PbSemigroup { n, elements })
}

impl PbSemigroup {
    pub fn n(&self) -> usize {
        self.n
    }
}

impl FiniteInverseSemigroup for PbSemigroup {
    type Elem = PartialBijection;

    fn elements(&self) -> &[PartialBijection] {
        &self.elements
    }

    fn mul(&self, a: &PartialBijection, b: &PartialBijection) -> PartialBijection {
        a.compose(b)
    }

    fn star(&self, a: &PartialBijection) -> PartialBijection {
        a.inverse()
    }

    fn zero(&self) -> PartialBijection {
        PartialBijection::empty(self.n)
    }

    fn one(&self) -> PartialBijection {
        PartialBijection::identity(self.n)
    }
}
