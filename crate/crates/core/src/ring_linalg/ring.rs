use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The chain ring Z/p^k. Elements are stored as canonical representatives in `0..p^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RingRepr", into = "RingRepr")]
pub struct ResidueRing {
    p: u64,
    k: u32,
    q: u64,
}

#[derive(Serialize, Deserialize)]
struct RingRepr {
    p: u64,
    k: u32,
}

impl TryFrom<RingRepr> for ResidueRing {
    type Error = Error;
    fn try_from(s: RingRepr) -> Result<Self> {
        ResidueRing::new(s.p, s.k)
    }
}

impl From<ResidueRing> for RingRepr {
    fn from(r: ResidueRing) -> Self {
        RingRepr { p: r.p, k: r.k }
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl ResidueRing {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidRing(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(Error::InvalidRing("length must be at least 1".into()));
        }
        let mut q: u64 = 1;
        for _ in 0..k {
            q = q
                .checked_mul(p)
                .filter(|&q| q < (1 << 31))
                .ok_or_else(|| Error::InvalidRing(format!("{p}^{k} too large")))?;
        }
        Ok(ResidueRing { p, k, q })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.q as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.q - b) % self.q
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.q - a) % self.q
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    /// `p^j`, which is zero once `j >= k`.
    pub fn pow_p(&self, j: u32) -> u64 {
        if j >= self.k {
            0
        } else {
            self.p.pow(j)
        }
    }

    /// Valuation; `k` for zero.
    pub fn val(&self, mut x: u64) -> u32 {
        if x == 0 {
            return self.k;
        }
        let mut v = 0;
        while x.is_multiple_of(self.p) {
            x /= self.p;
            v += 1;
        }
        v
    }

    /// Writes `x = p^v * u` with `u` a unit; returns `u` (1 for zero).
    pub fn unit_part(&self, x: u64) -> u64 {
        if x == 0 {
            return 1;
        }
        let mut x = x;
        while x.is_multiple_of(self.p) {
            x /= self.p;
        }
        x
    }

    pub fn is_unit(&self, x: u64) -> bool {
        !x.is_multiple_of(self.p)
    }

    pub fn inv(&self, x: u64) -> Option<u64> {
        if !self.is_unit(x) {
            return None;
        }
        let (mut a, mut b) = (x as i64, self.q as i64);
        let (mut s, mut t) = (1i64, 0i64);
        while b != 0 {
            let d = a / b;
            (a, b) = (b, a - d * b);
            (s, t) = (t, s - d * t);
        }
        Some(self.reduce(s))
    }

    /// Smallest `x` with `b * x = a`, if one exists.
    pub fn div(&self, a: u64, b: u64) -> Option<u64> {
        if a == 0 {
            return Some(0);
        }
        let vb = self.val(b);
        if self.val(a) < vb {
            return None;
        }
        let pv = self.p.pow(vb);
        let ub = self.inv(b / pv)?;
        let x = self.mul(a / pv, ub);
        Some(x % self.pow_big(self.k - vb))
    }

    /// `p^j` as an integer, valid for `j <= k`.
    pub fn pow_big(&self, j: u32) -> u64 {
        self.p.pow(j)
    }

    /// Reduction map Z/p^k -> Z/p^j.
    pub fn truncate(&self, j: u32) -> Result<ResidueRing> {
        if j == 0 || j > self.k {
            return Err(Error::InvalidRing(format!("cannot truncate length {} to {j}", self.k)));
        }
        ResidueRing::new(self.p, j)
    }

    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.q
    }

    pub fn units(&self) -> impl Iterator<Item = u64> + '_ {
        (1..self.q).filter(move |x| x % self.p != 0)
    }
}
