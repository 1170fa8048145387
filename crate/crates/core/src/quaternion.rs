//! Quaternions and the canonical embedding of quaternionic matrices into
//! complex matrices of twice the size.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::algebra::{c, AlgebraElement, CMatrix, GroupElement};
use crate::error::Result;

/// `a + b i + c j + d k` with `k = ij`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn real(a: f64) -> Self {
        Self::new(a, 0.0, 0.0, 0.0)
    }

    pub fn conj(self) -> Self {
        Self::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// The `2x2` complex block `[[a+bi, c+di], [-c+di, a-bi]]`.
    pub fn to_block(self) -> [[num_complex::Complex64; 2]; 2] {
        [
            [c(self.a, self.b), c(self.c, self.d)],
            [c(-self.c, self.d), c(self.a, -self.b)],
        ]
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a - self.b * o.b - self.c * o.c - self.d * o.d,
            self.a * o.b + self.b * o.a + self.c * o.d - self.d * o.c,
            self.a * o.c - self.b * o.d + self.c * o.a + self.d * o.b,
            self.a * o.d + self.b * o.c - self.c * o.b + self.d * o.a,
        )
    }
}

/// Square quaternionic matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct QuaternionMatrix {
    n: usize,
    entries: Vec<Quaternion>,
}

impl QuaternionMatrix {
    pub fn new(n: usize, entries: Vec<Quaternion>) -> Self {
        assert_eq!(entries.len(), n * n, "expected {} quaternions", n * n);
        Self { n, entries }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(n, vec![Quaternion::ZERO; n * n])
    }

    pub fn from_rows(rows: &[&[Quaternion]]) -> Self {
        let n = rows.len();
        let entries = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(n, entries)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Quaternion {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, q: Quaternion) {
        self.entries[i * self.n + j] = q;
    }

    /// Complex `2n x 2n` matrix obtained blockwise from [`Quaternion::to_block`].
    pub fn to_complex(&self) -> CMatrix {
        let n = self.n;
        let mut m = CMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let blk = self.get(i, j).to_block();
                for (r, row) in blk.iter().enumerate() {
                    for (s, z) in row.iter().enumerate() {
                        m[(2 * i + r, 2 * j + s)] = *z;
                    }
                }
            }
        }
        m
    }
}

/// Embeds a skew-quaternion-Hermitian matrix as an element of `sp(n) ⊂ u(2n)`.
pub fn quaternion_embed(q: &QuaternionMatrix) -> Result<AlgebraElement> {
    AlgebraElement::new(q.to_complex())
}

/// Embeds a quaternionic unitary matrix as an element of `Sp(n) ⊂ U(2n)`.
pub fn quaternion_embed_group(q: &QuaternionMatrix) -> Result<GroupElement> {
    GroupElement::new(q.to_complex())
}

/// `diag(q_1, ..., q_n)`.
pub fn quaternion_diag(qs: &[Quaternion]) -> QuaternionMatrix {
    let mut m = QuaternionMatrix::zeros(qs.len());
    for (k, q) in qs.iter().enumerate() {
        m.set(k, k, *q);
    }
    m
}
