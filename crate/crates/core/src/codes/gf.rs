//! Arithmetic in GF(2^m) for m <= 8 with log/antilog tables, and the
//! polynomial routines shared by the algebraic decoders.

use std::sync::OnceLock;

/// A binary extension field given by a primitive polynomial. Elements are
/// bytes in polynomial basis.
#[derive(Debug, Clone)]
pub struct Field {
    m: u32,
    order: usize,
    exp: Vec<u8>,
    log: Vec<usize>,
}

pub type FieldElement = u8;

impl Field {
    /// Builds the tables; `poly` includes the `x^m` term. Panics if `poly` is
    /// not primitive.
    pub fn new(m: u32, poly: u32) -> Self {
        assert!((2..=8).contains(&m));
        let order = (1usize << m) - 1;
        let mut exp = vec![0u8; 2 * order];
        let mut log = vec![0usize; order + 1];
        let mut x = 1u32;
        for (i, slot) in exp.iter_mut().take(order).enumerate() {
            *slot = x as u8;
            assert!(i == 0 || x != 1, "polynomial {poly:#x} is not primitive");
            log[x as usize] = i;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        assert_eq!(x, 1, "polynomial {poly:#x} is not primitive");
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Self { m, order, exp, log }
    }

    /// GF(64) with `x^6 + x + 1`.
    pub fn gf64() -> &'static Field {
        static F: OnceLock<Field> = OnceLock::new();
        F.get_or_init(|| Field::new(6, 0x43))
    }

    /// GF(256) with `x^8 + x^4 + x^3 + x^2 + 1`.
    pub fn gf256() -> &'static Field {
        static F: OnceLock<Field> = OnceLock::new();
        F.get_or_init(|| Field::new(8, 0x11D))
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Multiplicative group order `2^m - 1`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.order + 1
    }

    pub fn add(&self, a: u8, b: u8) -> u8 {
        a ^ b
    }

    pub fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] + self.log[b as usize]]
        }
    }

    pub fn inv(&self, a: u8) -> u8 {
        assert!(a != 0, "zero has no inverse");
        self.exp[(self.order - self.log[a as usize]) % self.order]
    }

    pub fn div(&self, a: u8, b: u8) -> u8 {
        self.mul(a, self.inv(b))
    }

    /// `α^i` for any integer `i`.
    pub fn alpha_pow(&self, i: i64) -> u8 {
        self.exp[i.rem_euclid(self.order as i64) as usize]
    }

    pub fn pow(&self, a: u8, e: u64) -> u8 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = (self.log[a as usize] as u64 * (e % self.order as u64)) % self.order as u64;
        self.exp[l as usize]
    }

    /// Discrete logarithm base `α`; `None` for zero.
    pub fn log(&self, a: u8) -> Option<usize> {
        (a != 0).then(|| self.log[a as usize])
    }

    /// Evaluates `p(x)` with `p[i]` the coefficient of `x^i`.
    pub fn eval(&self, p: &[u8], x: u8) -> u8 {
        p.iter().rev().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }

    pub fn poly_mul(&self, a: &[u8], b: &[u8]) -> Vec<u8> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u8; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= self.mul(x, y);
            }
        }
        out
    }

    /// Formal derivative; only odd-degree terms survive in characteristic 2.
    pub fn derivative(&self, p: &[u8]) -> Vec<u8> {
        p.iter().enumerate().skip(1).map(|(i, &c)| if i % 2 == 1 { c } else { 0 }).collect()
    }

    /// Berlekamp-Massey with the connection polynomial seeded by an erasure
    /// locator of degree `nu`. `syndromes[j]` is `S_{j+1}`. Returns the
    /// errata locator with trailing zeros trimmed.
    pub fn berlekamp_massey(&self, syndromes: &[u8], erasure_locator: &[u8]) -> Vec<u8> {
        let nu = degree(erasure_locator).unwrap_or(0);
        let mut lambda = erasure_locator.to_vec();
        let mut b = erasure_locator.to_vec();
        let mut l = nu;
        for r in nu + 1..=syndromes.len() {
            let mut delta = 0u8;
            for (j, &c) in lambda.iter().enumerate() {
                if j < r {
                    delta ^= self.mul(c, syndromes[r - 1 - j]);
                }
            }
            let shifted: Vec<u8> = std::iter::once(0).chain(b.iter().copied()).collect();
            if delta == 0 {
                b = shifted;
                continue;
            }
            let mut t = lambda.clone();
            t.resize(t.len().max(shifted.len()), 0);
            for (i, &c) in shifted.iter().enumerate() {
                t[i] ^= self.mul(delta, c);
            }
            if 2 * l < r + nu {
                l = r + nu - l;
                let di = self.inv(delta);
                b = lambda.iter().map(|&c| self.mul(di, c)).collect();
            } else {
                b = shifted;
            }
            lambda = t;
        }
        trim(&mut lambda);
        lambda
    }

    /// Positions `l < n_max` with `p(α^{-l}) = 0`, found by Chien search.
    /// `None` unless the root count equals the degree with all roots
    /// distinct and in range.
    pub fn locate(&self, locator: &[u8], n_max: usize) -> Option<Vec<usize>> {
        let deg = degree(locator)?;
        let mut found = Vec::with_capacity(deg);
        for l in 0..self.order {
            if self.eval(locator, self.alpha_pow(-(l as i64))) == 0 {
                found.push(l);
            }
        }
        (found.len() == deg && found.iter().all(|&l| l < n_max)).then_some(found)
    }
}

pub(crate) fn degree(p: &[u8]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

pub(crate) fn trim(p: &mut Vec<u8>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}
