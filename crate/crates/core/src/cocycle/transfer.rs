//! 2x2 transfer matrices and overflow-free ordered products.

use num_complex::Complex64 as C64;

use crate::dynamics::{BaseSystem, Phase};
use crate::error::{Error, Result};
use crate::potential::{potential_sequence, Potential};

/// A 2x2 complex matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Mat2::new(l, o, o, l)
    }

    pub fn diag(p: C64, q: C64) -> Self {
        let o = C64::new(0.0, 0.0);
        Mat2::new(p, o, o, q)
    }

    /// Schrodinger transfer matrix `[[v - E, -1], [1, 0]]`.
    #[inline]
    pub fn schrodinger(v: C64, e: C64) -> Self {
        Mat2::new(v - e, C64::new(-1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    /// Hatano-Nelson transfer matrix `[[e^{-g}(v - E), -e^{-2g}], [1, 0]]`.
    #[inline]
    pub fn hatano_nelson(v: C64, e: C64, g: f64) -> Self {
        Mat2::new((-g).exp() * (v - e), C64::new(-(-2.0 * g).exp(), 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    #[inline]
    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    #[inline]
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    /// `det * inverse`.
    pub fn adjugate(&self) -> Mat2 {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.norm().max(self.b.norm()).max(self.c.norm()).max(self.d.norm())
    }

    fn frob_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    /// Operator 2-norm (largest singular value).
    pub fn norm(&self) -> f64 {
        let f = self.frob_sqr();
        let det = self.det().norm();
        let disc = ((f - 2.0 * det) * (f + 2.0 * det)).max(0.0).sqrt();
        ((f + disc) / 2.0).sqrt()
    }

    /// Largest entrywise difference.
    pub fn max_diff(&self, o: &Mat2) -> f64 {
        (self.a - o.a).norm().max((self.b - o.b).norm()).max((self.c - o.c).norm()).max((self.d - o.d).norm())
    }
}

/// An ordered product `current * exp(log_scale)` that never overflows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductAccumulator {
    pub current: Mat2,
    pub log_scale: f64,
    pub steps: u64,
}

impl Default for ProductAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl ProductAccumulator {
    pub fn new() -> Self {
        ProductAccumulator { current: Mat2::identity(), log_scale: 0.0, steps: 0 }
    }

    /// Left-multiplies by `m`.
    #[inline]
    pub fn push(&mut self, m: &Mat2) {
        self.current = m.mul(&self.current);
        self.steps += 1;
        self.renormalize();
    }

    /// Left-multiplies by `[[a, b], [1, 0]]` without forming the matrix.
    #[inline]
    pub fn push_companion(&mut self, a: C64, b: C64) {
        let m = &mut self.current;
        let (na, nb) = (a * m.a + b * m.c, a * m.b + b * m.d);
        m.c = m.a;
        m.d = m.b;
        m.a = na;
        m.b = nb;
        self.steps += 1;
        self.renormalize();
    }

    #[inline]
    fn renormalize(&mut self) {
        let m = &self.current;
        let big = m.a.norm_sqr().max(m.b.norm_sqr()).max(m.c.norm_sqr()).max(m.d.norm_sqr());
        if !(0.25..=4.0).contains(&big) && big > 0.0 {
            let s = big.sqrt();
            self.current = self.current.scale(C64::new(1.0 / s, 0.0));
            self.log_scale += s.ln();
        }
    }

    /// `log ||A_n||` with the extracted scale folded back in.
    pub fn log_norm(&self) -> f64 {
        self.current.norm().ln() + self.log_scale
    }

    /// The full product; may overflow for long products.
    pub fn reconstruct(&self) -> Mat2 {
        self.current.scale(C64::new(self.log_scale.exp(), 0.0))
    }

    /// `log |det A_n|`.
    pub fn log_abs_det(&self) -> f64 {
        self.current.det().norm().ln() + 2.0 * self.log_scale
    }
}

/// Product `S_E^g(T^{n-1} x0) ... S_E^g(x0)`; `g = 0` is the Schrodinger cocycle.
pub fn transfer_product(
    base: &BaseSystem,
    p: &Potential,
    e: C64,
    g: f64,
    x0: &Phase,
    n: usize,
) -> Result<ProductAccumulator> {
    if !(g >= 0.0) {
        return Err(Error::InvalidArgument(format!("g must be non-negative, got {g}")));
    }
    let seq = potential_sequence(base, p, x0, 0, n)?;
    Ok(product_of_sequence(&seq, e, g))
}

pub(crate) fn product_of_sequence(seq: &[C64], e: C64, g: f64) -> ProductAccumulator {
    let mut acc = ProductAccumulator::new();
    let damp = (-g).exp();
    let b = C64::new(-(-2.0 * g).exp(), 0.0);
    for &v in seq {
        acc.push_companion(damp * (v - e), b);
    }
    acc
}
