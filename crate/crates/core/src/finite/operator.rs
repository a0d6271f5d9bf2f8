//! Truncated Hatano-Nelson matrices.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{BaseSystem, Phase};
use crate::error::{Error, Result};
use crate::potential::{potential_sequence, Potential};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

impl Boundary {
    pub fn name(&self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Dirichlet => "dirichlet",
        }
    }
}

/// `n x n` matrix with `diagonal[k] = v(T^k x0)`, `-e^g` above and `-e^{-g}`
/// below the diagonal. With periodic boundary, `-e^g` also sits in the
/// bottom-left corner and `-e^{-g}` in the top-right corner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteOperator {
    pub g: f64,
    pub boundary: Boundary,
    pub diagonal: Vec<C64>,
}

pub fn build(
    base: &BaseSystem,
    p: &Potential,
    x0: &Phase,
    n: usize,
    g: f64,
    boundary: Boundary,
) -> Result<FiniteOperator> {
    let diagonal = potential_sequence(base, p, x0, 0, n)?;
    FiniteOperator::new(diagonal, g, boundary)
}

impl FiniteOperator {
    pub fn new(diagonal: Vec<C64>, g: f64, boundary: Boundary) -> Result<Self> {
        if diagonal.len() < 3 {
            return Err(Error::InvalidArgument(format!("matrix size must be at least 3, got {}", diagonal.len())));
        }
        if !g.is_finite() {
            return Err(Error::InvalidArgument("g must be finite".into()));
        }
        Ok(FiniteOperator { g, boundary, diagonal })
    }

    pub fn n(&self) -> usize {
        self.diagonal.len()
    }

    /// Hopping to the right neighbour, `-e^g`.
    pub fn upper(&self) -> C64 {
        C64::new(-self.g.exp(), 0.0)
    }

    /// Hopping to the left neighbour, `-e^{-g}`.
    pub fn lower(&self) -> C64 {
        C64::new(-(-self.g).exp(), 0.0)
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        let n = self.n();
        let periodic = self.boundary == Boundary::Periodic;
        if i == j {
            self.diagonal[i]
        } else if j == i + 1 || (periodic && i == n - 1 && j == 0) {
            self.upper()
        } else if i == j + 1 || (periodic && i == 0 && j == n - 1) {
            self.lower()
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<C64> {
        let n = self.n();
        let mut a = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            a[i * n + i] = self.diagonal[i];
            a[i * n + (i + 1) % n] = self.upper();
            a[((i + 1) % n) * n + i] = self.lower();
        }
        if self.boundary == Boundary::Dirichlet {
            a[(n - 1) * n] = C64::new(0.0, 0.0);
            a[n - 1] = C64::new(0.0, 0.0);
        }
        a
    }

    pub fn trace(&self) -> C64 {
        self.diagonal.iter().sum()
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n();
        let (up, lo) = (self.upper(), self.lower());
        let periodic = self.boundary == Boundary::Periodic;
        (0..n)
            .map(|i| {
                let mut s = self.diagonal[i] * x[i];
                if i + 1 < n {
                    s += up * x[i + 1];
                } else if periodic {
                    s += up * x[0];
                }
                if i > 0 {
                    s += lo * x[i - 1];
                } else if periodic {
                    s += lo * x[n - 1];
                }
                s
            })
            .collect()
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        let off = if self.boundary == Boundary::Periodic { self.n() } else { self.n() - 1 } as f64;
        let d: f64 = self.diagonal.iter().map(|v| v.norm_sqr()).sum();
        (d + off * (self.upper().norm_sqr() + self.lower().norm_sqr())).sqrt()
    }

    pub fn with_diagonal_shift(&self, c: C64) -> FiniteOperator {
        FiniteOperator { g: self.g, boundary: self.boundary, diagonal: self.diagonal.iter().map(|v| v + c).collect() }
    }
}
