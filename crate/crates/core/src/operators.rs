//! Dirichlet truncations of the Jacobi and discrete Schrödinger operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::CompactPerturbation;
use crate::trieig::SymTridiag;

/// How the infinite operators are cut down to finite matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    /// Free sites kept on each side of the perturbation window.
    pub margin: usize,
    /// Margin multiplier between refinements.
    pub growth_factor: usize,
    /// Largest eigenvalue movement accepted as converged.
    pub stability_tol: f64,
    /// Refinement stops with an error past this margin.
    pub max_margin: usize,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self {
            margin: 32,
            growth_factor: 2,
            stability_tol: 1e-12,
            max_margin: 4096,
        }
    }
}

impl TruncationSpec {
    pub fn with_margin(margin: usize) -> Self {
        Self {
            margin,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.margin < 1 {
            return Err(Error::Usage("truncation margin must be at least 1".into()));
        }
        if self.growth_factor < 2 {
            return Err(Error::Usage("growth factor must be at least 2".into()));
        }
        if !(self.stability_tol > 0.0) {
            return Err(Error::Usage("stability tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// A diagonal sequence on a finite window of ℤ. Zeros are kept, since the
/// window fixes the truncation geometry.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Potential {
    pub offset: i64,
    pub values: Vec<f64>,
}

impl Potential {
    pub fn new(offset: i64, values: Vec<f64>) -> Self {
        Self { offset, values }
    }

    pub fn at(&self, n: i64) -> f64 {
        let i = n - self.offset;
        if i < 0 {
            return 0.0;
        }
        self.values.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn negated(&self) -> Self {
        Self::new(self.offset, self.values.iter().map(|v| -v).collect())
    }
}

impl From<&CompactPerturbation> for Potential {
    fn from(p: &CompactPerturbation) -> Self {
        Self::new(p.offset(), p.b().to_vec())
    }
}

/// Inclusive site range `[first, last]` of a truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub first: i64,
    pub last: i64,
}

impl Window {
    /// `len` stored sites from `offset`, padded by `margin` on both sides.
    /// An empty window still yields `2·margin` sites.
    pub fn around(offset: i64, len: usize, margin: usize) -> Self {
        let margin = margin as i64;
        Self {
            first: offset - margin,
            last: offset + len as i64 - 1 + margin,
        }
    }

    pub fn union(self, other: Self) -> Self {
        Self {
            first: self.first.min(other.first),
            last: self.last.max(other.last),
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.first..=self.last
    }

    pub fn len(&self) -> usize {
        (self.last - self.first + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Restriction of W to `window`: b_n on the diagonal, a_n between n, n+1.
pub fn jacobi_matrix_on(p: &CompactPerturbation, window: Window) -> SymTridiag {
    let diag = window.sites().map(|n| p.b_at(n)).collect();
    let offdiag = (window.first..window.last).map(|n| p.a_at(n)).collect();
    SymTridiag::new(diag, offdiag).expect("window holds at least one site")
}

pub fn jacobi_matrix(p: &CompactPerturbation, spec: &TruncationSpec) -> SymTridiag {
    jacobi_matrix_on(p, Window::around(p.offset(), p.len(), spec.margin))
}

/// Which discrete Schrödinger operator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchrodingerSign {
    /// D*D − b.
    Plus,
    /// −D*D + b.
    Minus,
}

pub fn schrodinger_matrix_on(b: &Potential, sign: SchrodingerSign, window: Window) -> SymTridiag {
    let m = window.len();
    let (diag, offdiag) = match sign {
        SchrodingerSign::Plus => (
            window.sites().map(|n| 2.0 - b.at(n)).collect(),
            vec![-1.0; m - 1],
        ),
        SchrodingerSign::Minus => (
            window.sites().map(|n| b.at(n) - 2.0).collect(),
            vec![1.0; m - 1],
        ),
    };
    SymTridiag::new(diag, offdiag).expect("window holds at least one site")
}

pub fn schrodinger_matrix(
    b: &Potential,
    sign: SchrodingerSign,
    spec: &TruncationSpec,
) -> SymTridiag {
    schrodinger_matrix_on(
        b,
        sign,
        Window::around(b.offset, b.values.len(), spec.margin),
    )
}

/// b_n^± = b_n ± (|a_{n−1} − 1| + |a_n − 1|), returned as (b⁻, b⁺).
///
/// The window grows by one site to the right when the last coupling is
/// not 1, since a_n also enters the entry at n + 1.
pub fn sandwich_potentials(p: &CompactPerturbation) -> (Potential, Potential) {
    let widen = p.a().last().is_some_and(|&a| a != 1.0);
    let len = p.len() + usize::from(widen);
    let (mut minus, mut plus) = (Vec::with_capacity(len), Vec::with_capacity(len));
    for n in p.offset()..p.offset() + len as i64 {
        let spread = (p.a_at(n - 1) - 1.0).abs() + (p.a_at(n) - 1.0).abs();
        minus.push(p.b_at(n) - spread);
        plus.push(p.b_at(n) + spread);
    }
    (
        Potential::new(p.offset(), minus),
        Potential::new(p.offset(), plus),
    )
}

/// Conjugation by diag((−1)ⁿ): off-diagonal entries change sign.
pub fn flip_offdiag_signs(t: &SymTridiag) -> SymTridiag {
    SymTridiag::new(t.diag().to_vec(), t.offdiag().iter().map(|e| -e).collect())
        .expect("shape preserved")
}
