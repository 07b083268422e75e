//! Finite-support sequences on ℤ and the lattice operators acting on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real sequence on ℤ that vanishes outside a finite window.
///
/// Leading and trailing zeros are trimmed on construction, so two vectors
/// with the same entries compare equal regardless of how they were padded.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LatticeVector {
    offset: i64,
    values: Vec<f64>,
}

impl LatticeVector {
    pub fn new(offset: i64, values: Vec<f64>) -> Self {
        let first = values.iter().position(|v| *v != 0.0);
        let Some(first) = first else {
            return Self::zero();
        };
        let last = values.iter().rposition(|v| *v != 0.0).unwrap();
        Self {
            offset: offset + first as i64,
            values: values[first..=last].to_vec(),
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Unit vector at site `n`.
    pub fn delta(n: i64) -> Self {
        Self::new(n, vec![1.0])
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// First and last site of the stored window, `None` for the zero vector.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.values.is_empty() {
            None
        } else {
            Some((self.offset, self.offset + self.values.len() as i64 - 1))
        }
    }

    pub fn get(&self, n: i64) -> f64 {
        let i = n - self.offset;
        if i < 0 {
            return 0.0;
        }
        self.values.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).fold(0.0, f64::max)
    }

    /// Entries on `[first, last]`, zero-padded.
    pub fn dense(&self, first: i64, last: i64) -> Vec<f64> {
        (first..=last).map(|n| self.get(n)).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.offset,
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

fn union_support(u: &LatticeVector, v: &LatticeVector) -> Option<(i64, i64)> {
    match (u.support(), v.support()) {
        (None, None) => None,
        (Some(s), None) | (None, Some(s)) => Some(s),
        (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
    }
}

pub fn inner(u: &LatticeVector, v: &LatticeVector) -> f64 {
    let (Some((a, b)), Some((c, d))) = (u.support(), v.support()) else {
        return 0.0;
    };
    let (lo, hi) = (a.max(c), b.min(d));
    (lo..=hi).map(|n| u.get(n) * v.get(n)).sum()
}

pub fn norm(u: &LatticeVector) -> f64 {
    u.norm()
}

pub fn add(u: &LatticeVector, v: &LatticeVector) -> LatticeVector {
    match union_support(u, v) {
        None => LatticeVector::zero(),
        Some((lo, hi)) => LatticeVector::new(lo, (lo..=hi).map(|n| u.get(n) + v.get(n)).collect()),
    }
}

/// Forward difference (Dφ)(n) = φ(n+1) − φ(n).
pub fn apply_d(phi: &LatticeVector) -> LatticeVector {
    let Some((lo, hi)) = phi.support() else {
        return LatticeVector::zero();
    };
    LatticeVector::new(
        lo - 1,
        (lo - 1..=hi).map(|n| phi.get(n + 1) - phi.get(n)).collect(),
    )
}

/// Adjoint difference (D*ψ)(n) = ψ(n−1) − ψ(n).
pub fn apply_d_adjoint(psi: &LatticeVector) -> LatticeVector {
    let Some((lo, hi)) = psi.support() else {
        return LatticeVector::zero();
    };
    LatticeVector::new(
        lo,
        (lo..=hi + 1).map(|n| psi.get(n - 1) - psi.get(n)).collect(),
    )
}

/// The lattice Laplacian D*D, (D*Dφ)(n) = 2φ(n) − φ(n+1) − φ(n−1).
pub fn apply_laplacian(phi: &LatticeVector) -> LatticeVector {
    apply_d_adjoint(&apply_d(phi))
}

/// Finite-support perturbation of the free Jacobi matrix.
///
/// `b[i]` is the diagonal entry at site `offset + i`; `a[i]` couples sites
/// `offset + i` and `offset + i + 1`. Outside the window b = 0 and a = 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactPerturbation {
    offset: i64,
    b: Vec<f64>,
    a: Vec<f64>,
}

#[derive(Deserialize)]
struct PerturbationFile {
    offset: i64,
    b: Vec<f64>,
    #[serde(default)]
    a: Option<Vec<f64>>,
}

impl<'de> Deserialize<'de> for CompactPerturbation {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let raw = PerturbationFile::deserialize(deserializer)?;
        let a = raw.a.unwrap_or_else(|| vec![1.0; raw.b.len()]);
        CompactPerturbation::new(raw.offset, raw.b, a).map_err(serde::de::Error::custom)
    }
}

impl CompactPerturbation {
    pub fn new(offset: i64, b: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Usage(format!(
                "perturbation needs len(a) == len(b), got {} and {}",
                a.len(),
                b.len()
            )));
        }
        if let Some((i, v)) = a
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
        {
            return Err(Error::Usage(format!(
                "off-diagonal entry a[{i}] = {v} is not a finite positive number"
            )));
        }
        if let Some((i, v)) = b.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Usage(format!(
                "diagonal entry b[{i}] = {v} is not finite"
            )));
        }
        Ok(Self { offset, b, a })
    }

    /// Diagonal-only perturbation (a ≡ 1).
    pub fn diagonal(offset: i64, b: Vec<f64>) -> Result<Self> {
        let a = vec![1.0; b.len()];
        Self::new(offset, b, a)
    }

    pub fn free() -> Self {
        Self {
            offset: 0,
            b: Vec::new(),
            a: Vec::new(),
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn b_at(&self, n: i64) -> f64 {
        self.index(n).map_or(0.0, |i| self.b[i])
    }

    pub fn a_at(&self, n: i64) -> f64 {
        self.index(n).map_or(1.0, |i| self.a[i])
    }

    fn index(&self, n: i64) -> Option<usize> {
        let i = n - self.offset;
        (i >= 0 && (i as usize) < self.b.len()).then_some(i as usize)
    }

    /// True when every off-diagonal entry equals 1.
    pub fn is_diagonal(&self) -> bool {
        self.a.iter().all(|&v| v == 1.0)
    }

    /// The same perturbation with b replaced by −b.
    pub fn reflected(&self) -> Self {
        Self {
            offset: self.offset,
            b: self.b.iter().map(|v| -v).collect(),
            a: self.a.clone(),
        }
    }
}

/// (Wu)(n) = a_{n−1}u(n−1) + b_n u(n) + a_n u(n+1).
pub fn apply_jacobi(p: &CompactPerturbation, u: &LatticeVector) -> LatticeVector {
    let Some((lo, hi)) = u.support() else {
        return LatticeVector::zero();
    };
    LatticeVector::new(
        lo - 1,
        (lo - 1..=hi + 1)
            .map(|n| p.a_at(n - 1) * u.get(n - 1) + p.b_at(n) * u.get(n) + p.a_at(n) * u.get(n + 1))
            .collect(),
    )
}
