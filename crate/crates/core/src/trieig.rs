//! Eigenvalues of real symmetric tridiagonal matrices by Sturm-count bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied to LDLᵀ pivots so the recursion never divides by zero.
const PIVOT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTridiag {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Usage(
                "tridiagonal matrix needs at least one row".into(),
            ));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::Usage(format!(
                "off-diagonal length {} does not match dimension {}",
                offdiag.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(&offdiag).any(|v| !v.is_finite()) {
            return Err(Error::Usage("tridiagonal entries must be finite".into()));
        }
        Ok(Self { diag, offdiag })
    }

    /// Diagonal matrix.
    pub fn diagonal(diag: Vec<f64>) -> Result<Self> {
        let m = diag.len().saturating_sub(1);
        Self::new(diag, vec![0.0; m])
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// The same matrix plus `shift` times the identity.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|d| d + shift).collect(),
            offdiag: self.offdiag.clone(),
        }
    }

    /// Interval [min(dᵢ − rᵢ), max(dᵢ + rᵢ)] holding every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let m = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..m {
            let left = if i > 0 {
                self.offdiag[i - 1].abs()
            } else {
                0.0
            };
            let right = if i + 1 < m {
                self.offdiag[i].abs()
            } else {
                0.0
            };
            let r = left + right;
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }
}

/// Number of eigenvalues of `t` strictly less than `x`.
///
/// Counts negative pivots of the LDLᵀ factorization of `t − x`. A pivot
/// smaller in magnitude than the floor is replaced by the floor with its
/// sign kept (exact zero counts as positive).
pub fn sturm_count(t: &SymTridiag, x: f64) -> usize {
    let max_off_sq = t.offdiag.iter().fold(1.0f64, |m, e| m.max(e * e));
    let floor = PIVOT_FLOOR * max_off_sq;
    let mut count = 0;
    let mut pivot = t.diag[0] - x;
    for i in 0.. {
        if pivot.abs() < floor {
            pivot = if pivot < 0.0 { -floor } else { floor };
        }
        if pivot < 0.0 {
            count += 1;
        }
        if i + 1 == t.dim() {
            break;
        }
        let e = t.offdiag[i];
        pivot = (t.diag[i + 1] - x) - e * e / pivot;
    }
    count
}

/// Locates eigenvalue `k` (ascending, zero-based) inside `(lo, hi]` where
/// `sturm_count(lo) <= k < sturm_count(hi)`. Stops once the bracket is no
/// wider than `tol` or cannot be split further in floating point.
fn bisect(t: &SymTridiag, k: usize, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return mid;
        }
        if sturm_count(t, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

fn padded_bounds(t: &SymTridiag) -> (f64, f64) {
    let (lo, hi) = t.gershgorin();
    let pad = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    (lo - pad, hi + pad)
}

/// Eigenvalues below `lo` and above `hi`, each ascending.
pub fn eigenvalues_outside(
    t: &SymTridiag,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(lo <= hi) {
        return Err(Error::Usage(format!("empty interval [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::Usage(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let m = t.dim();
    let (glo, ghi) = padded_bounds(t);
    let n_below = if lo <= glo { 0 } else { sturm_count(t, lo) };
    // #{λ ≤ hi}: count strictly below the next representable value.
    let n_at_most_hi = if hi >= ghi {
        m
    } else {
        sturm_count(t, hi.next_up())
    };
    let below = (0..n_below)
        .map(|k| bisect(t, k, glo.min(lo), lo, tol))
        .collect();
    let above = (n_at_most_hi..m)
        .map(|k| bisect(t, k, hi, ghi.max(hi), tol))
        .collect();
    Ok((below, above))
}

/// All eigenvalues of `t`, ascending.
pub fn all_eigenvalues(t: &SymTridiag, tol: f64) -> Vec<f64> {
    let (glo, ghi) = padded_bounds(t);
    let tol = if tol > 0.0 { tol } else { 0.0 };
    let mut out: Vec<f64> = Vec::with_capacity(t.dim());
    for k in 0..t.dim() {
        // λ_k ≥ λ_{k-1}, so the previous root's bracket floor is reusable.
        let lo = match out.last() {
            Some(&prev) => (prev - tol.max(f64::EPSILON * prev.abs())).max(glo),
            None => glo,
        };
        let lo = if sturm_count(t, lo) <= k { lo } else { glo };
        out.push(bisect(t, k, lo, ghi, tol));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn laplacian(m: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; m], vec![-1.0; m - 1]).unwrap()
    }

    #[test]
    fn construction_checks_shapes() {
        assert!(SymTridiag::new(vec![], vec![]).is_err());
        assert!(SymTridiag::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiag::new(vec![1.0], vec![]).is_ok());
    }

    #[test]
    fn sturm_count_examples() {
        let d = SymTridiag::diagonal(vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(sturm_count(&d, 1.5), 2);
        assert_eq!(sturm_count(&d, 1.0), 1);
        let two = SymTridiag::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        assert_eq!(sturm_count(&two, 0.0), 1);
        assert_eq!(sturm_count(&two, 1.0), 1);
        assert_eq!(sturm_count(&two, -1.0), 0);
        assert_eq!(sturm_count(&laplacian(10), 0.0), 0);
    }

    #[test]
    fn outside_examples() {
        let d = SymTridiag::diagonal(vec![-3.0, 0.0, 3.0]).unwrap();
        let (below, above) = eigenvalues_outside(&d, -2.0, 2.0, 1e-13).unwrap();
        assert_eq!(below.len(), 1);
        assert_eq!(above.len(), 1);
        assert!((below[0] + 3.0).abs() < 1e-12 && (above[0] - 3.0).abs() < 1e-12);

        for m in [1, 2, 7, 40] {
            let free = SymTridiag::new(vec![0.0; m], vec![1.0; m - 1]).unwrap();
            let (below, above) = eigenvalues_outside(&free, -2.0, 2.0, 1e-12).unwrap();
            assert!(below.is_empty() && above.is_empty(), "m={m}");
        }
        assert!(matches!(
            eigenvalues_outside(&d, 1.0, -1.0, 1e-12),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn outside_excludes_the_edges() {
        let d = SymTridiag::diagonal(vec![-2.0, 2.0, 2.5]).unwrap();
        let (below, above) = eigenvalues_outside(&d, -2.0, 2.0, 1e-14).unwrap();
        assert!(below.is_empty());
        assert_eq!(above.len(), 1);
    }

    #[test]
    fn all_eigenvalue_examples() {
        let one = SymTridiag::diagonal(vec![5.0]).unwrap();
        assert!((all_eigenvalues(&one, 1e-14)[0] - 5.0).abs() < 1e-13);
        let two = SymTridiag::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        let ev = all_eigenvalues(&two, 1e-14);
        assert!((ev[0] + 1.0).abs() < 1e-13 && (ev[1] - 1.0).abs() < 1e-13);

        let ev = all_eigenvalues(&laplacian(5), 1e-14);
        for (k, e) in ev.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * PI / 6.0).cos();
            assert!((e - want).abs() < 1e-13, "k={k}: {e} vs {want}");
        }
    }

    #[test]
    fn repeated_eigenvalues_are_all_returned() {
        let d = SymTridiag::diagonal(vec![1.0, 1.0, 1.0, -4.0]).unwrap();
        let ev = all_eigenvalues(&d, 1e-14);
        assert_eq!(ev.len(), 4);
        assert!((ev[0] + 4.0).abs() < 1e-13);
        assert!(ev[1..].iter().all(|e| (e - 1.0).abs() < 1e-13));
    }

    #[test]
    fn gershgorin_contains_spectrum() {
        let t = SymTridiag::new(vec![1.0, -2.0, 0.5], vec![3.0, -0.25]).unwrap();
        let (lo, hi) = t.gershgorin();
        assert_eq!((lo, hi), (-5.25, 4.0));
        let ev = all_eigenvalues(&t, 1e-14);
        assert!(ev.iter().all(|e| *e >= lo && *e <= hi));
        assert_eq!(sturm_count(&t, hi + 1e-9), 3);
    }
}
