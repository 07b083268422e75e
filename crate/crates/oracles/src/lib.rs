//! Reference computations for tests.
//!
//! Nothing here depends on `jacobi-lt`: every routine takes a different
//! path to the answer than the library does (dense rotations instead of
//! Sturm bisection, closed forms instead of truncated spectra, grid scans
//! instead of Nelder-Mead).

use std::f64::consts::PI;

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations,
/// ascending.
#[allow(clippy::needless_range_loop)]
pub fn dense_symmetric_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = a
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        if off <= 1e-32 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Dense form of a symmetric tridiagonal matrix.
pub fn tridiagonal_to_dense(diag: &[f64], offdiag: &[f64]) -> Vec<Vec<f64>> {
    let n = diag.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        m[i][i] = diag[i];
        if i + 1 < n {
            m[i][i + 1] = offdiag[i];
            m[i + 1][i] = offdiag[i];
        }
    }
    m
}

/// Bound state of the free Jacobi matrix perturbed by β at one site:
/// the ansatz u(n) = r^{|n|} gives E = sign(β)·√(4 + β²).
pub fn single_site_eigenvalue(beta: f64) -> f64 {
    beta.signum() * (4.0 + beta * beta).sqrt()
}

/// |e| for the one negative eigenvalue of D*D − β, β > 0.
pub fn single_site_schrodinger_depth(beta: f64) -> f64 {
    (4.0 + beta * beta).sqrt() - 2.0
}

/// L^cl_{1,1} = Γ(2)/(2√π Γ(5/2)) = 2/(3π).
pub const L_CLASSICAL_GAMMA_ONE: f64 = 2.0 / (3.0 * PI);

/// Single-site ratio at γ = 1 for each variant, from closed forms.
pub fn single_site_ratio_gamma_one(variant: &str, beta: f64) -> f64 {
    let sqrt3 = 3f64.sqrt();
    let c_schrodinger = PI / sqrt3 * L_CLASSICAL_GAMMA_ONE;
    let c_jacobi = sqrt3 * c_schrodinger;
    let c_hs = 2.0 * sqrt3 * L_CLASSICAL_GAMMA_ONE;
    let depth = single_site_schrodinger_depth(beta.abs());
    let b = beta.abs();
    if b == 0.0 {
        return 0.0;
    }
    match variant {
        "hs1" => (single_site_eigenvalue(beta).powi(2) - 4.0).sqrt() / b,
        "hs-gamma" => depth / (c_hs * b.powf(1.5)),
        "new-gamma-jacobi" => depth / (c_jacobi * b.powf(1.5)),
        "new-gamma-schrodinger" | "new-gamma-schrodinger-positive" => {
            depth / (c_schrodinger * b.powf(1.5))
        }
        other => panic!("unknown variant {other}"),
    }
}

/// Maximum of `f` over an evenly spaced grid of `points` samples in
/// `[lo, hi]`, with the maximizing abscissa.
pub fn grid_scan_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, lo);
    for i in 0..points {
        let x = if points == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (points - 1) as f64
        };
        let v = f(x);
        if v > best.0 {
            best = (v, x);
        }
    }
    best
}
