//! The auxiliary lemmas and proof devices, each as a numeric predicate
//! returning a margin that is nonnegative whenever the statement holds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{apply_d, inner, CompactPerturbation, LatticeVector};
use crate::operators::{
    jacobi_matrix_on, sandwich_potentials, schrodinger_matrix_on, Potential, SchrodingerSign,
    TruncationSpec, Window,
};
use crate::specfun::beta_fn;
use crate::trieig::{all_eigenvalues, SymTridiag};

/// Largest |⟨ψ_i, ψ_j⟩ − δ_ij| accepted as orthonormal.
pub const ORTHO_TOL: f64 = 1e-10;

/// Residual-to-input norm ratio below which a vector counts as dependent.
const PIVOT_RATIO: f64 = 1e-10;

pub const DEFAULT_QUAD_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthonormalSystem {
    vectors: Vec<LatticeVector>,
    ortho_defect: f64,
}

impl OrthonormalSystem {
    /// Wraps `vectors` as-is, recording their orthonormality defect.
    pub fn from_vectors(vectors: Vec<LatticeVector>) -> Self {
        let ortho_defect = ortho_defect(&vectors);
        Self {
            vectors,
            ortho_defect,
        }
    }

    pub fn vectors(&self) -> &[LatticeVector] {
        &self.vectors
    }

    pub fn ortho_defect(&self) -> f64 {
        self.ortho_defect
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// ρ(n) = Σ_j ψ_j(n)² on the union of supports.
    pub fn density(&self) -> LatticeVector {
        let Some((lo, hi)) = common_support(&self.vectors) else {
            return LatticeVector::zero();
        };
        let rho = (lo..=hi)
            .map(|n| self.vectors.iter().map(|v| v.get(n).powi(2)).sum())
            .collect();
        LatticeVector::new(lo, rho)
    }
}

fn common_support(vectors: &[LatticeVector]) -> Option<(i64, i64)> {
    vectors
        .iter()
        .filter_map(LatticeVector::support)
        .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)))
}

/// max_{i,j} |⟨ψ_i, ψ_j⟩ − δ_ij|.
pub fn ortho_defect(vectors: &[LatticeVector]) -> f64 {
    let mut worst = 0.0f64;
    for (i, u) in vectors.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner(u, v) - target).abs());
        }
    }
    worst
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
pub fn orthonormalize(raw: &[LatticeVector]) -> Result<OrthonormalSystem> {
    if raw.is_empty() {
        return Err(Error::Usage(
            "orthonormalize needs at least one vector".into(),
        ));
    }
    let (lo, hi) = common_support(raw).ok_or(Error::RankDeficient {
        index: 0,
        residual: 0.0,
    })?;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(raw.len());
    for (index, v) in raw.iter().enumerate() {
        let mut w = v.dense(lo, hi);
        let start = dot(&w, &w).sqrt();
        for _pass in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let residual = dot(&w, &w).sqrt();
        if start == 0.0 || residual < PIVOT_RATIO * start {
            return Err(Error::RankDeficient { index, residual });
        }
        w.iter_mut().for_each(|x| *x /= residual);
        basis.push(w);
    }
    let vectors = basis
        .into_iter()
        .map(|w| LatticeVector::new(lo, w))
        .collect();
    Ok(OrthonormalSystem::from_vectors(vectors))
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// ‖φ‖·‖Dφ‖ − max_n |φ(n)|².
pub fn check_agmon(phi: &LatticeVector) -> Result<f64> {
    if phi.is_zero() {
        return Err(Error::Usage("Agmon check needs a nonzero vector".into()));
    }
    Ok(phi.norm() * apply_d(phi).norm() - phi.max_abs_sq())
}

/// Σ_j ‖Dψ_j‖² − Σ_n ρ(n)³.
pub fn check_dgsi(system: &OrthonormalSystem) -> Result<f64> {
    if system.is_empty() {
        return Err(Error::Usage("empty orthonormal system".into()));
    }
    if !(system.ortho_defect() <= ORTHO_TOL) {
        return Err(Error::Usage(format!(
            "system is not orthonormal (defect {:e})",
            system.ortho_defect()
        )));
    }
    let kinetic: f64 = system.vectors().iter().map(|v| apply_d(v).norm_sq()).sum();
    let cubic: f64 = system.density().values().iter().map(|r| r.powi(3)).sum();
    Ok(kinetic - cubic)
}

/// max_k |λ_k(−D*D + b) − λ_k(D*D − 4 + b)| on a common Dirichlet window.
pub fn check_unitary_equivalence(b: &Potential, spec: &TruncationSpec, tol: f64) -> f64 {
    let window = Window::around(b.offset, b.values.len(), spec.margin);
    let left = schrodinger_matrix_on(b, SchrodingerSign::Minus, window);
    let right = schrodinger_matrix_on(&b.negated(), SchrodingerSign::Plus, window).shifted(-4.0);
    let (l, r) = (all_eigenvalues(&left, tol), all_eigenvalues(&right, tol));
    l.iter()
        .zip(&r)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Gauss-Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            deriv = dp;
            let step = p / dp;
            x -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        deriv = if dp != 0.0 { dp } else { deriv };
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// B(γ−1, 2)⁻¹ ∫₀^∞ τ^{γ−2} (μ − τ)₊ dτ by Gauss-Legendre quadrature.
///
/// The integral is taken over [0, μ] after τ = μ·v^k with k = m/(γ − 1),
/// which turns τ^{γ−2} dτ into the polynomial factor v^{m−1}. The integer
/// m ≥ 1 is chosen so the remaining power v^{k} has exponent at least 8.
pub fn al_lifting_value(mu: f64, gamma: f64, quad_points: usize) -> Result<f64> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!(
            "lifting needs gamma > 1, got {gamma}"
        )));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!("lifting needs mu > 0, got {mu}")));
    }
    if quad_points == 0 {
        return Err(Error::Usage("quadrature needs at least one node".into()));
    }
    let m = (8.0 * (gamma - 1.0)).ceil().max(1.0);
    let k = m / (gamma - 1.0);
    let integrand = |tau: f64| tau.powf(gamma - 2.0) * (mu - tau).max(0.0);
    let (nodes, weights) = gauss_legendre(quad_points);
    let integral: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| {
            let v = 0.5 * (x + 1.0);
            let tau = mu * v.powf(k);
            let jacobian = mu * k * v.powf(k - 1.0);
            0.5 * w * integrand(tau) * jacobian
        })
        .sum();
    Ok(integral / beta_fn(gamma - 1.0, 2.0)?)
}

/// |lifted − μ^γ| / μ^γ.
pub fn check_al_lifting(mu: f64, gamma: f64, quad_points: usize) -> Result<f64> {
    let lifted = al_lifting_value(mu, gamma, quad_points)?;
    let exact = mu.powf(gamma);
    Ok((lifted - exact).abs() / exact)
}

/// 3^{q−1}(α^q + β^q + c^q) − (α + β + c)^q.
pub fn check_jensen(alpha: f64, beta: f64, c: f64, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!(
            "convexity exponent must be >= 1, got {q}"
        )));
    }
    if [alpha, beta, c].iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Domain(format!(
            "arguments must be nonnegative, got ({alpha}, {beta}, {c})"
        )));
    }
    let spread = 3f64.powf(q - 1.0) * (alpha.powf(q) + beta.powf(q) + c.powf(q));
    Ok(spread - (alpha + beta + c).powf(q))
}

/// (min_k λ_k(W) − λ_k(W⁻), min_k λ_k(W⁺) − λ_k(W)) on a window covering
/// all three operators.
pub fn check_sandwich(p: &CompactPerturbation, spec: &TruncationSpec, tol: f64) -> (f64, f64) {
    let (minus, plus) = sandwich_potentials(p);
    let window = Window::around(p.offset(), p.len(), spec.margin).union(Window::around(
        minus.offset,
        minus.values.len(),
        spec.margin,
    ));
    let as_jacobi = |pot: &Potential| {
        let p = CompactPerturbation::diagonal(pot.offset, pot.values.clone()).expect("a ≡ 1");
        all_eigenvalues(&jacobi_matrix_on(&p, window), tol)
    };
    let middle = all_eigenvalues(&jacobi_matrix_on(p, window), tol);
    let (lower, upper) = (as_jacobi(&minus), as_jacobi(&plus));
    (min_gap(&middle, &lower), min_gap(&upper, &middle))
}

fn min_gap(hi: &[f64], lo: &[f64]) -> f64 {
    hi.iter()
        .zip(lo)
        .map(|(h, l)| h - l)
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenvalues of the two differences in the 2×2 comparison
/// [[−|a−1|, 1], [1, −|a−1|]] ≤ [[0, a], [a, 0]] ≤ [[|a−1|, 1], [1, |a−1|]].
pub fn check_sandwich_2x2(a: f64) -> (f64, f64) {
    let s = (a - 1.0).abs();
    let lower = SymTridiag::new(vec![s, s], vec![a - 1.0]).expect("2x2");
    let upper = SymTridiag::new(vec![s, s], vec![1.0 - a]).expect("2x2");
    (
        all_eigenvalues(&lower, 1e-15)[0],
        all_eigenvalues(&upper, 1e-15)[0],
    )
}
