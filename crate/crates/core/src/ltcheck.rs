//! Both sides of each Lieb-Thirring inequality, and the pass/fail predicate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::CompactPerturbation;
use crate::operators::{
    jacobi_matrix_on, schrodinger_matrix_on, Potential, SchrodingerSign, TruncationSpec, Window,
};
use crate::specfun::{constants_for, LtConstants};
use crate::trieig::{eigenvalues_outside, sturm_count, SymTridiag};

/// Ratios above `1 + SOLVER_SLACK` are reported as violations.
pub const SOLVER_SLACK: f64 = 1e-9;

const RESONANCE_CUTOFF: f64 = 1e-12;

/// Default absolute eigenvalue tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

/// The inequality being checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Σ√(E²−4) ≤ Σ|b| + 4Σ|a−1|.
    Hs1,
    /// Riesz means of order γ with the constant c_hs.
    HsGamma,
    /// Riesz means of order γ ≥ 1 with the improved Jacobi constant.
    NewGammaJacobi,
    /// Negative eigenvalues of D*D − b, b ≥ 0.
    NewGammaSchrodinger,
    /// Positive eigenvalues of −D*D + b, b ≥ 0.
    NewGammaSchrodingerPositive,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Hs1,
        Variant::HsGamma,
        Variant::NewGammaJacobi,
        Variant::NewGammaSchrodinger,
        Variant::NewGammaSchrodingerPositive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Hs1 => "hs1",
            Variant::HsGamma => "hs-gamma",
            Variant::NewGammaJacobi => "new-gamma-jacobi",
            Variant::NewGammaSchrodinger => "new-gamma-schrodinger",
            Variant::NewGammaSchrodingerPositive => "new-gamma-schrodinger-positive",
        }
    }

    pub fn operator(self) -> Operator {
        match self {
            Variant::Hs1 | Variant::HsGamma | Variant::NewGammaJacobi => Operator::Jacobi,
            Variant::NewGammaSchrodinger => Operator::Schrodinger(SchrodingerSign::Plus),
            Variant::NewGammaSchrodingerPositive => Operator::Schrodinger(SchrodingerSign::Minus),
        }
    }

    pub fn is_schrodinger(self) -> bool {
        matches!(self.operator(), Operator::Schrodinger(_))
    }

    /// Smallest moment order for which the bound is established.
    pub fn min_gamma(self) -> f64 {
        match self {
            Variant::Hs1 | Variant::HsGamma => 0.5,
            _ => 1.0,
        }
    }

    /// Checks the hypotheses of the corresponding theorem.
    pub fn validate(self, p: &CompactPerturbation, gamma: f64) -> Result<()> {
        if !(gamma >= self.min_gamma()) || !gamma.is_finite() {
            return Err(Error::Usage(format!(
                "variant {} requires gamma >= {}, got {gamma}",
                self.name(),
                self.min_gamma()
            )));
        }
        if self.is_schrodinger() {
            if let Some(v) = p.b().iter().find(|v| **v < 0.0) {
                return Err(Error::Usage(format!(
                    "variant {} requires b >= 0, found {v}",
                    self.name()
                )));
            }
            if !p.is_diagonal() {
                return Err(Error::Usage(format!(
                    "variant {} requires a ≡ 1",
                    self.name()
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown variant '{s}'")))
    }
}

/// The self-adjoint operator whose discrete spectrum is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Operator {
    /// W({a_n}, {b_n}).
    Jacobi,
    /// D*D − b (`Plus`) or −D*D + b (`Minus`), with a ≡ 1.
    Schrodinger(SchrodingerSign),
}

impl Operator {
    /// Essential spectrum `[lo, hi]`.
    pub fn essential(self) -> (f64, f64) {
        match self {
            Operator::Jacobi => (-2.0, 2.0),
            Operator::Schrodinger(SchrodingerSign::Plus) => (0.0, 4.0),
            Operator::Schrodinger(SchrodingerSign::Minus) => (-4.0, 0.0),
        }
    }

    fn matrix(self, p: &CompactPerturbation, margin: usize) -> SymTridiag {
        let window = Window::around(p.offset(), p.len(), margin);
        match self {
            Operator::Jacobi => jacobi_matrix_on(p, window),
            Operator::Schrodinger(sign) => schrodinger_matrix_on(&Potential::from(p), sign, window),
        }
    }
}

/// Exact numbers of eigenvalues of the infinite operator below and above the
/// essential spectrum.
///
/// Both free tails have unit off-diagonals, so at the band edges they can be
/// folded onto the window as a ±1 corner correction (the edge value of the
/// half-line Green function). Sylvester inertia of that Schur complement
/// then counts the bound states. Eigenvalues of the folded matrix within
/// `RESONANCE_CUTOFF` (relative) of zero are threshold resonances, not
/// bound states; a state that shallow contributes below solver noise.
pub fn exact_counts(p: &CompactPerturbation, op: Operator) -> (usize, usize) {
    let (lo, hi) = op.essential();
    let t = op.matrix(p, 1);
    let m = t.dim();
    let with_corners = |edge: f64, z: f64| {
        let mut diag: Vec<f64> = t.diag().iter().map(|d| d - edge).collect();
        diag[0] += z;
        diag[m - 1] += z;
        SymTridiag::new(diag, t.offdiag().to_vec()).expect("window matrix is valid")
    };
    let (g_lo, g_hi) = t.gershgorin();
    let eps = RESONANCE_CUTOFF * (1.0 + g_lo.abs().max(g_hi.abs()));
    let below = sturm_count(&with_corners(lo, -1.0), -eps);
    let above = m - sturm_count(&with_corners(hi, 1.0), eps);
    (below, above)
}

/// Decaying root of z + 1/z = x for |x| > 2, written without cancellation.
fn tail_root(x: f64) -> f64 {
    let r = (x * x - 4.0).sqrt();
    if x > 0.0 {
        2.0 / (x + r)
    } else {
        -2.0 / (r - x)
    }
}

/// Bound states computed without truncation: for E outside the band the
/// free tails fold onto the window as a corner correction z(E), and the
/// inertia of the folded matrix counts eigenvalues beyond E. Each eigenvalue
/// is then bisected to `tol`. `margin_used` is 0.
pub fn bound_states_folded(p: &CompactPerturbation, op: Operator, tol: f64) -> Result<BoundStates> {
    if !(tol > 0.0) {
        return Err(Error::Usage(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (lo, hi) = op.essential();
    let mid = 0.5 * (lo + hi);
    let t = op.matrix(p, 1);
    let m = t.dim();
    let folded = |e: f64| {
        let z = tail_root(e - mid);
        let mut diag: Vec<f64> = t.diag().iter().map(|d| d - e).collect();
        diag[0] += z;
        diag[m - 1] += z;
        SymTridiag::new(diag, t.offdiag().to_vec()).expect("window matrix is valid")
    };
    let count_below = |e: f64| sturm_count(&folded(e), 0.0);
    let count_above = |e: f64| m - sturm_count(&folded(e), 0.0);
    let (n_below, n_above) = exact_counts(p, op);
    let (g_lo, g_hi) = t.gershgorin();
    let (floor, ceil) = (g_lo.min(lo) - 1.0, g_hi.max(hi) + 1.0);

    let split = |mut a: f64, mut b: f64, inner: &dyn Fn(f64) -> bool| loop {
        let c = 0.5 * (a + b);
        if b - a <= tol || c <= a || c >= b {
            return c;
        }
        if inner(c) {
            a = c;
        } else {
            b = c;
        }
    };
    let below = (1..=n_below)
        .map(|k| split(floor, lo, &|e| count_below(e) < k))
        .collect();
    let mut above: Vec<f64> = (1..=n_above)
        .map(|k| split(hi, ceil, &|e| count_above(e) >= k))
        .collect();
    above.reverse();
    Ok(BoundStates {
        below,
        above,
        margin_used: 0,
    })
}

/// Eigenvalues outside the essential spectrum after margin refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundStates {
    pub below: Vec<f64>,
    pub above: Vec<f64>,
    pub margin_used: usize,
}

fn settled(prev: &BoundStates, cur: &BoundStates, tol: f64) -> bool {
    prev.below.len() == cur.below.len()
        && prev.above.len() == cur.above.len()
        && prev
            .below
            .iter()
            .chain(&prev.above)
            .zip(cur.below.iter().chain(&cur.above))
            .all(|(x, y)| (x - y).abs() < tol)
}

/// Bound states of `op` built from `p`, refined until two consecutive
/// margins agree to `spec.stability_tol` and the truncation has found every
/// state counted by [`exact_counts`].
///
/// Each eigenvalue is bisected to `min(tol, stability_tol / 64)` so solver
/// noise cannot mask or fake convergence.
pub fn bound_states(
    p: &CompactPerturbation,
    op: Operator,
    spec: &TruncationSpec,
    tol: f64,
) -> Result<BoundStates> {
    spec.validate()?;
    if !(tol > 0.0) {
        return Err(Error::Usage(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let eig_tol = tol.min(spec.stability_tol / 64.0);
    let (lo, hi) = op.essential();
    let solve = |margin: usize| -> Result<BoundStates> {
        let (below, above) = eigenvalues_outside(&op.matrix(p, margin), lo, hi, eig_tol)?;
        Ok(BoundStates {
            below,
            above,
            margin_used: margin,
        })
    };

    let (n_below, n_above) = exact_counts(p, op);
    let max_margin = spec.max_margin.max(spec.margin * spec.growth_factor);
    let mut prev = solve(spec.margin)?;
    loop {
        let cur = solve(prev.margin_used * spec.growth_factor)?;
        let complete = cur.below.len() == n_below && cur.above.len() == n_above;
        if complete && settled(&prev, &cur, spec.stability_tol) {
            return Ok(cur);
        }
        if cur.margin_used * spec.growth_factor > max_margin {
            return Err(Error::Unstable {
                margin: cur.margin_used,
                previous: prev.below.iter().chain(&prev.above).copied().collect(),
                last: cur.below.iter().chain(&cur.above).copied().collect(),
            });
        }
        prev = cur;
    }
}

/// Σ √(E² − 4) over both lists.
pub fn riesz_hs1(below: &[f64], above: &[f64]) -> Result<f64> {
    below.iter().chain(above).try_fold(0.0, |acc, &e| {
        if e.abs() < 2.0 {
            Err(Error::Usage(format!("eigenvalue {e} lies inside [-2, 2]")))
        } else {
            Ok(acc + (e * e - 4.0).sqrt())
        }
    })
}

/// Σ|E + 2|^γ over `below` plus Σ|E − 2|^γ over `above`.
pub fn riesz_gamma(below: &[f64], above: &[f64], gamma: f64) -> f64 {
    riesz_about(below, -2.0, gamma) + riesz_about(above, 2.0, gamma)
}

fn riesz_about(values: &[f64], edge: f64, gamma: f64) -> f64 {
    values.iter().map(|e| (e - edge).abs().powf(gamma)).sum()
}

/// Left side of the inequality from precomputed bound states.
pub fn lhs_functional(states: &BoundStates, variant: Variant, gamma: f64) -> Result<f64> {
    match variant {
        Variant::Hs1 => riesz_hs1(&states.below, &states.above),
        Variant::HsGamma | Variant::NewGammaJacobi => {
            Ok(riesz_gamma(&states.below, &states.above, gamma))
        }
        Variant::NewGammaSchrodinger => Ok(riesz_about(&states.below, 0.0, gamma)),
        Variant::NewGammaSchrodingerPositive => Ok(riesz_about(&states.above, 0.0, gamma)),
    }
}

/// Σ|b|^q + 4Σ|a − 1|^q.
fn jacobi_bracket(p: &CompactPerturbation, q: f64) -> f64 {
    let b: f64 = p.b().iter().map(|v| v.abs().powf(q)).sum();
    let a: f64 = p.a().iter().map(|v| (v - 1.0).abs().powf(q)).sum();
    b + 4.0 * a
}

/// Right side of the inequality, constant included.
pub fn rhs_functional(p: &CompactPerturbation, variant: Variant, gamma: f64) -> Result<f64> {
    variant.validate(p, gamma)?;
    let q = gamma + 0.5;
    Ok(match variant {
        Variant::Hs1 => jacobi_bracket(p, 1.0),
        Variant::HsGamma => constants_for(gamma)?.c_hs * jacobi_bracket(p, q),
        Variant::NewGammaJacobi => constants_for(gamma)?.c_new_jacobi * jacobi_bracket(p, q),
        Variant::NewGammaSchrodinger | Variant::NewGammaSchrodingerPositive => {
            constants_for(gamma)?.c_new_schrodinger * p.b().iter().map(|v| v.powf(q)).sum::<f64>()
        }
    })
}

/// One inequality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub variant: Variant,
    pub gamma: f64,
    pub eigenvalues_below: Vec<f64>,
    pub eigenvalues_above: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub margin_used: usize,
    pub constants: LtConstants,
    pub violation: bool,
}

/// lhs / rhs, with 0/0 read as 0.
pub fn ratio_of(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// Assembles a report from bound states computed for `variant.operator()`.
pub fn report_from_states(
    p: &CompactPerturbation,
    variant: Variant,
    gamma: f64,
    states: &BoundStates,
) -> Result<SpectralReport> {
    let rhs = rhs_functional(p, variant, gamma)?;
    let lhs = lhs_functional(states, variant, gamma)?;
    let ratio = ratio_of(lhs, rhs);
    Ok(SpectralReport {
        variant,
        gamma,
        eigenvalues_below: states.below.clone(),
        eigenvalues_above: states.above.clone(),
        lhs,
        rhs,
        ratio,
        margin_used: states.margin_used,
        constants: constants_for(gamma.max(0.5))?,
        violation: ratio > 1.0 + SOLVER_SLACK,
    })
}

pub fn check(
    p: &CompactPerturbation,
    variant: Variant,
    gamma: f64,
    spec: &TruncationSpec,
    tol: f64,
) -> Result<SpectralReport> {
    variant.validate(p, gamma)?;
    let states = bound_states(p, variant.operator(), spec, tol)?;
    report_from_states(p, variant, gamma, &states)
}
