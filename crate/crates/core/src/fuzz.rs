//! Seeded random suites that run every theorem and lemma predicate.
//!
//! Case `i` of a suite draws from a ChaCha stream keyed by (seed, suite,
//! i), so results do not depend on thread scheduling or on how many other
//! cases run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CompactPerturbation, LatticeVector};
use crate::lemmalab::{
    check_agmon, check_al_lifting, check_dgsi, check_jensen, check_sandwich,
    check_unitary_equivalence, orthonormalize, OrthonormalSystem, DEFAULT_QUAD_POINTS,
};
use crate::ltcheck::{
    bound_states, bound_states_folded, report_from_states, BoundStates, Operator, Variant,
    SOLVER_SLACK,
};
use crate::operators::{Potential, SchrodingerSign, TruncationSpec};

/// Suite identifiers, used as the high half of the ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Suite {
    JacobiTheorems = 1,
    SchrodingerTheorems = 2,
    Agmon = 3,
    Dgsi = 4,
    UnitaryEquivalence = 5,
    Jensen = 6,
    Lifting = 7,
    Sandwich = 8,
}

pub fn case_rng(seed: u64, suite: Suite, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((suite as u64) << 40) | index);
    rng
}

pub const DEFAULT_GAMMA_GRID: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

pub const DEFAULT_MAX_SUPPORT: usize = 9;

/// Support of 1..=`max_support` sites, |b| ≤ 5, a ∈ [0.2, 3].
pub fn random_perturbation(rng: &mut impl Rng, max_support: usize) -> CompactPerturbation {
    let len = rng.gen_range(1..=max_support.max(1));
    let offset = rng.gen_range(-4..=4);
    let b = (0..len).map(|_| rng.gen_range(-5.0..=5.0)).collect();
    let a = (0..len).map(|_| rng.gen_range(0.2..=3.0)).collect();
    CompactPerturbation::new(offset, b, a).expect("a drawn positive")
}

/// Support of 1..=`max_support` sites, b ∈ [0, 5], a ≡ 1.
pub fn random_nonnegative_perturbation(
    rng: &mut impl Rng,
    max_support: usize,
) -> CompactPerturbation {
    let len = rng.gen_range(1..=max_support.max(1));
    let offset = rng.gen_range(-4..=4);
    let b = (0..len).map(|_| rng.gen_range(0.0..=5.0)).collect();
    CompactPerturbation::diagonal(offset, b).expect("finite entries")
}

/// Up to 20 standard-normal entries placed inside [−15, 15].
pub fn random_vector(rng: &mut impl Rng) -> LatticeVector {
    let len: i64 = rng.gen_range(1..=20);
    let offset = rng.gen_range(-15..=15 - len + 1);
    let values = (0..len)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    LatticeVector::new(offset, values)
}

/// Orthonormalized batch of 1 to 6 random vectors.
pub fn random_system(rng: &mut impl Rng) -> OrthonormalSystem {
    loop {
        let n = rng.gen_range(1..=6);
        let raw: Vec<LatticeVector> = (0..n).map(|_| random_vector(rng)).collect();
        if let Ok(system) = orthonormalize(&raw) {
            return system;
        }
    }
}

/// Which way a predicate's value must point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sense {
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateSummary {
    pub name: String,
    pub count: usize,
    pub sense: Sense,
    pub bound: f64,
    /// Minimum margin (`at-least`) or maximum error (`at-most`); null when
    /// no case ran.
    pub worst: Option<f64>,
    pub worst_case: Option<u64>,
    pub violations: usize,
}

impl PredicateSummary {
    fn collect(name: &str, sense: Sense, bound: f64, values: &[(u64, f64)]) -> Self {
        let mut worst: Option<(u64, f64)> = None;
        let mut violations = 0;
        for &(case, v) in values {
            let bad = match sense {
                Sense::AtLeast => !(v >= bound),
                Sense::AtMost => !(v <= bound),
            };
            violations += usize::from(bad);
            let replace = match worst {
                None => true,
                Some((_, w)) => match sense {
                    Sense::AtLeast => v < w || v.is_nan(),
                    Sense::AtMost => v > w || v.is_nan(),
                },
            };
            if replace {
                worst = Some((case, v));
            }
        }
        Self {
            name: name.to_string(),
            count: values.len(),
            sense,
            bound,
            worst: worst.map(|w| w.1),
            worst_case: worst.map(|w| w.0),
            violations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub variant: Variant,
    /// Null for hs1, whose left side has no moment order.
    pub gamma: Option<f64>,
    pub count: usize,
    pub max_ratio: Option<f64>,
    pub argmax_case: Option<u64>,
    pub violations: usize,
    /// Cases whose bound states did not settle within the margin cap; these
    /// are still checked, using the folded solver.
    pub unstable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub seed: u64,
    pub count: usize,
    pub lemma_count: usize,
    pub theorems: Vec<TheoremSummary>,
    pub lemmas: Vec<PredicateSummary>,
}

impl FuzzSummary {
    pub fn violations(&self) -> usize {
        self.theorems.iter().map(|t| t.violations).sum::<usize>()
            + self.lemmas.iter().map(|l| l.violations).sum::<usize>()
    }
}

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub seed: u64,
    /// Random perturbations per theorem suite.
    pub count: usize,
    /// Random cases per lemma suite.
    pub lemma_count: usize,
    /// Largest perturbation support drawn in the theorem suites.
    pub max_support: usize,
    pub gammas: Vec<f64>,
    pub variants: Vec<Variant>,
    pub truncation: TruncationSpec,
    pub tol: f64,
}

impl FuzzConfig {
    pub fn new(seed: u64, count: usize) -> Self {
        Self {
            seed,
            count,
            lemma_count: count,
            max_support: DEFAULT_MAX_SUPPORT,
            gammas: DEFAULT_GAMMA_GRID.to_vec(),
            variants: Variant::ALL.to_vec(),
            truncation: TruncationSpec::default(),
            tol: crate::ltcheck::DEFAULT_TOL,
        }
    }
}

/// Bound states of one case, and whether the truncation loop refused it.
type CaseStates = std::result::Result<(BoundStates, bool), ()>;

/// Truncated spectrum, or the folded one when refinement cannot settle.
fn case_states(p: &CompactPerturbation, op: Operator, config: &FuzzConfig) -> CaseStates {
    match bound_states(p, op, &config.truncation, config.tol) {
        Ok(s) => Ok((s, false)),
        Err(Error::Unstable { .. }) => bound_states_folded(p, op, config.tol)
            .map(|s| (s, true))
            .map_err(|_| ()),
        Err(_) => Err(()),
    }
}

/// Ratio for every (variant, γ) row, reusing one spectrum per operator.
fn theorem_rows(config: &FuzzConfig) -> Vec<(Variant, Option<f64>)> {
    let mut rows = Vec::new();
    for &v in &config.variants {
        if v == Variant::Hs1 {
            rows.push((v, None));
        } else {
            rows.extend(
                config
                    .gammas
                    .iter()
                    .filter(|g| **g >= v.min_gamma())
                    .map(|&g| (v, Some(g))),
            );
        }
    }
    rows
}

pub fn run_theorem_fuzz(config: &FuzzConfig) -> Vec<TheoremSummary> {
    let rows = theorem_rows(config);
    let needs = |op: Operator| rows.iter().any(|(v, _)| v.operator() == op);

    let jacobi_cases: Vec<(CompactPerturbation, CaseStates)> = if needs(Operator::Jacobi) {
        (0..config.count as u64)
            .into_par_iter()
            .map(|i| {
                let p = random_perturbation(
                    &mut case_rng(config.seed, Suite::JacobiTheorems, i),
                    config.max_support,
                );
                let s = case_states(&p, Operator::Jacobi, config);
                (p, s)
            })
            .collect()
    } else {
        Vec::new()
    };
    let schrodinger_cases: Vec<(CompactPerturbation, CaseStates, CaseStates)> =
        if rows.iter().any(|(v, _)| v.is_schrodinger()) {
            (0..config.count as u64)
                .into_par_iter()
                .map(|i| {
                    let p = random_nonnegative_perturbation(
                        &mut case_rng(config.seed, Suite::SchrodingerTheorems, i),
                        config.max_support,
                    );
                    let solve = |sign| case_states(&p, Operator::Schrodinger(sign), config);
                    let plus = solve(SchrodingerSign::Plus);
                    let minus = solve(SchrodingerSign::Minus);
                    (p, plus, minus)
                })
                .collect()
        } else {
            Vec::new()
        };

    rows.into_iter()
        .map(|(variant, gamma)| {
            let g = gamma.unwrap_or(0.5);
            let states = |i: usize| -> (&CompactPerturbation, &CaseStates) {
                match variant.operator() {
                    Operator::Jacobi => (&jacobi_cases[i].0, &jacobi_cases[i].1),
                    Operator::Schrodinger(SchrodingerSign::Plus) => {
                        (&schrodinger_cases[i].0, &schrodinger_cases[i].1)
                    }
                    Operator::Schrodinger(SchrodingerSign::Minus) => {
                        (&schrodinger_cases[i].0, &schrodinger_cases[i].2)
                    }
                }
            };
            let mut ratios = Vec::with_capacity(config.count);
            let mut unstable = 0;
            for i in 0..config.count {
                let (p, s) = states(i);
                match s {
                    Ok((s, refused)) => {
                        unstable += usize::from(*refused);
                        match report_from_states(p, variant, g, s) {
                            Ok(r) => ratios.push((i as u64, r.ratio)),
                            Err(_) => ratios.push((i as u64, f64::NAN)),
                        }
                    }
                    Err(()) => ratios.push((i as u64, f64::NAN)),
                }
            }
            let summary =
                PredicateSummary::collect("ratio", Sense::AtMost, 1.0 + SOLVER_SLACK, &ratios);
            TheoremSummary {
                variant,
                gamma,
                count: config.count,
                max_ratio: summary.worst,
                argmax_case: summary.worst_case,
                violations: summary.violations,
                unstable,
            }
        })
        .collect()
}

/// Tolerances each lemma predicate is held to.
pub mod bounds {
    pub const AGMON: f64 = -1e-12;
    pub const DGSI: f64 = -1e-10;
    pub const UNITARY_GAP: f64 = 1e-12;
    pub const JENSEN: f64 = -1e-12;
    pub const LIFTING: f64 = 1e-8;
    pub const SANDWICH: f64 = -1e-10;
}

fn par_cases(count: usize, f: impl Fn(u64) -> f64 + Sync) -> Vec<(u64, f64)> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| (i, f(i)))
        .collect()
}

pub fn run_agmon_fuzz(seed: u64, count: usize) -> PredicateSummary {
    let values = par_cases(count, |i| {
        let mut rng = case_rng(seed, Suite::Agmon, i);
        loop {
            let phi = random_vector(&mut rng);
            if let Ok(m) = check_agmon(&phi) {
                return m;
            }
        }
    });
    PredicateSummary::collect("agmon", Sense::AtLeast, bounds::AGMON, &values)
}

pub fn run_dgsi_fuzz(seed: u64, count: usize) -> PredicateSummary {
    let values = par_cases(count, |i| {
        let system = random_system(&mut case_rng(seed, Suite::Dgsi, i));
        check_dgsi(&system).unwrap_or(f64::NAN)
    });
    PredicateSummary::collect("dgsi", Sense::AtLeast, bounds::DGSI, &values)
}

pub fn run_unitary_fuzz(seed: u64, count: usize, tol: f64) -> PredicateSummary {
    let values = par_cases(count, |i| {
        let mut rng = case_rng(seed, Suite::UnitaryEquivalence, i);
        let len = rng.gen_range(0..=9);
        let b = Potential::new(
            rng.gen_range(-4..=4),
            (0..len).map(|_| rng.gen_range(-5.0..=5.0)).collect(),
        );
        let spec = TruncationSpec::with_margin(rng.gen_range(1..=16));
        check_unitary_equivalence(&b, &spec, tol)
    });
    PredicateSummary::collect(
        "unitary-equivalence",
        Sense::AtMost,
        bounds::UNITARY_GAP,
        &values,
    )
}

pub fn run_jensen_fuzz(seed: u64, count: usize) -> PredicateSummary {
    let values = par_cases(count, |i| {
        let mut rng = case_rng(seed, Suite::Jensen, i);
        let (a, b, c) = (
            rng.gen_range(0.0..=1.0),
            rng.gen_range(0.0..=1.0),
            rng.gen_range(0.0..=1.0),
        );
        let q = rng.gen_range(1.0..=4.0);
        check_jensen(a, b, c, q).unwrap_or(f64::NAN)
    });
    PredicateSummary::collect("jensen", Sense::AtLeast, bounds::JENSEN, &values)
}

pub fn run_lifting_fuzz(seed: u64, count: usize) -> PredicateSummary {
    let values = par_cases(count, |i| {
        let mut rng = case_rng(seed, Suite::Lifting, i);
        let mu = 10f64.powf(rng.gen_range(-2.0..=1.0));
        let gamma = rng.gen_range(1.05..=5.0);
        check_al_lifting(mu, gamma, DEFAULT_QUAD_POINTS).unwrap_or(f64::NAN)
    });
    PredicateSummary::collect(
        "aizenman-lieb-lifting",
        Sense::AtMost,
        bounds::LIFTING,
        &values,
    )
}

pub fn run_sandwich_fuzz(seed: u64, count: usize, tol: f64) -> PredicateSummary {
    let spec = TruncationSpec::with_margin(8);
    let values = par_cases(count, |i| {
        let p = random_perturbation(&mut case_rng(seed, Suite::Sandwich, i), DEFAULT_MAX_SUPPORT);
        let (lo, hi) = check_sandwich(&p, &spec, tol);
        lo.min(hi)
    });
    PredicateSummary::collect("sandwich", Sense::AtLeast, bounds::SANDWICH, &values)
}

pub fn run_lemma_fuzz(seed: u64, count: usize, tol: f64) -> Vec<PredicateSummary> {
    vec![
        run_agmon_fuzz(seed, count),
        run_dgsi_fuzz(seed, count),
        run_unitary_fuzz(seed, count, tol),
        run_jensen_fuzz(seed, count),
        run_lifting_fuzz(seed, count),
        run_sandwich_fuzz(seed, count, tol),
    ]
}

pub fn run_fuzz(config: &FuzzConfig) -> Result<FuzzSummary> {
    config.truncation.validate()?;
    Ok(FuzzSummary {
        seed: config.seed,
        count: config.count,
        lemma_count: config.lemma_count,
        theorems: run_theorem_fuzz(config),
        lemmas: run_lemma_fuzz(config.seed, config.lemma_count, config.tol.min(1e-13)),
    })
}
