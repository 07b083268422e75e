//! Searches for perturbations that push an inequality's ratio towards 1.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::CompactPerturbation;
use crate::ltcheck::{check, Variant, DEFAULT_TOL, SOLVER_SLACK};
use crate::operators::TruncationSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    NelderMead,
    CoordinateScan,
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::NelderMead => "nelder-mead",
            Optimizer::CoordinateScan => "coordinate-scan",
        })
    }
}

impl FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nelder-mead" => Ok(Optimizer::NelderMead),
            "coordinate-scan" => Ok(Optimizer::CoordinateScan),
            other => Err(Error::Usage(format!("unknown optimizer '{other}'"))),
        }
    }
}

/// Closed interval for one family of search coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub variant: Variant,
    pub gamma: f64,
    /// Number of perturbed sites k.
    pub support_size: usize,
    /// Also search over the couplings a_n.
    pub vary_a: bool,
    pub b_bounds: Bounds,
    pub a_bounds: Bounds,
    pub restarts: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
    /// Objective evaluations allowed per restart.
    pub max_evals: usize,
    pub truncation: TruncationSpec,
    pub tol: f64,
}

impl SearchConfig {
    pub fn new(variant: Variant, gamma: f64, support_size: usize) -> Self {
        let b_bounds = if variant.is_schrodinger() {
            Bounds::new(0.0, 5.0)
        } else {
            Bounds::new(-5.0, 5.0)
        };
        Self {
            variant,
            gamma,
            support_size,
            vary_a: false,
            b_bounds,
            a_bounds: Bounds::new(0.2, 3.0),
            restarts: 8,
            seed: 0,
            optimizer: Optimizer::NelderMead,
            max_evals: 400,
            truncation: TruncationSpec::default(),
            tol: DEFAULT_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.support_size == 0 {
            return Err(Error::Usage("support size must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Usage("restarts must be at least 1".into()));
        }
        if self.max_evals < 10 {
            return Err(Error::Usage("max_evals must be at least 10".into()));
        }
        for (name, b) in [("b", self.b_bounds), ("a", self.a_bounds)] {
            if !(b.lo <= b.hi) || !b.lo.is_finite() || !b.hi.is_finite() {
                return Err(Error::Usage(format!(
                    "invalid {name} bounds [{}, {}]",
                    b.lo, b.hi
                )));
            }
        }
        if self.vary_a && !(self.a_bounds.lo > 0.0) {
            return Err(Error::Usage("a bounds must be positive".into()));
        }
        if self.vary_a && self.variant.is_schrodinger() {
            return Err(Error::Usage(format!(
                "variant {} fixes a ≡ 1",
                self.variant
            )));
        }
        if self.variant.is_schrodinger() && self.b_bounds.hi < 0.0 {
            return Err(Error::Usage(
                "schrodinger variants need b bounds reaching b >= 0".into(),
            ));
        }
        let probe = CompactPerturbation::free();
        self.variant.validate(&probe, self.gamma)?;
        self.truncation.validate()
    }

    fn dimension(&self) -> usize {
        if self.vary_a {
            2 * self.support_size
        } else {
            self.support_size
        }
    }

    fn bounds_of(&self, i: usize) -> Bounds {
        if i < self.support_size {
            self.b_bounds
        } else {
            self.a_bounds
        }
    }

    /// Maps a parameter vector to the perturbation it encodes (offset 0).
    pub fn decode(&self, x: &[f64]) -> CompactPerturbation {
        let k = self.support_size;
        let b = x[..k]
            .iter()
            .map(|&v| {
                let v = self.b_bounds.clamp(v);
                if self.variant.is_schrodinger() {
                    v.max(0.0)
                } else {
                    v
                }
            })
            .collect();
        let a = if self.vary_a {
            x[k..2 * k]
                .iter()
                .map(|&v| self.a_bounds.clamp(v))
                .collect()
        } else {
            vec![1.0; k]
        };
        CompactPerturbation::new(0, b, a).expect("decoded perturbation is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_ratio: f64,
    pub best_perturbation: CompactPerturbation,
    pub evals_used: usize,
    pub per_restart_ratios: Vec<f64>,
    /// Set when `best_ratio` exceeds 1 + slack, which would contradict
    /// a proved bound and indicates a numerical bug.
    pub violation: bool,
}

/// LHS/RHS ratio of the perturbation encoded by `x`; 0 when the check fails.
pub fn ratio_objective(x: &[f64], config: &SearchConfig) -> f64 {
    let p = config.decode(x);
    match check(
        &p,
        config.variant,
        config.gamma,
        &config.truncation,
        config.tol,
    ) {
        Ok(report) => report.ratio,
        Err(err) => {
            log::warn!("objective evaluation failed at {x:?}: {err}");
            0.0
        }
    }
}

struct Run {
    best_x: Vec<f64>,
    best_f: f64,
    evals: usize,
}

struct Objective<'a> {
    config: &'a SearchConfig,
    evals: usize,
    best_x: Vec<f64>,
    best_f: f64,
}

impl Objective<'_> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let f = ratio_objective(x, self.config);
        if f > self.best_f {
            self.best_f = f;
            self.best_x = x.to_vec();
        }
        f
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.config.max_evals
    }

    fn clamp(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = self.config.bounds_of(i).clamp(*v);
        }
    }

    fn finish(self) -> Run {
        Run {
            best_x: self.best_x,
            best_f: self.best_f,
            evals: self.evals,
        }
    }
}

/// Uniform start in the box. Any nonzero b (a ≡ 1) carries at least one
/// bound state on the line, so starts whose b part is numerically zero are
/// redrawn to stay off the flat region of the objective.
fn random_start(config: &SearchConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let floor = 1e-3 * config.b_bounds.width().max(config.b_bounds.hi.abs());
    for _ in 0..64 {
        let x: Vec<f64> = (0..config.dimension())
            .map(|i| {
                let b = config.bounds_of(i);
                if b.width() > 0.0 {
                    rng.gen_range(b.lo..=b.hi)
                } else {
                    b.lo
                }
            })
            .collect();
        let b_part = &x[..config.support_size];
        let effective = if config.variant.is_schrodinger() {
            b_part.iter().map(|v| v.max(0.0)).fold(0.0, f64::max)
        } else {
            b_part.iter().map(|v| v.abs()).fold(0.0, f64::max)
        };
        if effective > floor {
            return x;
        }
    }
    (0..config.dimension())
        .map(|i| config.bounds_of(i).hi)
        .collect()
}

fn nelder_mead(config: &SearchConfig, start: Vec<f64>) -> Run {
    let n = start.len();
    let mut obj = Objective {
        config,
        evals: 0,
        best_x: start.clone(),
        best_f: f64::NEG_INFINITY,
    };
    let f0 = obj.eval(&start);
    if (0..n).all(|i| config.bounds_of(i).width() == 0.0) {
        return obj.finish();
    }

    // Minimize the negated ratio.
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(start.clone(), -f0)];
    for i in 0..n {
        let b = config.bounds_of(i);
        let step = 0.1 * b.width();
        let mut x = start.clone();
        x[i] = if x[i] + step <= b.hi {
            x[i] + step
        } else {
            x[i] - step
        };
        let f = obj.eval(&x);
        simplex.push((x, -f));
    }

    while !obj.exhausted() {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (f_best, f_worst) = (simplex[0].1, simplex[n].1);
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (f_worst - f_best).abs() <= 1e-13 && diameter <= 1e-9 {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64, obj: &Objective| {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            obj.clamp(&mut x);
            x
        };

        let xr = along(1.0, &obj);
        let fr = -obj.eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0, &obj);
            let fe = -obj.eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = along(0.5, &obj);
            (xc.clone(), -obj.eval(&xc))
        } else {
            let xc = along(-0.5, &obj);
            (xc.clone(), -obj.eval(&xc))
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        // Shrink towards the best vertex.
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + 0.5 * (v - b))
                .collect();
            let f = -obj.eval(&x);
            *vertex = (x, f);
            if obj.exhausted() {
                break;
            }
        }
    }
    obj.finish()
}

/// Cyclic coordinate search on an 11-point stencil whose half-width
/// halves after every sweep.
fn coordinate_scan(config: &SearchConfig, start: Vec<f64>) -> Run {
    const STENCIL: usize = 11;
    let n = start.len();
    let mut obj = Objective {
        config,
        evals: 0,
        best_x: start.clone(),
        best_f: f64::NEG_INFINITY,
    };
    let mut centre = start.clone();
    let mut f_centre = obj.eval(&centre);
    let mut half: Vec<f64> = (0..n).map(|i| 0.5 * config.bounds_of(i).width()).collect();
    while !obj.exhausted() && half.iter().any(|h| *h > 1e-10) {
        for i in 0..n {
            let b = config.bounds_of(i);
            if half[i] == 0.0 {
                continue;
            }
            for s in 0..STENCIL {
                if obj.exhausted() {
                    break;
                }
                let t = -1.0 + 2.0 * s as f64 / (STENCIL - 1) as f64;
                let mut x = centre.clone();
                x[i] = b.clamp(centre[i] + t * half[i]);
                let f = obj.eval(&x);
                if f > f_centre {
                    f_centre = f;
                    centre = x;
                }
            }
            half[i] *= 0.5;
        }
    }
    obj.finish()
}

/// Independent seeded restarts of the configured optimizer; the best one
/// wins, ties going to the lowest restart index.
pub fn maximize_ratio(config: &SearchConfig) -> Result<SearchResult> {
    config.validate()?;
    let runs: Vec<Run> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(r as u64);
            let start = random_start(config, &mut rng);
            match config.optimizer {
                Optimizer::NelderMead => nelder_mead(config, start),
                Optimizer::CoordinateScan => coordinate_scan(config, start),
            }
        })
        .collect();

    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.best_f > runs[best].best_f {
            best = i;
        }
    }
    let best_ratio = runs[best].best_f;
    Ok(SearchResult {
        best_ratio,
        best_perturbation: config.decode(&runs[best].best_x),
        evals_used: runs.iter().map(|r| r.evals).sum(),
        per_restart_ratios: runs.iter().map(|r| r.best_f).collect(),
        violation: best_ratio > 1.0 + SOLVER_SLACK,
    })
}

/// (amplitude, ratio) samples across the b bounds for a one-site search.
pub fn ratio_profile(config: &SearchConfig, points: usize) -> Result<Vec<(f64, f64)>> {
    if config.support_size != 1 || config.vary_a {
        return Err(Error::Usage(
            "ratio profile needs a one-site search without a".into(),
        ));
    }
    let Bounds { lo, hi } = config.b_bounds;
    Ok((0..points)
        .into_par_iter()
        .map(|i| {
            let t = if points > 1 {
                i as f64 / (points - 1) as f64
            } else {
                0.0
            };
            let x = lo + t * (hi - lo);
            (x, ratio_objective(&[x], config))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn objective_examples() {
        let hs1 = SearchConfig::new(Variant::Hs1, 1.0, 1);
        assert_abs_diff_eq!(ratio_objective(&[3.0], &hs1), 1.0, epsilon = 1e-8);
        let schr = SearchConfig::new(Variant::NewGammaSchrodinger, 1.0, 1);
        assert_abs_diff_eq!(
            ratio_objective(&[1.0], &schr),
            0.613_322_596_604_493_4,
            epsilon = 1e-9
        );
        for v in Variant::ALL {
            let c = SearchConfig {
                vary_a: false,
                ..SearchConfig::new(v, 1.0, 3)
            };
            assert_eq!(ratio_objective(&[0.0; 3], &c), 0.0);
        }
    }

    #[test]
    fn schrodinger_decoding_clamps_negative_b() {
        let mut c = SearchConfig::new(Variant::NewGammaSchrodinger, 1.0, 2);
        c.b_bounds = Bounds::new(-1.0, 1.0);
        assert_eq!(c.decode(&[-0.5, 0.5]).b(), &[0.0, 0.5]);
    }

    #[test]
    fn config_validation() {
        let ok = SearchConfig::new(Variant::HsGamma, 1.5, 2);
        assert!(ok.validate().is_ok());
        assert!(SearchConfig {
            restarts: 0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(SearchConfig {
            max_evals: 9,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(SearchConfig {
            support_size: 0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(SearchConfig {
            b_bounds: Bounds::new(1.0, 0.0),
            ..ok.clone()
        }
        .validate()
        .is_err());
        let schr = SearchConfig::new(Variant::NewGammaSchrodinger, 1.0, 1);
        assert!(SearchConfig {
            vary_a: true,
            ..schr.clone()
        }
        .validate()
        .is_err());
        assert!(SearchConfig { gamma: 0.7, ..schr }.validate().is_err());
    }

    #[test]
    fn degenerate_box_evaluates_the_point() {
        let mut c = SearchConfig::new(Variant::NewGammaJacobi, 1.0, 1);
        c.b_bounds = Bounds::new(2.5, 2.5);
        c.restarts = 3;
        let r = maximize_ratio(&c).unwrap();
        assert_eq!(r.best_ratio, ratio_objective(&[2.5], &c));
        assert_eq!(r.best_perturbation.b(), &[2.5]);
    }

    #[test]
    fn search_is_deterministic_and_restart_monotone() {
        let mut c = SearchConfig::new(Variant::NewGammaJacobi, 1.5, 2);
        c.vary_a = true;
        c.restarts = 4;
        c.max_evals = 60;
        let a = maximize_ratio(&c).unwrap();
        let b = maximize_ratio(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.best_ratio,
            a.per_restart_ratios
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        );
        let more = maximize_ratio(&SearchConfig {
            restarts: 6,
            ..c.clone()
        })
        .unwrap();
        assert_eq!(&more.per_restart_ratios[..4], &a.per_restart_ratios[..]);
        assert!(more.best_ratio >= a.best_ratio);
        assert!(!a.violation);
    }

    #[test]
    fn coordinate_scan_finds_hs1_equality() {
        let mut c = SearchConfig::new(Variant::Hs1, 1.0, 1);
        c.optimizer = Optimizer::CoordinateScan;
        c.b_bounds = Bounds::new(0.1, 10.0);
        c.restarts = 2;
        c.max_evals = 40;
        let r = maximize_ratio(&c).unwrap();
        assert!(r.best_ratio >= 1.0 - 1e-6 && r.best_ratio <= 1.0 + SOLVER_SLACK);
    }

    #[test]
    fn profile_covers_bounds() {
        let mut c = SearchConfig::new(Variant::HsGamma, 1.0, 1);
        c.b_bounds = Bounds::new(0.5, 4.0);
        let prof = ratio_profile(&c, 8).unwrap();
        assert_eq!(prof.len(), 8);
        assert_eq!(prof[0].0, 0.5);
        assert_eq!(prof[7].0, 4.0);
        assert!(prof.iter().all(|(_, r)| *r > 0.0 && *r < 1.0));
        assert!(ratio_profile(&SearchConfig::new(Variant::Hs1, 1.0, 2), 5).is_err());
    }
}
