//! `jlt`: check, fuzz and probe Lieb-Thirring bounds for Jacobi matrices.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 a bound was violated.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use jacobi_lt::extremal::{
    maximize_ratio, ratio_profile, Bounds, Optimizer, SearchConfig, SearchResult,
};
use jacobi_lt::fuzz::{run_fuzz, FuzzConfig, FuzzSummary, DEFAULT_MAX_SUPPORT};
use jacobi_lt::ltcheck::{bound_states, check, Operator, SpectralReport, Variant, DEFAULT_TOL};
use jacobi_lt::specfun::constants_for;
use jacobi_lt::{CompactPerturbation, TruncationSpec};

use report::{emit, render_csv, render_json, Format, RunManifest};

const PROFILE_POINTS: usize = 200;

#[derive(Parser, Debug)]
#[command(
    name = "jlt",
    version,
    about = "Lieb-Thirring inequalities for Jacobi matrices"
)]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct TruncationArgs {
    /// Free sites kept on each side of the perturbation.
    #[arg(long, default_value_t = 32)]
    margin: usize,

    /// Refinement gives up past this margin.
    #[arg(long, default_value_t = 4096)]
    max_margin: usize,

    /// Absolute eigenvalue tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

impl TruncationArgs {
    fn spec(&self) -> Result<TruncationSpec> {
        let spec = TruncationSpec {
            max_margin: self.max_margin,
            ..TruncationSpec::with_margin(self.margin)
        };
        spec.validate()?;
        if !(self.tol > 0.0) {
            bail!("--tol must be positive");
        }
        Ok(spec)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the constants for each moment order.
    Constants {
        /// Moment orders (comma separated), each >= 1/2.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 1.5, 2.0, 3.0])]
        gamma: Vec<f64>,
    },
    /// Check one inequality on a perturbation file.
    Check {
        /// JSON file {"offset": int, "b": [...], "a": [...]}; "a" defaults to ones.
        file: PathBuf,
        #[arg(long)]
        variant: Variant,
        /// Moment order (ignored by hs1).
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[command(flatten)]
        truncation: TruncationArgs,
    },
    /// Run the seeded theorem and lemma suites.
    Fuzz {
        /// Random perturbations per theorem suite.
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Random cases per lemma suite (defaults to --count).
        #[arg(long)]
        lemma_count: Option<usize>,
        #[arg(long, env = "JLT_SEED", default_value_t = 0)]
        seed: u64,
        /// Largest perturbation support.
        #[arg(long, default_value_t = DEFAULT_MAX_SUPPORT)]
        support: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 1.5, 2.0, 3.0])]
        gamma_grid: Vec<f64>,
        /// Variants to check (comma separated); all by default.
        #[arg(long, value_delimiter = ',')]
        variant_set: Vec<Variant>,
        #[command(flatten)]
        truncation: TruncationArgs,
    },
    /// Search for perturbations maximizing the ratio lhs/rhs.
    Search {
        #[arg(long)]
        variant: Variant,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Number of perturbed sites.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, env = "JLT_SEED", default_value_t = 0)]
        seed: u64,
        /// Box for the b entries as LO,HI.
        #[arg(long, value_parser = parse_pair)]
        bounds: Option<(f64, f64)>,
        /// Also vary the couplings a_n.
        #[arg(long)]
        vary_a: bool,
        /// Box for the a entries as LO,HI.
        #[arg(long, value_parser = parse_pair)]
        a_bounds: Option<(f64, f64)>,
        #[arg(long, default_value = "nelder-mead")]
        optimizer: Optimizer,
        /// Objective evaluations per restart.
        #[arg(long, default_value_t = 400)]
        max_evals: usize,
        /// Two-column ratio-vs-amplitude file (k = 1 only). Defaults to
        /// `<out>.ratio.dat` when --out is given.
        #[arg(long)]
        plot: Option<PathBuf>,
        #[command(flatten)]
        truncation: TruncationArgs,
    },
    /// List the bound states of a perturbation.
    Spectrum {
        file: PathBuf,
        #[command(flatten)]
        truncation: TruncationArgs,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

enum Outcome {
    Ok,
    Violation,
}

impl Outcome {
    fn from_violation(v: bool) -> Self {
        if v {
            Outcome::Violation
        } else {
            Outcome::Ok
        }
    }
}

fn read_perturbation(path: &Path) -> Result<CompactPerturbation> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing perturbation file {}", path.display()))
}

fn run(cli: &Cli) -> Result<Outcome> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Constants { gamma } => cmd_constants(gamma, cli.format, out),
        Command::Check {
            file,
            variant,
            gamma,
            truncation,
        } => cmd_check(file, *variant, *gamma, truncation, cli.format, out),
        Command::Fuzz {
            count,
            lemma_count,
            seed,
            support,
            gamma_grid,
            variant_set,
            truncation,
        } => {
            let mut config = FuzzConfig::new(*seed, *count);
            config.lemma_count = lemma_count.unwrap_or(*count);
            config.max_support = *support;
            config.gammas = gamma_grid.clone();
            if !variant_set.is_empty() {
                config.variants = variant_set.clone();
            }
            config.truncation = truncation.spec()?;
            config.tol = truncation.tol;
            cmd_fuzz(&config, cli.format, out)
        }
        Command::Search {
            variant,
            gamma,
            k,
            restarts,
            seed,
            bounds,
            vary_a,
            a_bounds,
            optimizer,
            max_evals,
            plot,
            truncation,
        } => {
            let mut config = SearchConfig::new(*variant, *gamma, *k);
            if let Some(b) = bounds {
                config.b_bounds = Bounds::new(b.0, b.1);
            }
            if let Some(a) = a_bounds {
                config.a_bounds = Bounds::new(a.0, a.1);
            }
            config.vary_a = *vary_a;
            config.restarts = *restarts;
            config.seed = *seed;
            config.optimizer = *optimizer;
            config.max_evals = *max_evals;
            config.truncation = truncation.spec()?;
            config.tol = truncation.tol;
            let plot = plot
                .clone()
                .or_else(|| out.map(|o| PathBuf::from(format!("{}.ratio.dat", o.display()))));
            cmd_search(&config, plot.as_deref(), cli.format, out)
        }
        Command::Spectrum { file, truncation } => cmd_spectrum(file, truncation, cli.format, out),
    }
}

#[derive(Serialize)]
struct ConstantsRow {
    gamma: f64,
    l_classical: f64,
    c_hs: f64,
    c_new_schrodinger: f64,
    c_new_jacobi: f64,
    improvement_ratio: f64,
}

fn cmd_constants(gammas: &[f64], format: Format, out: Option<&Path>) -> Result<Outcome> {
    let rows = gammas
        .iter()
        .map(|&g| {
            let c = constants_for(g).map_err(|e| anyhow!("gamma {g}: {e}"))?;
            Ok(ConstantsRow {
                gamma: g,
                l_classical: c.l_classical,
                c_hs: c.c_hs,
                c_new_schrodinger: c.c_new_schrodinger,
                c_new_jacobi: c.c_new_jacobi,
                improvement_ratio: c.improvement_ratio(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest::new("constants", 0).param("gamma", join(gammas));
    let text = match format {
        Format::Json => render_json(&manifest, &rows)?,
        Format::Csv => render_csv(&manifest, &rows)?,
    };
    emit(&text, out)?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct CheckRow<'a> {
    variant: &'a str,
    gamma: f64,
    lhs: f64,
    rhs: f64,
    ratio: f64,
    margin_used: usize,
}

fn cmd_check(
    file: &Path,
    variant: Variant,
    gamma: f64,
    truncation: &TruncationArgs,
    format: Format,
    out: Option<&Path>,
) -> Result<Outcome> {
    let p = read_perturbation(file)?;
    let spec = truncation.spec()?;
    let report: SpectralReport = check(&p, variant, gamma, &spec, truncation.tol)?;
    let manifest = RunManifest::new("check", 0)
        .param("file", file.display())
        .param("variant", variant)
        .param("gamma", gamma)
        .param("margin", truncation.margin)
        .param("tol", truncation.tol);
    let text = match format {
        Format::Json => render_json(&manifest, &report)?,
        Format::Csv => render_csv(
            &manifest,
            &[CheckRow {
                variant: variant.name(),
                gamma: report.gamma,
                lhs: report.lhs,
                rhs: report.rhs,
                ratio: report.ratio,
                margin_used: report.margin_used,
            }],
        )?,
    };
    emit(&text, out)?;
    Ok(Outcome::from_violation(report.violation))
}

#[derive(Serialize)]
struct FuzzRow {
    kind: &'static str,
    name: String,
    gamma: Option<f64>,
    count: usize,
    worst: Option<f64>,
    worst_case: Option<u64>,
    violations: usize,
    unstable: usize,
}

fn fuzz_rows(summary: &FuzzSummary) -> Vec<FuzzRow> {
    let theorems = summary.theorems.iter().map(|t| FuzzRow {
        kind: "theorem",
        name: t.variant.name().to_string(),
        gamma: t.gamma,
        count: t.count,
        worst: t.max_ratio,
        worst_case: t.argmax_case,
        violations: t.violations,
        unstable: t.unstable,
    });
    let lemmas = summary.lemmas.iter().map(|l| FuzzRow {
        kind: "lemma",
        name: l.name.clone(),
        gamma: None,
        count: l.count,
        worst: l.worst,
        worst_case: l.worst_case,
        violations: l.violations,
        unstable: 0,
    });
    theorems.chain(lemmas).collect()
}

fn cmd_fuzz(config: &FuzzConfig, format: Format, out: Option<&Path>) -> Result<Outcome> {
    for &g in &config.gammas {
        if !(g >= 0.5) {
            bail!("gamma grid entries must be >= 1/2, got {g}");
        }
    }
    let summary = run_fuzz(config)?;
    let variants: Vec<&str> = config.variants.iter().map(|v| v.name()).collect();
    let manifest = RunManifest::new("fuzz", config.seed)
        .param("count", config.count)
        .param("lemma_count", config.lemma_count)
        .param("support", config.max_support)
        .param("gamma_grid", join(&config.gammas))
        .param("variant_set", variants.join(","))
        .param("margin", config.truncation.margin)
        .param("max_margin", config.truncation.max_margin)
        .param("tol", config.tol);
    let text = match format {
        Format::Json => render_json(&manifest, &summary)?,
        Format::Csv => render_csv(&manifest, &fuzz_rows(&summary))?,
    };
    emit(&text, out)?;
    Ok(Outcome::from_violation(summary.violations() > 0))
}

#[derive(Serialize)]
struct SearchReport<'a> {
    config: &'a SearchConfig,
    result: &'a SearchResult,
}

#[derive(Serialize)]
struct RestartRow {
    restart: usize,
    ratio: f64,
    best: bool,
}

fn cmd_search(
    config: &SearchConfig,
    plot: Option<&Path>,
    format: Format,
    out: Option<&Path>,
) -> Result<Outcome> {
    let result = maximize_ratio(config)?;
    if result.violation {
        log::error!(
            "search exceeded the proven bound: ratio {}",
            result.best_ratio
        );
    }
    let manifest = RunManifest::new("search", config.seed)
        .param("variant", config.variant)
        .param("gamma", config.gamma)
        .param("k", config.support_size)
        .param("restarts", config.restarts)
        .param(
            "bounds",
            format!("{},{}", config.b_bounds.lo, config.b_bounds.hi),
        )
        .param("vary_a", config.vary_a)
        .param("optimizer", config.optimizer)
        .param("max_evals", config.max_evals);
    let text = match format {
        Format::Json => render_json(
            &manifest,
            &SearchReport {
                config,
                result: &result,
            },
        )?,
        Format::Csv => {
            let best = result
                .per_restart_ratios
                .iter()
                .position(|r| *r == result.best_ratio);
            let rows: Vec<RestartRow> = result
                .per_restart_ratios
                .iter()
                .enumerate()
                .map(|(i, &ratio)| RestartRow {
                    restart: i,
                    ratio,
                    best: Some(i) == best,
                })
                .collect();
            render_csv(&manifest, &rows)?
        }
    };
    emit(&text, out)?;
    if let (Some(path), 1, false) = (plot, config.support_size, config.vary_a) {
        let mut data = String::from("# amplitude ratio\n");
        for (x, r) in ratio_profile(config, PROFILE_POINTS)? {
            data.push_str(&format!("{x:.12e} {r:.12e}\n"));
        }
        fs::write(path, data).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Outcome::from_violation(result.violation))
}

/// Bound states in the conventional labelling: E₁⁺ > E₂⁺ > … > 2 and
/// −2 > … > E₂⁻ > E₁⁻, each listed from E₁ outward-in.
#[derive(Serialize)]
struct SpectrumReport {
    above: Vec<f64>,
    below: Vec<f64>,
    margin_used: usize,
}

#[derive(Serialize)]
struct SpectrumRow {
    side: &'static str,
    index: usize,
    eigenvalue: f64,
}

fn cmd_spectrum(
    file: &Path,
    truncation: &TruncationArgs,
    format: Format,
    out: Option<&Path>,
) -> Result<Outcome> {
    let p = read_perturbation(file)?;
    let states = bound_states(&p, Operator::Jacobi, &truncation.spec()?, truncation.tol)?;
    let mut above = states.above;
    above.reverse();
    let report = SpectrumReport {
        above,
        below: states.below,
        margin_used: states.margin_used,
    };
    let manifest = RunManifest::new("spectrum", 0)
        .param("file", file.display())
        .param("margin", truncation.margin)
        .param("tol", truncation.tol);
    let text = match format {
        Format::Json => render_json(&manifest, &report)?,
        Format::Csv => {
            let rows: Vec<SpectrumRow> = report
                .above
                .iter()
                .enumerate()
                .map(|(i, &e)| SpectrumRow {
                    side: "above",
                    index: i + 1,
                    eigenvalue: e,
                })
                .chain(report.below.iter().enumerate().map(|(i, &e)| SpectrumRow {
                    side: "below",
                    index: i + 1,
                    eigenvalue: e,
                }))
                .collect();
            render_csv(&manifest, &rows)?
        }
    };
    emit(&text, out)?;
    Ok(Outcome::Ok)
}

fn parse_pair(text: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = text
        .split_once(',')
        .ok_or_else(|| format!("expected LO,HI, got {text:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
    Ok((lo, hi))
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
