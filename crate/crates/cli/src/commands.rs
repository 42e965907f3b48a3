use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rphash_core::asymptotics::{
    naive_rate, rate_large_a, rate_large_b, survival_above, survival_below, LargeBRate,
};
use rphash_core::experiments::{
    convergence, detect_planted, detect_study, estimate_collision_rate, survival_rate, sweep,
    CollisionEstimate, ConvergenceSpec, DetectSpec, Predicate, Regime, SurvivalEstimate, SweepSpec,
};
use rphash_core::geometry::{functionals, reducibility, Reducibility};
use rphash_core::numint::{collision_prob_numeric, NumericEstimate};
use rphash_core::tolerances::SUBSET_SCAN_CAP;
use rphash_core::{
    AsymptoticInputs, Directions, Error, HashFamilyParams, IndexMode, QuadratureSpec, TupleConfig,
};
use serde::Serialize;

use crate::output::{csv_bytes, emit, json_bytes};
use crate::usage;

#[derive(Parser)]
#[command(name = "rphash", version, about = "Collision-rate experiments for random projection hashes")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo collision rates over a grid of triples with fixed sigma (CSV).
    Sweep(SweepArgs),
    /// One configuration through the Monte-Carlo, numeric and asymptotic routes (JSON).
    Estimate(EstimateArgs),
    /// Monte-Carlo rates against a large-a or large-b asymptotic (CSV).
    Convergence(ConvergenceArgs),
    /// Planted-tuple retrieval by bucketing a database (JSON).
    Detect(DetectArgs),
    /// Survival rate of a threshold filter predicate (JSON).
    Survival(SurvivalArgs),
}

impl Cli {
    pub fn run(self) -> anyhow::Result<()> {
        match self.command {
            Command::Sweep(args) => args.run(),
            Command::Estimate(args) => args.run(),
            Command::Convergence(args) => args.run(),
            Command::Detect(args) => args.run(),
            Command::Survival(args) => args.run(),
        }
    }
}

/// The strict upper triangle of the Gram matrix, row-major.
fn parse_config(gram: &[f64]) -> anyhow::Result<TupleConfig> {
    Ok(TupleConfig::from_off_diagonals(gram)?)
}

#[derive(Args, Serialize)]
struct SweepArgs {
    /// Target sum of the six ordered dot products.
    #[arg(long, allow_negative_numbers = true)]
    sigma: f64,
    #[arg(long)]
    a: usize,
    #[arg(long)]
    b: usize,
    #[arg(long, default_value_t = 20)]
    d: usize,
    /// Tuple size; the sweep grid is defined for triples only.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long)]
    trials: u64,
    #[arg(long, default_value_t = 0.05)]
    grid_step: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = Directions::Gaussian)]
    directions: Directions,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON mirror of the sweep, including skipped cells.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl SweepArgs {
    fn run(self) -> anyhow::Result<()> {
        if self.k != 3 {
            return Err(usage(format!("sweeps are defined for k = 3, got k = {}", self.k)));
        }
        let params = HashFamilyParams::new(self.d, self.a, self.b, self.seed)?
            .with_directions(self.directions);
        let result = sweep(&SweepSpec {
            sigma: self.sigma,
            grid_step: self.grid_step,
            params,
            trials: self.trials,
        })?;
        if !result.skipped.is_empty() {
            log::info!("{} grid cells skipped as infeasible", result.skipped.len());
        }
        emit(self.out.as_deref(), &csv_bytes(&result.rows)?, "sweep", &self, self.seed)?;
        if let Some(json) = &self.json {
            emit(Some(json), &json_bytes(&result)?, "sweep", &self, self.seed)?;
        }
        Ok(())
    }
}

#[derive(Args, Serialize)]
struct EstimateArgs {
    /// Off-diagonal Gram entries (strict upper triangle, row-major).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    gram: Vec<f64>,
    #[arg(long)]
    a: usize,
    #[arg(long)]
    b: usize,
    #[arg(long, default_value_t = 20)]
    d: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = Directions::Gaussian)]
    directions: Directions,
    /// Also evaluate the quadrature route (needs a = 1 or b = 1).
    #[arg(long)]
    numeric: bool,
    /// Also evaluate the large-a and large-b asymptotic rates.
    #[arg(long)]
    asymptotic: bool,
    /// Absolute tolerance of the quadrature route.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct AsymptoticReport {
    large_b: LargeBRate,
    large_a: f64,
}

#[derive(Serialize)]
struct EstimateReport {
    k: usize,
    a: usize,
    b: usize,
    h: usize,
    d: usize,
    directions: Directions,
    config: TupleConfig,
    alpha: f64,
    delta: f64,
    reducibility: Reducibility,
    naive_rate: f64,
    mc: CollisionEstimate,
    numeric: Option<NumericEstimate>,
    asymptotic: Option<AsymptoticReport>,
}

impl EstimateArgs {
    fn run(self) -> anyhow::Result<()> {
        let config = parse_config(&self.gram)?;
        let k = config.k();
        let params = HashFamilyParams::new(self.d, self.a, self.b, self.seed)?
            .with_directions(self.directions);
        let f = functionals(&config)?;
        let numeric = if self.numeric {
            let mode = IndexMode::for_params(self.a, self.b)
                .filter(|m| m.supports(k) && k <= 3)
                .ok_or_else(|| {
                    Error::Unsupported(format!(
                        "no integral representation for (a, b, k) = ({}, {}, {k})",
                        self.a, self.b
                    ))
                })?;
            if self.directions != Directions::Gaussian {
                return Err(Error::Unsupported(
                    "the numeric route describes Gaussian directions".into(),
                )
                .into());
            }
            let spec = QuadratureSpec {
                tolerance: self.tolerance,
                ..QuadratureSpec::default()
            };
            Some(collision_prob_numeric(&config, params.h(), mode, &spec)?)
        } else {
            None
        };
        let asymptotic = if self.asymptotic {
            let inputs = AsymptoticInputs::new(f.alpha, f.delta, k, self.a, self.b)?;
            Some(AsymptoticReport {
                large_b: rate_large_b(&inputs),
                large_a: rate_large_a(&inputs),
            })
        } else {
            None
        };
        let mc = estimate_collision_rate(&config, &params, self.trials)?;
        let report = EstimateReport {
            k,
            a: self.a,
            b: self.b,
            h: params.h(),
            d: self.d,
            directions: self.directions,
            reducibility: reducibility(&config),
            config,
            alpha: f.alpha,
            delta: f.delta,
            naive_rate: naive_rate(k, self.a, self.b),
            mc,
            numeric,
            asymptotic,
        };
        emit(self.out.as_deref(), &json_bytes(&report)?, "estimate", &self, self.seed)
    }
}

#[derive(Args, Serialize)]
struct ConvergenceArgs {
    #[arg(long)]
    regime: Regime,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    gram: Vec<f64>,
    /// Values of the growing parameter, e.g. 2,4,8,16,32.
    #[arg(long, value_delimiter = ',', required = true)]
    range: Vec<usize>,
    /// The parameter held fixed (b for large-a, a for large-b).
    #[arg(long, default_value_t = 1)]
    fixed: usize,
    /// Ambient dimension; defaults to the tuple size.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = Directions::Gaussian)]
    directions: Directions,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConvergenceArgs {
    fn run(self) -> anyhow::Result<()> {
        let config = parse_config(&self.gram)?;
        let rows = convergence(&ConvergenceSpec {
            regime: self.regime,
            d: self.d.unwrap_or(config.k()),
            config,
            fixed: self.fixed,
            range: self.range.clone(),
            trials: self.trials,
            seed: self.seed,
            directions: self.directions,
        })?;
        emit(self.out.as_deref(), &csv_bytes(&rows)?, "convergence", &self, self.seed)
    }
}

#[derive(Args, Serialize)]
struct DetectArgs {
    #[arg(long)]
    db_size: usize,
    /// Number of planted tuples.
    #[arg(long)]
    planted: usize,
    /// Off-diagonal Gram entries of the planted tuples.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    gram: Vec<f64>,
    #[arg(long)]
    a: usize,
    #[arg(long)]
    b: usize,
    #[arg(long, default_value_t = 20)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent databases; more than one adds the paired sign test.
    #[arg(long, default_value_t = 1)]
    instances: usize,
    /// Largest number of k-subsets scanned per bucket.
    #[arg(long, default_value_t = SUBSET_SCAN_CAP)]
    scan_cap: u64,
    #[arg(long, default_value_t = Directions::Gaussian)]
    directions: Directions,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl DetectArgs {
    fn run(self) -> anyhow::Result<()> {
        let config = parse_config(&self.gram)?;
        let params = HashFamilyParams::new(self.d, self.a, self.b, self.seed)?
            .with_directions(self.directions);
        let spec = DetectSpec::new(self.db_size, self.planted, params, config).with_scan_cap(self.scan_cap);
        let bytes = match self.instances {
            0 => return Err(usage("need at least one instance")),
            1 => json_bytes(&detect_planted(&spec)?)?,
            n => json_bytes(&detect_study(&spec, n)?)?,
        };
        emit(self.out.as_deref(), &bytes, "detect", &self, self.seed)
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Above,
    Below,
}

#[derive(Args, Serialize)]
struct SurvivalArgs {
    #[arg(long)]
    mode: Mode,
    #[arg(long, allow_negative_numbers = true)]
    threshold: f64,
    /// Off-diagonal Gram entries; an orthonormal tuple when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gram: Option<Vec<f64>>,
    /// Tuple size; must match --gram when both are given.
    #[arg(long)]
    k: Option<usize>,
    /// Ambient dimension; defaults to the tuple size.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SurvivalReport {
    mc: SurvivalEstimate,
    /// `(1 - Phi_k(C))^alpha` above, `(2 c^2 / pi)^(k/2) / delta` below.
    closed_form: f64,
    alpha: f64,
    delta: f64,
    /// `p_mc / closed_form`.
    ratio: f64,
    /// `ln p_mc / ln closed_form`; absent when either is 0 or 1.
    log_ratio: Option<f64>,
}

impl SurvivalArgs {
    fn run(self) -> anyhow::Result<()> {
        let config = match (&self.gram, self.k) {
            (Some(gram), k) => {
                let config = parse_config(gram)?;
                if k.is_some_and(|k| k != config.k()) {
                    return Err(usage(format!(
                        "--k {} does not match the {}-vector --gram",
                        k.unwrap_or_default(),
                        config.k()
                    )));
                }
                config
            }
            (None, k) => {
                let k = k.unwrap_or(1);
                if k == 0 {
                    return Err(usage("--k must be positive"));
                }
                TupleConfig::identity(k)
            }
        };
        let k = config.k();
        let predicate = match self.mode {
            Mode::Above => Predicate::Above(self.threshold),
            Mode::Below => Predicate::Below(self.threshold),
        };
        let mc = survival_rate(&config, self.d.unwrap_or(k), predicate, self.trials, self.seed)?;
        let f = functionals(&config)?;
        let closed_form = match predicate {
            Predicate::Above(c) => survival_above(f.alpha, k, c)?,
            Predicate::Below(c) => survival_below(f.delta, k, c)?,
        };
        let open = |p: f64| p > 0.0 && p < 1.0;
        let report = SurvivalReport {
            ratio: mc.p_hat / closed_form,
            log_ratio: (open(mc.p_hat) && open(closed_form)).then(|| mc.p_hat.ln() / closed_form.ln()),
            mc,
            closed_form,
            alpha: f.alpha,
            delta: f.delta,
        };
        emit(self.out.as_deref(), &json_bytes(&report)?, "survival", &self, self.seed)
    }
}
