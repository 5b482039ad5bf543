//! Seeded Monte Carlo experiments with machine-readable emission.
//!
//! Every experiment is driven by an [`ExperimentConfig`] and a master seed.
//! Per-trial seeds are derived by the documented splittable function
//! [`derive_trial_seed`], so results are identical for identical configs
//! regardless of the parallelism degree; trials run in parallel and are
//! collected in canonical `(grid index, trial index)` order.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    main_lower_bound, variability_gain, BoundParams, CutFraction, ErasureDistributionMoments,
    ErasureScalingLaw,
};
use crate::cutset::{
    heuristic_min_cut, min_cut_bruteforce, tightness_upper_bound, Cut, ErasureModel,
    GammaDistribution, Mode, SdSpec,
};
use crate::error::Error;
use crate::geometry::{
    build_cell_grid, build_rgg, check_eps_nice, critical_radius, is_connected, linf_distance,
    sample_uniform_points, GeoGraph, PointSet,
};
use crate::Result;

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Heuristic min-cut and closed-form bounds across a size grid at the
    /// critical radius, sources left / destinations right.
    Scaling,
    /// Fraction of connected instances per (n, r).
    Connectivity,
    /// Left/right sweep-cut value against its closed-form ceiling, or the
    /// paired-neighbors linear-scaling reference.
    Tightness,
    /// Exact min-cut under random vs fixed-at-the-mean erasures.
    Variability,
    /// Fraction of ε-nice instances per (n, r).
    Niceness,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Connectivity => "connectivity",
            ExperimentKind::Tightness => "tightness",
            ExperimentKind::Variability => "variability",
            ExperimentKind::Niceness => "niceness",
        }
    }
}

/// How the transmission radius is chosen per grid size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMode {
    Fixed { r: f64 },
    /// `r = c·√(log n / n)`, capped at 1.
    Critical { c: f64 },
    /// A sweep over several fixed radii (each n is paired with each r).
    FixedList { rs: Vec<f64> },
    /// A sweep over several critical-radius constants.
    CriticalList { cs: Vec<f64> },
}

impl RadiusMode {
    /// The per-n radius list this mode expands to.
    fn radii(&self, n: usize) -> Result<Vec<f64>> {
        Ok(match self {
            RadiusMode::Fixed { r } => vec![*r],
            RadiusMode::Critical { c } => vec![critical_radius(n, *c)?],
            RadiusMode::FixedList { rs } => rs.clone(),
            RadiusMode::CriticalList { cs } => cs
                .iter()
                .map(|&c| critical_radius(n, c))
                .collect::<Result<_>>()?,
        })
    }

    fn single(&self, n: usize) -> Result<f64> {
        let radii = self.radii(n)?;
        if radii.len() != 1 {
            return Err(Error::InvalidConfig(
                "this experiment needs a single radius per grid size".into(),
            ));
        }
        Ok(radii[0])
    }
}

/// How link erasure probabilities are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSpec {
    Constant { gamma: f64 },
    /// `γ_n = 1 − 1/(g(n)·log n)` for a scaling family `g`.
    GammaN { law: ErasureScalingLaw },
    /// I.i.d. per-link draws; the per-trial seed is derived automatically.
    Distribution {
        #[serde(flatten)]
        dist: GammaDistribution,
    },
}

impl GammaSpec {
    /// A short human-readable summary for result records.
    fn summary(&self) -> String {
        match self {
            GammaSpec::Constant { gamma } => format!("const:{gamma}"),
            GammaSpec::GammaN { law } => format!("gamma_n:{law:?}"),
            GammaSpec::Distribution { dist } => match dist {
                GammaDistribution::Uniform(a, b) => format!("uniform({a},{b})"),
                GammaDistribution::TwoPoint(lo, hi, p) => {
                    format!("two_point({lo},{hi};p={p})")
                }
            },
        }
    }

    /// The constant erasure probability for size `n`, if this spec is
    /// constant-per-instance.
    fn constant_for(&self, n: usize) -> Result<f64> {
        match self {
            GammaSpec::Constant { gamma } => Ok(*gamma),
            GammaSpec::GammaN { law } => {
                law.validate()?;
                let gamma = crate::bounds::derived_gamma(law.eval(n as u64), n as u64);
                if !(0.0..1.0).contains(&gamma) {
                    return Err(Error::RejectedGridPoint {
                        n: n as u64,
                        gamma,
                    });
                }
                Ok(gamma)
            }
            GammaSpec::Distribution { .. } => Err(Error::InvalidConfig(
                "this experiment needs a constant erasure probability".into(),
            )),
        }
    }
}

/// Placement of sources and destinations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdLayout {
    /// Sources are the nodes with abscissa ≤ 0.5, destinations the rest.
    LeftRightSplit,
    /// Each source is paired with a distinct destination within range.
    PairedNeighbors,
    /// `⌈α₁n⌉` random sources and `⌈α₂n⌉` random destinations, disjoint.
    RandomFractions { alpha1: f64, alpha2: f64 },
}

/// Output format of [`emit_results`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Experiment description, JSON-serializable for the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n_grid: Vec<usize>,
    pub radius_mode: RadiusMode,
    pub gamma_spec: GammaSpec,
    pub eps: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub sd_layout: SdLayout,
    /// Keep records of disconnected instances (flagged) instead of
    /// resampling or dropping them.
    #[serde(default = "default_true")]
    pub keep_disconnected: bool,
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::InvalidConfig("n_grid must be nonempty".into()));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "n_grid must be strictly increasing".into(),
            ));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidConfig("eps must lie in (0, 1)".into()));
        }
        match self.experiment {
            ExperimentKind::Scaling => {
                if self.sd_layout != SdLayout::LeftRightSplit {
                    return Err(Error::InvalidConfig(
                        "scaling requires the left_right_split layout".into(),
                    ));
                }
                match self.radius_mode {
                    RadiusMode::Critical { c } if c >= 7.0 => {}
                    _ => {
                        return Err(Error::InvalidConfig(
                            "scaling requires radius_mode critical with c >= 7".into(),
                        ))
                    }
                }
            }
            ExperimentKind::Tightness => {
                if !matches!(
                    self.sd_layout,
                    SdLayout::LeftRightSplit | SdLayout::PairedNeighbors
                ) {
                    return Err(Error::InvalidConfig(
                        "tightness requires left_right_split or paired_neighbors".into(),
                    ));
                }
            }
            ExperimentKind::Variability => {
                if !matches!(self.gamma_spec, GammaSpec::Distribution { .. }) {
                    return Err(Error::InvalidConfig(
                        "variability requires a distribution gamma_spec".into(),
                    ));
                }
            }
            ExperimentKind::Connectivity | ExperimentKind::Niceness => {}
        }
        Ok(())
    }
}

/// SplitMix64: the documented seed-mixing primitive.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// The documented per-trial seed derivation:
/// `splitmix64(splitmix64(master ⊕ GRID·(grid_index+1)) ⊕ TRIAL·(trial_index+1))`
/// with the golden-ratio multipliers below. Splittable: any trial can be
/// re-run in isolation from `(master_seed, grid_index, trial_index)`.
pub fn derive_trial_seed(master_seed: u64, grid_index: usize, trial_index: usize) -> u64 {
    const GRID: u64 = 0x9E37_79B9_7F4A_7C15;
    const TRIAL: u64 = 0xC2B2_AE3D_27D4_EB4F;
    let a = splitmix64(master_seed ^ GRID.wrapping_mul(grid_index as u64 + 1));
    splitmix64(a ^ TRIAL.wrapping_mul(trial_index as u64 + 1))
}

/// Derives an independent sub-stream seed (points, erasures, placement)
/// from a trial seed.
pub fn derive_stream_seed(trial_seed: u64, stream: u64) -> u64 {
    splitmix64(trial_seed ^ splitmix64(stream.wrapping_add(1)))
}

/// One emitted measurement. Fields not applicable to an experiment stay
/// empty. Every record is self-describing: the trial can be re-run from
/// `(experiment, n, r, eps, gamma, trial_seed)` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub grid_index: usize,
    pub n: usize,
    pub r: f64,
    pub eps: f64,
    pub gamma: String,
    pub trial: Option<usize>,
    pub trial_seed: Option<u64>,
    pub mode: Option<String>,
    pub connected: Option<bool>,
    pub nice: Option<bool>,
    /// Set when the record is degraded (disconnected instance, failed
    /// pairing, undefined ratio) but still emitted.
    pub flagged: bool,
    pub min_cut: Option<f64>,
    /// Whether `min_cut` came from exhaustive enumeration.
    pub exact: Option<bool>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub sweep_cut_value: Option<f64>,
    pub paired_reference: Option<f64>,
    pub pair_count: Option<usize>,
    pub capacity_const: Option<f64>,
    pub capacity_random: Option<f64>,
    pub empirical_ratio: Option<f64>,
    pub predicted_gain: Option<f64>,
    pub trials: Option<usize>,
    pub successes: Option<usize>,
    pub fraction: Option<f64>,
    pub ci_half_width: Option<f64>,
}

impl ResultRecord {
    fn new(config: &ExperimentConfig, grid_index: usize, n: usize, r: f64) -> Self {
        ResultRecord {
            experiment: config.experiment.name().to_string(),
            grid_index,
            n,
            r,
            eps: config.eps,
            gamma: config.gamma_spec.summary(),
            trial: None,
            trial_seed: None,
            mode: None,
            connected: None,
            nice: None,
            flagged: false,
            min_cut: None,
            exact: None,
            lower_bound: None,
            upper_bound: None,
            sweep_cut_value: None,
            paired_reference: None,
            pair_count: None,
            capacity_const: None,
            capacity_random: None,
            empirical_ratio: None,
            predicted_gain: None,
            trials: None,
            successes: None,
            fraction: None,
            ci_half_width: None,
        }
    }
}

/// Runs the configured experiment.
pub fn run(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    match config.experiment {
        ExperimentKind::Scaling => run_scaling(config),
        ExperimentKind::Connectivity => run_connectivity(config),
        ExperimentKind::Tightness => run_tightness(config),
        ExperimentKind::Variability => run_variability(config),
        ExperimentKind::Niceness => run_niceness(config),
    }
}

/// The left/right split: sources are the nodes with abscissa ≤ 0.5. Fails
/// when either side is empty.
fn left_right_sd(points: &PointSet) -> Option<(Vec<u32>, Vec<u32>)> {
    let mut sources = Vec::new();
    let mut dests = Vec::new();
    for (i, p) in points.points().iter().enumerate() {
        if p.x <= 0.5 {
            sources.push(i as u32);
        } else {
            dests.push(i as u32);
        }
    }
    if sources.is_empty() || dests.is_empty() {
        None
    } else {
        Some((sources, dests))
    }
}

/// Sources left / destinations right across a size grid at the critical
/// radius: heuristic min-cut in both modes plus the closed-form lower and
/// upper bounds, two records (one per mode) per trial.
pub fn run_scaling(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let jobs: Vec<(usize, usize)> = grid_trials(config);
    let nested: Result<Vec<Vec<ResultRecord>>> = jobs
        .par_iter()
        .map(|&(gi, trial)| {
            let n = config.n_grid[gi];
            let r = config.radius_mode.single(n)?;
            let gamma = config.gamma_spec.constant_for(n)?;
            let trial_seed = derive_trial_seed(config.master_seed, gi, trial);
            let points = sample_uniform_points(n, derive_stream_seed(trial_seed, 0))?;
            let graph = build_rgg(&points, r)?;
            let connected = is_connected(&graph);

            let mut base = ResultRecord::new(config, gi, n, r);
            base.trial = Some(trial);
            base.trial_seed = Some(trial_seed);
            base.connected = Some(connected);
            base.flagged = !connected;

            let Some((sources, dests)) = left_right_sd(&points) else {
                base.flagged = true;
                return Ok(vec![base.clone(), base]);
            };
            let sd = SdSpec::new(sources, dests, n)?;
            let model = ErasureModel::Constant(gamma);
            let params = BoundParams::new(
                n as u64,
                r,
                config.eps,
                gamma,
                CutFraction::SdFractions {
                    alpha1: sd.alpha1(),
                    alpha2: sd.alpha2(),
                },
            );
            let lower = params.and_then(|p| main_lower_bound(&p)).ok();
            let upper = tightness_upper_bound(n, r, config.eps, gamma).ok();

            let mut out = Vec::with_capacity(2);
            for mode in [Mode::Broadcast, Mode::Multicast] {
                let res = heuristic_min_cut(&graph, &model, &sd, mode)?;
                let mut rec = base.clone();
                rec.mode = Some(mode.to_string());
                rec.min_cut = Some(res.value);
                rec.exact = Some(false);
                rec.lower_bound = lower;
                rec.upper_bound = upper;
                out.push(rec);
            }
            Ok(out)
        })
        .collect();
    Ok(nested?.into_iter().flatten().collect())
}

/// Fraction of connected instances per (n, r), with a 95% Wald half-width.
pub fn run_connectivity(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let mut grid_points = Vec::new();
    for &n in &config.n_grid {
        for r in config.radius_mode.radii(n)? {
            grid_points.push((n, r));
        }
    }
    grid_points
        .par_iter()
        .enumerate()
        .map(|(gi, &(n, r))| {
            let successes: usize = (0..config.trials)
                .into_par_iter()
                .map(|trial| {
                    let trial_seed = derive_trial_seed(config.master_seed, gi, trial);
                    let points =
                        sample_uniform_points(n, derive_stream_seed(trial_seed, 0)).unwrap();
                    let graph = build_rgg(&points, r).unwrap();
                    usize::from(is_connected(&graph))
                })
                .sum();
            let mut rec = ResultRecord::new(config, gi, n, r);
            let (fraction, ci) = binomial_summary(successes, config.trials);
            rec.trials = Some(config.trials);
            rec.successes = Some(successes);
            rec.fraction = Some(fraction);
            rec.ci_half_width = Some(ci);
            Ok(rec)
        })
        .collect()
}

/// Fraction of ε-nice instances per (n, r), with a 95% Wald half-width.
pub fn run_niceness(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let mut grid_points = Vec::new();
    for &n in &config.n_grid {
        for r in config.radius_mode.radii(n)? {
            grid_points.push((n, r));
        }
    }
    grid_points
        .par_iter()
        .enumerate()
        .map(|(gi, &(n, r))| {
            let successes: usize = (0..config.trials)
                .into_par_iter()
                .map(|trial| {
                    let trial_seed = derive_trial_seed(config.master_seed, gi, trial);
                    let points =
                        sample_uniform_points(n, derive_stream_seed(trial_seed, 0)).unwrap();
                    let grid = build_cell_grid(&points, r).unwrap();
                    let report = check_eps_nice(&grid, n, r, config.eps).unwrap();
                    usize::from(report.is_nice)
                })
                .sum();
            let mut rec = ResultRecord::new(config, gi, n, r);
            let (fraction, ci) = binomial_summary(successes, config.trials);
            rec.trials = Some(config.trials);
            rec.successes = Some(successes);
            rec.fraction = Some(fraction);
            rec.ci_half_width = Some(ci);
            Ok(rec)
        })
        .collect()
}

/// Left/right layout: the t = 0.5 sweep-cut value against its closed-form
/// ceiling. Paired-neighbors layout: each source greedily paired with the
/// nearest unpaired node within range; the linear-scaling reference is the
/// summed single-hop capacity over the pairs.
pub fn run_tightness(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let jobs = grid_trials(config);
    jobs.par_iter()
        .map(|&(gi, trial)| {
            let n = config.n_grid[gi];
            let r = config.radius_mode.single(n)?;
            let gamma = config.gamma_spec.constant_for(n)?;
            let trial_seed = derive_trial_seed(config.master_seed, gi, trial);
            let points = sample_uniform_points(n, derive_stream_seed(trial_seed, 0))?;
            let graph = build_rgg(&points, r)?;
            let model = ErasureModel::Constant(gamma);

            let mut rec = ResultRecord::new(config, gi, n, r);
            rec.trial = Some(trial);
            rec.trial_seed = Some(trial_seed);
            rec.connected = Some(is_connected(&graph));

            match config.sd_layout {
                SdLayout::LeftRightSplit => {
                    let Some((sources, _)) = left_right_sd(&points) else {
                        rec.flagged = true;
                        return Ok(rec);
                    };
                    let membership: Vec<bool> =
                        points.points().iter().map(|p| p.x <= 0.5).collect();
                    let cut = Cut::from_membership(membership)?;
                    let value = crate::cutset::broadcast_cut_capacity(&graph, &model, &cut)?;
                    rec.sweep_cut_value = Some(value);
                    rec.upper_bound =
                        Some(tightness_upper_bound(n, r, config.eps, gamma)?);
                    rec.pair_count = Some(sources.len());
                }
                SdLayout::PairedNeighbors => {
                    let (pairs, intended) = pair_neighbors(&graph);
                    rec.pair_count = Some(pairs.len());
                    rec.flagged = pairs.len() < intended;
                    let mut reference = 0.0;
                    for &(s, d) in &pairs {
                        let _ = (s, d);
                        reference += 1.0 - gamma;
                    }
                    rec.paired_reference = Some(reference);
                }
                SdLayout::RandomFractions { .. } => {
                    return Err(Error::InvalidConfig(
                        "tightness requires left_right_split or paired_neighbors".into(),
                    ))
                }
            }
            Ok(rec)
        })
        .collect()
}

/// Greedy nearest-neighbor pairing: scan nodes in ascending index order;
/// each unpaired node grabs the closest unpaired node within the radius
/// (ties to the smaller index). Returns the pairs and the intended count
/// `⌊n/2⌋`.
fn pair_neighbors(graph: &GeoGraph) -> (Vec<(u32, u32)>, usize) {
    let n = graph.n();
    let pts = graph.points().points();
    let mut paired = vec![false; n];
    let mut pairs = Vec::new();
    for u in 0..n as u32 {
        if paired[u as usize] {
            continue;
        }
        let mut best: Option<(f64, u32)> = None;
        for &v in graph.neighbors(u) {
            if !paired[v as usize] && v != u {
                let d = linf_distance(pts[u as usize], pts[v as usize]);
                if best.map_or(true, |(bd, bv)| d < bd || (d == bd && v < bv)) {
                    best = Some((d, v));
                }
            }
        }
        if let Some((_, v)) = best {
            paired[u as usize] = true;
            paired[v as usize] = true;
            pairs.push((u, v));
        }
    }
    (pairs, n / 2)
}

/// Exact min-cut under (i) the constant mean erasure probability and
/// (ii) i.i.d. per-link draws on the same graph; reports the empirical
/// ratio and the predicted variability gain at `m = (1−2ε)·(1/4)·n·r²`.
pub fn run_variability(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let GammaSpec::Distribution { dist } = &config.gamma_spec else {
        return Err(Error::InvalidConfig(
            "variability requires a distribution gamma_spec".into(),
        ));
    };
    let moments = match *dist {
        GammaDistribution::Uniform(a, b) => ErasureDistributionMoments::uniform(a, b)?,
        GammaDistribution::TwoPoint(lo, hi, p) => {
            ErasureDistributionMoments::two_point(lo, hi, p)?
        }
    };
    let mean = dist.mean();

    let jobs = grid_trials(config);
    jobs.par_iter()
        .map(|&(gi, trial)| {
            let n = config.n_grid[gi];
            let r = config.radius_mode.single(n)?;
            let trial_seed = derive_trial_seed(config.master_seed, gi, trial);
            let points = sample_uniform_points(n, derive_stream_seed(trial_seed, 0))?;
            let graph = build_rgg(&points, r)?;

            let mut rec = ResultRecord::new(config, gi, n, r);
            rec.trial = Some(trial);
            rec.trial_seed = Some(trial_seed);
            rec.connected = Some(is_connected(&graph));
            rec.exact = Some(true);

            let sd = layout_sd(config.sd_layout, &points, derive_stream_seed(trial_seed, 2))?;
            let const_model = ErasureModel::Constant(mean);
            let rand_model = ErasureModel::Distribution {
                dist: *dist,
                seed: derive_stream_seed(trial_seed, 1),
            }
            .materialize(&graph)?;

            let c_const = min_cut_bruteforce(&graph, &const_model, &sd, Mode::Broadcast)?;
            let c_rand = min_cut_bruteforce(&graph, &rand_model, &sd, Mode::Broadcast)?;
            rec.capacity_const = Some(c_const.value);
            rec.capacity_random = Some(c_rand.value);
            if c_const.value > 1e-12 {
                rec.empirical_ratio = Some(c_rand.value / c_const.value);
            } else {
                rec.flagged = true;
            }
            let m = (1.0 - 2.0 * config.eps) * 0.25 * n as f64 * r * r;
            rec.predicted_gain = variability_gain(m, &moments, config.eps).ok();
            Ok(rec)
        })
        .collect()
}

/// Materializes a source/destination layout on sampled points.
fn layout_sd(layout: SdLayout, points: &PointSet, seed: u64) -> Result<SdSpec> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let n = points.n();
    match layout {
        SdLayout::LeftRightSplit => {
            let (s, d) = left_right_sd(points).ok_or_else(|| {
                Error::InvalidInstance("left/right split left one side empty".into())
            })?;
            SdSpec::new(s, d, n)
        }
        SdLayout::RandomFractions { alpha1, alpha2 } => {
            let k1 = ((alpha1 * n as f64).ceil() as usize).max(1);
            let k2 = ((alpha2 * n as f64).ceil() as usize).max(1);
            if k1 + k2 > n {
                return Err(Error::InvalidConfig(
                    "alpha1 + alpha2 too large for n".into(),
                ));
            }
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.shuffle(&mut rng);
            SdSpec::new(order[..k1].to_vec(), order[k1..k1 + k2].to_vec(), n)
        }
        SdLayout::PairedNeighbors => Err(Error::InvalidConfig(
            "paired_neighbors does not define a single cut problem".into(),
        )),
    }
}

fn grid_trials(config: &ExperimentConfig) -> Vec<(usize, usize)> {
    let mut jobs = Vec::with_capacity(config.n_grid.len() * config.trials);
    for gi in 0..config.n_grid.len() {
        for trial in 0..config.trials {
            jobs.push((gi, trial));
        }
    }
    jobs
}

/// Fraction and 95% Wald half-width.
fn binomial_summary(successes: usize, trials: usize) -> (f64, f64) {
    let p = successes as f64 / trials as f64;
    (p, 1.96 * (p * (1.0 - p) / trials as f64).sqrt())
}

/// Simple least-squares line fit; `r_squared` is the squared correlation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits `y ≈ slope·x + intercept`. Needs at least two distinct x values.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid(
            "points",
            xs.len() as f64,
            "need at least two (x, y) pairs of equal length",
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    if sxx == 0.0 {
        return Err(Error::invalid("x", mx, "x values must not all coincide"));
    }
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared: if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) },
    })
}

/// Median of a sample (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// CSV column order (also the JSON field order).
pub const CSV_COLUMNS: &[&str] = &[
    "experiment",
    "grid_index",
    "n",
    "r",
    "eps",
    "gamma",
    "trial",
    "trial_seed",
    "mode",
    "connected",
    "nice",
    "flagged",
    "min_cut",
    "exact",
    "lower_bound",
    "upper_bound",
    "sweep_cut_value",
    "paired_reference",
    "pair_count",
    "capacity_const",
    "capacity_random",
    "empirical_ratio",
    "predicted_gain",
    "trials",
    "successes",
    "fraction",
    "ci_half_width",
];

fn fmt_f64(v: f64) -> String {
    // 17 significant digits: exact f64 round-trip, byte-stable.
    format!("{v:.16e}")
}

fn fmt_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn fmt_opt_f64(v: &Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Serializes records to CSV (fixed [`CSV_COLUMNS`] order, header row,
/// floats with 17 significant digits) or a JSON array. Identical records
/// produce byte-identical files. Wall-clock timing is deliberately not part
/// of the serialized output.
pub fn emit_results(records: &[ResultRecord], format: OutputFormat, path: &Path) -> Result<()> {
    let body = render_results(records, format)?;
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// In-memory form of [`emit_results`].
pub fn render_results(records: &[ResultRecord], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(records).map_err(|e| Error::Parse(e.to_string()))
        }
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str(&CSV_COLUMNS.join(","));
            out.push('\n');
            for rec in records {
                let fields = [
                    rec.experiment.clone(),
                    rec.grid_index.to_string(),
                    rec.n.to_string(),
                    fmt_f64(rec.r),
                    fmt_f64(rec.eps),
                    rec.gamma.clone(),
                    fmt_opt(&rec.trial),
                    fmt_opt(&rec.trial_seed),
                    fmt_opt(&rec.mode),
                    fmt_opt(&rec.connected),
                    fmt_opt(&rec.nice),
                    rec.flagged.to_string(),
                    fmt_opt_f64(&rec.min_cut),
                    fmt_opt(&rec.exact),
                    fmt_opt_f64(&rec.lower_bound),
                    fmt_opt_f64(&rec.upper_bound),
                    fmt_opt_f64(&rec.sweep_cut_value),
                    fmt_opt_f64(&rec.paired_reference),
                    fmt_opt(&rec.pair_count),
                    fmt_opt_f64(&rec.capacity_const),
                    fmt_opt_f64(&rec.capacity_random),
                    fmt_opt_f64(&rec.empirical_ratio),
                    fmt_opt_f64(&rec.predicted_gain),
                    fmt_opt(&rec.trials),
                    fmt_opt(&rec.successes),
                    fmt_opt_f64(&rec.fraction),
                    fmt_opt_f64(&rec.ci_half_width),
                ];
                out.push_str(&fields.join(","));
                out.push('\n');
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            experiment: kind,
            n_grid: vec![30, 60],
            radius_mode: RadiusMode::Fixed { r: 0.4 },
            gamma_spec: GammaSpec::Constant { gamma: 0.5 },
            eps: 0.1,
            trials: 3,
            master_seed: 7,
            sd_layout: SdLayout::LeftRightSplit,
            keep_disconnected: true,
        }
    }

    #[test]
    fn seed_derivation_is_stable_and_splittable() {
        let a = derive_trial_seed(42, 0, 0);
        let b = derive_trial_seed(42, 0, 1);
        let c = derive_trial_seed(42, 1, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_trial_seed(42, 0, 0));
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny_config(ExperimentKind::Scaling);
        // Scaling needs critical radius with c >= 7.
        assert!(cfg.validate().is_err());
        cfg.radius_mode = RadiusMode::Critical { c: 7.0 };
        assert!(cfg.validate().is_ok());

        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg.trials = 3;
        cfg.n_grid = vec![60, 30];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn connectivity_complete_graph_fraction_is_one() {
        let cfg = ExperimentConfig {
            experiment: ExperimentKind::Connectivity,
            n_grid: vec![20],
            radius_mode: RadiusMode::Fixed { r: 1.0 },
            gamma_spec: GammaSpec::Constant { gamma: 0.5 },
            eps: 0.1,
            trials: 10,
            master_seed: 3,
            sd_layout: SdLayout::LeftRightSplit,
            keep_disconnected: true,
        };
        let recs = run(&cfg).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].fraction, Some(1.0));
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = tiny_config(ExperimentKind::Tightness);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a, b);
        // Record cardinality: one per (grid point, trial).
        assert_eq!(a.len(), 2 * 3);
    }

    #[test]
    fn emission_is_byte_identical_and_round_trips() {
        let cfg = tiny_config(ExperimentKind::Tightness);
        let recs = run(&cfg).unwrap();
        let csv1 = render_results(&recs, OutputFormat::Csv).unwrap();
        let csv2 = render_results(&recs, OutputFormat::Csv).unwrap();
        assert_eq!(csv1, csv2);
        assert!(csv1.starts_with("experiment,grid_index,n,r,"));

        let json = render_results(&recs, OutputFormat::Json).unwrap();
        let back: Vec<ResultRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(recs, back);
    }

    #[test]
    fn empty_records_emit_header_only() {
        let csv = render_results(&[], OutputFormat::Csv).unwrap();
        assert_eq!(csv.lines().count(), 1);
    }

    #[test]
    fn variability_runs_small() {
        let cfg = ExperimentConfig {
            experiment: ExperimentKind::Variability,
            n_grid: vec![12],
            radius_mode: RadiusMode::Fixed { r: 0.7 },
            gamma_spec: GammaSpec::Distribution {
                dist: GammaDistribution::Uniform(0.25, 0.75),
            },
            eps: 0.01,
            trials: 4,
            master_seed: 11,
            sd_layout: SdLayout::RandomFractions {
                alpha1: 0.05,
                alpha2: 0.05,
            },
            keep_disconnected: true,
        };
        let recs = run(&cfg).unwrap();
        assert_eq!(recs.len(), 4);
        for rec in &recs {
            assert!(rec.capacity_const.is_some());
            assert!(rec.capacity_random.is_some());
            assert!(rec.predicted_gain.unwrap() > 1.0);
        }
    }

    #[test]
    fn paired_neighbors_reference() {
        let cfg = ExperimentConfig {
            experiment: ExperimentKind::Tightness,
            n_grid: vec![40],
            radius_mode: RadiusMode::Fixed { r: 0.5 },
            gamma_spec: GammaSpec::Constant { gamma: 0.5 },
            eps: 0.1,
            trials: 2,
            master_seed: 5,
            sd_layout: SdLayout::PairedNeighbors,
            keep_disconnected: true,
        };
        let recs = run(&cfg).unwrap();
        for rec in &recs {
            let pairs = rec.pair_count.unwrap();
            // All γ = 0.5: the reference is 0.5 per pair.
            let expected = 0.5 * pairs as f64;
            assert!((rec.paired_reference.unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_fit_recovers_lines() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn median_handles_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
