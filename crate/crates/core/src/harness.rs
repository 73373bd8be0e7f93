//! Seeded Monte-Carlo campaigns of the three-spacecraft acquisition game.
//!
//! One realization draws hidden initial errors, then for `K` iterations:
//! measures the three misalignments on the true plant state, forms each
//! spacecraft's objective, lets every seeker pick its next reference (in
//! order S1, S2, S3) and propagates the plant over one guidance period.
//!
//! Realizations are independent. Every realization seed is a pure function of
//! `(base_seed, index)` so campaign output does not depend on the worker pool.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{plant_step, PlantError, PlantParams, PlantState, GUIDANCE_PERIOD_SECONDS};
use crate::game::{
    misalignments, objective, objective_from_misalignments, sample_initial_conditions, GameConfig,
    GameError, GroundTruth, Joint, Player,
};
use crate::seeker::{SeekerError, SeekerParams, SeekerState};
use crate::vec4::StateVec4;

/// Initial box half-width is `INITIAL_BOX_GAIN * (1 − h^i(0))`.
pub const INITIAL_BOX_GAIN: f64 = 0.3;

pub const DEFAULT_HISTOGRAM_BINS: usize = 30;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Seeker(#[from] SeekerError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error("at least one realization is required")]
    NoRealizations,
    #[error("threshold must be strictly positive, got {0}")]
    BadThreshold(f64),
    #[error("histogram needs at least one bin")]
    NoBins,
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum TStarError {
    #[error("no realizations to evaluate")]
    Empty,
    #[error("{} realization(s) never reached the threshold; seeds: {seeds:?}", seeds.len())]
    NonConverged { seeds: Vec<u64> },
}

/// Everything a realization needs besides its seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seeker: SeekerParams,
    pub game: GameConfig,
    pub plant: PlantParams,
    pub iterations: usize,
    pub threshold: f64,
    pub ideal_tracking: bool,
    pub histogram_bins: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        let game = GameConfig::default();
        Self {
            seeker: SeekerParams {
                b_final: game.b,
                ..SeekerParams::default()
            },
            game,
            plant: PlantParams::default(),
            iterations: 5000,
            threshold: 1.0,
            ideal_tracking: false,
            histogram_bins: DEFAULT_HISTOGRAM_BINS,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.seeker.validate()?;
        self.game.validate()?;
        self.plant.validate()?;
        if self.iterations == 0 {
            return Err(HarnessError::NoIterations);
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(HarnessError::BadThreshold(self.threshold));
        }
        if self.histogram_bins == 0 {
            return Err(HarnessError::NoBins);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationResult {
    pub index: usize,
    pub seed: u64,
    pub truth: GroundTruth,
    /// `(y12, y13, y23)` in μrad measured at iterations `1..=K`.
    pub y: Vec<[f64; 3]>,
    /// `(h1, h2, h3)` at the same iterations.
    pub h: Vec<[f64; 3]>,
    /// First iteration (1-based) whose largest misalignment is below the
    /// threshold.
    pub converged_iter: Option<usize>,
}

impl RealizationResult {
    /// Misalignments at 1-based iteration `k`.
    pub fn y_at(&self, k: usize) -> [f64; 3] {
        self.y[k - 1]
    }

    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        first_below(&self.y, threshold)
    }
}

fn first_below(y: &[[f64; 3]], threshold: f64) -> Option<usize> {
    y.iter()
        .position(|v| v.iter().fold(0.0f64, |m, &x| m.max(x)) < threshold)
        .map(|i| i + 1)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of realization `index` within a campaign.
pub fn realization_seed(base_seed: u64, index: usize) -> u64 {
    splitmix64(base_seed ^ splitmix64(index as u64))
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Runs one realization with initial conditions drawn from `seed`.
pub fn run_realization(seed: u64, scenario: &Scenario) -> RealizationResult {
    let truth = sample_initial_conditions(&mut stream(seed, 0), scenario.game.uc_radius);
    run_realization_with_truth(seed, truth, scenario)
}

/// Runs one realization against the given hidden initial errors. The seeker
/// perturbations are still drawn from `seed`.
pub fn run_realization_with_truth(
    seed: u64,
    truth: GroundTruth,
    scenario: &Scenario,
) -> RealizationResult {
    let game = &scenario.game;
    let mut u: Joint = [StateVec4::ZERO; 3];

    let params: [SeekerParams; 3] = Player::ALL.map(|p| {
        let h0 = objective(p, &u, &truth, game);
        let b0 = (INITIAL_BOX_GAIN * (1.0 - h0)).clamp(0.0, scenario.seeker.b_final);
        scenario.seeker.with_b0(b0)
    });
    let mut rngs: [ChaCha8Rng; 3] = std::array::from_fn(|i| stream(seed, 1 + i as u64));
    let mut seekers = [SeekerState::new(); 3];
    let mut plant = PlantState::at_rest();

    let k_max = scenario.iterations;
    let mut ys = Vec::with_capacity(k_max);
    let mut hs = Vec::with_capacity(k_max);
    for _ in 0..k_max {
        plant = if scenario.ideal_tracking {
            PlantState {
                delta_x: u,
                t: plant.t + 1,
            }
        } else {
            plant_step(&plant, &u, &scenario.plant)
        };
        let y = misalignments(&plant.delta_x, &truth);
        let h = Player::ALL.map(|p| objective_from_misalignments(p, &y, game.w));
        ys.push(y);
        hs.push(h);
        for p in Player::ALL {
            let i = p.index();
            u[i] = seekers[i].step(h[i], &params[i], &mut rngs[i]);
        }
    }

    RealizationResult {
        index: 0,
        seed,
        truth,
        converged_iter: first_below(&ys, scenario.threshold),
        y: ys,
        h: hs,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileCurves {
    pub p10: Vec<[f64; 3]>,
    pub p50: Vec<[f64; 3]>,
    pub p90: Vec<[f64; 3]>,
}

/// Per-pair histogram of misalignments over `[0, upper)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub iteration: usize,
    pub lower: f64,
    pub upper: f64,
    pub bin_width: f64,
    /// `counts[pair][bin]`, pairs ordered y12, y13, y23.
    pub counts: [Vec<u64>; 3],
    /// Values at or above `upper`.
    pub overflow: [u64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub n_realizations: usize,
    pub iterations: usize,
    pub threshold_murad: f64,
    pub t_star_iter: Option<usize>,
    pub t_star_minutes: Option<f64>,
    pub mean_at_t_star: Option<[f64; 3]>,
    pub percentiles: PercentileCurves,
    pub histogram: Option<Histogram>,
    pub non_converged_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub results: Vec<RealizationResult>,
    pub summary: CampaignSummary,
}

/// Runs `n` realizations on `workers` threads (0 lets rayon decide).
pub fn run_campaign(
    n: usize,
    base_seed: u64,
    scenario: &Scenario,
    workers: usize,
) -> Result<Campaign, HarnessError> {
    scenario.validate()?;
    if n == 0 {
        return Err(HarnessError::NoRealizations);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let results: Vec<RealizationResult> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|index| RealizationResult {
                index,
                ..run_realization(realization_seed(base_seed, index), scenario)
            })
            .collect()
    });

    let t_star = match compute_t_star(&results, scenario.threshold) {
        Ok(t) => Some(t),
        Err(TStarError::NonConverged { seeds }) => {
            log::warn!(
                "{} of {n} realizations did not reach {} μrad within {} iterations; \
                 they are excluded from t*",
                seeds.len(),
                scenario.threshold,
                scenario.iterations
            );
            t_star_over_converged(&results, scenario.threshold)
        }
        Err(TStarError::Empty) => None,
    };
    let summary = summarize(&results, t_star, scenario.threshold, scenario.histogram_bins);
    Ok(Campaign { results, summary })
}

/// Iteration at which the slowest realization first has every misalignment
/// below `threshold`.
pub fn compute_t_star(results: &[RealizationResult], threshold: f64) -> Result<usize, TStarError> {
    if results.is_empty() {
        return Err(TStarError::Empty);
    }
    let failed = non_converged_seeds(results, threshold);
    if !failed.is_empty() {
        return Err(TStarError::NonConverged { seeds: failed });
    }
    Ok(t_star_over_converged(results, threshold).expect("all realizations converged"))
}

/// Like [`compute_t_star`] but ignoring realizations that never converge.
pub fn t_star_over_converged(results: &[RealizationResult], threshold: f64) -> Option<usize> {
    results.iter().filter_map(|r| r.first_below(threshold)).max()
}

pub fn non_converged_seeds(results: &[RealizationResult], threshold: f64) -> Vec<u64> {
    results
        .iter()
        .filter(|r| r.first_below(threshold).is_none())
        .map(|r| r.seed)
        .collect()
}

/// Nearest-rank percentile of an ascending slice, `p` in `(0, 100]`.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Per-pair mean misalignment at 1-based iteration `k`.
pub fn mean_at(results: &[RealizationResult], k: usize) -> [f64; 3] {
    let n = results.len() as f64;
    let mut sum = [0.0; 3];
    for r in results {
        for (s, y) in sum.iter_mut().zip(r.y_at(k)) {
            *s += y;
        }
    }
    sum.map(|s| s / n)
}

fn percentile_curves(results: &[RealizationResult]) -> PercentileCurves {
    let k_max = results.iter().map(|r| r.y.len()).min().unwrap_or(0);
    let rows: Vec<[[f64; 3]; 3]> = (0..k_max)
        .into_par_iter()
        .map(|k| {
            let mut out = [[0.0; 3]; 3];
            let mut column = Vec::with_capacity(results.len());
            for pair in 0..3 {
                column.clear();
                column.extend(results.iter().map(|r| r.y[k][pair]));
                column.sort_by(f64::total_cmp);
                for (slot, p) in [10.0, 50.0, 90.0].into_iter().enumerate() {
                    out[slot][pair] = nearest_rank(&column, p);
                }
            }
            out
        })
        .collect();
    PercentileCurves {
        p10: rows.iter().map(|r| r[0]).collect(),
        p50: rows.iter().map(|r| r[1]).collect(),
        p90: rows.iter().map(|r| r[2]).collect(),
    }
}

fn histogram(results: &[RealizationResult], k: usize, upper: f64, bins: usize) -> Histogram {
    let bin_width = upper / bins as f64;
    let mut counts: [Vec<u64>; 3] = std::array::from_fn(|_| vec![0; bins]);
    let mut overflow = [0; 3];
    for r in results {
        for (pair, y) in r.y_at(k).into_iter().enumerate() {
            if y >= upper {
                overflow[pair] += 1;
            } else {
                let bin = ((y / upper * bins as f64) as usize).min(bins - 1);
                counts[pair][bin] += 1;
            }
        }
    }
    Histogram {
        iteration: k,
        lower: 0.0,
        upper,
        bin_width,
        counts,
        overflow,
    }
}

/// Aggregates a campaign. `t_star` is a 1-based iteration index.
pub fn summarize(
    results: &[RealizationResult],
    t_star: Option<usize>,
    threshold: f64,
    bins: usize,
) -> CampaignSummary {
    let iterations = results.first().map_or(0, |r| r.y.len());
    let t_star = t_star.filter(|&t| t >= 1 && t <= iterations);
    CampaignSummary {
        n_realizations: results.len(),
        iterations,
        threshold_murad: threshold,
        t_star_iter: t_star,
        t_star_minutes: t_star.map(|t| t as f64 * GUIDANCE_PERIOD_SECONDS / 60.0),
        mean_at_t_star: t_star.map(|t| mean_at(results, t)),
        percentiles: percentile_curves(results),
        histogram: t_star.map(|t| histogram(results, t, threshold, bins.max(1))),
        non_converged_seeds: non_converged_seeds(results, threshold),
    }
}
