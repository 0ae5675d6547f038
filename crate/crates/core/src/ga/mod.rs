//! Genetic algorithm over arrangement/membership chromosomes.

mod chromosome;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use chromosome::{crossover, crossover_region, decode, mutate, Chromosome};

use crate::config::ConfigError;
use crate::instance::{Profit, SdmsopInstance};
use crate::model::{RoutePricer, Solution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub mutation_rate: f64,
    /// Probability that an initial membership bit is set.
    pub one_rate: f64,
    /// Generations without a better incumbent before stopping.
    pub stall_limit: usize,
    pub rng_seed: u64,
    pub max_generations: Option<usize>,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    /// Breed and score each generation in parallel. Every child then draws
    /// from its own RNG stream, so results differ from sequential mode but
    /// do not depend on the thread count.
    pub parallel: bool,
    pub dp_cache: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 200,
            mutation_rate: 0.05,
            one_rate: 0.5,
            stall_limit: 50,
            rng_seed: 0,
            max_generations: None,
            time_limit: None,
            parallel: false,
            dp_cache: false,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &'static str, reason: &str| {
            Err(ConfigError::Invalid {
                field,
                reason: reason.to_string(),
            })
        };
        if self.population_size < 2 {
            return bad("population_size", "must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation_rate", "must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.one_rate) {
            return bad("one_rate", "must be in [0, 1]");
        }
        if self.stall_limit == 0 {
            return bad("stall_limit", "must be at least 1");
        }
        if self.time_limit.is_some_and(|t| t.is_nan() || t < 0.0) {
            return bad("time_limit", "must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaHistoryRow {
    pub generation: usize,
    pub incumbent_profit: Profit,
    pub generation_best: Profit,
    pub mean_fitness: f64,
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Solution,
    pub profit: Profit,
    pub history: Vec<GaHistoryRow>,
    pub generations: usize,
    pub timed_out: bool,
}

/// Decodes and scores: total profit when every route fits the budget,
/// otherwise 0.
pub fn fitness(c: &Chromosome, inst: &SdmsopInstance) -> Profit {
    fitness_with(&mut RoutePricer::new(false), c, inst)
}

fn fitness_with(pricer: &mut RoutePricer, c: &Chromosome, inst: &SdmsopInstance) -> Profit {
    let routes = decode(c, inst);
    let mut profit = 0;
    for route in &routes {
        if pricer.cost(inst, route) > inst.budget() {
            return 0;
        }
        profit += route.iter().map(|&q| inst.profit(q)).sum::<Profit>();
    }
    profit
}

/// Fitness-proportional sampler over a fixed fitness vector.
#[derive(Debug, Clone)]
pub struct RouletteWheel {
    cumulative: Vec<u64>,
}

impl RouletteWheel {
    pub fn new(fitnesses: &[Profit]) -> Self {
        let mut acc = 0;
        let cumulative = fitnesses
            .iter()
            .map(|&f| {
                acc += f;
                acc
            })
            .collect();
        Self { cumulative }
    }

    /// Index drawn with probability `f_i / sum(f)`, uniformly when the sum
    /// is zero.
    pub fn spin(&self, rng: &mut impl Rng) -> usize {
        let total = self.cumulative.last().copied().unwrap_or(0);
        if total == 0 {
            return rng.gen_range(0..self.cumulative.len());
        }
        let r = rng.gen_range(0..total);
        self.cumulative.partition_point(|&c| c <= r)
    }
}

/// Parent pair by roulette wheel. Both parents are drawn independently.
pub fn select(fitnesses: &[Profit], rng: &mut impl Rng) -> (usize, usize) {
    let wheel = RouletteWheel::new(fitnesses);
    (wheel.spin(rng), wheel.spin(rng))
}

fn breed(
    pop: &[Chromosome],
    wheel: &RouletteWheel,
    rate: f64,
    rng: &mut impl Rng,
) -> Chromosome {
    let (a, b) = (wheel.spin(rng), wheel.spin(rng));
    let mut child = crossover(&pop[a], &pop[b], rng);
    mutate(&mut child, rate, rng);
    child
}

pub fn run_ga(inst: &SdmsopInstance, cfg: &GaConfig) -> GaOutcome {
    let start = Instant::now();
    let deadline = cfg.time_limit.map(|s| start + Duration::from_secs_f64(s));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut pricer = RoutePricer::new(cfg.dp_cache);
    let m = inst.travelers();

    let mut pop: Vec<Chromosome> = (0..cfg.population_size)
        .map(|_| Chromosome::random(inst, cfg.one_rate, &mut rng))
        .collect();
    let mut fit: Vec<Profit> = pop.iter().map(|c| fitness_with(&mut pricer, c, inst)).collect();

    let mut best_profit = 0;
    let mut best_routes = vec![Vec::new(); m];
    let mut history = Vec::new();
    let mut stall = 0;
    let mut generation = 0;
    let mut timed_out = false;
    loop {
        debug_assert!(pop.iter().all(|c| c.is_well_formed(inst)));
        let elite = (0..pop.len()).fold(0, |b, i| if fit[i] > fit[b] { i } else { b });
        if fit[elite] > best_profit {
            best_profit = fit[elite];
            best_routes = decode(&pop[elite], inst);
            stall = 0;
        } else if generation > 0 {
            stall += 1;
        }
        history.push(GaHistoryRow {
            generation,
            incumbent_profit: best_profit,
            generation_best: fit[elite],
            mean_fitness: fit.iter().sum::<Profit>() as f64 / fit.len() as f64,
        });
        if stall >= cfg.stall_limit || cfg.max_generations.is_some_and(|g| generation >= g) {
            break;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out = true;
            break;
        }
        generation += 1;

        let wheel = RouletteWheel::new(&fit);
        let children: Vec<(Chromosome, Profit)> = if cfg.parallel {
            let gen = generation as u64;
            (1..cfg.population_size)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
                    rng.set_stream((gen << 32) | i as u64);
                    let child = breed(&pop, &wheel, cfg.mutation_rate, &mut rng);
                    let f = fitness_with(&mut RoutePricer::new(false), &child, inst);
                    (child, f)
                })
                .collect()
        } else {
            (1..cfg.population_size)
                .map(|_| {
                    let child = breed(&pop, &wheel, cfg.mutation_rate, &mut rng);
                    let f = fitness_with(&mut pricer, &child, inst);
                    (child, f)
                })
                .collect()
        };
        let elite_c = pop.swap_remove(elite);
        let elite_f = fit[elite];
        pop.clear();
        fit.clear();
        pop.push(elite_c);
        fit.push(elite_f);
        for (c, f) in children {
            pop.push(c);
            fit.push(f);
        }
    }

    let best = Solution::from_routes(inst, best_routes).expect("decoded routes are well formed");
    GaOutcome {
        best,
        profit: best_profit,
        history,
        generations: generation,
        timed_out,
    }
}
