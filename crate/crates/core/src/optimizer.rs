//! Search over binary element patterns.
//!
//! Scores are linear-domain (higher is better) and only converted to dB for
//! reporting. Random draws use ChaCha8 seeded from a single `u64`
//! (`rand_chacha::ChaCha8Rng::seed_from_u64`), so reports are reproducible
//! across platforms.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::response::ReflectionModel;
use crate::solver::{scattered_field, Scene};
use crate::surface::{Pattern, SurfaceGeometry};
use crate::units::power_db;

/// Largest pattern [`exhaustive`] will enumerate.
pub const EXHAUSTIVE_MAX_BITS: usize = 24;

pub type ObjectiveError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exhaustive search is capped at {cap} bits, pattern has {bits}")]
    TooManyBits { bits: usize, cap: usize },
    #[error("objective failed: {0}")]
    Objective(#[source] ObjectiveError),
}

/// Function being maximized. Must be deterministic for a fixed pattern.
pub trait Objective {
    /// Linear-domain score of `pattern`.
    fn evaluate(&mut self, pattern: &Pattern) -> Result<f64, ObjectiveError>;
}

impl<O: Objective + ?Sized> Objective for &mut O {
    fn evaluate(&mut self, pattern: &Pattern) -> Result<f64, ObjectiveError> {
        (**self).evaluate(pattern)
    }
}

/// Adapts an infallible closure.
pub struct FnObjective<F>(pub F);

impl<F: FnMut(&Pattern) -> f64> Objective for FnObjective<F> {
    fn evaluate(&mut self, pattern: &Pattern) -> Result<f64, ObjectiveError> {
        Ok((self.0)(pattern))
    }
}

/// Received power `|E|^2` from the field solver.
pub struct ChannelObjective<'a, M: ?Sized> {
    pub geometry: SurfaceGeometry,
    pub model: &'a M,
    pub scene: Scene,
}

impl<'a, M: ReflectionModel + ?Sized> ChannelObjective<'a, M> {
    pub fn new(geometry: SurfaceGeometry, model: &'a M, scene: Scene) -> Self {
        Self {
            geometry,
            model,
            scene,
        }
    }
}

impl<M: ReflectionModel + ?Sized> Objective for ChannelObjective<'_, M> {
    fn evaluate(&mut self, pattern: &Pattern) -> Result<f64, ObjectiveError> {
        let field = scattered_field(&self.geometry, pattern, self.model, &self.scene)?;
        Ok(field.samples[0].amplitude.norm_sqr())
    }
}

/// Wraps an objective and counts evaluations.
pub struct Counted<O> {
    inner: O,
    count: u64,
}

impl<O: Objective> Counted<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, count: 0 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn into_inner(self) -> O {
        self.inner
    }

    fn eval(&mut self, pattern: &Pattern) -> Result<f64, OptimizeError> {
        self.count += 1;
        self.inner
            .evaluate(pattern)
            .map_err(OptimizeError::Objective)
    }
}

impl<O: Objective> Objective for Counted<O> {
    fn evaluate(&mut self, pattern: &Pattern) -> Result<f64, ObjectiveError> {
        self.count += 1;
        self.inner.evaluate(pattern)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    /// Pass (greedy), generation (genetic) or draw index.
    pub iteration: usize,
    pub evaluations: u64,
    pub best_score: f64,
    pub pattern_hex: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub best: Pattern,
    pub best_score: f64,
    pub evaluations: u64,
    /// Passes, generations or draws performed.
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub seed: Option<u64>,
}

impl SearchReport {
    pub fn best_db(&self) -> f64 {
        power_db(self.best_score)
    }

    /// One line per trace entry: `iteration evaluations best_db pattern_hex`.
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        match self.seed {
            Some(seed) => {
                let _ = writeln!(out, "# seed {seed}");
            }
            None => out.push_str("# seed none\n"),
        }
        out.push_str("# iteration evaluations best_db pattern_hex\n");
        for t in &self.trace {
            let _ = writeln!(
                out,
                "{} {} {:.6} {}",
                t.iteration,
                t.evaluations,
                power_db(t.best_score),
                t.pattern_hex
            );
        }
        out
    }
}

struct Tracker {
    trace: Vec<TraceEntry>,
}

impl Tracker {
    fn record(&mut self, iteration: usize, evaluations: u64, score: f64, pattern: &Pattern) {
        self.trace.push(TraceEntry {
            iteration,
            evaluations,
            best_score: score,
            pattern_hex: pattern.to_hex(),
        });
    }
}

/// Coordinate ascent: sweep elements in index order and keep a flip only if
/// it strictly improves the score. Stops after a pass without flips or after
/// `max_passes`. The trace holds the initial score, then one entry per
/// accepted flip.
pub fn greedy_flip<O: Objective>(
    objective: O,
    initial: Pattern,
    max_passes: usize,
) -> Result<SearchReport, OptimizeError> {
    if max_passes == 0 {
        return Err(OptimizeError::InvalidParameter(
            "max_passes must be at least 1".into(),
        ));
    }
    let mut obj = Counted::new(objective);
    let mut current = initial;
    let mut score = obj.eval(&current)?;
    let mut tracker = Tracker { trace: Vec::new() };
    tracker.record(0, obj.count(), score, &current);

    let mut passes = 0;
    while passes < max_passes {
        passes += 1;
        let mut flips = 0usize;
        for i in 0..current.len() {
            current.flip(i);
            let s = obj.eval(&current)?;
            if s > score {
                score = s;
                flips += 1;
                tracker.record(passes, obj.count(), score, &current);
            } else {
                current.flip(i);
            }
        }
        if flips == 0 {
            break;
        }
    }

    Ok(SearchReport {
        best: current,
        best_score: score,
        evaluations: obj.count(),
        iterations: passes,
        trace: tracker.trace,
        seed: None,
    })
}

/// Full enumeration. Pattern bit `i` is bit `i` of the enumeration counter;
/// ties keep the lowest counter value.
pub fn exhaustive<O: Objective>(
    objective: O,
    geometry: &SurfaceGeometry,
) -> Result<SearchReport, OptimizeError> {
    let bits = geometry.element_count();
    if bits > EXHAUSTIVE_MAX_BITS {
        return Err(OptimizeError::TooManyBits {
            bits,
            cap: EXHAUSTIVE_MAX_BITS,
        });
    }
    let mut obj = Counted::new(objective);
    let mut tracker = Tracker { trace: Vec::new() };
    let mut best: Option<(Pattern, f64)> = None;
    for value in 0..(1u64 << bits) {
        let p = Pattern::from_index_value(geometry, value);
        let s = obj.eval(&p)?;
        if best.as_ref().is_none_or(|(_, b)| s > *b) {
            tracker.record(value as usize, obj.count(), s, &p);
            best = Some((p, s));
        }
    }
    let (best, best_score) = best.expect("at least one pattern");
    Ok(SearchReport {
        best,
        best_score,
        evaluations: obj.count(),
        iterations: 1usize << bits,
        trace: tracker.trace,
        seed: None,
    })
}

fn random_pattern(geometry: &SurfaceGeometry, rng: &mut ChaCha8Rng) -> Pattern {
    Pattern::from_fn(geometry, |_, _| rng.random::<bool>())
}

/// `n` independent uniformly random patterns; reports the first best.
pub fn random_search<O: Objective>(
    objective: O,
    geometry: &SurfaceGeometry,
    n: usize,
    seed: u64,
) -> Result<SearchReport, OptimizeError> {
    if n == 0 {
        return Err(OptimizeError::InvalidParameter(
            "n must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obj = Counted::new(objective);
    let mut tracker = Tracker { trace: Vec::new() };
    let mut best: Option<(Pattern, f64)> = None;
    for draw in 0..n {
        let p = random_pattern(geometry, &mut rng);
        let s = obj.eval(&p)?;
        if best.as_ref().is_none_or(|(_, b)| s > *b) {
            tracker.record(draw, obj.count(), s, &p);
            best = Some((p, s));
        }
    }
    let (best, best_score) = best.expect("n >= 1");
    Ok(SearchReport {
        best,
        best_score,
        evaluations: obj.count(),
        iterations: n,
        trace: tracker.trace,
        seed: Some(seed),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneticParams {
    pub population: usize,
    pub generations: usize,
    /// Per-bit flip probability, strictly between 0 and 1.
    pub mutation_rate: f64,
}

impl GeneticParams {
    fn validate(&self) -> Result<(), OptimizeError> {
        if self.population == 0 {
            return Err(OptimizeError::InvalidParameter(
                "population must be at least 1".into(),
            ));
        }
        if self.generations == 0 {
            return Err(OptimizeError::InvalidParameter(
                "generations must be at least 1".into(),
            ));
        }
        if !(self.mutation_rate > 0.0 && self.mutation_rate < 1.0) {
            return Err(OptimizeError::InvalidParameter(format!(
                "mutation rate must be in (0, 1), got {}",
                self.mutation_rate
            )));
        }
        Ok(())
    }
}

/// Generational GA: size-2 tournaments, uniform crossover, per-bit
/// mutation, one elite carried over. Reports the best pattern ever seen.
pub fn genetic<O: Objective>(
    objective: O,
    geometry: &SurfaceGeometry,
    params: GeneticParams,
    seed: u64,
) -> Result<SearchReport, OptimizeError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obj = Counted::new(objective);
    let mut tracker = Tracker { trace: Vec::new() };

    let mut population: Vec<(Pattern, f64)> = Vec::with_capacity(params.population);
    for _ in 0..params.population {
        let p = random_pattern(geometry, &mut rng);
        let s = obj.eval(&p)?;
        population.push((p, s));
    }
    let fittest = |pop: &[(Pattern, f64)]| {
        let mut idx = 0;
        for (i, (_, s)) in pop.iter().enumerate() {
            if *s > pop[idx].1 {
                idx = i;
            }
        }
        idx
    };
    let mut best = population[fittest(&population)].clone();
    tracker.record(0, obj.count(), best.1, &best.0);

    for generation in 1..=params.generations {
        let elite = population[fittest(&population)].clone();
        let mut next = Vec::with_capacity(params.population);
        next.push(elite);
        while next.len() < params.population {
            let a = tournament(&population, &mut rng);
            let b = tournament(&population, &mut rng);
            let child_bits: Vec<bool> = population[a]
                .0
                .bits()
                .iter()
                .zip(population[b].0.bits())
                .map(|(&x, &y)| {
                    let bit = if rng.random::<bool>() { x } else { y };
                    bit ^ rng.random_bool(params.mutation_rate)
                })
                .collect();
            let child =
                Pattern::from_bits(geometry, child_bits).expect("child has the parents' length");
            let s = obj.eval(&child)?;
            next.push((child, s));
        }
        population = next;
        let gen_best = &population[fittest(&population)];
        if gen_best.1 > best.1 {
            best = gen_best.clone();
        }
        tracker.record(generation, obj.count(), best.1, &best.0);
    }

    Ok(SearchReport {
        best: best.0,
        best_score: best.1,
        evaluations: obj.count(),
        iterations: params.generations,
        trace: tracker.trace,
        seed: Some(seed),
    })
}

fn tournament(population: &[(Pattern, f64)], rng: &mut ChaCha8Rng) -> usize {
    let i = rng.random_range(0..population.len());
    let j = rng.random_range(0..population.len());
    if population[j].1 > population[i].1 {
        j
    } else {
        i
    }
}
