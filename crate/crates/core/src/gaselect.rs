//! Wrapper feature selection with a generational genetic algorithm.
//!
//! A chromosome is a bit mask over the candidate features. Its fitness is the
//! pooled stratified k-fold accuracy of Gaussian Naive Bayes trained on the
//! selected columns. Reproduction uses tournament selection, two-point
//! crossover and flip-bit mutation, with elitism.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataio::{stratified_kfold, DataTable, Fold};
use crate::error::{Error, Result};
use crate::exec;
use crate::learners::{Classifier, GaussianNb};
use crate::seeds;

/// Feature mask; bit `i` set means feature `i` is selected.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chromosome {
    bits: Vec<bool>,
}

impl Chromosome {
    pub fn new(bits: Vec<bool>) -> Self {
        Chromosome { bits }
    }

    pub fn ones(n: usize) -> Self {
        Chromosome { bits: vec![true; n] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Indices of the selected features, ascending.
    pub fn selected(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    /// Sets one uniformly chosen bit when no bit is set.
    fn repair(&mut self, rng: &mut impl Rng) {
        if !self.bits.is_empty() && self.popcount() == 0 {
            let i = rng.gen_range(0..self.bits.len());
            self.bits[i] = true;
        }
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Chromosome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Config(format!("invalid mask character `{other}`"))),
            })
            .collect::<Result<Vec<bool>>>()
            .map(Chromosome::new)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    /// Per-bit flip probability; `None` means `1 / n_features`.
    pub mutation_bit_prob: Option<f64>,
    pub tournament_size: usize,
    pub elitism: usize,
    pub fitness_folds: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 50,
            generations: 30,
            crossover_prob: 0.8,
            mutation_bit_prob: None,
            tournament_size: 3,
            elitism: 1,
            fitness_folds: 5,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        if self.population_size < 2 {
            return fail("population_size must be >= 2");
        }
        if self.elitism >= self.population_size {
            return fail("elitism must be < population_size");
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return fail("tournament_size must be in 1..=population_size");
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return fail("crossover_prob must be in [0, 1]");
        }
        if self.mutation_bit_prob.is_some_and(|p| !(0.0..=1.0).contains(&p)) {
            return fail("mutation_bit_prob must be in [0, 1]");
        }
        if self.fitness_folds < 2 {
            return fail("fitness_folds must be >= 2");
        }
        Ok(())
    }
}

/// Random initial population: each bit set with probability 1/2, empty masks
/// repaired.
pub fn init_population(n_features: usize, population_size: usize, seed: u64) -> Vec<Chromosome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..population_size)
        .map(|_| {
            let mut c = Chromosome::new((0..n_features).map(|_| rng.gen_bool(0.5)).collect());
            c.repair(&mut rng);
            c
        })
        .collect()
}

/// Restricts `table` to the features selected by `chrom`, in column order.
pub fn apply_mask(table: &DataTable, chrom: &Chromosome) -> Result<DataTable> {
    if chrom.len() != table.n_features() {
        return Err(Error::LengthMismatch(format!(
            "mask of length {} for {} features",
            chrom.len(),
            table.n_features()
        )));
    }
    Ok(table.select_features(&chrom.selected()))
}

fn nb_pooled_accuracy(table: &DataTable, folds: &[Fold]) -> Result<f64> {
    let mut hits = 0usize;
    let mut total = 0usize;
    for fold in folds {
        let model = GaussianNb::fit(&table.select_rows(&fold.train))?;
        hits += fold
            .test
            .iter()
            .filter(|&&i| model.predict(table.row(i)) == table.labels()[i])
            .count();
        total += fold.test.len();
    }
    Ok(if total == 0 { 0.0 } else { hits as f64 / total as f64 })
}

/// Naive Bayes k-fold accuracy of the masked table; 0 for an empty mask.
pub fn fitness(chrom: &Chromosome, table: &DataTable, folds: usize, seed: u64) -> Result<f64> {
    let masked = apply_mask(table, chrom)?;
    if chrom.popcount() == 0 {
        return Ok(0.0);
    }
    let splits = stratified_kfold(table.labels(), folds, seed)?;
    nb_pooled_accuracy(&masked, &splits)
}

/// Fitness with a fixed fold split and a memo keyed by the mask bits.
pub struct FitnessEvaluator<'a> {
    table: &'a DataTable,
    folds: Vec<Fold>,
    cache: Mutex<HashMap<Chromosome, f64>>,
    evaluations: usize,
}

impl<'a> FitnessEvaluator<'a> {
    pub fn new(table: &'a DataTable, folds: usize, seed: u64) -> Result<Self> {
        Ok(FitnessEvaluator {
            table,
            folds: stratified_kfold(table.labels(), folds, seed)?,
            cache: Mutex::new(HashMap::new()),
            evaluations: 0,
        })
    }

    /// Number of non-cached, non-empty evaluations performed so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn compute(&self, chrom: &Chromosome) -> Result<f64> {
        if chrom.popcount() == 0 {
            return Ok(0.0);
        }
        nb_pooled_accuracy(&apply_mask(self.table, chrom)?, &self.folds)
    }

    /// Scores a whole population; uncached masks are evaluated in parallel.
    pub fn evaluate_all(&mut self, population: &[Chromosome]) -> Result<Vec<f64>> {
        let pending: Vec<Chromosome> = {
            let cache = self.cache.lock().unwrap();
            let mut seen = std::collections::HashSet::new();
            population
                .iter()
                .filter(|c| c.popcount() > 0 && !cache.contains_key(*c) && seen.insert(*c))
                .cloned()
                .collect()
        };
        let scores = exec::par_map(&pending, |c| self.compute(c));
        let mut cache = self.cache.lock().unwrap();
        for (c, s) in pending.into_iter().zip(scores) {
            cache.insert(c, s?);
            self.evaluations += 1;
        }
        Ok(population
            .iter()
            .map(|c| cache.get(c).copied().unwrap_or(0.0))
            .collect())
    }

    pub fn evaluate(&mut self, chrom: &Chromosome) -> Result<f64> {
        Ok(self.evaluate_all(std::slice::from_ref(chrom))?[0])
    }
}

/// Index of the fittest of `tournament_size` uniform draws (with
/// replacement); equal fitness goes to the lower population index.
pub fn tournament_select_index(fitnesses: &[f64], tournament_size: usize, rng: &mut impl Rng) -> usize {
    let mut best = rng.gen_range(0..fitnesses.len());
    for _ in 1..tournament_size {
        let i = rng.gen_range(0..fitnesses.len());
        if fitnesses[i] > fitnesses[best] || (fitnesses[i] == fitnesses[best] && i < best) {
            best = i;
        }
    }
    best
}

pub fn tournament_select(
    population: &[Chromosome],
    fitnesses: &[f64],
    tournament_size: usize,
    rng: &mut impl Rng,
) -> Chromosome {
    population[tournament_select_index(fitnesses, tournament_size, rng)].clone()
}

/// Swaps the segment `[a, b)` between two parents.
pub fn crossover_at(p1: &Chromosome, p2: &Chromosome, a: usize, b: usize) -> (Chromosome, Chromosome) {
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    c1.bits[a..b].copy_from_slice(&p2.bits[a..b]);
    c2.bits[a..b].copy_from_slice(&p1.bits[a..b]);
    (c1, c2)
}

/// Two-point crossover with cut points `a < b` drawn uniformly from
/// `0..=len`.
pub fn two_point_crossover(
    p1: &Chromosome,
    p2: &Chromosome,
    rng: &mut impl Rng,
) -> Result<(Chromosome, Chromosome)> {
    if p1.len() != p2.len() {
        return Err(Error::LengthMismatch(format!(
            "parents of length {} and {}",
            p1.len(),
            p2.len()
        )));
    }
    if p1.len() < 2 {
        return Err(Error::LengthMismatch("crossover needs length >= 2".into()));
    }
    let cuts = sample(rng, p1.len() + 1, 2);
    let (a, b) = (cuts.index(0).min(cuts.index(1)), cuts.index(0).max(cuts.index(1)));
    Ok(crossover_at(p1, p2, a, b))
}

/// Flips each bit independently with probability `prob`, then repairs an
/// empty result.
pub fn flip_bit_mutation(chrom: &Chromosome, prob: f64, rng: &mut impl Rng) -> Chromosome {
    let mut out = chrom.clone();
    for b in out.bits.iter_mut() {
        if rng.gen_bool(prob) {
            *b = !*b;
        }
    }
    out.repair(rng);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaRunResult {
    pub best_chromosome: Chromosome,
    pub best_fitness: f64,
    /// Initial population plus one entry per generation.
    pub history: Vec<GenerationStats>,
    pub evaluations: usize,
}

/// JSON form of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResultDocument {
    pub best_mask: String,
    pub selected_features: Vec<String>,
    pub best_fitness: f64,
    pub history: Vec<GenerationStats>,
    pub evaluations: usize,
}

impl GaRunResult {
    pub fn to_document(&self, table: &DataTable) -> GaResultDocument {
        GaResultDocument {
            best_mask: self.best_chromosome.to_string(),
            selected_features: self
                .best_chromosome
                .selected()
                .into_iter()
                .map(|i| table.features()[i].name.clone())
                .collect(),
            best_fitness: self.best_fitness,
            history: self.history.clone(),
            evaluations: self.evaluations,
        }
    }
}

/// `a` ranks above `b`: higher fitness, then fewer selected features.
fn better(fa: f64, a: &Chromosome, fb: f64, b: &Chromosome) -> bool {
    fa > fb || (fa == fb && a.popcount() < b.popcount())
}

fn stats(generation: usize, fits: &[f64]) -> GenerationStats {
    GenerationStats {
        generation,
        best: fits.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: fits.iter().sum::<f64>() / fits.len() as f64,
    }
}

/// Runs the generational loop and returns the best mask ever evaluated.
///
/// Offspring pair `s` of generation `g` draws from its own stream
/// `derive2(seed, g, s)`, so the run is identical for any worker count.
pub fn run_ga(table: &DataTable, config: &GaConfig) -> Result<GaRunResult> {
    config.validate()?;
    let n = table.n_features();
    if n == 0 {
        return Err(Error::Empty("no candidate features".into()));
    }
    let mutation_prob = config.mutation_bit_prob.unwrap_or(1.0 / n as f64);
    let seed = config.seed;
    let mut evaluator =
        FitnessEvaluator::new(table, config.fitness_folds, seeds::derive_tag(seed, "fitness-folds"))?;

    let mut population = init_population(n, config.population_size, seeds::derive_tag(seed, "init"));
    let mut fits = evaluator.evaluate_all(&population)?;
    let mut history = vec![stats(0, &fits)];

    let mut best_idx = 0;
    for i in 1..population.len() {
        if better(fits[i], &population[i], fits[best_idx], &population[best_idx]) {
            best_idx = i;
        }
    }
    let mut best = (population[best_idx].clone(), fits[best_idx]);

    for g in 1..=config.generations {
        let mut ranking: Vec<usize> = (0..population.len()).collect();
        ranking.sort_by(|&a, &b| {
            fits[b]
                .total_cmp(&fits[a])
                .then(population[a].popcount().cmp(&population[b].popcount()))
                .then(a.cmp(&b))
        });
        let mut next: Vec<Chromosome> = ranking[..config.elitism]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        let mut slot = 0u64;
        while next.len() < config.population_size {
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive2(seed, g as u64, slot));
            slot += 1;
            let p1 = tournament_select(&population, &fits, config.tournament_size, &mut rng);
            let p2 = tournament_select(&population, &fits, config.tournament_size, &mut rng);
            let (c1, c2) = if n >= 2 && rng.gen_bool(config.crossover_prob) {
                two_point_crossover(&p1, &p2, &mut rng)?
            } else {
                (p1, p2)
            };
            next.push(flip_bit_mutation(&c1, mutation_prob, &mut rng));
            if next.len() < config.population_size {
                next.push(flip_bit_mutation(&c2, mutation_prob, &mut rng));
            }
        }
        population = next;
        fits = evaluator.evaluate_all(&population)?;
        for (c, &f) in population.iter().zip(&fits) {
            if better(f, c, best.1, &best.0) {
                best = (c.clone(), f);
            }
        }
        history.push(stats(g, &fits));
    }

    Ok(GaRunResult {
        best_chromosome: best.0,
        best_fitness: best.1,
        history,
        evaluations: evaluator.evaluations(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    fn mask(s: &str) -> Chromosome {
        s.parse().unwrap()
    }

    #[test]
    fn init_shapes_and_determinism() {
        let pop = init_population(42, 10, 7);
        assert_eq!(pop.len(), 10);
        assert!(pop.iter().all(|c| c.len() == 42 && c.popcount() > 0));
        assert_eq!(pop, init_population(42, 10, 7));
        // a single feature forces the repair path often
        assert!(init_population(1, 200, 3).iter().all(|c| c.popcount() == 1));
    }

    #[test]
    fn init_bit_fraction_near_half() {
        let pop = init_population(20, 10_000, 11);
        let ones: usize = pop.iter().map(Chromosome::popcount).sum();
        let frac = ones as f64 / (20.0 * 10_000.0);
        assert!((frac - 0.5).abs() <= 0.02, "fraction {frac}");
    }

    #[test]
    fn crossover_fixed_cuts() {
        let (a, b) = crossover_at(&mask("11111"), &mask("00000"), 1, 3);
        assert_eq!((a.to_string(), b.to_string()), ("10011".into(), "01100".into()));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = mask("10110");
        assert_eq!(two_point_crossover(&p, &p, &mut rng).unwrap(), (p.clone(), p.clone()));
        assert!(two_point_crossover(&p, &mask("101"), &mut rng).is_err());
    }

    #[test]
    fn mutation_edge_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = mask("10110");
        assert_eq!(flip_bit_mutation(&c, 0.0, &mut rng), c);
        assert_eq!(flip_bit_mutation(&c, 1.0, &mut rng).to_string(), "01001");
        let repaired = flip_bit_mutation(&mask("111"), 1.0, &mut rng);
        assert_eq!(repaired.popcount(), 1);
    }

    #[test]
    fn mutation_flip_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = Chromosome::new(vec![true; 40]);
        let prob = 0.1;
        let flips: usize = (0..10_000)
            .map(|_| {
                let m = flip_bit_mutation(&c, prob, &mut rng);
                c.bits().iter().zip(m.bits()).filter(|(a, b)| a != b).count()
            })
            .sum();
        let mean = flips as f64 / 10_000.0;
        let expected = prob * 40.0;
        assert!((mean - expected).abs() <= 0.05 * expected, "mean flips {mean}");
    }

    #[test]
    fn tournament_rules() {
        let fits = [0.1, 0.9, 0.3];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // large tournaments almost surely contain index 1
        for _ in 0..50 {
            assert_eq!(tournament_select_index(&fits, 64, &mut rng), 1);
        }
        let flat = [0.5; 6];
        for _ in 0..50 {
            let mut a = ChaCha8Rng::seed_from_u64(9);
            let mut b = a.clone();
            let chosen = tournament_select_index(&flat, 3, &mut a);
            let drawn: Vec<usize> = (0..3).map(|_| b.gen_range(0..6)).collect();
            assert_eq!(chosen, *drawn.iter().min().unwrap());
        }
        let mut counts = [0usize; 4];
        for _ in 0..4000 {
            counts[tournament_select_index(&[1.0, 2.0, 3.0, 4.0], 1, &mut rng)] += 1;
        }
        assert!(counts.iter().all(|&c| c > 800 && c < 1200), "{counts:?}");
    }

    #[test]
    fn apply_mask_cases() {
        let t = DataTable::from_rows(
            &["a", "b", "c"],
            &[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]],
            vec![0, 0],
            vec!["x".into()],
        )
        .unwrap();
        assert_eq!(apply_mask(&t, &Chromosome::ones(3)).unwrap(), t);
        let m = apply_mask(&t, &mask("101")).unwrap();
        let names: Vec<_> = m.features().iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["a", "c"]);
        assert_eq!(m.row(1), [4.0, 6.0]);
        assert!(apply_mask(&t, &mask("10")).is_err());
    }

    #[test]
    fn fitness_cases() {
        let t = synthetic::label_copy_table(200, 6, 3, 5);
        assert_eq!(fitness(&mask("000000"), &t, 5, 1).unwrap(), 0.0);
        let only3 = fitness(&mask("000100"), &t, 5, 1).unwrap();
        assert!(only3 >= 0.99, "fitness {only3}");
        let mut ev = FitnessEvaluator::new(&t, 5, 1).unwrap();
        let c = mask("110011");
        let direct = fitness(&c, &t, 5, 1).unwrap();
        assert_eq!(ev.evaluate(&c).unwrap().to_bits(), direct.to_bits());
        assert_eq!(ev.evaluate(&c).unwrap().to_bits(), direct.to_bits());
        assert_eq!(ev.evaluations(), 1);
        assert!((0.0..=1.0).contains(&direct));
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        for bad in [
            GaConfig { population_size: 1, ..Default::default() },
            GaConfig { elitism: 50, ..Default::default() },
            GaConfig { tournament_size: 0, ..Default::default() },
            GaConfig { crossover_prob: 1.5, ..Default::default() },
            GaConfig { mutation_bit_prob: Some(-0.1), ..Default::default() },
            GaConfig { fitness_folds: 1, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn small_run_properties() {
        let t = synthetic::majority_table(300, 5, 5, 4);
        let cfg = GaConfig {
            population_size: 12,
            generations: 6,
            seed: 21,
            ..Default::default()
        };
        let a = run_ga(&t, &cfg).unwrap();
        let b = run_ga(&t, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.history.len(), 7);
        assert!(a.history.windows(2).all(|w| w[1].best >= w[0].best));
        assert!(a.evaluations <= 12 * 7);
        assert!(a.best_chromosome.popcount() >= 1);
        assert_eq!(a.best_fitness, a.history.iter().map(|h| h.best).fold(0.0, f64::max));
    }
}
