//! Genetic-algorithm classifier: a real-coded GA searches the weights of
//! a per-class linear scorer, minimizing the training MSE of the squashed
//! scores against one-hot targets. Elitism keeps the best chromosome, so
//! the best-fitness trace is monotone non-increasing.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, Prediction, TrainingData};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Std-dev of the Gaussian mutation step.
    pub mutation_sigma: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 50,
            generations: 10,
            crossover_rate: 0.9,
            mutation_rate: 0.05,
            mutation_sigma: 0.5,
        }
    }
}

/// Per-generation (best, average) fitness, fitness = training MSE.
pub type FitnessTrace = Vec<(f64, f64)>;

#[derive(Debug, Clone)]
pub struct GaModel {
    /// Weights + bias per class, flattened [class][feature.., bias].
    chromosome: Vec<f64>,
    n_classes: usize,
    n_features: usize,
    pub trace: FitnessTrace,
    pub best_fitness: f64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn class_score(chromosome: &[f64], class: usize, n_features: usize, x: &[f64]) -> f64 {
    let base = class * (n_features + 1);
    let w = &chromosome[base..base + n_features];
    let b = chromosome[base + n_features];
    w.iter().zip(x).map(|(&wi, &xi)| wi * xi).sum::<f64>() + b
}

/// Training MSE of the squashed per-class scores against one-hot targets.
pub fn fitness(chromosome: &[f64], data: &TrainingData) -> f64 {
    let k = data.n_classes();
    let f = data.n_features();
    let mut se = 0.0;
    for (x, &y) in data.x.iter().zip(&data.y) {
        for c in 0..k {
            let p = sigmoid(class_score(chromosome, c, f, x));
            let t = if c == y { 1.0 } else { 0.0 };
            se += (p - t) * (p - t);
        }
    }
    se / (data.n_samples() * k) as f64
}

pub fn train_ga(data: &TrainingData, params: &GaParams, rng: &mut ChaCha8Rng) -> Result<GaModel> {
    if params.population < 2 {
        return Err(Error::training("ga", "population must be >= 2"));
    }
    if params.generations < 1 {
        return Err(Error::training("ga", "generations must be >= 1"));
    }
    let len = data.n_classes() * (data.n_features() + 1);
    let normal = Normal::new(0.0, params.mutation_sigma).expect("valid sigma");

    let mut population: Vec<Vec<f64>> = (0..params.population)
        .map(|_| (0..len).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut fitnesses: Vec<f64> = population.iter().map(|c| fitness(c, data)).collect();

    let mut trace = FitnessTrace::with_capacity(params.generations);
    for _ in 0..params.generations {
        let best_idx = argmin(&fitnesses);
        let mut next = vec![population[best_idx].clone()]; // elitism of 1
        while next.len() < params.population {
            let a = tournament(&fitnesses, rng);
            let b = tournament(&fitnesses, rng);
            let (mut child1, mut child2) = if rng.random_range(0.0..1.0) < params.crossover_rate {
                uniform_crossover(&population[a], &population[b], rng)
            } else {
                (population[a].clone(), population[b].clone())
            };
            mutate(&mut child1, params.mutation_rate, &normal, rng);
            mutate(&mut child2, params.mutation_rate, &normal, rng);
            next.push(child1);
            if next.len() < params.population {
                next.push(child2);
            }
        }
        population = next;
        fitnesses = population.iter().map(|c| fitness(c, data)).collect();
        let best = fitnesses.iter().cloned().fold(f64::INFINITY, f64::min);
        let avg = fitnesses.iter().sum::<f64>() / fitnesses.len() as f64;
        trace.push((best, avg));
    }

    let best_idx = argmin(&fitnesses);
    Ok(GaModel {
        chromosome: population[best_idx].clone(),
        n_classes: data.n_classes(),
        n_features: data.n_features(),
        best_fitness: fitnesses[best_idx],
        trace,
    })
}

fn argmin(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in xs.iter().enumerate() {
        if v < xs[best] {
            best = i;
        }
    }
    best
}

/// Size-2 tournament: lower fitness (MSE) wins.
fn tournament(fitnesses: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let a = rng.random_range(0..fitnesses.len());
    let b = rng.random_range(0..fitnesses.len());
    if fitnesses[a] <= fitnesses[b] {
        a
    } else {
        b
    }
}

fn uniform_crossover(
    a: &[f64],
    b: &[f64],
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = Vec::with_capacity(a.len());
    let mut c2 = Vec::with_capacity(a.len());
    for (&ga, &gb) in a.iter().zip(b) {
        if rng.random_range(0.0..1.0) < 0.5 {
            c1.push(ga);
            c2.push(gb);
        } else {
            c1.push(gb);
            c2.push(ga);
        }
    }
    (c1, c2)
}

fn mutate(chromosome: &mut [f64], rate: f64, normal: &Normal<f64>, rng: &mut ChaCha8Rng) {
    for gene in chromosome {
        if rng.random_range(0.0..1.0) < rate {
            *gene += normal.sample(rng);
        }
    }
}

impl Model for GaModel {
    fn predict(&self, features: &[f64]) -> Prediction {
        let scores: Vec<f64> = (0..self.n_classes)
            .map(|c| sigmoid(class_score(&self.chromosome, c, self.n_features, features)))
            .collect();
        let sum: f64 = scores.iter().sum();
        let probs = if sum > 0.0 {
            scores.iter().map(|&s| s / sum).collect()
        } else {
            vec![1.0 / self.n_classes as f64; self.n_classes]
        };
        Prediction::from_probs(probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SeedSpec;

    fn separable_1d() -> TrainingData {
        TrainingData {
            x: (0..20)
                .map(|i| vec![if i < 10 { -2.0 - (i % 5) as f64 * 0.1 } else { 2.0 + (i % 5) as f64 * 0.1 }])
                .collect(),
            y: (0..20).map(|i| usize::from(i >= 10)).collect(),
            classes: vec!["Tumor".into(), "Normal".into()],
        }
    }

    #[test]
    fn zero_error_chromosome_has_zero_ish_fitness_and_is_retained() {
        let data = separable_1d();
        // large weights drive the sigmoids to 0/1 on the right sides
        let perfect = vec![-50.0, 0.0, 50.0, 0.0];
        assert!(fitness(&perfect, &data) < 1e-9);
        // elitism: the best fitness can never rise once such a chromosome
        // enters the population (checked via the monotone trace below)
    }

    #[test]
    fn converges_on_separable_toy() {
        let data = separable_1d();
        let params = GaParams {
            generations: 50,
            ..GaParams::default()
        };
        let mut rng = SeedSpec::new(0).rng_for("ga");
        let model = train_ga(&data, &params, &mut rng).unwrap();
        assert!(model.best_fitness < 1e-2, "best fitness {}", model.best_fitness);
    }

    #[test]
    fn best_fitness_trace_is_monotone_with_elitism() {
        let data = separable_1d();
        let params = GaParams {
            generations: 25,
            ..GaParams::default()
        };
        for seed in 0..20 {
            let mut rng = SeedSpec::new(seed).rng_for("ga");
            let model = train_ga(&data, &params, &mut rng).unwrap();
            assert_eq!(model.trace.len(), params.generations);
            for pair in model.trace.windows(2) {
                assert!(pair[1].0 <= pair[0].0 + 1e-12, "trace rose: {pair:?}");
            }
        }
    }

    #[test]
    fn no_variation_keeps_population_best() {
        let data = separable_1d();
        let params = GaParams {
            crossover_rate: 0.0,
            mutation_rate: 0.0,
            generations: 10,
            ..GaParams::default()
        };
        let mut rng = SeedSpec::new(4).rng_for("ga");
        let model = train_ga(&data, &params, &mut rng).unwrap();
        let first_best = model.trace[0].0;
        for &(best, _) in &model.trace {
            assert!(best <= first_best + 1e-15);
        }
    }

    #[test]
    fn rejects_tiny_population() {
        let data = separable_1d();
        let params = GaParams {
            population: 1,
            ..GaParams::default()
        };
        let mut rng = SeedSpec::new(1).rng_for("ga");
        assert!(train_ga(&data, &params, &mut rng).is_err());
    }
}
