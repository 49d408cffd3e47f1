//! Multinomial logistic regression (maximum entropy) over sparse features.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::model::Language;
use crate::textproc::{SparseVector, Vocabulary};

/// Binds feature indices to their meaning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureSpace {
    /// TF-IDF over a fitted vocabulary.
    Tfidf { vocabulary: Vocabulary, language: Language },
    /// Stylometric scalars followed by hashed character n-gram buckets.
    Style { scalars: Vec<String>, ngram_buckets: u32 },
    /// Dense, individually named features.
    Named { names: Vec<String> },
}

impl FeatureSpace {
    pub fn dim(&self) -> usize {
        match self {
            FeatureSpace::Tfidf { vocabulary, .. } => vocabulary.len(),
            FeatureSpace::Style { scalars, ngram_buckets } => scalars.len() + *ngram_buckets as usize,
            FeatureSpace::Named { names } => names.len(),
        }
    }
}

/// Trained (or hand-built) linear classifier: `softmax(W x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct LinearModel {
    classes: Vec<String>,
    /// Row-major `classes × dim`.
    weights: Vec<f64>,
    bias: Vec<f64>,
    feature_space: FeatureSpace,
    fitted: bool,
}

/// On-disk layout: weights are stored as `(flat index, value)` pairs of the
/// non-zero entries, since hashed feature spaces are mostly empty.
#[derive(Serialize, Deserialize)]
struct ModelRepr {
    classes: Vec<String>,
    feature_space: FeatureSpace,
    dim: usize,
    weights: Vec<(u64, f64)>,
    bias: Vec<f64>,
    fitted: bool,
}

impl From<LinearModel> for ModelRepr {
    fn from(m: LinearModel) -> Self {
        ModelRepr {
            dim: m.feature_space.dim(),
            weights: m
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| w.to_bits() != 0)
                .map(|(i, w)| (i as u64, *w))
                .collect(),
            classes: m.classes,
            bias: m.bias,
            feature_space: m.feature_space,
            fitted: m.fitted,
        }
    }
}

impl TryFrom<ModelRepr> for LinearModel {
    type Error = String;

    fn try_from(r: ModelRepr) -> Result<Self, Self::Error> {
        if r.dim != r.feature_space.dim() {
            return Err(format!("dim {} does not match feature space {}", r.dim, r.feature_space.dim()));
        }
        if r.bias.len() != r.classes.len() {
            return Err("bias length does not match classes".into());
        }
        let mut weights = vec![0.0; r.classes.len() * r.dim];
        for (i, w) in r.weights {
            *weights.get_mut(i as usize).ok_or("weight index out of range")? = w;
        }
        Ok(LinearModel {
            classes: r.classes,
            weights,
            bias: r.bias,
            feature_space: r.feature_space,
            fitted: r.fitted,
        })
    }
}

pub const MODEL_FORMAT: &str = "newsdesk-linear-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: LinearModel,
}

impl LinearModel {
    /// A model with the given shape and all-zero parameters that refuses to predict.
    pub fn untrained(classes: Vec<String>, feature_space: FeatureSpace) -> Self {
        let dim = feature_space.dim();
        LinearModel {
            weights: vec![0.0; classes.len() * dim],
            bias: vec![0.0; classes.len()],
            classes,
            feature_space,
            fitted: false,
        }
    }

    /// A ready-to-use model from explicit parameters; `weights` is row-major.
    pub fn from_parts(
        classes: Vec<String>,
        feature_space: FeatureSpace,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self, ClassifierError> {
        let dim = feature_space.dim();
        if weights.len() != classes.len() * dim {
            return Err(ClassifierError::Shape {
                expected: classes.len() * dim,
                found: weights.len(),
            });
        }
        if bias.len() != classes.len() {
            return Err(ClassifierError::Shape {
                expected: classes.len(),
                found: bias.len(),
            });
        }
        Ok(LinearModel {
            classes,
            weights,
            bias,
            feature_space,
            fitted: true,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    pub fn feature_space(&self) -> &FeatureSpace {
        &self.feature_space
    }

    pub fn dim(&self) -> usize {
        self.feature_space.dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted
    }

    pub fn to_json(&self) -> Result<String, ClassifierError> {
        Ok(serde_json::to_string(&ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifierError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(ClassifierError::UnsupportedModel {
                format: file.format,
                version: file.version,
            });
        }
        Ok(file.model)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), ClassifierError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ClassifierError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn check_input(&self, x: &SparseVector) -> Result<(), ClassifierError> {
        if !self.fitted {
            return Err(ClassifierError::NotFitted);
        }
        if x.dim_hint() > self.dim() {
            return Err(ClassifierError::Shape {
                expected: self.dim(),
                found: x.dim_hint(),
            });
        }
        Ok(())
    }

    pub fn scores(&self, x: &SparseVector) -> Result<Vec<f64>, ClassifierError> {
        self.check_input(x)?;
        Ok(logits(&self.weights, &self.bias, self.dim(), x))
    }

    /// Index of the most probable class; ties go to the earliest class.
    pub fn predict(&self, x: &SparseVector) -> Result<usize, ClassifierError> {
        Ok(argmax(&self.scores(x)?))
    }
}

fn logits(weights: &[f64], bias: &[f64], dim: usize, x: &SparseVector) -> Vec<f64> {
    bias.iter()
        .enumerate()
        .map(|(k, b)| {
            let row = &weights[k * dim..(k + 1) * dim];
            b + x.entries().iter().map(|&(i, v)| row[i as usize] * v).sum::<f64>()
        })
        .collect()
}

/// First index of the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax; every component is kept strictly positive.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| (e / sum).max(f64::MIN_POSITIVE)).collect()
}

/// `softmax(W x + b)` over the model's classes.
pub fn predict_proba(model: &LinearModel, x: &SparseVector) -> Result<Vec<f64>, ClassifierError> {
    Ok(softmax(&model.scores(x)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// L2 penalty on the weights (not the bias).
    pub l2: f64,
    pub max_iter: usize,
    /// Stop once the gradient's infinity norm falls below this.
    pub tol: f64,
    pub seed: u64,
    /// Half-width of the uniform initialization; 0 starts from all zeros.
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2: 1e-4,
            max_iter: 500,
            tol: 1e-6,
            seed: 0,
            init_scale: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted step, starting with the initial point.
    pub loss_trace: Vec<f64>,
    pub grad_inf_norm: f64,
}

/// Mean cross-entropy plus `l2/2 · ‖W‖²` over a labelled sample set.
///
/// Parameters are laid out as the row-major weight matrix followed by the bias.
pub struct MaxentObjective<'a> {
    samples: &'a [(SparseVector, usize)],
    n_classes: usize,
    dim: usize,
    l2: f64,
}

impl<'a> MaxentObjective<'a> {
    pub fn new(samples: &'a [(SparseVector, usize)], n_classes: usize, dim: usize, l2: f64) -> Self {
        MaxentObjective {
            samples,
            n_classes,
            dim,
            l2,
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_classes * (self.dim + 1)
    }

    pub fn loss(&self, theta: &[f64]) -> f64 {
        let (weights, bias) = theta.split_at(self.n_classes * self.dim);
        let mut total = 0.0;
        for (x, y) in self.samples {
            let z = logits(weights, bias, self.dim, x);
            total += log_sum_exp(&z) - z[*y];
        }
        total / self.samples.len() as f64 + 0.5 * self.l2 * weights.iter().map(|w| w * w).sum::<f64>()
    }

    pub fn loss_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let wlen = self.n_classes * self.dim;
        let (weights, bias) = theta.split_at(wlen);
        let n = self.samples.len() as f64;
        let mut grad = vec![0.0; theta.len()];
        let mut total = 0.0;
        for (x, y) in self.samples {
            let z = logits(weights, bias, self.dim, x);
            let lse = log_sum_exp(&z);
            total += lse - z[*y];
            for k in 0..self.n_classes {
                let p = (z[k] - lse).exp();
                let residual = (p - if k == *y { 1.0 } else { 0.0 }) / n;
                if residual == 0.0 {
                    continue;
                }
                let row = &mut grad[k * self.dim..(k + 1) * self.dim];
                for &(i, v) in x.entries() {
                    row[i as usize] += residual * v;
                }
                grad[wlen + k] += residual;
            }
        }
        let mut penalty = 0.0;
        for (g, w) in grad[..wlen].iter_mut().zip(weights) {
            *g += self.l2 * w;
            penalty += w * w;
        }
        (total / n + 0.5 * self.l2 * penalty, grad)
    }
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Fits a maximum-entropy classifier by full-batch gradient descent.
///
/// Step sizes come from the Barzilai-Borwein rule and are halved until the
/// Armijo sufficient-decrease condition holds, so every accepted step lowers
/// the objective. `samples` pairs a feature vector with an index into `classes`.
pub fn train_maxent(
    samples: &[(SparseVector, usize)],
    classes: Vec<String>,
    feature_space: FeatureSpace,
    config: &TrainConfig,
) -> Result<(LinearModel, TrainReport), ClassifierError> {
    let k = classes.len();
    let dim = feature_space.dim();
    let mut seen = vec![false; k];
    for (x, y) in samples {
        if *y >= k {
            return Err(ClassifierError::UnknownClass(y.to_string()));
        }
        if x.dim_hint() > dim {
            return Err(ClassifierError::Shape {
                expected: dim,
                found: x.dim_hint(),
            });
        }
        seen[*y] = true;
    }
    if seen.iter().filter(|s| **s).count() < 2 {
        return Err(ClassifierError::DegenerateLabels);
    }

    let objective = MaxentObjective::new(samples, k, dim, config.l2);
    let mut theta = vec![0.0; objective.n_params()];
    if config.init_scale > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for w in theta.iter_mut() {
            *w = rng.gen_range(-config.init_scale..config.init_scale);
        }
    }

    let (mut loss, mut grad) = objective.loss_and_gradient(&theta);
    let mut trace = vec![loss];
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = inf_norm(&grad) < config.tol;
    let mut candidate = vec![0.0; theta.len()];

    while !converged && iterations < config.max_iter {
        let g2 = dot(&grad, &grad);
        let mut alpha = step;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            for ((c, t), g) in candidate.iter_mut().zip(&theta).zip(&grad) {
                *c = t - alpha * g;
            }
            let (new_loss, new_grad) = objective.loss_and_gradient(&candidate);
            if new_loss <= loss - ARMIJO_C * alpha * g2 {
                accepted = Some((new_loss, new_grad));
                break;
            }
            alpha *= 0.5;
        }
        let Some((new_loss, new_grad)) = accepted else {
            // no decrease is numerically attainable along the gradient
            break;
        };
        iterations += 1;

        // Barzilai-Borwein: s = Δθ, y = Δgrad, next step = s·s / s·y
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..theta.len() {
            let s = candidate[i] - theta[i];
            let y = new_grad[i] - grad[i];
            ss += s * s;
            sy += s * y;
        }
        step = if sy > 0.0 { (ss / sy).clamp(1e-10, 1e10) } else { alpha * 2.0 };

        std::mem::swap(&mut theta, &mut candidate);
        loss = new_loss;
        grad = new_grad;
        trace.push(loss);
        converged = inf_norm(&grad) < config.tol;
    }

    let bias = theta.split_off(k * dim);
    let report = TrainReport {
        iterations,
        converged,
        loss_trace: trace,
        grad_inf_norm: inf_norm(&grad),
    };
    let model = LinearModel {
        classes,
        weights: theta,
        bias,
        feature_space,
        fitted: true,
    };
    Ok((model, report))
}
