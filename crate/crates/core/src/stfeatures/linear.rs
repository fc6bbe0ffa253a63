//! Linear max-margin classifier: L2-regularized hinge loss minimized by
//! seeded stochastic subgradient passes.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{FeatureKind, StFeatureConfig};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

pub const MODEL_MAGIC: &str = "MESPOT-LINEAR v1";

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub learning_rate: f64,
    /// Weight each class by `n / (2 n_class)`.
    pub balanced: bool,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            lambda: 1e-4,
            epochs: 200,
            seed: 0x5eed,
            learning_rate: 0.05,
            balanced: true,
        }
    }
}

/// Objective (on the standardized features) after initialization and after every epoch. An epoch that would
/// raise the objective is rolled back and the step size halved, so the trace
/// never increases.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainTrace {
    pub objective: Vec<f64>,
}

fn objective(samples: &[Vec<f64>], labels: &[f64], weights: &[f64], model: &LinearModel, lambda: f64) -> f64 {
    let total: f64 = weights.iter().sum();
    let loss: f64 = samples
        .iter()
        .zip(labels)
        .zip(weights)
        .map(|((x, y), c)| c * (1.0 - y * model.score(x)).max(0.0))
        .sum();
    0.5 * lambda * model.weights.iter().map(|w| w * w).sum::<f64>() + loss / total
}

pub fn train_linear(samples: &[Vec<f64>], labels: &[i8], params: &TrainParams) -> Result<(LinearModel, TrainTrace)> {
    if samples.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} samples but {} labels",
            samples.len(),
            labels.len()
        )));
    }
    if let Some(bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
        return Err(Error::Argument(format!("label {bad} is not +1 or -1")));
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Training(format!(
            "need both classes ({positives} positive, {negatives} negative)"
        )));
    }
    let dim = samples[0].len();
    if let Some(i) = samples.iter().position(|s| s.len() != dim) {
        return Err(Error::Argument(format!(
            "sample {i} has length {}, expected {dim}",
            samples[i].len()
        )));
    }
    if samples.iter().all(|s| s == &samples[0]) {
        return Err(Error::Training(
            "all samples are identical; no separating direction exists".into(),
        ));
    }
    if !(params.lambda > 0.0 && params.learning_rate > 0.0) {
        return Err(Error::Config("lambda and learning_rate must be positive".into()));
    }

    // Descent runs on standardized features scaled so the average squared
    // norm is about 1; the result is folded back into raw-feature weights.
    let (shift, scale) = standardization(samples);
    let z: Vec<Vec<f64>> = samples
        .iter()
        .map(|x| {
            x.iter()
                .zip(&shift)
                .zip(&scale)
                .map(|((v, m), s)| (v - m) * s)
                .collect()
        })
        .collect();

    let n = labels.len() as f64;
    let ys: Vec<f64> = labels.iter().map(|&y| y as f64).collect();
    let class_weight = |y: i8| {
        if !params.balanced {
            1.0
        } else if y == 1 {
            n / (2.0 * positives as f64)
        } else {
            n / (2.0 * negatives as f64)
        }
    };
    let cw: Vec<f64> = labels.iter().map(|&y| class_weight(y)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut model = LinearModel {
        weights: vec![0.0; dim],
        bias: 0.0,
    };
    let mut best = objective(&z, &ys, &cw, &model, params.lambda);
    let mut trace = TrainTrace { objective: vec![best] };
    let mut eta = params.learning_rate;
    let mut order: Vec<usize> = (0..z.len()).collect();

    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut next = model.clone();
        for &i in &order {
            let margin = ys[i] * next.score(&z[i]);
            let shrink = 1.0 - eta * params.lambda;
            next.weights.iter_mut().for_each(|w| *w *= shrink);
            if margin < 1.0 {
                let step = eta * cw[i] * ys[i];
                for (w, x) in next.weights.iter_mut().zip(&z[i]) {
                    *w += step * x;
                }
                next.bias += step;
            }
        }
        let value = objective(&z, &ys, &cw, &next, params.lambda);
        if value <= best {
            model = next;
            best = value;
        } else {
            eta *= 0.5;
        }
        trace.objective.push(best);
    }

    let weights: Vec<f64> = model.weights.iter().zip(&scale).map(|(w, s)| w * s).collect();
    let bias = model.bias - weights.iter().zip(&shift).map(|(w, m)| w * m).sum::<f64>();
    Ok((LinearModel { weights, bias }, trace))
}

/// Per-dimension mean and the factor `1 / (std * sqrt(d))`, where `d` counts
/// the non-constant dimensions. Constant dimensions get factor 0.
fn standardization(samples: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len() as f64;
    let dim = samples[0].len();
    let mean: Vec<f64> = (0..dim)
        .map(|j| samples.iter().map(|x| x[j]).sum::<f64>() / n)
        .collect();
    let std: Vec<f64> = (0..dim)
        .map(|j| (samples.iter().map(|x| (x[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    let live = std.iter().filter(|&&s| s > 0.0).count().max(1) as f64;
    let scale = std
        .iter()
        .map(|&s| if s > 0.0 { 1.0 / (s * live.sqrt()) } else { 0.0 })
        .collect();
    (mean, scale)
}

/// A trained classifier together with the feature layout it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotterModel {
    pub feature: StFeatureConfig,
    pub linear: LinearModel,
}

pub fn format_model(model: &SpotterModel) -> String {
    let f = &model.feature;
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_MAGIC}");
    let _ = writeln!(out, "kind={}", f.kind);
    let _ = writeln!(out, "blocks={}x{}x{}", f.blocks.0, f.blocks.1, f.blocks.2);
    let _ = writeln!(out, "overlap={}", f.overlap);
    let _ = writeln!(out, "bins={}", f.bins);
    let _ = writeln!(out, "window={}", f.window);
    let scales: Vec<String> = f.scales.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "scales={}", scales.join(","));
    let _ = writeln!(out, "dims={}", model.linear.weights.len());
    for w in &model.linear.weights {
        let _ = writeln!(out, "{w}");
    }
    let _ = writeln!(out, "bias={}", model.linear.bias);
    out
}

pub fn write_model(path: &Path, model: &SpotterModel) -> Result<()> {
    write_atomic(path, format_model(model).as_bytes())
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, path: &Path, key: &str) -> Result<(usize, String)> {
    match lines.next() {
        Some((n, l)) => match l.split_once('=') {
            Some((k, v)) if k == key => Ok((n, v.to_string())),
            _ => Err(Error::parse(path, n, format!("expected {key}=..."))),
        },
        None => Err(Error::parse(path, 0, format!("missing {key}"))),
    }
}

pub fn read_model(path: &Path) -> Result<SpotterModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let err = |line: usize, msg: String| Error::parse(path, line, msg);

    match lines.next() {
        Some((_, MODEL_MAGIC)) => {}
        _ => return Err(err(1, format!("expected magic line {MODEL_MAGIC:?}"))),
    }
    let (n, kind) = header(&mut lines, path, "kind")?;
    let kind: FeatureKind = kind.parse().map_err(|e: Error| err(n, e.to_string()))?;
    let (n, blocks) = header(&mut lines, path, "blocks")?;
    let blocks = super::parse_blocks(&blocks).map_err(|e| err(n, e.to_string()))?;
    let (n, overlap) = header(&mut lines, path, "overlap")?;
    let overlap: f64 = overlap.parse().map_err(|e| err(n, format!("overlap: {e}")))?;
    let (n, bins) = header(&mut lines, path, "bins")?;
    let bins: usize = bins.parse().map_err(|e| err(n, format!("bins: {e}")))?;
    let (n, window) = header(&mut lines, path, "window")?;
    let window: usize = window.parse().map_err(|e| err(n, format!("window: {e}")))?;
    let (n, scales) = header(&mut lines, path, "scales")?;
    let scales = super::parse_scales(&scales).map_err(|e| err(n, e.to_string()))?;
    let (n, dims) = header(&mut lines, path, "dims")?;
    let dims: usize = dims.parse().map_err(|e| err(n, format!("dims: {e}")))?;

    let mut weights = Vec::with_capacity(dims);
    for _ in 0..dims {
        let (n, l) = lines.next().ok_or_else(|| err(0, format!("expected {dims} weights")))?;
        weights.push(l.parse::<f64>().map_err(|e| err(n, format!("weight: {e}")))?);
    }
    let (n, bias) = header(&mut lines, path, "bias")?;
    let bias: f64 = bias.parse().map_err(|e| err(n, format!("bias: {e}")))?;
    if let Some((n, extra)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(err(n, format!("unexpected trailing line {extra:?}")));
    }

    let feature = StFeatureConfig {
        kind,
        blocks,
        overlap,
        bins,
        window,
        scales,
    };
    feature.validate()?;
    if feature.feature_len() != dims {
        return Err(Error::Validation(format!(
            "model has {dims} weights but its feature layout needs {}",
            feature.feature_len()
        )));
    }
    Ok(SpotterModel {
        feature,
        linear: LinearModel { weights, bias },
    })
}
