use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::SparseVector;

/// One training example after featurization: a sparse vector per top-K candidate and a
/// mask of the candidates that match a gold answer.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturizedExample {
    pub id: String,
    pub features: Vec<SparseVector>,
    pub gold: Vec<bool>,
}

pub fn dot(x: &SparseVector, weights: &[f64]) -> f64 {
    x.iter().map(|&(i, v)| v * weights[i as usize]).sum()
}

/// Softmax with max-shift.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

fn log_sum_exp(scores: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = scores.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + scores.map(|s| (s - max).exp()).sum::<f64>().ln()
}

/// Negative marginal log-likelihood of the gold candidates, `-log sum_{gold} p(a)`, and its
/// gradient `E_p[phi] - E_{p(.|gold)}[phi]`, accumulated into `grad`.
pub fn example_loss_and_gradient(
    weights: &[f64],
    example: &FeaturizedExample,
    grad: &mut [f64],
) -> Result<f64> {
    if !example.gold.iter().any(|&g| g) {
        return Err(Error::NoGoldCandidate(example.id.clone()));
    }
    let scores: Vec<f64> = example.features.iter().map(|x| dot(x, weights)).collect();
    let log_z = log_sum_exp(scores.iter().copied());
    let log_gold = log_sum_exp(
        scores
            .iter()
            .zip(&example.gold)
            .filter(|(_, &g)| g)
            .map(|(s, _)| *s),
    );
    let loss = log_z - log_gold;
    if !loss.is_finite() {
        return Err(Error::NonFinite(example.id.clone()));
    }
    for ((x, s), &g) in example.features.iter().zip(&scores).zip(&example.gold) {
        let p = (s - log_z).exp();
        let q = if g { (s - log_gold).exp() } else { 0.0 };
        let coef = p - q;
        if coef != 0.0 {
            for &(i, v) in x {
                grad[i as usize] += coef * v;
            }
        }
    }
    Ok(loss)
}

/// Per-example loss and gradient as a fresh vector.
pub fn loss_and_gradient(weights: &[f64], example: &FeaturizedExample) -> Result<(f64, Vec<f64>)> {
    let mut grad = vec![0.0; weights.len()];
    let loss = example_loss_and_gradient(weights, example, &mut grad)?;
    Ok((loss, grad))
}

const CHUNK: usize = 16;

/// Penalized log-likelihood `sum_i log p(gold_i) - lambda |theta|^2` and its gradient
/// (the ascent direction). Chunks are reduced in a fixed order, so the result does not
/// depend on the number of threads.
pub fn objective(
    weights: &[f64],
    lambda: f64,
    examples: &[FeaturizedExample],
) -> Result<(f64, Vec<f64>)> {
    let d = weights.len();
    let partials: Vec<Result<(f64, Vec<f64>)>> = examples
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut grad = vec![0.0; d];
            let mut loss = 0.0;
            for e in chunk {
                loss += example_loss_and_gradient(weights, e, &mut grad)?;
            }
            Ok((loss, grad))
        })
        .collect();
    let mut loss = 0.0;
    let mut grad = vec![0.0; d];
    for p in partials {
        let (l, g) = p?;
        loss += l;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    let norm2: f64 = weights.iter().map(|w| w * w).sum();
    let value = -loss - lambda * norm2;
    for (g, w) in grad.iter_mut().zip(weights) {
        *g = -*g - 2.0 * lambda * w;
    }
    if !value.is_finite() {
        let id = examples.first().map(|e| e.id.clone()).unwrap_or_default();
        return Err(Error::NonFinite(id));
    }
    Ok((value, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example(features: Vec<SparseVector>, gold: Vec<bool>) -> FeaturizedExample {
        FeaturizedExample {
            id: "t".into(),
            features,
            gold,
        }
    }

    #[test]
    fn single_gold_candidate() {
        let e = example(vec![vec![(0, 1.0), (1, 2.0)]], vec![true]);
        let w = [0.3, -0.7];
        let (loss, grad) = loss_and_gradient(&w, &e).unwrap();
        assert_abs_diff_eq!(loss, 0.0);
        assert!(grad.iter().all(|g| g.abs() < 1e-15));
        let lambda = 0.1;
        let (_, g) = objective(&w, lambda, &[e]).unwrap();
        assert_abs_diff_eq!(g[0], -2.0 * lambda * 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], -2.0 * lambda * -0.7, epsilon = 1e-15);
    }

    #[test]
    fn uniform_two_candidates() {
        let e = example(vec![vec![(0, 1.0)], vec![]], vec![true, false]);
        let (loss, _) = loss_and_gradient(&[0.0], &e).unwrap();
        assert_abs_diff_eq!(loss, 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn no_gold_is_error() {
        let e = example(vec![vec![]], vec![false]);
        assert!(matches!(
            loss_and_gradient(&[], &e),
            Err(Error::NoGoldCandidate(_))
        ));
    }

    #[test]
    fn softmax_examples() {
        let p = softmax(&[1.0, 0.0]);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(p[0], e / (e + 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(p[0], 0.731, epsilon = 1e-3);
        assert_abs_diff_eq!(p[1], 0.269, epsilon = 1e-3);
        let shifted = softmax(&[1001.0, 1000.0]);
        assert_abs_diff_eq!(shifted[0], p[0], epsilon = 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = 3;
        let features: Vec<SparseVector> = (0..5)
            .map(|_| {
                (0..d as u32)
                    .map(|i| (i, rng.random_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        let e = example(features, vec![true, false, true, false, false]);
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, grad) = loss_and_gradient(&w, &e).unwrap();
        let h = 1e-5;
        for j in 0..d {
            let mut up = w.clone();
            up[j] += h;
            let mut dn = w.clone();
            dn[j] -= h;
            let fd = (loss_and_gradient(&up, &e).unwrap().0
                - loss_and_gradient(&dn, &e).unwrap().0)
                / (2.0 * h);
            assert!(
                (fd - grad[j]).abs() <= 1e-6 * grad[j].abs().max(1.0),
                "{fd} vs {}",
                grad[j]
            );
        }
    }
}
