//! Conditional maximum likelihood for products of categorical choices.
//!
//! Each observation is a sparse vector of parameter-use counts, and its
//! probability is `Π θ_e^{c_e}`. Given weighted observations and a finite
//! support containing them, the objective is
//!
//! ```text
//! L(θ) = Σ_i w_i log P(x_i) − W log Σ_{s ∈ support} P(s)
//! ```
//!
//! with `W = Σ_i w_i`. The optimizer works row by row in softmax
//! coordinates: `θ_e ← θ_e · exp(η g_e / W)` followed by renormalization,
//! where `g_e` is the gradient with respect to the logit of `e`. A
//! step is accepted only if it does not decrease `L`; otherwise `η` is
//! halved. Entries that are exactly zero stay zero.

pub type Counts = Vec<(usize, u64)>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: 1e-9,
            max_iters: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub theta: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value before the first step and after each accepted one.
    pub trace: Vec<f64>,
}

fn log_prob(theta: &[f64], counts: &Counts) -> f64 {
    let mut acc = 0.0;
    for &(e, c) in counts {
        if c > 0 {
            acc += c as f64 * theta[e].ln();
        }
    }
    acc
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Conditional log likelihood of `observed` relative to `support`.
pub fn objective(theta: &[f64], observed: &[(Counts, f64)], support: &[Counts]) -> f64 {
    let total: f64 = observed.iter().map(|(_, w)| w).sum();
    let data: f64 = observed.iter().map(|(c, w)| w * log_prob(theta, c)).sum();
    let logs: Vec<f64> = support.iter().map(|c| log_prob(theta, c)).collect();
    data - total * log_sum_exp(&logs)
}

/// Rows with at least one parameter used by some support element.
pub fn touched_rows(rows: &[Vec<usize>], support: &[Counts]) -> Vec<bool> {
    let n_params = rows.iter().flatten().map(|&e| e + 1).max().unwrap_or(0);
    let mut used = vec![false; n_params];
    for s in support {
        for &(e, c) in s {
            if c > 0 {
                used[e] = true;
            }
        }
    }
    rows.iter().map(|r| r.iter().any(|&e| used[e])).collect()
}

/// Maximize [`objective`] starting from `theta0`. Rows not touched by the
/// support are returned unchanged.
pub fn fit(
    rows: &[Vec<usize>],
    theta0: &[f64],
    observed: &[(Counts, f64)],
    support: &[Counts],
    opts: FitOptions,
) -> Fit {
    let total: f64 = observed.iter().map(|(_, w)| w).sum();
    let mut observed_counts = vec![0.0; theta0.len()];
    for (c, w) in observed {
        for &(e, n) in c {
            observed_counts[e] += w * n as f64;
        }
    }
    let active: Vec<&Vec<usize>> = rows
        .iter()
        .zip(touched_rows(rows, support))
        .filter(|(_, t)| *t)
        .map(|(r, _)| r)
        .collect();

    let mut theta = theta0.to_vec();
    let mut current = objective(&theta, observed, support);
    let mut trace = vec![current];
    let mut step = 1.0;
    let scale = if total > 0.0 { total } else { 1.0 };

    for iter in 0..opts.max_iters {
        // expected counts under the support distribution
        let logs: Vec<f64> = support.iter().map(|c| log_prob(&theta, c)).collect();
        let z = log_sum_exp(&logs);
        let mut expected = vec![0.0; theta.len()];
        for (c, lp) in support.iter().zip(&logs) {
            let pi = (lp - z).exp();
            for &(e, n) in c {
                expected[e] += pi * n as f64;
            }
        }
        let mut grad = vec![0.0; theta.len()];
        for row in &active {
            let row_total: f64 = row
                .iter()
                .map(|&e| observed_counts[e] - total * expected[e])
                .sum();
            for &e in row.iter() {
                grad[e] = (observed_counts[e] - total * expected[e]) - theta[e] * row_total;
            }
        }

        let mut accepted = None;
        while step > 1e-30 {
            let candidate = take_step(&theta, &active, &grad, step / scale);
            let value = objective(&candidate, observed, support);
            if value >= current {
                accepted = Some((candidate, value));
                break;
            }
            step *= 0.5;
        }
        let Some((candidate, value)) = accepted else {
            return Fit {
                theta,
                iterations: iter,
                converged: true,
                trace,
            };
        };
        let change = candidate
            .iter()
            .zip(&theta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        theta = candidate;
        current = value;
        trace.push(current);
        step = (step * 2.0).min(1e6);
        if change < opts.tol {
            return Fit {
                theta,
                iterations: iter + 1,
                converged: true,
                trace,
            };
        }
    }
    Fit {
        theta,
        iterations: opts.max_iters,
        converged: false,
        trace,
    }
}

fn take_step(theta: &[f64], rows: &[&Vec<usize>], grad: &[f64], eta: f64) -> Vec<f64> {
    let mut out = theta.to_vec();
    for row in rows {
        let logits: Vec<f64> = row
            .iter()
            .map(|&e| {
                if theta[e] > 0.0 {
                    theta[e].ln() + eta * grad[e]
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let z = log_sum_exp(&logits);
        for (&e, l) in row.iter().zip(&logits) {
            out[e] = (l - z).exp();
        }
    }
    out
}
