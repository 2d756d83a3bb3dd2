//! Independent reference computations for tests.
//!
//! Nothing here calls into the code under test; each routine recomputes its
//! quantity from first principles (quadrature, bisection, enumeration).

#![allow(dead_code)]

use std::f64::consts::PI;

/// Neumaier-compensated sum.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

/// `ln(n! / (a! b! …))` by summing logs of integers.
pub fn log_multinomial_by_summation(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let ln_fact = |m: u64| kahan_sum((2..=m).map(|i| (i as f64).ln()));
    ln_fact(n) - kahan_sum(counts.iter().map(|&c| ln_fact(c)))
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative accuracy
/// `rel_tol` (absolute when the integral is below one).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    // Split into panels first so narrow peaks are not missed.
    let panels = 64;
    let h = (b - a) / panels as f64;
    let nodes: Vec<(f64, f64, f64, f64, f64)> = (0..panels)
        .map(|i| {
            let (x0, x1) = (a + h * i as f64, a + h * (i + 1) as f64);
            (x0, x1, f(x0), f(0.5 * (x0 + x1)), f(x1))
        })
        .collect();
    let coarse = kahan_sum(nodes.iter().map(|&(x0, x1, f0, fm, f1)| (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1)));
    let tol = rel_tol * coarse.abs().max(1.0) / panels as f64;
    kahan_sum(nodes.iter().map(|&(x0, x1, f0, fm, f1)| {
        let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        simpson_step(&f, x0, x1, f0, fm, f1, whole, tol, 30)
    }))
}

fn normal_density(y: f64, mu: f64, sigma: f64) -> f64 {
    let z = (y - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

/// `∫₀^∞ g(s) f(s) ds` for the lognormal density, integrated in `y = ln s`
/// where `f(s) ds` becomes the normal density.
pub fn lognormal_expectation<G: Fn(f64) -> f64>(g: G, mu: f64, sigma: f64) -> f64 {
    let lo = mu - 14.0 * sigma;
    let hi = mu + sigma * sigma * 2.0 + 14.0 * sigma;
    adaptive_simpson(|y| g(y.exp()) * normal_density(y, mu, sigma), lo, hi, 1e-12)
}

/// `∫ f(s) ds` with `f` written directly in `s` (not using the normal law):
/// integrates `f(eʸ)·eʸ` over `y`.
pub fn integrate_density_in_s<F: Fn(f64) -> f64>(f: F, mu: f64, sigma: f64) -> f64 {
    let lo = mu - 14.0 * sigma;
    let hi = mu + 14.0 * sigma;
    adaptive_simpson(|y| f(y.exp()) * y.exp(), lo, hi, 1e-12)
}

/// Differential entropy `−∫ f ln f ds` of the lognormal, by quadrature.
pub fn lognormal_entropy_by_quadrature(mu: f64, sigma: f64) -> f64 {
    let lo = mu - 14.0 * sigma;
    let hi = mu + 14.0 * sigma;
    adaptive_simpson(
        |y| {
            let s = y.exp();
            let ln_f = -((y - mu).powi(2)) / (2.0 * sigma * sigma) - y - (sigma * (2.0 * PI).sqrt()).ln();
            // f(s) ds = f(eʸ) eʸ dy
            -(ln_f.exp() * s) * ln_f
        },
        lo,
        hi,
        1e-12,
    )
}

/// Mean of the discrete exponential `pᵢ ∝ e^{−λ sᵢ}` on `levels`.
pub fn exponential_mean(levels: &[f64], lambda: f64) -> f64 {
    let peak = levels.iter().map(|s| -lambda * s).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = levels.iter().map(|s| (-lambda * s - peak).exp()).collect();
    let z = kahan_sum(w.iter().copied());
    kahan_sum(w.iter().zip(levels).map(|(w, s)| w * s)) / z
}

/// Discrete exponential probabilities.
pub fn exponential_probabilities(levels: &[f64], lambda: f64) -> Vec<f64> {
    let peak = levels.iter().map(|s| -lambda * s).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = levels.iter().map(|s| (-lambda * s - peak).exp()).collect();
    let z = kahan_sum(w.iter().copied());
    w.iter().map(|w| w / z).collect()
}

/// Solves `exponential_mean(λ) = target` by bisection (the mean falls as λ grows).
pub fn exponential_lambda_by_bisection(levels: &[f64], target: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while exponential_mean(levels, lo) < target {
        lo *= 2.0;
    }
    while exponential_mean(levels, hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if exponential_mean(levels, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Brute-force scan of λ on successively finer uniform grids, keeping the
/// grid point whose mean is closest to `target`.
pub fn exponential_lambda_by_grid_search(levels: &[f64], target: f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let points = 201;
    let mut best = 0.5 * (lo + hi);
    for _ in 0..12 {
        let step = (hi - lo) / (points - 1) as f64;
        best = (0..points)
            .map(|i| lo + step * i as f64)
            .min_by(|a, b| {
                let da = (exponential_mean(levels, *a) - target).abs();
                let db = (exponential_mean(levels, *b) - target).abs();
                da.total_cmp(&db)
            })
            .unwrap();
        lo = best - step;
        hi = best + step;
    }
    best
}

pub fn entropy(p: &[f64]) -> f64 {
    -kahan_sum(p.iter().map(|&x| if x > 0.0 { x * x.ln() } else { 0.0 }))
}

/// Lognormal density written out directly.
pub fn lognormal_density(s: f64, mu: f64, sigma: f64) -> f64 {
    let z = (s.ln() - mu) / sigma;
    (-0.5 * z * z).exp() / (s * sigma * (2.0 * PI).sqrt())
}

/// Lognormal density evaluated on `levels` and normalised to sum to one.
pub fn grid_normalized_lognormal(levels: &[f64], mu: f64, sigma: f64) -> Vec<f64> {
    let raw: Vec<f64> = levels.iter().map(|&s| lognormal_density(s, mu, sigma)).collect();
    let z = kahan_sum(raw.iter().copied());
    raw.iter().map(|v| v / z).collect()
}

/// `Σ pᵢ f(sᵢ)`.
pub fn grid_expectation<F: Fn(f64) -> f64>(levels: &[f64], p: &[f64], f: F) -> f64 {
    kahan_sum(levels.iter().zip(p).map(|(&s, &q)| q * f(s)))
}

/// Largest gap between the cumulative sums of two distributions on one grid.
pub fn max_cdf_gap(p: &[f64], q: &[f64]) -> f64 {
    let (mut cp, mut cq, mut worst) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b) in p.iter().zip(q) {
        cp += a;
        cq += b;
        worst = worst.max((cp - cq).abs());
    }
    worst
}

/// `count` random distributions near `p` with the same normalisation and the
/// same expectations of every function in `features`.
///
/// Directions are drawn at random on the numerically occupied support of `p`,
/// projected onto the null space of the constraint rows, and scaled so every
/// probability stays non-negative.
pub fn feasible_perturbations(
    levels: &[f64],
    features: &[Box<dyn Fn(f64) -> f64>],
    p: &[f64],
    count: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};

    let peak = p.iter().copied().fold(0.0, f64::max);
    let support: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 1e-6 * peak).collect();
    let scales: Vec<f64> = features.iter().map(|f| levels.iter().map(|&s| f(s).abs()).fold(0.0, f64::max)).collect();
    let rows = DMatrix::from_fn(support.len(), features.len() + 1, |r, j| {
        let s = levels[support[r]];
        if j == 0 {
            1.0
        } else {
            features[j - 1](s) / scales[j - 1]
        }
    });
    let q = rows.qr().q();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v = DVector::from_fn(support.len(), |_, _| rng.random_range(-1.0..1.0));
            let v = &v - &q * (q.transpose() * &v);
            let limit = support
                .iter()
                .zip(v.iter())
                .filter(|(_, d)| **d < 0.0)
                .map(|(&i, d)| p[i] / -d)
                .fold(f64::INFINITY, f64::min);
            let t = limit * rng.random_range(0.05..0.9);
            let mut out = p.to_vec();
            for (&i, d) in support.iter().zip(v.iter()) {
                out[i] += t * d;
            }
            out
        })
        .collect()
}
