//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any fails.

#[path = "../../core/tests/common/oracles.rs"]
mod oracles;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use fairpay_cli::config::SimConfig;
use fairpay_cli::simulate;
use fairpay_core::fairness::{
    gini, normalized_share_entropy, shannon_entropy, share_entropy, theil_decomposition, theil_index,
};
use fairpay_core::market::{
    max_class_gap, run_to_equilibrium, ClassSpec, CompanyTemplate, ConvergenceStatus, InitialSalary, StopRule,
};
use fairpay_core::maxent::{
    fit_lognormal_values, ks_statistic_values, lognormal_entropy, lognormal_moments, solve_maxent, DEFAULT_MAX_ITER,
    DEFAULT_TOLERANCE,
};
use fairpay_core::statmech::{log_multiplicity_counts, MultiplicityMethod};
use fairpay_core::{
    delta_initial_state, ConstraintKind, ConstraintSet, LognormalParams, Money, NegotiationPolicy, SalaryGrid,
    SalarySample,
};
use oracles::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn m(major: i64) -> Money {
    Money::from_major(major)
}

fn worked_example() -> Outcome {
    let start = Instant::now();
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/ab_example.toml"))
        .map_err(|e| e.to_string())?;
    let config = SimConfig::from_toml(&text).map_err(|e| e.to_string())?;
    let t = simulate::run(&config, config.seed.unwrap_or(0), None).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    check(t.status == ConvergenceStatus::Converged, || format!("status {:?}", t.status))?;
    check(t.rounds_run() <= 2, || format!("{} rounds", t.rounds_run()))?;
    for c in t.final_state.companies() {
        let d = c.macrostate();
        check(d.levels() == [m(45_000), m(120_000)] && d.counts() == [800, 200], || {
            format!("company {} ended at {:?} x {:?}", c.company_id(), d.levels(), d.counts())
        })?;
        check(c.budget() == m(60_000_000), || format!("budget {}", c.budget()))?;
        let payroll: i128 = c.classes().iter().map(|k| k.count as i128 * k.salary.minor() as i128).sum();
        check(payroll == 6_000_000_000 && c.headcount() == 1000, || format!("payroll {payroll}"))?;
    }
    check(elapsed < 1.0, || format!("took {elapsed:.3}s"))?;
    Ok(format!("converged in {} rounds to 800 @ 45000.00 + 200 @ 120000.00 ({elapsed:.3}s)", t.rounds_run()))
}

fn multiplicity() -> Outcome {
    let oracle_nats = kahan_sum((801..=1000).map(|i| (i as f64).ln())) - kahan_sum((1..=200).map(|i| (i as f64).ln()));
    let oracle = oracle_nats / std::f64::consts::LN_10;
    let exact = log_multiplicity_counts(&[800, 200], MultiplicityMethod::ExactLogGamma).map_err(|e| e.to_string())?;
    let stirling = log_multiplicity_counts(&[800, 200], MultiplicityMethod::Stirling).map_err(|e| e.to_string())?;
    let delta = log_multiplicity_counts(&[1000], MultiplicityMethod::ExactLogGamma).map_err(|e| e.to_string())?;
    let log10 = exact.log10_w();
    check((log10 - 215.82).abs() <= 0.01, || format!("log10 W = {log10}"))?;
    check((log10 - oracle).abs() <= 0.01, || format!("log10 W = {log10}, oracle {oracle}"))?;
    let rel = (stirling.log_w_nats - exact.log_w_nats).abs() / exact.log_w_nats;
    check(rel < 0.01, || format!("Stirling relative gap {rel}"))?;
    check(delta.log_w_nats == 0.0, || format!("delta ln W = {}", delta.log_w_nats))?;
    check((log10 - 220.0).abs() <= 5.0, || format!("{log10} is more than 5 decades from 10^220"))?;
    Ok(format!(
        "log10 W = {log10:.6} (oracle {oracle:.6}), Stirling {:.4}, delta W = 1; 10^220 off by {:.2} decades",
        stirling.log10_w(),
        220.0 - log10
    ))
}

fn random_sample(rng: &mut ChaCha8Rng, max_n: usize) -> SalarySample {
    let n = rng.random_range(1..=max_n);
    let salaries = (0..n).map(|_| Money::from_minor((10f64.powf(rng.random_range(0.0..8.0)) as i64).max(1))).collect();
    SalarySample::new(salaries).expect("non-empty")
}

fn theil_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let s = random_sample(&mut rng, 10_000);
        let t = theil_index(&s).map_err(|e| e.to_string())?;
        let h = share_entropy(&s).map_err(|e| e.to_string())?;
        worst = worst.max((t - ((s.len() as f64).ln() - h)).abs());
    }
    check(worst <= 1e-12, || format!("worst |T - (ln N - H)| = {worst:e}"))?;
    let two = SalarySample::from_groups(&[(800, m(30_000)), (200, m(180_000))]).map_err(|e| e.to_string())?;
    let t = theil_index(&two).map_err(|e| e.to_string())?;
    let g = gini(&two).map_err(|e| e.to_string())?;
    check((t - 0.381908).abs() <= 1e-6, || format!("T = {t}"))?;
    check((g - 0.4).abs() <= 1e-9, || format!("Gini = {g}"))?;
    Ok(format!("worst identity error {worst:.1e} over 1000 samples; T = {t:.6}, Gini = {g:.9}"))
}

fn grid_log_moments(grid: &SalaryGrid, mu: f64, sigma: f64) -> ConstraintSet {
    let q = grid_normalized_lognormal(grid.levels(), mu, sigma);
    let m1 = grid_expectation(grid.levels(), &q, f64::ln);
    let m2 = grid_expectation(grid.levels(), &q, |s| s.ln().powi(2));
    ConstraintSet::new(vec![(ConstraintKind::MeanLnS, m1), (ConstraintKind::MeanLnSSq, m2)]).expect("finite targets")
}

fn maxent_solver() -> Outcome {
    let start = Instant::now();
    let grid = SalaryGrid::around_mean(60_000.0, 512).map_err(|e| e.to_string())?;

    // (a) mean only: discrete exponential.
    let mean_only = ConstraintSet::mean_salary(60_000.0).map_err(|e| e.to_string())?;
    let sol = solve_maxent(&grid, &mean_only, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).map_err(|e| e.to_string())?;
    check(sol.residual_norm <= 1e-10, || format!("(a) residual {}", sol.residual_norm))?;
    let analytic = exponential_lambda_by_bisection(grid.levels(), 60_000.0);
    let searched = exponential_lambda_by_grid_search(grid.levels(), 60_000.0, 0.0, 1e-3);
    let lambda = sol.multipliers[0];
    check(((lambda - analytic) / analytic).abs() <= 1e-6, || format!("(a) lambda {lambda} vs {analytic}"))?;
    check(((lambda - searched) / searched).abs() <= 1e-6, || format!("(a) lambda {lambda} vs search {searched}"))?;
    let expo = exponential_probabilities(grid.levels(), analytic);
    let worst_a = sol.probabilities.iter().zip(&expo).map(|(p, q)| ((p - q) / q).abs()).fold(0.0, f64::max);
    check(worst_a <= 1e-6, || format!("(a) probabilities off by {worst_a:e}"))?;

    // (b) log moments: grid-normalised lognormal.
    let (mu, sigma) = (60_000f64.ln() - 0.125, 0.5);
    let logm = grid_log_moments(&grid, mu, sigma);
    let sol_b = solve_maxent(&grid, &logm, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).map_err(|e| e.to_string())?;
    let oracle = grid_normalized_lognormal(grid.levels(), mu, sigma);
    let k = grid.len();
    let worst_b = (1..k - 1).map(|i| ((sol_b.probabilities[i] - oracle[i]) / oracle[i]).abs()).fold(0.0, f64::max);
    check(worst_b <= 1e-6, || format!("(b) max relative error {worst_b:e}"))?;

    // (c) optimality against feasible perturbations.
    let mut margin = f64::INFINITY;
    for (set, s) in [(&mean_only, &sol), (&logm, &sol_b)] {
        let features: Vec<Box<dyn Fn(f64) -> f64>> = set
            .constraints()
            .iter()
            .map(|c| {
                let kind = c.kind;
                Box::new(move |x| kind.feature(x)) as Box<dyn Fn(f64) -> f64>
            })
            .collect();
        let h = s.entropy();
        for q in feasible_perturbations(grid.levels(), &features, &s.probabilities, 100, 11) {
            margin = margin.min(h - entropy(&q));
        }
    }
    check(margin > 0.0, || format!("(c) a perturbation has higher entropy by {:e}", -margin))?;

    let elapsed = start.elapsed().as_secs_f64();
    check(elapsed < 5.0, || format!("took {elapsed:.3}s"))?;
    Ok(format!(
        "(a) lambda rel err {:.1e}, (b) max rel err {worst_b:.1e}, (c) min entropy margin {margin:.2e}; {elapsed:.3}s",
        ((lambda - analytic) / analytic).abs()
    ))
}

fn lognormal_closed_forms() -> Outcome {
    let mut worst = 0.0f64;
    for mu in [0.0, 1.0] {
        for sigma in [0.25, 0.5, 1.0, 2.0] {
            let p = LognormalParams::new(mu, sigma).map_err(|e| e.to_string())?;
            let (mean, var) = lognormal_moments(p);
            let q_mean = lognormal_expectation(|s| s, mu, sigma);
            let q_var = lognormal_expectation(|s| (s - q_mean).powi(2), mu, sigma);
            let q_h = lognormal_entropy_by_quadrature(mu, sigma);
            for (name, closed, quad) in
                [("mean", mean, q_mean), ("variance", var, q_var), ("entropy", lognormal_entropy(p), q_h)]
            {
                let err = (closed - quad).abs();
                worst = worst.max(err);
                check(err <= 1e-6, || format!("mu {mu} sigma {sigma}: {name} {closed} vs quadrature {quad}"))?;
            }
        }
    }
    Ok(format!("8 parameter pairs, worst absolute error {worst:.1e}"))
}

fn ensemble_convergence() -> Outcome {
    let start = Instant::now();
    let policy = NegotiationPolicy::default();
    let template = CompanyTemplate {
        classes: [500u64, 300, 200].iter().map(|&count| ClassSpec { count, salary: InitialSalary::Random }).collect(),
        budget: m(60_000_000),
        random_range: (m(20_000), m(200_000)),
    };
    let delta = delta_initial_state(1000, m(60_000_000)).map_err(|e| e.to_string())?;
    let delta_h = shannon_entropy(&delta.macrostate()).map_err(|e| e.to_string())?;
    let mut converged = 0;
    let mut worst_rounds = 0;
    let mut min_h = f64::INFINITY;
    let mut min_share_h = f64::INFINITY;
    for seed in 0..20u64 {
        let ensemble = template.ensemble(64, seed).map_err(|e| e.to_string())?;
        let t = run_to_equilibrium(ensemble, &policy, StopRule::default()).map_err(|e| e.to_string())?;
        if t.status != ConvergenceStatus::Converged {
            continue;
        }
        converged += 1;
        worst_rounds = worst_rounds.max(t.rounds_run());
        let gap = max_class_gap(&t.final_state);
        check(gap <= policy.epsilon(), || format!("seed {seed}: class gap {gap} at convergence"))?;
        let last = t.records.last().expect("initial record");
        min_h = min_h.min(last.mean_entropy_nats);
        min_share_h = min_share_h.min(last.mean_share_entropy_nats);
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(converged >= 19, || format!("only {converged}/20 seeds converged"))?;
    check(min_h >= delta_h, || format!("entropy at convergence {min_h} below delta start {delta_h}"))?;
    check(elapsed < 30.0, || format!("took {elapsed:.3}s"))?;
    Ok(format!(
        "{converged}/20 converged (max {worst_rounds} rounds); macrostate H >= {min_h:.4} vs delta {delta_h}; \
         share H >= {min_share_h:.4}; {elapsed:.2}s"
    ))
}

fn axiom_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    // Homogeneity: exact equality under integer scaling.
    for _ in 0..200 {
        let s = random_sample(&mut rng, 2_000);
        let c = rng.random_range(2..=40);
        let scaled = s.scaled(c).ok_or("scaling overflow")?;
        let same = share_entropy(&s) == share_entropy(&scaled)
            && theil_index(&s) == theil_index(&scaled)
            && gini(&s) == gini(&scaled);
        check(same, || format!("scaling by {c} changed a measure"))?;
    }
    // Monotonicity at n = 2 over alpha = 0.01 .. 0.50.
    let mut prev = f64::NEG_INFINITY;
    for step in 1..=50i64 {
        let a = 10_000_000 * step / 100;
        let s = SalarySample::new(vec![Money::from_minor(a), Money::from_minor(10_000_000 - a)])
            .map_err(|e| e.to_string())?;
        let h = share_entropy(&s).map_err(|e| e.to_string())?;
        check(h > prev, || format!("entropy not strictly increasing at alpha = {step}/100"))?;
        prev = h;
    }
    // Continuity: one minor unit moves the entropy by O(1/total).
    let mut worst_ratio = 0.0f64;
    for _ in 0..200 {
        let s = random_sample(&mut rng, 500);
        let i = rng.random_range(0..s.len());
        let mut bumped = s.salaries().to_vec();
        bumped[i] = bumped[i] + Money::from_minor(1);
        let b = SalarySample::new(bumped).map_err(|e| e.to_string())?;
        let total = s.total() as f64;
        let p_min = s.salaries().iter().map(|x| x.minor()).min().unwrap_or(1) as f64 / total;
        let bound = (p_min.ln().abs() + (s.len() as f64).ln() + 1.0) / total;
        let dh = (share_entropy(&b).map_err(|e| e.to_string())? - share_entropy(&s).map_err(|e| e.to_string())?).abs();
        worst_ratio = worst_ratio.max(dh / bound);
        check(dh <= bound + 1e-13, || format!("entropy jumped by {dh:e} (bound {bound:e})"))?;
    }
    // Saturation: normalised entropy of equal pay is 1 for every n.
    for n in [2usize, 5, 50, 500, 5000] {
        let s = SalarySample::new(vec![m(40_000); n]).map_err(|e| e.to_string())?;
        let v = normalized_share_entropy(&s).map_err(|e| e.to_string())?;
        check((v - 1.0).abs() <= 1e-12, || format!("normalised entropy {v} at n = {n}"))?;
    }
    // Decomposition over random partitions.
    let mut worst_dec = 0.0f64;
    for _ in 0..200 {
        let s = random_sample(&mut rng, 2_000);
        let n = s.len();
        let k = rng.random_range(1..=n.min(10));
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let mut groups: Vec<Vec<usize>> = idx[..k].iter().map(|&i| vec![i]).collect();
        for &i in &idx[k..] {
            groups[rng.random_range(0..k)].push(i);
        }
        let d = theil_decomposition(&s, &groups).map_err(|e| e.to_string())?;
        worst_dec = worst_dec.max((d.reconstructed_total() - d.total).abs());
    }
    check(worst_dec <= 1e-12, || format!("decomposition error {worst_dec:e}"))?;
    Ok(format!(
        "homogeneity exact, monotone over 50 alphas, continuity ratio <= {worst_ratio:.3}, saturation exact, \
         decomposition error {worst_dec:.1e}"
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let config = dir.path().join("market.toml");
    std::fs::write(
        &config,
        "companies = 16\nn_per_company = 1000\nbudget = \"60000000.00\"\nalpha = \"1/2\"\nepsilon = \"1.00\"\n\
         seed = 2024\nmax_rounds = 10000\nquiet_rounds = 3\nrandom_low = \"20000.00\"\nrandom_high = \"200000.00\"\n\
         [[classes]]\ncount = 500\nsalary = \"RANDOM\"\n[[classes]]\ncount = 300\nsalary = \"RANDOM\"\n\
         [[classes]]\ncount = 200\nsalary = \"RANDOM\"\n",
    )
    .map_err(|e| e.to_string())?;
    let mut salaries = String::from("salary,category\n");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..500 {
        salaries.push_str(&format!("{},{}\n", Money::from_minor(rng.random_range(1_000_000..20_000_000)), i % 3));
    }
    std::fs::write(dir.path().join("salaries.csv"), salaries).map_err(|e| e.to_string())?;

    let bin = env!("CARGO_BIN_EXE_fairpay");
    for run in ["a", "b"] {
        let sim = Command::new(bin)
            .args(["simulate", "market.toml", "--out-dir", run])
            .current_dir(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        check(sim.status.success(), || format!("simulate failed: {}", String::from_utf8_lossy(&sim.stderr)))?;
        let report = Command::new(bin)
            .args(["analyze", "salaries.csv", "--fit", "--out", &format!("{run}/report.json")])
            .current_dir(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        check(report.status.success(), || format!("analyze failed: {}", String::from_utf8_lossy(&report.stderr)))?;
    }
    let mut bytes = 0;
    for file in ["trajectory.csv", "final_state.json", "report.json"] {
        let a = std::fs::read(dir.path().join("a").join(file)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dir.path().join("b").join(file)).map_err(|e| e.to_string())?;
        check(a == b, || format!("{file} differs between runs"))?;
        bytes += a.len();
    }
    Ok(format!("trajectory.csv, final_state.json and report.json byte-identical ({bytes} bytes)"))
}

fn lognormal_substitution() -> Outcome {
    let dist = LogNormal::new(1.0, 0.5).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let big: Vec<f64> = (0..100_000).map(|_| dist.sample(&mut rng)).collect();
    let fit = fit_lognormal_values(&big).map_err(|e| e.to_string())?;
    check((fit.mu() - 1.0).abs() <= 0.01 && (fit.sigma() - 0.5).abs() <= 0.01, || {
        format!("fit mu {} sigma {}", fit.mu(), fit.sigma())
    })?;
    let p = LognormalParams::new(1.0, 0.5).map_err(|e| e.to_string())?;
    let n = 10_000;
    let critical = 1.63 / (n as f64).sqrt();
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        worst = worst.max(ks_statistic_values(&values, p));
    }
    check(worst < critical, || format!("KS {worst} >= {critical}"))?;
    Ok(format!("mu {:.4}, sigma {:.4}; worst KS over 20 seeds {worst:.4} < {critical:.4}", fit.mu(), fit.sigma()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 worked example", worked_example),
        ("2 multiplicity", multiplicity),
        ("3 theil identity", theil_identity),
        ("4 maxent solver", maxent_solver),
        ("5 lognormal closed forms", lognormal_closed_forms),
        ("6 ensemble convergence", ensemble_convergence),
        ("7 axiom suite", axiom_suite),
        ("8 determinism", determinism),
        ("lognormal fit substitution", lognormal_substitution),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS [{name}] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{name}] {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
