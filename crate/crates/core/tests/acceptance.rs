//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test --release --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use safebo::baselines::BaselineKind;
use safebo::benchmarks::{tabulate, validate, Benchmark, BenchmarkSpec, Problem};
use safebo::confidence::ConfidenceField;
use safebo::domain::{GridDomain, GridIndex};
use safebo::gp::{GpModel, KernelFamily, KernelSpec, Observation};
use safebo::harness::{problem_spec, run_seed_observed, Algorithm, ExperimentConfig, RegretLog};
use safebo::msafeopt::{AlgoConfig, Case, MSafeOpt, StepOutcome};

const ROUNDS: usize = 100;
const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

struct Report {
    failed: usize,
}

impl Report {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed += 1;
        }
    }
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = v.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

// ---------------------------------------------------------------------------
// GP posterior against a dense inverse

fn kernel_ref(family: KernelFamily, variance: f64, ls: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let r2: f64 = (0..a.len()).map(|i| ((a[i] - b[i]) / ls[i]).powi(2)).sum();
    match family {
        KernelFamily::Matern52 => {
            let r = (5.0 * r2).sqrt();
            variance * (1.0 + r + r * r / 3.0) * (-r).exp()
        }
        KernelFamily::SquaredExponential => variance * (-r2 / 2.0).exp(),
    }
}

/// Gauss-Jordan with partial pivoting on a row-major n x n matrix.
fn invert(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        for k in 0..n {
            a.swap(col * n + k, piv * n + k);
            inv.swap(col * n + k, piv * n + k);
        }
        let d = a[col * n + col];
        for k in 0..n {
            a[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let m = a[row * n + col];
            if m != 0.0 {
                for k in 0..n {
                    a[row * n + k] -= m * a[col * n + k];
                    inv[row * n + k] -= m * inv[col * n + k];
                }
            }
        }
    }
    inv
}

fn gp_oracle(report: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let dim = rng.random_range(1..=3);
        let n = rng.random_range(1..=50);
        let family = if rng.random_bool(0.5) {
            KernelFamily::Matern52
        } else {
            KernelFamily::SquaredExponential
        };
        let variance = rng.random_range(0.5..5.0);
        let ls: Vec<f64> = (0..dim).map(|_| rng.random_range(0.15..1.0)).collect();
        let noise = rng.random_range(1e-3..1e-1);
        let point = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.random()).collect() };
        let xs: Vec<Vec<f64>> = (0..n).map(|_| point(&mut rng)).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let qs: Vec<Vec<f64>> = (0..25).map(|_| point(&mut rng)).collect();

        let mut model = GpModel::new(KernelSpec::new(family, variance, ls.clone()).unwrap(), noise).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            model.add_observation(Observation::new(x.clone(), *y)).unwrap();
        }
        let (mu, sd) = model.posterior(&qs).unwrap();

        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                k[i * n + j] = kernel_ref(family, variance, &ls, &xs[i], &xs[j]) + if i == j { noise } else { 0.0 };
            }
        }
        let kinv = invert(k, n);
        for (q, (m, s)) in qs.iter().zip(mu.iter().zip(&sd)) {
            let kq: Vec<f64> = xs.iter().map(|x| kernel_ref(family, variance, &ls, q, x)).collect();
            let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| kinv[i * n + j] * kq[j]).sum()).collect();
            let m_ref: f64 = w.iter().zip(&ys).map(|(a, b)| a * b).sum();
            let v_ref = variance - w.iter().zip(&kq).map(|(a, b)| a * b).sum::<f64>();
            worst = worst.max((m - m_ref).abs()).max((s * s - v_ref.max(0.0)).abs());
        }
    }
    let elapsed = start.elapsed();
    report.check(
        "gp-oracle-equivalence",
        worst <= 1e-8 && elapsed < Duration::from_secs(10),
        format!("20 configs, max abs error {worst:.2e} (tol 1e-8), {:.2} s (limit 10 s)", elapsed.as_secs_f64()),
    );
}

// ---------------------------------------------------------------------------
// Experiment runs shared by the statistical criteria

struct Runs {
    logs: Vec<RegretLog>,
    /// Rounds in which the oracle's x* was outside D_X^t, summed over seeds.
    xstar_dropped: usize,
    /// (round, x) pairs outside D_X^t, summed over seeds.
    eliminated: usize,
}

fn run(benchmark: Benchmark, algorithm: Algorithm, c: f64) -> (Problem, Runs) {
    let mut config = ExperimentConfig::new(benchmark);
    config.algorithm = algorithm;
    config.rounds = ROUNDS;
    config.seeds = SEEDS.to_vec();
    config.grid = Some(vec![50]);
    config.growth_scale = c;
    let problem = Problem::build(problem_spec(&config).unwrap()).unwrap();
    let x_star = problem.oracle.global.index.x;
    let mut dropped = 0;
    let mut eliminated = 0;
    let logs = SEEDS
        .iter()
        .map(|&seed| {
            run_seed_observed(&problem, &config, seed, |_, d| {
                eliminated += d.state.surviving.iter().filter(|s| !**s).count();
                if !d.state.surviving[x_star] {
                    dropped += 1;
                }
            })
            .unwrap()
        })
        .collect();
    (
        problem,
        Runs {
            logs,
            xstar_dropped: dropped,
            eliminated,
        },
    )
}

impl Runs {
    fn final_normalized(&self) -> (f64, f64) {
        let at: Vec<_> = self.logs.iter().map(|l| l.normalized_at(l.rows.len()).unwrap()).collect();
        (mean(at.iter().map(|a| a.0)), mean(at.iter().map(|a| a.1)))
    }

    fn normalized_r_at(&self, t: usize) -> f64 {
        mean(self.logs.iter().map(|l| l.normalized_at(t).map_or(f64::NAN, |a| a.0)))
    }

    fn r_x_at(&self, t: usize) -> f64 {
        mean(self.logs.iter().map(|l| l.rows.get(t - 1).map_or(f64::NAN, |r| r.r_x)))
    }

    fn violations(&self) -> usize {
        self.logs.iter().map(RegretLog::violations).sum()
    }

    fn complete(&self) -> bool {
        self.logs.iter().all(|l| l.rows.len() == ROUNDS)
    }
}

fn experiments(report: &mut Report) {
    let case1 = Algorithm::MSafeOpt(Case::Case1);
    let case2 = Algorithm::MSafeOpt(Case::Case2);
    let algos = [
        case1,
        case2,
        Algorithm::Baseline(BaselineKind::SafeOptMc),
        Algorithm::Baseline(BaselineKind::PredVar),
    ];

    let start = Instant::now();
    let mut all = Vec::new();
    for b in [Benchmark::ClinicalTrial, Benchmark::Synthetic2D] {
        for a in algos {
            let (p, r) = run(b, a, 1.0);
            all.push((b, a, p, r));
        }
    }
    let elapsed = start.elapsed();
    let get = |b: Benchmark, a: Algorithm| &all.iter().find(|e| e.0 == b && e.1 == a).unwrap().3;

    let violations: usize = all.iter().map(|e| e.3.violations()).sum();
    let complete = all.iter().all(|e| e.3.complete());
    report.check(
        "safety",
        violations == 0 && complete && elapsed < Duration::from_secs(300),
        format!(
            "clinical + synthetic2d, 4 algorithms x 5 seeds x T = {ROUNDS}: {violations} violating rows, {:.1} s (limit 300 s)",
            elapsed.as_secs_f64()
        ),
    );

    let c1 = get(Benchmark::ClinicalTrial, case1);
    let (r25, r100) = (c1.normalized_r_at(25), c1.normalized_r_at(ROUNDS));
    report.check(
        "sublinearity",
        r100 <= 0.6 * r25,
        format!("case1 clinical R_100/100 = {r100:.6} vs 0.6 x R_25/25 = {:.6}", 0.6 * r25),
    );

    for b in [Benchmark::ClinicalTrial, Benchmark::Synthetic2D] {
        let (r1, _) = get(b, case1).final_normalized();
        let (_, rp2) = get(b, case2).final_normalized();
        let (rpv, rppv) = get(b, Algorithm::Baseline(BaselineKind::PredVar)).final_normalized();
        report.check(
            &format!("baseline-ordering/{b}"),
            r1 < rpv && rp2 < rppv,
            format!("R_T/T case1 {r1:.6} vs predvar {rpv:.6}; R'_T/T case2 {rp2:.6} vs predvar {rppv:.6}"),
        );
    }

    let c2 = get(Benchmark::ClinicalTrial, case2);
    let (rx5, rx100) = (c2.r_x_at(5), c2.r_x_at(ROUNDS));
    report.check(
        "per-x-convergence",
        rx100 <= 0.2 * rx5,
        format!("case2 clinical r^X_100 = {rx100:.6} vs 0.2 x r^X_5 = {:.6}", 0.2 * rx5),
    );

    let dropped: Vec<_> = [Benchmark::ClinicalTrial, Benchmark::Synthetic2D]
        .map(|b| (b, get(b, case1)))
        .iter()
        .map(|(b, r)| format!("{b}: x* out in {} rounds, {} eliminated (round, x) pairs", r.xstar_dropped, r.eliminated))
        .collect();
    report.check(
        "elimination-soundness",
        [Benchmark::ClinicalTrial, Benchmark::Synthetic2D].iter().all(|&b| get(b, case1).xstar_dropped == 0),
        dropped.join("; "),
    );

    let (_, c5) = run(Benchmark::ClinicalTrial, case1, 5.0);
    let (r_c5, _) = c5.final_normalized();
    let (r_c1, _) = c1.final_normalized();
    report.check(
        "growth-scale",
        r_c5 >= r_c1,
        format!("case1 clinical R_T/T with c = 5: {r_c5:.6}, c = 1: {r_c1:.6}"),
    );
}

// ---------------------------------------------------------------------------
// Round geometry against a point-by-point reimplementation

struct Expected {
    selected: Option<(usize, usize)>,
    surviving: Vec<bool>,
    expanders: Vec<(usize, usize)>,
    maximizers: Vec<(usize, usize)>,
}

#[allow(clippy::too_many_arguments)]
fn brute_force(
    case: Case,
    n: usize,
    s_val: &[f64],
    f: &ConfidenceField,
    g: &ConfidenceField,
    h: f64,
    l_f: f64,
    l_g: f64,
    refined: bool,
) -> Expected {
    let at = |s, x| GridIndex::new(s, x);
    let is_safe = |s: usize, x: usize| s == 0 || g.ucb(at(s, x)) <= h;

    let mut best_lcb = f64::NEG_INFINITY;
    for x in 0..n {
        for s in 0..n {
            if is_safe(s, x) && f.lcb(at(s, x)) > best_lcb {
                best_lcb = f.lcb(at(s, x));
            }
        }
    }

    let mut boundary = vec![0; n];
    let mut gain = vec![0.0; n];
    let mut max_ucb = vec![f64::NEG_INFINITY; n];
    let mut max_lcb = vec![f64::NEG_INFINITY; n];
    let mut hat = vec![0; n];
    for x in 0..n {
        for s in 0..n {
            if g.ucb(at(s, x)) <= h {
                boundary[x] = s;
            }
        }
        let b = boundary[x];
        let mut s_opt = s_val[b] + (h - g.lcb(at(b, x))).max(0.0) / l_g;
        if s_opt > 1.0 {
            s_opt = 1.0;
        }
        gain[x] = f.ucb(at(b, x)) + l_f * (s_opt - s_val[b]);
        let field = if case == Case::MSafeUcb { g } else { f };
        let mut best = f64::NEG_INFINITY;
        for s in 0..=b {
            max_ucb[x] = max_ucb[x].max(f.ucb(at(s, x)));
            max_lcb[x] = max_lcb[x].max(f.lcb(at(s, x)));
            if field.ucb(at(s, x)) > best {
                best = field.ucb(at(s, x));
                hat[x] = s;
            }
        }
    }

    let surviving: Vec<bool> = (0..n)
        .map(|x| match case {
            Case::Case1 => !(max_ucb[x] < best_lcb && gain[x] <= best_lcb),
            Case::Case3 => gain[x] > best_lcb,
            Case::Case2 | Case::MSafeUcb => true,
        })
        .collect();
    let mut expanders = Vec::new();
    let mut maximizers = Vec::new();
    for x in 0..n {
        if !surviving[x] {
            continue;
        }
        let expand = match case {
            Case::Case1 => gain[x] > best_lcb,
            Case::Case2 => gain[x] > max_lcb[x],
            Case::Case3 => true,
            Case::MSafeUcb => boundary[x] != n - 1,
        };
        if expand {
            expanders.push((x, boundary[x]));
        }
        if matches!(case, Case::Case1 | Case::Case2) {
            maximizers.push((x, hat[x]));
        }
    }

    let mut selected = None;
    let mut best_acq = f64::NEG_INFINITY;
    for x in 0..n {
        for s in 0..n {
            let in_g = expanders.contains(&(x, s));
            let in_m = maximizers.contains(&(x, s));
            if !in_g && !in_m {
                continue;
            }
            let sf = f.beta() * f.sigma(at(s, x));
            let sg = g.beta() * g.sigma(at(s, x));
            let value = if in_g {
                match case {
                    Case::MSafeUcb => sg,
                    _ if refined => sf.max(l_f / l_g * sg),
                    _ => sf.max(sg),
                }
            } else {
                sf
            };
            if value > best_acq {
                best_acq = value;
                selected = Some((x, s));
            }
        }
    }
    Expected {
        selected,
        surviving,
        expanders,
        maximizers,
    }
}

fn geometry(report: &mut Report) {
    const N: usize = 5;
    let grid = GridDomain::build(&[(0.0, 1.0), (0.0, 1.0)], &[N, N]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cases = [Case::Case1, Case::Case2, Case::Case3, Case::MSafeUcb];
    let mut mismatches = Vec::new();
    let mut eliminated = 0;
    for trial in 0..50 {
        let case = cases[trial % cases.len()];
        let beta = [1.0, 2.0, 3.0][rng.random_range(0..3)];
        let mut mu_g = Vec::with_capacity(N * N);
        for _ in 0..N {
            let mut level = rng.random_range(0.0..0.4);
            for _ in 0..N {
                mu_g.push(level);
                level += rng.random_range(0.0..0.3);
            }
        }
        let mu_f: Vec<f64> = (0..N * N).map(|_| rng.random_range(0.0..1.0)).collect();
        let sd_f: Vec<f64> = (0..N * N).map(|_| rng.random_range(0.0..0.15)).collect();
        let sd_g: Vec<f64> = (0..N * N).map(|_| rng.random_range(0.0..0.15)).collect();
        let f = ConfidenceField::from_parts(N, N, mu_f, sd_f, beta).unwrap();
        let g = ConfidenceField::from_parts(N, N, mu_g, sd_g, beta).unwrap();
        let h = rng.random_range(0.5..1.2);
        let l_f = rng.random_range(0.0..2.0);
        let l_g = rng.random_range(0.2..3.0);
        let refined = rng.random_bool(0.5);

        let mut config = AlgoConfig::new(case, l_f, l_g, h);
        config.refined_acq = refined;
        let mut algo = MSafeOpt::new(config).unwrap();
        let got = algo.decide(&grid, &f, &g).unwrap();
        let want = brute_force(case, N, grid.s_values(), &f, &g, h, l_f, l_g, refined);
        eliminated += want.surviving.iter().filter(|s| !**s).count();

        let pairs = |v: &[GridIndex]| -> Vec<(usize, usize)> { v.iter().map(|i| (i.x, i.s)).collect() };
        let ok = match &got {
            StepOutcome::Select(d) => {
                want.selected == Some((d.selected.x, d.selected.s))
                    && d.state.surviving == want.surviving
                    && pairs(&d.state.expanders) == want.expanders
                    && pairs(&d.state.maximizers) == want.maximizers
            }
            StepOutcome::Exhausted { .. } => want.selected.is_none(),
        };
        if !ok {
            mismatches.push(trial);
        }
    }
    report.check(
        "geometry-brute-force",
        mismatches.is_empty(),
        format!("50 random 5x5 fields, {eliminated} eliminated columns exercised, mismatching trials {mismatches:?}"),
    );
}

// ---------------------------------------------------------------------------

fn benchmark_validity(report: &mut Report) {
    for b in Benchmark::ALL {
        let spec = BenchmarkSpec::new(b);
        let res: Vec<String> = spec.resolution.iter().map(usize::to_string).collect();
        let r = validate(&spec, &tabulate(&spec).unwrap());
        report.check(
            &format!("benchmark-validity/{b}"),
            r.passed(),
            format!("{} grid: {}", res.join("x"), r.lines().join("; ")),
        );
    }
}

fn main() -> ExitCode {
    let mut report = Report { failed: 0 };
    gp_oracle(&mut report);
    geometry(&mut report);
    benchmark_validity(&mut report);
    experiments(&mut report);
    if report.failed == 0 {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{} acceptance criteria failed", report.failed);
        ExitCode::FAILURE
    }
}
