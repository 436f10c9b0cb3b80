//! Acceptance suite. One test per criterion; each prints a `PASS` line with
//! the measured quantities (visible with `-- --nocapture`).

use copoly::analysis;
use copoly::theory;
use copoly::{simulate, RateSet, RegimeClass, SimConfig, StopRule};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::time::{Duration, Instant};

fn pass(number: u32, name: &str, detail: String) {
    println!("acceptance {number:02} {name}: PASS - {detail}");
}

fn paper_rates() -> RateSet {
    RateSet::new(vec![1.0, 1.2], vec![1.8, 2.592]).unwrap()
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Log-uniform over [0.01, 10].
fn random_rate(rng: &mut ChaCha8Rng) -> f64 {
    let lo = 0.01f64.ln();
    let hi = 10.0f64.ln();
    (lo + uniform(rng) * (hi - lo)).exp()
}

fn random_rate_set(rng: &mut ChaCha8Rng, dim: usize) -> RateSet {
    let k_plus = (0..dim).map(|_| random_rate(rng)).collect();
    let k_minus = (0..dim).map(|_| random_rate(rng)).collect();
    RateSet::new(k_plus, k_minus).unwrap()
}

/// The shared pool of random instances for criteria 1, 2, and 4.
fn random_rate_sets(seed: u64, count: usize) -> Vec<RateSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let dim = 1 + (rng.next_u64() % 6) as usize;
            random_rate_set(&mut rng, dim)
        })
        .collect()
}

const POOL_SEED: u64 = 0xC0901;

/// Independent evaluation of g(m) with reverse-order accumulation.
fn g_independent(rates: &RateSet, m: f64) -> f64 {
    rates
        .attach_rates()
        .iter()
        .zip(rates.detach_rates())
        .rev()
        .map(|(kp, km)| kp / (m + km))
        .sum()
}

/// Quadratic-formula oracle for the d = 2 root of g(m) = 1.
fn quadratic_m_oracle(rates: &RateSet) -> f64 {
    let (k1p, k2p) = (rates.attach_rates()[0], rates.attach_rates()[1]);
    let (k1m, k2m) = (rates.detach_rates()[0], rates.detach_rates()[1]);
    let b = k1m + k2m - (k1p + k2p);
    let c = k1m * k2m - k1p * k2m - k2p * k1m;
    (-b + (b * b - 4.0 * c).sqrt()) / 2.0
}

#[test]
fn criterion_01_classification() {
    let start = Instant::now();
    let sets = random_rate_sets(POOL_SEED, 1000);
    let mut tallies = [0usize; 3];
    for rates in &sets {
        // Independent alpha: reverse-order sum of the rate ratios.
        let alpha: f64 = rates
            .attach_rates()
            .iter()
            .zip(rates.detach_rates())
            .rev()
            .map(|(kp, km)| kp / km)
            .sum();
        let expected = if (alpha - 1.0).abs() <= theory::ALPHA_EQUALITY_TOL * alpha.max(1.0) {
            RegimeClass::NullRecurrent
        } else if alpha < 1.0 {
            RegimeClass::PositiveRecurrent
        } else {
            RegimeClass::Transient
        };
        let got = theory::classify(rates);
        assert_eq!(got, expected, "classification mismatch for {rates:?}");
        tallies[match got {
            RegimeClass::PositiveRecurrent => 0,
            RegimeClass::NullRecurrent => 1,
            RegimeClass::Transient => 2,
        }] += 1;
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    pass(
        1,
        "classification",
        format!(
            "1000 instances agree with sign(alpha - 1): {} recurrent, {} null, {} transient ({elapsed:?})",
            tallies[0], tallies[1], tallies[2]
        ),
    );
}

#[test]
fn criterion_02_m_solver() {
    let start = Instant::now();
    let sets = random_rate_sets(POOL_SEED, 1000);
    let mut solved = 0usize;
    let mut worst_residual = 0.0f64;
    for rates in &sets {
        if theory::classify(rates) != RegimeClass::Transient {
            continue;
        }
        let m = theory::solve_m(rates, 1e-12).expect("transient instance solves");
        let residual = (g_independent(rates, m) - 1.0).abs();
        assert!(residual <= 1e-12, "residual {residual} for {rates:?}");
        worst_residual = worst_residual.max(residual);
        solved += 1;
    }
    let rates = paper_rates();
    let m = theory::solve_m(&rates, 1e-12).unwrap();
    let oracle = quadratic_m_oracle(&rates);
    assert!((oracle - 0.0387315).abs() < 1e-6);
    assert!((m - oracle).abs() <= 1e-6, "m {m} vs oracle {oracle}");
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    pass(
        2,
        "m-solver",
        format!(
            "{solved} transient instances, worst |g(m)-1| = {worst_residual:.2e}; paper m = {m:.7} vs oracle {oracle:.7} ({elapsed:?})"
        ),
    );
}

#[test]
fn criterion_03_composition_closed_form() {
    let rates = paper_rates();
    let m = theory::solve_m(&rates, 1e-12).unwrap();
    let sigma = theory::sigma_bar(&rates, m).unwrap();
    assert!((sigma[0] - 0.5436).abs() <= 5e-4, "sigma_1 = {}", sigma[0]);
    assert!((sigma[1] - 0.4564).abs() <= 5e-4, "sigma_2 = {}", sigma[1]);

    let mut rng = ChaCha8Rng::seed_from_u64(0xC0903);
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    while checked < 1000 {
        let candidate = random_rate_set(&mut rng, 2);
        if theory::classify(&candidate) != RegimeClass::Transient {
            continue;
        }
        let (s1, s2) = theory::two_monomer_closed_form(&candidate).unwrap();
        let m = theory::solve_m(&candidate, 1e-12).unwrap();
        let general = theory::sigma_bar(&candidate, m).unwrap();
        let dev = (s1 - general[0]).abs().max((s2 - general[1]).abs());
        assert!(dev <= 1e-10, "dev {dev} for {candidate:?}");
        worst = worst.max(dev);
        checked += 1;
    }
    pass(
        3,
        "composition closed form",
        format!(
            "paper sigma = ({:.5}, {:.5}) within 5e-4 of (0.5436, 0.4564); 1000 transient d=2 instances, worst closed-vs-general dev = {worst:.2e}",
            sigma[0], sigma[1]
        ),
    );
}

#[test]
fn criterion_04_velocity_identities() {
    let sets = random_rate_sets(POOL_SEED, 1000);
    let mut checked = 0usize;
    let mut worst_vm = 0.0f64;
    let mut worst_reciprocal = 0.0f64;
    for rates in &sets {
        if theory::classify(rates) != RegimeClass::Transient {
            continue;
        }
        let m = theory::solve_m(rates, 1e-12).unwrap();
        let sigma = theory::sigma_bar(rates, m).unwrap();
        let escape = theory::escape_probabilities(rates, m).unwrap();
        let v = theory::velocity(rates, &sigma).unwrap();
        assert!((v - m).abs() <= 1e-10, "v = {v}, m = {m} for {rates:?}");
        worst_vm = worst_vm.max((v - m).abs());

        let v_bar = theory::discrete_velocity(rates, &sigma, &escape).unwrap();
        let levels = theory::level_time_fractions(rates, &sigma).unwrap();
        let k_plus = rates.total_attach_rate();
        let mean_holding_per_level: f64 = levels
            .iter()
            .zip(rates.detach_rates())
            .map(|(l, km)| l / (km + k_plus))
            .sum();
        let dev = (1.0 / v - mean_holding_per_level / v_bar).abs();
        assert!(dev <= 1e-10, "reciprocal identity dev {dev} for {rates:?}");
        worst_reciprocal = worst_reciprocal.max(dev);
        checked += 1;
    }

    let rates = paper_rates();
    let summary = theory::summarize(&rates, 1e-12).unwrap();
    let v = summary.transient.unwrap().velocity;
    let figure_value = 0.0382;
    let relative = (figure_value - v).abs() / v;
    assert!(
        relative <= 0.02,
        "figure value {figure_value} vs computed v {v}: {relative}"
    );
    pass(
        4,
        "velocity identities",
        format!(
            "{checked} transient instances: worst |v - m| = {worst_vm:.2e}, worst reciprocal-identity dev = {worst_reciprocal:.2e}; paper v = {v:.5} vs 0.0382 ({:.2}% rel)",
            relative * 100.0
        ),
    );
}

#[test]
fn criterion_05_monte_carlo_composition() {
    let rates = paper_rates();
    let mut sigma_1_values = Vec::new();
    for seed in 1..=10u64 {
        let traj = simulate(&SimConfig::new(rates.clone(), seed, StopRule::MaxTime(5e4)));
        let final_state = traj.final_state();
        let counts = final_state.monomer_counts(2).unwrap();
        sigma_1_values.push(counts[0] as f64 / final_state.len() as f64);
    }
    let mean = sigma_1_values.iter().sum::<f64>() / sigma_1_values.len() as f64;
    let dev = (mean - 0.5436).abs();
    assert!(dev <= 0.02, "replica-mean sigma_1 = {mean}");
    pass(
        5,
        "Monte Carlo composition",
        format!("10 replicas at T = 5e4, seeds 1..10: mean sigma_1(T) = {mean:.4} (dev {dev:.4} <= 0.02)"),
    );
}

#[test]
fn criterion_06_monte_carlo_velocity() {
    let rates = paper_rates();
    let summary = theory::summarize(&rates, 1e-12).unwrap();
    let v_theory = summary.transient.unwrap().velocity;
    let mut estimates = Vec::new();
    for seed in 1..=10u64 {
        let traj = simulate(&SimConfig::new(rates.clone(), seed, StopRule::MaxTime(2e5)));
        estimates.push(analysis::empirical_velocity(&traj, 0.2).unwrap());
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let relative = (mean - v_theory).abs() / v_theory;
    assert!(
        relative <= 0.15,
        "mean velocity {mean} vs theory {v_theory}: {relative}"
    );
    pass(
        6,
        "Monte Carlo velocity",
        format!(
            "10 replicas at T = 2e5, burn-in 0.2: mean velocity {mean:.5} vs v = {v_theory:.5} ({:.2}% rel <= 15%)",
            relative * 100.0
        ),
    );
}

fn cone_law_run() -> (RateSet, copoly::Trajectory) {
    let rates = RateSet::new(vec![1.0, 3.0], vec![1.0, 1.0]).unwrap();
    let traj = simulate(&SimConfig::new(rates.clone(), 7, StopRule::MaxJumps(1_000_000)));
    (rates, traj)
}

#[test]
fn criterion_07_cone_chain_law() {
    let (rates, traj) = cone_law_run();
    let guard = analysis::default_tail_guard(traj.num_jumps());
    let boundary = analysis::extract_boundary(&traj, guard).unwrap();
    let empirical = analysis::cone_chain_empirical(&boundary, 2).unwrap();
    let mut worst = 0.0f64;
    for (i, row) in empirical.rows.iter().enumerate() {
        let row = row.as_ref().expect("both rows observed");
        for (j, expected) in [0.25, 0.75].iter().enumerate() {
            let dev = (row[j] - expected).abs();
            assert!(dev <= 0.02, "row {i} col {j}: {} vs {expected}", row[j]);
            worst = worst.max(dev);
        }
    }

    let m = theory::solve_m(&rates, 1e-12).unwrap();
    let sigma = theory::sigma_bar(&rates, m).unwrap();
    let escape = theory::escape_probabilities(&rates, m).unwrap();
    let matrix = theory::cone_chain_matrix(&rates, &escape).unwrap();
    for row in &matrix {
        for (entry, s) in row.iter().zip(&sigma) {
            assert!((entry - s).abs() <= 1e-10);
        }
    }
    pass(
        7,
        "cone-chain law",
        format!(
            "1e6 jumps: empirical rows within {worst:.4} of (0.25, 0.75) (counts {:?}); theory rows equal sigma within 1e-10",
            empirical.counts
        ),
    );
}

#[test]
fn criterion_08_level_time_fractions() {
    let (rates, traj) = cone_law_run();
    let m = theory::solve_m(&rates, 1e-12).unwrap();
    let sigma = theory::sigma_bar(&rates, m).unwrap();
    let levels = theory::level_time_fractions(&rates, &sigma).unwrap();
    let empirical = analysis::level_fraction_empirical(&traj).unwrap();
    let mut worst = 0.0f64;
    for i in 0..2 {
        let dev = (empirical.per_type[i] - levels[i]).abs();
        assert!(dev <= 0.02, "type {i}: {} vs {}", empirical.per_type[i], levels[i]);
        worst = worst.max(dev);
    }
    assert!(empirical.root < 0.01, "root fraction {}", empirical.root);
    pass(
        8,
        "level-time fractions",
        format!(
            "chi_i(n)/n = ({:.4}, {:.4}) vs l = ({:.4}, {:.4}), worst dev {worst:.4}; root fraction {:.2e} < 0.01",
            empirical.per_type[0], empirical.per_type[1], levels[0], levels[1], empirical.root
        ),
    );
}

#[test]
fn criterion_09_stationary_regime() {
    let rates = RateSet::new(vec![0.3, 0.2], vec![1.0, 1.0]).unwrap();
    let traj = simulate(&SimConfig::new(rates.clone(), 9, StopRule::MaxTime(1e5)));
    let occupation = analysis::root_occupation(&traj);
    let dev = (occupation - 0.5).abs();
    assert!(dev <= 0.02, "root occupation {occupation}");

    // Length distribution versus (1 - alpha) alpha^l, states sampled every
    // 5 time units (roughly one mixing time apart at these rates).
    let alpha = theory::alpha(&rates);
    let sample_times: Vec<f64> = (1..=20_000).map(|i| i as f64 * 5.0).collect();
    let lengths = traj.length_series(&sample_times).unwrap();
    let mut observed = [0u64; 12]; // lengths 0..=10 plus a tail bin
    for len in lengths {
        observed[len.min(11)] += 1;
    }
    let n = sample_times.len() as f64;
    let mut statistic = 0.0;
    for (l, &count) in observed.iter().enumerate() {
        let probability = if l <= 10 {
            (1.0 - alpha) * alpha.powi(l as i32)
        } else {
            alpha.powi(11) // tail mass: sum_{l >= 11} (1 - alpha) alpha^l
        };
        let expected = probability * n;
        statistic += (count as f64 - expected).powi(2) / expected;
    }
    // 0.999 quantile of chi-square with 11 degrees of freedom.
    let critical = 31.264;
    assert!(
        statistic <= critical,
        "chi-square statistic {statistic} exceeds {critical}"
    );
    pass(
        9,
        "stationary regime",
        format!(
            "root occupation {occupation:.4} (dev {dev:.4} <= 0.02); length-distribution chi-square {statistic:.2} <= {critical} (df 11, level 1e-3)"
        ),
    );
}

#[test]
fn criterion_10_boundary_structure() {
    let rates = paper_rates();
    let traj = simulate(&SimConfig::new(rates, 1, StopRule::MaxTime(2e5)));
    let n_jumps = traj.num_jumps();
    let boundary =
        analysis::extract_boundary(&traj, analysis::default_tail_guard(n_jumps)).unwrap();

    // Reconstructed lengths and suffix minima over the whole log.
    let mut lengths = Vec::with_capacity(n_jumps + 1);
    let mut len = 0usize;
    lengths.push(0usize);
    for event in traj.events() {
        match event {
            copoly::Event::Attach(_) => len += 1,
            copoly::Event::Detach => len -= 1,
        }
        lengths.push(len);
    }
    let mut suffix_min = vec![usize::MAX; n_jumps + 2];
    for n in (0..=n_jumps).rev() {
        suffix_min[n] = lengths[n].min(suffix_min[n + 1]);
    }

    let final_sequence = traj.final_state().sequence();
    let mut violations = 0usize;
    let mut previous_index = None;
    for level in &boundary.levels {
        let (k, e) = (level.level, level.jump_index);
        // Last-exit indices strictly increase and sit at their level.
        if lengths[e] != k || previous_index.is_some_and(|p| p >= e) {
            violations += 1;
        }
        previous_index = Some(e);
        // The walk never returns to level k: the prefix below k+1 is frozen,
        // which is exactly the prefix property between consecutive levels.
        if e < n_jumps && suffix_min[e + 1] <= k {
            violations += 1;
        }
        if level.tip != (k > 0).then(|| final_sequence[k - 1]) {
            violations += 1;
        }
    }

    // Independent replay oracle: the boundary polymer at level k must equal
    // the length-k prefix of the final state, state
    // reconstruction included.
    let max_level = boundary.max_level();
    let step = (max_level / 64).max(1);
    let mut replayed = 0usize;
    for level in boundary.levels.iter().filter(|l| l.level % step == 0) {
        let t = if level.jump_index == 0 {
            0.0
        } else {
            traj.jump_times()[level.jump_index - 1]
        };
        let state = traj.state_at(t).unwrap();
        if state.sequence() != &final_sequence[..level.level] {
            violations += 1;
        }
        replayed += 1;
    }

    // Staircase property: the boundary level reached by jump n never exceeds
    // the walk's length at jump n, at every index of the log.
    let mut current = 0usize;
    let mut next = 1usize;
    for (n, &length) in lengths.iter().enumerate() {
        while next < boundary.levels.len() && boundary.levels[next].jump_index <= n {
            current = boundary.levels[next].level;
            next += 1;
        }
        if length < current {
            violations += 1;
        }
    }

    assert_eq!(violations, 0);
    pass(
        10,
        "boundary structure",
        format!(
            "T = 2e5 run ({} jumps, {} levels): prefix property, {replayed} replay checks, and staircase-below-trajectory all hold with zero violations",
            n_jumps,
            boundary.levels.len()
        ),
    );
}

#[test]
fn criterion_11_reproducibility() {
    use std::process::Command;
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_copoly"))
            .args(args)
            .current_dir(dir.path())
            .output()
            .expect("binary runs");
        assert!(
            out.status.success(),
            "args {args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let bytes = |name: &str| std::fs::read(dir.path().join(name)).unwrap();

    run(&[
        "simulate", "--k-plus", "1,1.2", "--k-minus", "1.8,2.592", "--seed", "11",
        "--t-max", "500", "--out", "sim_a.csv",
    ]);
    run(&["simulate", "--config", "sim_a.manifest.json", "--out", "sim_b.csv"]);
    assert_eq!(bytes("sim_a.csv"), bytes("sim_b.csv"));

    run(&[
        "compare", "--k-plus", "1,3", "--k-minus", "1,1", "--replicas", "3", "--seed", "2",
        "--max-jumps", "20000", "--grid", "20", "--svg", "--out", "cmp_a",
    ]);
    run(&["compare", "--config", "cmp_a/manifest.json", "--out", "cmp_b"]);
    let mut compared = 0usize;
    for name in [
        "report.csv",
        "boundary.csv",
        "cone_matrix.json",
        "root.csv",
        "sigma.svg",
        "velocity.svg",
    ] {
        assert_eq!(
            bytes(&format!("cmp_a/{name}")),
            bytes(&format!("cmp_b/{name}")),
            "{name} differs"
        );
        compared += 1;
    }

    run(&[
        "sweep", "--k-plus", "1,1.2", "--k-minus", "1.8,2.592", "--vary",
        "k_plus[1]=0.5:2.0:0.05", "--out", "sweep_a.csv",
    ]);
    run(&["sweep", "--config", "sweep_a.manifest.json", "--out", "sweep_b.csv"]);
    assert_eq!(bytes("sweep_a.csv"), bytes("sweep_b.csv"));

    pass(
        11,
        "reproducibility",
        format!(
            "simulate, compare, and sweep re-run from their manifests byte-identically ({} compare artifacts checked)",
            compared
        ),
    );
}
