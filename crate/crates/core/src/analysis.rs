//! Trajectory post-processing: empirical composition and velocity, last-exit
//! boundary extraction, the empirical cone-type chain, level-occupancy
//! fractions, root occupation, and side-by-side comparison against theory.

use crate::model::{Event, MonomerId, Polymer, RegimeClass};
use crate::sim::Trajectory;
use crate::theory::TheorySummary;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("sample time {t} outside the trajectory horizon [0, {horizon}] or out of order")]
    OutOfRange { t: f64, horizon: f64 },
    #[error("trajectory has no jumps")]
    EmptyTrajectory,
    #[error("not enough usable boundary levels: {found} (need at least {required})")]
    InsufficientData { found: usize, required: usize },
    #[error("burn-in fraction {burn_in} leaves an empty averaging window")]
    DegenerateWindow { burn_in: f64 },
    #[error("trajectory has {traj_dim} monomer types but the summary describes {summary_dim}")]
    DimensionMismatch { traj_dim: usize, summary_dim: usize },
}

/// `(length, counts)` at each requested sample time, by one forward sweep.
/// Sample times must be nondecreasing and inside `[0, horizon]`.
fn composition_sweep(
    traj: &Trajectory,
    sample_times: &[f64],
) -> Result<Vec<(usize, Vec<u64>)>, AnalysisError> {
    let horizon = traj.horizon();
    let mut out = Vec::with_capacity(sample_times.len());
    let mut state = Polymer::root();
    let mut counts = vec![0u64; traj.dim()];
    let mut applied = 0usize;
    let mut previous = 0.0f64;
    for &t in sample_times {
        if !(0.0..=horizon).contains(&t) || t < previous {
            return Err(AnalysisError::OutOfRange { t, horizon });
        }
        previous = t;
        let n = traj.events_up_to(t);
        while applied < n {
            match traj.events()[applied] {
                Event::Attach(m) => {
                    state.push(m);
                    counts[m.index()] += 1;
                }
                Event::Detach => {
                    let removed = state.pop().expect("detach at root in event log");
                    counts[removed.index()] -= 1;
                }
            }
            applied += 1;
        }
        out.push((state.len(), counts.clone()));
    }
    Ok(out)
}

/// Monomer fractions `sigma_i(t) = N_i(t) / |X(t)|` at each sample time,
/// all zeros whenever the state is the root.
pub fn empirical_composition(
    traj: &Trajectory,
    sample_times: &[f64],
) -> Result<Vec<Vec<f64>>, AnalysisError> {
    Ok(composition_sweep(traj, sample_times)?
        .into_iter()
        .map(|(length, counts)| {
            if length == 0 {
                vec![0.0; counts.len()]
            } else {
                counts.iter().map(|&c| c as f64 / length as f64).collect()
            }
        })
        .collect())
}

/// Growth-rate estimate over the window `(b*T, T]`:
/// `(|X(T)| - |X(bT)|) / ((1 - b) T)`.
pub fn empirical_velocity(traj: &Trajectory, burn_in_fraction: f64) -> Result<f64, AnalysisError> {
    let horizon = traj.horizon();
    let window = (1.0 - burn_in_fraction) * horizon;
    if !(0.0..1.0).contains(&burn_in_fraction) || window <= 0.0 {
        return Err(AnalysisError::DegenerateWindow {
            burn_in: burn_in_fraction,
        });
    }
    let start = traj.length_after(traj.events_up_to(burn_in_fraction * horizon)) as f64;
    let end = traj.length_after(traj.num_jumps()) as f64;
    Ok((end - start) / window)
}

/// One level of the last-exit decomposition: the state at the last visit to
/// that level is the length-`level` prefix of the limiting polymer.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLevel {
    pub level: usize,
    /// Index `n` of the embedded-chain state `Z_n` at the last visit.
    pub jump_index: usize,
    /// Tip monomer of the boundary polymer; `None` at level zero.
    pub tip: Option<MonomerId>,
    /// Last-exit indices are not stopping times: levels close to the end of
    /// the log could still change under a longer run and are excluded from
    /// statistics.
    pub provisional: bool,
}

/// Last-exit boundary of a trajectory, levels `0..=final length`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryView {
    pub levels: Vec<BoundaryLevel>,
}

impl BoundaryView {
    pub fn max_level(&self) -> usize {
        self.levels.last().map_or(0, |l| l.level)
    }
}

/// Default tail guard: `max(1000, 5%)` of the jump count.
pub fn default_tail_guard(num_jumps: usize) -> usize {
    1000.max(num_jumps / 20)
}

/// Extracts the last-exit boundary by a backward sweep over reconstructed
/// lengths. For every level `k` up to the final length, the last index `n`
/// with `|Z_n| = k` is located; after it the walk stays strictly above `k`,
/// so the boundary polymer at level `k` is the length-`k` prefix of the
/// final state. Levels whose last-exit index falls in the final `tail_guard`
/// jumps, or whose level is within `tail_guard` of the final length, are
/// flagged provisional.
pub fn extract_boundary(
    traj: &Trajectory,
    tail_guard: usize,
) -> Result<BoundaryView, AnalysisError> {
    let n_jumps = traj.num_jumps();
    if n_jumps == 0 {
        return Err(AnalysisError::EmptyTrajectory);
    }
    let mut lengths = Vec::with_capacity(n_jumps + 1);
    let mut len = 0usize;
    lengths.push(0);
    for event in traj.events() {
        match event {
            Event::Attach(_) => len += 1,
            Event::Detach => len -= 1,
        }
        lengths.push(len);
    }
    let final_len = len;
    debug_assert_eq!(final_len, traj.final_state().len());

    let mut last_exit = vec![usize::MAX; final_len + 1];
    let mut assigned = 0usize;
    for n in (0..=n_jumps).rev() {
        let l = lengths[n];
        if l <= final_len && last_exit[l] == usize::MAX {
            last_exit[l] = n;
            assigned += 1;
            if assigned == final_len + 1 {
                break;
            }
        }
    }

    // Prefix-property verification: last-exit indices strictly increase, sit
    // at their level, and the step out of each is upward.
    for k in 0..=final_len {
        let e = last_exit[k];
        assert!(e != usize::MAX, "level {k} never visited");
        assert_eq!(lengths[e], k);
        if k > 0 {
            assert!(last_exit[k - 1] < e);
        }
        if e < n_jumps {
            assert_eq!(lengths[e + 1], k + 1, "walk re-entered level {k} after its last exit");
        }
    }

    let sequence = traj.final_state().sequence();
    let levels = (0..=final_len)
        .map(|k| BoundaryLevel {
            level: k,
            jump_index: last_exit[k],
            tip: (k > 0).then(|| sequence[k - 1]),
            provisional: last_exit[k] + tail_guard > n_jumps || k + tail_guard > final_len,
        })
        .collect();
    Ok(BoundaryView { levels })
}

/// Row-normalized transition frequencies of the boundary tip-type chain.
/// Rows with zero observed departures are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMatrix {
    pub rows: Vec<Option<Vec<f64>>>,
    /// Observed departures per source type.
    pub counts: Vec<u64>,
}

fn cone_transition_counts(boundary: &BoundaryView, dim: usize) -> (Vec<Vec<u64>>, usize) {
    let mut counts = vec![vec![0u64; dim]; dim];
    let mut usable = 0usize;
    for pair in boundary.levels.windows(2) {
        let (from, to) = (&pair[0], &pair[1]);
        if from.provisional || to.provisional {
            continue;
        }
        if let Some(tip_from) = from.tip {
            usable += 1;
            let tip_to = to.tip.expect("level above zero has a tip");
            counts[tip_from.index()][tip_to.index()] += 1;
        }
    }
    (counts, usable)
}

fn matrix_from_counts(counts: Vec<Vec<u64>>) -> EmpiricalMatrix {
    let row_totals: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
    let rows = counts
        .into_iter()
        .zip(&row_totals)
        .map(|(row, &total)| {
            (total > 0).then(|| row.iter().map(|&c| c as f64 / total as f64).collect())
        })
        .collect();
    EmpiricalMatrix {
        rows,
        counts: row_totals,
    }
}

/// Transition frequencies between tip types of consecutive non-provisional
/// boundary levels.
pub fn cone_chain_empirical(
    boundary: &BoundaryView,
    dim: usize,
) -> Result<EmpiricalMatrix, AnalysisError> {
    let (counts, usable) = cone_transition_counts(boundary, dim);
    if usable < 1 {
        return Err(AnalysisError::InsufficientData {
            found: usable + 1,
            required: 2,
        });
    }
    Ok(matrix_from_counts(counts))
}

/// Fractions of embedded-chain visits per tip type, plus the root-visit
/// fraction, over the states `Z_0..Z_n` of an `n`-jump trajectory (each
/// divided by `n`).
#[derive(Debug, Clone, PartialEq)]
pub struct LevelFractions {
    pub per_type: Vec<f64>,
    pub root: f64,
}

pub fn level_fraction_empirical(traj: &Trajectory) -> Result<LevelFractions, AnalysisError> {
    let n = traj.num_jumps();
    if n == 0 {
        return Err(AnalysisError::EmptyTrajectory);
    }
    let mut visits = vec![0u64; traj.dim()];
    let mut root_visits = 1u64; // Z_0 is the root
    let mut state = Polymer::root();
    for event in traj.events() {
        match event {
            Event::Attach(m) => state.push(*m),
            Event::Detach => {
                state.pop();
            }
        }
        match state.tip() {
            Some(m) => visits[m.index()] += 1,
            None => root_visits += 1,
        }
    }
    Ok(LevelFractions {
        per_type: visits.iter().map(|&v| v as f64 / n as f64).collect(),
        root: root_visits as f64 / n as f64,
    })
}

/// Fraction of the horizon spent at the root. Zero-length horizons yield 0.
pub fn root_occupation(traj: &Trajectory) -> f64 {
    let horizon = traj.horizon();
    if horizon <= 0.0 {
        return 0.0;
    }
    let mut at_root = 0.0f64;
    let mut len = 0usize;
    let mut previous = 0.0f64;
    for (event, &t) in traj.events().iter().zip(traj.jump_times()) {
        if len == 0 {
            at_root += t - previous;
        }
        previous = t;
        match event {
            Event::Attach(_) => len += 1,
            Event::Detach => len -= 1,
        }
    }
    if len == 0 {
        at_root += horizon - previous;
    }
    at_root / horizon
}

/// Empirical-vs-theory comparison of the transient growth laws, pooled over
/// replicas.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthComparison {
    pub sigma_theory: Vec<f64>,
    /// Replica-mean composition per grid time, per type.
    pub sigma_mean: Vec<Vec<f64>>,
    /// Per-replica composition series.
    pub sigma_replicas: Vec<Vec<Vec<f64>>>,
    /// Replica-mean polymer length per grid time.
    pub mean_length: Vec<f64>,
    pub velocity_theory: f64,
    /// Replica-mean `|X(t)| / t` per grid time.
    pub velocity_mean: Vec<f64>,
    /// Burn-in window estimate per replica.
    pub velocity_estimates: Vec<f64>,
    /// Boundary tip-type transition frequencies, counts pooled over replicas.
    pub cone_empirical: EmpiricalMatrix,
    pub cone_theory: Vec<Vec<f64>>,
    pub level_fraction_theory: Vec<f64>,
    pub level_fraction_mean: Vec<f64>,
    pub level_fraction_replicas: Vec<LevelFractions>,
    pub boundary: BoundaryView,
    /// Largest `|sigma - theory|` over types at the final grid time.
    pub final_sigma_dev: f64,
    /// `|mean velocity - theory|` at the final grid time.
    pub final_velocity_dev: f64,
    /// Largest entrywise deviation of the pooled empirical matrix from theory.
    pub cone_dev: f64,
    /// Largest deviation of mean level fractions from theory.
    pub level_dev: f64,
}

/// Root-occupation comparison; the theory value is `1 - alpha` in the
/// positive recurrent regime and `0` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct RootOccupationComparison {
    pub per_replica: Vec<f64>,
    pub mean: f64,
    pub theory: f64,
    pub dev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub regime: RegimeClass,
    pub replicas: usize,
    pub grid: Vec<f64>,
    /// Present exactly when the regime is transient.
    pub growth: Option<GrowthComparison>,
    pub root: RootOccupationComparison,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    /// Defaults to [`default_tail_guard`] of each trajectory's jump count.
    pub tail_guard: Option<usize>,
    pub burn_in: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            tail_guard: None,
            burn_in: 0.2,
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Assembles every empirical-vs-theory series the regime permits. Replicas
/// are averaged pointwise; per-replica values are retained.
pub fn compare(
    trajectories: &[Trajectory],
    summary: &TheorySummary,
    grid: &[f64],
    options: &CompareOptions,
) -> Result<ComparisonReport, AnalysisError> {
    if trajectories.is_empty() {
        return Err(AnalysisError::InsufficientData {
            found: 0,
            required: 1,
        });
    }
    let dim = summary.mean_holding.len();
    for traj in trajectories {
        if traj.dim() != dim {
            return Err(AnalysisError::DimensionMismatch {
                traj_dim: traj.dim(),
                summary_dim: dim,
            });
        }
    }

    let root_per_replica: Vec<f64> = trajectories.iter().map(root_occupation).collect();
    let root_mean = mean(&root_per_replica);
    let root_theory = summary.root_mass.unwrap_or(0.0);
    let root = RootOccupationComparison {
        mean: root_mean,
        theory: root_theory,
        dev: (root_mean - root_theory).abs(),
        per_replica: root_per_replica,
    };

    let growth = match &summary.transient {
        None => None,
        Some(theory) => {
            let mut sigma_replicas = Vec::with_capacity(trajectories.len());
            let mut length_replicas = Vec::with_capacity(trajectories.len());
            let mut velocity_estimates = Vec::with_capacity(trajectories.len());
            let mut level_fraction_replicas = Vec::with_capacity(trajectories.len());
            let mut pooled_counts = vec![vec![0u64; dim]; dim];
            let mut first_boundary = None;

            for traj in trajectories {
                let swept = composition_sweep(traj, grid)?;
                let lengths: Vec<f64> = swept.iter().map(|(len, _)| *len as f64).collect();
                let sigma: Vec<Vec<f64>> = swept
                    .iter()
                    .map(|(len, counts)| {
                        if *len == 0 {
                            vec![0.0; dim]
                        } else {
                            counts.iter().map(|&c| c as f64 / *len as f64).collect()
                        }
                    })
                    .collect();
                sigma_replicas.push(sigma);
                length_replicas.push(lengths);
                velocity_estimates.push(empirical_velocity(traj, options.burn_in)?);
                level_fraction_replicas.push(level_fraction_empirical(traj)?);

                let guard = options
                    .tail_guard
                    .unwrap_or_else(|| default_tail_guard(traj.num_jumps()));
                let boundary = extract_boundary(traj, guard)?;
                let (counts, _) = cone_transition_counts(&boundary, dim);
                for (pooled, row) in pooled_counts.iter_mut().zip(counts) {
                    for (p, c) in pooled.iter_mut().zip(row) {
                        *p += c;
                    }
                }
                if first_boundary.is_none() {
                    first_boundary = Some(boundary);
                }
            }

            let n_rep = trajectories.len() as f64;
            let sigma_mean: Vec<Vec<f64>> = (0..grid.len())
                .map(|g| {
                    (0..dim)
                        .map(|i| {
                            sigma_replicas.iter().map(|s| s[g][i]).sum::<f64>() / n_rep
                        })
                        .collect()
                })
                .collect();
            let mean_length: Vec<f64> = (0..grid.len())
                .map(|g| length_replicas.iter().map(|l| l[g]).sum::<f64>() / n_rep)
                .collect();
            let velocity_mean: Vec<f64> = grid
                .iter()
                .zip(&mean_length)
                .map(|(&t, &len)| if t > 0.0 { len / t } else { 0.0 })
                .collect();
            let level_fraction_mean: Vec<f64> = (0..dim)
                .map(|i| {
                    level_fraction_replicas
                        .iter()
                        .map(|l| l.per_type[i])
                        .sum::<f64>()
                        / n_rep
                })
                .collect();

            let cone_empirical = matrix_from_counts(pooled_counts);
            let cone_dev = cone_empirical
                .rows
                .iter()
                .zip(&theory.cone_matrix)
                .filter_map(|(row, expected)| {
                    row.as_ref().map(|row| {
                        row.iter()
                            .zip(expected)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max)
                    })
                })
                .fold(0.0, f64::max);

            let final_sigma_dev = sigma_mean
                .last()
                .map(|last| {
                    last.iter()
                        .zip(&theory.sigma_bar)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .unwrap_or(0.0);
            let final_velocity_dev = velocity_mean
                .last()
                .map(|v| (v - theory.velocity).abs())
                .unwrap_or(0.0);
            let level_dev = level_fraction_mean
                .iter()
                .zip(&theory.level_fractions)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);

            Some(GrowthComparison {
                sigma_theory: theory.sigma_bar.clone(),
                sigma_mean,
                sigma_replicas,
                mean_length,
                velocity_theory: theory.velocity,
                velocity_mean,
                velocity_estimates,
                cone_empirical,
                cone_theory: theory.cone_matrix.clone(),
                level_fraction_theory: theory.level_fractions.clone(),
                level_fraction_mean,
                level_fraction_replicas,
                boundary: first_boundary.expect("at least one replica"),
                final_sigma_dev,
                final_velocity_dev,
                cone_dev,
                level_dev,
            })
        }
    };

    Ok(ComparisonReport {
        regime: summary.regime,
        replicas: trajectories.len(),
        grid: grid.to_vec(),
        growth,
        root,
    })
}
