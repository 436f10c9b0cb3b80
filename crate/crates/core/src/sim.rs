//! Exact stochastic simulation of the copolymerization chain.
//!
//! Direct-method simulation: from state `x`, hold for an exponential time
//! with rate `q(x)`, then pick the next event categorically with weights
//! `k_j^+` for each attachment and `k_tip^-` for detachment (zero at the
//! root). Trajectories are a deterministic function of the [`SimConfig`].
//!
//! # Randomness
//!
//! One ChaCha8 stream keyed by `SeedableRng::seed_from_u64(seed)`, consumed
//! as exactly two draws per step in fixed order:
//!
//! 1. the holding time, by inverse CDF `-ln(u) / q(x)` with
//!    `u = ((bits >> 11) + 0.5) * 2^-53` in the open interval `(0, 1)`;
//! 2. the event, by comparing `w * q(x)` (with `w = (bits >> 11) * 2^-53`
//!    in `[0, 1)`) against cumulative weights in monomer order, detachment
//!    last, with strict `<`.
//!
//! Replicas derive their seeds as `seed + replica_index`.

use crate::model::{Event, MonomerId, Polymer, RateSet};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::num::NonZeroUsize;

/// When to stop a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Simulate up to this time; an event drawn past it is discarded and the
    /// horizon is the bound itself.
    MaxTime(f64),
    /// Record exactly this many jumps; the horizon is the last jump time.
    MaxJumps(u64),
}

/// Full specification of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub rates: RateSet,
    pub seed: u64,
    pub stop: StopRule,
    /// A `(length, counts)` snapshot is stored every this many events.
    pub record_stride: NonZeroUsize,
}

impl SimConfig {
    pub fn new(rates: RateSet, seed: u64, stop: StopRule) -> Self {
        SimConfig {
            rates,
            seed,
            stop,
            record_stride: NonZeroUsize::new(1000).unwrap(),
        }
    }

    pub fn with_record_stride(mut self, stride: NonZeroUsize) -> Self {
        self.record_stride = stride;
        self
    }
}

/// Polymer length and per-type counts right after a given number of events.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub events_applied: usize,
    pub length: usize,
    pub counts: Vec<u64>,
}

/// Errors from trajectory queries.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrajectoryError {
    #[error("time {t} outside the trajectory horizon [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },
}

/// The event log of one realization, plus derived tallies.
///
/// Only the event stream, the final polymer, and stride snapshots are kept;
/// intermediate polymer contents are reconstructed by replay.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub(crate) dim: usize,
    pub(crate) horizon: f64,
    pub(crate) jump_times: Vec<f64>,
    pub(crate) events: Vec<Event>,
    pub(crate) final_state: Polymer,
    pub(crate) attaches: Vec<u64>,
    pub(crate) detaches: Vec<u64>,
    pub(crate) snapshots: Vec<Snapshot>,
}

impl Trajectory {
    /// Number of monomer types of the generating rate set.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// End of the observation window: the time bound for `MaxTime` runs, the
    /// last jump time for `MaxJumps` runs.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn num_jumps(&self) -> usize {
        self.events.len()
    }

    pub fn final_state(&self) -> &Polymer {
        &self.final_state
    }

    /// Total attach events per monomer type.
    pub fn attach_tallies(&self) -> &[u64] {
        &self.attaches
    }

    /// Total detach events per type of the removed monomer.
    pub fn detach_tallies(&self) -> &[u64] {
        &self.detaches
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// Number of events with jump time `<= t`.
    pub fn events_up_to(&self, t: f64) -> usize {
        self.jump_times.partition_point(|&tau| tau <= t)
    }

    /// Polymer length right after `n` events, via the nearest snapshot plus a
    /// partial replay of at most one stride.
    pub fn length_after(&self, n: usize) -> usize {
        let (mut applied, mut length) = match self
            .snapshots
            .binary_search_by(|s| s.events_applied.cmp(&n))
        {
            Ok(i) => return self.snapshots[i].length,
            Err(0) => (0, 0),
            Err(i) => (
                self.snapshots[i - 1].events_applied,
                self.snapshots[i - 1].length,
            ),
        };
        while applied < n {
            match self.events[applied] {
                Event::Attach(_) => length += 1,
                Event::Detach => length -= 1,
            }
            applied += 1;
        }
        length
    }

    /// The state `X(t)`, reconstructed by replaying the event prefix from the
    /// root.
    pub fn state_at(&self, t: f64) -> Result<Polymer, TrajectoryError> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(TrajectoryError::OutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        let n = self.events_up_to(t);
        let mut polymer = Polymer::root();
        for event in &self.events[..n] {
            match event {
                Event::Attach(m) => polymer.push(*m),
                Event::Detach => {
                    polymer.pop();
                }
            }
        }
        Ok(polymer)
    }

    /// `|X(t)|` at each sample time.
    pub fn length_series(&self, sample_times: &[f64]) -> Result<Vec<usize>, TrajectoryError> {
        sample_times
            .iter()
            .map(|&t| {
                if !(0.0..=self.horizon).contains(&t) {
                    return Err(TrajectoryError::OutOfRange {
                        t,
                        horizon: self.horizon,
                    });
                }
                Ok(self.length_after(self.events_up_to(t)))
            })
            .collect()
    }
}

fn uniform_half_open(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random bits over [0, 1).
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    // Offset by half an ulp so the result lies strictly inside (0, 1) and the
    // exponential below is strictly positive.
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

/// Runs one realization from the root under the given configuration.
/// Identical configurations produce identical trajectories.
pub fn simulate(config: &SimConfig) -> Trajectory {
    let rates = &config.rates;
    let d = rates.dim();
    let stride = config.record_stride.get();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut state = Polymer::root();
    let mut counts = vec![0u64; d];
    let mut attaches = vec![0u64; d];
    let mut detaches = vec![0u64; d];
    let mut jump_times = Vec::new();
    let mut events = Vec::new();
    let mut snapshots = Vec::new();
    let mut t = 0.0f64;

    loop {
        match config.stop {
            StopRule::MaxJumps(n) => {
                if events.len() as u64 >= n {
                    break;
                }
            }
            StopRule::MaxTime(_) => {}
        }

        let tip = state.tip();
        let q = rates.exit_rate(tip);
        let holding = -uniform_open(&mut rng).ln() / q;
        let mut t_next = t + holding;
        if t_next <= t {
            // Holding time below the float spacing at t; keep jump times
            // strictly increasing.
            t_next = next_up(t);
        }
        if let StopRule::MaxTime(t_max) = config.stop {
            if t_next > t_max {
                break;
            }
        }

        let target = uniform_half_open(&mut rng) * q;
        let mut cumulative = 0.0f64;
        let mut chosen = None;
        for j in 0..d {
            cumulative += rates.attach_rates()[j];
            if target < cumulative {
                chosen = Some(Event::Attach(MonomerId::new(j)));
                break;
            }
        }
        let event = chosen.unwrap_or(match tip {
            Some(_) => Event::Detach,
            // Unreachable when target < q(root) = sum k^+; guards rounding.
            None => Event::Attach(MonomerId::new(d - 1)),
        });

        match event {
            Event::Attach(m) => {
                state.push(m);
                counts[m.index()] += 1;
                attaches[m.index()] += 1;
            }
            Event::Detach => {
                let removed = state.pop().expect("detach drawn at root");
                counts[removed.index()] -= 1;
                detaches[removed.index()] += 1;
            }
        }
        t = t_next;
        jump_times.push(t);
        events.push(event);
        if events.len() % stride == 0 {
            snapshots.push(Snapshot {
                events_applied: events.len(),
                length: state.len(),
                counts: counts.clone(),
            });
        }
    }

    let horizon = match config.stop {
        StopRule::MaxTime(t_max) => t_max,
        StopRule::MaxJumps(_) => t,
    };
    Trajectory {
        dim: d,
        horizon,
        jump_times,
        events,
        final_state: state,
        attaches,
        detaches,
        snapshots,
    }
}
