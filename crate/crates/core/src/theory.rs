//! Closed-form quantities of the copolymerization chain.
//!
//! Everything here is a pure function of the rate set. The central object in
//! the transient regime is the scalar `m`, the unique positive root of
//!
//! ```text
//! g(m) = sum_r k_r^+ / (m + k_r^-) = 1,
//! ```
//!
//! which doubles as the asymptotic growth velocity and feeds every other
//! quantity: escape probabilities `F_i = k_i^- / (m + k_i^-)`, limiting
//! composition `sigma_i = k_i^+ / (m + k_i^-)`, the cone-type chain matrix,
//! level-time fractions, and the discrete drift of the embedded jump chain.

use crate::model::{RateSet, RegimeClass};
use thiserror::Error;

/// Default absolute tolerance on `g(m) - 1` for the root solve.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Relative half-width of the `alpha = 1` band treated as null recurrent.
/// Exact equality is measure-zero in floating point; callers can always
/// inspect `alpha` itself.
pub const ALPHA_EQUALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("operation requires the {required:?} regime but the rate set is {actual:?} (alpha = {alpha})")]
    Regime {
        required: RegimeClass,
        actual: RegimeClass,
        alpha: f64,
    },
    #[error("root solve did not reach |g(m)-1| <= {tol}; residual {residual} after {iterations} iterations")]
    NoConvergence {
        tol: f64,
        residual: f64,
        iterations: usize,
    },
    #[error("operation is defined for exactly {expected} monomer types, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("escape probability F_{index} = 1 numerically; drift denominator degenerate")]
    DivisionDegenerate { index: usize },
    #[error("internal identity `{name}` off by {deviation:e}; the rate set is numerically degenerate (likely too close to the phase boundary)")]
    IdentityCheck { name: &'static str, deviation: f64 },
}

fn require_transient(rates: &RateSet) -> Result<(), TheoryError> {
    let actual = classify(rates);
    if actual == RegimeClass::Transient {
        Ok(())
    } else {
        Err(TheoryError::Regime {
            required: RegimeClass::Transient,
            actual,
            alpha: alpha(rates),
        })
    }
}

/// `alpha = sum_i k_i^+ / k_i^-`, summed in index order. The spectral radius
/// of the cone-type matrix, and the sole classification parameter.
pub fn alpha(rates: &RateSet) -> f64 {
    rates
        .attach_rates()
        .iter()
        .zip(rates.detach_rates())
        .map(|(kp, km)| kp / km)
        .sum()
}

/// Classifies the chain: `alpha < 1` positive recurrent, `alpha = 1` (within
/// [`ALPHA_EQUALITY_TOL`]) null recurrent, `alpha > 1` transient.
pub fn classify(rates: &RateSet) -> RegimeClass {
    let a = alpha(rates);
    if (a - 1.0).abs() <= ALPHA_EQUALITY_TOL * a.max(1.0) {
        RegimeClass::NullRecurrent
    } else if a < 1.0 {
        RegimeClass::PositiveRecurrent
    } else {
        RegimeClass::Transient
    }
}

fn g(rates: &RateSet, m: f64) -> f64 {
    rates
        .attach_rates()
        .iter()
        .zip(rates.detach_rates())
        .map(|(kp, km)| kp / (m + km))
        .sum()
}

fn g_prime(rates: &RateSet, m: f64) -> f64 {
    -rates
        .attach_rates()
        .iter()
        .zip(rates.detach_rates())
        .map(|(kp, km)| kp / ((m + km) * (m + km)))
        .sum::<f64>()
}

/// Solves `g(m) = 1` for the unique positive root in the transient regime.
///
/// `g` is strictly decreasing with `g(0) = alpha > 1` and `g(K+) < 1` where
/// `K+` is the total attachment rate, so `[0, K+]` is a certified bracket.
/// Bisection narrows it to relative width `1e-13`, then at most five Newton
/// steps polish the root; the result must satisfy `|g(m) - 1| <= tol`.
pub fn solve_m(rates: &RateSet, tol: f64) -> Result<f64, TheoryError> {
    require_transient(rates)?;
    let k_plus = rates.total_attach_rate();
    let mut lo = 0.0f64;
    let mut hi = k_plus;
    let width_target = 1e-13 * k_plus;
    let mut iterations = 0usize;
    while hi - lo > width_target && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if g(rates, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let mut m = 0.5 * (lo + hi);
    for _ in 0..5 {
        let residual = g(rates, m) - 1.0;
        if residual == 0.0 {
            break;
        }
        let slope = g_prime(rates, m);
        if slope == 0.0 {
            break;
        }
        let next = m - residual / slope;
        if !(next > 0.0 && next < k_plus) {
            break;
        }
        m = next;
        iterations += 1;
    }
    let residual = (g(rates, m) - 1.0).abs();
    if residual <= tol {
        Ok(m)
    } else {
        Err(TheoryError::NoConvergence {
            tol,
            residual,
            iterations,
        })
    }
}

/// Escape probabilities `F_i = k_i^- / (m + k_i^-)`: the chance that a state
/// ending in monomer `i` ever steps back to its predecessor. Each lies in
/// `(0, 1)` in the transient regime.
pub fn escape_probabilities(rates: &RateSet, m: f64) -> Result<Vec<f64>, TheoryError> {
    require_transient(rates)?;
    Ok(rates.detach_rates().iter().map(|km| km / (m + km)).collect())
}

/// Limiting monomer fractions `sigma_i = k_i^+ / (m + k_i^-)`. They sum to 1
/// by the defining equation of `m` and equal `F_i k_i^+ / k_i^-` elementwise.
pub fn sigma_bar(rates: &RateSet, m: f64) -> Result<Vec<f64>, TheoryError> {
    require_transient(rates)?;
    Ok(rates
        .attach_rates()
        .iter()
        .zip(rates.detach_rates())
        .map(|(kp, km)| kp / (m + km))
        .collect())
}

/// Asymptotic growth velocity `v = sum_r k_r^+ - sum_r k_r^- sigma_r`.
///
/// Algebraically `v = m`, but this evaluates the rate-balance formula
/// directly so the two routes stay independent checks of each other.
pub fn velocity(rates: &RateSet, sigma: &[f64]) -> Result<f64, TheoryError> {
    require_transient(rates)?;
    let gain = rates.total_attach_rate();
    let loss: f64 = rates
        .detach_rates()
        .iter()
        .zip(sigma)
        .map(|(km, s)| km * s)
        .sum();
    Ok(gain - loss)
}

/// Drift of the embedded jump chain: `|Z_n| / n -> v_bar` with
///
/// ```text
/// v_bar = ( sum_i sigma_i * F_i / (p_i^down * (1 - F_i)) )^-1,
/// p_i^down = k_i^- / (k_i^- + K+).
/// ```
pub fn discrete_velocity(
    rates: &RateSet,
    sigma: &[f64],
    escape: &[f64],
) -> Result<f64, TheoryError> {
    require_transient(rates)?;
    let k_plus = rates.total_attach_rate();
    let mut sum = 0.0;
    for (i, ((km, s), f)) in rates
        .detach_rates()
        .iter()
        .zip(sigma)
        .zip(escape)
        .enumerate()
    {
        if *f >= 1.0 {
            return Err(TheoryError::DivisionDegenerate { index: i });
        }
        let p_down = km / (km + k_plus);
        sum += s * f / (p_down * (1.0 - f));
    }
    Ok(1.0 / sum)
}

/// Transition matrix of the cone-type chain along the boundary process:
/// `V[i][j] = F_i * (1 - F_j) / (1 - F_i) * k_j^+ / k_i^-`. Every row is a
/// probability vector and in fact every row equals `sigma_bar`.
pub fn cone_chain_matrix(rates: &RateSet, escape: &[f64]) -> Result<Vec<Vec<f64>>, TheoryError> {
    require_transient(rates)?;
    let d = rates.dim();
    let mut matrix = Vec::with_capacity(d);
    for i in 0..d {
        let fi = escape[i];
        let km_i = rates.detach_rates()[i];
        let row: Vec<f64> = (0..d)
            .map(|j| fi * (1.0 - escape[j]) / (1.0 - fi) * rates.attach_rates()[j] / km_i)
            .collect();
        matrix.push(row);
    }
    Ok(matrix)
}

/// Fraction of embedded-chain visits whose tip is monomer `i`:
/// `l_i = sigma_i (k_i^- + K+) / sum_j sigma_j (k_j^- + K+)`.
pub fn level_time_fractions(rates: &RateSet, sigma: &[f64]) -> Result<Vec<f64>, TheoryError> {
    require_transient(rates)?;
    let k_plus = rates.total_attach_rate();
    let weights: Vec<f64> = rates
        .detach_rates()
        .iter()
        .zip(sigma)
        .map(|(km, s)| s * (km + k_plus))
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Two-type limiting fractions in closed form.
///
/// For `k_1^- = k_2^-` these reduce to the attachment shares
/// `k_i^+ / (k_1^+ + k_2^+)`; otherwise `sigma_1` is the relevant root of
/// `(k_1^- - k_2^-) s^2 - B s + k_1^+ = 0` with `B = K+ + k_1^- - k_2^-`,
/// evaluated in the conjugate form `2 k_1^+ / (B + sqrt(B^2 - 4(k_1^- - k_2^-)k_1^+))`,
/// which is algebraically equal to the quadratic formula and stays finite as
/// `k_1^- -> k_2^-`.
pub fn two_monomer_closed_form(rates: &RateSet) -> Result<(f64, f64), TheoryError> {
    if rates.dim() != 2 {
        return Err(TheoryError::Dimension {
            expected: 2,
            found: rates.dim(),
        });
    }
    require_transient(rates)?;
    let (k1p, k2p) = (rates.attach_rates()[0], rates.attach_rates()[1]);
    let (k1m, k2m) = (rates.detach_rates()[0], rates.detach_rates()[1]);
    let total = k1p + k2p;
    if k1m == k2m {
        return Ok((k1p / total, k2p / total));
    }
    let root = |kp: f64, km_own: f64, km_other: f64| {
        let b = total + km_own - km_other;
        let disc = b * b + 4.0 * kp * km_other - 4.0 * kp * km_own;
        2.0 * kp / (b + disc.sqrt())
    };
    Ok((root(k1p, k1m, k2m), root(k2p, k2m, k1m)))
}

/// Stationary probability of one specific polymer with the given per-type
/// counts, in the positive recurrent regime:
/// `(1 - alpha) * prod_i (k_i^+/k_i^-)^counts[i]`. The root carries mass
/// `1 - alpha`, forced by the geometric-series normalization over levels.
pub fn stationary_weight(rates: &RateSet, counts: &[u64]) -> Result<f64, TheoryError> {
    let actual = classify(rates);
    if actual != RegimeClass::PositiveRecurrent {
        return Err(TheoryError::Regime {
            required: RegimeClass::PositiveRecurrent,
            actual,
            alpha: alpha(rates),
        });
    }
    let root_mass = 1.0 - alpha(rates);
    let product: f64 = rates
        .attach_rates()
        .iter()
        .zip(rates.detach_rates())
        .zip(counts)
        .map(|((kp, km), &c)| (kp / km).powi(c as i32))
        .product();
    Ok(root_mass * product)
}

/// The transient-only block of a [`TheorySummary`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransientTheory {
    /// Root of `g(m) = 1`; also the growth velocity and the effective escape
    /// rate from the root.
    pub m: f64,
    /// Escape probabilities `F_i`.
    pub escape: Vec<f64>,
    /// Limiting monomer fractions.
    pub sigma_bar: Vec<f64>,
    /// Continuous-time growth velocity `v` (rate-balance formula).
    pub velocity: f64,
    /// Drift of the embedded jump chain, in `(0, 1]`.
    pub discrete_velocity: f64,
    /// Cone-type chain transition matrix, rows equal to `sigma_bar`.
    pub cone_matrix: Vec<Vec<f64>>,
    /// Fractions of embedded-chain visits per tip type.
    pub level_fractions: Vec<f64>,
}

/// Consistency checks tying the transient quantities together. Every
/// identity is exact in real arithmetic; the tolerances are the contract
/// values plus a slack proportional to `1/(1 - max F_i)`, the conditioning
/// of the `1 - F` cancellations, so rate sets extremely close to the phase
/// boundary degrade gracefully instead of failing spuriously.
fn verify_transient(
    rates: &RateSet,
    theory: &TransientTheory,
    tol: f64,
) -> Result<(), TheoryError> {
    let check = |name: &'static str, deviation: f64, tolerance: f64| {
        if deviation <= tolerance {
            Ok(())
        } else {
            Err(TheoryError::IdentityCheck { name, deviation })
        }
    };
    let d = rates.dim();
    let k_plus = rates.total_attach_rate();
    let f_max = theory.escape.iter().cloned().fold(0.0, f64::max);
    let kappa = 1.0 / (1.0 - f_max);
    let slack = 1e-13 * kappa;

    let sigma_sum: f64 = theory.sigma_bar.iter().sum();
    check("sigma sums to 1", (sigma_sum - 1.0).abs(), (10.0 * tol).max(1e-10))?;
    for i in 0..d {
        let via_escape = theory.escape[i] * rates.attach_rates()[i] / rates.detach_rates()[i];
        check(
            "sigma_i = F_i k_i^+/k_i^-",
            (theory.sigma_bar[i] - via_escape).abs(),
            1e-12,
        )?;
        // F solves the one-step first-return system.
        let weighted: f64 = rates
            .attach_rates()
            .iter()
            .zip(&theory.escape)
            .map(|(kp, f)| kp * f)
            .sum();
        let fixed_point = rates.detach_rates()[i] / ((rates.detach_rates()[i] + k_plus) - weighted);
        check(
            "F fixed point",
            (fixed_point - theory.escape[i]).abs(),
            10.0 * tol,
        )?;
    }
    check("v = m", (theory.velocity - theory.m).abs(), 1e-10)?;
    for (row, sigma_compare) in theory.cone_matrix.iter().zip(std::iter::repeat(&theory.sigma_bar)) {
        let row_sum: f64 = row.iter().sum();
        check("cone row sums to 1", (row_sum - 1.0).abs(), 1e-10 + slack)?;
        for (entry, sigma) in row.iter().zip(sigma_compare.iter()) {
            check("cone rows equal sigma", (entry - sigma).abs(), 1e-10 + slack)?;
        }
    }
    let level_sum: f64 = theory.level_fractions.iter().sum();
    check("level fractions sum to 1", (level_sum - 1.0).abs(), 1e-12)?;
    // 1/v = (sum_i l_i / (k_i^- + K+)) / v_bar.
    let mean_holding_per_level: f64 = theory
        .level_fractions
        .iter()
        .zip(rates.detach_rates())
        .map(|(l, km)| l / (km + k_plus))
        .sum();
    let lhs = 1.0 / theory.velocity;
    check(
        "1/v matches level-time decomposition",
        (lhs - mean_holding_per_level / theory.discrete_velocity).abs(),
        (1e-10 + slack) * lhs.max(1.0),
    )?;
    Ok(())
}

/// Every closed-form quantity the regime permits.
#[derive(Debug, Clone, PartialEq)]
pub struct TheorySummary {
    pub alpha: f64,
    pub regime: RegimeClass,
    /// Stationary probability of the root, `1 - alpha`; positive recurrent
    /// regime only.
    pub root_mass: Option<f64>,
    /// Present exactly when the regime is transient.
    pub transient: Option<TransientTheory>,
    /// Mean sojourn times `1 / (k_i^- + K+)` per tip type; regime independent.
    pub mean_holding: Vec<f64>,
}

/// Computes the full summary for a rate set, filling every field the regime
/// permits.
pub fn summarize(rates: &RateSet, tol: f64) -> Result<TheorySummary, TheoryError> {
    let a = alpha(rates);
    let regime = classify(rates);
    let transient = if regime == RegimeClass::Transient {
        let m = solve_m(rates, tol)?;
        let escape = escape_probabilities(rates, m)?;
        let sigma = sigma_bar(rates, m)?;
        let v = velocity(rates, &sigma)?;
        let v_bar = discrete_velocity(rates, &sigma, &escape)?;
        let cone = cone_chain_matrix(rates, &escape)?;
        let levels = level_time_fractions(rates, &sigma)?;
        let theory = TransientTheory {
            m,
            escape,
            sigma_bar: sigma,
            velocity: v,
            discrete_velocity: v_bar,
            cone_matrix: cone,
            level_fractions: levels,
        };
        verify_transient(rates, &theory, tol)?;
        Some(theory)
    } else {
        None
    };
    Ok(TheorySummary {
        alpha: a,
        regime,
        root_mass: (regime == RegimeClass::PositiveRecurrent).then(|| 1.0 - a),
        transient,
        mean_holding: rates.mean_holding_times(),
    })
}
