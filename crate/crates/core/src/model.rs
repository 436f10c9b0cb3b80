//! Parameter set, polymer state, and event algebra shared by the other modules.
//!
//! A polymer is a finite stack of monomer ids; the empty stack is the root.
//! The only mutations are pushing one monomer onto the tip or popping the tip,
//! so the (countably infinite) tree of sequences is never materialized.

use thiserror::Error;

/// Index of a monomer type, 0-based internally. User-facing output labels
/// monomers 1-based (`M1`..`Md`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonomerId(usize);

impl MonomerId {
    pub fn new(index: usize) -> Self {
        MonomerId(index)
    }

    pub fn index(self) -> usize {
        self.0
    }

    /// 1-based label used in CSV and CLI output.
    pub fn label(self) -> usize {
        self.0 + 1
    }
}

/// Validation errors for model inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("rate arrays have different lengths: {k_plus} attachment vs {k_minus} detachment")]
    DimensionMismatch { k_plus: usize, k_minus: usize },
    #[error("rate {value} at index {index} of {which} is not a finite positive number")]
    NonPositiveRate {
        which: &'static str,
        index: usize,
        value: f64,
    },
    #[error("rate arrays are empty; at least one monomer type is required")]
    Empty,
    #[error("monomer id {id} out of range for {dim} monomer types")]
    IdOutOfRange { id: usize, dim: usize },
}

/// Attachment and detachment rates for `d` monomer types. Entries are strictly
/// positive and finite; order is preserved from the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSet {
    k_plus: Vec<f64>,
    k_minus: Vec<f64>,
    // Left-to-right sum of k_plus, cached for the simulation hot loop. All
    // other code must reproduce sums in the same index order so cumulative
    // weights and totals agree bitwise.
    total_attach: f64,
}

impl RateSet {
    /// Validates raw rate arrays: equal lengths, `d >= 1`, every entry finite
    /// and `> 0`.
    pub fn new(k_plus: Vec<f64>, k_minus: Vec<f64>) -> Result<Self, ModelError> {
        if k_plus.len() != k_minus.len() {
            return Err(ModelError::DimensionMismatch {
                k_plus: k_plus.len(),
                k_minus: k_minus.len(),
            });
        }
        if k_plus.is_empty() {
            return Err(ModelError::Empty);
        }
        for (which, rates) in [("k_plus", &k_plus), ("k_minus", &k_minus)] {
            for (index, &value) in rates.iter().enumerate() {
                if !(value.is_finite() && value > 0.0) {
                    return Err(ModelError::NonPositiveRate {
                        which,
                        index,
                        value,
                    });
                }
            }
        }
        let total_attach = k_plus.iter().sum();
        Ok(RateSet {
            k_plus,
            k_minus,
            total_attach,
        })
    }

    /// Number of monomer types `d`.
    pub fn dim(&self) -> usize {
        self.k_plus.len()
    }

    pub fn attach_rates(&self) -> &[f64] {
        &self.k_plus
    }

    pub fn detach_rates(&self) -> &[f64] {
        &self.k_minus
    }

    pub fn attach_rate(&self, m: MonomerId) -> f64 {
        self.k_plus[m.index()]
    }

    pub fn detach_rate(&self, m: MonomerId) -> f64 {
        self.k_minus[m.index()]
    }

    /// Total attachment rate over all types (the exit rate of the root).
    pub fn total_attach_rate(&self) -> f64 {
        self.total_attach
    }

    /// Total exit rate of a state with the given tip: the attachment total
    /// plus the tip's detachment rate, or the attachment total alone at the
    /// root. Uniformly bounded over the state space, so the chain cannot
    /// explode.
    pub fn exit_rate(&self, tip: Option<MonomerId>) -> f64 {
        match tip {
            Some(m) => self.k_minus[m.index()] + self.total_attach,
            None => self.total_attach,
        }
    }

    /// Expected sojourn time in a state whose tip is monomer `i`, for each
    /// `i`: `1 / (k_i^- + sum_r k_r^+)`.
    pub fn mean_holding_times(&self) -> Vec<f64> {
        self.k_minus
            .iter()
            .map(|km| 1.0 / (km + self.total_attach))
            .collect()
    }
}

/// A finite monomer sequence with stack semantics. The empty sequence is the
/// unique root state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Polymer {
    sequence: Vec<MonomerId>,
}

#[allow(clippy::len_without_is_empty)] // is_root is the domain name for empty
impl Polymer {
    pub fn root() -> Self {
        Polymer::default()
    }

    pub fn from_ids<I: IntoIterator<Item = usize>>(ids: I) -> Self {
        Polymer {
            sequence: ids.into_iter().map(MonomerId::new).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_root(&self) -> bool {
        self.sequence.is_empty()
    }

    /// Monomer at the growing end, `None` at the root.
    pub fn tip(&self) -> Option<MonomerId> {
        self.sequence.last().copied()
    }

    pub fn sequence(&self) -> &[MonomerId] {
        &self.sequence
    }

    /// Attach one monomer at the tip.
    pub fn push(&mut self, m: MonomerId) {
        self.sequence.push(m);
    }

    /// Detach the tip monomer. Returns `None` at the root, where detachment
    /// is not a legal transition.
    pub fn pop(&mut self) -> Option<MonomerId> {
        self.sequence.pop()
    }

    /// Occurrences of each monomer type, indexed 0..d. Entries sum to the
    /// polymer length.
    pub fn monomer_counts(&self, dim: usize) -> Result<Vec<u64>, ModelError> {
        let mut counts = vec![0u64; dim];
        for &m in &self.sequence {
            if m.index() >= dim {
                return Err(ModelError::IdOutOfRange {
                    id: m.index(),
                    dim,
                });
            }
            counts[m.index()] += 1;
        }
        Ok(counts)
    }
}

/// One transition of the chain: a monomer attaching at the tip, or the tip
/// detaching. A detach is never recorded when the pre-event state is the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Attach(MonomerId),
    Detach,
}

/// Long-run behavior of the chain, determined by `alpha = sum_i k_i^+/k_i^-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeClass {
    /// `alpha < 1`: the chain has a stationary probability distribution.
    PositiveRecurrent,
    /// `alpha = 1`: the chain returns to the root but has no normalizable
    /// stationary distribution.
    NullRecurrent,
    /// `alpha > 1`: the polymer grows without bound almost surely.
    Transient,
}

impl RegimeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeClass::PositiveRecurrent => "positive_recurrent",
            RegimeClass::NullRecurrent => "null_recurrent",
            RegimeClass::Transient => "transient",
        }
    }
}
