//! Run configuration: compression parameters, caps and budgets.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Profile {
    /// Small parameters for desk-scale runs (`delta` as configured, default 3).
    Test,
    /// Parameters as in the underlying method: `epsilon = 30n`,
    /// `delta = |G| * epsilon`. Astronomically large on real inputs; usable
    /// only on tiny systems.
    Faithful,
}

/// All tunables of a solver run. Every threshold used anywhere in the solver
/// comes from here; nothing is hard-coded at call sites.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    /// Oracle bound: enumerate solutions with `|sigma(X)| <= max_len`.
    pub max_len: usize,
    /// Periodicity parameter for compression.
    pub delta: usize,
    /// Pair-compression parameter; `Faithful` overrides it with `30n`.
    pub epsilon: usize,
    /// Start of the kappa ladder in the overall compression loop.
    pub kappa0: usize,
    /// Oracle search-node budget.
    pub node_budget: u64,
    /// Maximum number of arcs on a single guided path.
    pub step_budget: usize,
    /// Cap on `|W|` and on the total size of any transition table.
    pub word_cap: usize,
    /// Hard cap on constraint-matrix dimension.
    pub matrix_dim_cap: usize,
    /// Enumeration depth used by summary reports.
    pub report_depth: usize,
    pub seed: u64,
    pub profile: Profile,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_len: 6,
            delta: 3,
            epsilon: 18,
            kappa0: 40,
            node_budget: 20_000_000,
            step_budget: 4_000,
            word_cap: 20_000,
            matrix_dim_cap: 16,
            report_depth: 12,
            seed: 0,
            profile: Profile::Test,
        }
    }
}

impl RunConfig {
    /// `delta` to use for a run on a system with `|G| = g_order` and
    /// `n = |W_init|`.
    pub fn effective_delta(&self, g_order: usize, n: usize) -> usize {
        match self.profile {
            Profile::Test => self.delta.max(1),
            Profile::Faithful => g_order * 30 * n,
        }
    }

    /// `epsilon` such that `delta = |G| * epsilon`.
    pub fn effective_epsilon(&self, n: usize) -> usize {
        match self.profile {
            Profile::Test => self.epsilon.max(1),
            Profile::Faithful => 30 * n,
        }
    }
}
