//! UCB policies with fictitious realizations.
//!
//! [`PolicyState`] keeps, per arm, the pull count and the sum of cumulative
//! rewards. Pulls younger than `tau_max` rounds sit in a ledger holding the
//! sum of what has been observed so far (the fictitious cumulative reward:
//! unseen per-round rewards count as zero). Once a pull is `tau_max` rounds
//! old its running sum is final and moves to the completed sums.
//!
//! Round protocol, for `t = 1, 2, ...`:
//! 1. choose an arm ([`Agent::choose`]),
//! 2. [`PolicyState::record_pull`],
//! 3. [`PolicyState::update`] with the observations arriving at round `t`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::Observation;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spread::{Partition, SpreadPmf};

#[derive(Debug, Clone, Copy, PartialEq)]
struct LedgerEntry<T> {
    origin_round: usize,
    arm: usize,
    observed: T,
}

#[derive(Debug, Clone)]
pub struct PolicyState<T> {
    pmf: SpreadPmf<T>,
    partition: Partition,
    arm_caps: Vec<T>,
    pull_counts: Vec<u64>,
    completed_counts: Vec<u64>,
    completed_sums: Vec<T>,
    ledger: VecDeque<LedgerEntry<T>>,
    rounds_elapsed: usize,
    pulled_this_round: bool,
    // phi * sum_k k B(k)
    bias_scale: T,
    ioc: T,
}

impl<T: Real> PolicyState<T> {
    pub fn new(pmf: SpreadPmf<T>, partition: Partition, arm_caps: Vec<T>) -> Result<Self> {
        if pmf.alpha() != partition.alpha() {
            return Err(Error::param(
                "pmf",
                format!(
                    "PMF has {} z-groups but the partition uses alpha = {}",
                    pmf.alpha(),
                    partition.alpha()
                ),
            ));
        }
        if arm_caps.len() < 2 {
            return Err(Error::param("arm_caps", "need at least two arms"));
        }
        if arm_caps.iter().any(|c| !c.is_finite() || *c < T::zero()) {
            return Err(Error::param("arm_caps", "caps must be finite and >= 0"));
        }
        let k = arm_caps.len();
        let bias_scale = T::count(partition.phi()) * pmf.expected_group();
        let ioc = pmf.index_of_coincidence();
        Ok(Self {
            pmf,
            partition,
            arm_caps,
            pull_counts: vec![0; k],
            completed_counts: vec![0; k],
            completed_sums: vec![T::zero(); k],
            ledger: VecDeque::with_capacity(partition.tau_max()),
            rounds_elapsed: 0,
            pulled_this_round: false,
            bias_scale,
            ioc,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.arm_caps.len()
    }

    pub fn pmf(&self) -> &SpreadPmf<T> {
        &self.pmf
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    pub fn arm_caps(&self) -> &[T] {
        &self.arm_caps
    }

    /// Fully processed rounds.
    pub fn rounds_elapsed(&self) -> usize {
        self.rounds_elapsed
    }

    pub fn pull_counts(&self) -> &[u64] {
        &self.pull_counts
    }

    pub fn completed_counts(&self) -> &[u64] {
        &self.completed_counts
    }

    pub fn completed_sums(&self) -> &[T] {
        &self.completed_sums
    }

    /// Number of pulls still in the ledger (at most `tau_max - 1` between rounds).
    pub fn pending_pulls(&self) -> usize {
        self.ledger.len()
    }

    /// Running observed sum of the pull made at `origin_round`, if still pending.
    pub fn fictitious_reward(&self, origin_round: usize) -> Option<T> {
        self.ledger
            .iter()
            .find(|e| e.origin_round == origin_round)
            .map(|e| e.observed)
    }

    /// Records the pull made at round `t`.
    pub fn record_pull(&mut self, t: usize, arm: usize) -> Result<()> {
        self.expect_round(t)?;
        if self.pulled_this_round {
            return Err(Error::protocol(format!("round {t} already has a pull")));
        }
        if arm >= self.num_arms() {
            return Err(Error::param(
                "arm",
                format!("arm {arm} out of range for {} arms", self.num_arms()),
            ));
        }
        self.pull_counts[arm] += 1;
        self.ledger.push_back(LedgerEntry {
            origin_round: t,
            arm,
            observed: T::zero(),
        });
        self.pulled_this_round = true;
        Ok(())
    }

    /// Folds in the observations of round `t` and closes the round. Pulls that
    /// reach age `tau_max` move to the completed sums.
    pub fn update(&mut self, t: usize, observations: &[Observation<T>]) -> Result<()> {
        self.expect_round(t)?;
        let Some(front) = self.ledger.front().map(|e| e.origin_round) else {
            if let Some(o) = observations.first() {
                return Err(unknown_pull(o));
            }
            return self.close_round(t);
        };
        for o in observations {
            // ledger entries are one per round, consecutive from `front`
            let entry = o
                .origin_round
                .checked_sub(front)
                .and_then(|i| self.ledger.get_mut(i))
                .filter(|e| e.origin_round == o.origin_round && e.arm == o.arm)
                .ok_or_else(|| unknown_pull(o))?;
            if o.delay_index != t + 1 - o.origin_round {
                return Err(Error::protocol(format!(
                    "observation of pull {} at round {t} has delay {}, expected {}",
                    o.origin_round,
                    o.delay_index,
                    t + 1 - o.origin_round
                )));
            }
            if !(o.value >= T::zero()) {
                return Err(Error::param("value", format!("negative reward {}", o.value)));
            }
            entry.observed = entry.observed + o.value;
        }
        self.close_round(t)
    }

    fn close_round(&mut self, t: usize) -> Result<()> {
        let tau_max = self.partition.tau_max();
        while let Some(e) = self.ledger.front().copied() {
            if t + 1 - e.origin_round < tau_max {
                break;
            }
            self.ledger.pop_front();
            self.completed_sums[e.arm] = self.completed_sums[e.arm] + e.observed;
            self.completed_counts[e.arm] += 1;
        }
        self.rounds_elapsed = t;
        self.pulled_this_round = false;
        Ok(())
    }

    fn expect_round(&self, t: usize) -> Result<()> {
        if t != self.rounds_elapsed + 1 {
            return Err(Error::protocol(format!(
                "expected round {}, got {t}",
                self.rounds_elapsed + 1
            )));
        }
        Ok(())
    }

    fn expect_selection_round(&self, t: usize) -> Result<()> {
        self.expect_round(t)?;
        if self.pulled_this_round {
            return Err(Error::protocol(format!("round {t} already has a pull")));
        }
        Ok(())
    }

    /// Estimated cumulative reward `R_hat` of `arm` before round `t`: completed
    /// pulls contribute their full reward, pending pulls what has been
    /// observed so far.
    pub fn estimate_mean(&self, arm: usize, t: usize) -> Result<T> {
        self.expect_selection_round(t)?;
        self.estimate(arm)
    }

    fn estimate(&self, arm: usize) -> Result<T> {
        let n = self.pull_count_checked(arm)?;
        let pending = self
            .ledger
            .iter()
            .filter(|e| e.arm == arm)
            .fold(T::zero(), |acc, e| acc + e.observed);
        Ok(self.mean_of(arm, n, pending))
    }

    fn mean_of(&self, arm: usize, n: u64, pending: T) -> T {
        let est = (self.completed_sums[arm] + pending) / T::count(n as usize);
        est.max(T::zero()).min(self.arm_caps[arm])
    }

    fn pending_by_arm(&self) -> Vec<T> {
        let mut sums = vec![T::zero(); self.num_arms()];
        for e in &self.ledger {
            sums[e.arm] = sums[e.arm] + e.observed;
        }
        sums
    }

    fn pull_count_checked(&self, arm: usize) -> Result<u64> {
        let n = *self.pull_counts.get(arm).ok_or_else(|| {
            Error::param("arm", format!("arm {arm} out of range for {} arms", self.num_arms()))
        })?;
        if n == 0 {
            return Err(Error::protocol(format!("arm {arm} has not been pulled")));
        }
        Ok(n)
    }

    /// Confidence width of `arm` at round `t`: a bias term covering rewards
    /// not yet observed plus a Hoeffding term.
    pub fn confidence(&self, arm: usize, t: usize) -> Result<T> {
        if t < 2 {
            return Err(Error::param("t", format!("confidence needs t >= 2, got {t}")));
        }
        let n = self.pull_count_checked(arm)?;
        Ok(confidence_width(
            self.bias_scale,
            self.ioc,
            self.arm_caps[arm],
            n,
            t,
        ))
    }

    /// Upper confidence index `R_hat + c` of `arm` at round `t`.
    pub fn index(&self, arm: usize, t: usize) -> Result<T> {
        Ok(self.estimate(arm)? + self.confidence(arm, t)?)
    }

    /// Arm with the largest upper confidence index; ties go to the lowest
    /// index. Only valid once every arm was pulled (`t > K`).
    pub fn select_arm(&self, t: usize) -> Result<usize> {
        self.expect_selection_round(t)?;
        let k = self.num_arms();
        if t <= k {
            return Err(Error::protocol(format!(
                "round {t} is in the initialization phase (K = {k})"
            )));
        }
        let pending = self.pending_by_arm();
        let mut best = 0;
        let mut best_u = T::neg_infinity();
        for (arm, &p) in pending.iter().enumerate() {
            let n = self.pull_count_checked(arm)?;
            let u = self.mean_of(arm, n, p) + self.confidence(arm, t)?;
            if u > best_u {
                best = arm;
                best_u = u;
            }
        }
        Ok(best)
    }

    /// Delayed UCB1 on completed pulls only. Arms without a completed pull
    /// are forced: the least pulled of them is chosen.
    pub fn ucb1_delayed_select(&self, t: usize) -> Result<usize> {
        self.expect_selection_round(t)?;
        let k = self.num_arms();
        if t <= k {
            return Err(Error::protocol(format!(
                "round {t} is in the initialization phase (K = {k})"
            )));
        }
        let forced = (0..k)
            .filter(|&a| self.completed_counts[a] == 0)
            .min_by_key(|&a| (self.pull_counts[a], a));
        if let Some(arm) = forced {
            return Ok(arm);
        }
        let r_max = self
            .arm_caps
            .iter()
            .copied()
            .fold(T::zero(), |acc, c| acc.max(c));
        let log_term = T::lit(2.0) * T::count(t - 1).ln();
        let mut best = 0;
        let mut best_u = T::neg_infinity();
        for arm in 0..k {
            let n = T::count(self.completed_counts[arm] as usize);
            let u = self.completed_sums[arm] / n + r_max * (log_term / n).sqrt();
            if u > best_u {
                best = arm;
                best_u = u;
            }
        }
        Ok(best)
    }
}

fn unknown_pull<T>(o: &Observation<T>) -> Error {
    Error::protocol(format!(
        "observation for unknown pull (round {}, arm {})",
        o.origin_round, o.arm
    ))
}

/// `c = bias_scale r_max / n + r_max sqrt(2 ln(t - 1) ioc / n)`, where
/// `bias_scale = phi sum_k k B(k)` and `ioc = sum_k B(k)^2`.
pub fn confidence_width<T: Real>(bias_scale: T, ioc: T, r_max: T, n: u64, t: usize) -> T {
    let n = T::count(n as usize);
    let log_term = T::lit(2.0) * T::count(t - 1).ln() * ioc / n;
    bias_scale * r_max / n + r_max * log_term.sqrt()
}

/// Policies selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    /// UCB with fictitious realizations and a general spread PMF.
    TpUcbFrG,
    /// [`PolicyKind::TpUcbFrG`] with the uniform PMF.
    TpUcbFr,
    Ucb1Delayed,
    /// Uniformly random arm each round.
    Random,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::TpUcbFrG,
        PolicyKind::TpUcbFr,
        PolicyKind::Ucb1Delayed,
        PolicyKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::TpUcbFrG => "tp-ucb-fr-g",
            PolicyKind::TpUcbFr => "tp-ucb-fr",
            PolicyKind::Ucb1Delayed => "ucb1-delayed",
            PolicyKind::Random => "random",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A policy bound to its state.
#[derive(Debug, Clone)]
pub struct Agent<T> {
    kind: PolicyKind,
    state: PolicyState<T>,
    rng: ChaCha8Rng,
}

impl<T: Real> Agent<T> {
    /// `pmf` is the spread PMF the policy assumes; [`PolicyKind::TpUcbFr`]
    /// replaces it with the uniform PMF. `seed` only drives [`PolicyKind::Random`].
    pub fn new(
        kind: PolicyKind,
        pmf: SpreadPmf<T>,
        partition: Partition,
        arm_caps: Vec<T>,
        seed: u64,
    ) -> Result<Self> {
        let pmf = match kind {
            PolicyKind::TpUcbFr => SpreadPmf::uniform(partition.alpha())?,
            _ => pmf,
        };
        Ok(Self {
            kind,
            state: PolicyState::new(pmf, partition, arm_caps)?,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15),
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn state(&self) -> &PolicyState<T> {
        &self.state
    }

    /// Arm to pull at round `t`. UCB policies pull arm `t - 1` during the
    /// first `K` rounds.
    pub fn choose(&mut self, t: usize) -> Result<usize> {
        let k = self.state.num_arms();
        match self.kind {
            PolicyKind::Random => {
                self.state.expect_selection_round(t)?;
                Ok(self.rng.random_range(0..k))
            }
            _ if t >= 1 && t <= k => {
                self.state.expect_selection_round(t)?;
                Ok(t - 1)
            }
            PolicyKind::TpUcbFrG | PolicyKind::TpUcbFr => self.state.select_arm(t),
            PolicyKind::Ucb1Delayed => self.state.ucb1_delayed_select(t),
        }
    }

    pub fn record_pull(&mut self, t: usize, arm: usize) -> Result<()> {
        self.state.record_pull(t, arm)
    }

    pub fn update(&mut self, t: usize, observations: &[Observation<T>]) -> Result<()> {
        self.state.update(t, observations)
    }
}
