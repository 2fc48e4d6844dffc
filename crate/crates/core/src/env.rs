//! Seeded TP-MAB environment.
//!
//! Each pull produces a [`PendingSchedule`] of `tau_max` per-round rewards,
//! indexed by delay `j = t - h + 1`. Rewards honor the spread caps: the total
//! inside z-group `k` never exceeds `B(k) * r_max`. Draws are keyed by
//! `(seed, arm, round)` so the reward an arm yields at a round does not depend
//! on what was pulled before.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spread::{Partition, SpreadPmf};

/// How a pull's cumulative reward is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Every z-group independently pays its full cap `B(k) r_max` with
    /// probability `mu / r_max`, else nothing.
    #[default]
    ScaledBernoulli,
    /// A cumulative reward `r` drawn uniformly around `mu` is split
    /// proportionally: group `k` receives `B(k) r`.
    ProportionalSpread,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmSpec<T> {
    mu: T,
    r_max: T,
    generator: GeneratorKind,
}

impl<T: Real> ArmSpec<T> {
    pub fn new(mu: T, r_max: T, generator: GeneratorKind) -> Result<Self> {
        if !r_max.is_finite() || r_max < T::zero() {
            return Err(Error::param("r_max", format!("must be finite and >= 0, got {r_max}")));
        }
        if !mu.is_finite() || mu < T::zero() || mu > r_max {
            return Err(Error::param("mu", format!("must lie in [0, {r_max}], got {mu}")));
        }
        Ok(Self { mu, r_max, generator })
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn generator(&self) -> GeneratorKind {
        self.generator
    }
}

/// A problem instance: arms, horizon and delay structure.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceConfig<T> {
    arms: Vec<ArmSpec<T>>,
    horizon: usize,
    partition: Partition,
}

impl<T: Real> InstanceConfig<T> {
    pub fn new(arms: Vec<ArmSpec<T>>, horizon: usize, tau_max: usize, alpha: usize) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::param("arms", "need at least one arm"));
        }
        if horizon == 0 {
            return Err(Error::param("horizon", "must be at least 1"));
        }
        let partition = Partition::new(tau_max, alpha)?;
        Ok(Self {
            arms,
            horizon,
            partition,
        })
    }

    pub fn arms(&self) -> &[ArmSpec<T>] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    pub fn arm_caps(&self) -> Vec<T> {
        self.arms.iter().map(|a| a.r_max).collect()
    }

    pub fn means(&self) -> Vec<T> {
        self.arms.iter().map(|a| a.mu).collect()
    }
}

/// Per-round rewards generated by one pull; `per_round[j - 1]` is the reward
/// seen `j - 1` rounds after the pull.
#[derive(Debug, Clone, PartialEq)]
pub struct PendingSchedule<T> {
    pub origin_round: usize,
    pub arm: usize,
    pub per_round: Vec<T>,
}

impl<T: Real> PendingSchedule<T> {
    /// Cumulative reward, summed in delay order.
    pub fn total(&self) -> T {
        self.per_round.iter().fold(T::zero(), |acc, &x| acc + x)
    }

    /// Realized z-group totals for groups of `phi` rounds.
    pub fn group_totals(&self, phi: usize) -> Vec<T> {
        self.per_round
            .chunks(phi)
            .map(|c| c.iter().fold(T::zero(), |acc, &x| acc + x))
            .collect()
    }
}

/// Per-round reward of pull `origin_round`, observed at delay `delay_index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<T> {
    pub origin_round: usize,
    pub arm: usize,
    pub delay_index: usize,
    pub value: T,
}

#[derive(Debug, Clone)]
pub struct Environment<T> {
    instance: InstanceConfig<T>,
    pmf: SpreadPmf<T>,
    seed: u64,
    // group_caps[arm][k - 1] = B(k) * r_max(arm)
    group_caps: Vec<Vec<T>>,
    // schedules of the last tau_max recorded rounds; None marks a no-op round
    window: VecDeque<Option<PendingSchedule<T>>>,
    recorded_through: usize,
    observed_through: usize,
}

impl<T: Real> Environment<T> {
    pub fn new(instance: InstanceConfig<T>, pmf: SpreadPmf<T>, seed: u64) -> Result<Self> {
        let alpha = instance.partition().alpha();
        if pmf.alpha() != alpha {
            return Err(Error::param(
                "pmf",
                format!("PMF has {} z-groups but the instance uses alpha = {alpha}", pmf.alpha()),
            ));
        }
        let group_caps = instance
            .arms()
            .iter()
            .map(|a| pmf.zgroup_caps(a.r_max))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            window: VecDeque::with_capacity(instance.partition().tau_max()),
            instance,
            pmf,
            seed,
            group_caps,
            recorded_through: 0,
            observed_through: 0,
        })
    }

    pub fn instance(&self) -> &InstanceConfig<T> {
        &self.instance
    }

    pub fn pmf(&self) -> &SpreadPmf<T> {
        &self.pmf
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Rounds `1..=recorded_through()` have a pull or a no-op on record.
    pub fn recorded_through(&self) -> usize {
        self.recorded_through
    }

    /// The schedule that pulling `arm` at round `t` yields. Pure in
    /// `(seed, arm, t)`; [`Environment::pull`] records the same value.
    pub fn schedule(&self, t: usize, arm: usize) -> Result<PendingSchedule<T>> {
        let spec = self.instance.arms().get(arm).ok_or_else(|| {
            Error::param(
                "arm",
                format!("arm {arm} out of range for {} arms", self.instance.num_arms()),
            )
        })?;
        let partition = self.instance.partition();
        let phi = partition.phi();
        let phi_t = T::count(phi);
        let caps = &self.group_caps[arm];
        let mut rng = ChaCha8Rng::seed_from_u64(draw_key(self.seed, arm as u64, t as u64));

        let group_totals: Vec<T> = if spec.r_max == T::zero() || spec.mu == T::zero() {
            vec![T::zero(); caps.len()]
        } else {
            match spec.generator {
                GeneratorKind::ScaledBernoulli => {
                    let p = spec.mu / spec.r_max;
                    caps.iter()
                        .map(|&cap| {
                            let u = T::lit(rng.random::<f64>());
                            if u < p {
                                cap
                            } else {
                                T::zero()
                            }
                        })
                        .collect()
                }
                GeneratorKind::ProportionalSpread => {
                    let two = T::lit(2.0);
                    let lo = (two * spec.mu - spec.r_max).max(T::zero());
                    let hi = (two * spec.mu).min(spec.r_max);
                    let u = T::lit(rng.random::<f64>());
                    let r = (lo + u * (hi - lo)).min(hi);
                    self.pmf.weights().iter().map(|&w| w * r).collect()
                }
            }
        };

        let mut per_round = Vec::with_capacity(partition.tau_max());
        for total in group_totals {
            let share = total / phi_t;
            per_round.extend(std::iter::repeat_n(share, phi));
        }
        Ok(PendingSchedule {
            origin_round: t,
            arm,
            per_round,
        })
    }

    /// Pulls `arm` at round `t`. Rounds must be recorded in order, one pull or
    /// no-op each.
    pub fn pull(&mut self, t: usize, arm: usize) -> Result<PendingSchedule<T>> {
        self.check_next_round(t)?;
        let schedule = self.schedule(t, arm)?;
        self.push_round(Some(schedule.clone()));
        Ok(schedule)
    }

    /// Records round `t` as having no pull.
    pub fn noop(&mut self, t: usize) -> Result<()> {
        self.check_next_round(t)?;
        self.push_round(None);
        Ok(())
    }

    /// Per-round rewards arriving at round `t`: one observation for each pull
    /// `h` with `t - h + 1 <= tau_max`, at delay `j = t - h + 1`.
    pub fn observe_round(&mut self, t: usize) -> Result<Vec<Observation<T>>> {
        if t <= self.observed_through {
            return Err(Error::protocol(format!("round {t} was already observed")));
        }
        if t != self.observed_through + 1 {
            return Err(Error::protocol(format!(
                "round {t} observed before round {}",
                self.observed_through + 1
            )));
        }
        if t > self.recorded_through {
            return Err(Error::protocol(format!(
                "round {t} has no pull or no-op on record"
            )));
        }
        let tau_max = self.instance.partition().tau_max();
        // window may still hold rounds recorded after t
        let ahead = self.recorded_through - t;
        let mut out = Vec::with_capacity(self.window.len());
        for schedule in self.window.iter().rev().skip(ahead).flatten() {
            let j = t - schedule.origin_round + 1;
            if j > tau_max {
                continue;
            }
            out.push(Observation {
                origin_round: schedule.origin_round,
                arm: schedule.arm,
                delay_index: j,
                value: schedule.per_round[j - 1],
            });
        }
        // oldest pull first
        out.reverse();
        self.observed_through = t;
        Ok(out)
    }

    fn check_next_round(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.instance.horizon() {
            return Err(Error::param(
                "t",
                format!("round {t} outside horizon 1..={}", self.instance.horizon()),
            ));
        }
        if t != self.recorded_through + 1 {
            return Err(Error::protocol(format!(
                "expected round {}, got {t}",
                self.recorded_through + 1
            )));
        }
        Ok(())
    }

    fn push_round(&mut self, entry: Option<PendingSchedule<T>>) {
        let tau_max = self.instance.partition().tau_max();
        // keep whatever is still unobserved plus the tau_max-round window
        let keep = tau_max + (self.recorded_through - self.observed_through);
        while self.window.len() >= keep {
            self.window.pop_front();
        }
        self.window.push_back(entry);
        self.recorded_through += 1;
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based key for the draws of one `(seed, arm, round)` cell.
fn draw_key(seed: u64, arm: u64, round: u64) -> u64 {
    splitmix64(seed ^ splitmix64(arm ^ splitmix64(round)))
}
