//! Closed-form regret bounds.
//!
//! Every bound below is written in terms of two PMF diagnostics:
//! `E[Y] = sum_k k B(k)` ([`SpreadPmf::expected_group`]) and
//! `IoC = sum_k B(k)^2` ([`SpreadPmf::index_of_coincidence`]). Under the
//! uniform PMF they reduce to `(alpha + 1) / 2` and `1 / alpha`.

use crate::env::InstanceConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spread::{Partition, SpreadPmf};

/// Arm means, gaps and caps of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSummary<T> {
    mus: Vec<T>,
    mu_star: T,
    gaps: Vec<T>,
    r_max_global: T,
    arm_caps: Vec<T>,
    partition: Partition,
}

impl<T: Real> InstanceSummary<T> {
    pub fn new(mus: Vec<T>, arm_caps: Vec<T>, partition: Partition) -> Result<Self> {
        if mus.is_empty() {
            return Err(Error::param("mus", "need at least one arm"));
        }
        if mus.len() != arm_caps.len() {
            return Err(Error::param(
                "arm_caps",
                format!("{} caps for {} arms", arm_caps.len(), mus.len()),
            ));
        }
        for (i, (&mu, &cap)) in mus.iter().zip(&arm_caps).enumerate() {
            if !(mu >= T::zero()) || !(mu <= cap) || !cap.is_finite() {
                return Err(Error::param(
                    "mus",
                    format!("arm {i}: need 0 <= mu <= r_max, got mu = {mu}, r_max = {cap}"),
                ));
            }
        }
        let mu_star = mus.iter().copied().fold(T::neg_infinity(), T::max);
        let r_max_global = arm_caps.iter().copied().fold(T::zero(), T::max);
        let gaps = mus.iter().map(|&m| mu_star - m).collect();
        Ok(Self {
            mus,
            mu_star,
            gaps,
            r_max_global,
            arm_caps,
            partition,
        })
    }

    pub fn from_instance(instance: &InstanceConfig<T>) -> Result<Self> {
        Self::new(instance.means(), instance.arm_caps(), instance.partition())
    }

    pub fn mus(&self) -> &[T] {
        &self.mus
    }

    pub fn mu_star(&self) -> T {
        self.mu_star
    }

    /// `gaps()[i] = mu_star - mu_i`.
    pub fn gaps(&self) -> &[T] {
        &self.gaps
    }

    pub fn r_max_global(&self) -> T {
        self.r_max_global
    }

    pub fn arm_caps(&self) -> &[T] {
        &self.arm_caps
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    pub fn max_gap(&self) -> T {
        self.gaps.iter().copied().fold(T::zero(), T::max)
    }

    fn suboptimal(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.mus.len()).filter(move |&i| self.gaps[i] > T::zero())
    }

    fn check_pmf(&self, pmf: &SpreadPmf<T>) -> Result<()> {
        if pmf.alpha() != self.partition.alpha() {
            return Err(Error::param(
                "pmf",
                format!(
                    "PMF has {} z-groups but the instance uses alpha = {}",
                    pmf.alpha(),
                    self.partition.alpha()
                ),
            ));
        }
        Ok(())
    }
}

/// Bernoulli KL divergence `KL(p, q)`, with `0 ln 0 = 0`.
pub fn kl_bernoulli<T: Real>(p: T, q: T) -> Result<T> {
    let (zero, one) = (T::zero(), T::one());
    if !(p >= zero && p <= one) {
        return Err(Error::param("p", format!("must lie in [0, 1], got {p}")));
    }
    if !(q >= zero && q <= one) {
        return Err(Error::param("q", format!("must lie in [0, 1], got {q}")));
    }
    if q == zero || q == one {
        if p == q {
            return Ok(zero);
        }
        return Err(Error::DivergenceInfinite {
            p: p.to_f64().unwrap_or(f64::NAN),
            q: q.to_f64().unwrap_or(f64::NAN),
        });
    }
    let term = |x: T, y: T| if x == zero { zero } else { x * (x / y).ln() };
    Ok((term(p, q) + term(one - p, one - q)).max(zero))
}

/// Asymptotic lower bound on `R_T / ln T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundRate<T> {
    /// `2 / (alpha + 1) * E[Y] * alpha * IoC`; exactly 1 for the uniform PMF.
    pub prefactor: T,
    pub coefficient: T,
    /// Set when the optimal mean sits at `r_max_global`: the KL term is
    /// infinite and the bound degenerates to 0.
    pub vacuous: bool,
}

pub fn lower_bound_prefactor<T: Real>(pmf: &SpreadPmf<T>) -> T {
    let alpha = T::count(pmf.alpha());
    T::lit(2.0) / (alpha + T::one()) * pmf.expected_group() * alpha * pmf.index_of_coincidence()
}

/// `sum_{i: mu_i < mu*} prefactor * gap_i / (alpha KL(mu_i / R_max, mu* / R_max))`.
pub fn lower_bound_rate<T: Real>(
    instance: &InstanceSummary<T>,
    pmf: &SpreadPmf<T>,
) -> Result<LowerBoundRate<T>> {
    instance.check_pmf(pmf)?;
    let prefactor = lower_bound_prefactor(pmf);
    let alpha = T::count(pmf.alpha());
    let r_max = instance.r_max_global;
    let mut coefficient = T::zero();
    for i in instance.suboptimal() {
        let kl = match kl_bernoulli(instance.mus[i] / r_max, instance.mu_star / r_max) {
            Ok(kl) => kl,
            Err(Error::DivergenceInfinite { .. }) => {
                return Ok(LowerBoundRate {
                    prefactor,
                    coefficient: T::zero(),
                    vacuous: true,
                })
            }
            Err(e) => return Err(e),
        };
        coefficient = coefficient + prefactor * instance.gaps[i] / (alpha * kl);
    }
    Ok(LowerBoundRate {
        prefactor,
        coefficient,
        vacuous: false,
    })
}

/// Upper bound on the pseudo-regret of the fictitious-realization UCB policy
/// after `horizon` rounds.
pub fn upper_bound_regret<T: Real>(
    instance: &InstanceSummary<T>,
    pmf: &SpreadPmf<T>,
    horizon: usize,
) -> Result<T> {
    if horizon < 2 {
        return Err(Error::param("horizon", format!("must be at least 2, got {horizon}")));
    }
    instance.check_pmf(pmf)?;
    let ln_t = T::count(horizon).ln();
    let phi = T::count(instance.partition.phi());
    let ey = pmf.expected_group();
    let ioc = pmf.index_of_coincidence();
    let four = T::lit(4.0);
    let mut leading = T::zero();
    let mut cap_sum = T::zero();
    let mut gap_sum = T::zero();
    for i in instance.suboptimal() {
        let gap = instance.gaps[i];
        let r = instance.arm_caps[i];
        // r^2 sqrt(1/r) -> 0 as r -> 0
        if r > T::zero() {
            let root = (T::one() + gap * phi * ey / (r * ln_t * ioc)).sqrt();
            leading = leading + four * ln_t * r * r * ioc / gap * (T::one() + root);
        }
        cap_sum = cap_sum + r;
        gap_sum = gap_sum + gap;
    }
    let tail = T::one() + T::PI() * T::PI() / T::lit(3.0);
    Ok(leading + T::lit(2.0) * phi * ey * cap_sum + tail * gap_sum)
}

/// Real-valued pull count beyond which a suboptimal arm's confidence interval
/// no longer reaches the optimal mean at round `t`.
pub fn suboptimal_pull_threshold_real<T: Real>(
    instance: &InstanceSummary<T>,
    pmf: &SpreadPmf<T>,
    arm: usize,
    t: T,
) -> Result<T> {
    instance.check_pmf(pmf)?;
    let gap = *instance
        .gaps
        .get(arm)
        .ok_or_else(|| Error::param("arm", format!("arm {arm} out of range")))?;
    if !(gap > T::zero()) {
        return Err(Error::param("arm", format!("arm {arm} is optimal; it has no threshold")));
    }
    if !(t >= T::lit(2.0)) {
        return Err(Error::param("t", format!("must be at least 2, got {t}")));
    }
    let ln_t = t.ln();
    let phi = T::count(instance.partition.phi());
    let r = instance.arm_caps[arm];
    if r == T::zero() {
        // a zero-cap arm has zero confidence width
        return Ok(T::zero());
    }
    let ey = pmf.expected_group();
    let ioc = pmf.index_of_coincidence();
    let spread = ln_t * r * r * ioc;
    let root = (T::one() + gap * phi * r * ey / spread).sqrt();
    Ok(T::lit(2.0) * phi * r * ey / gap + T::lit(4.0) * spread / (gap * gap) * (T::one() + root))
}

/// [`suboptimal_pull_threshold_real`] rounded up.
pub fn suboptimal_pull_threshold<T: Real>(
    instance: &InstanceSummary<T>,
    pmf: &SpreadPmf<T>,
    arm: usize,
    t: T,
) -> Result<u64> {
    let l = suboptimal_pull_threshold_real(instance, pmf, arm, t)?;
    l.ceil()
        .to_u64()
        .ok_or_else(|| Error::param("t", format!("threshold {l} overflows u64")))
}

/// Realized pseudo-regret `sum_i gap_i N_i` for final pull counts.
pub fn pseudo_regret<T: Real>(pull_counts: &[u64], instance: &InstanceSummary<T>) -> T {
    pull_counts
        .iter()
        .zip(&instance.gaps)
        .fold(T::zero(), |acc, (&n, &gap)| acc + gap * T::count(n as usize))
}
