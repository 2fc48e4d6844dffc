//! Spread PMFs over z-groups.
//!
//! A [`SpreadPmf`] assigns each z-group `k in 1..=alpha` a weight `B(k)`; the
//! reward an arm can deliver inside group `k` is capped at `B(k) * r_max`.
//! The uniform PMF recovers the classic alpha-smooth reward structure.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadPmf<T> {
    weights: Vec<T>,
}

impl<T: Real> SpreadPmf<T> {
    /// Equal weight `1/alpha` on every z-group.
    pub fn uniform(alpha: usize) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::param("alpha", "must be at least 1"));
        }
        let w = T::one() / T::count(alpha);
        Ok(Self {
            weights: vec![w; alpha],
        })
    }

    /// Validates caller-supplied weights. Weights that do not sum to one are
    /// rejected, never renormalized.
    pub fn from_weights(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::param("weights", "must be non-empty"));
        }
        if let Some((k, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < T::zero())
        {
            return Err(Error::param(
                "weights",
                format!("weight {} of z-group {} is negative or not finite", w, k + 1),
            ));
        }
        let sum: T = weights.iter().copied().sum();
        if (sum - T::one()).abs() > T::normalization_tolerance() {
            return Err(Error::NotNormalized {
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { weights })
    }

    /// All mass on z-group `k` (1-based).
    pub fn point_mass(alpha: usize, k: usize) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::param("alpha", "must be at least 1"));
        }
        if k == 0 || k > alpha {
            return Err(Error::param("k", format!("must lie in 1..={alpha}, got {k}")));
        }
        let mut weights = vec![T::zero(); alpha];
        weights[k - 1] = T::one();
        Ok(Self { weights })
    }

    /// Beta-binomial weights with `n = alpha - 1` trials; support `0..alpha`
    /// is shifted onto z-groups `1..=alpha`.
    pub fn beta_binomial(alpha: usize, a: T, b: T) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::param("alpha", "must be at least 1"));
        }
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::param("a", format!("shape must be positive, got {a}")));
        }
        if !(b > T::zero()) || !b.is_finite() {
            return Err(Error::param("b", format!("shape must be positive, got {b}")));
        }
        let n = alpha - 1;
        // ln P(0) = sum_i ln((b + i) / (a + b + i)), then the ratio recurrence
        // P(k+1) / P(k) = (n - k)(a + k) / ((k + 1)(b + n - k - 1)).
        let mut log_p = (0..n)
            .map(|i| {
                let i = T::count(i);
                ((b + i) / (a + b + i)).ln()
            })
            .sum::<T>();
        let mut weights = Vec::with_capacity(alpha);
        weights.push(log_p.exp());
        for k in 0..n {
            let kf = T::count(k);
            let rest = T::count(n - k);
            log_p = log_p + (rest * (a + kf)).ln()
                - ((kf + T::one()) * (b + rest - T::one())).ln();
            weights.push(log_p.exp());
        }
        Self::from_weights(weights)
    }

    pub fn alpha(&self) -> usize {
        self.weights.len()
    }

    /// `weights()[k - 1]` is `B(k)`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `B(k)` for a 1-based z-group index.
    pub fn weight(&self, k: usize) -> T {
        self.weights[k - 1]
    }

    /// Mean z-group index `E[Y] = sum_k k B(k)`.
    pub fn expected_group(&self) -> T {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, &w)| T::count(i + 1) * w)
            .sum()
    }

    /// `sum_k B(k)^2`: the chance two reward points land in the same z-group.
    pub fn index_of_coincidence(&self) -> T {
        self.weights.iter().map(|&w| w * w).sum()
    }

    /// Per-group reward caps `B(k) * r_max`.
    pub fn zgroup_caps(&self, r_max: T) -> Result<Vec<T>> {
        if !(r_max >= T::zero()) || !r_max.is_finite() {
            return Err(Error::param("r_max", format!("must be finite and >= 0, got {r_max}")));
        }
        Ok(self.weights.iter().map(|&w| w * r_max).collect())
    }

    pub fn is_uniform(&self) -> bool {
        let first = self.weights[0];
        self.weights.iter().all(|&w| w == first)
    }
}

/// Split of the `tau_max` delay window into `alpha` z-groups of `phi` rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    tau_max: usize,
    alpha: usize,
    phi: usize,
}

impl Partition {
    pub fn new(tau_max: usize, alpha: usize) -> Result<Self> {
        if tau_max == 0 {
            return Err(Error::param("tau_max", "must be at least 1"));
        }
        if alpha == 0 {
            return Err(Error::param("alpha", "must be at least 1"));
        }
        if alpha > tau_max {
            return Err(Error::param(
                "alpha",
                format!("must not exceed tau_max = {tau_max}, got {alpha}"),
            ));
        }
        if !tau_max.is_multiple_of(alpha) {
            return Err(Error::InvalidPartition { tau_max, alpha });
        }
        Ok(Self {
            tau_max,
            alpha,
            phi: tau_max / alpha,
        })
    }

    pub fn tau_max(&self) -> usize {
        self.tau_max
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn phi(&self) -> usize {
        self.phi
    }

    /// z-group `k = ceil(j / phi)` of delay index `j in 1..=tau_max`.
    pub fn group_of_delay(&self, j: usize) -> usize {
        debug_assert!((1..=self.tau_max).contains(&j));
        j.div_ceil(self.phi)
    }
}
