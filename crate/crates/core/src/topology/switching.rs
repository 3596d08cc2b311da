use serde::{Deserialize, Serialize};

use super::TopologyError;

/// Piecewise-constant topology schedule on `[0, horizon]`.
///
/// Interval `k` is `[breakpoints[k], breakpoints[k+1])` (the last one ends
/// at `horizon`) and uses topology `indices[k]` (0-based). The signal is
/// right-continuous: at a breakpoint the new topology is already active.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSignal {
    breakpoints: Vec<f64>,
    indices: Vec<usize>,
    horizon: f64,
}

/// One constant-topology stretch of a signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub topology: usize,
    /// False for the last stretch, which the horizon cuts short.
    pub complete: bool,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }
}

/// Interchange form; topology indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalDoc {
    pub breakpoints: Vec<f64>,
    pub indices: Vec<usize>,
}

impl SwitchingSignal {
    pub fn new(
        breakpoints: Vec<f64>,
        indices: Vec<usize>,
        horizon: f64,
    ) -> Result<Self, TopologyError> {
        if breakpoints.is_empty() || breakpoints.len() != indices.len() {
            return Err(TopologyError::Signal(format!(
                "{} breakpoints but {} indices",
                breakpoints.len(),
                indices.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(TopologyError::Signal(
                "first breakpoint must be t = 0".into(),
            ));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) || !horizon.is_finite() {
            return Err(TopologyError::Signal("breakpoints must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TopologyError::Signal(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if horizon <= *breakpoints.last().unwrap() {
            return Err(TopologyError::Signal(format!(
                "horizon {horizon} must exceed the last breakpoint"
            )));
        }
        Ok(Self {
            breakpoints,
            indices,
            horizon,
        })
    }

    /// Round-robin `0, 1, …, p−1, 0, …` with every interval `dwell` long.
    pub fn periodic(p: usize, dwell: f64, horizon: f64) -> Result<Self, TopologyError> {
        if p == 0 {
            return Err(TopologyError::Signal("need at least one topology".into()));
        }
        if !(dwell > 0.0) || !dwell.is_finite() {
            return Err(TopologyError::Signal(format!(
                "dwell must be positive, got {dwell}"
            )));
        }
        if !(horizon > dwell) || !horizon.is_finite() {
            return Err(TopologyError::Signal(format!(
                "horizon must exceed dwell, got horizon {horizon}, dwell {dwell}"
            )));
        }
        let cutoff = horizon * (1.0 - 1e-12);
        let mut breakpoints = Vec::new();
        let mut indices = Vec::new();
        let mut k = 0usize;
        loop {
            let t = k as f64 * dwell;
            if t >= cutoff {
                break;
            }
            breakpoints.push(t);
            indices.push(k % p);
            k += 1;
        }
        Self::new(breakpoints, indices, horizon)
    }

    pub fn from_doc(doc: &SignalDoc, horizon: f64) -> Result<Self, TopologyError> {
        if doc.indices.contains(&0) {
            return Err(TopologyError::Signal("topology indices are 1-based".into()));
        }
        Self::new(
            doc.breakpoints.clone(),
            doc.indices.iter().map(|i| i - 1).collect(),
            horizon,
        )
    }

    pub fn to_doc(&self) -> SignalDoc {
        SignalDoc {
            breakpoints: self.breakpoints.clone(),
            indices: self.indices.iter().map(|i| i + 1).collect(),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Largest topology index used plus one.
    pub fn topology_count(&self) -> usize {
        self.indices.iter().max().map_or(0, |m| m + 1)
    }

    pub fn intervals(&self) -> impl Iterator<Item = Interval> + '_ {
        let last = self.breakpoints.len() - 1;
        (0..=last).map(move |k| Interval {
            start: self.breakpoints[k],
            end: if k < last {
                self.breakpoints[k + 1]
            } else {
                self.horizon
            },
            topology: self.indices[k],
            complete: k < last,
        })
    }

    /// `σ(t)`, right-continuous at breakpoints.
    pub fn active_index(&self, t: f64) -> Result<usize, TopologyError> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(TopologyError::Signal(format!(
                "t = {t} outside [0, {}]",
                self.horizon
            )));
        }
        let k = self.breakpoints.partition_point(|&b| b <= t) - 1;
        Ok(self.indices[k])
    }

    /// Shortest complete interval; `None` when the signal never switches.
    pub fn min_dwell(&self) -> Option<f64> {
        self.intervals()
            .filter(|iv| iv.complete)
            .map(|iv| iv.len())
            .reduce(f64::min)
    }

    pub fn max_dwell(&self) -> Option<f64> {
        self.intervals()
            .filter(|iv| iv.complete)
            .map(|iv| iv.len())
            .reduce(f64::max)
    }

    /// Checks `τ₁ > t_{k+1} − t_k ≥ τ₀` on every complete interval.
    pub fn check_dwell_bounds(&self, tau0: f64, tau1: f64) -> Result<(), TopologyError> {
        if !(tau0 > 0.0 && tau1 > tau0) {
            return Err(TopologyError::Signal(format!(
                "dwell bounds need τ₁ > τ₀ > 0, got τ₀ = {tau0}, τ₁ = {tau1}"
            )));
        }
        for (k, iv) in self.intervals().enumerate().filter(|(_, iv)| iv.complete) {
            let len = iv.len();
            if len < tau0 || len >= tau1 {
                return Err(TopologyError::Signal(format!(
                    "interval {} has length {len}, outside [{tau0}, {tau1})",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    /// Checks every index addresses one of `count` topologies.
    pub fn check_indices(&self, count: usize) -> Result<(), TopologyError> {
        match self.indices.iter().find(|&&i| i >= count) {
            Some(&i) => Err(TopologyError::Signal(format!(
                "signal uses topology {} but only {count} are defined",
                i + 1
            ))),
            None => Ok(()),
        }
    }
}
