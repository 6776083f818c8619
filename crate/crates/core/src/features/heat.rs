//! Population visit frequency per AOI and window index.

use serde::{Deserialize, Serialize};

use crate::windowing::WindowedSession;

/// For every window index `t`, the fraction of training recordings having a
/// window `t` that visited each AOI there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatModel {
    pub n: usize,
    /// `active[t - 1][j - 1]`: recordings visiting AOI `j` at window `t`.
    pub active: Vec<Vec<u32>>,
    /// `support[t - 1]`: recordings that have a window `t`.
    pub support: Vec<u32>,
}

impl HeatModel {
    /// Heat of AOI `j` at 1-based window index `t`; 0 when no training
    /// recording reaches `t`.
    pub fn heat(&self, j: u32, t: usize) -> f64 {
        match self.support.get(t.wrapping_sub(1)) {
            Some(&u) if u > 0 => self.active[t - 1][j as usize - 1] as f64 / u as f64,
            _ => 0.0,
        }
    }

    pub fn support_at(&self, t: usize) -> u32 {
        self.support.get(t.wrapping_sub(1)).copied().unwrap_or(0)
    }
}

pub fn fit_heat_model(training: &[&WindowedSession], n: usize) -> HeatModel {
    let max_len = training.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut active = vec![vec![0u32; n]; max_len];
    let mut support = vec![0u32; max_len];
    for s in training {
        for (t, label) in s.labels.iter().enumerate() {
            support[t] += 1;
            for (j, &b) in label.bits.iter().enumerate().take(n) {
                active[t][j] += u32::from(b);
            }
        }
    }
    HeatModel { n, active, support }
}
