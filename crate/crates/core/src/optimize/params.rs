use serde::{Deserialize, Serialize};

use crate::bell::{BellScenario, Inequality};
use crate::error::{Error, Result};
use crate::povm::{reduce_angle, HomodyneSetting, IntervalSet};

/// How measurement parameters are tied between the parties.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShareMode {
    /// `A_x` and `B_x` use the same angle and the same bins.
    #[default]
    PerSettingSharedBetweenParties,
    /// Every setting of every party has its own angle and bins.
    FullyIndependent,
}

impl ShareMode {
    /// Number of distinct settings for an `mA × mB` scenario.
    pub fn distinct_settings(self, m_a: usize, m_b: usize) -> Result<usize> {
        match self {
            ShareMode::PerSettingSharedBetweenParties if m_a != m_b => Err(Error::InvalidParameter(format!(
                "shared settings need equal setting counts, got {m_a} and {m_b}"
            ))),
            ShareMode::PerSettingSharedBetweenParties => Ok(m_a),
            ShareMode::FullyIndependent => Ok(m_a + m_b),
        }
    }

    /// Index of the distinct setting used by Bob's input `y`.
    fn bob_slot(self, m_a: usize, y: usize) -> usize {
        match self {
            ShareMode::PerSettingSharedBetweenParties => y,
            ShareMode::FullyIndependent => m_a + y,
        }
    }
}

/// Angles and binning boundaries for every distinct setting.
///
/// Each boundary list is strictly increasing with even length; consecutive
/// pairs are the `+1` intervals `[b₀,b₁] ∪ [b₂,b₃] ∪ …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub thetas: Vec<f64>,
    pub boundaries: Vec<Vec<f64>>,
    pub share_mode: ShareMode,
}

impl ParameterVector {
    pub fn new(thetas: Vec<f64>, boundaries: Vec<Vec<f64>>, share_mode: ShareMode) -> Result<Self> {
        if thetas.len() != boundaries.len() {
            return Err(Error::DimensionMismatch {
                expected: thetas.len(),
                found: boundaries.len(),
            });
        }
        for b in &boundaries {
            if b.len() % 2 != 0 {
                return Err(Error::InvalidIntervals(format!("odd boundary count {}", b.len())));
            }
            IntervalSet::new(b.clone(), false)?;
        }
        Ok(Self {
            thetas: thetas.into_iter().map(reduce_angle).collect(),
            boundaries,
            share_mode,
        })
    }

    /// Canonical form of raw optimizer coordinates: angles reduced, boundaries
    /// sorted and coincident pairs cancelled.
    pub fn from_raw(thetas: &[f64], raw_boundaries: &[&[f64]], share_mode: ShareMode) -> Self {
        Self {
            thetas: thetas.iter().copied().map(reduce_angle).collect(),
            boundaries: raw_boundaries
                .iter()
                .map(|b| IntervalSet::from_unsorted(b).boundaries().to_vec())
                .collect(),
            share_mode,
        }
    }

    pub fn settings(&self) -> Vec<HomodyneSetting<f64>> {
        self.thetas
            .iter()
            .zip(&self.boundaries)
            .map(|(t, b)| HomodyneSetting::new(*t, IntervalSet::new(b.clone(), false).expect("canonical boundaries")))
            .collect()
    }

    pub fn scenario(&self, inequality: &Inequality) -> Result<BellScenario<f64>> {
        let (m_a, m_b) = (inequality.settings_a(), inequality.settings_b());
        let n = self.share_mode.distinct_settings(m_a, m_b)?;
        if n != self.thetas.len() {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.thetas.len(),
            });
        }
        let all = self.settings();
        let a = all[..m_a].to_vec();
        let b = (0..m_b)
            .map(|y| all[self.share_mode.bob_slot(m_a, y)].clone())
            .collect();
        BellScenario::new(inequality.clone(), a, b)
    }

    /// Largest number of intervals over the settings.
    pub fn max_intervals(&self) -> usize {
        self.boundaries.iter().map(|b| b.len() / 2).max().unwrap_or(0)
    }

    /// Every setting padded to exactly `q` intervals with empty intervals
    /// placed far in the tail, so the score is unchanged.
    pub fn padded(&self, q: usize) -> Self {
        let mut out = self.clone();
        for b in &mut out.boundaries {
            let mut k = 0;
            while b.len() < 2 * q {
                let edge = 12.0 + k as f64;
                b.push(edge);
                b.push(edge);
                k += 1;
            }
        }
        out
    }
}

/// Flat coordinate layout `[θ_0 … θ_{n−1}, b_0^0 … b_0^{2q−1}, b_1^0 …]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub settings: usize,
    pub q: usize,
    pub share_mode: ShareMode,
    pub m_a: usize,
    pub m_b: usize,
}

impl Layout {
    pub fn new(inequality: &Inequality, share_mode: ShareMode, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("q must be at least 1".into()));
        }
        let (m_a, m_b) = (inequality.settings_a(), inequality.settings_b());
        Ok(Self {
            settings: share_mode.distinct_settings(m_a, m_b)?,
            q,
            share_mode,
            m_a,
            m_b,
        })
    }

    pub fn len(&self) -> usize {
        self.settings * (1 + 2 * self.q)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self, x: &[f64], s: usize) -> f64 {
        x[s]
    }

    pub fn boundary_offset(&self, s: usize) -> usize {
        self.settings + s * 2 * self.q
    }

    pub fn raw_boundaries<'a>(&self, x: &'a [f64], s: usize) -> &'a [f64] {
        let o = self.boundary_offset(s);
        &x[o..o + 2 * self.q]
    }

    pub fn bob_slot(&self, y: usize) -> usize {
        self.share_mode.bob_slot(self.m_a, y)
    }

    pub fn to_params(&self, x: &[f64]) -> ParameterVector {
        let thetas = &x[..self.settings];
        let raw: Vec<&[f64]> = (0..self.settings).map(|s| self.raw_boundaries(x, s)).collect();
        ParameterVector::from_raw(thetas, &raw, self.share_mode)
    }

    /// Flat coordinates of `p`, padded to this layout's `q`.
    pub fn flatten(&self, p: &ParameterVector) -> Result<Vec<f64>> {
        if p.thetas.len() != self.settings || p.share_mode != self.share_mode {
            return Err(Error::InvalidParameter(
                "parameter vector does not match the optimization layout".into(),
            ));
        }
        if p.max_intervals() > self.q {
            return Err(Error::InvalidParameter(format!(
                "parameter vector has {} intervals, layout allows {}",
                p.max_intervals(),
                self.q
            )));
        }
        let padded = p.padded(self.q);
        let mut x = padded.thetas.clone();
        for b in &padded.boundaries {
            x.extend(b);
        }
        Ok(x)
    }
}
