//! Grouped observations: values plus a partition into groups of at least two
//! observations that share a distribution.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What to do with a group label that occurs exactly once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingletonPolicy {
    /// Reject the sample.
    #[default]
    Error,
    /// Remove the observation, shrinking `n`.
    Drop,
}

/// `n` observations partitioned into `g` groups with dense ids `0..g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedSample {
    values: Vec<f64>,
    group_of: Vec<usize>,
    group_sizes: Vec<usize>,
}

impl GroupedSample {
    /// Builds a sample from values and a group id per value.
    ///
    /// Ids must be dense (`0..g`, each used at least once) and every group
    /// must hold at least two observations.
    pub fn new(values: Vec<f64>, group_of: Vec<usize>) -> Result<Self> {
        if values.len() != group_of.len() {
            return Err(Error::Assumption(format!(
                "{} values but {} group ids",
                values.len(),
                group_of.len()
            )));
        }
        if values.len() < 2 {
            return Err(Error::Assumption(format!(
                "need at least 2 observations, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "observation {i} is not finite ({})",
                values[i]
            )));
        }
        let g = group_of.iter().copied().max().map_or(0, |m| m + 1);
        let mut group_sizes = vec![0usize; g];
        for &j in &group_of {
            group_sizes[j] += 1;
        }
        if let Some(j) = group_sizes.iter().position(|&m| m == 0) {
            return Err(Error::Assumption(format!(
                "group ids are not dense: group {j} is empty"
            )));
        }
        if let Some(j) = group_sizes.iter().position(|&m| m < 2) {
            return Err(Error::Assumption(format!(
                "group {j} has a single observation; every group needs at least 2"
            )));
        }
        Ok(Self {
            values,
            group_of,
            group_sizes,
        })
    }

    /// One group per inner vector, in order.
    pub fn from_groups(groups: &[Vec<f64>]) -> Result<Self> {
        let mut values = Vec::new();
        let mut group_of = Vec::new();
        for (j, group) in groups.iter().enumerate() {
            values.extend_from_slice(group);
            group_of.extend(std::iter::repeat_n(j, group.len()));
        }
        Self::new(values, group_of)
    }

    /// All observations in a single group, the i.i.d. special case.
    pub fn single_group(values: Vec<f64>) -> Result<Self> {
        let group_of = vec![0; values.len()];
        Self::new(values, group_of)
    }

    /// Groups observations by label. Group ids follow first appearance.
    ///
    /// Returns the sample, the label of each group, and the labels of any
    /// singleton groups removed under [`SingletonPolicy::Drop`].
    pub fn from_labels<L>(
        values: Vec<f64>,
        labels: &[L],
        policy: SingletonPolicy,
    ) -> Result<LabeledSample<L>>
    where
        L: Clone + Eq + Hash + std::fmt::Display,
    {
        if values.len() != labels.len() {
            return Err(Error::Assumption(format!(
                "{} values but {} labels",
                values.len(),
                labels.len()
            )));
        }
        let mut counts: HashMap<&L, usize> = HashMap::new();
        for label in labels {
            *counts.entry(label).or_default() += 1;
        }

        let mut dropped = Vec::new();
        let mut seen: HashMap<&L, usize> = HashMap::new();
        let mut group_labels = Vec::new();
        let mut kept_values = Vec::with_capacity(values.len());
        let mut group_of = Vec::with_capacity(values.len());
        for (value, label) in values.into_iter().zip(labels) {
            if counts[label] < 2 {
                match policy {
                    SingletonPolicy::Error => {
                        return Err(Error::Assumption(format!(
                            "group '{label}' has a single observation; every group needs at least 2"
                        )))
                    }
                    SingletonPolicy::Drop => {
                        dropped.push(label.clone());
                        continue;
                    }
                }
            }
            let next = group_labels.len();
            let id = *seen.entry(label).or_insert_with(|| {
                group_labels.push(label.clone());
                next
            });
            kept_values.push(value);
            group_of.push(id);
        }
        let sample = Self::new(kept_values, group_of)?;
        Ok(LabeledSample {
            sample,
            group_labels,
            dropped,
        })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn num_groups(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    /// Applies `f` to every value, keeping the grouping.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.values.iter().map(|&x| f(x)).collect(),
            self.group_of.clone(),
        )
    }

    /// Per-group counts of observations `<= threshold`.
    pub fn counts_at_or_below(&self, threshold: f64) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_groups()];
        for (&x, &j) in self.values.iter().zip(&self.group_of) {
            if x <= threshold {
                counts[j] += 1;
            }
        }
        counts
    }
}

/// Result of [`GroupedSample::from_labels`].
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample<L> {
    pub sample: GroupedSample,
    /// Label of group `j` at index `j`.
    pub group_labels: Vec<L>,
    /// Labels of observations removed as singletons, in file order.
    pub dropped: Vec<L>,
}
