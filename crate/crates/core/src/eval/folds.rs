use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, LevelA, NUM_CLASSES};
use crate::error::{Error, Result};

/// One leave-one-group-out split; ids index into the dataset's samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSpec {
    pub held_out_group: String,
    pub train_sample_ids: Vec<usize>,
    pub test_sample_ids: Vec<usize>,
}

impl FoldSpec {
    /// Checks that train and test are disjoint and that the test set is
    /// exactly the held-out group.
    pub fn check(&self, data: &Dataset) -> Result<()> {
        let test: BTreeSet<usize> = self.test_sample_ids.iter().copied().collect();
        if self.train_sample_ids.iter().any(|i| test.contains(i)) {
            return Err(Error::InvalidDataset(format!(
                "fold {}: training and test samples overlap",
                self.held_out_group
            )));
        }
        for (i, s) in data.samples.iter().enumerate() {
            let in_group = s.group_id() == Some(self.held_out_group.as_str());
            if in_group != test.contains(&i) {
                return Err(Error::InvalidDataset(format!(
                    "fold {}: sample {i} misassigned",
                    self.held_out_group
                )));
            }
        }
        Ok(())
    }
}

/// Leave-one-group-out folds, one per non-pinned group in group-id order.
///
/// Pinned groups always stay in training. A non-pinned group that holds
/// every sample of some class is an error: holding it out would leave the
/// class unseen in training.
pub fn logo_splits(dataset: &Dataset, pinned_groups: &BTreeSet<String>) -> Result<Vec<FoldSpec>> {
    let mut by_group: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut class_groups: [BTreeSet<&str>; NUM_CLASSES] = Default::default();
    for (i, s) in dataset.samples.iter().enumerate() {
        let group = s.group_id().ok_or_else(|| {
            Error::InvalidDataset(format!("sample {i} has no group (synthetic samples cannot be split)"))
        })?;
        by_group.entry(group).or_default().push(i);
        class_groups[s.class().index()].insert(group);
    }
    if by_group.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "leave-one-group-out needs at least 2 groups, found {}",
            by_group.len()
        )));
    }
    for g in pinned_groups {
        if !by_group.contains_key(g.as_str()) {
            return Err(Error::InvalidConfig(format!(
                "pinned group {g:?} does not occur in the dataset"
            )));
        }
    }
    if pinned_groups.len() >= by_group.len() {
        return Err(Error::InvalidConfig(
            "every group is pinned; nothing left to hold out".into(),
        ));
    }
    for class in LevelA::ALL {
        let groups = &class_groups[class.index()];
        if groups.len() == 1 {
            let only = *groups.iter().next().expect("one element");
            if !pinned_groups.contains(only) {
                return Err(Error::MustPin {
                    group: only.to_string(),
                    class,
                });
            }
        }
    }

    let folds = by_group
        .iter()
        .filter(|(g, _)| !pinned_groups.contains(**g))
        .map(|(g, test)| {
            let train = by_group
                .iter()
                .filter(|(other, _)| *other != g)
                .flat_map(|(_, ids)| ids.iter().copied())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            FoldSpec {
                held_out_group: g.to_string(),
                train_sample_ids: train,
                test_sample_ids: test.clone(),
            }
        })
        .collect();
    Ok(folds)
}

/// Groups that must be pinned for [`logo_splits`] to succeed.
pub fn groups_requiring_pin(dataset: &Dataset) -> BTreeSet<String> {
    let mut class_groups: [BTreeSet<&str>; NUM_CLASSES] = Default::default();
    for s in &dataset.samples {
        if let Some(g) = s.group_id() {
            class_groups[s.class().index()].insert(g);
        }
    }
    class_groups
        .iter()
        .filter(|g| g.len() == 1)
        .flat_map(|g| g.iter().map(|s| s.to_string()))
        .collect()
}
