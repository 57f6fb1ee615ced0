// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

use std::ops::Index;

use crate::error::{Result, UnlearnError};
use crate::losses::{Instance, LossModel};

/// An ordered, non-empty training sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    instances: Vec<Instance>,
}

impl Dataset {
    pub fn new(instances: Vec<Instance>) -> Result<Self> {
        if instances.is_empty() {
            return Err(UnlearnError::EmptyDataset);
        }
        Ok(Dataset { instances })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Instance> {
        self.instances.iter()
    }

    pub fn into_instances(self) -> Vec<Instance> {
        self.instances
    }

    /// Checks every instance against the loss, including the data radius.
    pub fn validate_for(&self, loss: &LossModel) -> Result<()> {
        self.instances.iter().try_for_each(|z| loss.check_instance(z))
    }

    /// Multiset difference: each requested sample removes one equal occurrence.
    pub fn without(&self, removed: &[Instance]) -> Result<Dataset> {
        let mut taken = vec![false; self.instances.len()];
        for (k, u) in removed.iter().enumerate() {
            let hit = self
                .instances
                .iter()
                .enumerate()
                .position(|(i, z)| !taken[i] && z == u)
                .ok_or(UnlearnError::NotInDataset(k))?;
            taken[hit] = true;
        }
        let kept: Vec<Instance> = self
            .instances
            .iter()
            .zip(&taken)
            .filter(|(_, &t)| !t)
            .map(|(z, _)| z.clone())
            .collect();
        Dataset::new(kept)
    }
}

impl Index<usize> for Dataset {
    type Output = Instance;

    fn index(&self, i: usize) -> &Instance {
        &self.instances[i]
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a Instance;
    type IntoIter = std::slice::Iter<'a, Instance>;

    fn into_iter(self) -> Self::IntoIter {
        self.instances.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xs: &[f64]) -> Vec<Instance> {
        xs.iter().map(|&v| Instance::point([v])).collect()
    }

    #[test]
    fn multiset_removal() {
        let s = Dataset::new(pts(&[0.0, 1.0, 1.0, 0.0, 1.0])).unwrap();
        let r = s.without(&pts(&[1.0])).unwrap();
        assert_eq!(r.instances(), &pts(&[0.0, 1.0, 0.0, 1.0])[..]);
        let r = s.without(&pts(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(r.instances(), &pts(&[0.0, 0.0])[..]);
        assert!(matches!(
            s.without(&pts(&[1.0, 1.0, 1.0, 1.0])),
            Err(UnlearnError::NotInDataset(3))
        ));
        assert!(matches!(s.without(&pts(&[0.5])), Err(UnlearnError::NotInDataset(0))));
        assert_eq!(s.without(&[]).unwrap(), s);
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(Dataset::new(vec![]), Err(UnlearnError::EmptyDataset)));
        let s = Dataset::new(pts(&[1.0])).unwrap();
        assert!(matches!(s.without(&pts(&[1.0])), Err(UnlearnError::EmptyDataset)));
    }
}
