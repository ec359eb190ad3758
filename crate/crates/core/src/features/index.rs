use std::collections::HashMap;

use super::FeatureVector;

/// Sparse vector over a [`FeatureIndex`], sorted by index.
pub type SparseVector = Vec<(u32, f64)>;

/// Maps feature names to dense positions. Unfrozen indices grow on insert; frozen ones
/// silently drop unknown names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureIndex {
    names: Vec<String>,
    lookup: HashMap<String, u32>,
    frozen: bool,
}

impl FeatureIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// A frozen index over `names`, in the given order. Duplicates are ignored.
    pub fn from_names<I: IntoIterator<Item = String>>(names: I) -> Self {
        let mut idx = FeatureIndex::new();
        for n in names {
            idx.insert(&n);
        }
        idx.freeze();
        idx
    }

    pub fn insert(&mut self, name: &str) -> Option<u32> {
        if let Some(&i) = self.lookup.get(name) {
            return Some(i);
        }
        if self.frozen {
            return None;
        }
        let i = self.names.len() as u32;
        self.names.push(name.to_string());
        self.lookup.insert(name.to_string(), i);
        Some(i)
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.lookup.get(name).copied()
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Converts named values to index positions, adding names unless frozen.
    pub fn vectorize(&mut self, v: &FeatureVector) -> SparseVector {
        let mut out: SparseVector = v
            .iter()
            .filter_map(|(k, x)| self.insert(k).map(|i| (i, x)))
            .collect();
        out.sort_by_key(|&(i, _)| i);
        out
    }

    /// Like [`vectorize`](Self::vectorize) but never grows the index.
    pub fn lookup_vector(&self, v: &FeatureVector) -> SparseVector {
        let mut out: SparseVector = v
            .iter()
            .filter_map(|(k, x)| self.get(k).map(|i| (i, x)))
            .collect();
        out.sort_by_key(|&(i, _)| i);
        out
    }

    /// Sorts names lexicographically and freezes. Returns `old -> new` positions so
    /// vectors built against the unsorted index can be remapped.
    pub fn sort_and_freeze(&mut self) -> Vec<u32> {
        let mut order: Vec<u32> = (0..self.names.len() as u32).collect();
        order.sort_by(|&a, &b| self.names[a as usize].cmp(&self.names[b as usize]));
        let mut remap = vec![0u32; order.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old as usize] = new as u32;
        }
        let names: Vec<String> = order
            .iter()
            .map(|&o| self.names[o as usize].clone())
            .collect();
        *self = FeatureIndex::from_names(names);
        remap
    }
}

/// Every name observed in `vectors`, sorted, frozen.
pub fn build_index<'a>(vectors: impl IntoIterator<Item = &'a FeatureVector>) -> FeatureIndex {
    let mut names: Vec<String> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for v in vectors {
        for n in v.names() {
            if seen.insert(n) {
                names.push(n.to_string());
            }
        }
    }
    names.sort();
    FeatureIndex::from_names(names)
}

/// Applies a remap produced by [`FeatureIndex::sort_and_freeze`].
pub fn remap_vector(v: &mut SparseVector, remap: &[u32]) {
    for (i, _) in v.iter_mut() {
        *i = remap[*i as usize];
    }
    v.sort_by_key(|&(i, _)| i);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(pairs: &[(&str, f64)]) -> FeatureVector {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn frozen_drops_unseen() {
        let mut idx = FeatureIndex::from_names(["a".to_string(), "b".to_string()]);
        let v = idx.vectorize(&fv(&[("b", 2.0), ("zzz", 1.0)]));
        assert_eq!(v, vec![(1, 2.0)]);
        assert_eq!(idx.len(), 2);
    }

    #[test]
    fn sort_remap() {
        let mut idx = FeatureIndex::new();
        let mut v = idx.vectorize(&fv(&[("z", 1.0)]));
        let mut w = idx.vectorize(&fv(&[("a", 2.0), ("z", 3.0)]));
        assert_eq!(idx.names(), ["z", "a"]);
        let remap = idx.sort_and_freeze();
        remap_vector(&mut v, &remap);
        remap_vector(&mut w, &remap);
        assert_eq!(idx.names(), ["a", "z"]);
        assert!(idx.is_frozen());
        assert_eq!(v, vec![(1, 1.0)]);
        assert_eq!(w, vec![(0, 2.0), (1, 3.0)]);
    }

    #[test]
    fn empty_index() {
        assert!(build_index(std::iter::empty()).is_empty());
    }
}
