//! The heap: locations to values, with a bump allocation cursor.

use std::collections::BTreeMap;
use std::fmt;

use crate::terms::DynTerm;

#[derive(Clone, Debug, PartialEq)]
pub struct Store {
    cells: BTreeMap<u64, DynTerm>,
    next: u64,
}

impl Default for Store {
    fn default() -> Self {
        Store {
            cells: BTreeMap::new(),
            next: 1,
        }
    }
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    /// Allocates `n` consecutive cells holding unit; returns the base.
    pub fn alloc(&mut self, n: u64) -> u64 {
        let base = self.next;
        for i in 0..n {
            self.cells
                .insert(base + i, DynTerm::unit(Default::default()));
        }
        self.next += n.max(1);
        base
    }

    /// Removes cells `l .. l+n`; fails if any is missing.
    pub fn free(&mut self, l: u64, n: u64) -> Result<(), u64> {
        if let Some(bad) = (l..l + n).find(|i| !self.cells.contains_key(i)) {
            return Err(bad);
        }
        for i in l..l + n {
            self.cells.remove(&i);
        }
        Ok(())
    }

    pub fn read(&self, l: u64) -> Option<&DynTerm> {
        self.cells.get(&l)
    }

    pub fn write(&mut self, l: u64, v: DynTerm) -> bool {
        match self.cells.get_mut(&l) {
            Some(c) => {
                *c = v;
                true
            }
            None => false,
        }
    }

    /// Inserts a cell directly, bypassing allocation.
    pub fn insert(&mut self, l: u64, v: DynTerm) {
        assert!(l != 0, "null is never in the store");
        self.cells.insert(l, v);
        self.next = self.next.max(l + 1);
    }

    pub fn contains(&self, l: u64) -> bool {
        self.cells.contains_key(&l)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &DynTerm)> {
        self.cells.iter().map(|(l, v)| (*l, v))
    }

    pub fn domain(&self) -> Vec<u64> {
        self.cells.keys().copied().collect()
    }
}

impl fmt::Display for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (l, v) in &self.cells {
            writeln!(f, "l_{} = {}", l, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alloc_starts_after_null() {
        let mut s = Store::new();
        assert_eq!(s.alloc(3), 1);
        assert_eq!(s.alloc(2), 4);
        assert_eq!(s.domain(), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn free_checks_every_cell() {
        let mut s = Store::new();
        let l = s.alloc(2);
        assert_eq!(s.free(l, 3), Err(3));
        assert_eq!(s.len(), 2);
        assert!(s.free(l, 2).is_ok());
        assert!(s.is_empty());
    }

    #[test]
    fn write_requires_domain() {
        let mut s = Store::new();
        assert!(!s.write(1, DynTerm::unit(Default::default())));
    }
}
