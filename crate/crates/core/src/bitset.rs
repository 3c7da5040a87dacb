use std::fmt;

/// Fixed-width set of element indices `0..128` (customers or jobs).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ElemSet(pub u128);

impl ElemSet {
    pub const CAPACITY: usize = 128;

    pub const fn empty() -> Self {
        ElemSet(0)
    }

    pub fn singleton(i: usize) -> Self {
        let mut s = ElemSet(0);
        s.insert(i);
        s
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < Self::CAPACITY, "element {i} exceeds set capacity");
        self.0 |= 1u128 << i;
    }

    pub fn remove(&mut self, i: usize) {
        if i < Self::CAPACITY {
            self.0 &= !(1u128 << i);
        }
    }

    pub fn contains(self, i: usize) -> bool {
        i < Self::CAPACITY && self.0 >> i & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, o: Self) -> Self {
        ElemSet(self.0 | o.0)
    }

    pub fn intersection(self, o: Self) -> Self {
        ElemSet(self.0 & o.0)
    }

    pub fn is_subset(self, o: Self) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_disjoint(self, o: Self) -> bool {
        self.0 & o.0 == 0
    }

    pub fn lowest(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }
}

impl FromIterator<usize> for ElemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = ElemSet::empty();
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_ops() {
        let a: ElemSet = [1, 3, 127].into_iter().collect();
        let b = ElemSet::singleton(3);
        assert_eq!(a.len(), 3);
        assert!(b.is_subset(a));
        assert!(!a.is_subset(b));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![1, 3, 127]);
        assert_eq!(a.lowest(), Some(1));
        assert!(a.intersection(ElemSet::singleton(2)).is_empty());
    }
}
