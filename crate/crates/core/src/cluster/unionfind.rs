/// Disjoint sets over `0..n` with union by rank and path halving.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` if `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }

    /// Fold in the unions recorded by another structure over the same
    /// elements, e.g. one built by a different worker.
    pub fn absorb(&mut self, other: &UnionFind) {
        assert_eq!(self.len(), other.len(), "union-find sizes differ");
        for x in 0..other.len() {
            let p = other.parent[x];
            if p != x {
                self.union(x, p);
            }
        }
    }

    /// Sets as sorted member lists, ordered by smallest member.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: Vec<Option<usize>> = vec![None; self.len()];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for x in 0..self.len() {
            let r = self.find(x);
            let g = *by_root[r].get_or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(x);
        }
        groups
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic() {
        let mut uf = UnionFind::new(4);
        assert!(uf.union(0, 1));
        assert!(uf.union(1, 2));
        assert!(!uf.union(0, 2));
        assert_eq!(uf.groups(), vec![vec![0, 1, 2], vec![3]]);
        assert!(UnionFind::new(0).groups().is_empty());
    }

    proptest! {
        #[test]
        fn sharded_equals_sequential(
            edges in proptest::collection::vec((0usize..25, 0usize..25), 0..60),
            shards in 1usize..5,
        ) {
            let mut whole = UnionFind::new(25);
            for &(a, b) in &edges {
                whole.union(a, b);
            }
            let mut parts: Vec<UnionFind> = (0..shards).map(|_| UnionFind::new(25)).collect();
            for (k, &(a, b)) in edges.iter().enumerate() {
                parts[k % shards].union(a, b);
            }
            let mut merged = UnionFind::new(25);
            for p in &parts {
                merged.absorb(p);
            }
            prop_assert_eq!(merged.groups(), whole.groups());
        }
    }
}
