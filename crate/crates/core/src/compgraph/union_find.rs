/// Disjoint-set forest with path compression and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    largest: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n], largest: usize::from(n > 0) }
    }

    pub fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    /// Returns the root of the merged set.
    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.largest = self.largest.max(self.size[ra]);
        ra
    }

    /// Size of the largest set seen so far.
    pub fn largest(&self) -> usize {
        self.largest
    }

    /// Dense labels in order of first appearance, so label order follows the
    /// minimum element of each set.
    pub fn labels(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut root_label = vec![usize::MAX; n];
        let mut labels = vec![0; n];
        let mut next = 0;
        for v in 0..n {
            let r = self.find(v);
            if root_label[r] == usize::MAX {
                root_label[r] = next;
                next += 1;
            }
            labels[v] = root_label[r];
        }
        (labels, next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_tracks_largest() {
        let mut uf = UnionFind::new(5);
        assert_eq!(uf.largest(), 1);
        uf.union(0, 1);
        uf.union(3, 4);
        uf.union(1, 4);
        assert_eq!(uf.largest(), 4);
        assert_eq!(uf.find(0), uf.find(3));
        assert_ne!(uf.find(2), uf.find(0));
        let (labels, k) = uf.labels();
        assert_eq!(k, 2);
        assert_eq!(labels, vec![0, 0, 1, 0, 0]);
    }
}
