//! Max-norm kd-tree over a row-major point cloud.

const LEAF: usize = 16;
const NONE: usize = usize::MAX;

struct Node {
    start: usize,
    end: usize,
    left: usize,
    right: usize,
}

pub(crate) struct KdTree<'a> {
    pts: &'a [f64],
    dim: usize,
    order: Vec<usize>,
    nodes: Vec<Node>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl<'a> KdTree<'a> {
    pub fn new(pts: &'a [f64], dim: usize) -> Self {
        assert!(dim > 0 && pts.len().is_multiple_of(dim));
        let n = pts.len() / dim;
        let mut tree = Self { pts, dim, order: (0..n).collect(), nodes: Vec::new(), lo: Vec::new(), hi: Vec::new() };
        if n > 0 {
            tree.build(0, n);
        }
        tree
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.pts[i * self.dim..(i + 1) * self.dim]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let d = self.dim;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in &self.order[start..end] {
            for (a, &v) in self.pts[i * d..(i + 1) * d].iter().enumerate() {
                lo[a] = lo[a].min(v);
                hi[a] = hi[a].max(v);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node { start, end, left: NONE, right: NONE });
        self.lo.extend_from_slice(&lo);
        self.hi.extend_from_slice(&hi);
        if end - start <= LEAF {
            return id;
        }
        let axis = (0..d)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        if hi[axis] - lo[axis] <= 0.0 {
            return id;
        }
        let mid = start + (end - start) / 2;
        let pts = self.pts;
        self.order[start..end]
            .select_nth_unstable_by(mid - start, |&a, &b| pts[a * d + axis].total_cmp(&pts[b * d + axis]));
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id].left = left;
        self.nodes[id].right = right;
        id
    }

    fn box_dist(&self, node: usize, q: &[f64]) -> f64 {
        let d = self.dim;
        let (lo, hi) = (&self.lo[node * d..(node + 1) * d], &self.hi[node * d..(node + 1) * d]);
        q.iter()
            .zip(lo.iter().zip(hi))
            .fold(0.0_f64, |m, (&v, (&l, &h))| m.max(l - v).max(v - h))
    }

    fn box_far(&self, node: usize, q: &[f64]) -> f64 {
        let d = self.dim;
        let (lo, hi) = (&self.lo[node * d..(node + 1) * d], &self.hi[node * d..(node + 1) * d]);
        q.iter()
            .zip(lo.iter().zip(hi))
            .fold(0.0_f64, |m, (&v, (&l, &h))| m.max((v - l).abs()).max((h - v).abs()))
    }

    /// Distance from point `i` to its `k`-th nearest other point.
    pub fn kth_distance(&self, i: usize, k: usize) -> f64 {
        let q = self.point(i);
        let mut best = vec![f64::INFINITY; k];
        self.knn(0, i, q, &mut best);
        best[k - 1]
    }

    fn knn(&self, node: usize, skip: usize, q: &[f64], best: &mut [f64]) {
        let k = best.len();
        if self.box_dist(node, q) >= best[k - 1] {
            return;
        }
        let nd = &self.nodes[node];
        if nd.left == NONE {
            for &j in &self.order[nd.start..nd.end] {
                if j == skip {
                    continue;
                }
                let dist = chebyshev(q, self.point(j));
                if dist < best[k - 1] {
                    let mut pos = k - 1;
                    while pos > 0 && best[pos - 1] > dist {
                        best[pos] = best[pos - 1];
                        pos -= 1;
                    }
                    best[pos] = dist;
                }
            }
            return;
        }
        let (a, b) = (nd.left, nd.right);
        if self.box_dist(a, q) <= self.box_dist(b, q) {
            self.knn(a, skip, q, best);
            self.knn(b, skip, q, best);
        } else {
            self.knn(b, skip, q, best);
            self.knn(a, skip, q, best);
        }
    }

    /// Number of points other than `i` strictly closer than `r` to point `i`.
    pub fn count_within(&self, i: usize, r: f64) -> usize {
        if r <= 0.0 {
            return 0;
        }
        self.count(0, self.point(i), r) - 1
    }

    fn count(&self, node: usize, q: &[f64], r: f64) -> usize {
        if self.box_dist(node, q) >= r {
            return 0;
        }
        let nd = &self.nodes[node];
        if self.box_far(node, q) < r {
            return nd.end - nd.start;
        }
        if nd.left == NONE {
            return self.order[nd.start..nd.end]
                .iter()
                .filter(|&&j| chebyshev(q, self.point(j)) < r)
                .count();
        }
        self.count(nd.left, q, r) + self.count(nd.right, q, r)
    }
}

pub(crate) fn chebyshev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
