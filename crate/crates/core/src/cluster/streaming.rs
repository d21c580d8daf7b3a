use super::ClusterError;

/// Single-pass k-center clustering with radius doubling.
///
/// Each item joins the most similar center when `1 - sim <= radius`, or
/// opens a new cluster. Once there are more than `max_clusters` clusters the
/// radius doubles (starting from the closest center distance when it is 0)
/// and centers within the radius of an earlier center are folded into it,
/// repeating until the bound holds again.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamingState {
    max_clusters: usize,
    radius: f64,
    clusters: Vec<StreamCluster>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamCluster {
    /// Index of the item acting as center.
    pub center: usize,
    /// Member indices in arrival order; the center comes first.
    pub members: Vec<usize>,
}

impl StreamingState {
    pub fn new(max_clusters: usize, radius_limit: f64) -> Result<Self, ClusterError> {
        if max_clusters < 1 {
            return Err(ClusterError::Config("streaming needs at least one cluster (K >= 1)".into()));
        }
        if !(0.0..=1.0).contains(&radius_limit) {
            return Err(ClusterError::Config(format!("radius limit {radius_limit} outside [0, 1]")));
        }
        Ok(Self { max_clusters, radius: radius_limit, clusters: Vec::new() })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn clusters(&self) -> &[StreamCluster] {
        &self.clusters
    }

    pub fn into_clusters(self) -> Vec<StreamCluster> {
        self.clusters
    }

    /// Update step for item `idx`, then merge if the bound is exceeded.
    pub fn push<F: Fn(usize, usize) -> f64>(&mut self, idx: usize, sim: F) {
        let nearest = self
            .clusters
            .iter()
            .enumerate()
            .map(|(k, c)| (k, 1.0 - sim(c.center, idx)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match nearest {
            Some((k, d)) if d <= self.radius => self.clusters[k].members.push(idx),
            _ => self.clusters.push(StreamCluster { center: idx, members: vec![idx] }),
        }
        while self.clusters.len() > self.max_clusters {
            self.merge(&sim);
        }
    }

    fn merge<F: Fn(usize, usize) -> f64>(&mut self, sim: &F) {
        let dist = |a: &StreamCluster, b: &StreamCluster| 1.0 - sim(a.center, b.center);
        self.radius = if self.radius > 0.0 {
            2.0 * self.radius
        } else {
            let mut closest = f64::INFINITY;
            for (i, a) in self.clusters.iter().enumerate() {
                for b in &self.clusters[i + 1..] {
                    closest = closest.min(dist(a, b));
                }
            }
            closest
        };
        // Everything is within distance 1, so the loop in `push` ends.
        if !(self.radius > 0.0) || self.radius.is_infinite() {
            self.radius = 1.0;
        }
        let mut survivors: Vec<StreamCluster> = Vec::with_capacity(self.clusters.len());
        'next: for c in std::mem::take(&mut self.clusters) {
            for s in survivors.iter_mut() {
                if dist(s, &c) <= self.radius {
                    s.members.extend(c.members);
                    continue 'next;
                }
            }
            survivors.push(c);
        }
        self.clusters = survivors;
    }
}

/// Run the stream `0..n` through a fresh state.
pub fn streaming_cluster<F: Fn(usize, usize) -> f64>(
    n: usize,
    sim: F,
    max_clusters: usize,
    radius_limit: f64,
) -> Result<Vec<StreamCluster>, ClusterError> {
    let mut state = StreamingState::new(max_clusters, radius_limit)?;
    for idx in 0..n {
        state.push(idx, &sim);
    }
    Ok(state.into_clusters())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line_sim(points: &[f64]) -> impl Fn(usize, usize) -> f64 + '_ {
        move |a, b| 1.0 - (points[a] - points[b]).abs()
    }

    fn max_radius(points: &[f64], clusters: &[StreamCluster]) -> f64 {
        clusters
            .iter()
            .flat_map(|c| c.members.iter().map(move |&m| (points[m] - points[c.center]).abs()))
            .fold(0.0, f64::max)
    }

    /// Best 3-center radius with centers chosen among the points.
    fn optimal_three_center(points: &[f64]) -> f64 {
        let n = points.len();
        let mut best = f64::INFINITY;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let r = points
                        .iter()
                        .map(|p| [a, b, c].iter().map(|&k| (p - points[k]).abs()).fold(f64::INFINITY, f64::min))
                        .fold(0.0, f64::max);
                    best = best.min(r);
                }
            }
        }
        best
    }

    #[test]
    fn rejects_zero_k() {
        assert!(matches!(StreamingState::new(0, 0.1), Err(ClusterError::Config(_))));
        assert!(StreamingState::new(1, 1.5).is_err());
    }

    #[test]
    fn nothing_coalesces_with_large_k() {
        let pts = [0.1, 0.2, 0.1, 0.5, 0.2];
        let clusters = streaming_cluster(pts.len(), line_sim(&pts), 10, 0.0).unwrap();
        let members: Vec<_> = clusters.iter().map(|c| c.members.clone()).collect();
        assert_eq!(members, vec![vec![0, 2], vec![1, 4], vec![3]]);
    }

    #[test]
    fn identical_items_single_cluster() {
        let pts = [0.4; 6];
        for k in 1..4 {
            assert_eq!(streaming_cluster(6, line_sim(&pts), k, 0.0).unwrap().len(), 1);
        }
    }

    #[test]
    fn hand_traced_merge() {
        // 0.0, 0.1 and 0.5 open three clusters; with K = 2 the radius starts
        // at the closest center distance 0.1 and folds 0.1 into 0.0.
        let pts = [0.0, 0.1, 0.5];
        let mut state = StreamingState::new(2, 0.0).unwrap();
        for i in 0..3 {
            state.push(i, line_sim(&pts));
        }
        assert!((state.radius() - 0.1).abs() < 1e-12);
        let members: Vec<_> = state.clusters().iter().map(|c| c.members.clone()).collect();
        assert_eq!(members, vec![vec![0, 1], vec![2]]);
    }

    proptest! {
        #[test]
        fn within_eight_times_optimal(points in proptest::collection::vec(0.0f64..1.0, 20)) {
            let clusters = streaming_cluster(points.len(), line_sim(&points), 3, 0.0).unwrap();
            prop_assert!(clusters.len() <= 3);
            let mut all: Vec<usize> = clusters.iter().flat_map(|c| c.members.clone()).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..20).collect::<Vec<_>>());
            let opt = optimal_three_center(&points);
            prop_assert!(max_radius(&points, &clusters) <= 8.0 * opt + 1e-12);
        }

        #[test]
        fn count_bound_after_every_push(points in proptest::collection::vec(0.0f64..1.0, 1..40), k in 1usize..6, r in 0.0f64..0.3) {
            let mut state = StreamingState::new(k, r).unwrap();
            for i in 0..points.len() {
                state.push(i, line_sim(&points));
                prop_assert!(state.clusters().len() <= k);
            }
        }
    }
}
