use crate::error::{Error, Result};

/// Symmetric pairwise distances in `[0, 1]`, stored as the strict upper
/// triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            upper: vec![0.0; n * n.saturating_sub(1) / 2],
        }
    }

    /// Builds from `f(i, j)` evaluated for every `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                m.set(i, j, f(i, j))?;
            }
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.upper[self.slot(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, d: f64) -> Result<()> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::param(format!("invalid matrix cell ({i}, {j}) for size {}", self.n)));
        }
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::param(format!("distance {d} outside [0, 1]")));
        }
        let s = self.slot(i, j);
        self.upper[s] = d;
        Ok(())
    }
}

/// One merge: clusters `a < b` joined at complete-linkage distance
/// `distance`. The merged cluster keeps id `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
}

/// Cluster ids are the smallest member index of each cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub cluster_of: Vec<usize>,
    pub merge_log: Vec<Merge>,
}

impl ClusterAssignment {
    /// Members of every cluster, ordered by cluster id.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (i, &c) in self.cluster_of.iter().enumerate() {
            groups.entry(c).or_default().push(i);
        }
        groups.into_values().collect()
    }

    pub fn num_clusters(&self) -> usize {
        self.cluster_of.len() - self.merge_log.len()
    }
}

// Orders candidate pairs: distance first, then the id pair.
fn key(d: f64, x: usize, y: usize) -> (f64, usize, usize) {
    (d, x.min(y), x.max(y))
}

fn less(a: (f64, usize, usize), b: (f64, usize, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && (a.1, a.2) < (b.1, b.2))
}

/// Complete-linkage agglomerative clustering with a distance threshold.
///
/// Repeatedly merges the closest pair of clusters while their distance is
/// at most `threshold`; equal distances go to the smallest id pair.
/// Each cluster caches its nearest neighbour. Under complete linkage a merge
/// only raises distances to the merged cluster, so only clusters whose
/// neighbour took part in the merge need a rescan.
pub fn agglomerate(dm: &DistanceMatrix, threshold: f64) -> Result<ClusterAssignment> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::param(format!("threshold {threshold} outside [0, 1]")));
    }
    let n = dm.len();
    let mut d: Vec<f64> = Vec::with_capacity(n * n);
    for i in 0..n {
        d.extend((0..n).map(|j| dm.get(i, j)));
    }
    let mut active = vec![true; n];
    let mut cluster_of: Vec<usize> = (0..n).collect();
    let mut merge_log = Vec::new();

    let nearest = |x: usize, d: &[f64], active: &[bool]| -> Option<(f64, usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for y in (0..n).filter(|&y| y != x && active[y]) {
            let k = key(d[x * n + y], x, y);
            if best.is_none_or(|b| less(k, b)) {
                best = Some(k);
            }
        }
        best
    };
    let mut nn: Vec<Option<(f64, usize, usize)>> = (0..n).map(|x| nearest(x, &d, &active)).collect();

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for x in (0..n).filter(|&x| active[x]) {
            if let Some(k) = nn[x] {
                if best.is_none_or(|b| less(k, b)) {
                    best = Some(k);
                }
            }
        }
        let Some((dist, a, b)) = best else { break };
        if dist > threshold {
            break;
        }
        merge_log.push(Merge { a, b, distance: dist });
        active[b] = false;
        for y in 0..n {
            let m = d[a * n + y].max(d[b * n + y]);
            d[a * n + y] = m;
            d[y * n + a] = m;
        }
        d[a * n + a] = 0.0;
        for c in cluster_of.iter_mut().filter(|c| **c == b) {
            *c = a;
        }
        nn[b] = None;
        for x in (0..n).filter(|&x| active[x]) {
            let stale = match nn[x] {
                Some((_, p, q)) => x == a || p == a || p == b || q == a || q == b,
                None => false,
            };
            if stale {
                nn[x] = nearest(x, &d, &active);
            }
        }
    }
    Ok(ClusterAssignment { cluster_of, merge_log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn brute_force(dm: &DistanceMatrix, threshold: f64) -> ClusterAssignment {
        let n = dm.len();
        let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let mut log = Vec::new();
        loop {
            let mut best: Option<(f64, usize, usize, usize, usize)> = None;
            for x in 0..clusters.len() {
                for y in x + 1..clusters.len() {
                    let link = clusters[x]
                        .iter()
                        .flat_map(|&p| clusters[y].iter().map(move |&q| (p, q)))
                        .map(|(p, q)| dm.get(p, q))
                        .fold(0.0, f64::max);
                    let (ia, ib) = (clusters[x][0].min(clusters[y][0]), clusters[x][0].max(clusters[y][0]));
                    let better = match best {
                        None => true,
                        Some((bd, ba, bb, _, _)) => link < bd || (link == bd && (ia, ib) < (ba, bb)),
                    };
                    if better {
                        best = Some((link, ia, ib, x, y));
                    }
                }
            }
            match best {
                Some((link, a, b, x, y)) if link <= threshold => {
                    log.push(Merge { a, b, distance: link });
                    let moved = clusters.remove(y);
                    clusters[x].extend(moved);
                    clusters[x].sort_unstable();
                }
                _ => break,
            }
        }
        let mut cluster_of = vec![0; n];
        for c in &clusters {
            for &i in c {
                cluster_of[i] = c[0];
            }
        }
        ClusterAssignment { cluster_of, merge_log: log }
    }

    #[test]
    fn degenerate_thresholds() {
        let mut r = rng::seeded(1);
        let dm = DistanceMatrix::from_fn(8, |_, _| r.random_range(0.01..1.0)).unwrap();
        let none = agglomerate(&dm, 0.0).unwrap();
        assert_eq!(none.num_clusters(), 8);
        let all = agglomerate(&dm, 1.0).unwrap();
        assert_eq!(all.num_clusters(), 1);
        assert!(all.cluster_of.iter().all(|&c| c == 0));
    }

    #[test]
    fn six_points_by_hand() {
        // Two tight groups {0,1,2} and {3,4}, and a loner 5.
        let rows = [
            [0.0, 0.1, 0.2, 0.8, 0.9, 0.7],
            [0.1, 0.0, 0.15, 0.85, 0.8, 0.75],
            [0.2, 0.15, 0.0, 0.9, 0.95, 0.6],
            [0.8, 0.85, 0.9, 0.0, 0.05, 0.5],
            [0.9, 0.8, 0.95, 0.05, 0.0, 0.55],
            [0.7, 0.75, 0.6, 0.5, 0.55, 0.0],
        ];
        let dm = DistanceMatrix::from_fn(6, |i, j| rows[i][j]).unwrap();
        let got = agglomerate(&dm, 0.6).unwrap();
        let want = [
            Merge { a: 3, b: 4, distance: 0.05 },
            Merge { a: 0, b: 1, distance: 0.1 },
            Merge { a: 0, b: 2, distance: 0.2 },
            Merge { a: 3, b: 5, distance: 0.55 },
        ];
        assert_eq!(got.merge_log, want);
        assert_eq!(got.cluster_of, vec![0, 0, 0, 3, 3, 3]);
        assert_eq!(got, brute_force(&dm, 0.6));
    }

    #[test]
    fn ties_go_to_smallest_pair() {
        let dm = DistanceMatrix::from_fn(4, |_, _| 0.5).unwrap();
        let got = agglomerate(&dm, 0.5).unwrap();
        let pairs: Vec<_> = got.merge_log.iter().map(|m| (m.a, m.b)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn matches_brute_force() {
        let mut r = rng::seeded(5);
        for trial in 0..300 {
            let n = r.random_range(2..=40);
            // Coarse values force plenty of ties.
            let coarse = trial % 2 == 0;
            let dm = DistanceMatrix::from_fn(n, |_, _| {
                if coarse {
                    r.random_range(0..=10) as f64 / 10.0
                } else {
                    r.random::<f64>()
                }
            })
            .unwrap();
            let t = r.random::<f64>();
            assert_eq!(agglomerate(&dm, t).unwrap(), brute_force(&dm, t), "trial {trial}");
        }
    }

    #[test]
    fn threshold_monotonicity() {
        let mut r = rng::seeded(9);
        let dm = DistanceMatrix::from_fn(30, |_, _| r.random::<f64>()).unwrap();
        let mut prev: Option<(usize, usize)> = None;
        for step in 0..=20 {
            let a = agglomerate(&dm, step as f64 / 20.0).unwrap();
            let largest = a.clusters().iter().map(Vec::len).max().unwrap();
            if let Some((count, size)) = prev {
                assert!(a.num_clusters() <= count);
                assert!(largest >= size);
            }
            prev = Some((a.num_clusters(), largest));
        }
    }

    #[test]
    fn matrix_storage() {
        let mut m = DistanceMatrix::zeros(4);
        m.set(2, 1, 0.25).unwrap();
        assert_eq!(m.get(1, 2), 0.25);
        assert_eq!(m.get(3, 3), 0.0);
        assert!(m.set(1, 1, 0.1).is_err());
        assert!(m.set(0, 1, 1.5).is_err());
    }
}
