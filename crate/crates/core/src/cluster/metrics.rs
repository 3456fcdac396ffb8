use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterMetrics {
    /// Spectra in clusters of size two or more, over all spectra.
    pub clustered_ratio: f64,
    /// Clustered spectra whose label differs from their cluster's majority
    /// label, over clustered spectra.
    pub incorrect_ratio: f64,
}

/// `cluster_of[i]` is any cluster key for item `i`. A majority tie goes to
/// the lexicographically smallest label.
pub fn cluster_metrics<C: Ord, L: AsRef<str>>(cluster_of: &[C], labels: &[L]) -> ClusterMetrics {
    assert_eq!(cluster_of.len(), labels.len(), "one label per item");
    let mut clusters: BTreeMap<&C, BTreeMap<&str, usize>> = BTreeMap::new();
    for (c, l) in cluster_of.iter().zip(labels) {
        *clusters.entry(c).or_default().entry(l.as_ref()).or_default() += 1;
    }
    let (mut clustered, mut incorrect) = (0usize, 0usize);
    for counts in clusters.values() {
        let size: usize = counts.values().sum();
        if size < 2 {
            continue;
        }
        // BTreeMap iterates labels in order, so the first maximum wins ties.
        let majority = counts.values().fold(0, |m, &c| m.max(c));
        clustered += size;
        incorrect += size - majority;
    }
    let total = cluster_of.len();
    ClusterMetrics {
        clustered_ratio: if total == 0 { 0.0 } else { clustered as f64 / total as f64 },
        incorrect_ratio: if clustered == 0 {
            0.0
        } else {
            incorrect as f64 / clustered as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counts() {
        let m = cluster_metrics(&[0, 0, 0, 3], &["A", "A", "B", "C"]);
        assert_eq!(m.clustered_ratio, 0.75);
        assert!((m.incorrect_ratio - 1.0 / 3.0).abs() < 1e-15);

        let singletons = cluster_metrics(&[0, 1, 2], &["A", "A", "B"]);
        assert_eq!((singletons.clustered_ratio, singletons.incorrect_ratio), (0.0, 0.0));

        let perfect = cluster_metrics(&[0, 0, 2, 2], &["A", "A", "B", "B"]);
        assert_eq!((perfect.clustered_ratio, perfect.incorrect_ratio), (1.0, 0.0));

        let tie = cluster_metrics(&[0, 0], &["B", "A"]);
        assert_eq!(tie.incorrect_ratio, 0.5);
    }
}
