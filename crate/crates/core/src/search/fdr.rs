/// Result of target-decoy filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct FdrOutcome {
    /// Lowest accepted score; `None` when nothing passes.
    pub threshold: Option<f64>,
    /// Per input: a target scoring at least the threshold.
    pub accepted: Vec<bool>,
}

impl FdrOutcome {
    pub fn accepted_count(&self) -> usize {
        self.accepted.iter().filter(|&&a| a).count()
    }
}

/// Target-decoy filtering at level `q`.
///
/// For a cutoff `t`, the estimated FDR is `#decoys >= t / max(1, #targets >= t)`.
/// The threshold is the lowest `t` whose estimate is at most `q`, i.e. the
/// longest accepting prefix of the score-sorted list. Equal scores are
/// admitted or rejected together.
pub fn fdr_filter(scores: &[f64], is_decoy: &[bool], q: f64) -> FdrOutcome {
    assert_eq!(scores.len(), is_decoy.len(), "one decoy flag per score");
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (mut targets, mut decoys) = (0usize, 0usize);
    let mut threshold = None;
    let mut k = 0;
    while k < order.len() {
        let t = scores[order[k]];
        while k < order.len() && scores[order[k]] == t {
            if is_decoy[order[k]] {
                decoys += 1;
            } else {
                targets += 1;
            }
            k += 1;
        }
        if decoys as f64 / targets.max(1) as f64 <= q {
            threshold = Some(t);
        }
    }
    let accepted = scores
        .iter()
        .zip(is_decoy)
        .map(|(&s, &d)| !d && threshold.is_some_and(|t| s >= t))
        .collect();
    FdrOutcome { threshold, accepted }
}
