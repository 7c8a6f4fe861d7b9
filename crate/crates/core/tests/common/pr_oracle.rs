//! PR points by direct counting at every threshold, and average precision as
//! the mean over positives of the precision at that positive's score.

pub fn points(scores: &[f64], labels: &[bool]) -> Vec<(f64, f64, f64)> {
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut out = vec![(f64::INFINITY, 0.0, 1.0)];
    for t in thresholds {
        let (mut tp, mut pp) = (0.0, 0.0);
        for (s, l) in scores.iter().zip(labels) {
            if *s >= t {
                pp += 1.0;
                if *l {
                    tp += 1.0;
                }
            }
        }
        out.push((t, tp / pos, tp / pp));
    }
    out
}

pub fn average_precision(scores: &[f64], labels: &[bool]) -> f64 {
    let pos: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, l)| **l)
        .map(|(s, _)| *s)
        .collect();
    pos.iter()
        .map(|&t| {
            let pp = scores.iter().filter(|&&s| s >= t).count() as f64;
            let tp = pos.iter().filter(|&&s| s >= t).count() as f64;
            tp / pp
        })
        .sum::<f64>()
        / pos.len() as f64
}
