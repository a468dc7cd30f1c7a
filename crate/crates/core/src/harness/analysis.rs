use super::SweepRecord;

/// Least-squares non-decreasing fit (pool adjacent violators, equal weights).
pub fn isotonic_increasing(values: &[f64]) -> Vec<f64> {
    // (mean, count) blocks
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, c2) = blocks[blocks.len() - 1];
            let (m1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let c = c1 + c2;
            blocks.push(((m1 * c1 as f64 + m2 * c2 as f64) / c as f64, c));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, c)| std::iter::repeat_n(m, c))
        .collect()
}

/// Largest decrease `max_{i<j} (vᵢ − vⱼ)`, zero for a non-decreasing sequence.
pub fn largest_drop(values: &[f64]) -> f64 {
    let mut running_max = f64::NEG_INFINITY;
    let mut drop = 0.0_f64;
    for &v in values {
        running_max = running_max.max(v);
        drop = drop.max(running_max - v);
    }
    drop
}

/// Records with dimension `n`, ordered by `m`.
pub fn records_for_n(records: &[SweepRecord], n: usize) -> Vec<SweepRecord> {
    let mut out: Vec<SweepRecord> = records.iter().filter(|r| r.n == n).cloned().collect();
    out.sort_by_key(|r| r.m);
    out
}

/// First `θ` at which the isotonic-smoothed success probability reaches
/// `level`, linearly interpolated between grid points. Records must belong
/// to a single `n` and be ordered by `m`. `None` if the level is never reached.
pub fn first_crossing(records: &[SweepRecord], level: f64) -> Option<f64> {
    let probs: Vec<f64> = records.iter().map(|r| r.prob).collect();
    let smooth = isotonic_increasing(&probs);
    let i = smooth.iter().position(|&p| p >= level)?;
    if i == 0 {
        return Some(records[0].theta);
    }
    let (x0, x1) = (records[i - 1].theta, records[i].theta);
    let (p0, p1) = (smooth[i - 1], smooth[i]);
    Some(x0 + (level - p0) / (p1 - p0) * (x1 - x0))
}
