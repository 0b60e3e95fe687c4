use rayon::prelude::*;

use crate::error::MatchError;
use crate::raster::{is_valid_disparity, CostMap, DisparityMap};

const RADIUS: usize = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MedianStats {
    /// Pixels at or below alpha.
    pub candidates: u64,
    /// Candidates whose disparity actually changed.
    pub changed: u64,
}

/// Replaces each low-cost disparity by the lower median of the confident
/// (`cost > alpha`) disparities in its 5x5 window. Pixels with no confident
/// neighbor keep their value. Reads `d` and writes a fresh map.
pub fn selective_median(
    d: &DisparityMap,
    c: &CostMap,
    alpha: f64,
) -> Result<(DisparityMap, MedianStats), MatchError> {
    if d.dims() != c.dims() {
        return Err(MatchError::DimensionMismatch {
            expected: d.dims(),
            got: c.dims(),
        });
    }
    let (w, h) = d.dims();
    let rows: Vec<(Vec<f32>, MedianStats)> = (0..h)
        .into_par_iter()
        .map(|i| {
            let mut out = d.as_slice()[i * w..(i + 1) * w].to_vec();
            let mut stats = MedianStats::default();
            let mut pool = Vec::with_capacity((2 * RADIUS + 1) * (2 * RADIUS + 1));
            for (j, slot) in out.iter_mut().enumerate() {
                if c.get(i, j) > alpha {
                    continue;
                }
                stats.candidates += 1;
                pool.clear();
                for m in i.saturating_sub(RADIUS)..=(i + RADIUS).min(h - 1) {
                    for n in j.saturating_sub(RADIUS)..=(j + RADIUS).min(w - 1) {
                        let v = d.get(m, n);
                        if c.get(m, n) > alpha && is_valid_disparity(v) {
                            pool.push(v);
                        }
                    }
                }
                if pool.is_empty() {
                    continue;
                }
                pool.sort_unstable_by(f32::total_cmp);
                let median = pool[(pool.len() - 1) / 2];
                if median.to_bits() != slot.to_bits() {
                    stats.changed += 1;
                }
                *slot = median;
            }
            (out, stats)
        })
        .collect();

    let mut values = Vec::with_capacity(w * h);
    let mut stats = MedianStats::default();
    for (row, s) in rows {
        values.extend_from_slice(&row);
        stats.candidates += s.candidates;
        stats.changed += s.changed;
    }
    Ok((DisparityMap::new(w, h, values)?, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_confident_is_identity() {
        let d = DisparityMap::new(3, 3, (0..9).map(|v| v as f32).collect()).unwrap();
        let c = CostMap::filled(3, 3, 0.95).unwrap();
        let (out, stats) = selective_median(&d, &c, 0.9).unwrap();
        assert_eq!(out, d);
        assert_eq!(stats.candidates, 0);
    }

    #[test]
    fn unanimous_neighbors() {
        let mut d = DisparityMap::filled(5, 5, 7.0).unwrap();
        d.set(2, 2, 1.0);
        let mut cv = vec![0.99; 25];
        cv[12] = 0.2;
        let c = CostMap::new(5, 5, cv).unwrap();
        let (out, stats) = selective_median(&d, &c, 0.9).unwrap();
        assert_eq!(out.get(2, 2), 7.0);
        assert_eq!(stats, MedianStats { candidates: 1, changed: 1 });
    }

    #[test]
    fn even_count_takes_lower_middle() {
        // two confident neighbors with 2 and 9
        let d = DisparityMap::new(3, 1, vec![2.0, 0.0, 9.0]).unwrap();
        let c = CostMap::new(3, 1, vec![0.95, 0.1, 0.95]).unwrap();
        let (out, _) = selective_median(&d, &c, 0.9).unwrap();
        assert_eq!(out.get(0, 1), 2.0);
    }

    #[test]
    fn no_confident_neighbor_keeps_value() {
        let d = DisparityMap::new(2, 1, vec![4.0, 5.0]).unwrap();
        let c = CostMap::filled(2, 1, 0.5).unwrap();
        let (out, stats) = selective_median(&d, &c, 0.9).unwrap();
        assert_eq!(out, d);
        assert_eq!(stats.changed, 0);
    }

    #[test]
    fn threshold_is_strict() {
        // a neighbor exactly at alpha is not confident
        let d = DisparityMap::new(2, 1, vec![4.0, 5.0]).unwrap();
        let c = CostMap::new(2, 1, vec![0.9, 0.3]).unwrap();
        let (out, _) = selective_median(&d, &c, 0.9).unwrap();
        assert_eq!(out, d);
    }
}
