//! Goal-relative evaluation metrics: silhouette IoU, mean goal-distance-field
//! value over the current material (SDF), and total volume misplacement
//! (density).

use crate::error::{DgformError, Result};
use serde::{Deserialize, Serialize};

/// Intersection over union of two equally-shaped boolean grids.
/// Defined as 1 when both masks are empty.
pub fn iou(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(DgformError::Contract(format!(
            "iou shape mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut inter = 0usize;
    let mut union = 0usize;
    for (x, y) in a.iter().zip(b.iter()) {
        inter += (*x && *y) as usize;
        union += (*x || *y) as usize;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Exact Euclidean distance transform (in cells) of a boolean grid: distance
/// to the nearest `true` cell, 0 on the mask itself. Two-pass separable
/// squared-distance transform (Felzenszwalb-Huttenlocher).
pub fn distance_field_cells(mask: &[bool], width: usize, height: usize) -> Vec<f64> {
    assert_eq!(mask.len(), width * height);
    const INF: f64 = 1e18;
    // Pass 1: per row, squared distance along x to the nearest mask cell.
    let mut dist2 = vec![INF; width * height];
    let mut row_in = vec![0.0; width];
    let mut row_out = vec![0.0; width];
    for y in 0..height {
        for x in 0..width {
            row_in[x] = if mask[y * width + x] { 0.0 } else { INF };
        }
        dt_1d(&row_in, &mut row_out);
        dist2[y * width..(y + 1) * width].copy_from_slice(&row_out);
    }
    // Pass 2: per column over the row results.
    let mut col_in = vec![0.0; height];
    let mut col_out = vec![0.0; height];
    for x in 0..width {
        for y in 0..height {
            col_in[y] = dist2[y * width + x];
        }
        dt_1d(&col_in, &mut col_out);
        for y in 0..height {
            dist2[y * width + x] = col_out[y];
        }
    }
    dist2.iter().map(|d| d.sqrt()).collect()
}

/// 1-D squared distance transform by the lower envelope of parabolas.
fn dt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                if k == 0 {
                    break;
                }
                k -= 1;
            } else {
                break;
            }
        }
        if s > z[k] {
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
        }
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        out[q] = d * d + f[p];
    }
}

/// Mean goal-field distance over current dough cells, in meters.
/// Returns `(0.0, true)` when no cell holds dough.
pub fn sdf_from_field(
    heights: &[f64],
    goal_field_cells: &[f64],
    threshold: f64,
    cell_size: f64,
) -> (f64, bool) {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (h, d) in heights.iter().zip(goal_field_cells.iter()) {
        if *h > threshold {
            sum += d * cell_size;
            n += 1;
        }
    }
    if n == 0 {
        return (0.0, true);
    }
    (sum / n as f64, false)
}

/// Mean goal-field distance computed from masks directly.
pub fn sdf_distance(
    heights: &[f64],
    goal_mask: &[bool],
    width: usize,
    height: usize,
    threshold: f64,
    cell_size: f64,
) -> (f64, bool) {
    let field = distance_field_cells(goal_mask, width, height);
    sdf_from_field(heights, &field, threshold, cell_size)
}

/// Total volume misplacement: sum of |height - goal height| times cell area.
pub fn density_metric(heights: &[f64], goal_heights: &[f64], cell_size: f64) -> f64 {
    let cell2 = cell_size * cell_size;
    heights
        .iter()
        .zip(goal_heights.iter())
        .map(|(h, g)| (h - g).abs())
        .sum::<f64>()
        * cell2
}

/// Aggregated evaluation result for one policy/variant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub reward_total: f64,
    pub iou: f64,
    pub sdf: f64,
    pub density: f64,
    /// Per-episode breakdown backing the aggregates.
    pub episodes: Vec<EpisodeMetrics>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub reward: f64,
    pub iou: f64,
    pub sdf: f64,
    pub density: f64,
}

impl MetricReport {
    pub fn from_episodes(episodes: Vec<EpisodeMetrics>) -> MetricReport {
        let n = episodes.len().max(1) as f64;
        MetricReport {
            reward_total: episodes.iter().map(|e| e.reward).sum::<f64>() / n,
            iou: episodes.iter().map(|e| e.iou).sum::<f64>() / n,
            sdf: episodes.iter().map(|e| e.sdf).sum::<f64>() / n,
            density: episodes.iter().map(|e| e.density).sum::<f64>() / n,
        episodes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn iou_identical_masks() {
        let m = vec![true, false, true, true];
        assert_eq!(iou(&m, &m).unwrap(), 1.0);
    }

    #[test]
    fn iou_disjoint_masks() {
        let a = vec![true, false, false, false];
        let b = vec![false, true, false, false];
        assert_eq!(iou(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn iou_nested_half() {
        let a = vec![true, true, true, true];
        let b = vec![true, true, false, false];
        assert_eq!(iou(&a, &b).unwrap(), 0.5);
    }

    #[test]
    fn iou_both_empty_is_one() {
        let a = vec![false; 4];
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn iou_shape_mismatch_errors() {
        assert!(iou(&[true], &[true, false]).is_err());
    }

    /// Brute-force nearest-goal-cell oracle for the exact distance transform.
    fn brute_force_field(mask: &[bool], w: usize, h: usize) -> Vec<f64> {
        let goal: Vec<(f64, f64)> = (0..w * h)
            .filter(|i| mask[*i])
            .map(|i| ((i % w) as f64, (i / w) as f64))
            .collect();
        (0..w * h)
            .map(|i| {
                let (x, y) = ((i % w) as f64, (i / w) as f64);
                goal.iter()
                    .map(|(gx, gy)| ((x - gx).powi(2) + (y - gy).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn distance_field_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let (w, h) = (17, 13);
            let mask: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(0.2)).collect();
            if !mask.iter().any(|m| *m) {
                continue;
            }
            let fast = distance_field_cells(&mask, w, h);
            let slow = brute_force_field(&mask, w, h);
            for (a, b) in fast.iter().zip(slow.iter()) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn sdf_zero_when_current_inside_goal() {
        let (w, h) = (8, 8);
        let goal_mask: Vec<bool> = (0..w * h).map(|i| i % w >= 2).collect();
        let heights: Vec<f64> = (0..w * h).map(|i| if i % w >= 4 { 0.01 } else { 0.0 }).collect();
        let (sdf, empty) = sdf_distance(&heights, &goal_mask, w, h, 1e-4, 0.01);
        assert!(!empty);
        assert_eq!(sdf, 0.0);
    }

    #[test]
    fn sdf_single_cell_distance() {
        let (w, h) = (9, 9);
        // Goal is the single cell (1, 1); dough the single cell (5, 1): 4 cells apart.
        let mut goal_mask = vec![false; w * h];
        goal_mask[w + 1] = true;
        let mut heights = vec![0.0; w * h];
        heights[w + 5] = 0.02;
        let cell = 0.0125;
        let (sdf, _) = sdf_distance(&heights, &goal_mask, w, h, 1e-4, cell);
        assert!((sdf - 4.0 * cell).abs() < 1e-12);
    }

    #[test]
    fn sdf_empty_dough_flagged() {
        let goal_mask = vec![true; 4];
        let heights = vec![0.0; 4];
        let (v, empty) = sdf_distance(&heights, &goal_mask, 2, 2, 1e-4, 0.01);
        assert_eq!(v, 0.0);
        assert!(empty);
    }

    #[test]
    fn density_zero_at_goal() {
        let h = vec![0.1, 0.2, 0.0];
        assert_eq!(density_metric(&h, &h, 0.01), 0.0);
    }

    #[test]
    fn density_uniform_offset() {
        let n = 6;
        let delta = 0.003;
        let h = vec![0.01; n];
        let g = vec![0.01 + delta; n];
        let cell: f64 = 0.02;
        let expect = n as f64 * delta * cell * cell;
        assert!((density_metric(&h, &g, cell) - expect).abs() < 1e-15);
    }

    #[test]
    fn density_matches_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 64;
        let h: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.05)).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.05)).collect();
        let cell: f64 = 0.00625;
        let mut expect = 0.0;
        for i in 0..n {
            expect += (h[i] - g[i]).abs() * cell * cell;
        }
        assert!((density_metric(&h, &g, cell) - expect).abs() < 1e-15);
    }

    #[test]
    fn density_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 32;
        for _ in 0..20 {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.05)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.05)).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.05)).collect();
            let ac = density_metric(&a, &c, 0.01);
            let ab = density_metric(&a, &b, 0.01);
            let bc = density_metric(&b, &c, 0.01);
            assert!(ac <= ab + bc + 1e-12);
        }
    }
}
