//! Graph abstraction of an RGB-D observation: color-threshold segmentation,
//! contour centroid, eight ray-boundary focal points at 45-degree spacing,
//! and assembly into the 9-node object subgraph / heterogeneous graph.

use crate::env::RgbdObs;
use crate::error::{DgformError, Result};
use crate::graph::{HeteroGraph, ObjectNode, ObjectSubgraph, MANIP_ATTR_DIM, MANIP_NODES};
use serde::{Deserialize, Serialize};

/// Inclusive RGB bounds for dough segmentation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColorBounds {
    pub lo: [u8; 3],
    pub hi: [u8; 3],
}

impl Default for ColorBounds {
    fn default() -> Self {
        // Band around the rendered dough color.
        ColorBounds { lo: [200, 180, 130], hi: [255, 235, 195] }
    }
}

/// Boolean segmentation mask at image resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct SegMask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl SegMask {
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn area(&self) -> usize {
        self.data.iter().filter(|v| **v).count()
    }
}

/// Pixel-to-board transform for a square board imaged top-down.
#[derive(Debug, Clone, Copy)]
pub struct BoardMap {
    pub board_size: f64,
    pub width: usize,
    pub height: usize,
}

impl BoardMap {
    pub fn pixel_to_board(&self, px: f64, py: f64) -> [f64; 2] {
        [
            (px + 0.5) * self.board_size / self.width as f64,
            (py + 0.5) * self.board_size / self.height as f64,
        ]
    }

    pub fn board_to_pixel(&self, x: f64, y: f64) -> [f64; 2] {
        [
            (x / self.board_size * self.width as f64 - 0.5)
                .clamp(0.0, self.width as f64 - 1.0),
            (y / self.board_size * self.height as f64 - 0.5)
                .clamp(0.0, self.height as f64 - 1.0),
        ]
    }
}

/// Threshold the image and keep the largest 4-connected component.
pub fn segment(obs: &RgbdObs, bounds: &ColorBounds) -> Result<SegMask> {
    let (w, h) = (obs.width, obs.height);
    let mut raw = vec![false; w * h];
    for pi in 0..w * h {
        let px = &obs.rgb[pi * 3..pi * 3 + 3];
        raw[pi] = (0..3).all(|c| px[c] >= bounds.lo[c] && px[c] <= bounds.hi[c]);
    }
    if !raw.iter().any(|v| *v) {
        return Err(DgformError::EmptySegmentation);
    }
    // Label 4-connected components, keep the largest.
    let mut label = vec![0u32; w * h];
    let mut best: (u32, usize) = (0, 0);
    let mut next = 1u32;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !raw[start] || label[start] != 0 {
            continue;
        }
        let id = next;
        next += 1;
        let mut size = 0usize;
        stack.push(start);
        label[start] = id;
        while let Some(pi) = stack.pop() {
            size += 1;
            let (x, y) = (pi % w, pi / w);
            let mut visit = |nx: usize, ny: usize| {
                let ni = ny * w + nx;
                if raw[ni] && label[ni] == 0 {
                    label[ni] = id;
                    stack.push(ni);
                }
            };
            if x > 0 {
                visit(x - 1, y);
            }
            if x + 1 < w {
                visit(x + 1, y);
            }
            if y > 0 {
                visit(x, y - 1);
            }
            if y + 1 < h {
                visit(x, y + 1);
            }
        }
        if size > best.1 {
            best = (id, size);
        }
    }
    let data = label.iter().map(|l| *l == best.0).collect();
    Ok(SegMask { width: w, height: h, data })
}

/// Centroid of the mask pixels, in pixel coordinates.
pub fn contour_center(mask: &SegMask) -> Result<(f64, f64)> {
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut n = 0usize;
    for y in 0..mask.height {
        for x in 0..mask.width {
            if mask.get(x, y) {
                sx += x as f64;
                sy += y as f64;
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(DgformError::Contract("contour_center of an empty mask".into()));
    }
    Ok((sx / n as f64, sy / n as f64))
}

/// One ray-boundary focal point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPoint {
    pub x: f64,
    pub y: f64,
    /// The ray left the image while still inside the mask; the point was
    /// clipped to the border.
    pub clipped: bool,
}

const RAY_STEP: f64 = 0.25;

/// For each of the 8 rays at k*45 degrees from the center, the farthest mask
/// pixel along the ray. Angular order is preserved (k = 0..7, angle k*45deg
/// measured from the +x axis).
pub fn ray_boundary_points(mask: &SegMask, center: (f64, f64)) -> Result<[RayPoint; 8]> {
    let (cx, cy) = center;
    let on = |x: f64, y: f64| -> Option<bool> {
        let (xi, yi) = (x.round(), y.round());
        if xi < 0.0 || yi < 0.0 || xi >= mask.width as f64 || yi >= mask.height as f64 {
            return None;
        }
        Some(mask.get(xi as usize, yi as usize))
    };
    if on(cx, cy) != Some(true) {
        return Err(DgformError::Contract("ray center lies outside the mask".into()));
    }
    let t_max = ((mask.width * mask.width + mask.height * mask.height) as f64).sqrt();
    let mut points = [RayPoint { x: cx, y: cy, clipped: false }; 8];
    for (k, point) in points.iter_mut().enumerate() {
        let angle = k as f64 * std::f64::consts::FRAC_PI_4;
        let (dx, dy) = (angle.cos(), angle.sin());
        let mut last_hit = (cx, cy);
        let mut last_sample_was_mask = true;
        let mut exited_image = false;
        let mut t = 0.0;
        loop {
            t += RAY_STEP;
            if t > t_max {
                break;
            }
            let (x, y) = (cx + t * dx, cy + t * dy);
            match on(x, y) {
                Some(true) => {
                    last_hit = (x.round(), y.round());
                    last_sample_was_mask = true;
                }
                Some(false) => {
                    last_sample_was_mask = false;
                }
                None => {
                    exited_image = true;
                    break;
                }
            }
        }
        *point = RayPoint {
            x: last_hit.0,
            y: last_hit.1,
            clipped: exited_image && last_sample_was_mask,
        };
    }
    Ok(points)
}

/// Median of the 3x3 depth neighborhood around a pixel, restricted to mask
/// pixels so boundary nodes read the dough surface rather than the board.
/// Falls back to the full window when the neighborhood misses the mask.
fn depth_at(obs: &RgbdObs, mask: Option<&SegMask>, px: f64, py: f64) -> f64 {
    let (w, h) = (obs.width as i64, obs.height as i64);
    let (cx, cy) = (px.round() as i64, py.round() as i64);
    let mut vals = Vec::with_capacity(9);
    let mut all = Vec::with_capacity(9);
    for dy in -1..=1 {
        for dx in -1..=1 {
            let (x, y) = (cx + dx, cy + dy);
            if x >= 0 && y >= 0 && x < w && y < h {
                let d = obs.depth[(y * w + x) as usize];
                all.push(d);
                if mask.map_or(true, |m| m.get(x as usize, y as usize)) {
                    vals.push(d);
                }
            }
        }
    }
    if vals.is_empty() {
        vals = all;
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals[vals.len() / 2]
}

/// Assemble the 9-node object subgraph from the pipeline outputs: node 0 is
/// the center, nodes 1..=8 the ray points in angular order; attributes are
/// board-frame positions and 3x3-median depth samples.
pub fn build_object_subgraph(
    center: (f64, f64),
    points: &[RayPoint; 8],
    obs: &RgbdObs,
    map: &BoardMap,
    mask: Option<&SegMask>,
) -> Result<ObjectSubgraph> {
    let mut nodes = Vec::with_capacity(9);
    let cb = map.pixel_to_board(center.0, center.1);
    nodes.push(ObjectNode { x: cb[0], y: cb[1], depth: depth_at(obs, mask, center.0, center.1) });
    for p in points.iter() {
        let b = map.pixel_to_board(p.x, p.y);
        nodes.push(ObjectNode { x: b[0], y: b[1], depth: depth_at(obs, mask, p.x, p.y) });
    }
    ObjectSubgraph::new(nodes)
}

/// Add the two end-effector poses as manipulator nodes.
pub fn build_hetero_graph(
    sub: ObjectSubgraph,
    ee_poses: [[f64; MANIP_ATTR_DIM]; MANIP_NODES],
) -> Result<HeteroGraph> {
    HeteroGraph::new(sub, ee_poses)
}

/// Full pipeline: observation to object subgraph.
pub fn abstract_subgraph(obs: &RgbdObs, bounds: &ColorBounds, map: &BoardMap) -> Result<ObjectSubgraph> {
    let mask = segment(obs, bounds)?;
    let center = contour_center(&mask)?;
    let points = ray_boundary_points(&mask, center)?;
    build_object_subgraph(center, &points, obs, map, Some(&mask))
}

/// Full pipeline: observation plus end-effector poses to heterogeneous graph.
pub fn abstract_observation(
    obs: &RgbdObs,
    bounds: &ColorBounds,
    map: &BoardMap,
    ee_poses: [[f64; MANIP_ATTR_DIM]; MANIP_NODES],
) -> Result<HeteroGraph> {
    build_hetero_graph(abstract_subgraph(obs, bounds, map)?, ee_poses)
}
