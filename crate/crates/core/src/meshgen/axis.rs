//! Per-axis line construction: anchor clustering, refinement fans, line
//! merging, gap filling and boundary/PML padding.
//!
//! Every routine here computes lower-side and upper-side positions with
//! mirrored formulas, so a scene reflected through the origin produces an
//! exactly reflected line set.

use super::{MeshError, MeshParams, PML_CELLS};
use crate::scene::Axis;

/// Groups anchors whose successive spacing is below `tolerance` and returns
/// the fan centres for each group: both extremes, or the midpoint when the
/// group is narrower than `eps_merge`.
pub fn cluster_anchors(anchors: &[f64], tolerance: f64, eps_merge: f64) -> Vec<f64> {
    let mut centers = Vec::new();
    let mut start = 0;
    for i in 1..=anchors.len() {
        if i < anchors.len() && anchors[i] - anchors[i - 1] < tolerance {
            continue;
        }
        let (lo, hi) = (anchors[start], anchors[i - 1]);
        if hi - lo < eps_merge {
            centers.push(if lo == hi { lo } else { 0.5 * (lo + hi) });
        } else {
            centers.push(lo);
            centers.push(hi);
        }
        start = i;
    }
    centers
}

/// Offsets from a fan centre, innermost first. Offsets closer than
/// `eps_merge` to the centre or to the previous offset are skipped.
fn fan_offsets(cell: f64, count: u32, ratio: f64, eps_merge: f64) -> Vec<f64> {
    let mut offsets = Vec::with_capacity(count as usize);
    let mut last = 0.0;
    for k in 1..=count {
        let d = cell / ratio.powi((count - k + 1) as i32);
        if d - last >= eps_merge {
            offsets.push(d);
            last = d;
        }
    }
    offsets
}

/// Inserts `n[axis]` lines on each side of every centre at geometrically
/// graded offsets `h / ratio^(n-k+1)`, `k = 1..n`, where `h` is the model
/// cell size. A fan never reaches past `D/2 - eps/2` towards a neighbouring
/// centre `D` away, so fans of different centres stay `eps_merge` apart.
pub fn refine_axis(centers: &[f64], params: &MeshParams, axis: Axis, lambda_min: f64) -> Vec<f64> {
    let eps = params.eps_merge(lambda_min);
    let offsets = fan_offsets(
        params.model_cell(lambda_min),
        params.n[axis.index()],
        params.grading_ratio,
        eps,
    );
    let mut out = Vec::with_capacity(centers.len() * (2 * offsets.len() + 1));
    for (i, &c) in centers.iter().enumerate() {
        let reach_lo = i
            .checked_sub(1)
            .map_or(f64::INFINITY, |j| 0.5 * (c - centers[j]) - 0.5 * eps);
        let reach_hi = centers
            .get(i + 1)
            .map_or(f64::INFINITY, |&next| 0.5 * (next - c) - 0.5 * eps);
        out.extend(
            offsets
                .iter()
                .rev()
                .filter(|&&d| d <= reach_lo)
                .map(|&d| c - d),
        );
        out.push(c);
        out.extend(offsets.iter().filter(|&&d| d <= reach_hi).map(|&d| c + d));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Greedy left-to-right pass dropping lines closer than `eps_merge` to the
/// previously kept line. Lines listed in `anchors` (sorted) are never
/// dropped; a non-anchor neighbour is removed in their place, and two anchors
/// closer than `eps_merge` are both kept.
pub fn merge_lines(lines: &[f64], anchors: &[f64], eps_merge: f64) -> Vec<f64> {
    let is_anchor = |x: f64| anchors.binary_search_by(|a| a.total_cmp(&x)).is_ok();
    let mut kept: Vec<(f64, bool)> = Vec::with_capacity(lines.len());
    for &x in lines {
        let anchor = is_anchor(x);
        match kept.last().copied() {
            Some((last, last_anchor)) if x - last < eps_merge => {
                if !anchor {
                    continue;
                }
                if x == last {
                    kept.last_mut().unwrap().1 = true;
                    continue;
                }
                if !last_anchor {
                    kept.pop();
                }
                kept.push((x, true));
            }
            _ => kept.push((x, anchor)),
        }
    }
    kept.into_iter().map(|(x, _)| x).collect()
}

/// Cell count for a gap of width `gap` at maximum cell size `cell`. The
/// small relative slack stops rounding noise in `gap / cell` from adding a
/// cell to gaps that are exact multiples.
fn subdivisions(gap: f64, cell: f64) -> usize {
    ((gap / cell) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Pushes the interior points of `[a, b]` split into `k` equal cells.
/// Points in the lower half are measured from `a`, points in the upper half
/// from `b`, and an even split puts the middle point at the exact midpoint.
fn push_uniform_interior(out: &mut Vec<f64>, a: f64, b: f64, k: usize) {
    let gap = b - a;
    for i in 1..k {
        let x = if 2 * i < k {
            a + gap * i as f64 / k as f64
        } else if 2 * i > k {
            b - gap * (k - i) as f64 / k as f64
        } else {
            0.5 * (a + b)
        };
        out.push(x);
    }
}

/// Subdivides each gap uniformly into `ceil(gap / h)` cells, with `h` the
/// model cell size if the gap overlaps `model_interval` with positive length
/// and the free-space cell size otherwise.
pub fn fill_gaps(
    lines: &[f64],
    model_interval: (f64, f64),
    lambda_min: f64,
    params: &MeshParams,
) -> Vec<f64> {
    let model_cell = params.model_cell(lambda_min);
    let space_cell = params.space_cell(lambda_min);
    let (lo, hi) = model_interval;
    let mut out = Vec::with_capacity(lines.len() * 2);
    for pair in lines.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let cell = if a < hi && b > lo {
            model_cell
        } else {
            space_cell
        };
        out.push(a);
        push_uniform_interior(&mut out, a, b, subdivisions(b - a, cell));
    }
    out.extend(lines.last());
    out
}

/// Pads both ends of an axis: a free-space region reaching `gap` beyond the
/// model interval, split into cells no larger than `space_cell`, followed by
/// exactly `pml_n` cells of width `space_cell`. Lines already beyond the
/// padded boundary are discarded.
pub fn add_boundary_and_pml(
    lines: &[f64],
    model_interval: (f64, f64),
    gap: f64,
    pml_n: u32,
    space_cell: f64,
) -> Result<Vec<f64>, MeshError> {
    if !PML_CELLS.contains(&pml_n) {
        return Err(MeshError::PmlCellsOutOfRange(pml_n));
    }
    if !(gap >= 0.0 && gap.is_finite()) {
        return Err(MeshError::InvalidParameter(format!(
            "boundary gap must be non-negative, got {gap}"
        )));
    }
    if !(space_cell > 0.0 && space_cell.is_finite()) {
        return Err(MeshError::InvalidParameter(format!(
            "free-space cell must be positive, got {space_cell}"
        )));
    }
    let lower = model_interval.0 - gap;
    let upper = model_interval.1 + gap;
    let inner: Vec<f64> = lines
        .iter()
        .copied()
        .filter(|&x| lower <= x && x <= upper)
        .collect();
    let (&first, &last) = match (inner.first(), inner.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => {
            return Err(MeshError::InvalidParameter(
                "no mesh lines inside the padded boundary".into(),
            ))
        }
    };

    let pml = pml_n as usize;
    let mut out = Vec::with_capacity(inner.len() + 2 * pml + 16);
    for j in (1..=pml).rev() {
        out.push(lower - j as f64 * space_cell);
    }
    if first > lower {
        out.push(lower);
        push_uniform_interior(&mut out, lower, first, subdivisions(first - lower, space_cell));
    }
    out.extend_from_slice(&inner);
    if last < upper {
        push_uniform_interior(&mut out, last, upper, subdivisions(upper - last, space_cell));
        out.push(upper);
    }
    for j in 1..=pml {
        out.push(upper + j as f64 * space_cell);
    }
    Ok(out)
}
