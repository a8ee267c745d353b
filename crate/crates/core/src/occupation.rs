//! Occupation times of realized paths: the time a path spends inside a
//! rectangle, plus grid and strip aggregations over a bounding area.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{FiberPath, Rect};

/// Which discretization of the occupation integral to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccupationRule {
    /// Left-endpoint rule on the path's own time stamps.
    Sampled,
    /// Exact integral of the piecewise-linear interpolant.
    Polyline,
}

/// Occupation times over an `nx x ny` partition of `bounds`.
///
/// Column `p` runs along the belt direction (`y1`), row `q` across it (`y2`).
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationGrid {
    bounds: Rect,
    nx: usize,
    ny: usize,
    x_edges: Vec<f64>,
    y_edges: Vec<f64>,
    values: Vec<f64>,
}

impl OccupationGrid {
    pub(crate) fn from_fn<F>(bounds: Rect, nx: usize, ny: usize, cell_value: F) -> Result<Self>
    where
        F: Fn(usize, usize, &CellBox) -> Result<f64> + Sync,
    {
        check_grid(&bounds, nx, ny)?;
        let x_edges = edges(bounds.a1, bounds.b1, nx);
        let y_edges = edges(bounds.a2, bounds.b2, ny);
        let values = (0..nx * ny)
            .into_par_iter()
            .map(|idx| {
                let (p, q) = (idx % nx, idx / nx);
                let cell = CellBox {
                    x: Slab::new(x_edges[p], x_edges[p + 1], p + 1 == nx),
                    y: Slab::new(y_edges[q], y_edges[q + 1], q + 1 == ny),
                };
                cell_value(p, q, &cell)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            bounds,
            nx,
            ny,
            x_edges,
            y_edges,
            values,
        })
    }

    pub fn bounds(&self) -> &Rect {
        &self.bounds
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Value of column `p` (along `y1`) and row `q` (along `y2`).
    pub fn get(&self, p: usize, q: usize) -> f64 {
        assert!(p < self.nx && q < self.ny, "cell ({p}, {q}) out of range");
        self.values[q * self.nx + p]
    }

    /// Row-major values, row `q` occupying `q*nx .. (q+1)*nx`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, q: usize) -> &[f64] {
        &self.values[q * self.nx..(q + 1) * self.nx]
    }

    /// Closed rectangle covered by cell `(p, q)`.
    pub fn cell(&self, p: usize, q: usize) -> Rect {
        Rect {
            a1: self.x_edges[p],
            b1: self.x_edges[p + 1],
            a2: self.y_edges[q],
            b2: self.y_edges[q + 1],
        }
    }

    pub fn x_centers(&self) -> Vec<f64> {
        self.x_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    pub fn y_centers(&self) -> Vec<f64> {
        self.y_edges
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn check_grid(bounds: &Rect, nx: usize, ny: usize) -> Result<()> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidConfig(format!(
            "grid needs at least one cell per axis, got {nx} x {ny}"
        )));
    }
    if ![bounds.a1, bounds.b1, bounds.a2, bounds.b2]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(Error::InvalidRegion("grid bounds must be finite".into()));
    }
    Ok(())
}

/// `n + 1` edges from `lo` to `hi`; the last one is exactly `hi`.
fn edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (0..=n)
        .map(|i| lo + (hi - lo) * (i as f64 / n as f64))
        .collect();
    e[n] = hi;
    e
}

/// One coordinate interval, `[lo, hi]` or `[lo, hi)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Slab {
    lo: f64,
    hi: f64,
    hi_closed: bool,
}

impl Slab {
    fn new(lo: f64, hi: f64, hi_closed: bool) -> Self {
        Self { lo, hi, hi_closed }
    }

    fn closed(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true)
    }

    fn contains(&self, v: f64) -> bool {
        self.lo <= v && (v < self.hi || (self.hi_closed && v <= self.hi))
    }

    /// Narrows `[s0, s1]` to the parameters where `start + s*delta` lies in
    /// the slab. Returns `false` when nothing is left.
    fn clip(&self, start: f64, delta: f64, s0: &mut f64, s1: &mut f64) -> bool {
        if delta == 0.0 {
            return self.contains(start);
        }
        let ta = (self.lo - start) / delta;
        let tb = (self.hi - start) / delta;
        let (enter, exit) = if ta < tb { (ta, tb) } else { (tb, ta) };
        *s0 = s0.max(enter);
        *s1 = s1.min(exit);
        *s0 < *s1
    }
}

/// Rectangle with per-edge closedness, used to make grid cells a partition.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellBox {
    x: Slab,
    y: Slab,
}

impl CellBox {
    fn closed(region: &Rect) -> Self {
        Self {
            x: Slab::closed(region.a1, region.b1),
            y: Slab::closed(region.a2, region.b2),
        }
    }

    pub(crate) fn rect(&self) -> Rect {
        Rect {
            a1: self.x.lo,
            b1: self.x.hi,
            a2: self.y.lo,
            b2: self.y.hi,
        }
    }

    /// Fraction of the segment `from -> to` lying inside the box.
    fn segment_fraction(&self, from: [f64; 2], to: [f64; 2]) -> f64 {
        let (mut s0, mut s1) = (0.0_f64, 1.0_f64);
        let dx = to[0] - from[0];
        let dy = to[1] - from[1];
        if !self.x.clip(from[0], dx, &mut s0, &mut s1) {
            return 0.0;
        }
        if !self.y.clip(from[1], dy, &mut s0, &mut s1) {
            return 0.0;
        }
        if dx == 0.0 && dy == 0.0 {
            return 1.0;
        }
        (s1 - s0).max(0.0)
    }

    fn polyline_time(&self, path: &FiberPath) -> f64 {
        let t = path.times();
        let pts = path.points();
        let mut total = 0.0;
        for i in 0..t.len().saturating_sub(1) {
            let f = self.segment_fraction(pts[i], pts[i + 1]);
            if f > 0.0 {
                total += (t[i + 1] - t[i]) * f;
            }
        }
        total
    }
}

/// Left-endpoint occupation time `sum_i 1_D(y_i) (t_{i+1} - t_i)` over a
/// closed rectangle.
pub fn occupation_time_sampled(path: &FiberPath, region: &Rect) -> f64 {
    let t = path.times();
    path.points()
        .iter()
        .zip(t.windows(2))
        .filter(|(p, _)| region.contains(**p))
        .map(|(_, w)| w[1] - w[0])
        .sum()
}

/// Exact occupation time of the piecewise-linear path (constant speed on
/// each segment) over a closed rectangle.
pub fn occupation_time_polyline(path: &FiberPath, region: &Rect) -> f64 {
    CellBox::closed(region).polyline_time(path)
}

pub fn occupation_time(path: &FiberPath, region: &Rect, rule: OccupationRule) -> f64 {
    match rule {
        OccupationRule::Sampled => occupation_time_sampled(path, region),
        OccupationRule::Polyline => occupation_time_polyline(path, region),
    }
}

/// Polyline occupation times over an `nx x ny` partition of `bounds`.
///
/// Interior cell edges are half-open (lower edge inclusive) and the outer
/// boundary is closed, so the cells sum to the occupation time of `bounds`.
pub fn grid_occupation(
    path: &FiberPath,
    bounds: &Rect,
    nx: usize,
    ny: usize,
) -> Result<OccupationGrid> {
    OccupationGrid::from_fn(*bounds, nx, ny, |_, _, cell| Ok(cell.polyline_time(path)))
}

/// Occupation times of `n_strips` equal vertical strips, ordered by `y1`.
pub fn strip_profile(path: &FiberPath, bounds: &Rect, n_strips: usize) -> Result<Vec<f64>> {
    Ok(grid_occupation(path, bounds, n_strips, 1)?
        .values()
        .to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(times: &[f64], pts: &[[f64; 2]]) -> FiberPath {
        FiberPath::new(times.to_vec(), pts.to_vec()).unwrap()
    }

    fn rect(a1: f64, b1: f64, a2: f64, b2: f64) -> Rect {
        Rect::new(a1, b1, a2, b2).unwrap()
    }

    #[test]
    fn constant_path_inside() {
        let p = path(&[0.0, 3.5, 7.0], &[[0.0, 0.0]; 3]);
        let r = rect(-1.0, 1.0, -1.0, 1.0);
        assert_eq!(occupation_time_sampled(&p, &r), 7.0);
        assert_eq!(occupation_time_polyline(&p, &r), 7.0);
    }

    #[test]
    fn far_slab_never_hit() {
        let p = path(&[0.0, 1.0, 2.0], &[[0.0, 0.0], [3.0, 1.0], [-2.0, 5.0]]);
        let r = rect(1e9, 1e9, -1.0, 1.0);
        assert_eq!(occupation_time_sampled(&p, &r), 0.0);
        assert_eq!(occupation_time_polyline(&p, &r), 0.0);
    }

    #[test]
    fn left_rule_hand_sum() {
        let p = path(
            &[0.0, 1.0, 2.0, 3.0],
            &[[0.0, 0.0], [5.0, 0.0], [0.0, 0.0], [5.0, 0.0]],
        );
        assert_eq!(
            occupation_time_sampled(&p, &rect(-1.0, 1.0, -1.0, 1.0)),
            2.0
        );
    }

    #[test]
    fn single_segment_clip() {
        let p = path(&[0.0, 4.0], &[[-2.0, 0.0], [2.0, 0.0]]);
        assert_eq!(
            occupation_time_polyline(&p, &rect(-1.0, 1.0, -1.0, 1.0)),
            2.0
        );
        // diagonal through a corner region
        let p = path(&[0.0, 2.0], &[[0.0, 0.0], [2.0, 2.0]]);
        let got = occupation_time_polyline(&p, &rect(0.5, 3.0, 0.0, 1.0));
        assert!((got - 0.5).abs() < 1e-15, "{got}");
    }

    #[test]
    fn single_sample_path_has_zero_occupation() {
        let p = path(&[0.0], &[[0.0, 0.0]]);
        let r = rect(-1.0, 1.0, -1.0, 1.0);
        assert_eq!(occupation_time_polyline(&p, &r), 0.0);
        assert_eq!(occupation_time_sampled(&p, &r), 0.0);
    }

    #[test]
    fn segment_along_internal_edge_counted_once() {
        // horizontal segment lying exactly on y2 = 0, an interior edge
        let p = path(&[0.0, 1.0], &[[0.1, 0.0], [0.9, 0.0]]);
        let bounds = rect(0.0, 1.0, -1.0, 1.0);
        let g = grid_occupation(&p, &bounds, 4, 2).unwrap();
        assert!((g.total() - 1.0).abs() < 1e-15);
        let lower: f64 = g.row(0).iter().sum();
        assert_eq!(lower, 0.0);
        // on the outer closed edge it still counts
        let p = path(&[0.0, 1.0], &[[0.1, 1.0], [0.9, 1.0]]);
        let g = grid_occupation(&p, &bounds, 4, 2).unwrap();
        assert!((g.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_path_fills_one_cell() {
        let p = path(&[0.0, 2.0, 5.0], &[[0.3, 0.7]; 3]);
        let g = grid_occupation(&p, &rect(0.0, 1.0, 0.0, 1.0), 4, 4).unwrap();
        for q in 0..4 {
            for pc in 0..4 {
                let want = if (pc, q) == (1, 2) { 5.0 } else { 0.0 };
                assert_eq!(g.get(pc, q), want);
            }
        }
    }

    #[test]
    fn one_by_one_grid_matches_whole() {
        let p = path(&[0.0, 1.0, 2.5], &[[0.2, -0.3], [1.7, 0.4], [0.4, 0.9]]);
        let b = rect(0.0, 1.0, -0.5, 0.5);
        let g = grid_occupation(&p, &b, 1, 1).unwrap();
        assert_eq!(g.values(), &[occupation_time_polyline(&p, &b)]);
    }

    #[test]
    fn strips_centered_path() {
        let p = path(&[0.0, 4.0], &[[0.5, 0.0]; 2]);
        let s = strip_profile(&p, &rect(0.0, 1.0, -1.0, 1.0), 5).unwrap();
        assert_eq!(s, vec![0.0, 0.0, 4.0, 0.0, 0.0]);
    }

    #[test]
    fn grid_rejects_bad_shape() {
        let p = path(&[0.0], &[[0.0, 0.0]]);
        assert!(grid_occupation(&p, &rect(0.0, 1.0, 0.0, 1.0), 0, 1).is_err());
        let inf = rect(0.0, f64::INFINITY, 0.0, 1.0);
        assert!(grid_occupation(&p, &inf, 1, 1).is_err());
    }

    #[test]
    fn grid_geometry() {
        let p = path(&[0.0], &[[0.0, 0.0]]);
        let g = grid_occupation(&p, &rect(0.0, 10.0, -1.0, 1.0), 5, 2).unwrap();
        assert_eq!(g.x_centers(), vec![1.0, 3.0, 5.0, 7.0, 9.0]);
        assert_eq!(g.y_centers(), vec![-0.5, 0.5]);
        assert_eq!(g.cell(4, 1), rect(8.0, 10.0, 0.0, 1.0));
    }
}
