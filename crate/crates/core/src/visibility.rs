//! Geometric visibility: view distance, a frustum around the heading, and
//! grid line of sight where only wall cells occlude.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::scene::{Cell, House, ObjectId};
use crate::trajectory::Pose;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FovConfig {
    /// Full frustum angle, centered on the heading.
    pub fov_degrees: f64,
    /// Euclidean distance between cell centers, in cells.
    pub max_distance: f64,
}

impl Default for FovConfig {
    fn default() -> Self {
        Self { fov_degrees: 90.0, max_distance: 12.0 }
    }
}

const ANGLE_EPS: f64 = 1e-9;

pub fn within_distance(from: Cell, to: Cell, max_distance: f64) -> bool {
    let (dx, dy) = ((to.x - from.x) as f64, (to.y - from.y) as f64);
    dx * dx + dy * dy <= max_distance * max_distance + ANGLE_EPS
}

/// Boundary rays are inside. The pose's own cell is always inside.
pub fn in_frustum(pose: &Pose, to: Cell, fov_degrees: f64) -> bool {
    let (dx, dy) = (to.x - pose.cell.x, to.y - pose.cell.y);
    if dx == 0 && dy == 0 {
        return true;
    }
    let (hx, hy) = pose.heading.delta();
    let dot = (hx * dx + hy * dy) as f64;
    let perp = (hx * dy - hy * dx).abs() as f64;
    perp.atan2(dot) <= (fov_degrees / 2.0).to_radians() + ANGLE_EPS
}

/// Every cell whose closed square meets the segment between the two cell centers,
/// in traversal order. Passing exactly through a grid corner covers all four cells there.
pub fn line_cover(from: Cell, to: Cell) -> Vec<Cell> {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let (nx, ny) = (dx.abs() as i64, dy.abs() as i64);
    let (sx, sy) = (dx.signum(), dy.signum());
    let mut cur = from;
    let mut out = vec![cur];
    let (mut ix, mut iy) = (0i64, 0i64);
    while ix < nx || iy < ny {
        // Next vertical boundary at t = (ix + 1/2) / nx, horizontal at (iy + 1/2) / ny.
        let tx = (1 + 2 * ix) * ny;
        let ty = (1 + 2 * iy) * nx;
        if tx == ty {
            out.push(cur.offset(sx, 0));
            out.push(cur.offset(0, sy));
            cur = cur.offset(sx, sy);
            ix += 1;
            iy += 1;
        } else if tx < ty {
            cur = cur.offset(sx, 0);
            ix += 1;
        } else {
            cur = cur.offset(0, sy);
            iy += 1;
        }
        out.push(cur);
    }
    out
}

pub fn line_of_sight(house: &House, from: Cell, to: Cell) -> bool {
    line_cover(from, to).into_iter().all(|c| house.grid.is_walkable(c))
}

pub fn visible_objects(house: &House, pose: &Pose, fov: &FovConfig) -> BTreeSet<ObjectId> {
    house
        .objects
        .iter()
        .filter(|o| {
            within_distance(pose.cell, o.cell, fov.max_distance)
                && in_frustum(pose, o.cell, fov.fov_degrees)
                && line_of_sight(house, pose.cell, o.cell)
        })
        .map(|o| o.id)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::fixtures::{object, row_house};
    use crate::trajectory::Heading;
    use proptest::prelude::*;

    fn pose(x: i32, y: i32, heading: Heading) -> Pose {
        Pose { cell: Cell::new(x, y), heading }
    }

    #[test]
    fn own_cell_is_visible() {
        let mut h = row_house(&["kitchen"], 5, 5, false);
        h.objects.push(object(0, "table", "red", &[], Cell::new(3, 3), 1.0, 0));
        for heading in Heading::ALL {
            assert!(visible_objects(&h, &pose(3, 3, heading), &FovConfig::default()).contains(&ObjectId(0)));
        }
    }

    #[test]
    fn object_behind_is_hidden() {
        let mut h = row_house(&["kitchen"], 5, 5, false);
        h.objects.push(object(0, "table", "red", &[], Cell::new(3, 5), 1.0, 0));
        assert!(visible_objects(&h, &pose(3, 2, Heading::N), &FovConfig::default()).is_empty());
        assert!(!visible_objects(&h, &pose(3, 2, Heading::S), &FovConfig::default()).is_empty());
    }

    #[test]
    fn frustum_boundary_is_inclusive() {
        let p = pose(0, 0, Heading::E);
        assert!(in_frustum(&p, Cell::new(3, 3), 90.0));
        assert!(in_frustum(&p, Cell::new(3, -3), 90.0));
        assert!(!in_frustum(&p, Cell::new(3, 4), 90.0));
        assert!(!in_frustum(&p, Cell::new(-1, 0), 90.0));
    }

    #[test]
    fn walls_block_sight() {
        let mut h = row_house(&["kitchen", "bedroom"], 3, 3, false);
        h.objects.push(object(0, "table", "red", &[], Cell::new(5, 2), 1.0, 1));
        assert!(visible_objects(&h, &pose(1, 2, Heading::E), &FovConfig::default()).is_empty());
        let h2 = {
            let mut d = row_house(&["kitchen", "bedroom"], 3, 3, true);
            d.objects = h.objects.clone();
            d
        };
        assert!(visible_objects(&h2, &pose(1, 2, Heading::E), &FovConfig::default()).contains(&ObjectId(0)));
    }

    #[test]
    fn diagonal_cover_includes_corner_neighbours() {
        let c = line_cover(Cell::new(0, 0), Cell::new(2, 2));
        assert_eq!(
            c,
            vec![
                Cell::new(0, 0),
                Cell::new(1, 0),
                Cell::new(0, 1),
                Cell::new(1, 1),
                Cell::new(2, 1),
                Cell::new(1, 2),
                Cell::new(2, 2)
            ]
        );
        assert_eq!(line_cover(Cell::new(4, 4), Cell::new(4, 4)), vec![Cell::new(4, 4)]);
    }

    proptest! {
        #[test]
        fn cover_is_symmetric_and_connected(ax in -10i32..10, ay in -10i32..10, bx in -10i32..10, by in -10i32..10) {
            let a = Cell::new(ax, ay);
            let b = Cell::new(bx, by);
            let fwd = line_cover(a, b);
            let mut f: Vec<_> = fwd.clone();
            let mut r = line_cover(b, a);
            f.sort();
            r.sort();
            prop_assert_eq!(f, r);
            prop_assert_eq!(fwd[0], a);
            prop_assert_eq!(*fwd.last().unwrap(), b);
        }

        #[test]
        fn larger_view_distance_never_hides(seed in 0u64..200, extra in 0.0f64..10.0) {
            use crate::synth::{synth_house, SynthConfig};
            use crate::scene::Lexicon;
            let h = synth_house(&SynthConfig::default(), &Lexicon::default(), seed, "h").unwrap();
            let cell = h.rooms[0].bbox.cells().next().unwrap();
            for heading in Heading::ALL {
                let p = Pose { cell, heading };
                let near = visible_objects(&h, &p, &FovConfig { max_distance: 6.0, ..Default::default() });
                let far = visible_objects(&h, &p, &FovConfig { max_distance: 6.0 + extra, ..Default::default() });
                prop_assert!(near.is_subset(&far));
            }
        }
    }
}
