//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use num_rational::Ratio;

use housenav::scene::{Cell, House, ObjectId};
use housenav::trajectory::Pose;
use housenav::visibility::FovConfig;

type Q = Ratio<i64>;

/// Whether the closed unit square of `cell` meets the segment between the
/// centers of `a` and `b`, by exact parametric clipping.
pub fn segment_meets_cell(a: Cell, b: Cell, cell: Cell) -> bool {
    let half = Q::new(1, 2);
    let (ax, ay) = (Q::from(a.x as i64) + half, Q::from(a.y as i64) + half);
    let (dx, dy) = (Q::from((b.x - a.x) as i64), Q::from((b.y - a.y) as i64));
    let (mut lo, mut hi) = (Q::from(0), Q::from(1));
    for (p, d, min, max) in [
        (ax, dx, Q::from(cell.x as i64), Q::from(cell.x as i64 + 1)),
        (ay, dy, Q::from(cell.y as i64), Q::from(cell.y as i64 + 1)),
    ] {
        if d == Q::from(0) {
            if p < min || p > max {
                return false;
            }
            continue;
        }
        let (t0, t1) = ((min - p) / d, (max - p) / d);
        let (t0, t1) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        lo = lo.max(t0);
        hi = hi.min(t1);
    }
    lo <= hi
}

/// Scans every cell in the bounding box and keeps those the segment touches.
pub fn dense_cover(a: Cell, b: Cell) -> BTreeSet<(i32, i32)> {
    let mut out = BTreeSet::new();
    for y in a.y.min(b.y) - 1..=a.y.max(b.y) + 1 {
        for x in a.x.min(b.x) - 1..=a.x.max(b.x) + 1 {
            if segment_meets_cell(a, b, Cell::new(x, y)) {
                out.insert((x, y));
            }
        }
    }
    out
}

fn sees(house: &House, pose: &Pose, target: Cell, fov: &FovConfig) -> bool {
    let (dx, dy) = ((target.x - pose.cell.x) as i64, (target.y - pose.cell.y) as i64);
    let d2 = (dx * dx + dy * dy) as f64;
    if d2 > fov.max_distance * fov.max_distance + 1e-9 {
        return false;
    }
    if d2 > 0.0 {
        let (hx, hy) = pose.heading.delta();
        let cos = (hx as i64 * dx + hy as i64 * dy) as f64 / d2.sqrt();
        if cos < (fov.fov_degrees / 2.0).to_radians().cos() - 1e-9 {
            return false;
        }
    }
    dense_cover(pose.cell, target).into_iter().all(|(x, y)| house.grid.is_walkable(Cell::new(x, y)))
}

pub fn brute_force_visible(house: &House, pose: &Pose, fov: &FovConfig) -> BTreeSet<ObjectId> {
    house.objects.iter().filter(|o| sees(house, pose, o.cell, fov)).map(|o| o.id).collect()
}

/// Uniform-cost search distance in unit steps, or `None` when unreachable.
pub fn ucs_distance(house: &House, start: Cell, goal: Cell) -> Option<usize> {
    let g = &house.grid;
    if !g.is_walkable(start) || !g.is_walkable(goal) {
        return None;
    }
    let mut best = vec![usize::MAX; (g.width() * g.height()) as usize];
    let idx = |c: Cell| (c.y * g.width() + c.x) as usize;
    let mut heap = BinaryHeap::from([Reverse((0usize, start.x, start.y))]);
    best[idx(start)] = 0;
    while let Some(Reverse((d, x, y))) = heap.pop() {
        let c = Cell::new(x, y);
        if c == goal {
            return Some(d);
        }
        if d > best[idx(c)] {
            continue;
        }
        for (ox, oy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let n = c.offset(ox, oy);
            if g.is_walkable(n) && d + 1 < best[idx(n)] {
                best[idx(n)] = d + 1;
                heap.push(Reverse((d + 1, n.x, n.y)));
            }
        }
    }
    None
}
