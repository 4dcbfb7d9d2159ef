//! Endpoint sampling, grid shortest paths, pose sequences and frame sub-sampling.

use std::collections::VecDeque;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{Cell, House};

pub const MAX_TRAJECTORY_LEN: usize = 140;
pub const SUBSAMPLE_CHUNK: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrajectoryError {
    #[error("house has {0} rooms; at least 2 are needed")]
    TooFewRooms(usize),
    #[error("no path from ({},{}) to ({},{})", .0.x, .0.y, .1.x, .1.y)]
    NoPath(Cell, Cell),
    #[error("cell ({},{}) is not walkable", .0.x, .0.y)]
    NotWalkable(Cell),
    #[error("trajectory would have {0} poses (limit {MAX_TRAJECTORY_LEN})")]
    TooLong(usize),
    #[error("path is not 4-connected at index {0}")]
    BrokenPath(usize),
    #[error("empty input")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Heading {
    N,
    E,
    S,
    W,
}

impl Heading {
    /// Neighbor order used for deterministic tie-breaking.
    pub const ALL: [Heading; 4] = [Heading::N, Heading::E, Heading::S, Heading::W];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Heading::N => (0, -1),
            Heading::E => (1, 0),
            Heading::S => (0, 1),
            Heading::W => (-1, 0),
        }
    }

    pub fn between(from: Cell, to: Cell) -> Option<Heading> {
        Heading::ALL.into_iter().find(|h| {
            let (dx, dy) = h.delta();
            from.offset(dx, dy) == to
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pose {
    pub cell: Cell,
    pub heading: Heading,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub house_id: String,
    pub video_id: String,
    pub poses: Vec<Pose>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Picks a start and goal cell in two different rooms.
pub fn sample_endpoints<R: Rng + ?Sized>(house: &House, rng: &mut R) -> Result<(Cell, Cell), TrajectoryError> {
    if house.rooms.len() < 2 {
        return Err(TrajectoryError::TooFewRooms(house.rooms.len()));
    }
    let a = rng.random_range(0..house.rooms.len());
    let mut b = rng.random_range(0..house.rooms.len() - 1);
    if b >= a {
        b += 1;
    }
    let pick = |rng: &mut R, i: usize| {
        let cells: Vec<Cell> = house.rooms[i].bbox.cells().collect();
        *cells.choose(rng).expect("room bbox is non-empty")
    };
    let start = pick(rng, a);
    let goal = pick(rng, b);
    Ok((start, goal))
}

/// Breadth-first search over walkable cells, neighbors expanded N, E, S, W.
pub fn shortest_path(house: &House, start: Cell, goal: Cell) -> Result<Vec<Cell>, TrajectoryError> {
    let grid = &house.grid;
    for c in [start, goal] {
        if !grid.is_walkable(c) {
            return Err(TrajectoryError::NotWalkable(c));
        }
    }
    let w = grid.width();
    let idx = |c: Cell| (c.y * w + c.x) as usize;
    let mut prev: Vec<Option<Cell>> = vec![None; (grid.width() * grid.height()) as usize];
    let mut visited = vec![false; prev.len()];
    visited[idx(start)] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        if c == goal {
            let mut path = vec![goal];
            let mut cur = goal;
            while let Some(p) = prev[idx(cur)] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Ok(path);
        }
        for h in Heading::ALL {
            let (dx, dy) = h.delta();
            let n = c.offset(dx, dy);
            if grid.is_walkable(n) && !visited[idx(n)] {
                visited[idx(n)] = true;
                prev[idx(n)] = Some(c);
                queue.push_back(n);
            }
        }
    }
    Err(TrajectoryError::NoPath(start, goal))
}

/// One pose per cell plus one in-place turn pose per heading change.
///
/// The initial heading faces the first move; a single-cell path faces north.
pub fn path_to_trajectory(house: &House, video_id: &str, path: &[Cell]) -> Result<Trajectory, TrajectoryError> {
    let first = *path.first().ok_or(TrajectoryError::Empty)?;
    let moves: Vec<Heading> = path
        .windows(2)
        .enumerate()
        .map(|(i, w)| Heading::between(w[0], w[1]).ok_or(TrajectoryError::BrokenPath(i + 1)))
        .collect::<Result<_, _>>()?;
    let mut heading = moves.first().copied().unwrap_or(Heading::N);
    let mut poses = vec![Pose { cell: first, heading }];
    for (i, &m) in moves.iter().enumerate() {
        if m != heading {
            heading = m;
            poses.push(Pose { cell: path[i], heading });
        }
        poses.push(Pose { cell: path[i + 1], heading });
    }
    if poses.len() > MAX_TRAJECTORY_LEN {
        return Err(TrajectoryError::TooLong(poses.len()));
    }
    Ok(Trajectory { house_id: house.id.clone(), video_id: video_id.to_string(), poses })
}

/// Keeps one uniformly chosen element from each consecutive chunk of four.
pub fn subsample_frames<T: Clone, R: Rng + ?Sized>(frames: &[T], rng: &mut R) -> Result<Vec<T>, TrajectoryError> {
    Ok(subsample_indices(frames.len(), rng)?.into_iter().map(|i| frames[i].clone()).collect())
}

pub fn subsample_indices<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Vec<usize>, TrajectoryError> {
    if len == 0 {
        return Err(TrajectoryError::Empty);
    }
    Ok((0..len)
        .step_by(SUBSAMPLE_CHUNK)
        .map(|lo| rng.random_range(lo..(lo + SUBSAMPLE_CHUNK).min(len)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_from_seed;
    use crate::scene::fixtures::row_house;
    use crate::scene::Grid;
    use std::collections::BTreeSet;

    #[test]
    fn endpoints_in_distinct_rooms() {
        let h = row_house(&["kitchen", "bedroom"], 3, 3, true);
        let mut rng = stream_from_seed(1);
        for _ in 0..1000 {
            let (a, b) = sample_endpoints(&h, &mut rng).unwrap();
            assert!(h.grid.is_walkable(a) && h.grid.is_walkable(b));
            assert_ne!(h.room_at(a).unwrap(), h.room_at(b).unwrap());
        }
    }

    #[test]
    fn one_room_house_has_no_endpoints() {
        let h = row_house(&["kitchen"], 3, 3, false);
        assert_eq!(sample_endpoints(&h, &mut stream_from_seed(1)), Err(TrajectoryError::TooFewRooms(1)));
    }

    #[test]
    fn every_room_pair_gets_sampled() {
        let h = row_house(&["a", "b", "c", "d", "e", "f", "g", "h"], 2, 2, true);
        let mut rng = stream_from_seed(2);
        let mut pairs = BTreeSet::new();
        for _ in 0..10_000 {
            let (a, b) = sample_endpoints(&h, &mut rng).unwrap();
            let (ra, rb) = (h.room_at(a).unwrap(), h.room_at(b).unwrap());
            pairs.insert((ra.min(rb), ra.max(rb)));
        }
        assert_eq!(pairs.len(), 28);
    }

    #[test]
    fn trivial_paths() {
        let h = row_house(&["kitchen"], 3, 3, false);
        let c = Cell::new(1, 1);
        assert_eq!(shortest_path(&h, c, c).unwrap(), vec![c]);
        assert_eq!(shortest_path(&h, c, Cell::new(2, 1)).unwrap(), vec![c, Cell::new(2, 1)]);
        assert_eq!(shortest_path(&h, c, Cell::new(0, 0)), Err(TrajectoryError::NotWalkable(Cell::new(0, 0))));
    }

    #[test]
    fn unreachable_goal() {
        let h = row_house(&["kitchen", "bedroom"], 3, 3, false);
        assert!(matches!(shortest_path(&h, Cell::new(1, 1), Cell::new(5, 1)), Err(TrajectoryError::NoPath(..))));
    }

    #[test]
    fn tie_break_prefers_north_then_east() {
        let mut h = row_house(&["kitchen"], 3, 3, false);
        h.grid = Grid::from_rows(&["#####".into(), "#...#".into(), "#...#".into(), "#...#".into(), "#####".into()])
            .unwrap();
        let p = shortest_path(&h, Cell::new(1, 3), Cell::new(3, 1)).unwrap();
        assert_eq!(p, vec![Cell::new(1, 3), Cell::new(1, 2), Cell::new(1, 1), Cell::new(2, 1), Cell::new(3, 1)]);
    }

    #[test]
    fn straight_and_l_shaped_trajectories() {
        let h = row_house(&["kitchen"], 5, 5, false);
        let straight: Vec<Cell> = (1..=5).map(|x| Cell::new(x, 2)).collect();
        let t = path_to_trajectory(&h, "v", &straight).unwrap();
        assert_eq!(t.len(), 5);
        assert!(t.poses.iter().all(|p| p.heading == Heading::E));

        let l = vec![Cell::new(1, 1), Cell::new(2, 1), Cell::new(3, 1), Cell::new(3, 2), Cell::new(3, 3)];
        let t = path_to_trajectory(&h, "v", &l).unwrap();
        assert_eq!(t.len(), 6);
        assert_eq!(t.poses[3], Pose { cell: Cell::new(3, 1), heading: Heading::S });
    }

    #[test]
    fn broken_paths_are_rejected() {
        let h = row_house(&["kitchen"], 5, 5, false);
        let p = vec![Cell::new(1, 1), Cell::new(3, 1)];
        assert_eq!(path_to_trajectory(&h, "v", &p), Err(TrajectoryError::BrokenPath(1)));
        assert_eq!(path_to_trajectory(&h, "v", &[]), Err(TrajectoryError::Empty));
    }

    #[test]
    fn subsample_examples() {
        let mut rng = stream_from_seed(3);
        let v: Vec<usize> = (0..140).collect();
        assert_eq!(subsample_frames(&v, &mut rng).unwrap().len(), 35);
        assert_eq!(subsample_frames(&[9], &mut rng).unwrap(), vec![9]);
        assert_eq!(subsample_frames::<u8, _>(&[], &mut rng), Err(TrajectoryError::Empty));
        let six: Vec<usize> = (0..6).collect();
        let mut firsts = BTreeSet::new();
        let mut seconds = BTreeSet::new();
        for _ in 0..10_000 {
            let s = subsample_frames(&six, &mut rng).unwrap();
            assert_eq!(s.len(), 2);
            firsts.insert(s[0]);
            seconds.insert(s[1]);
        }
        assert_eq!(firsts, (0..4).collect());
        assert_eq!(seconds, (4..6).collect());
    }
}
