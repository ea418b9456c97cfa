//! Geodesic distance fields on the Moore lattice (orthogonal steps cost 1,
//! diagonal steps cost √2).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::scenario::{moore_neighbors, CellKind, Grid, Pos};

/// Distance from every cell to one exit. Walls and cells cut off from the
/// exit hold `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticField {
    exit_id: usize,
    width: usize,
    dist: Vec<f64>,
}

impl StaticField {
    pub fn exit_id(&self) -> usize {
        self.exit_id
    }

    pub fn distance_at(&self, p: Pos) -> f64 {
        self.dist[p.y as usize * self.width + p.x as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.dist
    }
}

/// Distance to the closest wall cell, clamped at `w_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct WallDistanceField {
    w_max: f64,
    width: usize,
    wdist: Vec<f64>,
}

impl WallDistanceField {
    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn distance_at(&self, p: Pos) -> f64 {
        self.wdist[p.y as usize * self.width + p.x as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.wdist
    }
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, index breaks ties for a stable pop order
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn step_cost(from: Pos, to: Pos) -> f64 {
    if from.x != to.x && from.y != to.y {
        std::f64::consts::SQRT_2
    } else {
        1.0
    }
}

fn dijkstra(
    g: &Grid,
    sources: impl Iterator<Item = Pos>,
    passable: impl Fn(Pos) -> bool,
    edge_allowed: impl Fn(Pos, Pos) -> bool,
) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut heap = BinaryHeap::new();
    for s in sources {
        let i = g.index(s);
        dist[i] = 0.0;
        heap.push(Entry {
            dist: 0.0,
            index: i,
        });
    }
    while let Some(Entry { dist: d, index }) = heap.pop() {
        if d > dist[index] {
            continue;
        }
        let p = g.pos(index);
        for q in moore_neighbors(p, g) {
            if !passable(q) || !edge_allowed(p, q) {
                continue;
            }
            let j = g.index(q);
            let nd = d + step_cost(p, q);
            if nd < dist[j] {
                dist[j] = nd;
                heap.push(Entry { dist: nd, index: j });
            }
        }
    }
    dist
}

/// Shortest Moore-path distance to the cells of `exit_id`. Diagonal steps
/// between two wall cells are not allowed.
pub fn compute_static_field(g: &Grid, exit_id: usize) -> StaticField {
    let dist = dijkstra(
        g,
        g.exit_cells(exit_id),
        |q| !g.kind(q).is_wall(),
        |p, q| !g.cuts_corner(p, q),
    );
    StaticField {
        exit_id,
        width: g.width(),
        dist,
    }
}

/// Multi-source distance from all wall cells, clamped to `w_max`. Exit cells
/// are not sources.
pub fn compute_wall_distance(g: &Grid, w_max: f64) -> WallDistanceField {
    let sources = g
        .cells()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c == CellKind::Wall)
        .map(|(i, _)| g.pos(i));
    let mut wdist = dijkstra(g, sources, |_| true, |_, _| true);
    for d in &mut wdist {
        *d = d.min(w_max);
    }
    WallDistanceField {
        w_max,
        width: g.width(),
        wdist,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;
    use std::f64::consts::SQRT_2;

    fn grid(text: &str) -> Grid {
        parse_scenario(text).unwrap().grid
    }

    #[test]
    fn open_square_distances() {
        // 3x3 open interior with the exit in its top-left corner
        let g = grid("WWWWW\nWE..W\nW...W\nW...W\nWWWWW\n");
        let f = compute_static_field(&g, 0);
        assert_eq!(f.distance_at(Pos::new(1, 1)), 0.0);
        assert!((f.distance_at(Pos::new(3, 3)) - 2.0 * SQRT_2).abs() < 1e-12);
        assert_eq!(f.distance_at(Pos::new(3, 1)), 2.0);
        assert!(f.distance_at(Pos::new(0, 0)).is_infinite());
    }

    #[test]
    fn no_corner_cutting() {
        // floor (1,2) touches (2,1) only diagonally between walls (1,1) and (2,2)
        let g = grid("WWWWW\nWW.EW\nW.W.W\nWWWWW\n");
        let f = compute_static_field(&g, 0);
        assert_eq!(f.distance_at(Pos::new(2, 1)), 1.0);
        assert!(f.distance_at(Pos::new(1, 2)).is_infinite());
    }

    #[test]
    fn wall_distance_examples() {
        let g = grid(
            "WWWWWWWWWWW\nW.........W\nW.........W\nW.........W\nW.........W\nW.........W\nW.........W\nW.........W\nW.........W\nW.........W\nWWWWWEWWWWW\n",
        );
        let wf = compute_wall_distance(&g, 3.0);
        assert_eq!(wf.distance_at(Pos::new(1, 5)), 1.0);
        assert_eq!(wf.distance_at(Pos::new(0, 0)), 0.0);
        assert_eq!(wf.distance_at(Pos::new(5, 5)), 3.0);
        // exit cells are not sources
        assert_eq!(wf.distance_at(Pos::new(5, 10)), 1.0);
        assert!(wf.values().iter().all(|&d| d <= 3.0));
    }

    #[test]
    fn diagonal_only_wall_neighbor() {
        // (2,2) has its only wall neighbor at (1,1), diagonally
        let g = grid("WWWWWWW\nWW....E\nW.....W\nW.....W\nWWWWWWW\n");
        let wf = compute_wall_distance(&g, f64::INFINITY);
        assert_eq!(wf.distance_at(Pos::new(2, 2)), SQRT_2);
    }
}
