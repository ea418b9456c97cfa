use crate::scenario::{Grid, Pos};

/// Which agent, if any, stands on each cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occupancy {
    width: usize,
    height: usize,
    cells: Vec<Option<usize>>,
}

impl Occupancy {
    pub fn new(g: &Grid) -> Self {
        Self {
            width: g.width(),
            height: g.height(),
            cells: vec![None; g.len()],
        }
    }

    fn index(&self, p: Pos) -> usize {
        p.y as usize * self.width + p.x as usize
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, p: Pos) -> Option<usize> {
        self.cells[self.index(p)]
    }

    pub fn is_occupied(&self, p: Pos) -> bool {
        self.get(p).is_some()
    }

    /// Places `agent` on `p`.
    ///
    /// Panics if another agent already stands there.
    pub fn place(&mut self, p: Pos, agent: usize) {
        let i = self.index(p);
        if let Some(other) = self.cells[i] {
            panic!("exclusion violated: agent {agent} moved onto {p} held by agent {other}");
        }
        self.cells[i] = Some(agent);
    }

    pub fn clear(&mut self, p: Pos) -> Option<usize> {
        let i = self.index(p);
        self.cells[i].take()
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn cells(&self) -> &[Option<usize>] {
        &self.cells
    }
}
