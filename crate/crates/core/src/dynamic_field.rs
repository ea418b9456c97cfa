//! Vector-valued trace field left behind by moving agents.
//!
//! Both components are stored as signed integer counts of unit quanta. Each
//! update destroys every quantum with probability `delta`; survivors hop with
//! probability `alpha` to a uniformly chosen von Neumann neighbor, keeping
//! their component and sign. Quanta that hop into a wall are lost.
//!
//! Per-cell updates use binomial draws over the quanta count, which is the
//! same distribution as deciding every quantum separately.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::rng::RoundStreams;
use crate::scenario::{Grid, Pos};

const VON_NEUMANN: [(i32, i32); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicField {
    width: usize,
    height: usize,
    dx: Vec<i64>,
    dy: Vec<i64>,
}

impl DynamicField {
    pub fn new(g: &Grid) -> Self {
        Self {
            width: g.width(),
            height: g.height(),
            dx: vec![0; g.len()],
            dy: vec![0; g.len()],
        }
    }

    fn index(&self, p: Pos) -> usize {
        p.y as usize * self.width + p.x as usize
    }

    pub fn field_at(&self, p: Pos) -> (i64, i64) {
        let i = self.index(p);
        (self.dx[i], self.dy[i])
    }

    pub fn set(&mut self, p: Pos, value: (i64, i64)) {
        let i = self.index(p);
        self.dx[i] = value.0;
        self.dy[i] = value.1;
    }

    pub fn dx(&self) -> &[i64] {
        &self.dx
    }

    pub fn dy(&self) -> &[i64] {
        &self.dy
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Adds each move's displacement at its starting cell.
    pub fn record_moves(&mut self, moves: impl IntoIterator<Item = (Pos, Pos)>) {
        for (from, to) in moves {
            let i = self.index(from);
            self.dx[i] += (to.x - from.x) as i64;
            self.dy[i] += (to.y - from.y) as i64;
        }
    }

    /// One stochastic decay and diffusion update. Cells are processed in
    /// row-major order, each drawing from its own stream, so the outcome does
    /// not depend on traversal order.
    pub fn decay_and_diffuse(&mut self, g: &Grid, delta: f64, alpha: f64, streams: &RoundStreams) {
        debug_assert_eq!((g.width(), g.height()), (self.width, self.height));
        let mut next_dx = vec![0i64; self.dx.len()];
        let mut next_dy = vec![0i64; self.dy.len()];
        for i in 0..self.dx.len() {
            if self.dx[i] == 0 && self.dy[i] == 0 {
                continue;
            }
            let mut rng = streams.cell(i);
            let p = g.pos(i);
            update_component(g, p, self.dx[i], delta, alpha, &mut rng, &mut next_dx);
            update_component(g, p, self.dy[i], delta, alpha, &mut rng, &mut next_dy);
        }
        for (i, cell) in g.cells().iter().enumerate() {
            if cell.is_wall() {
                next_dx[i] = 0;
                next_dy[i] = 0;
            }
        }
        self.dx = next_dx;
        self.dy = next_dy;
    }
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p)
            .expect("probability in (0, 1)")
            .sample(rng)
    }
}

fn update_component<R: Rng + ?Sized>(
    g: &Grid,
    p: Pos,
    value: i64,
    delta: f64,
    alpha: f64,
    rng: &mut R,
    out: &mut [i64],
) {
    if value == 0 {
        return;
    }
    let sign = value.signum();
    let survivors = binomial(value.unsigned_abs(), 1.0 - delta, rng);
    let mut movers = binomial(survivors, alpha, rng);
    out[g.index(p)] += sign * (survivors - movers) as i64;

    // multinomial split over the four directions by sequential binomials
    for (k, &(ox, oy)) in VON_NEUMANN.iter().enumerate() {
        let remaining_dirs = (VON_NEUMANN.len() - k) as f64;
        let hop = if k + 1 == VON_NEUMANN.len() {
            movers
        } else {
            binomial(movers, 1.0 / remaining_dirs, rng)
        };
        movers -= hop;
        let q = p.offset(ox, oy);
        if hop > 0 && !g.is_wall(q) {
            out[g.index(q)] += sign * hop as i64;
        }
    }
}
