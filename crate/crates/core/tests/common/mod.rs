#![allow(dead_code)]

use std::f64::consts::SQRT_2;

use fast_core::scenario::{parse_scenario, Grid, Pos, ScenarioSpec};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Closed rectangular hall with a single exit cell at (0, 1).
pub fn hall_text(w: usize, h: usize) -> String {
    let mut s = String::new();
    for y in 0..h {
        for x in 0..w {
            let boundary = x == 0 || y == 0 || x + 1 == w || y + 1 == h;
            s.push(if x == 0 && y == 1 {
                'E'
            } else if boundary {
                'W'
            } else {
                '.'
            });
        }
        s.push('\n');
    }
    s
}

pub fn hall(w: usize, h: usize) -> Grid {
    parse_scenario(&hall_text(w, h)).unwrap().grid
}

pub fn bundled(name: &str) -> String {
    let path = format!("{}/scenarios/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// Random closed grid rows: boundary walls with 1–3 exit cells on the
/// boundary, interior walls with probability `wall_p`.
pub fn random_grid_rows(rng: &mut ChaCha8Rng, w: usize, h: usize, wall_p: f64) -> Vec<Vec<char>> {
    let mut rows: Vec<Vec<char>> = (0..h)
        .map(|y| {
            (0..w)
                .map(|x| {
                    let boundary = x == 0 || y == 0 || x + 1 == w || y + 1 == h;
                    if boundary || rng.random_bool(wall_p) {
                        'W'
                    } else {
                        '.'
                    }
                })
                .collect()
        })
        .collect();
    let mut boundary: Vec<(usize, usize)> = Vec::new();
    for x in 1..w - 1 {
        boundary.push((x, 0));
        boundary.push((x, h - 1));
    }
    for y in 1..h - 1 {
        boundary.push((0, y));
        boundary.push((w - 1, y));
    }
    let n_exits = rng.random_range(1..=3);
    for &(x, y) in boundary.choose_multiple(rng, n_exits) {
        rows[y][x] = 'E';
    }
    rows
}

pub fn rows_to_text(rows: &[Vec<char>]) -> String {
    rows.iter()
        .map(|r| r.iter().collect::<String>() + "\n")
        .collect()
}

/// Random scenario with agents on `density` of the floor cells that can
/// reach some exit, each agent with a random profile.
pub fn random_crowd(seed: u64, w: usize, h: usize, density: f64) -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let rows = random_grid_rows(&mut rng, w, h, 0.12);
        let Ok(empty) = parse_scenario(&rows_to_text(&rows)) else {
            continue;
        };
        let g = &empty.grid;
        let fields: Vec<_> = (0..g.exit_count())
            .map(|e| fast_core::static_field::compute_static_field(g, e))
            .collect();
        let mut floor: Vec<Pos> = g
            .positions()
            .filter(|&p| {
                g.kind(p) == fast_core::CellKind::Floor
                    && fields.iter().any(|f| f.distance_at(p).is_finite())
            })
            .collect();
        if floor.len() < 20 {
            continue;
        }
        floor.shuffle(&mut rng);
        let n = (floor.len() as f64 * density).round() as usize;
        let mut text = rows_to_text(&rows);
        let n_profiles = 3;
        for k in 0..n_profiles {
            text += &format!(
                "profile p{k} v_max={} k_S={:.3} k_D={:.3} k_I={:.3} k_W={:.3} k_P={:.3} k_E={:.3} exits=all\n",
                rng.random_range(1..=5),
                rng.random_range(0.0..4.0),
                rng.random_range(-1.0..2.0),
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..3.0),
            );
        }
        for p in &floor[..n] {
            text += &format!(
                "agent {} {} p{}\n",
                p.x,
                p.y,
                rng.random_range(0..n_profiles)
            );
        }
        return parse_scenario(&text).expect("generated scenario is valid");
    }
}

/// Bellman-style relaxation to a fixpoint over the Moore graph with the
/// same no-corner-cutting rule, written independently of the Dijkstra code.
pub fn relaxation_oracle(g: &Grid, exit_id: usize) -> Vec<f64> {
    let (w, h) = (g.width() as i32, g.height() as i32);
    let idx = |x: i32, y: i32| (y * w + x) as usize;
    let wall =
        |x: i32, y: i32| x < 0 || y < 0 || x >= w || y >= h || g.cells()[idx(x, y)].is_wall();
    let mut d = vec![f64::INFINITY; g.len()];
    for (i, c) in g.cells().iter().enumerate() {
        if c.exit_id() == Some(exit_id) {
            d[i] = 0.0;
        }
    }
    loop {
        let mut changed = false;
        for y in 0..h {
            for x in 0..w {
                if wall(x, y) {
                    continue;
                }
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if (dx, dy) == (0, 0) || wall(x + dx, y + dy) {
                            continue;
                        }
                        let diagonal = dx != 0 && dy != 0;
                        if diagonal && wall(x + dx, y) && wall(x, y + dy) {
                            continue;
                        }
                        let cost = if diagonal { SQRT_2 } else { 1.0 };
                        let cand = d[idx(x + dx, y + dy)] + cost;
                        if cand < d[idx(x, y)] - 1e-15 {
                            d[idx(x, y)] = cand;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return d;
        }
    }
}

/// Two-sided exact binomial test p-value.
pub fn binomial_two_sided_p(k: u64, n: u64, p: f64) -> f64 {
    use statrs::distribution::{Binomial, DiscreteCDF};
    let b = Binomial::new(p, n).unwrap();
    let lower = b.cdf(k);
    let upper = if k == 0 { 1.0 } else { b.sf(k - 1) };
    (2.0 * lower.min(upper)).min(1.0)
}

/// Chi-square goodness of fit p-value of `counts` against `expected`.
pub fn chi_square_p(counts: &[u64], expected: &[f64]) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let stat: f64 = counts
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    ChiSquared::new((counts.len() - 1) as f64).unwrap().sf(stat)
}
