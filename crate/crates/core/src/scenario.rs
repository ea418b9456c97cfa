//! Lattice world: cell kinds, scenario files, and neighborhood enumeration.
//!
//! The scenario text format is line based. Lines starting with `%` are
//! comments; grid rows use `W`, `.`, `E` and `a` (floor with a spawn of the
//! `default` profile). After the grid, `profile` and `agent` directives may
//! follow:
//!
//! ```text
//! profile slow v_max=2 k_S=1.5 k_D=0.3 k_I=0.5 k_W=0.3 k_P=0.3 k_E=1 exits=0,2
//! agent 4 7 slow
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::static_field;

/// Name of the profile used by `a` cells in the grid.
pub const DEFAULT_PROFILE: &str = "default";

/// Lattice position. `x` is the column, `y` the row, origin top-left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    /// Squared Euclidean distance.
    pub fn dist2(self, other: Pos) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Pos) -> f64 {
        (self.dist2(other) as f64).sqrt()
    }

    pub fn chebyshev(self, other: Pos) -> u32 {
        (self.x - other.x)
            .unsigned_abs()
            .max((self.y - other.y).unsigned_abs())
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Wall,
    Floor,
    Exit(usize),
}

impl CellKind {
    pub fn is_wall(self) -> bool {
        matches!(self, CellKind::Wall)
    }

    pub fn exit_id(self) -> Option<usize> {
        match self {
            CellKind::Exit(id) => Some(id),
            _ => None,
        }
    }
}

/// Row-major lattice of cell kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    width: usize,
    height: usize,
    cells: Vec<CellKind>,
    exit_count: usize,
}

impl Grid {
    /// Builds a grid from row-major cells. Exit ids must already be
    /// contiguous from 0; no geometric validation happens here.
    pub fn from_cells(width: usize, height: usize, cells: Vec<CellKind>) -> Self {
        assert_eq!(
            cells.len(),
            width * height,
            "cell count does not match dimensions"
        );
        let exit_count = cells
            .iter()
            .filter_map(|c| c.exit_id())
            .max()
            .map_or(0, |m| m + 1);
        Self {
            width,
            height,
            cells,
            exit_count,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn exit_count(&self) -> usize {
        self.exit_count
    }

    pub fn contains(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.width && (p.y as usize) < self.height
    }

    /// Row-major index of an in-grid position.
    pub fn index(&self, p: Pos) -> usize {
        debug_assert!(self.contains(p), "{p} outside grid");
        p.y as usize * self.width + p.x as usize
    }

    pub fn pos(&self, index: usize) -> Pos {
        Pos::new((index % self.width) as i32, (index / self.width) as i32)
    }

    pub fn get(&self, p: Pos) -> Option<CellKind> {
        self.contains(p).then(|| self.cells[self.index(p)])
    }

    /// Kind of an in-grid cell.
    pub fn kind(&self, p: Pos) -> CellKind {
        self.cells[self.index(p)]
    }

    pub fn cells(&self) -> &[CellKind] {
        &self.cells
    }

    /// Out-of-grid positions count as walls.
    pub fn is_wall(&self, p: Pos) -> bool {
        self.get(p).is_none_or(CellKind::is_wall)
    }

    pub fn positions(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..self.cells.len()).map(|i| self.pos(i))
    }

    pub fn exit_cells(&self, exit_id: usize) -> impl Iterator<Item = Pos> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(move |(_, c)| **c == CellKind::Exit(exit_id))
            .map(|(i, _)| self.pos(i))
    }

    /// True when a diagonal step from `from` to `to` would squeeze between two
    /// wall cells.
    pub fn cuts_corner(&self, from: Pos, to: Pos) -> bool {
        from.x != to.x
            && from.y != to.y
            && self.is_wall(Pos::new(to.x, from.y))
            && self.is_wall(Pos::new(from.x, to.y))
    }
}

/// Set of exits a profile may use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AllowedExits {
    All,
    Only(Vec<usize>),
}

impl AllowedExits {
    pub fn resolve(&self, exit_count: usize) -> Vec<usize> {
        match self {
            AllowedExits::All => (0..exit_count).collect(),
            AllowedExits::Only(ids) => ids.clone(),
        }
    }
}

/// Per-agent parameters shared by all spawns of one profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub v_max: u32,
    pub k_s: f64,
    pub k_d: f64,
    pub k_i: f64,
    pub k_w: f64,
    pub k_p: f64,
    pub k_e: f64,
    pub exits: AllowedExits,
}

impl Default for Profile {
    fn default() -> Self {
        Self {
            v_max: 3,
            k_s: 1.0,
            k_d: 0.3,
            k_i: 0.5,
            k_w: 0.3,
            k_p: 0.3,
            k_e: 1.0,
            exits: AllowedExits::All,
        }
    }
}

impl Profile {
    /// Sets one `key=value` parameter using the scenario-file key names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let real = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| format!("`{key}` expects a number, got `{v}`"))
        };
        match key {
            "v_max" => {
                self.v_max = value
                    .parse()
                    .map_err(|_| format!("`v_max` expects a positive integer, got `{value}`"))?
            }
            "k_S" => self.k_s = real(value)?,
            "k_D" => self.k_d = real(value)?,
            "k_I" => self.k_i = real(value)?,
            "k_W" => self.k_w = real(value)?,
            "k_P" => self.k_p = real(value)?,
            "k_E" => self.k_e = real(value)?,
            "exits" => {
                self.exits = if value == "all" {
                    AllowedExits::All
                } else {
                    let ids = value
                        .split(',')
                        .map(|s| s.trim().parse::<usize>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| format!("bad exit list `{value}`"))?;
                    AllowedExits::Only(ids)
                }
            }
            _ => return Err(format!("unknown profile key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.v_max < 1 {
            return Err("v_max must be at least 1".into());
        }
        for (name, k) in [
            ("k_S", self.k_s),
            ("k_I", self.k_i),
            ("k_W", self.k_w),
            ("k_P", self.k_p),
            ("k_E", self.k_e),
        ] {
            if !k.is_finite() || k < 0.0 {
                return Err(format!("{name} must be finite and non-negative, got {k}"));
            }
        }
        if !self.k_d.is_finite() {
            return Err(format!("k_D must be finite, got {}", self.k_d));
        }
        if let AllowedExits::Only(ids) = &self.exits {
            if ids.is_empty() {
                return Err("exit list is empty".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spawn {
    pub pos: Pos,
    pub profile: String,
}

/// A validated scenario. Spawns are kept sorted in row-major order of their
/// positions; agent ids follow that order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub grid: Grid,
    pub spawns: Vec<Spawn>,
    pub profiles: BTreeMap<String, Profile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("no grid rows")]
    NoGrid,
    #[error("row has {found} cells, expected {expected}")]
    RaggedRow { expected: usize, found: usize },
    #[error("unknown character `{0}`")]
    UnknownChar(char),
    #[error("grid row after profile/agent lines")]
    GridAfterDirective,
    #[error("no exit cell")]
    NoExit,
    #[error("no floor cell, agents cannot exist")]
    NoFloor,
    #[error("boundary cell is open (must be wall or exit)")]
    OpenBoundary,
    #[error("malformed directive: {0}")]
    BadDirective(String),
    #[error("invalid profile `{name}`: {reason}")]
    InvalidProfile { name: String, reason: String },
    #[error("profile `{0}` defined twice")]
    DuplicateProfile(String),
    #[error("unknown profile `{0}`")]
    UnknownProfile(String),
    #[error("profile `{profile}` references unknown exit {exit}")]
    UnknownExit { profile: String, exit: usize },
    #[error("spawn outside the grid")]
    SpawnOutOfBounds,
    #[error("spawn on a non-floor cell")]
    SpawnOnNonFloor,
    #[error("two spawns share one cell")]
    DuplicateSpawn,
    #[error("none of the allowed exits is reachable from the spawn")]
    UnreachableExits,
}

/// Scenario parse or validation failure. `line` and `column` are 1-based;
/// 0 means the error concerns the file as a whole.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (0, _) => write!(f, "{}", self.kind),
            (l, 0) => write!(f, "line {l}: {}", self.kind),
            (l, c) => write!(f, "line {l}, column {c}: {}", self.kind),
        }
    }
}

fn err(line: usize, column: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, column, kind }
}

#[derive(Clone, Copy, PartialEq)]
enum RawCell {
    Wall,
    Floor,
    Exit,
    Spawn,
}

pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ParseError> {
    let mut rows: Vec<(usize, Vec<RawCell>)> = Vec::new();
    let mut profile_lines: Vec<(usize, String, Profile)> = Vec::new();
    let mut spawn_lines: Vec<(usize, Pos, String)> = Vec::new();
    let mut in_directives = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.starts_with('%') || line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("profile") => {
                in_directives = true;
                let name = tokens.next().ok_or_else(|| {
                    err(
                        lineno,
                        0,
                        ParseErrorKind::BadDirective("profile without a name".into()),
                    )
                })?;
                let mut profile = Profile::default();
                for tok in tokens {
                    let (key, value) = tok.split_once('=').ok_or_else(|| {
                        err(
                            lineno,
                            0,
                            ParseErrorKind::BadDirective(format!(
                                "expected key=value, got `{tok}`"
                            )),
                        )
                    })?;
                    profile.set(key, value).map_err(|reason| {
                        err(
                            lineno,
                            0,
                            ParseErrorKind::InvalidProfile {
                                name: name.to_string(),
                                reason,
                            },
                        )
                    })?;
                }
                profile_lines.push((lineno, name.to_string(), profile));
            }
            Some("agent") => {
                in_directives = true;
                let args: Vec<&str> = tokens.collect();
                let [x, y, profile] = args[..] else {
                    return Err(err(
                        lineno,
                        0,
                        ParseErrorKind::BadDirective("expected `agent <x> <y> <profile>`".into()),
                    ));
                };
                let coord = |s: &str| {
                    s.parse::<i32>().map_err(|_| {
                        err(
                            lineno,
                            0,
                            ParseErrorKind::BadDirective(format!("bad coordinate `{s}`")),
                        )
                    })
                };
                spawn_lines.push((lineno, Pos::new(coord(x)?, coord(y)?), profile.to_string()));
            }
            _ => {
                if in_directives {
                    return Err(err(lineno, 1, ParseErrorKind::GridAfterDirective));
                }
                let mut row = Vec::with_capacity(line.len());
                for (col, ch) in line.chars().enumerate() {
                    row.push(match ch {
                        'W' => RawCell::Wall,
                        '.' => RawCell::Floor,
                        'E' => RawCell::Exit,
                        'a' => RawCell::Spawn,
                        other => {
                            return Err(err(lineno, col + 1, ParseErrorKind::UnknownChar(other)))
                        }
                    });
                }
                if let Some((_, first)) = rows.first() {
                    if first.len() != row.len() {
                        return Err(err(
                            lineno,
                            row.len().min(first.len()) + 1,
                            ParseErrorKind::RaggedRow {
                                expected: first.len(),
                                found: row.len(),
                            },
                        ));
                    }
                }
                rows.push((lineno, row));
            }
        }
    }

    let Some((_, first)) = rows.first() else {
        return Err(err(0, 0, ParseErrorKind::NoGrid));
    };
    let width = first.len();
    let height = rows.len();
    let raw: Vec<RawCell> = rows.iter().flat_map(|(_, r)| r.iter().copied()).collect();
    let line_of = |y: usize| rows[y].0;

    for y in 0..height {
        for x in 0..width {
            let boundary = x == 0 || y == 0 || x + 1 == width || y + 1 == height;
            if boundary && !matches!(raw[y * width + x], RawCell::Wall | RawCell::Exit) {
                return Err(err(line_of(y), x + 1, ParseErrorKind::OpenBoundary));
            }
        }
    }

    let cells = label_exits(width, height, &raw);
    let grid = Grid::from_cells(width, height, cells);
    if grid.exit_count() == 0 {
        return Err(err(0, 0, ParseErrorKind::NoExit));
    }
    if !grid.cells().contains(&CellKind::Floor) {
        return Err(err(0, 0, ParseErrorKind::NoFloor));
    }

    let mut profiles = BTreeMap::new();
    for (lineno, name, profile) in profile_lines {
        profile.validate().map_err(|reason| {
            err(
                lineno,
                0,
                ParseErrorKind::InvalidProfile {
                    name: name.clone(),
                    reason,
                },
            )
        })?;
        if let AllowedExits::Only(ids) = &profile.exits {
            if let Some(&bad) = ids.iter().find(|&&id| id >= grid.exit_count()) {
                return Err(err(
                    lineno,
                    0,
                    ParseErrorKind::UnknownExit {
                        profile: name,
                        exit: bad,
                    },
                ));
            }
        }
        if profiles.insert(name.clone(), profile).is_some() {
            return Err(err(lineno, 0, ParseErrorKind::DuplicateProfile(name)));
        }
    }
    profiles
        .entry(DEFAULT_PROFILE.to_string())
        .or_insert_with(Profile::default);

    // (line, column) of each spawn for error reporting
    let mut spawns: Vec<(Spawn, usize, usize)> = Vec::new();
    for (i, cell) in raw.iter().enumerate() {
        if *cell == RawCell::Spawn {
            let p = grid.pos(i);
            spawns.push((
                Spawn {
                    pos: p,
                    profile: DEFAULT_PROFILE.to_string(),
                },
                line_of(p.y as usize),
                p.x as usize + 1,
            ));
        }
    }
    for (lineno, pos, profile) in spawn_lines {
        match grid.get(pos) {
            None => return Err(err(lineno, 0, ParseErrorKind::SpawnOutOfBounds)),
            Some(CellKind::Floor) => {}
            Some(_) => return Err(err(lineno, 0, ParseErrorKind::SpawnOnNonFloor)),
        }
        if !profiles.contains_key(&profile) {
            return Err(err(lineno, 0, ParseErrorKind::UnknownProfile(profile)));
        }
        spawns.push((Spawn { pos, profile }, lineno, 0));
    }
    spawns.sort_by_key(|(s, ..)| (s.pos.y, s.pos.x));
    for pair in spawns.windows(2) {
        if pair[0].0.pos == pair[1].0.pos {
            return Err(err(pair[1].1, pair[1].2, ParseErrorKind::DuplicateSpawn));
        }
    }

    let spec = ScenarioSpec {
        grid,
        spawns: spawns.iter().map(|(s, ..)| s.clone()).collect(),
        profiles,
    };
    if let Some(i) = spec.first_stranded_spawn() {
        let (_, line, col) = &spawns[i];
        return Err(err(*line, *col, ParseErrorKind::UnreachableExits));
    }
    Ok(spec)
}

/// Numbers Moore-connected components of exit cells in scan order.
fn label_exits(width: usize, height: usize, raw: &[RawCell]) -> Vec<CellKind> {
    let mut cells: Vec<CellKind> = raw
        .iter()
        .map(|c| match c {
            RawCell::Wall => CellKind::Wall,
            RawCell::Floor | RawCell::Spawn => CellKind::Floor,
            // placeholder, relabelled below
            RawCell::Exit => CellKind::Exit(usize::MAX),
        })
        .collect();
    let mut next_id = 0;
    let mut stack = Vec::new();
    for start in 0..cells.len() {
        if cells[start] != CellKind::Exit(usize::MAX) {
            continue;
        }
        cells[start] = CellKind::Exit(next_id);
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % width) as i64, (i / width) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                        continue;
                    }
                    let j = ny as usize * width + nx as usize;
                    if cells[j] == CellKind::Exit(usize::MAX) {
                        cells[j] = CellKind::Exit(next_id);
                        stack.push(j);
                    }
                }
            }
        }
        next_id += 1;
    }
    cells
}

impl ScenarioSpec {
    /// Index of the first spawn from which none of its profile's exits can
    /// be reached.
    fn first_stranded_spawn(&self) -> Option<usize> {
        let fields: Vec<_> = (0..self.grid.exit_count())
            .map(|e| static_field::compute_static_field(&self.grid, e))
            .collect();
        self.spawns.iter().position(|s| {
            let profile = &self.profiles[&s.profile];
            profile
                .exits
                .resolve(self.grid.exit_count())
                .iter()
                .all(|&e| !fields[e].distance_at(s.pos).is_finite())
        })
    }

    /// Renders the scenario back into the text format. `default` spawns are
    /// written as `a` cells, all others as `agent` lines.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let spawn_at: BTreeMap<Pos, &str> = self
            .spawns
            .iter()
            .map(|s| (s.pos, s.profile.as_str()))
            .collect();
        for y in 0..self.grid.height() {
            for x in 0..self.grid.width() {
                let p = Pos::new(x as i32, y as i32);
                out.push(match self.grid.kind(p) {
                    CellKind::Wall => 'W',
                    CellKind::Exit(_) => 'E',
                    CellKind::Floor if spawn_at.get(&p) == Some(&DEFAULT_PROFILE) => 'a',
                    CellKind::Floor => '.',
                });
            }
            out.push('\n');
        }
        for (name, p) in &self.profiles {
            let exits = match &p.exits {
                AllowedExits::All => "all".to_string(),
                AllowedExits::Only(ids) => ids
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            };
            let _ = writeln!(
                out,
                "profile {name} v_max={} k_S={} k_D={} k_I={} k_W={} k_P={} k_E={} exits={exits}",
                p.v_max, p.k_s, p.k_d, p.k_i, p.k_w, p.k_p, p.k_e
            );
        }
        for s in self.spawns.iter().filter(|s| s.profile != DEFAULT_PROFILE) {
            let _ = writeln!(out, "agent {} {} {}", s.pos.x, s.pos.y, s.profile);
        }
        out
    }
}

/// Global run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Per-quantum decay probability of the dynamic field.
    pub delta: f64,
    /// Per-quantum diffusion probability of the dynamic field.
    pub alpha: f64,
    /// Wall influence cutoff in cells.
    pub w_max: f64,
    pub max_rounds: u32,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            delta: 0.3,
            alpha: 0.3,
            w_max: 3.0,
            max_rounds: 10_000,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(format!("delta must lie in [0, 1], got {}", self.delta));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if self.w_max.is_nan() || self.w_max < 0.0 {
            return Err(format!("w_max must be non-negative, got {}", self.w_max));
        }
        if self.max_rounds < 1 {
            return Err("max_rounds must be at least 1".into());
        }
        Ok(())
    }
}

/// In-grid cells at Chebyshev distance 1 from `p`.
pub fn moore_neighbors(p: Pos, g: &Grid) -> impl Iterator<Item = Pos> + '_ {
    const OFFSETS: [(i32, i32); 8] = [
        (-1, -1),
        (0, -1),
        (1, -1),
        (-1, 0),
        (1, 0),
        (-1, 1),
        (0, 1),
        (1, 1),
    ];
    OFFSETS
        .iter()
        .map(move |&(dx, dy)| p.offset(dx, dy))
        .filter(move |q| g.contains(*q))
}

/// Non-wall cells within Euclidean distance `v_max` of `p`, including `p`,
/// in row-major order.
pub fn neighborhood(p: Pos, v_max: u32, g: &Grid) -> Vec<Pos> {
    let r = v_max as i32;
    let r2 = (r as i64) * (r as i64);
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let q = p.offset(dx, dy);
            if p.dist2(q) <= r2 && g.get(q).is_some_and(|k| !k.is_wall()) {
                out.push(q);
            }
        }
    }
    out
}
