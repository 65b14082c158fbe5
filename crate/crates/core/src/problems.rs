//! Benchmark load cases, supports and passive regions.
//!
//! Loads and supports are located geometrically on the mesh: the left edge is
//! the set of nodes at minimum x, and named points are picked from the bottom
//! and top zig-zag node rows.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fea::LoadSet;
use crate::mesh::{HexMesh, SQRT3};
use crate::optimizer::{ElementTag, PassiveMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Mbb,
    Multiload2,
    Multiload4,
    Passive,
    Custom,
}

impl ProblemKind {
    pub const NAMES: [&'static str; 5] = ["mbb", "multiload2", "multiload4", "passive", "custom"];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Mbb => "mbb",
            ProblemKind::Multiload2 => "multiload2",
            ProblemKind::Multiload4 => "multiload4",
            ProblemKind::Passive => "passive",
            ProblemKind::Custom => "custom",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mbb" => Ok(ProblemKind::Mbb),
            "multiload2" => Ok(ProblemKind::Multiload2),
            "multiload4" => Ok(ProblemKind::Multiload4),
            "passive" => Ok(ProblemKind::Passive),
            "custom" => Ok(ProblemKind::Custom),
            other => Err(Error::Problem(format!(
                "unknown problem {other:?}, expected one of {}",
                ProblemKind::NAMES.join(", ")
            ))),
        }
    }
}

/// A ready-to-optimize problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub kind: ProblemKind,
    pub loads: LoadSet,
    pub mask: PassiveMask,
}

impl Problem {
    pub fn mbb(mesh: &HexMesh) -> Result<Self> {
        Ok(Problem {
            kind: ProblemKind::Mbb,
            loads: mbb(mesh)?,
            mask: PassiveMask::all_active(mesh.nelem()),
        })
    }

    pub fn multiload(mesh: &HexMesh, ncases: usize) -> Result<Self> {
        let kind = match ncases {
            2 => ProblemKind::Multiload2,
            4 => ProblemKind::Multiload4,
            _ => return Err(Error::Problem(format!("multi-load problem has 2 or 4 cases, got {ncases}"))),
        };
        Ok(Problem {
            kind,
            loads: multiload(mesh, ncases)?,
            mask: PassiveMask::all_active(mesh.nelem()),
        })
    }

    pub fn passive(mesh: &HexMesh) -> Result<Self> {
        let (loads, mask) = passive_problem(mesh)?;
        Ok(Problem {
            kind: ProblemKind::Passive,
            loads,
            mask,
        })
    }

    /// Builds one of the built-in benchmarks; `Custom` needs [`CustomProblem`].
    pub fn build(kind: ProblemKind, mesh: &HexMesh) -> Result<Self> {
        match kind {
            ProblemKind::Mbb => Problem::mbb(mesh),
            ProblemKind::Multiload2 => Problem::multiload(mesh, 2),
            ProblemKind::Multiload4 => Problem::multiload(mesh, 4),
            ProblemKind::Passive => Problem::passive(mesh),
            ProblemKind::Custom => Err(Error::Problem("custom problems are built from a problem file".into())),
        }
    }
}

fn first_in_row(mesh: &HexMesh, row: usize) -> usize {
    mesh.node_row(row).start
}

fn last_in_row(mesh: &HexMesh, row: usize) -> usize {
    mesh.node_row(row).end - 1
}

fn top_row(mesh: &HexMesh) -> usize {
    mesh.node_row_count() - 1
}

fn x_dof(node: usize) -> usize {
    2 * node
}

fn y_dof(node: usize) -> usize {
    2 * node + 1
}

/// Half MBB beam: unit downward load at the top-left node, roller supports in
/// x along the left (symmetry) edge, vertical support at the bottom-right node.
pub fn mbb(mesh: &HexMesh) -> Result<LoadSet> {
    let load = first_in_row(mesh, top_row(mesh));
    let support = last_in_row(mesh, 0);
    let fixed = mesh
        .left_edge_nodes()
        .into_iter()
        .map(x_dof)
        .chain([y_dof(support)]);
    LoadSet::new(mesh.ndof(), vec![vec![(y_dof(load), -1.0)]], fixed)
}

/// Cantilever clamped along the left edge with up to four vertical point
/// loads, one per load case:
///
/// 1. −1 at the right end of the bottom node row,
/// 2. +1 at the right end of the top node row,
/// 3. +2 at the middle of the bottom node row,
/// 4. −2 at the middle of the top node row.
pub fn multiload(mesh: &HexMesh, ncases: usize) -> Result<LoadSet> {
    if ncases != 2 && ncases != 4 {
        return Err(Error::Problem(format!("multi-load problem has 2 or 4 cases, got {ncases}")));
    }
    let hnex = mesh.spec().hnex as f64;
    let top = top_row(mesh);
    let mid_x = hnex * SQRT3 / 2.0;
    let cases = [
        (last_in_row(mesh, 0), -1.0),
        (last_in_row(mesh, top), 1.0),
        (nearest_in_row(mesh, 0, mid_x), 2.0),
        (nearest_in_row(mesh, top, mid_x), -2.0),
    ];
    let forces = cases[..ncases]
        .iter()
        .map(|&(node, value)| vec![(y_dof(node), value)])
        .collect();
    LoadSet::new(mesh.ndof(), forces, clamp_left(mesh))
}

fn nearest_in_row(mesh: &HexMesh, row: usize, x: f64) -> usize {
    let coords = mesh.coords();
    mesh.node_row(row)
        .min_by(|&a, &b| (coords[a][0] - x).abs().total_cmp(&(coords[b][0] - x).abs()))
        .expect("node rows are never empty")
}

fn clamp_left(mesh: &HexMesh) -> Vec<usize> {
    mesh.left_edge_nodes()
        .into_iter()
        .flat_map(|n| [x_dof(n), y_dof(n)])
        .collect()
}

/// Passive tags from element centroids: void inside the circle centred at
/// `(xmax/3, ymax/2)` with radius `ymax/3`, solid inside the open box
/// `(0.7 xmax, 0.9 xmax) × (0.1 ymax, 0.3 ymax)`, where `xmax`, `ymax` are the
/// largest centroid coordinates.
pub fn passive_regions(mesh: &HexMesh) -> PassiveMask {
    let ct = mesh.centroids();
    let xmax = ct.iter().map(|c| c[0]).fold(f64::NEG_INFINITY, f64::max);
    let ymax = ct.iter().map(|c| c[1]).fold(f64::NEG_INFINITY, f64::max);
    let tags = ct
        .iter()
        .map(|c| {
            let in_circle = ((c[0] - xmax / 3.0).powi(2) + (c[1] - ymax / 2.0).powi(2)).sqrt() < ymax / 3.0;
            let in_box = c[0] > 0.7 * xmax && c[0] < 0.9 * xmax && c[1] > 0.1 * ymax && c[1] < 0.3 * ymax;
            if in_circle {
                ElementTag::Void
            } else if in_box {
                ElementTag::Solid
            } else {
                ElementTag::Active
            }
        })
        .collect();
    PassiveMask::from_tags(tags)
}

/// Cantilever with a void hole and a solid insert: unit downward load at the
/// right end of the bottom node row, left edge clamped.
pub fn passive_problem(mesh: &HexMesh) -> Result<(LoadSet, PassiveMask)> {
    let load = last_in_row(mesh, 0);
    let loads = LoadSet::new(mesh.ndof(), vec![vec![(y_dof(load), -1.0)]], clamp_left(mesh))?;
    Ok((loads, passive_regions(mesh)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    X,
    Y,
    Both,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Direction::X),
            "y" => Ok(Direction::Y),
            "xy" => Ok(Direction::Both),
            other => Err(Error::Problem(format!("direction must be x, y or xy, got {other:?}"))),
        }
    }
}

impl Direction {
    fn dofs(self, node: usize) -> Vec<usize> {
        match self {
            Direction::X => vec![x_dof(node)],
            Direction::Y => vec![y_dof(node)],
            Direction::Both => vec![x_dof(node), y_dof(node)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl FromStr for Edge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Edge::Left),
            "right" => Ok(Edge::Right),
            "bottom" => Ok(Edge::Bottom),
            "top" => Ok(Edge::Top),
            other => Err(Error::Problem(format!("edge must be left, right, bottom or top, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Circle { cx: f64, cy: f64, r: f64 },
    Box { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl Region {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Region::Circle { cx, cy, r } => (p[0] - cx).hypot(p[1] - cy) < r,
            Region::Box { x0, x1, y0, y1 } => p[0] > x0 && p[0] < x1 && p[1] > y0 && p[1] < y1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLoad {
    /// 0-based load case.
    pub case: usize,
    pub x: f64,
    pub y: f64,
    pub direction: Direction,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Edge(Edge, Direction),
    Node { x: f64, y: f64, direction: Direction },
}

/// User-defined problem read from a line-oriented `key = value` file.
///
/// ```text
/// # coordinates are in element edge lengths, origin at the bottom-left
/// load = 1 103.92 0.5 y -1        # case, x, y, direction, magnitude
/// clamp = left xy                 # edge (left/right/bottom/top), directions
/// support = 103.92 0.5 y          # single node, nearest to (x, y)
/// void_circle = 30 15 8           # cx cy r
/// solid_box = 70 90 2 6           # x0 x1 y0 y1
/// ```
///
/// Loads and node supports snap to the nearest mesh node; passive regions
/// test element centroids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CustomProblem {
    pub loads: Vec<PointLoad>,
    pub supports: Vec<Support>,
    pub voids: Vec<Region>,
    pub solids: Vec<Region>,
}

fn numbers(line: usize, fields: &[&str]) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .map_err(|_| Error::Problem(format!("line {line}: {f:?} is not a number")))
        })
        .collect()
}

impl CustomProblem {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    pub fn build(&self, mesh: &HexMesh) -> Result<Problem> {
        if self.loads.is_empty() {
            return Err(Error::Problem("custom problem defines no loads".into()));
        }
        let ncases = self.loads.iter().map(|l| l.case).max().unwrap_or(0) + 1;
        let mut forces = vec![Vec::new(); ncases];
        for l in &self.loads {
            if l.direction == Direction::Both {
                return Err(Error::Problem("a load acts along x or y, not both".into()));
            }
            let node = mesh.nearest_node(l.x, l.y);
            forces[l.case].push((l.direction.dofs(node)[0], l.magnitude));
        }
        if let Some(case) = forces.iter().position(|f| f.is_empty()) {
            return Err(Error::Problem(format!("load case {} is empty", case + 1)));
        }

        let [xmin, xmax, ymin, ymax] = mesh.bounds();
        let mut fixed = Vec::new();
        for s in &self.supports {
            match *s {
                Support::Edge(edge, dir) => {
                    for (n, p) in mesh.coords().iter().enumerate() {
                        let on = match edge {
                            Edge::Left => (p[0] - xmin).abs() < 1e-9,
                            Edge::Right => (p[0] - xmax).abs() < 1e-9,
                            Edge::Bottom => (p[1] - ymin).abs() < 1e-9,
                            Edge::Top => (p[1] - ymax).abs() < 1e-9,
                        };
                        if on {
                            fixed.extend(dir.dofs(n));
                        }
                    }
                }
                Support::Node { x, y, direction } => fixed.extend(direction.dofs(mesh.nearest_node(x, y))),
            }
        }
        if fixed.is_empty() {
            return Err(Error::Problem("custom problem defines no supports".into()));
        }
        let loads = LoadSet::new(mesh.ndof(), forces, fixed)?;

        let tags = mesh
            .centroids()
            .iter()
            .map(|&c| {
                if self.voids.iter().any(|r| r.contains(c)) {
                    ElementTag::Void
                } else if self.solids.iter().any(|r| r.contains(c)) {
                    ElementTag::Solid
                } else {
                    ElementTag::Active
                }
            })
            .collect();
        Ok(Problem {
            kind: ProblemKind::Custom,
            loads,
            mask: PassiveMask::from_tags(tags),
        })
    }
}

impl FromStr for CustomProblem {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut out = CustomProblem::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::Problem(format!("line {line}: expected key = value")))?;
            let fields: Vec<&str> = value.split_whitespace().collect();
            let expect = |n: usize| {
                if fields.len() == n {
                    Ok(())
                } else {
                    Err(Error::Problem(format!("line {line}: {} takes {n} values", key.trim())))
                }
            };
            match key.trim() {
                "load" => {
                    expect(5)?;
                    let case: usize = fields[0]
                        .parse()
                        .ok()
                        .filter(|&c| c >= 1)
                        .ok_or_else(|| Error::Problem(format!("line {line}: load case must be a positive integer")))?;
                    let v = numbers(line, &[fields[1], fields[2], fields[4]])?;
                    out.loads.push(PointLoad {
                        case: case - 1,
                        x: v[0],
                        y: v[1],
                        direction: fields[3].parse()?,
                        magnitude: v[2],
                    });
                }
                "clamp" => {
                    expect(2)?;
                    out.supports.push(Support::Edge(fields[0].parse()?, fields[1].parse()?));
                }
                "support" => {
                    expect(3)?;
                    let v = numbers(line, &fields[..2])?;
                    out.supports.push(Support::Node {
                        x: v[0],
                        y: v[1],
                        direction: fields[2].parse()?,
                    });
                }
                key @ ("void_circle" | "solid_circle") => {
                    expect(3)?;
                    let v = numbers(line, &fields)?;
                    let region = Region::Circle { cx: v[0], cy: v[1], r: v[2] };
                    if key == "void_circle" {
                        out.voids.push(region);
                    } else {
                        out.solids.push(region);
                    }
                }
                key @ ("void_box" | "solid_box") => {
                    expect(4)?;
                    let v = numbers(line, &fields)?;
                    let region = Region::Box {
                        x0: v[0],
                        x1: v[1],
                        y0: v[2],
                        y1: v[3],
                    };
                    if key == "void_box" {
                        out.voids.push(region);
                    } else {
                        out.solids.push(region);
                    }
                }
                other => return Err(Error::Problem(format!("line {line}: unknown key {other:?}"))),
            }
        }
        Ok(out)
    }
}
