//! Unit-square mesh families: randomly distorted quadrilateral grids and
//! bounded Voronoi diagrams with optional Lloyd relaxation and vertex
//! distortion.

use std::collections::HashMap;

use super::PolyMesh;
use crate::geometry::{self, Point};
use crate::rng::MeshRng;
use crate::{Error, Result};

const MAX_GRID_ATTEMPTS: usize = 10;
const MAX_DISTORTION_ATTEMPTS: usize = 8;
const MAX_SEED_REDRAWS: usize = 100;
/// Voronoi vertices closer than this are merged into one mesh vertex.
const MERGE_TOL: f64 = 1e-10;

/// `n x n` quadrilateral grid of the unit square whose interior vertices are
/// moved by independent uniform offsets in `[-delta/n, delta/n]` per
/// coordinate. Vertices are numbered row by row from `(0, 0)`.
pub fn generate_distorted_grid(n: usize, delta: f64, seed: u64) -> Result<PolyMesh> {
    if n == 0 {
        return Err(Error::InvalidParameter("grid needs n >= 1".into()));
    }
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "grid distortion must lie in [0, 0.5), got {delta}"
        )));
    }
    let mut rng = MeshRng::new(seed);
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    for _ in 0..MAX_GRID_ATTEMPTS {
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                let mut p = [i as f64 * h, j as f64 * h];
                if i == n {
                    p[0] = 1.0;
                }
                if j == n {
                    p[1] = 1.0;
                }
                if i > 0 && i < n && j > 0 && j < n && delta > 0.0 {
                    p[0] += rng.uniform(-delta * h, delta * h);
                    p[1] += rng.uniform(-delta * h, delta * h);
                }
                vertices.push(p);
            }
        }
        let ok = cells.iter().all(|c| {
            let poly: Vec<Point> = c.iter().map(|&v| vertices[v]).collect();
            geometry::signed_area(&poly) > 0.0 && geometry::is_simple(&poly)
        });
        if ok {
            return PolyMesh::new(vertices, cells);
        }
    }
    Err(Error::InvalidParameter(format!(
        "distortion {delta} inverted cells in {MAX_GRID_ATTEMPTS} attempts"
    )))
}

/// Bounded Voronoi mesh of the unit square from `n_seeds` uniformly drawn
/// generators, relaxed by `lloyd_iters` centroid sweeps and then distorted:
/// every interior vertex moves by `distortion` times its shortest incident
/// edge in a uniformly random direction.
pub fn generate_voronoi(
    n_seeds: usize,
    lloyd_iters: usize,
    seed: u64,
    distortion: f64,
) -> Result<PolyMesh> {
    if n_seeds == 0 {
        return Err(Error::InvalidParameter("Voronoi mesh needs at least one seed".into()));
    }
    if !(0.0..1.0).contains(&distortion) {
        return Err(Error::InvalidParameter(format!(
            "Voronoi distortion must lie in [0, 1), got {distortion}"
        )));
    }
    let mut rng = MeshRng::new(seed);
    let mut seeds: Vec<Point> = (0..n_seeds).map(|_| [rng.unit(), rng.unit()]).collect();
    redraw_duplicates(&mut seeds, &mut rng)?;
    let mesh = voronoi_from_seeds(&seeds, lloyd_iters)?;
    if distortion == 0.0 {
        return Ok(mesh);
    }
    distort(&mesh, distortion, &mut rng)
}

fn redraw_duplicates(seeds: &mut [Point], rng: &mut MeshRng) -> Result<()> {
    for _ in 0..MAX_SEED_REDRAWS {
        let mut clash = None;
        'outer: for i in 0..seeds.len() {
            for j in 0..i {
                if geometry::dist(seeds[i], seeds[j]) < 1e-12 {
                    clash = Some(i);
                    break 'outer;
                }
            }
        }
        match clash {
            None => return Ok(()),
            Some(i) => seeds[i] = [rng.unit(), rng.unit()],
        }
    }
    Err(Error::InvalidParameter("could not separate duplicate seeds".into()))
}

/// Bounded Voronoi mesh of the unit square for explicit generators.
pub fn voronoi_from_seeds(seeds: &[Point], lloyd_iters: usize) -> Result<PolyMesh> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("Voronoi mesh needs at least one seed".into()));
    }
    for (i, s) in seeds.iter().enumerate() {
        if !(0.0..=1.0).contains(&s[0]) || !(0.0..=1.0).contains(&s[1]) {
            return Err(Error::InvalidParameter(format!("seed {i} lies outside the unit square")));
        }
        for t in &seeds[..i] {
            if geometry::dist(*s, *t) < 1e-12 {
                return Err(Error::InvalidParameter(format!("seed {i} duplicates another seed")));
            }
        }
    }
    let mut seeds = seeds.to_vec();
    let mut cells = voronoi_cells(&seeds);
    for _ in 0..lloyd_iters {
        seeds = cells.iter().map(|c| geometry::centroid(c)).collect();
        cells = voronoi_cells(&seeds);
    }
    stitch(&cells)
}

fn voronoi_cells(seeds: &[Point]) -> Vec<Vec<Point>> {
    seeds
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut others: Vec<(f64, usize)> = seeds
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, &t)| (geometry::dist(s, t), j))
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut cell = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
            for (d, j) in others {
                let radius = cell.iter().map(|&p| geometry::dist(p, s)).fold(0.0, f64::max);
                if 0.5 * d > radius {
                    break;
                }
                cell = clip_half_plane(&cell, s, seeds[j]);
            }
            cell
        })
        .collect()
}

/// Keeps the part of a convex polygon closer to `s` than to `t`.
fn clip_half_plane(poly: &[Point], s: Point, t: Point) -> Vec<Point> {
    let n = [t[0] - s[0], t[1] - s[1]];
    let mid = [0.5 * (s[0] + t[0]), 0.5 * (s[1] + t[1])];
    let side = |p: Point| (p[0] - mid[0]) * n[0] + (p[1] - mid[1]) * n[1];
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        let (sa, sb) = (side(a), side(b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let w = sa / (sa - sb);
            out.push([a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]);
        }
    }
    out
}

/// Merges coincident corners of independently clipped cells into one
/// conforming mesh.
fn stitch(cells: &[Vec<Point>]) -> Result<PolyMesh> {
    let bucket = |p: Point| ((p[0] / (10.0 * MERGE_TOL)).floor() as i64, (p[1] / (10.0 * MERGE_TOL)).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut mesh_cells = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut ids: Vec<usize> = Vec::with_capacity(cell.len());
        for &p in cell {
            let (bx, by) = bucket(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = grid.get(&(bx + dx, by + dy)) {
                        for &v in list {
                            if geometry::dist(vertices[v], p) <= MERGE_TOL {
                                found = Some(v);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let id = found.unwrap_or_else(|| {
                vertices.push(p);
                grid.entry((bx, by)).or_default().push(vertices.len() - 1);
                vertices.len() - 1
            });
            if ids.last() != Some(&id) {
                ids.push(id);
            }
        }
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        if ids.len() < 3 {
            return Err(Error::Geometry("Voronoi cell collapsed while merging vertices".into()));
        }
        mesh_cells.push(ids);
    }
    PolyMesh::new(vertices, mesh_cells)
}

fn distort(mesh: &PolyMesh, distortion: f64, rng: &mut MeshRng) -> Result<PolyMesh> {
    let nv = mesh.num_vertices();
    let verts = mesh.vertices();
    let mut min_edge = vec![f64::INFINITY; nv];
    for cell in mesh.cells() {
        for k in 0..cell.len() {
            let (a, b) = (cell[k], cell[(k + 1) % cell.len()]);
            let l = geometry::dist(verts[a], verts[b]);
            min_edge[a] = min_edge[a].min(l);
            min_edge[b] = min_edge[b].min(l);
        }
    }
    let on_boundary = mesh.is_boundary_mask();
    let offsets: Vec<Point> = (0..nv)
        .map(|v| {
            if on_boundary[v] {
                [0.0, 0.0]
            } else {
                let phi = rng.uniform(0.0, 2.0 * std::f64::consts::PI);
                let r = distortion * min_edge[v];
                [r * phi.cos(), r * phi.sin()]
            }
        })
        .collect();
    let mut factor = 1.0;
    for _ in 0..MAX_DISTORTION_ATTEMPTS {
        let moved: Vec<Point> = verts
            .iter()
            .zip(&offsets)
            .map(|(p, o)| [p[0] + factor * o[0], p[1] + factor * o[1]])
            .collect();
        let valid = mesh.cells().iter().all(|c| {
            let poly: Vec<Point> = c.iter().map(|&v| moved[v]).collect();
            geometry::signed_area(&poly) > 0.0 && geometry::is_simple(&poly)
        });
        if valid {
            return PolyMesh::with_boundary(moved, mesh.cells().to_vec(), mesh.boundary_vertices().to_vec());
        }
        factor *= 0.5;
    }
    Err(Error::Geometry(format!(
        "vertex distortion {distortion} inverted cells after {MAX_DISTORTION_ATTEMPTS} reductions"
    )))
}
