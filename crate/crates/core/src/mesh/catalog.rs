//! Reproducible single-polygon test shapes with 3 to 20 vertices.
//!
//! One shape per vertex count, following this kind sequence:
//!
//! | N_E | kind | N_E | kind | N_E | kind |
//! |----|------|----|------|----|------|
//! | 3 | irregular | 9 | hanging-nodes | 15 | regular |
//! | 4 | concave | 10 | regular | 16 | hanging-nodes |
//! | 5 | regular | 11 | concave | 17 | concave |
//! | 6 | hanging-nodes | 12 | star | 18 | collapsing-edge |
//! | 7 | regular | 13 | hanging-nodes | 19 | regular |
//! | 8 | star | 14 | irregular | 20 | star |
//!
//! Recipes (all centred at the origin, nominal radius 1):
//! - regular: vertices on the unit circle at angles `2 pi k / N`;
//! - star: radii alternating between 1 and 0.45;
//! - concave: regular polygon with vertex 0 pushed 0.4 inside the chord of
//!   its neighbours, i.e. to signed radius `cos(2 pi / N) - 0.4`;
//! - irregular: radius `1 + U(-0.25, 0.25)` and angle jitter of
//!   `U(-0.3, 0.3)` angular steps, from a [`MeshRng`] seeded with `1000 + N`;
//! - hanging-nodes: irregular polygon with `N - N/2` corners whose first
//!   `N/2` edges get a collinear midpoint;
//! - collapsing-edge: irregular polygon whose vertex 1 slides towards
//!   vertex 0 until that edge is `0.9e-3` of the diameter.

use std::f64::consts::PI;

use crate::geometry::{self, Point};
use crate::rng::MeshRng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolygonKind {
    Regular,
    Star,
    Concave,
    Irregular,
    HangingNodes,
    CollapsingEdge,
    /// User-supplied polygon.
    Custom,
}

impl PolygonKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Regular => "regular",
            Self::Star => "star",
            Self::Concave => "concave",
            Self::Irregular => "irregular",
            Self::HangingNodes => "hanging-nodes",
            Self::CollapsingEdge => "collapsing-edge",
            Self::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogPolygon {
    pub name: String,
    pub kind: PolygonKind,
    pub vertices: Vec<Point>,
}

impl CatalogPolygon {
    /// Vertex count `N_E`.
    pub fn n_e(&self) -> usize {
        self.vertices.len()
    }

    /// Parses a polygon file: one `x y` pair per line, `#` comments allowed.
    /// Clockwise input is reversed.
    pub fn from_text(name: &str, text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            let parse = |t: &str| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("cannot parse `{t}`"),
                })
            };
            if toks.len() != 2 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "expected `x y`".into(),
                });
            }
            vertices.push([parse(toks[0])?, parse(toks[1])?]);
        }
        if vertices.len() < 3 {
            return Err(Error::Geometry(format!("polygon has {} vertices", vertices.len())));
        }
        if geometry::signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        if !geometry::is_simple(&vertices) || geometry::signed_area(&vertices) <= 0.0 {
            return Err(Error::Geometry("polygon is not simple".into()));
        }
        Ok(Self {
            name: name.to_string(),
            kind: PolygonKind::Custom,
            vertices,
        })
    }
}

const KINDS: [PolygonKind; 18] = {
    use PolygonKind::*;
    [
        Irregular,
        Concave,
        Regular,
        HangingNodes,
        Regular,
        Star,
        HangingNodes,
        Regular,
        Concave,
        Star,
        HangingNodes,
        Irregular,
        Regular,
        HangingNodes,
        Concave,
        CollapsingEdge,
        Regular,
        Star,
    ]
};

fn regular(n: usize) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}

fn star(n: usize) -> Vec<Point> {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            let r = if k % 2 == 0 { 1.0 } else { 0.45 };
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

fn concave(n: usize) -> Vec<Point> {
    let mut v = regular(n);
    // 0.4 inside the chord joining the two neighbours of vertex 0
    let r = (2.0 * PI / n as f64).cos() - 0.4;
    v[0] = [r * v[0][0], r * v[0][1]];
    v
}

fn irregular(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = MeshRng::new(seed);
    let step = 2.0 * PI / n as f64;
    (0..n)
        .map(|k| {
            let r = 1.0 + rng.uniform(-0.25, 0.25);
            let t = step * (k as f64 + rng.uniform(-0.3, 0.3));
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

fn hanging_nodes(n: usize) -> Vec<Point> {
    let splits = n / 2;
    let corners = irregular(n - splits, 1000 + n as u64);
    let m = corners.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..m {
        let (a, b) = (corners[k], corners[(k + 1) % m]);
        out.push(a);
        if k < splits {
            out.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
        }
    }
    out
}

fn collapsing_edge(n: usize) -> Vec<Point> {
    let mut v = irregular(n, 1000 + n as u64);
    let d = geometry::diameter(&v);
    let dir = geometry::sub(v[1], v[0]);
    let len = dir[0].hypot(dir[1]);
    let t = 0.9e-3 * d / len;
    v[1] = [v[0][0] + t * dir[0], v[0][1] + t * dir[1]];
    v
}

/// The 18 reference polygons, ordered by vertex count 3..=20.
pub fn catalog_polygons() -> Vec<CatalogPolygon> {
    KINDS
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let n = i + 3;
            let vertices = match kind {
                PolygonKind::Regular => regular(n),
                PolygonKind::Star => star(n),
                PolygonKind::Concave => concave(n),
                PolygonKind::Irregular => irregular(n, 1000 + n as u64),
                PolygonKind::HangingNodes => hanging_nodes(n),
                PolygonKind::CollapsingEdge => collapsing_edge(n),
                PolygonKind::Custom => unreachable!(),
            };
            CatalogPolygon {
                name: kind.name().to_string(),
                kind,
                vertices,
            }
        })
        .collect()
}
