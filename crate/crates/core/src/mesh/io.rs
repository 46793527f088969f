//! Plain-text mesh format.
//!
//! ```text
//! vem-mesh 1
//! vertices <n>
//! <x> <y>            (n lines)
//! cells <m>
//! <k> <i1> ... <ik>  (m lines, 0-based, counter-clockwise)
//! boundary <b>
//! <i>                (b lines)
//! ```
//!
//! Coordinates are written with 17 significant digits, which makes
//! `write -> read -> write` byte-identical. Blank lines and `#` comments
//! are accepted on input.

use std::fmt::Write as _;
use std::path::Path;

use super::PolyMesh;
use crate::{Error, Result};

const MAGIC: &str = "vem-mesh";
const VERSION: &str = "1";

pub fn write_mesh(mesh: &PolyMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, mesh.to_text())?;
    Ok(())
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<PolyMesh> {
    let text = std::fs::read_to_string(path)?;
    PolyMesh::from_text(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    fn next_tokens(&mut self) -> Result<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let line = line.split('#').next().unwrap_or("");
            let toks: Vec<&str> = line.split_whitespace().collect();
            if !toks.is_empty() {
                self.last = i + 1;
                return Ok((i + 1, toks));
            }
        }
        Err(Error::Parse {
            line: self.last + 1,
            msg: "unexpected end of file".into(),
        })
    }

    fn header(&mut self, keyword: &str) -> Result<usize> {
        let (line, toks) = self.next_tokens()?;
        if toks.len() != 2 || toks[0] != keyword {
            return Err(Error::Parse {
                line,
                msg: format!("expected `{keyword} <count>`"),
            });
        }
        parse_num(toks[1], line)
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse `{tok}`"),
    })
}

impl PolyMesh {
    /// Canonical text form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC} {VERSION}");
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for p in &self.vertices {
            let _ = writeln!(s, "{:.16e} {:.16e}", p[0], p[1]);
        }
        let _ = writeln!(s, "cells {}", self.cells.len());
        for c in &self.cells {
            let _ = write!(s, "{}", c.len());
            for v in c {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "boundary {}", self.boundary.len());
        for b in &self.boundary {
            let _ = writeln!(s, "{b}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let (line, toks) = lines.next_tokens()?;
        if toks != [MAGIC, VERSION] {
            return Err(Error::Parse {
                line,
                msg: format!("expected `{MAGIC} {VERSION}` header"),
            });
        }
        let nv = lines.header("vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, toks) = lines.next_tokens()?;
            if toks.len() != 2 {
                return Err(Error::Parse {
                    line,
                    msg: "vertex line must hold `x y`".into(),
                });
            }
            let x: f64 = parse_num(toks[0], line)?;
            let y: f64 = parse_num(toks[1], line)?;
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: "non-finite coordinate".into(),
                });
            }
            vertices.push([x, y]);
        }
        let nc = lines.header("cells")?;
        let mut cells = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (line, toks) = lines.next_tokens()?;
            let k: usize = parse_num(toks[0], line)?;
            if toks.len() != k + 1 {
                return Err(Error::Parse {
                    line,
                    msg: format!("cell declares {k} vertices but lists {}", toks.len() - 1),
                });
            }
            let cell = toks[1..]
                .iter()
                .map(|t| parse_num::<usize>(t, line))
                .collect::<Result<Vec<_>>>()?;
            cells.push(cell);
        }
        let nb = lines.header("boundary")?;
        let mut boundary = Vec::with_capacity(nb);
        for _ in 0..nb {
            let (line, toks) = lines.next_tokens()?;
            if toks.len() != 1 {
                return Err(Error::Parse {
                    line,
                    msg: "boundary line must hold one vertex index".into(),
                });
            }
            boundary.push(parse_num(toks[0], line)?);
        }
        if let Ok((line, _)) = lines.next_tokens() {
            return Err(Error::Parse {
                line,
                msg: "trailing content after boundary block".into(),
            });
        }
        PolyMesh::with_boundary(vertices, cells, boundary)
    }
}
