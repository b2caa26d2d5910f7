use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::Mesh;
use crate::error::{Error, Result};

const HEADER: &str = "mtf-mesh 1";

pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "V {}", mesh.n_vertices())?;
    for v in mesh.vertices() {
        writeln!(out, "{:.16e} {:.16e}", v[0], v[1])?;
    }
    writeln!(out, "T {}", mesh.n_triangles())?;
    for (t, tag) in mesh.triangles().iter().zip(mesh.tags()) {
        writeln!(out, "{} {} {} {}", t[0], t[1], t[2], tag)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    write_mesh(mesh, BufWriter::new(File::create(path)?))
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    read_mesh(BufReader::new(File::open(path)?))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-blank line, trimmed, with its 1-based line number.
    fn next(&mut self) -> Result<Option<(usize, String)>> {
        for line in self.inner.by_ref() {
            self.number += 1;
            let line = line?;
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                return Ok(Some((self.number, trimmed.to_string())));
            }
        }
        Ok(None)
    }

    fn expect(&mut self, what: &str) -> Result<(usize, String)> {
        self.next()?.ok_or_else(|| Error::MeshParse {
            line: self.number + 1,
            message: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn parse_fields<T: std::str::FromStr>(line: usize, text: &str, count: usize, what: &str) -> Result<Vec<T>> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != count {
        return Err(Error::MeshParse {
            line,
            message: format!("expected {count} fields for {what}, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse().map_err(|_| Error::MeshParse {
                line,
                message: format!("cannot parse {f:?} in {what}"),
            })
        })
        .collect()
}

fn parse_count(line: usize, text: &str, key: &str) -> Result<usize> {
    match text.split_whitespace().collect::<Vec<_>>().as_slice() {
        [k, n] if *k == key => n.parse().map_err(|_| Error::MeshParse {
            line,
            message: format!("bad {key} count {n:?}"),
        }),
        _ => Err(Error::MeshParse {
            line,
            message: format!("expected `{key} <count>`"),
        }),
    }
}

/// Parse the ASCII mesh format and validate the result.
pub fn read_mesh<R: BufRead>(reader: R) -> Result<Mesh> {
    let mut lines = Lines {
        inner: reader.lines(),
        number: 0,
    };
    let (n, header) = lines.expect("header")?;
    if header != HEADER {
        return Err(Error::MeshParse {
            line: n,
            message: format!("expected header `{HEADER}`"),
        });
    }
    let (n, text) = lines.expect("vertex count")?;
    let nv = parse_count(n, &text, "V")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, text) = lines.expect("vertex")?;
        let xy: Vec<f64> = parse_fields(n, &text, 2, "vertex")?;
        if !xy.iter().all(|c| c.is_finite()) {
            return Err(Error::MeshParse {
                line: n,
                message: "non-finite coordinate".into(),
            });
        }
        vertices.push([xy[0], xy[1]]);
    }
    let (n, text) = lines.expect("triangle count")?;
    let nt = parse_count(n, &text, "T")?;
    let mut triangles = Vec::with_capacity(nt);
    let mut tags = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (n, text) = lines.expect("triangle")?;
        let f: Vec<usize> = parse_fields(n, &text, 4, "triangle")?;
        triangles.push([f[0], f[1], f[2]]);
        tags.push(f[3]);
    }
    if let Some((n, _)) = lines.next()? {
        return Err(Error::MeshParse {
            line: n,
            message: "trailing content after last triangle".into(),
        });
    }
    Mesh::new(vertices, triangles, tags)
}
