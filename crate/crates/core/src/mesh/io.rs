//! Mesh import/export: legacy ASCII VTK (`UNSTRUCTURED_GRID`, quad cells),
//! an internal plain-text node/panel/region listing, and a bit-exact binary
//! encoding used by checkpoints. Also provides structured builders for
//! verification geometries.

use super::{CurrentConfiguration, Panel, Region, ReferenceMesh};
use crate::error::{Error, Result};
use crate::scalar::{real, Float};
use nalgebra::Vector3;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

/// VTK stores quad corners as a loop; our panels use the tensor-product
/// order. This permutation maps tensor order to loop order (and back with
/// [`LOOP_TO_TENSOR`]).
const TENSOR_TO_LOOP: [usize; 4] = [0, 1, 3, 2];
const LOOP_TO_TENSOR: [usize; 4] = [0, 1, 3, 2];

/// Writes the active panels as a legacy ASCII VTK unstructured grid.
/// `point_data` holds named scalar fields given per mesh point; cell data is
/// the region tag.
pub fn write_vtk<T: Float, W: Write>(
    out: &mut W,
    mesh: &ReferenceMesh<T>,
    config: &CurrentConfiguration<T>,
    point_data: &[(&str, Vec<T>)],
) -> Result<()> {
    let active_points = mesh.active_points();
    let mut renumber = vec![usize::MAX; mesh.n_points()];
    for (new, &p) in active_points.iter().enumerate() {
        renumber[p] = new;
    }
    let panels = mesh.active_panels();

    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "wavebem surface mesh")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", active_points.len())?;
    for &p in &active_points {
        let x = config.point(p);
        writeln!(
            out,
            "{:.17e} {:.17e} {:.17e}",
            x.x.to_f64().unwrap(),
            x.y.to_f64().unwrap(),
            x.z.to_f64().unwrap()
        )?;
    }
    writeln!(out, "CELLS {} {}", panels.len(), panels.len() * 5)?;
    for &k in &panels {
        let c = mesh.panel(k).corners;
        writeln!(
            out,
            "4 {} {} {} {}",
            renumber[c[TENSOR_TO_LOOP[0]]],
            renumber[c[TENSOR_TO_LOOP[1]]],
            renumber[c[TENSOR_TO_LOOP[2]]],
            renumber[c[TENSOR_TO_LOOP[3]]]
        )?;
    }
    writeln!(out, "CELL_TYPES {}", panels.len())?;
    for _ in &panels {
        writeln!(out, "9")?;
    }
    if !point_data.is_empty() {
        writeln!(out, "POINT_DATA {}", active_points.len())?;
        for (name, values) in point_data {
            if values.len() != mesh.n_points() {
                return Err(Error::Invalid(format!(
                    "point data '{name}' has {} entries for {} mesh points",
                    values.len(),
                    mesh.n_points()
                )));
            }
            writeln!(out, "SCALARS {name} double 1")?;
            writeln!(out, "LOOKUP_TABLE default")?;
            for &p in &active_points {
                writeln!(out, "{:.17e}", values[p].to_f64().unwrap())?;
            }
        }
    }
    writeln!(out, "CELL_DATA {}", panels.len())?;
    writeln!(out, "SCALARS region int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for &k in &panels {
        writeln!(out, "{}", mesh.panel(k).region.tag())?;
    }
    Ok(())
}

/// Reads a mesh written by [`write_vtk`] (or any legacy VTK quad grid).
/// The result is a flat (unrefined) mesh; point data scalars are returned
/// by name in file order.
#[allow(clippy::type_complexity)]
pub fn read_vtk<T: Float, R: BufRead>(
    input: R,
) -> Result<(ReferenceMesh<T>, Vec<(String, Vec<T>)>)> {
    let mut lines = input.lines();
    let mut points: Vec<Vector3<T>> = Vec::new();
    let mut quads: Vec<[usize; 4]> = Vec::new();
    let mut regions: Vec<Region> = Vec::new();
    let mut point_data: Vec<(String, Vec<T>)> = Vec::new();

    let parse = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|e| Error::Invalid(format!("bad number '{s}' in VTK file: {e}")))
    };

    let next_line = |lines: &mut std::io::Lines<R>| -> Result<Option<String>> {
        for line in lines.by_ref() {
            let line = line?;
            if !line.trim().is_empty() {
                return Ok(Some(line));
            }
        }
        Ok(None)
    };

    while let Some(line) = next_line(&mut lines)? {
        let mut words = line.split_whitespace();
        match words.next() {
            Some("POINTS") => {
                let n: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| Error::Invalid("bad POINTS header".into()))?;
                let mut coords: Vec<f64> = Vec::with_capacity(3 * n);
                while coords.len() < 3 * n {
                    let line = next_line(&mut lines)?
                        .ok_or_else(|| Error::Invalid("truncated POINTS".into()))?;
                    for w in line.split_whitespace() {
                        coords.push(parse(w)?);
                    }
                }
                for c in coords.chunks_exact(3) {
                    points.push(Vector3::new(real(c[0]), real(c[1]), real(c[2])));
                }
            }
            Some("CELLS") => {
                let n: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| Error::Invalid("bad CELLS header".into()))?;
                for _ in 0..n {
                    let line = next_line(&mut lines)?
                        .ok_or_else(|| Error::Invalid("truncated CELLS".into()))?;
                    let idx: Vec<usize> = line
                        .split_whitespace()
                        .map(|w| w.parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::Invalid(format!("bad cell line: {e}")))?;
                    if idx.first() != Some(&4) || idx.len() != 5 {
                        return Err(Error::Invalid("only quad cells are supported".into()));
                    }
                    let loop_order = [idx[1], idx[2], idx[3], idx[4]];
                    let mut tensor = [0usize; 4];
                    for (t, &l) in LOOP_TO_TENSOR.iter().enumerate() {
                        tensor[t] = loop_order[l];
                    }
                    quads.push(tensor);
                }
            }
            Some("SCALARS") => {
                let name = words.next().unwrap_or("field").to_string();
                // LOOKUP_TABLE line
                next_line(&mut lines)?;
                let count = if name == "region" {
                    quads.len()
                } else {
                    points.len()
                };
                let mut values = Vec::with_capacity(count);
                while values.len() < count {
                    let line = next_line(&mut lines)?
                        .ok_or_else(|| Error::Invalid("truncated SCALARS".into()))?;
                    for w in line.split_whitespace() {
                        values.push(parse(w)?);
                    }
                }
                if name == "region" {
                    regions = values
                        .iter()
                        .map(|&v| Region::from_tag(v as u32))
                        .collect::<Result<_>>()?;
                } else {
                    point_data.push((name, values.into_iter().map(real).collect()));
                }
            }
            _ => {}
        }
    }

    if regions.len() != quads.len() {
        regions = vec![Region::FreeSurface; quads.len()];
    }
    let panels = regions.into_iter().zip(quads).collect::<Vec<_>>();
    let panels = panels
        .into_iter()
        .map(|(r, q)| (r, q))
        .collect::<Vec<(Region, [usize; 4])>>();
    Ok((ReferenceMesh::new(points, panels), point_data))
}

/// Writes the internal plain-text node/panel/region listing.
pub fn write_listing<T: Float, W: Write>(
    out: &mut W,
    mesh: &ReferenceMesh<T>,
    config: &CurrentConfiguration<T>,
) -> Result<()> {
    let active_points = mesh.active_points();
    let mut renumber = vec![usize::MAX; mesh.n_points()];
    for (new, &p) in active_points.iter().enumerate() {
        renumber[p] = new;
    }
    writeln!(out, "wavebem-mesh 1")?;
    writeln!(out, "points {}", active_points.len())?;
    for &p in &active_points {
        let x = config.point(p);
        writeln!(
            out,
            "{:.17e} {:.17e} {:.17e}",
            x.x.to_f64().unwrap(),
            x.y.to_f64().unwrap(),
            x.z.to_f64().unwrap()
        )?;
    }
    let panels = mesh.active_panels();
    writeln!(out, "panels {}", panels.len())?;
    for &k in &panels {
        let p = mesh.panel(k);
        writeln!(
            out,
            "{} {} {} {} {}",
            renumber[p.corners[0]],
            renumber[p.corners[1]],
            renumber[p.corners[2]],
            renumber[p.corners[3]],
            p.region.tag()
        )?;
    }
    let hanging = mesh.hanging();
    writeln!(out, "constraints {}", hanging.len())?;
    for (&c, masters) in hanging {
        write!(out, "{}", renumber[c])?;
        for &(m, w) in masters {
            write!(out, " {} {:.17e}", renumber[m], w.to_f64().unwrap())?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads the internal plain-text listing back into a flat mesh.
pub fn read_listing<T: Float, R: BufRead>(input: R) -> Result<ReferenceMesh<T>> {
    let mut lines = input.lines();
    let mut expect = |what: &str| -> Result<Vec<String>> {
        let line = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::Invalid(format!("truncated listing, expected {what}")))?;
        Ok(line.split_whitespace().map(|s| s.to_string()).collect())
    };
    let header = expect("header")?;
    if header.first().map(String::as_str) != Some("wavebem-mesh") {
        return Err(Error::Invalid("not a wavebem mesh listing".into()));
    }
    let head = expect("points count")?;
    let n: usize = head
        .get(1)
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| Error::Invalid("bad points count".into()))?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let w = expect("point")?;
        let c: Vec<f64> = w
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Invalid(format!("bad point: {e}")))?;
        points.push(Vector3::new(real(c[0]), real(c[1]), real(c[2])));
    }
    let head = expect("panels count")?;
    let m: usize = head
        .get(1)
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| Error::Invalid("bad panels count".into()))?;
    let mut panels = Vec::with_capacity(m);
    for _ in 0..m {
        let w = expect("panel")?;
        let idx: Vec<usize> = w[..4]
            .iter()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Invalid(format!("bad panel: {e}")))?;
        let tag: u32 = w[4]
            .parse()
            .map_err(|e| Error::Invalid(format!("bad region tag: {e}")))?;
        panels.push((Region::from_tag(tag)?, [idx[0], idx[1], idx[2], idx[3]]));
    }
    let mut mesh = ReferenceMesh::new(points, panels);
    let head = expect("constraints count")?;
    let k: usize = head
        .get(1)
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| Error::Invalid("bad constraints count".into()))?;
    for _ in 0..k {
        let w = expect("constraint")?;
        let c: usize = w[0]
            .parse()
            .map_err(|e| Error::Invalid(format!("bad constraint: {e}")))?;
        let mut masters = Vec::new();
        for pair in w[1..].chunks_exact(2) {
            let m: usize = pair[0]
                .parse()
                .map_err(|e| Error::Invalid(format!("bad master: {e}")))?;
            let weight: f64 = pair[1]
                .parse()
                .map_err(|e| Error::Invalid(format!("bad weight: {e}")))?;
            masters.push((m, real(weight)));
        }
        mesh.hanging.insert(c, masters);
    }
    Ok(mesh)
}

// --- bit-exact binary encoding (checkpoint building block) ---

pub(crate) fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn get_u64(inp: &mut &[u8]) -> Result<u64> {
    if inp.len() < 8 {
        return Err(Error::CheckpointCorrupt("unexpected end of data".into()));
    }
    let (head, tail) = inp.split_at(8);
    *inp = tail;
    Ok(u64::from_le_bytes(head.try_into().unwrap()))
}

pub(crate) fn put_scalar<T: Float>(out: &mut Vec<u8>, v: T) {
    put_u64(out, v.to_bits_u64());
}

pub(crate) fn get_scalar<T: Float>(inp: &mut &[u8]) -> Result<T> {
    Ok(T::from_bits_u64(get_u64(inp)?))
}

impl<T: Float> ReferenceMesh<T> {
    /// Appends a bit-exact binary encoding of the full refinement forest.
    pub fn encode_binary(&self, out: &mut Vec<u8>) {
        put_u64(out, self.points.len() as u64);
        for p in &self.points {
            put_scalar(out, p.x);
            put_scalar(out, p.y);
            put_scalar(out, p.z);
        }
        put_u64(out, self.panels.len() as u64);
        for panel in &self.panels {
            for &c in &panel.corners {
                put_u64(out, c as u64);
            }
            put_u64(out, panel.region.tag() as u64);
            put_u64(out, panel.level as u64);
            put_u64(out, panel.parent.map(|p| p as u64 + 1).unwrap_or(0));
            match panel.children {
                Some(ch) => {
                    put_u64(out, 1);
                    for c in ch {
                        put_u64(out, c as u64);
                    }
                }
                None => put_u64(out, 0),
            }
            put_u64(out, panel.dead as u64);
        }
        put_u64(out, self.edge_midpoint.len() as u64);
        for (&(a, b), &m) in &self.edge_midpoint {
            put_u64(out, a as u64);
            put_u64(out, b as u64);
            put_u64(out, m as u64);
        }
    }

    /// Inverse of [`ReferenceMesh::encode_binary`].
    pub fn decode_binary(inp: &mut &[u8]) -> Result<Self> {
        let n_points = get_u64(inp)? as usize;
        let mut points = Vec::with_capacity(n_points);
        for _ in 0..n_points {
            let x = get_scalar(inp)?;
            let y = get_scalar(inp)?;
            let z = get_scalar(inp)?;
            points.push(Vector3::new(x, y, z));
        }
        let n_panels = get_u64(inp)? as usize;
        let mut panels = Vec::with_capacity(n_panels);
        for _ in 0..n_panels {
            let mut corners = [0usize; 4];
            for c in &mut corners {
                *c = get_u64(inp)? as usize;
            }
            let region = Region::from_tag(get_u64(inp)? as u32)?;
            let level = get_u64(inp)? as u8;
            let parent = match get_u64(inp)? {
                0 => None,
                p => Some((p - 1) as usize),
            };
            let children = match get_u64(inp)? {
                0 => None,
                _ => {
                    let mut ch = [0usize; 4];
                    for c in &mut ch {
                        *c = get_u64(inp)? as usize;
                    }
                    Some(ch)
                }
            };
            let dead = get_u64(inp)? != 0;
            panels.push(Panel {
                corners,
                region,
                level,
                parent,
                children,
                dead,
            });
        }
        let n_mid = get_u64(inp)? as usize;
        let mut edge_midpoint = BTreeMap::new();
        let mut midpoint_edge = BTreeMap::new();
        for _ in 0..n_mid {
            let a = get_u64(inp)? as usize;
            let b = get_u64(inp)? as usize;
            let m = get_u64(inp)? as usize;
            edge_midpoint.insert((a, b), m);
            midpoint_edge.insert(m, (a, b));
        }
        let mut mesh = Self {
            points,
            panels,
            edge_midpoint,
            midpoint_edge,
            hanging: BTreeMap::new(),
        };
        mesh.rebuild_hanging();
        Ok(mesh)
    }
}

/// Structured closed cube surface mesh centered at the origin with side 1,
/// `n x n` panels per face, outward normals, and one region tag per face in
/// the order `[-z, +z, -y, +y, -x, +x]`.
pub fn structured_cube<T: Float>(n: usize, regions: [Region; 6]) -> ReferenceMesh<T> {
    let h = 0.5;
    // grid index -> point id, shared between faces
    let mut ids: BTreeMap<(i64, i64, i64), usize> = BTreeMap::new();
    let mut points: Vec<Vector3<T>> = Vec::new();
    let step = 1.0 / n as f64;
    let mut point_at = |i: i64, j: i64, k: i64| -> usize {
        *ids.entry((i, j, k)).or_insert_with(|| {
            let p = Vector3::new(
                real(-h + i as f64 * step),
                real(-h + j as f64 * step),
                real(-h + k as f64 * step),
            );
            points.push(p);
            points.len() - 1
        })
    };

    let nn = n as i64;
    let mut panels: Vec<(Region, [usize; 4])> = Vec::new();
    // each face: closure mapping (a, b) grid coordinates to (i, j, k)
    let faces: [(usize, Box<dyn Fn(i64, i64) -> (i64, i64, i64)>); 6] = [
        (0, Box::new(move |a, b| (b, a, 0))),   // z = -h, u ~ +y, v ~ +x
        (1, Box::new(move |a, b| (a, b, nn))),  // z = +h, u ~ +x, v ~ +y
        (2, Box::new(move |a, b| (a, 0, b))),   // y = -h, u ~ +x, v ~ +z
        (3, Box::new(move |a, b| (b, nn, a))),  // y = +h, u ~ +z, v ~ +x
        (4, Box::new(move |a, b| (0, b, a))),   // x = -h, u ~ +z, v ~ +y
        (5, Box::new(move |a, b| (nn, a, b))),  // x = +h, u ~ +y, v ~ +z
    ];
    for (f, map) in faces {
        for bj in 0..nn {
            for ai in 0..nn {
                let corner = |a: i64, b: i64, point_at: &mut dyn FnMut(i64, i64, i64) -> usize| {
                    let (i, j, k) = map(a, b);
                    point_at(i, j, k)
                };
                let c00 = corner(ai, bj, &mut point_at);
                let c10 = corner(ai + 1, bj, &mut point_at);
                let c01 = corner(ai, bj + 1, &mut point_at);
                let c11 = corner(ai + 1, bj + 1, &mut point_at);
                panels.push((regions[f], [c00, c10, c01, c11]));
            }
        }
    }
    ReferenceMesh::new(points, panels)
}

/// Flat rectangular free-surface patch on z = 0 spanning `[0, lx] x [0, ly]`
/// with `nx x ny` panels; used by projection and transport tests.
pub fn structured_rectangle<T: Float>(lx: f64, ly: f64, nx: usize, ny: usize) -> ReferenceMesh<T> {
    let mut points = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            points.push(Vector3::new(
                real(lx * i as f64 / nx as f64),
                real(ly * j as f64 / ny as f64),
                T::ZERO,
            ));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut panels = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            panels.push((
                Region::FreeSurface,
                [id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)],
            ));
        }
    }
    ReferenceMesh::new(points, panels)
}
