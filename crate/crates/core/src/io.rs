//! Plain-text formats: a grid graph is one JSON header line (the grid) followed
//! by CSV rows `y,t,phi,mass`; point clouds are CSV rows `x,y,t,mass`.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beta::BetaRecord;
use crate::burgers::CGSpec;
use crate::error::{Error, Result};
use crate::graphs::{GraphPointSet, GridGraph, GridSpec};
use crate::heis::HPoint;

#[derive(Serialize, Deserialize)]
struct Header {
    grid: GridSpec,
}

pub fn write_grid_graph(mut w: impl Write, g: &GridGraph) -> Result<()> {
    serde_json::to_writer(&mut w, &Header { grid: g.grid })?;
    writeln!(w)?;
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["y", "t", "phi", "mass"])?;
    for k in 0..g.grid.len() {
        let (i, j) = g.grid.node(k);
        wr.write_record([
            g.grid.y(i).to_string(),
            g.grid.t(j).to_string(),
            g.phi[k].to_string(),
            g.mass[k].to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_grid_graph(r: impl Read) -> Result<GridGraph> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: Header = serde_json::from_str(line.trim())?;
    header.grid.validate()?;
    let mut phi = Vec::with_capacity(header.grid.len());
    let mut mass = Vec::with_capacity(header.grid.len());
    for rec in csv::Reader::from_reader(r).records() {
        let rec = rec?;
        let field = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| Error::InvalidGrid(format!("row has {} fields", rec.len())))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidGrid(e.to_string()))
        };
        phi.push(field(2)?);
        mass.push(field(3)?);
    }
    GridGraph::with_mass(header.grid, phi, mass)
}

pub fn write_points(w: impl Write, s: &GraphPointSet) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "y", "t", "mass"])?;
    for (p, m) in s.points.iter().zip(&s.mass) {
        wr.write_record([p.x.to_string(), p.y.to_string(), p.t.to_string(), m.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct PointRow {
    x: f64,
    y: f64,
    t: f64,
    #[serde(default = "unit")]
    mass: f64,
}

fn unit() -> f64 {
    1.0
}

/// Reads `x,y,t[,mass]`; missing masses default to 1.
pub fn read_points(r: impl Read, provenance: impl Into<String>) -> Result<GraphPointSet> {
    let mut points = Vec::new();
    let mut mass = Vec::new();
    for row in csv::Reader::from_reader(r).deserialize::<PointRow>() {
        let row = row?;
        points.push(HPoint::new(row.x, row.y, row.t));
        mass.push(row.mass);
    }
    GraphPointSet::new(points, mass, provenance)
}

/// Either format, told apart by the first byte (`{` for a grid graph).
pub fn read_any(path: &Path) -> Result<(Option<GridGraph>, GraphPointSet)> {
    let bytes = std::fs::read(path)?;
    if bytes.first() == Some(&b'{') {
        let g = read_grid_graph(&bytes[..])?;
        let mut s = g.to_point_set();
        s.provenance = path.display().to_string();
        Ok((Some(g), s))
    } else {
        Ok((None, read_points(&bytes[..], path.display().to_string())?))
    }
}

pub fn write_cg_spec(w: impl Write, spec: &CGSpec) -> Result<()> {
    serde_json::to_writer_pretty(w, spec)?;
    Ok(())
}

pub fn read_cg_spec(r: impl Read) -> Result<CGSpec> {
    let spec: CGSpec = serde_json::from_reader(r)?;
    spec.validate()?;
    Ok(spec)
}

/// Rows `cx,cy,ct,r,beta,theta,offset,method`.
pub fn write_beta_records(w: impl Write, records: &[BetaRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["cx", "cy", "ct", "r", "beta", "theta", "offset", "method"])?;
    for r in records {
        wr.write_record([
            r.ball.center.x.to_string(),
            r.ball.center.y.to_string(),
            r.ball.center.t.to_string(),
            r.ball.radius.to_string(),
            r.beta.to_string(),
            r.best_plane.subgroup.theta.radians().to_string(),
            r.best_plane.offset.to_string(),
            r.method.as_str().to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
