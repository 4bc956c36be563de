//! Versioned CSV formats for grid functions, Fourier lines and trajectories.
//!
//! Every file opens with a `# format_version=1` comment line; numbers are
//! written in scientific notation with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{FourierLine, Grid, GridFunction};

pub const FORMAT_VERSION: u32 = 1;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(w: &mut impl Write, cols: &str) -> Result<()> {
    writeln!(w, "# format_version={FORMAT_VERSION}")?;
    writeln!(w, "{cols}")?;
    Ok(())
}

pub fn write_grid_function_to(w: &mut impl Write, f: &GridFunction) -> Result<()> {
    header(w, "x,re,im")?;
    let g = f.grid();
    for (i, v) in f.values().iter().enumerate() {
        writeln!(w, "{},{},{}", num(g.x(i)), num(v.re), num(v.im))?;
    }
    Ok(())
}

pub fn write_grid_function(path: &Path, f: &GridFunction) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_grid_function_to(&mut w, f)?;
    w.flush()?;
    Ok(())
}

fn records(reader: impl Read, expect: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let hdr: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if hdr.len() < expect.len() || hdr.iter().zip(expect).any(|(a, b)| a != b) {
        return Err(Error::Parse(format!("expected columns {expect:?}, found {hdr:?}")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}`"))))
            .collect::<Result<Vec<f64>>>()?;
        out.push(row);
    }
    Ok(out)
}

pub fn read_grid_function_from(reader: impl Read) -> Result<GridFunction> {
    let rows = records(reader, &["x", "re", "im"])?;
    if rows.len() < 2 {
        return Err(Error::Parse("grid function needs at least two rows".into()));
    }
    let n = rows.len();
    let g = Grid::new(rows[0][0], rows[n - 1][0], n)?;
    for (i, r) in rows.iter().enumerate() {
        if (r[0] - g.x(i)).abs() > 1e-9 * g.dx() {
            return Err(Error::Parse(format!("row {i}: x = {} is off the uniform grid", r[0])));
        }
    }
    GridFunction::new(g, rows.iter().map(|r| Complex64::new(r[1], r[2])).collect())
}

pub fn read_grid_function(path: &Path) -> Result<GridFunction> {
    read_grid_function_from(File::open(path)?)
}

pub fn write_fourier_line(path: &Path, line: &FourierLine) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    header(&mut w, "xi,re,im,b")?;
    for (xi, v) in line.xi.iter().zip(&line.values) {
        writeln!(w, "{},{},{},{}", num(*xi), num(v.re), num(v.im), num(line.offset_b))?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of a trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub times: Vec<f64>,
    pub masses: Vec<Complex64>,
    pub omega_norms: Vec<f64>,
    pub dist_steady: Option<Vec<f64>>,
}

pub fn write_trajectory_to(w: &mut impl Write, t: &TrajectoryTable) -> Result<()> {
    let cols = if t.dist_steady.is_some() {
        "t,mass_re,mass_im,omega_norm,dist_steady"
    } else {
        "t,mass_re,mass_im,omega_norm"
    };
    header(w, cols)?;
    for i in 0..t.times.len() {
        write!(w, "{},{},{},{}", num(t.times[i]), num(t.masses[i].re), num(t.masses[i].im), num(t.omega_norms[i]))?;
        if let Some(d) = &t.dist_steady {
            write!(w, ",{}", num(d[i]))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_trajectory(path: &Path, t: &TrajectoryTable) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_trajectory_to(&mut w, t)?;
    w.flush()?;
    Ok(())
}

pub fn read_trajectory_from(reader: impl Read) -> Result<TrajectoryTable> {
    let rows = records(reader, &["t", "mass_re", "mass_im", "omega_norm"])?;
    let has_dist = rows.first().is_some_and(|r| r.len() >= 5);
    Ok(TrajectoryTable {
        times: rows.iter().map(|r| r[0]).collect(),
        masses: rows.iter().map(|r| Complex64::new(r[1], r[2])).collect(),
        omega_norms: rows.iter().map(|r| r[3]).collect(),
        dist_steady: has_dist.then(|| rows.iter().map(|r| r[4]).collect()),
    })
}

pub fn read_trajectory(path: &Path) -> Result<TrajectoryTable> {
    read_trajectory_from(File::open(path)?)
}
