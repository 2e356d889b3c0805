//! Trajectory and report output: CSV, raw little-endian slabs with a JSON
//! sidecar, and pretty JSON. Output is byte-stable for identical inputs.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::model::{Field, Problem};
use crate::pde::Trajectory;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlabHeader {
    pub dtype: &'static str,
    /// Axis order of the flat array.
    pub order: [&'static str; 3],
    pub shape: [usize; 3],
    pub kind: String,
    pub first_level: usize,
    pub t0: f64,
    pub dt: f64,
    pub da: f64,
    pub h: f64,
    pub t_final: f64,
    pub a_max: f64,
}

/// `t,a,x,value` for every node of the listed levels.
pub fn write_csv<W: Write>(problem: &Problem, traj: &Trajectory, mut out: W) -> io::Result<()> {
    let l = problem.lattice();
    writeln!(out, "t,a,x,value")?;
    for n in traj.first_level()..=traj.last_level() {
        let t = l.t(n);
        for ((j, i), v) in traj.at(n).indexed_iter() {
            writeln!(out, "{},{},{},{}", t, l.a(j), l.x(i), v)?;
        }
    }
    Ok(())
}

/// Writes `<stem>.f64` and `<stem>.json`; returns both paths.
pub fn write_slab(problem: &Problem, traj: &Trajectory, stem: &Path) -> io::Result<(PathBuf, PathBuf)> {
    let kind = serde_json::to_value(traj.kind()).expect("serializable");
    let kind = kind.as_str().unwrap_or("trajectory").to_string();
    write_fields(problem, traj.slices(), traj.first_level(), &kind, stem)
}

/// Slab of consecutive time slices starting at `first_level`.
pub fn write_fields(problem: &Problem, slices: &[Field], first_level: usize, kind: &str, stem: &Path) -> io::Result<(PathBuf, PathBuf)> {
    let l = problem.lattice();
    let (rows, cols) = (l.na() + 1, l.nx());
    let mut bytes = Vec::with_capacity(slices.len() * rows * cols * 8);
    for slice in slices {
        if slice.dim() != (rows, cols) {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, format!("slice has shape {:?}", slice.dim())));
        }
        push_field(&mut bytes, slice);
    }
    let header = SlabHeader {
        dtype: "f64le",
        order: ["time", "age", "space"],
        shape: [slices.len(), rows, cols],
        kind: kind.to_string(),
        first_level,
        t0: l.t(first_level),
        dt: l.dt(),
        da: l.da(),
        h: l.h(),
        t_final: l.t_final(),
        a_max: l.a_max(),
    };
    let data = stem.with_extension("f64");
    let meta = stem.with_extension("json");
    fs::write(&data, bytes)?;
    write_json(&meta, &header)?;
    Ok((data, meta))
}

fn push_field(bytes: &mut Vec<u8>, u: &Field) {
    for v in u.iter() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
}

/// Reads a slab written by [`write_slab`] back into flat values.
pub fn read_slab(data: &Path) -> io::Result<Vec<f64>> {
    let bytes = fs::read(data)?;
    if bytes.len() % 8 != 0 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "slab length is not a multiple of 8"));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    fs::write(path, to_json(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{solve_forward, Renewal, Scheme};
    use crate::scenarios;

    #[test]
    fn slab_round_trip() {
        let p = scenarios::reference_boundary(9, 8).unwrap();
        let y0 = scenarios::reference_datum(&p);
        let traj = solve_forward(&p, &y0, None, 0, 8, Renewal::Integral, Scheme::ImplicitEuler).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (data, meta) = write_slab(&p, &traj, &dir.path().join("forward")).unwrap();
        let values = read_slab(&data).unwrap();
        assert_eq!(values.len(), 9 * 17 * 9);
        assert_eq!(values[..17 * 9], *traj.initial().as_slice().unwrap());
        let header: serde_json::Value = serde_json::from_str(&fs::read_to_string(meta).unwrap()).unwrap();
        assert_eq!(header["shape"], serde_json::json!([9, 17, 9]));
        assert_eq!(header["kind"], "forward");
    }

    #[test]
    fn csv_has_one_line_per_node() {
        let p = scenarios::reference_boundary(9, 8).unwrap();
        let traj = solve_forward(&p, &p.zero_field(), None, 0, 2, Renewal::Integral, Scheme::ImplicitEuler).unwrap();
        let mut buf = Vec::new();
        write_csv(&p, &traj, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 3 * 17 * 9);
    }
}
