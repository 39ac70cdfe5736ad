//! CSV and JSON hand-off formats. Floats are written with 17 significant
//! digits so that outputs round-trip and are byte-reproducible.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::asymptotics::{AsymptoticsBasis, BasisTerm};
use crate::error::{Error, Result};
use crate::geometry::Mode;
use crate::heat::HeatTrajectory;
use crate::mellin::{LogGrid, RadialField};
use crate::symbols::{PoleSet, Strip};
use crate::tip::TipFit;

pub const FIELD_HEADER: [&str; 4] = ["tau", "mode", "re", "im"];
pub const POLES_HEADER: [&str; 6] = ["mode", "label", "re_rho", "im_rho", "max_log_power", "in_strip"];
pub const FITS_HEADER: [&str; 9] = ["t", "rho_re", "rho_im", "m", "mode", "c_re", "c_im", "residual", "decay_exp"];

/// `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("csv: {e}"))
}

pub fn write_field<W: Write>(w: W, u: &RadialField) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(FIELD_HEADER).map_err(csv_err)?;
    let taus = u.grid.taus();
    for (mode, vals) in u.modes.iter().zip(&u.values) {
        for (tau, v) in taus.iter().zip(vals) {
            out.write_record([fmt17(*tau), mode.label.clone(), fmt17(v.re), fmt17(v.im)])
                .map_err(csv_err)?;
        }
    }
    out.flush().map_err(|e| Error::Data(e.to_string()))
}

pub fn field_to_string(u: &RadialField) -> Result<String> {
    let mut buf = Vec::new();
    write_field(&mut buf, u)?;
    String::from_utf8(buf).map_err(|e| Error::Data(e.to_string()))
}

#[derive(Deserialize)]
struct FieldRow {
    tau: f64,
    mode: String,
    re: f64,
    im: f64,
}

/// Read a field on a uniform τ-grid ending at 0. Modes absent from the file
/// are zero; labels not in `modes` are rejected.
pub fn parse_field(text: &str, n: usize, volume: f64, modes: &[Mode]) -> Result<RadialField> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != FIELD_HEADER {
        return Err(Error::Data(format!("field header {header:?}, expected {FIELD_HEADER:?}")));
    }
    let mut per_mode: Vec<Vec<(f64, Complex64)>> = vec![Vec::new(); modes.len()];
    for row in rd.deserialize::<FieldRow>() {
        let r = row.map_err(csv_err)?;
        let i = modes
            .iter()
            .position(|m| m.label == r.mode)
            .ok_or_else(|| Error::UnknownMode(r.mode.clone()))?;
        per_mode[i].push((r.tau, Complex64::new(r.re, r.im)));
    }
    let first = per_mode
        .iter()
        .find(|v| !v.is_empty())
        .ok_or_else(|| Error::Data("field file has no rows".into()))?;
    if first.len() < 3 {
        return Err(Error::Data("field needs at least three nodes per mode".into()));
    }
    let taus: Vec<f64> = first.iter().map(|p| p.0).collect();
    let grid = LogGrid::new(taus[0], taus.len() - 1)?;
    for (j, &t) in taus.iter().enumerate() {
        if (t - grid.tau(j)).abs() > 1e-9 * (1.0 + grid.tau_min.abs()) {
            return Err(Error::Data(format!("τ-grid is not uniform ending at 0 (node {j}: {t})")));
        }
    }
    let mut u = RadialField::zeros(grid, n, volume, modes.to_vec());
    for (i, rows) in per_mode.iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        if rows.len() != taus.len() || rows.iter().zip(&taus).any(|(r, t)| r.0 != *t) {
            return Err(Error::Data(format!("mode {} is not sampled on the common grid", modes[i].label)));
        }
        u.values[i] = rows.iter().map(|r| r.1).collect();
    }
    Ok(u)
}

pub fn read_field(path: &Path, n: usize, volume: f64, modes: &[Mode]) -> Result<RadialField> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_field(&text, n, volume, modes)
}

/// One row per pole, inside the strip or not.
pub fn write_poles<W: Write>(w: W, ps: &PoleSet) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(POLES_HEADER).map_err(csv_err)?;
    let rows = ps
        .entries
        .iter()
        .map(|e| (e, true))
        .chain(ps.excluded.iter().map(|e| (e, false)));
    let mut rows: Vec<_> = rows.collect();
    rows.sort_by(|a, b| {
        a.0.group
            .cmp(&b.0.group)
            .then(a.0.rho.re.total_cmp(&b.0.rho.re))
            .then(a.0.rho.im.total_cmp(&b.0.rho.im))
    });
    for (e, inside) in rows {
        out.write_record([
            e.group.to_string(),
            e.group_label.clone(),
            fmt17(e.rho.re),
            fmt17(e.rho.im),
            e.max_log.to_string(),
            inside.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::Data(e.to_string()))
}

/// One row per fitted term; the residual columns repeat per mode.
pub fn write_fits<W: Write>(w: W, fits: &[TipFit]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(FITS_HEADER).map_err(csv_err)?;
    for f in fits {
        for t in &f.terms {
            let (res, dec) = f
                .residual(&t.mode)
                .map_or((f64::NAN, f64::NAN), |r| (r.residual, r.decay_exponent));
            out.write_record([
                fmt17(f.t),
                fmt17(t.rho.re),
                fmt17(t.rho.im),
                t.m.to_string(),
                t.mode.clone(),
                fmt17(t.c.re),
                fmt17(t.c.im),
                fmt17(res),
                fmt17(dec),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush().map_err(|e| Error::Data(e.to_string()))
}

pub fn basis_to_json(b: &AsymptoticsBasis) -> Value {
    serde_json::json!({
        "gamma": b.gamma,
        "n": b.n,
        "mu": b.mu,
        "power": b.power,
        "strip": [b.strip.left, b.strip.right],
        "terms": b.terms,
    })
}

/// Inverse of [`basis_to_json`]; exact exponents are not recovered.
pub fn basis_from_json(v: &Value) -> Result<AsymptoticsBasis> {
    let get = |k: &str| v.get(k).ok_or_else(|| Error::Data(format!("basis file lacks '{k}'")));
    let gamma = get("gamma")?.as_f64().ok_or_else(|| Error::Data("gamma".into()))?;
    let n = get("n")?.as_u64().ok_or_else(|| Error::Data("n".into()))? as usize;
    let mu = get("mu")?.as_u64().ok_or_else(|| Error::Data("mu".into()))? as usize;
    let power = get("power")?.as_u64().ok_or_else(|| Error::Data("power".into()))? as usize;
    let terms: Vec<BasisTerm> = serde_json::from_value(get("terms")?.clone())?;
    Ok(AsymptoticsBasis {
        terms,
        strip: Strip::new(n, gamma, mu),
        gamma,
        n,
        mu,
        power,
    })
}

/// Echo written next to every output set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub args: Vec<String>,
    pub config: Value,
    pub seed: u64,
    pub wall_time_s: f64,
    #[serde(default)]
    pub files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Value>,
}

impl Manifest {
    pub fn new(subcommand: &str, args: Vec<String>, config: Value, seed: u64) -> Self {
        Manifest {
            tool: "conelab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            args,
            config,
            seed,
            wall_time_s: 0.0,
            files: Vec::new(),
            times: None,
            scheme: None,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("manifest.json"), &serde_json::to_value(self)?)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

pub fn snapshot_name(i: usize) -> String {
    format!("snapshot_{i:04}.csv")
}

/// Write snapshots in time order; returns the file names.
pub fn write_trajectory(dir: &Path, traj: &HeatTrajectory) -> Result<Vec<String>> {
    create_dir(dir)?;
    let mut names = Vec::with_capacity(traj.snapshots.len());
    for (i, u) in traj.snapshots.iter().enumerate() {
        let name = snapshot_name(i);
        write_text(&dir.join(&name), &field_to_string(u)?)?;
        names.push(name);
    }
    Ok(names)
}

/// Read the snapshots listed in a trajectory manifest.
pub fn read_trajectory(dir: &Path, manifest: &Manifest, n: usize, volume: f64, modes: &[Mode]) -> Result<HeatTrajectory> {
    let times = manifest
        .times
        .clone()
        .ok_or_else(|| Error::Data(format!("{}: manifest has no snapshot times", dir.display())))?;
    if times.len() != manifest.files.len() {
        return Err(Error::Data("manifest lists different numbers of times and files".into()));
    }
    let mut snapshots = Vec::with_capacity(times.len());
    for f in &manifest.files {
        let u = read_field(&dir.join(f), n, volume, modes)?;
        snapshots.push(u);
    }
    Ok(HeatTrajectory { times, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mode_table, Circle, CrossSectionModel};

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn field_round_trip() {
        let modes = mode_table(&Circle { circumference: 2.0 }.groups(2));
        let g = LogGrid::new(-3.0, 12).unwrap();
        let u = RadialField::from_fn(g, 1, 2.0, modes.clone(), |i, x| Complex64::new(x.sin() + i as f64, x * x));
        let text = field_to_string(&u).unwrap();
        let back = parse_field(&text, 1, 2.0, &modes).unwrap();
        assert_eq!(back.values, u.values);
        assert_eq!(back.grid, u.grid);
        assert_eq!(field_to_string(&back).unwrap(), text);
    }

    #[test]
    fn field_with_unknown_mode_rejected() {
        let modes = mode_table(&Circle { circumference: 2.0 }.groups(1));
        let text = "tau,mode,re,im\n-1,k=7,0,0\n-0.5,k=7,0,0\n0,k=7,0,0\n";
        assert!(matches!(parse_field(text, 1, 2.0, &modes), Err(Error::UnknownMode(_))));
    }
}
