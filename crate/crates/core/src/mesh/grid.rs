//! Gridded environmental input.
//!
//! The text format is a sequence of blocks, one per variable:
//!
//! ```text
//! variable sic
//! units percent
//! missing -999
//! lons -50 -49.5 -49
//! lats -70 -69.5
//! times 2020-01-01 2020-01-02
//! values
//! 10 20 30
//! 40 50 60
//! 11 21 31
//! 41 51 61
//! end
//! ```
//!
//! `values` holds `len(lats)` rows of `len(lons)` numbers per time step,
//! southern row first. `times` is optional for single-step blocks. Lines
//! starting with `#` are ignored. Known variables are `sic` (percent,
//! required), `depth` (metres, negative below sea level), `current_u`,
//! `current_v` (m/s, east and north) and `thickness` (metres).

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KNOWN_VARIABLES: [&str; 5] = ["sic", "depth", "current_u", "current_v", "thickness"];

/// One parsed variable block, all time steps kept.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableBlock {
    pub name: String,
    pub units: String,
    pub lons: Vec<f64>,
    pub lats: Vec<f64>,
    pub times: Vec<NaiveDate>,
    /// One `lats x lons` row-major slice per time step.
    pub slices: Vec<Vec<Option<f64>>>,
}

impl VariableBlock {
    pub fn value(&self, t: usize, j: usize, i: usize) -> Option<f64> {
        self.slices[t][j * self.lons.len() + i]
    }
}

/// Lat/lon bounds in degrees plus an optional inclusive date range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lon_min: f64,
    pub lon_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
    #[serde(default)]
    pub start: Option<NaiveDate>,
    #[serde(default)]
    pub end: Option<NaiveDate>,
}

impl Window {
    pub fn spatial(lon_min: f64, lon_max: f64, lat_min: f64, lat_max: f64) -> Self {
        Window {
            lon_min,
            lon_max,
            lat_min,
            lat_max,
            start: None,
            end: None,
        }
    }

    fn contains_date(&self, d: NaiveDate) -> bool {
        self.start.is_none_or(|s| d >= s) && self.end.is_none_or(|e| d <= e)
    }
}

/// A co-registered, time-averaged grid. Field vectors are `lats x lons`
/// row-major with `None` marking missing nodes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnvGrid {
    pub lons: Vec<f64>,
    pub lats: Vec<f64>,
    pub sic: Vec<Option<f64>>,
    pub depth: Option<Vec<Option<f64>>>,
    pub current_u: Option<Vec<Option<f64>>>,
    pub current_v: Option<Vec<Option<f64>>>,
    pub thickness: Option<Vec<Option<f64>>>,
    pub time_window: Option<(NaiveDate, NaiveDate)>,
}

impl EnvGrid {
    /// Grid from explicit fields, mainly for tests and examples.
    pub fn from_fields(lons: Vec<f64>, lats: Vec<f64>, sic: Vec<Option<f64>>) -> Result<Self> {
        let g = EnvGrid {
            lons,
            lats,
            sic,
            ..EnvGrid::default()
        };
        g.check()?;
        Ok(g)
    }

    pub fn with_depth(mut self, depth: Vec<Option<f64>>) -> Result<Self> {
        self.depth = Some(depth);
        self.check()?;
        Ok(self)
    }

    pub fn with_currents(mut self, u: Vec<Option<f64>>, v: Vec<Option<f64>>) -> Result<Self> {
        self.current_u = Some(u);
        self.current_v = Some(v);
        self.check()?;
        Ok(self)
    }

    pub fn with_thickness(mut self, h: Vec<Option<f64>>) -> Result<Self> {
        self.thickness = Some(h);
        self.check()?;
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.lons.len() * self.lats.len()
    }

    pub fn index(&self, j: usize, i: usize) -> usize {
        j * self.lons.len() + i
    }

    pub fn lon_range(&self) -> (f64, f64) {
        (self.lons[0], self.lons[self.lons.len() - 1])
    }

    pub fn lat_range(&self) -> (f64, f64) {
        (self.lats[0], self.lats[self.lats.len() - 1])
    }

    fn check(&self) -> Result<()> {
        check_axis("lons", &self.lons)?;
        check_axis("lats", &self.lats)?;
        let n = self.node_count();
        let fields = [
            ("sic", Some(&self.sic)),
            ("depth", self.depth.as_ref()),
            ("current_u", self.current_u.as_ref()),
            ("current_v", self.current_v.as_ref()),
            ("thickness", self.thickness.as_ref()),
        ];
        for (name, f) in fields {
            if let Some(f) = f {
                if f.len() != n {
                    return Err(Error::parse(name, format!("expected {n} values, found {}", f.len())));
                }
            }
        }
        for v in self.sic.iter().flatten() {
            if !(0.0..=100.0).contains(v) {
                return Err(Error::parse("sic", format!("value {v} outside [0, 100]")));
            }
        }
        Ok(())
    }
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::parse(name, "empty axis"));
    }
    if axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::parse(name, "non-finite coordinate"));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::parse(name, "coordinates must be strictly ascending"));
    }
    Ok(())
}

/// Parses every variable block in `text`. `origin` is used in messages.
pub fn parse_blocks(text: &str, origin: &str) -> Result<Vec<VariableBlock>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut blocks = Vec::new();

    while let Some((n, line)) = lines.next() {
        let (key, rest) = split_key(line);
        if key != "variable" || rest.is_empty() {
            return Err(Error::parse(
                "variable",
                format!("{origin}:{n}: expected `variable <name>`, found `{line}`"),
            ));
        }
        let name = rest.to_string();
        let mut units = String::new();
        let mut missing: Option<f64> = None;
        let mut lons = None;
        let mut lats = None;
        let mut times = Vec::new();

        loop {
            let Some((n, line)) = lines.next() else {
                return Err(Error::parse("values", format!("{origin}: block `{name}` has no `values` section")));
            };
            let (key, rest) = split_key(line);
            match key {
                "units" => units = rest.to_string(),
                "missing" => {
                    missing = Some(
                        rest.parse()
                            .map_err(|_| Error::parse("missing", format!("{origin}:{n}: bad sentinel `{rest}`")))?,
                    )
                }
                "lons" => lons = Some(parse_numbers(rest, "lons", origin, n)?),
                "lats" => lats = Some(parse_numbers(rest, "lats", origin, n)?),
                "times" => {
                    times = rest
                        .split_whitespace()
                        .map(|t| {
                            NaiveDate::parse_from_str(t, "%Y-%m-%d")
                                .map_err(|_| Error::parse("times", format!("{origin}:{n}: bad date `{t}`")))
                        })
                        .collect::<Result<_>>()?
                }
                "values" => break,
                other => {
                    return Err(Error::parse(
                        other,
                        format!("{origin}:{n}: unknown header field in block `{name}`"),
                    ))
                }
            }
        }

        let lons = lons.ok_or_else(|| Error::parse("lons", format!("{origin}: block `{name}` has no lons")))?;
        let lats = lats.ok_or_else(|| Error::parse("lats", format!("{origin}: block `{name}` has no lats")))?;
        check_axis("lons", &lons)?;
        check_axis("lats", &lats)?;
        let steps = times.len().max(1);
        let nlon = lons.len();
        let nlat = lats.len();

        let mut slices = Vec::with_capacity(steps);
        for _ in 0..steps {
            let mut slice = Vec::with_capacity(nlon * nlat);
            for _ in 0..nlat {
                let Some((n, row)) = lines.next() else {
                    return Err(Error::parse("values", format!("{origin}: block `{name}` ends early")));
                };
                let vals = parse_numbers(row, "values", origin, n)?;
                if vals.len() != nlon {
                    return Err(Error::parse(
                        "values",
                        format!("{origin}:{n}: expected {nlon} values in row, found {}", vals.len()),
                    ));
                }
                slice.extend(vals.into_iter().map(|v| match missing {
                    Some(m) if v == m => None,
                    _ if v.is_nan() => None,
                    _ => Some(v),
                }));
            }
            slices.push(slice);
        }
        match lines.next() {
            Some((_, "end")) => {}
            Some((n, other)) => {
                return Err(Error::parse(
                    "values",
                    format!("{origin}:{n}: expected `end` after block `{name}`, found `{other}`"),
                ))
            }
            None => return Err(Error::parse("end", format!("{origin}: block `{name}` not terminated"))),
        }

        blocks.push(VariableBlock {
            name,
            units,
            lons,
            lats,
            times,
            slices,
        });
    }
    Ok(blocks)
}

fn split_key(line: &str) -> (&str, &str) {
    match line.split_once(char::is_whitespace) {
        Some((k, r)) => (k, r.trim()),
        None => (line, ""),
    }
}

fn parse_numbers(s: &str, field: &str, origin: &str, line: usize) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::parse(field, format!("{origin}:{line}: bad number `{t}`")))
        })
        .collect()
}

/// Reads and parses blocks from each file in order.
pub fn read_blocks(paths: &[PathBuf]) -> Result<Vec<VariableBlock>> {
    let mut all = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        all.extend(parse_blocks(&text, &p.display().to_string())?);
    }
    Ok(all)
}

/// Loads grid files and crops them to `window`, averaging each node over the
/// time steps that fall inside the window. Missing samples are skipped; a
/// node with no valid sample stays missing.
pub fn load_grid(paths: &[PathBuf], window: &Window) -> Result<EnvGrid> {
    let blocks = read_blocks(paths)?;
    grid_from_blocks(&blocks, window)
}

pub fn grid_from_blocks(blocks: &[VariableBlock], window: &Window) -> Result<EnvGrid> {
    let sic_block = blocks
        .iter()
        .find(|b| b.name == "sic")
        .ok_or_else(|| Error::parse("sic", "no `sic` variable in grid input"))?;
    for b in blocks {
        if !KNOWN_VARIABLES.contains(&b.name.as_str()) {
            return Err(Error::parse(b.name.clone(), "unknown variable"));
        }
        if b.lons != sic_block.lons || b.lats != sic_block.lats {
            return Err(Error::parse(b.name.clone(), "lons/lats differ from the `sic` block"));
        }
    }
    if blocks.iter().filter(|b| b.name == "sic").count() > 1 {
        return Err(Error::parse("sic", "variable declared more than once"));
    }
    if let Some(v) = sic_block.slices.iter().flatten().flatten().find(|v| !(0.0..=100.0).contains(*v)) {
        return Err(Error::parse("sic", format!("value {v} outside [0, 100]")));
    }

    let ii = crop_indices(&sic_block.lons, window.lon_min, window.lon_max);
    let jj = crop_indices(&sic_block.lats, window.lat_min, window.lat_max);
    if ii.is_empty() || jj.is_empty() || window.lon_min > window.lon_max || window.lat_min > window.lat_max {
        return Err(Error::Domain(format!(
            "window lon [{}, {}] lat [{}, {}] does not intersect the grid",
            window.lon_min, window.lon_max, window.lat_min, window.lat_max
        )));
    }

    let averaged = |name: &str| -> Result<Option<Vec<Option<f64>>>> {
        let Some(b) = blocks.iter().find(|b| b.name == name) else {
            return Ok(None);
        };
        let steps: Vec<usize> = if b.times.is_empty() {
            vec![0]
        } else {
            (0..b.times.len()).filter(|&t| window.contains_date(b.times[t])).collect()
        };
        if steps.is_empty() {
            return Err(Error::Domain(format!("no `{name}` time steps inside the time window")));
        }
        let mut out = Vec::with_capacity(ii.len() * jj.len());
        for &j in &jj {
            for &i in &ii {
                let (sum, n) = steps
                    .iter()
                    .filter_map(|&t| b.value(t, j, i))
                    .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                out.push((n > 0).then(|| sum / n as f64));
            }
        }
        Ok(Some(out))
    };

    let dates: Vec<NaiveDate> = sic_block.times.iter().copied().filter(|d| window.contains_date(*d)).collect();
    let grid = EnvGrid {
        lons: ii.iter().map(|&i| sic_block.lons[i]).collect(),
        lats: jj.iter().map(|&j| sic_block.lats[j]).collect(),
        sic: averaged("sic")?.expect("sic block present"),
        depth: averaged("depth")?,
        current_u: averaged("current_u")?,
        current_v: averaged("current_v")?,
        thickness: averaged("thickness")?,
        time_window: dates.first().zip(dates.last()).map(|(a, b)| (*a, *b)),
    };
    grid.check()?;
    Ok(grid)
}

fn crop_indices(axis: &[f64], lo: f64, hi: f64) -> Vec<usize> {
    (0..axis.len()).filter(|&k| axis[k] >= lo - 1e-9 && axis[k] <= hi + 1e-9).collect()
}

/// Raw SIC time series kept unaveraged for route validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSic {
    pub block: VariableBlock,
}

impl RawSic {
    pub fn load(paths: &[PathBuf]) -> Result<Self> {
        let blocks = read_blocks(paths)?;
        Self::from_blocks(blocks)
    }

    pub fn from_blocks(blocks: Vec<VariableBlock>) -> Result<Self> {
        let block = blocks
            .into_iter()
            .find(|b| b.name == "sic")
            .ok_or_else(|| Error::parse("sic", "no `sic` variable in raw grid input"))?;
        Ok(RawSic { block })
    }

    /// Index of the time step in effect on `date`: the latest step not after
    /// it, or the first step for dates before the series.
    pub fn step_for(&self, date: NaiveDate) -> usize {
        if self.block.times.is_empty() {
            return 0;
        }
        self.block.times.partition_point(|t| *t <= date).saturating_sub(1)
    }
}

/// Writes a single-step block in the text format.
pub fn write_block(out: &mut String, name: &str, units: &str, lons: &[f64], lats: &[f64], values: &[Option<f64>]) {
    write_series(out, name, units, lons, lats, &[], &[values.to_vec()]);
}

/// Writes a multi-step block in the text format; `times` may be empty for a
/// single step.
pub fn write_series(
    out: &mut String,
    name: &str,
    units: &str,
    lons: &[f64],
    lats: &[f64],
    times: &[NaiveDate],
    slices: &[Vec<Option<f64>>],
) {
    use std::fmt::Write;
    let join = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "variable {name}");
    let _ = writeln!(out, "units {units}");
    let _ = writeln!(out, "missing -9999");
    let _ = writeln!(out, "lons {}", join(lons));
    let _ = writeln!(out, "lats {}", join(lats));
    if !times.is_empty() {
        let ts: Vec<String> = times.iter().map(|t| t.format("%Y-%m-%d").to_string()).collect();
        let _ = writeln!(out, "times {}", ts.join(" "));
    }
    let _ = writeln!(out, "values");
    for slice in slices {
        for row in slice.chunks(lons.len()) {
            let r: Vec<String> = row
                .iter()
                .map(|v| v.map_or_else(|| "-9999".to_string(), |x| x.to_string()))
                .collect();
            let _ = writeln!(out, "{}", r.join(" "));
        }
    }
    let _ = writeln!(out, "end");
}

pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
