//! File writers. Reals go out with 17 significant digits so that reruns are
//! byte-identical and values round-trip.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::DomainBox;
use crate::invariant::{LambdaApproximation, LambdaPoint};
use crate::map::Point2;
use crate::symbolic::Itinerary;

use super::config::{Format, RunConfig};
use super::svg::SvgWriter;

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path, e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

pub fn write_points_csv(path: &Path, points: &[Point2]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["x", "y"]).map_err(|e| io_err(path, e))?;
    for p in points {
        w.write_record([real(p.x), real(p.y)]).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[derive(Serialize)]
struct LambdaRecord {
    word: String,
    n: i64,
    x: f64,
    y: f64,
    err_bound: f64,
}

/// Writes symbolic points to every requested format as they arrive.
pub struct LambdaSink {
    csv: Option<(PathBuf, csv::Writer<BufWriter<File>>)>,
    json: Option<(PathBuf, BufWriter<File>, bool)>,
    svg: Option<(PathBuf, SvgWriter<BufWriter<File>>)>,
}

impl LambdaSink {
    /// `stem` is the file name without extension. The SVG writer, if any,
    /// must already have its strips drawn.
    pub fn open(cfg: &RunConfig, stem: &str, svg: Option<SvgWriter<BufWriter<File>>>) -> Result<Self> {
        let path = |ext: &str| cfg.out.join(format!("{stem}.{ext}"));
        let csv = if cfg.wants(Format::Csv) {
            let p = path("csv");
            let mut w = csv::Writer::from_writer(create(&p)?);
            w.write_record(["word", "n", "x", "y", "err_bound"]).map_err(|e| io_err(&p, e))?;
            Some((p, w))
        } else {
            None
        };
        let json = if cfg.wants(Format::Json) {
            let p = path("json");
            let mut w = create(&p)?;
            w.write_all(b"[").map_err(|e| io_err(&p, e))?;
            Some((p, w, true))
        } else {
            None
        };
        let svg = svg.map(|s| (path("svg"), s));
        Ok(LambdaSink { csv, json, svg })
    }

    pub fn push(&mut self, p: &LambdaPoint) -> Result<()> {
        if let Some((path, w)) = &mut self.csv {
            w.write_record([
                p.word.to_string(),
                p.word.base_time.to_string(),
                real(p.point.x),
                real(p.point.y),
                real(p.err_bound),
            ])
            .map_err(|e| io_err(path, e))?;
        }
        if let Some((path, w, first)) = &mut self.json {
            if !*first {
                w.write_all(b",").map_err(|e| io_err(path, e))?;
            }
            *first = false;
            w.write_all(b"\n  ").map_err(|e| io_err(path, e))?;
            let rec = LambdaRecord {
                word: p.word.to_string(),
                n: p.word.base_time,
                x: p.point.x,
                y: p.point.y,
                err_bound: p.err_bound,
            };
            serde_json::to_writer(&mut *w, &rec).map_err(|e| io_err(path, e))?;
        }
        if let Some((path, s)) = &mut self.svg {
            s.point(p.point, "point", "#c00").map_err(|e| io_err(path, e))?;
        }
        Ok(())
    }

    /// Closes every file and returns their paths.
    pub fn finish(self) -> Result<Vec<PathBuf>> {
        let mut files = Vec::new();
        if let Some((path, mut w)) = self.csv {
            w.flush().map_err(|e| io_err(&path, e))?;
            files.push(path);
        }
        if let Some((path, mut w, _)) = self.json {
            w.write_all(b"\n]\n").and_then(|_| w.flush()).map_err(|e| io_err(&path, e))?;
            files.push(path);
        }
        if let Some((path, s)) = self.svg {
            s.finish().map_err(|e| io_err(&path, e))?;
            files.push(path);
        }
        Ok(files)
    }
}

/// Reads a CSV written by [`LambdaSink`].
pub fn read_lambda_csv(path: &Path) -> Result<LambdaApproximation> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let mut points = Vec::new();
    let mut n_seen: Option<i64> = None;
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let field = |i: usize| -> Result<&str> {
            rec.get(i)
                .ok_or_else(|| Error::Parse(format!("{} row {}: missing column {i}", path.display(), k + 1)))
        };
        let num = |i: usize| -> Result<f64> {
            field(i)?
                .parse()
                .map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), k + 1)))
        };
        let n: i64 = field(1)?
            .parse()
            .map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), k + 1)))?;
        if n_seen.is_some_and(|m| m != n) {
            return Err(Error::Parse(format!("{} mixes time slices", path.display())));
        }
        n_seen = Some(n);
        points.push(LambdaPoint {
            word: Itinerary::parse(field(0)?, n)?,
            point: Point2::new(num(2)?, num(3)?),
            err_bound: num(4)?,
        });
    }
    let n = n_seen.ok_or_else(|| Error::Parse(format!("{} has no points", path.display())))?;
    let depth = points[0].word.past.len();
    Ok(LambdaApproximation { n, depth, points })
}

/// Opens an SVG for `stem` in the output directory.
pub fn open_svg(cfg: &RunConfig, stem: &str, domain: DomainBox, title: &str) -> Result<SvgWriter<BufWriter<File>>> {
    let path = cfg.out.join(format!("{stem}.svg"));
    SvgWriter::new(create(&path)?, domain, title).map_err(|e| io_err(&path, e))
}
