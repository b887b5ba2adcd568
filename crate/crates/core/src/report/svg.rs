//! Hand-written SVG. The domain box is mapped onto a 1000×1000 viewBox
//! with `y` pointing up.

use std::io::Write;

use crate::geometry::{DomainBox, Strip};
use crate::map::Point2;

pub const VIEW: f64 = 1000.0;

/// Streams one figure; points can be added one at a time.
pub struct SvgWriter<W: Write> {
    out: W,
    domain: DomainBox,
}

impl<W: Write> SvgWriter<W> {
    pub fn new(mut out: W, domain: DomainBox, title: &str) -> std::io::Result<Self> {
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {VIEW} {VIEW}" width="800" height="800">"#
        )?;
        writeln!(out, "<title>{}</title>", escape(title))?;
        writeln!(
            out,
            r#"<rect class="domain" x="0" y="0" width="{VIEW}" height="{VIEW}" fill="white" stroke="black" stroke-width="2"/>"#
        )?;
        Ok(SvgWriter { out, domain })
    }

    pub fn map(&self, p: Point2) -> (f64, f64) {
        let d = &self.domain;
        let x = (p.x - d.x.lo) / d.x.len() * VIEW;
        let y = (d.y.hi - p.y) / d.y.len() * VIEW;
        (x, y)
    }

    pub fn strip(&mut self, label: &str, strip: &Strip, color: &str) -> std::io::Result<()> {
        let pts: Vec<String> = strip
            .outline(129)
            .into_iter()
            .map(|p| {
                let (x, y) = self.map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        writeln!(
            self.out,
            r#"<polygon class="strip" data-strip="{}" points="{}" fill="{color}" fill-opacity="0.2" stroke="{color}" stroke-width="1"/>"#,
            escape(label),
            pts.join(" ")
        )
    }

    pub fn point(&mut self, p: Point2, class: &str, color: &str) -> std::io::Result<()> {
        let (x, y) = self.map(p);
        writeln!(
            self.out,
            r#"<circle class="{class}" cx="{x:.3}" cy="{y:.3}" r="1.5" fill="{color}"/>"#
        )
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        writeln!(self.out, "</svg>")?;
        self.out.flush()?;
        Ok(self.out)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
