use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cone::{check_a1, check_a3_grid, derive_contraction, measure_contraction, ContractionBounds};
use crate::error::{Error, Result};
use crate::henon::{
    build_geometry, check_domain_inequalities, strip_separation_check, HenonGeometry, InequalityReport,
    InequalityRow,
};
use crate::invariant::{
    brute_force_survivors, compare_with_survivors, stream_lambda, LambdaApproximation, OracleAgreement,
    SurvivorOptions,
};
use crate::layout::StripLayout;
use crate::symbolic::{compute_transition_matrix, Refiner};

use super::config::{Format, RunConfig};
use super::output::{open_svg, read_lambda_csv, real, write_json, write_points_csv, LambdaSink};
use super::svg::SvgWriter;

/// `5 + 2√5`, below which the autonomous map is not known to carry a full horseshoe.
pub fn autonomous_threshold() -> f64 {
    5.0 + 2.0 * 5f64.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub n: i64,
    pub a: f64,
    pub domain_pass: bool,
    pub separation_pass: bool,
    pub a1_pass: bool,
    pub a3_pass: bool,
    pub worst_sector_margin: f64,
    pub worst_expansion_ratio: f64,
    pub grid_min_abs_y: f64,
    pub analytic_min_abs_y: f64,
    pub empirical_contraction: f64,
    pub transition_matrix: String,
    pub full_shift: bool,
    pub pass: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdDip {
    pub threshold: f64,
    pub min_a: f64,
    pub argmin_n: i64,
    /// Some scanned `A(n)` is below the threshold.
    pub below_threshold: bool,
    /// ... and the verification passed anyway.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub config: RunConfig,
    pub geometry: Option<HenonGeometry>,
    pub geometry_error: Option<String>,
    pub contraction: Option<ContractionBounds>,
    pub contraction_error: Option<String>,
    pub max_empirical_contraction: f64,
    pub min_sector_margin: f64,
    pub min_expansion_ratio: f64,
    pub min_grid_abs_y: f64,
    pub min_analytic_abs_y: f64,
    pub sector_threshold: f64,
    pub inequalities_checked: usize,
    pub min_inequality_margin: f64,
    pub inequality_failures: Vec<InequalityRow>,
    pub threshold_dip: ThresholdDip,
    pub rows: Vec<VerifyRow>,
    pub pass: bool,
    #[serde(skip)]
    pub inequalities: InequalityReport,
}

impl VerificationReport {
    /// Every failure in one list, each naming what was violated.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(e) = &self.geometry_error {
            out.push(format!("geometry: {e}"));
        }
        if let Some(e) = &self.contraction_error {
            out.push(format!("contraction: {e}"));
        }
        out.extend(self.inequality_failures.iter().map(InequalityRow::describe));
        for r in &self.rows {
            out.extend(r.failures.iter().map(|f| format!("n = {}: {f}", r.n)));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        s += &format!(
            "A* = {}, eps = {}, n in [{}, {}], grid {}, mu_h = {}, mu_v = {}, mu = {}\n",
            c.a_star, c.epsilon, c.n_min, c.n_max, c.grid, c.mu_h, c.mu_v, c.mu
        );
        if let Some(g) = &self.geometry {
            s += &format!("R = {:.6}\n", g.r);
        }
        match (&self.contraction, &self.contraction_error) {
            (Some(b), _) => s += &format!("nu_v = {:.6}, nu_h = {:.6}\n", b.nu_v, b.nu_h),
            (_, Some(e)) => s += &format!("contraction: {e}\n"),
            _ => {}
        }
        s += &format!(
            "min sector margin {:.6e}, min expansion ratio {:.6}, min |y| on grid {:.6} (threshold {:.6})\n",
            self.min_sector_margin, self.min_expansion_ratio, self.min_grid_abs_y, self.sector_threshold
        );
        s += &format!("max measured width ratio {:.6}\n", self.max_empirical_contraction);
        s += &format!(
            "{} inequalities checked, min margin {:.6e}\n",
            self.inequalities_checked, self.min_inequality_margin
        );
        let r = &self.threshold_dip;
        s += &format!(
            "min A(n) = {:.6} at n = {} vs 5 + 2*sqrt(5) = {:.6}: {}\n",
            r.min_a,
            r.argmin_n,
            r.threshold,
            if r.flagged {
                "below the autonomous threshold while verification passes"
            } else if r.below_threshold {
                "below the autonomous threshold"
            } else {
                "not below the autonomous threshold"
            }
        );
        let failures = self.failures();
        for f in failures.iter().take(20) {
            s += &format!("FAIL {f}\n");
        }
        if failures.len() > 20 {
            s += &format!("... {} more failures\n", failures.len() - 20);
        }
        s += if self.pass { "verification PASSED\n" } else { "verification FAILED\n" };
        s
    }
}

fn verify_row(
    g: &HenonGeometry,
    refiner: &Refiner<'_>,
    cfg: &RunConfig,
    nu: Option<f64>,
    n: i64,
    domain: &InequalityReport,
    separation: &InequalityReport,
) -> Result<VerifyRow> {
    let seq = g.sequence();
    let cone = cfg.cone_params()?;
    let mut failures = Vec::new();
    let a1 = check_a1(&seq, g, n, cfg.a1_samples);
    for p in &a1.pairs {
        failures.extend(p.failures.iter().map(|f| format!("strip mapping H{} x V{}: {f}", p.i, p.j)));
    }
    let a3 = check_a3_grid(&seq, g, n, cfg.grid, &cone)?;
    if !a3.analytic_pass {
        if a3.analytic_min_abs_y <= a3.threshold_y {
            failures.push(format!(
                "sector threshold: min |y| on strip intersections {:.6} <= (mu_v + 1/mu_v)/2 = {:.6}",
                a3.analytic_min_abs_y, a3.threshold_y
            ));
        }
        if a3.analytic_min_abs_x <= a3.threshold_x {
            failures.push(format!(
                "sector threshold: min |x| on their preimages {:.6} <= (mu_h + 1/mu_h)/2 = {:.6}",
                a3.analytic_min_abs_x, a3.threshold_x
            ));
        }
    }
    if !a3.pass {
        failures.push(format!(
            "sector sweep: {} of {} checks fail, worst margin {:.6e}, worst expansion ratio {:.6}{}",
            a3.failure_count,
            4 * a3.points_checked,
            a3.worst_sector_margin,
            a3.worst_expansion_ratio,
            a3.failures.first().map(|f| format!(" ({})", f.reason)).unwrap_or_default()
        ));
    }
    let tm = compute_transition_matrix(g, n);
    let full_shift = tm.is_all_ones();
    if !full_shift {
        failures.push(format!("transition matrix {tm} is not all ones"));
    }
    let empirical = match measure_contraction(refiner, n, cfg.contraction_depth) {
        Ok(m) => {
            if let Some(nu) = nu {
                if m.max_ratio >= nu {
                    failures.push(format!("measured width ratio {:.6} >= nu = {nu:.6}", m.max_ratio));
                }
            }
            m.max_ratio
        }
        Err(e) => {
            failures.push(format!("refinement: {e}"));
            f64::NAN
        }
    };
    let a3_pass = a3.pass && a3.analytic_pass;
    let row = VerifyRow {
        n,
        a: g.a(n),
        domain_pass: domain.pass(),
        separation_pass: separation.pass(),
        a1_pass: a1.pass,
        a3_pass,
        worst_sector_margin: a3.worst_sector_margin,
        worst_expansion_ratio: a3.worst_expansion_ratio,
        grid_min_abs_y: a3.grid_min_abs_y,
        analytic_min_abs_y: a3.analytic_min_abs_y,
        empirical_contraction: empirical,
        transition_matrix: tm.to_string(),
        full_shift,
        pass: false,
        failures,
    };
    let pass = row.domain_pass && row.separation_pass && row.failures.is_empty();
    Ok(VerifyRow { pass, ..row })
}

/// Runs every check over the configured window. Never writes files.
pub fn verify(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let params = cfg.params()?;
    let cone = cfg.cone_params()?;
    let (contraction, contraction_error) = match derive_contraction(&cone) {
        Ok(b) => (Some(b), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let mut inequalities = InequalityReport::default();
    let mut per_n = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let domain = check_domain_inequalities(&params, n..=n);
        let mut separation = strip_separation_check(&params, cfg.mu_v, n);
        let keep_global = n == cfg.n_min;
        let mut d = domain.clone();
        d.rows.retain(|r| keep_global || r.n.is_some());
        separation.rows.retain(|r| r.n.is_some());
        inequalities.extend(d);
        inequalities.extend(separation.clone());
        per_n.push((n, domain, separation));
    }
    // global separation rows once
    inequalities.extend(InequalityReport {
        rows: strip_separation_check(&params, cfg.mu_v, cfg.n_min)
            .rows
            .into_iter()
            .filter(|r| r.n.is_none())
            .collect(),
    });

    let built = build_geometry(params).and_then(|g| g.with_cones(cfg.mu_h, cfg.mu_v));
    let (geometry, geometry_error) = match built {
        Ok(g) => (Some(g), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let mut rows = Vec::new();
    if let Some(g) = &geometry {
        let seq = g.sequence();
        let refiner = Refiner::new(g, &seq);
        let nu = contraction.map(|b| b.nu_v.max(b.nu_h));
        for (n, domain, separation) in &per_n {
            rows.push(verify_row(g, &refiner, cfg, nu, *n, domain, separation)?);
        }
    }

    let fold = |f: &dyn Fn(&VerifyRow) -> f64| rows.iter().map(f).fold(f64::INFINITY, f64::min);
    let min_sector_margin = fold(&|r| r.worst_sector_margin);
    let min_expansion_ratio = fold(&|r| r.worst_expansion_ratio);
    let min_grid_abs_y = fold(&|r| r.grid_min_abs_y);
    let min_analytic_abs_y = fold(&|r| r.analytic_min_abs_y);
    let max_empirical_contraction = rows.iter().map(|r| r.empirical_contraction).fold(0.0, f64::max);

    let pass = geometry.is_some()
        && contraction.is_some()
        && inequalities.pass()
        && !rows.is_empty()
        && rows.iter().all(|r| r.pass);

    let (argmin_n, min_a) = (cfg.n_min..=cfg.n_max)
        .map(|n| (n, params.eval_a(n)))
        .fold((cfg.n_min, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let threshold = autonomous_threshold();
    let threshold_dip = ThresholdDip {
        threshold,
        min_a,
        argmin_n,
        below_threshold: min_a < threshold,
        flagged: min_a < threshold && pass,
    };

    Ok(VerificationReport {
        config: cfg.clone(),
        geometry,
        geometry_error,
        contraction,
        contraction_error,
        max_empirical_contraction,
        min_sector_margin,
        min_expansion_ratio,
        min_grid_abs_y,
        min_analytic_abs_y,
        sector_threshold: crate::henon::sector_threshold(cfg.mu_v),
        inequalities_checked: inequalities.rows.len(),
        min_inequality_margin: inequalities.min_margin(),
        inequality_failures: inequalities.failures().cloned().collect(),
        threshold_dip,
        rows,
        pass,
        inequalities,
    })
}

fn rows_csv(rows: &[VerifyRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record([
        "n",
        "a",
        "domain_pass",
        "separation_pass",
        "a1_pass",
        "a3_pass",
        "worst_sector_margin",
        "worst_expansion_ratio",
        "grid_min_abs_y",
        "analytic_min_abs_y",
        "empirical_contraction",
        "transition_matrix",
        "pass",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            real(r.a),
            r.domain_pass.to_string(),
            r.separation_pass.to_string(),
            r.a1_pass.to_string(),
            r.a3_pass.to_string(),
            real(r.worst_sector_margin),
            real(r.worst_expansion_ratio),
            real(r.grid_min_abs_y),
            real(r.analytic_min_abs_y),
            real(r.empirical_contraction),
            r.transition_matrix.clone(),
            r.pass.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn draw_strips<W: std::io::Write>(svg: &mut SvgWriter<W>, g: &HenonGeometry, n: i64) -> std::io::Result<()> {
    for s in g.symbols() {
        if let Some(v) = g.vertical_strip(n, s) {
            svg.strip(&format!("V{s}"), &v, "#1f77b4")?;
        }
    }
    for s in g.symbols() {
        if let Some(h) = g.horizontal_strip(n - 1, s) {
            svg.strip(&format!("H{s}"), &h, "#2ca02c")?;
        }
    }
    Ok(())
}

fn strip_figure(cfg: &RunConfig, g: &HenonGeometry, stem: &str, title: &str) -> Result<SvgWriter<std::io::BufWriter<std::fs::File>>> {
    let mut svg = open_svg(cfg, stem, g.domain_box(), title)?;
    draw_strips(&mut svg, g, cfg.n).map_err(|e| Error::Io(e.to_string()))?;
    Ok(svg)
}

/// Runs [`verify`] and writes the report files.
pub fn cmd_verify(cfg: &RunConfig) -> Result<(VerificationReport, Vec<PathBuf>)> {
    let report = verify(cfg)?;
    let mut files = Vec::new();
    if cfg.wants(Format::Json) {
        let p = cfg.out.join("verify.json");
        write_json(&p, &report)?;
        files.push(p);
    }
    if cfg.wants(Format::Csv) {
        let p = cfg.out.join("verify.csv");
        super::output::write_text(&p, &rows_csv(&report.rows)?)?;
        files.push(p);
        let p = cfg.out.join("inequalities.csv");
        super::output::write_text(&p, &report.inequalities.to_csv())?;
        files.push(p);
    }
    if cfg.wants(Format::Svg) {
        if let Some(g) = &report.geometry {
            let svg = strip_figure(cfg, g, "strips", &format!("strips at n = {}", cfg.n))?;
            svg.finish().map_err(|e| Error::Io(e.to_string()))?;
            files.push(cfg.out.join("strips.svg"));
        }
    }
    Ok((report, files))
}

/// Verification over the times a depth-`depth` word at `n` touches.
fn precheck(cfg: &RunConfig, depth: usize) -> Result<HenonGeometry> {
    cfg.validate()?;
    let g = build_geometry(cfg.params()?)?.with_cones(cfg.mu_h, cfg.mu_v)?;
    if cfg.force {
        return Ok(g);
    }
    let local = RunConfig {
        n_min: cfg.n - depth as i64 - 1,
        n_max: cfg.n + depth as i64 + 1,
        ..cfg.clone()
    };
    let report = verify(&local)?;
    if !report.pass {
        let first = report.failures().into_iter().next().unwrap_or_default();
        return Err(Error::VerificationFailed(format!(
            "times [{}, {}]: {first} (use --force to proceed anyway)",
            local.n_min, local.n_max
        )));
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaRun {
    pub n: i64,
    pub depth: usize,
    pub points: usize,
    pub files: Vec<PathBuf>,
}

fn lambda_files(cfg: &RunConfig, stem: &str, svg_only: bool) -> Result<LambdaRun> {
    let g = precheck(cfg, cfg.depth)?;
    let seq = g.sequence();
    let refiner = Refiner::new(&g, &seq);
    let svg = if cfg.wants(Format::Svg) || svg_only {
        Some(strip_figure(
            cfg,
            &g,
            stem,
            &format!("invariant set approximation at n = {}, depth {}", cfg.n, cfg.depth),
        )?)
    } else {
        None
    };
    let sink_cfg = if svg_only {
        RunConfig {
            formats: vec![Format::Svg],
            ..cfg.clone()
        }
    } else {
        cfg.clone()
    };
    let mut sink = LambdaSink::open(&sink_cfg, stem, svg)?;
    let points = stream_lambda(&refiner, cfg.n, cfg.depth, |p| sink.push(&p))?;
    Ok(LambdaRun {
        n: cfg.n,
        depth: cfg.depth,
        points,
        files: sink.finish()?,
    })
}

/// Writes the symbolic approximation of the set at time `cfg.n`.
pub fn cmd_lambda(cfg: &RunConfig) -> Result<LambdaRun> {
    lambda_files(cfg, &format!("lambda_n{}_d{}", cfg.n, cfg.depth), false)
}

/// Strips at time `cfg.n` with the symbolic points on top, as SVG.
pub fn cmd_plot(cfg: &RunConfig) -> Result<LambdaRun> {
    lambda_files(cfg, &format!("plot_n{}_d{}", cfg.n, cfg.depth), true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRun {
    pub agreement: OracleAgreement,
    pub files: Vec<PathBuf>,
}

/// Compares the symbolic set at depth `cfg.window` (or one read from
/// `lambda_csv`) with the survivor cloud over the same window.
pub fn cmd_oracle(cfg: &RunConfig, lambda_csv: Option<&Path>) -> Result<OracleRun> {
    let given = match lambda_csv {
        Some(p) => {
            let l = read_lambda_csv(p)?;
            if l.n != cfg.n {
                return Err(Error::Usage(format!(
                    "{} holds the set at n = {} but the oracle runs at n = {}",
                    p.display(),
                    l.n,
                    cfg.n
                )));
            }
            Some(l)
        }
        None => None,
    };
    let g = precheck(cfg, cfg.window)?;
    let seq = g.sequence();
    let lambda = match given {
        Some(l) => l,
        None => {
            let refiner = Refiner::new(&g, &seq);
            let mut points = Vec::new();
            stream_lambda(&refiner, cfg.n, cfg.window.max(1), |p| {
                points.push(p);
                Ok(())
            })?;
            LambdaApproximation {
                n: cfg.n,
                depth: cfg.window.max(1),
                points,
            }
        }
    };
    let opts = SurvivorOptions {
        adaptive: cfg.adaptive,
        ..Default::default()
    };
    let cloud = brute_force_survivors(&g, &seq, cfg.n, cfg.window, cfg.oracle_grid, opts)?;
    if cloud.points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let agreement = compare_with_survivors(&lambda, &cloud)?;

    let stem = format!("oracle_n{}_k{}", cfg.n, cfg.window);
    let mut files = Vec::new();
    let p = cfg.out.join(format!("{stem}.json"));
    write_json(&p, &agreement)?;
    files.push(p);
    if cfg.wants(Format::Csv) {
        let p = cfg.out.join(format!("{stem}_survivors.csv"));
        write_points_csv(&p, &cloud.points)?;
        files.push(p);
    }
    if cfg.wants(Format::Svg) {
        let mut svg = strip_figure(cfg, &g, &stem, &format!("survivors and symbolic points at n = {}", cfg.n))?;
        let io = |e: std::io::Error| Error::Io(e.to_string());
        for &q in &cloud.points {
            svg.point(q, "survivor", "#888").map_err(io)?;
        }
        for p in &lambda.points {
            svg.point(p.point, "point", "#c00").map_err(io)?;
        }
        svg.finish().map_err(io)?;
        files.push(cfg.out.join(format!("{stem}.svg")));
    }
    Ok(OracleRun { agreement, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(dir: &Path) -> RunConfig {
        RunConfig {
            n_min: -2,
            n_max: 2,
            grid: 16,
            depth: 3,
            window: 3,
            oracle_grid: 256,
            adaptive: true,
            out: dir.to_path_buf(),
            ..Default::default()
        }
    }

    #[test]
    fn autonomous_threshold_value() {
        assert!((autonomous_threshold() - 9.472135955).abs() < 1e-9);
    }

    #[test]
    fn verify_small_window() {
        let dir = tempfile::tempdir().unwrap();
        let (rep, files) = cmd_verify(&small(dir.path())).unwrap();
        assert!(rep.pass, "{}", rep.summary());
        assert_eq!(rep.rows.len(), 5);
        assert!(rep.threshold_dip.flagged);
        assert_eq!(rep.threshold_dip.argmin_n, -2);
        assert_eq!(files.len(), 4);
        let csv = std::fs::read_to_string(dir.path().join("verify.csv")).unwrap();
        assert_eq!(csv.lines().count(), 6);
    }

    #[test]
    fn below_the_verified_regime() {
        let cfg = RunConfig {
            a_star: 8.0,
            ..small(Path::new("unused"))
        };
        let rep = verify(&cfg).unwrap();
        assert!(!rep.pass);
        assert!(rep.geometry.is_none());
        assert!(rep.inequality_failures.iter().any(|r| r.id == "xbar2 < x2"));
    }

    #[test]
    fn lambda_rows_and_svg_inventory() {
        let dir = tempfile::tempdir().unwrap();
        let run = cmd_lambda(&small(dir.path())).unwrap();
        assert_eq!(run.points, 128);
        let csv = std::fs::read_to_string(dir.path().join("lambda_n0_d3.csv")).unwrap();
        assert_eq!(csv.lines().count(), 129);
        assert!(csv.starts_with("word,n,x,y,err_bound\n"));
        let svg = std::fs::read_to_string(dir.path().join("lambda_n0_d3.svg")).unwrap();
        assert_eq!(svg.matches("class=\"strip\"").count(), 4);
        assert_eq!(svg.matches("class=\"domain\"").count(), 1);
        assert_eq!(svg.matches("class=\"point\"").count(), 128);
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("lambda_n0_d3.json")).unwrap()).unwrap();
        assert_eq!(json.as_array().unwrap().len(), 128);
        let back = read_lambda_csv(&dir.path().join("lambda_n0_d3.csv")).unwrap();
        assert_eq!(back.points.len(), 128);
        assert_eq!(back.depth, 3);
    }

    #[test]
    fn oracle_rejects_other_time_slice() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path());
        cmd_lambda(&cfg).unwrap();
        let other = RunConfig { n: 1, ..cfg.clone() };
        let r = cmd_oracle(&other, Some(&dir.path().join("lambda_n0_d3.csv")));
        assert!(matches!(r, Err(Error::Usage(_))));
        let ok = cmd_oracle(&cfg, Some(&dir.path().join("lambda_n0_d3.csv"))).unwrap();
        assert!(ok.agreement.pass, "{:?}", ok.agreement);
    }

    #[test]
    fn failing_verification_blocks_lambda_unless_forced() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            mu: 0.615,
            ..small(dir.path())
        };
        assert!(matches!(cmd_lambda(&cfg), Err(Error::VerificationFailed(_))));
        let forced = RunConfig { force: true, ..cfg };
        assert_eq!(cmd_lambda(&forced).unwrap().points, 128);
    }
}
