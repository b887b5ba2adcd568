//! Drives the report layer from code: verification over a short window,
//! then the symbolic set written as CSV, JSON and SVG.

use horseshoe::report::{cmd_lambda, cmd_verify, Format, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("horseshoe-report-example");
    let cfg = RunConfig {
        n_min: -5,
        n_max: 5,
        grid: 48,
        depth: 4,
        out: out.clone(),
        formats: vec![Format::Csv, Format::Json, Format::Svg],
        ..RunConfig::default()
    };
    cfg.validate()?;

    let (report, files) = cmd_verify(&cfg)?;
    print!("{}", report.summary());
    for f in files {
        println!("wrote {}", f.display());
    }

    let run = cmd_lambda(&cfg)?;
    println!("{} points at n = {}", run.points, run.n);
    for f in run.files {
        println!("wrote {}", f.display());
    }
    println!("config used:\n{}", cfg.to_toml());
    Ok(())
}
