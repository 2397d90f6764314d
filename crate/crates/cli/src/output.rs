//! Rendering of reports. Every number goes through `{:?}` (shortest
//! round-trip) so CSV and JSON parse back to the same `f64`.

use serde::Serialize;
use serde_json::json;

use crate::commands::{
    AlgebraReport, BandsReport, ButterflyReport, CantorReport, IdsReport, OracleReport, Report,
};
use crate::config::{Format, RunConfig};

pub const SCHEMA: u32 = 1;
pub const TOOL: &str = "bandscope";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn render(config: &RunConfig, report: &Report) -> anyhow::Result<String> {
    match config.format {
        Format::Json => json_document(config, report),
        Format::Csv => Ok(csv_document(config, report)?),
        Format::Svg => crate::svg::render(config, report),
    }
}

fn json_document(config: &RunConfig, report: &Report) -> anyhow::Result<String> {
    #[derive(Serialize)]
    struct Envelope<'a> {
        schema: u32,
        tool: &'static str,
        version: &'static str,
        config: &'a RunConfig,
        result: &'a Report,
    }
    let mut text = serde_json::to_string_pretty(&Envelope {
        schema: SCHEMA,
        tool: TOOL,
        version: VERSION,
        config,
        result: report,
    })?;
    text.push('\n');
    Ok(text)
}

/// One-line metadata shared by the CSV and SVG headers.
pub fn metadata_line(config: &RunConfig) -> anyhow::Result<String> {
    Ok(format!(
        "{TOOL} {VERSION} schema={SCHEMA} config={}",
        serde_json::to_string(config)?
    ))
}

/// Shortest round-trip spelling of a float.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

struct Table {
    out: String,
}

impl Table {
    fn new(config: &RunConfig, columns: &[&str]) -> anyhow::Result<Self> {
        let mut out = format!("# {}\n", metadata_line(config)?);
        out.push_str(&columns.join(","));
        out.push('\n');
        Ok(Table { out })
    }

    fn row(&mut self, cells: &[String]) {
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }
}

fn csv_document(config: &RunConfig, report: &Report) -> anyhow::Result<String> {
    let table = match report {
        Report::Bands(r) => bands_csv(config, r)?,
        Report::Butterfly(r) => butterfly_csv(config, r)?,
        Report::Ids(r) => ids_csv(config, r)?,
        Report::Algebra(r) => algebra_csv(config, r)?,
        Report::Oracle(r) => oracle_csv(config, r)?,
        Report::Cantor(r) => cantor_csv(config, r)?,
    };
    Ok(table.out)
}

// record is one of band, gap, branch, sample; for samples i is the k index,
// j the band index, x = k and y = energy
fn bands_csv(config: &RunConfig, r: &BandsReport) -> anyhow::Result<Table> {
    let mut t = Table::new(config, &["record", "i", "j", "x", "y"])?;
    for (i, &(lo, hi)) in r.bands.intervals().iter().enumerate() {
        t.row(&["band".into(), i.to_string(), "0".into(), num(lo), num(hi)]);
    }
    for (i, [lo, hi]) in r.gaps.iter().enumerate() {
        t.row(&["gap".into(), i.to_string(), "0".into(), num(*lo), num(*hi)]);
    }
    for (i, [lo, hi]) in r.branches.iter().enumerate() {
        t.row(&["branch".into(), i.to_string(), "0".into(), num(*lo), num(*hi)]);
    }
    for (i, s) in r.samples.iter().enumerate() {
        for (j, &e) in s.energies.iter().enumerate() {
            t.row(&["sample".into(), i.to_string(), j.to_string(), num(s.k), num(e)]);
        }
    }
    Ok(t)
}

fn butterfly_csv(config: &RunConfig, r: &ButterflyReport) -> anyhow::Result<Table> {
    let mut t = Table::new(config, &["record", "flux", "alpha", "index", "lo", "hi"])?;
    for row in &r.rows {
        let flux = row.flux.to_string();
        let alpha = num(row.alpha);
        for (i, &(lo, hi)) in row.bands.intervals().iter().enumerate() {
            t.row(&["band".into(), flux.clone(), alpha.clone(), i.to_string(), num(lo), num(hi)]);
        }
        for (i, [lo, hi]) in row.branches.iter().enumerate() {
            t.row(&["branch".into(), flux.clone(), alpha.clone(), i.to_string(), num(*lo), num(*hi)]);
        }
    }
    Ok(t)
}

fn ids_csv(config: &RunConfig, r: &IdsReport) -> anyhow::Result<Table> {
    let mut t = Table::new(config, &["energy", "ids"])?;
    for (&e, &v) in r.energies.iter().zip(&r.values) {
        t.row(&[num(e), num(v)]);
    }
    Ok(t)
}

fn algebra_csv(config: &RunConfig, r: &AlgebraReport) -> anyhow::Result<Table> {
    let mut t = Table::new(config, &["quantity", "index", "value"])?;
    let mut put = |key: &str, index: usize, value: String| t.row(&[key.into(), index.to_string(), value]);
    put("flux", 0, r.flux.to_string());
    put("q", 0, r.q.to_string());
    put("omega", 0, num(r.omega[0]));
    put("omega", 1, num(r.omega[1]));
    put("relation_residual", 0, num(r.relation_residual));
    put("unitarity_residual", 0, num(r.unitarity_residual));
    put("trace_identity", 0, num(r.trace_identity));
    put("trace_harper", 0, num(r.trace_harper));
    put("trace_harper_squared", 0, num(r.trace_harper_squared));
    put("band_count", 0, r.band_count.to_string());
    put("band_bound", 0, r.band_bound.to_string());
    for (i, g) in r.gap_traces.iter().enumerate() {
        put("gap_energy", i, num(g.energy));
        put("gap_trace", i, num(g.trace));
        put("gap_lattice_distance", i, num(g.lattice_distance));
    }
    put("kadison_tol", 0, num(r.kadison_tol));
    put("passed", 0, r.passed.to_string());
    Ok(t)
}

fn oracle_csv(config: &RunConfig, r: &OracleReport) -> anyhow::Result<Table> {
    let mut t = Table::new(config, &["check", "metric", "value"])?;
    let mut put = |check: &str, metric: &str, value: String| t.row(&[check.into(), metric.into(), value]);
    put("all", "trials", r.trials.to_string());
    for (name, c) in [("unitarity", &r.unitarity), ("fiber_union", &r.fiber_union)] {
        put(name, "max_error", num(c.max_error));
        put(name, "tolerance", num(c.tolerance));
        put(name, "passed", c.passed.to_string());
    }
    let d = &r.direct_space;
    put("direct_space", "flux", d.flux.to_string());
    put("direct_space", "sites", d.sites.to_string());
    put("direct_space", "bulk", d.bulk.to_string());
    put("direct_space", "edge", d.edge.to_string());
    put("direct_space", "within", d.within.to_string());
    put("direct_space", "fraction", num(d.fraction));
    put("direct_space", "distance_tol", num(d.distance_tol));
    put("direct_space", "required_fraction", num(d.required_fraction));
    put("direct_space", "passed", d.passed.to_string());
    put("all", "passed", r.passed.to_string());
    Ok(t)
}

fn cantor_csv(config: &RunConfig, r: &CantorReport) -> anyhow::Result<Table> {
    let mut t = Table::new(config, &["flux", "q", "measure", "bands"])?;
    for p in &r.points {
        t.row(&[p.flux.to_string(), p.flux.q().to_string(), num(p.measure), p.bands.to_string()]);
    }
    Ok(t)
}

/// Machine-readable failure record for stderr.
pub fn error_record(kind: &str, exit_code: i32, message: &str) -> String {
    json!({
        "schema": SCHEMA,
        "tool": TOOL,
        "status": "error",
        "kind": kind,
        "exit_code": exit_code,
        "message": message,
    })
    .to_string()
}
