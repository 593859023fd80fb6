//! CSV emission with a self-describing metadata header.
//!
//! Every output file carries the schema version, the solver conventions,
//! and a full config echo that `parse_config` reads back verbatim, so a
//! results file alone is enough to rerun the sweep. All numbers use the
//! shortest round-trip float form; apart from the `generated-unix` line
//! the bytes are a pure function of (config, seed).

use crate::config::emit_config;
use crate::sweep::{SweepResult, SweepRow};
use std::time::{SystemTime, UNIX_EPOCH};

pub const SCHEMA: &str = "srlaser sweep schema v1";
pub const CONVENTIONS: &str = "rotating frame at the cavity frequency; rates in units of gamma; \
linewidth = FWHM angular, |C(tau)| ~ exp(-delta_nu tau / 2); initial state: atoms ground, cavity vacuum";

pub const COLUMNS: &str = "sweep_var,sweep_value,photons,photons_se,photons2,photons2_se,\
g2,g2_se,sz,sz_se,spsm,spsm_se,pair,pair_se,delta_nu,delta_nu_se,fit_rms,\
pull_cavity,pull_atom,flags";

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn row_line(var: &str, row: &SweepRow) -> String {
    let mut cells: Vec<String> = Vec::with_capacity(20);
    cells.push(var.to_string());
    cells.push(format!("{}", row.sweep_value));
    for (v, se) in [row.photons, row.photons2, row.g2, row.sz, row.spsm, row.pair] {
        cells.push(cell(v));
        cells.push(cell(se));
    }
    cells.push(cell(row.delta_nu));
    cells.push(cell(row.delta_nu_se));
    cells.push(cell(row.fit_rms));
    cells.push(cell(row.pull_cavity));
    cells.push(cell(row.pull_atom));
    cells.push(row.flags.join(";"));
    cells.join(",")
}

/// Render a sweep result to CSV text, metadata header included.
pub fn render(result: &SweepResult) -> String {
    let mut s = String::new();
    s.push_str(&format!("# {SCHEMA}\n"));
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    s.push_str(&format!("# generated-unix: {stamp}\n"));
    s.push_str(&format!("# version: {}\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("# method: {}\n", result.config.method.name()));
    s.push_str(&format!("# conventions: {CONVENTIONS}\n"));
    s.push_str("# config-begin\n");
    for line in emit_config(&result.config).lines() {
        s.push_str("# ");
        s.push_str(line);
        s.push('\n');
    }
    s.push_str("# config-end\n");
    s.push_str(COLUMNS);
    s.push('\n');
    let var = result
        .config
        .sweep
        .as_ref()
        .map(|sw| sw.variable.name())
        .unwrap_or("w");
    for row in &result.rows {
        s.push_str(&row_line(var, row));
        s.push('\n');
    }
    s
}

/// Pull the config echo back out of rendered CSV text.
pub fn extract_config_text(csv: &str) -> Option<String> {
    let mut inside = false;
    let mut out = String::new();
    for line in csv.lines() {
        match line {
            "# config-begin" => inside = true,
            "# config-end" => return inside.then_some(out),
            _ if inside => {
                out.push_str(line.strip_prefix("# ").unwrap_or(line.strip_prefix('#')?));
                out.push('\n');
            }
            _ => {}
        }
    }
    None
}
