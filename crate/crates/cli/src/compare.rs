//! Paired sweeps over a shared grid, joined row by row with per-observable
//! ratios. The guard is strict: both configs must walk the same variable
//! over bit-identical grid values, otherwise a "ratio" would silently
//! compare different operating points.

use crate::config::RunConfig;
use crate::csvout;
use crate::sweep::{self, SweepRow};
use crate::CliFail;
use std::time::{SystemTime, UNIX_EPOCH};

pub const COLUMNS: &str = "sweep_var,sweep_value,\
photons_a,photons_b,photons_ratio,g2_a,g2_b,g2_ratio,sz_a,sz_b,sz_ratio,\
spsm_a,spsm_b,spsm_ratio,pair_a,pair_b,pair_ratio,\
delta_nu_a,delta_nu_b,delta_nu_ratio,flags_a,flags_b";

fn effective_grid(cfg: &RunConfig) -> (&'static str, Vec<f64>) {
    match &cfg.sweep {
        Some(spec) => (spec.variable.name(), sweep::grid(spec)),
        None => ("w", vec![cfg.params.repump]),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn ratio(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) if y != 0.0 => {
            let r = x / y;
            r.is_finite().then_some(r)
        }
        _ => None,
    }
}

fn joined_line(var: &str, a: &SweepRow, b: &SweepRow) -> String {
    let mut cells: Vec<String> = Vec::with_capacity(22);
    cells.push(var.to_string());
    cells.push(format!("{}", a.sweep_value));
    for (va, vb) in [
        (a.photons.0, b.photons.0),
        (a.g2.0, b.g2.0),
        (a.sz.0, b.sz.0),
        (a.spsm.0, b.spsm.0),
        (a.pair.0, b.pair.0),
        (a.delta_nu, b.delta_nu),
    ] {
        cells.push(cell(va));
        cells.push(cell(vb));
        cells.push(cell(ratio(va, vb)));
    }
    cells.push(a.flags.join(";"));
    cells.push(b.flags.join(";"));
    cells.join(",")
}

/// Run both configs and emit the joined CSV.
pub fn compare(cfg_a: &RunConfig, cfg_b: &RunConfig) -> Result<String, CliFail> {
    let (var_a, grid_a) = effective_grid(cfg_a);
    let (var_b, grid_b) = effective_grid(cfg_b);
    if var_a != var_b {
        return Err(CliFail::Config(format!(
            "sweep variables differ: `{var_a}` vs `{var_b}`"
        )));
    }
    if grid_a.len() != grid_b.len() || grid_a.iter().zip(&grid_b).any(|(x, y)| x != y) {
        return Err(CliFail::Config(format!(
            "sweep grids differ ({} vs {} points, or unequal values); \
             compare requires identical grids",
            grid_a.len(),
            grid_b.len()
        )));
    }

    let res_a = sweep::run_sweep(cfg_a)?;
    let res_b = sweep::run_sweep(cfg_b)?;

    let mut s = String::new();
    s.push_str("# srlaser compare schema v1\n");
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    s.push_str(&format!("# generated-unix: {stamp}\n"));
    s.push_str(&format!("# version: {}\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("# conventions: {}\n", csvout::CONVENTIONS));
    for (tag, cfg) in [("a", cfg_a), ("b", cfg_b)] {
        s.push_str(&format!("# config-{tag}-begin\n"));
        for line in crate::config::emit_config(cfg).lines() {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
        s.push_str(&format!("# config-{tag}-end\n"));
    }
    s.push_str(COLUMNS);
    s.push('\n');
    for (ra, rb) in res_a.rows.iter().zip(&res_b.rows) {
        s.push_str(&joined_line(var_a, ra, rb));
        s.push('\n');
    }
    Ok(s)
}
