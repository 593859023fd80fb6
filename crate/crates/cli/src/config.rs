//! Run-configuration parsing and canonical emission.
//!
//! The format is flat `key = value` lines grouped under `[section]`
//! headers. Full-line `#` comments and blank lines are allowed. Unknown
//! sections, unknown keys, and duplicate keys are rejected with the line
//! number where they appear, so a typo never silently falls back to a
//! default. `emit_config` writes a canonical form that `parse_config`
//! reads back into an identical `RunConfig`; the CSV metadata header
//! relies on that round trip.

use crate::CliFail;
use srlaser_core::params::SystemParams;

/// Solver backend selected by the `method` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    Meanfield,
    Langevin,
    Su4Det,
    Su4Mc,
    Bruteforce,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Meanfield => "meanfield",
            Method::Langevin => "langevin",
            Method::Su4Det => "su4-det",
            Method::Su4Mc => "su4-mc",
            Method::Bruteforce => "bruteforce",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "analytic" => Some(Method::Analytic),
            "meanfield" => Some(Method::Meanfield),
            "langevin" => Some(Method::Langevin),
            "su4-det" => Some(Method::Su4Det),
            "su4-mc" => Some(Method::Su4Mc),
            "bruteforce" => Some(Method::Bruteforce),
            _ => None,
        }
    }

    /// Stochastic methods consume the seed; deterministic ones ignore it.
    pub fn is_stochastic(&self) -> bool {
        matches!(self, Method::Langevin | Method::Su4Mc)
    }
}

/// Which parameter the sweep grid walks over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    /// Repump rate w, in units of gamma.
    Repump,
    /// Crossover parameter xi; each grid point re-derives kappa (and
    /// possibly Omega) according to the `hold` rule.
    Xi,
}

impl SweepVar {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVar::Repump => "w",
            SweepVar::Xi => "xi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// What stays fixed while a xi sweep re-derives the cavity linewidth.
///
/// `Ratio` keeps r = Omega^2/(kappa gamma) at its base-parameter value, so
/// both kappa and Omega move with xi. `Omega` keeps the coupling fixed and
/// moves only kappa = sqrt(N Omega^2 / (8 xi)).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hold {
    Ratio,
    Omega,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
    /// Only meaningful for xi sweeps; rejected on w sweeps.
    pub hold: Hold,
    /// When true each xi grid point runs at its own w_opt instead of the
    /// base repump value. Only meaningful for xi sweeps.
    pub at_w_opt: bool,
}

/// Optional numeric controls; methods that need one of these reject the
/// config when it is absent rather than guessing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Numeric {
    pub dt: Option<f64>,
    pub t_relax: Option<f64>,
    pub t_collect: Option<f64>,
    pub n_traj: Option<usize>,
    pub m_cutoff: Option<usize>,
    pub tau_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub method: Method,
    pub seed: u64,
    pub out: Option<String>,
    pub sweep: Option<SweepSpec>,
    pub numeric: Numeric,
}

struct Line<'a> {
    number: usize,
    key: &'a str,
    value: &'a str,
}

fn fail(line: usize, msg: impl std::fmt::Display) -> CliFail {
    CliFail::Config(format!("line {line}: {msg}"))
}

fn parse_f64(l: &Line) -> Result<f64, CliFail> {
    l.value
        .parse::<f64>()
        .map_err(|_| fail(l.number, format!("`{}` expects a number, got `{}`", l.key, l.value)))
}

fn parse_usize(l: &Line) -> Result<usize, CliFail> {
    l.value
        .parse::<usize>()
        .map_err(|_| fail(l.number, format!("`{}` expects a non-negative integer, got `{}`", l.key, l.value)))
}

fn parse_u64(l: &Line) -> Result<u64, CliFail> {
    l.value
        .parse::<u64>()
        .map_err(|_| fail(l.number, format!("`{}` expects a non-negative integer, got `{}`", l.key, l.value)))
}

fn parse_bool(l: &Line) -> Result<bool, CliFail> {
    match l.value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(fail(l.number, format!("`{}` expects true or false, got `{}`", l.key, l.value))),
    }
}

/// Parse the flat key = value format. Strict: every key must belong to the
/// section it appears in, and no key may repeat.
pub fn parse_config(text: &str) -> Result<RunConfig, CliFail> {
    // Collected raw fields, filled section by section.
    let mut n_atoms: Option<usize> = None;
    let mut omega: Option<f64> = None;
    let mut kappa: Option<f64> = None;
    let mut repump: Option<f64> = None;
    let mut gamma: Option<f64> = None;
    let mut t2_inv: Option<f64> = None;
    let mut omega_a: Option<f64> = None;
    let mut omega_c: Option<f64> = None;

    let mut method: Option<Method> = None;
    let mut seed: Option<u64> = None;
    let mut out: Option<String> = None;

    let mut sw_variable: Option<(SweepVar, usize)> = None;
    let mut sw_min: Option<f64> = None;
    let mut sw_max: Option<f64> = None;
    let mut sw_points: Option<usize> = None;
    let mut sw_spacing: Option<Spacing> = None;
    let mut sw_hold: Option<(Hold, usize)> = None;
    let mut sw_at_w_opt: Option<(bool, usize)> = None;
    let mut sweep_section_line: Option<usize> = None;

    let mut numeric = Numeric::default();

    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Params,
        Run,
        Sweep,
        Numeric,
    }
    let mut section = Section::None;
    let mut seen: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "params" => Section::Params,
                "run" => Section::Run,
                "sweep" => {
                    sweep_section_line = Some(number);
                    Section::Sweep
                }
                "numeric" => Section::Numeric,
                other => return Err(fail(number, format!("unknown section `[{other}]`"))),
            };
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(fail(number, format!("expected `key = value`, got `{line}`")));
        };
        let l = Line { number, key: k.trim(), value: v.trim() };
        if l.key.is_empty() {
            return Err(fail(number, "empty key"));
        }
        let qualified = format!(
            "{}: {}",
            match section {
                Section::None => "",
                Section::Params => "params",
                Section::Run => "run",
                Section::Sweep => "sweep",
                Section::Numeric => "numeric",
            },
            l.key
        );
        if seen.contains(&qualified) {
            return Err(fail(number, format!("duplicate key `{}`", l.key)));
        }
        seen.push(qualified);

        match section {
            Section::None => {
                return Err(fail(number, format!("key `{}` before any [section] header", l.key)));
            }
            Section::Params => match l.key {
                "n_atoms" => n_atoms = Some(parse_usize(&l)?),
                "omega" => omega = Some(parse_f64(&l)?),
                "kappa" => kappa = Some(parse_f64(&l)?),
                "repump" => repump = Some(parse_f64(&l)?),
                "gamma" => gamma = Some(parse_f64(&l)?),
                "t2_inv" => t2_inv = Some(parse_f64(&l)?),
                "omega_a" => omega_a = Some(parse_f64(&l)?),
                "omega_c" => omega_c = Some(parse_f64(&l)?),
                other => return Err(fail(number, format!("unknown key `{other}` in [params]"))),
            },
            Section::Run => match l.key {
                "method" => {
                    method = Some(Method::parse(l.value).ok_or_else(|| {
                        fail(
                            number,
                            format!(
                                "unknown method `{}` (expected analytic, meanfield, langevin, su4-det, su4-mc, or bruteforce)",
                                l.value
                            ),
                        )
                    })?)
                }
                "seed" => seed = Some(parse_u64(&l)?),
                "out" => out = Some(l.value.to_string()),
                other => return Err(fail(number, format!("unknown key `{other}` in [run]"))),
            },
            Section::Sweep => match l.key {
                "variable" => {
                    sw_variable = Some((
                        match l.value {
                            "w" => SweepVar::Repump,
                            "xi" => SweepVar::Xi,
                            other => {
                                return Err(fail(
                                    number,
                                    format!("unknown sweep variable `{other}` (expected w or xi)"),
                                ))
                            }
                        },
                        number,
                    ))
                }
                "min" => sw_min = Some(parse_f64(&l)?),
                "max" => sw_max = Some(parse_f64(&l)?),
                "points" => sw_points = Some(parse_usize(&l)?),
                "spacing" => {
                    sw_spacing = Some(match l.value {
                        "linear" => Spacing::Linear,
                        "log" => Spacing::Log,
                        other => {
                            return Err(fail(
                                number,
                                format!("unknown spacing `{other}` (expected linear or log)"),
                            ))
                        }
                    })
                }
                "hold" => {
                    sw_hold = Some((
                        match l.value {
                            "ratio" => Hold::Ratio,
                            "omega" => Hold::Omega,
                            other => {
                                return Err(fail(
                                    number,
                                    format!("unknown hold rule `{other}` (expected ratio or omega)"),
                                ))
                            }
                        },
                        number,
                    ))
                }
                "at_w_opt" => sw_at_w_opt = Some((parse_bool(&l)?, number)),
                other => return Err(fail(number, format!("unknown key `{other}` in [sweep]"))),
            },
            Section::Numeric => match l.key {
                "dt" => numeric.dt = Some(parse_f64(&l)?),
                "t_relax" => numeric.t_relax = Some(parse_f64(&l)?),
                "t_collect" => numeric.t_collect = Some(parse_f64(&l)?),
                "n_traj" => numeric.n_traj = Some(parse_usize(&l)?),
                "m_cutoff" => numeric.m_cutoff = Some(parse_usize(&l)?),
                "tau_max" => numeric.tau_max = Some(parse_f64(&l)?),
                other => return Err(fail(number, format!("unknown key `{other}` in [numeric]"))),
            },
        }
    }

    // Assemble [params].
    let missing = |name: &str| CliFail::Config(format!("[params] is missing required key `{name}`"));
    let params = SystemParams {
        n_atoms: n_atoms.ok_or_else(|| missing("n_atoms"))?,
        omega: omega.ok_or_else(|| missing("omega"))?,
        kappa: kappa.ok_or_else(|| missing("kappa"))?,
        repump: repump.ok_or_else(|| missing("repump"))?,
        gamma: gamma.unwrap_or(1.0),
        t2_inv: t2_inv.unwrap_or(0.0),
        omega_a: omega_a.unwrap_or(0.0),
        omega_c: omega_c.unwrap_or(0.0),
    };
    params.validate().map_err(|e| CliFail::Config(format!("[params]: {e}")))?;

    let method = method.ok_or_else(|| CliFail::Config("[run] is missing required key `method`".into()))?;

    // Assemble [sweep] when present: all of variable/min/max/points must
    // appear together.
    let any_sweep = sw_variable.is_some()
        || sw_min.is_some()
        || sw_max.is_some()
        || sw_points.is_some()
        || sw_spacing.is_some()
        || sw_hold.is_some()
        || sw_at_w_opt.is_some()
        || sweep_section_line.is_some();
    let sweep = if any_sweep {
        let sline = sweep_section_line.unwrap_or(0);
        let miss = |name: &str| fail(sline, format!("[sweep] is missing required key `{name}`"));
        let (variable, _) = sw_variable.ok_or_else(|| miss("variable"))?;
        let min = sw_min.ok_or_else(|| miss("min"))?;
        let max = sw_max.ok_or_else(|| miss("max"))?;
        let points = sw_points.ok_or_else(|| miss("points"))?;
        if variable == SweepVar::Repump {
            if let Some((_, n)) = sw_hold {
                return Err(fail(n, "`hold` only applies to xi sweeps"));
            }
            if let Some((_, n)) = sw_at_w_opt {
                return Err(fail(n, "`at_w_opt` only applies to xi sweeps"));
            }
        }
        let spec = SweepSpec {
            variable,
            min,
            max,
            points,
            spacing: sw_spacing.unwrap_or(Spacing::Linear),
            hold: sw_hold.map(|(h, _)| h).unwrap_or(Hold::Ratio),
            at_w_opt: sw_at_w_opt.map(|(b, _)| b).unwrap_or(false),
        };
        validate_sweep(&spec)?;
        Some(spec)
    } else {
        None
    };

    let cfg = RunConfig {
        params,
        method,
        seed: seed.unwrap_or(0),
        out,
        sweep,
        numeric,
    };
    validate_method_requirements(&cfg)?;
    Ok(cfg)
}

fn validate_sweep(s: &SweepSpec) -> Result<(), CliFail> {
    let err = |m: &str| Err(CliFail::Config(format!("[sweep]: {m}")));
    if s.points == 0 {
        return err("`points` must be at least 1");
    }
    if s.points > 1 && !(s.min < s.max) {
        return err("`min` must be strictly below `max` when points > 1");
    }
    if s.spacing == Spacing::Log && s.min <= 0.0 {
        return err("log spacing needs `min` > 0");
    }
    if s.variable == SweepVar::Xi && s.min <= 0.0 {
        return err("xi sweeps need `min` > 0");
    }
    if !s.min.is_finite() || !s.max.is_finite() {
        return err("`min` and `max` must be finite");
    }
    Ok(())
}

fn validate_method_requirements(cfg: &RunConfig) -> Result<(), CliFail> {
    let need = |key: &str, present: bool| -> Result<(), CliFail> {
        if present {
            Ok(())
        } else {
            Err(CliFail::Config(format!(
                "method `{}` requires [numeric] key `{key}`",
                cfg.method.name()
            )))
        }
    };
    match cfg.method {
        Method::Langevin => {
            need("dt", cfg.numeric.dt.is_some())?;
            need("t_relax", cfg.numeric.t_relax.is_some())?;
            need("t_collect", cfg.numeric.t_collect.is_some())?;
            need("n_traj", cfg.numeric.n_traj.is_some())?;
        }
        Method::Su4Mc => {
            need("t_relax", cfg.numeric.t_relax.is_some())?;
            need("t_collect", cfg.numeric.t_collect.is_some())?;
            need("n_traj", cfg.numeric.n_traj.is_some())?;
        }
        _ => {}
    }
    if let Some(n) = cfg.numeric.n_traj {
        if n < 2 {
            return Err(CliFail::Config("[numeric]: `n_traj` must be at least 2".into()));
        }
    }
    if let Some(dt) = cfg.numeric.dt {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(CliFail::Config("[numeric]: `dt` must be a positive finite number".into()));
        }
    }
    Ok(())
}

/// Write the canonical text form. Every [params] field is explicit so the
/// emitted text parses back to the same `RunConfig` regardless of which
/// defaults the original relied on.
pub fn emit_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let p = &cfg.params;
    s.push_str("[params]\n");
    s.push_str(&format!("n_atoms = {}\n", p.n_atoms));
    s.push_str(&format!("omega = {}\n", p.omega));
    s.push_str(&format!("kappa = {}\n", p.kappa));
    s.push_str(&format!("repump = {}\n", p.repump));
    s.push_str(&format!("gamma = {}\n", p.gamma));
    s.push_str(&format!("t2_inv = {}\n", p.t2_inv));
    s.push_str(&format!("omega_a = {}\n", p.omega_a));
    s.push_str(&format!("omega_c = {}\n", p.omega_c));

    s.push_str("\n[run]\n");
    s.push_str(&format!("method = {}\n", cfg.method.name()));
    s.push_str(&format!("seed = {}\n", cfg.seed));
    if let Some(out) = &cfg.out {
        s.push_str(&format!("out = {out}\n"));
    }

    if let Some(sw) = &cfg.sweep {
        s.push_str("\n[sweep]\n");
        s.push_str(&format!("variable = {}\n", sw.variable.name()));
        s.push_str(&format!("min = {}\n", sw.min));
        s.push_str(&format!("max = {}\n", sw.max));
        s.push_str(&format!("points = {}\n", sw.points));
        s.push_str(&format!(
            "spacing = {}\n",
            match sw.spacing {
                Spacing::Linear => "linear",
                Spacing::Log => "log",
            }
        ));
        // hold/at_w_opt are xi-sweep concepts; emitting them on a w sweep
        // would make the round trip reject its own output.
        if sw.variable == SweepVar::Xi {
            s.push_str(&format!(
                "hold = {}\n",
                match sw.hold {
                    Hold::Ratio => "ratio",
                    Hold::Omega => "omega",
                }
            ));
            s.push_str(&format!("at_w_opt = {}\n", sw.at_w_opt));
        }
    }

    let n = &cfg.numeric;
    let any_numeric = n.dt.is_some()
        || n.t_relax.is_some()
        || n.t_collect.is_some()
        || n.n_traj.is_some()
        || n.m_cutoff.is_some()
        || n.tau_max.is_some();
    if any_numeric {
        s.push_str("\n[numeric]\n");
        if let Some(v) = n.dt {
            s.push_str(&format!("dt = {v}\n"));
        }
        if let Some(v) = n.t_relax {
            s.push_str(&format!("t_relax = {v}\n"));
        }
        if let Some(v) = n.t_collect {
            s.push_str(&format!("t_collect = {v}\n"));
        }
        if let Some(v) = n.n_traj {
            s.push_str(&format!("n_traj = {v}\n"));
        }
        if let Some(v) = n.m_cutoff {
            s.push_str(&format!("m_cutoff = {v}\n"));
        }
        if let Some(v) = n.tau_max {
            s.push_str(&format!("tau_max = {v}\n"));
        }
    }
    s
}
