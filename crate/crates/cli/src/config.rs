//! Scenario files.
//!
//! A scenario is a TOML document written as flat dotted keys, one per line:
//!
//! ```text
//! protocol.family = "phase_trojan"   # phase | phase_trojan | phase_matching | decoy
//! protocol.bases = 2                 # number of bases M (not for decoy)
//! protocol.nu = 1e-4                 # Trojan intensity (phase_trojan, decoy)
//! device.preset = "parameter1"       # parameter1 | parameter2 | ideal
//! device.p_dc = 6.02e-6              # optional overrides: p_dc, eta_det, xi, e_ali
//! sweep.axis = "distance"            # distance (km) | loss (total dB, detectors included)
//! sweep.values = [0, 10, 20]
//! grid.min = 1e-3                    # one grid shared by every free intensity...
//! grid.max = 1.0
//! grid.points = 16
//! grid.spacing = "log"               # log | linear
//! grid.values = [[0.1, 0.2]]         # ...or one explicit list per free intensity
//! methods = ["sdp", "coin", "plob", "infinite_test"]
//! solver.gap_tol = 1e-8              # optional: gap_tol, feas_tol, max_iter
//! output.path = "out.csv"            # optional
//! ```
//!
//! Free intensities: one `mu` for `phase` and `phase_trojan`, one per basis
//! for `phase_matching` (key basis first), and `(mu, zeta)` for `decoy`.
//! Without `device.preset` all four device fields are required.

use std::path::PathBuf;

use mdiqkd::channel::DeviceParams;
use mdiqkd::pipeline::Template;
use mdiqkd::rates::geomspace;
use mdiqkd::solver::SolverOptions;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sdp,
    Coin,
    Plob,
    InfiniteTest,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sdp => "sdp",
            Method::Coin => "coin",
            Method::Plob => "plob",
            Method::InfiniteTest => "infinite_test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Distance,
    Loss,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Distance => "distance",
            Axis::Loss => "loss",
        }
    }

    pub fn device_at(self, base: &DeviceParams, v: f64) -> DeviceParams {
        match self {
            Axis::Distance => base.at_distance(v),
            Axis::Loss => base.at_total_loss(v),
        }
    }
}

/// A parsed and validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub template: Template,
    pub device: DeviceParams,
    pub axis: Axis,
    pub sweep: Vec<f64>,
    /// One grid per free intensity.
    pub grids: Vec<Vec<f64>>,
    /// Sorted, without duplicates.
    pub methods: Vec<Method>,
    pub solver: SolverOptions,
    pub output: Option<PathBuf>,
}

impl Scenario {
    pub fn wants(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }

    /// Names of the free intensities, in grid order.
    pub fn intensity_names(&self) -> Vec<String> {
        match self.template {
            Template::Phase { .. } | Template::PhaseTrojan { .. } => vec!["mu".into()],
            Template::PhaseMatching { bases } => (0..bases).map(|i| format!("mu_{i}")).collect(),
            Template::Decoy { .. } => vec!["mu".into(), "zeta".into()],
        }
    }

    /// Canonical config text; parses back to an equal scenario.
    pub fn to_config(&self) -> String {
        let list = |v: &[f64]| format!("[{}]", v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", "));
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        let (family, bases, nu) = match self.template {
            Template::Phase { bases } => ("phase", Some(bases), None),
            Template::PhaseTrojan { bases, nu } => ("phase_trojan", Some(bases), Some(nu)),
            Template::PhaseMatching { bases } => ("phase_matching", Some(bases), None),
            Template::Decoy { nu } => ("decoy", None, Some(nu)),
        };
        line("protocol.family", format!("{family:?}"));
        if let Some(b) = bases {
            line("protocol.bases", b.to_string());
        }
        if let Some(nu) = nu {
            line("protocol.nu", format!("{nu:?}"));
        }
        let d = &self.device;
        line("device.p_dc", format!("{:?}", d.p_dc));
        line("device.eta_det", format!("{:?}", d.eta_det));
        line("device.xi", format!("{:?}", d.xi));
        line("device.e_ali", format!("{:?}", d.e_ali));
        line("sweep.axis", format!("{:?}", self.axis.name()));
        line("sweep.values", list(&self.sweep));
        line("grid.values", format!("[{}]", self.grids.iter().map(|g| list(g)).collect::<Vec<_>>().join(", ")));
        line("methods", format!("[{}]", self.methods.iter().map(|m| format!("{:?}", m.name())).collect::<Vec<_>>().join(", ")));
        line("solver.gap_tol", format!("{:?}", self.solver.gap_tol));
        line("solver.feas_tol", format!("{:?}", self.solver.feas_tol));
        line("solver.max_iter", self.solver.max_iter.to_string());
        if let Some(p) = &self.output {
            line("output.path", format!("{:?}", p.display().to_string()));
        }
        out
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    protocol: RawProtocol,
    device: Option<RawDevice>,
    sweep: RawSweep,
    grid: RawGrid,
    methods: Vec<Method>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum FamilyName {
    Phase,
    PhaseTrojan,
    PhaseMatching,
    Decoy,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    family: FamilyName,
    bases: Option<usize>,
    nu: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    preset: Option<String>,
    p_dc: Option<f64>,
    eta_det: Option<f64>,
    xi: Option<f64>,
    e_ali: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: Axis,
    values: Vec<f64>,
}

#[derive(Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum Spacing {
    Log,
    Linear,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    min: Option<f64>,
    max: Option<f64>,
    points: Option<usize>,
    spacing: Option<Spacing>,
    values: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    gap_tol: Option<f64>,
    feas_tol: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
}

/// 1-based line and column of a byte offset.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let head = &text[..offset.min(text.len())];
    let line = head.matches('\n').count() + 1;
    let col = head.len() - head.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// Error located at the first line assigning `key` or one of its subkeys,
/// in dotted form or under a `[section]` header; line 1 if none does.
fn at(text: &str, key: &str, message: impl Into<String>) -> CliError {
    let mut section = String::new();
    let mut line = 1;
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        let full = if let Some(h) = l.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            section = h.trim().to_string();
            section.clone()
        } else if let Some((k, _)) = l.split_once('=') {
            let k: String = k.chars().filter(|c| !c.is_whitespace()).collect();
            if section.is_empty() { k } else { format!("{section}.{k}") }
        } else {
            continue;
        };
        if full == key || full.starts_with(&format!("{key}.")) {
            line = i + 1;
            break;
        }
    }
    CliError::Config { line, column: 1, message: message.into() }
}

pub fn parse(text: &str) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| position(text, s.start));
        CliError::Config { line, column, message: e.message().trim().replace('\n', "; ") }
    })?;

    let p = raw.protocol;
    let need_bases = || p.bases.ok_or_else(|| at(text, "protocol", "protocol.bases is required for this family"));
    let template = match p.family {
        FamilyName::Phase => Template::Phase { bases: need_bases()? },
        FamilyName::PhaseTrojan => Template::PhaseTrojan {
            bases: need_bases()?,
            nu: p.nu.ok_or_else(|| at(text, "protocol", "protocol.nu is required for phase_trojan"))?,
        },
        FamilyName::PhaseMatching => Template::PhaseMatching { bases: need_bases()? },
        FamilyName::Decoy => {
            if p.bases.is_some() {
                return Err(at(text, "protocol.bases", "protocol.bases does not apply to decoy"));
            }
            Template::Decoy { nu: p.nu.unwrap_or(0.0) }
        }
    };
    if matches!(template, Template::Phase { .. } | Template::PhaseMatching { .. }) && p.nu.is_some() {
        return Err(at(text, "protocol.nu", "protocol.nu only applies to phase_trojan and decoy"));
    }
    match template {
        Template::Phase { bases } | Template::PhaseTrojan { bases, .. } | Template::PhaseMatching { bases }
            if bases == 0 =>
        {
            return Err(at(text, "protocol.bases", "protocol.bases must be positive"));
        }
        Template::PhaseTrojan { nu, .. } | Template::Decoy { nu } if !(nu >= 0.0) => {
            return Err(at(text, "protocol.nu", "protocol.nu must be nonnegative"));
        }
        _ => {}
    }

    let device = match raw.device {
        None => return Err(at(text, "device", "missing device section")),
        Some(d) => {
            let base = match &d.preset {
                Some(name) => Some(
                    DeviceParams::preset(name).ok_or_else(|| at(text, "device.preset", format!("unknown device preset {name:?}")))?,
                ),
                None => None,
            };
            let field = |v: Option<f64>, from: Option<f64>, key: &str| {
                v.or(from).ok_or_else(|| at(text, "device", format!("device.{key} is required without device.preset")))
            };
            let dev = DeviceParams {
                p_dc: field(d.p_dc, base.map(|b| b.p_dc), "p_dc")?,
                eta_det: field(d.eta_det, base.map(|b| b.eta_det), "eta_det")?,
                xi: field(d.xi, base.map(|b| b.xi), "xi")?,
                e_ali: field(d.e_ali, base.map(|b| b.e_ali), "e_ali")?,
                distance_km: 0.0,
                total_loss_db: None,
            };
            dev.validate().map_err(|e| at(text, "device", e.to_string()))?;
            dev
        }
    };

    let sweep = raw.sweep;
    if sweep.values.is_empty() {
        return Err(at(text, "sweep.values", "sweep.values is empty"));
    }
    if sweep.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(at(text, "sweep.values", "sweep values must be finite and nonnegative"));
    }

    let g = raw.grid;
    let arity = template.arity();
    let grids = match (&g.values, g.min, g.max, g.points) {
        (Some(v), None, None, None) if g.spacing.is_none() => {
            if v.len() != arity {
                return Err(at(text, "grid", format!("grid.values needs {arity} lists, one per free intensity")));
            }
            v.clone()
        }
        (None, Some(lo), Some(hi), Some(n)) => {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
                return Err(at(text, "grid", "grid needs 0 < min <= max and points > 0"));
            }
            let one = if g.spacing.as_ref().is_none_or(|s| *s == Spacing::Log) {
                geomspace(lo, hi, n)
            } else if n == 1 {
                vec![lo]
            } else {
                (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
            };
            vec![one; arity]
        }
        _ => return Err(at(text, "grid", "give either grid.values or all of grid.min, grid.max, grid.points")),
    };
    if grids.iter().any(|g| g.is_empty() || g.iter().any(|v| !(v.is_finite() && *v >= 0.0))) {
        return Err(at(text, "grid", "intensity grids must be nonempty lists of finite nonnegative values"));
    }

    let mut methods = raw.methods;
    if methods.is_empty() {
        return Err(at(text, "methods", "methods is empty; choose from sdp, coin, plob, infinite_test"));
    }
    methods.sort();
    methods.dedup();

    let defaults = SolverOptions::default();
    let solver = SolverOptions {
        gap_tol: raw.solver.gap_tol.unwrap_or(defaults.gap_tol),
        feas_tol: raw.solver.feas_tol.unwrap_or(defaults.feas_tol),
        max_iter: raw.solver.max_iter.unwrap_or(defaults.max_iter),
        ..defaults
    };
    if !(solver.gap_tol > 0.0 && solver.feas_tol > 0.0 && solver.max_iter > 0) {
        return Err(at(text, "solver", "solver tolerances and max_iter must be positive"));
    }

    Ok(Scenario {
        template,
        device,
        axis: sweep.axis,
        sweep: sweep.values,
        grids,
        methods,
        solver,
        output: raw.output.path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"protocol.family = "phase"
protocol.bases = 2
device.preset = "parameter1"
sweep.axis = "distance"
sweep.values = [0, 10]
grid.min = 0.01
grid.max = 1
grid.points = 3
methods = ["sdp", "coin"]
"#;

    #[test]
    fn parses_minimal_scenario() {
        let s = parse(BASE).unwrap();
        assert_eq!(s.template, Template::Phase { bases: 2 });
        assert_eq!(s.device, DeviceParams::parameter1());
        assert_eq!(s.sweep, vec![0.0, 10.0]);
        assert_eq!(s.grids.len(), 1);
        assert_eq!(s.grids[0].len(), 3);
        assert_eq!(s.methods, vec![Method::Sdp, Method::Coin]);
        assert_eq!(parse(&s.to_config()).unwrap(), s);
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let text = BASE.replace("grid.points = 3", "grid.points = 3\ngrid.pionts = 4");
        match parse(&text) {
            Err(CliError::Config { line, message, .. }) => {
                assert_eq!(line, 9, "{message}");
                assert!(message.contains("pionts"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_its_line() {
        let text = BASE.replace("sweep.values = [0, 10]", "sweep.values = [0, 10");
        // The unclosed array is detected where the next key starts.
        assert!(matches!(parse(&text), Err(CliError::Config { line: 6, .. })));
    }

    #[test]
    fn overrides_apply_on_top_of_preset() {
        let s = parse(&BASE.replace("device.preset = \"parameter1\"", "device.preset = \"parameter1\"\ndevice.e_ali = 0.02"))
            .unwrap();
        assert_eq!(s.device.e_ali, 0.02);
        assert_eq!(s.device.p_dc, DeviceParams::parameter1().p_dc);
    }

    #[test]
    fn invalid_combinations_rejected() {
        assert!(parse(&BASE.replace("protocol.bases = 2\n", "")).is_err());
        assert!(parse(&BASE.replace("device.preset = \"parameter1\"", "device.preset = \"nope\"")).is_err());
        assert!(parse(&BASE.replace("device.preset = \"parameter1\"", "device.p_dc = 0.0")).is_err());
        assert!(parse(&BASE.replace("sweep.values = [0, 10]", "sweep.values = []")).is_err());
        assert!(parse(&BASE.replace("grid.points = 3", "grid.values = [[0.1]]")).is_err());
        assert!(parse(&BASE.replace("\"phase\"", "\"phase_trojan\"")).is_err());
    }
}
