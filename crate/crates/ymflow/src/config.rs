//! Flat key-value run configuration: parsing that collects every
//! violation with its key path, canonical emission, and the cross-field
//! validity rules the runner relies on.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::flow::{FlowMode, StepperConfig};
use crate::grid::{Bc, Domain, Grid};
use crate::lie::GroupKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Direct,
    Zds,
    ZdsRecovered,
}

impl RunMode {
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            RunMode::Direct => "direct",
            RunMode::Zds => "zds",
            RunMode::ZdsRecovered => "zds_recovered",
        }
    }

    /// Stepping mode of the underlying trajectory.
    #[must_use]
    pub fn flow_mode(self) -> FlowMode {
        match self {
            RunMode::Direct => FlowMode::Direct,
            RunMode::Zds | RunMode::ZdsRecovered => FlowMode::Smoothing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Zero,
    Smooth,
    PureGauge,
    U1Mode,
    HaSample,
    Checkpoint,
}

impl InitKind {
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            InitKind::Zero => "zero",
            InitKind::Smooth => "smooth",
            InitKind::PureGauge => "pure_gauge",
            InitKind::U1Mode => "u1_mode",
            InitKind::HaSample => "ha_sample",
            InitKind::Checkpoint => "checkpoint",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub kind: InitKind,
    pub seed: u64,
    pub amplitude: f64,
    /// Sobolev exponent of `ha_sample` draws.
    pub a: f64,
    /// Component picked by `u1_mode`.
    pub comp: usize,
    /// Per-axis mode indices of `u1_mode`.
    pub wave: [usize; 3],
    pub checkpoint: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ObservableKind {
    Energy,
    Dissipation,
    SupCurvature,
    AAction,
    Wilson,
    SmallTime,
    EpsilonFamily,
    Boundary,
    Bianchi,
}

impl ObservableKind {
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            ObservableKind::Energy => "energy",
            ObservableKind::Dissipation => "dissipation",
            ObservableKind::SupCurvature => "sup_curvature",
            ObservableKind::AAction => "a_action",
            ObservableKind::Wilson => "wilson",
            ObservableKind::SmallTime => "small_time",
            ObservableKind::EpsilonFamily => "epsilon_family",
            ObservableKind::Boundary => "boundary",
            ObservableKind::Bianchi => "bianchi",
        }
    }

    fn from_name(s: &str) -> Option<ObservableKind> {
        Some(match s {
            "energy" => ObservableKind::Energy,
            "dissipation" => ObservableKind::Dissipation,
            "sup_curvature" => ObservableKind::SupCurvature,
            "a_action" => ObservableKind::AAction,
            "wilson" => ObservableKind::Wilson,
            "small_time" => ObservableKind::SmallTime,
            "epsilon_family" => ObservableKind::EpsilonFamily,
            "boundary" => ObservableKind::Boundary,
            "bianchi" => ObservableKind::Bianchi,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservablesConfig {
    pub list: Vec<ObservableKind>,
    /// Action exponent for `a_action`.
    pub a: f64,
    pub loops: Option<String>,
    /// Shift times for `epsilon_family`.
    pub epsilon: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: String,
    /// Checkpoint cadence in steps; zero writes only the final state.
    pub checkpoint_every: u64,
    pub series_format: SeriesFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesFormat {
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub dims: [usize; 3],
    pub h: f64,
    pub domain: Domain,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.dims, self.h, self.domain)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub group: GroupKind,
    pub bc: Bc,
    pub mode: RunMode,
    pub initial: InitialData,
    pub stepper: StepperConfig,
    pub observables: ObservablesConfig,
    pub output: OutputConfig,
}

const KNOWN_KEYS: &[&str] = &[
    "grid.dims",
    "grid.h",
    "grid.domain_kind",
    "group",
    "bc",
    "mode",
    "initial_data.kind",
    "initial_data.seed",
    "initial_data.amplitude",
    "initial_data.a",
    "initial_data.comp",
    "initial_data.wave",
    "initial_data.checkpoint",
    "stepper.dt_init",
    "stepper.cfl",
    "stepper.t_end",
    "stepper.energy_backtrack",
    "stepper.reproject_every",
    "observables.list",
    "observables.a",
    "observables.loops",
    "observables.epsilon",
    "output.dir",
    "output.checkpoint_every",
    "output.series_format",
];

struct Raw {
    map: BTreeMap<String, String>,
    violations: Vec<String>,
}

impl Raw {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn flag(&mut self, msg: impl Into<String>) {
        self.violations.push(msg.into());
    }

    fn required(&mut self, key: &str) -> Option<String> {
        match self.take(key) {
            Some(v) => Some(v),
            None => {
                self.flag(format!("{key}: required key is missing"));
                None
            }
        }
    }

    fn parse_with<T>(
        &mut self,
        key: &str,
        required: bool,
        default: T,
        f: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> T {
        let raw = if required {
            self.required(key)
        } else {
            self.take(key)
        };
        match raw {
            None => default,
            Some(v) => match f(v.trim()) {
                Ok(t) => t,
                Err(msg) => {
                    self.flag(format!("{key}: {msg}"));
                    default
                }
            },
        }
    }

    fn f64_key(&mut self, key: &str, required: bool, default: f64) -> f64 {
        self.parse_with(key, required, default, |s| {
            s.parse::<f64>().map_err(|_| format!("unreadable number `{s}`"))
        })
    }

    fn u64_key(&mut self, key: &str, required: bool, default: u64) -> u64 {
        self.parse_with(key, required, default, |s| {
            s.parse::<u64>().map_err(|_| format!("unreadable integer `{s}`"))
        })
    }

    fn bool_key(&mut self, key: &str, default: bool) -> bool {
        self.parse_with(key, false, default, |s| match s {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(format!("expected true or false, got `{other}`")),
        })
    }
}

fn tokenize(text: &str) -> Raw {
    let mut map = BTreeMap::new();
    let mut violations = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            violations.push(format!("line {}: expected `key = value`", lineno + 1));
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            violations.push(format!("{key}: unknown key"));
            continue;
        }
        if map.insert(key.clone(), value).is_some() {
            violations.push(format!("{key}: duplicate key"));
        }
    }
    Raw { map, violations }
}

/// Parse and fully validate; on failure every violation is reported with
/// its key path, not just the first.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut raw = tokenize(text);

    let dims = raw.parse_with("grid.dims", true, [0usize; 3], |s| {
        let parts: Vec<&str> = s.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(format!("expected three extents, got {}", parts.len()));
        }
        let mut out = [0usize; 3];
        for (slot, p) in out.iter_mut().zip(&parts) {
            *slot = p
                .parse::<usize>()
                .map_err(|_| format!("unreadable extent `{p}`"))?;
        }
        Ok(out)
    });
    let h = raw.f64_key("grid.h", true, 0.0);
    let domain = raw.parse_with("grid.domain_kind", true, Domain::Box3, |s| match s {
        "box" => Ok(Domain::Box3),
        "torus" => Ok(Domain::Torus),
        other => Err(format!("expected box or torus, got `{other}`")),
    });
    let group = raw.parse_with("group", true, GroupKind::U1, |s| match s {
        "u1" => Ok(GroupKind::U1),
        "su2" => Ok(GroupKind::Su2),
        other => Err(format!("expected u1 or su2, got `{other}`")),
    });
    let bc = raw.parse_with("bc", true, Bc::Periodic, |s| match s {
        "periodic" => Ok(Bc::Periodic),
        "neumann" => Ok(Bc::Neumann),
        "dirichlet" => Ok(Bc::Dirichlet),
        other => Err(format!("expected periodic, neumann or dirichlet, got `{other}`")),
    });
    let mode = raw.parse_with("mode", true, RunMode::Direct, |s| match s {
        "direct" => Ok(RunMode::Direct),
        "zds" => Ok(RunMode::Zds),
        "zds_recovered" => Ok(RunMode::ZdsRecovered),
        other => Err(format!("expected direct, zds or zds_recovered, got `{other}`")),
    });

    let init_kind = raw.parse_with("initial_data.kind", true, InitKind::Zero, |s| match s {
        "zero" => Ok(InitKind::Zero),
        "smooth" => Ok(InitKind::Smooth),
        "pure_gauge" => Ok(InitKind::PureGauge),
        "u1_mode" => Ok(InitKind::U1Mode),
        "ha_sample" => Ok(InitKind::HaSample),
        "checkpoint" => Ok(InitKind::Checkpoint),
        other => Err(format!("unknown initial data kind `{other}`")),
    });
    let initial = InitialData {
        kind: init_kind,
        seed: raw.u64_key("initial_data.seed", false, 0),
        amplitude: raw.f64_key("initial_data.amplitude", false, 1.0),
        a: raw.f64_key("initial_data.a", false, 0.5),
        comp: raw.u64_key("initial_data.comp", false, 0) as usize,
        wave: raw.parse_with("initial_data.wave", false, [1, 0, 0], |s| {
            let parts: Vec<&str> = s.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(format!("expected three mode indices, got {}", parts.len()));
            }
            let mut out = [0usize; 3];
            for (slot, p) in out.iter_mut().zip(&parts) {
                *slot = p
                    .parse::<usize>()
                    .map_err(|_| format!("unreadable mode index `{p}`"))?;
            }
            Ok(out)
        }),
        checkpoint: raw.take("initial_data.checkpoint"),
    };

    let stepper = StepperConfig {
        dt_init: raw.f64_key("stepper.dt_init", false, 1e-3),
        cfl: raw.f64_key("stepper.cfl", false, 0.1),
        t_end: raw.f64_key("stepper.t_end", true, 0.0),
        energy_backtrack: raw.bool_key("stepper.energy_backtrack", false),
        reproject_every: raw.u64_key("stepper.reproject_every", false, 16) as usize,
    };

    let observables = ObservablesConfig {
        list: raw.parse_with("observables.list", false, vec![ObservableKind::Energy], |s| {
            let mut out = Vec::new();
            for tok in s.split_whitespace() {
                match ObservableKind::from_name(tok) {
                    Some(k) => {
                        if !out.contains(&k) {
                            out.push(k);
                        }
                    }
                    None => return Err(format!("unknown observable `{tok}`")),
                }
            }
            Ok(out)
        }),
        a: raw.f64_key("observables.a", false, 0.5),
        loops: raw.take("observables.loops"),
        epsilon: raw.parse_with("observables.epsilon", false, Vec::new(), |s| {
            s.split_whitespace()
                .map(|p| {
                    p.parse::<f64>()
                        .map_err(|_| format!("unreadable shift `{p}`"))
                })
                .collect()
        }),
    };

    let output = OutputConfig {
        dir: raw.parse_with("output.dir", true, String::new(), |s| {
            if s.is_empty() {
                Err("must not be empty".into())
            } else {
                Ok(s.to_string())
            }
        }),
        checkpoint_every: raw.u64_key("output.checkpoint_every", false, 0),
        series_format: raw.parse_with("output.series_format", false, SeriesFormat::Csv, |s| {
            match s {
                "csv" => Ok(SeriesFormat::Csv),
                other => Err(format!("only csv is supported, got `{other}`")),
            }
        }),
    };

    let cfg = RunConfig {
        grid: GridConfig { dims, h, domain },
        group,
        bc,
        mode,
        initial,
        stepper,
        observables,
        output,
    };
    let mut violations = raw.violations;
    cross_validate(&cfg, &mut violations);
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::InvalidConfig(violations))
    }
}

fn cross_validate(cfg: &RunConfig, out: &mut Vec<String>) {
    if cfg.grid.dims != [0; 3] || cfg.grid.h != 0.0 {
        if let Err(e) = cfg.grid.build() {
            out.push(format!("grid.dims/grid.h: {e}"));
        }
    }
    match (cfg.grid.domain, cfg.bc) {
        (Domain::Torus, Bc::Periodic) | (Domain::Box3, Bc::Neumann) | (Domain::Box3, Bc::Dirichlet) => {}
        (Domain::Torus, other) => out.push(format!(
            "bc, grid.domain_kind: {other:?} masks need domain_kind = box, the torus is periodic"
        )),
        (Domain::Box3, Bc::Periodic) => out.push(
            "bc, grid.domain_kind: periodic bc needs domain_kind = torus".to_string(),
        ),
    }
    if cfg.mode == RunMode::Direct && cfg.initial.kind == InitKind::HaSample {
        out.push(
            "mode, initial_data.kind: rough ha_sample data must run through the smoothing flow"
                .to_string(),
        );
    }
    match cfg.initial.kind {
        InitKind::U1Mode | InitKind::HaSample if cfg.group != GroupKind::U1 => {
            out.push(format!(
                "group, initial_data.kind: {} data is abelian only",
                cfg.initial.kind.name()
            ));
        }
        InitKind::Checkpoint if cfg.initial.checkpoint.is_none() => {
            out.push("initial_data.checkpoint: required for kind = checkpoint".to_string());
        }
        _ => {}
    }
    if cfg.initial.kind == InitKind::U1Mode && cfg.initial.comp > 2 {
        out.push(format!(
            "initial_data.comp: component {} out of range 0..3",
            cfg.initial.comp
        ));
    }
    if cfg.initial.kind == InitKind::HaSample && !(cfg.initial.a > 0.0 && cfg.initial.a < 1.0) {
        out.push(format!(
            "initial_data.a: exponent {} outside (0, 1)",
            cfg.initial.a
        ));
    }
    if !(cfg.stepper.dt_init.is_finite() && cfg.stepper.dt_init > 0.0) {
        out.push("stepper.dt_init: must be positive".to_string());
    }
    if !(cfg.stepper.cfl > 0.0 && cfg.stepper.cfl <= 0.25) {
        out.push(format!(
            "stepper.cfl: {} outside (0, 0.25]",
            cfg.stepper.cfl
        ));
    }
    if !(cfg.stepper.t_end.is_finite() && cfg.stepper.t_end > 0.0) {
        out.push("stepper.t_end: must be positive".to_string());
    }
    if cfg.stepper.reproject_every == 0 {
        out.push("stepper.reproject_every: must be at least 1".to_string());
    }
    for kind in &cfg.observables.list {
        match kind {
            ObservableKind::Wilson if cfg.observables.loops.is_none() => {
                out.push("observables.loops: required when wilson is enabled".to_string());
            }
            ObservableKind::AAction if !(0.5..1.0).contains(&cfg.observables.a) => {
                out.push(format!(
                    "observables.a: exponent {} outside [1/2, 1)",
                    cfg.observables.a
                ));
            }
            ObservableKind::EpsilonFamily => {
                let eps = &cfg.observables.epsilon;
                if eps.is_empty() {
                    out.push(
                        "observables.epsilon: required when epsilon_family is enabled".to_string(),
                    );
                } else if eps.iter().any(|e| !(e.is_finite() && *e > 0.0))
                    || eps.windows(2).any(|w| w[1] <= w[0])
                {
                    out.push(
                        "observables.epsilon: shifts must be positive and strictly increasing"
                            .to_string(),
                    );
                } else if eps.last().copied().unwrap_or(0.0) > cfg.stepper.t_end {
                    out.push(
                        "observables.epsilon, stepper.t_end: shifts must not pass the end time"
                            .to_string(),
                    );
                }
                if cfg.mode == RunMode::Direct {
                    out.push(
                        "mode, observables.list: epsilon_family needs a smoothing trajectory"
                            .to_string(),
                    );
                }
            }
            _ => {}
        }
    }
}

/// Canonical text form: fixed key order, defaults written out, optional
/// keys present only when set.  Reparsing yields an equal config, and the
/// checkpoint header hashes exactly this text.
#[must_use]
pub fn emit_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "grid.dims = {} {} {}",
        cfg.grid.dims[0], cfg.grid.dims[1], cfg.grid.dims[2]
    );
    let _ = writeln!(s, "grid.h = {}", cfg.grid.h);
    let _ = writeln!(
        s,
        "grid.domain_kind = {}",
        match cfg.grid.domain {
            Domain::Box3 => "box",
            Domain::Torus => "torus",
        }
    );
    let _ = writeln!(
        s,
        "group = {}",
        match cfg.group {
            GroupKind::U1 => "u1",
            GroupKind::Su2 => "su2",
        }
    );
    let _ = writeln!(
        s,
        "bc = {}",
        match cfg.bc {
            Bc::Periodic => "periodic",
            Bc::Neumann => "neumann",
            Bc::Dirichlet => "dirichlet",
        }
    );
    let _ = writeln!(s, "mode = {}", cfg.mode.name());
    let _ = writeln!(s, "initial_data.kind = {}", cfg.initial.kind.name());
    let _ = writeln!(s, "initial_data.seed = {}", cfg.initial.seed);
    let _ = writeln!(s, "initial_data.amplitude = {}", cfg.initial.amplitude);
    let _ = writeln!(s, "initial_data.a = {}", cfg.initial.a);
    let _ = writeln!(s, "initial_data.comp = {}", cfg.initial.comp);
    let _ = writeln!(
        s,
        "initial_data.wave = {} {} {}",
        cfg.initial.wave[0], cfg.initial.wave[1], cfg.initial.wave[2]
    );
    if let Some(p) = &cfg.initial.checkpoint {
        let _ = writeln!(s, "initial_data.checkpoint = {p}");
    }
    let _ = writeln!(s, "stepper.dt_init = {}", cfg.stepper.dt_init);
    let _ = writeln!(s, "stepper.cfl = {}", cfg.stepper.cfl);
    let _ = writeln!(s, "stepper.t_end = {}", cfg.stepper.t_end);
    let _ = writeln!(s, "stepper.energy_backtrack = {}", cfg.stepper.energy_backtrack);
    let _ = writeln!(s, "stepper.reproject_every = {}", cfg.stepper.reproject_every);
    let names: Vec<&str> = cfg.observables.list.iter().map(|k| k.name()).collect();
    let _ = writeln!(s, "observables.list = {}", names.join(" "));
    let _ = writeln!(s, "observables.a = {}", cfg.observables.a);
    if let Some(p) = &cfg.observables.loops {
        let _ = writeln!(s, "observables.loops = {p}");
    }
    if !cfg.observables.epsilon.is_empty() {
        let eps: Vec<String> = cfg.observables.epsilon.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(s, "observables.epsilon = {}", eps.join(" "));
    }
    let _ = writeln!(s, "output.dir = {}", cfg.output.dir);
    let _ = writeln!(s, "output.checkpoint_every = {}", cfg.output.checkpoint_every);
    let _ = writeln!(s, "output.series_format = csv");
    s
}

/// FNV-1a over the canonical text; stored in checkpoint headers so resume
/// can refuse a mismatched configuration.
#[must_use]
pub fn config_hash(cfg: &RunConfig) -> u64 {
    fnv1a(emit_config(cfg).as_bytes())
}

#[must_use]
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
grid.dims = 8 8 8
grid.h = 0.25
grid.domain_kind = torus
group = u1
bc = periodic
mode = direct
initial_data.kind = smooth
stepper.t_end = 0.05
output.dir = out
";

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.stepper.cfl, 0.1);
        assert_eq!(cfg.stepper.reproject_every, 16);
        assert_eq!(cfg.stepper.dt_init, 1e-3);
        assert!(!cfg.stepper.energy_backtrack);
        assert_eq!(cfg.observables.list, vec![ObservableKind::Energy]);
        assert_eq!(cfg.output.checkpoint_every, 0);
        assert_eq!(cfg.initial.seed, 0);
    }

    #[test]
    fn violations_are_collected_not_first_only() {
        let text = MINIMAL
            .replace("bc = periodic", "bc = neumann")
            .replace("stepper.t_end = 0.05", "stepper.t_end = -1\nstepper.cfl = 0.9");
        let err = parse_config(&text).unwrap_err();
        let Error::InvalidConfig(v) = err else {
            panic!("expected a violation list")
        };
        let joined = v.join("\n");
        assert!(
            joined.contains("bc, grid.domain_kind"),
            "missing cross-field naming: {joined}"
        );
        assert!(joined.contains("stepper.cfl"), "{joined}");
        assert!(joined.contains("stepper.t_end"), "{joined}");
        assert!(v.len() >= 3, "{joined}");
    }

    #[test]
    fn direct_mode_rejects_rough_data() {
        let text = MINIMAL.replace(
            "initial_data.kind = smooth",
            "initial_data.kind = ha_sample",
        );
        let err = parse_config(&text).unwrap_err();
        let Error::InvalidConfig(v) = err else {
            panic!("expected a violation list")
        };
        assert!(v.iter().any(|m| m.contains("mode, initial_data.kind")), "{v:?}");
        let ok = text.replace("mode = direct", "mode = zds");
        parse_config(&ok).unwrap();
    }

    #[test]
    fn unknown_duplicate_and_malformed_keys_are_flagged() {
        let text = format!("{MINIMAL}grid.h = 0.5\nnot_a_key = 1\nbroken line\n");
        let err = parse_config(&text).unwrap_err();
        let Error::InvalidConfig(v) = err else {
            panic!("expected a violation list")
        };
        let joined = v.join("\n");
        assert!(joined.contains("grid.h: duplicate"), "{joined}");
        assert!(joined.contains("not_a_key: unknown"), "{joined}");
        assert!(joined.contains("expected `key = value`"), "{joined}");
    }

    #[test]
    fn observable_parameter_rules() {
        let text = MINIMAL.replace(
            "stepper.t_end = 0.05",
            "stepper.t_end = 0.05\nobservables.list = wilson a_action\nobservables.a = 1.2",
        );
        let err = parse_config(&text).unwrap_err();
        let Error::InvalidConfig(v) = err else {
            panic!("expected a violation list")
        };
        let joined = v.join("\n");
        assert!(joined.contains("observables.loops"), "{joined}");
        assert!(joined.contains("observables.a"), "{joined}");
    }

    #[test]
    fn round_trip_is_identity() {
        let text = MINIMAL.replace(
            "stepper.t_end = 0.05",
            "stepper.t_end = 0.05\nobservables.list = energy small_time epsilon_family\n\
             observables.epsilon = 0.001 0.002 0.004\nstepper.dt_init = 0.00025",
        )
        .replace("mode = direct", "mode = zds_recovered");
        let cfg = parse_config(&text).unwrap();
        let emitted = emit_config(&cfg);
        let cfg2 = parse_config(&emitted).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(emitted, emit_config(&cfg2));
        assert_eq!(config_hash(&cfg), config_hash(&cfg2));
    }

    #[test]
    fn fnv_known_vector() {
        // Standard FNV-1a test vectors.
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
    }
}
