//! Scenario files: flat INI sections with `key = value` lines.
//!
//! ```text
//! # comment
//! [params]      q0 beta1 beta2 beta3 c1 c2 c3 theta pi delta alpha mu (all required)
//! [initial]     s i1 i2 a
//! [grid]        t0 (default 0), t_final, n_steps | h (default h = 0.1)
//! [control]     u1 (constant condom use for uncontrolled runs, default 0)
//! [weights]     a b1 b2 b3
//! [sweep]       relaxation tolerance max_iterations fix_u1 fix_u2 fix_u3
//! [outputs]     dir csv plot
//! ```
//!
//! Trailing `#` comments are allowed. Unknown sections or keys, duplicate
//! keys and non-numeric values are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::integrate::TimeGrid;
use crate::model::{ModelParams, State};
use crate::optctrl::{ObjectiveWeights, SweepOptions};

pub const DEFAULT_STEP: f64 = 0.1;

type Sections = BTreeMap<String, BTreeMap<String, String>>;

const SECTIONS: [(&str, &[&str]); 7] = [
    ("params", &ModelParams::KEYS),
    ("initial", &["s", "i1", "i2", "a"]),
    ("grid", &["t0", "t_final", "n_steps", "h"]),
    ("control", &["u1"]),
    ("weights", &["a", "b1", "b2", "b3"]),
    ("sweep", &["relaxation", "tolerance", "max_iterations", "fix_u1", "fix_u2", "fix_u3"]),
    ("outputs", &["dir", "csv", "plot"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    pub dir: Option<PathBuf>,
    pub csv: bool,
    pub plot: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self { dir: None, csv: true, plot: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: Option<ModelParams>,
    pub initial: Option<State>,
    pub grid: Option<TimeGrid>,
    pub u1_fixed: Option<f64>,
    pub weights: Option<ObjectiveWeights>,
    pub sweep_opts: Option<SweepOptions>,
    pub outputs: OutputOptions,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_sections(text: &str) -> Result<Sections> {
    let mut out = Sections::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_ascii_lowercase();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(config_err(format!("line {lineno}: unknown section [{name}]")));
            }
            if out.contains_key(&name) {
                return Err(config_err(format!("line {lineno}: duplicate section [{name}]")));
            }
            out.insert(name.clone(), BTreeMap::new());
            current = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {lineno}: expected `key = value`, got `{line}`")))?;
        let section =
            current.as_ref().ok_or_else(|| config_err(format!("line {lineno}: key outside of any section")))?;
        let key = key.trim().to_ascii_lowercase();
        let allowed = SECTIONS.iter().find(|(s, _)| s == section).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key.as_str()) {
            return Err(config_err(format!("line {lineno}: unknown key `{key}` in [{section}]")));
        }
        let entries = out.get_mut(section).expect("section inserted");
        if entries.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(config_err(format!("line {lineno}: duplicate key `{key}` in [{section}]")));
        }
    }
    Ok(out)
}

struct Section<'a> {
    name: &'a str,
    entries: &'a BTreeMap<String, String>,
}

impl Section<'_> {
    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.entries
            .get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| config_err(format!("[{}] {key}: `{v}` is not a finite number", self.name)))
            })
            .transpose()
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.number(key)?.ok_or_else(|| config_err(format!("[{}] missing required key `{key}`", self.name)))
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        self.entries
            .get(key)
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(config_err(format!("[{}] {key}: `{v}` is not a boolean", self.name))),
            })
            .transpose()
    }
}

pub fn parse_params(entries: &BTreeMap<String, String>) -> Result<ModelParams> {
    let sec = Section { name: "params", entries };
    let mut p = ModelParams::table1();
    for key in ModelParams::KEYS {
        p.set(key, sec.required(key)?);
    }
    p.validate().map_err(|e| config_err(e.to_string()))?;
    Ok(p)
}

impl Scenario {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let sections = parse_sections(text)?;
        let sec = |name: &'static str| sections.get(name).map(|entries| Section { name, entries });

        let params = sections.get("params").map(parse_params).transpose()?;

        let initial = sec("initial")
            .map(|s| -> Result<State> {
                let st = State::new(s.required("s")?, s.required("i1")?, s.required("i2")?, s.required("a")?);
                st.validate().map_err(|e| config_err(e.to_string()))?;
                Ok(st)
            })
            .transpose()?;

        let grid = sec("grid")
            .map(|s| -> Result<TimeGrid> {
                let t0 = s.number("t0")?.unwrap_or(0.0);
                let t_final = s.required("t_final")?;
                let g = match (s.number("n_steps")?, s.number("h")?) {
                    (Some(_), Some(_)) => return Err(config_err("[grid] give either n_steps or h, not both")),
                    (Some(n), None) => {
                        if n < 1.0 || n.fract() != 0.0 {
                            return Err(config_err(format!("[grid] n_steps must be a positive integer, got {n}")));
                        }
                        TimeGrid::new(t0, t_final, n as usize)
                    }
                    (None, h) => TimeGrid::with_step(t0, t_final, h.unwrap_or(DEFAULT_STEP)),
                };
                g.map_err(|e| config_err(e.to_string()))
            })
            .transpose()?;

        let u1_fixed = match sec("control") {
            Some(s) => s.number("u1")?,
            None => None,
        };
        if let Some(u1) = u1_fixed {
            if !(0.0..=1.0).contains(&u1) {
                return Err(config_err(format!("[control] u1 must lie in [0, 1], got {u1}")));
            }
        }

        let weights = sec("weights")
            .map(|s| -> Result<ObjectiveWeights> {
                let w =
                    ObjectiveWeights::new(s.required("a")?, s.required("b1")?, s.required("b2")?, s.required("b3")?);
                w.validate().map_err(|e| config_err(e.to_string()))?;
                Ok(w)
            })
            .transpose()?;

        let sweep_opts = sec("sweep")
            .map(|s| -> Result<SweepOptions> {
                let d = SweepOptions::default();
                let max_iterations = match s.number("max_iterations")? {
                    Some(n) if n >= 1.0 && n.fract() == 0.0 => n as usize,
                    Some(n) => {
                        return Err(config_err(format!("[sweep] max_iterations must be a positive integer, got {n}")))
                    }
                    None => d.max_iterations,
                };
                let opts = SweepOptions {
                    relaxation: s.number("relaxation")?.unwrap_or(d.relaxation),
                    tolerance: s.number("tolerance")?.unwrap_or(d.tolerance),
                    max_iterations,
                    fixed_controls: [s.number("fix_u1")?, s.number("fix_u2")?, s.number("fix_u3")?],
                };
                opts.validate().map_err(|e| config_err(e.to_string()))?;
                Ok(opts)
            })
            .transpose()?;

        let mut outputs = OutputOptions::default();
        if let Some(s) = sec("outputs") {
            outputs.dir = s.entries.get("dir").map(PathBuf::from);
            outputs.csv = s.boolean("csv")?.unwrap_or(true);
            outputs.plot = s.boolean("plot")?.unwrap_or(true);
        }

        Ok(Self { params, initial, grid, u1_fixed, weights, sweep_opts, outputs })
    }

    pub fn require_params(&self) -> Result<ModelParams> {
        self.params.ok_or_else(|| config_err("scenario needs a [params] section"))
    }

    pub fn require_initial(&self) -> Result<State> {
        self.initial.ok_or_else(|| config_err("scenario needs an [initial] section"))
    }

    pub fn require_grid(&self) -> Result<TimeGrid> {
        self.grid.ok_or_else(|| config_err("scenario needs a [grid] section"))
    }

    pub fn require_weights(&self) -> Result<ObjectiveWeights> {
        self.weights.ok_or_else(|| config_err("scenario needs a [weights] section"))
    }

    pub fn u1(&self) -> f64 {
        self.u1_fixed.unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "
# table 1
[params]
q0 = 2000
beta1 = 0.2   # unaware
beta2 = 0.15
beta3 = 0.12
c1 = 1
c2 = 1
c3 = 1
theta = 0.015
pi = 0.6
delta = 0.1
alpha = 1
mu = 0.2

[initial]
s = 800
i1 = 40
i2 = 45
a = 0

[grid]
t_final = 100

[control]
u1 = 0.9

[weights]
a = 800
b1 = 35
b2 = 55
b3 = 75

[sweep]
fix_u1 = 0
max_iterations = 50

[outputs]
dir = results
plot = false
";

    #[test]
    fn parses_full_scenario() {
        let s = Scenario::parse(FULL).unwrap();
        assert_eq!(s.params, Some(ModelParams::table1()));
        assert_eq!(s.initial, Some(State::new(800.0, 40.0, 45.0, 0.0)));
        assert_eq!(s.grid.unwrap().n_steps(), 1000);
        assert_eq!(s.u1_fixed, Some(0.9));
        assert_eq!(s.weights, Some(ObjectiveWeights::new(800.0, 35.0, 55.0, 75.0)));
        let opts = s.sweep_opts.unwrap();
        assert_eq!(opts.fixed_controls, [Some(0.0), None, None]);
        assert_eq!(opts.max_iterations, 50);
        assert_eq!(opts.relaxation, 0.5);
        assert_eq!(s.outputs.dir, Some(PathBuf::from("results")));
        assert!(s.outputs.csv && !s.outputs.plot);
    }

    #[test]
    fn sections_are_optional() {
        let s = Scenario::parse("[grid]\nt_final = 10\nn_steps = 5\n").unwrap();
        assert!(s.params.is_none());
        assert_eq!(s.grid.unwrap().n_steps(), 5);
        assert!(s.require_params().is_err());
    }

    #[test]
    fn rejects_malformed_input() {
        let bad = [
            "[nope]\n",
            "[grid]\nt_final = 10\nspeed = 3\n",
            "q0 = 1\n",
            "[grid]\nt_final = abc\n",
            "[grid]\nt_final = 10\nt_final = 20\n",
            "[grid]\nt_final = 10\n[grid]\nt_final = 10\n",
            "[grid]\nt_final = 10\nn_steps = 2.5\n",
            "[grid]\nt_final = 10\nn_steps = 10\nh = 1\n",
            "[params]\nq0 = 1\n",
            "[control]\nu1 = 1.5\n",
            "[initial]\ns = -1\ni1 = 0\ni2 = 0\na = 0\n",
            "[weights]\na = 1\nb1 = 0\nb2 = 1\nb3 = 1\n",
            "[outputs]\nplot = maybe\n",
            "[grid]\njust text\n",
        ];
        for text in bad {
            assert!(matches!(Scenario::parse(text), Err(Error::Config(_))), "accepted: {text:?}");
        }
    }

    #[test]
    fn zero_parameter_is_a_config_error() {
        let text = FULL.replace("mu = 0.2", "mu = 0");
        assert!(matches!(Scenario::parse(&text), Err(Error::Config(_))));
    }
}
