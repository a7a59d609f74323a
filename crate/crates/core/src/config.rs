//! Experiment configuration: a flat sectioned key-value text file. Unknown
//! sections or keys are errors, and every module precondition is checked at
//! load time with the offending field named.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::bourgain::BourgainParams;
use crate::datum::Datum;
use crate::error::{Error, Result};
use crate::gevrey::FitOptions;
use crate::schedule::SchedulerConstants;
use crate::solver::SolverConfig;
use crate::spectral::Grid;
use crate::symbol::DEFAULT_SEED;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub grid: Grid,
    pub datum: Datum,
    pub solver: SolverConfig,
    /// Checkpoint emission times for `simulate`.
    pub checkpoint_times: Vec<f64>,
    pub sigma_list: Vec<f64>,
    pub sobolev_s: f64,
    pub bourgain_b: f64,
    pub bourgain_b_prime: f64,
    pub fit: FitOptions,
    pub scheduler: SchedulerConstants,
    pub sigma0: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let sections = split_sections(text)?;
        let known = [
            "grid", "datum", "solver", "analytics", "scheduler", "run",
        ];
        for name in sections.keys() {
            if !known.contains(&name.as_str()) {
                return Err(Error::Config(format!("unknown section [{name}]")));
            }
        }
        let empty = Section::default();
        let grid_sec = sections.get("grid").ok_or_else(|| Error::Config("missing [grid] section".into()))?;
        let datum_sec = sections.get("datum").ok_or_else(|| Error::Config("missing [datum] section".into()))?;
        let solver_sec = sections.get("solver").ok_or_else(|| Error::Config("missing [solver] section".into()))?;
        let analytics_sec = sections.get("analytics").unwrap_or(&empty);
        let scheduler_sec = sections.get("scheduler").unwrap_or(&empty);
        let run_sec = sections.get("run").unwrap_or(&empty);

        let grid = {
            let n = grid_sec.require_usize("grid.n")?;
            let length = grid_sec.require_f64("grid.length")?;
            grid_sec.finish(&["n", "length"])?;
            Grid::new(n, length).map_err(|e| Error::Config(format!("grid: {e}")))?
        };

        let datum = parse_datum(datum_sec)?;

        let solver = {
            let dt = solver_sec.require_f64("solver.dt")?;
            let t_final = solver_sec.require_f64("solver.t_final")?;
            let stride = solver_sec.get_usize("stride")?.unwrap_or(1);
            let mut cfg = SolverConfig::new(dt, t_final, stride)
                .map_err(|e| Error::Config(format!("solver: {e}")))?;
            cfg.nonlinearity_enabled = solver_sec.get_bool("nonlinearity")?.unwrap_or(true);
            cfg.dealias = solver_sec.get_bool("dealias")?.unwrap_or(true);
            cfg
        };
        let checkpoint_times = solver_sec.get_f64_list("checkpoints")?.unwrap_or_default();
        solver_sec.finish(&[
            "dt",
            "t_final",
            "stride",
            "nonlinearity",
            "dealias",
            "checkpoints",
        ])?;

        let sigma_list = analytics_sec
            .get_f64_list("sigma_list")?
            .unwrap_or_else(|| vec![0.1]);
        for &s in &sigma_list {
            grid.check_sigma(s)
                .map_err(|e| Error::Config(format!("analytics.sigma_list: {e}")))?;
        }
        let sobolev_s = analytics_sec.get_f64("sobolev_s")?.unwrap_or(0.0);
        let bourgain_b = analytics_sec.get_f64("bourgain_b")?.unwrap_or(0.6);
        let bourgain_b_prime = analytics_sec.get_f64("bourgain_b_prime")?.unwrap_or(-0.4);
        let mut fit = FitOptions::default();
        if let Some(band) = analytics_sec.get_f64_list("fit_band")? {
            if band.len() != 2 || !(0.0 < band[0] && band[0] < band[1] && band[1] <= 1.0) {
                return Err(Error::Config(
                    "analytics.fit_band must be two fractions 0 < lo < hi <= 1".into(),
                ));
            }
            fit.band_fraction = (band[0], band[1]);
        }
        if let Some(floor) = analytics_sec.get_f64("fit_floor")? {
            if !(floor > 0.0 && floor < 1.0) {
                return Err(Error::Config("analytics.fit_floor must lie in (0, 1)".into()));
            }
            fit.floor_rel = floor;
        }
        analytics_sec.finish(&[
            "sigma_list",
            "sobolev_s",
            "bourgain_b",
            "bourgain_b_prime",
            "fit_band",
            "fit_floor",
        ])?;

        let scheduler = SchedulerConstants {
            c0: scheduler_sec.get_f64("c0")?.unwrap_or(0.1),
            r: scheduler_sec.get_f64("r")?.unwrap_or(2.0),
            c_const: scheduler_sec.get_f64("c_const")?.unwrap_or(1.0),
        };
        scheduler
            .validate()
            .map_err(|e| Error::Config(format!("scheduler: {e}")))?;
        let sigma0 = scheduler_sec.get_f64("sigma0")?.unwrap_or(0.5);
        grid.check_sigma(sigma0)
            .map_err(|e| Error::Config(format!("scheduler.sigma0: {e}")))?;
        scheduler_sec.finish(&["c0", "r", "c_const", "sigma0"])?;

        let seed = run_sec.get_u64("seed")?.unwrap_or(DEFAULT_SEED);
        run_sec.finish(&["seed"])?;

        Ok(ExperimentConfig {
            grid,
            datum,
            solver,
            checkpoint_times,
            sigma_list,
            sobolev_s,
            bourgain_b,
            bourgain_b_prime,
            fit,
            scheduler,
            sigma0,
            seed,
        })
    }

    pub fn bourgain_params(&self, sigma: f64) -> BourgainParams {
        BourgainParams::new(sigma, self.sobolev_s, self.bourgain_b)
    }
}

fn parse_datum(sec: &Section) -> Result<Datum> {
    let family = sec.require_str("datum.family")?;
    let datum = match family.as_str() {
        "sech" => Datum::Sech {
            amplitude: sec.get_f64("amplitude")?.unwrap_or(1.0),
            width: sec.get_f64("width")?.unwrap_or(1.0),
        },
        "gaussian" => Datum::Gaussian {
            amplitude: sec.get_f64("amplitude")?.unwrap_or(1.0),
            width: sec.get_f64("width")?.unwrap_or(1.0),
        },
        "cosine" => Datum::Cosine {
            amplitude: sec.get_f64("amplitude")?.unwrap_or(1.0),
            mode: sec.get_i64("mode")?.unwrap_or(1),
        },
        "soliton" => Datum::Soliton {
            speed: sec.get_f64("speed")?.unwrap_or(1.0),
        },
        "file" => Datum::File {
            path: PathBuf::from(sec.require_str("datum.path")?),
        },
        other => {
            return Err(Error::Config(format!(
                "datum.family must be one of sech|gaussian|cosine|soliton|file, got {other}"
            )))
        }
    };
    let allowed: &[&str] = match datum {
        Datum::Sech { .. } | Datum::Gaussian { .. } => &["family", "amplitude", "width"],
        Datum::Cosine { .. } => &["family", "amplitude", "mode"],
        Datum::Soliton { .. } => &["family", "speed"],
        Datum::File { .. } => &["family", "path"],
    };
    sec.finish(allowed)?;
    Ok(datum)
}

#[derive(Debug, Default)]
struct Section {
    entries: BTreeMap<String, String>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&String> {
        self.entries.get(key)
    }

    fn require_str(&self, qualified: &str) -> Result<String> {
        let key = qualified.rsplit('.').next().expect("key");
        self.get(key)
            .cloned()
            .ok_or_else(|| Error::Config(format!("missing required key {qualified}")))
    }

    fn require_f64(&self, qualified: &str) -> Result<f64> {
        parse_f64(qualified, &self.require_str(qualified)?)
    }

    fn require_usize(&self, qualified: &str) -> Result<usize> {
        let raw = self.require_str(qualified)?;
        raw.parse::<usize>()
            .map_err(|_| Error::Config(format!("{qualified}: expected an integer, got '{raw}'")))
    }

    fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|raw| parse_f64(key, raw)).transpose()
    }

    fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|raw| {
                raw.parse::<usize>()
                    .map_err(|_| Error::Config(format!("{key}: expected an integer, got '{raw}'")))
            })
            .transpose()
    }

    fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|raw| {
                raw.parse::<u64>()
                    .map_err(|_| Error::Config(format!("{key}: expected an integer, got '{raw}'")))
            })
            .transpose()
    }

    fn get_i64(&self, key: &str) -> Result<Option<i64>> {
        self.get(key)
            .map(|raw| {
                raw.parse::<i64>()
                    .map_err(|_| Error::Config(format!("{key}: expected an integer, got '{raw}'")))
            })
            .transpose()
    }

    fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|raw| match raw.as_str() {
                "true" | "on" | "yes" => Ok(true),
                "false" | "off" | "no" => Ok(false),
                other => Err(Error::Config(format!(
                    "{key}: expected true/false, got '{other}'"
                ))),
            })
            .transpose()
    }

    fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|raw| {
                raw.split(',')
                    .map(|item| parse_f64(key, item.trim()))
                    .collect::<Result<Vec<f64>>>()
            })
            .transpose()
    }

    /// Rejects any key outside the allowed set (typos poison experiments).
    fn finish(&self, allowed: &[&str]) -> Result<()> {
        for key in self.entries.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key '{key}'")));
            }
        }
        Ok(())
    }
}

fn parse_f64(key: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: expected a number, got '{raw}'")))
        .and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Config(format!("{key}: value must be finite")))
            }
        })
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {}: malformed section header", lineno + 1)))?
                .trim()
                .to_string();
            if sections.contains_key(&name) {
                return Err(Error::Config(format!("duplicate section [{name}]")));
            }
            sections.insert(name.clone(), Section::default());
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
        })?;
        let section_name = current
            .clone()
            .ok_or_else(|| Error::Config(format!("line {}: key outside any section", lineno + 1)))?;
        let section = sections.get_mut(&section_name).expect("current section");
        let key = key.trim().to_string();
        if section.entries.contains_key(&key) {
            return Err(Error::Config(format!("duplicate key '{key}' in [{section_name}]")));
        }
        section.entries.insert(key, value.trim().to_string());
    }
    Ok(sections)
}
