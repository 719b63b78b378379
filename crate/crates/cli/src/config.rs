//! Run configuration files.
//!
//! A config is a JSON object
//!
//! ```json
//! { "experiment": "decay", "seed": 7, "out": "runs/decay", "format": "json",
//!   "params": { "d": 2, "recipe": "cantor:2,1/4,8", "rmax": 128 } }
//! ```
//!
//! and is equivalent to the flags `--seed 7 --out runs/decay --format json
//! decay --d 2 --recipe cantor:2,1/4,8 --rmax 128`. Parameter keys are the
//! long flag names (underscores may stand for dashes); `true` turns a switch
//! on, arrays are joined with commas. A flag given on the command line replaces
//! the config's value.

use std::ffi::OsString;
use std::path::Path;

use serde::Deserialize;
use serde_json::{Map, Value};
use wfr_core::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub params: Map<String, Value>,
}

const EXPERIMENTS: [&str; 5] = [
    "exponents",
    "weights",
    "decay",
    "extend-scaling",
    "wavepackets",
];

/// Global flags that take a value.
const VALUED_GLOBALS: [&str; 5] = ["--config", "--out", "--seed", "--threads", "--format"];

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if !EXPERIMENTS.contains(&cfg.experiment.as_str()) {
            return Err(Error::Usage(format!(
                "unknown experiment {:?}; expected one of {}",
                cfg.experiment,
                EXPERIMENTS.join(", ")
            )));
        }
        Ok(cfg)
    }

    /// The command line this config stands for, without the program name.
    pub fn to_args(&self) -> Result<Vec<OsString>> {
        self.to_args_except(&[])
    }

    /// Like `to_args`, leaving out the long flags in `skip`.
    pub fn to_args_except(&self, skip: &[String]) -> Result<Vec<OsString>> {
        let mut out: Vec<OsString> = Vec::new();
        out.push(self.experiment.clone().into());
        if self.experiment == "weights" {
            out.push("verify".into());
        }
        for (key, value) in &self.params {
            let flag = if key.len() == 1 {
                format!("--{key}")
            } else {
                format!("--{}", key.replace('_', "-"))
            };
            if skip.contains(&flag) {
                continue;
            }
            match value {
                Value::Bool(true) => out.push(flag.into()),
                Value::Bool(false) | Value::Null => {}
                Value::Array(items) => {
                    let parts: Vec<String> = items.iter().map(scalar).collect::<Result<_>>()?;
                    out.push(flag.into());
                    out.push(parts.join(",").into());
                }
                v => {
                    out.push(flag.into());
                    out.push(scalar(v)?.into());
                }
            }
        }
        let keep = |flag: &str| !skip.iter().any(|s| s == flag);
        if let Some(s) = self.seed.filter(|_| keep("--seed")) {
            out.extend(["--seed".into(), s.to_string().into()]);
        }
        if let Some(o) = self.out.as_ref().filter(|_| keep("--out")) {
            out.extend(["--out".into(), o.into()]);
        }
        if let Some(f) = self.format.as_ref().filter(|_| keep("--format")) {
            out.extend(["--format".into(), f.into()]);
        }
        if let Some(t) = self.threads.filter(|_| keep("--threads")) {
            out.extend(["--threads".into(), t.to_string().into()]);
        }
        Ok(out)
    }
}

fn scalar(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::Usage(format!(
            "config value {other} is not a string or number"
        ))),
    }
}

/// Rewrites `args` (program name first) so that a `--config` file's contents
/// come before the user's own flags; the user's subcommand, if any, must
/// match the config's experiment.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut rest = Vec::new();
    let mut it = args.into_iter();
    let program = it.next().unwrap_or_else(|| "wfr".into());
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            path = Some(
                it.next()
                    .ok_or_else(|| Error::Usage("--config needs a path".into()))?,
            );
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        let mut out = vec![program];
        out.extend(rest);
        return Ok(out);
    };
    let cfg = ExperimentConfig::load(Path::new(&path))?;
    // drop a repeated subcommand name from the user's arguments
    let mut i = 0;
    while i < rest.len() {
        let s = rest[i].to_string_lossy().into_owned();
        if VALUED_GLOBALS.contains(&s.as_str()) {
            i += 2;
            continue;
        }
        if s.starts_with('-') {
            i += 1;
            continue;
        }
        if s != cfg.experiment {
            return Err(Error::Usage(format!(
                "subcommand {s:?} does not match the config's experiment {:?}",
                cfg.experiment
            )));
        }
        rest.remove(i);
        if cfg.experiment == "weights" && rest.get(i).is_some_and(|a| a == "verify") {
            rest.remove(i);
        }
        break;
    }
    // flags on the command line replace the config's
    let given: Vec<String> = rest
        .iter()
        .filter_map(|a| {
            let s = a.to_string_lossy();
            s.starts_with("--")
                .then(|| s.split('=').next().unwrap_or_default().to_string())
        })
        .collect();
    let mut out = vec![program];
    out.extend(cfg.to_args_except(&given)?);
    out.extend(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[OsString]) -> Vec<String> {
        v.iter().map(|a| a.to_string_lossy().into_owned()).collect()
    }

    fn config(text: &str) -> ExperimentConfig {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn params_become_flags() {
        let c = config(
            r#"{"experiment": "weights", "seed": 4, "params": {"d": 2, "center_step": 0.5, "radii": [1, 2], "plot": true, "check": false}}"#,
        );
        assert_eq!(
            strings(&c.to_args().unwrap()),
            [
                "weights",
                "verify",
                "--center-step",
                "0.5",
                "--d",
                "2",
                "--plot",
                "--radii",
                "1,2",
                "--seed",
                "4"
            ]
        );
    }

    #[test]
    fn nested_values_are_rejected() {
        let c = config(r#"{"experiment": "decay", "params": {"d": {"x": 1}}}"#);
        assert!(matches!(c.to_args(), Err(Error::Usage(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(
            serde_json::from_str::<ExperimentConfig>(r#"{"experiment": "decay", "sed": 1}"#)
                .is_err()
        );
    }

    #[test]
    fn expand_without_config_is_identity() {
        let args: Vec<OsString> = ["wfr", "decay", "--d", "2"]
            .iter()
            .map(OsString::from)
            .collect();
        assert_eq!(expand(args.clone()).unwrap(), args);
    }

    #[test]
    fn expand_merges_and_overrides() {
        let dir = std::env::temp_dir().join(format!("wfr-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(
            &path,
            r#"{"experiment": "decay", "seed": 1, "params": {"d": 2, "rmax": 32}}"#,
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let args: Vec<OsString> = ["wfr", "--seed", "9", "--config", p, "decay", "--rmax", "16"]
            .iter()
            .map(OsString::from)
            .collect();
        assert_eq!(
            strings(&expand(args).unwrap()),
            ["wfr", "decay", "--d", "2", "--seed", "9", "--rmax", "16"]
        );
        let clash: Vec<OsString> = ["wfr", "--config", p, "exponents"]
            .iter()
            .map(OsString::from)
            .collect();
        assert!(matches!(expand(clash), Err(Error::Usage(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
