//! Per-command parameter tables and the flat `key = value` config file.

use std::collections::BTreeMap;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub help: &'static str,
    /// `None` means the key is optional with no default, or required when
    /// `required` is set.
    pub default: Option<&'static str>,
    pub required: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct CommandSpec {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [KeySpec],
}

const fn key(name: &'static str, help: &'static str, default: Option<&'static str>) -> KeySpec {
    KeySpec {
        name,
        help,
        default,
        required: false,
    }
}

const fn required(name: &'static str, help: &'static str) -> KeySpec {
    KeySpec {
        name,
        help,
        default: None,
        required: true,
    }
}

const OUT: KeySpec = key("out", "CSV output path (stdout when absent)", None);
const SEED: KeySpec = key("seed", "master seed for all randomness", Some("0"));
const UNITS: KeySpec = key("units", "entropy units: nats or bits", Some("nats"));
const LEAF: KeySpec = key("leaf-dim", "leaf bond dimension D_L", Some("2"));
const EPS: KeySpec = key("epsilon", "schedule parameter epsilon", Some("0.2"));

pub const COMMANDS: &[CommandSpec] = &[
    CommandSpec {
        name: "schedule",
        about: "Solve the bond-dimension schedule and print its per-level table",
        keys: &[
            LEAF,
            required("epsilon", "schedule parameter epsilon"),
            OUT,
            key("network-json", "also write the network description as JSON", None),
        ],
    },
    CommandSpec {
        name: "entropy",
        about: "Monte Carlo entropies of one leaf interval",
        keys: &[
            LEAF,
            EPS,
            required("interval", "inclusive leaf interval i:j"),
            key("trials", "number of sampled networks", Some("200")),
            SEED,
            UNITS,
            OUT,
        ],
    },
    CommandSpec {
        name: "mutual-info",
        about: "Mutual information of adjacent leaf intervals against the cut bounds",
        keys: &[
            LEAF,
            EPS,
            key("lengths", "comma-separated interval lengths", Some("1,2,4")),
            key("start", "first site of the left interval", Some("0")),
            key("trials", "number of sampled networks", Some("200")),
            SEED,
            UNITS,
            OUT,
        ],
    },
    CommandSpec {
        name: "cuts",
        about: "Cut bounds for a leaf interval, or the scaling table over lengths",
        keys: &[
            LEAF,
            EPS,
            key("interval", "inclusive leaf interval i:j", None),
            key("lengths", "comma-separated lengths for the scaling table", None),
            key("emit-argmin", "write the minimising reduction sequence as JSON", None),
            UNITS,
            OUT,
        ],
    },
    CommandSpec {
        name: "spectra",
        about: "Singular values of random super-operators",
        keys: &[
            required("dA", "input dimension"),
            required("dB", "output dimension"),
            required("dE", "environment dimension"),
            key("seeds", "number of independent draws", Some("10")),
            SEED,
            OUT,
            key("svg", "also write a line plot", None),
        ],
    },
    CommandSpec {
        name: "collapse",
        about: "Rescaled seed-averaged spectra for scaling-collapse plots",
        keys: &[
            key("mode", "sqrt-d, affine or raw", Some("sqrt-d")),
            key("dims", "square dimensions d (mode sqrt-d)", None),
            key("specs", "dA:dB[:dE] list (modes affine and raw)", None),
            key("shift", "affine shift", Some("0.706")),
            key("alpha", "affine exponent", Some("0.6667")),
            key("seeds", "draws averaged per spec", Some("10")),
            SEED,
            OUT,
            key("svg", "also write a line plot", None),
        ],
    },
    CommandSpec {
        name: "moments-check",
        about: "Compare Monte Carlo Haar moments with their closed forms",
        keys: &[
            key("d1", "input dimension", Some("2")),
            key("d2", "output dimension", Some("4")),
            key("trials", "number of samples", Some("100000")),
            SEED,
            OUT,
        ],
    },
];

pub fn command_spec(name: &str) -> Option<&'static CommandSpec> {
    COMMANDS.iter().find(|c| c.name == name)
}

/// Parses a flat config file: one `key = value` per line, blank lines and
/// lines starting with `#` ignored, duplicate keys rejected.
pub fn parse_config_file(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |msg: String| CliError::Usage(format!("config line {}: {msg}", n + 1));
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(at(format!("malformed key `{k}`")));
        }
        if v.is_empty() {
            return Err(at(format!("empty value for `{k}`")));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(at(format!("duplicate key `{k}`")));
        }
    }
    Ok(out)
}

/// Validated key-value parameters of one command.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: &'static CommandSpec,
    pub values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// Merges file values with flags (flags win), rejects unknown keys and
    /// fills defaults. A `command` key in the file must name `command`.
    pub fn resolve(
        command: &str,
        file: BTreeMap<String, String>,
        flags: BTreeMap<String, String>,
    ) -> CliResult<Self> {
        let spec = command_spec(command).ok_or_else(|| CliError::Usage(format!("unknown command `{command}`")))?;
        let mut values = BTreeMap::new();
        for (k, v) in file {
            if k == "command" {
                if v != command {
                    return Err(CliError::key("command", format!("config is for `{v}`, not `{command}`")));
                }
                continue;
            }
            values.insert(k, v);
        }
        values.extend(flags);
        for k in values.keys() {
            if !spec.keys.iter().any(|s| s.name == k) {
                return Err(CliError::Usage(format!("unknown key `{k}` for `{command}`")));
            }
        }
        for s in spec.keys {
            if !values.contains_key(s.name) {
                if let Some(d) = s.default {
                    values.insert(s.name.to_string(), d.to_string());
                } else if s.required {
                    return Err(CliError::Usage(format!("missing required key `{}`", s.name)));
                }
            }
        }
        Ok(ExperimentConfig { command: spec, values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.raw(key)
            .map(|v| v.parse().map_err(|_| CliError::key(key, format!("cannot parse `{v}`"))))
            .transpose()
    }

    /// Value that is guaranteed by a default or the required flag.
    pub fn get<T: std::str::FromStr>(&self, key: &str) -> CliResult<T> {
        self.parsed(key)?
            .ok_or_else(|| CliError::Usage(format!("missing required key `{key}`")))
    }

    pub fn with<T>(&self, key: &str, f: impl Fn(&str) -> Result<T, String>) -> CliResult<Option<T>> {
        self.raw(key).map(|v| f(v).map_err(|e| CliError::key(key, e))).transpose()
    }
}
