//! Typed, fully validated commands.

use std::path::PathBuf;

use mera_core::network::{Interval, MeraNetwork};
use mera_core::schedule::solve_schedule;
use mera_core::simulator::{check_feasible, memory_cap};
use mera_core::spectra::{Rescale, SuperOperatorSpec};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::parse::{parse_interval, parse_list, parse_specs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Job {
    Schedule {
        net: MeraNetwork,
        network_json: Option<PathBuf>,
    },
    Entropy {
        net: MeraNetwork,
        interval: Interval,
        trials: usize,
        seed: u64,
        units: Units,
    },
    MutualInfo {
        net: MeraNetwork,
        pairs: Vec<(Interval, Interval)>,
        trials: usize,
        seed: u64,
        units: Units,
    },
    Cuts {
        net: MeraNetwork,
        target: CutTarget,
        emit_argmin: Option<PathBuf>,
        units: Units,
    },
    Spectra {
        spec: SuperOperatorSpec,
        seeds: usize,
        svg: Option<PathBuf>,
    },
    Collapse {
        specs: Vec<SuperOperatorSpec>,
        rescale: Rescale,
        seeds: usize,
        svg: Option<PathBuf>,
    },
    MomentsCheck {
        d1: usize,
        d2: usize,
        trials: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub enum CutTarget {
    Interval(Interval),
    Lengths(Vec<u64>),
}

/// A job together with where its CSV goes.
#[derive(Debug, Clone)]
pub struct Plan {
    pub job: Job,
    pub out: Option<PathBuf>,
}

impl Plan {
    /// Checks every parameter, including feasibility of the simulation, so
    /// that no work starts on an invalid configuration.
    pub fn from_config(cfg: &ExperimentConfig) -> CliResult<Self> {
        let out = cfg.raw("out").map(PathBuf::from);
        let path = |k: &str| cfg.raw(k).map(PathBuf::from);
        let job = match cfg.command.name {
            "schedule" => Job::Schedule {
                net: network(cfg)?,
                network_json: path("network-json"),
            },
            "entropy" => {
                let net = network(cfg)?;
                let interval = leaf_interval(cfg, &net, "interval")?.expect("required key");
                check_feasible(&net, memory_cap())?;
                Job::Entropy {
                    net,
                    interval,
                    trials: trials(cfg)?,
                    seed: cfg.get("seed")?,
                    units: units(cfg)?,
                }
            }
            "mutual-info" => {
                let net = network(cfg)?;
                let n = 1u64 << net.levels();
                let start: u64 = cfg.get("start")?;
                if start >= n {
                    return Err(CliError::key("start", format!("must be below the ring size {n}")));
                }
                let lengths = cfg.with("lengths", parse_list::<u64>)?.expect("defaulted key");
                let mut pairs = Vec::new();
                for l in lengths {
                    if l == 0 || 2 * l > n {
                        return Err(CliError::key("lengths", format!("{l} must lie in 1..={}", n / 2)));
                    }
                    let left = net.leaf_interval(start, start + l - 1);
                    let right = net.leaf_interval(start + l, start + 2 * l - 1);
                    pairs.push((left, right));
                }
                check_feasible(&net, memory_cap())?;
                Job::MutualInfo {
                    net,
                    pairs,
                    trials: trials(cfg)?,
                    seed: cfg.get("seed")?,
                    units: units(cfg)?,
                }
            }
            "cuts" => {
                let net = network(cfg)?;
                let iv = leaf_interval(cfg, &net, "interval")?;
                let lengths = cfg.with("lengths", parse_list::<u64>)?;
                let target = match (iv, lengths) {
                    (Some(iv), None) => CutTarget::Interval(iv),
                    (None, Some(ls)) => {
                        let half = 1u64 << (net.levels() - 1);
                        if let Some(bad) = ls.iter().find(|&&l| l == 0 || l >= half) {
                            return Err(CliError::key("lengths", format!("{bad} must lie in 1..{half}")));
                        }
                        CutTarget::Lengths(ls)
                    }
                    (Some(_), Some(_)) => {
                        return Err(CliError::key("lengths", "give either `interval` or `lengths`, not both"))
                    }
                    (None, None) => return Err(CliError::Usage("missing key `interval` or `lengths`".into())),
                };
                let emit_argmin = path("emit-argmin");
                if emit_argmin.is_some() && !matches!(target, CutTarget::Interval(_)) {
                    return Err(CliError::key("emit-argmin", "needs `interval`"));
                }
                Job::Cuts {
                    net,
                    target,
                    emit_argmin,
                    units: units(cfg)?,
                }
            }
            "spectra" => {
                let spec = SuperOperatorSpec::new(cfg.get("dA")?, cfg.get("dB")?, cfg.get("dE")?, cfg.get("seed")?)?;
                Job::Spectra {
                    spec,
                    seeds: seeds(cfg)?,
                    svg: path("svg"),
                }
            }
            "collapse" => {
                let seed: u64 = cfg.get("seed")?;
                let mode = cfg.raw("mode").expect("defaulted key");
                let (rescale, dims) = match mode {
                    "sqrt-d" => {
                        if cfg.raw("specs").is_some() {
                            return Err(CliError::key("specs", "mode sqrt-d takes `dims`"));
                        }
                        let ds = cfg
                            .with("dims", parse_list::<usize>)?
                            .ok_or_else(|| CliError::Usage("mode sqrt-d needs key `dims`".into()))?;
                        (Rescale::SqrtD, ds.into_iter().map(|d| (d, d, d)).collect::<Vec<_>>())
                    }
                    "affine" | "raw" => {
                        if cfg.raw("dims").is_some() {
                            return Err(CliError::key("dims", format!("mode {mode} takes `specs`")));
                        }
                        let specs = cfg
                            .with("specs", parse_specs)?
                            .ok_or_else(|| CliError::Usage(format!("mode {mode} needs key `specs`")))?;
                        let rescale = if mode == "raw" {
                            Rescale::Raw
                        } else {
                            Rescale::Affine {
                                shift: finite(cfg, "shift")?,
                                alpha: finite(cfg, "alpha")?,
                            }
                        };
                        (rescale, specs)
                    }
                    other => return Err(CliError::key("mode", format!("`{other}` is not sqrt-d, affine or raw"))),
                };
                let specs = dims
                    .iter()
                    .enumerate()
                    .map(|(i, &(a, b, e))| {
                        SuperOperatorSpec::new(a, b, e, mera_core::rng::derive_seed(seed, i as u64))
                            .map_err(|err| CliError::key(if mode == "sqrt-d" { "dims" } else { "specs" }, err))
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                Job::Collapse {
                    specs,
                    rescale,
                    seeds: seeds(cfg)?,
                    svg: path("svg"),
                }
            }
            "moments-check" => {
                let (d1, d2) = (cfg.get("d1")?, cfg.get("d2")?);
                mera_core::haar::moment_constants(d1, d2)?;
                let trials = cfg.get("trials")?;
                if trials < 2 {
                    return Err(CliError::key("trials", "need at least 2"));
                }
                Job::MomentsCheck {
                    d1,
                    d2,
                    trials,
                    seed: cfg.get("seed")?,
                }
            }
            other => return Err(CliError::Usage(format!("unknown command `{other}`"))),
        };
        Ok(Plan { job, out })
    }
}

fn network(cfg: &ExperimentConfig) -> CliResult<MeraNetwork> {
    let leaf: u64 = cfg.get("leaf-dim")?;
    let eps = finite(cfg, "epsilon")?;
    let sched = solve_schedule(leaf, eps).map_err(|e| match e {
        mera_core::Error::InvalidParameter(m) => CliError::Usage(m),
        other => other.into(),
    })?;
    Ok(MeraNetwork::new(sched))
}

fn finite(cfg: &ExperimentConfig, key: &str) -> CliResult<f64> {
    let v: f64 = cfg.get(key)?;
    if !v.is_finite() {
        return Err(CliError::key(key, "must be finite"));
    }
    Ok(v)
}

fn leaf_interval(cfg: &ExperimentConfig, net: &MeraNetwork, key: &str) -> CliResult<Option<Interval>> {
    let Some((i, j)) = cfg.with(key, parse_interval)? else {
        return Ok(None);
    };
    let n = 1u64 << net.levels();
    if i >= n || j >= n {
        return Err(CliError::key(key, format!("sites must be below the ring size {n}")));
    }
    Ok(Some(net.leaf_interval(i, j)))
}

fn trials(cfg: &ExperimentConfig) -> CliResult<usize> {
    let t: usize = cfg.get("trials")?;
    if t < 2 {
        return Err(CliError::key("trials", "need at least 2"));
    }
    Ok(t)
}

fn seeds(cfg: &ExperimentConfig) -> CliResult<usize> {
    let s: usize = cfg.get("seeds")?;
    if s == 0 {
        return Err(CliError::key("seeds", "need at least 1"));
    }
    Ok(s)
}

fn units(cfg: &ExperimentConfig) -> CliResult<Units> {
    match cfg.raw("units").expect("defaulted key") {
        "nats" => Ok(Units::Nats),
        "bits" => Ok(Units::Bits),
        other => Err(CliError::key("units", format!("`{other}` is not nats or bits"))),
    }
}
