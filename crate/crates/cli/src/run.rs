//! Executes a validated plan, writing CSV and side artifacts.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use mera_core::cutbounds::{interval_entropy_scaling, mi_prediction, CutDp, Sandwich};
use mera_core::haar::{fourth_moment_mc, moment_constants, moment_entry_mc, probe_moments, Contraction, McEstimate};
use mera_core::network::Interval;
use mera_core::rng::derive_seed;
use mera_core::schedule::{memory_estimate, schedule_report};
use mera_core::simulator::{mc_entropy_stats, mc_mutual_information};
use mera_core::spectra::{collapse_distance, collapse_rows, curve, mean_spectrum, singular_spectrum, SuperOperatorSpec};

use crate::error::{CliError, CliResult};
use crate::job::{CutTarget, Job, Plan};
use crate::svg::{line_plot, Series};

/// Runs the plan and returns the one-line summary.
pub fn run(plan: &Plan) -> CliResult<String> {
    match &plan.out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(|e| io_at(p, e))?);
            let s = run_to(&plan.job, &mut w)?;
            w.flush()?;
            Ok(s)
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            run_to(&plan.job, &mut lock)
        }
    }
}

/// Runs the job with its CSV going to `out`.
pub fn run_to(job: &Job, out: &mut dyn Write) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(out);
    let summary = match job {
        Job::Schedule { net, network_json } => {
            let s = net.schedule();
            w.write_record(["k", "D_k", "Dprime_k", "scale", "ratio"])?;
            for row in schedule_report(s) {
                let dp = row.d_prime.map(|d| d.to_string()).unwrap_or_default();
                w.write_record([row.k.to_string(), row.d.to_string(), dp, num(row.scale), num(row.ratio)])?;
            }
            if let Some(p) = network_json {
                write_file(p, &net.to_json()?)?;
            }
            let peak = memory_estimate(s).peak;
            format!(
                "L = {}, D_0 = {}, peak state 2^{:.1} amplitudes",
                s.levels(),
                s.d(0),
                peak.log2
            )
        }
        Job::Entropy {
            net,
            interval,
            trials,
            seed,
            units,
        } => {
            let st = mc_entropy_stats(net, interval, *trials, *seed)?;
            w.write_record(["trial", "S", "S2", "exp_neg_S2"])?;
            for t in 0..st.s.len() {
                let (s, s2) = (st.s.samples[t], st.s2.samples[t]);
                w.write_record([t.to_string(), num(units.convert(s)), num(units.convert(s2)), num((-s2).exp())])?;
            }
            let sw = Sandwich::from(&CutDp::new(net).bounds(interval)?);
            format!(
                "{}: mean S = {} +- {} {u}, mean S2 = {} {u}, cut bounds [{}, {}]",
                label(interval),
                short(units.convert(st.s.mean)),
                short(units.convert(st.s.stderr)),
                short(units.convert(st.s2.mean)),
                short(units.convert(sw.lower)),
                short(units.convert(sw.upper)),
                u = units.name()
            )
        }
        Job::MutualInfo {
            net,
            pairs,
            trials,
            seed,
            units,
        } => {
            let stats = mc_mutual_information(net, pairs, *trials, *seed)?;
            w.write_record(["l", "mc_mean", "mc_stderr", "i_lower", "i_upper"])?;
            let mut inside = 0;
            for ((a, b), st) in pairs.iter().zip(&stats) {
                let p = mi_prediction(net, a, b)?;
                if st.mean >= p.i_lower - 3.0 * st.stderr && st.mean <= p.i_upper + 3.0 * st.stderr {
                    inside += 1;
                }
                w.write_record([
                    a.len.to_string(),
                    num(units.convert(st.mean)),
                    num(units.convert(st.stderr)),
                    num(units.convert(p.i_lower)),
                    num(units.convert(p.i_upper)),
                ])?;
            }
            format!("{inside} of {} lengths inside the predicted band", pairs.len())
        }
        Job::Cuts {
            net,
            target,
            emit_argmin,
            units,
        } => match target {
            CutTarget::Interval(iv) => {
                let b = CutDp::new(net).bounds(iv)?;
                let sw = Sandwich::from(&b);
                w.write_record(["interval", "min_cost", "lse", "lower_bound", "sandwich_lower", "height"])?;
                w.write_record([
                    label(iv),
                    num(units.convert(b.min_cost)),
                    num(units.convert(b.lse)),
                    num(units.convert(b.lower_bound)),
                    num(units.convert(sw.lower)),
                    b.height_of_argmin.to_string(),
                ])?;
                if let Some(p) = emit_argmin {
                    write_file(p, &b.argmin.to_json())?;
                }
                format!(
                    "{}: min cost {} {u} over {} steps, lse {} {u}",
                    label(iv),
                    short(units.convert(b.min_cost)),
                    b.height_of_argmin,
                    short(units.convert(b.lse)),
                    u = units.name()
                )
            }
            CutTarget::Lengths(ls) => {
                let rows = interval_entropy_scaling(net, ls)?;
                w.write_record(["l", "upper", "lower", "log_d_ref"])?;
                for r in &rows {
                    w.write_record([
                        r.l.to_string(),
                        num(units.convert(r.upper)),
                        num(units.convert(r.lower)),
                        num(units.convert(r.log_d_ref)),
                    ])?;
                }
                let worst = rows
                    .iter()
                    .map(|r| r.upper / r.log_d_ref)
                    .fold(0.0f64, f64::max);
                format!("{} lengths; max upper / log D_ref = {}", rows.len(), short(worst))
            }
        },
        Job::Spectra { spec, seeds, svg } => {
            w.write_record(["spec", "seed", "i", "lambda"])?;
            let mut series = Vec::new();
            let (mut l0, mut l1) = (0.0, 0.0);
            for t in 0..*seeds {
                let draw = derive_seed(spec.seed, t as u64);
                let sp = singular_spectrum(&spec.with_seed(draw))?;
                for (i, v) in sp.values.iter().enumerate() {
                    w.write_record([spec_label(spec), draw.to_string(), i.to_string(), num(*v)])?;
                }
                l0 += sp.values[0] / *seeds as f64;
                l1 += sp.values.get(1).copied().unwrap_or(0.0) / *seeds as f64;
                series.push(Series {
                    label: format!("seed {draw}"),
                    points: sp.values.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect(),
                });
            }
            if let Some(p) = svg {
                write_file(p, &line_plot(&spec_label(spec), "i", "lambda(i)", &series))?;
            }
            format!("{}: mean lambda0 = {}, mean lambda1 = {}", spec_label(spec), short(l0), short(l1))
        }
        Job::Collapse {
            specs,
            rescale,
            seeds,
            svg,
        } => {
            let spectra = specs
                .iter()
                .map(|s| mean_spectrum(s, *seeds))
                .collect::<mera_core::Result<Vec<_>>>()?;
            let rows = collapse_rows(specs, &spectra, *rescale)?;
            w.write_record(["spec", "i", "x", "y"])?;
            for r in &rows {
                w.write_record([spec_label(&specs[r.spec]), r.i.to_string(), num(r.x), num(r.y)])?;
            }
            let curves: Vec<_> = (0..specs.len()).map(|i| curve(&rows, i)).collect();
            if let Some(p) = svg {
                let series: Vec<Series> = specs
                    .iter()
                    .zip(&curves)
                    .map(|(s, c)| Series {
                        label: spec_label(s),
                        points: c.clone(),
                    })
                    .collect();
                write_file(p, &line_plot("rescaled spectra", "x", "y", &series))?;
            }
            let worst = (1..curves.len())
                .map(|j| collapse_distance(&curves[0], &curves[j]))
                .fold(0.0f64, f64::max);
            format!("{} specs; max collapse distance to the first = {}", specs.len(), short(worst))
        }
        Job::MomentsCheck { d1, d2, trials, seed } => {
            let mc = moment_constants(*d1, *d2)?;
            w.write_record(["quantity", "mc_mean", "mc_stderr", "closed_form", "z"])?;
            let mut worst = 0.0f64;
            let mut row = |name: &str, est: McEstimate, cf: f64| -> CliResult<()> {
                let z = z_score(&est, cf);
                worst = worst.max(z.abs());
                w.write_record([name.to_string(), num(est.mean), num(est.stderr), num(cf), num(z)])?;
                Ok(())
            };
            for c in Contraction::ALL {
                row(c.name(), fourth_moment_mc(*d1, *d2, c, *trials, *seed)?, c.closed_form(&mc))?;
            }
            for (name, idx, kc, kp) in probe_moments() {
                row(name, moment_entry_mc(*d1, *d2, idx, *trials, *seed)?, kc * mc.c + kp * mc.c_prime)?;
            }
            format!(
                "c = {}, c' = {}; max |z| = {}",
                short(mc.c),
                short(mc.c_prime),
                short(worst)
            )
        }
    };
    w.flush()?;
    Ok(summary)
}

/// Deviation in standard errors. Estimates whose spread is pure rounding
/// (the norm-only contractions) count as exact when they agree to 1e-9.
fn z_score(est: &McEstimate, cf: f64) -> f64 {
    let diff = est.mean - cf;
    let scale = cf.abs().max(1.0);
    if est.stderr > 1e-12 * scale {
        diff / est.stderr
    } else if diff.abs() <= 1e-9 * scale {
        0.0
    } else {
        f64::INFINITY * diff.signum()
    }
}

fn write_file(p: &Path, text: &str) -> CliResult<()> {
    std::fs::write(p, text).map_err(|e| io_at(p, e))
}

fn io_at(p: &Path, e: io::Error) -> CliError {
    CliError::Failure(format!("{}: {e}", p.display()))
}

fn label(iv: &Interval) -> String {
    if iv.is_empty() {
        "empty".into()
    } else {
        format!("{}:{}", iv.start, iv.end())
    }
}

fn spec_label(s: &SuperOperatorSpec) -> String {
    format!("{}:{}:{}", s.d_a, s.d_b, s.d_e)
}

/// Round-trippable number text; exponent form only for very small or large magnitudes.
pub fn num(v: f64) -> String {
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn short(v: f64) -> String {
    format!("{v:.4}")
}
