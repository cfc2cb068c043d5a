//! CSV writers. Every file has a header row and a fixed column order;
//! numbers use Rust's shortest round-trip formatting, so identical runs
//! produce identical bytes.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::design::{truncate_for_report, Design};
use crate::filters::{lms_msd_theory, lms_msd_upper_bound, lms_rate_theory, lms_step_bound, rls_msd_theory};
use crate::sampling::{reconstructability_lambda, NoiseModel, SamplingProbabilities};
use crate::spectral::Bandlimit;
use crate::to_db;

use super::{CompareRow, ExperimentError, LearningCurve};

fn or_nan(value: Option<f64>) -> f64 {
    value.unwrap_or(f64::NAN)
}

/// `iteration,msd_linear,msd_db,theory_msd_db,theory_rate`.
pub fn write_curve<W: Write>(out: &mut W, curve: &LearningCurve) -> io::Result<()> {
    writeln!(out, "iteration,msd_linear,msd_db,theory_msd_db,theory_rate")?;
    let theory_db = or_nan(curve.theory_msd.map(to_db));
    let rate = or_nan(curve.theory_rate);
    for (n, &m) in curve.msd.iter().enumerate() {
        writeln!(out, "{n},{m},{},{theory_db},{rate}", to_db(m))?;
    }
    Ok(())
}

/// `iteration,node,msd_linear,msd_db`, node-major.
pub fn write_node_curves<W: Write>(out: &mut W, per_node: &[Vec<f64>]) -> io::Result<()> {
    writeln!(out, "iteration,node,msd_linear,msd_db")?;
    for (node, curve) in per_node.iter().enumerate() {
        for (n, &m) in curve.iter().enumerate() {
            writeln!(out, "{n},{node},{m},{}", to_db(m))?;
        }
    }
    Ok(())
}

/// `node,p,noise_variance,p_max`, with negligible probabilities zeroed.
pub fn write_probabilities<W: Write>(out: &mut W, probs: &SamplingProbabilities, noise: &NoiseModel) -> io::Result<()> {
    writeln!(out, "node,p,noise_variance,p_max")?;
    let p = truncate_for_report(probs.probs());
    for (i, ((pi, s), b)) in p.iter().zip(noise.variances()).zip(probs.bounds()).enumerate() {
        writeln!(out, "{i},{pi},{s},{b}")?;
    }
    Ok(())
}

/// `iteration,objective,msd,violation`, one row per recorded iterate.
pub fn write_trace<W: Write>(out: &mut W, design: &Design) -> io::Result<()> {
    writeln!(out, "iteration,objective,msd,violation")?;
    for (k, entry) in design.trace.entries.iter().enumerate() {
        writeln!(out, "{k},{},{},{}", entry.objective, entry.msd, entry.violation)?;
    }
    Ok(())
}

/// `alpha,strategy,sampling_rate_mean,sampling_rate_std,trials`.
pub fn write_comparison<W: Write>(out: &mut W, rows: &[CompareRow]) -> io::Result<()> {
    writeln!(out, "alpha,strategy,sampling_rate_mean,sampling_rate_std,trials")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.alpha,
            r.strategy.name(),
            r.sampling_rate_mean,
            r.sampling_rate_std,
            r.trials
        )?;
    }
    Ok(())
}

/// Closed-form predictions for one sampling design, as `quantity,value` rows.
pub fn theory_table(
    probs: &SamplingProbabilities,
    noise: &NoiseModel,
    band: &Bandlimit,
    step: f64,
    forgetting: f64,
) -> Vec<(&'static str, f64)> {
    let p = probs.probs();
    let lms_msd = lms_msd_theory(p, step, noise, band).unwrap_or(f64::NAN);
    let rls_msd = if forgetting < 1.0 { rls_msd_theory(p, forgetting, noise, band).unwrap_or(f64::NAN) } else { f64::NAN };
    vec![
        ("sampling_rate", probs.expected_count()),
        ("reconstructability_lambda", reconstructability_lambda(p, band)),
        ("lms_step", step),
        ("lms_step_bound", lms_step_bound(p, band)),
        ("lms_rate", lms_rate_theory(p, step, band)),
        ("lms_msd", lms_msd),
        ("lms_msd_db", to_db(lms_msd)),
        ("lms_msd_upper_bound", lms_msd_upper_bound(p, step, noise, band).unwrap_or(f64::NAN)),
        ("rls_forgetting", forgetting),
        ("rls_msd", rls_msd),
        ("rls_msd_db", to_db(rls_msd)),
    ]
}

pub fn write_theory<W: Write>(out: &mut W, rows: &[(&str, f64)]) -> io::Result<()> {
    writeln!(out, "quantity,value")?;
    for (name, value) in rows {
        writeln!(out, "{name},{value}")?;
    }
    Ok(())
}

/// Creates `path` (and its parent directory) and fills it with `write`.
pub fn write_file<F>(path: &Path, write: F) -> Result<(), ExperimentError>
where
    F: FnOnce(&mut io::BufWriter<fs::File>) -> io::Result<()>,
{
    let wrap = |source| ExperimentError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(wrap)?;
    }
    let mut out = io::BufWriter::new(fs::File::create(path).map_err(wrap)?);
    write(&mut out).and_then(|_| out.flush()).map_err(wrap)
}
