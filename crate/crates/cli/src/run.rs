use std::fmt::Write as _;

use planar_qed::analysis::{find_barrier_with, levitation_check_with_gravity, trap_check, BarrierOptions, BarrierReport};
use planar_qed::observables::{Backend, Evaluator};
use planar_qed::spp::{find_poles, pole_proximity, Polarization};
use planar_qed::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Command, Format};
use crate::config::RunConfig;
use crate::error::CliError;

pub const CSV_HEADER: &str = "z_A,U_reduced,F_reduced,rate,backend,s_part_re,p_part_re,s_part_im,p_part_im";
pub const GREEN_HEADER: &str = "z_A,gxx_re,gxx_im,gzz_re,gzz_im,dgxx_re,dgxx_im,dgzz_re,dgzz_im,backend";

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn evaluator(cfg: &RunConfig) -> Result<Evaluator, CliError> {
    let eval = Evaluator::new(cfg.medium, cfg.d, cfg.orientation, cfg.quadrature, cfg.backend)?;
    if cfg.backend.is_none() && eval.backend() == Backend::Ideal {
        eprintln!("note: lossless eps = mu = -1, using the ideal closed forms");
    }
    Ok(eval.with_lattice_scale(cfg.lattice_scale))
}

fn report(cfg: &RunConfig, result: Value) -> Result<String, CliError> {
    let doc = json!({
        "config": cfg,
        "result": result,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Validation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn barrier(cfg: &RunConfig, eval: &Evaluator) -> Result<BarrierReport, CliError> {
    let sweep = cfg.sweep.as_ref().ok_or(Error::NotApplicable("barrier search needs a sweep"))?;
    if eval.backend() == Backend::Ideal && sweep.z_min <= cfg.d {
        return Err(Error::Divergent { z_a: sweep.z_min, d: cfg.d }.into());
    }
    let mut opts = BarrierOptions { jobs: cfg.jobs, ..Default::default() };
    if let Some(h) = cfg.min_height {
        opts.min_height = h;
    }
    Ok(find_barrier_with(eval, sweep, &opts)?)
}

/// Runs the command and returns the output document.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    match cfg.command {
        Command::Potential => {
            let eval = evaluator(cfg)?;
            let zs = cfg.sweep.as_ref().map(|s| s.points()).unwrap_or_default();
            let pts = eval.sweep(&zs, cfg.jobs)?;
            match cfg.format {
                Format::Json => report(cfg, json!({ "points": pts })),
                Format::Csv => {
                    let mut s = format!("{CSV_HEADER}\n");
                    for p in &pts {
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{},{},{},{}",
                            num(p.z_a),
                            num(p.potential),
                            num(p.force),
                            num(p.rate),
                            p.backend.as_str(),
                            num(p.s_part_re),
                            num(p.p_part_re),
                            num(p.s_part_im),
                            num(p.p_part_im)
                        );
                    }
                    Ok(s)
                }
            }
        }
        Command::Decay => {
            let eval = evaluator(cfg)?;
            let zs = cfg.sweep.as_ref().map(|s| s.points()).unwrap_or_default();
            let pts = eval.rate_sweep(&zs, cfg.jobs)?;
            match cfg.format {
                Format::Json => report(cfg, json!({ "points": pts })),
                Format::Csv => {
                    let mut s = format!("{CSV_HEADER}\n");
                    for p in &pts {
                        let _ = writeln!(
                            s,
                            "{},,,{},{},,,{},{}",
                            num(p.z_a),
                            num(p.rate),
                            p.backend.as_str(),
                            num(p.s_part_im),
                            num(p.p_part_im)
                        );
                    }
                    Ok(s)
                }
            }
        }
        Command::Green => {
            let eval = evaluator(cfg)?;
            let zs = cfg.sweep.as_ref().map(|s| s.points()).unwrap_or_default();
            let rows = eval.sweep_with(&zs, cfg.jobs, |e, z| e.green_with_derivative(z).map(|g| (z, g)))?;
            let backend = eval.backend().as_str();
            match cfg.format {
                Format::Json => {
                    let pts: Vec<Value> = rows
                        .iter()
                        .map(|(z, (g, dg))| json!({ "z_a": z, "green": g, "derivative": dg, "backend": backend }))
                        .collect();
                    report(cfg, json!({ "points": pts }))
                }
                Format::Csv => {
                    let mut s = format!("{GREEN_HEADER}\n");
                    for (z, (g, dg)) in &rows {
                        let cols = [g.gxx, g.gzz, dg.gxx, dg.gzz]
                            .iter()
                            .flat_map(|c| [num(c.re), num(c.im)])
                            .collect::<Vec<_>>()
                            .join(",");
                        let _ = writeln!(s, "{},{cols},{backend}", num(*z));
                    }
                    Ok(s)
                }
            }
        }
        Command::Barrier => {
            let eval = evaluator(cfg)?;
            let r = barrier(cfg, &eval)?;
            let mut result = json!({ "barrier": r });
            if let (Some(atom), true) = (cfg.atom_si, r.exists) {
                let lev = levitation_check_with_gravity(&r, &atom, cfg.gravity)?;
                result["levitation"] = to_value(&lev);
            }
            report(cfg, result)
        }
        Command::Trap => {
            let eval = evaluator(cfg)?;
            let r = barrier(cfg, &eval)?;
            let (Some(atom), Some(t)) = (cfg.atom_si, cfg.temperature) else {
                return Err(CliError::Validation("trap needs atom data and a temperature".into()));
            };
            let mut result = json!({ "barrier": r });
            if r.exists {
                let trap = trap_check(&r, &atom, t)?;
                result["traps"] = Value::Bool(trap.traps);
                result["trap"] = to_value(&trap);
                result["levitation"] = to_value(&levitation_check_with_gravity(&r, &atom, cfg.gravity)?);
            } else {
                result["traps"] = Value::Bool(false);
            }
            report(cfg, result)
        }
        Command::Spp => {
            let bx = cfg.search_box.unwrap_or_default();
            let s = find_poles(&cfg.medium, cfg.d, Polarization::S, &bx)?;
            let p = find_poles(&cfg.medium, cfg.d, Polarization::P, &bx)?;
            let splits = pole_proximity(&cfg.medium, cfg.d)?;
            report(cfg, json!({ "s": s, "p": p, "pole_proximity": splits }))
        }
    }
}
