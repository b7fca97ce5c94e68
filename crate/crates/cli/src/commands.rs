use std::collections::BTreeMap;

use rayon::prelude::*;
use varqfi::bounds::{
    cq_min_loss_diffusion, cq_min_loss_thermal, cq_min_loss_zero_t, exact_qfi_squeezed,
    im_opt_squeezed, phase_variance_bound_full,
};
use varqfi::channels::NoiseParams;
use varqfi::fock::{squeezed_vacuum, squeezed_vacuum_dim};
use varqfi::numerics::log_grid;
use varqfi::oracle::qfi_phase_covariant;
use varqfi::waveform::{fig3_point, AntiSqueezingRule};
use varqfi::InputMoments;

use crate::args::{BoundArgs, BoundName, Fig1Args, Fig2Args, Fig3Args, OracleArgs};
use crate::table::{fmt_g, Cell, Table};
use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_grid(name: &str, lo: f64, hi: f64, n: usize, log: bool) -> Result<(), CliError> {
    let ok = lo.is_finite() && hi.is_finite() && lo < hi && n >= 2 && (!log || lo > 0.0);
    if ok {
        Ok(())
    } else {
        Err(usage(format!(
            "invalid {name} grid: need finite {}min < max and at least 2 points (got {lo}, {hi}, {n})",
            if log { "0 < " } else { "" }
        )))
    }
}

fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

pub fn fig1(a: &Fig1Args) -> Result<Table, CliError> {
    check_grid("mean photon number", a.n_min, a.n_max, a.n_points, true)?;
    if a.n_thermal.is_empty() {
        return Err(usage("at least one bath occupation is required"));
    }
    let mut t = Table::new(vec!["mean_n", "n_T", "cq_min", "exact_qfi"]);
    for &n_t in &a.n_thermal {
        for n in log_grid(a.n_min, a.n_max, a.n_points) {
            let m = InputMoments::squeezed_vacuum(InputMoments::squeezing_for_mean(n))?;
            let cq = cq_min_loss_thermal(&m, a.eta, n_t)?;
            let exact = exact_qfi_squeezed(InputMoments::squeezing_for_mean(n), a.eta, n_t)?;
            t.push(vec![n.into(), n_t.into(), cq.into(), exact.into()]);
        }
    }
    Ok(t)
}

fn oracle_qfi(r: f64, noise: &NoiseParams) -> varqfi::Result<f64> {
    let psi = squeezed_vacuum(r, squeezed_vacuum_dim(r))?;
    qfi_phase_covariant(&noise.apply(&psi.to_density())?)
}

pub fn fig2(a: &Fig2Args) -> Result<Table, CliError> {
    check_grid("squeezing", a.r_min, a.r_max, a.r_points, false)?;
    if a.r_min < 0.0 {
        return Err(usage("squeezing must be non-negative"));
    }
    let noise = NoiseParams::new(a.eta, 0.0, a.lambda)?;
    let grid = linear_grid(a.r_min, a.r_max, a.r_points);
    let mut header = vec!["mean_n", "cq_min", "im_opt"];
    if a.oracle {
        header.push("oracle_qfi");
    }
    let oracle: Vec<Option<f64>> = if a.oracle {
        if grid.iter().any(|&r| r > a.oracle_max_r) {
            eprintln!(
                "warning: oracle column left empty for r > {}",
                fmt_g(a.oracle_max_r)
            );
        }
        let vals: Vec<(f64, Option<varqfi::Result<f64>>)> = grid
            .par_iter()
            .map(|&r| (r, (r <= a.oracle_max_r).then(|| oracle_qfi(r, &noise))))
            .collect();
        vals.into_iter()
            .map(|(r, v)| match v {
                Some(Ok(q)) => Some(q),
                Some(Err(e)) => {
                    eprintln!("warning: oracle failed at r = {}: {e}", fmt_g(r));
                    None
                }
                None => None,
            })
            .collect()
    } else {
        vec![None; grid.len()]
    };
    let mut t = Table::new(header);
    for (&r, q) in grid.iter().zip(oracle) {
        let m = InputMoments::squeezed_vacuum(r)?;
        let mut row: Vec<Cell> = vec![
            m.mean_n.into(),
            cq_min_loss_diffusion(&m, a.eta, a.lambda)?.into(),
            im_opt_squeezed(r, a.eta, a.lambda)?.into(),
        ];
        if a.oracle {
            row.push(q.into());
        }
        t.push(row);
    }
    Ok(t)
}

/// Returns the table and the number of failed rows.
pub fn fig3(a: &Fig3Args, rel_tol: f64) -> Result<(Table, usize), CliError> {
    check_grid("flux", a.flux_min, a.flux_max, a.flux_points, true)?;
    if a.eta.is_empty() {
        return Err(usage("at least one transmission is required"));
    }
    for &eta in &a.eta {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(usage(format!("transmission {eta} outside (0, 1]")));
        }
    }
    let rule = AntiSqueezingRule::default();
    let grid = log_grid(a.flux_min, a.flux_max, a.flux_points);
    let jobs: Vec<(f64, f64)> = a
        .eta
        .iter()
        .flat_map(|&eta| grid.iter().map(move |&n| (eta, n)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(eta, n)| fig3_point(eta, n, &rule, rel_tol))
        .collect();
    let mut t = Table::new(vec!["flux_N", "eta", "mse_bound", "beta_star", "error"]);
    let mut failed = 0;
    for (&(eta, n), res) in jobs.iter().zip(results) {
        t.push(match res {
            Ok(p) => vec![
                n.into(),
                eta.into(),
                p.bound.into(),
                p.beta_star.into(),
                Cell::Empty,
            ],
            Err(e) => {
                failed += 1;
                eprintln!("warning: flux {} eta {}: {e}", fmt_g(n), fmt_g(eta));
                vec![
                    n.into(),
                    eta.into(),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Text(e.to_string()),
                ]
            }
        });
    }
    Ok((t, failed))
}

const KEYS: [&str; 6] = ["mean_n", "var_n", "r", "eta", "nT", "lambda"];

fn parse_params(params: &[String], allowed: &[&str]) -> Result<BTreeMap<String, f64>, CliError> {
    let mut map = BTreeMap::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| usage(format!("expected key=value, got `{p}`")))?;
        if !allowed.contains(&k) {
            return Err(usage(format!(
                "unknown parameter `{k}`; valid: {}",
                allowed.join(", ")
            )));
        }
        let x: f64 = v
            .parse()
            .map_err(|_| usage(format!("`{v}` is not a number (parameter {k})")))?;
        map.insert(k.to_string(), x);
    }
    Ok(map)
}

struct Params {
    map: BTreeMap<String, f64>,
}

impl Params {
    fn get(&self, k: &str, default: f64) -> f64 {
        self.map.get(k).copied().unwrap_or(default)
    }

    fn require(&self, k: &str) -> Result<f64, CliError> {
        self.map
            .get(k)
            .copied()
            .ok_or_else(|| usage(format!("missing parameter {k}")))
    }

    fn moments(&self) -> Result<InputMoments, CliError> {
        match (
            self.map.get("r"),
            self.map.get("mean_n"),
            self.map.get("var_n"),
        ) {
            (Some(&r), None, None) => Ok(InputMoments::squeezed_vacuum(r)?),
            (None, Some(&n), Some(&v)) => Ok(InputMoments::new(n, v)?),
            _ => Err(usage("give either r, or both mean_n and var_n")),
        }
    }
}

fn report(name: &str, inputs: &[(&str, f64)], value: f64) -> String {
    let mut s = name.to_string();
    for (k, v) in inputs {
        s.push_str(&format!(" {k}={}", fmt_g(*v)));
    }
    s.push_str(&format!(" value={}", fmt_g(value)));
    s
}

fn moment_inputs(p: &Params, m: &InputMoments) -> Vec<(&'static str, f64)> {
    let mut v = Vec::new();
    if let Some(&r) = p.map.get("r") {
        v.push(("r", r));
    }
    v.push(("mean_n", m.mean_n));
    v.push(("var_n", m.var_n));
    v
}

pub fn bound(a: &BoundArgs) -> Result<String, CliError> {
    let allowed: &[&str] = match a.name {
        BoundName::Eq15 | BoundName::Eq22 => &KEYS,
        BoundName::Eq16 => &["mean_n", "var_n", "r", "eta"],
        BoundName::Eq17 => &["r", "eta", "nT"],
        BoundName::Eq21 => &["mean_n", "var_n", "r", "eta", "lambda"],
        BoundName::Eq25 => &["r", "eta", "lambda"],
    };
    let p = Params {
        map: parse_params(&a.params, allowed)?,
    };
    let (eta, n_t, lambda) = (p.get("eta", 1.0), p.get("nT", 0.0), p.get("lambda", 0.0));
    let name = format!("{:?}", a.name).to_lowercase();
    let line = match a.name {
        BoundName::Eq15 => {
            let m = p.moments()?;
            let mut inputs = moment_inputs(&p, &m);
            inputs.extend([("eta", eta), ("nT", n_t)]);
            report(&name, &inputs, cq_min_loss_thermal(&m, eta, n_t)?)
        }
        BoundName::Eq16 => {
            let m = p.moments()?;
            let mut inputs = moment_inputs(&p, &m);
            inputs.push(("eta", eta));
            report(&name, &inputs, cq_min_loss_zero_t(&m, eta)?)
        }
        BoundName::Eq17 => {
            let r = p.require("r")?;
            report(
                &name,
                &[("r", r), ("eta", eta), ("nT", n_t)],
                exact_qfi_squeezed(r, eta, n_t)?,
            )
        }
        BoundName::Eq21 => {
            let m = p.moments()?;
            let mut inputs = moment_inputs(&p, &m);
            inputs.extend([("eta", eta), ("lambda", lambda)]);
            report(&name, &inputs, cq_min_loss_diffusion(&m, eta, lambda)?)
        }
        BoundName::Eq22 => {
            let m = p.moments()?;
            let mut inputs = moment_inputs(&p, &m);
            inputs.extend([("eta", eta), ("nT", n_t), ("lambda", lambda)]);
            report(
                &name,
                &inputs,
                phase_variance_bound_full(&m, eta, n_t, lambda)?,
            )
        }
        BoundName::Eq25 => {
            let r = p.require("r")?;
            report(
                &name,
                &[("r", r), ("eta", eta), ("lambda", lambda)],
                im_opt_squeezed(r, eta, lambda)?,
            )
        }
    };
    Ok(line)
}

pub fn oracle(a: &OracleArgs) -> Result<String, CliError> {
    let p = Params {
        map: parse_params(&a.params, &["r", "eta", "nT", "lambda"])?,
    };
    let r = p.require("r")?;
    let (eta, n_t, lambda) = (p.get("eta", 1.0), p.get("nT", 0.0), p.get("lambda", 0.0));
    let noise = NoiseParams::new(eta, n_t, lambda)?;
    let q = oracle_qfi(r, &noise)?;
    Ok(report(
        "oracle",
        &[("r", r), ("eta", eta), ("nT", n_t), ("lambda", lambda)],
        q,
    ))
}
