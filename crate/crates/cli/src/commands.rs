//! One function per subcommand. Each returns the text printed on stdout.

use std::path::Path;

use anyhow::{bail, Context};
use mcgl::cahn_hilliard::{cell_centres, mass, run, Mobility, SimConfig};
use mcgl::phase_plane::Model;
use mcgl::potential::MaxwellPoint;
use mcgl::stationary::{
    convergence_metrics, destabilize_nonmonotone, limit_profile, rank_energies, reconstruct_profile,
    reconstruct_profile_at, solve_n_transition, solve_simple, SolveReport, StationaryError,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{InitKind, RunConfig};
use crate::exit::OutOfDomain;
use crate::output::{json, num, tag, write_file, Csv};

fn model(cfg: &RunConfig) -> anyhow::Result<Model> {
    Ok(Model::new(cfg.potential.build()?)?)
}

#[derive(Serialize)]
struct MaxwellRecord {
    #[serde(flatten)]
    point: MaxwellPoint,
    f_bar: f64,
}

pub fn maxwell_point(cfg: &RunConfig, hash: &str) -> anyhow::Result<String> {
    let m = model(cfg)?;
    let text = json(hash, &MaxwellRecord { point: m.maxwell, f_bar: m.eps_bound.f_bar })?;
    write_file(&cfg.output_dir, "maxwell_point.json", &text)?;
    Ok(text)
}

#[derive(Serialize)]
struct SolveRecord<'a> {
    #[serde(flatten)]
    report: &'a SolveReport,
    residual_norm: f64,
    mass: f64,
    profile_file: String,
}

pub fn solve(cfg: &RunConfig, hash: &str) -> anyhow::Result<String> {
    let m = model(cfg)?;
    let (eps, r) = (cfg.eps(), cfg.r());
    let report = solve_simple(&m, eps, r, &cfg.solver.options())?;
    let profile = reconstruct_profile(&report, cfg.grid_size)?;
    let stem = format!("eps{}_r{}", tag(eps), tag(r));
    let profile_file = format!("profile_{stem}.csv");
    let mut csv = Csv::new(hash, &["x", "u"]);
    for (x, u) in profile.xs.iter().zip(&profile.us) {
        csv.numbers(&[*x, *u]);
    }
    csv.write(&cfg.output_dir, &profile_file)?;
    let record = SolveRecord { report: &report, residual_norm: report.residual_norm(), mass: profile.mass(), profile_file };
    let text = json(hash, &record)?;
    write_file(&cfg.output_dir, &format!("solve_{stem}.json"), &text)?;
    Ok(text)
}

/// Short failure label for CSV status columns.
fn status(err: &StationaryError) -> &'static str {
    match crate::exit::code_for_stationary(err) {
        2 => "invalid-potential",
        3 => "out-of-domain",
        _ => "solver-failure",
    }
}

/// The `(ε, r)` grid ordered by increasing `r`, then decreasing `ε`.
fn ordered_grid(cfg: &RunConfig) -> Vec<(f64, f64)> {
    let mut rs = cfg.grid.r.clone();
    rs.sort_by(f64::total_cmp);
    let mut es = cfg.grid.eps.clone();
    es.sort_by(|a, b| b.total_cmp(a));
    rs.iter().flat_map(|&r| es.iter().map(move |&e| (e, r))).collect()
}

pub const SWEEP_COLUMNS: [&str; 15] = [
    "eps", "r", "sigma", "b", "ln_h1", "ln_h2", "k1", "k2", "res0", "res1", "z1", "z2", "energy", "iters", "status",
];

pub fn sweep(cfg: &RunConfig, hash: &str) -> anyhow::Result<String> {
    let m = model(cfg)?;
    let opts = cfg.solver.options();
    let grid = ordered_grid(cfg);
    let rows: Vec<_> = grid.par_iter().map(|&(eps, r)| (eps, r, solve_simple(&m, eps, r, &opts))).collect();
    let mut csv = Csv::new(hash, &SWEEP_COLUMNS);
    let mut failures = 0;
    for (eps, r, res) in rows {
        let (values, st) = match res {
            Ok(s) => (
                [
                    s.delta.sigma,
                    s.delta.b,
                    s.ln_h[0],
                    s.ln_h[1],
                    s.k[0],
                    s.k[1],
                    s.residuals[0],
                    s.residuals[1],
                    s.tp.z1,
                    s.tp.z2,
                    s.energy,
                    s.iterations as f64,
                ],
                "ok",
            ),
            Err(e) => {
                failures += 1;
                ([f64::NAN; 12], status(&e))
            }
        };
        let mut fields = vec![num(eps), num(r)];
        fields.extend(values[..11].iter().map(|&v| num(v)));
        fields.push(if st == "ok" { format!("{}", values[11] as usize) } else { "NaN".into() });
        fields.push(st.into());
        csv.row(&fields);
    }
    let path = csv.write(&cfg.output_dir, "convergence.csv")?;
    Ok(format!("{} rows, {failures} failed -> {}\n", grid.len(), path.display()))
}

pub fn rank(cfg: &RunConfig, hash: &str) -> anyhow::Result<String> {
    let m = model(cfg)?;
    let (eps, r) = (cfg.eps(), cfg.r());
    m.check_eps(eps)?;
    let ranking = rank_energies(&m, eps, r, cfg.n_max, &cfg.solver.options());
    let mut csv = Csv::new(hash, &["label", "energy", "status"]);
    for e in &ranking.entries {
        let st = if e.error.is_some() { "failed" } else { "ok" };
        csv.row(&[e.label.clone(), num(e.energy.unwrap_or(f64::NAN)), st.into()]);
    }
    let path = csv.write(&cfg.output_dir, "rank.csv")?;
    Ok(format!("maxwell_first={} -> {}\n", ranking.maxwell_first, path.display()))
}

#[derive(Serialize)]
struct SecondVariationRecord {
    eps: f64,
    r: f64,
    n_transitions: usize,
    #[serde(rename = "J")]
    j: f64,
    gamma: f64,
    linear_coeff: f64,
    quad_coeff: f64,
    z_second: f64,
    j_eta0: f64,
    solution_energy: f64,
}

pub fn second_variation(cfg: &RunConfig, hash: &str) -> anyhow::Result<String> {
    let m = model(cfg)?;
    let (eps, r, n) = (cfg.eps(), cfg.r(), cfg.n);
    if n < 2 {
        return Err(OutOfDomain(format!("second-variation needs n >= 2, got {n}")).into());
    }
    let report = solve_n_transition(&m, eps, r, n, &cfg.solver.options())?;
    let profile = reconstruct_profile(&report, cfg.grid_size)?;
    let d = destabilize_nonmonotone(&m.potential, &report, &profile)?;
    let record = SecondVariationRecord {
        eps,
        r,
        n_transitions: n,
        j: d.j,
        gamma: d.gamma,
        linear_coeff: d.linear_coeff,
        quad_coeff: d.quad_coeff,
        z_second: d.z_second,
        j_eta0: d.j_eta0,
        solution_energy: report.energy,
    };
    let text = json(hash, &record)?;
    write_file(&cfg.output_dir, &format!("second_variation_eps{}_r{}_n{n}.json", tag(eps), tag(r)), &text)?;
    Ok(text)
}

pub fn limit_check(cfg: &RunConfig, hash: &str) -> anyhow::Result<String> {
    let m = model(cfg)?;
    let opts = cfg.solver.options();
    let grid = ordered_grid(cfg);
    let rows: Vec<_> = grid
        .par_iter()
        .map(|&(eps, r)| {
            let res = (|| {
                let lp = limit_profile(&m.maxwell, r)?;
                let s = solve_simple(&m, eps, r, &opts)?;
                let p = reconstruct_profile(&s, cfg.grid_size)?;
                convergence_metrics(&p, &lp, cfg.halfwidth)
            })();
            (eps, r, res)
        })
        .collect();
    let mut csv = Csv::new(hash, &["eps", "r", "sup_dev", "interface_x", "interface_err", "status"]);
    for (eps, r, res) in rows {
        let (v, st) = match res {
            Ok(c) => ([c.sup_dev, c.interface_x, c.interface_err], "ok"),
            Err(e) => ([f64::NAN; 3], status(&e)),
        };
        let mut fields: Vec<String> = [eps, r, v[0], v[1], v[2]].iter().map(|&x| num(x)).collect();
        fields.push(st.into());
        csv.row(&fields);
    }
    let path = csv.write(&cfg.output_dir, "limit.csv")?;
    Ok(format!("{} rows -> {}\n", grid.len(), path.display()))
}

/// Reads the last column of a CSV, skipping `#` comments and a header.
fn read_initial_data(path: &Path) -> anyhow::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut us = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let last = line.rsplit(',').next().unwrap_or("").trim();
        match last.parse::<f64>() {
            Ok(v) => us.push(v),
            Err(_) if us.is_empty() => continue,
            Err(_) => bail!("{}:{}: cannot parse {last:?}", path.display(), i + 1),
        }
    }
    Ok(us)
}

#[derive(Serialize)]
struct SimulateRecord {
    n_cells: usize,
    eps: f64,
    t_end: f64,
    t: f64,
    steps: u64,
    rejected_steps: u64,
    max_dt_used: f64,
    mass0: f64,
    mass: f64,
    energy0: f64,
    energy: f64,
    max_rel_increase: f64,
}

pub fn simulate(cfg: &RunConfig, hash: &str) -> anyhow::Result<String> {
    let m = model(cfg)?;
    let sc = &cfg.simulate;
    let (eps, r) = (cfg.eps(), cfg.r());
    let u0 = match sc.init {
        InitKind::File => {
            let path = sc.file.as_ref().ok_or_else(|| OutOfDomain("init = \"file\" needs simulate.file".into()))?;
            read_initial_data(path)?
        }
        InitKind::Maxwell => {
            let s = solve_simple(&m, eps, r, &cfg.solver.options())?;
            reconstruct_profile_at(&s, cell_centres(sc.n_cells))?.us
        }
        InitKind::Step => {
            let (a, b) = (m.maxwell.alpha0, m.maxwell.beta0);
            let centre = limit_profile(&m.maxwell, r)?.interface();
            let dx = 2.0 / sc.n_cells as f64;
            cell_centres(sc.n_cells)
                .iter()
                .map(|&x| a + (b - a) * ((x - centre + 2.0 * dx) / (4.0 * dx)).clamp(0.0, 1.0))
                .collect()
        }
        InitKind::Spinodal => cell_centres(sc.n_cells)
            .iter()
            .map(|&x| r + 1e-3 * (std::f64::consts::PI * x).cos())
            .collect(),
    };
    let mut sim = SimConfig::new(u0.len(), eps, m.potential.clone(), sc.t_end);
    sim.safety = sc.safety;
    sim.sample_interval = sc.sample_interval;
    sim.mobility = Mobility::Constant(sc.mobility);
    let out = run(&sim, u0)?;

    let mut trace = Csv::new(hash, &["t", "mass", "energy"]);
    for s in &out.energy_trace {
        trace.numbers(&[s.t, s.mass, s.energy]);
    }
    trace.write(&cfg.output_dir, "trace.csv")?;
    let mut snap = Csv::new(hash, &["x", "u"]);
    for (x, u) in cell_centres(out.u.len()).iter().zip(&out.u) {
        snap.numbers(&[*x, *u]);
    }
    snap.write(&cfg.output_dir, "snapshot.csv")?;
    let record = SimulateRecord {
        n_cells: out.u.len(),
        eps,
        t_end: sc.t_end,
        t: out.t,
        steps: out.steps as u64,
        rejected_steps: out.rejected_steps as u64,
        max_dt_used: out.max_dt_used,
        mass0: out.mass0,
        mass: mass(out.dx, &out.u),
        energy0: out.energy_trace.first().map_or(f64::NAN, |s| s.energy),
        energy: out.energy,
        max_rel_increase: out.max_rel_increase,
    };
    let text = json(hash, &record)?;
    write_file(&cfg.output_dir, "simulate.json", &text)?;
    Ok(text)
}
