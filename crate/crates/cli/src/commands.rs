use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use mtf_core::fem::{l2_error, CoefficientField, SubdomainMesh};
use mtf_core::linalg::C64;
use mtf_core::mesh::{extract_skeleton, generate_partitioned_disk, generate_split_square, load_mesh, save_mesh, Mesh, Skeleton};
use mtf_core::presets::PlaneWave;
use mtf_core::skeleton_solver::{
    estimate_coercivity, gmres, monolithic_reference, relative_l2_difference, richardson, richardson_bound,
    CoercivityEstimate, ProbeMethod, SkeletonSystem, SolveReport, SolverConfig, SystemForm, DENSE_LIMIT,
};
use mtf_core::traces::{Closure, MultiTrace, SingleTraceMap};
use mtf_core::verify::{run_suite, Check};
use mtf_core::Exec;
use serde_json::{json, Value};

use crate::config::{Problem, RunConfig, Solver};
use crate::Failure;

pub const VERSION: &str = concat!("mtf ", env!("CARGO_PKG_VERSION"));

fn input(e: mtf_core::Error) -> Failure {
    Failure::classify(e)
}

pub fn build_mesh(cfg: &RunConfig) -> Result<Mesh, Failure> {
    let mesh = match (&cfg.mesh, cfg.problem) {
        (Some(path), _) => load_mesh(path).map_err(input)?,
        (None, Problem::Square) => generate_split_square(cfg.half_width, cfg.cells).map_err(input)?,
        (None, _) => generate_partitioned_disk(cfg.sectors, cfg.r_skeleton, cfg.r_outer, cfg.h).map_err(input)?,
    };
    Ok(mesh)
}

fn pick(list: &[f64], n: usize, key: &str, default: impl Fn(usize) -> f64) -> Result<Vec<f64>, Failure> {
    match list.len() {
        0 => Ok((0..n).map(default).collect()),
        m if m == n => Ok(list.to_vec()),
        m => Err(Failure::Usage(anyhow!("{key} has {m} entries but the mesh has {n} subdomains"))),
    }
}

pub fn build_media(cfg: &RunConfig, mesh: &Mesh) -> Result<CoefficientField, Failure> {
    let n = mesh.n_subdomains();
    let k2 = cfg.kappa0 * cfg.kappa0;
    if cfg.problem == Problem::PlaneWave {
        return plane_wave(cfg).media(n).map_err(input);
    }
    let mu = pick(&cfg.mu, n, "mu", |j| 1.0 + (j % 2) as f64)?;
    let re = pick(&cfg.kappa_sq, n, "kappa_sq", |j| k2 * (1.0 + 0.25 * j as f64))?;
    let im = pick(&cfg.kappa_sq_im, n, "kappa_sq_im", |_| 0.0)?;
    let k: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
    let mut field = CoefficientField::piecewise_constant(&mu, &k, cfg.kappa0).map_err(input)?;
    if let [x, y, w] = cfg.source[..] {
        field = field.with_source(move |p| C64::new((-((p[0] - x).powi(2) + (p[1] - y).powi(2)) / (w * w)).exp(), 0.0));
    }
    Ok(field)
}

fn plane_wave(cfg: &RunConfig) -> PlaneWave {
    PlaneWave {
        kappa: cfg.kappa0,
        theta: cfg.theta,
    }
}

fn solver_config(cfg: &RunConfig) -> SolverConfig {
    SolverConfig {
        gamma: cfg.gamma,
        omega: cfg.omega,
        closure: if cfg.closure == "exact" { Closure::ExactCircle } else { Closure::Absorbing },
        exec: if cfg.exec == "sequential" { Exec::Sequential } else { Exec::Parallel },
    }
}

fn form(cfg: &RunConfig) -> SystemForm {
    if cfg.form == "difference" {
        SystemForm::Difference
    } else {
        SystemForm::Product
    }
}

struct Setup {
    mesh: Mesh,
    skeleton: Skeleton,
    media: CoefficientField,
}

fn setup(cfg: &RunConfig) -> Result<Setup, Failure> {
    let mesh = build_mesh(cfg)?;
    let skeleton = extract_skeleton(&mesh).map_err(input)?;
    let media = build_media(cfg, &mesh)?;
    Ok(Setup { mesh, skeleton, media })
}

fn echo(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn write_json(path: &Path, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("json serializes");
    fs::write(path, text + "\n")
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Usage)
}

/// CSV with the version and a compact config echo as leading `#` lines.
fn write_csv(path: &Path, cfg: &RunConfig, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut buf = Vec::new();
    writeln!(buf, "# {VERSION}").and_then(|_| writeln!(buf, "# config {}", echo(cfg))).expect("in-memory write");
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).map_err(|e| Failure::Usage(e.into()))?;
        for r in rows {
            w.write_record(r).map_err(|e| Failure::Usage(e.into()))?;
        }
        w.flush().map_err(|e| Failure::Usage(e.into()))?;
    }
    fs::write(path, buf)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::Usage)
}

fn elapsed(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

fn coercivity(sys: &SkeletonSystem, seed: u64) -> Result<CoercivityEstimate, Failure> {
    let method = if sys.total_dofs() <= DENSE_LIMIT {
        ProbeMethod::Dense
    } else {
        ProbeMethod::Lanczos { steps: 80, seed }
    };
    estimate_coercivity(sys, method).map_err(input)
}

fn run_solver(sys: &SkeletonSystem, cfg: &RunConfig, beta: f64) -> Result<(MultiTrace, SolveReport), Failure> {
    match cfg.solver {
        Solver::Richardson => richardson(sys, beta, cfg.tol, cfg.maxit, None),
        Solver::Gmres => gmres(sys, form(cfg), cfg.tol, cfg.maxit, cfg.restart, None),
    }
    .map_err(input)
}

pub fn cmd_mesh(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let p = setup(cfg)?;
    let exterior: Vec<bool> = (0..p.skeleton.n_vertices())
        .map(|s| p.skeleton.occurrences(s).iter().any(|&(j, _)| j == 0))
        .collect();
    let cross = p.skeleton.cross_points();
    let interior_cross = cross.iter().filter(|&&s| !exterior[s]).count();
    let path = out.join("mesh.mtf");
    save_mesh(&p.mesh, &path).map_err(input)?;
    println!("{:<24}{}", "vertices", p.mesh.n_vertices());
    println!("{:<24}{}", "triangles", p.mesh.n_triangles());
    println!("{:<24}{}", "subdomains", p.mesh.n_subdomains());
    println!("{:<24}{}", "skeleton vertices", p.skeleton.n_vertices());
    println!("{:<24}{}", "skeleton dofs", p.skeleton.total_dofs());
    println!("{:<24}{}", "cross points", cross.len());
    println!("{:<24}{}", "interior cross points", interior_cross);
    println!("{:<24}{}", "mesh file", path.display());
    let sizes: Vec<usize> = p.skeleton.boundary_sizes();
    write_json(
        &out.join("partition.json"),
        &json!({
            "config": echo(cfg),
            "version": VERSION,
            "vertices": p.mesh.n_vertices(),
            "triangles": p.mesh.n_triangles(),
            "subdomains": p.mesh.n_subdomains(),
            "boundary_sizes": sizes,
            "skeleton_dofs": p.skeleton.total_dofs(),
            "cross_points": cross.len(),
            "interior_cross_points": interior_cross,
            "max_edge_length": p.mesh.max_edge_length(),
        }),
    )
}

pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let total = Instant::now();
    let t = Instant::now();
    let p = setup(cfg)?;
    let sys = SkeletonSystem::build(&p.mesh, &p.skeleton, &p.media, &solver_config(cfg)).map_err(input)?;
    let t_build = elapsed(t);

    let t = Instant::now();
    let alpha = coercivity(&sys, cfg.seed)?;
    let t_alpha = elapsed(t);

    let t = Instant::now();
    let (sol, rep) = run_solver(&sys, cfg, cfg.beta)?;
    let t_solve = elapsed(t);

    let t = Instant::now();
    let rec = sys.reconstruct(&sol).map_err(input)?;
    let t_rec = elapsed(t);

    let t = Instant::now();
    let oracle = if cfg.oracle {
        let mono = monolithic_reference(&p.mesh, &p.media).map_err(input)?;
        Some(relative_l2_difference(&p.mesh, &rec.global, &mono))
    } else {
        None
    };
    let t_oracle = elapsed(t);
    let exact_error = (cfg.problem == Problem::PlaneWave).then(|| {
        let wave = plane_wave(cfg);
        l2_error(&p.mesh, &SubdomainMesh::whole(&p.mesh), &rec.global, |x| wave.value(x))
    });

    let rows: Vec<Vec<String>> = rec
        .global
        .iter()
        .enumerate()
        .map(|(v, z)| vec![v.to_string(), format!("{:.16e}", z.re), format!("{:.16e}", z.im)])
        .collect();
    write_csv(&out.join("solution.csv"), cfg, &["vertex", "re_u", "im_u"], &rows)?;
    let timings = cfg.record_timings.then(|| {
        json!({
            "build": t_build,
            "coercivity": t_alpha,
            "solve": t_solve,
            "reconstruct": t_rec,
            "oracle": t_oracle,
            "total": elapsed(total),
        })
    });
    write_json(
        &out.join("report.json"),
        &json!({
            "config": echo(cfg),
            "iterations": {
                "count": rep.iterations,
                "converged": rep.converged,
                "solver": rep.solver,
                "skeleton_dofs": sys.total_dofs(),
                "gamma": sys.gamma(),
                "omega": sys.omega(),
            },
            "residuals": {
                "history": rep.residuals,
                "final": rep.residuals.last(),
                "contraction": rep.contraction,
                "richardson_bound": richardson_bound(alpha.alpha, cfg.beta),
                "interface_jump": rec.interface_jump,
                "neumann_balance": rec.neumann_balance,
                "oracle_rel_l2": oracle,
                "exact_l2_error": exact_error,
            },
            "alpha_est": alpha.alpha,
            "timings": timings,
            "version": VERSION,
        }),
    )?;

    println!("{:<24}{}", "skeleton dofs", sys.total_dofs());
    println!("{:<24}{:.6}", "alpha_est", alpha.alpha);
    println!("{:<24}{} ({})", "iterations", rep.iterations, rep.solver);
    println!("{:<24}{:.3e}", "final residual", rep.residuals.last().copied().unwrap_or(0.0));
    println!("{:<24}{:.3e}", "interface jump", rec.interface_jump);
    if let Some(d) = oracle {
        println!("{:<24}{d:.3e}", "oracle rel L2 diff");
    }
    if let Some(e) = exact_error {
        println!("{:<24}{e:.3e}", "L2 error vs exact");
    }
    if !rep.converged {
        return Err(Failure::Numerical(anyhow!(
            "not converged after {} iterations (residual {:.3e})",
            rep.iterations,
            rep.residuals.last().copied().unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

pub fn cmd_verify(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let p = setup(cfg)?;
    let map = SingleTraceMap::new(&p.skeleton);
    let map = match cfg.corrupt_restriction {
        Some((j, pos)) => {
            let entries = map
                .entries(j)
                .get(..)
                .filter(|e| pos < e.len() && e.len() > 1)
                .ok_or_else(|| Failure::Usage(anyhow!("corrupt_restriction {j}:{pos} is out of range")))?;
            let target = entries[(pos + 1) % entries.len()];
            map.corrupted(j, pos, target)
        }
        None => map,
    };
    let sys = SkeletonSystem::build_with_map(&p.mesh, &p.skeleton, &p.media, &solver_config(cfg), map).map_err(input)?;
    let checks = run_suite(&p.mesh, &p.skeleton, &sys, cfg.probes, cfg.seed).map_err(input)?;
    let status = |c: &Check| match (c.value, c.passed()) {
        (None, _) => "skip",
        (_, true) => "pass",
        (_, false) => "FAIL",
    };
    println!("{:<36} {:>12} {:>10}  status", "check", "value", "tolerance");
    for c in &checks {
        let v = c.value.map_or("-".to_string(), |v| format!("{v:.3e}"));
        println!("{:<36} {v:>12} {:>10.1e}  {}", c.name, c.tolerance, status(c));
    }
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.name.to_string(),
                c.value.map_or(String::new(), |v| format!("{v:.6e}")),
                format!("{:e}", c.tolerance),
                status(c).to_lowercase(),
            ]
        })
        .collect();
    write_csv(&out.join("verify.csv"), cfg, &["check", "value", "tolerance", "status"], &rows)?;
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        return Err(Failure::Verification(failed));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderParam {
    Beta,
    H,
    Omega,
    Gamma,
}

pub fn parse_ladder(spec: &str) -> Result<(LadderParam, Vec<f64>)> {
    let (name, values) = spec.split_once('=').ok_or_else(|| anyhow!("ladder must look like beta=0.1,0.5"))?;
    let param = match name.trim() {
        "beta" => LadderParam::Beta,
        "h" => LadderParam::H,
        "omega" => LadderParam::Omega,
        "gamma" => LadderParam::Gamma,
        other => bail!("unknown ladder parameter {other:?}; use beta, h, omega or gamma"),
    };
    let values = values
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| anyhow!("ladder value {v:?}: {e}")))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() || values.iter().any(|v| !(*v > 0.0)) {
        bail!("ladder values must be positive");
    }
    Ok((param, values))
}

pub fn cmd_study(cfg: &RunConfig, out: &Path, param: LadderParam, values: &[f64]) -> Result<(), Failure> {
    let name = match param {
        LadderParam::Beta => "beta",
        LadderParam::H => "h",
        LadderParam::Omega => "omega",
        LadderParam::Gamma => "gamma",
    };
    let mut rows = Vec::new();
    let mut cached: Option<(Setup, SkeletonSystem, CoercivityEstimate, Vec<C64>)> = None;
    println!(
        "{:>8} {:>10} {:>9} {:>10} {:>11} {:>10} {:>12} {:>12}",
        name, "iterations", "converged", "alpha_est", "contraction", "bound", "oracle_diff", "exact_error"
    );
    for &value in values {
        let mut c = cfg.clone();
        match param {
            LadderParam::Beta => c.beta = value,
            LadderParam::H => c.h = value,
            LadderParam::Omega => c.omega = Some(value),
            LadderParam::Gamma => c.gamma = Some(value),
        }
        c.validate().map_err(Failure::Usage)?;
        if param != LadderParam::Beta || cached.is_none() {
            let p = setup(&c)?;
            let sys = SkeletonSystem::build(&p.mesh, &p.skeleton, &p.media, &solver_config(&c)).map_err(input)?;
            let alpha = coercivity(&sys, c.seed)?;
            let mono = monolithic_reference(&p.mesh, &p.media).map_err(input)?;
            cached = Some((p, sys, alpha, mono));
        }
        let (p, sys, alpha, mono) = cached.as_ref().expect("built above");
        let (sol, rep) = run_solver(sys, &c, c.beta)?;
        let rec = sys.reconstruct(&sol).map_err(input)?;
        let diff = relative_l2_difference(&p.mesh, &rec.global, mono);
        let exact = (c.problem == Problem::PlaneWave).then(|| {
            let wave = plane_wave(&c);
            l2_error(&p.mesh, &SubdomainMesh::whole(&p.mesh), &rec.global, |x| wave.value(x))
        });
        let bound = richardson_bound(alpha.alpha, c.beta);
        let contraction = rep.contraction.unwrap_or(0.0);
        println!(
            "{value:>8} {:>10} {:>9} {:>10.6} {contraction:>11.6} {bound:>10.6} {diff:>12.3e} {:>12}",
            rep.iterations,
            rep.converged,
            alpha.alpha,
            exact.map_or("-".into(), |e| format!("{e:.3e}"))
        );
        rows.push(vec![
            name.to_string(),
            format!("{value}"),
            rep.iterations.to_string(),
            rep.converged.to_string(),
            format!("{:.12e}", alpha.alpha),
            format!("{contraction:.12e}"),
            format!("{bound:.12e}"),
            format!("{diff:.6e}"),
            exact.map_or(String::new(), |e| format!("{e:.12e}")),
            format!("{:.12e}", p.mesh.max_edge_length()),
        ]);
    }
    write_csv(
        &out.join("study.csv"),
        cfg,
        &[
            "parameter",
            "value",
            "iterations",
            "converged",
            "alpha_est",
            "contraction",
            "bound",
            "error_vs_oracle",
            "error_vs_exact",
            "max_edge",
        ],
        &rows,
    )
}
