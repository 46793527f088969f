use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use sfvem::analysis::{
    fit_rates, run_level, spectral_audit, write_audit_row, write_convergence_row, ConvergenceRecord,
    AUDIT_CSV_HEADER, CONVERGENCE_CSV_HEADER,
};
use sfvem::element::{AssemblyOptions, Method, ProblemSpec};
use sfvem::mesh::{self, catalog_polygons, CatalogPolygon, PolyMesh};
use sfvem::poly::{build_benchmark_coefficients, poisson_bubble, Poly2};
use sfvem::system::{assemble_with, solve, write_solution_csv, Dirichlet};
use sfvem::{analysis, ell_rule};

use crate::config::{parse_levels, ConfigFile};
use crate::plot::{loglog_svg, Series};
use crate::{Cli, Command, DiscArgs, Generator, MeshArgs, MethodChoice, Problem, ProblemArgs, StudyArgs};

pub const DEFAULT_THETA: f64 = std::f64::consts::FRAC_PI_6;
pub const DEFAULT_R1: f64 = 0.9;
pub const DEFAULT_R2: f64 = 0.3;
pub const DEFAULT_DELTA: f64 = 0.3;
pub const DEFAULT_DISTORTION: f64 = 0.25;
pub const DEFAULT_LLOYD: usize = 3;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_LEVELS: &str = "8,16,32,64";
/// Exit status when a rule-compliant audit fails.
pub const AUDIT_FAILURE: u8 = 2;

pub fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::GenerateMesh { mesh, out } => {
            let m = build_mesh(&cfg, &mesh, None)?;
            let out = cfg.pick(out, "out")?;
            write_output(out.as_deref(), |w| {
                w.write_all(m.to_text().as_bytes())?;
                Ok(())
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckPolygon { polygon, ell_offset, out } => {
            let polygon = cfg.pick(polygon, "polygon")?;
            let offset = cfg.pick_or(ell_offset, "ell-offset", 0)?;
            let out = cfg.pick(out, "out")?;
            check_polygon(polygon.as_deref(), offset, out.as_deref())
        }
        Command::Solve {
            mesh,
            mesh_gen,
            problem,
            disc,
            out,
        } => {
            let mesh_path = cfg.pick(mesh, "mesh")?;
            let out = cfg.pick(out, "out")?;
            cmd_solve(&cfg, mesh_path.as_deref(), &mesh_gen, &problem, &disc, out.as_deref())
        }
        Command::Convergence(args) => convergence(&cfg, &args, false),
        Command::Compare(args) => convergence(&cfg, &args, true),
    }
}

fn write_output(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            let mut w = BufWriter::new(f);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Generates a mesh; `level` overrides `--n` in convergence studies.
fn build_mesh(cfg: &ConfigFile, args: &MeshArgs, level: Option<usize>) -> Result<PolyMesh> {
    let generator = cfg.pick_or(args.generator, "generator", Generator::Grid)?;
    let n = match level {
        Some(l) => l,
        None => cfg.pick_or(args.n, "n", 8)?,
    };
    let seed = cfg.pick_or(args.seed, "seed", DEFAULT_SEED)?;
    let mesh = match generator {
        Generator::Grid => {
            let delta = cfg.pick_or(args.delta, "delta", DEFAULT_DELTA)?;
            mesh::generate_distorted_grid(n, delta, seed)?
        }
        Generator::Voronoi => {
            let seeds = match level {
                Some(l) => l * l,
                None => cfg.pick_or(args.seeds, "seeds", n * n)?,
            };
            let lloyd = cfg.pick_or(args.lloyd, "lloyd", DEFAULT_LLOYD)?;
            let distortion = cfg.pick_or(args.distortion, "distortion", DEFAULT_DISTORTION)?;
            mesh::generate_voronoi(seeds, lloyd, seed, distortion)?
        }
    };
    Ok(mesh)
}

fn build_problem(cfg: &ConfigFile, args: &ProblemArgs) -> Result<ProblemSpec> {
    let problem = cfg.pick_or(args.problem, "problem", Problem::Benchmark)?;
    let theta = cfg.pick_or(args.theta, "theta", DEFAULT_THETA)?;
    let r1 = cfg.pick_or(args.r1, "r1", DEFAULT_R1)?;
    let r2 = cfg.pick_or(args.r2, "r2", DEFAULT_R2)?;
    for (name, r) in [("r1", r1), ("r2", r2)] {
        if !(0.0..=1.0).contains(&r) {
            bail!("{name} must lie in [0, 1], got {r}");
        }
    }
    Ok(match problem {
        Problem::Benchmark => build_benchmark_coefficients(r1, r2, theta)?,
        Problem::Bubble => poisson_bubble()?,
        Problem::Poisson => ProblemSpec::poisson(Poly2::constant(1.0))?,
    })
}

fn assembly_options(cfg: &ConfigFile, args: &DiscArgs) -> Result<AssemblyOptions> {
    Ok(AssemblyOptions {
        ell_offset: cfg.pick_or(args.ell_offset, "ell-offset", 0)?,
        quad_degree: cfg.pick(args.quad_degree, "quad-degree")?,
        ..AssemblyOptions::default()
    })
}

fn methods(choice: MethodChoice) -> Vec<Method> {
    match choice {
        MethodChoice::Sfvem => vec![Method::Sfvem],
        MethodChoice::Vem => vec![Method::Vem],
        MethodChoice::Both => vec![Method::Sfvem, Method::Vem],
    }
}

fn check_polygon(polygon: Option<&Path>, offset: i32, out: Option<&Path>) -> Result<ExitCode> {
    let polygons = match polygon {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("polygon");
            vec![CatalogPolygon::from_text(name, &text)?]
        }
        None => catalog_polygons(),
    };
    let mut audits = Vec::with_capacity(polygons.len());
    for poly in &polygons {
        let ell = ell_rule(poly.n_e(), offset);
        audits.push(spectral_audit(poly, ell).with_context(|| format!("auditing {}", poly.name))?);
    }
    write_output(out, |w| {
        writeln!(w, "{AUDIT_CSV_HEADER}")?;
        for a in &audits {
            write_audit_row(&mut *w, a)?;
        }
        Ok(())
    })?;
    let mut failed = false;
    for a in &audits {
        if a.is_stable() {
            continue;
        }
        if a.rule_compliant() {
            eprintln!(
                "FAIL {} (N_E={}, ell={}): sigma_r/sigma_max = {:.3e}, sigma_min/sigma_max = {:.3e}",
                a.name,
                a.n_e,
                a.ell,
                a.sigma_r_over_max(),
                a.sigma_min_over_max()
            );
            failed = true;
        } else {
            eprintln!(
                "warning: {} (N_E={}) with ell={} violates the degree rule; sigma_r/sigma_max = {:.3e}",
                a.name,
                a.n_e,
                a.ell,
                a.sigma_r_over_max()
            );
        }
    }
    for a in audits.iter().filter(|a| !a.rule_compliant() && a.is_stable()) {
        eprintln!(
            "note: {} (N_E={}) with ell={} is below the degree rule but still stable here",
            a.name, a.n_e, a.ell
        );
    }
    Ok(if failed {
        ExitCode::from(AUDIT_FAILURE)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_solve(
    cfg: &ConfigFile,
    mesh_path: Option<&Path>,
    mesh_gen: &MeshArgs,
    problem: &ProblemArgs,
    disc: &DiscArgs,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let mesh = match mesh_path {
        Some(p) => mesh::read_mesh(p).with_context(|| format!("cannot load mesh {}", p.display()))?,
        None => build_mesh(cfg, mesh_gen, None)?,
    };
    let spec = build_problem(cfg, problem)?;
    let opts = assembly_options(cfg, disc)?;
    let method = match cfg.pick_or(disc.method, "method", MethodChoice::Sfvem)? {
        MethodChoice::Sfvem => Method::Sfvem,
        MethodChoice::Vem => Method::Vem,
        MethodChoice::Both => bail!("solve runs one method; use `compare` for both"),
    };
    let dirichlet = match &spec.exact {
        Some(ex) => Dirichlet::Values(mesh.vertices().iter().map(|&p| ex.u.eval(p)).collect()),
        None => Dirichlet::Homogeneous,
    };
    let system = assemble_with(&mesh, &spec, method, &opts, &dirichlet)?;
    let sol = solve(&system)?;
    write_output(out, |w| {
        write_solution_csv(&mesh, &sol, w)?;
        Ok(())
    })?;
    eprintln!(
        "{}: {} cells, {} unknowns, relative residual {:.3e}",
        method.name(),
        mesh.num_cells(),
        system.num_free(),
        sol.residual
    );
    if spec.exact.is_some() {
        let n = analysis::error_norms(&mesh, &sol, &spec, opts.quad_degree)?;
        eprintln!("e0 = {:.6e}, e1 = {:.6e}", n.e0, n.e1);
    }
    Ok(ExitCode::SUCCESS)
}

fn convergence(cfg: &ConfigFile, args: &StudyArgs, force_both: bool) -> Result<ExitCode> {
    let levels = parse_levels(&cfg.pick_or(args.levels.clone(), "levels", DEFAULT_LEVELS.to_string())?)?;
    let spec = build_problem(cfg, &args.problem)?;
    if spec.exact.is_none() {
        bail!("convergence studies need a problem with an exact solution");
    }
    let opts = assembly_options(cfg, &args.disc)?;
    let choice = if force_both {
        MethodChoice::Both
    } else {
        cfg.pick_or(args.disc.method, "method", MethodChoice::Both)?
    };
    let methods = methods(choice);
    let out_dir: PathBuf = cfg.pick_or(args.out.clone(), "out", PathBuf::from("."))?;
    std::fs::create_dir_all(&out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let csv_path = out_dir.join("convergence.csv");
    let mut csv = BufWriter::new(File::create(&csv_path).with_context(|| format!("cannot create {}", csv_path.display()))?);
    writeln!(csv, "{CONVERGENCE_CSV_HEADER}")?;
    csv.flush()?;

    let mut records: Vec<ConvergenceRecord> = Vec::new();
    for &level in &levels {
        let mesh = build_mesh(cfg, &args.mesh, Some(level))?;
        let rec = run_level(level, &mesh, &spec, &methods, &opts).with_context(|| format!("level {level}"))?;
        if let Some(prev) = records.last() {
            if rec.h >= prev.h {
                log::warn!("mesh size did not decrease from level {} to {level}", prev.level);
            }
        }
        write_convergence_row(&mut csv, &rec)?;
        csv.flush()?;
        let mut line = format!("level {level}: h = {:.4e}, ndof = {}", rec.h, rec.ndof);
        for m in &methods {
            if let Some(e) = rec.errors(*m) {
                line.push_str(&format!(", {} e0 = {:.4e} e1 = {:.4e}", m.name(), e.e0, e.e1));
            }
        }
        println!("{line}");
        records.push(rec);
    }

    let rates = if records.len() >= 2 {
        let r = fit_rates(&records)?;
        for (m, rate) in &r {
            println!("{}: alpha0 = {:.4}, alpha1 = {:.4}", m.name(), rate.alpha0, rate.alpha1);
        }
        r
    } else {
        println!("single level: rate fitting skipped");
        Vec::new()
    };

    let mut series = Vec::new();
    for m in &methods {
        let rate = rates.iter().find(|(mm, _)| mm == m).map(|(_, r)| *r);
        let pts = |f: fn(&sfvem::analysis::MethodErrors) -> f64| -> Vec<(f64, f64)> {
            records.iter().filter_map(|r| r.errors(*m).map(|e| (r.h, f(&e)))).collect()
        };
        let suffix = |a: Option<f64>| a.map(|v| format!(" (rate {v:.2})")).unwrap_or_default();
        series.push(Series {
            label: format!("{} e0{}", m.name(), suffix(rate.map(|r| r.alpha0))),
            points: pts(|e| e.e0),
            dashed: false,
        });
        series.push(Series {
            label: format!("{} e1{}", m.name(), suffix(rate.map(|r| r.alpha1))),
            points: pts(|e| e.e1),
            dashed: true,
        });
    }
    let svg = loglog_svg("Relative errors", "h", "error", &series);
    std::fs::write(out_dir.join("convergence.svg"), svg)?;
    Ok(ExitCode::SUCCESS)
}
