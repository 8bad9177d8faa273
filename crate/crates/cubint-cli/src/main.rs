//! Command-line front end for the third-order-integral analysis
//! pipeline: exact kernel reports, determining-equation checks, ODE
//! reductions, chart-consistency sweeps, trajectory simulations,
//! special-function integration and gauge-field recovery.
//!
//! Exit codes: 0 ok, 1 mathematical failure, 2 usage or schema error.

mod dto;

use clap::{Args, Parser, Subcommand};
use cubint_core::charts::{Coeffs10, COEFF_NAMES};
use cubint_core::determine::{
    self, compat_consistency_suite, reduce_to_ode, vanishing_kernel, Target,
};
use cubint_core::dynamics::{
    build_integral, solve_g_numeric, trajectory_drift, IntegralCandidate, PhaseState,
    Window,
};
use cubint_core::expr::Expr;
use cubint_core::rat::{format_rat, rat_i};
use cubint_core::rng::SplitMix64;
use cubint_core::specfun::{
    integrate_painleve, weierstrass_p, PainleveKind, PainleveSpec, WeierstrassSpec,
};
use dto::*;
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cubint",
    about = "Third-order integrals of motion for separable 2D Hamiltonians",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact vanishing analysis of the leading-term functions.
    Kernel(KernelArgs),
    /// Determining-equation residuals of a candidate file.
    Check(CheckArgs),
    /// Reduce the compatibility condition to a one-variable linear ODE.
    Reduce(ReduceArgs),
    /// Cross-validate the chart compatibility forms numerically.
    Compat(CompatArgs),
    /// Integrate Hamilton's equations and report conserved drift (CSV).
    Simulate(SimulateArgs),
    /// Integrate a Painlevé transcendent or the Weierstrass function (CSV).
    Specfun(SpecFunArgs),
    /// Recover the gauge fields on a grid by line quadrature.
    Solveg(SolveGArgs),
}

#[derive(Args)]
struct KernelArgs {
    /// cartesian | polar | parabolic | elliptic
    #[arg(long)]
    chart: String,
    /// comma-separated subset of F1,F2,F3,F4
    #[arg(long)]
    select: String,
}

#[derive(Args)]
struct CheckArgs {
    /// candidate JSON file (see schemas/candidate.schema.json)
    #[arg(long)]
    candidate: std::path::PathBuf,
    /// override the candidate's hbar, as p/q
    #[arg(long)]
    hbar: Option<String>,
    /// also evaluate the residuals at a Cartesian point "x1,x2"
    #[arg(long, allow_hyphen_values = true)]
    at: Option<String>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    chart: String,
    /// repeated name=p/q pairs, e.g. --coeff A120=1
    #[arg(long = "coeff", alias = "A", value_name = "NAME=VALUE")]
    coeffs: Vec<String>,
    /// V1 | V2
    #[arg(long)]
    target: String,
    /// frozen value of the other variable, e.g. --fix 1 or --fix 3/2
    #[arg(long, allow_hyphen_values = true)]
    fix: String,
}

#[derive(Args)]
struct CompatArgs {
    #[arg(long)]
    chart: String,
    #[arg(long, default_value_t = 20)]
    vectors: usize,
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    /// job JSON file (see schemas/simulate-job.schema.json)
    #[arg(long)]
    job: std::path::PathBuf,
}

#[derive(Args)]
struct SpecFunArgs {
    /// job JSON file carrying the same fields as the flags below
    #[arg(long)]
    job: Option<std::path::PathBuf>,
    /// P1 | P2 | P4 | weierstrass
    #[arg(long, default_value = "")]
    kind: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    g2: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    g3: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    z0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    w0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    dw0: f64,
    /// span as "a:b" containing z0
    #[arg(long, allow_hyphen_values = true, default_value = "")]
    span: String,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 201)]
    samples: usize,
}

#[derive(Args)]
struct SolveGArgs {
    /// job JSON file (see schemas/solveg-job.schema.json)
    #[arg(long)]
    job: std::path::PathBuf,
    /// also print the full grid as CSV after the JSON summary
    #[arg(long, default_value_t = false)]
    grid_csv: bool,
}

enum CmdError {
    Usage(String),
    Math(String),
}

impl From<DtoError> for CmdError {
    fn from(e: DtoError) -> Self {
        CmdError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Kernel(a) => cmd_kernel(a),
        Command::Check(a) => cmd_check(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Compat(a) => cmd_compat(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Specfun(a) => cmd_specfun(a),
        Command::Solveg(a) => cmd_solveg(a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        Err(CmdError::Math(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn parse_selection(s: &str) -> Result<Vec<usize>, CmdError> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let idx = match part {
            "F1" | "f1" => 0,
            "F2" | "f2" => 1,
            "F3" | "f3" => 2,
            "F4" | "f4" => 3,
            _ => {
                return Err(CmdError::Usage(format!(
                    "bad selection `{part}` (expected F1..F4)"
                )))
            }
        };
        if !out.contains(&idx) {
            out.push(idx);
        }
    }
    if out.is_empty() {
        return Err(CmdError::Usage("empty selection".into()));
    }
    out.sort_unstable();
    Ok(out)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CmdError> {
    let s = serde_json::to_string_pretty(value)
        .map_err(|e| CmdError::Math(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn cmd_kernel(a: KernelArgs) -> Result<(), CmdError> {
    let chart = chart_from_str(&a.chart)?;
    let selected = parse_selection(&a.select)?;
    let rep = vanishing_kernel(chart, &selected);
    let dto = KernelReportDto {
        chart: chart.name().to_string(),
        selected: rep.selected.iter().map(|j| format!("F{}", j + 1)).collect(),
        dimension: rep.dimension,
        sampled_dimension: rep.sampled_dimension,
        methods_agree: rep.methods_agree,
        basis: rep.basis.iter().map(coeffs_to_map).collect(),
    };
    print_json(&dto)
}

fn read_json<T: serde::de::DeserializeOwned>(
    path: &std::path::Path,
) -> Result<T, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CmdError::Usage(format!("schema error in {}: {e}", path.display())))
}

fn cmd_check(a: CheckArgs) -> Result<(), CmdError> {
    let cand: CandidateDto = read_json(&a.candidate)?;
    let coeffs = coeffs_from_map(&cand.coeffs)?;
    let g1 = parse_expr_field("g1", &cand.g1)?;
    let g2 = parse_expr_field("g2", &cand.g2)?;
    let hbar = match a.hbar.as_deref().or(cand.hbar.as_deref()) {
        Some(s) => parse_rat_str(s)?,
        None => rat_i(0),
    };
    let pot = cand.potential.build()?;
    let vcart = pot
        .to_cartesian_expr()
        .map_err(|e| CmdError::Math(e.to_string()))?;
    let rg = determine::g_residuals(&vcart, &coeffs, &g1, &g2)
        .map_err(|e| CmdError::Math(e.to_string()))?;
    let r0 = determine::zeroth_residual(&vcart, &coeffs, &g1, &g2, &hbar)
        .map_err(|e| CmdError::Math(e.to_string()))?;
    let lc = determine::linear_compat(&vcart, &coeffs)
        .map_err(|e| CmdError::Math(e.to_string()))?;
    let labels = ["eq3", "eq4", "eq5", "eq6"];
    let mut first_nonzero = None;
    for (i, e) in rg.iter().chain([&r0]).enumerate() {
        if !e.is_zero() && first_nonzero.is_none() {
            first_nonzero = Some(labels[i].to_string());
        }
    }
    let at_point = match &a.at {
        None => None,
        Some(s) => {
            let (xs, ys) = s.split_once(',').ok_or_else(|| {
                CmdError::Usage("bad --at (expected x1,x2)".into())
            })?;
            let x: f64 = xs.trim().parse().map_err(|_| {
                CmdError::Usage("bad --at x1 value".into())
            })?;
            let y: f64 = ys.trim().parse().map_err(|_| {
                CmdError::Usage("bad --at x2 value".into())
            })?;
            let mut b = cubint_core::expr::Binding::new();
            b.set_f64("x1", x).set_f64("x2", y);
            let mut values = Vec::new();
            for e in rg.iter().chain([&r0, &lc]) {
                values.push(fmt_f64(
                    e.eval_f64(&b).map_err(|e| CmdError::Math(e.to_string()))?,
                ));
            }
            Some(ResidualPointDto {
                point: [x, y],
                values,
            })
        }
    };
    let report = CheckReport {
        eq_second_order: [rg[0].to_string(), rg[1].to_string(), rg[2].to_string()],
        eq_zeroth_order: r0.to_string(),
        linear_compatibility: lc.to_string(),
        all_zero: first_nonzero.is_none(),
        first_nonzero,
        at: at_point,
    };
    print_json(&report)
}

fn parse_coeff_flags(flags: &[String]) -> Result<Coeffs10, CmdError> {
    let mut c = Coeffs10::zero();
    for flag in flags {
        let (name, val) = flag.split_once('=').ok_or_else(|| {
            CmdError::Usage(format!("bad --coeff `{flag}` (expected NAME=VALUE)"))
        })?;
        let idx = COEFF_NAMES
            .iter()
            .position(|n| *n == name.trim())
            .ok_or_else(|| CmdError::Usage(format!("unknown coefficient `{name}`")))?;
        c.0[idx] = parse_rat_str(val.trim())?;
    }
    Ok(c)
}

fn cmd_reduce(a: ReduceArgs) -> Result<(), CmdError> {
    let chart = chart_from_str(&a.chart)?;
    let coeffs = parse_coeff_flags(&a.coeffs)?;
    let target = match a.target.as_str() {
        "V1" | "v1" => Target::Component1,
        "V2" | "v2" => Target::Component2,
        other => {
            return Err(CmdError::Usage(format!(
                "bad target `{other}` (expected V1 or V2)"
            )))
        }
    };
    let fix_value = a.fix.split_once('=').map(|(_, v)| v).unwrap_or(&a.fix);
    let fixed = parse_rat_str(fix_value)?;
    let spec = reduce_to_ode(chart, &coeffs, target, fixed)
        .map_err(|e| CmdError::Math(e.to_string()))?;
    let dto = OdeSpecDto {
        var: spec.var.clone(),
        coeffs: [
            spec.coeffs[0].to_string(),
            spec.coeffs[1].to_string(),
            spec.coeffs[2].to_string(),
            spec.coeffs[3].to_string(),
        ],
        inhomogeneity: spec
            .inhomogeneity
            .iter()
            .map(|(k, m)| InhomogTermDto {
                constant: k.clone(),
                multiplier: m.to_string(),
            })
            .collect(),
        fixed_var: spec.fixed_var.clone(),
        fixed_value: format_rat(&spec.fixed_value),
        degenerate: spec.degenerate,
    };
    print_json(&dto)
}

fn cmd_compat(a: CompatArgs) -> Result<(), CmdError> {
    let chart = chart_from_str(&a.chart)?;
    if a.vectors == 0 || a.points == 0 || a.trials == 0 {
        return Err(CmdError::Usage(
            "vectors, points, trials must be positive".into(),
        ));
    }
    let mut rng = SplitMix64::new(a.seed);
    let vectors: Vec<Coeffs10> = (0..a.vectors)
        .map(|_| Coeffs10(core::array::from_fn(|_| rng.small_rat(6, 3))))
        .collect();
    let reports =
        compat_consistency_suite(chart, &vectors, a.points, a.trials, a.seed ^ 0x9E37)
            .map_err(|e| CmdError::Math(e.to_string()))?;
    let mut worst = 0.0f64;
    let mut per_vector = Vec::with_capacity(reports.len());
    for (v, rep) in vectors.iter().zip(&reports) {
        worst = worst.max(rep.max_residual);
        per_vector.push(CompatVectorDto {
            coeffs: coeffs_to_map(v),
            max_residual: fmt_f64(rep.max_residual),
            degenerate_points: rep.degenerate_points,
        });
    }
    let dto = CompatReportDto {
        chart: chart.name().to_string(),
        vectors: a.vectors,
        points: a.points,
        trials: a.trials,
        seed: a.seed,
        worst_residual: fmt_f64(worst),
        per_vector,
    };
    print_json(&dto)
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), CmdError> {
    let job: SimulateJobDto = read_json(&a.job)?;
    let pot = job.potential.build()?;
    let chart = pot.chart;
    let v1 = pot
        .comp1
        .as_symbolic()
        .ok_or_else(|| CmdError::Usage("simulate needs symbolic components".into()))?;
    let v2 = pot
        .comp2
        .as_symbolic()
        .ok_or_else(|| CmdError::Usage("simulate needs symbolic components".into()))?;
    let (kin, vexpr) = cubint_core::charts::hamiltonian(chart, v1, v2)
        .map_err(|e| CmdError::Math(e.to_string()))?;
    let h = (kin + vexpr).normalize();
    let mut integrals: Vec<(String, Expr)> = vec![("H".to_string(), h.clone())];
    for item in &job.integrals {
        integrals.push((item.name.clone(), parse_expr_field(&item.name, &item.expr)?));
    }
    if let Some(c) = &job.candidate {
        let cand = IntegralCandidate {
            coeffs: coeffs_from_map(&c.coeffs)?,
            g1: parse_expr_field("g1", &c.g1)?,
            g2: parse_expr_field("g2", &c.g2)?,
            hbar: rat_i(0),
        };
        let x = build_integral(&cand).map_err(|e| CmdError::Math(e.to_string()))?;
        integrals.push(("X".to_string(), x));
    }
    let s0 = PhaseState::new(job.state0[0], job.state0[1], job.state0[2], job.state0[3]);
    let rep = trajectory_drift(&h, &integrals, s0, job.t_end, job.tolerance)
        .map_err(|e| CmdError::Math(e.to_string()))?;
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    let names: Vec<&str> = rep.names.iter().map(|s| s.as_str()).collect();
    writeln!(w, "t,{}", names.join(",")).ok();
    for (t, vals) in &rep.series {
        let row: Vec<String> = vals.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(w, "{},{}", fmt_f64(*t), row.join(",")).ok();
    }
    let drifts: Vec<String> = rep
        .names
        .iter()
        .zip(&rep.drifts)
        .map(|(n, d)| format!("{n}={}", fmt_f64(*d)))
        .collect();
    eprintln!("max drift: {}", drifts.join(" "));
    if rep.truncated {
        return Err(CmdError::Math("trajectory hit a singularity".into()));
    }
    Ok(())
}

fn cmd_specfun(a: SpecFunArgs) -> Result<(), CmdError> {
    let a = match &a.job {
        None => a,
        Some(path) => {
            let j: SpecFunJobDto = read_json(path)?;
            SpecFunArgs {
                job: None,
                kind: j.kind,
                alpha: j.alpha,
                beta: j.beta,
                g2: j.g2,
                g3: j.g3,
                z0: j.z0,
                w0: j.w0,
                dw0: j.dw0,
                span: format!("{}:{}", j.z_min, j.z_max),
                tol: j.tolerance,
                samples: j.samples,
            }
        }
    };
    let (z_min, z_max) = a
        .span
        .split_once(':')
        .and_then(|(lo, hi)| Some((lo.parse::<f64>().ok()?, hi.parse::<f64>().ok()?)))
        .ok_or_else(|| CmdError::Usage("bad --span (expected a:b)".into()))?;
    let sol = if a.kind == "weierstrass" {
        let out = weierstrass_p(&WeierstrassSpec {
            g2: a.g2,
            g3: a.g3,
            z0: a.z0,
            p0: a.w0,
            dp0: a.dw0,
            z_min,
            z_max,
            tolerance: a.tol,
            samples: a.samples,
        })
        .map_err(|e| CmdError::Math(e.to_string()))?;
        eprintln!("first-integral drift: {}", fmt_f64(out.max_drift));
        out.solution
    } else {
        let kind = PainleveKind::parse(&a.kind)
            .ok_or_else(|| CmdError::Usage(format!("unknown kind `{}`", a.kind)))?;
        integrate_painleve(&PainleveSpec {
            kind,
            alpha: a.alpha,
            beta: a.beta,
            z0: a.z0,
            w0: a.w0,
            dw0: a.dw0,
            z_min,
            z_max,
            tolerance: a.tol,
            samples: a.samples,
        })
        .map_err(|e| CmdError::Math(e.to_string()))?
    };
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "z,w,dw,err,pole_flag").ok();
    for i in 0..sol.len() {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(sol.zs[i]),
            fmt_f64(sol.w[i]),
            fmt_f64(sol.dw[i]),
            fmt_f64(sol.err[i]),
            u8::from(sol.pole_flag[i])
        )
        .ok();
    }
    Ok(())
}

fn cmd_solveg(a: SolveGArgs) -> Result<(), CmdError> {
    let job: SolveGJobDto = read_json(&a.job)?;
    let pot = job.potential.build()?;
    let coeffs = coeffs_from_map(&job.coeffs)?;
    if job.resolution < 5 {
        return Err(CmdError::Usage("resolution must be at least 5".into()));
    }
    let grid = solve_g_numeric(
        &pot,
        &coeffs,
        Window {
            x: job.window.x,
            y: job.window.y,
        },
        job.basepoint,
        job.resolution,
    )
    .map_err(|e| CmdError::Math(e.to_string()))?;
    let dto = SolveGReportDto {
        base: grid.base,
        resolution: job.resolution,
        residual_norms: [
            fmt_f64(grid.residuals[0]),
            fmt_f64(grid.residuals[1]),
            fmt_f64(grid.residuals[2]),
        ],
    };
    print_json(&dto)?;
    if a.grid_csv {
        let stdout = std::io::stdout();
        let mut w = stdout.lock();
        writeln!(w, "x,y,g1,g2").ok();
        for (i, &x) in grid.xs.iter().enumerate() {
            for (j, &y) in grid.ys.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{}",
                    fmt_f64(x),
                    fmt_f64(y),
                    fmt_f64(grid.g1[i][j]),
                    fmt_f64(grid.g2[i][j])
                )
                .ok();
            }
        }
    }
    Ok(())
}
