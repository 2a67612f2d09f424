//! `gpm`: command-line driver for the defocusing Gross-Pitaevskii
//! inverse-scattering solver.
//!
//! Runs are described by a JSON manifest (`--config`); a few flags override
//! manifest entries.  Summaries go to standard output as `key=value` lines;
//! field data is written as CSV plus a JSON sidecar.  Exit codes: 0 success,
//! 2 configuration problem, 3 fixed-point divergence, 4 a `--check`
//! tolerance failed.

use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use gp_marchenko::asymptotics::{
    empirical_shift_deviation, phase_a, shift_eta, shift_eta_speed_form, Asymptote,
};
use gp_marchenko::config::RunConfig;
use gp_marchenko::io::{read_field_csv, write_field_csv, PointDiagnostics, Sidecar};
use gp_marchenko::kernels::KernelTable;
use gp_marchenko::marchenko::reconstruct_u;
use gp_marchenko::nsoliton::{grid_eval, u_n, Axis, FieldGrid, Provenance};
use gp_marchenko::validate::{
    cn_evolve, compare_slices, gp_residual, lambda_of_xi_complex, lax_control_residual,
    lax_residual,
};
use gp_marchenko::{Error, Result};

#[derive(Parser)]
#[command(
    name = "gpm",
    version,
    about = "Exact and radiation-perturbed dark-soliton fields of the 1D defocusing Gross-Pitaevskii equation, with independent validation oracles"
)]
struct Cli {
    /// JSON run manifest.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path stem (overrides the manifest); files become
    /// `<stem>.csv` and `<stem>.json`.
    #[arg(long, global = true)]
    output: Option<String>,

    /// Fixed-point tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Fixed-point iteration cap override.
    #[arg(long, global = true)]
    max_iter: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the scattering and reflection blocks and print a summary.
    ValidateParams,
    /// Evaluate the collision solution u_N on the configured (t, x) grid.
    NsolitonEval,
    /// Solve the half-line system with reflection data and evaluate the
    /// perturbed field on the configured grid.
    PerturbedEval {
        /// Fail (exit 4) when a check below does not hold.
        #[arg(long)]
        check: bool,
        /// With --check: largest allowed contraction ratio.
        #[arg(long, default_value_t = 0.99)]
        max_ratio: f64,
        /// With --check: largest allowed back-substitution residual.
        #[arg(long, default_value_t = 1e-8)]
        max_residual: f64,
    },
    /// Centered-difference residual of the evolution equation on the grid.
    Residual {
        /// Read the field from this CSV instead of evaluating u_N.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        check: bool,
        /// With --check: largest allowed residual.
        #[arg(long, default_value_t = 1e-2)]
        max_residual: f64,
    },
    /// Eigenfunction residual of the linear system at a spectral point.
    LaxCheck {
        /// Spectral parameter (real).
        #[arg(long, default_value_t = 0.65, allow_negative_numbers = true)]
        xi: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        x: f64,
        /// Base differencing step; the residual is also computed at half
        /// this step to report an observed order.
        #[arg(long, default_value_t = 0.01)]
        fd_step: f64,
        #[arg(long)]
        check: bool,
        /// With --check: required ratio of control to eigenfunction residual.
        #[arg(long, default_value_t = 100.0)]
        min_control_factor: f64,
        /// With --check: allowed band around the expected order 2.
        #[arg(long, default_value_t = 0.5)]
        order_slack: f64,
    },
    /// Closed-form collision shift/phase of one soliton plus the empirical
    /// long-time deviation along its ray.
    Asymptotics {
        /// Soliton index, 1-based in order of increasing spectral parameter.
        #[arg(long)]
        soliton: usize,
        /// Which limit: past (t -> -inf) or future (t -> +inf).
        #[arg(long, default_value = "past")]
        side: String,
        #[arg(long, default_value_t = 25.0, allow_negative_numbers = true)]
        t_abs: f64,
        #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
        eta_min: f64,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        eta_max: f64,
        #[arg(long, default_value_t = 0.1)]
        eta_step: f64,
        #[arg(long)]
        check: bool,
        /// With --check: largest allowed empirical deviation.
        #[arg(long, default_value_t = 1e-6)]
        max_deviation: f64,
    },
    /// CSV table of all closed-form shifts and phases (both limits).
    ShiftTable,
    /// Evolve u_N with the Crank-Nicolson oracle across the configured time
    /// window and compare against the exact field at the end.
    EvolveCn {
        #[arg(long)]
        check: bool,
        /// With --check: largest allowed L_inf gap at the final time.
        #[arg(long, default_value_t = 5e-3)]
        max_linf: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(code) = configure_threads() {
        return code;
    }
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => {
            eprintln!("error: a --check tolerance failed");
            ExitCode::from(4)
        }
        Err(Error::Divergence {
            ratio,
            consecutive,
            iterations,
        }) => {
            eprintln!(
                "error: fixed point diverged (ratio {ratio:.3}, {consecutive} consecutive, {iterations} iterations)"
            );
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Apply the optional GPM_THREADS cap before any parallel work starts.
fn configure_threads() -> std::result::Result<(), ExitCode> {
    let Ok(raw) = std::env::var("GPM_THREADS") else {
        return Ok(());
    };
    let Ok(n) = raw.trim().parse::<usize>() else {
        eprintln!("error: GPM_THREADS must be a positive integer, got {raw:?}");
        return Err(ExitCode::from(2));
    };
    if n == 0 {
        eprintln!("error: GPM_THREADS must be positive");
        return Err(ExitCode::from(2));
    }
    #[cfg(feature = "parallel")]
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return Err(ExitCode::from(2));
        }
    }
    Ok(())
}

fn f(v: f64) -> String {
    // Avoid printing negative zero (it survives sums of signed terms).
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.17e}")
}

struct Ctx {
    cfg: RunConfig,
    output: Option<String>,
}

impl Ctx {
    fn output_stem(&self) -> Result<&str> {
        self.output
            .as_deref()
            .ok_or_else(|| Error::Config("this command needs an output stem (--output)".into()))
    }

    fn write_field(&self, command: &str, field: &FieldGrid, sidecar: Sidecar) -> Result<()> {
        let stem = self.output_stem()?;
        let csv_path = format!("{stem}.csv");
        let json_path = format!("{stem}.json");
        let mut csv = BufWriter::new(std::fs::File::create(&csv_path)?);
        write_field_csv(&mut csv, field)?;
        csv.flush()?;
        let mut json = BufWriter::new(std::fs::File::create(&json_path)?);
        sidecar.write(&mut json)?;
        json.flush()?;
        println!("command={command}");
        println!("csv={csv_path}");
        println!("sidecar={json_path}");
        Ok(())
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(tol) = cli.tol {
        cfg.solver.get_or_insert_with(Default::default).tol = Some(tol);
    }
    if let Some(mi) = cli.max_iter {
        cfg.solver.get_or_insert_with(Default::default).max_iter = Some(mi);
    }
    let output = cli.output.clone().or_else(|| cfg.output.clone());
    let ctx = Ctx { cfg, output };

    match cli.command {
        Command::ValidateParams => validate_params(&ctx),
        Command::NsolitonEval => nsoliton_eval(&ctx),
        Command::PerturbedEval {
            check,
            max_ratio,
            max_residual,
        } => perturbed_eval(&ctx, check, max_ratio, max_residual),
        Command::Residual {
            input,
            check,
            max_residual,
        } => residual(&ctx, input, check, max_residual),
        Command::LaxCheck {
            xi,
            t,
            x,
            fd_step,
            check,
            min_control_factor,
            order_slack,
        } => lax_check(&ctx, xi, t, x, fd_step, check, min_control_factor, order_slack),
        Command::Asymptotics {
            soliton,
            side,
            t_abs,
            eta_min,
            eta_max,
            eta_step,
            check,
            max_deviation,
        } => asymptotics(
            &ctx,
            soliton,
            &side,
            t_abs,
            (eta_min, eta_max, eta_step),
            check,
            max_deviation,
        ),
        Command::ShiftTable => shift_table(&ctx),
        Command::EvolveCn { check, max_linf } => evolve_cn(&ctx, check, max_linf),
    }
}

fn validate_params(ctx: &Ctx) -> Result<bool> {
    let data = ctx.cfg.scattering_data()?;
    let refl = ctx.cfg.reflection()?;
    let tol = ctx.cfg.solver_tol()?;
    println!("command=validate-params");
    println!("n={}", data.n());
    for (k, (&l, &m)) in data.lambdas().iter().zip(data.mus0()).enumerate() {
        println!("lambda_{}={}", k + 1, f(l));
        println!("mu0_{}={}", k + 1, f(m));
        println!("nu_{}={}", k + 1, f(data.nus()[k]));
        println!("speed_{}={}", k + 1, f(data.speeds()[k]));
    }
    println!("guard_delta={}", f(data.guard_delta()));
    println!(
        "reflection={}",
        if refl.is_zero() { "zero" } else { "nonzero" }
    );
    println!("solver_tol={}", f(tol));
    println!("status=ok");
    Ok(true)
}

fn nsoliton_eval(ctx: &Ctx) -> Result<bool> {
    let data = ctx.cfg.scattering_data()?;
    let t = ctx.cfg.t_axis()?;
    let x = ctx.cfg.x_axis()?;
    let eval = grid_eval(&data, t, x)?;
    let mut sidecar = Sidecar::for_field("nsoliton-eval", &eval.field);
    sidecar
        .summary
        .insert("max_solve_residual".into(), eval.max_residual);
    ctx.write_field("nsoliton-eval", &eval.field, sidecar)?;
    println!("points={}", t.len * x.len);
    println!("max_solve_residual={}", f(eval.max_residual));
    Ok(true)
}

fn perturbed_eval(ctx: &Ctx, check: bool, max_ratio: f64, max_residual: f64) -> Result<bool> {
    let data = ctx.cfg.scattering_data()?;
    let refl = ctx.cfg.reflection()?;
    let t_axis = ctx.cfg.t_axis()?;
    let x_axis = ctx.cfg.x_axis()?;
    let tol = ctx.cfg.solver_tol()?;
    let max_iter = ctx.cfg.solver_max_iter();
    let t_ref = t_axis.min.abs().max(t_axis.max().abs());
    let grid = ctx.cfg.half_line_grid(&data, &refl, t_ref, x_axis.min)?;
    let kernel_step = ctx.cfg.kernel_step();

    let mut values = Vec::with_capacity(t_axis.len * x_axis.len);
    let mut per_point = Vec::with_capacity(t_axis.len * x_axis.len);
    let mut worst_ratio = 0.0_f64;
    let mut worst_residual = 0.0_f64;
    let mut worst_budget = 0.0_f64;
    let mut max_iterations = 0_usize;
    let mut kernel_error = 0.0_f64;
    for it in 0..t_axis.len {
        let t = t_axis.value(it);
        let table = KernelTable::build(
            &data,
            &refl,
            t,
            2.0 * x_axis.min - 1.0,
            2.0 * x_axis.max() + 2.0 * grid.p_max() + 1.0,
            kernel_step,
        )?;
        kernel_error = kernel_error.max(table.quad_error());
        for ix in 0..x_axis.len {
            let x = x_axis.value(ix);
            let (u, diag) = reconstruct_u(&table, x, grid, tol, max_iter)?;
            values.push(u);
            worst_ratio = worst_ratio.max(diag.contraction_ratio);
            worst_residual = worst_residual.max(diag.residual);
            worst_budget = worst_budget.max(diag.budget.total());
            max_iterations = max_iterations.max(diag.iterations);
            per_point.push(PointDiagnostics {
                t,
                x,
                iterations: diag.iterations,
                contraction_ratio: diag.contraction_ratio,
                residual: diag.residual,
                budget_total: diag.budget.total(),
            });
        }
    }
    let field = FieldGrid::from_values(t_axis, x_axis, values, Provenance::Perturbed)?;
    let mut sidecar = Sidecar::for_field("perturbed-eval", &field);
    sidecar.summary.insert("worst_ratio".into(), worst_ratio);
    sidecar
        .summary
        .insert("worst_residual".into(), worst_residual);
    sidecar.summary.insert("worst_budget".into(), worst_budget);
    sidecar
        .summary
        .insert("kernel_error".into(), kernel_error);
    sidecar
        .summary
        .insert("max_iterations".into(), max_iterations as f64);
    sidecar.per_point = per_point;
    ctx.write_field("perturbed-eval", &field, sidecar)?;
    println!("points={}", t_axis.len * x_axis.len);
    println!("half_line_p_max={}", f(grid.p_max()));
    println!("half_line_points={}", grid.len());
    println!("worst_ratio={}", f(worst_ratio));
    println!("worst_residual={}", f(worst_residual));
    println!("worst_budget={}", f(worst_budget));
    println!("max_iterations={max_iterations}");
    if check {
        let ok = worst_ratio <= max_ratio && worst_residual <= max_residual;
        println!("check={}", if ok { "pass" } else { "fail" });
        return Ok(ok);
    }
    Ok(true)
}

fn residual(ctx: &Ctx, input: Option<PathBuf>, check: bool, max_residual: f64) -> Result<bool> {
    let field = match input {
        Some(path) => {
            let file = std::fs::File::open(&path)?;
            read_field_csv(&mut std::io::BufReader::new(file), Provenance::NSoliton)?
        }
        None => {
            let data = ctx.cfg.scattering_data()?;
            grid_eval(&data, ctx.cfg.t_axis()?, ctx.cfg.x_axis()?)?.field
        }
    };
    let r = gp_residual(&field)?;
    println!("command=residual");
    println!("t_points={}", field.t.len);
    println!("x_points={}", field.x.len);
    println!("residual={}", f(r));
    if check {
        let ok = r <= max_residual;
        println!("check={}", if ok { "pass" } else { "fail" });
        return Ok(ok);
    }
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn lax_check(
    ctx: &Ctx,
    xi: f64,
    t: f64,
    x: f64,
    fd_step: f64,
    check: bool,
    min_control_factor: f64,
    order_slack: f64,
) -> Result<bool> {
    let data = ctx.cfg.scattering_data()?;
    let xi_c = Complex64::new(xi, 0.0);
    let r1 = lax_residual(&data, t, x, xi_c, fd_step)?;
    let r2 = lax_residual(&data, t, x, xi_c, fd_step / 2.0)?;
    let control = lax_control_residual(&data, t, x, xi_c)?;
    let order = (r1 / r2).log2();
    let factor = control / r2;
    println!("command=lax-check");
    println!("xi={}", f(xi));
    println!("lambda={}", f(lambda_of_xi_complex(xi_c).re));
    println!("residual_h={}", f(r1));
    println!("residual_h_half={}", f(r2));
    println!("order={}", f(order));
    println!("control={}", f(control));
    println!("control_factor={}", f(factor));
    if check {
        let ok = factor >= min_control_factor && (order - 2.0).abs() <= order_slack;
        println!("check={}", if ok { "pass" } else { "fail" });
        return Ok(ok);
    }
    Ok(true)
}

fn asymptotics(
    ctx: &Ctx,
    soliton: usize,
    side: &str,
    t_abs: f64,
    (eta_min, eta_max, eta_step): (f64, f64, f64),
    check: bool,
    max_deviation: f64,
) -> Result<bool> {
    let data = ctx.cfg.scattering_data()?;
    if soliton == 0 || soliton > data.n() {
        return Err(Error::Config(format!(
            "--soliton must be in 1..={}, got {soliton}",
            data.n()
        )));
    }
    let k = soliton - 1;
    let side = match side {
        "past" => Asymptote::Past,
        "future" => Asymptote::Future,
        other => {
            return Err(Error::Config(format!(
                "--side must be past or future, got {other:?}"
            )))
        }
    };
    let eta = shift_eta(&data, k, side)?;
    let eta_c = shift_eta_speed_form(&data, k, side)?;
    let a = phase_a(&data, k, side)?;
    let etas = Axis::from_range(eta_min, eta_max, eta_step)
        .map_err(|e| Error::Config(format!("eta window: {e}")))?
        .values();
    let deviation = empirical_shift_deviation(&data, k, side, t_abs, &etas)?;
    println!("command=asymptotics");
    println!("soliton={soliton}");
    println!(
        "side={}",
        match side {
            Asymptote::Past => "past",
            Asymptote::Future => "future",
        }
    );
    println!("eta={}", f(eta));
    println!("eta_speed_form={}", f(eta_c));
    println!("form_gap={}", f((eta - eta_c).abs()));
    println!("re_A={}", f(a.re));
    println!("im_A={}", f(a.im));
    println!("theta_k={}", f(data.thetas()[k]));
    println!("t_abs={}", f(t_abs));
    println!("deviation={}", f(deviation));
    if check {
        let ok = deviation <= max_deviation;
        println!("check={}", if ok { "pass" } else { "fail" });
        return Ok(ok);
    }
    Ok(true)
}

fn shift_table(ctx: &Ctx) -> Result<bool> {
    let data = ctx.cfg.scattering_data()?;
    let mut rows = String::from("k,sign,eta,re_A,im_A,theta_k\n");
    for k in 0..data.n() {
        for (side, sign) in [(Asymptote::Past, "-"), (Asymptote::Future, "+")] {
            let eta = shift_eta(&data, k, side)?;
            let a = phase_a(&data, k, side)?;
            rows.push_str(&format!(
                "{},{},{},{},{},{}\n",
                k + 1,
                sign,
                f(eta),
                f(a.re),
                f(a.im),
                f(data.thetas()[k])
            ));
        }
    }
    print!("{rows}");
    if let Some(stem) = &ctx.output {
        let path = format!("{stem}.csv");
        std::fs::write(&path, rows)?;
        eprintln!("wrote {path}");
    }
    Ok(true)
}

fn evolve_cn(ctx: &Ctx, check: bool, max_linf: f64) -> Result<bool> {
    let data = ctx.cfg.scattering_data()?;
    let t_axis = ctx.cfg.t_axis()?;
    let x_axis = ctx.cfg.x_axis()?;
    let g = ctx
        .cfg
        .grid
        .as_ref()
        .expect("t_axis() already required the grid block");
    // t_axis() has checked that the span is an integer multiple of tau.
    let steps = t_axis.len - 1;
    let initial: Vec<Complex64> = x_axis
        .values()
        .iter()
        .map(|&x| u_n(&data, g.t_min, x))
        .collect::<Result<_>>()?;
    // Precompute the exact boundary values the implicit steps will request.
    let mut lo = Vec::with_capacity(steps + 1);
    let mut hi = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = g.t_min + k as f64 * g.tau;
        lo.push(u_n(&data, t, x_axis.min)?);
        hi.push(u_n(&data, t, x_axis.max())?);
    }
    let boundary = |t: f64, x: f64| -> Complex64 {
        let k = ((t - g.t_min) / g.tau).round() as usize;
        if x == x_axis.min {
            lo[k]
        } else {
            hi[k]
        }
    };
    let evolved = cn_evolve(&initial, x_axis, g.t_min, g.tau, steps, &boundary)?;
    let exact: Vec<Complex64> = x_axis
        .values()
        .iter()
        .map(|&x| u_n(&data, g.t_max, x))
        .collect::<Result<_>>()?;
    let (linf, rms) = compare_slices(&evolved, &exact)?;
    println!("command=evolve-cn");
    println!("steps={steps}");
    println!("tau={}", f(g.tau));
    println!("h={}", f(x_axis.step));
    println!("linf={}", f(linf));
    println!("rms={}", f(rms));
    if ctx.output.is_some() {
        let field = FieldGrid::from_values(
            Axis::singleton(g.t_max),
            x_axis,
            evolved,
            Provenance::CnEvolved,
        )?;
        let mut sidecar = Sidecar::for_field("evolve-cn", &field);
        sidecar.summary.insert("linf_vs_exact".into(), linf);
        sidecar.summary.insert("rms_vs_exact".into(), rms);
        ctx.write_field("evolve-cn", &field, sidecar)?;
    }
    if check {
        let ok = linf <= max_linf;
        println!("check={}", if ok { "pass" } else { "fail" });
        return Ok(ok);
    }
    Ok(true)
}
