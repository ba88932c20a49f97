use crate::config::{ModeRange, RunConfig};
use crate::error::CliError;
use crate::output::{write_json, write_table};
use lossy_cavity::green_function::{absorption_identity_residual, green, helmholtz_richardson};
use lossy_cavity::io_weights::{
    asymptotic_weights, weights_sweep, ModeBand, ModeModel, ModeWeights,
};
use lossy_cavity::optical_stack::{verify_layer_identities, LayerStack};
use lossy_cavity::par::Exec;
use lossy_cavity::phase_space::{
    extraction_report, fidelity, p_out_transform, write_grid_binary, write_grid_csv, xi_s,
    ExtractionReport, GridOptions, PhaseSpaceState, TransformInputs,
};
use lossy_cavity::quadrature::QuadOptions;
use lossy_cavity::resonances::{
    find_resonances, io_coefficients, loss_budget, validate_high_q, Resonance, SolverOptions,
    HIGH_Q_THRESHOLD,
};
use serde::Serialize;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

pub struct Context {
    pub cfg: RunConfig,
    pub base: PathBuf,
    pub out: PathBuf,
    pub modes: ModeRange,
    pub quiet: bool,
}

impl Context {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn stack(&self) -> Result<LayerStack, CliError> {
        self.cfg.stack.resolve()
    }

    fn prepare_out(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| CliError::Output(format!("cannot create {}: {e}", self.out.display())))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Resonances for `ks` plus the next one up, so every mode has a spacing.
fn solve_modes(stack: &LayerStack, ks: &[u32]) -> Vec<Result<Resonance, CliError>> {
    let mut all = ks.to_vec();
    all.push(ks[ks.len() - 1] + 1);
    find_resonances(stack, &all, &SolverOptions::default(), Exec::default())
        .into_iter()
        .map(|r| r.map_err(CliError::from))
        .collect()
}

/// `Δω_k` from neighbouring solved modes, falling back to the free spectral
/// range at `ω_k`.
fn spacing(
    stack: &LayerStack,
    solved: &[Result<Resonance, CliError>],
    i: usize,
) -> Result<f64, CliError> {
    let ok: Vec<&Resonance> = solved.iter().filter_map(|r| r.as_ref().ok()).collect();
    let here = solved[i]
        .as_ref()
        .map_err(|e| CliError::Solver(e.to_string()))?;
    if ok.len() >= 2 {
        let rs: Vec<Resonance> = ok.iter().map(|r| **r).collect();
        let rep = validate_high_q(&rs, HIGH_Q_THRESHOLD)?;
        if let Some(j) = rs.iter().position(|r| r.k == here.k) {
            return Ok(rep.spacing[j]);
        }
    }
    let n1 = stack.at(here.omega_k)?.n[1].re;
    Ok(std::f64::consts::PI / (n1 * stack.l))
}

#[derive(Serialize)]
struct ResonanceRow {
    k: u32,
    omega_k: Option<f64>,
    gamma_k: Option<f64>,
    gamma_rad: Option<f64>,
    gamma_cav: Option<f64>,
    gamma_plus: Option<f64>,
    gamma_minus: Option<f64>,
    identity_residual: Option<f64>,
    gamma_over_spacing: Option<f64>,
    error: Option<String>,
}

pub fn resonances(ctx: &Context) -> Result<(), CliError> {
    let stack = ctx.stack()?;
    let ks = ctx.modes.indices();
    let solved = solve_modes(&stack, &ks);
    let mut rows = Vec::new();
    let (mut solver_failures, mut wide) = (0, Vec::new());
    for (i, k) in ks.iter().enumerate() {
        let row = match &solved[i] {
            Ok(r) => {
                let b = loss_budget(&stack, r)?;
                let ratio = r.gamma_k / spacing(&stack, &solved, i)?;
                if ratio >= HIGH_Q_THRESHOLD {
                    wide.push(*k);
                }
                ResonanceRow {
                    k: *k,
                    omega_k: Some(r.omega_k),
                    gamma_k: Some(r.gamma_k),
                    gamma_rad: Some(b.gamma_rad),
                    gamma_cav: Some(b.gamma_cav),
                    gamma_plus: Some(b.gamma_plus),
                    gamma_minus: Some(b.gamma_minus),
                    identity_residual: Some(b.identity_residual),
                    gamma_over_spacing: Some(ratio),
                    error: None,
                }
            }
            Err(e) => {
                solver_failures += 1;
                ResonanceRow {
                    k: *k,
                    omega_k: None,
                    gamma_k: None,
                    gamma_rad: None,
                    gamma_cav: None,
                    gamma_plus: None,
                    gamma_minus: None,
                    identity_residual: None,
                    gamma_over_spacing: None,
                    error: Some(e.to_string()),
                }
            }
        };
        rows.push(row);
    }
    ctx.prepare_out()?;
    let comments = [
        "complex resonances Omega_k = omega_k - i gamma_k/2 of the cavity and their loss budget (c = l = 1)".into(),
        "omega_k, gamma_k: root of 1 + r13 exp(2 i n1 Omega l) = 0".into(),
        "gamma_rad = |T|^2/(2 n1 l); gamma_cav, gamma_plus, gamma_minus = |A_lambda|^2/(2 n1 l)".into(),
        "identity_residual = |Gamma_k - gamma_rad - gamma_abs|/Gamma_k".into(),
        "gamma_over_spacing = Gamma_k/Delta omega_k with Delta omega_k from neighbouring modes".into(),
    ];
    write_table(&ctx.path("resonances.csv"), &comments, &rows)?;
    write_json(&ctx.path("resonances.json"), &rows)?;
    for r in &rows {
        match (&r.error, r.omega_k, r.gamma_k) {
            (None, Some(w), Some(g)) => {
                ctx.say(format!("k = {:>3}  omega = {w:.12}  Gamma = {g:.6e}", r.k))
            }
            (Some(e), ..) => ctx.say(format!("k = {:>3}  failed: {e}", r.k)),
            _ => {}
        }
    }
    if solver_failures > 0 {
        return Err(CliError::Solver(format!(
            "{solver_failures} of {} modes failed",
            ks.len()
        )));
    }
    if !wide.is_empty() {
        return Err(CliError::Physics(format!(
            "modes {wide:?} exceed Gamma/Delta omega = {HIGH_Q_THRESHOLD}; the single-mode description does not apply"
        )));
    }
    Ok(())
}

struct ModeSetup {
    model: ModeModel,
    band: ModeBand,
}

fn mode_setups(ctx: &Context, stack: &LayerStack) -> Result<Vec<ModeSetup>, CliError> {
    let ks = ctx.modes.indices();
    let solved = solve_modes(stack, &ks);
    let mut out = Vec::new();
    for i in 0..ks.len() {
        let r = solved[i]
            .as_ref()
            .map_err(|e| CliError::Solver(e.to_string()))?;
        let sp = spacing(stack, &solved, i)?;
        let model = ModeModel::new(stack, r)?;
        let band = ModeBand::new(
            r.k,
            r.omega_k - 0.5 * sp,
            r.omega_k + 0.5 * sp,
            model.pole(),
            ctx.cfg.time.dt_factor / sp,
            0.0,
            0.0,
        )?;
        out.push(ModeSetup { model, band });
    }
    Ok(out)
}

fn weights_over_time(ctx: &Context, m: &ModeSetup) -> Result<Vec<ModeWeights>, CliError> {
    let times = ctx.cfg.time_points(m.model.gamma);
    let mut ws = Vec::new();
    for w in weights_sweep(
        &m.band,
        &m.model,
        &times,
        &QuadOptions::default(),
        Exec::default(),
    ) {
        ws.push(w?);
    }
    ws.push(asymptotic_weights(&m.model));
    Ok(ws)
}

#[derive(Serialize)]
struct WeightRow {
    k: u32,
    /// Elapsed time in units of `1/Γ`; `inf` for the long-time closed forms.
    t_gamma: f64,
    eta: f64,
    zeta_in: f64,
    zeta_cav: f64,
    zeta_plus: f64,
    zeta_minus: f64,
    sum: f64,
}

#[derive(Serialize)]
struct WeightReport {
    k: u32,
    omega_k: f64,
    gamma: f64,
    gamma_out: f64,
    rows: Vec<ModeWeights>,
    asymptotic: ModeWeights,
}

pub fn weights(ctx: &Context) -> Result<(), CliError> {
    let stack = ctx.stack()?;
    let setups = mode_setups(ctx, &stack)?;
    let (mut rows, mut reports) = (Vec::new(), Vec::new());
    for m in &setups {
        let ws = weights_over_time(ctx, m)?;
        for w in &ws {
            rows.push(WeightRow {
                k: m.model.k,
                t_gamma: w.at.map_or(f64::INFINITY, |t| t * m.model.gamma),
                eta: w.eta,
                zeta_in: w.zeta_in,
                zeta_cav: w.zeta_cav,
                zeta_plus: w.zeta_plus,
                zeta_minus: w.zeta_minus,
                sum: w.sum(),
            });
        }
        let (asymptotic, timed) = ws.split_last().expect("long-time row");
        reports.push(WeightReport {
            k: m.model.k,
            omega_k: m.model.omega_k,
            gamma: m.model.gamma,
            gamma_out: m.model.gamma_out,
            rows: timed.to_vec(),
            asymptotic: *asymptotic,
        });
    }
    ctx.prepare_out()?;
    let comments = [
        "extraction efficiency and channel weights of the outgoing mode (c = l = 1)".into(),
        "eta(t) = integral |F_k(omega)|^2 d omega; zeta_sigma(t) = integral |chi_sigma(omega)|^2 d omega".into(),
        "t_gamma = inf rows: long-time closed forms, eta = gamma_rad_out/Gamma".into(),
        "sum = eta + zeta_in + zeta_cav + zeta_plus + zeta_minus (1 up to quadrature error)".into(),
    ];
    write_table(&ctx.path("weights.csv"), &comments, &rows)?;
    write_json(&ctx.path("weights.json"), &reports)?;
    for r in &rows {
        ctx.say(format!(
            "k = {:>3}  t = {:>8} /Gamma  eta = {:.10}  zeta_in = {:.3e}  sum - 1 = {:.1e}",
            r.k,
            r.t_gamma,
            r.eta,
            r.zeta_in,
            r.sum - 1.0
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct ExtractRow {
    t_gamma: f64,
    weights: ModeWeights,
    xi: f64,
    fidelity: Option<f64>,
    origin_value: f64,
    mass: f64,
    grid_csv: String,
    grid_bin: String,
    report: ExtractionReport,
}

#[derive(Serialize)]
struct ExtractReport {
    k: u32,
    output_order: f64,
    n_bar: [f64; 3],
    rows: Vec<ExtractRow>,
}

#[derive(Serialize)]
struct FidelityRow {
    t_gamma: f64,
    eta: f64,
    zeta_in: f64,
    fidelity: Option<f64>,
    origin_value: f64,
}

fn save_grid(
    dir: &Path,
    stem: &str,
    g: &lossy_cavity::phase_space::Grid,
) -> Result<(String, String), CliError> {
    let (csv_name, bin_name) = (format!("{stem}.csv"), format!("{stem}.bin"));
    write_grid_csv(g, BufWriter::new(File::create(dir.join(&csv_name))?))?;
    write_grid_binary(g, BufWriter::new(File::create(dir.join(&bin_name))?))?;
    Ok((csv_name, bin_name))
}

pub fn extract(ctx: &Context) -> Result<(), CliError> {
    let stack = ctx.stack()?;
    let cavity = ctx.cfg.states.cavity.resolve(&ctx.base)?;
    let input = ctx.cfg.states.input.resolve(&ctx.base)?;
    let n_bar = ctx.cfg.channels.n_bars();
    let s = ctx.cfg.orders.output;
    let inputs = TransformInputs::thermal(cavity.clone(), input, n_bar);
    let opts = GridOptions {
        half_width: ctx.cfg.grid.half_width,
        n: ctx.cfg.grid.n,
        exec: Exec::default(),
    };
    ctx.prepare_out()?;
    for m in mode_setups(ctx, &stack)? {
        let k = m.model.k;
        let dir = ctx.path(&format!("extract_k{k}"));
        std::fs::create_dir_all(&dir)?;
        let mut rows = Vec::new();
        for (i, w) in weights_over_time(ctx, &m)?.into_iter().enumerate() {
            let grid = p_out_transform(&inputs, &w, s, &opts)?;
            let xi = xi_s(
                &w,
                s,
                inputs.cavity.order(),
                [
                    inputs.input.order(),
                    inputs.cav.order(),
                    inputs.plus.order(),
                    inputs.minus.order(),
                ],
            )?;
            let fid = if s == 0.0 && cavity.order() == 0.0 {
                Some(fidelity(
                    &PhaseSpaceState::Grid(grid.clone()),
                    &cavity,
                    &opts,
                )?)
            } else {
                None
            };
            let t_gamma = w.at.map_or(f64::INFINITY, |t| t * m.model.gamma);
            let stem = if w.at.is_some() {
                format!("out_t{i}")
            } else {
                "out_tinf".into()
            };
            let (grid_csv, grid_bin) = save_grid(&dir, &stem, &grid)?;
            let mid = grid.n / 2;
            rows.push(ExtractRow {
                t_gamma,
                weights: w,
                xi: xi.value,
                fidelity: fid,
                origin_value: grid.value(mid, mid),
                mass: grid.mass(),
                grid_csv,
                grid_bin,
                report: extraction_report(&w, n_bar),
            });
        }
        let curve: Vec<FidelityRow> = rows
            .iter()
            .map(|r| FidelityRow {
                t_gamma: r.t_gamma,
                eta: r.weights.eta,
                zeta_in: r.weights.zeta_in,
                fidelity: r.fidelity,
                origin_value: r.origin_value,
            })
            .collect();
        let comments = [
            format!(
                "output state of mode k = {k}, order s = {s}; grids in {}",
                dir.display()
            ),
            "fidelity = pi * integral W_out W_cavity d^2 alpha (Wigner order only)".into(),
            "origin_value = P_out(0; s)".into(),
        ];
        write_table(&dir.join("fidelity.csv"), &comments, &curve)?;
        for r in &rows {
            ctx.say(format!(
                "k = {k}  t = {:>8} /Gamma  eta = {:.6}  P_out(0) = {:+.6}  fidelity = {}",
                r.t_gamma,
                r.weights.eta,
                r.origin_value,
                r.fidelity.map_or("-".into(), |f| format!("{f:.6}"))
            ));
        }
        write_json(
            &dir.join("report.json"),
            &ExtractReport {
                k,
                output_order: s,
                n_bar,
                rows,
            },
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
    pass: bool,
}

fn check(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        value,
        tolerance,
        pass: value <= tolerance,
    }
}

#[derive(Serialize)]
struct VerifyReport {
    pass: bool,
    checks: Vec<Check>,
}

pub fn verify(ctx: &Context) -> Result<(), CliError> {
    let stack = ctx.stack()?;
    let ks = ctx.modes.indices();
    let solved = solve_modes(&stack, &ks);
    let mut checks = Vec::new();
    let mut resonances = Vec::new();
    for r in solved.iter().take(ks.len()) {
        let r = r.as_ref().map_err(|e| CliError::Solver(e.to_string()))?;
        let r = *r;
        checks.push(check(
            format!("k={} cavity denominator |D1|", r.k),
            r.residual,
            1e-10,
        ));
        resonances.push(r);
    }
    let opts = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        ..Default::default()
    };
    for (i, r) in resonances.iter().enumerate() {
        let w = r.omega_k;
        let sp = stack.at(w)?;
        let mut worst = 0.0f64;
        for (i, j) in [(0, 1), (1, 2), (2, 3)] {
            let (a, b) = (sp.interface(i, j)?, sp.interface(j, i)?);
            worst = worst.max((a.t * b.t - a.r * b.r - 1.0).norm());
        }
        checks.push(check(
            format!("k={} interface t_ij t_ji - r_ij r_ji = 1", r.k),
            worst,
            1e-12,
        ));
        if stack.eps3 == lossy_cavity::optical_stack::Permittivity::vacuum() {
            // At ω_k itself D_1 is pure roundoff; check the algebra between modes.
            let mid = w + 0.5 * spacing(&stack, &solved, i)?;
            checks.push(check(
                format!("k={} layer identities (midway to next mode)", r.k),
                verify_layer_identities(&stack, mid)?.max,
                1e-11,
            ));
        }
        let pts = [(1, 0.3), (1, 0.8), (2, 0.5 * stack.d), (3, 0.4)];
        let mut recip = 0.0f64;
        for &(j, z) in &pts {
            for &(jp, zp) in &pts {
                let (g1, g2) = (
                    green(&stack, j, z, jp, zp, w)?,
                    green(&stack, jp, zp, j, z, w)?,
                );
                recip = recip.max((g1 - g2).norm() / (1.0 + g1.norm()));
            }
        }
        checks.push(check(format!("k={} Green reciprocity", r.k), recip, 1e-12));
        let rich = helmholtz_richardson(&stack, 1, 0.7, 0.2, w, 1e-2)?;
        checks.push(check(
            format!("k={} Helmholtz stencil |ratio - 4|", r.k),
            (rich.ratio - 4.0).abs(),
            0.3,
        ));
        let id = absorption_identity_residual(&stack, 0.3, 0.3, w, &opts)?;
        checks.push(check(
            format!("k={} absorption identity", r.k),
            id.relative_residual,
            1e-8,
        ));
        let b = loss_budget(&stack, r)?;
        if r.gamma_k / r.omega_k < 1e-3 {
            checks.push(check(
                format!("k={} rate identity", r.k),
                b.identity_residual,
                1e-3,
            ));
        }
        let co = io_coefficients(&stack, w)?;
        checks.push(check(
            format!("k={} |R_o| - 1", r.k),
            co.r_out.norm() - 1.0,
            0.0,
        ));
        if stack.eps3 == lossy_cavity::optical_stack::Permittivity::vacuum() {
            let m = ModeModel::new(&stack, r)?;
            let a = asymptotic_weights(&m);
            a.validate()?;
            checks.push(check(
                format!("k={} long-time sum rule", r.k),
                (a.sum() - 1.0).abs(),
                1e-6,
            ));
        }
    }
    let all: Vec<Resonance> = solved
        .iter()
        .filter_map(|r| r.as_ref().ok().cloned())
        .collect();
    if all.len() >= 2 {
        let rep = validate_high_q(&all, HIGH_Q_THRESHOLD)?;
        let worst = rep.ratios[..ks.len().min(rep.ratios.len())]
            .iter()
            .fold(0.0f64, |m, v| m.max(*v));
        checks.push(check("Gamma/Delta omega", worst, HIGH_Q_THRESHOLD));
    }
    let pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        ctx.say(format!(
            "{} {}: {:.3e} (tolerance {:.1e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        ));
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let total = checks.len();
    ctx.prepare_out()?;
    write_json(&ctx.path("verify.json"), &VerifyReport { pass, checks })?;
    if !pass {
        return Err(CliError::Physics(format!(
            "{failed} of {total} checks failed"
        )));
    }
    Ok(())
}
