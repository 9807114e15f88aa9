use std::fmt::Write as _;

use kirchhoff::landau::{self, LaughlinParams};
use kirchhoff::orthopoly;
use kirchhoff::paraxial::{self, GridSpec, LGModeSpec};
use kirchhoff::stieltjes::{self, EquilibriumProblem};
use kirchhoff::vortex::{self, VortexConfiguration};
use kirchhoff::{BackgroundFlow, Complex64, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{BeamConfig, EquilibriumConfig, LaughlinConfig, RunConfig, ZerosConfig};
use crate::{BackgroundName, BeamArgs, Cli, Command, EquilibriumArgs, LaughlinArgs, SimulateArgs, ZerosArgs};

/// Everything a command produces; nothing touches the filesystem until the
/// whole computation has succeeded.
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<(String, Vec<u8>)>,
    pub code: u8,
    pub message: Option<String>,
}

impl Outcome {
    fn ok(stdout: String, files: Vec<(String, Vec<u8>)>) -> Self {
        Self { stdout, files, code: 0, message: None }
    }

    fn fail_if(mut self, failed: bool, code: u8, message: impl Into<String>) -> Self {
        if failed {
            self.code = code;
            self.message = Some(message.into());
        }
        self
    }
}

pub fn run(cli: &Cli, cfg: &RunConfig) -> Result<Outcome> {
    if let Some(tol) = cli.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidParameter(format!("--tol {tol} must be positive")));
        }
    }
    match &cli.command {
        Command::Zeros(a) => zeros(cli, cfg.zeros.as_ref(), a),
        Command::Equilibrium(a) => equilibrium(cli, cfg.equilibrium.as_ref(), a),
        Command::Simulate(a) => simulate(cli, cfg, a),
        Command::Laughlin(a) => laughlin(cli, cfg.laughlin.as_ref(), a),
        Command::Beam(a) => beam(cli, cfg.beam.as_ref(), a),
    }
}

fn missing(what: &str) -> Error {
    Error::InvalidParameter(format!("{what} must be given in the config file or as a flag"))
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn zeros(cli: &Cli, base: Option<&ZerosConfig>, a: &ZerosArgs) -> Result<Outcome> {
    let cfg = ZerosConfig {
        family: a.family.or(base.map(|b| b.family)).ok_or_else(|| missing("family"))?,
        n: a.n.or(base.map(|b| b.n)).ok_or_else(|| missing("n"))?,
        alpha: a.alpha.or(base.map(|b| b.alpha)).unwrap_or(0.0),
        beta: a.beta.or(base.map(|b| b.beta)).unwrap_or(0.0),
    };
    let spec = cfg.spec()?;
    let tol = cli.tol.unwrap_or(1e-10);
    let zeros = orthopoly::zeros(&spec)?;

    let mut table = String::from("index,x,ode_residual,relative_residual\n");
    let mut worst = 0.0f64;
    for (i, &x) in zeros.iter().enumerate() {
        let res = orthopoly::ode_residual(&spec, x)?;
        let scale = orthopoly::ode_scale(&spec, x)?;
        let rel = if scale > 0.0 { res.abs() / scale } else { res.abs() };
        worst = worst.max(rel);
        writeln!(table, "{},{},{},{}", i + 1, x, res, rel).unwrap();
    }
    Ok(Outcome::ok(table.clone(), vec![("zeros.csv".into(), table.into_bytes())]).fail_if(
        worst > tol,
        3,
        format!("largest relative ODE residual {worst:e} exceeds {tol:e}"),
    ))
}

fn equilibrium(cli: &Cli, base: Option<&EquilibriumConfig>, a: &EquilibriumArgs) -> Result<Outcome> {
    let background = match a.family {
        Some(BackgroundName::Hermite) => BackgroundFlow::HermiteLinear,
        Some(BackgroundName::Coulomb) => BackgroundFlow::Coulomb { l: a.l.unwrap_or(0.0) },
        Some(BackgroundName::Jacobi) => BackgroundFlow::Jacobi { p: a.p.unwrap_or(0.5), q: a.q.unwrap_or(0.5) },
        None => {
            let mut bg = base.map(|b| b.background.clone()).ok_or_else(|| missing("background"))?;
            match &mut bg {
                BackgroundFlow::Coulomb { l } => *l = a.l.unwrap_or(*l),
                BackgroundFlow::Jacobi { p, q } => {
                    *p = a.p.unwrap_or(*p);
                    *q = a.q.unwrap_or(*q);
                }
                _ => {}
            }
            bg
        }
    };
    let n = a.n.or(base.map(|b| b.n)).ok_or_else(|| missing("n"))?;
    let max_iter = a.max_iter.or(base.map(|b| b.max_iter)).unwrap_or(200);
    let mut problem = EquilibriumProblem::new(n, background);
    // A guess only makes sense for the configured size.
    if let Some(guess) = base.and_then(|b| b.initial_guess.clone()) {
        problem = problem.with_guess(guess);
    }
    problem.validate()?;
    let tol = cli.tol.unwrap_or(1e-10);

    let report = match stieltjes::solve_and_certify(&problem, tol, max_iter, tol) {
        Ok(r) => r,
        Err(Error::NonConvergence(best)) => {
            let text = pretty(&best.to_record());
            return Ok(Outcome::ok(text.clone(), vec![("equilibrium.json".into(), text.into_bytes())]).fail_if(
                true,
                3,
                format!("no convergence: best residual {:e} after {} iterations", best.residual_inf, best.iterations),
            ));
        }
        Err(e) => return Err(e),
    };
    let text = pretty(&report.to_record());
    let failed = report.certified == Some(false);
    Ok(Outcome::ok(text.clone(), vec![("equilibrium.json".into(), text.into_bytes())]).fail_if(
        failed,
        3,
        format!(
            "equilibrium deviates from the polynomial zeros by {:e}",
            report.max_zero_deviation.unwrap_or(f64::NAN)
        ),
    ))
}

fn simulate(cli: &Cli, cfg: &RunConfig, a: &SimulateArgs) -> Result<Outcome> {
    let base = cfg.simulate.as_ref().ok_or_else(|| missing("simulate initial data"))?;
    let t_end = a.t_end.unwrap_or(base.t_end);
    let samples = a.samples.unwrap_or(base.samples);
    let start = VortexConfiguration::new(base.positions.clone(), base.strengths.clone(), 0.0)?;
    base.background.validate()?;
    let mut controls = base.controls.clone();
    if controls.output_times.is_empty() {
        controls = controls.with_uniform_samples(0.0, t_end, samples);
    }
    let bound = match (base.drift_bound, &base.background) {
        (Some(b), _) => Some(b),
        (None, BackgroundFlow::None) => Some(cli.tol.unwrap_or(1e-8)),
        (None, _) => None,
    };

    let traj = vortex::integrate(&start, &base.background, t_end, &controls)?;

    let n = start.len();
    let mut csv = String::from("t");
    for i in 1..=n {
        write!(csv, ",x_{i},y_{i}").unwrap();
    }
    csv.push_str(",Q,P,I,H\n");
    for s in &traj.samples {
        write!(csv, "{}", s.t).unwrap();
        for z in &s.positions {
            write!(csv, ",{},{}", z.re, z.im).unwrap();
        }
        let inv = vortex::conserved(s);
        writeln!(csv, ",{},{},{},{}", inv.impulse.re, inv.impulse.im, inv.angular_impulse, inv.energy).unwrap();
    }
    let d = &traj.drift;
    let within = bound.map(|b| d.impulse <= b && d.angular_impulse <= b && d.energy <= b);
    let summary = pretty(&json!({
        "t_end": t_end,
        "samples": traj.samples.len(),
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
        "drift": { "impulse": d.impulse, "angular_impulse": d.angular_impulse, "energy": d.energy },
        "drift_bound": bound,
        "within_bound": within,
    }));
    Ok(Outcome::ok(
        summary.clone(),
        vec![("trajectory.csv".into(), csv.into_bytes()), ("drift.json".into(), summary.into_bytes())],
    )
    .fail_if(within == Some(false), 3, "invariant drift exceeds the configured bound"))
}

/// Regular polygon at the equilibrium radius with seeded jitter.
fn default_guess(params: &LaughlinParams, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.n_particles;
    let r = params.polygon_radius().max(params.l_b);
    (0..n)
        .map(|k| {
            let radius = r * (1.0 + 0.1 * rng.gen_range(-1.0..1.0));
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + 0.2 * rng.gen_range(-1.0..1.0);
            Complex64::from_polar(radius, angle)
        })
        .collect()
}

fn laughlin(cli: &Cli, base: Option<&LaughlinConfig>, a: &LaughlinArgs) -> Result<Outcome> {
    let params = LaughlinParams::new(
        a.n.or(base.map(|b| b.n)).ok_or_else(|| missing("N"))?,
        a.m_exp.or(base.map(|b| b.m_exp)).ok_or_else(|| missing("m_exp"))?,
        a.l_b.or(base.map(|b| b.l_b)).ok_or_else(|| missing("l_B"))?,
    )?;
    let max_iter = a.max_iter.or(base.map(|b| b.max_iter)).unwrap_or(200);
    let guess = match base.and_then(|b| b.initial_guess.clone()) {
        Some(g) => g,
        None => default_guess(&params, cli.seed),
    };
    let tol = cli.tol.unwrap_or(landau::PLANAR_TOLERANCE);
    let eq = landau::solve_planar_equilibrium(&params, &guess, tol, max_iter)?;
    let mut record = eq.to_record();
    record.extra.insert("seed".into(), json!(cli.seed));
    let text = pretty(&record);
    Ok(Outcome::ok(text.clone(), vec![("laughlin.json".into(), text.into_bytes())]))
}

fn beam(cli: &Cli, base: Option<&BeamConfig>, a: &BeamArgs) -> Result<Outcome> {
    let mut mode = base.map(|b| b.mode).unwrap_or(LGModeSpec { p: 0, ell: 1, w0: 1.0 });
    mode.ell = a.ell.unwrap_or(mode.ell);
    mode.p = a.p.unwrap_or(mode.p);
    mode.w0 = a.w0.unwrap_or(mode.w0);
    let n = a.grid.or(base.map(|b| b.grid.nx)).unwrap_or(256);
    let mut grid =
        base.map(|b| b.grid).unwrap_or_else(|| GridSpec::square(n, 10.0 * mode.w0 / n as f64, 50.0 / mode.w0));
    if let Some(n) = a.grid {
        grid.nx = n;
        grid.ny = n;
    }
    if let Some(dx) = a.dx {
        grid.dx = dx;
        grid.dy = dx;
    }
    grid.k = a.k.unwrap_or(grid.k);
    let z_end = a.z_end.or(base.map(|b| b.z_end_rayleigh)).unwrap_or(1.0);
    let slices = a.slices.or(base.map(|b| b.slices)).unwrap_or(10);
    if !(z_end.is_finite() && z_end >= 0.0) || slices == 0 {
        return Err(Error::InvalidParameter("z_end must be >= 0 and slices >= 1".into()));
    }
    let energy_tol = cli.tol.unwrap_or(1e-10);

    let initial = paraxial::lg_mode(&mode, &grid)?;
    let aliased = paraxial::aliasing_fraction(&initial)?;
    if aliased > paraxial::ALIASING_LIMIT {
        return Ok(Outcome {
            stdout: String::new(),
            files: Vec::new(),
            code: 5,
            message: Some(format!("{:.3}% of the energy lies in the outer spectral quarter", 100.0 * aliased)),
        });
    }

    let dz = z_end * mode.rayleigh_range(grid.k) / slices as f64;
    let mut track = String::from("slice,z,x,y,charge\n");
    let mut totals = Vec::with_capacity(slices + 1);
    let mut widths = Vec::with_capacity(slices + 1);
    let mut energy_drift = 0.0f64;
    let mut field = initial.clone();
    for s in 0..=slices {
        if s > 0 {
            let next = paraxial::propagate(&field, dz, 1)?;
            energy_drift = energy_drift.max((next.energy() - field.energy()).abs());
            field = next;
        }
        let found = paraxial::find_vortices(&field);
        for v in &found {
            writeln!(track, "{s},{},{},{},{}", field.z, v.x, v.y, v.charge).unwrap();
        }
        totals.push(found.iter().map(|v| v.charge).sum::<i64>());
        widths.push(paraxial::beam_width(&field).0);
    }
    let conserved = totals.windows(2).all(|w| w[0] == w[1]);
    let energy_ok = energy_drift <= energy_tol;
    let mut csv = Vec::new();
    paraxial::io::write_csv(&field, &mut csv)?;
    let summary = pretty(&json!({
        "mode": mode,
        "grid": grid,
        "rayleigh_range": mode.rayleigh_range(grid.k),
        "z_end": field.z,
        "aliasing_fraction": aliased,
        "total_charge": totals,
        "width": widths,
        "energy_drift_per_step": energy_drift,
        "charge_conserved": conserved,
    }));
    let files = vec![
        ("field_initial.bin".into(), paraxial::io::field_to_bytes(&initial)),
        ("field_final.bin".into(), paraxial::io::field_to_bytes(&field)),
        ("intensity_final.csv".into(), csv),
        ("vortex_track.csv".into(), track.into_bytes()),
        ("beam.json".into(), summary.clone().into_bytes()),
    ];
    Ok(Outcome::ok(summary, files)
        .fail_if(!energy_ok, 3, format!("energy drift {energy_drift:e} per step exceeds {energy_tol:e}"))
        .fail_if(!conserved, 3, "total detected charge changed between slices"))
}
