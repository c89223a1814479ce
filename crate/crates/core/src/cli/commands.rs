use std::f64::consts::PI;
use std::fs;

use nalgebra::{DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    parse_fixed, parse_list, to_json, write_output, CeArgs, Cli, Format, FresnelArgs, GravityArgs, ProfileKind,
    RaysArgs, ShockArgs, TheoryKind,
};
use crate::ce::{classify, ClassifyOptions, Grid, REPORT_SCHEMA};
use crate::charsys::{
    fresnel_scan, write_fresnel_csv, Cone, FieldBackground, FresnelCone, ScalarCone, ScalarPlaneFamily,
};
use crate::error::{Error, Result};
use crate::gravity::{monte_carlo, Theory};
use crate::lagrangians::Kind;
use crate::rays::{crossing_time, trace, write_ray_csv, RayState, Uniform};
use crate::shock1d::{
    exceptional_flux_demo, moc_solve, shock_time, simple_wave_construct, write_fan_csv, write_snapshot_csv,
    MocSolution, Profile1D,
};

const MAX_RESAMPLES: usize = 10_000;

fn format_or(cli: &Cli, default: Format, allowed: &[Format]) -> Result<Format> {
    let f = cli.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Error::Usage(format!("format {f:?} is not available for this command")))
    }
}

/// `ce check`: classification report as JSON.
pub fn cmd_ce_check(cli: &Cli, args: &CeArgs) -> Result<()> {
    format_or(cli, Format::Json, &[Format::Json])?;
    let model = args.model.build(None)?;
    let grid = match &args.grid {
        Some(g) => g.parse::<Grid>()?,
        None => Grid::default_for(model.kind()),
    };
    let mut opts = ClassifyOptions::default();
    if let Some(tol) = args.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Usage("--tol must be positive".into()));
        }
        opts.tol = tol;
    }
    let report = classify(&model, &grid, &opts)?;
    eprintln!(
        "{}: {} (max {} residual {:.3e})",
        report.model, report.label, report.residual_summary.residual, report.residual_summary.max
    );
    write_output(cli.out.as_deref(), &to_json(&report)?)
}

fn random_unit<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_field<R: Rng>(rng: &mut R, range: f64) -> [f64; 3] {
    [0; 3].map(|_| rng.gen_range(-range..=range))
}

/// `fresnel`: quartic roots over the vacuum and random backgrounds.
pub fn cmd_fresnel(cli: &Cli, args: &FresnelArgs) -> Result<()> {
    let format = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
    let model = args.model.build(None)?;
    if model.kind() == Kind::Scalar {
        return Err(Error::Usage("fresnel needs an electrodynamics model".into()));
    }
    if !(args.range > 0.0 && args.range.is_finite()) {
        return Err(Error::Usage("--range must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut samples = Vec::with_capacity(args.samples + 1);
    let vacuum = FieldBackground::vector([0.0; 3], [0.0; 3]);
    if model.in_domain(&vacuum.invariant_point(model.kind()), 0.0) {
        samples.push((vacuum, Vector3::x()));
    }
    for _ in 0..args.samples {
        let mut found = None;
        for _ in 0..MAX_RESAMPLES {
            let bg = FieldBackground::vector(random_field(&mut rng, args.range), random_field(&mut rng, args.range));
            if model.in_domain(&bg.invariant_point(model.kind()), 0.05) {
                found = Some(bg);
                break;
            }
        }
        let bg = found.ok_or_else(|| Error::domain("no sampled background lies inside the model domain"))?;
        samples.push((bg, random_unit(&mut rng)));
    }
    let rows = fresnel_scan(&model, &samples)?;
    let bytes = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_fresnel_csv(&rows, &mut buf)?;
            buf
        }
        Format::Json => to_json(&rows)?,
    };
    write_output(cli.out.as_deref(), &bytes)
}

#[derive(Serialize)]
struct ShockSummary {
    schema: &'static str,
    model: String,
    profile: String,
    t_max: f64,
    burgers_shock_time: Option<f64>,
    burgers_crossing_time: Option<f64>,
    wave_crossing_time: Option<f64>,
    message: String,
}

#[derive(Serialize)]
struct FanRow<'a> {
    t: f64,
    family: &'a str,
    phi: f64,
    x: f64,
    lambda: f64,
}

fn describe(name: &str, t: Option<f64>, t_max: f64) -> String {
    match t {
        Some(t) => format!("{name}: t* = {t:.6}"),
        None => format!("{name}: no crossing up to t_max = {t_max}"),
    }
}

/// `shock`: Burgers fan and shock time, plus the simple-wave fan of a
/// scalar model when one is given. With `--out DIR` writes `summary.json`,
/// `fan.csv` and `snapshots.csv` into `DIR`; otherwise prints the summary.
pub fn cmd_shock(cli: &Cli, args: &ShockArgs) -> Result<()> {
    format_or(cli, Format::Json, &[Format::Json])?;
    if !(args.t_max > 0.0 && args.t_max.is_finite()) {
        return Err(Error::Usage("--t-max must be positive".into()));
    }
    let times = parse_list(&args.times)?;
    if times.iter().any(|&t| t < 0.0) {
        return Err(Error::Usage("snapshot times must be nonnegative".into()));
    }
    let profile = match args.profile {
        ProfileKind::Sin => Profile1D::callable(f64::sin, 0.0, 2.0 * PI, true)?,
        ProfileKind::Tanh => Profile1D::callable(f64::tanh, -5.0, 5.0, false)?,
    };
    let identity = |u: f64| u;
    let burgers_shock_time = shock_time(&identity, &profile, args.n)?;
    let x0 = profile.grid(args.n);
    let burgers_crossing_time = crossing_time(&|x| profile.eval(x), &x0, args.t_max)?;
    let snapshots: Vec<MocSolution> = times
        .iter()
        .map(|&t| moc_solve(&identity, &profile, t, args.n))
        .collect::<Result<_>>()?;

    let mut fan = Vec::new();
    let (model_name, wave_crossing_time) = if args.model.is_empty() {
        let mut w = csv::Writer::from_writer(&mut fan);
        for &t in &times {
            for &x in &x0 {
                let u = profile.eval(x);
                w.serialize(FanRow {
                    t,
                    family: "burgers",
                    phi: x,
                    x: x + u * t,
                    lambda: u,
                })?;
            }
        }
        w.flush()?;
        drop(w);
        ("burgers".to_string(), None)
    } else {
        let model = args.model.build(Some(Kind::Scalar))?;
        let model = if model.kind() == Kind::Scalar {
            model
        } else {
            model.rebind(Kind::Scalar)?
        };
        let [lo, hi] = parse_fixed::<2>(&args.phi_range, "--phi-range")?;
        let family = ScalarPlaneFamily { model: model.clone() };
        let wave = simple_wave_construct(&family, 1, 1, (lo, hi), &DVector::from_vec(vec![args.a0, lo]), 200)?;
        let demo = exceptional_flux_demo(&wave, &profile, &times, args.t_max, args.n)?;
        write_fan_csv(&demo, &mut fan)?;
        (model.name().to_string(), Some(demo.wave_crossing))
    };

    let mut message = describe("burgers", burgers_shock_time, args.t_max);
    if let Some(w) = wave_crossing_time {
        message = format!("{message}; {}", describe(&model_name, w, args.t_max));
    }
    let summary = ShockSummary {
        schema: REPORT_SCHEMA,
        model: model_name,
        profile: format!("{:?}", args.profile).to_lowercase(),
        t_max: args.t_max,
        burgers_shock_time,
        burgers_crossing_time,
        wave_crossing_time: wave_crossing_time.flatten(),
        message,
    };
    eprintln!("{}", summary.message);
    let json = to_json(&summary)?;
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("summary.json"), json)?;
            fs::write(dir.join("fan.csv"), fan)?;
            let mut snap = Vec::new();
            write_snapshot_csv(&snapshots, &mut snap)?;
            fs::write(dir.join("snapshots.csv"), snap)?;
            Ok(())
        }
        None => write_output(None, &json),
    }
}

/// `gravity`: kernel-dimension histograms as JSON.
pub fn cmd_gravity(cli: &Cli, args: &GravityArgs) -> Result<()> {
    format_or(cli, Format::Json, &[Format::Json])?;
    if args.trials == 0 {
        return Err(Error::Usage("--trials must be positive".into()));
    }
    let theory = match args.theory {
        TheoryKind::Einstein => Theory::Einstein,
        TheoryKind::Quadratic => Theory::Quadratic { p: args.p, q: args.q },
        TheoryKind::Fr => Theory::FofR { fpp: args.fpp },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let report = monte_carlo(&theory, args.d, args.trials, &mut rng)?;
    eprintln!(
        "{theory}, D = {}: null kernel ≥ {}, non-null kernel ≤ {}",
        args.d,
        report.null_min(),
        report.nonnull_max()
    );
    write_output(cli.out.as_deref(), &to_json(&report)?)
}

/// `rays`: one ray of the characteristic cone, as CSV or JSON.
pub fn cmd_rays(cli: &Cli, args: &RaysArgs) -> Result<()> {
    let format = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
    let model = args.model.build(None)?;
    let n = Vector3::from(parse_fixed::<3>(&args.n, "--n")?);
    if n.norm() == 0.0 {
        return Err(Error::Usage("--n must be nonzero".into()));
    }
    let pick = |cone: &dyn Cone| -> Result<f64> {
        if let Some(p0) = args.p0 {
            return Ok(p0);
        }
        let roots = cone.roots_p0(&n)?;
        let r = roots
            .get(args.root)
            .ok_or_else(|| Error::Usage(format!("--root {} out of range ({} roots)", args.root, roots.len())))?;
        if r.im.abs() > 1e-9 * (1.0 + r.re.abs()) {
            return Err(Error::NotHyperbolic(format!("root {} is complex: {r}", args.root)));
        }
        Ok(r.re)
    };
    let path = if model.kind() == Kind::Scalar {
        let [a, b, c, d] = parse_fixed::<4>(&args.sigma, "--sigma")?;
        let bg = FieldBackground::scalar(a, b, c, d);
        let cone = ScalarCone::from_jet(&bg, &model.jet(&bg.invariant_point(Kind::Scalar))?)?;
        let p = [pick(&cone)?, n.x, n.y, n.z];
        trace(&Uniform(cone), RayState::new([0.0; 4], p), args.s_max, args.step)?
    } else {
        let bg = FieldBackground::vector(parse_fixed::<3>(&args.e, "--e")?, parse_fixed::<3>(&args.b, "--b")?);
        let cone = FresnelCone::from_jet(&bg, &model.jet(&bg.invariant_point(model.kind()))?)?;
        let p = [pick(&cone)?, n.x, n.y, n.z];
        trace(
            &Uniform(cone.sheet_for(&p)?),
            RayState::new([0.0; 4], p),
            args.s_max,
            args.step,
        )?
    };
    eprintln!("{} samples, max |H| drift {:.3e}", path.samples.len(), path.max_drift);
    let bytes = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_ray_csv(&path, &mut buf)?;
            buf
        }
        Format::Json => to_json(&path)?,
    };
    write_output(cli.out.as_deref(), &bytes)
}
