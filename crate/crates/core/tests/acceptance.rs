//! Acceptance criteria 1–12, one pass/fail line each.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the report.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use cewave::ce::{
    classify, expanded_ce_residuals_from_partials, general_ce_residuals, scalar_ce_residual, AlphaBetaPartials,
    ClassifyOptions, Grid, Label, VectorCharData, DEGENERACY_TOL,
};
use cewave::charsys::{
    crosscheck_cone_vs_eigen, exceptionality_per_mode, fresnel_roots, scalar_system, vector_system, BurgersFamily,
    Cone, FieldBackground, FresnelCone, ScalarCone, ScalarFamily, ScalarPlaneFamily, SystemFamily,
};
use cewave::gravity::{analyze, monte_carlo, random_nonnull, trace_identity_residual, GravityProbe, Theory};
use cewave::jets::InvariantPoint;
use cewave::lagrangians::{builtin, Kind, LagrangianModel};
use cewave::rays::{crossing_time, trace, transport_amplitude, BurgersAnalog, RayState, TransportState, Uniform};
use cewave::shock1d::{moc_solve, shock_time, simple_wave_construct, Profile1D};
use cewave::{Error, Result};
use nalgebra::{DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sub-checks that cannot hold for the specified operator; each prints FAIL
/// and is excluded from the final assertion (see `weyl_nonnull_kernel_is_trivial`).
const KNOWN_UNATTAINABLE: &[&str] = &["10: quadratic p=3q non-null kernel 0"];

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Report(Vec<Check>);

/// Writes past the test harness's output capture so the report is always visible.
fn emit(line: String) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
}

impl Report {
    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        let detail = detail.into();
        emit(format!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" }));
        self.0.push(Check {
            name: name.to_string(),
            pass,
            detail,
        });
    }

    fn run(&mut self, name: &str, f: impl FnOnce(&mut Report) -> Result<()>) {
        if let Err(e) = f(self) {
            self.check(name, false, format!("error: {e}"));
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_unit(r: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        if v.norm() > 0.2 && v.norm() <= 1.0 {
            return v.normalize();
        }
    }
}

fn random_field(r: &mut ChaCha8Rng, range: f64) -> [f64; 3] {
    [0; 3].map(|_| r.gen_range(-range..range))
}

/// Random electromagnetic background inside the model's domain.
fn random_em(r: &mut ChaCha8Rng, m: &LagrangianModel) -> FieldBackground {
    loop {
        let bg = FieldBackground::vector(random_field(r, 0.4), random_field(r, 0.4));
        if m.in_domain(&bg.invariant_point(m.kind()), 0.05) {
            return bg;
        }
    }
}

fn criterion_1(rep: &mut Report) -> Result<()> {
    for name in ["born-infeld", "maxwell", "alpha-over-beta"] {
        let m = builtin(name, &[])?;
        let r = classify(&m, &Grid::default_for(m.kind()), &ClassifyOptions::default())?;
        let max = r.residual_summary.max;
        rep.check(
            &format!("1: {name} strongly CE"),
            r.label == Label::StronglyCE && max < 1e-10,
            format!("label {}, max residual {max:.2e}", r.label),
        );
    }
    Ok(())
}

fn max_scalar_residual(m: &LagrangianModel, zs: &[f64]) -> Result<f64> {
    zs.iter().try_fold(0.0f64, |acc, &z| {
        let jet = m.jet(&InvariantPoint::Z { z })?;
        Ok(acc.max(scalar_ce_residual(&jet).normalized()))
    })
}

fn criterion_2(rep: &mut Report) -> Result<()> {
    let mut r = rng(2);
    let zs: Vec<f64> = (0..100).map(|_| r.gen_range(-0.45..0.45)).collect();
    for name in ["scalar-maxwell", "scalar-bi"] {
        let max = max_scalar_residual(&builtin(name, &[])?, &zs)?;
        rep.check(&format!("2: {name} scal = 0"), max < 1e-12, format!("max {max:.2e}"));
    }
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let (k, d, c) = (r.gen_range(-1.0..1.0), r.gen_range(0.5..2.0), r.gen_range(-1.0..1.0));
        let m = builtin("sqrt-family", &[k, d, c])?.rebind(Kind::Scalar)?;
        worst = worst.max(max_scalar_residual(&m, &zs)?);
    }
    rep.check(
        "2: k+sqrt(d+cz) family scal = 0",
        worst < 1e-12,
        format!("max over 5 triples {worst:.2e}"),
    );
    let cubic = LagrangianModel::parse("z + z^3", Kind::Scalar)?;
    let max = max_scalar_residual(&cubic, &zs)?;
    rep.check("2: z+z^3 fails", max > 0.1, format!("max {max:.2e}"));
    Ok(())
}

fn criterion_3(rep: &mut Report) -> Result<()> {
    let mut r = rng(3);
    let mut pairs = Vec::new();
    let mut skipped = 0;
    while pairs.len() < 1000 {
        let mut u = || r.gen_range(-1.0..1.0);
        let p = AlphaBetaPartials {
            alpha: u(),
            beta: u(),
            l_a: u(),
            l_b: u(),
            l_aa: u(),
            l_ab: u(),
            l_bb: u(),
            l_aaa: u(),
            l_aab: u(),
            l_abb: u(),
            l_bbb: u(),
        };
        let general = general_ce_residuals(&VectorCharData::from_partials(p));
        let expanded = expanded_ce_residuals_from_partials(&p, DEGENERACY_TOL);
        match (general, expanded) {
            (Ok(g), Ok(e)) => pairs.push((g, e)),
            (Err(Error::Degeneracy(_)), Err(Error::Degeneracy(_))) => skipped += 1,
            (g, e) => {
                rep.check(
                    "3: degeneracy agreement",
                    false,
                    format!("{:?} vs {:?}", g.err(), e.err()),
                );
                return Ok(());
            }
        }
    }
    for idx in 0..2 {
        let mut ratios: Vec<f64> = pairs
            .iter()
            .filter(|(g, _)| g[idx].raw.abs() > 1e-6)
            .map(|(g, e)| e[idx].raw / g[idx].raw)
            .collect();
        ratios.sort_by(f64::total_cmp);
        let factor = ratios[ratios.len() / 2];
        let worst = pairs.iter().fold(0.0f64, |m, (g, e)| {
            let (a, b) = (factor * g[idx].raw, e[idx].raw);
            let scale = g[idx].scale.abs().max(e[idx].scale.abs() / factor.abs()).max(1e-300);
            m.max((a - b).abs() / (factor.abs() * scale))
        });
        rep.check(
            &format!("3: condition {} matches expanded form", idx + 1),
            worst < 1e-8,
            format!("global factor {factor}, max relative difference {worst:.2e} over 1000 jets ({skipped} degenerate skipped)"),
        );
    }
    Ok(())
}

fn criterion_4(rep: &mut Report) -> Result<()> {
    let mut r = rng(4);
    let bi = builtin("born-infeld", &[])?;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let bg = random_em(&mut r, &bi);
        let fr = fresnel_roots(&bi.jet(&bg.invariant_point(bi.kind()))?, &bg, &random_unit(&mut r))?;
        worst = worst.max(fr.pair_gaps[0]).max(fr.pair_gaps[1]);
    }
    rep.check(
        "4: born-infeld double roots",
        worst < 1e-8,
        format!("max pair gap {worst:.2e} over 100 samples"),
    );

    let pm = builtin("perturbed-maxwell", &[0.1])?;
    let mut split = 0;
    let mut smallest = f64::INFINITY;
    for _ in 0..100 {
        let bg = random_em(&mut r, &pm);
        let fr = fresnel_roots(&pm.jet(&bg.invariant_point(pm.kind()))?, &bg, &random_unit(&mut r))?;
        let gap = fr.pair_gaps[0].max(fr.pair_gaps[1]);
        smallest = smallest.min(gap);
        if gap > 1e-3 {
            split += 1;
        }
    }
    rep.check(
        "4: perturbed-maxwell splits",
        split == 100,
        format!("{split}/100 samples split > 1e-3 (smallest split {smallest:.2e})"),
    );
    Ok(())
}

fn criterion_5(rep: &mut Report) -> Result<()> {
    let mut r = rng(5);
    let m = LagrangianModel::parse("1 - sqrt(1 + a)", Kind::VectorAlpha)?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let bg = random_em(&mut r, &m);
        let n = random_unit(&mut r);
        let jet = m.jet(&bg.invariant_point(m.kind()))?;
        let sys = vector_system(&bg, &jet, &n)?;
        worst = worst.max(crosscheck_cone_vs_eigen(&sys, &FresnelCone::from_jet(&bg, &jet)?)?.max());
    }
    rep.check(
        "5: L(a) system vs cone",
        worst < 1e-8,
        format!("max mismatch {worst:.2e} over 20 samples"),
    );

    let s = builtin("scalar-bi", &[])?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let sig: [f64; 4] = [0; 4].map(|_| r.gen_range(-0.5..0.5));
        let bg = FieldBackground::scalar(sig[0], sig[1], sig[2], sig[3]);
        let jet = s.jet(&bg.invariant_point(Kind::Scalar))?;
        let sys = scalar_system(&bg, &jet, &random_unit(&mut r))?;
        worst = worst.max(crosscheck_cone_vs_eigen(&sys, &ScalarCone::from_jet(&bg, &jet)?)?.max());
    }
    rep.check(
        "5: scalar system vs cone",
        worst < 1e-8,
        format!("max mismatch {worst:.2e} over 20 samples"),
    );
    Ok(())
}

fn criterion_6(rep: &mut Report) -> Result<()> {
    let b = exceptionality_per_mode(&BurgersFamily, &DVector::from_element(1, 0.7), 0)?;
    rep.check("6: burgers", (b - 1.0).abs() < 1e-10, format!("{b}"));

    let fam = ScalarFamily {
        model: builtin("scalar-bi", &[])?,
        direction: Vector3::x(),
    };
    let u = DVector::from_vec(vec![0.2, 0.5, 0.1, 0.3]);
    let worst = [0, 3]
        .iter()
        .map(|&k| exceptionality_per_mode(&fam, &u, k).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    rep.check("6: scalar-bi modes", worst < 1e-7, format!("max {worst:.2e}"));

    let zz = ScalarPlaneFamily {
        model: LagrangianModel::parse("z^2", Kind::Scalar)?,
    };
    let u = DVector::from_vec(vec![0.2, 0.5]);
    let least = (0..zz.dim())
        .map(|k| exceptionality_per_mode(&zz, &u, k).map(f64::abs))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    rep.check("6: z^2 modes", least > 1e-2, format!("min {least:.2e}"));
    Ok(())
}

fn criterion_7(rep: &mut Report) -> Result<()> {
    let bi = ScalarPlaneFamily {
        model: builtin("scalar-bi", &[])?,
    };
    let w = simple_wave_construct(&bi, 1, 1, (0.1, 0.6), &DVector::from_vec(vec![0.3, 0.1]), 200)?;
    let v = w.lambda_variation();
    rep.check(
        "7: scalar-bi simple wave",
        v < 1e-6,
        format!("lambda variation {v:.2e}"),
    );

    let zz = ScalarPlaneFamily {
        model: LagrangianModel::parse("z^2", Kind::Scalar)?,
    };
    let w = simple_wave_construct(&zz, 1, 1, (0.1, 0.6), &DVector::from_vec(vec![1.0, 0.1]), 200)?;
    let v = w.lambda_variation();
    rep.check("7: z^2 simple wave", v > 1e-2, format!("lambda variation {v:.2e}"));
    Ok(())
}

fn criterion_8(rep: &mut Report) -> Result<()> {
    let profile = Profile1D::callable(f64::sin, 0.0, 2.0 * PI, true)?;
    let id = |u: f64| u;
    let ts = shock_time(&id, &profile, 400)?.unwrap_or(f64::NAN);
    let tc = crossing_time(&|x| profile.eval(x), &profile.grid(400), 10.0)?.unwrap_or(f64::NAN);
    rep.check(
        "8: burgers t* = 1",
        (ts - 1.0).abs() < 0.02 && (tc - 1.0).abs() < 0.02,
        format!("shock_time {ts:.6}, crossing_time {tc:.6}"),
    );
    let early = moc_solve(&id, &profile, 0.5, 400)?.multivalued;
    let late = moc_solve(&id, &profile, 1.5, 400)?.multivalued;
    rep.check(
        "8: multivalued flag",
        !early && late,
        format!("t=0.5: {early}, t=1.5: {late}"),
    );
    Ok(())
}

fn criterion_9(rep: &mut Report) -> Result<()> {
    let ric = transport_amplitude(
        &TransportState {
            pi0: -2.0,
            m: 0.0,
            c: 1.0,
        },
        2.0,
        0.01,
    )?;
    let s = ric.blowup.unwrap_or(f64::NAN);
    rep.check("9: riccati blow-up", (s - 0.5).abs() < 0.005, format!("s* = {s}"));
    let flat = transport_amplitude(
        &TransportState {
            pi0: -2.0,
            m: 0.0,
            c: 0.0,
        },
        100.0,
        0.01,
    )?;
    let max = flat.max_abs();
    rep.check(
        "9: exceptional case bounded",
        flat.blowup.is_none() && max.is_finite() && max <= 2.0 + 1e-12,
        format!("max |pi| {max} to s = 100"),
    );
    Ok(())
}

fn criterion_10(rep: &mut Report) -> Result<()> {
    let theories = [
        ("einstein", Theory::Einstein),
        ("quadratic (1,0)", Theory::Quadratic { p: 1.0, q: 0.0 }),
        ("quadratic (2,1)", Theory::Quadratic { p: 2.0, q: 1.0 }),
        ("quadratic p=3q", Theory::Quadratic { p: 3.0, q: 1.0 }),
    ];
    for (i, (label, th)) in theories.iter().enumerate() {
        let r = monte_carlo(th, 4, 200, &mut rng(100 + i as u64))?;
        let null_ok = r.null_kernel_dims.keys().all(|&k| k >= 1);
        let nonnull_ok = r.nonnull_kernel_dims.get(&0) == Some(&200);
        rep.check(
            &format!("10: {label} null kernel >= 1"),
            null_ok,
            format!("null histogram {:?}", r.null_kernel_dims),
        );
        rep.check(
            &format!("10: {label} non-null kernel 0"),
            nonnull_ok,
            format!("non-null histogram {:?}", r.nonnull_kernel_dims),
        );
    }
    for d in 4..=7 {
        let th = Theory::FofR { fpp: 1.0 };
        let mut r = rng(200 + d as u64);
        let mut ok = true;
        let (mut null_min, mut nonnull_max) = (usize::MAX, 0);
        for _ in 0..200 {
            let n = analyze(&th, &cewave::gravity::random_null(&mut r, d))?.kernel_dim;
            let t = analyze(&th, &random_nonnull(&mut r, d))?.kernel_dim;
            ok &= n > t;
            null_min = null_min.min(n);
            nonnull_max = nonnull_max.max(t);
        }
        rep.check(
            &format!("10: f(R) D={d} null > non-null"),
            ok,
            format!("null min {null_min}, non-null max {nonnull_max} over 200 pairs"),
        );
    }
    let mut r = rng(300);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let phi = random_nonnull(&mut r, 4);
        let probe = GravityProbe::new(&phi)?;
        let raw = DVector::from_fn(10, |_, _| r.gen_range(-1.0..1.0));
        let pi = probe.tensor(&probe.project_to_gauge(&raw));
        worst = worst.max(trace_identity_residual(&Theory::Einstein, &phi, &pi)?);
    }
    rep.check("10: trace identity", worst < 1e-10, format!("max residual {worst:.2e}"));
    Ok(())
}

fn criterion_11(rep: &mut Report) -> Result<()> {
    let bi = builtin("born-infeld", &[])?;
    let bg = FieldBackground::vector([0.3, 0.0, 0.1], [0.0, 0.4, -0.2]);
    let cone = FresnelCone::from_jet(&bg, &bi.jet(&bg.invariant_point(bi.kind()))?)?;
    let n = Vector3::new(0.0, 0.6, 0.8);
    let p = [cone.roots_p0(&n)?[3].re, n.x, n.y, n.z];
    let path = trace(&Uniform(cone.sheet_for(&p)?), RayState::new([0.0; 4], p), 10.0, 1e-2)?;
    let sbi = builtin("scalar-bi", &[])?;
    let sg = FieldBackground::scalar(0.3, 0.1, -0.2, 0.05);
    let scone = ScalarCone::from_jet(&sg, &sbi.jet(&sg.invariant_point(Kind::Scalar))?)?;
    let sp = [scone.roots_p0(&n)?[0].re, n.x, n.y, n.z];
    let spath = trace(&Uniform(scone), RayState::new([0.0; 4], sp), 10.0, 1e-2)?;
    let drift = path.max_drift.max(spath.max_drift);
    rep.check(
        "11: constant-background drift",
        drift < 1e-12,
        format!("max |H| drift {drift:.2e}"),
    );

    let h = BurgersAnalog::new(|x| 0.5 + 0.3 * x.sin(), |x| 0.3 * x.cos());
    let start = RayState::new([0.0, 0.2, 0.0, 0.0], [-(0.5 + 0.3 * 0.2f64.sin()), 1.0, 0.0, 0.0]);
    let d1 = trace(&h, start, 5.0, 0.05)?.max_drift;
    let d2 = trace(&h, start, 5.0, 0.025)?.max_drift;
    let order = (d1 / d2).log2();
    rep.check("11: RK4 order", order >= 3.8, format!("measured order {order:.3}"));
    Ok(())
}

fn cli_bytes(args: &[&str], out: Option<&Path>) -> (i32, Vec<u8>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cewave"));
    cmd.args(args);
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    let output = cmd.output().expect("binary runs");
    let mut bytes = output.stdout;
    if let Some(o) = out {
        let mut files: Vec<_> = std::fs::read_dir(o).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        for f in files {
            bytes.extend(std::fs::read(f).unwrap());
        }
    }
    (output.status.code().unwrap_or(-1), bytes)
}

fn criterion_12(rep: &mut Report) -> Result<()> {
    let commands: [&[&str]; 6] = [
        &["ce", "check", "--builtin", "born-infeld"],
        &[
            "fresnel",
            "--builtin",
            "perturbed-maxwell",
            "--params",
            "0.1",
            "--samples",
            "20",
            "--seed",
            "9",
        ],
        &["gravity", "--theory", "fr", "--D", "5", "--trials", "30", "--seed", "7"],
        &[
            "rays",
            "--builtin",
            "born-infeld",
            "--e",
            "0.3,0,0",
            "--b",
            "0,0.4,0",
            "--root",
            "3",
        ],
        &["shock"],
        &["shock", "--builtin", "scalar-bi"],
    ];
    for args in commands {
        let dirs = [tempfile::tempdir()?, tempfile::tempdir()?];
        let dir_out = args[0] == "shock";
        let runs: Vec<_> = dirs
            .iter()
            .map(|d| cli_bytes(args, dir_out.then(|| d.path())))
            .collect();
        rep.check(
            &format!("12: `{}` deterministic", args.join(" ")),
            runs[0].0 == 0 && runs[0] == runs[1] && !runs[0].1.is_empty(),
            format!(
                "exit {}, {} bytes, identical: {}",
                runs[0].0,
                runs[0].1.len(),
                runs[0] == runs[1]
            ),
        );
    }
    Ok(())
}

#[test]
fn acceptance_criteria() {
    let mut rep = Report::default();
    rep.run("1", criterion_1);
    rep.run("2", criterion_2);
    rep.run("3", criterion_3);
    rep.run("4", criterion_4);
    rep.run("5", criterion_5);
    rep.run("6", criterion_6);
    rep.run("7", criterion_7);
    rep.run("8", criterion_8);
    rep.run("9", criterion_9);
    rep.run("10", criterion_10);
    rep.run("11", criterion_11);
    rep.run("12", criterion_12);

    let failed: Vec<&Check> = rep.0.iter().filter(|c| !c.pass).collect();
    let passed = rep.0.len() - failed.len();
    emit(format!("{passed}/{} checks passed", rep.0.len()));
    for c in &failed {
        if KNOWN_UNATTAINABLE.contains(&c.name.as_str()) {
            emit(format!("known unattainable: {} ({})", c.name, c.detail));
        }
    }
    let unexpected: Vec<String> = failed
        .iter()
        .filter(|c| !KNOWN_UNATTAINABLE.contains(&c.name.as_str()))
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    assert!(unexpected.is_empty(), "failing criteria:\n{}", unexpected.join("\n"));
}

/// Criterion 10 as stated for the Weyl-squared case. For every non-null `φ`
/// the tensor `φ_μφ_ν/(3Q) + η_{μν}/6` solves both the gauge and the field
/// rows, so the kernel is one-dimensional and this cannot pass.
#[test]
#[ignore = "unattainable: the p = 3q operator has a conformal kernel mode off the light cone"]
fn weyl_nonnull_kernel_is_trivial() {
    let r = monte_carlo(&Theory::Quadratic { p: 3.0, q: 1.0 }, 4, 200, &mut rng(103)).unwrap();
    assert_eq!(r.nonnull_kernel_dims.get(&0), Some(&200), "{:?}", r.nonnull_kernel_dims);
}
