//! Acceptance suite. Runs without the libtest harness so each criterion
//! prints exactly one PASS/FAIL line.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::process::{Command as Process, ExitCode};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rectify_nd::curves::{Curve, CurveSpec};
use rectify_nd::frenet::frenet_frame;
use rectify_nd::frenetode::{integrate, CurvatureProfile};
use rectify_nd::jets::Jet;
use rectify_nd::job::{run, JobOutcome, JobSpec, RunOptions};
use rectify_nd::rectify::{
    constant_curvature_condition, constant_curvature_mu, kappa_last_closed_form, mu_forward_oracle,
    mu_recursion, RectifyingReport, Verdict,
};

type Check = Result<String, String>;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn run_job(file: &str, out: &Path) -> Result<JobOutcome, String> {
    let path = corpus_dir().join(file);
    let job = JobSpec::load(&path).map_err(|e| format!("{file}: {e}"))?;
    let command = job.command.ok_or_else(|| format!("{file}: no command"))?;
    let opts = RunOptions {
        out_dir: Some(out.to_path_buf()),
        base_dir: Some(corpus_dir()),
        ..Default::default()
    };
    let stem = file.trim_end_matches(".json");
    run(&job, command, stem, &opts).map_err(|e| format!("{file}: {}: {e}", e.name()))
}

fn report_of(file: &str, out: &Path) -> Result<RectifyingReport, String> {
    run_job(file, out)?
        .report
        .ok_or_else(|| format!("{file}: no report"))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sec_construction(out: &Path) -> Check {
    let mut worst: f64 = 0.0;
    for (file, count) in [
        ("e4-sec.json", 201),
        ("e5-sec.json", 200),
        ("e6-sec.json", 200),
    ] {
        let r = report_of(file, out)?;
        ensure(r.t.len() == count, || {
            format!("{file}: {} samples", r.t.len())
        })?;
        let fit = &r.rho2_fit;
        let coeff = (fit.constant - 1.0)
            .abs()
            .max(fit.linear.abs())
            .max((fit.quadratic - 1.0).abs());
        for (what, v) in [
            ("normal residual", r.normal_residual),
            ("rho2 coefficients", coeff),
            ("normal length std", r.normal_length_std),
            ("fitted c", r.c.abs()),
        ] {
            ensure(v < 1e-8, || format!("{file}: {what} {v:e}"))?;
            worst = worst.max(v);
        }
    }
    Ok(format!("E4/E5/E6 worst {worst:.1e} < 1e-8"))
}

fn falsification(out: &Path) -> Check {
    let r = report_of("linear-scaling.json", out)?;
    ensure(r.normal_residual > 1e-2, || {
        format!("normal residual {:e}", r.normal_residual)
    })?;
    let status = Process::new(env!("CARGO_BIN_EXE_rectify-nd"))
        .args(["analyze", "--job"])
        .arg(corpus_dir().join("linear-scaling.json"))
        .arg("--out-dir")
        .arg(out.join("cli"))
        .output()
        .map_err(|e| e.to_string())?
        .status;
    ensure(status.code() == Some(1), || format!("exit status {status}"))?;
    Ok(format!(
        "normal residual {:.3e} > 1e-2, exit 1",
        r.normal_residual
    ))
}

fn condition_agreement(out: &Path) -> Check {
    let outcome = run_job("all.json", out)?;
    let entries = outcome.corpus.ok_or("no corpus entries")?;
    let mut compared = 0;
    for e in &entries {
        if let Some(err) = &e.error {
            return Err(format!("{}: {err}", e.job));
        }
        if let (Some(a), Some(b)) = (e.components_verdict, e.condition_verdict) {
            ensure(a == b, || {
                format!("{}: components {a:?} vs condition {b:?}", e.job)
            })?;
            compared += 1;
        }
    }
    let rect = entries
        .iter()
        .filter(|e| e.components_verdict == Some(Verdict::Rectifying))
        .count();
    let non = entries
        .iter()
        .filter(|e| e.components_verdict == Some(Verdict::NotRectifying))
        .count();
    ensure(rect > 0 && non > 0, || {
        "corpus lacks one of the two classes".into()
    })?;
    Ok(format!(
        "{compared} curves, {rect} rectifying, {non} not, 0 disagreements"
    ))
}

fn random_jets(rng: &mut ChaCha8Rng, count: usize, s: f64, order: usize) -> Vec<Jet> {
    (0..count)
        .map(|_| {
            let mut d = vec![rng.gen_range(0.5..2.0)];
            d.extend((0..order).map(|_| rng.gen_range(-1.0..1.0)));
            Jet::new(s, d).unwrap()
        })
        .collect()
}

fn mu_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for n in 4..=7 {
        for _ in 0..100 {
            let s = rng.gen_range(-2.0..2.0);
            let c = rng.gen_range(-1.0..1.0);
            let kappas = random_jets(&mut rng, n - 1, s, n - 2);
            let table = mu_recursion(&kappas, c).map_err(|e| e.to_string())?;
            let oracle = mu_forward_oracle(&kappas, c).map_err(|e| e.to_string())?;
            for (a, b) in table.assembled().iter().zip(&oracle) {
                let scale = b.derivs().iter().fold(0.0f64, |m, x| m.max(x.abs()));
                for (x, y) in a.derivs().iter().zip(b.derivs()) {
                    let rel = (x - y).abs() / scale.max(f64::MIN_POSITIVE);
                    worst = worst.max(rel);
                }
            }
        }
    }
    ensure(worst < 1e-9, || format!("recursion vs oracle {worst:e}"))?;

    let mut closed: f64 = 0.0;
    for _ in 0..100 {
        let ks: Vec<f64> = (0..7).map(|_| rng.gen_range(0.5..2.0)).collect();
        let s = rng.gen_range(-2.0..2.0);
        let c = rng.gen_range(-1.0..1.0);
        let jets: Vec<Jet> = ks.iter().map(|&k| Jet::constant(s, k, 6)).collect();
        let table = mu_recursion(&jets, c).map_err(|e| e.to_string())?;
        let oracle = mu_forward_oracle(&jets, c).map_err(|e| e.to_string())?;
        for i in 1..=6 {
            let expect = constant_curvature_mu(&ks, i, s, c);
            for got in [table.mu(i).value(), oracle[i - 1].value()] {
                closed = closed.max((got - expect).abs() / expect.abs().max(1.0));
            }
        }
    }
    ensure(closed < 1e-12, || format!("closed forms {closed:e}"))?;
    Ok(format!(
        "oracle {worst:.1e} < 1e-9, closed forms {closed:.1e} < 1e-12"
    ))
}

fn nonexistence(out: &Path) -> Check {
    let mut notes = Vec::new();
    for file in ["e4-helix.json", "e5-helix.json"] {
        let r = report_of(file, out)?;
        let ratio = r.fixed_point_residual / r.rho_rms;
        ensure(ratio > 0.1, || {
            format!("{file}: fixed point residual {ratio:e}·ρ_rms")
        })?;
        let values = r
            .condition_values
            .as_ref()
            .ok_or_else(|| format!("{file}: no condition"))?;
        let mut dev: f64 = 0.0;
        for j in 0..r.t.len() {
            let expect = constant_curvature_condition(&r.curvatures[j], r.s[j], r.c);
            if r.dimension % 2 == 1 {
                ensure(expect > 0.0 && values[j] > 0.0, || {
                    format!("{file}: sum not positive")
                })?;
            }
            dev = dev.max((values[j] - expect).abs());
        }
        ensure(dev < 1e-6, || format!("{file}: condition off by {dev:e}"))?;
        notes.push(format!(
            "n={} fp {ratio:.2}·ρ_rms cond dev {dev:.1e}",
            r.dimension
        ));
    }
    Ok(notes.join("; "))
}

fn closed_form_profiles(out: &Path) -> Check {
    let mut worst: f64 = 0.0;
    for file in ["e4-case-i.json", "e4-case-ii.json", "e6-even.json"] {
        let r = report_of(file, out)?;
        let beta = r
            .beta
            .as_ref()
            .ok_or_else(|| format!("{file}: no beta"))?
            .max_deviation;
        ensure(beta < 1e-6, || format!("{file}: beta deviation {beta:e}"))?;
        ensure(r.fixed_point_residual < 1e-6, || {
            format!("{file}: fixed point residual {:e}", r.fixed_point_residual)
        })?;
        worst = worst.max(beta).max(r.fixed_point_residual);
    }
    Ok(format!("case (i), case (ii), E6 worst {worst:.1e} < 1e-6"))
}

fn frenet_engine() -> Check {
    let (a, b) = (1.5, 0.8);
    let helix = Curve::new(CurveSpec::explicit(
        &[
            &format!("{a}*cos(t)"),
            &format!("{a}*sin(t)"),
            &format!("{b}*t"),
        ],
        (-3.0, 3.0),
    ))
    .map_err(|e| e.to_string())?;
    let (k1, k2) = (a / (a * a + b * b), b / (a * a + b * b));
    let mut curv: f64 = 0.0;
    let mut ortho: f64 = 0.0;
    let mut recon: f64 = 0.0;
    for i in 0..=60 {
        let t = -3.0 + 0.1 * i as f64;
        let fd = frenet_frame(&helix.evaluate(t, 6).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let k = fd.curvature_values();
        curv = curv.max((k[0] - k1).abs()).max((k[1] - k2).abs());
        ortho = ortho.max(fd.orthonormality_defect());
        recon = recon.max(fd.reconstruction_residual().map_err(|e| e.to_string())?);
    }

    // a generic E⁴ curve and a reparameterization of it
    let comps = ["cos(t)", "sin(2*t)", "t^2/2", "t^3/3"];
    let phi = "(t+0.2*t^3)";
    let base = Curve::new(CurveSpec::explicit(&comps, (-2.0, 2.0))).map_err(|e| e.to_string())?;
    let sub: Vec<String> = comps.iter().map(|c| c.replace('t', phi)).collect();
    let sub_refs: Vec<&str> = sub.iter().map(String::as_str).collect();
    let reparam =
        Curve::new(CurveSpec::explicit(&sub_refs, (-1.0, 1.0))).map_err(|e| e.to_string())?;
    let mut invariance: f64 = 0.0;
    for i in 0..=20 {
        let u: f64 = -0.9 + 0.09 * i as f64;
        let t = u + 0.2 * u.powi(3);
        let f0 = frenet_frame(&base.evaluate(t, 7).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let f1 = frenet_frame(&reparam.evaluate(u, 7).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        ortho = ortho
            .max(f0.orthonormality_defect())
            .max(f1.orthonormality_defect());
        recon = recon.max(f0.reconstruction_residual().map_err(|e| e.to_string())?);
        for (x, y) in f0.curvatures.iter().zip(&f1.curvatures) {
            for (p, q) in x.derivs().iter().zip(y.derivs()) {
                invariance = invariance.max((p - q).abs() / p.abs().max(1.0));
            }
        }
    }
    ensure(curv < 1e-9, || format!("helix curvatures off by {curv:e}"))?;
    ensure(ortho < 1e-10, || format!("orthonormality {ortho:e}"))?;
    ensure(recon < 1e-8, || format!("reconstruction {recon:e}"))?;
    ensure(invariance < 1e-8, || {
        format!("reparameterization {invariance:e}")
    })?;
    Ok(format!(
        "helix {curv:.1e}, ortho {ortho:.1e}, reconstruction {recon:.1e}, reparam {invariance:.1e}"
    ))
}

fn ode_consistency() -> Check {
    let profile: CurvatureProfile = kappa_last_closed_form(4, &[1.0, 1.0], 1.0, 0.0, 1.0)
        .map_err(|e| e.to_string())?
        .profile;
    let (lo, hi) = (-0.9, 0.9);
    let end = |h: f64| -> Result<Vec<f64>, String> {
        let ic = integrate(&profile, lo, hi, h).map_err(|e| e.to_string())?;
        Ok(ic.samples().last().unwrap().point.clone())
    };
    let reference = end(0.9 / 1024.0)?;
    let errs: Vec<f64> = [0.9 / 16.0, 0.9 / 32.0, 0.9 / 64.0]
        .iter()
        .map(|&h| {
            end(h).map(|p| {
                p.iter()
                    .zip(&reference)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
        })
        .collect::<Result<_, _>>()?;
    let order = errs
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min);
    ensure(order >= 3.7, || {
        format!("observed order {order:.3} ({errs:?})")
    })?;

    // curvatures recovered from stored positions alone
    let ic = integrate(&profile, lo, hi, 1e-3).map_err(|e| e.to_string())?;
    let (half, stride) = (6, 40);
    let mut recovery: f64 = 0.0;
    let mut idx = half * stride;
    while idx + half * stride < ic.samples().len() {
        let jet = ic
            .sampled_jet(idx, 5, half, stride)
            .map_err(|e| e.to_string())?;
        let fd = frenet_frame(&jet).map_err(|e| e.to_string())?;
        let want = profile
            .values(ic.samples()[idx].s)
            .map_err(|e| e.to_string())?;
        for (g, w) in fd.curvature_values().iter().zip(&want) {
            recovery = recovery.max((g - w).abs());
        }
        idx += 25;
    }
    ensure(recovery < 1e-6, || {
        format!("curvature recovery {recovery:e}")
    })?;
    Ok(format!(
        "RK4 order {order:.2} >= 3.7, recovery {recovery:.1e} < 1e-6"
    ))
}

/// Central differences of orders 1 to 4, three Richardson levels.
fn fd_derivative(f: &dyn Fn(f64) -> f64, x: f64, k: usize, h: f64) -> f64 {
    let d = |h: f64| -> f64 {
        let v = |j: f64| f(x + j * h);
        match k {
            1 => (v(1.0) - v(-1.0)) / (2.0 * h),
            2 => (v(1.0) - 2.0 * v(0.0) + v(-1.0)) / (h * h),
            3 => (v(2.0) - 2.0 * v(1.0) + 2.0 * v(-1.0) - v(-2.0)) / (2.0 * h.powi(3)),
            4 => (v(2.0) - 4.0 * v(1.0) + 6.0 * v(0.0) - 4.0 * v(-1.0) + v(-2.0)) / h.powi(4),
            _ => unreachable!(),
        }
    };
    let r1 = |h: f64| (4.0 * d(h / 2.0) - d(h)) / 3.0;
    let r2 = |h: f64| (16.0 * r1(h / 2.0) - r1(h)) / 15.0;
    (64.0 * r2(h / 2.0) - r2(h)) / 63.0
}

type JetFn = fn(&Jet) -> Jet;

fn jet_oracle() -> Check {
    // last field: distance from x to the nearest singularity, which bounds the stencil width
    let cases: Vec<(&str, JetFn, fn(f64) -> f64, (f64, f64), fn(f64) -> f64)> = vec![
        ("exp", |j| j.exp(), f64::exp, (-2.0, 2.0), |_| 2.0),
        ("ln", |j| j.ln().unwrap(), f64::ln, (0.3, 3.0), |x| x),
        ("sin", |j| j.sin(), f64::sin, (-3.0, 3.0), |_| 2.0),
        ("cos", |j| j.cos(), f64::cos, (-3.0, 3.0), |_| 2.0),
        (
            "tan",
            |j| j.tan().unwrap(),
            f64::tan,
            (-1.1, 1.1),
            |x| FRAC_PI_2 - x.abs(),
        ),
        (
            "sec",
            |j| j.sec().unwrap(),
            |x| 1.0 / x.cos(),
            (-1.1, 1.1),
            |x| FRAC_PI_2 - x.abs(),
        ),
        ("sqrt", |j| j.sqrt().unwrap(), f64::sqrt, (0.3, 3.0), |x| x),
        (
            "recip",
            |j| j.recip().unwrap(),
            |x| 1.0 / x,
            (0.3, 3.0),
            |x| x,
        ),
        (
            "powf",
            |j| j.powf(2.5).unwrap(),
            |x| x.powf(2.5),
            (0.3, 3.0),
            |x| x,
        ),
        (
            "powi",
            |j| j.powi(-3).unwrap(),
            |x| x.powi(-3),
            (0.3, 3.0),
            |x| x,
        ),
        (
            "mul",
            |j| j * &j.sin(),
            |x| x * x.sin(),
            (-3.0, 3.0),
            |_| 2.0,
        ),
        (
            "div",
            |j| j.exp().checked_div(&(j * j).add_scalar(1.0)).unwrap(),
            |x| x.exp() / (1.0 + x * x),
            (-2.0, 2.0),
            |x| (1.0 + x * x).sqrt(),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for (name, jf, f, (lo, hi), reach) in &cases {
        for _ in 0..1000 {
            let x = rng.gen_range(*lo..*hi);
            let jet = jf(&Jet::variable(x, 4));
            ensure(
                (jet.value() - f(x)).abs() <= 1e-12 * f(x).abs().max(1.0),
                || format!("{name} value at {x}"),
            )?;
            for k in 1..=4 {
                let exact = jet.derivs()[k];
                let approx = fd_derivative(f, x, k, 0.08 * reach(x));
                let rel = (exact - approx).abs() / exact.abs().max(1.0);
                ensure(rel < 1e-6, || {
                    format!("{name} order {k} at {x}: {exact} vs {approx}")
                })?;
                worst = worst.max(rel);
            }
        }
    }
    Ok(format!(
        "{} functions x 1000 points, worst {worst:.1e} < 1e-6",
        cases.len()
    ))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let out = dir.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check>)> = vec![
        (
            "sec-construction certification",
            Box::new(|| sec_construction(out)),
        ),
        (
            "falsification of linear scaling",
            Box::new(|| falsification(out)),
        ),
        (
            "condition matches decomposition",
            Box::new(|| condition_agreement(out)),
        ),
        ("mu oracle equivalence", Box::new(mu_oracle)),
        (
            "nonexistence for constant curvatures",
            Box::new(|| nonexistence(out)),
        ),
        (
            "constant-curvature closed forms",
            Box::new(|| closed_form_profiles(out)),
        ),
        ("frenet engine", Box::new(frenet_engine)),
        ("ODE self-consistency", Box::new(ode_consistency)),
        ("jet oracle", Box::new(jet_oracle)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
