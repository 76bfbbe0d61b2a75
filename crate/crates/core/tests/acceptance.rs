//! Acceptance suite. Each criterion prints one PASS/FAIL line to stderr
//! and the test fails if any criterion does. Trained networks and the
//! network-viscosity mesh series are computed once and shared.

use std::cell::OnceCell;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rheoflow::experiments::{
    fit_carreau, perturbation_check, plateau_from_series, reference_rates_from_series,
    solve_icnn_series, synthetic_dataset, synthetic_shear_thinning_specs, CarreauFit,
    FitFamilyConfig, IcnnSeries, PlateauStudy, CARREAU_RANGE,
};
use rheoflow::fem::{
    build_mesh, convergence_study, newton_solve, FeSpace, ManufacturedCase, NewtonConfig,
    StokesProblem, DOMAIN_MAX, DOMAIN_MIN,
};
use rheoflow::icnn::{check_convexity_structural, load_model, project_weights, DEFAULT_EPSILON_PROJ};
use rheoflow::rheology::{carreau_deriv, carreau_eval, stress_eval};
use rheoflow::verifier::{residuals, sample_grid, verify};
use rheoflow::{CarreauParams, IcnnModel, SymTensor2, VerifierConfig, ViscosityModel};

const INDICES: [f64; 5] = [1.2, 1.6, 2.0, 2.4, 2.8];
const PLATEAU_MESHES: [usize; 5] = [8, 16, 32, 64, 96];
const SELF_CONVERGENCE_MESHES: [usize; 3] = [8, 16, 32];
const FIT_TIME_LIMIT: Duration = Duration::from_secs(300);
const VERIFY_TIME_LIMIT: Duration = Duration::from_secs(120);

type Outcome = Result<String, String>;

/// Collects failed checks of one criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn outcome(self) -> Outcome {
        if self.failures.is_empty() {
            Ok(self.notes.join("; "))
        } else {
            Err(format!(
                "failed: {}; passed: {}",
                self.failures.join("; "),
                self.notes.join("; ")
            ))
        }
    }
}

struct DatasetRun {
    name: String,
    model: PathBuf,
    r_squared: f64,
    satisfied: bool,
    shear_range: (f64, f64),
}

struct Shared {
    work: tempfile::TempDir,
    fits: OnceCell<Vec<(CarreauFit, Duration)>>,
    series: OnceCell<Vec<IcnnSeries>>,
    datasets: OnceCell<Result<Vec<DatasetRun>, String>>,
}

impl Shared {
    fn new() -> Self {
        Self {
            work: tempfile::tempdir().unwrap(),
            fits: OnceCell::new(),
            series: OnceCell::new(),
            datasets: OnceCell::new(),
        }
    }

    fn fits(&self) -> &[(CarreauFit, Duration)] {
        self.fits.get_or_init(|| {
            INDICES
                .iter()
                .map(|&n| {
                    let start = Instant::now();
                    let fit = fit_carreau(n, &FitFamilyConfig::default()).expect("Carreau fit");
                    (fit, start.elapsed())
                })
                .collect()
        })
    }

    fn fit(&self, n: f64) -> &CarreauFit {
        &self.fits().iter().find(|(f, _)| f.n == n).unwrap().0
    }

    fn series(&self) -> &[IcnnSeries] {
        self.series.get_or_init(|| {
            INDICES
                .iter()
                .map(|&n| {
                    solve_icnn_series(
                        &self.fit(n).model,
                        CarreauParams::reference(n),
                        2,
                        &PLATEAU_MESHES,
                        &NewtonConfig::default(),
                    )
                    .expect("network-viscosity series")
                })
                .collect()
        })
    }

    fn datasets(&self) -> &Result<Vec<DatasetRun>, String> {
        self.datasets.get_or_init(|| run_dataset_pipeline(self.work.path()))
    }
}

fn rheoflow(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rheoflow"))
        .args(args)
        .env_remove("RHEOFLOW_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "rheoflow {} exited with {:?}: {}",
            args.first().unwrap_or(&""),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn read_json(path: &Path) -> Result<serde_json::Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Writes the synthetic datasets and runs `fit` then `verify` on each.
fn run_dataset_pipeline(dir: &Path) -> Result<Vec<DatasetRun>, String> {
    let mut runs = Vec::new();
    for (i, spec) in synthetic_shear_thinning_specs().iter().enumerate() {
        let data = synthetic_dataset(spec, i as u64).map_err(|e| e.to_string())?;
        let csv = dir.join(format!("{}.csv", spec.name));
        data.save_csv(&csv).map_err(|e| e.to_string())?;
        let model = dir.join(format!("{}.model.json", spec.name));
        let cert = dir.join(format!("{}.cert.json", spec.name));
        let p = |x: &Path| x.to_str().unwrap().to_string();
        rheoflow(&["fit", &p(&csv), "--out", &p(&model)])?;
        let max = data.max_shear_rate();
        let min = data.samples.iter().map(|s| s.shear_rate).fold(f64::INFINITY, f64::min);
        let verified = rheoflow(&["verify", &p(&model), "--t-max", &max.to_string(), "--out", &p(&cert)]);
        let fit_report = read_json(&model.with_extension("fit.json"))?;
        let certificate = read_json(&cert)?;
        runs.push(DatasetRun {
            name: spec.name.clone(),
            model,
            r_squared: fit_report["r_squared"].as_f64().unwrap_or(f64::NAN),
            satisfied: verified.is_ok() && certificate["satisfied"] == true,
            shear_range: (min, max),
        });
    }
    Ok(runs)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.3}"))
}

fn criterion_1() -> Outcome {
    let mut c = Checks::default();
    for r in INDICES {
        let model = ViscosityModel::carreau(CarreauParams::reference(r));
        let table = convergence_study(&model, &[2], &[8, 16, 32, 64], r, &NewtonConfig::default())
            .map_err(|e| e.to_string())?;
        if table.has_failures() {
            c.check(false, format!("r={r}: a solve failed"));
            continue;
        }
        let last = table.rows.last().unwrap();
        let (ru, rp) = (last.rate_u.unwrap(), last.rate_p.unwrap());
        c.check(
            (ru - 2.0).abs() <= 0.10,
            format!("r={r} velocity rate {ru:.3}"),
        );
        c.check(rp >= 2.0, format!("r={r} pressure rate {rp:.3}"));
    }
    c.outcome()
}

fn criterion_2() -> Outcome {
    let mut c = Checks::default();
    let model = ViscosityModel::carreau(CarreauParams::reference(2.0));
    let case = ManufacturedCase::reference();
    let space = FeSpace::new(build_mesh(8).unwrap(), 2).unwrap();
    let (_, report) = newton_solve(&space, &model, &model, &case, &NewtonConfig::default(), None)
        .map_err(|e| e.to_string())?;
    c.check(
        report.iterations <= 2,
        format!("{} Newton iterations", report.iterations),
    );
    let problem = StokesProblem::new(&space, &model, &model, &case);
    let n = problem.n_unknowns();
    let a: Vec<f64> = (0..n).map(|i| ((i * 7919) % 1000) as f64 / 500.0 - 1.0).collect();
    let b: Vec<f64> = (0..n).map(|i| ((i * 104729) % 997) as f64 / 99.7 - 5.0).collect();
    let (ja, jb) = (problem.jacobian_values(&a), problem.jacobian_values(&b));
    let scale = ja.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let gap = ja
        .iter()
        .zip(&jb)
        .fold(0.0f64, |s, (p, q)| s.max((p - q).abs()));
    c.check(
        gap <= 1e-13 * scale,
        format!("Jacobian difference {:.1e} relative", gap / scale),
    );
    c.outcome()
}

fn criterion_3(shared: &Shared) -> Outcome {
    let mut c = Checks::default();
    for (n, ceiling) in [(2.0, 1e-4), (1.2, 4.1e-2), (2.8, 6.9e-2)] {
        let (fit, time) = shared.fits().iter().find(|(f, _)| f.n == n).unwrap();
        c.check(
            fit.l2_error <= ceiling,
            format!("n={n} L2 {:.2e} (ceiling {ceiling:.1e})", fit.l2_error),
        );
        c.check(
            *time <= FIT_TIME_LIMIT,
            format!("n={n} fit took {:.0} s", time.as_secs_f64()),
        );
    }
    c.outcome()
}

/// Smallest `chord − midpoint` over 1000 random triples in `[lo, hi]` for the
/// convex part `sign · model`.
fn jensen_slack(model: &IcnnModel, lo: f64, hi: f64, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let g = |t: f64| model.branch.sign() * model.eval_scalar(t);
    (0..1000)
        .map(|_| {
            let a = rng.random_range(lo..=hi);
            let b = rng.random_range(lo..=hi);
            let l: f64 = rng.random_range(0.0..=1.0);
            l * g(a) + (1.0 - l) * g(b) - g(l * a + (1.0 - l) * b)
        })
        .fold(f64::INFINITY, f64::min)
}

fn bitwise_equal(a: &IcnnModel, b: &IcnnModel) -> bool {
    a.layers.iter().zip(&b.layers).all(|(x, y)| {
        x.weights
            .iter()
            .zip(y.weights.iter())
            .chain(x.bias.iter().zip(y.bias.iter()))
            .all(|(p, q)| p.to_bits() == q.to_bits())
    })
}

fn criterion_4(shared: &Shared) -> Outcome {
    let mut c = Checks::default();
    let mut models: Vec<(String, IcnnModel, f64, f64)> = shared
        .fits()
        .iter()
        .map(|(f, _)| (format!("carreau n={}", f.n), f.model.clone(), 0.0, CARREAU_RANGE))
        .collect();
    match shared.datasets() {
        Ok(runs) => {
            for run in runs {
                let m = load_model(&run.model).map_err(|e| e.to_string())?;
                models.push((run.name.clone(), m, run.shear_range.0, run.shear_range.1));
            }
        }
        Err(e) => c.check(false, format!("dataset models unavailable: {e}")),
    }
    for (i, (name, model, lo, hi)) in models.iter().enumerate() {
        c.check(check_convexity_structural(model), format!("{name} structural"));
        let slack = jensen_slack(model, *lo, *hi, i as u64);
        c.check(slack >= -1e-9, format!("{name} Jensen slack {slack:.1e}"));
        let mut once = model.clone();
        project_weights(&mut once, DEFAULT_EPSILON_PROJ);
        let mut twice = once.clone();
        project_weights(&mut twice, DEFAULT_EPSILON_PROJ);
        c.check(bitwise_equal(&once, &twice), format!("{name} projection idempotent"));
    }
    c.outcome()
}

fn criterion_5() -> Outcome {
    let mut c = Checks::default();
    for (n, r_range, alpha_max) in [(1.6, (1.45, 1.75), Some(0.2)), (2.0, (1.95, 2.05), None)] {
        let model = ViscosityModel::carreau(CarreauParams::reference(n));
        let cfg = VerifierConfig::default();
        let start = Instant::now();
        let cert = verify(&model, &cfg).map_err(|e| e.to_string())?;
        let time = start.elapsed();
        let k = cert.constants;
        c.check(cert.satisfied, format!("n={n} satisfied={}", cert.satisfied));
        c.check(
            (r_range.0..=r_range.1).contains(&k.r),
            format!("n={n} r={:.3}", k.r),
        );
        if let Some(a) = alpha_max {
            c.check(k.alpha <= a, format!("n={n} alpha={:.3}", k.alpha));
        }
        c.check(
            time <= VERIFY_TIME_LIMIT,
            format!("n={n} took {:.0} s", time.as_secs_f64()),
        );
        let dense = VerifierConfig {
            n_samples: 400,
            seed: 0xD15EA5E,
            ..cfg.clone()
        };
        let (t, s) = sample_grid(&dense);
        let worst = residuals(&model, &t, &s, &k)
            .map_err(|e| e.to_string())?
            .worst()
            .min();
        c.check(
            worst >= -10.0 * cfg.feas_tol,
            format!("n={n} dense-grid worst residual {worst:.1e}"),
        );
    }
    c.outcome()
}

fn criterion_6(shared: &Shared) -> Outcome {
    let mut c = Checks::default();
    let studies: Vec<PlateauStudy> = shared
        .series()
        .iter()
        .map(|s| plateau_from_series(s, &shared.fit(s.r()).model))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let by_r = |r: f64| studies.iter().find(|s| s.r == r).unwrap();
    for s in &studies {
        let errs: Vec<String> = s.rows.iter().map(|row| format!("{:.2e}", row.err_u)).collect();
        c.notes.push(format!(
            "r={} err_u [{}] gap {:.3e}",
            s.r,
            errs.join(", "),
            s.k_gap_inf
        ));
    }

    let flat = by_r(1.2);
    let n = flat.rows.len();
    for k in [n - 2, n - 1] {
        let gain = 1.0 - flat.rows[k].err_u / flat.rows[k - 1].err_u;
        c.check(
            gain < 0.30,
            format!("r=1.2 refinement to m={} improves err_u by {:.1}%", flat.rows[k].m, 100.0 * gain),
        );
    }

    let newtonian = by_r(2.0);
    let rates: Vec<String> = newtonian.rows.iter().map(|r| fmt_opt(r.rate_u)).collect();
    c.check(
        newtonian
            .rows
            .iter()
            .filter_map(|r| r.rate_u)
            .all(|q| (1.7..=2.3).contains(&q)),
        format!("r=2 velocity rates [{}]", rates.join(", ")),
    );

    let order = |key: &dyn Fn(&PlateauStudy) -> f64| {
        let mut idx: Vec<usize> = (0..studies.len()).collect();
        idx.sort_by(|&a, &b| key(&studies[a]).total_cmp(&key(&studies[b])));
        idx.iter().map(|&i| studies[i].r).collect::<Vec<f64>>()
    };
    let by_err = order(&|s| s.eps_icnn_u);
    let by_gap = order(&|s| s.k_gap_inf);
    c.check(
        by_err == by_gap,
        format!("ranking by err_u {by_err:?} vs by gap {by_gap:?}"),
    );
    c.check(
        by_err[0] == 2.0 && by_gap[0] == 2.0,
        "both minimal at r=2".into(),
    );

    let ratios: Vec<(f64, f64)> = studies
        .iter()
        .filter(|s| s.r != 2.0)
        .map(|s| (s.r, s.eps_icnn_u / s.k_gap_inf))
        .collect();
    let log_c = ratios.iter().map(|(_, q)| q.ln()).sum::<f64>() / ratios.len() as f64;
    let fitted = log_c.exp();
    let factor = ratios
        .iter()
        .map(|(_, q)| (q.ln() - log_c).abs().exp())
        .fold(1.0f64, f64::max);
    c.check(
        factor <= 10.0,
        format!("err <= c*gap with c={fitted:.3}, max residual factor {factor:.2}"),
    );

    for s in &studies {
        let rates: Vec<f64> = s
            .rows
            .iter()
            .zip(s.rows.iter().skip(1))
            .filter(|(coarse, _)| coarse.err_u >= 10.0 * s.eps_icnn_u)
            .filter_map(|(_, fine)| fine.rate_u)
            .collect();
        c.check(
            rates.iter().all(|q| (1.7..=2.3).contains(q)),
            format!("r={} pre-plateau rates {rates:.3?}", s.r),
        );
    }
    c.outcome()
}

fn criterion_7(shared: &Shared) -> Outcome {
    let mut c = Checks::default();
    let reference = *PLATEAU_MESHES.last().unwrap();
    for series in shared.series() {
        let table = reference_rates_from_series(series, &SELF_CONVERGENCE_MESHES, reference)
            .map_err(|e| e.to_string())?;
        let rates: Vec<f64> = table.rows.iter().filter_map(|r| r.rate_u).collect();
        c.check(
            !rates.is_empty() && rates.iter().all(|q| (1.8..=2.2).contains(q)),
            format!("r={} rates toward m={reference}: {rates:.3?}", series.r()),
        );
    }
    c.outcome()
}

fn criterion_8() -> Outcome {
    let mut c = Checks::default();
    let deltas = [0.2, 0.1, 0.05, 0.025];
    let check = perturbation_check(
        CarreauParams::reference(1.6),
        &deltas,
        2,
        32,
        &NewtonConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    for j in 0..2 {
        let ratios: Vec<f64> = check.rows.iter().filter_map(|r| r.ratio_u[j]).collect();
        let spread = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            / ratios.iter().copied().fold(f64::INFINITY, f64::min);
        c.check(
            ratios.len() == deltas.len() && spread <= 5.0,
            format!("ratio spread with strains of u{} {spread:.3}", j + 1),
        );
    }
    let lhs: Vec<f64> = check.rows.iter().map(|r| r.lhs_u).collect();
    c.check(
        lhs.windows(2).all(|w| w[1] < w[0]),
        format!(
            "lhs_u [{}] decreasing with delta",
            lhs.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    );
    c.outcome()
}

fn criterion_9() -> Outcome {
    let mut c = Checks::default();

    let mut worst: f64 = 0.0;
    for n in [1.2, 1.6, 2.0, 2.4, 2.8] {
        let p = CarreauParams::reference(n);
        for t in [0.05, 0.3, 1.0, 3.7, 12.0, 55.0] {
            let h = 1e-6 * t;
            let fd = (carreau_eval(t + h, &p) - carreau_eval(t - h, &p)) / (2.0 * h);
            let d = carreau_deriv(t, &p);
            worst = worst.max((fd - d).abs() / d.abs().max(1e-8));
        }
    }
    c.check(worst <= 1e-6, format!("carreau_deriv relative gap {worst:.1e}"));

    let net = {
        let mut m = IcnnModel::init(&[1, 12, 6, 1], rheoflow::icnn::Activation::Softplus, 5).unwrap();
        project_weights(&mut m, DEFAULT_EPSILON_PROJ);
        ViscosityModel::icnn(m)
    };
    let laws = [
        ("carreau", ViscosityModel::carreau(CarreauParams::reference(1.6))),
        ("network", net.clone()),
    ];
    let mut worst: f64 = 0.0;
    for (_, law) in &laws {
        for (e, d) in [
            (SymTensor2::new(0.3, -0.7, 1.1), SymTensor2::new(1.0, 0.2, -0.4)),
            (SymTensor2::new(-2.0, 0.5, 0.1), SymTensor2::new(-0.3, 0.9, 0.6)),
        ] {
            let h = 1e-6;
            let s = stress_eval(law, &e);
            let exact = s.directional(&e, &d);
            let fd = stress_eval(law, &e.add(&d.scale(h)))
                .tau
                .add(&stress_eval(law, &e.add(&d.scale(-h))).tau.scale(-1.0))
                .scale(0.5 / h);
            worst = worst.max(fd.add(&exact.scale(-1.0)).norm() / exact.norm());
        }
    }
    c.check(worst <= 1e-5, format!("stress derivative relative gap {worst:.1e}"));

    let space = FeSpace::new(build_mesh(3).unwrap(), 2).unwrap();
    let case = ManufacturedCase::reference();
    let mut worst: f64 = 0.0;
    for (_, law) in &laws {
        let problem = StokesProblem::new(&space, law, law, &case);
        let n = problem.n_unknowns();
        let x: Vec<f64> = (0..n).map(|i| ((i * 37) % 17) as f64 / 8.0 - 1.0).collect();
        let v: Vec<f64> = (0..n).map(|i| ((i * 53) % 13) as f64 / 6.0 - 1.0).collect();
        let jv = problem.jacobian_matvec(&x, &v);
        let h = 1e-6;
        let plus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
        let (rp, rm) = (problem.residual(&plus), problem.residual(&minus));
        let num: f64 = jv
            .iter()
            .zip(rp.iter().zip(&rm))
            .map(|(j, (p, m))| (j - (p - m) / (2.0 * h)).powi(2))
            .sum::<f64>()
            .sqrt();
        let den: f64 = jv.iter().map(|j| j * j).sum::<f64>().sqrt();
        worst = worst.max(num / den);
    }
    c.check(worst <= 1e-5, format!("Jacobian relative gap {worst:.1e}"));

    let mut div: f64 = 0.0;
    let mut grad_gap: f64 = 0.0;
    for i in 0..50 {
        let x = [
            DOMAIN_MIN + (i as f64 * 0.618_034).fract(),
            DOMAIN_MIN + (i as f64 * 0.414_214 + 0.1).fract(),
        ];
        let g = (case.velocity_grad)(x);
        div = div.max((g[0][0] + g[1][1]).abs());
        let h = 1e-6;
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let (up, um) = ((case.velocity)(xp), (case.velocity)(xm));
            for comp in 0..2 {
                let fd = (up[comp] - um[comp]) / (2.0 * h);
                grad_gap = grad_gap.max((fd - g[comp][k]).abs());
            }
        }
    }
    c.check(div <= 1e-12, format!("max |div u| {div:.1e}"));
    c.check(grad_gap <= 1e-6, format!("velocity gradient gap {grad_gap:.1e}"));
    // ∫∫ sin(x + y) over the square: closed form
    // (cos(a+a) − 2cos(a+b) + cos(b+b)) with a, b the interval ends, up to sign
    let (a, b) = (DOMAIN_MIN, DOMAIN_MAX);
    let mean = -((2.0 * b).sin() - 2.0 * (a + b).sin() + (2.0 * a).sin());
    let quad: f64 = {
        let (nodes, weights) = rheoflow::fem::gauss_legendre(12);
        let mut s = 0.0;
        for (xi, wi) in nodes.iter().zip(&weights) {
            for (yj, wj) in nodes.iter().zip(&weights) {
                let p = [a + (b - a) * xi, a + (b - a) * yj];
                s += wi * wj * (case.pressure)(p) * (b - a) * (b - a);
            }
        }
        s
    };
    c.check(
        mean.abs() <= 1e-15 && quad.abs() <= 1e-13,
        format!("pressure mean {mean:.1e} (closed form), {quad:.1e} (quadrature)"),
    );

    for m in [1, 4, 7, 16] {
        let mesh = build_mesh(m).unwrap();
        let area: f64 = (0..mesh.n_triangles()).map(|t| mesh.area(t)).sum();
        let space = FeSpace::new(mesh.clone(), 2).unwrap();
        let ok = mesh.n_triangles() == 2 * m * m
            && mesh.vertices.len() == (m + 1) * (m + 1)
            && mesh.boundary_edges().len() == 4 * m
            && (area - 1.0).abs() < 1e-13
            && space.velocity.n_dofs == (2 * m + 1) * (2 * m + 1)
            && space.pressure.n_dofs == (m + 1) * (m + 1);
        c.check(ok, format!("mesh identities m={m}"));
    }
    c.outcome()
}

fn criterion_10(shared: &Shared) -> Outcome {
    let mut c = Checks::default();
    let runs = shared.datasets().as_ref().map_err(|e| e.clone())?;
    for run in runs {
        c.check(
            run.satisfied && run.r_squared >= 0.99,
            format!(
                "{}: R2 {:.4}, satisfied={}",
                run.name, run.r_squared, run.satisfied
            ),
        );
    }
    c.outcome()
}

fn report(id: usize, title: &str, start: Instant, outcome: &Outcome) {
    let (tag, detail) = match outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    let mut err = std::io::stderr();
    let _ = writeln!(
        err,
        "criterion {id:>2} [{tag}] {title} ({:.0} s): {detail}",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn acceptance() {
    let shared = Shared::new();
    let criteria: Vec<(&str, Box<dyn Fn(&Shared) -> Outcome>)> = vec![
        ("convergence rates for Carreau laws", Box::new(|_| criterion_1())),
        ("Newtonian solve and constant Jacobian", Box::new(|_| criterion_2())),
        ("network fit quality", Box::new(criterion_3)),
        ("convexity of trained networks", Box::new(criterion_4)),
        ("certificates for analytic Carreau laws", Box::new(|_| criterion_5())),
        ("error plateau with network viscosities", Box::new(criterion_6)),
        ("self-convergence of network-viscosity solves", Box::new(criterion_7)),
        ("perturbation bound", Box::new(|_| criterion_8())),
        ("oracle checks", Box::new(|_| criterion_9())),
        ("synthetic dataset pipeline", Box::new(criterion_10)),
    ];
    let mut failed = Vec::new();
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run(&shared);
        report(i + 1, title, start, &outcome);
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
