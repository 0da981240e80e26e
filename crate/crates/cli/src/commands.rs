use relbound::divergence::{bhattacharyya_distance, chernoff_distance, fidelity_distance, mu};
use relbound::exponents::{
    cutoff_rate, r_infinity, r_infinity_classical, radius_certificate, zero_rate, Expurgated, Gallager,
};
use relbound::hypotest::{best_sgb_thresholds, hoeffding_exponent, sgb_thresholds};
use relbound::linalg::{CMatrix, Spectrum};
use relbound::theta::{
    confusability_graph, lovasz_theta, sp_umbrella_curve, theta_rho, theta_sp_probe, umbrella_curve, Coefficient,
    Representation, ThetaProfile,
};
use relbound::{BoundCurve, CQChannel, ExponentReport};
use serde_json::{json, Map, Value};

use crate::args::{Grid, JobArgs};
use crate::error::{is_numerical, CliError};
use crate::input::{parse_inputs, Input};
use crate::output::{num, nums, report_path, write_curves, write_json, write_table};

/// Default s-grid for the threshold bounds.
const S_STEPS: usize = 19;

/// Settings and solver failures shared by every job.
pub struct Job<'a> {
    pub command: &'static str,
    pub args: &'a JobArgs,
    pub failures: Vec<String>,
    /// Largest |reported − re-evaluated| over all checked values.
    recheck: f64,
}

impl<'a> Job<'a> {
    pub fn new(command: &'static str, args: &'a JobArgs) -> Self {
        Job { command, args, failures: Vec::new(), recheck: 0.0 }
    }

    /// Numerical failures are recorded and yield `None`; other errors abort.
    fn attempt<T>(&mut self, what: impl std::fmt::Display, r: relbound::Result<T>) -> Result<Option<T>, CliError> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(e) if is_numerical(&e) => {
                self.failures.push(format!("{what}: {e}"));
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    }

    fn check(&mut self, reported: f64, recomputed: f64) {
        if reported.is_finite() {
            self.recheck = self.recheck.max((reported - recomputed).abs());
        }
    }

    fn grid(&self, grid: &Option<Grid>, flag: &str) -> Result<Vec<f64>, CliError> {
        grid.as_ref()
            .map(|g| g.0.clone())
            .ok_or_else(|| CliError::Usage(format!("`{}` needs {flag}", self.command)))
    }

    /// Adds settings, status and the re-evaluation residual to a report.
    fn finish(&mut self, mut report: Value) -> Value {
        if self.recheck > self.args.tol {
            self.failures.push(format!("re-evaluation residual {:e} exceeds --tol {:e}", self.recheck, self.args.tol));
        }
        let obj = report.as_object_mut().expect("reports are objects");
        obj.insert(
            "settings".into(),
            json!({
                "command": self.command,
                "input": self.args.input.display().to_string(),
                "seed": self.args.seed,
                "tol": self.args.tol,
                "threads": rayon::current_num_threads(),
                "version": env!("CARGO_PKG_VERSION"),
            }),
        );
        obj.insert("recheck_residual".into(), num(self.recheck));
        obj.insert("status".into(), json!(if self.failures.is_empty() { "ok" } else { "no_convergence" }));
        obj.insert("failures".into(), json!(self.failures));
        report
    }
}

pub fn run(job: &mut Job) -> Result<(), CliError> {
    let input = parse_inputs(&job.args.input)?;
    match job.command {
        "divergence" => divergence(job, &input.channel()?),
        "exponent" => exponent(job, &input.channel()?),
        "radius" => radius(job, &input.channel()?),
        "theta" => theta(job, &input),
        "umbrella" | "spumbrella" => umbrella(job, &input.channel()?),
        "hypotest" => hypotest(job, &input.channel()?),
        "report" => report(job, &input),
        other => unreachable!("unknown command {other}"),
    }
}

fn csv_and_report(job: &mut Job, report: Value, write_csv: impl FnOnce() -> Result<(), CliError>) -> Result<(), CliError> {
    let json_path = report_path(&job.args.out)?;
    write_csv()?;
    let report = job.finish(report);
    write_json(&json_path, &report)
}

fn divergence(job: &mut Job, ch: &CQChannel) -> Result<(), CliError> {
    let s_grid = job.args.s.as_ref().map(|g| g.0.clone()).unwrap_or_default();
    let mut header: Vec<String> =
        ["x", "x2", "fidelity", "bhattacharyya", "chernoff", "s_star"].iter().map(|s| s.to_string()).collect();
    header.extend(s_grid.iter().map(|s| format!("mu({s})")));
    let (mut rows, mut pairs) = (Vec::new(), Vec::new());
    for x in 0..ch.inputs() {
        for y in x + 1..ch.inputs() {
            let (a, b) = (ch.state(x), ch.state(y));
            let c = chernoff_distance(a, b);
            let mus = s_grid.iter().map(|&s| mu(a, b, s)).collect::<relbound::Result<Vec<f64>>>()?;
            let mut row = vec![x as f64, y as f64, fidelity_distance(a, b), bhattacharyya_distance(a, b), c.distance, c.s_star];
            row.extend(&mus);
            pairs.push(json!({
                "x": x, "x2": y,
                "fidelity": num(row[2]), "bhattacharyya": num(row[3]),
                "chernoff": num(c.distance), "s_star": num(c.s_star),
                "s": nums(&s_grid), "mu": nums(&mus),
            }));
            rows.push(row);
        }
    }
    let out = job.args.out.clone();
    csv_and_report(job, json!({ "pairs": pairs }), || write_table(&out, &header, &rows))
}

fn exponent_params(rep: &ExponentReport) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("rho".into(), num(rep.parameter));
    m.insert("p".into(), nums(rep.optimizer_p.as_slice()));
    m.insert("certificate".into(), serde_json::to_value(&rep.certificate).expect("certificates serialize"));
    m
}

fn exponent(job: &mut Job, ch: &CQChannel) -> Result<(), CliError> {
    let rates = job.grid(&job.args.rates, "--R")?;
    let (gal, ex) = (Gallager::new(ch), Expurgated::new(ch));
    job.attempt("E0 grid", gal.warm())?;
    let mut curves = vec![BoundCurve::new("esp"), BoundCurve::new("er"), BoundCurve::new("eex")];
    for &r in &rates {
        for curve in curves.iter_mut() {
            let name = curve.bound_name.clone();
            let rep = match name.as_str() {
                "esp" => gal.esp(r),
                "er" => gal.er(r),
                _ => ex.eex(r),
            };
            match job.attempt(format_args!("{name} at R = {r}"), rep)? {
                Some(rep) => {
                    if rep.value.is_finite() {
                        let (rho, p) = (rep.parameter, rep.optimizer_p.as_slice());
                        let base = if name == "eex" { ex.ex(rho, p) } else { gal.e0(rho, p) };
                        job.check(rep.value, (base - rho * r).max(0.0));
                    }
                    curve.push(r, rep.value, exponent_params(&rep));
                }
                None => curve.push(r, f64::NAN, failed_point()),
            }
        }
    }
    let r_inf = job.attempt("R_inf", gal.r_infinity())?;
    let report = json!({
        "r_infinity": r_inf.map_or(Value::Null, num),
        "curves": curves,
    });
    let out = job.args.out.clone();
    csv_and_report(job, report, || write_curves(&out, &curves))
}

fn failed_point() -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("converged".into(), Value::Bool(false));
    m
}

fn radius(job: &mut Job, ch: &CQChannel) -> Result<(), CliError> {
    let rhos = job.grid(&job.args.rho, "--rho")?;
    let gal = Gallager::new(ch);
    let header: Vec<String> = ["rho", "r_rho", "max_divergence", "residual"].iter().map(|s| s.to_string()).collect();
    let (mut rows, mut certs) = (Vec::new(), Vec::new());
    for &rho in &rhos {
        match job.attempt(format_args!("radius at rho = {rho}"), radius_certificate(ch, rho))? {
            Some(c) => {
                rows.push(vec![rho, c.r_rho, c.max_divergence, c.residual]);
                job.check(c.r_rho, gal.e0(rho, c.p.as_slice()) / rho);
                certs.push(serde_json::to_value(&c).expect("certificates serialize"));
            }
            None => {
                rows.push(vec![rho, f64::NAN, f64::NAN, f64::NAN]);
                certs.push(json!({ "rho": num(rho), "converged": false }));
            }
        }
    }
    let out = job.args.out.clone();
    csv_and_report(job, json!({ "certificates": certs }), || write_table(&out, &header, &rows))
}

fn representation_json(rep: &Representation) -> Value {
    let mut v = serde_json::to_value(rep).expect("representations serialize");
    v.as_object_mut().expect("object").insert("dim".into(), json!(rep.dim()));
    v
}

fn theta(job: &mut Job, input: &Input) -> Result<(), CliError> {
    let header = vec!["rho".to_string(), "theta".to_string()];
    let out = job.args.out.clone();
    let ch = match input {
        Input::Graph(g) => {
            let (value, rep) = lovasz_theta(g)?;
            let probe = if job.args.trials > 0 { Some(theta_sp_probe(g, job.args.trials, job.args.seed)?) } else { None };
            let report = json!({
                "lovasz": num(value),
                "representation": representation_json(&rep),
                "probe": probe,
            });
            return csv_and_report(job, report, || write_table(&out, &header, &[vec![f64::INFINITY, value]]));
        }
        Input::Channel(_) => input.channel()?,
    };
    let (rhos, values, reps, onset) = match &job.args.rho {
        Some(Grid(rhos)) => {
            let mut values = Vec::new();
            let mut reps = Vec::new();
            for &rho in rhos {
                let (v, rep) = theta_rho(&ch, rho)?;
                values.push(v);
                reps.push(rep);
            }
            (rhos.clone(), values, reps, None)
        }
        None => {
            let p = ThetaProfile::compute(&ch)?;
            (p.rhos, p.values, p.reps, p.plateau_onset)
        }
    };
    let (lovasz, _) = lovasz_theta(&confusability_graph(&ch))?;
    let points: Vec<Value> = rhos
        .iter()
        .zip(&values)
        .zip(&reps)
        .map(|((&rho, &v), rep)| json!({ "rho": num(rho), "theta": num(v), "representation": representation_json(rep) }))
        .collect();
    let rows: Vec<Vec<f64>> = rhos.iter().zip(&values).map(|(&r, &v)| vec![r, v]).collect();
    let report = json!({
        "lovasz": num(lovasz),
        "plateau_onset": onset.map_or(Value::Null, num),
        "points": points,
    });
    csv_and_report(job, report, || write_table(&out, &header, &rows))
}

fn umbrella(job: &mut Job, ch: &CQChannel) -> Result<(), CliError> {
    let rates = job.grid(&job.args.rates, "--R")?;
    let coefficient = Coefficient::from(job.args.coefficient);
    let (curve, c) = if job.command == "umbrella" {
        (job.attempt("umbrella", umbrella_curve(ch, &rates, coefficient))?, coefficient.resolve(ch))
    } else {
        (job.attempt("sp-umbrella", sp_umbrella_curve(ch, &rates))?, 2.0)
    };
    let curve = curve.unwrap_or_else(|| {
        let mut c = BoundCurve::new(job.command);
        for &r in &rates {
            c.push(r, f64::NAN, failed_point());
        }
        c
    });
    let out = job.args.out.clone();
    let report = json!({ "coefficient": c, "curve": curve });
    csv_and_report(job, report, || write_curves(&out, std::slice::from_ref(&curve)))
}

fn hypotest(job: &mut Job, ch: &CQChannel) -> Result<(), CliError> {
    let rates = job.grid(&job.args.rates, "--R")?;
    let (x, y) = (job.args.pair[0], job.args.pair[1]);
    if x >= ch.inputs() || y >= ch.inputs() || x == y {
        return Err(CliError::Usage(format!("--pair {x},{y} must name two distinct inputs below {}", ch.inputs())));
    }
    let (a, b) = (ch.state(x), ch.state(y));
    let s_grid = match &job.args.s {
        Some(g) => g.0.clone(),
        None => (1..=S_STEPS).map(|k| k as f64 / (S_STEPS + 1) as f64).collect(),
    };
    let thresholds = s_grid.iter().map(|&s| sgb_thresholds(a, b, s)).collect::<relbound::Result<Vec<_>>>()?;
    let best = best_sgb_thresholds(a, b, &s_grid)?;
    let mut curve = BoundCurve::new("hoeffding");
    for &r in &rates {
        curve.push(r, hoeffding_exponent(a, b, r)?, Map::new());
    }
    let c = chernoff_distance(a, b);
    let report = json!({
        "pair": [x, y],
        "chernoff": { "distance": num(c.distance), "s_star": num(c.s_star) },
        "thresholds": thresholds,
        "best_thresholds": best,
        "hoeffding": curve,
    });
    let out = job.args.out.clone();
    csv_and_report(job, report, || write_curves(&out, std::slice::from_ref(&curve)))
}

/// −log λ_max(Σ P(x) S_x⁰).
fn r_infinity_at(ch: &CQChannel, p: &[f64]) -> f64 {
    let d = ch.dim();
    let m = ch
        .states()
        .iter()
        .zip(p)
        .fold(CMatrix::zeros(d, d), |acc, (s, &w)| acc + s.support_projector().scale(w));
    -Spectrum::of(&m).max().ln()
}

fn report(job: &mut Job, input: &Input) -> Result<(), CliError> {
    let out = job.args.out.clone();
    let ch = match input {
        Input::Graph(g) => {
            let (lovasz, _) = lovasz_theta(g)?;
            let report = job.finish(json!({ "theta": num(lovasz) }));
            return write_json(&out, &report);
        }
        Input::Channel(_) => input.channel()?,
    };
    let ex = Expurgated::new(&ch);
    let g = ex.affinities().clone();
    let form = |k: &nalgebra::DMatrix<f64>, p: &[f64]| {
        (0..p.len()).flat_map(|a| (0..p.len()).map(move |b| (a, b))).map(|(a, b)| p[a] * p[b] * k[(a, b)]).sum::<f64>()
    };

    let r_inf = job.attempt("R_inf", r_infinity(&ch))?;
    if let Some(r) = &r_inf {
        job.check(r.value, r_infinity_at(&ch, r.optimizer_p.as_slice()).max(0.0));
    }
    let r_inf_lp = input.classical().map(r_infinity_classical);
    let (lovasz, _) = lovasz_theta(&confusability_graph(&ch))?;
    let (theta_1, _) = theta_rho(&ch, 1.0)?;
    let cutoff = match input.classical() {
        Some(w) => job.attempt("cutoff rate", cutoff_rate(w))?,
        None => None,
    };
    if let Some(c) = &cutoff {
        job.check(c.value, (-form(&g, c.optimizer_p.as_slice()).ln()).max(0.0));
    }
    let zr = zero_rate(&ch);
    if zr.value.is_finite() {
        job.check(zr.value, form(&g.map(|v| -v.ln()), zr.optimizer_p.as_slice()).max(0.0));
    }
    let report = json!({
        "inputs": ch.inputs(),
        "dim": ch.dim(),
        "r_infinity": r_inf.as_ref().map_or(Value::Null, |r| num(r.value)),
        "r_infinity_report": r_inf,
        "r_infinity_lp": r_inf_lp.as_ref().map(|r| num(r.value)),
        "theta": num(lovasz),
        "theta_1": num(theta_1),
        "cutoff": cutoff.as_ref().map_or(Value::Null, |c| num(c.value)),
        "cutoff_report": cutoff,
        "zero_rate": num(zr.value),
        "zero_rate_report": zr,
    });
    let report = job.finish(report);
    write_json(&out, &report)
}
