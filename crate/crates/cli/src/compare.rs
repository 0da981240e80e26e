use std::collections::BTreeMap;
use std::fs::File;

use relbound::BoundCurve;
use serde_json::{json, Value};

use crate::args::CompareArgs;
use crate::error::CliError;
use crate::output::{num, report_path, write_atomic, write_json};

/// Rates equal to this relative precision count as the same grid point.
const GRID_TOL: f64 = 1e-12;

/// Which bound is smallest at every rate, and overall.
#[derive(Clone, Debug, PartialEq)]
pub struct Dominance {
    pub rates: Vec<f64>,
    /// Smallest bound per rate, or "tie".
    pub smallest: Vec<String>,
    /// The bound smallest at every rate where some bound is finite, "tie"
    /// when all curves agree there, "mixed" otherwise.
    pub overall: String,
}

pub fn load(args: &CompareArgs) -> Result<Vec<BoundCurve>, CliError> {
    let mut curves: Vec<BoundCurve> = Vec::new();
    for path in &args.input {
        let file = File::open(path).map_err(CliError::io(path))?;
        let read = BoundCurve::read_csv(file).map_err(|source| CliError::Input { path: path.clone(), source })?;
        for mut c in read.into_iter().filter(|c| args.bounds.is_empty() || args.bounds.contains(&c.bound_name)) {
            // keep names unique across files
            let base = c.bound_name.clone();
            let mut k = 2;
            while curves.iter().any(|o| o.bound_name == c.bound_name) {
                c.bound_name = format!("{base}#{k}");
                k += 1;
            }
            curves.push(c);
        }
    }
    if let Some(missing) = args.bounds.iter().find(|b| !curves.iter().any(|c| &c.bound_name == *b)) {
        return Err(CliError::Usage(format!("no curve named {missing:?} in the inputs")));
    }
    Ok(curves)
}

pub fn dominance(curves: &[BoundCurve], tol: f64) -> Result<Dominance, CliError> {
    let first = curves.first().ok_or_else(|| CliError::Usage("no curves to compare".into()))?;
    let rates = first.rates();
    for c in &curves[1..] {
        let other = c.rates();
        let same = other.len() == rates.len()
            && rates.iter().zip(&other).all(|(a, b)| (a - b).abs() <= GRID_TOL * a.abs().max(1.0));
        if !same {
            return Err(CliError::GridMismatch(format!("{} vs {}", first.bound_name, c.bound_name)));
        }
    }
    let mut smallest = Vec::with_capacity(rates.len());
    let mut finite_winners: Vec<&str> = Vec::new();
    for i in 0..rates.len() {
        let values: Vec<f64> = curves.iter().map(|c| c.points[i].e).collect();
        let min = values.iter().copied().filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min);
        let at_min: Vec<usize> =
            (0..values.len()).filter(|&k| values[k] == min || (values[k] - min).abs() <= tol).collect();
        let label = if at_min.len() == 1 { curves[at_min[0]].bound_name.as_str() } else { "tie" };
        if min.is_finite() {
            finite_winners.push(label);
        }
        smallest.push(label.to_string());
    }
    let overall = match finite_winners.first() {
        Some(&w) if finite_winners.iter().all(|&x| x == w) => w.to_string(),
        Some(_) => "mixed".to_string(),
        None => "tie".to_string(),
    };
    Ok(Dominance { rates, smallest, overall })
}

/// Writes the merged table to `--out` and the summary beside it.
pub fn run(args: &CompareArgs) -> Result<Dominance, CliError> {
    let json_path = report_path(&args.out)?;
    let curves = load(args)?;
    let dom = dominance(&curves, args.tol)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Core(relbound::Error::Format(e.to_string()));
    let mut header = vec!["R".to_string()];
    header.extend(curves.iter().map(|c| c.bound_name.clone()));
    header.push("smallest".into());
    w.write_record(&header).map_err(csv_err)?;
    for (i, &r) in dom.rates.iter().enumerate() {
        let mut row = vec![relbound::infinite::format(r)];
        row.extend(curves.iter().map(|c| relbound::infinite::format(c.points[i].e)));
        row.push(dom.smallest[i].clone());
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Core(relbound::Error::Format(e.to_string())))?;
    write_atomic(&args.out, &bytes)?;

    let mut wins: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &dom.smallest {
        *wins.entry(s.as_str()).or_default() += 1;
    }
    let summary = json!({
        "bounds": curves.iter().map(|c| c.bound_name.clone()).collect::<Vec<_>>(),
        "inputs": args.input.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "dominance": dom.overall,
        "wins": wins,
        "per_rate": dom.rates.iter().zip(&dom.smallest)
            .map(|(&r, s)| json!({ "R": num(r), "smallest": s }))
            .collect::<Vec<Value>>(),
        "tol": args.tol,
    });
    write_json(&json_path, &summary)?;
    Ok(dom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Map;

    fn curve(name: &str, points: &[(f64, f64)]) -> BoundCurve {
        let mut c = BoundCurve::new(name);
        for &(r, e) in points {
            c.push(r, e, Map::new());
        }
        c
    }

    #[test]
    fn identical_curves_tie() {
        let a = curve("a", &[(0.1, 2.0), (0.2, 1.0)]);
        let b = curve("b", &[(0.1, 2.0), (0.2, 1.0)]);
        assert_eq!(dominance(&[a, b], 1e-9).unwrap().overall, "tie");
    }

    #[test]
    fn disjoint_grids_mismatch() {
        let a = curve("a", &[(0.1, 2.0), (0.2, 1.0)]);
        let b = curve("b", &[(0.3, 2.0), (0.4, 1.0)]);
        assert!(matches!(dominance(&[a, b], 1e-9), Err(CliError::GridMismatch(_))));
    }

    #[test]
    fn smaller_curve_dominates_where_finite() {
        let a = curve("a", &[(0.1, f64::INFINITY), (0.2, 1.0), (0.3, 0.5)]);
        let b = curve("b", &[(0.1, f64::INFINITY), (0.2, 2.0), (0.3, 0.7)]);
        let d = dominance(&[a, b], 1e-9).unwrap();
        assert_eq!(d.overall, "a");
        assert_eq!(d.smallest, ["tie", "a", "a"]);
    }
}
