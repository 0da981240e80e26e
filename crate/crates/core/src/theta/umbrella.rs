use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::gram::{theta_rho, Representation};
use crate::channel::CQChannel;
use crate::divergence::pairwise_reversible;
use crate::error::{Error, Result};
use crate::exponents::{BoundCurve, Gallager};

pub const RHO_GRID_POINTS: usize = 60;
pub const RHO_GRID_MAX: f64 = 1e4;
/// ϑ(ρ) within this of ϑ(ρ_max) counts as frozen.
pub const PLATEAU_TOL: f64 = 1e-7;
const ONSET_RESOLUTION: f64 = 1e-4;

/// ϑ(ρ) on the umbrella ρ-grid, shared by both umbrella curves.
#[derive(Clone, Debug)]
pub struct ThetaProfile {
    pub rhos: Vec<f64>,
    pub values: Vec<f64>,
    pub reps: Vec<Representation>,
    /// Smallest ρ (to 1e-4) from which ϑ(ρ) stays at its ρ_max value; `None`
    /// when ϑ still moves at the end of the grid.
    pub plateau_onset: Option<f64>,
}

impl ThetaProfile {
    /// 60 log-spaced points in [1, 1e4] plus the plateau onset.
    pub fn compute(channel: &CQChannel) -> Result<Self> {
        let rhos = log_grid(1.0, RHO_GRID_MAX, RHO_GRID_POINTS);
        let solved: Vec<(f64, Representation)> =
            rhos.par_iter().map(|&rho| theta_rho(channel, rho)).collect::<Result<_>>()?;
        let (mut values, mut reps): (Vec<f64>, Vec<Representation>) = solved.into_iter().unzip();
        let mut rhos = rhos;
        let limit = *values.last().expect("nonempty grid");
        let frozen = |v: f64| v - limit <= PLATEAU_TOL;
        // index of the last grid point that still moves
        let first = (0..values.len()).rev().take_while(|&i| frozen(values[i])).last();
        let mut plateau_onset = None;
        if let Some(i) = first.filter(|&i| i + 1 < values.len()) {
            if i == 0 {
                plateau_onset = Some(rhos[0]);
            } else {
                let (mut lo, mut hi) = (rhos[i - 1], rhos[i]);
                let mut best = (hi, values[i], reps[i].clone());
                while hi - lo > ONSET_RESOLUTION {
                    let mid = 0.5 * (lo + hi);
                    let (v, rep) = theta_rho(channel, mid)?;
                    if frozen(v) {
                        hi = mid;
                        best = (mid, v, rep);
                    } else {
                        lo = mid;
                    }
                }
                let (rho, v, rep) = best;
                if rho < rhos[i] {
                    rhos.insert(i, rho);
                    values.insert(i, v);
                    reps.insert(i, rep);
                }
                plateau_onset = Some(rho);
            }
        }
        Ok(ThetaProfile { rhos, values, reps, plateau_onset })
    }

    /// ϑ(ρ) at the largest grid ρ.
    pub fn limit(&self) -> f64 {
        *self.values.last().expect("nonempty profile")
    }
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Multiplier of ρϑ(ρ) in the umbrella bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    /// 1 for pairwise reversible channels, 2 otherwise.
    Auto,
    General,
    Reversible,
}

impl Coefficient {
    pub fn resolve(self, channel: &CQChannel) -> f64 {
        match self {
            Coefficient::General => 2.0,
            Coefficient::Reversible => 1.0,
            Coefficient::Auto if pairwise_reversible(channel) => 1.0,
            Coefficient::Auto => 2.0,
        }
    }
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.is_empty() {
        return Err(Error::Empty { what: "rate grid" });
    }
    if r_grid.iter().any(|r| !(r > &0.0 && r.is_finite())) || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("rates must be positive, finite and strictly increasing".into()));
    }
    Ok(())
}

/// min over the ρ-grid of c·ρ·ϑ(ρ) among ρ with ϑ(ρ) < R; ∞ when none qualifies.
pub fn umbrella_curve(channel: &CQChannel, r_grid: &[f64], coefficient: Coefficient) -> Result<BoundCurve> {
    if !(channel.is_commuting() || channel.is_pure()) {
        return Err(Error::InvalidArgument("umbrella bound needs a classical or pure-state channel".into()));
    }
    check_grid(r_grid)?;
    let profile = ThetaProfile::compute(channel)?;
    Ok(umbrella_from_profile(&profile, r_grid, coefficient.resolve(channel)))
}

pub fn umbrella_from_profile(profile: &ThetaProfile, r_grid: &[f64], coefficient: f64) -> BoundCurve {
    let mut curve = BoundCurve::new("umbrella");
    curve.params.insert("coefficient".into(), json!(coefficient));
    curve.params.insert("rho_grid_points".into(), json!(profile.rhos.len()));
    curve.params.insert("plateau_onset".into(), json!(profile.plateau_onset));
    for &r in r_grid {
        let best = profile
            .rhos
            .iter()
            .zip(&profile.values)
            .filter(|(_, &v)| v < r)
            .map(|(&rho, &v)| (coefficient * rho * v, rho))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let mut params = Map::new();
        match best {
            Some((e, rho)) => {
                params.insert("rho".into(), json!(rho));
                curve.push(r, e, params);
            }
            None => curve.push(r, f64::INFINITY, params),
        }
    }
    curve
}

/// min over ρ of ρ(Ẽ_sp(R) + R), with Ẽ_sp the sphere-packing exponent of
/// the pure-state channel factorized from the ϑ(ρ)-optimal Gram matrix.
///
/// Since the reliability function is non-increasing, each ρ also offers its
/// infimum over R' ∈ (R̃_∞, R], which includes 2ρR̃_∞ (the limit of
/// Ẽ_sp + R at R̃_∞ for pure states), and grid values at smaller rates.
pub fn sp_umbrella_curve(channel: &CQChannel, r_grid: &[f64]) -> Result<BoundCurve> {
    check_grid(r_grid)?;
    let profile = ThetaProfile::compute(channel)?;
    sp_umbrella_from_profile(&profile, r_grid)
}

pub fn sp_umbrella_from_profile(profile: &ThetaProfile, r_grid: &[f64]) -> Result<BoundCurve> {
    check_grid(r_grid)?;
    let aux: Vec<CQChannel> = profile.reps.iter().map(Representation::to_channel).collect::<Result<_>>()?;
    let engines: Vec<Gallager> = aux.iter().map(Gallager::new).collect();
    let r_inf: Vec<f64> = engines.par_iter().map(|g| g.r_infinity()).collect::<Result<_>>()?;

    let mut curve = BoundCurve::new("spumbrella");
    curve.params.insert("rho_grid_points".into(), json!(profile.rhos.len()));
    curve.params.insert("plateau_onset".into(), json!(profile.plateau_onset));
    curve.params.insert("auxiliary_family".into(), json!("theta_rho_gram_factorization"));
    let mut running = (f64::INFINITY, Value::Null);
    for &r in r_grid {
        let (mut best, mut arg) = running.clone();
        for (i, &rho) in profile.rhos.iter().enumerate() {
            let ri = r_inf[i];
            if r <= ri {
                continue;
            }
            // every candidate at this ρ is at least ρ·min(R, 2R̃_∞)
            if rho * r.min(2.0 * ri) >= best {
                continue;
            }
            if 2.0 * rho * ri < best {
                best = 2.0 * rho * ri;
                arg = json!({ "rho": rho, "aux_r_infinity": ri, "at": "r_infinity" });
            }
            if rho * r < best {
                let e = engines[i].esp(r)?.value;
                if rho * (e + r) < best {
                    best = rho * (e + r);
                    arg = json!({ "rho": rho, "aux_r_infinity": ri, "aux_esp": e });
                }
            }
        }
        running = (best, arg.clone());
        let mut params = Map::new();
        if let Value::Object(m) = arg {
            params = m;
        }
        curve.push(r, best, params);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{classical_embed, pure_state_lift, ClassicalChannel};

    #[test]
    fn typewriter_profile_freezes_near_2_88() {
        let ch = pure_state_lift(&ClassicalChannel::noisy_typewriter(5, 0.5));
        let p = ThetaProfile::compute(&ch).unwrap();
        let onset = p.plateau_onset.unwrap();
        assert!((2.7..=3.1).contains(&onset), "onset {onset}");
        assert!((p.limit() - 0.5 * 5f64.ln()).abs() < 1e-6);
        assert!(p.values.windows(2).all(|w| w[1] <= w[0] + 1e-8));
    }

    #[test]
    fn typewriter_umbrella() {
        let ch = pure_state_lift(&ClassicalChannel::noisy_typewriter(5, 0.5));
        let c = umbrella_curve(&ch, &[0.5, 0.8, 0.9], Coefficient::General).unwrap();
        let e = c.values();
        assert!(e[0].is_infinite() && e[1].is_infinite());
        assert!(e[2] <= 2.0 * 3.0 * 0.5 * 5f64.ln() + 1e-6);
    }

    #[test]
    fn bsc_umbrella_just_above_cutoff() {
        let ch = classical_embed(&ClassicalChannel::bsc(0.1));
        let c = umbrella_curve(&ch, &[0.2232], Coefficient::General).unwrap();
        assert!((c.values()[0] - 2.0 * 0.2231435513).abs() < 1e-5);
        assert_eq!(Coefficient::Auto.resolve(&ch), 1.0);
        let c = umbrella_curve(&ch, &[0.2232], Coefficient::Auto).unwrap();
        assert!((c.values()[0] - 0.2231435513).abs() < 1e-5);
    }

    #[test]
    fn sp_umbrella_below_general_umbrella() {
        let ch = classical_embed(&ClassicalChannel::bsc(0.1));
        let p = ThetaProfile::compute(&ch).unwrap();
        let grid = [0.01, 0.1, 0.2, 0.3, 0.5];
        let u = umbrella_from_profile(&p, &grid, 2.0);
        let s = sp_umbrella_from_profile(&p, &grid).unwrap();
        for (a, b) in s.values().iter().zip(u.values()) {
            assert!(a.is_finite());
            assert!(*a <= b + 1e-6);
        }
        assert!(s.is_non_increasing(1e-12));
    }

    #[test]
    fn rejects_general_cq_channel() {
        let ch = crate::random::cq_channel(3, 2, &mut crate::random::rng(4));
        assert!(umbrella_curve(&ch, &[0.5], Coefficient::Auto).is_err());
    }
}
