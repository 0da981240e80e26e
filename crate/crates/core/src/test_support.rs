use crate::channel::{CQChannel, ClassicalChannel};
use crate::random;

pub fn random_cq_channel(inputs: usize, d: usize, seed: u64) -> CQChannel {
    random::cq_channel(inputs, d, &mut random::rng(seed))
}

/// Capacity in nats by alternating maximization, stopped when the upper and
/// lower bounds agree to 1e-10.
pub fn blahut_arimoto(w: &ClassicalChannel) -> f64 {
    let (nx, ny) = (w.inputs(), w.outputs());
    let mut p = vec![1.0 / nx as f64; nx];
    loop {
        let q: Vec<f64> = (0..ny).map(|y| (0..nx).map(|x| p[x] * w.prob(x, y)).sum()).collect();
        let d: Vec<f64> = (0..nx)
            .map(|x| {
                (0..ny)
                    .filter(|&y| w.prob(x, y) > 0.0)
                    .map(|y| w.prob(x, y) * (w.prob(x, y) / q[y]).ln())
                    .sum()
            })
            .collect();
        let lower: f64 = (0..nx).map(|x| p[x] * d[x]).sum();
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < 1e-10 {
            return lower;
        }
        let z: f64 = (0..nx).map(|x| p[x] * d[x].exp()).sum();
        p = (0..nx).map(|x| p[x] * d[x].exp() / z).collect();
    }
}
