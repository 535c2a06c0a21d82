use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const SLOTS_PER_DAY: usize = 96;
/// Day of year of the first generated day.
pub const START_DAY_OF_YEAR: usize = 120;
pub const HEATWAVE_TAG: &str = "#heatwave";
pub const LOAD_FEATURES: [&str; 4] = ["time_of_day", "day_of_week", "temperature", "temperature_lag"];

const KNEE: f64 = 22.0;
const TAU: f64 = 10.0;

/// Load response to temperature: convex and increasing up to the knee,
/// concave and still increasing above it.
pub fn temperature_response(t: f64) -> f64 {
    let s = 80.0 / 27.0;
    if t <= KNEE {
        let u = (t + 5.0).max(0.0) / 27.0;
        40.0 * u * u
    } else {
        40.0 + s * TAU * (1.0 - (-(t - KNEE) / TAU).exp())
    }
}

fn daily_profile(hour: f64) -> f64 {
    let g = |c: f64, w: f64| (-((hour - c) / w).powi(2)).exp();
    -12.0 * g(3.5, 2.5) + 14.0 * g(11.0, 2.5) + 18.0 * g(19.0, 2.0)
}

/// Synthetic quarter-hourly load with a seasonal temperature cycle and rare
/// heat waves. Rows of heat-wave days carry [`HEATWAVE_TAG`] in their id.
pub fn gen_synthetic_load(days: usize, seed: u64) -> Result<Dataset> {
    if days < 7 {
        return Err(Error::validation(format!("synthetic load needs at least 7 days, got {days}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let day_noise = Normal::new(0.0, 1.5).expect("valid sd");
    let load_noise = Normal::new(0.0, 2.0).expect("valid sd");

    let mut heat = vec![0.0f64; days];
    let mut d = 0;
    while d < days {
        if rng.random::<f64>() < 0.02 {
            let len = 2 + rng.random_range(0..3usize);
            let peak = 8.0 + 4.0 * rng.random::<f64>();
            for h in heat.iter_mut().skip(d).take(len) {
                *h = peak;
            }
            d += len + 5;
        } else {
            d += 1;
        }
    }
    if heat.iter().all(|&h| h == 0.0) {
        let start = rng.random_range(0..days - 2);
        for h in &mut heat[start..start + 2] {
            *h = 10.0;
        }
    }

    let n = days * SLOTS_PER_DAY;
    let mut cols: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(n)).collect();
    let mut target = Vec::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    let mut temps = Vec::with_capacity(n);
    for (day, &extra) in heat.iter().enumerate() {
        let doy = (START_DAY_OF_YEAR + day) % 365;
        let season = 15.0 + 12.0 * (2.0 * std::f64::consts::PI * (doy as f64 - 110.0) / 365.0).sin();
        let mean_t = season + day_noise.sample(&mut rng) + extra;
        let dow = (day % 7) as f64;
        for slot in 0..SLOTS_PER_DAY {
            let hour = slot as f64 * 0.25;
            let t = mean_t + 5.0 * (2.0 * std::f64::consts::PI * (hour - 9.0) / 24.0).sin();
            let i = temps.len();
            temps.push(t);
            let lag = if i >= SLOTS_PER_DAY { temps[i - SLOTS_PER_DAY] } else { t };
            let weekend = if dow >= 5.0 { -10.0 } else { 0.0 };
            let y = 100.0
                + daily_profile(hour)
                + weekend
                + temperature_response(t)
                + 0.4 * (lag - 15.0)
                + load_noise.sample(&mut rng);
            cols[0].push(hour);
            cols[1].push(dow);
            cols[2].push(t);
            cols[3].push(lag);
            target.push(y);
            let tag = if extra > 0.0 { HEATWAVE_TAG } else { "" };
            ids.push(format!("d{day:04}-{slot:02}{tag}"));
        }
    }
    Dataset::new(LOAD_FEATURES.iter().map(|s| s.to_string()).collect(), cols, target, None)?.with_row_ids(ids)
}

/// Row indices whose id carries [`HEATWAVE_TAG`].
pub fn heatwave_rows(d: &Dataset) -> Vec<usize> {
    d.row_ids()
        .map(|ids| {
            ids.iter()
                .enumerate()
                .filter(|(_, id)| id.ends_with(HEATWAVE_TAG))
                .map(|(i, _)| i)
                .collect()
        })
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_and_determinism() {
        let a = gen_synthetic_load(30, 5).unwrap();
        assert_eq!(a.n_rows(), 30 * 96);
        assert_eq!(a, gen_synthetic_load(30, 5).unwrap());
        assert_ne!(a.target(), gen_synthetic_load(30, 6).unwrap().target());
        assert!(a.target().iter().all(|&y| y > 0.0));
        assert!(!heatwave_rows(&a).is_empty());
    }

    #[test]
    fn too_few_days() {
        assert!(gen_synthetic_load(6, 0).is_err());
    }

    #[test]
    fn response_shape() {
        let ts: Vec<f64> = (-50..=450).map(|i| i as f64 * 0.1).collect();
        let r: Vec<f64> = ts.iter().map(|&t| temperature_response(t)).collect();
        assert!(r.windows(2).all(|w| w[1] >= w[0]));
        let slope = |t: f64| (temperature_response(t + 1e-4) - temperature_response(t - 1e-4)) / 2e-4;
        assert!(slope(10.0) > slope(0.0));
        assert!(slope(35.0) < slope(25.0));
        assert!((slope(KNEE - 1e-3) - slope(KNEE + 1e-3)).abs() < 1e-2);
    }
}
