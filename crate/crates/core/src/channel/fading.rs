use num_complex::Complex64;

use crate::engine::{RngStream, SimTime};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `T_c = 0.423 / f_D` with Doppler `f_D = v·fc/c`.
pub fn coherence_time_s(fc_ghz: f64, speed_mps: f64) -> f64 {
    0.423 * SPEED_OF_LIGHT / (fc_ghz * 1e9 * speed_mps)
}

/// Small-scale fading with a LOS (Rician) or purely diffuse (Rayleigh)
/// component. The diffuse part is a first-order Gauss–Markov process with
/// correlation `exp(-Δt / T_c)` between samples; mean power is 1.
#[derive(Clone, Debug)]
pub struct FadingProcess {
    enabled: bool,
    los_amplitude: f64,
    diffuse_amplitude: f64,
    coherence_s: f64,
    diffuse: Complex64,
    last: Option<SimTime>,
    rng: RngStream,
}

impl FadingProcess {
    pub fn rician(k_db: f64, coherence_s: f64, rng: RngStream) -> Self {
        let k = 10f64.powf(k_db / 10.0);
        FadingProcess {
            enabled: true,
            los_amplitude: (k / (k + 1.0)).sqrt(),
            diffuse_amplitude: (1.0 / (k + 1.0)).sqrt(),
            coherence_s,
            diffuse: Complex64::new(0.0, 0.0),
            last: None,
            rng,
        }
    }

    pub fn rayleigh(coherence_s: f64, rng: RngStream) -> Self {
        FadingProcess {
            los_amplitude: 0.0,
            diffuse_amplitude: 1.0,
            ..Self::rician(0.0, coherence_s, rng)
        }
    }

    pub fn disabled(rng: RngStream) -> Self {
        FadingProcess {
            enabled: false,
            ..Self::rayleigh(1.0, rng)
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn coherence_s(&self) -> f64 {
        self.coherence_s
    }

    fn complex_normal(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(self.rng.standard_normal() * s, self.rng.standard_normal() * s)
    }

    /// Linear power gain at time `t`. Samples must be taken at
    /// nondecreasing times.
    pub fn sample(&mut self, t: SimTime) -> f64 {
        if !self.enabled {
            return 1.0;
        }
        self.diffuse = match self.last {
            None => self.complex_normal(),
            Some(prev) => {
                let dt = t.saturating_sub(prev).as_secs_f64();
                let rho = (-dt / self.coherence_s).exp();
                let w = self.complex_normal();
                self.diffuse * rho + w * (1.0 - rho * rho).sqrt()
            }
        };
        self.last = Some(t);
        (self.diffuse * self.diffuse_amplitude + self.los_amplitude).norm_sqr()
    }

    pub fn sample_db(&mut self, t: SimTime) -> f64 {
        10.0 * self.sample(t).log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disabled_is_zero_db() {
        let mut f = FadingProcess::disabled(RngStream::new(1, "fading"));
        for k in 0..100 {
            assert_eq!(f.sample_db(SimTime::from_micros(k * 125)), 0.0);
        }
    }

    #[test]
    fn coherence_time_at_28ghz_20mps() {
        let tc = coherence_time_s(28.0, 20.0);
        assert!((tc - 226.4e-6).abs() < 0.5e-6, "{tc}");
    }

    fn mean_power(mut f: FadingProcess, step: SimTime, n: u64) -> f64 {
        (0..n).map(|k| f.sample(SimTime::from_nanos(k * step.as_nanos()))).sum::<f64>() / n as f64
    }

    #[test]
    fn unit_mean_power() {
        let tc = coherence_time_s(28.0, 20.0);
        let n = 1_000_000;
        let step = SimTime::from_millis(1);
        let ray = mean_power(FadingProcess::rayleigh(tc, RngStream::new(9, "fading.a")), step, n);
        let ric = mean_power(FadingProcess::rician(9.0, tc, RngStream::new(9, "fading.b")), step, n);
        assert!((0.99..=1.01).contains(&ray), "rayleigh {ray}");
        assert!((0.99..=1.01).contains(&ric), "rician {ric}");
    }

    #[test]
    fn short_lag_is_highly_correlated() {
        let tc = coherence_time_s(28.0, 20.0);
        let mut f = FadingProcess::rayleigh(tc, RngStream::new(4, "fading"));
        let lag = SimTime::from_secs_f64(0.01 * tc).unwrap();
        let pairs: Vec<(f64, f64)> = (0..100_000u64)
            .map(|k| {
                // widely separated pairs, each at a short lag
                let t0 = SimTime::from_millis(10 * k);
                (f.sample(t0), f.sample(t0 + lag))
            })
            .collect();
        let n = pairs.len() as f64;
        let (ma, mb) = pairs.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
        let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
        for (a, b) in &pairs {
            cov += (a - ma) * (b - mb);
            va += (a - ma).powi(2);
            vb += (b - mb).powi(2);
        }
        let corr = cov / (va * vb).sqrt();
        assert!(corr > 0.9, "corr = {corr}");
    }

    #[test]
    fn rician_fades_are_shallower_than_rayleigh() {
        let tc = 1e-4;
        let step = SimTime::from_millis(1);
        let mut ray = FadingProcess::rayleigh(tc, RngStream::new(2, "fading.a"));
        let mut ric = FadingProcess::rician(9.0, tc, RngStream::new(2, "fading.b"));
        let deep = |f: &mut FadingProcess| {
            (0..100_000u64)
                .filter(|&k| f.sample(SimTime::from_nanos(k * step.as_nanos())) < 0.1)
                .count()
        };
        assert!(deep(&mut ric) * 10 < deep(&mut ray));
    }
}
