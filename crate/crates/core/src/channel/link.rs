use super::beam::{AntennaArray, Vec3};
use super::fading::{coherence_time_s, FadingProcess};
use super::{ChannelCondition, ChannelError, ChannelParams, PropagationScenario};
use crate::engine::{SimTime, Streams};

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// `−174 dBm/Hz + 10·log10(B) + NF`
pub fn thermal_noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// `S / (N + ΣI)` in dB, all inputs in dBm.
pub fn sinr_db<I>(signal_dbm: f64, interferers_dbm: I, noise_dbm: f64) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let interference: f64 = interferers_dbm.into_iter().map(dbm_to_mw).sum();
    mw_to_dbm(dbm_to_mw(signal_dbm) / (dbm_to_mw(noise_dbm) + interference))
}

/// The additive dB terms that make up a received power.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub pathloss_db: f64,
    pub shadowing_db: f64,
    pub blockage_db: f64,
    pub fading_db: f64,
}

impl LinkBudget {
    pub fn rx_power_dbm(&self) -> f64 {
        self.tx_power_dbm + self.tx_gain_db + self.rx_gain_db - self.pathloss_db - self.shadowing_db
            - self.blockage_db
            + self.fading_db
    }
}

/// One end of a directed link: where the vehicle is, its array, and the
/// direction its beam is steered (always toward its own serving peer).
#[derive(Clone, Copy, Debug)]
pub struct LinkEnd<'a> {
    pub vehicle: usize,
    pub position: Vec3,
    pub speed_mps: f64,
    pub array: &'a AntennaArray,
    pub steering: Vec3,
}

/// Channel realization of a directed vehicle pair for one run.
///
/// Large-scale terms are drawn once at construction; only the fading
/// process evolves with time.
#[derive(Clone, Debug)]
pub struct LinkState {
    pub tx: usize,
    pub rx: usize,
    pub condition: ChannelCondition,
    pub distance_m: f64,
    pub pathloss_db: f64,
    pub shadowing_db: f64,
    pub blockage_extra_db: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub tx_steering: Vec3,
    pub rx_steering: Vec3,
    fading: FadingProcess,
}

/// Large-scale channel model bound to a propagation family and carrier.
#[derive(Clone, Debug)]
pub struct ChannelModel {
    pub params: ChannelParams,
    pub scenario: PropagationScenario,
    pub fc_ghz: f64,
    pub bandwidth_hz: f64,
}

impl ChannelModel {
    pub fn new(params: ChannelParams, scenario: PropagationScenario, fc_ghz: f64, bandwidth_hz: f64) -> Self {
        ChannelModel {
            params,
            scenario,
            fc_ghz,
            bandwidth_hz,
        }
    }

    pub fn noise_dbm(&self) -> f64 {
        thermal_noise_dbm(self.bandwidth_hz, self.params.noise_figure_db)
    }

    pub fn pathloss_db(&self, condition: ChannelCondition, d_m: f64) -> Result<f64, ChannelError> {
        self.params
            .pathloss
            .pathloss_db(self.scenario, condition, d_m, self.fc_ghz)
    }

    /// Builds the link from `tx` to `rx` in `condition`, drawing shadowing,
    /// blockage and the fading seed from streams labelled by the vehicle
    /// pair. Beam gains use each end's own steering direction, so for a
    /// non-serving pair they reflect the off-axis pattern.
    pub fn realize_link(
        &self,
        tx: LinkEnd<'_>,
        rx: LinkEnd<'_>,
        condition: ChannelCondition,
        streams: &Streams,
    ) -> Result<LinkState, ChannelError> {
        let tag = format!("{}->{}", tx.vehicle, rx.vehicle);
        let delta = rx.position - tx.position;
        let distance_m = delta.norm();
        let to_rx = delta.normalized().ok_or(ChannelError::ZeroDirection)?;
        let pathloss_db = self.pathloss_db(condition, distance_m)?;

        let p = &self.params;
        let sigma = match condition {
            ChannelCondition::Los => p.shadowing_los_db,
            ChannelCondition::NlosV => p.shadowing_nlosv_db,
            ChannelCondition::Nlos => p.shadowing_nlos_db,
        };
        let shadowing_db = streams.fork(&format!("shadowing.{tag}")).normal(0.0, sigma);
        let blockage_extra_db = match condition {
            ChannelCondition::NlosV => p
                .nlosv_blockage
                .draw_db(distance_m, &mut streams.fork(&format!("blockage.{tag}"))),
            _ => 0.0,
        };

        let tx_gain_db = tx.array.gain_db(tx.steering, to_rx)?;
        let rx_gain_db = rx.array.gain_db(rx.steering, -to_rx)?;

        let speed = [tx.speed_mps.abs(), rx.speed_mps.abs(), (tx.speed_mps - rx.speed_mps).abs()]
            .into_iter()
            .fold(p.min_doppler_speed_mps, f64::max);
        let tc = coherence_time_s(self.fc_ghz, speed);
        let rng = streams.fork(&format!("fading.{tag}"));
        let fading = if !p.fading {
            FadingProcess::disabled(rng)
        } else if condition == ChannelCondition::Los {
            FadingProcess::rician(p.rician_k_db, tc, rng)
        } else {
            FadingProcess::rayleigh(tc, rng)
        };

        Ok(LinkState {
            tx: tx.vehicle,
            rx: rx.vehicle,
            condition,
            distance_m,
            pathloss_db,
            shadowing_db,
            blockage_extra_db,
            tx_gain_db,
            rx_gain_db,
            tx_steering: tx.steering,
            rx_steering: rx.steering,
            fading,
        })
    }
}

impl LinkState {
    pub fn budget(&self, tx_power_dbm: f64) -> LinkBudget {
        LinkBudget {
            tx_power_dbm,
            tx_gain_db: self.tx_gain_db,
            rx_gain_db: self.rx_gain_db,
            pathloss_db: self.pathloss_db,
            shadowing_db: self.shadowing_db,
            blockage_db: self.blockage_extra_db,
            fading_db: 0.0,
        }
    }

    /// Received power without the small-scale term.
    pub fn mean_rx_power_dbm(&self, tx_power_dbm: f64) -> f64 {
        self.budget(tx_power_dbm).rx_power_dbm()
    }

    pub fn fading_db(&mut self, t: SimTime) -> f64 {
        self.fading.sample_db(t)
    }

    /// Linear fading power gain at `t`; advances the process.
    pub fn fading_linear(&mut self, t: SimTime) -> f64 {
        self.fading.sample(t)
    }

    pub fn rx_power_dbm(&mut self, tx_power_dbm: f64, t: SimTime) -> f64 {
        let fading_db = self.fading_db(t);
        LinkBudget {
            fading_db,
            ..self.budget(tx_power_dbm)
        }
        .rx_power_dbm()
    }

    pub fn fading(&self) -> &FadingProcess {
        &self.fading
    }
}
