//! Close-in path loss and link-budget arithmetic.

use crate::scalar::{db_to_linear, linear_to_db, Scalar};

/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams<S> {
    pub n_los: S,
    pub n_nlos: S,
    /// Extra loss applied to NLOS links on top of the exponent change.
    pub nlos_offset_db: S,
}

impl<S: Scalar> PathLossParams<S> {
    pub fn free_space() -> Self {
        PathLossParams {
            n_los: S::of(2.0),
            n_nlos: S::of(2.0),
            nlos_offset_db: S::zero(),
        }
    }
}

/// Free-space loss at the 1 m reference distance: `32.4 + 20 log10(f_GHz)`.
pub fn reference_loss_db<S: Scalar>(carrier_ghz: S) -> S {
    S::of(32.4) + S::of(20.0) * carrier_ghz.log10()
}

/// `PL0(fc) + 10 n log10(d)` plus the NLOS offset. Distances under 1 m are
/// clamped to 1 m.
pub fn path_loss_db<S: Scalar>(distance_m: S, carrier_ghz: S, los: bool, p: &PathLossParams<S>) -> S {
    let d = distance_m.max(S::one());
    let (n, offset) = if los {
        (p.n_los, S::zero())
    } else {
        (p.n_nlos, p.nlos_offset_db)
    };
    reference_loss_db(carrier_ghz) + S::of(10.0) * n * d.log10() + offset
}

/// Free-space path gain (negative loss) at `distance_m`.
pub fn free_space_gain_db<S: Scalar>(distance_m: S, carrier_ghz: S) -> S {
    -path_loss_db(distance_m, carrier_ghz, true, &PathLossParams::free_space())
}

pub fn noise_floor_dbm<S: Scalar>(bandwidth_hz: S, noise_figure_db: S) -> S {
    S::of(THERMAL_NOISE_DBM_HZ) + linear_to_db(bandwidth_hz) + noise_figure_db
}

/// Power sum of path gains in dB; `None` when there are no paths.
pub fn combined_gain_db<S: Scalar>(gains_db: &[S]) -> Option<S> {
    if gains_db.is_empty() {
        return None;
    }
    let lin: S = gains_db.iter().map(|g| db_to_linear(*g)).sum();
    Some(linear_to_db(lin))
}

/// Link budget of one technology in one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget<S> {
    pub tx_power_dbm: S,
    pub noise_figure_db: S,
    /// Beamforming gain applied to the serving link only.
    pub array_gain_db: S,
    pub bandwidth_hz: S,
    pub interference_factor: S,
    /// SINR below this is reported as outage.
    pub outage_sinr_db: S,
}

impl<S: Scalar> LinkBudget<S> {
    pub fn noise_dbm(&self) -> S {
        noise_floor_dbm(self.bandwidth_hz, self.noise_figure_db)
    }
}

/// SINR of the serving link given the path gains of the serving site and of
/// each co-channel interferer.
///
/// Interferers contribute `tx + 10 log10(sum of gains)` scaled by the
/// activity factor; their beams are not aligned with the UE so no array gain
/// is applied. Returns `None` (outage) when the serving site has no paths or
/// the SINR falls below the outage threshold.
pub fn sinr_db<'a, S, I>(serving: &[S], interferers: I, budget: &LinkBudget<S>) -> Option<S>
where
    S: Scalar,
    I: IntoIterator<Item = &'a [S]>,
{
    let gain = combined_gain_db(serving)?;
    let signal_dbm = budget.tx_power_dbm + budget.array_gain_db + gain;
    let noise_mw = db_to_linear(budget.noise_dbm());
    let interference_mw: S = interferers
        .into_iter()
        .filter_map(combined_gain_db)
        .map(|g| budget.interference_factor * db_to_linear(budget.tx_power_dbm + g))
        .sum();
    let sinr = signal_dbm - linear_to_db(noise_mw + interference_mw);
    (sinr >= budget.outage_sinr_db).then_some(sinr)
}
