//! A free particle as a clock: `⟨x(t)⟩ / ⟨v⟩ → t`.

use super::grid::GridWavepacket;
use super::report::{Comparison, ScenarioReport};
use crate::error::{Error, Result};
use crate::exec::pairwise_sum;
use crate::C64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Speeds below this count as a stopped clock.
const MIN_SPEED: f64 = 1e-12;
/// Largest edge probability before the packet is considered to wrap.
const EDGE_TOLERANCE: f64 = 1e-14;
/// Accepted deviation of the reading from the elapsed time.
pub const READING_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClockReading {
    pub x_mean: f64,
    pub v_mean: f64,
    pub t_estimate: f64,
}

/// Angular wavenumbers of the FFT bins for `n` points of spacing `h`.
fn wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * h);
    (0..n)
        .map(|j| if j <= n / 2 { j as f64 * dk } else { (j as f64 - n as f64) * dk })
        .collect()
}

/// Evolves a free packet for time `t` and reads `⟨x(t)⟩ / ⟨v⟩`.
pub fn free_particle_clock(packet: &GridWavepacket, mass: f64, t: f64) -> Result<ClockReading> {
    if !(mass > 0.0 && mass.is_finite()) || !(t > 0.0 && t.is_finite()) {
        return Err(Error::Parameter("mass and elapsed time must be positive and finite".into()));
    }
    let n = packet.len();
    if n < 2 {
        return Err(Error::Parameter("clock grid needs at least two points".into()));
    }
    let k = wavenumbers(n, packet.spacing());
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let mut psi: Vec<C64> = packet.amplitudes().to_vec();
    forward.process(&mut psi);
    // Unitary normalisation: Σ|ψ̃|² = n Σ|ψ|².
    let weights: Vec<f64> = psi.iter().map(|a| a.norm_sqr() / n as f64).collect();
    let p_mean = pairwise_sum(&k.iter().zip(&weights).map(|(k, w)| k * w).collect::<Vec<_>>());
    let v_mean = p_mean / mass;
    if v_mean.abs() < MIN_SPEED {
        return Err(Error::UndefinedClock(format!("mean speed {v_mean:e} is zero")));
    }
    for (a, &kj) in psi.iter_mut().zip(&k) {
        *a *= C64::from_polar(1.0 / n as f64, -kj * kj * t / (2.0 * mass));
    }
    inverse.process(&mut psi);
    let evolved = GridWavepacket::new(packet.points().to_vec(), psi, packet.sigma())?;
    if evolved.edge_probability() > EDGE_TOLERANCE {
        return Err(Error::Resolution("packet reaches the grid edge and wraps around".into()));
    }
    let x_mean = evolved.mean();
    Ok(ClockReading {
        x_mean,
        v_mean,
        t_estimate: x_mean / v_mean,
    })
}

/// Inputs of the clock demonstration.
#[derive(Clone, Debug, PartialEq)]
pub struct ClockSpec {
    pub packet: GridWavepacket,
    pub mass: f64,
    pub t: f64,
}

impl Default for ClockSpec {
    fn default() -> Self {
        Self {
            packet: GridWavepacket::gaussian(4096, -200.0, 200.0, 0.0, 2.0, 1.0).expect("valid packet"),
            mass: 1.0,
            t: 50.0,
        }
    }
}

pub fn clock_scenario(spec: &ClockSpec) -> Result<ScenarioReport> {
    let reading = free_particle_clock(&spec.packet, spec.mass, spec.t)?;
    let x0 = spec.packet.mean();
    let mut r = ScenarioReport::new("clock");
    r.param("mass", spec.mass)
        .param("t", spec.t)
        .param("points", spec.packet.len())
        .param("x_min", spec.packet.points()[0])
        .param("x_max", *spec.packet.points().last().expect("non-empty"))
        .param("sigma", spec.packet.sigma())
        .param("x_initial", x0);
    let err = (reading.t_estimate - spec.t).abs();
    r.diag("x_mean", reading.x_mean)
        .diag("v_mean", reading.v_mean)
        .diag("t_estimate", reading.t_estimate)
        .diag("relative_error", err / spec.t)
        .diag("transport_error", (reading.x_mean - x0 - reading.v_mean * spec.t).abs())
        .verdict("reading_matches_time", err, Comparison::Below, READING_TOLERANCE + x0.abs() / reading.v_mean.abs());
    r.note("t_estimate", "<x(t)> / <v>; exact up to the initial offset <x(0)> / <v>");
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn packet(center: f64, k: f64) -> GridWavepacket {
        GridWavepacket::gaussian(4096, -200.0, 200.0, center, 2.0, k).unwrap()
    }

    #[test]
    fn reads_elapsed_time() {
        let r = free_particle_clock(&packet(0.0, 1.0), 1.0, 50.0).unwrap();
        assert!((r.v_mean - 1.0).abs() < 1e-10);
        assert!((r.t_estimate - 50.0).abs() < 1e-6);
    }

    #[test]
    fn early_reading_is_near_zero() {
        let r = free_particle_clock(&packet(0.0, 1.0), 1.0, 1e-9).unwrap();
        assert!(r.t_estimate.abs() < 1e-8);
    }

    #[test]
    fn offset_fades_relative_to_time() {
        let errs: Vec<f64> = [10.0, 30.0, 60.0]
            .iter()
            .map(|&t| {
                let r = free_particle_clock(&packet(5.0, 1.0), 1.0, t).unwrap();
                assert!((r.t_estimate - t - 5.0).abs() < 1e-6);
                (r.t_estimate - t).abs() / t
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2]);
    }

    #[test]
    fn stopped_packet_is_undefined() {
        assert!(matches!(
            free_particle_clock(&packet(0.0, 0.0), 1.0, 5.0),
            Err(Error::UndefinedClock(_))
        ));
    }

    #[test]
    fn wrapping_is_detected() {
        assert!(matches!(
            free_particle_clock(&packet(0.0, 1.0), 1.0, 400.0),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn scenario_verdict() {
        let r = clock_scenario(&ClockSpec::default()).unwrap();
        assert!(r.find_verdict("reading_matches_time").unwrap().passed);
    }
}
