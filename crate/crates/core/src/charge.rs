//! Spherically symmetric external charge distributions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// A real, radially symmetric charge density `nu(|x|)` together with its
/// unitary Fourier transform `nu_hat(|k|) = (2 pi)^(-3/2) int nu(x) e^{-ikx} dx`.
pub trait RadialCharge {
    fn density(&self, r: f64) -> f64;
    fn fourier(&self, k: f64) -> f64;
    /// Radius beyond which the density is negligible at double precision.
    fn extent(&self) -> f64;
    /// Wavenumber beyond which the transform is negligible.
    fn fourier_extent(&self) -> f64;
    fn total_charge(&self) -> f64;
}

/// Normalized Gaussian of total charge `charge` and standard deviation `width`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianCharge {
    pub charge: f64,
    pub width: f64,
}

impl GaussianCharge {
    pub fn new(charge: f64, width: f64) -> Self {
        Self { charge, width }
    }

    pub fn unit() -> Self {
        Self { charge: 1.0, width: 1.0 }
    }
}

impl RadialCharge for GaussianCharge {
    fn density(&self, r: f64) -> f64 {
        let s2 = self.width * self.width;
        self.charge * (2.0 * PI * s2).powf(-1.5) * (-r * r / (2.0 * s2)).exp()
    }

    fn fourier(&self, k: f64) -> f64 {
        self.charge * (2.0 * PI).powf(-1.5) * (-0.5 * self.width * self.width * k * k).exp()
    }

    fn extent(&self) -> f64 {
        // exp(-r^2 / 2 s^2) < 1e-18
        self.width * (2.0 * 18.0 * 10f64.ln()).sqrt()
    }

    fn fourier_extent(&self) -> f64 {
        (2.0 * 18.0 * 10f64.ln()).sqrt() / self.width
    }

    fn total_charge(&self) -> f64 {
        self.charge
    }
}
