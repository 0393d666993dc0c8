use serde::{Deserialize, Serialize};

use crate::error::Result;

const BUILTIN: &str = include_str!("../../data/hartmann4.json");

/// Constants of the rescaled four-dimensional Hartmann function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hartmann4Constants {
    pub alpha: [f64; 4],
    pub a: [[f64; 4]; 4],
    pub p: [[f64; 4]; 4],
    pub offset: f64,
    pub scale: f64,
}

impl Hartmann4Constants {
    /// The table shipped in `data/hartmann4.json`.
    pub fn standard() -> Self {
        serde_json::from_str(BUILTIN).expect("bundled Hartmann table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// `(offset − Σᵢ αᵢ exp(−Σⱼ Aᵢⱼ (xⱼ − Pᵢⱼ)²)) / scale`, with `x` clamped
    /// to the unit cube.
    pub fn hart(&self, x: &[f64; 4]) -> f64 {
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            log::warn!("Hartmann input {x:?} outside the unit cube, clamping");
        }
        let x = x.map(|v| v.clamp(0.0, 1.0));
        let inner: f64 = (0..4)
            .map(|i| {
                let e: f64 = (0..4).map(|j| self.a[i][j] * (x[j] - self.p[i][j]).powi(2)).sum();
                self.alpha[i] * (-e).exp()
            })
            .sum();
        (self.offset - inner) / self.scale
    }
}

impl Default for Hartmann4Constants {
    fn default() -> Self {
        Self::standard()
    }
}

/// The objective `y = −Hart(x)` with the standard constants.
pub fn hartmann4(x: &[f64; 4]) -> f64 {
    thread_local! {
        static TABLE: Hartmann4Constants = Hartmann4Constants::standard();
    }
    TABLE.with(|t| -t.hart(x))
}
