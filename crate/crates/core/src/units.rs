//! Physical constants and the unit system used to convert between
//! frequencies, temperatures and wavenumbers.

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (CODATA 2018, exact).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s (exact).
pub const C: f64 = 2.997_924_58e8;

/// The three dimensional constants every conversion needs.
///
/// [`Units::SI`] uses CODATA 2018 values; [`Units::NATURAL`] sets all three
/// to one, in which case frequencies, temperatures and wavenumbers share a
/// single arbitrary scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub hbar: f64,
    pub k_b: f64,
    pub c: f64,
}

impl Units {
    pub const SI: Units = Units {
        hbar: HBAR,
        k_b: K_B,
        c: C,
    };

    pub const NATURAL: Units = Units {
        hbar: 1.0,
        k_b: 1.0,
        c: 1.0,
    };

    /// ħω / (k_B T), the argument of every Bose–Einstein factor.
    #[inline]
    pub fn energy_ratio(&self, omega: f64, kelvin: f64) -> f64 {
        (self.hbar * omega) / (self.k_b * kelvin)
    }

    pub fn is_natural(&self) -> bool {
        *self == Units::NATURAL
    }
}

impl Default for Units {
    fn default() -> Self {
        Units::SI
    }
}
