/// CODATA exact SI defining constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Planck constant, J·s.
    pub h: f64,
    /// Speed of light in vacuum, m/s.
    pub c: f64,
}

pub const PHYSICAL: PhysicalConstants = PhysicalConstants { h: 6.626_070_15e-34, c: 299_792_458.0 };
