//! Physical constants and unit helpers.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Lower edge of the 5 GHz WiFi band the surface is characterized for.
pub const WIFI_BAND_LO_GHZ: f64 = 5.15;
/// Upper edge of the 5 GHz WiFi band.
pub const WIFI_BAND_HI_GHZ: f64 = 5.875;
/// Center frequency of the prototype.
pub const CENTER_FREQ_GHZ: f64 = 5.5;

/// Free-space wavelength in meters.
pub fn wavelength_m(freq_ghz: f64) -> f64 {
    SPEED_OF_LIGHT / (freq_ghz * 1e9)
}

/// Free-space wavelength in millimeters.
pub fn wavelength_mm(freq_ghz: f64) -> f64 {
    wavelength_m(freq_ghz) * 1e3
}

/// Free-space wavenumber 2*pi/lambda in rad/m.
pub fn wavenumber(freq_ghz: f64) -> f64 {
    std::f64::consts::TAU / wavelength_m(freq_ghz)
}

/// Amplitude ratio to decibels.
pub fn amplitude_db(amplitude: f64) -> f64 {
    20.0 * amplitude.log10()
}

/// Power ratio to decibels.
pub fn power_db(power: f64) -> f64 {
    10.0 * power.log10()
}

pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
