//! Single-scattering analytic atmosphere.
//!
//! Rayleigh depth from the Hansen-Travis fit, Angstrom-law aerosol depth,
//! single-scattering path reflectance, half-Rayleigh diffuse transmittances
//! and a first-order spherical albedo. Outputs are normalised to 1 AU.

use std::f64::consts::PI;

use crate::scene_ingest::Geometry;

use super::aerosol::AerosolModel;
use super::{check_wavelength, check_zenith, Result, RtmError};

/// Upper clamp of the spherical albedo.
pub const MAX_SPHERICAL_ALBEDO: f64 = 0.99;

/// Rayleigh optical depth at standard pressure, wavelength in nm.
pub fn rayleigh_optical_depth(wavelength: f64) -> Result<f64> {
    check_wavelength(wavelength)?;
    let um = wavelength / 1000.0;
    let inv2 = 1.0 / (um * um);
    let inv4 = inv2 * inv2;
    Ok(0.008569 * inv4 * (1.0 + 0.0113 * inv2 + 0.00013 * inv4))
}

/// Aerosol optical depth extrapolated from 550 nm with the Angstrom law.
pub fn aerosol_optical_depth(wavelength: f64, aod550: f64, model: &AerosolModel) -> Result<f64> {
    check_wavelength(wavelength)?;
    if !(aod550 >= 0.0 && aod550.is_finite()) {
        return Err(RtmError::OutOfRange {
            quantity: "aod550".into(),
            value: aod550,
        });
    }
    if aod550 == 0.0 {
        return Ok(0.0);
    }
    Ok(aod550 * (wavelength / 550.0).powf(-model.angstrom_exponent))
}

/// Cosine of the scattering angle between the solar beam and the view direction.
pub fn cos_scattering_angle(geometry: &Geometry) -> f64 {
    let (s, v) = (geometry.sza.to_radians(), geometry.vza.to_radians());
    let phi = geometry.relative_azimuth().to_radians();
    (-s.cos() * v.cos() - s.sin() * v.sin() * phi.cos()).clamp(-1.0, 1.0)
}

pub fn rayleigh_phase(cos_theta: f64) -> f64 {
    0.75 * (1.0 + cos_theta * cos_theta)
}

pub fn henyey_greenstein(cos_theta: f64, g: f64) -> f64 {
    (1.0 - g * g) / (1.0 + g * g - 2.0 * g * cos_theta).powf(1.5)
}

/// Single-scattering path reflectance for given optical depths.
pub fn path_reflectance(tau_r: f64, tau_a: f64, geometry: &Geometry, model: &AerosolModel) -> Result<f64> {
    check_zenith("sza", geometry.sza)?;
    check_zenith("vza", geometry.vza)?;
    let mu_s = geometry.sza.to_radians().cos();
    let mu_v = geometry.vza.to_radians().cos();
    let cos_theta = cos_scattering_angle(geometry);
    let rayleigh = tau_r * rayleigh_phase(cos_theta);
    let aerosol = model.single_scatter_albedo * tau_a * henyey_greenstein(cos_theta, model.asymmetry);
    Ok((rayleigh + aerosol) / (4.0 * mu_s * mu_v))
}

pub(crate) fn path_radiance_from_depths(
    tau_r: f64,
    tau_a: f64,
    geometry: &Geometry,
    model: &AerosolModel,
    e0: f64,
) -> Result<f64> {
    let rho = path_reflectance(tau_r, tau_a, geometry, model)?;
    Ok(rho * e0 * geometry.sza.to_radians().cos() / PI)
}

/// Path radiance at 1 AU, W m-2 sr-1 nm-1.
pub fn path_radiance(
    wavelength: f64,
    geometry: &Geometry,
    aod550: f64,
    model: &AerosolModel,
    e0_at_band: f64,
) -> Result<f64> {
    check_e0(e0_at_band)?;
    let tau_r = rayleigh_optical_depth(wavelength)?;
    let tau_a = aerosol_optical_depth(wavelength, aod550, model)?;
    path_radiance_from_depths(tau_r, tau_a, geometry, model, e0_at_band)
}

/// Direct plus forward-diffuse transmittance along a slant path.
pub fn diffuse_transmittance(tau_r: f64, tau_a: f64, zenith: f64, model: &AerosolModel) -> Result<f64> {
    check_zenith("zenith", zenith)?;
    let effective = tau_r / 2.0 + (1.0 - model.single_scatter_albedo * model.forward_fraction()) * tau_a;
    Ok((-effective / zenith.to_radians().cos()).exp())
}

/// Upward surface-to-sensor transmittance.
pub fn transmittance_up(wavelength: f64, vza: f64, aod550: f64, model: &AerosolModel) -> Result<f64> {
    let tau_r = rayleigh_optical_depth(wavelength)?;
    let tau_a = aerosol_optical_depth(wavelength, aod550, model)?;
    diffuse_transmittance(tau_r, tau_a, vza, model)
}

pub(crate) fn irradiance_from_depths(tau_r: f64, tau_a: f64, sza: f64, model: &AerosolModel, e0: f64) -> Result<f64> {
    let t_down = diffuse_transmittance(tau_r, tau_a, sza, model)?;
    Ok(e0 * sza.to_radians().cos() * t_down)
}

/// Total (direct + diffuse) downwelling irradiance at the surface, 1 AU.
pub fn downwelling_irradiance(
    wavelength: f64,
    sza: f64,
    aod550: f64,
    model: &AerosolModel,
    e0_at_band: f64,
) -> Result<f64> {
    check_e0(e0_at_band)?;
    let tau_r = rayleigh_optical_depth(wavelength)?;
    let tau_a = aerosol_optical_depth(wavelength, aod550, model)?;
    irradiance_from_depths(tau_r, tau_a, sza, model, e0_at_band)
}

pub fn spherical_albedo_from_depths(tau_r: f64, tau_a: f64, model: &AerosolModel) -> f64 {
    let s = 0.92 * tau_r + (1.0 - model.asymmetry) * model.single_scatter_albedo * tau_a / 3.0;
    s.clamp(0.0, MAX_SPHERICAL_ALBEDO)
}

pub fn spherical_albedo(wavelength: f64, aod550: f64, model: &AerosolModel) -> Result<f64> {
    let tau_r = rayleigh_optical_depth(wavelength)?;
    let tau_a = aerosol_optical_depth(wavelength, aod550, model)?;
    Ok(spherical_albedo_from_depths(tau_r, tau_a, model))
}

fn check_e0(e0: f64) -> Result<()> {
    if e0 >= 0.0 && e0.is_finite() {
        Ok(())
    } else {
        Err(RtmError::OutOfRange {
            quantity: "e0".into(),
            value: e0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rtm::aerosol::AerosolKind;
    use proptest::prelude::*;

    fn continental() -> AerosolModel {
        AerosolModel {
            kind: AerosolKind::Continental,
            angstrom_exponent: 1.3,
            single_scatter_albedo: 0.89,
            asymmetry: 0.67,
        }
    }

    fn geometry(sza: f64, saa: f64, vza: f64, vaa: f64) -> Geometry {
        Geometry::new(sza, saa, vza, vaa).unwrap()
    }

    #[test]
    fn rayleigh_examples() {
        // 0.008569 / 0.55^4 * (1 + 0.0113 / 0.55^2 + 0.00013 / 0.55^4)
        let expected = 0.008569 / 0.09150625 * (1.0 + 0.0113 / 0.3025 + 0.00013 / 0.09150625);
        let tau = rayleigh_optical_depth(550.0).unwrap();
        assert!((tau - expected).abs() < 1e-15);
        assert!((tau - 0.0973).abs() < 0.001);
        let ratio = rayleigh_optical_depth(1100.0).unwrap() / tau;
        assert!((ratio / 2f64.powi(-4) - 1.0).abs() < 0.03);
        assert!(rayleigh_optical_depth(349.0).is_err());
        assert!(rayleigh_optical_depth(2601.0).is_err());
    }

    #[test]
    fn aerosol_examples() {
        let m = continental();
        assert_eq!(aerosol_optical_depth(550.0, 0.2, &m).unwrap(), 0.2);
        assert_eq!(aerosol_optical_depth(900.0, 0.0, &m).unwrap(), 0.0);
        let tau = aerosol_optical_depth(1100.0, 0.3, &m).unwrap();
        assert!((tau - 0.3 * 2f64.powf(-1.3)).abs() < 1e-15);
        assert!((2f64.powf(-1.3) - 0.406).abs() < 1e-3);
        assert!(aerosol_optical_depth(550.0, -0.1, &m).is_err());
    }

    #[test]
    fn path_radiance_limits() {
        let m = continental();
        let g = geometry(0.0, 0.0, 0.0, 0.0);
        assert_eq!(path_radiance_from_depths(0.0, 0.0, &g, &m, 1.8).unwrap(), 0.0);
        assert_eq!(cos_scattering_angle(&g), -1.0);
        assert_eq!(rayleigh_phase(-1.0), 1.5);
        let rho = path_reflectance(0.1, 0.0, &g, &m).unwrap();
        assert!((rho - 0.375 * 0.1).abs() < 1e-16);
    }

    #[test]
    fn transmittance_examples() {
        let m = continental();
        assert_eq!(diffuse_transmittance(0.0, 0.0, 40.0, &m).unwrap(), 1.0);
        let t = diffuse_transmittance(0.1, 0.0, 0.0, &m).unwrap();
        assert!((t - (-0.05f64).exp()).abs() < 1e-15);
        assert!((t - 0.9512).abs() < 1e-4);

        assert_eq!(irradiance_from_depths(0.0, 0.0, 0.0, &m, 1.7).unwrap(), 1.7);
        assert!((irradiance_from_depths(0.0, 0.0, 60.0, &m, 1.7).unwrap() - 0.85).abs() < 1e-15);
        let e = irradiance_from_depths(0.1, 0.0, 0.0, &m, 1.7).unwrap();
        assert!((e - 1.7 * (-0.05f64).exp()).abs() < 1e-15);
        assert!(diffuse_transmittance(0.1, 0.0, 90.0, &m).is_err());
    }

    #[test]
    fn spherical_albedo_examples() {
        let m = continental();
        assert_eq!(spherical_albedo_from_depths(0.0, 0.0, &m), 0.0);
        assert!((spherical_albedo_from_depths(0.1, 0.0, &m) - 0.092).abs() < 1e-15);
        assert_eq!(spherical_albedo_from_depths(5.0, 5.0, &m), 0.99);
    }

    /// Same closed form written out independently of the module helpers.
    fn path_radiance_oracle(wl: f64, sza: f64, saa: f64, vza: f64, vaa: f64, aod: f64, alpha: f64, w: f64, g: f64, e0: f64) -> f64 {
        let lam = wl * 1e-3;
        let tau_r = 0.008569 * lam.powi(-4) * (1.0 + 0.0113 * lam.powi(-2) + 0.00013 * lam.powi(-4));
        let tau_a = aod * (wl / 550.0).powf(-alpha);
        let mut phi = (saa - vaa).abs();
        if phi > 180.0 {
            phi = 360.0 - phi;
        }
        let (ts, tv, p) = (sza.to_radians(), vza.to_radians(), phi.to_radians());
        let c = -ts.cos() * tv.cos() - ts.sin() * tv.sin() * p.cos();
        let pr = 0.75 * (1.0 + c * c);
        let phg = (1.0 - g * g) / (1.0 + g * g - 2.0 * g * c).powf(1.5);
        let rho = (tau_r * pr + w * tau_a * phg) / (4.0 * ts.cos() * tv.cos());
        rho * e0 * ts.cos() / PI
    }

    proptest! {
        #[test]
        fn path_radiance_matches_duplicate_oracle(
            wl in 350.0f64..2600.0, sza in 0.0f64..80.0, saa in 0.0f64..360.0,
            vza in 0.0f64..60.0, vaa in 0.0f64..360.0, aod in 0.0f64..1.5, e0 in 0.0f64..2.2,
        ) {
            let m = continental();
            let got = path_radiance(wl, &geometry(sza, saa, vza, vaa), aod, &m, e0).unwrap();
            let want = path_radiance_oracle(wl, sza, saa, vza, vaa, aod, 1.3, 0.89, 0.67, e0);
            prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-12));
        }

        #[test]
        fn rayleigh_strictly_decreasing(a in 350.0f64..2599.0, delta in 0.01f64..100.0) {
            let b = (a + delta).min(2600.0);
            prop_assume!(b > a);
            prop_assert!(rayleigh_optical_depth(b).unwrap() < rayleigh_optical_depth(a).unwrap());
        }

        #[test]
        fn transmittance_up_monotone_in_vza(wl in 400.0f64..2500.0, aod in 0.0f64..1.0, v1 in 0.0f64..89.0, dv in 0.0f64..10.0) {
            let m = continental();
            let v2 = (v1 + dv).min(89.0);
            prop_assert!(transmittance_up(wl, v2, aod, &m).unwrap() <= transmittance_up(wl, v1, aod, &m).unwrap());
        }
    }
}
