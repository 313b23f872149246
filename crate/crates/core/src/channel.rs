//! Geometry, pathloss and Rician fading for the AP → IRS → user links.
//!
//! Every link is modeled as a length-`M` complex vector: `h` from the AP to
//! the IRS elements and `f_k` from the elements to user `k`. Entries are
//! unit-power Rician draws scaled by the square root of the distance
//! pathloss.

use crate::{CVector, Error, Result, C64};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Two users share the downlink.
pub const NUM_USERS: usize = 2;

const SPEED_OF_LIGHT: f64 = 3e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::new(
            self.x_min + (self.x_max - self.x_min) * rng.random::<f64>(),
            self.y_min + (self.y_max - self.y_min) * rng.random::<f64>(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub ap_position: Point,
    pub irs_position: Point,
    /// Users are dropped uniformly over this rectangle on every draw.
    pub user_region: Rect,
    /// Number of reflecting elements `M`.
    pub num_elements: usize,
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.user_region.area() > 0.0)
            || self.user_region.x_max <= self.user_region.x_min
            || self.user_region.y_max <= self.user_region.y_min
        {
            return Err(Error::Domain("user region must have positive area".into()));
        }
        if self.num_elements == 0 {
            return Err(Error::Domain(
                "number of IRS elements must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn num_users(&self) -> usize {
        NUM_USERS
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            ap_position: Point::new(0.0, 0.0),
            irs_position: Point::new(2.0, 2.0),
            user_region: Rect {
                x_min: 2.0,
                x_max: 20.0,
                y_min: 1.0,
                y_max: 2.0,
            },
            num_elements: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingParams {
    /// Linear Rician K-factor. `f64::INFINITY` gives the pure LOS channel.
    pub rician_k: f64,
    pub pathloss_exponent: f64,
    /// Carrier frequency in Hz.
    pub carrier_freq: f64,
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rician_k >= 0.0) {
            return Err(Error::Domain("Rician K-factor must be non-negative".into()));
        }
        if !(self.pathloss_exponent > 0.0) || !self.pathloss_exponent.is_finite() {
            return Err(Error::Domain("pathloss exponent must be positive".into()));
        }
        if !(self.carrier_freq > 0.0) || !self.carrier_freq.is_finite() {
            return Err(Error::Domain("carrier frequency must be positive".into()));
        }
        Ok(())
    }
}

impl Default for FadingParams {
    fn default() -> Self {
        Self {
            rician_k: crate::units::db_to_linear(3.0),
            pathloss_exponent: 2.1,
            carrier_freq: 915e6,
        }
    }
}

/// One fading draw of all links.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// AP → IRS.
    pub h: CVector,
    /// IRS → user `k`.
    pub f: [CVector; NUM_USERS],
    /// Set when the vectors carry channel-estimation error.
    pub estimated: bool,
    pub user_positions: [Point; NUM_USERS],
}

impl ChannelRealization {
    pub fn num_elements(&self) -> usize {
        self.h.len()
    }

    /// Cascaded per-element products `b_k[m] = h[m] · f_k[m]`.
    pub fn cascaded(&self, user: usize) -> CVector {
        self.h.component_mul(&self.f[user])
    }

    /// Perturbs the selected links with [`apply_csi_error`].
    pub fn with_csi_error<R: Rng + ?Sized>(
        &self,
        model: &CsiErrorModel,
        links: CsiLinks,
        rng: &mut R,
    ) -> Self {
        let mut out = self.clone();
        out.h = apply_csi_error(&self.h, model, rng);
        if links == CsiLinks::All {
            for k in 0..NUM_USERS {
                out.f[k] = apply_csi_error(&self.f[k], model, rng);
            }
        }
        out.estimated = model.eta > 0.0;
        out
    }
}

/// Which links the CSI error is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsiLinks {
    /// AP → IRS only.
    ApIrs,
    #[default]
    All,
}

/// Estimation error `e ~ CN(0, η |h_m|²)` applied entry by entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsiErrorModel {
    pub eta: f64,
}

/// Free-space attenuation at 1 m, `(c / 4πf)²`, times `d^-ξ`.
pub fn pathloss(distance: f64, params: &FadingParams) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::Domain(format!(
            "distance must be positive, got {distance}"
        )));
    }
    let reference = (SPEED_OF_LIGHT / (4.0 * PI * params.carrier_freq)).powi(2);
    Ok(reference * distance.powf(-params.pathloss_exponent))
}

/// Standard circularly-symmetric complex Gaussian, `E|w|² = 1`.
pub fn sample_cscg<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `√(K/(K+1))·1 + √(1/(K+1))·w` with an all-ones LOS component.
pub fn sample_rician<R: Rng + ?Sized>(k_factor: f64, length: usize, rng: &mut R) -> CVector {
    debug_assert!(k_factor >= 0.0);
    if k_factor.is_infinite() {
        return CVector::from_element(length, C64::new(1.0, 0.0));
    }
    let los = (k_factor / (k_factor + 1.0)).sqrt();
    let nlos = (1.0 / (k_factor + 1.0)).sqrt();
    CVector::from_fn(length, |_, _| C64::new(los, 0.0) + sample_cscg(rng) * nlos)
}

/// Drops both users, then draws `h`, `f_1`, `f_2` in that order.
pub fn generate_realization<R: Rng + ?Sized>(
    geometry: &Geometry,
    params: &FadingParams,
    rng: &mut R,
) -> Result<ChannelRealization> {
    geometry.validate()?;
    params.validate()?;
    let m = geometry.num_elements;
    let users = [
        geometry.user_region.sample(rng),
        geometry.user_region.sample(rng),
    ];

    let ap_irs = geometry.ap_position.distance(&geometry.irs_position);
    let h = sample_rician(params.rician_k, m, rng) * C64::from(pathloss(ap_irs, params)?.sqrt());
    let mut f = [CVector::zeros(m), CVector::zeros(m)];
    for (k, pos) in users.iter().enumerate() {
        let d = geometry.irs_position.distance(pos);
        f[k] = sample_rician(params.rician_k, m, rng) * C64::from(pathloss(d, params)?.sqrt());
    }
    Ok(ChannelRealization {
        h,
        f,
        estimated: false,
        user_positions: users,
    })
}

/// Adds zero-mean CSCG error with per-entry variance `η |h_m|²`.
pub fn apply_csi_error<R: Rng + ?Sized>(
    channel: &CVector,
    model: &CsiErrorModel,
    rng: &mut R,
) -> CVector {
    if model.eta == 0.0 {
        return channel.clone();
    }
    channel.map(|hm| {
        let std = (model.eta * hm.norm_sqr()).sqrt();
        hm + sample_cscg(rng) * std
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> FadingParams {
        FadingParams::default()
    }

    #[test]
    fn pathloss_unit_distance() {
        // (3e8 / (4π·915e6))², evaluated independently.
        assert_relative_eq!(
            pathloss(1.0, &params()).unwrap(),
            6.807_389_387_418_555e-4,
            max_relative = 1e-12
        );
        let other = FadingParams {
            carrier_freq: 2.4e9,
            pathloss_exponent: 3.7,
            ..params()
        };
        let reference = (3e8 / (4.0 * PI * 2.4e9)).powi(2);
        assert_eq!(pathloss(1.0, &other).unwrap(), reference);
    }

    #[test]
    fn pathloss_distance_ratio() {
        let p = params();
        let ratio = pathloss(10.0, &p).unwrap() / pathloss(1.0, &p).unwrap();
        assert_relative_eq!(ratio, 7.943_282_347_242_814e-3, max_relative = 1e-12);
    }

    #[test]
    fn pathloss_rejects_non_positive_distance() {
        assert!(matches!(pathloss(0.0, &params()), Err(Error::Domain(_))));
        assert!(matches!(pathloss(-1.0, &params()), Err(Error::Domain(_))));
    }

    #[test]
    fn pathloss_monotone() {
        let p = params();
        let mut prev = f64::INFINITY;
        for d in [0.5, 1.0, 2.0, 5.0, 50.0] {
            let v = pathloss(d, &p).unwrap();
            assert!(v < prev);
            prev = v;
        }
        let hi = FadingParams {
            carrier_freq: 2.4e9,
            ..p
        };
        assert!(pathloss(3.0, &hi).unwrap() < pathloss(3.0, &p).unwrap());
    }

    #[test]
    fn rician_los_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = sample_rician(f64::INFINITY, 5, &mut rng);
        assert!(v.iter().all(|z| *z == C64::new(1.0, 0.0)));
    }

    fn mean_power(k: f64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let v = sample_rician(k, 100_000, &mut rng);
        v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn rician_unit_power() {
        assert!((mean_power(0.0) - 1.0).abs() < 0.02);
        assert!((mean_power(2.0) - 1.0).abs() < 0.02);
        assert!((mean_power(crate::units::db_to_linear(3.0)) - 1.0).abs() < 0.02);
    }

    #[test]
    fn realization_geometry_and_determinism() {
        let g = Geometry::default();
        assert_relative_eq!(
            g.ap_position.distance(&g.irs_position),
            2.0 * 2f64.sqrt(),
            max_relative = 1e-15
        );
        let a = generate_realization(&g, &params(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = generate_realization(&g, &params(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.h.len(), 30);
        assert!(a
            .h
            .iter()
            .chain(a.f[0].iter())
            .chain(a.f[1].iter())
            .all(|z| z.re.is_finite() && z.im.is_finite()));
        for p in a.user_positions {
            assert!((2.0..=20.0).contains(&p.x) && (1.0..=2.0).contains(&p.y));
        }
    }

    #[test]
    fn ap_irs_power_matches_pathloss() {
        let g = Geometry {
            num_elements: 4,
            ..Geometry::default()
        };
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 10_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let r = generate_realization(&g, &p, &mut rng).unwrap();
            acc += r.h.norm_squared() / 4.0;
        }
        let expected = pathloss(2.0 * 2f64.sqrt(), &p).unwrap();
        assert!(((acc / draws as f64) - expected).abs() / expected < 0.02);
    }

    #[test]
    fn csi_error_zero_eta_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = sample_rician(2.0, 8, &mut rng);
        assert_eq!(
            apply_csi_error(&h, &CsiErrorModel { eta: 0.0 }, &mut rng),
            h
        );
    }

    #[test]
    fn csi_error_zero_entry_stays_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, -1.0)]);
        let out = apply_csi_error(&h, &CsiErrorModel { eta: 1.0 }, &mut rng);
        assert_eq!(out[0], C64::new(0.0, 0.0));
    }

    #[test]
    fn csi_error_variance_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = CVector::from_vec(vec![C64::new(0.3, -0.4), C64::new(2.0, 1.0)]);
        let model = CsiErrorModel { eta: 0.5 };
        let n = 100_000;
        let mut var = [0.0; 2];
        let mut mean = [C64::new(0.0, 0.0); 2];
        for _ in 0..n {
            let e = apply_csi_error(&h, &model, &mut rng) - &h;
            for m in 0..2 {
                var[m] += e[m].norm_sqr();
                mean[m] += e[m];
            }
        }
        for m in 0..2 {
            let expected = 0.5 * h[m].norm_sqr();
            assert!((var[m] / n as f64 - expected).abs() / expected < 0.03);
            assert!((mean[m] / n as f64).norm() < 0.01 * h[m].norm());
        }
    }

    #[test]
    fn invalid_geometry() {
        let g = Geometry {
            num_elements: 0,
            ..Geometry::default()
        };
        assert!(g.validate().is_err());
        let mut g = Geometry::default();
        g.user_region.y_max = g.user_region.y_min;
        assert!(g.validate().is_err());
    }
}
