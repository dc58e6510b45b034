//! The modular parameter b and the constants derived from it.

use crate::cx::Cx;
use crate::error::{Error, Result};
use rug::Float;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// Cached G_b values keyed by (argument, precision).
pub(crate) type GbCacheMap = HashMap<(String, u32), (Cx, Cx, Float)>;

/// Cached quadrature-kernel levels keyed by (contour side, level, precision).
pub(crate) type KernelMap = HashMap<(i8, u32, u32), Arc<Vec<(i64, Cx)>>>;

/// The pair (b, q = e^{pi i b^2}) together with Q = b + 1/b and zeta_b.
///
/// Everything numeric in the crate is parameterized by one of these. Clones
/// share the G_b memo cache.
#[derive(Clone)]
pub struct ModularParameter {
    prec: u32,
    b: Float,
    b_inv: Float,
    big_q: Float,
    q: Cx,
    zeta_b: Cx,
    /// log of conj(zeta_b), with the principal determination of the exponent.
    log_zeta_bar: Cx,
    pi: Float,
    pub(crate) cache: Arc<RwLock<GbCacheMap>>,
    pub(crate) kernel: Arc<RwLock<KernelMap>>,
}

impl std::fmt::Debug for ModularParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModularParameter")
            .field("b", &self.b.to_f64())
            .field("prec", &self.prec)
            .finish()
    }
}

impl ModularParameter {
    /// Build the parameter pack at `prec` bits of working precision.
    pub fn new(b: f64, prec: u32) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "b must be a positive real, got {b}"
            )));
        }
        Self::from_float(Float::with_val(prec, b), prec)
    }

    pub fn from_float(b: Float, prec: u32) -> Result<Self> {
        if !(b > 0u32) {
            return Err(Error::InvalidParameter("b must be positive".into()));
        }
        let b = Float::with_val(prec, b);
        let pi = Float::with_val(prec, rug::float::Constant::Pi);
        let b_inv = Float::with_val(prec, b.recip_ref());
        let big_q = Float::with_val(prec, &b + &b_inv);
        // q = e^{pi i b^2}
        let b2 = Float::with_val(prec, &b * &b);
        let q = Cx::from_imag(Float::with_val(prec, &pi * &b2)).exp();
        // zeta_b = e^{pi i / 4 + pi i (b^2 + b^-2)/12}
        let bm2 = Float::with_val(prec, &b_inv * &b_inv);
        let b2_sum = Float::with_val(prec, &b2 + &bm2);
        let mut t = Float::with_val(prec, &b2_sum / 12u32);
        t += 0.25f64;
        let zeta_exp = Float::with_val(prec, &pi * &t);
        let zeta_b = Cx::from_imag(zeta_exp.clone()).exp();
        let log_zeta_bar = Cx::from_imag(-zeta_exp);
        Ok(ModularParameter {
            prec,
            b,
            b_inv,
            big_q,
            q,
            zeta_b,
            log_zeta_bar,
            pi,
            cache: Arc::new(RwLock::new(HashMap::new())),
            kernel: Arc::new(RwLock::new(HashMap::new())),
        })
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn b(&self) -> &Float {
        &self.b
    }

    pub fn b_inv(&self) -> &Float {
        &self.b_inv
    }

    /// Q = b + 1/b.
    pub fn big_q(&self) -> &Float {
        &self.big_q
    }

    pub fn q(&self) -> &Cx {
        &self.q
    }

    pub fn zeta_b(&self) -> &Cx {
        &self.zeta_b
    }

    pub fn zeta_b_bar(&self) -> Cx {
        self.zeta_b.conj()
    }

    pub fn log_zeta_bar(&self) -> &Cx {
        &self.log_zeta_bar
    }

    pub fn pi(&self) -> &Float {
        &self.pi
    }

    pub fn b_f64(&self) -> f64 {
        self.b.to_f64()
    }

    pub fn big_q_f64(&self) -> f64 {
        self.big_q.to_f64()
    }

    /// min(b, 1/b); controls the pole-free band of the defining integral.
    pub fn b_min(&self) -> Float {
        if self.b < self.b_inv {
            self.b.clone()
        } else {
            self.b_inv.clone()
        }
    }

    /// Numeric value of the angle pi*(c0 + c2 b^2 + cm2 b^-2), each
    /// coefficient an exact rational (numerator, denominator).
    pub fn phase_angle(&self, c0: (i64, i64), c2: (i64, i64), cm2: (i64, i64)) -> Float {
        let prec = self.prec;
        let rat = |(n, d): (i64, i64)| Float::with_val(prec, n) / Float::with_val(prec, d);
        let b2 = Float::with_val(prec, &self.b * &self.b);
        let bm2 = Float::with_val(prec, &self.b_inv * &self.b_inv);
        let mut t = rat(c0);
        t += rat(c2) * b2;
        t += rat(cm2) * bm2;
        Float::with_val(prec, &self.pi * &t)
    }

    /// Same parameter at a different working precision; the memo cache is
    /// keyed by precision, so a fresh one is fine.
    pub fn with_prec(&self, prec: u32) -> Result<Self> {
        Self::from_float(Float::with_val(prec, &self.b), prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_one_gives_q_minus_one() {
        let mp = ModularParameter::new(1.0, 128).unwrap();
        assert!((mp.big_q().to_f64() - 2.0).abs() < 1e-30);
        assert!((mp.q().re.to_f64() + 1.0).abs() < 1e-30);
        assert!(mp.q().im.to_f64().abs() < 1e-30);
    }

    #[test]
    fn b_three_quarters_q_value() {
        let mp = ModularParameter::new(0.75, 128).unwrap();
        let expect = 0.75 + 4.0 / 3.0;
        assert!((mp.big_q().to_f64() - expect).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_b_rejected() {
        assert!(ModularParameter::new(0.0, 64).is_err());
        assert!(ModularParameter::new(-1.0, 64).is_err());
    }

    #[test]
    fn unimodular_invariants() {
        let mp = ModularParameter::new(0.75, 192).unwrap();
        assert!((mp.q().abs().to_f64() - 1.0).abs() < 1e-50);
        let zz = mp.zeta_b() * &mp.zeta_b_bar();
        assert!((zz.re.to_f64() - 1.0).abs() < 1e-50);
        assert!(zz.im.to_f64().abs() < 1e-50);
    }
}
