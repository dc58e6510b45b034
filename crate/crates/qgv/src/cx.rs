//! Complex arithmetic over multiple-precision floats.
//!
//! MPFR provides real arithmetic only; this is the thin complex layer the
//! rest of the crate works with. Precision is carried per value, in bits.

use rug::float::Special;
use rug::Float;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Complex number with `rug::Float` components.
#[derive(Clone, PartialEq)]
pub struct Cx {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i", self.re, self.im)
    }
}

impl Cx {
    pub fn new(prec: u32) -> Self {
        Cx {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn with_val(prec: u32, re: f64, im: f64) -> Self {
        Cx {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_parts(re: Float, im: Float) -> Self {
        Cx { re, im }
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        Cx {
            re,
            im: Float::new(prec),
        }
    }

    pub fn from_imag(im: Float) -> Self {
        let prec = im.prec();
        Cx {
            re: Float::new(prec),
            im,
        }
    }

    pub fn zero(prec: u32) -> Self {
        Cx::new(prec)
    }

    pub fn one(prec: u32) -> Self {
        Cx::with_val(prec, 1.0, 0.0)
    }

    pub fn i(prec: u32) -> Self {
        Cx::with_val(prec, 0.0, 1.0)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn nan(prec: u32) -> Self {
        Cx {
            re: Float::with_val(prec, Special::Nan),
            im: Float::with_val(prec, Special::Nan),
        }
    }

    pub fn conj(&self) -> Cx {
        Cx {
            re: self.re.clone(),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }

    /// Multiplication by i.
    pub fn mul_i(&self) -> Cx {
        Cx {
            re: Float::with_val(self.im.prec(), -&self.im),
            im: self.re.clone(),
        }
    }

    /// Division by i (= multiplication by -i).
    pub fn div_i(&self) -> Cx {
        Cx {
            re: self.im.clone(),
            im: Float::with_val(self.re.prec(), -&self.re),
        }
    }

    pub fn scale(&self, f: &Float) -> Cx {
        let prec = self.prec().max(f.prec());
        Cx {
            re: Float::with_val(prec, &self.re * f),
            im: Float::with_val(prec, &self.im * f),
        }
    }

    pub fn scale_f64(&self, f: f64) -> Cx {
        let prec = self.prec();
        let ff = Float::with_val(prec, f);
        self.scale(&ff)
    }

    pub fn norm_sqr(&self) -> Float {
        let prec = self.prec();
        let mut r = Float::with_val(prec, &self.re * &self.re);
        r += Float::with_val(prec, &self.im * &self.im);
        r
    }

    pub fn abs(&self) -> Float {
        self.re.clone().hypot(&self.im)
    }

    /// Principal argument in (-pi, pi].
    pub fn arg(&self) -> Float {
        self.im.clone().atan2(&self.re)
    }

    pub fn recip(&self) -> Cx {
        let n = self.norm_sqr();
        let prec = self.prec();
        Cx {
            re: Float::with_val(prec, &self.re / &n),
            im: -Float::with_val(prec, &self.im / &n),
        }
    }

    pub fn exp(&self) -> Cx {
        let prec = self.prec();
        let r = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(Float::new(prec));
        Cx {
            re: Float::with_val(prec, &r * &c),
            im: Float::with_val(prec, &r * &s),
        }
    }

    /// Principal logarithm: imaginary part in (-pi, pi].
    pub fn ln(&self) -> Cx {
        Cx {
            re: self.abs().ln(),
            im: self.arg(),
        }
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Cx {
        let prec = self.prec();
        let half = Float::with_val(prec, 0.5);
        self.ln().scale(&half).exp()
    }

    /// z^w = exp(w ln z), principal branch.
    pub fn powc(&self, w: &Cx) -> Cx {
        (&self.ln() * w).exp()
    }

    /// exp(z) - 1, accurate for small |z|.
    pub fn exp_m1(&self) -> Cx {
        let prec = self.prec();
        // e^{x+iy} - 1 = expm1(x) + e^x (cos y - 1) + i e^x sin y,
        // with cos y - 1 = -2 sin^2(y/2) to avoid cancellation.
        let em1 = self.re.clone().exp_m1();
        let ex = self.re.clone().exp();
        let half_y = Float::with_val(prec, &self.im / 2u32);
        let sh = half_y.sin();
        let mut cos_m1 = Float::with_val(prec, &sh * &sh);
        cos_m1 *= -2;
        let s = self.im.clone().sin();
        Cx {
            re: em1 + Float::with_val(prec, &ex * &cos_m1),
            im: Float::with_val(prec, &ex * &s),
        }
    }

    /// 1 - e^z, accurate for small |z|.
    pub fn one_minus_exp(&self) -> Cx {
        -&self.exp_m1()
    }

    /// Round both parts to a (possibly different) precision.
    pub fn with_prec(&self, prec: u32) -> Cx {
        Cx {
            re: Float::with_val(prec, &self.re),
            im: Float::with_val(prec, &self.im),
        }
    }

    /// Exact hex dump of both components; used as a deterministic cache key.
    pub fn key_string(&self) -> String {
        format!(
            "{}|{}",
            self.re.to_string_radix(16, None),
            self.im.to_string_radix(16, None)
        )
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $impl_fn:ident) => {
        impl $trait<&Cx> for &Cx {
            type Output = Cx;
            fn $method(self, rhs: &Cx) -> Cx {
                $impl_fn(self, rhs)
            }
        }
        impl $trait<Cx> for Cx {
            type Output = Cx;
            fn $method(self, rhs: Cx) -> Cx {
                $impl_fn(&self, &rhs)
            }
        }
        impl $trait<&Cx> for Cx {
            type Output = Cx;
            fn $method(self, rhs: &Cx) -> Cx {
                $impl_fn(&self, rhs)
            }
        }
        impl $trait<Cx> for &Cx {
            type Output = Cx;
            fn $method(self, rhs: Cx) -> Cx {
                $impl_fn(self, &rhs)
            }
        }
    };
}

fn cx_add(a: &Cx, b: &Cx) -> Cx {
    let prec = a.prec().max(b.prec());
    Cx {
        re: Float::with_val(prec, &a.re + &b.re),
        im: Float::with_val(prec, &a.im + &b.im),
    }
}

fn cx_sub(a: &Cx, b: &Cx) -> Cx {
    let prec = a.prec().max(b.prec());
    Cx {
        re: Float::with_val(prec, &a.re - &b.re),
        im: Float::with_val(prec, &a.im - &b.im),
    }
}

fn cx_mul(a: &Cx, b: &Cx) -> Cx {
    let prec = a.prec().max(b.prec());
    let mut re = Float::with_val(prec, &a.re * &b.re);
    re -= Float::with_val(prec, &a.im * &b.im);
    let mut im = Float::with_val(prec, &a.re * &b.im);
    im += Float::with_val(prec, &a.im * &b.re);
    Cx { re, im }
}

fn cx_div(a: &Cx, b: &Cx) -> Cx {
    cx_mul(a, &b.recip())
}

binop!(Add, add, cx_add);
binop!(Sub, sub, cx_sub);
binop!(Mul, mul, cx_mul);
binop!(Div, div, cx_div);

impl Neg for &Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx {
            re: Float::with_val(self.re.prec(), -&self.re),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }
}

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Cx, b: &Cx, tol: f64) -> bool {
        (a - b).abs().to_f64() < tol
    }

    #[test]
    fn exp_ln_roundtrip() {
        let z = Cx::with_val(128, 1.25, -0.7);
        let back = z.exp().ln();
        assert!(close(&z, &back, 1e-35));
    }

    #[test]
    fn exp_m1_small_argument() {
        let z = Cx::with_val(192, 1e-30, -2e-30);
        let em1 = z.exp_m1();
        // For tiny z, e^z - 1 = z to first order; error must stay tiny.
        assert!((&em1 - &z).abs().to_f64() < 1e-55);
    }

    #[test]
    fn division_and_recip() {
        let a = Cx::with_val(128, 3.0, 4.0);
        let one = &a / &a;
        assert!(close(&one, &Cx::one(128), 1e-35));
    }

    #[test]
    fn principal_branch_of_ln() {
        let z = Cx::with_val(128, -1.0, 1e-40);
        let l = z.ln();
        assert!(l.im.to_f64() > 3.14);
        let z2 = Cx::with_val(128, -1.0, -1e-40);
        assert!(z2.ln().im.to_f64() < -3.14);
    }
}
