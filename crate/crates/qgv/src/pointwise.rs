//! Evaluable carrier for operator actions on test functions.
//!
//! Everything the generator powers, the Kac ratio and the eigenfunction
//! kernels produce stays inside one closed form:
//!
//!   f(u) = S * exp(A u^2 + B u) * prod_k G_b(a_k u + c_k)^{e_k},  e_k = +-1,
//!
//! which is closed under scalar multiplication, multiplication by linear and
//! quadratic exponentials, complex argument shifts, g_b / G_b factors and
//! complex conjugation (via conj G_b(conj z) = 1 / G_b(Q - z)).

use crate::cx::Cx;
use crate::error::Result;
use crate::modular::ModularParameter;
use crate::special::gb_eval_cx;
use rug::Float;

#[derive(Clone, Debug)]
pub struct GbPointFactor {
    /// +1: multiply by G_b(a u + c); -1: divide by it.
    pub exponent: i32,
    pub a: Cx,
    pub c: Cx,
}

#[derive(Clone, Debug)]
pub struct PointwiseFunction {
    pub scalar: Cx,
    /// coefficient of u^2 in the exponent
    pub quad: Cx,
    /// coefficient of u in the exponent
    pub linear: Cx,
    pub factors: Vec<GbPointFactor>,
}

impl PointwiseFunction {
    pub fn one(prec: u32) -> Self {
        PointwiseFunction {
            scalar: Cx::one(prec),
            quad: Cx::zero(prec),
            linear: Cx::zero(prec),
            factors: Vec::new(),
        }
    }

    /// Gaussian test function e^{-pi a (u - center)^2 + slope u}.
    pub fn gaussian(prec: u32, a: f64, center: f64, slope: f64) -> Self {
        let pi = Float::with_val(prec, rug::float::Constant::Pi);
        let af = Float::with_val(prec, a);
        let cf = Float::with_val(prec, center);
        let quad = Cx::from_real(-(pi.clone() * &af));
        let mut lin = Float::with_val(prec, &pi * &af);
        lin *= &cf;
        lin *= 2u32;
        lin += Float::with_val(prec, slope);
        let linear = Cx::from_real(lin);
        let mut sc = Float::with_val(prec, &pi * &af);
        sc *= Float::with_val(prec, &cf * &cf);
        let scalar = Cx::from_real(-sc).exp();
        PointwiseFunction {
            scalar,
            quad,
            linear,
            factors: Vec::new(),
        }
    }

    pub fn scalar_mul(mut self, c: &Cx) -> Self {
        self.scalar = &self.scalar * c;
        self
    }

    /// multiply by e^{mu u}
    pub fn mul_exp_linear(mut self, mu: &Cx) -> Self {
        self.linear = &self.linear + mu;
        self
    }

    /// multiply by e^{alpha u^2}
    pub fn mul_exp_quad(mut self, alpha: &Cx) -> Self {
        self.quad = &self.quad + alpha;
        self
    }

    /// replace u by u + delta everywhere
    pub fn shift(mut self, delta: &Cx) -> Self {
        // A(u+d)^2 + B(u+d) = A u^2 + (2Ad + B) u + (Ad^2 + Bd)
        let two = Cx::with_val(delta.prec().max(self.quad.prec()), 2.0, 0.0);
        let add_scalar = (&(&self.quad * delta) * delta) + (&self.linear * delta);
        self.linear = &self.linear + &(&(&self.quad * &two) * delta);
        self.scalar = &self.scalar * &add_scalar.exp();
        for f in &mut self.factors {
            f.c = &f.c + &(&f.a * delta);
        }
        self
    }

    /// multiply by G_b(a u + c)^{exponent}
    pub fn mul_gb(mut self, exponent: i32, a: Cx, c: Cx) -> Self {
        self.factors.push(GbPointFactor { exponent, a, c });
        self
    }

    /// multiply by g_b(e^{za u + zc})^{sign}: a zeta_b-bar power and a G_b
    /// factor at Q/2 - i (za u + zc)/(2 pi b).
    pub fn mul_smallg(self, mp: &ModularParameter, sign: i32, za: &Cx, zc: &Cx) -> Self {
        let prec = self.scalar.prec();
        let two_pi_b = Float::with_val(prec, mp.pi() * mp.b()) * 2u32;
        let inv = two_pi_b.recip();
        let a = za.div_i().scale(&inv);
        let mut c = zc.div_i().scale(&inv);
        c.re += Float::with_val(prec, mp.big_q() / 2u32);
        let zb = if sign > 0 {
            mp.zeta_b_bar().with_prec(prec)
        } else {
            mp.zeta_b().with_prec(prec)
        };
        self.scalar_mul(&zb).mul_gb(-sign, a, c)
    }

    /// pointwise product
    pub fn product(mut self, other: &PointwiseFunction) -> Self {
        self.scalar = &self.scalar * &other.scalar;
        self.quad = &self.quad + &other.quad;
        self.linear = &self.linear + &other.linear;
        self.factors.extend(other.factors.iter().cloned());
        self
    }

    /// The analytic continuation of u -> conj(f(conj u)); on the real axis
    /// this is complex conjugation. Uses conj G_b(conj z) = 1/G_b(Q - z).
    pub fn conj_form(&self, mp: &ModularParameter) -> Self {
        let q = Float::with_val(self.scalar.prec(), mp.big_q());
        PointwiseFunction {
            scalar: self.scalar.conj(),
            quad: self.quad.conj(),
            linear: self.linear.conj(),
            factors: self
                .factors
                .iter()
                .map(|f| GbPointFactor {
                    exponent: -f.exponent,
                    a: -&f.a.conj(),
                    c: &Cx::from_real(q.clone()) - &f.c.conj(),
                })
                .collect(),
        }
    }

    pub fn eval(&self, mp: &ModularParameter, u: &Cx, prec: u32) -> Result<Cx> {
        let mut acc = (&(&(&self.quad * u) + &self.linear) * u).exp();
        acc = &acc * &self.scalar;
        for f in &self.factors {
            let z = &(&f.a * u) + &f.c;
            let g = gb_eval_cx(mp, &z, prec)?;
            acc = if f.exponent > 0 { &acc * &g } else { &acc / &g };
        }
        Ok(acc)
    }

    /// Real parts of u where a factor argument comes close (within `band` in
    /// the imaginary direction) to a pole of the factor: the G_b pole
    /// lattice for exponent +1, the zero lattice for exponent -1. These are
    /// quadrature breakpoints.
    pub fn breakpoints(&self, mp: &ModularParameter, band: f64, range: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let b = mp.b_f64();
        let q = mp.big_q_f64();
        for f in &self.factors {
            if f.a.abs().to_f64() < 1e-12 {
                continue;
            }
            // lattice targets: a few nearest points suffice at our bands
            let mut targets = Vec::new();
            for n1 in 0..3i32 {
                for n2 in 0..2i32 {
                    let base = n1 as f64 * b + n2 as f64 / b;
                    if f.exponent > 0 {
                        targets.push(-base);
                    } else {
                        targets.push(q + base);
                    }
                }
            }
            for target in targets {
                // solve a u + c = target
                let t = Cx::with_val(f.a.prec(), target, 0.0);
                let u0 = &(&t - &f.c) / &f.a;
                let im = u0.im.to_f64();
                let re = u0.re.to_f64();
                if im.abs() <= band && re.abs() <= range {
                    out.push(re);
                }
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp() -> ModularParameter {
        ModularParameter::new(0.75, 128).unwrap()
    }

    #[test]
    fn pure_gaussian_at_zero() {
        let f = PointwiseFunction::gaussian(128, 1.0, 0.0, 0.0);
        let v = f.eval(&mp(), &Cx::zero(128), 128).unwrap();
        assert!((v.re.to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn smallg_factor_unimodular_on_reals() {
        let mp = mp();
        let prec = 128;
        // g_b(e^{-2 pi b nu - 2 pi b u}) at real u
        let two_pi_b = -2.0 * std::f64::consts::PI * mp.b_f64();
        let f = PointwiseFunction::one(prec).mul_smallg(
            &mp,
            1,
            &Cx::with_val(prec, two_pi_b, 0.0),
            &Cx::with_val(prec, two_pi_b * 0.4, 0.0),
        );
        let v = f.eval(&mp, &Cx::with_val(prec, 0.37, 0.0), prec).unwrap();
        assert!((v.abs().to_f64() - 1.0).abs() < 1e-25);
    }

    #[test]
    fn shift_matches_direct_continuation_for_gaussian() {
        // closed-form oracle: for f = e^{-pi(u-c)^2 + beta u},
        // f(u - i b) evaluated directly equals the shifted tree.
        let mp = mp();
        let prec = 128;
        let (a, c, beta) = (1.0, 0.2, 0.5);
        let f = PointwiseFunction::gaussian(prec, a, c, beta);
        let delta = Cx::with_val(prec, 0.0, -mp.b_f64());
        let shifted = f.clone().shift(&delta);
        let u = Cx::with_val(prec, 0.83, 0.0);
        let lhs = shifted.eval(&mp, &u, prec).unwrap();
        let rhs = f.eval(&mp, &(&u + &delta), prec).unwrap();
        assert!((&lhs - &rhs).abs().to_f64() < 1e-30);
    }

    #[test]
    fn conj_form_agrees_with_conjugation_on_reals() {
        let mp = mp();
        let prec = 128;
        let two_pi_b = 2.0 * std::f64::consts::PI * mp.b_f64();
        let f = PointwiseFunction::gaussian(prec, 1.0, -0.1, 0.3)
            .mul_smallg(
                &mp,
                1,
                &Cx::with_val(prec, two_pi_b, 0.0),
                &Cx::with_val(prec, -two_pi_b * 0.4, 0.0),
            )
            .mul_gb(1, Cx::with_val(prec, 0.0, 2.0), Cx::with_val(prec, 0.9, 0.1));
        let fc = f.conj_form(&mp);
        let u = Cx::with_val(prec, 0.41, 0.0);
        let direct = f.eval(&mp, &u, prec).unwrap().conj();
        let via_form = fc.eval(&mp, &u, prec).unwrap();
        assert!(
            ((&direct - &via_form).abs() / direct.abs()).to_f64() < 1e-25,
            "{direct:?} vs {via_form:?}"
        );
    }

    #[test]
    fn breakpoints_found_for_kac_ratio_factor() {
        let mp = mp();
        let prec = 96;
        // G_b(2 i u + i b(s+t+tau)) with tau = Re tau + i eps: pole line hits
        // near u* = -b(s+t+Re tau)/2
        let s_t_tau = 0.8 + 0.3;
        let eps = 0.0075;
        let c = Cx::with_val(prec, -mp.b_f64() * eps, mp.b_f64() * s_t_tau);
        let f = PointwiseFunction::one(prec).mul_gb(1, Cx::with_val(prec, 0.0, 2.0), c);
        let bps = f.breakpoints(&mp, 0.05, 8.0);
        let expect = -mp.b_f64() * s_t_tau / 2.0;
        assert!(
            bps.iter().any(|x| (x - expect).abs() < 1e-6),
            "{bps:?} vs {expect}"
        );
    }
}
