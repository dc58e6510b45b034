//! Numeric verification of the scalar G_b / g_b identities: functional
//! equations, reflection, the Fourier representation of g_b, the 4-5
//! integral identity, asymptotics, and the inversion-constant measurement.

use crate::cx::Cx;
use crate::error::Result;
use crate::modular::ModularParameter;
use crate::quad::{integrate_segments, Segment};
use crate::special::{gb_eval_cx, lattice_classify, smallg_eval, LatticeKind};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Float;

/// Relative residual of G_b(z + b^{±1}) = (1 - e^{2 pi i b^{±1} z}) G_b(z),
/// maximized over the two shift directions.
pub fn functional_equation_residual(mp: &ModularParameter, z: &Cx, prec: u32) -> Result<Float> {
    let g = gb_eval_cx(mp, z, prec)?;
    let mut worst = Float::new(prec);
    for dir in [mp.b().clone(), mp.b_inv().clone()] {
        let zp = z + &Cx::from_real(dir.clone());
        let lhs = gb_eval_cx(mp, &zp, prec)?;
        let two_pi_i_d = Cx::from_imag(Float::with_val(prec, mp.pi() * &dir)).scale_f64(2.0);
        let factor = -(&two_pi_i_d * z).exp_m1();
        let rhs = &factor * &g;
        let r = ((&lhs - &rhs).abs() / lhs.abs()).into();
        if r > worst {
            worst = r;
        }
    }
    Ok(worst)
}

/// Relative residual of G_b(z) G_b(Q - z) = e^{pi i z (z - Q)}.
pub fn reflection_residual(mp: &ModularParameter, z: &Cx, prec: u32) -> Result<Float> {
    let q = Cx::from_real(Float::with_val(prec, mp.big_q()));
    let lhs = &gb_eval_cx(mp, z, prec)? * &gb_eval_cx(mp, &(&q - z), prec)?;
    let rhs = (z * &(z - &q)).mul_i().scale(mp.pi()).exp();
    Ok(((&lhs - &rhs).abs() / rhs.abs()).into())
}

/// Draw `n` pseudo-random points in the extended plane, at least 1e-3 away
/// from every lattice point involved in the functional/reflection checks.
pub fn sample_regular_points(mp: &ModularParameter, n: usize, seed: u64) -> Vec<Cx> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = mp.big_q_f64();
    let prec = mp.prec();
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let re = rng.gen_range(-2.0 * q..3.0 * q);
        let im = rng.gen_range(-3.0..3.0);
        let z = Cx::with_val(prec, re, im);
        let b = mp.b_f64();
        let clear = [
            (re, im),
            (re + b, im),
            (re + 1.0 / b, im),
            (q - re, -im),
        ]
        .iter()
        .all(|&(r, i)| {
            lattice_classify(mp, &Cx::with_val(64, r, i), 1e-3).kind == LatticeKind::Regular
        });
        if clear {
            pts.push(z);
        }
    }
    pts
}

/// Fourier representation of g_b:
/// g_b(x) = integral d tau x^{i b^-1 tau} e^{pi Q tau} G_b(-i tau),
/// with the contour passing above tau = 0 and the right tail rotated by
/// -pi/4 to pick up the Fresnel decay. Returns (quadrature, g_b(x), rel err).
pub fn fourier_rep_check(mp: &ModularParameter, x: f64, prec: u32) -> Result<(Cx, Cx, Float)> {
    let ln_x = Float::with_val(prec, x).ln();
    let pi_q = Float::with_val(prec, mp.pi() * mp.big_q());
    let b_inv = mp.b_inv().clone();

    let integrand = |tau: &Cx| -> Result<Cx> {
        // exponent: i b^-1 tau ln x + pi Q tau
        let e1 = tau.mul_i().scale(&b_inv).scale(&ln_x);
        let e2 = tau.scale(&pi_q);
        let gb = gb_eval_cx(mp, &tau.div_i(), prec)?;
        Ok(&(&e1 + &e2).exp() * &gb)
    };

    let h = 0.3;
    let t_left = 14.0;
    let t0 = 1.5;
    let ray_len = 9.0;
    let dir = Cx::with_val(prec, std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2);
    let corner = Cx::with_val(prec, t0, h);
    let segs = vec![
        Segment::Line {
            from: Cx::with_val(prec, -t_left, h),
            to: corner.clone(),
        },
        Segment::Line {
            from: corner.clone(),
            to: &corner + &dir.scale_f64(ray_len),
        },
    ];
    let quad = integrate_segments(&integrand, &segs, prec, 1e-13)?;
    let gbx = smallg_eval(mp, &Cx::with_val(prec, x, 0.0), prec)?;
    let rel = ((&quad.value - &gbx).abs() / gbx.abs()).into();
    Ok((quad.value, gbx, rel))
}

/// 4-5 integral identity:
/// integral d tau e^{-2 pi gamma tau} G_b(a+it)G_b(b+it) /
/// (G_b(a+b+g+it) G_b(Q+it))  =  G_b(a)G_b(b)G_b(g) / (G_b(a+g)G_b(b+g)).
/// Contour above the integrand pole at tau = 0 (from the zero of G_b(Q+it)).
/// Returns (lhs quadrature, rhs closed form, rel err).
pub fn int45_check(
    mp: &ModularParameter,
    alpha: f64,
    beta: f64,
    gamma: f64,
    prec: u32,
) -> Result<(Cx, Cx, Float)> {
    let a = Cx::with_val(prec, alpha, 0.0);
    let bb = Cx::with_val(prec, beta, 0.0);
    let g = Cx::with_val(prec, gamma, 0.0);
    let q = Cx::from_real(Float::with_val(prec, mp.big_q()));
    let abg = &(&a + &bb) + &g;
    let two_pi_g = Float::with_val(prec, mp.pi() * 2u32) * Float::with_val(prec, gamma);

    let integrand = |tau: &Cx| -> Result<Cx> {
        let it = tau.mul_i();
        let num = &gb_eval_cx(mp, &(&a + &it), prec)? * &gb_eval_cx(mp, &(&bb + &it), prec)?;
        let den =
            &gb_eval_cx(mp, &(&abg + &it), prec)? * &gb_eval_cx(mp, &(&q + &it), prec)?;
        let e = (-tau.scale(&two_pi_g)).exp();
        Ok(&(&e * &num) / &den)
    };

    let h = 0.5 * alpha.min(beta).min(0.5);
    // decay: e^{-2 pi gamma tau} to the right, e^{-2 pi Q |tau|} to the left
    let l = 30.0f64.max(-(1e-14f64).ln());
    let t_right = l / (2.0 * std::f64::consts::PI * gamma) + 2.0;
    let t_left = l / (2.0 * std::f64::consts::PI * mp.big_q_f64()) + 2.0;
    let mut segs = Vec::new();
    // breakpoint at Re tau = 0 over the pole
    for (a0, b0) in [(-t_left, 0.0), (0.0, t_right)] {
        segs.push(Segment::Line {
            from: Cx::with_val(prec, a0, h),
            to: Cx::with_val(prec, b0, h),
        });
    }
    let quad = integrate_segments(&integrand, &segs, prec, 1e-12)?;

    let rhs = {
        let num = &(&gb_eval_cx(mp, &a, prec)? * &gb_eval_cx(mp, &bb, prec)?)
            * &gb_eval_cx(mp, &g, prec)?;
        let den = &gb_eval_cx(mp, &(&a + &g), prec)?
            * &gb_eval_cx(mp, &(&bb + &g), prec)?;
        &num / &den
    };
    let rel = ((&quad.value - &rhs).abs() / rhs.abs()).into();
    Ok((quad.value, rhs, rel))
}

/// Relative deviation between gb_eval and the asymptotic regime value.
pub fn asymptotic_residual(mp: &ModularParameter, z: &Cx, prec: u32) -> Result<Float> {
    let a = crate::special::gb_asymptotic(mp, z)?;
    let v = gb_eval_cx(mp, z, prec)?;
    Ok(((&v - &a).abs() / a.abs()).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp() -> ModularParameter {
        ModularParameter::new(0.75, 128).unwrap()
    }

    #[test]
    fn fourier_rep_at_paper_point() {
        let mp = mp();
        let (_, _, rel) = fourier_rep_check(&mp, 1.3, 128).unwrap();
        assert!(rel.to_f64() < 1e-10, "rel = {:e}", rel.to_f64());
    }

    #[test]
    fn int45_at_spec_triple() {
        let mp = mp();
        let q = mp.big_q_f64();
        let (_, _, rel) = int45_check(&mp, 0.3 * q, 0.3 * q, 0.25 * q, 128).unwrap();
        assert!(rel.to_f64() < 1e-9, "rel = {:e}", rel.to_f64());
    }

    #[test]
    fn functional_and_reflection_at_random_points() {
        let mp = ModularParameter::new(0.75, 192).unwrap();
        for z in sample_regular_points(&mp, 8, 42) {
            let fe = functional_equation_residual(&mp, &z, 192).unwrap();
            assert!(fe.to_f64() < 1e-30, "fe residual {:e} at {:?}", fe.to_f64(), z);
            let rf = reflection_residual(&mp, &z, 192).unwrap();
            assert!(rf.to_f64() < 1e-30, "rf residual {:e} at {:?}", rf.to_f64(), z);
        }
    }
}
