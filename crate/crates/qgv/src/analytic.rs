//! Numeric verification of the operator-level identities: complex powers of
//! the sl2 generators applied to Gaussian test functions, matrix elements by
//! quadrature, the generalized Kac identity, the eigenfunction property of
//! Phi_lambda, and the Kashaev-transform isometry.

use crate::cx::Cx;
use crate::error::{Error, Result};
use crate::modular::ModularParameter;
use crate::pointwise::PointwiseFunction;
use crate::quad::{
    integrate_contour_with, integrate_line_with, residue_split, ContourSpec, Detour, Truncation,
};
use crate::reps::GeneratorSet;
use crate::special::gb_eval_cx;
use crate::symbolic::Rat;
use rug::Float;

/// sl2 operator actions at numeric parameter nu.
#[derive(Clone, Debug)]
pub struct Sl2Engine {
    pub mp: ModularParameter,
    pub nu: f64,
    pub prec: u32,
}

impl Sl2Engine {
    pub fn new(mp: ModularParameter, nu: f64, prec: u32) -> Self {
        Sl2Engine { mp, nu, prec }
    }

    fn pi_b(&self) -> Float {
        Float::with_val(self.prec, self.mp.pi() * self.mp.b())
    }

    /// K^{i p} = multiplication by e^{2 pi i b p u}.
    pub fn apply_k_power(&self, p: &Cx, f: PointwiseFunction) -> PointwiseFunction {
        let mu = p.mul_i().scale(&self.pi_b()).scale_f64(2.0);
        f.mul_exp_linear(&mu)
    }

    /// E^{ip} = g_b(X) e^{pi i b p nu + pi i b p u + b p d_u} g_b*(X),
    /// X = e^{-2 pi b nu - 2 pi b u}.
    pub fn apply_e_power(&self, p: &Cx, f: PointwiseFunction) -> PointwiseFunction {
        self.apply_ef_power(p, f, -1.0)
    }

    /// F^{ip} with X = e^{-2 pi b nu + 2 pi b u} and the mirrored middle.
    pub fn apply_f_power(&self, p: &Cx, f: PointwiseFunction) -> PointwiseFunction {
        self.apply_ef_power(p, f, 1.0)
    }

    fn apply_ef_power(&self, p: &Cx, f: PointwiseFunction, sign_u: f64) -> PointwiseFunction {
        let prec = self.prec;
        let pi_b = self.pi_b();
        let two_pi_b = Float::with_val(prec, &pi_b * &Float::with_val(prec, 2.0));
        // zeta(u) = -2 pi b nu + (sign_u) 2 pi b u
        let za = Cx::from_real(Float::with_val(prec, &two_pi_b * &Float::with_val(prec, sign_u)));
        let zc = Cx::from_real(-Float::with_val(
            prec,
            &two_pi_b * &Float::with_val(prec, self.nu),
        ));
        // suffix factor g_b^{-1}, then the middle, then the prefix g_b
        let f = f.mul_smallg(&self.mp, -1, &za, &zc);
        // middle: shift by -sign_u * b p, linear exp -sign_u * pi i b p u,
        // scalar e^{pi i b p nu + pi i b^2 p^2 / 2}
        let bp = p.scale(self.mp.b()).with_prec(prec);
        let delta = bp.scale_f64(-sign_u);
        let f = f.shift(&delta);
        let mu = p.mul_i().scale(&pi_b).scale_f64(-sign_u);
        let f = f.mul_exp_linear(&mu);
        let mut expo = p.mul_i().scale(&pi_b).scale_f64(self.nu);
        let b2 = Float::with_val(prec, self.mp.b() * self.mp.b());
        let half_pi_b2 = Float::with_val(prec, self.mp.pi() * &b2) / 2u32;
        expo = &expo + &(p * p).mul_i().scale(&half_pi_b2);
        let f = f.scalar_mul(&expo.exp());
        f.mul_smallg(&self.mp, 1, &za, &zc)
    }

    /// Apply one exponential monomial e^{pi b c_nu nu + pi b c_u u + i b c_d d_u}
    /// (with its exact phase) as an operator.
    pub fn apply_monomial(
        &self,
        phase: &crate::symbolic::PhaseScalar,
        c_nu: Rat,
        c_u: Rat,
        c_d: Rat,
        f: PointwiseFunction,
    ) -> PointwiseFunction {
        let prec = self.prec;
        let rf = |r: Rat| -> Float {
            Float::with_val(prec, *r.numer()) / Float::with_val(prec, *r.denom())
        };
        let pi_b = self.pi_b();
        let alpha = Cx::from_real(Float::with_val(prec, &pi_b * &rf(c_u)));
        let beta = Cx::from_imag(Float::with_val(prec, self.mp.b() * &rf(c_d)));
        let f = f.shift(&beta);
        let f = f.mul_exp_linear(&alpha);
        // scalar: phase * e^{pi b c_nu nu} * e^{alpha beta / 2}
        let angle = self.mp.phase_angle(
            (*phase.c0.numer(), *phase.c0.denom()),
            (*phase.c2.numer(), *phase.c2.denom()),
            (*phase.cm2.numer(), *phase.cm2.denom()),
        );
        let mut sc = Cx::from_imag(Float::with_val(prec, angle)).exp();
        let nu_part = Float::with_val(prec, &pi_b * &rf(c_nu)) * Float::with_val(prec, self.nu);
        sc = &sc * &Cx::from_real(nu_part).exp();
        let half = Cx::with_val(prec, 0.5, 0.0);
        sc = &sc * &(&(&alpha * &beta) * &half).exp();
        f.scalar_mul(&sc)
    }

    /// Apply a full monomial sum: returns one pointwise function per term.
    pub fn apply_sum(
        &self,
        sum: &crate::symbolic::MonomialSum,
        f: &PointwiseFunction,
    ) -> Vec<(i64, PointwiseFunction)> {
        let mut out = Vec::new();
        for (l, combo) in &sum.terms {
            for (p, mult) in &combo.0 {
                out.push((
                    *mult,
                    self.apply_monomial(p, l.nu[0], l.pos[0], l.mom[0], f.clone()),
                ));
            }
        }
        out
    }
}

/// <f, g> = integral over the real line of conj(f) g, with quadrature
/// breakpoints at the near-line poles of the integrand.
pub fn inner_product(
    mp: &ModularParameter,
    f: &PointwiseFunction,
    g: &PointwiseFunction,
    tol: f64,
    prec: u32,
) -> Result<Cx> {
    inner_product_at(mp, f, g, 0.0, tol, prec)
}

/// Same, along the shifted line Im u = shift. The Kac matrix elements use a
/// small positive shift: when the tau contour dips below the real axis, the
/// pole of the ratio factor G_b(2iu + i b(s+t+tau)) migrates upward through
/// Im u = 0, and the analytic continuation of the matrix element keeps the
/// u contour above it.
pub fn inner_product_at(
    mp: &ModularParameter,
    f: &PointwiseFunction,
    g: &PointwiseFunction,
    shift: f64,
    tol: f64,
    prec: u32,
) -> Result<Cx> {
    let integrand_fn = f.conj_form(mp).product(g);
    let breaks: Vec<f64> = integrand_fn
        .breakpoints(mp, 0.25, 16.0)
        .into_iter()
        .collect();
    let h = |u: &Cx| integrand_fn.eval(mp, u, prec);
    let r = integrate_line_with(&h, shift, tol, prec, &breaks, &Truncation::Adaptive)?;
    Ok(r.value)
}

// ---------------------------------------------------------------------------
// Generalized Kac identity (sl2)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct KacCheckSpec {
    pub b: f64,
    pub s: f64,
    pub t: f64,
    pub nu: f64,
    /// Gaussian test pair (a, center, slope) for f and g.
    pub f: (f64, f64, f64),
    pub g: (f64, f64, f64),
    pub prec: u32,
    /// imaginary offset of the tau contour
    pub eps: f64,
    /// detour radius below tau = 0
    pub radius: f64,
    pub inner_tol: f64,
    pub outer_tol: f64,
    /// imaginary offset of the inner u line
    pub u_shift: f64,
}

impl KacCheckSpec {
    pub fn new(s: f64, t: f64, nu: f64) -> Self {
        KacCheckSpec {
            b: 0.75,
            s,
            t,
            nu,
            f: (1.0, 0.15, 0.3),
            g: (1.0, -0.2, 0.5),
            prec: 64,
            // contour: slightly above the real axis, dipping below tau = 0;
            // defaults follow b = 0.75 (eps = b/100, r = eps/4)
            eps: 1e-2 * 0.75,
            radius: 1e-2 * 0.75 / 4.0,
            inner_tol: 1e-9,
            outer_tol: 3e-9,
            u_shift: 0.02,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KacOutcome {
    pub lhs: Cx,
    pub rhs_detour: Cx,
    pub rhs_split: Cx,
    pub rel_dev: f64,
    pub contour_cross_dev: f64,
}

/// Matrix element of the tau-dependent reordered word between f and g.
fn kac_me(
    eng: &Sl2Engine,
    spec: &KacCheckSpec,
    f: &PointwiseFunction,
    g: &PointwiseFunction,
    tau: &Cx,
) -> Result<Cx> {
    let prec = eng.prec;
    let mp = &eng.mp;
    let b = Float::with_val(prec, mp.b());
    let s = Cx::with_val(prec, spec.s, 0.0);
    let t = Cx::with_val(prec, spec.t, 0.0);
    // E^{i(s+tau)} g
    let p_e = &s + tau;
    let mut h = eng.apply_e_power(&p_e, g.clone());
    // ratio operator: G_b(2 i u + i b(s+t+tau)) / G_b(2 i u + i b(s+t+2tau))
    let a2i = Cx::with_val(prec, 0.0, 2.0);
    let st = Cx::with_val(prec, spec.s + spec.t, 0.0);
    let c1 = (&(&st + tau) * &Cx::from_imag(b.clone())).with_prec(prec);
    let c2 = (&(&st + &tau.scale_f64(2.0)) * &Cx::from_imag(b.clone())).with_prec(prec);
    h = h.mul_gb(1, a2i.clone(), c1).mul_gb(-1, a2i, c2);
    // K^{-i tau}
    h = eng.apply_k_power(&-tau, h);
    // F^{i(t+tau)}
    let p_f = &t + tau;
    h = eng.apply_f_power(&p_f, h);
    inner_product_at(mp, f, &h, spec.u_shift, spec.inner_tol, prec)
}

/// Scalar prefactors of the Kac integrand at tau.
fn kac_scalars(eng: &Sl2Engine, spec: &KacCheckSpec, tau: &Cx) -> Result<Cx> {
    let prec = eng.prec;
    let mp = &eng.mp;
    let b = Float::with_val(prec, mp.b());
    let pi_b_q = Float::with_val(prec, mp.pi() * mp.big_q()) * &b;
    // e^{pi b Q tau}
    let e = tau.scale(&pi_b_q).exp();
    // G_b(i b tau) G_b(-i b (t+tau)) G_b(-i b (s+tau))
    let ib = Cx::from_imag(b);
    let g0 = gb_eval_cx(mp, &(&ib * tau), prec)?;
    let zt = -&(&ib * &(&Cx::with_val(prec, spec.t, 0.0) + tau));
    let zs = -&(&ib * &(&Cx::with_val(prec, spec.s, 0.0) + tau));
    let g1 = gb_eval_cx(mp, &zt, prec)?;
    let g2 = gb_eval_cx(mp, &zs, prec)?;
    Ok(&(&(&e * &g0) * &g1) * &g2)
}

pub fn kac_check(spec: &KacCheckSpec) -> Result<KacOutcome> {
    let prec = spec.prec;
    let mp = ModularParameter::new(spec.b, prec)?;
    let eng = Sl2Engine::new(mp.clone(), spec.nu, prec);
    let f = PointwiseFunction::gaussian(prec, spec.f.0, spec.f.1, spec.f.2);
    let g = PointwiseFunction::gaussian(prec, spec.g.0, spec.g.1, spec.g.2);

    // LHS = G_b(-i b s) G_b(-i b t) <f, E^{is} F^{it} g>
    let s = Cx::with_val(prec, spec.s, 0.0);
    let t = Cx::with_val(prec, spec.t, 0.0);
    let b = Float::with_val(prec, mp.b());
    let ib = Cx::from_imag(b);
    let lhs = {
        let h = eng.apply_f_power(&t, g.clone());
        let h = eng.apply_e_power(&s, h);
        let me = inner_product_at(&mp, &f, &h, spec.u_shift, spec.inner_tol, prec)?;
        let df = gb_eval_cx(&mp, &-&(&ib * &s), prec)?;
        let dt = gb_eval_cx(&mp, &-&(&ib * &t), prec)?;
        &(&df * &dt) * &me
    };

    // the two contour realizations and the truncation probes revisit the
    // same tau nodes; memoize the integrand
    let memo: std::sync::Mutex<std::collections::HashMap<String, Cx>> =
        std::sync::Mutex::new(std::collections::HashMap::new());
    let integrand = |tau: &Cx| -> Result<Cx> {
        let key = tau.key_string();
        if let Some(v) = memo.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let sc = kac_scalars(&eng, spec, tau)?;
        let me = kac_me(&eng, spec, &f, &g, tau)?;
        let v = &sc * &me;
        memo.lock().unwrap().insert(key, v.clone());
        Ok(v)
    };

    let contour = ContourSpec::new(
        spec.eps,
        vec![Detour {
            center: (0.0, 0.0),
            radius: spec.radius,
            below: true,
        }],
        Truncation::Adaptive,
    )?;
    let breaks = [-spec.t, -spec.s];
    let rhs_detour =
        integrate_contour_with(&integrand, &contour, spec.outer_tol, prec, &breaks)?.value;
    let pole = Cx::zero(prec);
    let rhs_split = residue_split(&integrand, &pole, &contour, spec.outer_tol, prec)?.value;

    let rel_dev = ((&lhs - &rhs_detour).abs() / lhs.abs()).to_f64();
    let cross = ((&rhs_detour - &rhs_split).abs() / rhs_detour.abs()).to_f64();
    Ok(KacOutcome {
        lhs,
        rhs_detour,
        rhs_split,
        rel_dev,
        contour_cross_dev: cross,
    })
}

// ---------------------------------------------------------------------------
// Phi_lambda and the eigenfunction property
// ---------------------------------------------------------------------------

/// Phi_lambda(u) = e^{pi i u^2 + pi Q u} G_b(-iu+il) G_b(-iu-il) as a
/// pointwise function.
pub fn phi_lambda(mp: &ModularParameter, lambda: f64, prec: u32) -> PointwiseFunction {
    let pi = Float::with_val(prec, mp.pi());
    let pi_q = Float::with_val(prec, mp.pi() * mp.big_q());
    let mi = Cx::with_val(prec, 0.0, -1.0);
    let il = Cx::with_val(prec, 0.0, lambda);
    PointwiseFunction::one(prec)
        .mul_exp_quad(&Cx::from_imag(pi))
        .mul_exp_linear(&Cx::from_real(pi_q))
        .mul_gb(1, mi.clone(), il.clone())
        .mul_gb(1, mi, -il)
}

pub fn phi_lambda_eval(mp: &ModularParameter, lambda: f64, u: &Cx, prec: u32) -> Result<Cx> {
    phi_lambda(mp, lambda, prec).eval(mp, u, prec)
}

/// conj-continued Phi*_lambda(u) = e^{-pi i u^2 + pi Q u} /
/// (G_b(Q - iu + il) G_b(Q - iu - il)).
pub fn phi_lambda_star(mp: &ModularParameter, lambda: f64, prec: u32) -> PointwiseFunction {
    phi_lambda(mp, lambda, prec).conj_form(mp)
}

#[derive(Clone, Debug)]
pub struct EigenCheckSpec {
    pub b: f64,
    pub lambda: f64,
    /// complex parameter w of the operator
    pub w: (f64, f64),
    /// sample points u (real part list; common imaginary offset)
    pub u_res: Vec<f64>,
    pub u_im: f64,
    pub prec: u32,
    pub tau_shift: f64,
    pub tol: f64,
}

impl EigenCheckSpec {
    pub fn new(lambda: f64, w: (f64, f64)) -> Self {
        EigenCheckSpec {
            b: 0.75,
            lambda,
            w,
            u_res: vec![-0.35, -0.1, 0.12, 0.3, 0.55],
            u_im: 0.07,
            prec: 96,
            tau_shift: 0.03,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenOutcome {
    pub ratios: Vec<Cx>,
    pub max_u_variation: f64,
    pub constant: Cx,
    pub unimodularity_dev: f64,
}

pub fn eigenfunction_check(spec: &EigenCheckSpec) -> Result<EigenOutcome> {
    let prec = spec.prec;
    let mp = ModularParameter::new(spec.b, prec)?;
    let w = Cx::with_val(prec, spec.w.0, spec.w.1);
    let lambda = spec.lambda;
    let q_half = Float::with_val(prec, mp.big_q() / 2u32);
    let pi_q = Float::with_val(prec, mp.pi() * mp.big_q());
    let two_pi = Float::with_val(prec, mp.pi()) * 2u32;

    // h(x) = zeta_bar / G_b(Q/2 - i w - i x) * Phi_lambda(x)
    let h_fn = phi_lambda(&mp, lambda, prec)
        .scalar_mul(&mp.zeta_b_bar().with_prec(prec))
        .mul_gb(
            -1,
            Cx::with_val(prec, 0.0, -1.0),
            &Cx::from_real(q_half.clone()) - &w.mul_i(),
        );

    let mut ratios = Vec::new();
    for &ur in &spec.u_res {
        let u = Cx::with_val(prec, ur, spec.u_im);
        // kernel integral: integral d tau e^{pi Q tau + 2 pi i w tau}
        // G_b(-i tau) h(u - tau), contour above tau = 0, below tau = u -+ l.
        let integrand = |tau: &Cx| -> Result<Cx> {
            let e = (&tau.scale(&pi_q) + &(&tau.mul_i() * &w).scale(&two_pi)).exp();
            let gk = gb_eval_cx(&mp, &tau.div_i(), prec)?;
            let hv = h_fn.eval(&mp, &(&u - tau), prec)?;
            Ok(&(&e * &gk) * &hv)
        };
        let breaks = [0.0, ur - lambda, ur + lambda];
        let kernel = integrate_line_with(
            &integrand,
            spec.tau_shift,
            spec.tol * 1e-3,
            prec,
            &breaks,
            &Truncation::Adaptive,
        )?
        .value;
        // LHS = zeta_bar / G_b(Q/2 - i w + i u) * kernel
        let ga = &mp.zeta_b_bar().with_prec(prec)
            / &gb_eval_cx(&mp, &(&Cx::from_real(q_half.clone()) + &(&u - &w).mul_i()), prec)?;
        let lhs = &ga * &kernel;
        // RHS = g_b(e^{2 pi b (lambda + w)}) g_b(e^{2 pi b (-lambda + w)}) Phi_l(u)
        let two_pi_b = Float::with_val(prec, mp.pi() * mp.b()) * 2u32;
        let zl = (&Cx::with_val(prec, lambda, 0.0) + &w).scale(&two_pi_b);
        let zr = (&Cx::with_val(prec, -lambda, 0.0) + &w).scale(&two_pi_b);
        let g1 = crate::special::smallg_from_exponent(&mp, &zl, prec)?;
        let g2 = crate::special::smallg_from_exponent(&mp, &zr, prec)?;
        let phi = phi_lambda_eval(&mp, lambda, &u, prec)?;
        let rhs = &(&g1 * &g2) * &phi;
        ratios.push(&lhs / &rhs);
    }
    let constant = ratios[0].clone();
    let mut max_var = 0f64;
    for r in &ratios[1..] {
        max_var = max_var.max(((r - &constant).abs() / constant.abs()).to_f64());
    }
    let unimod = (constant.abs().to_f64() - 1.0).abs();
    Ok(EigenOutcome {
        ratios,
        max_u_variation: max_var,
        constant,
        unimodularity_dev: unimod,
    })
}

// ---------------------------------------------------------------------------
// Kashaev transform isometry
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct TransformSpec {
    pub b: f64,
    pub lambda_cutoff: f64,
    pub u_shift: f64,
    pub prec: u32,
    pub tol: f64,
}

impl Default for TransformSpec {
    fn default() -> Self {
        TransformSpec {
            b: 0.75,
            lambda_cutoff: 3.5,
            u_shift: -0.05,
            prec: 80,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IsometryOutcome {
    pub norm_in: f64,
    pub norm_out: f64,
    pub ratio: f64,
    pub tail_value: f64,
}

pub fn isometry_check(fspec: (f64, f64, f64), spec: &TransformSpec) -> Result<IsometryOutcome> {
    let prec = spec.prec;
    let mp = ModularParameter::new(spec.b, prec)?;
    let f = PointwiseFunction::gaussian(prec, fspec.0, fspec.1, fspec.2);

    // ||f||^2 on the real line
    let f2 = |u: &Cx| -> Result<Cx> {
        let v = f.eval(&mp, u, prec)?;
        Ok(Cx::from_real(v.norm_sqr()))
    };
    let norm_in = integrate_line_with(&f2, 0.0, spec.tol, prec, &[], &Truncation::Adaptive)?
        .value
        .re
        .to_f64();

    // F(lambda) = integral over R - i0 of f(u) Phi*_lambda(u)
    let f_of = |lambda: f64| -> Result<Cx> {
        let star = phi_lambda_star(&mp, lambda, prec);
        let prod = f.clone().product(&star);
        let breaks = [-lambda, lambda];
        let h = |u: &Cx| prod.eval(&mp, u, prec);
        Ok(integrate_line_with(&h, spec.u_shift, spec.tol, prec, &breaks, &Truncation::Adaptive)?.value)
    };

    // d mu = 4 sinh(pi b l) sinh(pi l / b): integrate |F|^2 d mu on [0, cutoff]
    let pi_b = Float::with_val(prec, mp.pi() * mp.b());
    let pi_bi = Float::with_val(prec, mp.pi() * mp.b_inv());
    let out_int = |l: &Cx| -> Result<Cx> {
        let lam = l.re.to_f64();
        if lam <= 0.0 {
            return Ok(Cx::zero(prec));
        }
        let fv = f_of(lam)?;
        let s1 = Float::with_val(prec, &pi_b * &l.re).sinh();
        let s2 = Float::with_val(prec, &pi_bi * &l.re).sinh();
        let mut measure = Float::with_val(prec, &s1 * &s2);
        measure *= 4u32;
        Ok(Cx::from_real(fv.norm_sqr() * measure))
    };
    let norm_out = integrate_line_with(
        &out_int,
        0.0,
        spec.tol,
        prec,
        &[],
        &Truncation::Fixed(0.0, spec.lambda_cutoff),
    )?
    .value
    .re
    .to_f64();
    let tail = f_of(spec.lambda_cutoff)?.abs().to_f64();

    Ok(IsometryOutcome {
        norm_in,
        norm_out,
        ratio: norm_out / norm_in,
        tail_value: tail,
    })
}

// ---------------------------------------------------------------------------
// Hermiticity spot checks
// ---------------------------------------------------------------------------

/// Self-adjointness residual |<f, X g> - <X f, g>| / |<f, X g>| for X one
/// of the (formally self-adjoint) sl2 generators.
pub fn hermiticity_residual(
    rep: &GeneratorSet,
    which: &str,
    nu: f64,
    prec: u32,
    tol: f64,
) -> Result<f64> {
    let mp = ModularParameter::new(0.75, prec)?;
    let eng = Sl2Engine::new(mp.clone(), nu, prec);
    let sum = match which {
        "K" => &rep.k[0],
        "E" => &rep.e[0],
        "F" => &rep.f[0],
        other => return Err(Error::Unknown(format!("generator {other}"))),
    };
    let f = PointwiseFunction::gaussian(prec, 1.0, 0.15, 0.3);
    let g = PointwiseFunction::gaussian(prec, 1.2, -0.2, -0.4);
    let mut lhs = Cx::zero(prec);
    for (mult, xg) in eng.apply_sum(sum, &g) {
        let v = inner_product(&mp, &f, &xg, tol, prec)?;
        lhs = &lhs + &v.scale_f64(mult as f64);
    }
    let mut rhs = Cx::zero(prec);
    for (mult, xf) in eng.apply_sum(sum, &f) {
        let v = inner_product(&mp, &xf, &g, tol, prec)?;
        rhs = &rhs + &v.scale_f64(mult as f64);
    }
    Ok(((&lhs - &rhs).abs() / lhs.abs()).to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reps::build_sl2_rep;

    #[test]
    fn unit_operator_inner_product_matches_gaussian_closed_form() {
        // independent oracle: int e^{-a u^2 + b u} du = sqrt(pi/a) e^{b^2/4a}
        // for conj(f) g with two real Gaussians.
        let prec = 96;
        let mp = ModularParameter::new(0.75, prec).unwrap();
        let f = PointwiseFunction::gaussian(prec, 1.0, 0.1, 0.2);
        let g = PointwiseFunction::gaussian(prec, 1.5, -0.3, 0.1);
        let got = inner_product(&mp, &f, &g, 1e-14, prec).unwrap();
        // closed form computed directly
        let pi = std::f64::consts::PI;
        let a = pi * (1.0 + 1.5);
        let bq = 2.0 * pi * 1.0 * 0.1 + 0.2 + 2.0 * pi * 1.5 * (-0.3) + 0.1;
        let c0 = -pi * 1.0 * 0.1 * 0.1 - pi * 1.5 * 0.3 * 0.3;
        let expect = (pi / a).sqrt() * (bq * bq / (4.0 * a) + c0).exp();
        assert!(
            (got.re.to_f64() - expect).abs() < 1e-12,
            "{} vs {expect}",
            got.re.to_f64()
        );
        assert!(got.im.to_f64().abs() < 1e-12);
    }

    #[test]
    fn k_power_matrix_element_matches_closed_form() {
        // <f, K g>: K = e^{2 pi b u} shifts the Gaussian linear term.
        let prec = 96;
        let mp = ModularParameter::new(0.75, prec).unwrap();
        let eng = Sl2Engine::new(mp.clone(), 0.4, prec);
        let f = PointwiseFunction::gaussian(prec, 1.0, 0.0, 0.0);
        let g = PointwiseFunction::gaussian(prec, 1.0, 0.0, 0.0);
        // K = K^{i p} with p = -i (so i p = 1)
        let p = Cx::with_val(prec, 0.0, -1.0);
        let kg = eng.apply_k_power(&p, g.clone());
        let got = inner_product(&mp, &f, &kg, 1e-14, prec).unwrap();
        let pi = std::f64::consts::PI;
        let b = mp.b_f64();
        // int e^{-2 pi u^2 + 2 pi b u} du = sqrt(1/2) e^{(2 pi b)^2/(8 pi)}
        let expect = (0.5f64).sqrt() * ((2.0 * pi * b) * (2.0 * pi * b) / (8.0 * pi)).exp();
        assert!(
            (got.re.to_f64() - expect).abs() / expect < 1e-12,
            "{} vs {expect}",
            got.re.to_f64()
        );
    }

    #[test]
    fn bilinearity_of_matrix_elements() {
        let prec = 96;
        let mp = ModularParameter::new(0.75, prec).unwrap();
        let eng = Sl2Engine::new(mp.clone(), 0.4, prec);
        let f = PointwiseFunction::gaussian(prec, 1.0, 0.1, 0.0);
        let g1 = PointwiseFunction::gaussian(prec, 1.0, -0.1, 0.2);
        let g2 = PointwiseFunction::gaussian(prec, 1.3, 0.2, -0.1);
        let s = Cx::with_val(prec, 0.3, 0.0);
        let m1 = inner_product(&mp, &f, &eng.apply_e_power(&s, g1.clone()), 1e-12, prec).unwrap();
        let m2 = inner_product(&mp, &f, &eng.apply_e_power(&s, g2.clone()), 1e-12, prec).unwrap();
        // E^{is}(g1 + g2) evaluated termwise: linearity is exact in the
        // carrier, so check <f, E(g1)> + <f, E(g2)> against summed carriers
        let sum = &m1 + &m2;
        let h1 = eng.apply_e_power(&s, g1);
        let h2 = eng.apply_e_power(&s, g2);
        let mut total = Cx::zero(prec);
        for h in [h1, h2] {
            total = &total + &inner_product(&mp, &f, &h, 1e-12, prec).unwrap();
        }
        assert!((&sum - &total).abs().to_f64() < 1e-12);
    }

    #[test]
    fn e_power_tree_shape() {
        let prec = 96;
        let mp = ModularParameter::new(0.75, prec).unwrap();
        let eng = Sl2Engine::new(mp.clone(), 0.4, prec);
        let g = PointwiseFunction::gaussian(prec, 1.0, 0.0, 0.0);
        let s = Cx::with_val(prec, 0.3, 0.0);
        let eg = eng.apply_e_power(&s, g);
        assert_eq!(eg.factors.len(), 2);
        assert_eq!(
            eg.factors.iter().map(|f| f.exponent).collect::<Vec<_>>(),
            vec![1, -1]
        );
    }

    #[test]
    fn hermiticity_of_sl2_generators() {
        let rep = build_sl2_rep();
        for which in ["K", "E", "F"] {
            let r = hermiticity_residual(&rep, which, 0.4, 96, 1e-12).unwrap();
            assert!(r < 1e-8, "{which}: residual {r}");
        }
    }

    #[test]
    fn phi_lambda_symmetry_and_finiteness() {
        let prec = 96;
        let mp = ModularParameter::new(0.75, prec).unwrap();
        for (re, im) in [(0.3, 0.0), (-0.4, 0.1), (0.0, 0.2), (0.9, -0.05), (1.4, 0.0)] {
            let u = Cx::with_val(prec, re, im);
            let a = phi_lambda_eval(&mp, 0.5, &u, prec).unwrap();
            let b = phi_lambda_eval(&mp, -0.5, &u, prec).unwrap();
            assert!(((&a - &b).abs() / a.abs()).to_f64() < 1e-22);
        }
        let v = phi_lambda_eval(&mp, 0.5, &Cx::with_val(prec, 0.0, 0.2), prec).unwrap();
        assert!(v.is_finite() && v.abs().to_f64() > 0.0);
    }

    #[test]
    fn phi_lambda_decays_along_positive_axis() {
        let prec = 96;
        let mp = ModularParameter::new(0.75, prec).unwrap();
        let v1 = phi_lambda_eval(&mp, 0.5, &Cx::with_val(prec, 2.0, 0.0), prec)
            .unwrap()
            .abs()
            .to_f64();
        let v2 = phi_lambda_eval(&mp, 0.5, &Cx::with_val(prec, 4.0, 0.0), prec)
            .unwrap()
            .abs()
            .to_f64();
        // |Phi| ~ e^{-pi Q u}: two units further out should cost ~ e^{-2 pi Q}
        let expect = (-2.0 * std::f64::consts::PI * mp.big_q_f64()).exp();
        let got = v2 / v1;
        assert!((got / expect).ln().abs() < 0.7, "ratio {got} vs {expect}");
    }
}
