//! Suite drivers: map every acceptance-level check onto IdentityReports.
//!
//! Tolerances are pinned here, next to the checks they gate.

use crate::analytic::{
    eigenfunction_check, hermiticity_residual, isometry_check, kac_check, EigenCheckSpec,
    KacCheckSpec, TransformSpec,
};
use crate::cx::Cx;
use crate::error::Result;
use crate::modular::ModularParameter;
use crate::report::{IdentityReport, Status, SuiteConfig, SuiteId};
use crate::reps::{build_sl2_rep, build_sl3_rep, check_relation, load_manifest, term_counts, ReducedWord};
use crate::rewrite::{load_scripts, replay, RuleContext};
use crate::scalar_checks::{
    asymptotic_residual, fourier_rep_check, functional_equation_residual, int45_check,
    reflection_residual, sample_regular_points,
};
use crate::special::measure_inversion_constant;
use crate::symbolic::{rat, PhaseScalar};
use rug::Float;
use std::time::Instant;

// Acceptance tolerances.
pub const TOL_FUNCTIONAL: f64 = 1e-20;
pub const TOL_INT45: f64 = 1e-8;
pub const TOL_FOURIER: f64 = 1e-8;
pub const TOL_ASYMPTOTIC: f64 = 1e-20;
pub const TOL_INVERSION: f64 = 1e-10;
pub const TOL_KAC: f64 = 1e-4;
pub const TOL_KAC_CROSS: f64 = 1e-8;
pub const TOL_EIGEN: f64 = 1e-6;
pub const TOL_ISOMETRY: f64 = 1e-3;
pub const TOL_HERMITICITY: f64 = 1e-8;

fn timed<T>(f: impl FnOnce() -> T) -> (T, u128) {
    let t0 = Instant::now();
    let v = f();
    (v, t0.elapsed().as_millis())
}

fn error_report(suite: &str, id: &str, e: &crate::error::Error) -> IdentityReport {
    IdentityReport {
        suite: suite.into(),
        check_id: id.into(),
        status: Status::Fail,
        residual: "error".into(),
        tolerance: "n/a".into(),
        runtime_ms: 0,
        details: [("error".to_string(), e.to_string())].into_iter().collect(),
    }
}

// ---------------------------------------------------------------------------
// scalar suite
// ---------------------------------------------------------------------------

pub fn run_scalar(cfg: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    let suite = "scalar";
    let mut out = Vec::new();
    let prec = cfg.prec;
    let mp = ModularParameter::new(cfg.b, prec)?;
    let tol_fun = cfg.tol_override.unwrap_or(TOL_FUNCTIONAL);

    // functional equations + reflection at 100 pseudo-random regular points
    let ((fe_worst, rf_worst), ms) = timed(|| {
        let mut fe = 0f64;
        let mut rf = 0f64;
        for z in sample_regular_points(&mp, 100, cfg.seed) {
            fe = fe.max(
                functional_equation_residual(&mp, &z, prec)
                    .map(|v| v.to_f64())
                    .unwrap_or(f64::NAN),
            );
            rf = rf.max(
                reflection_residual(&mp, &z, prec)
                    .map(|v| v.to_f64())
                    .unwrap_or(f64::NAN),
            );
        }
        (fe, rf)
    });
    out.push(IdentityReport::numeric(
        suite,
        "functional-equations-100pts",
        fe_worst,
        tol_fun,
        ms,
    ));
    out.push(IdentityReport::numeric(
        suite,
        "reflection-100pts",
        rf_worst,
        tol_fun,
        ms,
    ));

    // 4-5 integral identity at 5 parameter triples in the convergence region
    let q = mp.big_q_f64();
    let triples = [
        (0.30 * q, 0.30 * q, 0.25 * q),
        (0.25 * q, 0.35 * q, 0.20 * q),
        (0.40 * q, 0.20 * q, 0.30 * q),
        (0.20 * q, 0.25 * q, 0.35 * q),
        (0.35 * q, 0.30 * q, 0.15 * q),
    ];
    for (i, (a, b2, g)) in triples.iter().enumerate() {
        let (res, ms) = timed(|| int45_check(&mp, *a, *b2, *g, 128));
        match res {
            Ok((_, _, rel)) => out.push(IdentityReport::numeric(
                suite,
                &format!("int45-triple{}", i + 1),
                rel.to_f64(),
                cfg.tol_override.unwrap_or(TOL_INT45),
                ms,
            )),
            Err(e) => out.push(error_report(suite, &format!("int45-triple{}", i + 1), &e)),
        }
    }

    // Fourier representation of g_b at 5 points of (0.2, 5)
    for (i, x) in [0.3, 0.8, 1.3, 2.4, 4.5].iter().enumerate() {
        let (res, ms) = timed(|| fourier_rep_check(&mp, *x, 128));
        match res {
            Ok((_, _, rel)) => out.push(IdentityReport::numeric(
                suite,
                &format!("fourier-x{}", i + 1),
                rel.to_f64(),
                cfg.tol_override.unwrap_or(TOL_FOURIER),
                ms,
            )),
            Err(e) => out.push(error_report(suite, &format!("fourier-x{}", i + 1), &e)),
        }
    }

    // asymptotic regimes at |Im z| = 50
    for (id, im) in [("asymptotic-upper", 50.0), ("asymptotic-lower", -50.0)] {
        let z = Cx::with_val(prec, 0.8, im);
        let (res, ms) = timed(|| asymptotic_residual(&mp, &z, prec));
        match res {
            Ok(rel) => out.push(IdentityReport::numeric(
                suite,
                id,
                rel.to_f64(),
                cfg.tol_override.unwrap_or(TOL_ASYMPTOTIC),
                ms,
            )),
            Err(e) => out.push(error_report(suite, id, &e)),
        }
    }

    // inversion constant: x-independent, unimodular, matches the derived
    // phase e^{pi i (b^2+b^-2)/12}
    let (res, ms) = timed(|| measure_inversion_constant(&mp, &[0.4, 0.9, 1.7, 2.6, 4.1], prec));
    match res {
        Ok((c, spread)) => {
            let angle = mp.phase_angle((0, 1), (1, 12), (1, 12));
            let derived = Cx::from_imag(angle).exp();
            let match_dev = ((&c - &derived).abs() / derived.abs()).to_f64();
            out.push(
                IdentityReport::numeric(
                    suite,
                    "inversion-constant",
                    spread.to_f64().max(match_dev),
                    TOL_INVERSION,
                    ms,
                )
                .with_detail("measured_re", format!("{}", c.re.to_f64()))
                .with_detail("measured_im", format!("{}", c.im.to_f64()))
                .with_detail("phase_form", "e^{i pi (b^2+b^-2)/12}".into())
                .with_detail("x_spread", format!("{:e}", spread.to_f64()))
                .with_detail("derived_match_dev", format!("{match_dev:e}")),
            );
        }
        Err(e) => out.push(error_report(suite, "inversion-constant", &e)),
    }

    Ok(out)
}

// ---------------------------------------------------------------------------
// symbolic suite
// ---------------------------------------------------------------------------

pub fn run_symbolic(_cfg: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    let suite = "symbolic";
    let mut out = Vec::new();
    let manifest = load_manifest()?;
    let reps = [
        build_sl2_rep(),
        build_sl3_rep(ReducedWord::S1S2S1)?,
        build_sl3_rep(ReducedWord::S2S1S2)?,
    ];
    for rep in &reps {
        let name = rep.spec.name();
        let (checks, counts) = manifest
            .sections
            .get(name)
            .ok_or_else(|| crate::error::Error::FixtureParse(format!("manifest misses {name}")))?;
        let (ok, ms) = timed(|| term_counts(rep) == *counts);
        out.push(IdentityReport::exact(
            suite,
            &format!("{name}/term-counts"),
            ok,
            ms,
        ));
        for id in checks {
            let (res, ms) = timed(|| check_relation(rep, id));
            match res {
                Ok(r) => {
                    let mut rep_out =
                        IdentityReport::exact(suite, &format!("{name}/{id}"), r.passed(), ms);
                    if !r.passed() {
                        rep_out = rep_out.with_detail("residual", r.residual.render());
                    }
                    out.push(rep_out);
                }
                Err(e) => out.push(error_report(suite, &format!("{name}/{id}"), &e)),
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// rewrite suite
// ---------------------------------------------------------------------------

/// Measure the inversion constant numerically, check it matches the phase
/// e^{pi i (b^2+b^-2)/12}, and return the rule context with that constant.
pub fn calibrated_rule_context(b: f64) -> Result<(RuleContext, f64)> {
    let mp = ModularParameter::new(b, 128)?;
    let (c, _spread) = measure_inversion_constant(&mp, &[0.5, 1.4, 2.3], 128)?;
    let candidate = PhaseScalar::new(rat(0, 1), rat(1, 12), rat(1, 12));
    let angle = mp.phase_angle((0, 1), (1, 12), (1, 12));
    let derived = Cx::from_imag(angle).exp();
    let dev = ((&c - &derived).abs() / derived.abs()).to_f64();
    if dev > 1e-9 {
        return Err(crate::error::Error::Precision(format!(
            "measured inversion constant does not match the candidate phase (dev {dev:e})"
        )));
    }
    Ok((RuleContext::new(candidate), dev))
}

pub fn run_rewrite(cfg: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    let suite = "rewrite";
    let mut out = Vec::new();
    let ((ctx, dev), ms) = match timed(|| calibrated_rule_context(cfg.b)) {
        (Ok(v), ms) => (v, ms),
        (Err(e), _) => {
            out.push(error_report(suite, "inversion-injection", &e));
            return Ok(out);
        }
    };
    out.push(
        IdentityReport::numeric(suite, "inversion-injection", dev, 1e-9, ms)
            .with_detail("constant", "ph[0,1/12,1/12]".into()),
    );
    let scripts = load_scripts(&ctx)?;
    for s in &scripts {
        let (r, ms) = timed(|| replay(&ctx, s));
        let mut rep = IdentityReport::exact(suite, s.name(), r.passed, ms);
        if !r.passed {
            rep = rep.with_detail("detail", r.detail.clone());
        }
        rep = rep.with_detail("steps", format!("{}", r.steps.len()));
        out.push(rep);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// sl2 Kac suite
// ---------------------------------------------------------------------------

pub fn run_sl2_kac(cfg: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    let suite = "sl2-kac";
    let mut out = Vec::new();
    let points = [(0.3, 0.5, 0.4), (0.7, 0.2, 0.6)];
    let mut ratios = Vec::new();
    for (i, (s, t, nu)) in points.iter().enumerate() {
        let mut spec = KacCheckSpec::new(*s, *t, *nu);
        spec.b = cfg.b;
        let (res, ms) = timed(|| kac_check(&spec));
        match res {
            Ok(o) => {
                out.push(
                    IdentityReport::numeric(
                        suite,
                        &format!("kac-point{}", i + 1),
                        o.rel_dev,
                        cfg.tol_override.unwrap_or(TOL_KAC),
                        ms,
                    )
                    .with_detail("lhs", format!("{:?}", o.lhs))
                    .with_detail("rhs", format!("{:?}", o.rhs_detour))
                    .with_detail("s_t_nu", format!("{s} {t} {nu}")),
                );
                out.push(IdentityReport::numeric(
                    suite,
                    &format!("kac-point{}-contour-cross", i + 1),
                    o.contour_cross_dev,
                    TOL_KAC_CROSS,
                    ms,
                ));
                ratios.push(&o.rhs_detour / &o.lhs);
            }
            Err(e) => {
                out.push(error_report(suite, &format!("kac-point{}", i + 1), &e));
            }
        }
    }
    // ratio consistency across two distinct test-function pairs at point 1
    let (res, ms) = timed(|| {
        let base = KacCheckSpec::new(0.3, 0.5, 0.4);
        let mut spec2 = base.clone();
        spec2.b = cfg.b;
        spec2.f = (1.3, -0.1, -0.2);
        spec2.g = (0.9, 0.25, 0.1);
        kac_check(&spec2)
    });
    match res {
        Ok(o2) => {
            if let Some(r1) = ratios.first() {
                let r2 = &o2.rhs_detour / &o2.lhs;
                let dev = ((r1 - &r2).abs() / r1.abs()).to_f64();
                out.push(IdentityReport::numeric(
                    suite,
                    "kac-two-pair-ratio",
                    dev,
                    cfg.tol_override.unwrap_or(TOL_KAC),
                    ms,
                ));
            }
        }
        Err(e) => out.push(error_report(suite, "kac-two-pair-ratio", &e)),
    }
    // hermiticity spot checks
    let rep = build_sl2_rep();
    for which in ["K", "E", "F"] {
        let (res, ms) = timed(|| hermiticity_residual(&rep, which, 0.4, 96, 1e-12));
        match res {
            Ok(r) => out.push(IdentityReport::numeric(
                suite,
                &format!("hermiticity-{which}"),
                r,
                TOL_HERMITICITY,
                ms,
            )),
            Err(e) => out.push(error_report(suite, &format!("hermiticity-{which}"), &e)),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// eigenfunction suite
// ---------------------------------------------------------------------------

pub fn run_eigen(cfg: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    let suite = "eigen";
    let mut out = Vec::new();
    for (i, (lambda, w)) in [(0.5, (0.0, 0.3)), (0.8, (0.0, -0.2))].iter().enumerate() {
        let mut spec = EigenCheckSpec::new(*lambda, *w);
        spec.b = cfg.b;
        let (res, ms) = timed(|| eigenfunction_check(&spec));
        match res {
            Ok(o) => {
                out.push(
                    IdentityReport::numeric(
                        suite,
                        &format!("eigen-config{}-u-independence", i + 1),
                        o.max_u_variation,
                        cfg.tol_override.unwrap_or(TOL_EIGEN),
                        ms,
                    )
                    .with_detail("lambda_w", format!("{lambda} {w:?}"))
                    .with_detail(
                        "constant",
                        format!("{} + {}i", o.constant.re.to_f64(), o.constant.im.to_f64()),
                    ),
                );
                out.push(IdentityReport::numeric(
                    suite,
                    &format!("eigen-config{}-unimodular", i + 1),
                    o.unimodularity_dev,
                    TOL_EIGEN,
                    ms,
                ));
            }
            Err(e) => out.push(error_report(suite, &format!("eigen-config{}", i + 1), &e)),
        }
    }
    // dual functional-equation consistency: w -> w + i/b leaves the ratio
    let (res, ms) = timed(|| -> Result<f64> {
        let mut s1 = EigenCheckSpec::new(0.5, (0.0, 0.3));
        s1.b = cfg.b;
        s1.u_res = vec![0.12];
        let mut s2 = s1.clone();
        s2.w = (0.0, 0.3 + 1.0 / cfg.b);
        let r1 = eigenfunction_check(&s1)?;
        let r2 = eigenfunction_check(&s2)?;
        Ok(((&r1.constant - &r2.constant).abs() / r1.constant.abs()).to_f64())
    });
    match res {
        Ok(dev) => out.push(IdentityReport::numeric(
            suite,
            "eigen-dual-shift-consistency",
            dev,
            1e-5,
            ms,
        )),
        Err(e) => out.push(error_report(suite, "eigen-dual-shift-consistency", &e)),
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// isometry suite
// ---------------------------------------------------------------------------

pub fn run_isometry(cfg: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    let suite = "isometry";
    let mut out = Vec::new();
    let mut tspec = TransformSpec::default();
    tspec.b = cfg.b;
    let (res, ms) = timed(|| isometry_check((1.0, 0.1, 0.2), &tspec));
    match res {
        Ok(o) => {
            out.push(
                IdentityReport::numeric(
                    suite,
                    "norm-ratio",
                    (o.ratio - 1.0).abs(),
                    cfg.tol_override.unwrap_or(TOL_ISOMETRY),
                    ms,
                )
                .with_detail("norm_in", format!("{}", o.norm_in))
                .with_detail("norm_out", format!("{}", o.norm_out)),
            );
            // measure positivity on a grid and the transform tail
            let mut mu_ok = true;
            for k in 1..=20 {
                let l = k as f64 * 0.2;
                let m = 4.0 * (std::f64::consts::PI * cfg.b * l).sinh()
                    * (std::f64::consts::PI / cfg.b * l).sinh();
                if m < 0.0 {
                    mu_ok = false;
                }
            }
            out.push(IdentityReport::exact(suite, "measure-positive", mu_ok, 0));
            out.push(
                IdentityReport::numeric(suite, "transform-tail", o.tail_value, 1e-4, ms)
                    .with_detail("lambda_cutoff", format!("{}", tspec.lambda_cutoff)),
            );
        }
        Err(e) => out.push(error_report(suite, "norm-ratio", &e)),
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    cfg.validate()?;
    let mut out = Vec::new();
    match cfg.suite {
        SuiteId::Scalar => out.extend(run_scalar(cfg)?),
        SuiteId::Symbolic => out.extend(run_symbolic(cfg)?),
        SuiteId::Rewrite => out.extend(run_rewrite(cfg)?),
        SuiteId::Sl2Kac => out.extend(run_sl2_kac(cfg)?),
        SuiteId::Eigen => out.extend(run_eigen(cfg)?),
        SuiteId::Isometry => out.extend(run_isometry(cfg)?),
        SuiteId::All => {
            out.extend(run_scalar(cfg)?);
            out.extend(run_symbolic(cfg)?);
            out.extend(run_rewrite(cfg)?);
            out.extend(run_sl2_kac(cfg)?);
            out.extend(run_eigen(cfg)?);
            out.extend(run_isometry(cfg)?);
        }
    }
    Ok(out)
}
