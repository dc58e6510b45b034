use qgv::analytic::*;
use qgv::cx::Cx;
use qgv::modular::ModularParameter;
use qgv::pointwise::PointwiseFunction;
use std::time::Instant;

fn main() {
    let spec = KacCheckSpec::new(0.3, 0.5, 0.4);
    let prec = spec.prec;
    let mp = ModularParameter::new(0.75, prec).unwrap();
    let eng = Sl2Engine::new(mp.clone(), spec.nu, prec);
    let f = PointwiseFunction::gaussian(prec, 1.0, 0.15, 0.3);
    let g = PointwiseFunction::gaussian(prec, 1.0, -0.2, 0.5);

    // one inner m.e. at a representative tau
    for tau_v in [(0.5, 0.0075), (2.0, 0.0075), (-1.0, 0.0075)] {
        let tau = Cx::with_val(prec, tau_v.0, tau_v.1);
        let t0 = Instant::now();
        let s = Cx::with_val(prec, spec.s, 0.0);
        let mut h = eng.apply_e_power(&(&s + &tau), g.clone());
        let b = rug::Float::with_val(prec, mp.b());
        let a2i = Cx::with_val(prec, 0.0, 2.0);
        let st = Cx::with_val(prec, spec.s + spec.t, 0.0);
        let c1 = (&(&st + &tau) * &Cx::from_imag(b.clone())).with_prec(prec);
        let c2 = (&(&st + &tau.scale_f64(2.0)) * &Cx::from_imag(b.clone())).with_prec(prec);
        h = h.mul_gb(1, a2i.clone(), c1).mul_gb(-1, a2i, c2);
        h = eng.apply_k_power(&-&tau, h);
        let t = Cx::with_val(prec, spec.t, 0.0);
        h = eng.apply_f_power(&(&t + &tau), h);
        let me = inner_product_at(&mp, &f, &h, spec.u_shift, spec.inner_tol, prec).unwrap();
        println!("tau={:?}: me = {:?} in {:.2}s", tau_v, me, t0.elapsed().as_secs_f64());
    }
}
