use qgv::cx::Cx;
use qgv::modular::ModularParameter;
use qgv::quad::{integrate_segments, Segment};
use qgv::special::{gb_eval_cx, smallg_eval};
use rug::Float;

fn run(mp: &ModularParameter, x: f64, prec: u32, h: f64) -> Cx {
    let ln_x = Float::with_val(prec, x).ln();
    let pi_q = Float::with_val(prec, mp.pi() * mp.big_q());
    let b_inv = mp.b_inv().clone();
    let mut integrand = |tau: &Cx| -> qgv::Result<Cx> {
        let e1 = tau.mul_i().scale(&b_inv).scale(&ln_x);
        let e2 = tau.scale(&pi_q);
        let gb = gb_eval_cx(mp, &tau.div_i().scale_f64(-1.0), prec)?;
        Ok(&(&e1 + &e2).exp() * &gb)
    };
    let t0 = 1.5;
    let dir = Cx::with_val(prec, std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2);
    let corner = Cx::with_val(prec, t0, h);
    let segs = vec![
        Segment::Line { from: Cx::with_val(prec, -14.0, h), to: corner.clone() },
        Segment::Line { from: corner.clone(), to: &corner + &dir.scale_f64(9.0) },
    ];
    integrate_segments(&mut integrand, &segs, prec, 1e-13).unwrap().value
}

fn main() {
    let prec = 128;
    let mp = ModularParameter::new(0.75, prec).unwrap();
    let x = 1.3;
    let gbx = smallg_eval(&mp, &Cx::with_val(prec, x, 0.0), prec).unwrap();
    println!("g_b(1.3)      = {:?}", gbx);
    let above = run(&mp, x, prec, 0.3);
    println!("quad above    = {:?}", above);
    let below = run(&mp, x, prec, -0.08);
    println!("quad below    = {:?}", below);
    println!("above/gb = {:?}", &above / &gbx);
    println!("below/gb = {:?}", &below / &gbx);
    // residue of the integrand at tau=0: lim tau*G_b(-i tau)*stuff = i*R0 where
    // R0 = residue of G_b at 0
    let delta = Cx::with_val(prec, 0.0, 1e-25);
    let gb_near = gb_eval_cx(&mp, &delta, prec).unwrap();
    let r0 = &delta * &gb_near;
    println!("R0 (residue of G_b at 0) = {:?}", r0);
    let gb_b = gb_eval_cx(&mp, &Cx::with_val(prec, 0.75, 0.0), prec).unwrap();
    println!("G_b(b) = {:?}  -G_b(b)/(2 pi i b) = {:?}", gb_b,
        (&gb_b / &Cx::from_imag(Float::with_val(prec, mp.pi() * mp.b())).scale_f64(2.0)).scale_f64(-1.0));
}
