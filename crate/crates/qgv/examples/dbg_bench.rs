use qgv::cx::Cx;
use qgv::modular::ModularParameter;
use qgv::special::gb_eval_cx;
use std::time::Instant;
fn main() {
    for prec in [96u32, 128, 192] {
        let mp = ModularParameter::new(0.75, prec).unwrap();
        // warm the kernel tables
        let _ = gb_eval_cx(&mp, &Cx::with_val(prec, 1.0, 0.3), prec).unwrap();
        let t = Instant::now();
        let n = 400;
        for i in 0..n {
            let z = Cx::with_val(prec, 0.2 + 1.6 * (i as f64) / n as f64, 0.4 + 1e-4 * i as f64);
            let _ = gb_eval_cx(&mp, &z, prec).unwrap();
        }
        let dt = t.elapsed().as_secs_f64();
        println!("prec {prec}: {:.3} ms/eval", dt / n as f64 * 1e3);
    }
}
