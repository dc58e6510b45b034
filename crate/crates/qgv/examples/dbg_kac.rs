use qgv::analytic::{kac_check, KacCheckSpec};
use std::time::Instant;
fn main() {
    let t0 = Instant::now();
    let spec = KacCheckSpec::new(0.3, 0.5, 0.4);
    match kac_check(&spec) {
        Ok(out) => {
            println!("lhs        = {:?}", out.lhs);
            println!("rhs detour = {:?}", out.rhs_detour);
            println!("rhs split  = {:?}", out.rhs_split);
            println!("rel dev    = {:.3e}", out.rel_dev);
            println!("cross dev  = {:.3e}", out.contour_cross_dev);
        }
        Err(e) => println!("ERROR: {e}"),
    }
    println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
}
