use qgv::rewrite::{load_scripts, replay, RuleContext};

fn main() {
    let ctx = RuleContext::with_derived_constant();
    let scripts = load_scripts(&ctx).expect("parse");
    let filter = std::env::args().nth(1);
    for s in &scripts {
        if let Some(f) = &filter {
            if !s.name().contains(f.as_str()) {
                continue;
            }
        }
        let out = replay(&ctx, s);
        println!("== {} : {}", out.name, if out.passed { "PASS" } else { "FAIL" });
        if !out.passed {
            println!("{}", out.detail);
        }
    }
}
