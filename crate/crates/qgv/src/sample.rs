//! CSV sampling of G_b along a line and of Phi_lambda, for plotting.

use crate::analytic::phi_lambda_eval;
use crate::cx::Cx;
use crate::error::{Error, Result};
use crate::modular::ModularParameter;
use crate::special::{gb_eval_cx, lattice_classify, LatticeKind};
use std::io::Write;

/// Range spec `start:stop[:imag]` parsed from the CLI.
#[derive(Debug, Clone, Copy)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub imag: f64,
}

impl RangeSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(Error::Usage(format!(
                "range must be start:stop[:imag], got {s}"
            )));
        }
        let p = |x: &str| -> Result<f64> {
            x.trim()
                .parse()
                .map_err(|_| Error::Usage(format!("bad number {x} in range")))
        };
        Ok(RangeSpec {
            start: p(parts[0])?,
            stop: p(parts[1])?,
            imag: if parts.len() == 3 { p(parts[2])? } else { 0.0 },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleWhat {
    GbLine,
    PhiLambda,
}

impl SampleWhat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gb-line" => Ok(SampleWhat::GbLine),
            "phi-lambda" => Ok(SampleWhat::PhiLambda),
            other => Err(Error::Usage(format!("unknown sample kind {other}"))),
        }
    }
}

/// Write `re_z,im_z,re_val,im_val,abs_val` rows along the requested range.
pub fn sample_csv(
    mp: &ModularParameter,
    what: SampleWhat,
    range: RangeSpec,
    step: f64,
    lambda: f64,
    out: &mut dyn Write,
) -> Result<usize> {
    if !(step > 0.0) {
        return Err(Error::Usage("step must be positive".into()));
    }
    if range.stop < range.start {
        return Err(Error::Usage("range stop must be >= start".into()));
    }
    let prec = mp.prec();
    // refuse ranges that cross a pole of the sampled function
    if what == SampleWhat::GbLine {
        let n = ((range.stop - range.start) / step).floor() as usize;
        for k in 0..=n {
            let z = Cx::with_val(64, range.start + k as f64 * step, range.imag);
            if lattice_classify(mp, &z, 1e-9).kind != LatticeKind::Regular {
                return Err(Error::Usage(format!(
                    "range hits a G_b lattice point near {}",
                    z.re.to_f64()
                )));
            }
        }
    }
    writeln!(out, "re_z,im_z,re_val,im_val,abs_val")?;
    let mut rows = 0usize;
    let n = ((range.stop - range.start) / step).floor() as usize;
    for k in 0..=n {
        let x = range.start + k as f64 * step;
        let z = Cx::with_val(prec, x, range.imag);
        let v = match what {
            SampleWhat::GbLine => gb_eval_cx(mp, &z, prec)?,
            SampleWhat::PhiLambda => phi_lambda_eval(mp, lambda, &z, prec)?,
        };
        writeln!(
            out,
            "{},{},{},{},{}",
            x,
            range.imag,
            v.re.to_f64(),
            v.im.to_f64(),
            v.abs().to_f64()
        )?;
        rows += 1;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gb_line_inside_strip_is_positive() {
        let mp = ModularParameter::new(0.75, 96).unwrap();
        let range = RangeSpec::parse("0.1:1.9").unwrap();
        let mut buf = Vec::new();
        let rows = sample_csv(&mp, SampleWhat::GbLine, range, 0.3, 0.0, &mut buf).unwrap();
        assert!(rows >= 6);
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "re_z,im_z,re_val,im_val,abs_val");
        for line in lines {
            let abs: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!(abs > 0.0);
        }
    }

    #[test]
    fn phi_lambda_rows_finite() {
        let mp = ModularParameter::new(0.75, 96).unwrap();
        let range = RangeSpec::parse("-3:3:0.01").unwrap();
        let mut buf = Vec::new();
        sample_csv(&mp, SampleWhat::PhiLambda, range, 1.0, 0.5, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in text.lines().skip(1) {
            let abs: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!(abs.is_finite());
        }
    }

    #[test]
    fn bad_step_rejected() {
        let mp = ModularParameter::new(0.75, 96).unwrap();
        let range = RangeSpec::parse("0.1:1.0").unwrap();
        let mut buf = Vec::new();
        assert!(matches!(
            sample_csv(&mp, SampleWhat::GbLine, range, 0.0, 0.0, &mut buf),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn pole_in_range_rejected() {
        let mp = ModularParameter::new(0.75, 96).unwrap();
        let range = RangeSpec::parse("-1:1").unwrap();
        let mut buf = Vec::new();
        assert!(sample_csv(&mp, SampleWhat::GbLine, range, 0.25, 0.0, &mut buf).is_err());
    }
}
