//! Text format for defect curves.
//!
//! ```text
//! # defect-curve v1 closed=<0|1>
//! σ y1 y2 y3
//! ...
//! ```
//!
//! The analytic straight vortex is requested by the single directive line
//! `# defect-curve v1 analytic=straight-z`. Rows are whitespace separated
//! ASCII decimals; blank lines and further `#` comment lines are ignored.

use std::fmt::Write as _;

use thiserror::Error;

use crate::curve::DefectCurve;
use crate::Vec3;

const MAGIC: &str = "# defect-curve v1";

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct CurveParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> CurveParseError {
    CurveParseError { line, message: message.into() }
}

pub fn parse_curve(text: &str) -> Result<DefectCurve, CurveParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (hline, header) = lines.by_ref().find(|(_, l)| !l.is_empty()).ok_or_else(|| err(1, "empty curve file"))?;
    let rest = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| err(hline, format!("expected header starting with `{MAGIC}`")))?
        .trim();

    let closed = match rest {
        "analytic=straight-z" => {
            if let Some((n, _)) = lines.find(|(_, l)| !l.is_empty() && !l.starts_with('#')) {
                return Err(err(n, "analytic curve takes no sample rows"));
            }
            return Ok(DefectCurve::straight_z());
        }
        "closed=0" => false,
        "closed=1" => true,
        other => return Err(err(hline, format!("unknown header attribute `{other}`"))),
    };

    let mut sigma = Vec::new();
    let mut points = Vec::new();
    for (n, l) in lines {
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(n, format!("expected 4 columns `σ y1 y2 y3`, found {}", fields.len())));
        }
        let mut v = [0.0; 4];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(n, format!("`{f}` is not a finite decimal number")))?;
        }
        sigma.push(v[0]);
        points.push(Vec3::new(v[1], v[2], v[3]));
    }
    let last = text.lines().count().max(1);
    DefectCurve::polyline(sigma, points, closed).map_err(|e| err(last, e.to_string()))
}

/// Serialize with 17 significant digits so that parsing restores every coordinate bit-for-bit.
pub fn write_curve(curve: &DefectCurve) -> String {
    match curve {
        DefectCurve::StraightZ { through } => {
            debug_assert!(through == &[0.0, 0.0], "file format only encodes the canonical straight line");
            format!("{MAGIC} analytic=straight-z\n")
        }
        DefectCurve::Polyline(p) => {
            let mut out = format!("{MAGIC} closed={}\n", u8::from(p.is_closed()));
            for (s, y) in p.sigma().iter().zip(p.points()) {
                let _ = writeln!(out, "{s:.16e} {:.16e} {:.16e} {:.16e}", y[0], y[1], y[2]);
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_analytic_directive() {
        let c = parse_curve("# defect-curve v1 analytic=straight-z\n").unwrap();
        assert_eq!(c, DefectCurve::straight_z());
    }

    #[test]
    fn parses_closed_triangle() {
        let text = "# defect-curve v1 closed=1\n0 0 0 0\n1 1 0 0\n2 0 1 0\n# tail\n3 0 0 0\n";
        let c = parse_curve(text).unwrap();
        assert!(c.is_closed());
        assert_eq!(c.as_polyline().unwrap().num_segments(), 3);
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "# defect-curve v1 closed=0\n0 0 0 0\n1 2 three 4\n";
        let e = parse_curve(text).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("three"));
        let short = parse_curve("# defect-curve v1 closed=0\n0 0 0\n").unwrap_err();
        assert_eq!(short.line, 2);
        assert_eq!(parse_curve("hello\n").unwrap_err().line, 1);
        assert_eq!(parse_curve("# defect-curve v1 closed=2\n").unwrap_err().line, 1);
    }

    proptest! {
        #[test]
        fn write_then_parse_is_bitwise_identity(
            coords in proptest::collection::vec((-1e3..1e3f64, -1e3..1e3f64, -1e3..1e3f64), 2..30),
        ) {
            let points: Vec<Vec3> = coords.iter().map(|&(a, b, c)| Vec3::new(a, b, c)).collect();
            prop_assume!(points.windows(2).all(|w| w[0] != w[1]));
            let curve = DefectCurve::from_points(points, false).unwrap();
            prop_assert_eq!(parse_curve(&write_curve(&curve)).unwrap(), curve);
        }
    }
}
