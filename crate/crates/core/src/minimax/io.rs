//! Plain-text export of barycentric and partial-fraction forms.
//!
//! ```text
//! barycentric alpha=2.5e-1 k=2 precision=16
//! support
//! 0 1e-2
//! ...
//! values
//! ...
//! weights
//! ...
//! ```
//!
//! Each value is written as the sum of its floating-point limbs (for
//! example `1e-1+5.551115123125783e-18`), so re-import is bit-exact.

use std::fmt::Write as _;

use super::{BarycentricRational, PartialFractionForm};
use crate::error::{BuraError, Result};
use crate::xprec::{Extended, Precision, Real};

const BARYCENTRIC: &str = "barycentric";
const PARTIAL_FRACTIONS: &str = "partial-fractions";

/// Header fields shared by both formats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExportHeader {
    pub alpha: f64,
    pub k: usize,
    pub precision: Precision,
}

pub fn barycentric_to_text<T: Real>(r: &BarycentricRational<T>, alpha: f64) -> String {
    let mut s = header(BARYCENTRIC, alpha, r.degree(), T::PRECISION);
    section(&mut s, "support", 0, r.support_points());
    section(&mut s, "values", 0, r.values());
    section(&mut s, "weights", 0, r.weights());
    s
}

/// Parses a barycentric export into `T`, which must be at least as wide as
/// the declared precision.
pub fn barycentric_from_text<T: Real>(text: &str) -> Result<(ExportHeader, BarycentricRational<T>)> {
    let (h, mut sections) = parse(text, BARYCENTRIC, &["support", "values", "weights"])?;
    check_width::<T>(h.precision)?;
    let n = h.k + 1;
    let mut take = |name| -> Result<Vec<T>> { convert_section(sections.remove(0), name, 0, n) };
    let support = take("support")?;
    let values = take("values")?;
    let weights = take("weights")?;
    Ok((h, BarycentricRational::new(support, values, weights)?))
}

pub fn partial_fractions_to_text(pf: &PartialFractionForm, alpha: f64) -> String {
    let mut s = header(PARTIAL_FRACTIONS, alpha, pf.degree(), pf.precision());
    section(&mut s, "constant", 0, &[pf.constant()]);
    section(&mut s, "poles", 1, pf.poles());
    section(&mut s, "residues", 1, pf.residues());
    s
}

pub fn partial_fractions_from_text(text: &str) -> Result<(ExportHeader, PartialFractionForm)> {
    let (h, mut sections) = parse(text, PARTIAL_FRACTIONS, &["constant", "poles", "residues"])?;
    let constant: Vec<Extended> = convert_section(sections.remove(0), "constant", 0, 1)?;
    let poles = convert_section(sections.remove(0), "poles", 1, h.k)?;
    let residues = convert_section(sections.remove(0), "residues", 1, h.k)?;
    Ok((h, PartialFractionForm::new(constant[0], poles, residues, h.precision)?))
}

fn header(kind: &str, alpha: f64, k: usize, precision: Precision) -> String {
    format!("{kind} alpha={alpha:e} k={k} precision={}\n", precision.digits())
}

fn section<T: Real>(s: &mut String, name: &str, first: usize, xs: &[T]) {
    s.push_str(name);
    s.push('\n');
    for (i, x) in xs.iter().enumerate() {
        let _ = writeln!(s, "{} {}", i + first, x.to_exact_string());
    }
}

fn check_width<T: Real>(declared: Precision) -> Result<()> {
    if declared.digits() > T::DIGITS {
        return Err(BuraError::Parse(format!(
            "file declares {} digits but the target type holds {}",
            declared.digits(),
            T::DIGITS
        )));
    }
    Ok(())
}

type Section<'a> = Vec<(usize, &'a str)>;

/// Parses the header line and the named sections in order.
pub(crate) fn parse<'a>(text: &'a str, kind: &str, names: &[&str]) -> Result<(ExportHeader, Vec<Section<'a>>)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let first = lines.next().ok_or_else(|| BuraError::Parse("empty input".into()))?;
    let h = parse_header(first, kind)?;
    let mut sections: Vec<Section<'a>> = Vec::new();
    for line in lines {
        if let Some(pos) = names.iter().position(|n| *n == line) {
            if pos != sections.len() {
                return Err(BuraError::Parse(format!("section `{line}` out of order")));
            }
            sections.push(Vec::new());
            continue;
        }
        let cur = sections.last_mut().ok_or_else(|| BuraError::Parse(format!("record before any section: `{line}`")))?;
        let (i, v) = line.split_once(' ').ok_or_else(|| BuraError::Parse(format!("malformed record `{line}`")))?;
        let i = i.parse().map_err(|_| BuraError::Parse(format!("bad index in `{line}`")))?;
        cur.push((i, v.trim()));
    }
    if sections.len() != names.len() {
        return Err(BuraError::Parse(format!("expected sections {names:?}, found {}", sections.len())));
    }
    Ok((h, sections))
}

fn parse_header(line: &str, kind: &str) -> Result<ExportHeader> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(kind) {
        return Err(BuraError::Parse(format!("expected a `{kind}` header, got `{line}`")));
    }
    let (mut alpha, mut k, mut digits) = (None, None, None);
    for p in parts {
        let (key, value) = p.split_once('=').ok_or_else(|| BuraError::Parse(format!("bad header field `{p}`")))?;
        let bad = || BuraError::Parse(format!("bad header value `{p}`"));
        match key {
            "alpha" => alpha = Some(value.parse::<f64>().map_err(|_| bad())?),
            "k" => k = Some(value.parse::<usize>().map_err(|_| bad())?),
            "precision" => digits = Some(value.parse::<u32>().map_err(|_| bad())?),
            _ => return Err(BuraError::Parse(format!("unknown header field `{key}`"))),
        }
    }
    let missing = |f: &str| BuraError::Parse(format!("header lacks `{f}`"));
    Ok(ExportHeader {
        alpha: alpha.ok_or_else(|| missing("alpha"))?,
        k: k.ok_or_else(|| missing("k"))?,
        precision: Precision::from_digits(digits.ok_or_else(|| missing("precision"))?)?,
    })
}

pub(crate) fn convert_section<T: Real>(records: Section<'_>, name: &str, first: usize, n: usize) -> Result<Vec<T>> {
    if records.len() != n {
        return Err(BuraError::Parse(format!("section `{name}` has {} records, expected {n}", records.len())));
    }
    records
        .into_iter()
        .enumerate()
        .map(|(j, (i, v))| {
            if i != j + first {
                return Err(BuraError::Parse(format!("section `{name}`: index {i} out of sequence")));
            }
            T::parse_exact(v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimax::{interpolate_rational, pole_residues};
    use crate::xprec::{DoubleDouble, QuadDouble};

    fn sample<T: Real>() -> BarycentricRational<T> {
        let nodes: Vec<T> = [0.01, 0.1, 0.3, 0.6, 0.9].iter().map(|&x| T::from_f64(x).sqrt()).collect();
        let values: Vec<T> = nodes.iter().map(|&x| x.sqrt()).collect();
        interpolate_rational(&nodes, &values).unwrap()
    }

    #[test]
    fn barycentric_round_trip_is_bit_exact() {
        let r = sample::<QuadDouble>();
        let text = barycentric_to_text(&r, 0.5);
        let (h, back) = barycentric_from_text::<QuadDouble>(&text).unwrap();
        assert_eq!(h, ExportHeader { alpha: 0.5, k: 2, precision: Precision::QuadDouble });
        assert_eq!(back, r);
        // A narrower type cannot hold the declared precision.
        assert!(barycentric_from_text::<DoubleDouble>(&text).is_err());
        let r64 = sample::<f64>();
        let (_, widened) = barycentric_from_text::<QuadDouble>(&barycentric_to_text(&r64, 0.5)).unwrap();
        assert_eq!(widened, r64.convert());
    }

    #[test]
    fn partial_fraction_round_trip_is_bit_exact() {
        let pf = pole_residues(&sample::<f64>()).unwrap();
        let text = partial_fractions_to_text(&pf, 0.5);
        let (h, back) = partial_fractions_from_text(&text).unwrap();
        assert_eq!(h.k, 2);
        assert_eq!(h.precision, Precision::Double);
        assert_eq!(back, pf);
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(barycentric_from_text::<f64>("").is_err());
        assert!(barycentric_from_text::<f64>("barycentric alpha=0.5 k=0 precision=16\nsupport\n0 0.5\nvalues\n0 1\n").is_err());
        assert!(barycentric_from_text::<f64>("barycentric alpha=0.5 k=0 precision=16\nsupport\n1 0.5\nvalues\n0 1\nweights\n0 1\n").is_err());
        assert!(barycentric_from_text::<f64>("barycentric alpha=0.5 k=0 precision=16\nsupport\n0 0.5\nvalues\n0 1\nweights\n0 1\n").is_ok());
    }
}
