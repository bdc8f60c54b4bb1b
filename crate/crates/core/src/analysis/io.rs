//! Plain-text readers for analysis inputs.
//!
//! Data lines hold whitespace- or comma-separated numbers. Lines starting with
//! `#` are comments, except `# key = value` header entries in wave tables.

use crate::analysis::shpb::{Bar, Specimen, WaveRecord};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty())
}

fn number<T: Scalar>(tok: &str, line: usize) -> Result<T> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(T::lit(v)),
        _ => Err(Error::parse(line, format!("`{tok}` is not a finite number"))),
    }
}

/// Numeric rows, each with a column count in `widths`. All rows share the width
/// of the first.
pub fn parse_rows<T: Scalar>(text: &str, widths: &[usize]) -> Result<Vec<Vec<T>>> {
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let row = fields(s).map(|t| number(t, line)).collect::<Result<Vec<T>>>()?;
        let ok = match rows.first() {
            Some(first) => row.len() == first.len(),
            None => widths.contains(&row.len()),
        };
        if !ok {
            return Err(Error::parse(line, format!("expected {widths:?} columns, found {}", row.len())));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(text.lines().count().max(1), "no data rows"));
    }
    Ok(rows)
}

/// `(x, y)` pairs, e.g. a T2 spectrum or (strain rate, RDIF) points.
pub fn parse_pairs<T: Scalar>(text: &str) -> Result<Vec<(T, T)>> {
    Ok(parse_rows(text, &[2])?.into_iter().map(|r| (r[0], r[1])).collect())
}

/// 3-D points; 2-D rows get z = 0.
pub fn parse_points<T: Scalar>(text: &str) -> Result<Vec<[T; 3]>> {
    Ok(parse_rows(text, &[2, 3])?
        .into_iter()
        .map(|r| [r[0], r[1], r.get(2).copied().unwrap_or(T::zero())])
        .collect())
}

/// One group per line: a label followed by one or more spectral areas.
pub fn parse_area_groups<T: Scalar>(text: &str) -> Result<Vec<(String, Vec<T>)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let mut it = fields(s);
        let label = it.next().unwrap_or_default().to_string();
        let areas = it.map(|t| number(t, i + 1)).collect::<Result<Vec<T>>>()?;
        if areas.is_empty() {
            return Err(Error::parse(i + 1, format!("group `{label}` has no areas")));
        }
        out.push((label, areas));
    }
    if out.is_empty() {
        return Err(Error::parse(text.lines().count().max(1), "no area groups"));
    }
    Ok(out)
}

/// Wave table: header entries `A0` (m²), `C0` (m/s), `E_bar` (GPa) and
/// optionally `specimen_area` (m²), `specimen_length` (m); then rows of
/// `time eps_i eps_r eps_t`.
pub fn parse_wave_table<T: Scalar>(text: &str) -> Result<WaveRecord<T>> {
    let mut header: [Option<T>; 5] = [None; 5];
    const KEYS: [&str; 5] = ["A0", "C0", "E_bar", "specimen_area", "specimen_length"];
    for (i, raw) in text.lines().enumerate() {
        let Some(body) = raw.trim().strip_prefix('#') else { continue };
        let Some((k, v)) = body.split_once('=') else { continue };
        let k = k.trim();
        match KEYS.iter().position(|&key| key == k) {
            Some(slot) => header[slot] = Some(number(v.trim(), i + 1)?),
            None => return Err(Error::parse(i + 1, format!("unknown header key `{k}`"))),
        }
    }
    let end = text.lines().count().max(1);
    let need = |slot: usize| header[slot].ok_or_else(|| Error::parse(end, format!("missing header `{}`", KEYS[slot])));
    let bar = Bar { area: need(0)?, wave_speed: need(1)?, modulus: need(2)? };
    let specimen = match (header[3], header[4]) {
        (Some(area), Some(length)) => Some(Specimen { area, length }),
        (None, None) => None,
        _ => return Err(Error::parse(end, "specimen_area and specimen_length go together")),
    };
    let rows = parse_rows::<T>(text, &[4])?;
    let col = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<T>>();
    Ok(WaveRecord::from_strains(col(0), col(1), col(2), col(3), bar, specimen))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_numbers_reported() {
        let e = parse_pairs::<f64>("# c\n1 2\n3 x\n").unwrap_err();
        assert_eq!(e, Error::Parse { line: 3, message: "`x` is not a finite number".into() });
        assert!(matches!(parse_pairs::<f64>(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_pairs::<f64>("1 2\n1 2 3\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn wave_header() {
        let txt = "# A0 = 2e-3\n# C0 = 5000\n# E_bar = 200\n0 1e-3 0 1e-3\n1e-6 1e-3 0 1e-3\n";
        let w = parse_wave_table::<f64>(txt).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w.bar.wave_speed, 5000.0);
        assert!(w.specimen.is_none());
        assert!((w.incident.stress[0] - 200.0).abs() < 1e-12);
        assert!(parse_wave_table::<f64>("# A0 = 1\n0 0 0 0\n").is_err());
    }
}
