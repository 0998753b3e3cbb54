use crate::canonical::sha256_hex;
use crate::spectral::{convert_axis, Spectrum};

use super::{PlError, PowerLevel, PowerSeries};

fn is_decimal_literal(s: &str) -> bool {
    let mut dot = false;
    let mut digits = 0;
    for c in s.chars() {
        match c {
            '0'..='9' => digits += 1,
            '.' if !dot => dot = true,
            _ => return false,
        }
    }
    digits > 0
}

fn parse_power_header(cell: &str) -> Result<f64, PlError> {
    let bad = || PlError::BadHeader(format!("expected `P=<value>uW`, got {cell:?}"));
    let v = cell
        .trim()
        .strip_prefix("P=")
        .and_then(|s| s.strip_suffix("uW"))
        .ok_or_else(bad)?;
    if !is_decimal_literal(v) {
        return Err(bad());
    }
    let p: f64 = v.parse().map_err(|_| bad())?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(PlError::BadHeader(format!("power {v} must be positive")));
    }
    Ok(p)
}

/// Reads a campaign export:
///
/// ```text
/// wavelength_nm,P=1uW,P=10uW
/// 600.0,12,30
/// ...
/// ```
///
/// Rows may come in any wavelength order; the result is on an ascending
/// energy axis. The campaign id is derived from the content (first 16 hex
/// digits of its SHA-256).
pub fn load_campaign_csv(bytes: &[u8]) -> Result<PowerSeries, PlError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = reader.records();

    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(PlError::BadHeader(e.to_string())),
        None => return Err(PlError::BadHeader("empty file".into())),
    };
    let first = header
        .get(0)
        .map(str::trim)
        .map(|s| s.trim_start_matches('\u{feff}'));
    if first != Some("wavelength_nm") {
        return Err(PlError::BadHeader(format!(
            "first column must be `wavelength_nm`, got {:?}",
            header.get(0).unwrap_or("")
        )));
    }
    if header.len() < 2 {
        return Err(PlError::BadHeader("no power columns".into()));
    }
    let powers = header
        .iter()
        .skip(1)
        .map(parse_power_header)
        .collect::<Result<Vec<_>, _>>()?;
    let mut seen = powers.clone();
    seen.sort_by(f64::total_cmp);
    if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
        return Err(PlError::DuplicatePower(w[0]));
    }

    let columns = header.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, rec) in records.enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| PlError::BadHeader(e.to_string()))?;
        if rec.len() == 1 && rec.get(0).is_some_and(|c| c.trim().is_empty()) {
            continue;
        }
        if rec.len() != columns {
            return Err(PlError::RaggedRows {
                line,
                expected: columns,
                got: rec.len(),
            });
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(column, cell)| {
                cell.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| PlError::NonnumericCell {
                        line,
                        column: column + 1,
                        cell: cell.to_string(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }

    rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let wavelengths: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    // ascending wavelength -> ascending energy, reversed
    let energy = convert_axis(&wavelengths)?;
    let levels = powers
        .iter()
        .enumerate()
        .map(|(k, &power_uw)| {
            let counts: Vec<f64> = rows.iter().rev().map(|r| r[k + 1]).collect();
            let spectrum =
                Spectrum::new(energy.clone(), counts)?.with_provenance(format!("P={power_uw}uW"));
            Ok(PowerLevel { power_uw, spectrum })
        })
        .collect::<Result<Vec<_>, PlError>>()?;
    PowerSeries::new(&sha256_hex(bytes)[..16], levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(header: &str, rows: usize) -> String {
        let cols = header.split(',').count();
        let mut s = format!("{header}\n");
        for i in 0..rows {
            let mut cells = vec![format!("{}", 600.0 + i as f64)];
            for c in 1..cols {
                cells.push(format!("{}", (i * c) as f64));
            }
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    #[test]
    fn two_levels() {
        let s = load_campaign_csv(csv("wavelength_nm,P=1uW,P=10uW", 8).as_bytes()).unwrap();
        assert_eq!(s.powers(), vec![1.0, 10.0]);
        assert_eq!(s.energy().len(), 8);
    }

    #[test]
    fn unsorted_rows_end_up_ascending_in_energy() {
        let text =
            "wavelength_nm,P=0.5uW\n607,7\n600,0\n605,5\n601,1\n603,3\n602,2\n606,6\n604,4\n";
        let s = load_campaign_csv(text.as_bytes()).unwrap();
        let e = s.energy();
        assert!(e.windows(2).all(|w| w[0] < w[1]));
        // highest energy = shortest wavelength = 600 nm, count 0
        let counts = s.levels()[0].spectrum.counts();
        assert_eq!(counts[7], 0.0);
        assert_eq!(counts[0], 7.0);
    }

    #[test]
    fn crlf_accepted() {
        let text = csv("wavelength_nm,P=2uW", 8).replace('\n', "\r\n");
        assert!(load_campaign_csv(text.as_bytes()).is_ok());
    }

    #[test]
    fn header_and_cell_errors() {
        let dup = load_campaign_csv(csv("wavelength_nm,P=1uW,P=1.0uW", 8).as_bytes());
        assert_eq!(dup.unwrap_err(), PlError::DuplicatePower(1.0));
        let bad = load_campaign_csv(csv("lambda,P=1uW", 8).as_bytes());
        assert_eq!(bad.unwrap_err().code(), "BAD_HEADER");
        let bad = load_campaign_csv(csv("wavelength_nm,P=1mW", 8).as_bytes());
        assert_eq!(bad.unwrap_err().code(), "BAD_HEADER");
        let bad = load_campaign_csv(csv("wavelength_nm,P=-1uW", 8).as_bytes());
        assert_eq!(bad.unwrap_err().code(), "BAD_HEADER");

        let mut ragged = csv("wavelength_nm,P=1uW", 8);
        ragged.push_str("700,1,2\n");
        assert!(matches!(
            load_campaign_csv(ragged.as_bytes()),
            Err(PlError::RaggedRows {
                line: 10,
                expected: 2,
                got: 3
            })
        ));
        let text = csv("wavelength_nm,P=1uW", 8).replace("603,3", "603,abc");
        assert!(matches!(
            load_campaign_csv(text.as_bytes()),
            Err(PlError::NonnumericCell { column: 2, .. })
        ));
    }

    #[test]
    fn campaign_id_is_content_addressed() {
        let a = load_campaign_csv(csv("wavelength_nm,P=1uW", 8).as_bytes()).unwrap();
        let b = load_campaign_csv(csv("wavelength_nm,P=1uW", 9).as_bytes()).unwrap();
        assert_eq!(a.campaign_id().len(), 16);
        assert_ne!(a.campaign_id(), b.campaign_id());
    }
}
