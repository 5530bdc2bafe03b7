//! CSV ingestion and output.
//!
//! Datasets are stored with a header `x1,...,xp,y`. Floats are written with
//! the shortest representation that parses back to the same bits.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::Dataset;

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line: line as usize,
        message: message.into(),
    }
}

fn check_header(header: &csv::StringRecord) -> Result<usize> {
    let n = header.len();
    if n < 2 {
        return Err(parse_err(1, "header needs at least one covariate column and y"));
    }
    for (j, name) in header.iter().take(n - 1).enumerate() {
        let want = format!("x{}", j + 1);
        if name.trim() != want {
            return Err(parse_err(1, format!("column {} must be named {want}, found {name:?}", j + 1)));
        }
    }
    if header[n - 1].trim() != "y" {
        return Err(parse_err(1, format!("last column must be named y, found {:?}", &header[n - 1])));
    }
    Ok(n - 1)
}

/// Reads a dataset; rows with missing, non-numeric or non-positive `y` are
/// rejected with their line number.
pub fn read_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let p = check_header(rdr.headers()?)?;
    let mut flat = Vec::new();
    let mut ys = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |pos| pos.line());
        if record.len() != p + 1 {
            return Err(parse_err(line, format!("expected {} fields, found {}", p + 1, record.len())));
        }
        for j in 0..p {
            let v: f64 = record[j]
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("x{} is not a number: {:?}", j + 1, &record[j])))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("x{} is not finite", j + 1)));
            }
            flat.push(v);
        }
        let raw = record[p].trim();
        if raw.is_empty() {
            return Err(parse_err(line, "missing y"));
        }
        let y: f64 = raw
            .parse()
            .map_err(|_| parse_err(line, format!("y is not a number: {raw:?}")))?;
        if !(y > 0.0) || !y.is_finite() {
            return Err(parse_err(line, format!("y must be positive and finite, found {raw}")));
        }
        ys.push(y);
    }
    if ys.is_empty() {
        return Err(Error::InvalidDataset("no data rows".into()));
    }
    Dataset::from_flat(p, flat, ys)
}

pub fn read_dataset_file(path: &std::path::Path) -> Result<Dataset> {
    read_dataset(std::fs::File::open(path)?)
}

pub fn write_dataset<W: Write>(writer: W, dataset: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=dataset.dim()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for (x, y) in dataset.iter() {
        let row: Vec<String> = x.iter().chain(std::iter::once(&y)).map(f64::to_string).collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a covariate grid: one point per row, optional header, `p` columns.
pub fn read_grid<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |pos| pos.line());
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => {
                if let Some(first) = out.first() {
                    if first.len() != v.len() {
                        return Err(parse_err(line, format!("expected {} fields, found {}", first.len(), v.len())));
                    }
                }
                out.push(v);
            }
            Err(_) if row == 0 => continue,
            Err(e) => return Err(parse_err(line, e.to_string())),
        }
    }
    Ok(out)
}

/// Day of year in `1..=365` with 29 February dropped (returns `None`).
pub fn day_of_year_no_leap(month: u32, day: u32) -> Option<u32> {
    const DAYS: [u32; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    if !(1..=12).contains(&month) || day == 0 || day > DAYS[month as usize - 1] {
        return None;
    }
    Some(DAYS[..month as usize - 1].iter().sum::<u32>() + day)
}

/// Converts a daily series with a `YYYY-MM-DD` date column and a value column
/// into covariates `(year, day of year)`. Leap days are dropped; rows with a
/// non-positive value are rejected.
pub fn read_daily_series<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |pos| pos.line());
        if record.len() != 2 {
            return Err(parse_err(line, "expected date,value"));
        }
        let date = record[0].trim();
        let mut parts = date.splitn(3, '-').map(str::parse::<u32>);
        let (Some(Ok(year)), Some(Ok(month)), Some(Ok(day))) = (parts.next(), parts.next(), parts.next())
        else {
            return Err(parse_err(line, format!("bad date {date:?}")));
        };
        if month == 2 && day == 29 {
            continue;
        }
        let doy = day_of_year_no_leap(month, day)
            .ok_or_else(|| parse_err(line, format!("bad date {date:?}")))?;
        let y: f64 = record[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("value is not a number: {:?}", &record[1])))?;
        if !(y > 0.0) || !y.is_finite() {
            return Err(parse_err(line, format!("value must be positive, found {}", &record[1])));
        }
        xs.push(vec![f64::from(year), f64::from(doy)]);
        ys.push(y);
    }
    Dataset::new(xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_valid_file() {
        let d = read_dataset("x1,x2,y\n0.5,1,2.5\n1e-3,-2,7\n".as_bytes()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.covariate(1), &[0.001, -2.0]);
        assert_eq!(d.response(0), 2.5);
    }

    #[test]
    fn rejects_bad_rows_with_line_numbers() {
        let cases = [
            ("x1,y\n1,2\n3,\n", 3),
            ("x1,y\n1,2\n2,3\n3,-1\n", 4),
            ("x1,y\n1,0\n", 2),
            ("x1,y\n1,abc\n", 2),
            ("x1,y\n1\n", 2),
        ];
        for (text, line) in cases {
            match read_dataset(text.as_bytes()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn rejects_bad_header() {
        for text in ["a,y\n1,2\n", "x1,z\n1,2\n", "y\n1\n", "x2,y\n1,2\n"] {
            assert!(matches!(read_dataset(text.as_bytes()), Err(Error::Parse { line: 1, .. })), "{text}");
        }
        assert!(matches!(read_dataset("x1,y\n".as_bytes()), Err(Error::InvalidDataset(_))));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let d = Dataset::new(
            vec![vec![0.1, 1.0 / 3.0], vec![-1e-300, 2.5e17]],
            vec![std::f64::consts::PI, 5e-324],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d).unwrap();
        let back = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn grid_with_and_without_header() {
        let a = read_grid("t1,t2\n1,2\n3,4\n".as_bytes()).unwrap();
        let b = read_grid("1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(a, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(a, b);
        assert!(read_grid("1,2\n3\n".as_bytes()).is_err());
    }

    #[test]
    fn day_numbers() {
        assert_eq!(day_of_year_no_leap(1, 1), Some(1));
        assert_eq!(day_of_year_no_leap(3, 1), Some(60));
        assert_eq!(day_of_year_no_leap(12, 31), Some(365));
        assert_eq!(day_of_year_no_leap(2, 29), None);
        assert_eq!(day_of_year_no_leap(13, 1), None);
    }

    #[test]
    fn daily_series_drops_leap_days() {
        let text = "date,flow\n1972-02-28,1.5\n1972-02-29,2\n1972-03-01,3\n";
        let d = read_daily_series(text.as_bytes()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.covariate(0), &[1972.0, 59.0]);
        assert_eq!(d.covariate(1), &[1972.0, 60.0]);
        assert!(read_daily_series("date,flow\n1972-13-01,1\n".as_bytes()).is_err());
    }
}
