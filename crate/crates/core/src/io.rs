//! File formats: CSV for fields, coefficients, matrices and samples; raw
//! little-endian `f64` with a JSON sidecar for bulk samples.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chart::ChartVector;
use crate::cmat::ComplexMatrix;
use crate::error::{check_len, Error, Result};
use crate::grid::BandLimit;
use crate::index::{chart_labels, harmonic_indices, HarmonicIndex};
use crate::sde::Domain;
use crate::transform::{SpatialField, SpectralCoeffs};

fn parse<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("invalid {what}: {field:?}")))
}

fn expect_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = reader.headers()?;
    if header.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected header {}, found {}",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

/// `j,k,value` rows in grid order.
pub fn write_spatial_csv(w: impl Write, x: &SpatialField) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["j", "k", "value"])?;
    let n_phi = x.band_limit().n_phi();
    for (i, v) in x.values().iter().enumerate() {
        out.serialize((i / n_phi, i % n_phi, v))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_spatial_csv(r: impl Read, band_limit: BandLimit) -> Result<SpatialField> {
    let mut reader = csv::Reader::from_reader(r);
    expect_header(&mut reader, &["j", "k", "value"])?;
    let n_phi = band_limit.n_phi();
    let mut values = vec![f64::NAN; band_limit.spatial_dim()];
    let mut seen = 0;
    for record in reader.records() {
        let record = record?;
        let j: usize = parse(&record[0], "ring index")?;
        let k: usize = parse(&record[1], "longitude index")?;
        if j >= band_limit.n_theta() || k >= n_phi {
            return Err(Error::Parse(format!("grid index ({j},{k}) out of range")));
        }
        values[j * n_phi + k] = parse(&record[2], "value")?;
        seen += 1;
    }
    check_len("spatial field rows", values.len(), seen)?;
    SpatialField::new(band_limit, values)
}

/// Raw little-endian `f64` in grid order.
pub fn write_f64_le(mut w: impl Write, values: &[f64]) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_f64_le(mut r: impl Read) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse(format!("{} bytes is not a whole number of f64", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

/// `ell,m,re,im` rows in coefficient order.
pub fn write_coeffs_csv(w: impl Write, a: &SpectralCoeffs) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["ell", "m", "re", "im"])?;
    for (h, v) in harmonic_indices(a.band_limit().get()).zip(a.values()) {
        out.serialize((h.ell, h.m, v.re, v.im))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_coeffs_csv(r: impl Read) -> Result<SpectralCoeffs> {
    let mut reader = csv::Reader::from_reader(r);
    expect_header(&mut reader, &["ell", "m", "re", "im"])?;
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record?;
        let h = HarmonicIndex::new(parse(&record[0], "degree")?, parse(&record[1], "order")?)?;
        entries.push((h.flat(), Complex64::new(parse(&record[2], "re")?, parse(&record[3], "im")?)));
    }
    let band_limit = BandLimit::from_coeff_dim(entries.len())?;
    let mut values = vec![Complex64::new(f64::NAN, f64::NAN); entries.len()];
    for (i, v) in entries {
        if i >= values.len() || !values[i].re.is_nan() {
            return Err(Error::Parse(format!("duplicate or out-of-range coefficient {}", HarmonicIndex::from_flat(i))));
        }
        values[i] = v;
    }
    SpectralCoeffs::new(band_limit, values)
}

/// `label,value` rows.
pub fn write_chart_csv(w: impl Write, z: &ChartVector) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["label", "value"])?;
    for (label, v) in z.labels().iter().zip(z.values()) {
        out.serialize((label, v))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_chart_csv(r: impl Read) -> Result<ChartVector> {
    let mut reader = csv::Reader::from_reader(r);
    expect_header(&mut reader, &["label", "value"])?;
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        labels.push(record[0].trim().to_string());
        values.push(parse(&record[1], "value")?);
    }
    let band_limit = BandLimit::from_coeff_dim(values.len())?;
    if labels != chart_labels(band_limit.get()) {
        return Err(Error::Parse("chart labels are not in canonical order".into()));
    }
    ChartVector::new(band_limit, values)
}

/// Real matrix with a label column and a labelled header.
pub fn write_matrix_csv(w: impl Write, m: &DMatrix<f64>, row_labels: &[String], col_labels: &[String]) -> Result<()> {
    check_len("row labels", m.nrows(), row_labels.len())?;
    check_len("column labels", m.ncols(), col_labels.len())?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(std::iter::once("").chain(col_labels.iter().map(String::as_str)))?;
    for (i, label) in row_labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend(m.row(i).iter().map(|v| format_f64(*v)));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Inverse of [`write_matrix_csv`]; returns the matrix and its labels.
pub fn read_matrix_csv(r: impl Read) -> Result<(DMatrix<f64>, Vec<String>, Vec<String>)> {
    let mut reader = csv::Reader::from_reader(r);
    let col_labels: Vec<String> = reader.headers()?.iter().skip(1).map(String::from).collect();
    let mut row_labels = Vec::new();
    let mut data = Vec::new();
    for record in reader.records() {
        let record = record?;
        check_len("matrix row", col_labels.len() + 1, record.len())?;
        row_labels.push(record[0].to_string());
        for field in record.iter().skip(1) {
            data.push(parse::<f64>(field, "matrix entry")?);
        }
    }
    let m = DMatrix::from_row_slice(row_labels.len(), col_labels.len(), &data);
    Ok((m, row_labels, col_labels))
}

/// Complex matrix as interleaved `label.re,label.im` columns.
pub fn write_complex_matrix_csv(
    w: impl Write,
    m: &ComplexMatrix,
    row_labels: &[String],
    col_labels: &[String],
) -> Result<()> {
    check_len("column labels", m.ncols(), col_labels.len())?;
    let n = m.ncols();
    let interleaved = DMatrix::from_fn(m.nrows(), 2 * n, |i, j| {
        if j % 2 == 0 {
            m.re[(i, j / 2)]
        } else {
            m.im[(i, j / 2)]
        }
    });
    let labels: Vec<String> = col_labels
        .iter()
        .flat_map(|l| [format!("{l}.re"), format!("{l}.im")])
        .collect();
    write_matrix_csv(w, &interleaved, row_labels, &labels)
}

/// Labels `(j,k)` of the grid points.
pub fn grid_labels(band_limit: BandLimit) -> Vec<String> {
    let n_phi = band_limit.n_phi();
    (0..band_limit.spatial_dim())
        .map(|i| format!("({},{})", i / n_phi, i % n_phi))
        .collect()
}

/// Labels `(ell,m)` of the complex coefficients.
pub fn harmonic_labels(band_limit: BandLimit) -> Vec<String> {
    harmonic_indices(band_limit.get()).map(|h| h.to_string()).collect()
}

/// Shortest representation that reads back to the same value.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Column labels of a sample file: `x_i` for spatial samples, chart labels
/// for frequency samples.
pub fn sample_labels(domain: Domain, band_limit: BandLimit) -> Vec<String> {
    match domain {
        Domain::Spatial => (0..band_limit.spatial_dim()).map(|i| format!("x_{i}")).collect(),
        Domain::Frequency => chart_labels(band_limit.get()),
    }
}

/// One sample per row.
pub fn write_samples_csv(w: impl Write, samples: &[Vec<f64>], domain: Domain, band_limit: BandLimit) -> Result<()> {
    let labels = sample_labels(domain, band_limit);
    let mut out = csv::Writer::from_writer(w);
    out.write_record(&labels)?;
    for s in samples {
        check_len("sample", labels.len(), s.len())?;
        out.write_record(s.iter().map(|v| format_f64(*v)))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a sample file, recovering the domain and band limit from the header.
pub fn read_samples_csv(r: impl Read) -> Result<(Vec<Vec<f64>>, Domain, BandLimit)> {
    let mut reader = csv::Reader::from_reader(r);
    let header: Vec<String> = reader.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let (domain, band_limit) = infer_sample_layout(&header)?;
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record?;
        check_len("sample", header.len(), record.len())?;
        samples.push(record.iter().map(|f| parse(f, "sample value")).collect::<Result<Vec<f64>>>()?);
    }
    Ok((samples, domain, band_limit))
}

fn infer_sample_layout(header: &[String]) -> Result<(Domain, BandLimit)> {
    let n = header.len();
    if header.first().is_some_and(|h| h.starts_with("x_")) {
        let l = (1..=n).find(|&l| 2 * l * (2 * l - 1) == n).ok_or_else(|| {
            Error::Parse(format!("{n} spatial columns do not match any band limit"))
        })?;
        let band_limit = BandLimit::new(l)?;
        if header != sample_labels(Domain::Spatial, band_limit).as_slice() {
            return Err(Error::Parse("spatial sample header is not x_0, x_1, ...".into()));
        }
        return Ok((Domain::Spatial, band_limit));
    }
    let band_limit = BandLimit::from_coeff_dim(n)?;
    if header != chart_labels(band_limit.get()).as_slice() {
        return Err(Error::Parse("sample header is neither spatial nor chart labels".into()));
    }
    Ok((Domain::Frequency, band_limit))
}

/// Sidecar for raw `f64` sample files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSamplesMeta {
    #[serde(rename = "L")]
    pub band_limit: BandLimit,
    pub t: f64,
    pub n: usize,
    pub seed: u64,
    pub dim: usize,
    pub domain: Domain,
}

pub fn write_samples_raw(w: impl Write, samples: &[Vec<f64>]) -> Result<()> {
    let flat: Vec<f64> = samples.iter().flatten().copied().collect();
    write_f64_le(w, &flat)
}

pub fn read_samples_raw(r: impl Read, meta: &RawSamplesMeta) -> Result<Vec<Vec<f64>>> {
    check_len("sample dimension", meta.domain.dim(meta.band_limit), meta.dim)?;
    let flat = read_f64_le(r)?;
    check_len("raw sample values", meta.n * meta.dim, flat.len())?;
    Ok(flat.chunks_exact(meta.dim.max(1)).map(<[f64]>::to_vec).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bl(l: usize) -> BandLimit {
        BandLimit::new(l).unwrap()
    }

    #[test]
    fn spatial_round_trip() {
        let x = SpatialField::new(bl(2), (0..12).map(|i| 0.1 * i as f64 - 0.35).collect()).unwrap();
        let mut buf = Vec::new();
        write_spatial_csv(&mut buf, &x).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("j,k,value\n0,0,-0.35"));
        assert_eq!(read_spatial_csv(&buf[..], bl(2)).unwrap(), x);
        assert!(read_spatial_csv(&buf[..], bl(3)).is_err());

        let mut raw = Vec::new();
        write_f64_le(&mut raw, x.values()).unwrap();
        assert_eq!(raw.len(), 96);
        assert_eq!(read_f64_le(&raw[..]).unwrap(), x.values());
        assert!(read_f64_le(&raw[..5]).is_err());
    }

    #[test]
    fn coeffs_round_trip() {
        let a = crate::chart::from_chart(&ChartVector::new(bl(3), (0..9).map(|i| i as f64 / 7.0).collect()).unwrap());
        let mut buf = Vec::new();
        write_coeffs_csv(&mut buf, &a).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("ell,m,re,im\n0,0,"));
        assert_eq!(read_coeffs_csv(&buf[..]).unwrap(), a);
        let dup = "ell,m,re,im\n0,0,1,0\n0,0,1,0\n1,0,0,0\n1,1,0,0\n";
        assert!(read_coeffs_csv(dup.as_bytes()).is_err());
    }

    #[test]
    fn chart_round_trip() {
        let z = ChartVector::new(bl(2), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        write_chart_csv(&mut buf, &z).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "label,value\n\"(0,0,re)\",1.0\n\"(1,0,re)\",2.0\n\"(1,1,re)\",3.0\n\"(1,1,im)\",4.0\n"
        );
        assert_eq!(read_chart_csv(&buf[..]).unwrap(), z);
    }

    #[test]
    fn matrix_round_trip_is_exact() {
        let m = DMatrix::from_fn(4, 4, |i, j| (i as f64 + 1.0) / (j as f64 + 3.0));
        let labels = chart_labels(bl(2).get());
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m, &labels, &labels).unwrap();
        let (back, rows, cols) = read_matrix_csv(&buf[..]).unwrap();
        assert_eq!(back, m);
        assert_eq!(rows, labels);
        assert_eq!(cols, labels);
    }

    #[test]
    fn complex_matrix_columns() {
        let m = ComplexMatrix::identity(4);
        let mut buf = Vec::new();
        write_complex_matrix_csv(&mut buf, &m, &harmonic_labels(bl(2)), &harmonic_labels(bl(2))).unwrap();
        let (back, _, cols) = read_matrix_csv(&buf[..]).unwrap();
        assert_eq!(back.ncols(), 8);
        assert_eq!(cols[0], "(0,0).re");
        assert_eq!(cols[3], "(1,0).im");
        assert_eq!(cols[7], "(1,-1).im");
        assert_eq!(back[(1, 2)], 1.0);
    }

    #[test]
    fn samples_round_trip_both_domains() {
        let s = vec![vec![0.25; 12], vec![-1.5; 12]];
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &s, Domain::Spatial, bl(2)).unwrap();
        assert_eq!(read_samples_csv(&buf[..]).unwrap(), (s, Domain::Spatial, bl(2)));

        let c = vec![vec![0.1, 0.2, 0.3, 0.4]];
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &c, Domain::Frequency, bl(2)).unwrap();
        assert_eq!(read_samples_csv(&buf[..]).unwrap(), (c, Domain::Frequency, bl(2)));
        assert!(read_samples_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn raw_samples_with_sidecar() {
        let s = vec![vec![0.5, 1.0, 2.0, 4.0], vec![0.0; 4]];
        let meta = RawSamplesMeta {
            band_limit: bl(2),
            t: 1.0,
            n: 2,
            seed: 5,
            dim: 4,
            domain: Domain::Frequency,
        };
        let mut buf = Vec::new();
        write_samples_raw(&mut buf, &s).unwrap();
        assert_eq!(read_samples_raw(&buf[..], &meta).unwrap(), s);
        let json = serde_json::to_string(&meta).unwrap();
        assert_eq!(json, r#"{"L":2,"t":1.0,"n":2,"seed":5,"dim":4,"domain":"frequency"}"#);
        let bad = RawSamplesMeta { n: 3, ..meta };
        assert!(read_samples_raw(&buf[..], &bad).is_err());
    }
}
