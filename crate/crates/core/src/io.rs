//! Split real/imaginary text files plus a JSON sidecar.
//!
//! `<base>_re.txt` and `<base>_im.txt` hold one state per line, `d²` entries in
//! row-major order separated by single spaces. Numbers carry 17 significant
//! digits with trailing zeros removed, and exact zeros are written as `0`, so the
//! rendering of a given double is unique. `<base>_range.txt` holds one weight per
//! line and `<base>_meta.json` the flat metadata.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::sample_set::{SampleMeta, SampleSet};
use crate::state::DensityMatrix;

/// Paths of the files that make up one set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetPaths {
    pub re: PathBuf,
    pub im: PathBuf,
    pub range: PathBuf,
    pub meta: PathBuf,
}

impl SetPaths {
    pub fn new(base: impl AsRef<Path>) -> Self {
        let base = base.as_ref().as_os_str().to_owned();
        let with = |suffix: &str| {
            let mut s = base.clone();
            s.push(suffix);
            PathBuf::from(s)
        };
        Self {
            re: with("_re.txt"),
            im: with("_im.txt"),
            range: with("_range.txt"),
            meta: with("_meta.json"),
        }
    }
}

/// Canonical 17-significant-digit rendering.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    if (-5..17).contains(&exp) {
        let mut out = String::from(sign);
        if exp < 0 {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
            out.push_str(digits);
        } else {
            let int_len = exp as usize + 1;
            if digits.len() <= int_len {
                out.push_str(digits);
                out.extend(std::iter::repeat_n('0', int_len - digits.len()));
            } else {
                out.push_str(&digits[..int_len]);
                out.push('.');
                out.push_str(&digits[int_len..]);
            }
        }
        out
    } else {
        let (head, tail) = digits.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn render_rows(set: &SampleSet, part: fn(&Complex64) -> f64) -> String {
    let mut out = String::new();
    for s in set.states() {
        let m = s.matrix();
        let d = set.d();
        for j in 0..d {
            for k in 0..d {
                if j + k > 0 {
                    out.push(' ');
                }
                out.push_str(&format_number(part(&m[(j, k)])));
            }
        }
        out.push('\n');
    }
    out
}

/// Fails with [`Error::WouldOverwrite`] if any file of the set exists, unless `force`.
pub fn check_overwrite(base: impl AsRef<Path>, force: bool) -> Result<()> {
    if force {
        return Ok(());
    }
    let paths = SetPaths::new(base);
    for p in [&paths.re, &paths.im, &paths.range, &paths.meta] {
        if p.exists() {
            return Err(Error::WouldOverwrite(p.clone()));
        }
    }
    Ok(())
}

/// Writes a set under `base`. Existing files are only replaced when `force` is set;
/// a stale `_range` file is removed when the set carries no weights.
pub fn write_set(set: &SampleSet, base: impl AsRef<Path>, force: bool) -> Result<SetPaths> {
    check_overwrite(&base, force)?;
    let paths = SetPaths::new(base);
    write_file(&paths.re, &render_rows(set, |c| c.re))?;
    write_file(&paths.im, &render_rows(set, |c| c.im))?;
    match set.weights() {
        Some(w) => {
            let mut s = String::new();
            for v in w {
                s.push_str(&format_number(*v));
                s.push('\n');
            }
            write_file(&paths.range, &s)?;
        }
        None if paths.range.exists() => {
            fs::remove_file(&paths.range).map_err(|source| Error::Io {
                path: paths.range.clone(),
                source,
            })?;
        }
        None => {}
    }
    let mut meta = serde_json::to_string_pretty(&set.meta)?;
    meta.push('\n');
    write_file(&paths.meta, &meta)?;
    Ok(paths)
}

fn parse_rows(path: &Path, text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            line.split_ascii_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::MalformedNumber {
                            path: path.to_path_buf(),
                            line: i + 1,
                            token: tok.to_string(),
                        })
                })
                .collect()
        })
        .collect()
}

/// Reads a set written by [`write_set`] and validates every state.
/// Missing metadata or weights are tolerated.
pub fn read_set(base: impl AsRef<Path>) -> Result<SampleSet> {
    let paths = SetPaths::new(base);
    let re = parse_rows(&paths.re, &read_file(&paths.re)?)?;
    let im = parse_rows(&paths.im, &read_file(&paths.im)?)?;
    if re.len() != im.len() {
        return Err(Error::RowCountMismatch {
            re_rows: re.len(),
            im_rows: im.len(),
        });
    }
    let meta: Option<SampleMeta> = if paths.meta.exists() {
        Some(serde_json::from_str(&read_file(&paths.meta)?)?)
    } else {
        None
    };
    let mut d = meta.as_ref().map(|m| m.d);
    let mut states = Vec::with_capacity(re.len());
    for (row, (r, i)) in re.iter().zip(&im).enumerate() {
        if r.len() != i.len() {
            return Err(Error::RowLengthMismatch {
                row,
                re_len: r.len(),
                im_len: i.len(),
            });
        }
        let side = (r.len() as f64).sqrt().round() as usize;
        let dim = *d.get_or_insert(side);
        if dim * dim != r.len() {
            return Err(Error::NotSquare {
                row,
                len: r.len(),
                d: dim,
            });
        }
        let m = ComplexMatrix::from_fn(dim, dim, |j, k| {
            Complex64::new(r[j * dim + k], i[j * dim + k])
        });
        let min_eigenvalue = linalg::min_eigenvalue(&m);
        let rho = DensityMatrix::new(m).map_err(|e| Error::InvalidRow {
            row,
            reason: e.to_string(),
            min_eigenvalue,
        })?;
        states.push(rho);
    }
    let d = d.ok_or(Error::Empty("sample files without metadata"))?;
    let meta = meta.unwrap_or_else(|| SampleMeta::new(d));
    let mut set = SampleSet::new(d, states, meta)?;
    if paths.range.exists() {
        let text = read_file(&paths.range)?;
        let rows = parse_rows(&paths.range, &text)?;
        let mut w = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != 1 {
                return Err(Error::MalformedNumber {
                    path: paths.range.clone(),
                    line: i + 1,
                    token: row
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(" "),
                });
            }
            w.push(row[0]);
        }
        set = set.with_weights(w)?;
    }
    Ok(set)
}

/// Reads a one-value-per-line weights file.
pub fn read_weights(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let rows = parse_rows(path, &read_file(path)?)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| match r.as_slice() {
            [v] => Ok(*v),
            _ => Err(Error::MalformedNumber {
                path: path.to_path_buf(),
                line: i + 1,
                token: format!("{} values", r.len()),
            }),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample_set::SampleMeta;

    #[test]
    fn canonical_numbers() {
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-0.25), "-0.25");
        assert_eq!(format_number(0.1), "0.10000000000000001");
        assert_eq!(format_number(1e-7), "9.9999999999999995e-8");
        assert_eq!(format_number(123.5), "123.5");
        assert_eq!(format_number(2e20), "2e20");
        assert_eq!(format_number(1.5e-5), "0.000015");
    }

    #[test]
    fn numbers_round_trip() {
        for v in [
            0.1,
            1.0 / 3.0,
            -2.0 / 7.0,
            1e-300,
            5e-324,
            1.7976931348623157e308,
            0.49999999999999994,
            12345.678,
        ] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
            assert_eq!(format_number(s.parse().unwrap()), s);
        }
    }

    #[test]
    fn maximally_mixed_row() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("mm");
        let set = SampleSet::new(
            2,
            vec![DensityMatrix::maximally_mixed(2)],
            SampleMeta::new(2),
        )
        .unwrap();
        let paths = write_set(&set, &base, false).unwrap();
        assert_eq!(fs::read_to_string(&paths.re).unwrap(), "0.5 0 0 0.5\n");
        assert_eq!(fs::read_to_string(&paths.im).unwrap(), "0 0 0 0\n");
        assert!(matches!(
            write_set(&set, &base, false),
            Err(Error::WouldOverwrite(_))
        ));
        assert!(write_set(&set, &base, true).is_ok());
    }
}
