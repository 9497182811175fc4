//! CSV result records shared by the experiment subcommands.
//!
//! Three row schemas cover every estimator: [`EstimateRow`] for crossing
//! probabilities (also used for bisection traces, one row per
//! evaluation), [`DerivativeRow`] for the derivative estimates, and
//! [`RatioRow`] for the pivotal-ratio experiment. Column sets are fixed
//! and documented on each type; every file starts with `#`-prefixed
//! comment lines carrying the library version and the resolved run
//! parameters, so outputs are self-describing.
//!
//! Numbers are written in Rust's shortest round-tripping decimal form,
//! so parse → re-emit is the identity on well-formed files; the readers
//! here exist to state (and test) exactly that.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::estimators::CrossingEstimate;
use crate::geometry::fmt_f64;

/// Header of the crossing-probability schema.
pub const ESTIMATE_HEADER: &str = "experiment,d,r,lambda,mu,p,q,n_or_L,trials,seed,p_hat,se,ci_low,ci_high";

/// Header of the derivative schema.
pub const DERIVATIVE_HEADER: &str =
    "experiment,d,lambda0,mu,p,q,n,method,h,trials,seed,d_dp,se_p,d_dq,se_q";

/// Header of the pivotal-ratio schema.
pub const RATIO_HEADER: &str =
    "experiment,d,lambda0,mu,p,q,n,trials,seed,num_hat,num_count,den_hat,den_count,ratio";

/// The comment line identifying the producing library version.
pub fn version_comment() -> String {
    format!("abperc {}", env!("CARGO_PKG_VERSION"))
}

/// One crossing-probability estimate with the parameters that produced
/// it. Parameters that a subcommand does not use carry their neutral
/// values (`mu = 0` for one-type runs, `p = q = 1` for unthinned runs,
/// `r = 1` for the unit-distance annulus graph) rather than blanks, so
/// every row states the model it was measured under.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRow {
    pub experiment: String,
    pub d: usize,
    pub r: f64,
    pub lambda: f64,
    pub mu: f64,
    pub p: f64,
    pub q: f64,
    pub n_or_l: f64,
    pub trials: u64,
    pub seed: u64,
    pub p_hat: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl EstimateRow {
    #[allow(clippy::too_many_arguments)]
    pub fn from_estimate(
        experiment: &str,
        d: usize,
        r: f64,
        lambda: f64,
        mu: f64,
        p: f64,
        q: f64,
        n_or_l: f64,
        est: &CrossingEstimate,
    ) -> EstimateRow {
        EstimateRow {
            experiment: experiment.to_string(),
            d,
            r,
            lambda,
            mu,
            p,
            q,
            n_or_l,
            trials: est.trials,
            seed: est.seed,
            p_hat: est.p_hat,
            se: est.std_err,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
        }
    }

    fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.d,
            fmt_f64(self.r),
            fmt_f64(self.lambda),
            fmt_f64(self.mu),
            fmt_f64(self.p),
            fmt_f64(self.q),
            fmt_f64(self.n_or_l),
            self.trials,
            self.seed,
            fmt_f64(self.p_hat),
            fmt_f64(self.se),
            fmt_f64(self.ci_low),
            fmt_f64(self.ci_high)
        )
    }

    fn from_line(line: &str) -> Result<EstimateRow> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 14 {
            return Err(Error::invalid(format!("expected 14 columns, got {}: {line:?}", f.len())));
        }
        Ok(EstimateRow {
            experiment: f[0].to_string(),
            d: parse_field("d", f[1])?,
            r: parse_field("r", f[2])?,
            lambda: parse_field("lambda", f[3])?,
            mu: parse_field("mu", f[4])?,
            p: parse_field("p", f[5])?,
            q: parse_field("q", f[6])?,
            n_or_l: parse_field("n_or_L", f[7])?,
            trials: parse_field("trials", f[8])?,
            seed: parse_field("seed", f[9])?,
            p_hat: parse_field("p_hat", f[10])?,
            se: parse_field("se", f[11])?,
            ci_low: parse_field("ci_low", f[12])?,
            ci_high: parse_field("ci_high", f[13])?,
        })
    }
}

/// One derivative estimate. `method` is `pivotal` or `fd`; `h` is the
/// finite-difference step and 0 for the pivotal method, which has none.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeRow {
    pub experiment: String,
    pub d: usize,
    pub lambda0: f64,
    pub mu: f64,
    pub p: f64,
    pub q: f64,
    pub n: u32,
    pub method: String,
    pub h: f64,
    pub trials: u64,
    pub seed: u64,
    pub d_dp: f64,
    pub se_p: f64,
    pub d_dq: f64,
    pub se_q: f64,
}

impl DerivativeRow {
    fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.d,
            fmt_f64(self.lambda0),
            fmt_f64(self.mu),
            fmt_f64(self.p),
            fmt_f64(self.q),
            self.n,
            self.method,
            fmt_f64(self.h),
            self.trials,
            self.seed,
            fmt_f64(self.d_dp),
            fmt_f64(self.se_p),
            fmt_f64(self.d_dq),
            fmt_f64(self.se_q)
        )
    }

    fn from_line(line: &str) -> Result<DerivativeRow> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 15 {
            return Err(Error::invalid(format!("expected 15 columns, got {}: {line:?}", f.len())));
        }
        Ok(DerivativeRow {
            experiment: f[0].to_string(),
            d: parse_field("d", f[1])?,
            lambda0: parse_field("lambda0", f[2])?,
            mu: parse_field("mu", f[3])?,
            p: parse_field("p", f[4])?,
            q: parse_field("q", f[5])?,
            n: parse_field("n", f[6])?,
            method: f[7].to_string(),
            h: parse_field("h", f[8])?,
            trials: parse_field("trials", f[9])?,
            seed: parse_field("seed", f[10])?,
            d_dp: parse_field("d_dp", f[11])?,
            se_p: parse_field("se_p", f[12])?,
            d_dq: parse_field("d_dq", f[13])?,
            se_q: parse_field("se_q", f[14])?,
        })
    }
}

/// One pivotal-ratio measurement. `ratio` is empty when the denominator
/// event never occurred.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub experiment: String,
    pub d: usize,
    pub lambda0: f64,
    pub mu: f64,
    pub p: f64,
    pub q: f64,
    pub n: u32,
    pub trials: u64,
    pub seed: u64,
    pub num_hat: f64,
    pub num_count: u64,
    pub den_hat: f64,
    pub den_count: u64,
    pub ratio: Option<f64>,
}

impl RatioRow {
    fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.d,
            fmt_f64(self.lambda0),
            fmt_f64(self.mu),
            fmt_f64(self.p),
            fmt_f64(self.q),
            self.n,
            self.trials,
            self.seed,
            fmt_f64(self.num_hat),
            self.num_count,
            fmt_f64(self.den_hat),
            self.den_count,
            self.ratio.map(fmt_f64).unwrap_or_default()
        )
    }

    fn from_line(line: &str) -> Result<RatioRow> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 14 {
            return Err(Error::invalid(format!("expected 14 columns, got {}: {line:?}", f.len())));
        }
        Ok(RatioRow {
            experiment: f[0].to_string(),
            d: parse_field("d", f[1])?,
            lambda0: parse_field("lambda0", f[2])?,
            mu: parse_field("mu", f[3])?,
            p: parse_field("p", f[4])?,
            q: parse_field("q", f[5])?,
            n: parse_field("n", f[6])?,
            trials: parse_field("trials", f[7])?,
            seed: parse_field("seed", f[8])?,
            num_hat: parse_field("num_hat", f[9])?,
            num_count: parse_field("num_count", f[10])?,
            den_hat: parse_field("den_hat", f[11])?,
            den_count: parse_field("den_count", f[12])?,
            ratio: if f[13].is_empty() { None } else { Some(parse_field("ratio", f[13])?) },
        })
    }
}

fn parse_field<T: std::str::FromStr>(name: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse()
        .map_err(|e| Error::invalid(format!("bad {name} field {s:?}: {e}")))
}

fn check_no_separators(experiment: &str) -> Result<()> {
    if experiment.contains(',') || experiment.contains('\n') {
        return Err(Error::invalid(format!(
            "experiment name {experiment:?} would break the CSV schema"
        )));
    }
    Ok(())
}

fn write_preamble<W: Write>(w: &mut W, comments: &[String], header: &str) -> Result<()> {
    for c in comments {
        if c.contains('\n') {
            return Err(Error::invalid("comment lines must not contain newlines"));
        }
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "{header}")?;
    Ok(())
}

fn read_lines<R: BufRead>(r: R, header: &str) -> Result<(Vec<String>, Vec<String>)> {
    let mut comments = Vec::new();
    let mut rows = Vec::new();
    let mut saw_header = false;
    for line in r.lines() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# ") {
            comments.push(rest.to_string());
        } else if !saw_header {
            if line != header {
                return Err(Error::invalid(format!(
                    "unexpected header {line:?}, expected {header:?}"
                )));
            }
            saw_header = true;
        } else {
            rows.push(line);
        }
    }
    if !saw_header {
        return Err(Error::invalid(format!("missing header line {header:?}")));
    }
    Ok((comments, rows))
}

/// Write comment lines, the fixed header, and one line per estimate.
pub fn write_estimate_csv<W: Write>(
    mut w: W,
    comments: &[String],
    rows: &[EstimateRow],
) -> Result<()> {
    write_preamble(&mut w, comments, ESTIMATE_HEADER)?;
    for row in rows {
        check_no_separators(&row.experiment)?;
        writeln!(w, "{}", row.to_line())?;
    }
    Ok(())
}

/// Inverse of [`write_estimate_csv`]: comment lines (without the `# `
/// prefix) and the parsed rows.
pub fn read_estimate_csv<R: BufRead>(r: R) -> Result<(Vec<String>, Vec<EstimateRow>)> {
    let (comments, lines) = read_lines(r, ESTIMATE_HEADER)?;
    let rows = lines.iter().map(|l| EstimateRow::from_line(l)).collect::<Result<_>>()?;
    Ok((comments, rows))
}

/// Write derivative rows under the derivative schema.
pub fn write_derivative_csv<W: Write>(
    mut w: W,
    comments: &[String],
    rows: &[DerivativeRow],
) -> Result<()> {
    write_preamble(&mut w, comments, DERIVATIVE_HEADER)?;
    for row in rows {
        check_no_separators(&row.experiment)?;
        check_no_separators(&row.method)?;
        writeln!(w, "{}", row.to_line())?;
    }
    Ok(())
}

/// Inverse of [`write_derivative_csv`].
pub fn read_derivative_csv<R: BufRead>(r: R) -> Result<(Vec<String>, Vec<DerivativeRow>)> {
    let (comments, lines) = read_lines(r, DERIVATIVE_HEADER)?;
    let rows = lines.iter().map(|l| DerivativeRow::from_line(l)).collect::<Result<_>>()?;
    Ok((comments, rows))
}

/// Write ratio rows under the ratio schema.
pub fn write_ratio_csv<W: Write>(mut w: W, comments: &[String], rows: &[RatioRow]) -> Result<()> {
    write_preamble(&mut w, comments, RATIO_HEADER)?;
    for row in rows {
        check_no_separators(&row.experiment)?;
        writeln!(w, "{}", row.to_line())?;
    }
    Ok(())
}

/// Inverse of [`write_ratio_csv`].
pub fn read_ratio_csv<R: BufRead>(r: R) -> Result<(Vec<String>, Vec<RatioRow>)> {
    let (comments, lines) = read_lines(r, RATIO_HEADER)?;
    let rows = lines.iter().map(|l| RatioRow::from_line(l)).collect::<Result<_>>()?;
    Ok((comments, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_estimate_rows() -> Vec<EstimateRow> {
        let est = CrossingEstimate::from_counts(437, 1000, 9);
        vec![
            EstimateRow::from_estimate("theta", 2, 1.0, 2.0, 1.0, 0.7, 0.7, 4.0, &est),
            EstimateRow::from_estimate("crossing", 3, 0.5, 0.0, 0.0, 1.0, 1.0, 16.0, &CrossingEstimate::from_counts(0, 100, 7)),
        ]
    }

    #[test]
    fn estimate_rows_round_trip_byte_exactly() {
        let comments = vec![version_comment(), "spec theta d=2 seed=9".to_string()];
        let rows = sample_estimate_rows();
        let mut buf = Vec::new();
        write_estimate_csv(&mut buf, &comments, &rows).unwrap();
        let (c2, r2) = read_estimate_csv(buf.as_slice()).unwrap();
        assert_eq!(c2, comments);
        assert_eq!(r2, rows);
        let mut buf2 = Vec::new();
        write_estimate_csv(&mut buf2, &c2, &r2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn derivative_rows_round_trip_byte_exactly() {
        let rows = vec![DerivativeRow {
            experiment: "russo".into(),
            d: 2,
            lambda0: 2.0,
            mu: 1.0,
            p: 0.7,
            q: 0.7,
            n: 4,
            method: "fd".into(),
            h: 0.05,
            trials: 10_000,
            seed: 1,
            d_dp: 1.2345,
            se_p: 0.01,
            d_dq: 0.5,
            se_q: 0.02,
        }];
        let mut buf = Vec::new();
        write_derivative_csv(&mut buf, &[version_comment()], &rows).unwrap();
        let (c2, r2) = read_derivative_csv(buf.as_slice()).unwrap();
        let mut buf2 = Vec::new();
        write_derivative_csv(&mut buf2, &c2, &r2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn ratio_rows_round_trip_with_and_without_ratio() {
        let base = RatioRow {
            experiment: "ratio".into(),
            d: 2,
            lambda0: 2.0,
            mu: 0.5,
            p: 0.7,
            q: 0.7,
            n: 4,
            trials: 100_000,
            seed: 3,
            num_hat: 0.001,
            num_count: 100,
            den_hat: 0.004,
            den_count: 400,
            ratio: Some(0.25),
        };
        let degenerate = RatioRow { den_count: 0, den_hat: 0.0, ratio: None, ..base.clone() };
        let rows = vec![base, degenerate];
        let mut buf = Vec::new();
        write_ratio_csv(&mut buf, &[], &rows).unwrap();
        let (_, r2) = read_ratio_csv(buf.as_slice()).unwrap();
        assert_eq!(r2, rows);
        assert_eq!(r2[1].ratio, None);
        let mut buf2 = Vec::new();
        write_ratio_csv(&mut buf2, &[], &r2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(read_estimate_csv("not,a,header\n".as_bytes()).is_err());
        let mut buf = Vec::new();
        write_estimate_csv(&mut buf, &[], &sample_estimate_rows()).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("short,row\n");
        assert!(read_estimate_csv(text.as_bytes()).is_err());
        let bad = EstimateRow {
            experiment: "with,comma".into(),
            ..sample_estimate_rows().remove(0)
        };
        assert!(write_estimate_csv(Vec::new(), &[], &[bad]).is_err());
    }

    #[test]
    fn headers_are_stable() {
        assert_eq!(
            ESTIMATE_HEADER,
            "experiment,d,r,lambda,mu,p,q,n_or_L,trials,seed,p_hat,se,ci_low,ci_high"
        );
        assert!(version_comment().starts_with("abperc "));
    }
}
