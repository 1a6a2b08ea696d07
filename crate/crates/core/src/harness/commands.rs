//! Figure-data generators and the posterior command.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use super::{csv_row, HarnessError, HarnessResult};
use crate::bayes::{normalization_d, posterior_density_theta_with, sign_tally_of_pairs, summarize, PosteriorSummary, SignTally};
use crate::math::{analytic_mutual_information, cos_angle, Direction, Outcome};
use crate::sampler::OutcomeRecord;

/// `(theta, I(theta))` over `[0, π]`, `resolution` rows.
///
/// The cosine for row `k` is `sin(π·u)` with `u = (n − 1 − 2k) / (2(n − 1))`
/// formed from exact integers, so the midpoint row has cosine exactly 0 and
/// rows `k` and `n − 1 − k` carry identical information values.
pub fn mi_curve_csv(resolution: usize) -> HarnessResult<String> {
    if resolution < 2 {
        return Err(HarnessError::validation("resolution", "must be at least 2"));
    }
    let last = (resolution - 1) as f64;
    let mut out = String::from("theta,mutual_information\n");
    for k in 0..resolution {
        let theta = PI * k as f64 / last;
        let u = (resolution as f64 - 1.0 - 2.0 * k as f64) / (2.0 * last);
        let info = analytic_mutual_information((PI * u).sin())?;
        csv_row(&mut out, &[theta, info]);
        out.push('\n');
    }
    Ok(out)
}

/// `(theta_y, phi_y, I)` for Bob's setting over the sphere, Alice fixed at
/// `(theta_x, phi_x)`. `theta_y` takes `grid` values on `[0, π]` and
/// `phi_y` takes `2·grid` values on `[0, 2π)`.
pub fn mi_surface_csv(theta_x: f64, phi_x: f64, grid: usize) -> HarnessResult<String> {
    if grid < 2 {
        return Err(HarnessError::validation("resolution", "must be at least 2"));
    }
    if !(theta_x.is_finite() && phi_x.is_finite()) {
        return Err(HarnessError::validation("theta_x/phi_x", "angles must be finite"));
    }
    let alice = Direction::from_polar(theta_x, phi_x);
    let mut out = String::from("theta_y,phi_y,mutual_information\n");
    for j in 0..grid {
        let theta = PI * j as f64 / (grid - 1) as f64;
        for k in 0..2 * grid {
            let phi = PI * k as f64 / grid as f64;
            let bob = Direction::from_polar(theta, phi);
            let info = analytic_mutual_information(cos_angle(&alice, &bob))?;
            csv_row(&mut out, &[theta, phi, info]);
            out.push('\n');
        }
    }
    Ok(out)
}

/// Built-in tally families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FamilyPreset {
    /// `(5,6), (10,12), (20,24), (40,48)`: constant ratio, growing N.
    Ratio,
    /// `(0,100), (10,90), …, (100,0)`: fixed N = 100. Reconstructed from a
    /// prose description; no plotted figure accompanies it.
    Fixed100,
}

impl FamilyPreset {
    pub fn tallies(self) -> Vec<SignTally> {
        match self {
            FamilyPreset::Ratio => [(5, 6), (10, 12), (20, 24), (40, 48)]
                .into_iter()
                .map(|(p, m)| SignTally::new(p, m))
                .collect(),
            FamilyPreset::Fixed100 => (0..=10).map(|i| SignTally::new(10 * i, 100 - 10 * i)).collect(),
        }
    }
}

/// Long-format CSV `n_plus,n_minus,theta,density` of the posterior in the
/// relative angle, `resolution` points per tally on `[−π, π]`. Grid points
/// are `π·(2k − (n − 1))/(n − 1)`, symmetric about 0 exactly.
pub fn posterior_family_csv(tallies: &[SignTally], resolution: usize) -> HarnessResult<String> {
    if tallies.is_empty() {
        return Err(HarnessError::validation("tallies", "at least one tally is required"));
    }
    if resolution < 2 {
        return Err(HarnessError::validation("resolution", "must be at least 2"));
    }
    let last = (resolution - 1) as f64;
    let mut out = String::from("n_plus,n_minus,theta,density\n");
    for t in tallies {
        let log_d = normalization_d(t);
        for k in 0..resolution {
            let theta = PI * (2.0 * k as f64 - last) / last;
            out.push_str(&format!("{},{},", t.n_plus, t.n_minus));
            csv_row(&mut out, &[theta, posterior_density_theta_with(theta, t, log_d)]);
            out.push('\n');
        }
    }
    Ok(out)
}

/// Parses `"P:M"` or `"P,M"` into a tally.
pub fn parse_tally(text: &str) -> HarnessResult<SignTally> {
    let bad = || HarnessError::validation("tally", format!("expected N_PLUS:N_MINUS, got {text:?}"));
    let (p, m) = text.split_once([':', ',']).ok_or_else(bad)?;
    let p = p.trim().parse().map_err(|_| bad())?;
    let m = m.trim().parse().map_err(|_| bad())?;
    Ok(SignTally::new(p, m))
}

/// Outcome pairs from a CSV record (`index,a,b` header). Errors carry the
/// 1-based line number.
pub fn parse_record_csv(text: &str, source_name: &str) -> HarnessResult<Vec<(Outcome, Outcome)>> {
    let err = |line: usize, message: String| HarnessError::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "index,a,b" => {}
        Some((_, header)) => return Err(err(1, format!("expected header `index,a,b`, got {header:?}"))),
        None => return Err(err(1, "empty record file".into())),
    }
    let mut pairs = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(err(line_no, format!("expected 3 fields, found {}", fields.len())));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| err(line_no, format!("bad index {:?}", fields[0])))?;
        if index != pairs.len() {
            return Err(err(line_no, format!("index {index} out of sequence, expected {}", pairs.len())));
        }
        let outcome = |s: &str| {
            s.parse::<i64>()
                .ok()
                .and_then(|v| Outcome::from_value(v).ok())
                .ok_or_else(|| err(line_no, format!("outcome {s:?} is not -1 or 1")))
        };
        pairs.push((outcome(fields[1])?, outcome(fields[2])?));
    }
    Ok(pairs)
}

/// Input to the posterior command.
#[derive(Debug, Clone, PartialEq)]
pub enum BayesInput {
    Tally(SignTally),
    /// CSV (`index,a,b`) or, with a `.json` extension, a serialized
    /// [`OutcomeRecord`].
    RecordFile(PathBuf),
}

pub fn read_record_file(path: &Path) -> HarnessResult<Vec<(Outcome, Outcome)>> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path.display().to_string();
    if path.extension().is_some_and(|e| e == "json") {
        let record: OutcomeRecord = serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
            source_name: name,
            line: e.line(),
            message: e.to_string(),
        })?;
        Ok(record.pairs)
    } else {
        parse_record_csv(&text, &name)
    }
}

pub fn bayes_from_input(input: &BayesInput, level: f64) -> HarnessResult<PosteriorSummary> {
    if !(level > 0.0 && level < 1.0) {
        return Err(HarnessError::validation("level", format!("{level} is not in (0, 1)")));
    }
    let tally = match input {
        BayesInput::Tally(t) => *t,
        BayesInput::RecordFile(path) => sign_tally_of_pairs(&read_record_file(path)?)?,
    };
    if tally.n_total() == 0 {
        return Err(HarnessError::validation("tally", "needs at least one outcome pair"));
    }
    Ok(summarize(&tally, level)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(csv: &str) -> Vec<Vec<f64>> {
        csv.lines()
            .skip(1)
            .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
            .collect()
    }

    #[test]
    fn curve_endpoints_midpoint_symmetry() {
        let r = rows(&mi_curve_csv(101).unwrap());
        assert_eq!(r.len(), 101);
        assert_eq!(r[0], vec![0.0, 1.0]);
        assert_eq!(r[100][1], 1.0);
        assert_eq!(r[100][0], PI);
        assert_eq!(r[50][1], 0.0);
        assert!((r[50][0] - PI / 2.0).abs() < 1e-15);
        for k in 0..101 {
            assert_eq!(r[k][1], r[100 - k][1]);
        }
        assert!(mi_curve_csv(1).is_err());
    }

    #[test]
    fn surface_peaks_at_alice_and_antipode() {
        let r = rows(&mi_surface_csv(1.5, 2.1, 181).unwrap());
        let best = r.iter().max_by(|a, b| a[2].total_cmp(&b[2])).unwrap();
        assert!(best[2] > 0.99);
        let near = |t: f64, p: f64| r.iter().filter(|row| (row[0] - t).abs() < 0.02 && (row[1] - p).abs() < 0.02).map(|row| row[2]).fold(0.0, f64::max);
        assert!(near(1.5, 2.1) > 0.99);
        assert!(near(PI - 1.5, 2.1 + PI) > 0.99);
    }

    #[test]
    fn tally_parsing() {
        assert_eq!(parse_tally("5:6").unwrap(), SignTally::new(5, 6));
        assert_eq!(parse_tally(" 5 , 6").unwrap(), SignTally::new(5, 6));
        assert!(parse_tally("5").is_err());
        assert!(parse_tally("a:b").is_err());
    }

    #[test]
    fn record_csv_errors_have_line_numbers() {
        let ok = "index,a,b\n0,1,-1\n1,-1,1\n";
        assert_eq!(parse_record_csv(ok, "r").unwrap().len(), 2);
        for (text, line) in [
            ("index,a,b\n0,1,-1\n1,2,1\n", 3),
            ("index,a,b\n0,1\n", 2),
            ("idx,a,b\n", 1),
            ("index,a,b\n0,1,1\n5,1,1\n", 3),
        ] {
            match parse_record_csv(text, "r") {
                Err(HarnessError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn bayes_inline_tallies() {
        let s = bayes_from_input(&BayesInput::Tally(SignTally::new(5, 6)), 0.95).unwrap();
        assert_eq!(s.map_cos_theta, 1.0 / 11.0);
        let s = bayes_from_input(&BayesInput::Tally(SignTally::new(9, 9)), 0.95).unwrap();
        assert_eq!(s.map_cos_theta, 0.0);
        assert!(bayes_from_input(&BayesInput::Tally(SignTally::new(0, 0)), 0.95).is_err());
        assert!(bayes_from_input(&BayesInput::Tally(SignTally::new(1, 0)), 1.5).is_err());
    }

    #[test]
    fn presets() {
        assert_eq!(FamilyPreset::Ratio.tallies().len(), 4);
        let fixed = FamilyPreset::Fixed100.tallies();
        assert_eq!(fixed.len(), 11);
        assert!(fixed.iter().all(|t| t.n_total() == 100));
    }
}
