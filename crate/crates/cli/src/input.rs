//! Long-format `group,value` CSV input.

use crate::error::{CliError, Result};
use npbf::rank_engine::Sample;
use std::io::Read;

/// Reads two groups; the group seen first becomes sample 1.
pub fn read_groups<R: Read>(reader: R, group_col: &str, value_col: &str) -> Result<(Sample, Sample)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| CliError::Parse {
            line: 1,
            message: format!("missing column `{name}` (header: {})", headers.iter().collect::<Vec<_>>().join(",")),
        })
    };
    let (gi, vi) = (find(group_col)?, find(value_col)?);

    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Parse {
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let group = record.get(gi).unwrap_or("").to_string();
        if group.is_empty() {
            return Err(CliError::Parse {
                line,
                message: "empty group label".into(),
            });
        }
        let raw = record.get(vi).unwrap_or("");
        let value: f64 = raw.parse().map_err(|_| CliError::Parse {
            line,
            message: format!("value `{raw}` is not a number"),
        })?;
        if !value.is_finite() {
            return Err(CliError::Parse {
                line,
                message: format!("value `{raw}` is not finite"),
            });
        }
        match groups.iter_mut().find(|(g, _)| *g == group) {
            Some((_, values)) => values.push(value),
            None => groups.push((group, vec![value])),
        }
    }

    if groups.len() != 2 {
        let names: Vec<&str> = groups.iter().map(|(g, _)| g.as_str()).collect();
        return Err(CliError::Usage(format!(
            "expected exactly two groups, found {} ({})",
            groups.len(),
            names.join(", ")
        )));
    }
    let mut it = groups.into_iter();
    let (g1, v1) = it.next().unwrap();
    let (g2, v2) = it.next().unwrap();
    for (g, v) in [(&g1, &v1), (&g2, &v2)] {
        if v.len() < 2 {
            return Err(CliError::Usage(format!("group `{g}` has {} observation(s), need at least 2", v.len())));
        }
    }
    Ok((Sample::new(g1, v1)?, Sample::new(g2, v2)?))
}
