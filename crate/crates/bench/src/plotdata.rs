//! Plot-ready CSV series (plain comma-separated columns readable by gnuplot or vega).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{BenchError, Result};
use crate::results::ResultTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// One column pair (mean, std) per sampler, one row per landmark count.
    ErrorVsK,
    /// One column pair (mean, std) per metric, one row per graph neighbor count.
    ScoreVsKnn,
    /// One bar per result row: `label,mean,std`.
    Bars,
    /// `phi1,phi2,t,h` from an embedding CSV.
    Scatter,
}

impl FromStr for PlotKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error-vs-k" => Ok(PlotKind::ErrorVsK),
            "score-vs-knn" => Ok(PlotKind::ScoreVsKnn),
            "bars" => Ok(PlotKind::Bars),
            "scatter" => Ok(PlotKind::Scatter),
            other => Err(BenchError::Plot(format!(
                "unknown plot kind {other:?} (expected error-vs-k, score-vs-knn, bars or scatter)"
            ))),
        }
    }
}

fn non_empty(table: &ResultTable) -> Result<()> {
    if table.rows.is_empty() {
        Err(BenchError::Plot("result table has no rows".into()))
    } else {
        Ok(())
    }
}

fn fmt_opt(v: Option<&(f64, f64)>) -> String {
    v.map_or_else(|| ",".to_owned(), |(m, s)| format!("{m},{s}"))
}

fn wide_series(
    table: &ResultTable,
    x_name: &str,
    x_of: impl Fn(&crate::results::ResultRow) -> Option<usize>,
    series_of: impl Fn(&crate::results::ResultRow) -> String,
) -> Result<String> {
    non_empty(table)?;
    let mut grid: BTreeMap<usize, BTreeMap<String, (f64, f64)>> = BTreeMap::new();
    let mut series: Vec<String> = Vec::new();
    for row in &table.rows {
        let Some(x) = x_of(row) else {
            return Err(BenchError::Plot(format!("row without {x_name}: {row:?}")));
        };
        let name = series_of(row);
        if !series.contains(&name) {
            series.push(name.clone());
        }
        grid.entry(x).or_default().insert(name, (row.mean, row.std));
    }
    let mut out = String::from(x_name);
    for s in &series {
        write!(out, ",{s}_mean,{s}_std").unwrap();
    }
    out.push('\n');
    for (x, cells) in &grid {
        write!(out, "{x}").unwrap();
        for s in &series {
            write!(out, ",{}", fmt_opt(cells.get(s))).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Error (or score) against the landmark count, one series per sampler. Rows that
/// also vary in metric or neighbor count get those appended to the series name.
pub fn error_vs_k(table: &ResultTable) -> Result<String> {
    wide_series(table, "k", |r| Some(r.k), |r| {
        let mut name = r.sampler.clone();
        if r.metric != "-" {
            write!(name, "/{}", r.metric).unwrap();
        }
        if let Some(knn) = r.knn {
            write!(name, "/knn{knn}").unwrap();
        }
        name
    })
}

/// Score against the graph neighbor count, one series per metric (and landmark count
/// when several are present).
pub fn score_vs_knn(table: &ResultTable) -> Result<String> {
    let several_k = table.rows.iter().any(|r| r.k != table.rows[0].k);
    wide_series(table, "knn", |r| r.knn, |r| {
        if several_k {
            format!("{}/k{}", r.metric, r.k)
        } else {
            r.metric.clone()
        }
    })
}

/// Bar chart data with standard-deviation whiskers.
pub fn bars(table: &ResultTable) -> Result<String> {
    non_empty(table)?;
    let mut out = String::from("label,mean,std\n");
    for r in &table.rows {
        let mut label = r.sampler.clone();
        if r.metric != "-" {
            write!(label, "+{}", r.metric).unwrap();
        }
        write!(label, " k={}", r.k).unwrap();
        if let Some(knn) = r.knn {
            write!(label, " knn={knn}").unwrap();
        }
        writeln!(out, "\"{label}\",{},{}", r.mean, r.std).unwrap();
    }
    Ok(out)
}

/// `phi1,phi2,t,h` columns from an embedding CSV written by the `embed` command.
/// `t` and `h` are left empty when the embedding carries no ground truth.
pub fn scatter(embedding_csv: &str) -> Result<String> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(embedding_csv.as_bytes());
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(p1), Some(p2)) = (col("phi1"), col("phi2")) else {
        return Err(BenchError::Plot("scatter needs phi1 and phi2 columns".into()));
    };
    let (t, h) = (col("t"), col("h"));
    let mut out = String::from("phi1,phi2,t,h\n");
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        let get = |c: Option<usize>| c.map_or("", |c| &record[c]).to_owned();
        writeln!(out, "{},{},{},{}", &record[p1], &record[p2], get(t), get(h)).unwrap();
        rows += 1;
    }
    if rows == 0 {
        return Err(BenchError::Plot("embedding has no rows".into()));
    }
    Ok(out)
}

/// Converts `input` (a result table, or an embedding for [`PlotKind::Scatter`]) into
/// plot data at `output`.
pub fn emit_plotdata(input: &Path, kind: PlotKind, output: &Path) -> Result<()> {
    let text = match kind {
        PlotKind::Scatter => scatter(&std::fs::read_to_string(input)?)?,
        _ => {
            let table = ResultTable::read_csv(input)?;
            match kind {
                PlotKind::ErrorVsK => error_vs_k(&table)?,
                PlotKind::ScoreVsKnn => score_vs_knn(&table)?,
                PlotKind::Bars => bars(&table)?,
                PlotKind::Scatter => unreachable!(),
            }
        }
    };
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(output, text)?;
    Ok(())
}
