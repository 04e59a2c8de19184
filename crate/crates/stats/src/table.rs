//! Column-oriented data table used as model input.
//!
//! Columns are either numeric or categorical. When reading CSV or JSONL,
//! a column is numeric if every non-empty cell parses as a float, and
//! categorical otherwise.

use std::collections::BTreeMap;
use std::io::{BufRead, Read};
use std::path::Path;

use serde_json::Value;

use crate::error::{Result, StatsError};

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    /// Missing cells are stored as `NaN`.
    Numeric(Vec<f64>),
    /// Missing cells are stored as empty strings.
    Categorical(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell rendered as a factor level. Integral floats print without a
    /// fractional part so `1.0` becomes level `"1"`.
    pub fn level_at(&self, row: usize) -> Option<String> {
        match self {
            Column::Categorical(v) => {
                let s = &v[row];
                (!s.is_empty()).then(|| s.clone())
            }
            Column::Numeric(v) => {
                let x = v[row];
                if x.is_nan() {
                    None
                } else if x.fract() == 0.0 && x.abs() < 1e15 {
                    Some(format!("{}", x as i64))
                } else {
                    Some(format!("{x}"))
                }
            }
        }
    }

    pub fn numeric_at(&self, row: usize) -> Option<f64> {
        match self {
            Column::Numeric(v) => Some(v[row]).filter(|x| !x.is_nan()),
            Column::Categorical(v) => v[row].trim().parse().ok(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DataTable {
    names: Vec<String>,
    columns: Vec<Column>,
    nrows: usize,
}

impl DataTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces a column. Panics if its length differs from the
    /// existing columns.
    pub fn with_column(mut self, name: impl Into<String>, column: Column) -> Self {
        self.insert(name, column);
        self
    }

    pub fn with_numeric(self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.with_column(name, Column::Numeric(values))
    }

    pub fn with_categorical<S: Into<String>>(
        self,
        name: impl Into<String>,
        values: impl IntoIterator<Item = S>,
    ) -> Self {
        let values = values.into_iter().map(Into::into).collect();
        self.with_column(name, Column::Categorical(values))
    }

    pub fn insert(&mut self, name: impl Into<String>, column: Column) {
        let name = name.into();
        if !self.columns.is_empty() {
            assert_eq!(
                column.len(),
                self.nrows,
                "column `{name}` has {} rows, table has {}",
                column.len(),
                self.nrows
            );
        }
        self.nrows = column.len();
        match self.names.iter().position(|n| *n == name) {
            Some(i) => self.columns[i] = column,
            None => {
                self.names.push(name);
                self.columns.push(column);
            }
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.columns[i])
            .ok_or_else(|| StatsError::UnknownColumn(name.to_string()))
    }

    /// Keeps the rows for which `keep` returns true.
    pub fn filter_rows(&self, mut keep: impl FnMut(usize) -> bool) -> DataTable {
        let rows: Vec<usize> = (0..self.nrows).filter(|&r| keep(r)).collect();
        let columns = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Numeric(v) => Column::Numeric(rows.iter().map(|&r| v[r]).collect()),
                Column::Categorical(v) => {
                    Column::Categorical(rows.iter().map(|&r| v[r].clone()).collect())
                }
            })
            .collect();
        DataTable {
            names: self.names.clone(),
            columns,
            nrows: rows.len(),
        }
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| StatsError::Parse(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut cells: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        for record in rdr.records() {
            let record = record.map_err(|e| StatsError::Parse(e.to_string()))?;
            for (i, col) in cells.iter_mut().enumerate() {
                col.push(record.get(i).unwrap_or("").to_string());
            }
        }
        Ok(Self::from_string_columns(headers, cells))
    }

    pub fn from_jsonl_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_jsonl_reader(std::io::BufReader::new(file))
    }

    /// Reads one JSON object per line. Keys missing from a line become
    /// missing cells.
    pub fn from_jsonl_reader(reader: impl BufRead) -> Result<Self> {
        let mut rows: Vec<BTreeMap<String, Value>> = Vec::new();
        let mut headers: Vec<String> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let obj: BTreeMap<String, Value> = serde_json::from_str(&line)
                .map_err(|e| StatsError::Parse(format!("line {}: {e}", lineno + 1)))?;
            for k in obj.keys() {
                if !headers.contains(k) {
                    headers.push(k.clone());
                }
            }
            rows.push(obj);
        }
        let cells = headers
            .iter()
            .map(|h| {
                rows.iter()
                    .map(|r| match r.get(h) {
                        None | Some(Value::Null) => String::new(),
                        Some(Value::String(s)) => s.clone(),
                        Some(Value::Bool(b)) => if *b { "1" } else { "0" }.to_string(),
                        Some(v) => v.to_string(),
                    })
                    .collect()
            })
            .collect();
        Ok(Self::from_string_columns(headers, cells))
    }

    fn from_string_columns(headers: Vec<String>, cells: Vec<Vec<String>>) -> Self {
        let mut table = DataTable::new();
        for (name, col) in headers.into_iter().zip(cells) {
            let numeric: Option<Vec<f64>> = col
                .iter()
                .map(|s| {
                    let s = s.trim();
                    if s.is_empty() {
                        Some(f64::NAN)
                    } else {
                        s.parse::<f64>().ok()
                    }
                })
                .collect();
            let column = match numeric {
                Some(v) if v.iter().any(|x| !x.is_nan()) => Column::Numeric(v),
                _ => Column::Categorical(col),
            };
            table.insert(name, column);
        }
        table
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_infers_column_kinds() {
        let csv = "health,topic,x\n1,Trump,0.5\n0,Abortion,\n";
        let t = DataTable::from_csv_reader(csv.as_bytes()).unwrap();
        assert_eq!(t.nrows(), 2);
        assert!(matches!(t.column("health").unwrap(), Column::Numeric(_)));
        assert!(matches!(t.column("topic").unwrap(), Column::Categorical(_)));
        assert_eq!(t.column("x").unwrap().numeric_at(1), None);
        assert_eq!(t.column("health").unwrap().level_at(0).as_deref(), Some("1"));
    }

    #[test]
    fn jsonl_handles_missing_keys_and_bools() {
        let src = "{\"health\": true, \"topic\": \"Syria\"}\n\n{\"health\": false}\n";
        let t = DataTable::from_jsonl_reader(src.as_bytes()).unwrap();
        assert_eq!(t.nrows(), 2);
        assert_eq!(t.column("health").unwrap().numeric_at(0), Some(1.0));
        assert_eq!(t.column("topic").unwrap().level_at(1), None);
    }

    #[test]
    fn unknown_column_is_an_error() {
        let t = DataTable::new().with_numeric("a", vec![1.0]);
        assert!(matches!(t.column("b"), Err(StatsError::UnknownColumn(_))));
    }
}
