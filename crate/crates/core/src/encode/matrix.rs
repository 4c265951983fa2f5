use std::io::Write;

use super::dimension::{DimensionIndex, DimensionLabel};

/// An n×d real matrix, one row per case.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    row_labels: Vec<String>,
    columns: DimensionIndex,
    values: Vec<f64>,
}

impl FeatureMatrix {
    /// `values` is row-major and must hold `rows.len() * columns.len()` entries.
    pub fn new(row_labels: Vec<String>, columns: DimensionIndex, values: Vec<f64>) -> Self {
        assert_eq!(
            values.len(),
            row_labels.len() * columns.len(),
            "matrix shape"
        );
        FeatureMatrix {
            row_labels,
            columns,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn columns(&self) -> &DimensionIndex {
        &self.columns
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.ncols();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn row_of(&self, case_id: &str) -> Option<&[f64]> {
        self.row_labels
            .iter()
            .position(|r| r == case_id)
            .map(|i| self.row(i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ncols() + j]
    }

    pub fn column(&self, label: &DimensionLabel) -> Option<Vec<f64>> {
        let j = self.columns.position(label)?;
        Some((0..self.nrows()).map(|i| self.get(i, j)).collect())
    }

    /// Appends columns holding the same value in every row.
    pub fn with_constant_columns(&self, extra: &[(DimensionLabel, f64)]) -> FeatureMatrix {
        let fresh: Vec<&(DimensionLabel, f64)> = extra
            .iter()
            .filter(|(l, _)| self.columns.position(l).is_none())
            .collect();
        let columns = self.columns.extended(fresh.iter().map(|(l, _)| l.clone()));
        let mut values = Vec::with_capacity(self.nrows() * columns.len());
        for i in 0..self.nrows() {
            values.extend_from_slice(self.row(i));
            values.extend(fresh.iter().map(|(_, v)| *v));
        }
        FeatureMatrix::new(self.row_labels.clone(), columns, values)
    }

    /// CSV with a `case_id` column followed by one column per dimension.
    /// Values use the shortest decimal form that reads back exactly.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["case_id".to_string()];
        header.extend(self.columns.iter().map(ToString::to_string));
        w.write_record(&header)?;
        for (i, case) in self.row_labels.iter().enumerate() {
            let mut rec = Vec::with_capacity(self.ncols() + 1);
            rec.push(case.clone());
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 csv")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let cols = DimensionIndex::new([
            DimensionLabel::Categorical {
                attribute: "activity".into(),
                value: "a".into(),
            },
            DimensionLabel::Categorical {
                attribute: "activity".into(),
                value: "b".into(),
            },
        ]);
        let m = FeatureMatrix::new(
            vec!["c1".into(), "c2".into()],
            cols,
            vec![2.0, 0.5, 0.0, 1e-7],
        );
        assert_eq!(
            m.to_csv_string(),
            "case_id,activity=a,activity=b\nc1,2,0.5\nc2,0,0.0000001\n"
        );
        let wider = m.with_constant_columns(&[(DimensionLabel::Other { scope: "x".into() }, 3.0)]);
        assert_eq!(wider.row(1), [0.0, 1e-7, 3.0]);
    }
}
