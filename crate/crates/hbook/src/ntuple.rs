use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColType {
    I64,
    F64,
    Str,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    I64(i64),
    F64(f64),
    Str(String),
}

impl Cell {
    pub fn col_type(&self) -> ColType {
        match self {
            Cell::I64(_) => ColType::I64,
            Cell::F64(_) => ColType::F64,
            Cell::Str(_) => ColType::Str,
        }
    }
}

/// A typed row buffer keyed by event index.
///
/// Rows may be appended in any event order; storage order is always
/// `(event_index, append order)`. Concurrent event pipelines complete events
/// out of order, so the buffer re-establishes event order on insert rather
/// than trusting the caller.
///
/// ```
/// use hbook::{Cell, ColType, NTuple};
/// let mut nt = NTuple::new(vec![("pt".into(), ColType::F64)]);
/// nt.append(2, vec![Cell::F64(30.0)]).unwrap();
/// nt.append(0, vec![Cell::F64(10.0)]).unwrap();
/// nt.append(1, vec![Cell::F64(20.0)]).unwrap();
/// let events: Vec<u64> = nt.rows().iter().map(|(e, _)| *e).collect();
/// assert_eq!(events, [0, 1, 2]);
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct NTuple {
    schema: Vec<(String, ColType)>,
    rows: Vec<(u64, Vec<Cell>)>,
}

impl NTuple {
    pub fn new(schema: Vec<(String, ColType)>) -> NTuple {
        NTuple {
            schema,
            rows: Vec::new(),
        }
    }

    /// Rebuilds a buffer from bare rows, for decoders. Each row is validated
    /// against the schema and keyed by its position.
    pub fn from_rows(
        schema: Vec<(String, ColType)>,
        rows: Vec<Vec<Cell>>,
    ) -> Result<NTuple, Error> {
        let mut nt = NTuple::new(schema);
        for (i, row) in rows.into_iter().enumerate() {
            nt.append(i as u64, row)?;
        }
        Ok(nt)
    }

    pub fn schema(&self) -> &[(String, ColType)] {
        &self.schema
    }

    pub fn append(&mut self, event_index: u64, row: Vec<Cell>) -> Result<(), Error> {
        if row.len() != self.schema.len() {
            return Err(Error::SchemaMismatch(format!(
                "row has {} cells, schema has {} columns",
                row.len(),
                self.schema.len()
            )));
        }
        for (cell, (name, ty)) in row.iter().zip(&self.schema) {
            if cell.col_type() != *ty {
                return Err(Error::SchemaMismatch(format!(
                    "column `{name}` expects {ty:?}, got {:?}",
                    cell.col_type()
                )));
            }
        }
        // Stable insert: rows of the same event keep their append order.
        let at = self.rows.partition_point(|(e, _)| *e <= event_index);
        self.rows.insert(at, (event_index, row));
        Ok(())
    }

    /// Rows ordered by `(event_index, append order)`.
    pub fn rows(&self) -> &[(u64, Vec<Cell>)] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn merge_from(&mut self, other: &NTuple) -> Result<(), Error> {
        if self.schema != other.schema {
            return Err(Error::SchemaMismatch(
                "merge partners have different schemas".into(),
            ));
        }
        for (e, row) in &other.rows {
            let at = self.rows.partition_point(|(ev, _)| *ev <= *e);
            self.rows.insert(at, (*e, row.clone()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Vec<(String, ColType)> {
        vec![
            ("n".into(), ColType::I64),
            ("pt".into(), ColType::F64),
            ("tag".into(), ColType::Str),
        ]
    }

    #[test]
    fn schema_is_enforced() {
        let mut nt = NTuple::new(schema());
        let err = nt.append(0, vec![Cell::I64(1)]).unwrap_err();
        assert!(matches!(err, Error::SchemaMismatch(_)));
        let err = nt
            .append(
                0,
                vec![Cell::F64(1.0), Cell::F64(2.0), Cell::Str("x".into())],
            )
            .unwrap_err();
        assert!(matches!(err, Error::SchemaMismatch(_)));
    }

    #[test]
    fn same_event_keeps_append_order() {
        let mut nt = NTuple::new(vec![("v".into(), ColType::I64)]);
        nt.append(7, vec![Cell::I64(1)]).unwrap();
        nt.append(7, vec![Cell::I64(2)]).unwrap();
        nt.append(3, vec![Cell::I64(0)]).unwrap();
        let vals: Vec<i64> = nt
            .rows()
            .iter()
            .map(|(_, r)| match r[0] {
                Cell::I64(v) => v,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(vals, [0, 1, 2]);
    }
}
