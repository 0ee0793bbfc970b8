use std::io::Write;

use crate::error::{domain, Result};

/// A simulated or observed count series with the identity of the stream that
/// produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountSeries {
    values: Vec<u64>,
    seed: u64,
    stream_id: u64,
    burn_in: usize,
    model_tag: String,
}

impl CountSeries {
    pub fn new(
        values: Vec<u64>,
        seed: u64,
        stream_id: u64,
        burn_in: usize,
        model_tag: impl Into<String>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("count series must be non-empty"));
        }
        Ok(Self {
            values,
            seed,
            stream_id,
            burn_in,
            model_tag: model_tag.into(),
        })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    pub fn model_tag(&self) -> &str {
        &self.model_tag
    }

    /// CSV with header `t,count`, one row per step (t from 0), LF endings.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"t,count\n")?;
        for (t, v) in self.values.iter().enumerate() {
            writeln!(out, "{t},{v}")?;
        }
        out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let s = CountSeries::new(vec![3, 0, 12], 1, 0, 0, "test").unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,count\n0,3\n1,0\n2,12\n");
    }

    #[test]
    fn empty_rejected() {
        assert!(CountSeries::new(vec![], 0, 0, 0, "").is_err());
    }
}
