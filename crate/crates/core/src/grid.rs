use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Real values on the uniform grid `k/m`, `k = 0..=m`, linearly interpolated
/// in between.
///
/// Serializes to JSON as `{"m": .., "values": [..]}` and to CSV as the two
/// columns `t,value`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridFunction {
    m: usize,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawGrid {
    m: usize,
    values: Vec<f64>,
}

impl TryFrom<RawGrid> for GridFunction {
    type Error = crate::Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        let g = GridFunction::new(raw.values)?;
        if g.m != raw.m {
            return Err(invalid(format!(
                "grid size {} does not match {} values",
                raw.m,
                g.values.len()
            )));
        }
        Ok(g)
    }
}

impl GridFunction {
    /// Builds a grid function from its `m + 1` node values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("a grid function needs at least two nodes"));
        }
        Ok(Self {
            m: values.len() - 1,
            values,
        })
    }

    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if m == 0 {
            return Err(invalid("grid size must be at least 1"));
        }
        Self::new((0..=m).map(|k| f(k as f64 / m as f64)).collect())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 / self.m as f64
    }

    /// Linear interpolation at `t`, clamped to [0, 1].
    pub fn value_at(&self, t: f64) -> f64 {
        let x = t.clamp(0.0, 1.0) * self.m as f64;
        let k = (x.floor() as usize).min(self.m - 1);
        let frac = x - k as f64;
        if frac == 0.0 {
            return self.values[k];
        }
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= factor);
        self
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "value"])?;
        for (k, v) in self.values.iter().enumerate() {
            w.write_record([self.t(k).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_between_nodes() {
        let g = GridFunction::new(vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(g.value_at(0.0), 0.0);
        assert_eq!(g.value_at(0.25), 0.5);
        assert_eq!(g.value_at(0.5), 1.0);
        assert_eq!(g.value_at(0.75), 2.0);
        assert_eq!(g.value_at(1.0), 3.0);
    }

    #[test]
    fn rejects_short_input() {
        assert!(GridFunction::new(vec![1.0]).is_err());
        assert!(GridFunction::from_fn(0, |t| t).is_err());
    }

    #[test]
    fn json_shape_and_validation() {
        let g = GridFunction::new(vec![0.0, 0.5, 0.0]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"m":2,"values":[0.0,0.5,0.0]}"#);
        let back: GridFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<GridFunction>(r#"{"m":3,"values":[0.0,1.0]}"#).is_err());
    }

    #[test]
    fn csv_columns() {
        let g = GridFunction::new(vec![0.0, -0.25, 0.0, 1.5, 0.0]).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "t,value\n0,0\n0.25,-0.25\n0.5,0\n0.75,1.5\n1,0\n");
    }
}
