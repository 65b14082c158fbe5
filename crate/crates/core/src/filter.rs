//! Distance-weighted neighbourhood filtering over element centroids.
//!
//! `H[j][i] = max(0, rfill - |c_j - c_i|)`, `Hs[j] = Σ_i H[j][i]`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterMode {
    /// `ft = 0`: no filtering.
    Null,
    /// `ft = 1`: sensitivity filtering.
    Sensitivity,
    /// `ft = 2`: density filtering.
    Density,
}

impl FilterMode {
    pub fn from_ft(ft: u8) -> Result<Self> {
        match ft {
            0 => Ok(FilterMode::Null),
            1 => Ok(FilterMode::Sensitivity),
            2 => Ok(FilterMode::Density),
            _ => Err(Error::Filter(format!("filter mode must be 0, 1 or 2, got {ft}"))),
        }
    }

    pub fn ft(self) -> u8 {
        match self {
            FilterMode::Null => 0,
            FilterMode::Sensitivity => 1,
            FilterMode::Density => 2,
        }
    }
}

impl fmt::Display for FilterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ft())
    }
}

impl FromStr for FilterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ft = s
            .trim()
            .parse::<u8>()
            .map_err(|_| Error::Filter(format!("filter mode must be 0, 1 or 2, got {s:?}")))?;
        FilterMode::from_ft(ft)
    }
}

/// Symmetric weight matrix stored row-wise (CSR) with its row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOperator {
    mode: FilterMode,
    rfill: f64,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
    row_sums: Vec<f64>,
}

#[inline]
fn hat(rfill: f64, a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    rfill - (dx * dx + dy * dy).sqrt()
}

/// Builds the filter by binning centroids into square cells of side `rfill`,
/// so each element only looks at its own and the eight surrounding cells.
pub fn build_filter(centroids: &[[f64; 2]], rfill: f64, mode: FilterMode) -> Result<FilterOperator> {
    if !(rfill > 0.0 && rfill.is_finite()) {
        return Err(Error::Filter(format!("filter radius must be positive, got {rfill}")));
    }
    let cell = |p: [f64; 2]| ((p[0] / rfill).floor() as i64, (p[1] / rfill).floor() as i64);
    let mut bins: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &c) in centroids.iter().enumerate() {
        bins.entry(cell(c)).or_default().push(i);
    }

    let n = centroids.len();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut weights = Vec::new();
    let mut row_sums = Vec::with_capacity(n);
    let mut row: Vec<(usize, f64)> = Vec::new();
    row_ptr.push(0);
    for &cj in centroids {
        row.clear();
        let (bx, by) = cell(cj);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(members) = bins.get(&(bx + dx, by + dy)) else { continue };
                for &i in members {
                    let w = hat(rfill, cj, centroids[i]);
                    if w > 0.0 {
                        row.push((i, w));
                    }
                }
            }
        }
        row.sort_unstable_by_key(|e| e.0);
        let mut sum = 0.0;
        for &(i, w) in &row {
            cols.push(i);
            weights.push(w);
            sum += w;
        }
        row_sums.push(sum);
        row_ptr.push(cols.len());
    }
    Ok(FilterOperator {
        mode,
        rfill,
        row_ptr,
        cols,
        weights,
        row_sums,
    })
}

impl FilterOperator {
    pub fn mode(&self) -> FilterMode {
        self.mode
    }

    pub fn rfill(&self) -> f64 {
        self.rfill
    }

    pub fn len(&self) -> usize {
        self.row_sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_sums.is_empty()
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    /// Same weights, different mode.
    pub fn with_mode(&self, mode: FilterMode) -> Self {
        FilterOperator { mode, ..self.clone() }
    }

    /// `(column, weight)` pairs of row `j`, sorted by column.
    pub fn row(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[j]..self.row_ptr[j + 1];
        self.cols[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    pub fn neighbour_count(&self, j: usize) -> usize {
        self.row_ptr[j + 1] - self.row_ptr[j]
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// `H v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|j| self.row(j).map(|(i, w)| w * v[i]).sum()).collect()
    }

    fn expect(&self, mode: FilterMode, what: &str) -> Result<()> {
        if self.mode != mode {
            return Err(Error::Filter(format!("{what} needs filter mode {mode:?}, operator is {:?}", self.mode)));
        }
        Ok(())
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::Filter(format!("vector has {} entries, filter has {}", v.len(), self.len())));
        }
        Ok(())
    }

    /// `dc'_j = Σ_i H_ji x_i dc_i / (max(1e-3, x_j) Hs_j)`.
    pub fn filter_sensitivities(&self, x: &[f64], dc: &[f64]) -> Result<Vec<f64>> {
        self.expect(FilterMode::Sensitivity, "sensitivity filtering")?;
        self.check_len(x)?;
        self.check_len(dc)?;
        let xdc: Vec<f64> = x.iter().zip(dc).map(|(x, d)| x * d).collect();
        let h = self.apply(&xdc);
        Ok((0..self.len())
            .map(|j| h[j] / (x[j].max(1e-3) * self.row_sums[j]))
            .collect())
    }

    /// `xphys_j = Σ_i H_ji x_i / Hs_j`.
    pub fn filter_density(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.expect(FilterMode::Density, "density filtering")?;
        self.check_len(x)?;
        Ok(self.density_unchecked(x))
    }

    pub(crate) fn density_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let h = self.apply(x);
        h.iter().zip(&self.row_sums).map(|(h, s)| h / s).collect()
    }

    /// Chain rule through the density filter: `dx_j = Σ_i H_ij d_i / Hs_i`.
    pub fn chainrule_density(&self, d: &[f64]) -> Result<Vec<f64>> {
        self.expect(FilterMode::Density, "density chain rule")?;
        self.check_len(d)?;
        let scaled: Vec<f64> = d.iter().zip(&self.row_sums).map(|(d, s)| d / s).collect();
        // H is symmetric, so Hᵀ y = H y
        Ok(self.apply(&scaled))
    }
}
