//! Datasets, decision stumps and the enumerated stump hypothesis space.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Labeled examples stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    features: Vec<f64>,
    labels: Vec<i8>,
    true_types: Option<Vec<u8>>,
}

impl Dataset {
    /// Build from a flat row-major `n × d` feature buffer.
    pub fn from_flat(d: usize, features: Vec<f64>, labels: Vec<i8>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Dataset("dataset needs at least one example".into()));
        }
        if features.len() != n * d {
            return Err(Error::Dataset(format!(
                "feature buffer has {} values, expected {n}×{d}",
                features.len()
            )));
        }
        if let Some(pos) = labels.iter().position(|&y| y != 1 && y != -1) {
            return Err(Error::Dataset(format!("label {} at row {pos} is not ±1", labels[pos])));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dataset("features must be finite".into()));
        }
        Ok(Self {
            n,
            d,
            features,
            labels,
            true_types: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<i8>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.len() != labels.len() {
            return Err(Error::Dataset(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::Dataset(format!("row {i} has {} columns, expected {d}", rows[i].len())));
        }
        Self::from_flat(d, rows.concat(), labels)
    }

    /// Attach ground-truth type selectors (1 = true label, 0 = noisy).
    pub fn with_true_types(mut self, types: Vec<u8>) -> Result<Self> {
        if types.len() != self.n {
            return Err(Error::Dataset(format!("{} true types for {} examples", types.len(), self.n)));
        }
        if types.iter().any(|&w| w > 1) {
            return Err(Error::Dataset("true types must be 0 or 1".into()));
        }
        self.true_types = Some(types);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.d + j]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn true_types(&self) -> Option<&[u8]> {
        self.true_types.as_deref()
    }

    /// Rows selected by `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n) {
            return Err(Error::Index { index: bad, len: self.n });
        }
        let mut features = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        let mut out = Self::from_flat(self.d, features, labels)?;
        if let Some(t) = &self.true_types {
            out.true_types = Some(indices.iter().map(|&i| t[i]).collect());
        }
        Ok(out)
    }
}

/// `h(x) = sign(x[feature] − threshold)` with `sign(0) = +1`.
///
/// Polarity is always +1; negated stumps are reached through negative weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
}

impl Stump {
    #[inline]
    pub fn predict(&self, x: &[f64]) -> i8 {
        if x[self.feature] >= self.threshold {
            1
        } else {
            -1
        }
    }
}

/// Stumps built over one dataset together with their cached predictions on it.
#[derive(Debug, Clone)]
pub struct StumpSpace {
    n: usize,
    stumps: Vec<Stump>,
    table: Vec<i8>,
    // number of training examples strictly below each stump's threshold
    below: Vec<usize>,
    // per feature: example indices sorted by value (empty when unused)
    order: Vec<Vec<usize>>,
}

/// Enumerate one stump below each feature's minimum and one at every midpoint
/// between consecutive distinct values, then drop any stump whose prediction
/// row repeats or negates an earlier one.
pub fn build_stumps(data: &Dataset) -> Result<StumpSpace> {
    let n = data.n();
    let mut seen: HashSet<Vec<i8>> = HashSet::new();
    let mut stumps = Vec::new();
    let mut table = Vec::new();
    let mut below = Vec::new();
    let mut order = vec![Vec::new(); data.d()];
    let mut any_split = false;

    for j in 0..data.d() {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| data.value(a, j).total_cmp(&data.value(b, j)));
        let sorted: Vec<f64> = idx.iter().map(|&i| data.value(i, j)).collect();
        let mut candidates = vec![(sorted[0] - 1.0, 0usize)];
        for k in 1..n {
            if sorted[k] > sorted[k - 1] {
                candidates.push((0.5 * (sorted[k - 1] + sorted[k]), k));
                any_split = true;
            }
        }
        let mut used = false;
        for (threshold, count) in candidates {
            let mut row = vec![1i8; n];
            for &i in &idx[..count] {
                row[i] = -1;
            }
            let negated: Vec<i8> = row.iter().map(|&v| -v).collect();
            if seen.contains(&row) || seen.contains(&negated) {
                continue;
            }
            stumps.push(Stump { feature: j, threshold });
            table.extend_from_slice(&row);
            below.push(count);
            seen.insert(row);
            used = true;
        }
        if used {
            order[j] = idx;
        }
    }
    if !any_split {
        return Err(Error::EmptySpace);
    }
    Ok(StumpSpace {
        n,
        stumps,
        table,
        below,
        order,
    })
}

impl StumpSpace {
    pub fn len(&self) -> usize {
        self.stumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stumps.is_empty()
    }

    /// Number of examples the prediction table covers.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stumps(&self) -> &[Stump] {
        &self.stumps
    }

    pub fn stump(&self, m: usize) -> Result<Stump> {
        self.stumps
            .get(m)
            .copied()
            .ok_or(Error::Index { index: m, len: self.len() })
    }

    /// Cached `h_m(x_n)` for every training example.
    pub fn row(&self, m: usize) -> &[i8] {
        &self.table[m * self.n..(m + 1) * self.n]
    }

    /// Keep only the stumps at `keep` (in that order).
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        if let Some(&bad) = keep.iter().find(|&&m| m >= self.len()) {
            return Err(Error::Index { index: bad, len: self.len() });
        }
        if keep.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut table = Vec::with_capacity(keep.len() * self.n);
        for &m in keep {
            table.extend_from_slice(self.row(m));
        }
        Ok(Self {
            n: self.n,
            stumps: keep.iter().map(|&m| self.stumps[m]).collect(),
            table,
            below: keep.iter().map(|&m| self.below[m]).collect(),
            order: self.order.clone(),
        })
    }

    /// Drop the stump that predicts +1 everywhere, if present.
    pub fn without_constant(&self) -> Result<Self> {
        let keep: Vec<usize> = (0..self.len()).filter(|&m| self.below[m] != 0).collect();
        self.restrict(&keep)
    }

    /// `ε_m = Σ_n d_n 1{h_m(x_n) ≠ y_n}` for every stump at once.
    ///
    /// Uses per-feature prefix sums over the sorted example order, so the
    /// cost is `O(N·D + M)` rather than `O(N·M)`.
    pub fn weighted_errors(&self, labels: &[i8], d: &[f64]) -> Vec<f64> {
        debug_assert_eq!(labels.len(), self.n);
        let neg_total: f64 = d.iter().zip(labels).filter(|(_, &y)| y < 0).map(|(w, _)| w).sum();
        // prefix[j][k] = (Σ d over y=+1, Σ d over y=−1) for the first k sorted examples
        let prefixes: Vec<Vec<(f64, f64)>> = self
            .order
            .iter()
            .map(|idx| {
                let mut acc = Vec::with_capacity(idx.len() + 1);
                let (mut pos, mut neg) = (0.0, 0.0);
                acc.push((pos, neg));
                for &i in idx {
                    if labels[i] > 0 {
                        pos += d[i];
                    } else {
                        neg += d[i];
                    }
                    acc.push((pos, neg));
                }
                acc
            })
            .collect();
        self.stumps
            .iter()
            .zip(&self.below)
            .map(|(s, &k)| {
                let (pos_below, neg_below) = prefixes[s.feature][k];
                pos_below + (neg_total - neg_below)
            })
            .collect()
    }
}

fn check_distribution(d: &[f64], n: usize) -> Result<()> {
    if d.len() != n {
        return Err(Error::Precondition(format!("distribution has {} entries for {n} examples", d.len())));
    }
    if d.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::Precondition("distribution entries must be nonnegative".into()));
    }
    let total: f64 = d.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("distribution sums to {total}, not 1")));
    }
    Ok(())
}

/// `Σ_n d_n 1{h(x_n) ≠ y_n}` for a distribution `d` over the examples.
pub fn weighted_error(h: &Stump, data: &Dataset, d: &[f64]) -> Result<f64> {
    check_distribution(d, data.n())?;
    if h.feature >= data.d() {
        return Err(Error::Index { index: h.feature, len: data.d() });
    }
    Ok((0..data.n())
        .filter(|&i| h.predict(data.row(i)) != data.labels()[i])
        .map(|i| d[i])
        .sum())
}

/// `Σ_t α_t h_t(x_n)` read from the prediction table.
pub fn ensemble_margin(stages: &[(f64, usize)], space: &StumpSpace, n: usize) -> Result<f64> {
    if n >= space.n() {
        return Err(Error::Index { index: n, len: space.n() });
    }
    let mut total = 0.0;
    for &(alpha, m) in stages {
        if m >= space.len() {
            return Err(Error::Index { index: m, len: space.len() });
        }
        total += alpha * f64::from(space.row(m)[n]);
    }
    Ok(total)
}

/// Weighted stump ensemble usable on data it was not trained on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ensemble {
    pub stages: Vec<(f64, Stump)>,
}

impl Ensemble {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.stages.iter().map(|(a, s)| a * f64::from(s.predict(x))).sum()
    }

    pub fn predict(&self, x: &[f64]) -> i8 {
        if self.margin(x) >= 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn error(&self, data: &Dataset) -> f64 {
        let wrong = (0..data.n())
            .filter(|&i| self.predict(data.row(i)) != data.labels()[i])
            .count();
        wrong as f64 / data.n() as f64
    }

    /// Error of the first `t` stages for `t = 1..=len`.
    pub fn error_trace(&self, data: &Dataset) -> Vec<f64> {
        let mut margins = vec![0.0; data.n()];
        self.stages
            .iter()
            .map(|(a, s)| {
                let mut wrong = 0usize;
                for (i, h) in margins.iter_mut().enumerate() {
                    *h += a * f64::from(s.predict(data.row(i)));
                    let pred = if *h >= 0.0 { 1 } else { -1 };
                    if pred != data.labels()[i] {
                        wrong += 1;
                    }
                }
                wrong as f64 / data.n() as f64
            })
            .collect()
    }
}
