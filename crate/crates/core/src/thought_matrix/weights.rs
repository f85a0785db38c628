//! Communication-weight matrices.
//!
//! Communication happens on the m−1 row transitions of every one of the n
//! columns, so schemes generate an effective (m−1)×n grid. The reported
//! matrix, the first n−1 columns of the effective grid, is the (m−1)×(n−1)
//! shape that run traces serialize.

use super::MotError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Named weight-generation scheme. `base` is the value at (1, 1); `step` is
/// the per-row/per-column increment for the increasing schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    pub kind: SchemeKind,
    pub base: f64,
    pub step: f64,
    /// Used by the random schemes only.
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// i.i.d. uniform samples in [0, 1].
    Uniform,
    /// Standard-normal samples, min-max normalized per matrix to [0, 1].
    Gaussian,
    /// Every entry equals `base`.
    Constant,
    /// `base + step * (row - 1)`, increasing down the rows.
    Vert,
    /// `base + step * (col - 1)`, increasing across the columns.
    Hor,
    /// `base + step * (row - 1) + step * (col - 1)`.
    VertHor,
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SchemeKind::Uniform => "uniform",
            SchemeKind::Gaussian => "gaussian",
            SchemeKind::Constant => "constant",
            SchemeKind::Vert => "vert",
            SchemeKind::Hor => "hor",
            SchemeKind::VertHor => "vert_hor",
        };
        f.write_str(name)
    }
}

impl WeightScheme {
    pub fn constant(value: f64) -> Self {
        Self {
            kind: SchemeKind::Constant,
            base: value,
            step: 0.0,
            seed: 0,
        }
    }

    /// Vertically increasing scheme; the base equals the step, so Vert-0.1
    /// starts at 0.1.
    pub fn vert(step: f64) -> Self {
        Self {
            kind: SchemeKind::Vert,
            base: step,
            step,
            seed: 0,
        }
    }

    pub fn hor(step: f64) -> Self {
        Self {
            kind: SchemeKind::Hor,
            base: step,
            step,
            seed: 0,
        }
    }

    pub fn vert_hor(step: f64) -> Self {
        Self {
            kind: SchemeKind::VertHor,
            base: step,
            step,
            seed: 0,
        }
    }

    pub fn uniform(seed: u64) -> Self {
        Self {
            kind: SchemeKind::Uniform,
            base: 0.0,
            step: 0.0,
            seed,
        }
    }

    pub fn gaussian(seed: u64) -> Self {
        Self {
            kind: SchemeKind::Gaussian,
            base: 0.0,
            step: 0.0,
            seed,
        }
    }

    pub fn with_base(mut self, base: f64) -> Self {
        self.base = base;
        self
    }

    pub fn validate(&self) -> Result<(), MotError> {
        for (name, value) in [("base", self.base), ("step", self.step)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(MotError::Config(format!(
                    "scheme {name} {value} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

impl Default for WeightScheme {
    /// Vert&Hor with step 0.1, the configuration that performed best.
    fn default() -> Self {
        Self::vert_hor(0.1)
    }
}

/// Generated communication weights for an m×n matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    /// (m−1)×n grid actually applied during generation; row index i is the
    /// transition into row i+1, column index j is the matrix column.
    pub effective: Vec<Vec<f64>>,
    rows: usize,
    cols: usize,
}

impl WeightMatrix {
    /// The (m−1)×(n−1) view that gets reported and serialized.
    pub fn reported(&self) -> Vec<Vec<f64>> {
        self.effective
            .iter()
            .map(|row| row[..self.cols.saturating_sub(1)].to_vec())
            .collect()
    }

    /// Weight applied when generating the node at (`row`, `col`), i.e. the
    /// transition from row−1 to row. Rows and columns are 1-based.
    pub fn alpha(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row >= 2 && col >= 1);
        self.effective[row - 2][col - 1]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.effective.is_empty()
    }
}

/// Generate the weight matrix for an m×n thought matrix.
///
/// With m = 1 there are no row transitions and the matrix is empty.
pub fn build_weight_matrix(scheme: &WeightScheme, m: usize, n: usize) -> Result<WeightMatrix, MotError> {
    if m == 0 || n == 0 {
        return Err(MotError::Config(format!("invalid matrix shape {m}x{n}")));
    }
    scheme.validate()?;
    let rows = m - 1;
    let cols = n;
    let mut effective = vec![vec![0.0f64; cols]; rows];

    match scheme.kind {
        SchemeKind::Constant | SchemeKind::Vert | SchemeKind::Hor | SchemeKind::VertHor => {
            for i in 1..=rows {
                for j in 1..=cols {
                    let value = match scheme.kind {
                        SchemeKind::Constant => scheme.base,
                        SchemeKind::Vert => scheme.base + scheme.step * (i as f64 - 1.0),
                        SchemeKind::Hor => scheme.base + scheme.step * (j as f64 - 1.0),
                        SchemeKind::VertHor => {
                            scheme.base + scheme.step * (i as f64 - 1.0) + scheme.step * (j as f64 - 1.0)
                        }
                        _ => unreachable!(),
                    };
                    effective[i - 1][j - 1] = value.clamp(0.0, 1.0);
                }
            }
        }
        SchemeKind::Uniform => {
            let mut rng = ChaCha12Rng::seed_from_u64(scheme.seed);
            for row in effective.iter_mut() {
                for cell in row.iter_mut() {
                    *cell = rng.gen_range(0.0..=1.0);
                }
            }
        }
        SchemeKind::Gaussian => {
            let mut rng = ChaCha12Rng::seed_from_u64(scheme.seed);
            let mut samples = vec![vec![0.0f64; cols]; rows];
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for row in samples.iter_mut() {
                for cell in row.iter_mut() {
                    *cell = StandardNormal.sample(&mut rng);
                    min = min.min(*cell);
                    max = max.max(*cell);
                }
            }
            let span = max - min;
            for (i, row) in samples.iter().enumerate() {
                for (j, sample) in row.iter().enumerate() {
                    // A degenerate (constant) sample maps to 0.5 everywhere.
                    effective[i][j] = if span > 0.0 { (sample - min) / span } else { 0.5 };
                }
            }
        }
    }

    Ok(WeightMatrix {
        effective,
        rows,
        cols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn assert_grid_eq(got: &[Vec<f64>], expected: &[Vec<f64>]) {
        assert_eq!(got.len(), expected.len());
        for (gr, er) in got.iter().zip(expected) {
            assert_eq!(gr.len(), er.len());
            for (g, e) in gr.iter().zip(er) {
                assert!((g - e).abs() <= TOL, "got {g}, expected {e}");
            }
        }
    }

    #[test]
    fn reported_shape_is_m_minus_one_by_n_minus_one() {
        let w = build_weight_matrix(&WeightScheme::default(), 3, 4).unwrap();
        let reported = w.reported();
        assert_eq!(reported.len(), 2);
        assert!(reported.iter().all(|row| row.len() == 3));
        assert_eq!(w.effective.len(), 2);
        assert!(w.effective.iter().all(|row| row.len() == 4));
    }

    #[test]
    fn constant_scheme_fills_every_entry() {
        let w = build_weight_matrix(&WeightScheme::constant(0.2), 3, 4).unwrap();
        for row in w.reported() {
            for value in row {
                assert!((value - 0.2).abs() <= TOL);
            }
        }
    }

    #[test]
    fn vert_hor_point_one_matches_the_hand_derived_grid() {
        // base 0.1, step 0.1: entry(i, j) = 0.1 + 0.1 (i-1) + 0.1 (j-1).
        let w = build_weight_matrix(&WeightScheme::vert_hor(0.1), 3, 4).unwrap();
        assert_grid_eq(
            &w.reported(),
            &[vec![0.1, 0.2, 0.3], vec![0.2, 0.3, 0.4]],
        );
    }

    #[test]
    fn vert_increases_down_rows_only() {
        let w = build_weight_matrix(&WeightScheme::vert(0.2), 4, 3).unwrap();
        assert_grid_eq(
            &w.reported(),
            &[vec![0.2, 0.2], vec![0.4, 0.4], vec![0.6, 0.6]],
        );
    }

    #[test]
    fn hor_increases_across_columns_only() {
        let w = build_weight_matrix(&WeightScheme::hor(0.2), 3, 4).unwrap();
        assert_grid_eq(
            &w.reported(),
            &[vec![0.2, 0.4, 0.6], vec![0.2, 0.4, 0.6]],
        );
    }

    #[test]
    fn large_steps_clamp_to_one() {
        let w = build_weight_matrix(&WeightScheme::vert_hor(0.9), 4, 4).unwrap();
        for row in &w.effective {
            for value in row {
                assert!(*value <= 1.0);
            }
        }
        // Bottom-right of the effective grid would be 0.9 + 2*0.9 + 2.7.
        assert_eq!(w.effective[2][3], 1.0);
    }

    #[test]
    fn single_row_matrix_is_empty_and_unused() {
        let w = build_weight_matrix(&WeightScheme::default(), 1, 4).unwrap();
        assert!(w.is_empty());
        assert!(w.reported().is_empty());
    }

    #[test]
    fn zero_shape_is_a_config_error() {
        assert!(build_weight_matrix(&WeightScheme::default(), 0, 4).is_err());
        assert!(build_weight_matrix(&WeightScheme::default(), 3, 0).is_err());
    }

    #[test]
    fn random_schemes_are_seed_deterministic() {
        for scheme in [WeightScheme::uniform(7), WeightScheme::gaussian(7)] {
            let a = build_weight_matrix(&scheme, 4, 5).unwrap();
            let b = build_weight_matrix(&scheme, 4, 5).unwrap();
            assert_eq!(a, b);
        }
        assert_ne!(
            build_weight_matrix(&WeightScheme::uniform(1), 4, 5).unwrap(),
            build_weight_matrix(&WeightScheme::uniform(2), 4, 5).unwrap()
        );
    }

    #[test]
    fn gaussian_normalization_spans_zero_to_one() {
        let w = build_weight_matrix(&WeightScheme::gaussian(3), 4, 5).unwrap();
        let flat: Vec<f64> = w.effective.iter().flatten().copied().collect();
        let min = flat.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = flat.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((min - 0.0).abs() <= TOL);
        assert!((max - 1.0).abs() <= TOL);
    }

    #[test]
    fn alpha_lookup_matches_the_effective_grid() {
        let w = build_weight_matrix(&WeightScheme::vert_hor(0.1), 3, 4).unwrap();
        // Transition into row 2 of column 4 reads effective row 1, col 4.
        assert!((w.alpha(2, 4) - 0.4).abs() <= TOL);
        assert!((w.alpha(3, 1) - 0.2).abs() <= TOL);
    }

    proptest! {
        #[test]
        fn every_scheme_stays_inside_the_unit_interval(
            kind_pick in 0usize..6,
            base in 0.0f64..=1.0,
            step in 0.0f64..=1.0,
            seed in any::<u64>(),
            m in 1usize..6,
            n in 1usize..6,
        ) {
            let scheme = WeightScheme {
                kind: match kind_pick {
                    0 => SchemeKind::Uniform,
                    1 => SchemeKind::Gaussian,
                    2 => SchemeKind::Constant,
                    3 => SchemeKind::Vert,
                    4 => SchemeKind::Hor,
                    _ => SchemeKind::VertHor,
                },
                base,
                step,
                seed,
            };
            let w = build_weight_matrix(&scheme, m, n).unwrap();
            for row in &w.effective {
                for value in row {
                    prop_assert!((0.0..=1.0).contains(value));
                }
            }
        }
    }
}
