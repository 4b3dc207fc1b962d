use crate::error::{Error, Result};

/// A regular grid on a box in one or two dimensions, endpoints included.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: Vec<usize>,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != points.len() || lower.is_empty() {
            return Err(Error::Argument("grid bounds and sizes must have one entry per axis".into()));
        }
        for k in 0..lower.len() {
            if !(upper[k] > lower[k]) || points[k] < 2 {
                return Err(Error::Argument(format!("degenerate grid axis {k}")));
            }
        }
        Ok(Self { lower, upper, points })
    }

    /// Uniform 1D grid with spacing as close to `step` as the endpoints allow.
    pub fn line(lower: f64, upper: f64, step: f64) -> Result<Self> {
        let n = ((upper - lower) / step).round() as usize + 1;
        Self::new(vec![lower], vec![upper], vec![n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn spacing(&self, k: usize) -> f64 {
        (self.upper[k] - self.lower[k]) / (self.points[k] - 1) as f64
    }

    fn coord(&self, k: usize, i: usize) -> f64 {
        if i + 1 == self.points[k] {
            self.upper[k]
        } else {
            self.lower[k] + i as f64 * self.spacing(k)
        }
    }

    /// Trapezoid weight along axis `k`.
    fn weight(&self, k: usize, i: usize) -> f64 {
        let h = self.spacing(k);
        if i == 0 || i + 1 == self.points[k] {
            0.5 * h
        } else {
            h
        }
    }
}

/// Sup-norm and L1 discrepancy between two densities over a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridDistance {
    pub sup_abs: f64,
    pub l1: f64,
}

/// `sup |a - b|` over the grid nodes and the trapezoid-rule `∫ |a - b|` over the box.
pub fn grid_distance<A, B>(a: A, b: B, grid: &GridSpec) -> Result<GridDistance>
where
    A: Fn(&[f64]) -> f64,
    B: Fn(&[f64]) -> f64,
{
    let mut sup_abs = 0.0f64;
    let mut l1 = 0.0;
    match grid.dim() {
        1 => {
            for i in 0..grid.points[0] {
                let x = [grid.coord(0, i)];
                let diff = (a(&x) - b(&x)).abs();
                sup_abs = sup_abs.max(diff);
                l1 += grid.weight(0, i) * diff;
            }
        }
        2 => {
            for i in 0..grid.points[0] {
                for j in 0..grid.points[1] {
                    let x = [grid.coord(0, i), grid.coord(1, j)];
                    let diff = (a(&x) - b(&x)).abs();
                    sup_abs = sup_abs.max(diff);
                    l1 += grid.weight(0, i) * grid.weight(1, j) * diff;
                }
            }
        }
        d => {
            return Err(Error::Unsupported(format!(
                "grid distances are limited to d <= 2, got {d}"
            )))
        }
    }
    Ok(GridDistance { sup_abs, l1 })
}
