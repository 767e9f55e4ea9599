//! Dense complex matrices stored as separate real and imaginary parts, so
//! every product runs through the real GEMM kernel.

use nalgebra::{DMatrix, DVector, DVectorView};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl ComplexMatrix {
    pub fn new(re: DMatrix<f64>, im: DMatrix<f64>) -> Self {
        assert_eq!(re.shape(), im.shape());
        Self { re, im }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut re = DMatrix::zeros(rows, cols);
        let mut im = DMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                let z = f(i, j);
                re[(i, j)] = z.re;
                im[(i, j)] = z.im;
            }
        }
        Self { re, im }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            re: DMatrix::identity(n, n),
            im: DMatrix::zeros(n, n),
        }
    }

    pub fn nrows(&self) -> usize {
        self.re.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.re.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.re.shape()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[(i, j)], self.im[(i, j)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            re: self.re.transpose(),
            im: -self.im.transpose(),
        }
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        Self { re, im }
    }

    pub fn mul_real(&self, rhs: &DMatrix<f64>) -> ComplexMatrix {
        Self {
            re: &self.re * rhs,
            im: &self.im * rhs,
        }
    }

    /// Scales row `i` by `d[i]`.
    pub fn scale_rows(&self, d: &[f64]) -> ComplexMatrix {
        assert_eq!(d.len(), self.nrows());
        let mut out = self.clone();
        for (i, &s) in d.iter().enumerate() {
            out.re.row_mut(i).scale_mut(s);
            out.im.row_mut(i).scale_mut(s);
        }
        out
    }

    /// Scales column `j` by `d[j]`.
    pub fn scale_columns(&self, d: &[f64]) -> ComplexMatrix {
        assert_eq!(d.len(), self.ncols());
        let mut out = self.clone();
        for (j, &s) in d.iter().enumerate() {
            out.re.column_mut(j).scale_mut(s);
            out.im.column_mut(j).scale_mut(s);
        }
        out
    }

    pub fn mul_real_vec(&self, x: &[f64]) -> Vec<Complex64> {
        let v = DVectorView::from_slice(x, x.len());
        let re = &self.re * v;
        let im = &self.im * v;
        re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let xr = DVector::from_iterator(x.len(), x.iter().map(|z| z.re));
        let xi = DVector::from_iterator(x.len(), x.iter().map(|z| z.im));
        let re = &self.re * &xr - &self.im * &xi;
        let im = &self.re * &xi + &self.im * &xr;
        re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.re.norm_squared() + self.im.norm_squared()).sqrt()
    }

    /// `‖self - other‖_F`.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        ((&self.re - &other.re).norm_squared() + (&self.im - &other.im).norm_squared()).sqrt()
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.nrows(), self.ncols(), |i, j| self.get(i, j))
    }
}
