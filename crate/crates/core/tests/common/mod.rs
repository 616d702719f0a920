#![allow(dead_code)]

use msdiff_core::{Composition, DrivingForce};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Point on the simplex with every component at least `min`.
pub fn interior_composition<R: Rng>(rng: &mut R, n: usize, min: f64, c_tot: f64) -> Composition {
    // uniform on the simplex, then shrunk towards the centroid
    let e: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = e.iter().sum();
    let scale = 1.0 - n as f64 * min;
    let x = DVector::from_iterator(n, e.iter().map(|v| min + scale * v / s));
    Composition::normalized(x, c_tot).unwrap()
}

pub fn random_dmat<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(lo..hi);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

pub fn random_force<R: Rng>(rng: &mut R, n: usize) -> DrivingForce {
    DrivingForce::projected(DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)))
}

/// Symmetric Margules matrix with zero diagonal and entries in `[-amax, amax]`.
pub fn random_margules<R: Rng>(rng: &mut R, n: usize, amax: f64) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(-amax..amax);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}
