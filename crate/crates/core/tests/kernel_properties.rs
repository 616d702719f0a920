mod common;

use common::{interior_composition, random_dmat, random_force, random_margules};
use msdiff_core::mskernel::diffusion_operator_spectrum;
use msdiff_core::thermo::{chemical_potentials, convexity_check, gamma_matrix};
use msdiff_core::{
    assemble_b, solve_fluxes_bordered, solve_fluxes_invariant, solve_fluxes_reduced, spectrum, DrivingForce,
    MixtureSpec, ThermoModel,
};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `A` straight from the force balance, no flooring.
fn ms_matrix(x: &DVector<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -(0..n).filter(|&k| k != i).map(|k| x[k] / d[(i, k)]).sum::<f64>()
        } else {
            x[i] / d[(i, j)]
        }
    })
}

fn delta(d: &DMatrix<f64>) -> f64 {
    let n = d.nrows();
    let mut m = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m = m.min(1.0 / d[(i, j)]);
            }
        }
    }
    m
}

#[test]
fn nonsymmetric_spectrum_is_real_with_gap() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..300 {
        let n = rng.random_range(2..=6);
        let comp = interior_composition(&mut rng, n, 1e-3, 1.0);
        let d = random_dmat(&mut rng, n, 0.1, 10.0);
        let a = ms_matrix(comp.x(), &d);
        let ev = a.clone().schur().complex_eigenvalues();
        let scale = a.norm();
        let mut re: Vec<f64> = ev.iter().map(|z| {
            assert!(z.im.abs() <= 1e-8 * scale, "complex eigenvalue {z}");
            z.re
        }).collect();
        re.sort_by(|p, q| q.partial_cmp(p).unwrap());
        let del = delta(&d);
        assert!(re[0].abs() <= 1e-10 * scale);
        for &l in &re[1..] {
            assert!(l <= -del * (1.0 - 1e-8), "{l} vs -{del}");
        }

        let report = spectrum(&comp, &d).unwrap();
        assert!(report.gap_ok);
        for (p, q) in report.eigenvalues.iter().zip(&re) {
            assert!((p - q).abs() <= 1e-8 * scale);
        }
    }
}

#[test]
fn flux_routes_agree_and_satisfy_force_balance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..300 {
        let n = rng.random_range(2..=6);
        let c_tot = rng.random_range(0.5..5.0);
        let comp = interior_composition(&mut rng, n, 1e-3, c_tot);
        let d = random_dmat(&mut rng, n, 0.1, 10.0);
        let f = random_force(&mut rng, n);
        let j1 = solve_fluxes_invariant(&comp, &d, &f).unwrap();
        let j2 = solve_fluxes_reduced(&comp, &d, &f).unwrap();
        let j3 = solve_fluxes_bordered(&comp, &d, &f, None).unwrap();
        let norm = j1.as_vector().norm();
        assert!((j1.as_vector() - j2.as_vector()).norm() <= 1e-10 * norm);
        assert!((j1.as_vector() - j3.as_vector()).norm() <= 1e-10 * norm);
        let res = ms_matrix(comp.x(), &d) * j1.as_vector() - f.as_vector() * c_tot;
        assert!(res.norm() <= 1e-10 * c_tot * f.as_vector().norm().max(1e-300));
        assert!(j1.as_vector().sum().abs() <= 1e-12 * norm);
    }
}

#[test]
fn reduced_matrix_spectrum_mirrors_a() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n = rng.random_range(2..=6);
        let comp = interior_composition(&mut rng, n, 1e-3, 1.0);
        let d = random_dmat(&mut rng, n, 0.1, 10.0);
        let b = assemble_b(&comp, &d).unwrap();
        let mut eb: Vec<f64> = b.0.clone().schur().complex_eigenvalues().iter().map(|z| z.re).collect();
        eb.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let mut ea: Vec<f64> = spectrum(&comp, &d).unwrap().eigenvalues[1..].iter().map(|l| -l).collect();
        ea.sort_by(|p, q| p.partial_cmp(q).unwrap());
        for (p, q) in eb.iter().zip(&ea) {
            assert!((p - q).abs() <= 1e-9 * q.abs());
        }
    }
}

#[test]
fn onsager_reciprocity_and_local_entropy_production() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..300 {
        let n = rng.random_range(2..=6);
        let comp = interior_composition(&mut rng, n, 1e-3, 2.0);
        let d = random_dmat(&mut rng, n, 0.1, 10.0);
        let x = comp.x().clone();
        // chemical-potential gradients compatible with Gibbs-Duhem: Σ x_i g_i = 0
        let mut draw = || {
            let g = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let shift = x.dot(&g);
            g.map(|v| v - shift)
        };
        let (u, v) = (draw(), draw());
        let flux = |g: &DVector<f64>| {
            let force = DrivingForce::new(x.component_mul(g)).unwrap();
            solve_fluxes_invariant(&comp, &d, &force).unwrap().into_vector()
        };
        let (ju, jv) = (flux(&u), flux(&v));
        let lhs = v.dot(&ju);
        let rhs = u.dot(&jv);
        assert!((lhs - rhs).abs() <= 1e-10 * (lhs.abs() + rhs.abs() + 1e-300));
        assert!(-ju.dot(&u) >= -1e-12 * ju.norm() * u.norm());
    }
}

#[test]
fn dissipation_at_a_point_is_nonnegative_for_margules() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.random_range(2..=5);
        let comp = interior_composition(&mut rng, n, 0.05, 1.0);
        let d = random_dmat(&mut rng, n, 0.1, 10.0);
        let model = ThermoModel::margules(random_margules(&mut rng, n, 1.0));
        if convexity_check(&model, &comp) <= 0.0 {
            continue;
        }
        let grad_x = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let grad_x = &grad_x - DVector::from_element(n, grad_x.mean());
        let gamma = gamma_matrix(&model, &comp).unwrap();
        let force = DrivingForce::projected(gamma.matrix() * &grad_x);
        let j = solve_fluxes_invariant(&comp, &d, &force).unwrap().into_vector();
        // ∇μ by finite differences along the gradient direction
        let eps = 1e-6;
        let xp = comp.x() + &grad_x * eps;
        let xm = comp.x() - &grad_x * eps;
        let grad_mu = (chemical_potentials(&model, &xp).unwrap() - chemical_potentials(&model, &xm).unwrap()) / (2.0 * eps);
        let w = -j.dot(&grad_mu);
        assert!(w >= -1e-6 * j.norm() * grad_mu.norm(), "w = {w}");
    }
}

#[test]
fn diffusion_spectrum_matches_pseudo_inverse_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..300 {
        let n = rng.random_range(2..=5);
        let comp = interior_composition(&mut rng, n, 1e-2, 1.0);
        let d = random_dmat(&mut rng, n, 0.1, 10.0);
        let model = if trial % 2 == 0 {
            ThermoModel::Ideal
        } else {
            ThermoModel::margules(random_margules(&mut rng, n, 1.0))
        };
        let spec = MixtureSpec::unnamed(d.clone(), model.clone()).unwrap();
        let got = match diffusion_operator_spectrum(&comp, &spec) {
            Ok(ev) => ev,
            Err(_) => continue,
        };

        let x = comp.x();
        let sq = x.map(f64::sqrt);
        let a_s = DMatrix::from_fn(n, n, |i, j| ms_matrix(x, &d)[(i, j)] * sq[j] / sq[i]);
        let eig = SymmetricEigen::new(0.5 * (&a_s + a_s.transpose()));
        let mut pinv = DMatrix::zeros(n, n);
        for k in 0..n {
            let l = eig.eigenvalues[k];
            if l.abs() > 1e-9 * a_s.norm() {
                let v = eig.eigenvectors.column(k);
                pinv += v * v.transpose() / l;
            }
        }
        let gamma = gamma_matrix(&model, &comp).unwrap();
        let big = -DMatrix::from_fn(n, n, |i, j| sq[i] * pinv[(i, j)] / sq[j]) * gamma.matrix();
        let mut oracle: Vec<f64> = big.schur().complex_eigenvalues().iter().map(|z| z.re).collect();
        // the full matrix has range E, so one eigenvalue is the spurious zero
        oracle.sort_by(|p, q| p.abs().partial_cmp(&q.abs()).unwrap());
        oracle.remove(0);
        oracle.sort_by(|p, q| q.partial_cmp(p).unwrap());
        let mut ours: Vec<f64> = got.iter().map(|z| z.re).collect();
        ours.sort_by(|p, q| q.partial_cmp(p).unwrap());
        for (p, q) in ours.iter().zip(&oracle) {
            assert!((p - q).abs() <= 1e-8 * q.abs().max(1.0), "{ours:?} vs {oracle:?}");
        }
        assert!(ours.iter().all(|&l| l >= 1e-12));
    }
}
