mod common;

use common::random_dmat;
use msdiff_core::solver::{simulate, Field, Grid1D, Reaction, ReactionNetwork, SimConfig};
use msdiff_core::verify::{entropy_ledger, filtration_oracle};
use msdiff_core::{Error, MixtureSpec, ThermoModel};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn binary(d: f64, model: ThermoModel) -> MixtureSpec {
    MixtureSpec::unnamed(DMatrix::from_row_slice(2, 2, &[0.0, d, d, 0.0]), model).unwrap()
}

fn cosine_binary(ncells: usize, c_tot: f64) -> Field {
    let grid = Grid1D::new(ncells, 1.0).unwrap();
    Field::from_mole_fractions(grid, 2, c_tot, |y| {
        let x1 = 0.5 + 0.3 * (PI * y).cos() + 0.1 * (2.0 * PI * y).cos();
        vec![x1, 1.0 - x1]
    })
    .unwrap()
}

fn coarsen(fine: &[f64], factor: usize) -> Vec<f64> {
    fine.chunks(factor).map(|c| c.iter().sum::<f64>() / factor as f64).collect()
}

fn oracle_error(ncells: usize, model: &ThermoModel, reference: &[f64], ref_cells: usize, t_end: f64) -> f64 {
    let spec = binary(1.0, model.clone());
    let cfg = SimConfig { t_end, checkpoint_every: usize::MAX, ..SimConfig::default() };
    let traj = simulate(&cosine_binary(ncells, 1.0), &spec, &ReactionNetwork::empty(2), &cfg).unwrap();
    let ms = traj.last().field.species_profile(0);
    let r = coarsen(reference, ref_cells / ncells);
    ms.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn margules_binary_converges_to_filtration_solution() {
    let model = ThermoModel::binary_margules(0.8);
    let t_end = 0.02;
    let ref_cells = 320;
    let fine = cosine_binary(ref_cells, 1.0);
    let reference =
        filtration_oracle(&fine.species_profile(0), &model, 1.0, 1.0, *fine.grid(), t_end, 0.4).unwrap();
    let e1 = oracle_error(20, &model, &reference, ref_cells, t_end);
    let e2 = oracle_error(40, &model, &reference, ref_cells, t_end);
    assert!(e2 < 2e-3, "{e2}");
    assert!(e1 / e2 >= 1.8, "ratio {}", e1 / e2);
}

#[test]
fn same_grid_ideal_runs_agree() {
    let t_end = 0.02;
    let field = cosine_binary(50, 2.0);
    let spec = binary(1.0, ThermoModel::Ideal);
    let cfg = SimConfig { t_end, checkpoint_every: usize::MAX, ..SimConfig::default() };
    let ms = simulate(&field, &spec, &ReactionNetwork::empty(2), &cfg).unwrap().last().field.species_profile(0);
    let oracle = filtration_oracle(&field.species_profile(0), &ThermoModel::Ideal, 1.0, 2.0, *field.grid(), t_end, 0.4)
        .unwrap();
    for (a, b) in ms.iter().zip(&oracle) {
        assert!((a - b).abs() <= 1e-10);
    }
}

#[test]
fn lyapunov_slack_shrinks_with_dt() {
    let spec = MixtureSpec::unnamed(
        DMatrix::from_row_slice(3, 3, &[0.0, 83.3, 68.0, 83.3, 0.0, 16.8, 68.0, 16.8, 0.0]),
        ThermoModel::Ideal,
    )
    .unwrap();
    let field = Field::from_mole_fractions(Grid1D::new(30, 1.0).unwrap(), 3, 1.0, |y| {
        let s = 0.25 * (PI * y).cos();
        vec![0.4 + s, 0.3, 0.3 - s]
    })
    .unwrap();
    let slack = |safety: f64| {
        let cfg = SimConfig { t_end: 2e-3, cfl_safety: safety, checkpoint_every: 50, ..SimConfig::default() };
        let traj = simulate(&field, &spec, &ReactionNetwork::empty(3), &cfg).unwrap();
        let ledger = entropy_ledger(&traj, &spec).unwrap();
        assert!(ledger.is_ok(), "{:?}", ledger.violation);
        ledger.max_slack()
    };
    let (coarse, fine) = (slack(0.4), slack(0.1));
    assert!(fine < coarse, "{fine} vs {coarse}");
}

#[test]
fn random_reactive_runs_stay_nonnegative_and_isobaric() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..6 {
        let n = rng.random_range(2..=4);
        let spec = MixtureSpec::unnamed(random_dmat(&mut rng, n, 0.5, 5.0), ThermoModel::Ideal).unwrap();
        let a = rng.random_range(0..n);
        let b = (a + 1 + rng.random_range(0..n - 1)) % n;
        let net = ReactionNetwork::new(
            n,
            vec![
                Reaction::new(vec![(a, 1)], vec![(b, 1)], rng.random_range(0.1..5.0)),
                Reaction::new(vec![(b, 1)], vec![(a, 1)], rng.random_range(0.1..5.0)),
            ],
        )
        .unwrap();
        let phases: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..PI)).collect();
        let field = Field::from_mole_fractions(Grid1D::new(24, 1.0).unwrap(), n, 1.0, |y| {
            phases.iter().map(|p| 1.0 + 0.8 * (PI * y + p).cos()).collect()
        })
        .unwrap();
        let cfg = SimConfig { t_end: 0.05, checkpoint_every: 20, ..SimConfig::default() };
        let traj = simulate(&field, &spec, &net, &cfg).unwrap();
        for cp in &traj.checkpoints {
            assert!(cp.min_concentration >= 0.0);
            assert!(cp.field.max_concentration() <= 1.0 + 1e-12);
            let (lo, hi) = cp.field.total_range();
            assert!((hi - lo) / hi <= 1e-8);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let spec = binary(1.0, ThermoModel::binary_margules(0.5));
    let cfg = SimConfig { t_end: 0.01, checkpoint_every: 7, ..SimConfig::default() };
    let a = simulate(&cosine_binary(100, 1.0), &spec, &ReactionNetwork::empty(2), &cfg).unwrap();
    let b = simulate(&cosine_binary(100, 1.0), &spec, &ReactionNetwork::empty(2), &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn non_convex_state_is_refused() {
    let spec = binary(1.0, ThermoModel::binary_margules(4.0));
    let cfg = SimConfig { t_end: 0.01, ..SimConfig::default() };
    let err = simulate(&cosine_binary(20, 1.0), &spec, &ReactionNetwork::empty(2), &cfg).unwrap_err();
    assert!(matches!(err, Error::NotConvex { .. }));
}
