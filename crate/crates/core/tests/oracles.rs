mod common;

use common::{random_matrix, random_vector, rng, Slab};
use dlra_trt::dlra::{augment_and_project, k_step, l_step, s_step};
use dlra_trt::truncation::TruncationConfig;
use dlra_trt::{dlra_step, full_step, naive_step, FullState, LowRankState, StepParams, TruncationStrategy};
use nalgebra::{DMatrix, DVector};

fn params(sigma: f64, dt: f64, q: Option<&DVector<f64>>, strategy: TruncationStrategy) -> StepParams<'_> {
    StepParams {
        sigma,
        dt,
        source: q,
        truncation: TruncationConfig::relative(0.0, 1, 64),
        strategy,
        allow_large_dt: false,
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

#[test]
fn full_step_matches_monolithic_solve() {
    let slab = Slab::new(8, 4, -1.0, 1.0);
    let mut r = rng(1);
    let u0 = random_matrix(&mut r, 8, 4);
    let b0 = random_vector(&mut r, 8).add_scalar(2.0);
    let (u_ref, b_ref) = slab.full_step_oracle(&u0, &b0, 1.0, 0.01, None);
    let s = full_step(&FullState::new(u0, b0).unwrap(), &slab.transport, 1.0, 0.01, None).unwrap();
    assert!(max_abs(&(s.u - u_ref)) < 1e-12);
    assert!((s.b - b_ref).amax() < 1e-12);
}

#[test]
fn full_step_without_opacity_is_explicit_transport() {
    let slab = Slab::new(12, 5, 0.0, 3.0);
    let mut r = rng(2);
    let u0 = random_matrix(&mut r, 12, 5);
    let b0 = random_vector(&mut r, 12);
    let dt = 0.2;
    let explicit = &u0 + common::unvec(&(slab.transport_operator() * common::vec_of(&u0)), 12, 5) * dt;
    let s = full_step(&FullState::new(u0, b0.clone()).unwrap(), &slab.transport, 0.0, dt, None).unwrap();
    assert!(max_abs(&(s.u - explicit)) < 1e-14);
    assert_eq!(s.b, b0);
}

#[test]
fn full_step_with_source() {
    let slab = Slab::new(10, 3, -1.0, 1.0);
    let mut r = rng(3);
    let u0 = random_matrix(&mut r, 10, 3);
    let b0 = random_vector(&mut r, 10);
    let q = random_vector(&mut r, 10);
    let (u_ref, b_ref) = slab.full_step_oracle(&u0, &b0, 0.7, 0.1, Some(&q));
    let s = full_step(&FullState::new(u0, b0).unwrap(), &slab.transport, 0.7, 0.1, Some(&q)).unwrap();
    assert!(max_abs(&(s.u - u_ref)) < 1e-12);
    assert!((s.b - b_ref).amax() < 1e-12);
}

#[test]
fn k_and_l_steps_match_dense_projection() {
    let slab = Slab::new(16, 8, -1.0, 1.0);
    let mut r = rng(4);
    let state = LowRankState::from_dense(&random_matrix(&mut r, 16, 8), 3).unwrap();
    let dt = 0.05;
    let u0 = state.to_dense();
    let f = common::unvec(&(slab.transport_operator() * common::vec_of(&u0)), 16, 8);
    let k_ref = &state.x * &state.s + &f * &state.v * dt;
    let l_ref = &state.v * state.s.transpose() + f.transpose() * &state.x * dt;
    assert!(max_abs(&(k_step(&state, &slab.transport, dt).unwrap() - k_ref)) < 1e-12);
    assert!(max_abs(&(l_step(&state, &slab.transport, dt).unwrap() - l_ref)) < 1e-12);
}

#[test]
fn s_step_matches_dense_galerkin() {
    let slab = Slab::new(16, 8, -1.0, 1.0);
    let mut r = rng(5);
    let state = LowRankState::from_dense(&random_matrix(&mut r, 16, 8), 2).unwrap();
    let dt = 0.05;
    let k = k_step(&state, &slab.transport, dt).unwrap();
    let l = l_step(&state, &slab.transport, dt).unwrap();
    let aug = augment_and_project(&k, &l, &state);
    assert!(max_abs(&(&aug.x * &aug.s * aug.v.transpose() - state.to_dense())) < 1e-12);
    let u_aug = &aug.x * &aug.s * aug.v.transpose();
    let f = common::unvec(&(slab.transport_operator() * common::vec_of(&u_aug)), 16, 8);
    let s_ref = &aug.s + aug.x.transpose() * f * &aug.v * dt;
    assert!(max_abs(&(s_step(&aug, &slab.transport, dt) - s_ref)) < 1e-12);
}

#[test]
fn stable_step_with_exact_subspaces_equals_full_step() {
    let slab = Slab::new(16, 8, -1.0, 1.0);
    let mut r = rng(6);
    let u0 = random_matrix(&mut r, 16, 8);
    let b0 = random_vector(&mut r, 16).add_scalar(1.5);
    let q = random_vector(&mut r, 16);
    let state = LowRankState::from_dense(&u0, 8).unwrap();
    for (sigma, source) in [(1.0, None), (0.3, Some(&q))] {
        let dt = 0.9 * slab.h;
        let (u_ref, b_ref) = slab.full_step_oracle(&state.to_dense(), &b0, sigma, dt, source);
        for strategy in [TruncationStrategy::Conservative, TruncationStrategy::Standard] {
            let (next, b1) = dlra_step(&state, &b0, &slab.transport, &params(sigma, dt, source, strategy)).unwrap();
            assert!(max_abs(&(next.to_dense() - &u_ref)) < 1e-11, "{strategy:?}");
            assert!((b1 - &b_ref).amax() < 1e-11);
        }
    }
}

#[test]
fn naive_step_with_exact_subspaces_matches_dense_assembly() {
    let slab = Slab::new(16, 8, -1.0, 1.0);
    let mut r = rng(7);
    let u0 = random_matrix(&mut r, 16, 8);
    let b0 = random_vector(&mut r, 16).add_scalar(1.5);
    let q = random_vector(&mut r, 16);
    let state = LowRankState::from_dense(&u0, 8).unwrap();
    let dt = 0.5 * slab.h;
    for (sigma, source) in [(1.0, None), (2.0, Some(&q)), (0.0, None)] {
        let (u_ref, b_ref) = slab.naive_step_oracle(&state.to_dense(), &b0, sigma, dt, source);
        let p = params(sigma, dt, source, TruncationStrategy::Standard);
        let (next, b1) = naive_step(&state, &b0, &slab.transport, &p).unwrap();
        assert!(max_abs(&(next.to_dense() - &u_ref)) < 1e-11);
        assert!((b1 - &b_ref).amax() < 1e-11);
    }
}

#[test]
fn schemes_coincide_without_opacity() {
    let slab = Slab::new(16, 6, -1.0, 1.0);
    let mut r = rng(8);
    // Full angular rank puts e₁ in span(V⁰), so the flux correction of the
    // stable scheme adds nothing the Galerkin step has not already captured.
    let state = LowRankState::from_dense(&random_matrix(&mut r, 16, 6), 6).unwrap();
    let b0 = random_vector(&mut r, 16);
    let p = params(0.0, 0.5 * slab.h, None, TruncationStrategy::Standard);
    let (stable, b_stable) = dlra_step(&state, &b0, &slab.transport, &p).unwrap();
    let (naive, b_naive) = naive_step(&state, &b0, &slab.transport, &p).unwrap();
    assert!(max_abs(&(stable.to_dense() - naive.to_dense())) < 1e-12);
    assert_eq!(b_stable, b0);
    assert_eq!(b_naive, b0);
}
