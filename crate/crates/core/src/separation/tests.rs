use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cplx(rng: &mut ChaCha8Rng) -> Complex64 {
    // Box-Muller, unit variance complex normal
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let r = (-u1.ln()).sqrt();
    Complex64::from_polar(r, 2.0 * std::f64::consts::PI * u2)
}

fn config(bins: usize) -> StftConfig {
    StftConfig::new(2 * (bins - 1), bins - 1).unwrap()
}

/// Random observations and random floored variances.
fn random_state(seed: u64, bins: usize, frames: usize, m: usize, dist: SourceDistribution) -> SeparationState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obs: Vec<ComplexSpectrogram> = (0..m)
        .map(|_| {
            let v = Array2::from_shape_simple_fn((bins, frames), || cplx(&mut rng));
            ComplexSpectrogram::new(v, config(bins)).unwrap()
        })
        .collect();
    let mut state = SeparationState::new(&obs, dist, 0).unwrap();
    for n in 0..m {
        let s = Array2::from_shape_simple_fn((bins, frames), || (rng.random_range(-1.5..1.5f64)).exp());
        state.set_sigma(n, VarianceMatrix::floored(s, 1e-6)).unwrap();
    }
    state
}

fn randomize_demixing(state: &mut SeparationState, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = state.sources();
    let mats = (0..state.bins())
        .map(|_| {
            let mut w = ComplexMatrix::identity(n);
            for r in 0..n {
                for c in 0..n {
                    w[(r, c)] += cplx(&mut rng) * 0.4;
                }
            }
            w
        })
        .collect();
    state.set_demixing(DemixingStack::from_matrices(mats)).unwrap();
}

/// Independent cost evaluator: recomputes y from W and x, det by cofactors.
fn naive_cost(state: &SeparationState, nu: Option<f64>) -> f64 {
    fn det(m: &[Vec<Complex64>]) -> Complex64 {
        if m.len() == 1 {
            return m[0][0];
        }
        (0..m.len())
            .map(|c| {
                let minor: Vec<Vec<Complex64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(k, _)| k != c).map(|(_, v)| *v).collect())
                    .collect();
                m[0][c] * det(&minor) * if c % 2 == 0 { 1.0 } else { -1.0 }
            })
            .sum()
    }
    let n_src = state.sources();
    let mut total = 0.0;
    for i in 0..state.bins() {
        let w = state.demixing().get(i);
        let rows: Vec<Vec<Complex64>> = (0..n_src).map(|r| w.row(r).to_vec()).collect();
        total -= 2.0 * state.frames() as f64 * det(&rows).norm().ln();
        for j in 0..state.frames() {
            let x = state.observation(i, j);
            for n in 0..n_src {
                let filter = state.demixing().filter(i, n);
                let y: Complex64 = filter.iter().zip(&x).map(|(f, x)| f.conj() * x).sum();
                let s = state.sigma(n).sigma()[(i, j)];
                let r = y.norm_sqr() / (s * s);
                total += match nu {
                    None => r,
                    Some(nu) => (1.0 + nu / 2.0) * (1.0 + 2.0 / nu * r).ln(),
                } + 2.0 * s.ln();
            }
        }
    }
    total
}

#[test]
fn cost_gauss_scalar_substitution() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v = Array2::from_shape_simple_fn((3, 4), || cplx(&mut rng));
    let obs = ComplexSpectrogram::new(v.clone(), config(3)).unwrap();
    let mut state = SeparationState::new(&[obs], SourceDistribution::Gauss, 0).unwrap();
    state.set_sigma(0, VarianceMatrix::floored(v.mapv(|z| z.norm()), 1e-300)).unwrap();
    let expect: f64 = v.iter().map(|z| 1.0 + 2.0 * z.norm().ln()).sum();
    assert!((cost_gauss(&state).unwrap() - expect).abs() < 1e-12);
}

#[test]
fn costs_match_independent_evaluator() {
    for seed in 0..10 {
        let mut state = random_state(seed, 5, 7, 3, SourceDistribution::Gauss);
        randomize_demixing(&mut state, seed + 100);
        let g = cost_gauss(&state).unwrap();
        assert!((g - naive_cost(&state, None)).abs() < 1e-10 * g.abs().max(1.0));
        for nu in [0.5, 1.0, 10.0, 1000.0] {
            let t = cost_t(&state, nu).unwrap();
            assert!((t - naive_cost(&state, Some(nu))).abs() < 1e-10 * t.abs().max(1.0));
        }
    }
}

#[test]
fn doubling_sigma_matches_independent_evaluator() {
    let mut state = random_state(3, 4, 6, 2, SourceDistribution::Gauss);
    randomize_demixing(&mut state, 4);
    for n in 0..2 {
        let doubled = state.sigma(n).sigma() * 2.0;
        state.set_sigma(n, VarianceMatrix::floored(doubled, 1e-6)).unwrap();
    }
    let g = cost_gauss(&state).unwrap();
    assert!((g - naive_cost(&state, None)).abs() < 1e-10 * g.abs());
}

#[test]
fn huge_nu_matches_gauss_cost() {
    for seed in 0..5 {
        let mut state = random_state(seed, 8, 16, 2, SourceDistribution::Gauss);
        randomize_demixing(&mut state, seed);
        let g = cost_gauss(&state).unwrap();
        let t = cost_t(&state, 1e12).unwrap();
        assert!((g - t).abs() < 1e-4, "{g} vs {t}");
    }
}

#[test]
fn zero_estimates_leave_only_variance_and_determinant_terms() {
    let zero = ComplexSpectrogram::zeros(config(3), 5);
    let mut state = SeparationState::new(&[zero.clone(), zero], SourceDistribution::StudentT { nu: 3.0 }, 0).unwrap();
    let w = ComplexMatrix::from_diagonal(&[Complex64::new(2.0, 0.0), Complex64::new(0.0, 3.0)]);
    state.set_demixing(DemixingStack::from_matrices(vec![w; 3])).unwrap();
    let s = Array2::from_elem((3, 5), 0.7);
    state.set_sigma(0, VarianceMatrix::floored(s.clone(), 1e-9)).unwrap();
    state.set_sigma(1, VarianceMatrix::floored(s, 1e-9)).unwrap();
    let expect = 2.0 * 15.0 * 2.0 * 0.7f64.ln() - 2.0 * 5.0 * 3.0 * 6f64.ln();
    assert!((cost_t(&state, 3.0).unwrap() - expect).abs() < 1e-12);
}

#[test]
fn unitary_demixing_has_no_determinant_term() {
    let mut state = random_state(6, 4, 5, 2, SourceDistribution::Gauss);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rot = ComplexMatrix::from_rows(&[
        vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)],
        vec![Complex64::new(0.0, h), Complex64::new(h, 0.0)],
    ]);
    state.set_demixing(DemixingStack::from_matrices(vec![rot; 4])).unwrap();
    let mut data_terms = 0.0;
    for i in 0..4 {
        for j in 0..5 {
            for n in 0..2 {
                let s = state.sigma(n).sigma()[(i, j)];
                data_terms += state.estimate(i, j, n).norm_sqr() / (s * s) + 2.0 * s.ln();
            }
        }
    }
    assert!((cost_gauss(&state).unwrap() - data_terms).abs() < 1e-10);
}

#[test]
fn covariance_equal_division_at_nu_two() {
    let state = random_state(7, 3, 9, 2, SourceDistribution::StudentT { nu: 2.0 });
    let u = weighted_covariance(&state, 1, 0);
    let mut naive = ComplexMatrix::zeros(2);
    for j in 0..9 {
        let s = state.sigma(0).sigma()[(1, j)];
        let c = (s * s + state.estimate(1, j, 0).norm_sqr()) / 2.0;
        let x = state.observation(1, j);
        for a in 0..2 {
            for b in 0..2 {
                naive[(a, b)] += x[a] * x[b].conj() / c / 9.0;
            }
        }
    }
    for a in 0..2 {
        for b in 0..2 {
            assert!((u[(a, b)] - naive[(a, b)]).norm() < 1e-12);
        }
    }
}

#[test]
fn gauss_unit_variance_gives_plain_covariance() {
    let mut state = random_state(8, 3, 10, 3, SourceDistribution::Gauss);
    for n in 0..3 {
        state.set_sigma(n, VarianceMatrix::floored(Array2::ones((3, 10)), 1e-9)).unwrap();
    }
    let u = weighted_covariance(&state, 2, 1);
    for a in 0..3 {
        for b in 0..3 {
            let plain: Complex64 = (0..10)
                .map(|j| state.observation(2, j)[a] * state.observation(2, j)[b].conj())
                .sum::<Complex64>()
                / 10.0;
            assert!((u[(a, b)] - plain).norm() < 1e-12);
        }
    }
}

#[test]
fn covariance_matches_naive_oracle_and_is_hermitian() {
    for nu in [0.7, 5.0, 300.0] {
        let mut state = random_state(9, 6, 20, 3, SourceDistribution::StudentT { nu });
        randomize_demixing(&mut state, 10);
        for i in 0..6 {
            for n in 0..3 {
                let u = weighted_covariance(&state, i, n);
                assert!(u.hermitian_asymmetry() <= 1e-14);
                let mut naive = ComplexMatrix::zeros(3);
                for j in 0..20 {
                    let s = state.sigma(n).sigma()[(i, j)];
                    let y2 = state.estimate(i, j, n).norm_sqr();
                    let c = nu / (nu + 2.0) * s * s + 2.0 / (nu + 2.0) * y2;
                    let x = state.observation(i, j);
                    for a in 0..3 {
                        for b in 0..3 {
                            naive[(a, b)] += x[a] * x[b].conj() / (c * 20.0);
                        }
                    }
                }
                for a in 0..3 {
                    for b in 0..3 {
                        assert!((u[(a, b)] - naive[(a, b)]).norm() < 1e-12 * naive.max_abs().max(1.0));
                    }
                }
            }
        }
    }
}

#[test]
fn large_nu_covariance_converges_to_gauss_form() {
    let mut t_state = random_state(11, 5, 30, 2, SourceDistribution::StudentT { nu: 1e12 });
    randomize_demixing(&mut t_state, 12);
    let mut g_state = t_state.clone();
    g_state.set_distribution(SourceDistribution::Gauss).unwrap();
    for i in 0..5 {
        for n in 0..2 {
            let a = weighted_covariance(&t_state, i, n);
            let b = weighted_covariance(&g_state, i, n);
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert!((x - y).norm() < 1e-6);
            }
        }
    }
}

#[test]
fn scalar_update_normalizes_filter() {
    let mut state = random_state(13, 4, 12, 1, SourceDistribution::StudentT { nu: 4.0 });
    for i in 0..4 {
        let u = weighted_covariance(&state, i, 0);
        ip_update(&mut state, i, 0).unwrap();
        let w = state.demixing().filter(i, 0);
        assert!((w[0].norm_sqr() - 1.0 / u[(0, 0)].re).abs() < 1e-12 * w[0].norm_sqr());
    }
}

#[test]
fn update_postconditions() {
    for dist in [SourceDistribution::Gauss, SourceDistribution::StudentT { nu: 1.0 }] {
        let mut state = random_state(14, 6, 25, 3, dist);
        randomize_demixing(&mut state, 15);
        for i in 0..6 {
            for n in 0..3 {
                let u = weighted_covariance(&state, i, n);
                ip_update(&mut state, i, n).unwrap();
                let w = state.demixing().filter(i, n);
                let q = crate::linalg::hermitian_quadratic(&w, &u).unwrap();
                assert!((q - 1.0).abs() < 1e-10);
                for j in 0..25 {
                    let x = state.observation(i, j);
                    let y: Complex64 = w.iter().zip(&x).map(|(f, x)| f.conj() * x).sum();
                    assert!((y - state.estimate(i, j, n)).norm() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn singular_demixing_is_reported_with_context() {
    let mut state = random_state(16, 2, 4, 2, SourceDistribution::Gauss);
    let zero = ComplexMatrix::zeros(2);
    state.set_demixing(DemixingStack::from_matrices(vec![zero.clone(), zero])).unwrap();
    match ip_update(&mut state, 1, 0) {
        Err(SeparationError::Singular { bin: 1, source_index: Some(0), .. }) => {}
        other => panic!("expected singular error, got {other:?}"),
    }
    assert!(matches!(cost_gauss(&state), Err(SeparationError::Singular { .. })));
    assert!(matches!(back_project(&state), Err(SeparationError::Singular { .. })));
}

#[test]
fn parallel_sweep_equals_sequential_updates() {
    for dist in [SourceDistribution::Gauss, SourceDistribution::StudentT { nu: 10.0 }] {
        let mut par = random_state(17, 16, 40, 3, dist);
        randomize_demixing(&mut par, 18);
        let mut seq = par.clone();
        for _ in 0..3 {
            ip_sweep(&mut par).unwrap();
            for i in 0..seq.bins() {
                for n in 0..3 {
                    ip_update(&mut seq, i, n).unwrap();
                }
            }
        }
        assert_eq!(par.demixing(), seq.demixing());
        for i in 0..16 {
            assert_eq!(par.estimate_bin(i), seq.estimate_bin(i));
        }
    }
}

#[test]
fn estimates_stay_consistent_with_demixing() {
    let mut state = random_state(19, 8, 20, 2, SourceDistribution::StudentT { nu: 2.0 });
    for _ in 0..5 {
        ip_sweep(&mut state).unwrap();
    }
    let mut again = state.clone();
    again.recompute_y();
    for i in 0..8 {
        for (a, b) in state.estimate_bin(i).iter().zip(again.estimate_bin(i).iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}

fn assert_monotone(trace: &[f64]) {
    for w in trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "cost rose from {} to {}", w[0], w[1]);
    }
}

#[test]
fn sweeps_never_increase_cost_at_fixed_variances() {
    for seed in 0..50 {
        for dist in [SourceDistribution::Gauss, SourceDistribution::StudentT { nu: 1.0 + seed as f64 }] {
            let mut state = random_state(1000 + seed, 6, 24, 2, dist);
            let mut trace = vec![cost(&state).unwrap()];
            for _ in 0..15 {
                ip_sweep(&mut state).unwrap();
                trace.push(cost(&state).unwrap());
            }
            assert_monotone(&trace);
        }
    }
}

#[test]
fn majorizer_touches_cost_at_tangent_points() {
    for seed in 0..20 {
        let nu = 0.5 + seed as f64 * 7.0;
        let mut state = random_state(2000 + seed, 6, 12, 2, SourceDistribution::StudentT { nu });
        randomize_demixing(&mut state, seed);
        let alpha = tangent_points(&state, nu);
        let maj = majorizer_t(&state, nu, &alpha).unwrap();
        assert!((maj - cost_t(&state, nu).unwrap()).abs() < 1e-10);

        // anywhere else it lies above
        let shifted: Vec<Array2<f64>> = alpha.iter().map(|a| a * 1.3).collect();
        assert!(majorizer_t(&state, nu, &shifted).unwrap() > maj);
    }
}

#[test]
fn weighting_term_divides_internally() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10_000 {
        let nu = (rng.random_range(-5.0..10.0f64)).exp();
        let s2: f64 = rng.random_range(1e-6..10.0);
        let y2: f64 = rng.random_range(0.0..10.0);
        let c = SourceDistribution::StudentT { nu }.weight_denominator(s2, y2);
        let (lo, hi) = (s2.min(y2), s2.max(y2));
        assert!(c >= lo * (1.0 - 1e-15) && c <= hi * (1.0 + 1e-15));
    }
}

fn planted_mixture(seed: u64, bins: usize, frames: usize) -> (Vec<ComplexSpectrogram>, Vec<ComplexSpectrogram>, ComplexMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources: Vec<ComplexSpectrogram> = (0..2)
        .map(|_| {
            let v = Array2::from_shape_simple_fn((bins, frames), || cplx(&mut rng) * rng.random_range(-3.0..1.0f64).exp());
            ComplexSpectrogram::new(v, config(bins)).unwrap()
        })
        .collect();
    let a = ComplexMatrix::from_rows(&[
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.6, 0.2)],
        vec![Complex64::new(-0.5, 0.3), Complex64::new(1.0, 0.0)],
    ]);
    let obs = (0..2)
        .map(|m| {
            let v = Array2::from_shape_fn((bins, frames), |(i, j)| {
                a[(m, 0)] * sources[0].values()[(i, j)] + a[(m, 1)] * sources[1].values()[(i, j)]
            });
            ComplexSpectrogram::new(v, config(bins)).unwrap()
        })
        .collect();
    (obs, sources, a)
}

#[test]
fn oracle_variances_recover_planted_mixing() {
    let (obs, sources, a) = planted_mixture(22, 8, 200);
    let mut state = SeparationState::new(&obs, SourceDistribution::Gauss, 0).unwrap();
    for (n, s) in sources.iter().enumerate() {
        state.set_sigma(n, VarianceMatrix::floored(s.magnitude(), 1e-9)).unwrap();
    }
    for _ in 0..30 {
        ip_sweep(&mut state).unwrap();
    }
    for i in 0..8 {
        let g = state.demixing().get(i).matmul(&a);
        let direct = g[(0, 0)].norm_sqr() + g[(1, 1)].norm_sqr();
        let cross = g[(0, 1)].norm_sqr() + g[(1, 0)].norm_sqr();
        let ratio_db = 10.0 * (direct.min(cross) / direct.max(cross)).log10();
        assert!(ratio_db < -20.0, "bin {i}: {ratio_db} dB");
    }
}

#[test]
fn back_projection_with_identity_keeps_estimates() {
    let state = random_state(23, 4, 6, 2, SourceDistribution::Gauss);
    let bp = back_project(&state).unwrap();
    // identity demixing: only the reference-channel source survives
    for i in 0..4 {
        for j in 0..6 {
            assert_eq!(bp[0].values()[(i, j)], state.estimate(i, j, 0));
            assert_eq!(bp[1].values()[(i, j)], Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn back_projection_direct_formula() {
    let mut state = random_state(24, 3, 5, 2, SourceDistribution::Gauss);
    let d = [Complex64::new(2.0, 1.0), Complex64::new(-0.5, 0.0)];
    let mut w = ComplexMatrix::from_diagonal(&d);
    w[(1, 0)] = Complex64::new(0.3, -0.2);
    state.set_demixing(DemixingStack::from_matrices(vec![w.clone(); 3])).unwrap();
    let bp = back_project(&state).unwrap();
    // W⁻¹ for lower-triangular W, written out by hand
    let inv00 = 1.0 / d[0];
    let inv10 = -w[(1, 0)] / (d[0] * d[1]);
    let inv11 = 1.0 / d[1];
    for i in 0..3 {
        for j in 0..5 {
            let y0 = state.estimate(i, j, 0);
            let y1 = state.estimate(i, j, 1);
            assert!((bp[0].values()[(i, j)] - inv00 * y0).norm() < 1e-12);
            assert!(bp[1].values()[(i, j)].norm() < 1e-12);
            let _ = (inv10, inv11, y1);
        }
    }
    state.ref_channel = 1;
    let bp = back_project(&state).unwrap();
    for i in 0..3 {
        for j in 0..5 {
            assert!((bp[0].values()[(i, j)] - inv10 * state.estimate(i, j, 0)).norm() < 1e-12);
            assert!((bp[1].values()[(i, j)] - inv11 * state.estimate(i, j, 1)).norm() < 1e-12);
        }
    }
}

#[test]
fn back_projected_estimates_sum_to_reference_channel() {
    for m_ref in 0..3 {
        let mut state = random_state(25, 5, 8, 3, SourceDistribution::Gauss);
        state.ref_channel = m_ref;
        randomize_demixing(&mut state, 26);
        let bp = back_project(&state).unwrap();
        for i in 0..5 {
            for j in 0..8 {
                let sum: Complex64 = bp.iter().map(|b| b.values()[(i, j)]).sum();
                assert!((sum - state.observation(i, j)[m_ref]).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn back_projection_ignores_row_scaling() {
    let mut state = random_state(27, 4, 6, 2, SourceDistribution::Gauss);
    randomize_demixing(&mut state, 28);
    let before = back_project(&state).unwrap();
    let alpha = Complex64::new(-1.7, 0.4);
    let mats = state
        .demixing()
        .matrices()
        .iter()
        .map(|w| {
            let mut w = w.clone();
            w.row_mut(1).iter_mut().for_each(|v| *v *= alpha);
            w
        })
        .collect();
    state.set_demixing(DemixingStack::from_matrices(mats)).unwrap();
    let after = back_project(&state).unwrap();
    for (a, b) in before.iter().zip(&after) {
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() < 1e-10);
        }
    }
}

struct Fixed(Array2<f64>);

impl SourceModel for Fixed {
    fn magnitudes(&mut self, _: &ComplexSpectrogram) -> Result<Array2<f64>, ModelError> {
        Ok(self.0.clone())
    }
}

#[test]
fn zero_rounds_return_observations() {
    let (obs, sources, _) = planted_mixture(29, 4, 30);
    let mut models: Vec<Fixed> = sources.iter().map(|s| Fixed(s.magnitude())).collect();
    let cfg = IdlmaConfig {
        outer_rounds: 0,
        ..IdlmaConfig::default()
    };
    let out = run_idlma(&obs, &mut models, &cfg).unwrap();
    assert_eq!(out.estimates, obs);
    assert_eq!(out.demixing, DemixingStack::identity(4, 2));
    assert!(out.trace.is_empty());
}

#[test]
fn driver_is_deterministic_and_traces_every_sweep() {
    let (obs, sources, _) = planted_mixture(30, 6, 40);
    let cfg = IdlmaConfig {
        outer_rounds: 3,
        inner_sweeps: 4,
        ..IdlmaConfig::default()
    };
    let run = || {
        let mut models: Vec<Fixed> = sources.iter().map(|s| Fixed(s.magnitude())).collect();
        run_idlma(&obs, &mut models, &cfg).unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a.trace.len(), 12);
    let costs = |o: &SeparationOutput| o.trace.iter().map(|r| r.cost.to_bits()).collect::<Vec<_>>();
    assert_eq!(costs(&a), costs(&b));
    assert_eq!(a.estimates, b.estimates);
    assert_eq!((a.trace[5].round, a.trace[5].sweep), (1, 1));
}

#[test]
fn driver_rejects_model_count_mismatch() {
    let (obs, sources, _) = planted_mixture(31, 4, 20);
    let mut models = vec![Fixed(sources[0].magnitude())];
    let err = run_idlma(&obs, &mut models, &IdlmaConfig::default()).unwrap_err();
    assert!(matches!(err.error, SeparationError::Config(_)));
}

#[test]
fn ilrma_cost_is_monotone_and_seeded() {
    let (obs, _, _) = planted_mixture(32, 10, 60);
    let cfg = IlrmaConfig {
        bases: 2,
        sweeps: 30,
        seed: 5,
        ..IlrmaConfig::default()
    };
    let a = run_ilrma(&obs, &cfg).unwrap();
    let costs: Vec<f64> = a.trace.iter().map(|r| r.cost).collect();
    assert_monotone(&costs);
    let b = run_ilrma(&obs, &cfg).unwrap();
    assert_eq!(a.estimates, b.estimates);
}

#[test]
fn rejects_bad_configuration() {
    let zero = ComplexSpectrogram::zeros(config(3), 4);
    assert!(SeparationState::new(&[zero.clone()], SourceDistribution::StudentT { nu: 0.0 }, 0).is_err());
    assert!(SeparationState::new(&[zero.clone()], SourceDistribution::Gauss, 1).is_err());
    assert!(SeparationState::new(&[], SourceDistribution::Gauss, 0).is_err());
    let other = ComplexSpectrogram::zeros(config(3), 5);
    assert!(SeparationState::new(&[zero, other], SourceDistribution::Gauss, 0).is_err());
}
