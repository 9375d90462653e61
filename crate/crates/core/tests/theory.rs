use muse_core::theory::mc::{expected_update, mc_linear_gae, mc_loss_change, mc_moments};
use muse_core::theory::report::{theorem1_check, MC_SIGMAS};
use muse_core::theory::*;
use tensorlab::Tensor;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn grid() -> impl Iterator<Item = TheoryPoint> {
    (2..=40).step_by(3).flat_map(|n| {
        [0.51, 0.6, 0.7, 0.77, 0.85, 0.93, 1.0]
            .into_iter()
            .map(move |p| TheoryPoint::new(n, p).unwrap())
    })
}

#[test]
fn expanded_and_factored_forms_agree() {
    for pt in grid() {
        for r in Relation::ALL {
            for k in [3, 4] {
                let (e, f) = (expected_moment(pt, r, k).unwrap(), expected_moment_factored(pt, r, k).unwrap());
                assert!(rel_close(e, f, 1e-9), "{pt:?} {r:?} {k}: {e} vs {f}");
            }
        }
        let (g, gf) = (gradient_coeffs(pt), gradient_coeffs_factored(pt));
        for (e, f) in [(g.a, gf.a), (g.b, gf.b), (g.c, gf.c)] {
            assert!(rel_close(e, f, 1e-9), "{pt:?}: {e} vs {f}");
        }
        let (d, df) = (loss_delta_coeffs(pt), loss_delta_coeffs_factored(pt));
        for r in 0..3 {
            for k in 0..3 {
                assert!(rel_close(d.d[r][k], df.d[r][k], 1e-9));
            }
        }
        for k in 0..3 {
            assert!(rel_close(d.combined[k], df.combined[k], 1e-9));
        }
        let (dd, ddf, ddt) = (
            loss_delta_derivatives(pt),
            loss_delta_derivatives_factored(pt),
            loss_delta_derivatives_termwise(pt),
        );
        for k in 0..3 {
            assert!(rel_close(dd[k], ddf[k], 1e-9) && rel_close(dd[k], ddt[k], 1e-9));
        }
    }
}

fn matmul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            for j in 0..m {
                out[i * m + j] += a[i * m + k] * b[k * m + j];
            }
        }
    }
    out
}

struct Exact {
    powers: [[f64; 4]; 3],
    deltas: [[f64; 3]; 3],
}

/// Expectations by summing over every graph on `2N` nodes.
fn enumerate(n: usize, p: f64) -> Exact {
    let m = 2 * n;
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let block = |i: usize, j: usize| (i < n) == (j < n);
    let pm: Vec<f64> = (0..m * m).map(|k| f64::from(u8::from(block(k / m, k % m)))).collect();
    let um: Vec<f64> = pm.iter().map(|v| 1.0 - v).collect();
    let rel = |k: usize| Relation::of(k / m, k % m, n) as usize;
    let counts = [m as f64, (m * (n - 1)) as f64, (m * n) as f64];
    let mut out = Exact {
        powers: [[0.0; 4]; 3],
        deltas: [[0.0; 3]; 3],
    };
    for mask in 0u64..(1 << pairs.len()) {
        let mut a = vec![0.0; m * m];
        let mut prob = 1.0;
        for (e, &(i, j)) in pairs.iter().enumerate() {
            let q = if block(i, j) { p } else { 1.0 - p };
            if mask >> e & 1 == 1 {
                a[i * m + j] = 1.0;
                a[j * m + i] = 1.0;
                prob *= q;
            } else {
                prob *= 1.0 - q;
            }
        }
        if prob == 0.0 {
            continue;
        }
        let a2 = matmul(&a, &a, m);
        let a3 = matmul(&a2, &a, m);
        let a4 = matmul(&a3, &a, m);
        let z = matmul(&matmul(&a, &pm, m), &a, m);
        let w = matmul(&matmul(&a, &um, m), &a, m);
        for k in 0..m * m {
            let r = rel(k);
            let wt = prob / counts[r];
            for (t, v) in [a[k], a2[k], a3[k], a4[k]].into_iter().enumerate() {
                out.powers[r][t] += wt * v;
            }
            out.deltas[r][0] += wt * (a[k] * a2[k] - a2[k] * a2[k]);
            out.deltas[r][1] += wt * (a[k] * z[k] - a2[k] * z[k]);
            out.deltas[r][2] += wt * (a[k] * w[k] - a2[k] * w[k]);
        }
    }
    out
}

#[test]
fn closed_forms_match_exhaustive_enumeration() {
    for n in [2, 3] {
        for p in [0.6, 0.85, 1.0] {
            let pt = TheoryPoint::new(n, p).unwrap();
            let ex = enumerate(n, p);
            for r in Relation::ALL {
                for k in 1..=4u32 {
                    let v = expected_moment(pt, r, k).unwrap();
                    assert!(rel_close(v, ex.powers[r as usize][k as usize - 1], 1e-10), "N={n} p={p} {r:?} A^{k}");
                }
            }
            let d = loss_delta_coeffs(pt);
            for r in 0..3 {
                for k in 0..3 {
                    assert!(rel_close(d.d[r][k], ex.deltas[r][k], 1e-10), "N={n} p={p} d{}{}", r + 1, k + 1);
                }
            }
        }
    }
}

#[test]
fn derivative_tables_match_finite_differences() {
    let h = 1e-6;
    for n in [4, 10, 17, 25, 40] {
        for p in [0.55, 0.7, 0.85, 0.95] {
            let pt = TheoryPoint::new(n, p).unwrap();
            let up = loss_delta_coeffs(TheoryPoint::new(n, p + h).unwrap()).combined;
            let dn = loss_delta_coeffs(TheoryPoint::new(n, p - h).unwrap()).combined;
            let dd = loss_delta_derivatives(pt);
            for k in 0..3 {
                let fd = (up[k] - dn[k]) / (2.0 * h);
                assert!(rel_close(dd[k], fd, 1e-6), "N={n} p={p} k={k}: {} vs {fd}", dd[k]);
            }
        }
    }
}

#[test]
fn coefficient_signs() {
    for n in 6..=40 {
        for i in 51..=100 {
            let p = f64::from(i) / 100.0;
            let g = gradient_coeffs(TheoryPoint::new(n, p).unwrap());
            assert!(g.a > 0.0 && g.b > 0.0, "N={n} p={p}: {g:?}");
            if i < 100 {
                assert!(g.c > 0.0, "N={n} p={p}: {g:?}");
            } else {
                assert!(g.c.abs() <= 1e-9 * g.b);
            }
        }
    }
    for n in 4..=40 {
        for i in 51..=100 {
            let p = f64::from(i) / 100.0;
            let d = loss_delta_coeffs(TheoryPoint::new(n, p).unwrap()).combined;
            assert!(d[0] < 0.0 && d[1] < 0.0, "N={n} p={p}: {d:?}");
            assert!(d[2] <= 1e-9 * d[1].abs(), "N={n} p={p}: {d:?}");
        }
    }
    let d = loss_delta_coeffs(TheoryPoint::new(10, 0.7).unwrap()).combined;
    assert!(d[0] < 0.0 && d[1] < 0.0 && d[2] <= 0.0);
}

#[test]
fn block_identities_and_alphas() {
    for n in [2, 5, 11, 20] {
        let nf = n as f64;
        let (p, u) = block_matrices(n);
        let pp = p.matmul(&p).unwrap();
        let uu = u.matmul(&u).unwrap();
        let pu = p.matmul(&u).unwrap();
        let up = u.matmul(&p).unwrap();
        assert_eq!(pp, p.map(|v| v * nf));
        assert_eq!(uu, p.map(|v| v * nf));
        assert_eq!(pu, u.map(|v| v * nf));
        assert_eq!(up, pu);

        let g = gradient_coeffs(TheoryPoint::new(n, 0.8).unwrap());
        let gamma = 1e-3;
        let w = Tensor::from_fn(2 * n, 2 * n, |i, j| {
            f64::from(u8::from(i == j)) - 4.0 * gamma * (g.a * f64::from(u8::from(i == j)) + g.b * p.get(i, j) + g.c * u.get(i, j))
        });
        let w2 = w.matmul(&w).unwrap();
        let [a1, a2, a3] = alphas(g, gamma, n);
        for i in 0..2 * n {
            for j in 0..2 * n {
                let expect = f64::from(u8::from(i == j)) * (1.0 + a1) + a2 * p.get(i, j) + a3 * u.get(i, j);
                assert!((w2.get(i, j) - expect).abs() < 1e-12 * expect.abs().max(1.0));
            }
        }
    }
}

#[test]
fn moments_match_monte_carlo_across_sizes() {
    for n in [4, 6, 10] {
        for p in [0.6, 0.8, 1.0] {
            let pt = TheoryPoint::new(n, p).unwrap();
            let est = mc_moments(pt, 20_000, 7).unwrap();
            for r in Relation::ALL {
                for k in 1..=4u32 {
                    let e = est.powers[r as usize][k as usize - 1];
                    let v = expected_moment(pt, r, k).unwrap();
                    assert!(e.z_score(v) <= MC_SIGMAS, "N={n} p={p} {r:?} A^{k}: {v} vs {e:?}");
                }
                for (i, m) in PairMoment::ALL.into_iter().enumerate() {
                    let e = est.pairs[r as usize][i];
                    assert!(e.z_score(expected_pair_moment(pt, r, m)) <= MC_SIGMAS, "N={n} p={p} {r:?} {m:?}");
                }
            }
        }
    }
}

#[test]
fn loss_deltas_match_monte_carlo() {
    let pt = TheoryPoint::new(5, 0.7).unwrap();
    let est = mc_moments(pt, 100_000, 11).unwrap();
    let d = loss_delta_coeffs(pt);
    for r in 0..3 {
        for k in 0..3 {
            let z = est.deltas[r][k].z_score(d.d[r][k]);
            assert!(z <= MC_SIGMAS, "d{}{}: {} vs {:?}", r + 1, k + 1, d.d[r][k], est.deltas[r][k]);
        }
    }
}

#[test]
fn theorem1_grid_and_simulated_loss_change() {
    let check = theorem1_check();
    assert_eq!(check.cells.len(), 5 * 36);
    assert!(check.passed, "{:?}", check.cells.iter().filter(|c| !c.pass).collect::<Vec<_>>());

    let n = 6;
    let gamma = 1e-5;
    for (p_train, p_test) in [(0.7, 0.7), (0.7, 0.9), (0.9, 0.6)] {
        let train = TheoryPoint::new(n, p_train).unwrap();
        let test = TheoryPoint::new(n, p_test).unwrap();
        let w = expected_update(train, gamma);
        let change = mc_loss_change(&w, test, 20_000, 3).unwrap();
        let predicted = 32.0 * n as f64 * gamma * theorem1_margin(train, test);
        assert!(change.mean < 0.0);
        assert!(((change.mean - predicted) / predicted).abs() < 0.1, "{p_train}->{p_test}: {change:?} vs {predicted}");
    }
}

#[test]
fn linear_gae_simulation() {
    let pt = TheoryPoint::new(6, 0.7).unwrap();
    let frozen = mc_linear_gae(pt, 5_000, 0.0, 1).unwrap();
    assert_eq!(frozen.loss_before, frozen.loss_after);
    assert_eq!(frozen.loss_change.mean, 0.0);

    let run = mc_linear_gae(pt, 100_000, 1e-5, 2).unwrap();
    let g = gradient_coeffs(pt);
    for r in Relation::ALL {
        let z = run.grad_groups[r as usize].z_score(4.0 * g.entry(r));
        assert!(z <= MC_SIGMAS, "{r:?}: {:?} vs {}", run.grad_groups[r as usize], 4.0 * g.entry(r));
    }
    // Individual entries scatter around their group value.
    let m = 12;
    for i in 0..m {
        for j in 0..m {
            let v = run.grad.get(i, j);
            let target = 4.0 * g.entry(Relation::of(i, j, 6));
            assert!((v - target).abs() < 0.05 * target.abs().max(1.0), "({i},{j}) {v} vs {target}");
        }
    }
    assert!(run.loss_change.mean < 0.0);
}

#[test]
fn step_decrease_ordering_follows_exact_margins() {
    // After a small step on the p1 gradient, compare the loss decrease on
    // p1 graphs with the decrease on p2 graphs. The simulated ordering must
    // agree with the ordering of the exact first-order margins.
    let n = 17;
    let gamma = 1e-7;
    let train = TheoryPoint::new(n, 0.6).unwrap();
    let w = expected_update(train, gamma);
    let mut sim = Vec::new();
    let mut exact = Vec::new();
    for p in [0.6, 0.9] {
        let test = TheoryPoint::new(n, p).unwrap();
        sim.push(-mc_loss_change(&w, test, 4_000, 5).unwrap().mean);
        exact.push(-theorem1_margin(train, test));
    }
    assert_eq!(sim[0] > sim[1], exact[0] > exact[1], "simulated {sim:?}, exact {exact:?}");
    for k in 0..2 {
        let predicted = 32.0 * n as f64 * gamma * exact[k];
        assert!(((sim[k] - predicted) / predicted).abs() < 0.1, "{sim:?} vs {predicted}");
    }
}
