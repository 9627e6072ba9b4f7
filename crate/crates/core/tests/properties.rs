use proptest::prelude::*;
use stairsplit::experiments::FIRST_STAIR;
use stairsplit::generators::{
    random_hessenberg_m_matrix, random_singular_hessenberg, random_substochastic_hessenberg,
    Uniform,
};
use stairsplit::iterate::{iteration_matrix, Stationary};
use stairsplit::matrix::{certify_m_matrix, part_extract, Part};
use stairsplit::singular::{l_transform, primed_splitting};
use stairsplit::spectra::{convergence_factor_default, eigenvalues, spectral_radius};
use stairsplit::splitting::{
    find_substitution_order, sor_splitting, split, stair_matrix, substitution_splitting,
};
use stairsplit::walks::{ags_power_matrix, check_walk_lemma, gs_bound_matrix, walk_stats};
use stairsplit::{BlockPartition, Matrix, Method, SorKind, StairKind, SubstitutionOrder};

fn dense(n: usize, seed: u64) -> Matrix {
    let mut r = Uniform::new(seed);
    r.matrix(n, |_, _| true).scale(2.0).add(&Matrix::from_fn(n, n, |_, _| -1.0))
}

fn all_methods() -> Vec<Method> {
    let mut m = vec![
        Method::Jacobi,
        Method::Gs,
        Method::Ags,
        Method::Stair(StairKind::First),
        Method::Stair(StairKind::Second),
    ];
    for k in SorKind::ALL {
        m.push(Method::Sor(k, 0.7));
        m.push(Method::Sor(k, 1.3));
    }
    m
}

fn rel_close(a: &[f64], b: &[f64], rel: f64) -> bool {
    let scale = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= rel * scale)
}

fn partition_for(n: usize, seed: u64) -> BlockPartition {
    let mut r = Uniform::new(seed ^ 0xabcdef);
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = 1 + r.below(left.min(3));
        sizes.push(s);
        left -= s;
    }
    BlockPartition::new(sizes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn part_extract_is_idempotent(n in 1usize..9, seed in any::<u64>(), blocked in any::<bool>()) {
        let a = dense(n, seed);
        let p = partition_for(n, seed);
        let p = blocked.then_some(&p);
        for part in [Part::Diag, Part::Tril, Part::Triu, Part::StrictTril, Part::StrictTriu, Part::Tridiag] {
            let once = part_extract(&a, part, p).unwrap();
            prop_assert_eq!(part_extract(&once, part, p).unwrap(), once);
        }
        let tril = part_extract(&a, Part::Tril, p).unwrap();
        let upper = part_extract(&a, Part::StrictTriu, p).unwrap();
        prop_assert_eq!(tril.add(&upper), a.clone());
    }

    #[test]
    fn tridiag_is_diag_plus_neighbours(n in 1usize..9, seed in any::<u64>()) {
        let a = dense(n, seed);
        let t = part_extract(&a, Part::Tridiag, None).unwrap();
        for i in 0..n {
            for j in 0..n {
                let expect = if i.abs_diff(j) <= 1 { a[(i, j)] } else { 0.0 };
                prop_assert_eq!(t[(i, j)], expect);
            }
        }
    }

    #[test]
    fn certified_matrices_have_nonnegative_real_spectrum(n in 2usize..10, seed in any::<u64>()) {
        let (a, _, _) = random_hessenberg_m_matrix(n, seed).unwrap();
        prop_assert!(certify_m_matrix(&a, None, 1e-12).is_ok());
        for l in eigenvalues(&a).unwrap() {
            prop_assert!(l.re >= -1e-8);
        }
    }

    #[test]
    fn splittings_reconstruct_a(n in 2usize..10, seed in any::<u64>(), blocked in any::<bool>()) {
        let (a, _, _) = random_hessenberg_m_matrix(n, seed).unwrap();
        let p = partition_for(n, seed);
        let p = blocked.then_some(&p);
        let tol = 1e-13 * a.max_abs();
        for m in all_methods() {
            let s = split(&a, m, p).unwrap();
            prop_assert!(s.m().sub(s.n()).max_abs_diff(&a) <= tol, "{:?}", m);
        }
    }

    #[test]
    fn classical_comparison_pairs(n in 2usize..10, seed in any::<u64>()) {
        let (a, _, _) = random_hessenberg_m_matrix(n, seed).unwrap();
        let rho = |m| spectral_radius(&iteration_matrix(&split(&a, m, None).unwrap()).unwrap()).unwrap();
        let j = rho(Method::Jacobi);
        prop_assert!(j >= rho(Method::Gs) - 1e-10);
        prop_assert!(j >= rho(Method::Ags) - 1e-10);
        prop_assert!(j >= rho(FIRST_STAIR) - 1e-10);
        prop_assert!(j >= rho(Method::Stair(StairKind::Second)) - 1e-10);
    }

    #[test]
    fn substitution_order_round_trip(n in 2usize..9, seed in any::<u64>()) {
        let pattern = |m: &Matrix| m.as_slice().iter().map(|v| *v != 0.0).collect::<Vec<_>>();
        let mut r = Uniform::new(seed);
        let order = SubstitutionOrder::new(r.permutation(n)).unwrap();

        // Every pair is coupled in a dense matrix, so M pins down the order.
        let dense_a = dense(n, seed).add(&Matrix::from_fn(n, n, |_, _| 2.0));
        let s = substitution_splitting(&dense_a, &order, None).unwrap();
        let found = find_substitution_order(s.m(), None).unwrap();
        prop_assert_eq!(&found, &order);
        let again = substitution_splitting(&dense_a, &found, None).unwrap();
        prop_assert_eq!(pattern(again.m()), pattern(s.m()));

        // With uncoupled pairs the rediscovered maximal M can only grow.
        let (a, _, _) = random_hessenberg_m_matrix(n, seed).unwrap();
        let s = substitution_splitting(&a, &order, None).unwrap();
        let found = find_substitution_order(s.m(), None).unwrap();
        let again = substitution_splitting(&a, &found, None).unwrap();
        for (x, y) in pattern(s.m()).into_iter().zip(pattern(again.m())) {
            prop_assert!(!x || y);
        }
        prop_assert!(find_substitution_order(again.m(), None).is_some());
    }

    #[test]
    fn stair_matrices_admit_an_order(n in 1usize..12, seed in any::<u64>(), second in any::<bool>()) {
        let a = dense(n, seed);
        let kind = if second { StairKind::Second } else { StairKind::First };
        let m = stair_matrix(&a, kind, None).unwrap();
        prop_assert!(find_substitution_order(&m, None).is_some());
    }

    #[test]
    fn sweep_matches_matrix_form(n in 2usize..9, seed in any::<u64>(), blocked in any::<bool>()) {
        let (a, _, _) = random_hessenberg_m_matrix(n, seed).unwrap();
        let p = partition_for(n, seed);
        let p = blocked.then_some(&p);
        let mut r = Uniform::new(seed.wrapping_add(1));
        let x = r.vector(n);
        let b = r.vector(n);
        for m in all_methods() {
            let s = split(&a, m, p).unwrap();
            let it = Stationary::new(&s).unwrap();
            let swept = it.sweep(&x, &b).unwrap();
            let px = it.iteration_matrix().mul_vec(&x);
            let mb = it.solve_m(&b);
            let expected: Vec<f64> = px.iter().zip(&mb).map(|(u, v)| u + v).collect();
            prop_assert!(rel_close(&swept, &expected, 1e-12), "{:?}: {:?} vs {:?}", m, swept, expected);
        }
    }

    #[test]
    fn solution_is_a_fixed_point(n in 2usize..9, seed in any::<u64>()) {
        let (a, u, v) = random_hessenberg_m_matrix(n, seed).unwrap();
        for m in all_methods() {
            let s = split(&a, m, None).unwrap();
            let x = Stationary::new(&s).unwrap().sweep(&u, &v).unwrap();
            prop_assert!(rel_close(&x, &u, 1e-10), "{:?}", m);
        }
    }

    #[test]
    fn two_phase_equals_sequential(n in 2usize..12, seed in any::<u64>(), second in any::<bool>(), omega in 0.2f64..1.9) {
        let (a, _, _) = random_hessenberg_m_matrix(n, seed).unwrap();
        let kind = if second { StairKind::Second } else { StairKind::First };
        let mut r = Uniform::new(seed);
        let x = r.vector(n);
        let b = r.vector(n);
        for m in [Method::Stair(kind), Method::Sor(SorKind::Stsor, omega), Method::Sor(SorKind::Stsor2, omega)] {
            let s = split(&a, m, None).unwrap();
            let it = Stationary::new(&s).unwrap();
            prop_assert_eq!(it.sweep_two_phase(&x, &b).unwrap(), it.sweep(&x, &b).unwrap());
        }
    }

    #[test]
    fn spectrum_is_permutation_invariant(n in 2usize..10, seed in any::<u64>()) {
        let a = dense(n, seed);
        let perm = Uniform::new(!seed).permutation(n);
        let b = a.permute_symmetric(&perm);
        let (ea, eb) = (eigenvalues(&a).unwrap(), eigenvalues(&b).unwrap());
        // Greedy matching: each eigenvalue of A has a partner in B.
        let mut used = vec![false; n];
        for l in &ea {
            let (k, d) = eb.iter().enumerate().filter(|(k, _)| !used[*k])
                .map(|(k, m)| (k, (l - m).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
            used[k] = true;
            prop_assert!(d <= 1e-8, "{} unmatched ({})", l, d);
        }
    }

    #[test]
    fn singular_gamma_ordering(n in 3usize..9, seed in any::<u64>()) {
        let a = random_singular_hessenberg(n, seed).unwrap();
        let t = l_transform(&a).unwrap();
        prop_assert!(certify_m_matrix(&t.a_trunc, None, 1e-12).is_ok());
        prop_assert!(t.b.row(n - 1).iter().all(|v| *v == 0.0));
        let mut g = Vec::new();
        for m in [Method::Jacobi, Method::Gs, FIRST_STAIR, Method::Ags] {
            let s = primed_splitting(&a, m, None).unwrap();
            prop_assert!(s.m().sub(s.n()).max_abs_diff(&a) <= 1e-14);
            let r = convergence_factor_default(&iteration_matrix(&s).unwrap()).unwrap();
            prop_assert!(r.one_eigenvalue_present);
            prop_assert!(r.gamma <= r.rho + 1e-15);
            g.push(r.gamma);
        }
        prop_assert!(g[0] >= g[1] - 1e-9 && g[1] >= g[2] - 1e-9 && g[2] >= g[3] - 1e-9, "{:?}", g);
    }

    #[test]
    fn sor_at_unit_omega_is_the_base_method(n in 2usize..9, seed in any::<u64>()) {
        let (a, _, _) = random_hessenberg_m_matrix(n, seed).unwrap();
        let pairs = [
            (SorKind::Gsor, Method::Gs),
            (SorKind::Agsor, Method::Ags),
            (SorKind::Stsor, FIRST_STAIR),
            (SorKind::Stsor2, FIRST_STAIR),
        ];
        for (k, base) in pairs {
            let s = sor_splitting(&a, k, 1.0, None).unwrap();
            let b = split(&a, base, None).unwrap();
            prop_assert_eq!(s.m(), b.m());
        }
    }

    #[test]
    fn comparison_inequality_and_gelfand(n in 2usize..7, seed in any::<u64>()) {
        let t = random_substochastic_hessenberg(n, 0.95, seed).unwrap();
        let id = Matrix::identity(n);
        let resolvent_norm = stairsplit::lu::Lu::factor(&id.sub(&t)).unwrap().inverse().norm_inf();
        for k in n - 1..n + 5 {
            let lhs = ags_power_matrix(&t, k).unwrap();
            let rhs = gs_bound_matrix(&t, k).unwrap();
            for (x, y) in lhs.as_slice().iter().zip(rhs.as_slice()) {
                prop_assert!(*x <= y + 1e-12);
            }
            let p_gs = stairsplit::lu::Lu::factor(&id.sub(&part_extract(&t, Part::Tril, None).unwrap()))
                .unwrap()
                .solve_matrix(&part_extract(&t, Part::StrictTriu, None).unwrap());
            let bound = p_gs.pow(k + 1 - n).norm_inf() * resolvent_norm;
            prop_assert!(lhs.norm_inf() <= bound * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn neumann_series_of_the_upper_part(n in 2usize..7, seed in any::<u64>(), m in 10usize..40) {
        let t = random_substochastic_hessenberg(n, 0.9, seed).unwrap();
        let du = part_extract(&t, Part::Triu, None).unwrap();
        let r = du.norm_inf();
        let mut sum = Matrix::identity(n);
        let mut term = Matrix::identity(n);
        for _ in 0..m {
            term = term.matmul(&du);
            sum = sum.add(&term);
        }
        let exact = stairsplit::lu::Lu::factor(&Matrix::identity(n).sub(&du)).unwrap().inverse();
        let bound = r.powi(m as i32 + 1) / (1.0 - r);
        prop_assert!(sum.sub(&exact).norm_inf() <= bound + 1e-13);
    }

    #[test]
    fn walk_stats_alternate(states in prop::collection::vec(0usize..5, 2..15)) {
        let s = walk_stats(&states, 5);
        for (u, d) in s.level_up.iter().zip(&s.level_down) {
            prop_assert!(u.abs_diff(*d) <= 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn walk_lemma_on_random_hessenberg_chains(n in 2usize..5, seed in any::<u64>()) {
        let t = random_substochastic_hessenberg(n, 0.9, seed).unwrap();
        let r = check_walk_lemma(&t, 8, 10_000_000).unwrap();
        prop_assert_eq!(r.violations, 0);
        prop_assert_eq!(r.alternation_violations, 0);
        prop_assert!(r.walks > 0);
    }
}
