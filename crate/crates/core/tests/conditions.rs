//! Integration tests for the series-condition evaluators, checked against
//! independent closed-form summation oracles where the model admits one.

use pqdlab_core::conditions::{
    eval_condition_2_16, eval_condition_2_17_weak, eval_condition_2_2, eval_condition_2_8,
    eval_condition_2_9, eval_condition_3_4, mz_kernel, SeriesOptions, Verdict,
};
use pqdlab_core::model::{Correlation, Family};
use pqdlab_core::{Marginal, SequenceModel, StreamId, WeightScheme};

fn unit_weights() -> WeightScheme {
    WeightScheme::Constant { c: 1.0 }
}

fn opts(k_max: usize) -> SeriesOptions {
    SeriesOptions { k_max, ..SeriesOptions::default() }
}

/// Direct high-precision summation oracle for the coupled Bernoulli family
/// under the cubic tail kernel: G is constant 2^{-(k+j)} on [j, T] (j ≥ 1),
/// so each term is exactly 2^{-(k+j)}·(1/(2j²) - 1/(2T²)).
fn coupled_cubic_oracle(k_max: usize, t_cutoff: f64) -> f64 {
    let mut sum = 0.0f64;
    for j in (2..=k_max).rev() {
        for k in (1..j).rev() {
            let g = 2.0f64.powi(-((k + j) as i32));
            sum += g * (0.5 / (j * j) as f64 - 0.5 / (t_cutoff * t_cutoff));
        }
    }
    sum
}

/// Rectangle-kernel oracle: term = 2^{-(k+j)}/j² exactly.
fn coupled_rect_oracle(k_max: usize) -> f64 {
    let mut sum = 0.0f64;
    for j in (2..=k_max).rev() {
        for k in (1..j).rev() {
            sum += 2.0f64.powi(-((k + j) as i32)) / (j * j) as f64;
        }
    }
    sum
}

#[test]
fn coupled_c2_2_converges_and_matches_oracle() {
    let model = SequenceModel::coupled_bernoulli();
    let w = unit_weights();
    let r100 = eval_condition_2_2(&model, &w, &opts(100)).unwrap();
    let r50 = eval_condition_2_2(&model, &w, &opts(50)).unwrap();
    assert_eq!(r100.verdict, Verdict::Converges);
    assert_eq!(r50.verdict, Verdict::Converges);
    assert!(
        (r100.final_sum() - r50.final_sum()).abs() < 1e-10,
        "partial sums should be flat: {} vs {}",
        r100.final_sum(),
        r50.final_sum()
    );
    let oracle = coupled_cubic_oracle(100, SeriesOptions::default().t_cutoff);
    // Negligible pairs are certified into the tail, not the sum, so the
    // evaluated sum may undershoot the oracle by at most the tail budget.
    assert!(
        (r100.final_sum() - oracle).abs() <= r100.tail_estimate + 1e-9,
        "mine {} oracle {} tail {}",
        r100.final_sum(),
        oracle,
        r100.tail_estimate
    );
    assert!(r100.tail_estimate < 1e-6);
    // Partial sums of a nonnegative-term series are nondecreasing.
    assert!(r100.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    assert!(r100.weights_valid);
}

#[test]
fn coupled_c2_8_matches_exact_summation() {
    let model = SequenceModel::coupled_bernoulli();
    let w = unit_weights();
    let rep = eval_condition_2_8(&model, &w, &opts(100)).unwrap();
    assert_eq!(rep.verdict, Verdict::Converges);
    let oracle = coupled_rect_oracle(100);
    assert!(
        (rep.final_sum() - oracle).abs() <= rep.tail_estimate + 1e-12,
        "mine {} oracle {}",
        rep.final_sum(),
        oracle
    );
}

#[test]
fn independent_embeddings_are_exactly_zero() {
    let model = SequenceModel::independent(Marginal::Uniform01);
    let w = unit_weights();
    let o = opts(64);
    let r22 = eval_condition_2_2(&model, &w, &o).unwrap();
    assert_eq!(r22.final_sum(), 0.0);
    assert_eq!(r22.verdict, Verdict::Converges);
    let r28 = eval_condition_2_8(&model, &w, &o).unwrap();
    assert_eq!(r28.final_sum(), 0.0);
    assert_eq!(r28.verdict, Verdict::Converges);
    let r29 = eval_condition_2_9(&model, &w, 1.5, 1.0, &o).unwrap();
    assert_eq!(r29.final_sum(), 0.0);
    assert_eq!(r29.verdict, Verdict::Converges);
    let r34 = eval_condition_3_4(&model, &o).unwrap();
    assert_eq!(r34.final_sum(), 0.0);
    assert_eq!(r34.verdict, Verdict::Converges);
}

#[test]
fn mz_kernel_printed_value() {
    // At t = e²: 1/(e⁶·4) + 1/(e²·e⁴·8) = 0.375·e⁻⁶.
    let e2 = (2.0f64).exp();
    let want = 0.375 * (-6.0f64).exp();
    let got = mz_kernel(e2);
    assert!(
        ((got - want) / want).abs() < 1e-12,
        "kernel at e²: got {got}, want {want}"
    );
}

#[test]
fn coupled_c2_9_flat_and_convergent() {
    let model = SequenceModel::coupled_bernoulli();
    let w = unit_weights();
    let r100 = eval_condition_2_9(&model, &w, 1.5, 1.0, &opts(100)).unwrap();
    let r50 = eval_condition_2_9(&model, &w, 1.5, 1.0, &opts(50)).unwrap();
    assert_eq!(r100.verdict, Verdict::Converges);
    assert!((r100.final_sum() - r50.final_sum()).abs() < 1e-10);
    // Domain errors.
    assert!(eval_condition_2_9(&model, &w, 2.5, 1.0, &opts(16)).is_err());
    assert!(eval_condition_2_9(&model, &w, 1.5, 0.0, &opts(16)).is_err());
}

#[test]
fn equicorrelated_negative_control_diverges() {
    let model = SequenceModel::new(
        Family::GaussianCopula(Correlation::Equicorrelated { rho: 0.9 }),
        Marginal::StandardNormal,
    )
    .unwrap();
    let rep = eval_condition_2_2(&model, &unit_weights(), &opts(200)).unwrap();
    assert_ne!(rep.verdict, Verdict::Converges, "sums: {:?}", rep.partial_sums);
    // The common factor keeps increments near 0.3 per doubling.
    assert_eq!(rep.verdict, Verdict::Diverges);
}

#[test]
fn second_index_conditions_on_geometric_gap_model() {
    let model = SequenceModel::new(
        Family::GaussianCopula(Correlation::GapGeometric { phi: 0.5 }),
        Marginal::StandardNormal,
    )
    .unwrap()
    .declare_delta_second_index_only(true)
    .unwrap();
    let o = opts(128);
    let r16 = eval_condition_2_16(&model, &o).unwrap();
    assert_eq!(r16.verdict, Verdict::Converges, "sums {:?} tail {}", r16.partial_sums, r16.tail_estimate);
    let r17 = eval_condition_2_17_weak(&model, &o).unwrap();
    assert_eq!(r17.verdict, Verdict::Converges);
    // The weak variant is dominated near the diagonal: both converge here,
    // matching the claimed ordering.
    assert!(r17.final_sum() >= 0.0);

    // The counterexample family must refuse the collapsed evaluators.
    let coupled = SequenceModel::coupled_bernoulli();
    assert!(eval_condition_2_16(&coupled, &o).is_err());
    assert!(eval_condition_2_17_weak(&coupled, &o).is_err());

    // Independent sequences collapse to zero.
    let ind = SequenceModel::independent(Marginal::Uniform01);
    let r = eval_condition_2_16(&ind, &o).unwrap();
    assert_eq!(r.final_sum(), 0.0);
    assert_eq!(r.verdict, Verdict::Converges);
}

#[test]
fn c3_4_positive_cases_and_part_collapse() {
    // Coupled Bernoulli errors: nonnegative support, geometric decay in
    // both indices: certified convergent.
    let coupled = SequenceModel::coupled_bernoulli();
    let rep = eval_condition_3_4(&coupled, &opts(64)).unwrap();
    assert_eq!(
        rep.verdict,
        Verdict::Converges,
        "sums {:?} tail {}",
        rep.partial_sums,
        rep.tail_estimate
    );

    // Product-geometric Gaussian errors: dependence decays in both indices,
    // so the part-split series converges; evaluated empirically.
    let product = SequenceModel::new(
        Family::GaussianCopula(Correlation::ProductGeometric { lambda: 0.5 }),
        Marginal::StandardNormal,
    )
    .unwrap();
    let small = SeriesOptions { k_max: 48, empirical_pairs: 20_000, grid_points: 24, ..SeriesOptions::default() };
    let rep = eval_condition_3_4(&product, &small).unwrap();
    assert_eq!(rep.verdict, Verdict::Converges, "sums {:?} tail {}", rep.partial_sums, rep.tail_estimate);

    // A gap-stationary model keeps a fixed per-gap covariance level, so the
    // part-split series accumulates like a harmonic sum: never certified.
    let gap = SequenceModel::new(
        Family::GaussianCopula(Correlation::GapGeometric { phi: 0.5 }),
        Marginal::StandardNormal,
    )
    .unwrap();
    let rep = eval_condition_3_4(&gap, &small).unwrap();
    assert_ne!(rep.verdict, Verdict::Converges);
}

#[test]
fn implication_weaker_condition_follows_stronger() {
    // Whenever the cubic tail series is certified convergent, the rectangle
    // variant must be certified convergent as well.
    let mut models: Vec<SequenceModel> = Vec::new();
    models.push(SequenceModel::coupled_bernoulli());
    for m in [Marginal::Uniform01, Marginal::StandardNormal, Marginal::centered_pareto(2.5).unwrap()] {
        models.push(SequenceModel::independent(m));
    }
    for theta in [0.0, 0.3, 0.7, 1.0] {
        models.push(SequenceModel::new(Family::FgmCopula { theta }, Marginal::Uniform01).unwrap());
    }
    models.push(SequenceModel::new(Family::FgmCopula { theta: 0.5 }, Marginal::BernoulliHalf).unwrap());
    for phi in [0.3, 0.5, 0.7] {
        models.push(
            SequenceModel::new(
                Family::GaussianCopula(Correlation::GapGeometric { phi }),
                Marginal::StandardNormal,
            )
            .unwrap(),
        );
    }
    for lambda in [0.5, 0.7] {
        models.push(
            SequenceModel::new(
                Family::GaussianCopula(Correlation::ProductGeometric { lambda }),
                Marginal::StandardNormal,
            )
            .unwrap(),
        );
    }
    for rho in [0.25, 0.9] {
        models.push(
            SequenceModel::new(
                Family::GaussianCopula(Correlation::Equicorrelated { rho }),
                Marginal::StandardNormal,
            )
            .unwrap(),
        );
    }
    models.push(
        SequenceModel::new(
            Family::GaussianCopula(Correlation::ProductGeometric { lambda: 0.6 }),
            Marginal::Uniform01,
        )
        .unwrap(),
    );
    models.push(
        SequenceModel::new(
            Family::GaussianCopula(Correlation::GapGeometric { phi: 0.6 }),
            Marginal::Uniform01,
        )
        .unwrap(),
    );
    models.push(SequenceModel::independent(Marginal::PointMass { c: 1.0 }));
    models.push(
        SequenceModel::new(Family::FgmCopula { theta: 0.2 }, Marginal::Uniform01).unwrap(),
    );
    assert!(models.len() >= 20, "have {}", models.len());

    let w = unit_weights();
    let small = SeriesOptions { k_max: 48, empirical_pairs: 10_000, grid_points: 20, ..SeriesOptions::default() };
    let mut convergent_cases = 0;
    for model in &models {
        let strong = eval_condition_2_2(model, &w, &small).unwrap();
        if strong.verdict == Verdict::Converges {
            let weak = eval_condition_2_8(model, &w, &small).unwrap();
            assert_eq!(
                weak.verdict,
                Verdict::Converges,
                "model {} converged under the cubic kernel but not the rectangle one",
                model.describe()
            );
            convergent_cases += 1;
        }
    }
    assert!(convergent_cases >= 5, "implication checked on {convergent_cases} cases only");
}

#[test]
fn evaluators_are_deterministic() {
    let model = SequenceModel::new(
        Family::GaussianCopula(Correlation::Equicorrelated { rho: 0.5 }),
        Marginal::StandardNormal,
    )
    .unwrap();
    let o = SeriesOptions { k_max: 32, empirical_pairs: 10_000, ..SeriesOptions::default() };
    let a = eval_condition_2_2(&model, &unit_weights(), &o).unwrap();
    let b = eval_condition_2_2(&model, &unit_weights(), &o).unwrap();
    assert_eq!(a.partial_sums, b.partial_sums);
    assert_eq!(a.tail_estimate, b.tail_estimate);
    // Different stream policy changes the tabulation.
    let o2 = SeriesOptions { stream: StreamId::new(777, 0), ..o };
    let c = eval_condition_2_2(&model, &unit_weights(), &o2).unwrap();
    assert_ne!(a.partial_sums, c.partial_sums);
}
