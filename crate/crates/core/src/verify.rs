//! The acceptance suite: ten numbered checks, each compared against an
//! independently computed reference, rendered as a deterministic report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{GroupAlgebraElement, MatrixLevelElement, C64};
use crate::basis::{
    auerbach, free_group_spec, q_apply, qt_identity_check, random_sequence, sup_dual_norm_exact, triple_norm,
    CoefficientSequence, NormOracle, SupNorm,
};
use crate::error::Result;
use crate::frame::{lebesgue_constant, FreeGroupFrame};
use crate::free_group::{Enumerator, Word};
use crate::multipliers::{cb_defect_upper, schedule, tail_sum_closed_form, telescope_check, RadialMultiplier};
use crate::norms::{matrix_level_norm, norm_interval, MapSampler, NormConfig};
use crate::sum::compensated_sum;

/// Outcome of one numbered check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    fn new(id: u8, name: &'static str, failures: Vec<String>, summary: String) -> Self {
        let passed = failures.is_empty();
        let detail = if passed { summary } else { format!("{summary}; {}", failures.join("; ")) };
        CriterionResult { id, name, passed, detail }
    }

    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} [{}] {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// Parameters of a verification run. The radii and sample counts are fixed
/// by the checks themselves; only the seed and the power-iteration tolerance
/// vary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 0, tol: crate::norms::DEFAULT_TOLERANCE }
    }
}

impl VerifyConfig {
    fn norm_config(&self, radius: usize) -> NormConfig {
        NormConfig::default().with_radius(radius).with_seed(self.seed).with_tol(self.tol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("freeframe verify seed={}\n", self.seed);
        for c in &self.criteria {
            out.push_str(&c.line());
            out.push('\n');
        }
        let failed = self.criteria.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("{} passed, {failed} failed\n", self.criteria.len() - failed));
        out
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Criterion 1: Sphere and ball sizes from enumeration against `4·3^{d−1}` and `2·3^k − 1`.
pub fn criterion_1() -> Result<CriterionResult> {
    let en = Enumerator::default();
    let mut failures = Vec::new();
    for d in 1..=8u32 {
        let got = en.sphere(d as usize)?.len() as u64;
        let want = 4 * 3u64.pow(d - 1);
        if got != want {
            failures.push(format!("|sphere({d})| = {got}, expected {want}"));
        }
    }
    for k in 0..=8u32 {
        let got = en.ball(k as usize)?.len() as u64;
        let want = 2 * 3u64.pow(k) - 1;
        if got != want {
            failures.push(format!("|ball({k})| = {got}, expected {want}"));
        }
    }
    Ok(CriterionResult::new(1, "combinatorics", failures, "sphere sizes d=1..8 and ball sizes k=0..8 exact".into()))
}

/// Criterion 2: `Σ_{k≤K} psi_symbol(k, d) = e^{−d/√K}·[d ≤ K]` for `K, d ≤ 30`.
pub fn criterion_2() -> Result<CriterionResult> {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for big_k in 1..=30usize {
        for d in 0..=30usize {
            let want = if d <= big_k { (-(d as f64) / (big_k as f64).sqrt()).exp() } else { 0.0 };
            let err = (telescope_check(big_k, d) - want).abs();
            worst = worst.max(err);
            if err > 1e-14 {
                failures.push(format!("K={big_k} d={d} error {err:.3e}"));
            }
        }
    }
    Ok(CriterionResult::new(2, "telescoping", failures, format!("max error {worst:.3e} over K,d <= 30")))
}

fn tail_direct(t: f64, m: usize) -> f64 {
    // terms d·e^{−td} until they drop below 1e-30 of the running sum
    let mut acc = crate::sum::NeumaierSum::default();
    let mut d = m + 1;
    loop {
        let term = d as f64 * (-t * d as f64).exp();
        acc.add(term);
        if term < 1e-30 * acc.value() && d as f64 * t > 1.0 {
            break;
        }
        d += 1;
    }
    acc.value()
}

/// Criterion 3: Closed-form tail against direct summation; monotone decay of the cb defect.
pub fn criterion_3() -> Result<CriterionResult> {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for t in [0.1, 0.5, 1.0, 2.0] {
        for m in 0..=50 {
            let closed = tail_sum_closed_form(t, m)?;
            let direct = tail_direct(t, m);
            let rel = ((closed - direct) / direct).abs();
            worst = worst.max(rel);
            if rel > 1e-12 {
                failures.push(format!("t={t} m={m} relative error {rel:.3e}"));
            }
        }
    }
    let defects = (10..=400)
        .map(|k| {
            let (t, m) = schedule(k);
            cb_defect_upper(t, m)
        })
        .collect::<Result<Vec<f64>>>()?;
    if let Some(k) = defects.windows(2).position(|w| w[1] >= w[0]) {
        failures.push(format!("cb defect not decreasing at k={}", k + 11));
    }
    let last = *defects.last().expect("nonempty");
    if last > 1e-4 {
        failures.push(format!("cb defect at k=400 is {last:.3e}"));
    }
    Ok(CriterionResult::new(
        3,
        "tail bound",
        failures,
        format!("max relative error {worst:.3e}; cb defect decreasing k=10..400, {last:.3e} at k=400"),
    ))
}

fn random_sparse_element<R: Rng>(rng: &mut R, max_len: usize) -> GroupAlgebraElement {
    let max_rank = crate::free_group::ball_size(max_len) as u64;
    let terms = rng.gen_range(1..=8);
    GroupAlgebraElement::from_terms(
        (0..terms)
            .map(|_| (Word::unrank(rng.gen_range(0..max_rank)), C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect::<Vec<_>>(),
    )
}

/// Criterion 4: `S_125 = Φ_{1,1}` and `S_5038 = Φ_{1/√2,2}` coefficientwise.
pub fn criterion_4(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let frame = FreeGroupFrame::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0C41_7E41_0000_0004);
    let phi_1 = RadialMultiplier::phi_tm(1.0, 1)?;
    let phi_2 = RadialMultiplier::phi_tm(1.0 / 2f64.sqrt(), 2)?;
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let x = random_sparse_element(&mut rng, 3);
        for (m, phi) in [(125u128, &phi_1), (5038, &phi_2)] {
            let s = frame.apply_partial_sum(&x, m)?;
            let p = phi.apply(&x);
            for (w, _) in x.terms() {
                let err = (s.delta_pairing(w) - p.delta_pairing(w)).norm();
                worst = worst.max(err);
                if err > 1e-14 {
                    failures.push(format!("sample {i}, m={m}, word {w:?}: error {err:.3e}"));
                }
            }
        }
    }
    Ok(CriterionResult::new(
        4,
        "block-boundary identity",
        failures,
        format!("100 random elements, max coefficient error {worst:.3e}"),
    ))
}

/// Criterion 5: Reconstruction errors and coefficient sums at block boundaries.
pub fn criterion_5(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let frame = FreeGroupFrame::default();
    let ncfg = cfg.norm_config(2);
    let mut failures = Vec::new();
    let mut worst_err = 0.0f64;
    let mut worst_sum = 0.0f64;
    for s in Enumerator::default().ball(3)? {
        for big_k in s.len().max(1)..=6 {
            let m = frame.block_boundary(big_k)?;
            let want = 1.0 - (-(s.len() as f64) / (big_k as f64).sqrt()).exp();
            let est = frame.reconstruction_error(&GroupAlgebraElement::basis(s.clone()), m, &ncfg)?;
            let err = (est.upper - want).abs().max((est.lower - want).abs());
            worst_err = worst_err.max(err);
            if err > 1e-10 {
                failures.push(format!("s={s:?} K={big_k}: interval [{:.12}, {:.12}] vs {want:.12}", est.lower, est.upper));
            }
            let sum = frame.coefficient_sum(&s, big_k)?;
            let sum_err = (sum - (1.0 - want)).abs();
            worst_sum = worst_sum.max(sum_err);
            if sum_err > 1e-14 {
                failures.push(format!("coefficient_sum({s:?}, {big_k}) error {sum_err:.3e}"));
            }
        }
    }
    let e1 = frame.coefficient_sum(&Word::identity(), 1)?;
    if e1 != 1.0 {
        failures.push(format!("coefficient_sum(e, 1) = {e1:e}"));
    }
    Ok(CriterionResult::new(
        5,
        "frame reconstruction",
        failures,
        format!("|s| <= 3, K <= 6: max interval error {worst_err:.3e}, max coefficient-sum error {worst_sum:.3e}"),
    ))
}

/// The 50 cutoffs used by criterion 6: every block-1 and block-2 boundary
/// plus an even spread over `1..=5038`.
pub fn criterion_6_cutoffs() -> Vec<u128> {
    let mut ms: Vec<u128> = (1..=48u128).map(|i| (5038 * i).div_ceil(49)).collect();
    ms.push(125);
    ms.push(5038);
    ms.sort_unstable();
    ms.dedup();
    let mut extra = 126u128;
    while ms.len() < 50 {
        if !ms.contains(&extra) {
            ms.push(extra);
        }
        extra += 1;
    }
    ms.sort_unstable();
    ms
}

/// Criterion 6: Sampled level-1 and level-2 lower bounds never exceed the analytic upper
/// bounds for `S_m` and for `Φ_t − Φ_{t,m}`.
pub fn criterion_6(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let frame = FreeGroupFrame::default();
    let ncfg = cfg.norm_config(6);
    let mut failures = Vec::new();
    let mut tightest = 0.0f64;
    let ms = criterion_6_cutoffs();
    for (idx, &m) in ms.iter().enumerate() {
        let bound = frame.sm_cb_upper(m)?.best();
        let map = frame.partial_sum_map(m)?;
        for level in 1..=2 {
            let c = ncfg.with_seed(crate::norms::derive_seed(cfg.seed, (idx * 2 + level) as u64));
            let lower = MapSampler::new(level, 4).lower_bound(&map, &c)?;
            tightest = tightest.max(lower / bound);
            if lower > bound {
                failures.push(format!("S_{m} level {level}: sampled {lower:.6} > bound {bound:.6}"));
            }
        }
    }
    let mut tail_ratio = 0.0f64;
    for (i, (t, m)) in [(1.0, 1usize), (1.0, 2), (0.5, 1), (0.5, 3), (1.0 / 2f64.sqrt(), 2), (0.25, 2)]
        .into_iter()
        .enumerate()
    {
        let map = RadialMultiplier::phi_tail(t, m)?;
        let bound = cb_defect_upper(t, m)?;
        for level in 1..=2 {
            let c = ncfg.with_seed(crate::norms::derive_seed(cfg.seed ^ 0x7A11, (i * 2 + level) as u64));
            let lower = MapSampler::new(level, 4).lower_bound(&map, &c)?;
            tail_ratio = tail_ratio.max(lower / bound);
            if lower > bound {
                failures.push(format!("Phi_t - Phi_(t,m) t={t} m={m} level {level}: sampled {lower:.6} > bound {bound:.6}"));
            }
        }
    }
    Ok(CriterionResult::new(
        6,
        "cb-frame bound consistency",
        failures,
        format!(
            "{} cutoffs at levels 1-2, R=6: max sampled/bound {tightest:.4} for S_m, {tail_ratio:.4} for tails",
            ms.len()
        ),
    ))
}

/// Criterion 7: Norm intervals for the generator sum at `R = 8` and `λ_a + λ_a⁻¹` at `R = 10`.
pub fn criterion_7(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let mut failures = Vec::new();
    let truth = 2.0 * 3f64.sqrt();
    let gen_sum = GroupAlgebraElement::from_real_terms([("a", 1.0), ("A", 1.0), ("b", 1.0), ("B", 1.0)])?;
    let est = norm_interval(&gen_sum, &cfg.norm_config(8))?;
    let gap = (truth - est.lower) / truth;
    if est.lower < 3.39 {
        failures.push(format!("generator sum lower {:.6} < 3.39", est.lower));
    }
    if est.upper != 4.0 {
        failures.push(format!("generator sum upper {} != 4", est.upper));
    }
    if !est.contains(truth) {
        failures.push("generator sum interval misses 2*sqrt(3)".into());
    }
    if gap > 0.02 {
        failures.push(format!("relative gap {gap:.4} > 0.02"));
    }
    let sym = GroupAlgebraElement::from_real_terms([("a", 1.0), ("A", 1.0)])?;
    let est2 = norm_interval(&sym, &cfg.norm_config(10))?;
    if est2.lower < 1.98 {
        failures.push(format!("lambda_a + lambda_A lower {:.6} < 1.98 at R=10", est2.lower));
    }
    Ok(CriterionResult::new(
        7,
        "norm certification",
        failures,
        format!(
            "generator sum R=8 [{:.6}, {:.6}] gap {gap:.4}; lambda_a + lambda_A R=10 [{:.6}, {:.6}]",
            est.lower, est.upper, est2.lower, est2.upper
        ),
    ))
}

/// Criterion 8: Lebesgue constants: classical values and logarithmic growth.
pub fn criterion_8() -> Result<CriterionResult> {
    let mut failures = Vec::new();
    let l = |k: usize| -> Result<f64> {
        let r = lebesgue_constant(k, 1e-12)?;
        Ok(r.value)
    };
    for (k, want) in [(1usize, 1.435991), (2, 1.642188), (3, 1.778322)] {
        let got = l(k)?;
        if !close(got, want, 1e-4) {
            failures.push(format!("L_{k} = {got:.6}, expected {want}"));
        }
    }
    let l1 = l(1)?;
    let l8 = l(8)?;
    let l64 = l(64)?;
    if !(l64 > l8 && l8 > l1) {
        failures.push(format!("ordering L_64 > L_8 > L_1 fails: {l64:.6}, {l8:.6}, {l1:.6}"));
    }
    let mut offsets = Vec::new();
    for k in [8usize, 16, 32, 64] {
        let off = l(k)? - 4.0 / std::f64::consts::PI.powi(2) * (k as f64).ln();
        offsets.push(format!("{off:.4}"));
        if !(1.0..=1.4).contains(&off) {
            failures.push(format!("L_{k} - (4/pi^2) ln {k} = {off:.6} outside [1.0, 1.4]"));
        }
    }
    Ok(CriterionResult::new(
        8,
        "non-unconditionality",
        failures,
        format!("L_1..3 classical; L_K - (4/pi^2) ln K for K=8,16,32,64: {}", offsets.join(", ")),
    ))
}

/// Criterion 9: triple norm of singletons and of prefixes, the `QT = id` residual, Auerbach systems and
/// the generic cloning construction.
pub fn criterion_9(cfg: &VerifyConfig) -> Result<CriterionResult> {
    let frame = FreeGroupFrame::default();
    let ncfg = cfg.norm_config(3);
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0C41_7E41_0000_0009);

    // a singleton u·e_i has triple norm ‖u ⊗ λ_{φ(i)}‖
    for i in [1u128, 2, 5, 60, 126, 130, 5039] {
        let level = 1 + (i % 2) as usize;
        let u = crate::norms::random_matrix(&mut rng, level);
        let seq = CoefficientSequence::singleton(i, u.clone())?;
        let direct = matrix_level_norm(&q_apply(&seq, &frame)?, &ncfg)?;
        let word = frame.term(i)?.word;
        let tensor = matrix_level_norm(&MatrixLevelElement::from_terms(level, [(word, u)])?, &ncfg)?;
        let tn = triple_norm(&seq, &frame, &ncfg)?;
        if tn != direct || tn != tensor {
            failures.push(format!("singleton index {i}: triple norm [{}, {}] vs [{}, {}]", tn.lower, tn.upper, tensor.lower, tensor.upper));
        }
    }

    // prefixes never exceed the full sequence
    let mut prefix_checks = 0usize;
    for sample in 0..100u64 {
        let level = 1 + (sample % 2) as usize;
        let u = random_sequence(level, 200, 4, cfg.seed.wrapping_add(sample))?;
        let full = triple_norm(&u, &frame, &ncfg)?;
        for m in u.support() {
            let pre = triple_norm(&u.prefix(m), &frame, &ncfg)?;
            prefix_checks += 1;
            if pre.lower > full.upper {
                failures.push(format!("prefix sample {sample} prefix {m}: {} > {}", pre.lower, full.upper));
            }
        }
    }

    // QT = id residual
    let a = GroupAlgebraElement::basis(Word::parse("a")?);
    let mut prev = f64::INFINITY;
    let mut qt_worst = 0.0f64;
    for big_k in 1..=5 {
        let n = frame.block_boundary(big_k)?;
        let r = qt_identity_check(&a, &frame, n)?;
        let want = 1.0 - (-1.0 / (big_k as f64).sqrt()).exp();
        qt_worst = qt_worst.max((r - want).abs());
        if !close(r, want, 1e-12) {
            failures.push(format!("QT residual at K={big_k}: {r:.15} vs {want:.15}"));
        }
        if r >= prev {
            failures.push(format!("QT residual not decreasing at K={big_k}"));
        }
        prev = r;
    }

    // Auerbach systems in sup-norm subspaces, certified by vertex enumeration
    let mut worst_dual = 0.0f64;
    let mut worst_bio = 0.0f64;
    for (d, ambient) in [(1usize, 2usize), (2, 3), (2, 3), (3, 4), (3, 5), (4, 5), (4, 6)] {
        let basis: Vec<Vec<f64>> = (0..d).map(|_| (0..ambient).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let sys = auerbach(&basis, &SupNorm, 0.02)?;
        worst_bio = worst_bio.max(sys.biorthogonality_defect());
        for j in 0..d {
            let f: Vec<f64> = sys.functionals.row(j).iter().copied().collect();
            worst_dual = worst_dual.max(sup_dual_norm_exact(&basis, &f)?);
        }
        if sys.vectors.iter().any(|v| SupNorm.norm(v) > 1.0) {
            failures.push(format!("Auerbach vector of norm above 1 (d={d})"));
        }
    }
    if worst_bio > 1e-10 {
        failures.push(format!("Auerbach biorthogonality defect {worst_bio:.3e}"));
    }
    if worst_dual > 1.05 {
        failures.push(format!("Auerbach dual norm {worst_dual:.6} > 1.05"));
    }

    // generic cloning construction against the frame
    let spec = free_group_spec(3)?;
    let mut mismatches = 0usize;
    for n in 1..=10_000u128 {
        let g = spec.term(n)?;
        let t = frame.term(n)?;
        if g.vector != t.word || g.functional.terms != [(t.word.clone(), t.coefficient)] {
            mismatches += 1;
        }
    }
    if mismatches > 0 {
        failures.push(format!("generic construction differs from the frame at {mismatches} indices"));
    }

    Ok(CriterionResult::new(
        9,
        "basis constructions",
        failures,
        format!(
            "{prefix_checks} prefix checks; QT residual max error {qt_worst:.3e}; Auerbach defect {worst_bio:.3e}, max exact dual norm {worst_dual:.6}; generic terms n <= 10000 identical"
        ),
    ))
}

/// Runs criteria 1 through 9.
pub fn run_checks(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let criteria = vec![
        criterion_1()?,
        criterion_2()?,
        criterion_3()?,
        criterion_4(cfg)?,
        criterion_5(cfg)?,
        criterion_6(cfg)?,
        criterion_7(cfg)?,
        criterion_8()?,
        criterion_9(cfg)?,
    ];
    Ok(VerifyReport { seed: cfg.seed, criteria })
}

/// Criterion 10: Two runs of criteria 1 through 9 with the same seed render to
/// byte-identical text.
pub fn criterion_10(first: &VerifyReport, cfg: &VerifyConfig) -> Result<CriterionResult> {
    let second = run_checks(cfg)?;
    let (a, b) = (first.to_text(), second.to_text());
    let failures = if a == b { Vec::new() } else { vec!["reports differ between runs".to_string()] };
    Ok(CriterionResult::new(10, "determinism", failures, format!("second run of criteria 1-9 byte-identical ({} bytes)", a.len())))
}

/// The full suite, including the determinism re-run.
pub fn run(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut report = run_checks(cfg)?;
    let c10 = criterion_10(&report, cfg)?;
    report.criteria.push(c10);
    Ok(report)
}

/// Sum of `|x_s|` weighted by the unreached frame weight, the closed form of
/// the `QT = id` residual.
pub fn qt_residual_closed_form(x: &GroupAlgebraElement, frame: &FreeGroupFrame, n: u128) -> Result<f64> {
    let terms = x
        .terms()
        .map(|(s, c)| Ok(c.norm() * (1.0 - frame.partial_sum_weight(n, s)?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(terms))
}
