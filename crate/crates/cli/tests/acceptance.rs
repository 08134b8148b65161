//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report reads top to bottom. The
//! process fails if any criterion fails other than the two whose printed
//! reference values cannot be reproduced (3b, 4b), or if one of those two
//! unexpectedly passes.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use squeezelab::runs::truncate_sectors;
use squeezelab_core::dynamics::{adiabatic_fidelity, evolve_rwa, rwa_fidelity, BlockPropagator};
use squeezelab_core::entanglement::entanglement_entropy;
use squeezelab_core::fock::{sector_split, FockBasis, QuantumState};
use squeezelab_core::hamiltonians::{build_rwa, effective_blocks, eigenvalue, EffectiveParams, RamanParams};
use squeezelab_core::revivals::{
    coefficient_ratio, decompose, evolve_to_tau, fidelity, gauss_coefficients, initial_state, resonant_params,
    target_superposition, Convention, Representation, RevivalSpec,
};
use squeezelab_core::states::{
    check_rep_relations, squeezed_vacuum, two_mode_squeezed_vacuum, BasisChange, SqueezingParam,
};

type Res<T> = Result<T, Box<dyn std::error::Error>>;

const CUTOFF: usize = 48;
const FIDELITY_TOL: f64 = 1e-8;
const EXPECTED_FAILURES: [&str; 2] = ["3b", "4b"];

struct Line {
    id: &'static str,
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Default)]
struct Suite {
    lines: Vec<Line>,
    /// Worst norm and sector-weight drift seen by criteria 4-8.
    norm_drift: f64,
    sector_drift: f64,
}

impl Suite {
    fn record(&mut self, id: &'static str, name: &'static str, passed: bool, detail: String) {
        let tag = if passed { "PASS" } else { "FAIL" };
        let note = if EXPECTED_FAILURES.contains(&id) { " (known unattainable)" } else { "" };
        println!("{tag}  {id:<3} {name}: {detail}{note}");
        self.lines.push(Line { id, name, passed, detail });
    }

    fn errored(&mut self, id: &'static str, name: &'static str, err: Box<dyn std::error::Error>) {
        self.record(id, name, false, format!("error: {err}"));
    }

    fn track(&mut self, before: &QuantumState, after: &QuantumState) -> Res<()> {
        self.norm_drift = self.norm_drift.max((after.norm() - before.norm()).abs());
        self.sector_drift = self.sector_drift.max(sector_drift(before, after)?);
        Ok(())
    }
}

fn sector_weights(state: &QuantumState) -> Res<BTreeMap<usize, f64>> {
    Ok(sector_split(state)?.weights().into_iter().collect())
}

fn sector_drift(a: &QuantumState, b: &QuantumState) -> Res<f64> {
    let (wa, wb) = (sector_weights(a)?, sector_weights(b)?);
    let keys: std::collections::BTreeSet<_> = wa.keys().chain(wb.keys()).copied().collect();
    Ok(keys.into_iter().map(|k| (wa.get(&k).unwrap_or(&0.0) - wb.get(&k).unwrap_or(&0.0)).abs()).fold(0.0, f64::max))
}

fn xi() -> SqueezingParam {
    SqueezingParam::new(0.5, 0.0).unwrap()
}

fn pair_basis() -> Res<Arc<FockBasis>> {
    Ok(FockBasis::full(2, CUTOFF)?)
}

/// `S2(z)|0,0)` in the normal-mode representation.
fn ladder(z: SqueezingParam) -> Res<QuantumState> {
    Ok(two_mode_squeezed_vacuum(z, &pair_basis()?)?)
}

/// `|a, b>` built from single-mode squeezed states.
fn product(a: SqueezingParam, b: SqueezingParam) -> Res<QuantumState> {
    let single = FockBasis::full(1, CUTOFF)?;
    Ok(QuantumState::product(&squeezed_vacuum(a, &single)?, &squeezed_vacuum(b, &single)?)?)
}

fn combine(terms: &[(Complex64, QuantumState)]) -> Res<QuantumState> {
    let mut total = QuantumState::zeros(terms[0].1.basis().clone());
    for (c, s) in terms {
        total = total.add(&s.scaled(*c))?;
    }
    Ok(total.normalized()?)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(|-xi) - i|xi)) / sqrt 2`.
fn half_period_target() -> Res<QuantumState> {
    let x = xi();
    combine(&[(c(1.0, 0.0), ladder(x.negated())?), (c(0.0, -1.0), ladder(x)?)])
}

/// `(|i xi, -i xi> - i|-i xi, i xi>) / sqrt 2`.
fn half_period_target_bare() -> Res<QuantumState> {
    let (p, m) = (xi().rotated(FRAC_PI_2), xi().rotated(-FRAC_PI_2));
    combine(&[(c(1.0, 0.0), product(p, m)?), (c(0.0, -1.0), product(m, p)?)])
}

/// `-(1/2)e^{i pi/4}(|xi) - |-xi)) + (1/2)(|i xi) + |-i xi))`, as printed.
fn quarter_period_printed() -> Res<QuantumState> {
    let x = xi();
    let a = -0.5 * Complex64::from_polar(1.0, FRAC_PI_4);
    combine(&[
        (a, ladder(x)?),
        (-a, ladder(x.negated())?),
        (c(0.5, 0.0), ladder(x.rotated(FRAC_PI_2))?),
        (c(0.5, 0.0), ladder(x.rotated(-FRAC_PI_2))?),
    ])
}

/// The bare-mode counterpart of [`quarter_period_printed`], as printed.
fn quarter_period_printed_bare() -> Res<QuantumState> {
    let x = xi();
    let (p, m) = (x.rotated(FRAC_PI_2), x.rotated(-FRAC_PI_2));
    let a = -0.5 * Complex64::from_polar(1.0, FRAC_PI_4);
    combine(&[
        (a, product(m, p)?),
        (-a, product(p, m)?),
        (c(0.5, 0.0), product(x, x.negated())?),
        (c(0.5, 0.0), product(x.negated(), x)?),
    ])
}

fn spectrum(suite: &mut Suite) -> Res<()> {
    let basis = FockBasis::full(2, 20)?;
    let w = BasisChange::new(&basis)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut worst_rwa, mut worst_rotated) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let p = EffectiveParams::new(rng.gen_range(-2.0..2.0), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))?;
        let rwa = build_rwa(&p, &basis)?;
        let rotated = w.conjugate(&effective_blocks(&p, &basis)?)?.to_dense();
        for (i, occ) in basis.labels().iter().enumerate() {
            if occ[0] + occ[1] > 20 {
                continue;
            }
            let e = eigenvalue(occ[0], occ[1], &p);
            worst_rwa = worst_rwa.max((rwa.matrix()[(i, i)] - e).norm());
            worst_rotated = worst_rotated.max((rotated.matrix()[(i, i)] - e).norm());
        }
    }
    suite.record(
        "1",
        "rotating-wave diagonal vs level formula",
        worst_rwa <= 1e-10,
        format!("max diff {worst_rwa:.3e} over 100 draws"),
    );
    suite.record(
        "1b",
        "rotated effective Hamiltonian diagonal",
        worst_rotated <= 1e-10,
        format!("max diff {worst_rotated:.3e}"),
    );
    Ok(())
}

fn rep_relations(suite: &mut Suite) -> Res<()> {
    let mut worst = 1.0f64;
    for r in [0.25, 0.5, 0.75] {
        worst = worst.min(check_rep_relations(SqueezingParam::new(r, 0.0)?, CUTOFF)?.min());
    }
    suite.record("2", "representation relations", worst >= 1.0 - FIDELITY_TOL, format!("min fidelity {worst:.15}"));
    Ok(())
}

fn max_deviation(got: &[Complex64], want: &[Complex64]) -> f64 {
    got.iter().zip(want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

fn gauss(suite: &mut Suite) -> Res<()> {
    let e = |phase: f64, scale: f64| Complex64::from_polar(scale, phase);
    let zero = c(0.0, 0.0);

    let two = gauss_coefficients(2, 1)?;
    let want = [zero, e(FRAC_PI_4, FRAC_1_SQRT_2), zero, e(-FRAC_PI_4, FRAC_1_SQRT_2)];
    let dev = max_deviation(&two, &want);
    suite.record("3a", "N = 2 coefficients", dev <= 1e-12, format!("max deviation {dev:.3e}"));

    let four = gauss_coefficients(4, 1)?;
    let half = c(0.5, 0.0);
    let want = [half, zero, e(FRAC_PI_4, 0.5), zero, half, zero, -e(FRAC_PI_4, 0.5), zero];
    let dev = max_deviation(&four, &want);
    let support: Vec<usize> = (0..8).filter(|&r| four[r].norm() > 1e-12).collect();
    suite.record(
        "3b",
        "N = 4 coefficients against the printed values",
        dev <= 1e-12,
        format!("max deviation {dev:.3e}; computed weight sits on r = {support:?}"),
    );

    let mut worst = 0.0f64;
    let mut pairs = 0;
    for n in 1..=12u64 {
        for m in 1..=n {
            let Ok(cs) = gauss_coefficients(n, m) else { continue };
            pairs += 1;
            worst = worst.max((cs.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs());
        }
    }
    suite.record(
        "3c",
        "Parseval for coprime N <= 12",
        worst <= 1e-12,
        format!("{pairs} pairs, max |sum - 1| {worst:.3e}"),
    );
    Ok(())
}

struct RevivalFidelities {
    half: f64,
    quarter_printed: f64,
    quarter: f64,
}

fn revival_fidelities(suite: &mut Suite, p: &EffectiveParams, bare_checks: bool) -> Res<RevivalFidelities> {
    let basis = pair_basis()?;
    let start = initial_state(xi(), &basis)?;
    let w = BasisChange::new(&basis)?;

    let at_half = evolve_to_tau(p, &start, PI)?;
    let at_quarter = evolve_to_tau(p, &start, FRAC_PI_2)?;
    suite.track(&start, &at_half)?;
    suite.track(&start, &at_quarter)?;

    let quarter_spec = RevivalSpec::new(4, 1, xi())?;
    let out = RevivalFidelities {
        half: fidelity(&at_half, &half_period_target()?)?,
        quarter_printed: fidelity(&at_quarter, &quarter_period_printed()?)?,
        quarter: fidelity(&at_quarter, &target_superposition(&quarter_spec, &basis, Representation::Normal)?)?,
    };
    if !bare_checks {
        return Ok(out);
    }

    suite.record(
        "4a",
        "tau = pi against the two-branch target",
        out.half >= 1.0 - FIDELITY_TOL,
        format!("fidelity {:.15}", out.half),
    );
    suite.record(
        "4b",
        "tau = pi/2 against the printed four-branch target",
        out.quarter_printed >= 1.0 - FIDELITY_TOL,
        format!("fidelity {:.15}", out.quarter_printed),
    );
    suite.record(
        "4c",
        "tau = pi/2 against the Gauss-sum superposition",
        out.quarter >= 1.0 - FIDELITY_TOL,
        format!("fidelity {:.15}", out.quarter),
    );

    let half_bare = fidelity(&w.inverse(&at_half)?, &half_period_target_bare()?)?;
    let quarter_bare = w.inverse(&at_quarter)?;
    let printed_bare = fidelity(&quarter_bare, &quarter_period_printed_bare()?)?;
    let gauss_bare = fidelity(&quarter_bare, &target_superposition(&quarter_spec, &basis, Representation::Bare)?)?;
    let gaps =
        [(half_bare - out.half).abs(), (printed_bare - out.quarter_printed).abs(), (gauss_bare - out.quarter).abs()];
    suite.record("4d", "bare-mode fidelity at tau = pi matches", gaps[0] <= 1e-10, format!("|diff| {:.3e}", gaps[0]));
    suite.record(
        "4e",
        "bare-mode fidelities at tau = pi/2 match",
        gaps[1].max(gaps[2]) <= 1e-10,
        format!("|diff| printed {:.3e}, Gauss-sum {:.3e}", gaps[1], gaps[2]),
    );
    Ok(out)
}

fn revivals(suite: &mut Suite) -> Res<()> {
    let q = 0.1;
    let derived = resonant_params(q, Convention::Derived)?;
    let literal = resonant_params(q, Convention::PaperLiteral)?;
    let d = revival_fidelities(suite, &derived, true)?;
    let l = revival_fidelities(suite, &literal, false)?;

    let ratios = format!(
        "coefficient ratio {:.5} (literal, 22/7) vs {:.5} (derived, 3)",
        coefficient_ratio(&literal),
        coefficient_ratio(&derived)
    );
    suite.record("5", "literal couplings: ratio discrepancy reported", true, ratios);
    suite.record(
        "5a",
        "literal couplings lower at tau = pi",
        l.half < d.half,
        format!("{:.12} < {:.12}", l.half, d.half),
    );
    suite.record(
        "5b",
        "literal couplings lower at tau = pi/2",
        l.quarter < d.quarter,
        format!("{:.12} < {:.12}", l.quarter, d.quarter),
    );
    println!(
        "          printed four-branch target: literal {:.12}, derived {:.12}",
        l.quarter_printed, d.quarter_printed
    );

    let basis = pair_basis()?;
    let start = initial_state(xi(), &basis)?;
    let back = evolve_to_tau(&derived, &start, TAU)?;
    suite.track(&start, &back)?;
    let f = fidelity(&back, &start)?;
    suite.record("6", "full revival at tau = 2 pi", f >= 1.0 - FIDELITY_TOL, format!("fidelity {f:.15}"));
    Ok(())
}

fn rwa_trend(suite: &mut Suite) -> Res<()> {
    let basis = pair_basis()?;
    let psi0 = BasisChange::new(&basis)?.inverse(&initial_state(xi(), &basis)?)?;
    let g: f64 = -1.0;
    let t = 1.0 / g.abs();
    let mut infidelities = Vec::new();
    for q in [1e-1, 1e-2, 1e-3] {
        let p = EffectiveParams::new(g, q, q / 2.0)?;
        infidelities.push(1.0 - rwa_fidelity(&p, &psi0, t)?);
        let exact = BlockPropagator::new(&effective_blocks(&p, &basis)?)?.evolve(&psi0, t)?;
        suite.track(&psi0, &exact)?;
    }
    let decreasing = infidelities.windows(2).all(|w| w[1] < w[0]);
    suite.record(
        "7",
        "rotating-wave infidelity falls with q/|g|",
        decreasing,
        format!("{:.3e}, {:.3e}, {:.3e}", infidelities[0], infidelities[1], infidelities[2]),
    );
    Ok(())
}

fn adiabatic(suite: &mut Suite) -> Res<()> {
    let basis = FockBasis::full(2, 24)?;
    let single = FockBasis::full(1, 24)?;
    let x = xi();
    let product = QuantumState::product(&squeezed_vacuum(x, &single)?, &squeezed_vacuum(x.negated(), &single)?)?;
    debug_assert_eq!(product.basis(), &basis);
    let (psi0, _) = truncate_sectors(&product, 6)?;

    let couplings = c(1.0, 0.0);
    let run = |ratio: f64| {
        let mut p = RamanParams::resonant(couplings, couplings, ratio);
        p.lambda1 = 4e-4;
        p.lambda3 = 4e-4;
        p.lambda13 = 2e-4;
        // effective tunnelling |g1||g2|/delta, evolved to |g| t = 1
        let t = ratio;
        adiabatic_fidelity(&p, &psi0, t, 40)
    };
    let near = run(20.0)?;
    let far = run(200.0)?;
    for r in [&near, &far] {
        suite.norm_drift = suite.norm_drift.max(r.norm_drift);
        suite.sector_drift = suite.sector_drift.max(r.sector_drift);
    }
    suite.record(
        "8",
        "adiabatic elimination at delta/|g1| = 200",
        far.max_mid_population <= 1e-3 && far.fidelity >= 0.99,
        format!("max <n2> {:.3e}, fidelity {:.9}", far.max_mid_population, far.fidelity),
    );
    suite.record(
        "8b",
        "both metrics improve over delta/|g1| = 20",
        far.max_mid_population < near.max_mid_population && far.fidelity > near.fidelity,
        format!(
            "<n2> {:.3e} -> {:.3e}, fidelity {:.9} -> {:.9}",
            near.max_mid_population, far.max_mid_population, near.fidelity, far.fidelity
        ),
    );
    Ok(())
}

fn entropy(suite: &mut Suite) -> Res<()> {
    let basis = pair_basis()?;
    let mut worst = 0.0f64;
    for s in [0.25, 0.5, 1.0f64] {
        let (c2, s2) = (s.cosh().powi(2), s.sinh().powi(2));
        let oracle = c2 * c2.ln() - s2 * s2.ln();
        let got = entanglement_entropy(&two_mode_squeezed_vacuum(SqueezingParam::new(s, 0.0)?, &basis)?)?;
        worst = worst.max((got - oracle).abs());
    }
    suite.record("10", "two-mode squeezed entropy oracle", worst <= 1e-8, format!("max |diff| {worst:.3e}"));

    let p = resonant_params(0.1, Convention::Derived)?;
    let start = initial_state(xi(), &basis)?;
    let s0 = entanglement_entropy(&start)?;
    let mut drift = 0.0f64;
    for t in [0.3, 1.7, 12.0] {
        drift = drift.max((entanglement_entropy(&evolve_rwa(&p, &start, t)?)? - s0).abs());
    }
    suite.record(
        "10b",
        "entropy invariant under rotating-wave evolution",
        drift <= 1e-9,
        format!("max drift {drift:.3e}"),
    );
    Ok(())
}

fn round_trip(suite: &mut Suite) -> Res<()> {
    let basis = pair_basis()?;
    let mut worst_coeff = 0.0f64;
    let mut worst_residual = 0.0f64;
    for (n, m) in [(2, 1), (3, 1), (4, 1), (4, 3)] {
        let spec = RevivalSpec::new(n, m, xi())?;
        let state = target_superposition(&spec, &basis, Representation::Normal)?;
        let fit = decompose(&state, n, xi())?;
        worst_coeff = worst_coeff.max(max_deviation(&fit.coefficients, &gauss_coefficients(n, m)?));
        worst_residual = worst_residual.max(fit.residual);
    }
    suite.record(
        "11",
        "decomposition round trip",
        worst_coeff <= 1e-8 && worst_residual <= 1e-8,
        format!("max coefficient error {worst_coeff:.3e}, max residual {worst_residual:.3e}"),
    );
    Ok(())
}

fn csv_bytes(dir: &Path) -> Res<BTreeMap<String, Vec<u8>>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            out.insert(path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path)?);
        }
    }
    Ok(out)
}

fn determinism(suite: &mut Suite) -> Res<()> {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir()?;
    let mut mismatched = Vec::new();
    let mut files = 0;
    for name in ["spectrum", "evolve", "revival", "adiabatic", "validity"] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = tmp.path().join(format!("{name}-{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_squeezelab"))
                .args([name, "--quiet", "--config"])
                .arg(configs.join(format!("{name}.json")))
                .arg("--out")
                .arg(&out)
                .status()?;
            if !status.success() {
                return Err(format!("{name} exited with {status}").into());
            }
            outputs.push(csv_bytes(&out)?);
        }
        files += outputs[0].len();
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            mismatched.push(name);
        }
    }
    suite.record(
        "12",
        "CLI output is byte-identical across runs",
        mismatched.is_empty(),
        if mismatched.is_empty() { format!("{files} CSV files compared") } else { format!("differs: {mismatched:?}") },
    );
    Ok(())
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut suite = Suite::default();
    type Check = fn(&mut Suite) -> Res<()>;
    let checks: [(&'static str, &'static str, Check); 9] = [
        ("1", "spectrum identity", spectrum),
        ("2", "representation relations", rep_relations),
        ("3", "Gauss coefficients", gauss),
        ("4", "revival synthesis", revivals),
        ("7", "rotating-wave trend", rwa_trend),
        ("8", "adiabatic elimination", adiabatic),
        ("10", "entropy oracle", entropy),
        ("11", "decomposition round trip", round_trip),
        ("12", "CLI determinism", determinism),
    ];
    for (id, name, check) in checks {
        if let Err(e) = check(&mut suite) {
            suite.errored(id, name, e);
        }
    }
    let (norm, sectors) = (suite.norm_drift, suite.sector_drift);
    suite.record(
        "9",
        "norm and sector weights conserved in 4-8",
        norm <= 1e-10 && sectors <= 1e-10,
        format!("norm drift {norm:.3e}, sector drift {sectors:.3e}"),
    );

    let unexpected: Vec<&Line> = suite.lines.iter().filter(|l| l.passed == EXPECTED_FAILURES.contains(&l.id)).collect();
    let passed = suite.lines.iter().filter(|l| l.passed).count();
    println!("\n{passed}/{} lines pass in {:.1}s", suite.lines.len(), started.elapsed().as_secs_f64());
    if unexpected.is_empty() {
        println!("all outcomes as expected");
        return ExitCode::SUCCESS;
    }
    for l in unexpected {
        let what = if l.passed { "unexpected pass" } else { "unexpected failure" };
        println!("{what}: {} {} ({})", l.id, l.name, l.detail);
    }
    ExitCode::FAILURE
}
