//! Hofer-small perturbations of a Hamiltonian and whether the braid of an
//! action-isolated orbit set survives them.
//!
//! The perturbed map is φ_⊕ ∘ φ_{λF}, generated by
//! H_⊖(t,p) = H_⊕(t,p) + λF_t((φ_⊕^t)⁻¹ p). By bi-invariance its Hofer
//! distance to φ_⊕ is at most the Hofer norm of λF.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::braid::conjugacy::{are_conjugate, ConjugacyVerdict};
use crate::braid::extract::{braid_word_with_retry, suspend_orbits, ExtractError};
use crate::braid::garside::normal_form;
use crate::braid::word::{BraidWord, WordError};
use crate::entropy::{gamma_estimate_with_cap, EntropyError, GrowthEstimate};
use crate::flow::{Flow, HamiltonianFlow, ProductFlow};
use crate::geometry::{surface_distance, Surface, Vec2};
use crate::ham::{compose_hamiltonians, hofer_norm, torus_mean, HamError, HoferEstimate, InverseFlowMode, Normalization};
use crate::orbits::{
    find_periodic_points, orbit_from_seed, HomotopyClass, OrbitError, OrbitSet, PeriodicOrbit, SeedGrid,
    StabilityType,
};
use crate::scenario::{
    BraidSection, EntropySection, HamiltonianSpec, IsolationSection, OrbitSection, PerturbationSection,
    TargetSelection, TheoremMode,
};
use crate::TimePeriodicHamiltonian;

pub const COMPLETENESS_CAVEAT: &str = "isolation is certified only against the orbits found from the seed grid; \
the grid is chosen so that this set is plausibly complete, but completeness is not proved";

pub const INSIDE_LABEL: &str = "within theorem hypotheses";
pub const OUTSIDE_LABEL: &str = "outside theorem hypotheses";

/// Perturbation profiles must vanish on r > 1 − BOUNDARY_COLLAR.
pub const BOUNDARY_COLLAR: f64 = 0.03;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StabilityError {
    #[error(transparent)]
    Ham(#[from] HamError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error("no orbit matches the target selection")]
    NoTargets,
    #[error("target orbits lie in different homotopy classes")]
    ClassMismatch,
    #[error("target orbits are not contractible; their actions are not computed")]
    NoActions,
    #[error("no nonzero action gap to derive epsilon from; set isolation.epsilon")]
    NoEpsilon,
    #[error("invalid perturbation: {0}")]
    Perturbation(String),
    #[error("stability runs braid 1-periodic orbits; got period {0} (use a kth-power preset)")]
    Period(u32),
}

/// λF together with the measured Hofer norm of λF.
#[derive(Debug, Clone)]
pub struct PerturbationSpec {
    pub profile: TimePeriodicHamiltonian,
    pub amplitude: f64,
    pub hofer: HoferEstimate,
    /// Largest sampled radius where F is nonzero (disk only).
    pub support_radius: Option<f64>,
}

impl PerturbationSpec {
    pub fn new(
        profile: TimePeriodicHamiltonian,
        amplitude: f64,
        t_grid: usize,
        space_grid: usize,
    ) -> Result<Self, StabilityError> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(StabilityError::Perturbation(format!("amplitude {amplitude} must be finite and ≥ 0")));
        }
        let support_radius = check_profile(&profile)?;
        let hofer = hofer_norm(&profile.scaled(amplitude), t_grid, space_grid)?;
        Ok(Self { profile, amplitude, hofer, support_radius })
    }

    pub fn scaled(&self) -> TimePeriodicHamiltonian {
        self.profile.scaled(self.amplitude)
    }
}

/// Checks that F vanishes near the disk boundary or has zero torus mean.
/// Returns the sampled support radius on the disk.
pub fn check_profile(f: &TimePeriodicHamiltonian) -> Result<Option<f64>, StabilityError> {
    const TIMES: usize = 8;
    match f.surface() {
        Surface::Disk => {
            let mut support: f64 = 0.0;
            for ti in 0..TIMES {
                let t = ti as f64 / TIMES as f64;
                for ri in 0..=64 {
                    let r = ri as f64 / 64.0;
                    for ai in 0..128 {
                        let a = 2.0 * PI * ai as f64 / 128.0;
                        let v = f.value(t, Vec2::new(r * a.cos(), r * a.sin()));
                        if !v.is_finite() {
                            return Err(StabilityError::Perturbation("profile is not finite".into()));
                        }
                        if v != 0.0 {
                            support = support.max(r);
                        }
                    }
                }
            }
            if support > 1.0 - BOUNDARY_COLLAR {
                return Err(StabilityError::Perturbation(format!(
                    "profile is nonzero at radius {support}, inside the boundary collar"
                )));
            }
            Ok(Some(support))
        }
        Surface::Torus => {
            for ti in 0..TIMES {
                let t = ti as f64 / TIMES as f64;
                let m = torus_mean(f, t, 64);
                if !(m.abs() <= 1e-9) {
                    return Err(StabilityError::Perturbation(format!("profile mean {m:e} at t = {t} is not zero")));
                }
            }
            Ok(None)
        }
    }
}

/// H_⊕(t,p) + λF_t((φ_⊕^t)⁻¹ p) as a pointwise-evaluable Hamiltonian.
pub fn compose_perturbed_hamiltonian(
    h_plus: &TimePeriodicHamiltonian,
    f: &PerturbationSpec,
    mode: InverseFlowMode,
) -> Result<TimePeriodicHamiltonian, StabilityError> {
    Ok(compose_hamiltonians(h_plus, &f.scaled(), mode)?)
}

/// The flow of the same composition, built by chaining the two flows.
pub fn perturbed_flow(h_plus: &HamiltonianFlow, f: &PerturbationSpec) -> ProductFlow {
    ProductFlow::new(h_plus.clone(), HamiltonianFlow::new(f.scaled(), h_plus.config))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityScenario {
    pub name: String,
    pub hamiltonian: HamiltonianSpec,
    pub orbits: OrbitSection,
    #[serde(default)]
    pub target: TargetSelection,
    pub perturbation: PerturbationSection,
    #[serde(default)]
    pub isolation: IsolationSection,
    #[serde(default)]
    pub braid: BraidSection,
    #[serde(default)]
    pub entropy: EntropySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub stability: StabilityType,
    /// (re, im) of both multipliers.
    pub multipliers: [[f64; 2]; 2],
    pub action: Option<f64>,
    pub stationary_action: Option<f64>,
    pub residual: f64,
    pub class: String,
}

impl OrbitRow {
    pub fn from_orbit(index: usize, o: &PeriodicOrbit) -> Self {
        let p = o.seed.coords();
        Self {
            index,
            x: p.x,
            y: p.y,
            stability: o.stability,
            multipliers: [[o.multipliers[0].re, o.multipliers[0].im], [o.multipliers[1].re, o.multipliers[1].im]],
            action: o.action,
            stationary_action: o.stationary_action,
            residual: o.residual,
            class: o.homotopy_class.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationReport {
    pub epsilon: f64,
    pub epsilon_derived: bool,
    pub min_nonzero_gap: Option<f64>,
    /// Every gap in the class is zero or at least 100ε.
    pub gaps_ok: bool,
    /// Every orbit at zero gap from a target is itself a target.
    pub closure_ok: bool,
    /// Compact-support mode only.
    pub nonzero_actions_ok: Option<bool>,
    pub isolated: bool,
    /// Indices into the orbit table of the orbits in the target class.
    pub class_orbits: Vec<usize>,
    pub gaps: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BraidReport {
    pub strands: usize,
    pub word: BraidWord,
    pub normal_form: String,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRow {
    pub target: usize,
    pub kappa: f64,
    pub window: [f64; 2],
    /// Candidate indices with action inside the window.
    pub window_matches: Vec<usize>,
    pub continuation: Option<usize>,
    pub continuation_distance: Option<f64>,
    pub drift: Option<f64>,
    /// The continuation match is missing or lies outside the window.
    pub discrepancy: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    ActionWindow,
    Continuation,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub amplitude: f64,
    pub hofer: f64,
    pub below_epsilon: bool,
    pub hypothesis_met: bool,
    pub hypothesis_notes: Vec<String>,
    pub label: String,
    pub orbits: Vec<OrbitRow>,
    pub degenerate_roots: usize,
    pub matches: Vec<MatchRow>,
    pub witness: Witness,
    pub witness_orbits: Vec<usize>,
    pub braid: Option<BraidReport>,
    pub verdict: ConjugacyVerdict,
    pub entropy: Option<f64>,
    pub max_drift: Option<f64>,
    pub drift_ok: bool,
    pub discrepancy: bool,
    pub falsification: bool,
    pub error: Option<String>,
}

impl AmplitudeRow {
    pub fn verdict_label(&self) -> &'static str {
        self.verdict.label()
    }
}

/// Braid of the base period-k orbits suspended directly over [0, 1] of the
/// base flow, next to the braid of the same points as fixed points of the
/// k-th power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerComparison {
    pub k: u32,
    pub base_orbits: usize,
    pub braid: BraidReport,
    /// Verdict for (base braid)^k against the braid of the fixed points.
    pub power_verdict: ConjugacyVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub scenario: String,
    pub hamiltonian: String,
    pub surface: Surface,
    pub theorem: TheoremMode,
    pub base_hypothesis_met: bool,
    pub base_notes: Vec<String>,
    pub orbits: Vec<OrbitRow>,
    pub degenerate_roots: usize,
    pub targets: Vec<usize>,
    pub isolation: IsolationReport,
    pub braid: Option<BraidReport>,
    pub braid_error: Option<String>,
    pub entropy: Option<GrowthEstimate>,
    pub power: Option<PowerComparison>,
    pub rows: Vec<AmplitudeRow>,
    pub falsified: bool,
    pub caveat: String,
}

/// Whether the orbit passes the target filters.
pub fn selected(o: &PeriodicOrbit, sel: &TargetSelection) -> bool {
    let r = match o.seed.surface() {
        Surface::Disk => o.seed.lift().norm(),
        Surface::Torus => o.seed.coords().norm(),
    };
    sel.stability.is_none_or(|s| s == o.stability)
        && sel.min_radius.is_none_or(|m| r >= m)
        && sel.max_radius.is_none_or(|m| r <= m)
}

/// Suspends the orbits and reads the braid word at the configured angle.
pub fn extract_braid(orbits: Vec<PeriodicOrbit>, braid: &BraidSection) -> Result<BraidReport, ExtractError> {
    let set = OrbitSet::from_orbits(orbits);
    let g = suspend_orbits(&set, braid.samples, braid.collision_radius)?;
    let (word, angle) = braid_word_with_retry(&g, braid.angle, braid.collision_radius)?;
    Ok(BraidReport {
        strands: word.n_strands(),
        normal_form: normal_form(&word).to_string(),
        word,
        angle,
    })
}

/// Screens the boundary slope for rotation numbers c/2π = p/q with q ≤ 64.
fn rational_rotation(c: f64) -> Option<(i64, i64)> {
    let x = c / (2.0 * PI);
    (1..=64).find_map(|q| {
        let p = (x * q as f64).round();
        ((x * q as f64 - p).abs() < 1e-9 * q as f64).then_some((p as i64, q))
    })
}

fn theorem_notes(h: &TimePeriodicHamiltonian, mode: TheoremMode, target_actions: &[f64], tol_action: f64) -> Vec<String> {
    let mut notes = Vec::new();
    match mode {
        TheoremMode::ClosedSurface => {
            if h.surface() != Surface::Torus {
                notes.push("closed-surface mode needs the torus".into());
            }
        }
        TheoremMode::DiskRotation => match h.normalization() {
            Normalization::Admissible { c, .. } if h.surface() == Surface::Disk => {
                if let Some((p, q)) = rational_rotation(c) {
                    notes.push(format!("boundary slope {c} is 2π·{p}/{q}"));
                }
            }
            _ => notes.push("disk-rotation mode needs an admissible disk Hamiltonian".into()),
        },
        TheoremMode::DiskCompact => {
            if h.surface() != Surface::Disk || h.normalization() != Normalization::CompactSupport {
                notes.push("disk-compact mode needs a compactly supported disk Hamiltonian".into());
            }
            if target_actions.iter().any(|a| a.abs() <= tol_action) {
                notes.push(format!("a target action lies within {tol_action:e} of zero"));
            }
        }
    }
    notes
}

fn isolation_report(
    orbits: &[PeriodicOrbit],
    class_orbits: &[usize],
    targets: &[usize],
    iso: &IsolationSection,
) -> Result<IsolationReport, StabilityError> {
    let actions: Vec<f64> =
        class_orbits.iter().map(|&i| orbits[i].stationary_action.ok_or(StabilityError::NoActions)).collect::<Result<_, _>>()?;
    let n = actions.len();
    let gaps: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (actions[i] - actions[j]).abs()).collect()).collect();
    let zero = iso.zero_gap_tolerance;
    let min_nonzero_gap = gaps.iter().flatten().copied().filter(|&g| g > zero).reduce(f64::min);
    let (epsilon, epsilon_derived) = match iso.epsilon {
        Some(e) => (e, false),
        None => (min_nonzero_gap.ok_or(StabilityError::NoEpsilon)? / 100.0, true),
    };
    // the derived ε sits exactly on the threshold; allow for the rounding of g/100·100
    let threshold = 100.0 * epsilon * (1.0 - 1e-12);
    let gaps_ok = gaps.iter().flatten().all(|&g| g <= zero || g >= threshold);
    let closure_ok = (0..n).all(|i| {
        !targets.contains(&class_orbits[i]) || (0..n).all(|j| gaps[i][j] > zero || targets.contains(&class_orbits[j]))
    });
    let nonzero_actions_ok = (iso.theorem == TheoremMode::DiskCompact).then(|| {
        targets.iter().all(|&t| orbits[t].stationary_action.is_some_and(|a| a.abs() > iso.tol_action))
    });
    Ok(IsolationReport {
        epsilon,
        epsilon_derived,
        min_nonzero_gap,
        gaps_ok,
        closure_ok,
        nonzero_actions_ok,
        isolated: gaps_ok && closure_ok && nonzero_actions_ok.unwrap_or(true),
        class_orbits: class_orbits.to_vec(),
        gaps,
    })
}

/// Direct suspension of the period-k orbits of the base flow through the targets.
fn power_comparison(
    scenario: &StabilityScenario,
    targets: &[PeriodicOrbit],
    fixed_braid: &BraidReport,
) -> Result<Option<PowerComparison>, StabilityError> {
    let Some((base, k)) = scenario.hamiltonian.power_base() else { return Ok(None) };
    let flow = HamiltonianFlow::with_step(base.build()?, scenario.orbits.step);
    let cfg = &scenario.orbits.search;
    let surface = flow.surface();
    let mut covered: Vec<Vec2> = Vec::new();
    let mut base_orbits = Vec::new();
    for t in targets {
        let p = t.seed.coords();
        if covered.iter().any(|&q| surface_distance(surface, p, q) < cfg.merge_radius) {
            continue;
        }
        let o = orbit_from_seed(&flow, p, k, cfg)?;
        let mut z = p;
        for j in 0..k {
            covered.push(z);
            z = flow.advance(j as f64, (j + 1) as f64, z).map_err(OrbitError::from)?;
        }
        base_orbits.push(o);
    }
    let n = base_orbits.len();
    let braid = extract_braid(base_orbits, &scenario.braid)?;
    let power_verdict = if braid.strands == fixed_braid.strands {
        are_conjugate(&braid.word.pow(k as i32), &fixed_braid.word, scenario.braid.budget)?
    } else {
        ConjugacyVerdict::Unknown { explored: 0 }
    };
    Ok(Some(PowerComparison { k, base_orbits: n, braid, power_verdict }))
}

struct Base<'a> {
    scenario: &'a StabilityScenario,
    flow: HamiltonianFlow,
    orbits: &'a [PeriodicOrbit],
    targets: &'a [usize],
    epsilon: f64,
    base_ok: bool,
    braid: Option<&'a BraidReport>,
}

fn amplitude_row(base: &Base, profile: &TimePeriodicHamiltonian, amplitude: f64) -> AmplitudeRow {
    let mut row = AmplitudeRow {
        amplitude,
        hofer: f64::NAN,
        below_epsilon: false,
        hypothesis_met: false,
        hypothesis_notes: Vec::new(),
        label: OUTSIDE_LABEL.into(),
        orbits: Vec::new(),
        degenerate_roots: 0,
        matches: Vec::new(),
        witness: Witness::None,
        witness_orbits: Vec::new(),
        braid: None,
        verdict: ConjugacyVerdict::Unknown { explored: 0 },
        entropy: None,
        max_drift: None,
        drift_ok: false,
        discrepancy: false,
        falsification: false,
        error: None,
    };
    if let Err(e) = fill_row(base, profile, &mut row) {
        row.error = Some(e.to_string());
        row.hypothesis_met = false;
        row.label = OUTSIDE_LABEL.into();
        row.falsification = false;
    }
    row
}

fn fill_row(base: &Base, profile: &TimePeriodicHamiltonian, row: &mut AmplitudeRow) -> Result<(), StabilityError> {
    let sc = base.scenario;
    let pert = sc.perturbation.clone();
    let spec = PerturbationSpec::new(profile.clone(), row.amplitude, pert.hofer_t_grid, pert.hofer_space_grid)?;
    row.hofer = spec.hofer.value;
    row.below_epsilon = row.hofer < base.epsilon;
    let flow = perturbed_flow(&base.flow, &spec);

    let mut seeds: Vec<SeedGrid> = vec![SeedGrid::Points { points: base.orbits.iter().map(|o| o.seed.coords()).collect() }];
    if sc.orbits.research_perturbed {
        seeds.push(sc.orbits.seeds.clone());
    }
    let found = find_periodic_points(&flow, 1, &SeedGrid::Union { grids: seeds }, &sc.orbits.search)?;
    row.degenerate_roots = found.degenerate.len();
    let cands = found.orbits;
    row.orbits = cands.iter().enumerate().map(|(i, o)| OrbitRow::from_orbit(i, o)).collect();

    let eps = base.epsilon;
    let surface = flow.surface();
    let mut window_set: Vec<usize> = Vec::new();
    let mut cont_set: Vec<usize> = Vec::new();
    let mut drifts = Vec::new();
    for &t in base.targets {
        let old = &base.orbits[t];
        let kappa = old.stationary_action.ok_or(StabilityError::NoActions)?;
        let window = [kappa - 2.0 * eps, kappa + 2.0 * eps];
        let window_matches: Vec<usize> = (0..cands.len())
            .filter(|&i| {
                cands[i].homotopy_class == old.homotopy_class
                    && cands[i].stationary_action.is_some_and(|a| a > window[0] && a < window[1])
            })
            .collect();
        let nearest = (0..cands.len())
            .map(|i| (i, surface_distance(surface, old.seed.coords(), cands[i].seed.coords())))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .filter(|&(_, d)| d <= sc.isolation.continuation_radius);
        let drift = nearest.and_then(|(i, _)| cands[i].stationary_action.map(|a| (a - kappa).abs()));
        if let Some(d) = drift {
            drifts.push(d);
        }
        let discrepancy = nearest.is_none_or(|(i, _)| !window_matches.contains(&i));
        for &i in &window_matches {
            if !window_set.contains(&i) {
                window_set.push(i);
            }
        }
        if let Some((i, _)) = nearest {
            if !cont_set.contains(&i) {
                cont_set.push(i);
            }
        }
        row.matches.push(MatchRow {
            target: t,
            kappa,
            window,
            window_matches,
            continuation: nearest.map(|p| p.0),
            continuation_distance: nearest.map(|p| p.1),
            drift,
            discrepancy,
        });
    }
    window_set.sort_unstable();
    cont_set.sort_unstable();
    row.discrepancy = window_set != cont_set || row.matches.iter().any(|m| m.discrepancy);
    row.max_drift = drifts.iter().copied().reduce(f64::max);
    row.drift_ok = drifts.len() == base.targets.len()
        && drifts.iter().all(|&d| d <= row.hofer + sc.isolation.drift_tolerance);

    let k = base.targets.len();
    if row.degenerate_roots > 0 {
        row.hypothesis_notes.push(format!("{} degenerate roots of the perturbed map", row.degenerate_roots));
    }
    if !row.below_epsilon {
        row.hypothesis_notes.push(format!("Hofer norm {} is not below ε = {eps}", row.hofer));
    }
    if !base.base_ok {
        row.hypothesis_notes.push("the unperturbed hypotheses fail".into());
    }
    row.hypothesis_met = row.hypothesis_notes.is_empty();
    row.label = if row.hypothesis_met { INSIDE_LABEL } else { OUTSIDE_LABEL }.into();

    let Some(old_braid) = base.braid else { return Ok(()) };
    for (witness, set) in [(Witness::ActionWindow, &window_set), (Witness::Continuation, &cont_set)] {
        if set.len() != k {
            continue;
        }
        let Ok(b) = extract_braid(set.iter().map(|&i| cands[i].clone()).collect(), &sc.braid) else { continue };
        row.verdict = are_conjugate(&old_braid.word, &b.word, sc.braid.budget)?;
        row.entropy = Some(gamma_estimate_with_cap(&b.word, sc.entropy.iterations, sc.entropy.letter_cap)?.rate);
        row.witness = witness;
        row.witness_orbits = set.clone();
        row.braid = Some(b);
        break;
    }
    row.falsification = row.hypothesis_met && matches!(row.verdict, ConjugacyVerdict::No { .. });
    Ok(())
}

pub fn run_stability_experiment(scenario: &StabilityScenario) -> Result<StabilityReport, StabilityError> {
    if scenario.orbits.period != 1 {
        return Err(StabilityError::Period(scenario.orbits.period));
    }
    let h = scenario.hamiltonian.build()?;
    let profile = scenario.perturbation.profile.build()?;
    if profile.surface() != h.surface() {
        return Err(StabilityError::Perturbation("profile and Hamiltonian live on different surfaces".into()));
    }
    check_profile(&profile)?;
    let flow = HamiltonianFlow::with_step(h.clone(), scenario.orbits.step);
    let set = find_periodic_points(&flow, 1, &scenario.orbits.seeds, &scenario.orbits.search)?;
    let orbits = set.orbits;
    let targets: Vec<usize> = (0..orbits.len()).filter(|&i| selected(&orbits[i], &scenario.target)).collect();
    let Some(&first) = targets.first() else { return Err(StabilityError::NoTargets) };
    let class: &HomotopyClass = &orbits[first].homotopy_class;
    if targets.iter().any(|&t| &orbits[t].homotopy_class != class) {
        return Err(StabilityError::ClassMismatch);
    }
    let class_orbits: Vec<usize> = (0..orbits.len()).filter(|&i| &orbits[i].homotopy_class == class).collect();
    let isolation = isolation_report(&orbits, &class_orbits, &targets, &scenario.isolation)?;

    let target_actions: Vec<f64> = targets.iter().filter_map(|&t| orbits[t].stationary_action).collect();
    let mut base_notes = theorem_notes(&h, scenario.isolation.theorem, &target_actions, scenario.isolation.tol_action);
    if !set.degenerate.is_empty() {
        base_notes.push(format!("{} degenerate roots of the unperturbed map", set.degenerate.len()));
    }
    if !isolation.isolated {
        base_notes.push("targets are not 100ε-isolated".into());
    }

    let target_orbits: Vec<PeriodicOrbit> = targets.iter().map(|&t| orbits[t].clone()).collect();
    let (braid, braid_error) = match extract_braid(target_orbits.clone(), &scenario.braid) {
        Ok(b) => (Some(b), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let entropy = match &braid {
        Some(b) => Some(gamma_estimate_with_cap(&b.word, scenario.entropy.iterations, scenario.entropy.letter_cap)?),
        None => None,
    };
    let power = match &braid {
        Some(b) => power_comparison(scenario, &target_orbits, b)?,
        None => None,
    };

    let base = Base {
        scenario,
        flow,
        orbits: &orbits,
        targets: &targets,
        epsilon: isolation.epsilon,
        base_ok: base_notes.is_empty(),
        braid: braid.as_ref(),
    };
    let rows: Vec<AmplitudeRow> =
        scenario.perturbation.amplitudes.par_iter().map(|&a| amplitude_row(&base, &profile, a)).collect();

    Ok(StabilityReport {
        scenario: scenario.name.clone(),
        hamiltonian: h.name().to_string(),
        surface: h.surface(),
        theorem: scenario.isolation.theorem,
        base_hypothesis_met: base_notes.is_empty(),
        base_notes,
        orbits: orbits.iter().enumerate().map(|(i, o)| OrbitRow::from_orbit(i, o)).collect(),
        degenerate_roots: set.degenerate.len(),
        targets,
        isolation,
        braid,
        braid_error,
        entropy,
        power,
        falsified: rows.iter().any(|r| r.falsification),
        rows,
        caveat: COMPLETENESS_CAVEAT.into(),
    })
}

/// Rotation by one radian with the origin as the only fixed point, perturbed
/// by an off-centre bump.
pub fn scenario_a() -> StabilityScenario {
    use crate::ham::Bump;
    StabilityScenario {
        name: "rotation-origin".into(),
        hamiltonian: HamiltonianSpec::Rotation { c: 1.0 },
        orbits: OrbitSection {
            seeds: SeedGrid::Disk { n: 8 },
            period: 1,
            step: 1e-3,
            search: Default::default(),
            research_perturbed: true,
        },
        target: TargetSelection::default(),
        perturbation: PerturbationSection {
            profile: HamiltonianSpec::Bump(Bump::new(Vec2::new(0.3, 0.1), 0.35, 1.0)),
            amplitudes: vec![0.0, 0.001, 0.004, 0.009, 0.05],
            hofer_t_grid: 16,
            hofer_space_grid: 101,
        },
        isolation: IsolationSection { epsilon: Some(0.01), ..Default::default() },
        braid: BraidSection::default(),
        entropy: EntropySection::default(),
    }
}

/// Third power of a slightly detuned 2π/3 rotation carrying a small rotating
/// bump. Its fixed points are the origin and an elliptic and a hyperbolic
/// period-3 orbit of the base map; the elliptic triple is braided. The two
/// triples differ in action by about 8e-3, so ε is about 8e-5 and the sweep
/// straddles it.
pub fn scenario_b() -> StabilityScenario {
    use crate::ham::{Bump, TimeProfile};
    let base = HamiltonianSpec::BumpPerturbed {
        base: Box::new(HamiltonianSpec::Rotation { c: 2.0 * PI / 3.0 + 0.01 }),
        bump: Bump::new(Vec2::new(0.5, 0.0), 0.25, 0.02).with_profile(TimeProfile::Smooth),
        inverse: InverseFlowMode::Exact { step: 1e-3 },
    };
    StabilityScenario {
        name: "period-three".into(),
        hamiltonian: HamiltonianSpec::KthPower { base: Box::new(base), k: 3 },
        orbits: OrbitSection {
            seeds: SeedGrid::Union {
                grids: vec![
                    SeedGrid::Disk { n: 12 },
                    SeedGrid::Annulus { r0: 0.45, r1: 0.6, nr: 6, ntheta: 36 },
                    SeedGrid::Annulus { r0: 0.68, r1: 0.78, nr: 6, ntheta: 72 },
                ],
            },
            period: 1,
            step: 1e-3,
            search: Default::default(),
            research_perturbed: false,
        },
        target: TargetSelection { stability: Some(StabilityType::Elliptic), min_radius: Some(0.1), max_radius: None },
        perturbation: PerturbationSection {
            profile: HamiltonianSpec::Bump(Bump::new(Vec2::new(0.45, 0.15), 0.3, 1.0)),
            amplitudes: vec![0.0, 2e-6, 5e-6, 1e-5, 2e-5, 3.5e-5, 6e-5, 2e-4, 2e-3, 2e-2],
            hofer_t_grid: 16,
            hofer_space_grid: 101,
        },
        isolation: IsolationSection::default(),
        braid: BraidSection::default(),
        entropy: EntropySection::default(),
    }
}
