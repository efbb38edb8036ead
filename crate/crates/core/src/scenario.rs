//! Config-file descriptions of Hamiltonians and of the pipeline sections that
//! the experiments and the command line share.

use serde::{Deserialize, Serialize};

use crate::braid::conjugacy::DEFAULT_BUDGET;
use crate::braid::extract::DEFAULT_COLLISION_RADIUS;
use crate::entropy::DEFAULT_LETTER_CAP;
use crate::geometry::Surface;
use crate::ham::{
    compose_hamiltonians, kth_power_hamiltonian, make_admissible_disk_hamiltonian, Bump, HamError, InverseFlowMode,
};
use crate::orbits::{OrbitSearchConfig, SeedGrid, StabilityType};
use crate::TimePeriodicHamiltonian;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    /// ½c(r² − 1) on the disk.
    Rotation { c: f64 },
    /// ½c r² on the disk.
    CenteredRotation { c: f64 },
    Shear,
    Pendulum,
    ForcedPendulum { forcing: f64 },
    Cellular {
        #[serde(default)]
        modulation: f64,
    },
    Bump(Bump),
    /// base(t,p) + bump_t((φ_base^t)⁻¹ p), whose time-1 map is φ_base ∘ φ_bump.
    BumpPerturbed {
        base: Box<HamiltonianSpec>,
        bump: Bump,
        #[serde(default)]
        inverse: InverseFlowMode,
    },
    /// k·base(kt, p).
    KthPower { base: Box<HamiltonianSpec>, k: u32 },
    /// interior glued to ½c(r² − 1) at r0.
    Admissible { c: f64, r0: f64, interior: Box<HamiltonianSpec> },
    Zero { surface: Surface },
}

impl HamiltonianSpec {
    pub fn build(&self) -> Result<TimePeriodicHamiltonian, HamError> {
        Ok(match self {
            HamiltonianSpec::Rotation { c } => TimePeriodicHamiltonian::rotation(*c),
            HamiltonianSpec::CenteredRotation { c } => TimePeriodicHamiltonian::centered_rotation(*c),
            HamiltonianSpec::Shear => TimePeriodicHamiltonian::torus_shear(),
            HamiltonianSpec::Pendulum => TimePeriodicHamiltonian::pendulum(),
            HamiltonianSpec::ForcedPendulum { forcing } => TimePeriodicHamiltonian::forced_pendulum(*forcing),
            HamiltonianSpec::Cellular { modulation } => TimePeriodicHamiltonian::cellular(*modulation),
            HamiltonianSpec::Bump(b) => {
                if !(b.radius > 0.0) {
                    return Err(HamError::InvalidParameter(format!("bump radius {} must be positive", b.radius)));
                }
                TimePeriodicHamiltonian::bump(*b)
            }
            HamiltonianSpec::BumpPerturbed { base, bump, inverse } => {
                let inner = HamiltonianSpec::Bump(*bump).build()?;
                compose_hamiltonians(&base.build()?, &inner, *inverse)?
            }
            HamiltonianSpec::KthPower { base, k } => kth_power_hamiltonian(&base.build()?, *k)?,
            HamiltonianSpec::Admissible { c, r0, interior } => {
                make_admissible_disk_hamiltonian(*c, interior.build()?.field().clone(), *r0)?
            }
            HamiltonianSpec::Zero { surface } => TimePeriodicHamiltonian::zero(*surface),
        })
    }

    /// The base Hamiltonian and power when this is a k-th power preset.
    pub fn power_base(&self) -> Option<(&HamiltonianSpec, u32)> {
        match self {
            HamiltonianSpec::KthPower { base, k } => Some((base, *k)),
            _ => None,
        }
    }
}

fn default_step() -> f64 {
    1e-3
}

fn default_period() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSection {
    pub seeds: SeedGrid,
    #[serde(default = "default_period")]
    pub period: u32,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default)]
    pub search: OrbitSearchConfig,
    /// Also run the full seed grid on every perturbed Hamiltonian, not only
    /// continuation from the unperturbed orbits.
    #[serde(default)]
    pub research_perturbed: bool,
}

/// Which found orbits form the braid. Empty filters keep everything.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetSelection {
    pub stability: Option<StabilityType>,
    pub min_radius: Option<f64>,
    pub max_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BraidSection {
    /// Projection direction in radians.
    pub angle: f64,
    pub collision_radius: f64,
    pub samples: usize,
    /// Normal-form conjugations the conjugacy search may spend.
    pub budget: usize,
}

impl Default for BraidSection {
    fn default() -> Self {
        Self { angle: 0.3, collision_radius: DEFAULT_COLLISION_RADIUS, samples: 1000, budget: DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropySection {
    pub iterations: usize,
    pub letter_cap: usize,
    /// Explicit word, for runs that do not derive the braid from orbits.
    pub word: Option<String>,
    pub strands: Option<usize>,
}

impl Default for EntropySection {
    fn default() -> Self {
        Self { iterations: 12, letter_cap: DEFAULT_LETTER_CAP, word: None, strands: None }
    }
}

fn default_hofer_t() -> usize {
    16
}

fn default_hofer_space() -> usize {
    101
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    /// F; the perturbation at amplitude λ is λF.
    pub profile: HamiltonianSpec,
    pub amplitudes: Vec<f64>,
    #[serde(default = "default_hofer_t")]
    pub hofer_t_grid: usize,
    #[serde(default = "default_hofer_space")]
    pub hofer_space_grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremMode {
    /// Closed surface (here the torus).
    ClosedSurface,
    /// Disk maps that rotate rigidly near the boundary.
    DiskRotation,
    /// Compactly supported disk maps; every braided orbit needs nonzero action.
    DiskCompact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsolationSection {
    /// ε of the 100ε-isolation test; derived as (smallest nonzero gap)/100 when absent.
    pub epsilon: Option<f64>,
    pub theorem: TheoremMode,
    /// Action gaps up to this size count as zero.
    pub zero_gap_tolerance: f64,
    /// Exclusion band around zero action in compact-support mode.
    pub tol_action: f64,
    /// Slack on the drift bound |A_⊖ − A_⊕| ≤ Hofer norm.
    pub drift_tolerance: f64,
    /// Continuation matches farther than this from the old seed are discarded.
    pub continuation_radius: f64,
}

impl Default for IsolationSection {
    fn default() -> Self {
        Self {
            epsilon: None,
            theorem: TheoremMode::DiskRotation,
            zero_gap_tolerance: 1e-6,
            tol_action: 1e-8,
            drift_tolerance: 1e-4,
            continuation_radius: 0.1,
        }
    }
}
