//! Configuration files, analysis orchestration and JSON reports.

mod config;

pub use config::{ComplexEntry, ControlConfig, DriftConfig, ExactConfig, Scalar, SystemConfig, Tolerances};

use std::fmt::Write as _;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Serialize, Serializer};

use crate::blocks::{block_lie_closure, BlockReport};
use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::lie::{check_thm2_hypotheses, larc_check, thm2_certificate, LarcReport, CERTIFICATE_TOL};
use crate::linop::{commutator_error, propagate, trotter_error, ComplexMatrix, ControlSchedule, ControlSystem};
use crate::spectral::IndependenceVerdict;
use crate::torus::{kronecker_search, recurrence_time, KroneckerCertificate, NeighborhoodSpec, Recurrence, SearchOptions};

/// Block reports are produced automatically up to this dimension.
pub const AUTO_BLOCK_DIM: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    ControllableByThm2,
    HypothesesUnmet,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ControllableByThm2 => "CONTROLLABLE-BY-THM2",
            Verdict::HypothesesUnmet => "HYPOTHESES-UNMET",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::ControllableByThm2 => 0,
            Verdict::HypothesesUnmet => 3,
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Effective tolerances, all resolved.
#[derive(Clone, Debug, Serialize)]
pub struct ResolvedTolerances {
    pub rank_tol: f64,
    pub max_passes: usize,
    pub edge_tol: f64,
    pub independence_tol: f64,
    pub coeff_bound: u32,
    pub gap_tol: Option<f64>,
    pub certificate_tol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumSection {
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub non_degenerate: bool,
    pub exact: Option<Vec<String>>,
    pub independence: IndependenceVerdict,
}

/// Graph edge with 1-based vertex and control indices.
#[derive(Clone, Debug, Serialize)]
pub struct EdgeOut {
    pub v: usize,
    pub w: usize,
    pub control: usize,
    pub alpha: [f64; 2],
}

impl From<&Edge> for EdgeOut {
    fn from(e: &Edge) -> Self {
        Self {
            v: e.v + 1,
            w: e.w + 1,
            control: e.control + 1,
            alpha: [e.alpha_re, e.alpha_im],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphSection {
    pub edge_tol: f64,
    pub vertices: usize,
    pub edges: Vec<EdgeOut>,
    pub near_threshold: Vec<EdgeOut>,
    pub connected: bool,
    pub components: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Checklist {
    pub non_degenerate: bool,
    pub rationally_independent: bool,
    pub graph_connected: bool,
    pub all_hold: bool,
}

/// Bracket certificate with 1-based indices.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateOut {
    pub from: usize,
    pub to: usize,
    pub path: Vec<usize>,
    pub depth: usize,
    pub word: String,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub dim: usize,
    pub num_controls: usize,
    pub tolerances: ResolvedTolerances,
    pub spectrum: SpectrumSection,
    pub graph: GraphSection,
    pub larc: LarcReport,
    pub hypotheses: Checklist,
    pub verdict: Verdict,
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificates: Option<Vec<CertificateOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<BlockReport>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct AnalyzeOptions {
    /// Empty: the config's list, or the full dimension.
    pub truncations: Vec<usize>,
    pub seed: u64,
    /// Command-line overrides on top of the config's tolerances.
    pub tolerances: Tolerances,
    /// Leave out bracket certificates even when the hypotheses hold.
    pub skip_certificates: bool,
    /// `None`: block report when `dim <= AUTO_BLOCK_DIM`.
    pub blocks: Option<bool>,
}

/// Spectral checks, coupling graph, closure at each truncation and, when the
/// hypotheses hold, bracket certificates.
pub fn analyze(config: &SystemConfig, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    let system = config.to_system()?;
    let tol = config.tolerances.merged(&opts.tolerances);
    let truncations = if !opts.truncations.is_empty() {
        opts.truncations.clone()
    } else if !config.truncations.is_empty() {
        config.truncations.clone()
    } else {
        vec![system.dim()]
    };
    analyze_system(&system, &truncations, &tol, opts)
}

pub fn analyze_system(
    system: &ControlSystem,
    truncations: &[usize],
    tol: &Tolerances,
    opts: &AnalyzeOptions,
) -> Result<AnalysisReport> {
    let thm2 = tol.thm2_options();
    let closure = tol.closure_options();
    let hyp = check_thm2_hypotheses(system, &thm2);
    let larc = larc_check(system, truncations, closure)?;
    let spectrum = system.drift();

    let mut notes = Vec::new();
    let verdict = if hyp.hold() {
        Verdict::ControllableByThm2
    } else {
        Verdict::HypothesesUnmet
    };
    let certificates = if hyp.hold() && !opts.skip_certificates {
        let certs = thm2_certificate(system, &thm2)?;
        Some(
            certs
                .into_iter()
                .map(|c| CertificateOut {
                    from: c.from + 1,
                    to: c.to + 1,
                    path: c.path.iter().map(|k| k + 1).collect(),
                    depth: c.depth,
                    word: c.word,
                    residual: c.residual,
                })
                .collect(),
        )
    } else {
        None
    };
    if hyp.hold() {
        notes.push(
            "hypotheses verified: the theorem certifies strong operator controllability of the untruncated \
             system; the closure dimensions below are numerical evidence at finite truncation only"
                .to_string(),
        );
    }
    if !spectrum.is_non_degenerate() {
        notes.push("degenerate drift: graph vertices are eigenspaces, necessary-structure check only".to_string());
    }
    if !hyp.graph.near_threshold.is_empty() {
        notes.push(format!(
            "{} edge(s) within a factor 1e3 of edge_tol",
            hyp.graph.near_threshold.len()
        ));
    }
    let full: Vec<usize> = larc.history.iter().filter(|h| h.closure_dim == h.ambient_dim).map(|h| h.n).collect();
    if full.len() == larc.history.len() {
        notes.push(format!("numerical closure full at truncations {full:?}"));
    }

    let want_blocks = opts.blocks.unwrap_or(system.dim() <= AUTO_BLOCK_DIM);
    let blocks = if want_blocks {
        let chosen: Vec<usize> = if system.num_controls() > 0 { vec![0, 1] } else { vec![0] };
        Some(block_lie_closure(system, &chosen, closure, opts.seed)?)
    } else {
        None
    };

    let checklist = Checklist {
        non_degenerate: hyp.non_degenerate,
        rationally_independent: hyp.independence.is_independent(),
        graph_connected: hyp.connectivity.connected,
        all_hold: hyp.hold(),
    };
    Ok(AnalysisReport {
        tool: "larckit",
        version: env!("CARGO_PKG_VERSION"),
        seed: opts.seed,
        dim: system.dim(),
        num_controls: system.num_controls(),
        tolerances: ResolvedTolerances {
            rank_tol: closure.rank_tol,
            max_passes: closure.max_passes,
            edge_tol: hyp.graph.edge_tol,
            independence_tol: thm2.independence_tol,
            coeff_bound: thm2.coeff_bound,
            gap_tol: tol.gap_tol,
            certificate_tol: CERTIFICATE_TOL,
        },
        spectrum: SpectrumSection {
            eigenvalues: spectrum.eigenvalues().to_vec(),
            multiplicities: spectrum.multiplicities().to_vec(),
            non_degenerate: spectrum.is_non_degenerate(),
            exact: spectrum.exact_values().map(|v| v.iter().map(|x| x.to_string()).collect()),
            independence: hyp.independence.clone(),
        },
        graph: GraphSection {
            edge_tol: hyp.graph.edge_tol,
            vertices: hyp.graph.num_vertices,
            edges: hyp.graph.edges.iter().map(EdgeOut::from).collect(),
            near_threshold: hyp.graph.near_threshold.iter().map(EdgeOut::from).collect(),
            connected: hyp.connectivity.connected,
            components: hyp
                .connectivity
                .components
                .iter()
                .map(|c| c.iter().map(|v| v + 1).collect())
                .collect(),
        },
        larc,
        hypotheses: checklist,
        verdict,
        failures: hyp.failures(),
        certificates,
        blocks,
        notes,
    })
}

/// `n,closure_dim,ambient_dim,verdict,passes` rows.
pub fn larc_history_csv(report: &LarcReport) -> String {
    let mut out = String::from("n,closure_dim,ambient_dim,verdict,passes\n");
    for h in &report.history {
        let _ = writeln!(out, "{},{},{},{:?},{}", h.n, h.closure_dim, h.ambient_dim, h.verdict, h.passes);
    }
    out
}

/// `n,trotter_error,commutator_error` rows for `n = 2^k`, `k` in `exponents`.
/// The commutator formula uses the anti-Hermitian pair `(iA, iB)`.
pub fn product_error_csv(a: &ComplexMatrix, b: &ComplexMatrix, exponents: std::ops::RangeInclusive<u32>) -> Result<String> {
    let (ia, ib) = (a.times_i(), b.times_i());
    let mut out = String::from("n,trotter_error,commutator_error\n");
    for k in exponents {
        let n = 1u64 << k;
        let t = trotter_error(a, b, n)?;
        let c = commutator_error(&ia, &ib, n)?;
        let _ = writeln!(out, "{n},{t:.16e},{c:.16e}");
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct KroneckerOutput {
    pub frequencies: Vec<f64>,
    pub target: Vec<f64>,
    pub delta: f64,
    pub certificate: KroneckerCertificate,
    pub verified: bool,
}

/// Kronecker search with the drift eigenvalues as frequencies.
pub fn kronecker_command(
    system: &ControlSystem,
    target: &[f64],
    delta: f64,
    options: &SearchOptions,
) -> Result<KroneckerOutput> {
    let xhat = system.drift().eigenvalues().to_vec();
    if target.len() != xhat.len() {
        return Err(Error::DimensionMismatch {
            expected: xhat.len(),
            found: target.len(),
        });
    }
    let certificate = kronecker_search(&xhat, target, delta, options)?;
    let verified = certificate.verify(&xhat, target);
    Ok(KroneckerOutput {
        frequencies: xhat,
        target: target.to_vec(),
        delta,
        certificate,
        verified,
    })
}

/// `count` random unit vectors with complex Gaussian entries.
pub fn random_unit_vectors(dim: usize, count: usize, seed: u64) -> Vec<DVector<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v = DVector::from_fn(dim, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            });
            let n = v.norm();
            v / Complex64::new(n, 0.0)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceOutput {
    pub t_minus: f64,
    pub eps: f64,
    pub seed: u64,
    pub num_vectors: usize,
    pub recurrence: Recurrence,
}

pub fn recurrence_command(
    system: &ControlSystem,
    t_minus: f64,
    eps: f64,
    num_vectors: usize,
    seed: u64,
    options: &SearchOptions,
) -> Result<RecurrenceOutput> {
    let spectrum = system.drift();
    let vectors = random_unit_vectors(system.dim(), num_vectors, seed);
    let reference = spectrum.reconstruct().herm_exp(t_minus)?;
    let nbhd = NeighborhoodSpec::new(reference, vectors, eps)?;
    let recurrence = recurrence_time(spectrum, t_minus, &nbhd, options)?;
    Ok(RecurrenceOutput {
        t_minus,
        eps,
        seed,
        num_vectors,
        recurrence,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationOutput {
    pub total_duration: f64,
    pub segments: usize,
    /// Rows of `U`, entries `[re, im]`.
    pub propagator: Vec<Vec<[f64; 2]>>,
    /// `U psi` for each initial vector.
    pub images: Vec<Vec<[f64; 2]>>,
}

pub fn simulate_command(
    system: &ControlSystem,
    schedule: &ControlSchedule,
    initial: &[DVector<Complex64>],
) -> Result<SimulationOutput> {
    let schedule = ControlSchedule::new(schedule.segments().to_vec())?;
    let u = propagate(system, &schedule)?;
    let n = system.dim();
    let mut images = Vec::with_capacity(initial.len());
    for v in initial {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        images.push(u.apply(v).iter().map(|z| [z.re, z.im]).collect());
    }
    Ok(SimulationOutput {
        total_duration: schedule.total_duration(),
        segments: schedule.segments().len(),
        propagator: (0..n).map(|i| (0..n).map(|j| [u.get(i, j).re, u.get(i, j).im]).collect()).collect(),
        images,
    })
}

/// Rewrites every non-integer number with 17 significant digits.
pub fn normalize_floats(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Ok(m) = format!("{x:.16e}").parse::<serde_json::Number>() {
                    *n = m;
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(normalize_floats),
        serde_json::Value::Object(map) => map.values_mut().for_each(normalize_floats),
        _ => {}
    }
}

/// Pretty JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    normalize_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}
