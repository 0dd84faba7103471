//! Scripted experiments: the five-scene bootstrapping sequence, glass-moving
//! classification sweeps, the similarity scatter and the complexity bench.

use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::classification_degree;
use crate::grounding::{ground, GeometricScene, GroundingError, KernelConfig, NoiseConfig};
use crate::model::{
    Element, Fact, InputInterface, ModelError, ReificationMode, RelationDecl, SceneObservation,
    TypeSymbol,
};
use crate::sit::{
    encode, learn, observe, similarity, BeliefBag, CategoryId, MemoryGraph, SitError, SitParams,
    StepOutcome,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Grounding(#[from] GroundingError),
    #[error(transparent)]
    Sit(#[from] SitError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
}

const TABLETOP_SEQUENCE: &str = include_str!("../data/tabletop_sequence.json");
const BALANCED_SWEEP: &str = include_str!("../data/balanced_sweep.json");
const UNBALANCED_SWEEP: &str = include_str!("../data/unbalanced_sweep.json");

/// The five tabletop layouts of the bootstrapping walkthrough: a cone-like
/// cylinder with a plane and a second cylinder, the cylinder and plane alone,
/// everything plus three spheres, and two three-sphere arrangements.
pub fn tabletop_sequence() -> Vec<GeometricScene> {
    serde_json::from_str(TABLETOP_SEQUENCE).expect("bundled layouts parse")
}

/// Runs the bootstrapping sequence with default thresholds at fuzziness `a`.
pub fn run_tabletop_sequence(a: f64) -> Result<(MemoryGraph, Vec<StepOutcome>), ExperimentError> {
    let params = SitParams {
        fuzziness: a,
        ..SitParams::default()
    };
    let iface = InputInterface::tabletop(ReificationMode::Simplified);
    let mut memory = MemoryGraph::new(iface.clone(), a)?;
    let mut steps = Vec::new();
    for layout in tabletop_sequence() {
        let scene = layout.ground(&iface)?;
        steps.push(observe(&mut memory, &scene, &params, false)?);
    }
    Ok((memory, steps))
}

/// Uniform grid of cell centres over a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.nx < 2 || self.ny < 2 {
            return Err(ExperimentError::InvalidSpec(
                "grid needs at least 2 cells per axis".into(),
            ));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(ExperimentError::InvalidSpec("grid bounds are empty".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_width(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn cell_height(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    /// Centre of cell `(ix, iy)`.
    pub fn center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.x_min + (ix as f64 + 0.5) * self.cell_width(),
            self.y_min + (iy as f64 + 0.5) * self.cell_height(),
        )
    }

    /// Cell containing `(x, y)`, clamped to the grid.
    pub fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let ix = ((x - self.x_min) / self.cell_width()).floor();
        let iy = ((y - self.y_min) / self.cell_height()).floor();
        (
            (ix.max(0.0) as usize).min(self.nx - 1),
            (iy.max(0.0) as usize).min(self.ny - 1),
        )
    }
}

/// One object of `learned_scene` is moved over every grid cell while the
/// others stay put; each placement is grounded (optionally with noise) and
/// classified against the category learned from the noise-free layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub learned_scene: GeometricScene,
    pub moving: String,
    pub grid: GridSpec,
    pub fuzziness: Vec<f64>,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default = "default_sweep_mode")]
    pub mode: ReificationMode,
    #[serde(default)]
    pub seed: u64,
}

fn default_sweep_mode() -> ReificationMode {
    ReificationMode::Simplified
}

impl SweepSpec {
    /// Two balls on opposite corners, the glass in the middle.
    pub fn balanced_sweep() -> Self {
        serde_json::from_str(BALANCED_SWEEP).expect("bundled sweep spec parses")
    }

    /// Same balls, the glass off centre.
    pub fn unbalanced_sweep() -> Self {
        serde_json::from_str(UNBALANCED_SWEEP).expect("bundled sweep spec parses")
    }

    pub fn interface(&self) -> InputInterface {
        self.learned_scene.interface_or_default(self.mode)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.grid.validate()?;
        self.kernel.validate()?;
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        if self.fuzziness.is_empty() {
            return Err(ExperimentError::InvalidSpec("no fuzziness values".into()));
        }
        for &a in &self.fuzziness {
            crate::fuzzy::check_fuzziness(a).map_err(SitError::from)?;
        }
        if !self
            .learned_scene
            .objects
            .iter()
            .any(|o| o.id == self.moving)
        {
            return Err(ExperimentError::InvalidSpec(format!(
                "moving object `{}` is not in the layout",
                self.moving
            )));
        }
        Ok(())
    }

    /// Position of the moving object in the learned layout.
    pub fn learned_position(&self) -> (f64, f64) {
        let obj = self
            .learned_scene
            .objects
            .iter()
            .find(|o| o.id == self.moving)
            .expect("validated spec");
        (obj.x, obj.y)
    }
}

/// Per-cell seed, independent of the fuzziness value so every `a` sees the
/// same noisy scenes.
fn cell_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 finaliser
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub ix: usize,
    pub iy: usize,
    pub x: f64,
    pub y: f64,
    pub degree: f64,
    pub similarity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakCell {
    pub ix: usize,
    pub iy: usize,
    pub degree: f64,
    pub similarity: f64,
}

/// Statistics over the classified cells (degree > 0), population σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub fuzziness: f64,
    pub total: usize,
    pub classified: usize,
    pub mean_degree: f64,
    pub std_degree: f64,
    pub mean_similarity: f64,
    pub std_similarity: f64,
    pub max_similarity: f64,
    pub similarity_over_one: usize,
    pub peak: Option<PeakCell>,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}

impl SweepSummary {
    /// The peak is the cell with the highest degree; ties go to the
    /// similarity closest to 1, then to row-major order.
    pub fn from_cells(fuzziness: f64, cells: &[SweepCell]) -> Self {
        let classified = || cells.iter().filter(|c| c.degree > 0.0);
        let (mean_degree, std_degree) = mean_std(classified().map(|c| c.degree));
        let (mean_similarity, std_similarity) = mean_std(classified().map(|c| c.similarity));
        let peak = classified()
            .reduce(|best, c| {
                let better = c.degree > best.degree
                    || (c.degree == best.degree
                        && (c.similarity - 1.0).abs() < (best.similarity - 1.0).abs());
                if better {
                    c
                } else {
                    best
                }
            })
            .map(|c| PeakCell {
                ix: c.ix,
                iy: c.iy,
                degree: c.degree,
                similarity: c.similarity,
            });
        Self {
            fuzziness,
            total: cells.len(),
            classified: classified().count(),
            mean_degree,
            std_degree,
            mean_similarity,
            std_similarity,
            max_similarity: classified().map(|c| c.similarity).fold(0.0, f64::max),
            similarity_over_one: classified().filter(|c| c.similarity > 1.0).count(),
            peak,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub summary: SweepSummary,
    /// Row-major: `iy * nx + ix`.
    pub cells: Vec<SweepCell>,
}

/// Grounds and encodes one scene per grid cell.
pub fn sweep_beliefs(spec: &SweepSpec) -> Result<Vec<BeliefBag>, ExperimentError> {
    spec.validate()?;
    let iface = spec.interface();
    let grid = spec.grid;
    (0..grid.len())
        .into_par_iter()
        .map(|index| {
            let (ix, iy) = (index % grid.nx, index / grid.nx);
            let (x, y) = grid.center(ix, iy);
            let mut objects = spec.learned_scene.objects.clone();
            for obj in objects.iter_mut().filter(|o| o.id == spec.moving) {
                obj.x = x;
                obj.y = y;
            }
            let noise = spec.noise.map(|n| n.with_seed(cell_seed(spec.seed, index)));
            let scene = ground(
                &objects,
                &spec.kernel,
                noise.as_ref(),
                &iface,
                &format!("cell-{ix}-{iy}"),
                index as u64,
            )?;
            Ok(encode(&scene, &iface)?)
        })
        .collect()
}

/// Beliefs of the noise-free learned layout.
pub fn learned_beliefs(spec: &SweepSpec) -> Result<BeliefBag, ExperimentError> {
    let iface = spec.interface();
    let scene = ground(
        &spec.learned_scene.objects,
        &spec.kernel,
        None,
        &iface,
        "learned",
        0,
    )?;
    Ok(encode(&scene, &iface)?)
}

/// One result per fuzziness value of the spec, in order.
pub fn distribution_sweep(spec: &SweepSpec) -> Result<Vec<SweepResult>, ExperimentError> {
    let bags = sweep_beliefs(spec)?;
    let learned = learned_beliefs(spec)?;
    spec.fuzziness
        .iter()
        .map(|&a| {
            let category = learn(&learned, a, CategoryId(1), 0)?;
            let cells = bags
                .par_iter()
                .enumerate()
                .map(|(index, bag)| {
                    let (ix, iy) = (index % spec.grid.nx, index / spec.grid.nx);
                    let (x, y) = spec.grid.center(ix, iy);
                    Ok(SweepCell {
                        ix,
                        iy,
                        x,
                        y,
                        degree: classification_degree(&category, bag).map_err(SitError::from)?,
                        similarity: similarity(&category, bag)?,
                    })
                })
                .collect::<Result<Vec<_>, ExperimentError>>()?;
            Ok(SweepResult {
                summary: SweepSummary::from_cells(a, &cells),
                cells,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub degree: f64,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSeries {
    pub fuzziness: f64,
    pub points: Vec<ScatterPoint>,
}

/// `(p, d)` pairs of the classified cells of each sweep.
pub fn similarity_scatter(spec: &SweepSpec) -> Result<Vec<ScatterSeries>, ExperimentError> {
    Ok(distribution_sweep(spec)?
        .into_iter()
        .map(|r| ScatterSeries {
            fuzziness: r.summary.fuzziness,
            points: r
                .cells
                .iter()
                .filter(|c| c.degree > 0.0)
                .map(|c| ScatterPoint {
                    degree: c.degree,
                    similarity: c.similarity,
                })
                .collect(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchSpec {
    /// Numbers of element types.
    pub v_values: Vec<usize>,
    /// Numbers of relations.
    pub w_values: Vec<usize>,
    pub scene_count: usize,
    pub repetitions: usize,
    pub elements_per_scene: usize,
    /// Probability that a given relation holds for a given ordered pair.
    pub fact_density: f64,
    pub mode: ReificationMode,
    pub params: SitParams,
    /// Learn at every step, so memory grows by one category per scene.
    pub force_learn: bool,
    pub seed: u64,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            v_values: vec![2, 4, 6, 8, 10],
            w_values: vec![2, 4, 6, 8, 10],
            scene_count: 22,
            repetitions: 4,
            elements_per_scene: 4,
            fact_density: 0.5,
            mode: ReificationMode::Full,
            params: SitParams::default(),
            force_learn: true,
            seed: 0,
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidSpec(m.into()));
        if self.scene_count == 0 || self.repetitions == 0 {
            return bad("scene_count and repetitions must be ≥ 1");
        }
        if self.v_values.is_empty() || self.w_values.is_empty() {
            return bad("need at least one v and one w");
        }
        if self.v_values.contains(&0) || self.w_values.contains(&0) {
            return bad("v and w must be ≥ 1");
        }
        if self.elements_per_scene < 2 {
            return bad("scenes need at least two elements");
        }
        if !(0.0..=1.0).contains(&self.fact_density) {
            return bad("fact_density must lie in [0, 1]");
        }
        self.params.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchPhase {
    EncodeClassify,
    LearnStructure,
}

impl std::fmt::Display for BenchPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BenchPhase::EncodeClassify => "encode_classify",
            BenchPhase::LearnStructure => "learn_structure",
        })
    }
}

/// One phase of one step, timings averaged over repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub v: usize,
    pub w: usize,
    pub step: usize,
    pub memory_size: usize,
    pub learned: bool,
    pub phase: BenchPhase,
    pub ms: f64,
}

/// Interface with `v` types `T0..` and `w` relations `r0..`.
pub fn synthetic_interface(v: usize, w: usize, mode: ReificationMode) -> InputInterface {
    InputInterface::new(
        (0..v).map(|i| TypeSymbol::new(format!("T{i}"))),
        (0..w).map(|i| RelationDecl::new(format!("r{i}"))),
        mode,
    )
    .expect("synthetic names are valid")
}

/// A random scene over `iface`: every element gets one or two types, every
/// ordered pair each relation with probability `density`, and at least one
/// fact is always present.
pub fn random_scene(
    rng: &mut impl Rng,
    iface: &InputInterface,
    elements: usize,
    density: f64,
    scene_id: &str,
    timestamp: u64,
) -> SceneObservation {
    let types: Vec<_> = iface.types().cloned().collect();
    let relations: Vec<_> = iface.relations().map(|r| r.name.clone()).collect();
    let mut scene = SceneObservation::new(scene_id, timestamp);
    for e in 0..elements {
        let n_types = rng.random_range(1..=2.min(types.len()));
        let mut degrees = Vec::new();
        while degrees.len() < n_types {
            let t = types[rng.random_range(0..types.len())].clone();
            if !degrees.iter().any(|(u, _)| *u == t) {
                degrees.push((t, rng.random_range(0.05..=1.0)));
            }
        }
        scene.elements.push(Element::new(format!("e{e}"), degrees));
    }
    for s in 0..elements {
        for o in (0..elements).filter(|&o| o != s) {
            for r in &relations {
                if rng.random_bool(density) {
                    let p = rng.random_range(0.05..=1.0);
                    scene
                        .facts
                        .push(Fact::new(format!("e{s}"), r.as_str(), format!("e{o}"), p));
                }
            }
        }
    }
    if scene.facts.is_empty() {
        scene
            .facts
            .push(Fact::new("e0", relations[0].as_str(), "e1", 1.0));
    }
    scene
}

fn run_config(spec: &BenchSpec, v: usize, w: usize) -> Result<Vec<BenchRow>, ExperimentError> {
    let iface = synthetic_interface(v, w, spec.mode);
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(spec.seed, v * 1000 + w));
    let scenes: Vec<_> = (0..spec.scene_count)
        .map(|t| {
            random_scene(
                &mut rng,
                &iface,
                spec.elements_per_scene,
                spec.fact_density,
                &format!("v{v}w{w}-{t}"),
                t as u64 + 1,
            )
        })
        .collect();

    let mut totals = vec![(Duration::ZERO, Duration::ZERO); spec.scene_count];
    let mut shape = Vec::with_capacity(spec.scene_count);
    for rep in 0..spec.repetitions {
        let mut memory = MemoryGraph::new(iface.clone(), spec.params.fuzziness)?;
        for (t, scene) in scenes.iter().enumerate() {
            let out = observe(&mut memory, scene, &spec.params, spec.force_learn)?;
            totals[t].0 += out.timing.encode_classify;
            totals[t].1 += out.timing.learn_structure;
            if rep == 0 {
                shape.push((memory.len(), out.learned.is_some()));
            }
        }
    }

    let reps = spec.repetitions as f64;
    let mut rows = Vec::with_capacity(2 * spec.scene_count);
    for (t, ((ec, ls), (memory_size, learned))) in totals.into_iter().zip(shape).enumerate() {
        for (phase, total) in [
            (BenchPhase::EncodeClassify, ec),
            (BenchPhase::LearnStructure, ls),
        ] {
            rows.push(BenchRow {
                v,
                w,
                step: t + 1,
                memory_size,
                learned,
                phase,
                ms: total.as_secs_f64() * 1e3 / reps,
            });
        }
    }
    Ok(rows)
}

/// Runs every `(v, w)` configuration in parallel; steps within one
/// configuration run in order. Rows are sorted by `(v, w, step, phase)`.
pub fn complexity_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>, ExperimentError> {
    spec.validate()?;
    let configs: Vec<(usize, usize)> = spec
        .v_values
        .iter()
        .flat_map(|&v| spec.w_values.iter().map(move |&w| (v, w)))
        .collect();
    let per_config = configs
        .par_iter()
        .map(|&(v, w)| run_config(spec, v, w))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows: Vec<BenchRow> = per_config.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.v, r.w, r.step, r.phase));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_sweep() -> SweepSpec {
        let mut spec = SweepSpec::balanced_sweep();
        spec.grid.nx = 8;
        spec.grid.ny = 8;
        spec
    }

    #[test]
    fn grid_geometry() {
        let g = GridSpec {
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 2.0,
            nx: 4,
            ny: 4,
        };
        assert_eq!(g.center(0, 0), (0.125, 0.25));
        assert_eq!(g.cell_of(0.126, 0.26), (0, 0));
        assert_eq!(g.cell_of(-1.0, 5.0), (0, 3));
        let bad = GridSpec { nx: 1, ..g };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sweeps_are_deterministic() {
        let spec = small_sweep();
        let a = distribution_sweep(&spec).unwrap();
        let b = distribution_sweep(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), spec.fuzziness.len());
        assert_eq!(a[0].cells.len(), 64);
    }

    #[test]
    fn crisp_noise_free_sweep_matches_thresholds() {
        let mut spec = small_sweep();
        spec.noise = None;
        spec.fuzziness = vec![0.0];
        let learned = learned_beliefs(&spec).unwrap();
        let bags = sweep_beliefs(&spec).unwrap();
        let result = &distribution_sweep(&spec).unwrap()[0];
        for (cell, bag) in result.cells.iter().zip(&bags) {
            let all_reach = learned.entries().all(|(k, c)| bag.cardinality(k) >= c);
            assert_eq!(cell.degree == 1.0, all_reach);
            assert!(cell.degree == 0.0 || cell.degree == 1.0);
        }
    }

    #[test]
    fn scatter_keeps_classified_cells() {
        let spec = small_sweep();
        let sweep = distribution_sweep(&spec).unwrap();
        let scatter = similarity_scatter(&spec).unwrap();
        for (r, s) in sweep.iter().zip(&scatter) {
            assert_eq!(s.points.len(), r.summary.classified);
        }
    }

    #[test]
    fn sweep_spec_validation() {
        let mut spec = small_sweep();
        spec.moving = "nope".into();
        assert!(distribution_sweep(&spec).is_err());
        let mut spec = small_sweep();
        spec.fuzziness = vec![1.5];
        assert!(distribution_sweep(&spec).is_err());
    }

    #[test]
    fn summary_statistics() {
        let cell = |degree, similarity| SweepCell {
            ix: 0,
            iy: 0,
            x: 0.0,
            y: 0.0,
            degree,
            similarity,
        };
        let s = SweepSummary::from_cells(0.3, &[cell(0.0, 0.2), cell(0.5, 1.2), cell(1.0, 0.8)]);
        assert_eq!((s.total, s.classified, s.similarity_over_one), (3, 2, 1));
        assert!((s.mean_degree - 0.75).abs() < 1e-12);
        assert!((s.std_degree - 0.25).abs() < 1e-12);
        assert_eq!(s.peak.unwrap().degree, 1.0);
    }

    #[test]
    fn bench_shape() {
        let spec = BenchSpec {
            v_values: vec![2, 3],
            w_values: vec![2],
            scene_count: 5,
            repetitions: 1,
            ..BenchSpec::default()
        };
        let rows = complexity_bench(&spec).unwrap();
        assert_eq!(rows.len(), 2 * 5 * 2);
        for pair in rows.chunks(2) {
            assert_eq!(pair[0].phase, BenchPhase::EncodeClassify);
            assert_eq!(pair[1].phase, BenchPhase::LearnStructure);
            assert_eq!(pair[0].memory_size, pair[0].step);
        }
        let bad = BenchSpec {
            scene_count: 0,
            ..BenchSpec::default()
        };
        assert!(complexity_bench(&bad).is_err());
    }

    #[test]
    fn random_scenes_are_valid() {
        let iface = synthetic_interface(3, 2, ReificationMode::Full);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 0..50 {
            let s = random_scene(&mut rng, &iface, 3, 0.2, "r", t);
            s.validate(&iface).unwrap();
            assert!(!s.facts.is_empty());
        }
    }
}
