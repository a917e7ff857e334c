//! Curated homogeneous spaces with known metrics and stratum labels.
//!
//! Entries are JSON documents embedded at compile time; [`Entry::load`] reads
//! the same schema from disk. Every entry is validated when built: Jacobi
//! identity, metric invariance, Cartan involution and label identities.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use rand::Rng;

use crate::homgeom::{orbit_mean_curvature, random_invariant_metric, HomogeneousSpace, InvariantMetric};
use crate::liealg::{IwasawaData, LieAlgebra, LieAlgebraJson, Subspace, SubspaceJson};
use crate::linalg::{self, Mat, Vector};
use crate::strata::{beta_in_frame, BetaData, BetaJson, BetaSource};

const SOURCES: &[(&str, &str)] = &[
    ("abelian3", include_str!("../../catalog/abelian3.json")),
    ("h3", include_str!("../../catalog/h3.json")),
    ("axb", include_str!("../../catalog/axb.json")),
    ("rh_2", include_str!("../../catalog/rh_2.json")),
    ("rh_3", include_str!("../../catalog/rh_3.json")),
    ("rh_4", include_str!("../../catalog/rh_4.json")),
    ("rh_5", include_str!("../../catalog/rh_5.json")),
    ("e2_like_solvable", include_str!("../../catalog/e2_like_solvable.json")),
    ("sl2r", include_str!("../../catalog/sl2r.json")),
    ("sl2r_so2", include_str!("../../catalog/sl2r_so2.json")),
    ("sl2r_x2", include_str!("../../catalog/sl2r_x2.json")),
    ("su2", include_str!("../../catalog/su2.json")),
    ("sl2r_semidirect_r2", include_str!("../../catalog/sl2r_semidirect_r2.json")),
    ("nonstandard4", include_str!("../../catalog/nonstandard4.json")),
    ("so23_so3", include_str!("../../catalog/so23_so3.json")),
];

const JACOBI_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricJson {
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
}

/// On-disk schema of a catalog entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryJson {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    pub algebra: LieAlgebraJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isotropy: Option<SubspaceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement: Option<SubspaceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cartan_involution: Option<Vec<Vec<f64>>>,
    /// Label in the algebra's own basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levi: Option<SubspaceJson>,
}

/// A validated catalog entry.
#[derive(Debug, Clone)]
pub struct Entry {
    pub json: EntryJson,
    space: HomogeneousSpace,
    metric: InvariantMetric,
    theta: Option<Mat>,
    beta: Option<Mat>,
    levi: Option<Subspace>,
}

pub fn names() -> Vec<&'static str> {
    SOURCES.iter().map(|(n, _)| *n).collect()
}

pub fn all() -> Result<Vec<Entry>> {
    SOURCES.iter().map(|(_, s)| Entry::from_str(s)).collect()
}

/// Looks up a built-in entry by name or alias.
pub fn get(name: &str) -> Result<Entry> {
    for (n, src) in SOURCES {
        if *n == name {
            return Entry::from_str(src);
        }
    }
    for (_, src) in SOURCES {
        let json: EntryJson = serde_json::from_str(src)?;
        if json.aliases.iter().any(|a| a == name) {
            return Entry::from_json(json);
        }
    }
    Err(Error::invalid(format!("no catalog entry named '{name}'")))
}

/// Resolves a file path if it exists, otherwise a built-in name (the file
/// stem of a path is tried too, so `catalog/axb.json` works from anywhere).
pub fn resolve(target: &str) -> Result<Entry> {
    let path = Path::new(target);
    if path.is_file() {
        return Entry::load(path);
    }
    match get(target) {
        Ok(e) => Ok(e),
        Err(err) => match path.file_stem().and_then(|s| s.to_str()) {
            Some(stem) if stem != target => get(stem),
            _ => Err(err),
        },
    }
}

pub(crate) fn matrix(rows: &[Vec<f64>], what: &str) -> Result<Mat> {
    linalg::from_rows(rows).ok_or_else(|| Error::Schema(format!("{what}: ragged or empty matrix")))
}

fn square(m: &Mat, n: usize, what: &str) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Schema(format!(
            "{what} must be {n}x{n}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

impl Entry {
    #[allow(clippy::should_implement_trait)]
    pub fn from_str(src: &str) -> Result<Self> {
        Self::from_json(serde_json::from_str(src)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_json(json: EntryJson) -> Result<Self> {
        let alg = LieAlgebra::from_json(&json.algebra)?;
        let n = alg.dim();
        let jac = alg.jacobi_residual();
        if jac > JACOBI_TOL {
            return Err(Error::verification(format!("Jacobi identity of '{}'", json.name), jac));
        }
        let tol = alg.tol();
        let h = match &json.isotropy {
            Some(s) => Subspace::from_json(s, n, tol)?,
            None => Subspace::zero(n),
        };
        let space = match &json.complement {
            Some(m) => {
                let m = Subspace::from_json(m, n, tol)?;
                HomogeneousSpace::with_complement(alg, h, m)?
            }
            None if h.dim() == 0 => HomogeneousSpace::group(alg),
            None => HomogeneousSpace::new(alg, h)?,
        };
        let p = space.dim_m();
        let metric = match &json.metric {
            Some(m) => {
                let g = matrix(&m.g, "metric")?;
                square(&g, p, "metric")?;
                InvariantMetric::checked(&space, g)?
            }
            None => InvariantMetric::identity(p),
        };
        let theta = match &json.cartan_involution {
            Some(rows) => {
                let t = matrix(rows, "cartan_involution")?;
                square(&t, n, "cartan_involution")?;
                space.algebra().cartan_inner_product(&t)?;
                Some(t)
            }
            None => None,
        };
        let levi = match &json.levi {
            Some(s) => {
                let l = Subspace::from_json(s, n, tol)?;
                let res = space.algebra().subalgebra_residual(&l);
                if res > 1e-9 {
                    return Err(Error::verification("Levi factor is a subalgebra", res));
                }
                Some(l)
            }
            None => None,
        };
        let mut entry = Entry {
            json,
            space,
            metric,
            theta,
            beta: None,
            levi,
        };
        if let Some(b) = &entry.json.beta {
            let beta = matrix(&b.beta, "beta")?;
            square(&beta, n, "beta")?;
            entry.beta = Some(beta);
            // Validates symmetry in the frame and the trace identities.
            entry.beta_frame()?.expect("label present");
        }
        Ok(entry)
    }

    pub fn name(&self) -> &str {
        &self.json.name
    }

    pub fn space(&self) -> &HomogeneousSpace {
        &self.space
    }

    pub fn algebra(&self) -> &LieAlgebra {
        self.space.algebra()
    }

    pub fn metric(&self) -> &InvariantMetric {
        &self.metric
    }

    pub fn cartan_involution(&self) -> Option<&Mat> {
        self.theta.as_ref()
    }

    pub fn levi(&self) -> Option<&Subspace> {
        self.levi.as_ref()
    }

    /// Catalog label in the algebra's own basis.
    pub fn beta(&self) -> Option<&Mat> {
        self.beta.as_ref()
    }

    /// Catalog label moved to the adapted frame of the entry metric.
    pub fn beta_frame(&self) -> Result<Option<BetaData>> {
        let Some(beta) = &self.beta else {
            return Ok(None);
        };
        let frame = self.space.adapted(&self.metric)?;
        let b = beta_in_frame(&frame, beta, BetaSource::Catalog, None)?;
        let res = b.identity_residuals();
        let worst = res[..3].iter().cloned().fold(0.0, f64::max);
        if worst > 1e-7 {
            return Err(Error::verification(format!("label identities of '{}'", self.name()), worst));
        }
        Ok(Some(b))
    }

    /// Iwasawa decomposition from the declared Cartan involution.
    pub fn iwasawa(&self) -> Result<Option<IwasawaData>> {
        match &self.theta {
            Some(t) => Ok(Some(self.algebra().iwasawa_decomposition(t)?)),
            None => Ok(None),
        }
    }

    pub fn has_trivial_isotropy(&self) -> bool {
        self.space.dim_h() == 0
    }

    /// A unit element of k centralizing the isotropy, so that Ad(exp sZ)
    /// preserves h.
    pub fn rotation_generator(&self) -> Result<Option<Vector>> {
        let Some(iw) = self.iwasawa()? else {
            return Ok(None);
        };
        let alg = self.algebra();
        let n = alg.dim();
        let kb = iw.k.orthonormal_basis();
        let h = self.space.isotropy();
        let mut rows = Mat::zeros(n * h.dim().max(1), kb.ncols());
        for (i, hv) in h.vectors().iter().enumerate() {
            let block = -alg.ad(hv)? * kb;
            rows.view_mut((i * n, 0), (n, kb.ncols())).copy_from(&block);
        }
        let null = linalg::null_space(&rows, alg.tol());
        if null.ncols() == 0 {
            return Ok(None);
        }
        let z = kb * null.column(0);
        Ok(Some(&z / z.norm()))
    }

    /// Ad(exp sZ) applied to the Iwasawa subalgebra a ⊕ n.
    pub fn rotated_iwasawa(&self, s: f64) -> Result<Subspace> {
        let iw = self.iwasawa()?.ok_or_else(|| Error::invalid(format!("'{}' has no Cartan involution", self.name())))?;
        let z = self
            .rotation_generator()?
            .ok_or_else(|| Error::invalid("no element of k centralizes the isotropy"))?;
        let tol = self.algebra().tol();
        let rot = linalg::expm(&(self.algebra().ad(&z)? * s));
        Ok(iw.an(tol).image(&rot, tol))
    }

    /// Orbit mean curvatures of rotated Iwasawa subalgebras: the entry metric
    /// plus `metrics` seeded invariant metrics, each against `rotations`
    /// equally spaced angles in [0, π).
    pub fn orbit_survey<R: Rng + ?Sized>(
        &self,
        metrics: usize,
        rotations: usize,
        spread: f64,
        rng: &mut R,
    ) -> Result<Vec<OrbitRow>> {
        let subalgebras: Vec<(f64, Subspace)> = (0..rotations.max(1))
            .map(|j| {
                let s = std::f64::consts::PI * j as f64 / rotations.max(1) as f64;
                self.rotated_iwasawa(s).map(|sub| (s, sub))
            })
            .collect::<Result<_>>()?;
        let mut rows = Vec::new();
        for i in 0..=metrics {
            let metric = if i == 0 {
                self.metric.clone()
            } else {
                random_invariant_metric(&self.space, &self.metric, spread, rng)?
            };
            for (s, sub) in &subalgebras {
                rows.push(OrbitRow {
                    metric_index: i,
                    angle: *s,
                    tr_l: orbit_mean_curvature(&self.space, &metric, sub)?,
                });
            }
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitRow {
    pub metric_index: usize,
    pub angle: f64,
    pub tr_l: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homgeom::{mean_curvature, ricci_operator};

    #[test]
    fn all_entries_load() {
        let entries = all().unwrap();
        assert_eq!(entries.len(), SOURCES.len());
        for (e, (name, _)) in entries.iter().zip(SOURCES) {
            assert_eq!(e.name(), *name);
        }
    }

    #[test]
    fn aliases_and_paths() {
        assert_eq!(get("heisenberg3").unwrap().name(), "h3");
        assert_eq!(resolve("catalog/heisenberg3.json").unwrap().name(), "h3");
        assert!(get("nope").is_err());
    }

    #[test]
    fn einstein_entries() {
        for name in ["axb", "rh_2", "rh_3", "rh_4", "rh_5", "sl2r_so2"] {
            let e = get(name).unwrap();
            let ric = ricci_operator(e.space(), e.metric()).unwrap();
            let p = e.space().dim_m();
            assert!(linalg::max_abs(&(ric + Mat::identity(p, p))) < 1e-10, "{name}");
        }
    }

    #[test]
    fn rh_tight_bound() {
        for n in 2..=5 {
            let e = get(&format!("rh_{n}")).unwrap();
            let b = e.beta_frame().unwrap().unwrap();
            let h = mean_curvature(e.space(), e.metric()).h;
            assert!((b.beta_plus().trace() - 2.0 * h).abs() < 1e-10);
            assert!((2.0 * h - (n as f64 - 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn nonstandard_label_spectrum() {
        let e = get("nonstandard4").unwrap();
        let b = e.beta_frame().unwrap().unwrap();
        let want = [-0.5, -0.5, 0.0, 0.0];
        for (x, y) in b.eigenvalues().iter().zip(want) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_broken_jacobi() {
        let src = r#"{"name":"bad","algebra":{"dim":3,"labels":["a","b","c"],
            "brackets":[[0,1,2,1.0],[1,2,0,1.0],[0,2,1,1.0],[0,2,0,1.0]]}}"#;
        assert!(Entry::from_str(src).is_err());
    }

    #[test]
    fn rejects_unknown_fields_and_bad_shapes() {
        let src = r#"{"name":"x","algebra":{"dim":1,"labels":["a"]},"extra":1}"#;
        assert!(matches!(Entry::from_str(src), Err(Error::Json(_))));
        let src = r#"{"name":"x","algebra":{"dim":2,"labels":["a","b"]},"metric":{"G":[[1.0]]}}"#;
        assert!(matches!(Entry::from_str(src), Err(Error::Schema(_))));
    }

    #[test]
    fn semisimple_entries_have_iwasawa() {
        for name in ["sl2r", "sl2r_x2", "so23_so3"] {
            let e = get(name).unwrap();
            assert!(e.iwasawa().unwrap().is_some(), "{name}");
        }
    }

    #[test]
    fn sl2_iwasawa_orbits_are_minimal() {
        use rand::SeedableRng;
        let e = get("sl2r").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rows = e.orbit_survey(5, 4, 0.5, &mut rng).unwrap();
        assert_eq!(rows.len(), 24);
        assert!(rows.iter().all(|r| r.tr_l.abs() < 1e-10));
    }

    #[test]
    fn so23_rotated_orbit_is_not_minimal() {
        let e = get("so23_so3").unwrap();
        let z = e.rotation_generator().unwrap().unwrap();
        assert!(z[0].abs() > 0.999);
        for angle in [0.0, 0.7] {
            let sub = e.rotated_iwasawa(angle).unwrap();
            let tr = orbit_mean_curvature(e.space(), e.metric(), &sub).unwrap();
            assert!(tr.abs() > 1e-3, "{tr}");
        }
    }
}
