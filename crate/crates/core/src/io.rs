//! JSON and CSV formats.
//!
//! Complex numbers are `[re, im]` pairs; a bare number is read as a real
//! value. Matrices are arrays of rows. CSV matrices have no header and
//! alternate `re, im` columns. Output values pass through `f64`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{FrameKind, FrameReport};
use crate::group::{FiniteAbelianGroup, Subgroup, Transversal};
use crate::invariant::RangeFunction;
use crate::range_ops::RangeOperator;
use crate::scalar::{cx, CMatrix, Cx, Real};
use crate::transforms::{FiberedVector, GroupVector, ModZak};

fn format_err(e: impl std::fmt::Display) -> Error {
    Error::Format(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgroupSpec {
    pub generators: Vec<Vec<i64>>,
}

/// Group file contents; `subgroup` is the default `Λ` for commands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub orders: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<SubgroupSpec>,
}

impl GroupSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(format_err)
    }

    pub fn build(&self) -> Result<FiniteAbelianGroup> {
        FiniteAbelianGroup::new(self.orders.clone())
    }
}

impl SubgroupSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(format_err)
    }

    pub fn build(&self, g: &FiniteAbelianGroup) -> Result<Subgroup> {
        let gens = self
            .generators
            .iter()
            .map(|c| g.element(c))
            .collect::<Result<Vec<_>>>()?;
        Subgroup::generate(g, &gens)
    }

    /// The generating set stored with `h`.
    pub fn of(h: &Subgroup) -> Self {
        Self {
            generators: h.generators().iter().map(coords_i64).collect(),
        }
    }
}

fn coords_i64(e: &crate::group::Element) -> Vec<i64> {
    e.coords().iter().map(|&c| c as i64).collect()
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
enum ComplexRepr {
    Pair([f64; 2]),
    Real(f64),
}

impl ComplexRepr {
    fn value<T: Real>(self) -> Cx<T> {
        match self {
            ComplexRepr::Pair([re, im]) => cx(T::lit(re), T::lit(im)),
            ComplexRepr::Real(re) => cx(T::lit(re), T::zero()),
        }
    }
}

pub fn complex_json<T: Real>(z: Cx<T>) -> [f64; 2] {
    [z.re.to_f64_lossy(), z.im.to_f64_lossy()]
}

pub fn vector_json<T: Real>(v: &[Cx<T>]) -> Vec<[f64; 2]> {
    v.iter().map(|&z| complex_json(z)).collect()
}

pub fn matrix_json<T: Real>(m: &CMatrix<T>) -> Vec<Vec<[f64; 2]>> {
    m.row_iter()
        .map(|r| r.iter().map(|&z| complex_json(z)).collect())
        .collect()
}

fn rows_to_matrix<T: Real>(rows: Vec<Vec<ComplexRepr>>) -> Result<CMatrix<T>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::Format(format!(
            "row {i} has {} entries, expected {ncols}",
            r.len()
        )));
    }
    let nrows = rows.len();
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j].value()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VectorFile {
    Bare(Vec<ComplexRepr>),
    Wrapped { values: Vec<ComplexRepr> },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Bare(Vec<Vec<ComplexRepr>>),
    Wrapped { matrix: Vec<Vec<ComplexRepr>> },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GeneratorsFile {
    Bare(Vec<Vec<ComplexRepr>>),
    Wrapped { generators: Vec<Vec<ComplexRepr>> },
}

/// A vector on `G`: `[[re, im], ...]` or `{"values": [...]}`.
pub fn parse_vector<T: Real>(g: &FiniteAbelianGroup, text: &str) -> Result<GroupVector<T>> {
    let parsed: VectorFile = serde_json::from_str(text).map_err(format_err)?;
    let vals = match parsed {
        VectorFile::Bare(v) | VectorFile::Wrapped { values: v } => v,
    };
    GroupVector::new(g, vals.into_iter().map(ComplexRepr::value).collect())
}

/// A generator list: an array of vectors or `{"generators": [...]}`.
pub fn parse_generators<T: Real>(
    g: &FiniteAbelianGroup,
    text: &str,
) -> Result<Vec<GroupVector<T>>> {
    let parsed: GeneratorsFile = serde_json::from_str(text).map_err(format_err)?;
    let gens = match parsed {
        GeneratorsFile::Bare(v) | GeneratorsFile::Wrapped { generators: v } => v,
    };
    gens.into_iter()
        .map(|v| GroupVector::new(g, v.into_iter().map(ComplexRepr::value).collect()))
        .collect()
}

pub fn parse_matrix_json<T: Real>(text: &str) -> Result<CMatrix<T>> {
    let parsed: MatrixFile = serde_json::from_str(text).map_err(format_err)?;
    match parsed {
        MatrixFile::Bare(rows) | MatrixFile::Wrapped { matrix: rows } => rows_to_matrix(rows),
    }
}

/// Headerless CSV; each row holds `re, im` pairs.
pub fn parse_matrix_csv<T: Real>(text: &str) -> Result<CMatrix<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(format_err)?;
        if rec.len() % 2 != 0 {
            return Err(Error::Format(format!(
                "csv row {i} has an odd number of columns"
            )));
        }
        let nums = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::Format(format!("csv row {i}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(
            nums.chunks(2)
                .map(|p| ComplexRepr::Pair([p[0], p[1]]))
                .collect(),
        );
    }
    rows_to_matrix(rows)
}

pub fn matrix_csv<T: Real>(m: &CMatrix<T>) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for r in m.row_iter() {
        let fields: Vec<String> = r
            .iter()
            .flat_map(|z| [z.re.to_f64_lossy().to_string(), z.im.to_f64_lossy().to_string()])
            .collect();
        w.write_record(&fields).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv is utf-8")
}

/// Chooses CSV for a `.csv` extension and JSON otherwise.
pub fn parse_matrix<T: Real>(path: &Path, text: &str) -> Result<CMatrix<T>> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        parse_matrix_csv(text)
    } else {
        parse_matrix_json(text)
    }
}

/// Coset transversal: the subgroup and the representatives in order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionJson {
    pub subgroup: SubgroupSpec,
    pub representatives: Vec<Vec<i64>>,
}

impl SectionJson {
    pub fn of(t: &Transversal) -> Self {
        Self {
            subgroup: SubgroupSpec::of(t.subgroup()),
            representatives: t.representatives().iter().map(coords_i64).collect(),
        }
    }

    fn matches(&self, t: &Transversal) -> bool {
        self.representatives == Self::of(t).representatives
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberedVectorJson {
    pub base_section: SectionJson,
    pub fiber_section: SectionJson,
    /// Row `p` is the fiber at the `p`-th base representative.
    pub values: Vec<Vec<[f64; 2]>>,
}

impl FiberedVectorJson {
    pub fn of<T: Real>(v: &FiberedVector<T>) -> Self {
        Self {
            base_section: SectionJson::of(v.base_section()),
            fiber_section: SectionJson::of(v.fiber_section()),
            values: matrix_json(v.values()),
        }
    }

    /// Rebuilds the fibered vector against the sections of `zak`, which
    /// must list the same representatives.
    pub fn to_fibered<T: Real>(&self, zak: &ModZak<T>) -> Result<FiberedVector<T>> {
        if !self.base_section.matches(zak.base_section())
            || !self.fiber_section.matches(zak.fiber_section())
        {
            return Err(Error::InconsistentSections(
                "fibered vector sections differ from the canonical sections of this subgroup".into(),
            ));
        }
        let rows = self
            .values
            .iter()
            .map(|r| r.iter().map(|&p| ComplexRepr::Pair(p)).collect())
            .collect();
        FiberedVector::new(
            zak.base_section().clone(),
            zak.fiber_section().clone(),
            rows_to_matrix(rows)?,
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectionFiberJson {
    pub fiber_index: usize,
    pub representative: Vec<i64>,
    pub rank: usize,
    pub projection: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RangeFunctionJson {
    pub base_section: SectionJson,
    pub fiber_dim: usize,
    pub dimension: usize,
    pub fibers: Vec<ProjectionFiberJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankProfileJson {
    pub ranks: Vec<usize>,
    pub dimension: usize,
}

impl RangeFunctionJson {
    pub fn of<T: Real>(rf: &RangeFunction<T>) -> Self {
        let base = rf.base_section();
        Self {
            base_section: SectionJson::of(base),
            fiber_dim: rf.fiber_dim(),
            dimension: rf.dimension(),
            fibers: (0..rf.fiber_count())
                .map(|p| ProjectionFiberJson {
                    fiber_index: p,
                    representative: coords_i64(&base.group().element_at(base.reps()[p])),
                    rank: rf.rank(p),
                    projection: matrix_json(&rf.projection(p)),
                })
                .collect(),
        }
    }

    pub fn to_range_function<T: Real>(&self, zak: &ModZak<T>) -> Result<RangeFunction<T>> {
        if !self.base_section.matches(zak.base_section()) {
            return Err(Error::InconsistentSections(
                "range function base section differs from the canonical section".into(),
            ));
        }
        let projections = self
            .fibers
            .iter()
            .map(|f| rows_from_pairs(&f.projection))
            .collect::<Result<Vec<_>>>()?;
        RangeFunction::from_projections(zak.base_section().clone(), zak.fiber_dim(), &projections)
    }
}

impl RankProfileJson {
    pub fn of<T: Real>(rf: &RangeFunction<T>) -> Self {
        Self {
            ranks: rf.ranks(),
            dimension: rf.dimension(),
        }
    }
}

fn rows_from_pairs<T: Real>(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix<T>> {
    rows_to_matrix(
        rows.iter()
            .map(|r| r.iter().map(|&p| ComplexRepr::Pair(p)).collect())
            .collect(),
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorFiberJson {
    pub fiber_index: usize,
    pub representative: Vec<i64>,
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub residual: f64,
    pub norm: f64,
    pub hs_norm: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorSummaryJson {
    pub sup_norm: f64,
    pub hs_norm: f64,
    pub trace: [f64; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RangeOperatorJson {
    pub base_section: SectionJson,
    pub fiber_dim: usize,
    pub fibers: Vec<OperatorFiberJson>,
    pub summary: OperatorSummaryJson,
    /// Domain range function; when absent, readers use the space supplied
    /// alongside.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<RangeFunctionJson>,
}

impl RangeOperatorJson {
    pub fn of<T: Real>(r: &RangeOperator<T>) -> Self {
        let base = r.base_section();
        let norms = r.norm_profile();
        let hs = r.hs_profile();
        Self {
            base_section: SectionJson::of(base),
            fiber_dim: r.domain().fiber_dim(),
            fibers: (0..r.fibers().len())
                .map(|p| OperatorFiberJson {
                    fiber_index: p,
                    representative: coords_i64(&base.group().element_at(base.reps()[p])),
                    matrix: matrix_json(r.fiber(p)),
                    residual: r.residuals()[p].to_f64_lossy(),
                    norm: norms[p].to_f64_lossy(),
                    hs_norm: hs[p].to_f64_lossy(),
                })
                .collect(),
            summary: OperatorSummaryJson {
                sup_norm: r.sup_norm().to_f64_lossy(),
                hs_norm: r.hs_norm_fiberwise().to_f64_lossy(),
                trace: complex_json(r.trace_fiberwise()),
            },
            domain: Some(RangeFunctionJson::of(r.domain())),
        }
    }

    /// Fiber matrices ordered by `fiber_index`, over the stored domain or
    /// `fallback` when none is stored.
    pub fn to_range_operator<T: Real>(
        &self,
        zak: &ModZak<T>,
        fallback: &RangeFunction<T>,
    ) -> Result<RangeOperator<T>> {
        if !self.base_section.matches(zak.base_section()) {
            return Err(Error::InconsistentSections(
                "range operator base section differs from the canonical section".into(),
            ));
        }
        let n = zak.fiber_count();
        let mut mats: Vec<Option<CMatrix<T>>> = vec![None; n];
        for f in &self.fibers {
            let slot = mats.get_mut(f.fiber_index).ok_or_else(|| {
                Error::Format(format!("fiber_index {} out of range", f.fiber_index))
            })?;
            if slot.is_some() {
                return Err(Error::Format(format!("fiber_index {} repeated", f.fiber_index)));
            }
            *slot = Some(rows_from_pairs(&f.matrix)?);
        }
        let mats = mats
            .into_iter()
            .enumerate()
            .map(|(p, m)| m.ok_or_else(|| Error::Format(format!("fiber {p} missing"))))
            .collect::<Result<Vec<_>>>()?;
        let domain = match &self.domain {
            Some(d) => d.to_range_function(zak)?,
            None => fallback.clone(),
        };
        RangeOperator::from_fibers(domain, mats)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberBoundsJson {
    pub fiber_index: usize,
    pub representative: Vec<i64>,
    pub lower: f64,
    pub upper: f64,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsPair {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrameReportJson {
    pub lower: f64,
    pub upper: f64,
    pub kind: FrameKind,
    pub riesz: Option<BoundsPair>,
    pub per_fiber: Vec<FiberBoundsJson>,
}

impl FrameReportJson {
    pub fn of<T: Real>(r: &FrameReport<T>, base: &Arc<Transversal>) -> Self {
        Self {
            lower: r.lower.to_f64_lossy(),
            upper: r.upper.to_f64_lossy(),
            kind: r.kind,
            riesz: r.riesz.map(|(lo, hi)| BoundsPair {
                lower: lo.to_f64_lossy(),
                upper: hi.to_f64_lossy(),
            }),
            per_fiber: r
                .per_fiber
                .iter()
                .map(|b| FiberBoundsJson {
                    fiber_index: b.fiber,
                    representative: coords_i64(&base.group().element_at(base.reps()[b.fiber])),
                    lower: b.lower.to_f64_lossy(),
                    upper: b.upper.to_f64_lossy(),
                    rank: b.rank,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::ModInvariantSpace;
    use crate::ops::GroupOperator;
    use crate::range_ops::extract_range_operator;

    fn z4_with(l: i64) -> Arc<ModZak<f64>> {
        let g = FiniteAbelianGroup::cyclic(4).unwrap();
        let h = Subgroup::generate(&g, &[g.element(&[l]).unwrap()]).unwrap();
        ModZak::shared(&h)
    }

    #[test]
    fn group_spec_round_trip() {
        let spec = GroupSpec::parse(r#"{"orders":[2,4],"subgroup":{"generators":[[1,2]]}}"#).unwrap();
        let g = spec.build().unwrap();
        let h = spec.subgroup.as_ref().unwrap().build(&g).unwrap();
        assert_eq!(h.order(), 2);
        assert_eq!(SubgroupSpec::of(&h).generators, vec![vec![1, 2]]);
        assert!(GroupSpec::parse(r#"{"orders":[2],"extra":1}"#).is_err());
        assert!(GroupSpec::parse("{").is_err());
        assert!(matches!(
            GroupSpec::parse(r#"{"orders":[0]}"#).unwrap().build(),
            Err(Error::InvalidOrders(_))
        ));
    }

    #[test]
    fn vectors_accept_pairs_and_reals() {
        let g = FiniteAbelianGroup::cyclic(3).unwrap();
        let v: GroupVector<f64> = parse_vector(&g, "[1, [0, 2], -0.5]").unwrap();
        assert_eq!(v.values()[1], Cx::new(0.0, 2.0));
        let w: GroupVector<f64> = parse_vector(&g, r#"{"values": [1, [0, 2], -0.5]}"#).unwrap();
        assert_eq!(v, w);
        assert!(parse_vector::<f64>(&g, "[1, 2]").is_err());
        let gens: Vec<GroupVector<f64>> =
            parse_generators(&g, r#"{"generators": [[1,0,0],[0,1,0]]}"#).unwrap();
        assert_eq!(gens.len(), 2);
    }

    #[test]
    fn matrix_json_and_csv_agree() {
        let m = CMatrix::<f64>::from_fn(2, 3, |i, j| Cx::new(i as f64 + 0.25, j as f64 - 1.5));
        let json = serde_json::to_string(&matrix_json(&m)).unwrap();
        assert_eq!(parse_matrix_json::<f64>(&json).unwrap(), m);
        let csv = matrix_csv(&m);
        assert_eq!(parse_matrix_csv::<f64>(&csv).unwrap(), m);
        assert_eq!(parse_matrix::<f64>(Path::new("a.CSV"), &csv).unwrap(), m);
        assert!(parse_matrix_csv::<f64>("1,2,3\n").is_err());
        assert!(parse_matrix_json::<f64>("[[1,2],[3]]").is_err());
    }

    #[test]
    fn fibered_vector_round_trip() {
        let z = z4_with(2);
        let g = z.group().clone();
        let f = GroupVector::new(&g, (0..4).map(|k| Cx::new(k as f64, 1.0)).collect()).unwrap();
        let fv = z.apply(&f).unwrap();
        let text = serde_json::to_string(&FiberedVectorJson::of(&fv)).unwrap();
        let back: FiberedVectorJson = serde_json::from_str(&text).unwrap();
        let fv2 = back.to_fibered(&z).unwrap();
        assert!((fv2.values() - fv.values()).norm() < 1e-15);
        assert!(matches!(back.to_fibered(&z4_with(1)), Err(Error::InconsistentSections(_))));
    }

    #[test]
    fn range_operator_round_trip() {
        let z = z4_with(2);
        let g = z.group().clone();
        let w = ModInvariantSpace::new(z.clone(), vec![GroupVector::delta(&g, 1)], 1e-8).unwrap();
        let u = GroupOperator::identity(&g).plus(&GroupOperator::modulation(&g, 2));
        let r = extract_range_operator(&u, &w, 1e-9).unwrap();
        let js = RangeOperatorJson::of(&r);
        assert_eq!(js.fibers.len(), 2);
        let text = serde_json::to_string(&js).unwrap();
        let back: RangeOperatorJson = serde_json::from_str(&text).unwrap();
        let r2 = back.to_range_operator(&z, w.range_function()).unwrap();
        assert!(r2.max_fiber_distance(&r) < 1e-14);
        assert!(r2.domain().distance(r.domain()).unwrap().iter().all(|&d| d < 1e-14));
        assert_eq!(RankProfileJson::of(w.range_function()).ranks, vec![0, 1]);
    }
}
