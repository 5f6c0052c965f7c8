//! Generalized Bott towers: iterated projectivized sums of line bundles,
//! presented by their fan data.
//!
//! A tower with stage dimensions `n_1..n_m` and total dimension `n = sum n_i`
//! has rays
//!
//! ```text
//! u_i^k = e_i^k                                   for 1 <= k <= n_i,
//! u_i^0 = -sum_k e_i^k + sum_{j>i} sum_k a_{j,i}^(k) e_j^k,
//! ```
//!
//! and one maximal cone per choice of `k_i in {0..n_i}` for each stage,
//! spanned by all rays except the `u_i^{k_i}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fan::{fan_isomorphic, projective_space_fan, star_subdivision, Cone, Fan, LatticeMap};
use crate::linalg::Mat;

/// Label of a ray of a generalized Bott tower fan: `(stage, k)` with stages
/// numbered from 1 and `k = 0` marking the `u_i^0` ray.
pub type RayLabel = (usize, usize);

/// Combinatorial data of a generalized Bott tower.
///
/// `twists[i - 2]` holds, for stage `i` (2-based through `m`), one integer
/// vector per fiber coordinate `k = 1..n_i`; its slot `j - 1` is the
/// coefficient `a_{i,j}^{(k)}` contributed to the ray `u_j^0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BottTowerSpec {
    pub dims: Vec<usize>,
    pub twists: Vec<Vec<Vec<i64>>>,
}

impl BottTowerSpec {
    pub fn new(dims: Vec<usize>, twists: Vec<Vec<Vec<i64>>>) -> Result<Self> {
        let spec = BottTowerSpec { dims, twists };
        spec.validate()?;
        Ok(spec)
    }

    /// Tower with no twists: a product of projective spaces.
    pub fn product(dims: Vec<usize>) -> Result<Self> {
        let twists = dims
            .iter()
            .enumerate()
            .skip(1)
            .map(|(idx, &ni)| vec![vec![0i64; idx]; ni])
            .collect();
        BottTowerSpec::new(dims, twists)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.dims.len();
        if m == 0 {
            return Err(Error::InvalidSpec("no stages".into()));
        }
        if let Some(&bad) = self.dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidSpec(format!(
                "stage dimension {bad} must be positive"
            )));
        }
        if self.twists.len() != m - 1 {
            return Err(Error::InvalidSpec(format!(
                "expected {} twist blocks, got {}",
                m - 1,
                self.twists.len()
            )));
        }
        for (idx, block) in self.twists.iter().enumerate() {
            let stage = idx + 2;
            if block.len() != self.dims[stage - 1] {
                return Err(Error::InvalidSpec(format!(
                    "stage {stage}: expected {} twist vectors, got {}",
                    self.dims[stage - 1],
                    block.len()
                )));
            }
            for (k, v) in block.iter().enumerate() {
                if v.len() != stage - 1 {
                    return Err(Error::InvalidSpec(format!(
                        "stage {stage}, fiber coordinate {}: twist vector length {} != {}",
                        k + 1,
                        v.len(),
                        stage - 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn stages(&self) -> usize {
        self.dims.len()
    }

    /// Total dimension `n = sum n_i`.
    pub fn dimension(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Twist coefficient `a_{j,i}^{(k)}` for `j > i`, `1 <= k <= n_j`.
    pub fn twist(&self, j: usize, i: usize, k: usize) -> i64 {
        self.twists[j - 2][k - 1][i - 1]
    }

    /// Coordinate offset of stage `i` (1-based): index of `e_i^1`.
    pub fn stage_offset(&self, i: usize) -> usize {
        self.dims[..i - 1].iter().sum()
    }

    /// Ray index of `u_i^k` in [`build_fan`]'s ray ordering: the coordinate
    /// rays come first (so `u_i^k = e_i^k` sits at its coordinate index), the
    /// `u_i^0` rays follow in stage order.
    pub fn ray_index(&self, label: RayLabel) -> usize {
        let (i, k) = label;
        if k == 0 {
            self.dimension() + i - 1
        } else {
            self.stage_offset(i) + k - 1
        }
    }

    /// Inverse of [`BottTowerSpec::ray_index`].
    pub fn ray_label(&self, idx: usize) -> RayLabel {
        let n = self.dimension();
        if idx >= n {
            (idx - n + 1, 0)
        } else {
            let mut i = 1;
            while self.stage_offset(i + 1) <= idx && i < self.stages() {
                i += 1;
            }
            (i, idx - self.stage_offset(i) + 1)
        }
    }

    /// Truncation to stages `1..=i`.
    pub fn truncate(&self, i: usize) -> BottTowerSpec {
        BottTowerSpec {
            dims: self.dims[..i].to_vec(),
            twists: self.twists[..i.saturating_sub(1)].to_vec(),
        }
    }
}

/// Fan of a generalized Bott tower: `n + m` rays, `prod (n_i + 1)` maximal cones.
pub fn build_fan(spec: &BottTowerSpec) -> Result<Fan> {
    spec.validate()?;
    let m = spec.stages();
    let n = spec.dimension();
    let mut rays: Vec<Vec<i64>> = Vec::with_capacity(n + m);
    for idx in 0..n {
        let mut e = vec![0i64; n];
        e[idx] = 1;
        rays.push(e);
    }
    for i in 1..=m {
        let mut u = vec![0i64; n];
        for k in 1..=spec.dims[i - 1] {
            u[spec.stage_offset(i) + k - 1] = -1;
        }
        for j in (i + 1)..=m {
            for k in 1..=spec.dims[j - 1] {
                u[spec.stage_offset(j) + k - 1] = spec.twist(j, i, k);
            }
        }
        rays.push(u);
    }

    // one maximal cone per choice of omitted ray in each stage
    let mut cones = Vec::new();
    let mut choice = vec![0usize; m];
    loop {
        let mut cone = Vec::with_capacity(n);
        for s in 0..m {
            for k in 0..=spec.dims[s] {
                if k != choice[s] {
                    cone.push(spec.ray_index((s + 1, k)));
                }
            }
        }
        cones.push(Cone::new(cone));
        // odometer over choices k_i in 0..=n_i
        let mut s = 0;
        loop {
            if s == m {
                let fan = Fan::new(n, rays, cones)?;
                debug_assert_eq!(fan.rays().len(), n + m);
                return Ok(fan);
            }
            if choice[s] < spec.dims[s] {
                choice[s] += 1;
                break;
            }
            choice[s] = 0;
            s += 1;
        }
    }
}

/// Toric morphism from a tower to one of its truncations.
#[derive(Debug, Clone)]
pub struct StageProjection {
    pub source: BottTowerSpec,
    pub target: BottTowerSpec,
    pub map: LatticeMap,
}

/// Projection contracting stages `i..=m`; the target is the truncation to
/// stages `1..i-1` (`i = 1` contracts everything to a point).
pub fn stage_projection(spec: &BottTowerSpec, i: usize) -> Result<StageProjection> {
    spec.validate()?;
    if i < 1 || i > spec.stages() {
        return Err(Error::InvalidInput(format!(
            "stage {i} out of range 1..={}",
            spec.stages()
        )));
    }
    let target = spec.truncate(i - 1);
    let n = spec.dimension();
    let n_target: usize = target.dims.iter().sum();
    // drop the coordinates of stages >= i
    let matrix: Mat = (0..n)
        .map(|r| {
            let mut row = vec![0i64; n_target];
            if r < n_target {
                row[r] = 1;
            }
            row
        })
        .collect();
    let proj = StageProjection {
        source: spec.clone(),
        target,
        map: LatticeMap { matrix },
    };
    verify_toric_morphism(&proj)?;
    Ok(proj)
}

/// Check that the projection maps every maximal cone of the source fan into
/// some cone of the target fan.
fn verify_toric_morphism(proj: &StageProjection) -> Result<()> {
    if proj.target.dims.is_empty() {
        return Ok(()); // target is a point; everything maps to the origin
    }
    let src = build_fan(&proj.source)?;
    let dst = build_fan(&proj.target)?;
    for sigma in src.max_cones() {
        let images: Vec<Vec<i64>> = sigma
            .rays()
            .iter()
            .map(|&r| proj.map.apply(src.ray(r)))
            .collect();
        let ok = dst
            .max_cones()
            .iter()
            .any(|tau| images.iter().all(|x| dst.cone_contains_point(tau, x)));
        if !ok {
            return Err(Error::Internal(format!(
                "cone {:?} does not project into the target fan",
                sigma.rays()
            )));
        }
    }
    Ok(())
}

/// Two-stage tower whose fan is the blow-up of a fixed point of `P^n`.
///
/// The single twist integer is pinned down by matching the fan against the
/// star subdivision of a maximal cone of the `P^n` fan, not by convention.
pub fn blowup_point_spec(n: usize) -> Result<BottTowerSpec> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "blow-up of a point needs n >= 2, got {n}"
        )));
    }
    let pn = projective_space_fan(n);
    let target = star_subdivision(&pn, &Cone::new((0..n).collect()))?;
    for a in [1i64, -1, 0, 2, -2] {
        let candidate = BottTowerSpec::new(vec![n - 1, 1], vec![vec![vec![a]]])?;
        if fan_isomorphic(&build_fan(&candidate)?, &target).is_some() {
            return Ok(candidate);
        }
    }
    Err(Error::Internal(
        "no small twist reproduces the point blow-up fan".into(),
    ))
}

/// Fan of the successive blow-up of `P^n` along the torus-invariant flag
/// `P^0 subset P^1 subset ... subset P^{n-2}`, where `P^k` is the subspace
/// cut out by the coordinate cone spanned by `e_{k+1}..e_n`.
pub fn blowup_flag_fan(n: usize) -> Result<Fan> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let mut fan = projective_space_fan(n);
    // e_i sits at ray index i-1, so P^k corresponds to ray set {k, .., n-1};
    // subdivision only appends rays, so these index sets survive as the
    // strict transforms' cones
    for k in 0..n.saturating_sub(1) {
        let tau = Cone::new((k..n).collect());
        if tau.dim() < 2 {
            break;
        }
        fan = star_subdivision(&fan, &tau)?;
    }
    Ok(fan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::validate_fan;

    pub(crate) fn hirzebruch_spec(l: i64) -> BottTowerSpec {
        BottTowerSpec::new(vec![1, 1], vec![vec![vec![l]]]).unwrap()
    }

    #[test]
    fn hirzebruch_fan_matches_reference() {
        let fan = build_fan(&hirzebruch_spec(3)).unwrap();
        assert_eq!(fan.rays().len(), 4);
        assert_eq!(fan.max_cones().len(), 4);
        // u_1^1 = e1, u_2^1 = e2, u_1^0 = -e1 + 3 e2, u_2^0 = -e2
        assert_eq!(fan.ray(0), &vec![1, 0]);
        assert_eq!(fan.ray(1), &vec![0, 1]);
        assert_eq!(fan.ray(2), &vec![-1, 3]);
        assert_eq!(fan.ray(3), &vec![0, -1]);
        assert!(validate_fan(&fan).pass());
    }

    #[test]
    fn single_stage_is_projective_space() {
        for n in 1..=4 {
            let spec = BottTowerSpec::new(vec![n], vec![]).unwrap();
            let fan = build_fan(&spec).unwrap();
            assert_eq!(
                fan.to_canonical_text(),
                projective_space_fan(n).to_canonical_text()
            );
        }
    }

    #[test]
    fn zero_twists_give_products() {
        let spec = BottTowerSpec::product(vec![1, 2]).unwrap();
        let fan = build_fan(&spec).unwrap();
        assert_eq!(fan.rays().len(), 5);
        assert_eq!(fan.max_cones().len(), 6);
        assert!(validate_fan(&fan).pass());
        // product fan contains e1 and -e1 as the first-factor rays
        assert!(fan.rays().contains(&vec![-1, 0, 0]));
        assert!(fan.rays().contains(&vec![0, -1, -1]));
    }

    #[test]
    fn ray_counts_and_cone_counts() {
        let spec = BottTowerSpec::new(
            vec![2, 1, 2],
            vec![vec![vec![7]], vec![vec![1, -2], vec![0, 4]]],
        )
        .unwrap();
        let fan = build_fan(&spec).unwrap();
        assert_eq!(fan.rays().len(), 5 + 3);
        assert_eq!(fan.max_cones().len(), 3 * 2 * 3);
        assert!(validate_fan(&fan).pass());
    }

    #[test]
    fn ray_labels_roundtrip() {
        let spec = BottTowerSpec::new(
            vec![2, 1, 2],
            vec![vec![vec![7]], vec![vec![1, -2], vec![0, 4]]],
        )
        .unwrap();
        for idx in 0..spec.dimension() + spec.stages() {
            assert_eq!(spec.ray_index(spec.ray_label(idx)), idx);
        }
        assert_eq!(spec.ray_label(0), (1, 1));
        assert_eq!(spec.ray_label(5), (1, 0));
    }

    #[test]
    fn hirzebruch_projects_to_p1() {
        let proj = stage_projection(&hirzebruch_spec(5), 2).unwrap();
        assert_eq!(proj.target.dims, vec![1]);
        let fan = build_fan(&proj.target).unwrap();
        assert_eq!(fan.ambient_rank(), 1);
    }

    #[test]
    fn projections_compose_to_point() {
        let spec =
            BottTowerSpec::new(vec![1, 1, 1], vec![vec![vec![2]], vec![vec![-1, 3]]]).unwrap();
        let p3 = stage_projection(&spec, 3).unwrap();
        let p2 = stage_projection(&p3.target, 2).unwrap();
        let p1 = stage_projection(&p2.target, 1).unwrap();
        let total = p3.map.compose(&p2.map).compose(&p1.map);
        assert!(total.matrix.iter().all(|row| row.is_empty()));
        assert_eq!(p1.target.dims.len(), 0);
    }

    #[test]
    fn blowup_point_spec_is_f1_for_n2() {
        let spec = blowup_point_spec(2).unwrap();
        assert_eq!(spec.dims, vec![1, 1]);
        let f1 = star_subdivision(&projective_space_fan(2), &Cone::new(vec![0, 1])).unwrap();
        assert!(fan_isomorphic(&build_fan(&spec).unwrap(), &f1).is_some());
    }

    #[test]
    fn blowup_point_spec_rank_two_for_n3() {
        let spec = blowup_point_spec(3).unwrap();
        let fan = build_fan(&spec).unwrap();
        assert_eq!(fan.rays().len(), 5);
        // Picard rank = rays - dimension
        assert_eq!(fan.rays().len() - fan.ambient_rank(), 2);
        assert!(validate_fan(&fan).pass());
    }

    #[test]
    fn blowup_point_is_p1_bundle_over_pn_minus_1() {
        let spec = blowup_point_spec(4).unwrap();
        let proj = stage_projection(&spec, 2).unwrap();
        assert_eq!(proj.target.dims, vec![3]);
    }

    #[test]
    fn flag_blowup_small_cases() {
        let f1 = blowup_flag_fan(1).unwrap();
        assert_eq!(
            f1.to_canonical_text(),
            projective_space_fan(1).to_canonical_text()
        );

        let f2 = blowup_flag_fan(2).unwrap();
        let hirz1 = build_fan(&hirzebruch_spec(1)).unwrap();
        assert!(fan_isomorphic(&f2, &hirz1).is_some());

        let f3 = blowup_flag_fan(3).unwrap();
        assert_eq!(f3.rays().len(), 6);
        assert_eq!(f3.rays().len() - 3, 3); // Picard rank 3
        assert!(validate_fan(&f3).pass());
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec = hirzebruch_spec(4);
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"dims":[1,1],"twists":[[[4]]]}"#);
        let back: BottTowerSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(BottTowerSpec::new(vec![], vec![]).is_err());
        assert!(BottTowerSpec::new(vec![1, 0], vec![vec![]]).is_err());
        assert!(BottTowerSpec::new(vec![1, 1], vec![]).is_err());
        assert!(BottTowerSpec::new(vec![1, 1], vec![vec![vec![1, 2]]]).is_err());
    }
}
