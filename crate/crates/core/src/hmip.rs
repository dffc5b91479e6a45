//! Deterministic decision procedure for matroid-intersection instances
//! hidden inside matrix subspaces, with certificates.
//!
//! An instance arrives as a pair family, a subspace basis, a Kraus list,
//! or a Choi matrix; it is normalized to a completely positive operator
//! whose Choi matrix has integer entries (clearing denominators only
//! rescales the operator by a positive constant, which changes neither
//! rank monotonicity nor the scaling trajectory past the first step).
//! The decision runs the exact operator Sinkhorn iteration:
//!
//! - MATCHING as soon as the defect is at most 1/N at a step where one
//!   side is exactly normalized (true by construction after every step,
//!   and checked literally at step zero);
//! - NOT_MATCHING when a normalizer goes singular (a positive definite
//!   argument lost rank, so the operator is not rank non-decreasing), or
//!   when the iteration budget derived from the instance size runs out.
//!
//! The iteration budget is 3N(N ln N + N(ln N + ln Q)) + 1 with the
//! N ln N term dropped for instances promised separable, where Q bounds
//! the integerized entries. Exact arithmetic makes every verdict
//! bit-for-bit reproducible.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::exactmat::{Matrix, Rational};
use crate::qstate::{
    cp_from_pairs, cp_from_subspace_basis, choi, operator_from_choi, Budm, CpOperator, PairFamily,
    StateError,
};
use crate::scaling::{osi_step, ScalingError, ScalingState, SingularInfo};

#[derive(Debug, Error)]
pub enum HmipError {
    #[error("degenerate input: the instance operator is zero")]
    DegenerateInput,
    #[error("instance is not rank non-decreasing: T(I) has rank {rank} < {n}")]
    NotMatchingWitness { rank: usize, n: usize },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
}

/// How the instance was provided.
#[derive(Clone, Debug)]
pub enum InstanceSource {
    Pairs(PairFamily),
    Subspace(Vec<Matrix>),
    Kraus(CpOperator),
    Choi(Budm),
}

/// A decision-ready instance: the integerized operator together with the
/// entry bound Q that feeds the iteration budget. The separability flags
/// are caller-asserted promises, never verified here.
#[derive(Clone, Debug)]
pub struct HmipInstance {
    n: usize,
    operator: CpOperator,
    q_max: BigInt,
    separable: bool,
}

impl HmipInstance {
    pub fn new(source: InstanceSource, separable: bool) -> Result<Self, HmipError> {
        let operator = match source {
            InstanceSource::Pairs(p) => cp_from_pairs(&p),
            InstanceSource::Subspace(basis) => cp_from_subspace_basis(&basis)?,
            InstanceSource::Kraus(t) => t,
            InstanceSource::Choi(rho) => operator_from_choi(&rho)?,
        };
        let ch = choi(&operator).assembled().clone();
        if ch.is_zero() {
            return Err(HmipError::DegenerateInput);
        }
        let lcm = ch.denominator_lcm();
        let operator = if lcm.is_one() {
            operator
        } else {
            operator.scale(&Rational::from_integer(lcm.clone()))?
        };
        let q_max = ch.scale_rat(&Rational::from_integer(lcm)).max_abs_numerator();
        debug_assert!(q_max >= BigInt::one());
        Ok(Self { n: operator.n(), operator, q_max, separable })
    }

    pub fn from_pairs(p: PairFamily) -> Result<Self, HmipError> {
        // a pair family defines a separable state by construction
        Self::new(InstanceSource::Pairs(p), true)
    }

    pub fn from_subspace(basis: Vec<Matrix>) -> Result<Self, HmipError> {
        Self::new(InstanceSource::Subspace(basis), false)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn operator(&self) -> &CpOperator {
        &self.operator
    }

    pub fn q_max(&self) -> &BigInt {
        &self.q_max
    }

    pub fn separable(&self) -> bool {
        self.separable
    }
}

/// Iteration budget ceil(3N(N ln N + N(ln N + ln Q))) + 1; the separable
/// variant drops the N ln N term. One extra step of headroom covers the
/// approximate constant in the derivation.
pub fn iteration_bound(n: usize, q: &BigInt, separable: bool) -> usize {
    assert!(n >= 1, "dimension must be at least 1");
    let nf = n as f64;
    let qf = q.to_f64().unwrap_or(f64::MAX).max(1.0);
    let ln_n = nf.ln();
    let ln_q = qf.ln();
    let inner = if separable {
        nf * (ln_n + ln_q)
    } else {
        nf * ln_n + nf * (ln_n + ln_q)
    };
    (3.0 * nf * inner).ceil() as usize + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    #[serde(rename = "MATCHING")]
    Matching,
    #[serde(rename = "NOT_MATCHING")]
    NotMatching,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// The defect went under 1/N at an exactly one-sided-normalized step.
    DsThresholdReached,
    /// The budget elapsed with the defect stuck above 1/N.
    IterationBoundExhausted,
    /// A normalizer lost rank: a witnessed failure of rank monotonicity.
    SingularNormalizer { step: usize, rank: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct HmipVerdict {
    pub decision: Decision,
    pub iterations_used: usize,
    #[serde(rename = "bound_L")]
    pub bound_l: usize,
    pub final_ds: f64,
    pub final_ds_exact: String,
    pub certificate: Certificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip)]
    pub final_ds_rational: Rational,
}

impl HmipVerdict {
    fn build(
        decision: Decision,
        iterations_used: usize,
        bound_l: usize,
        ds: Rational,
        certificate: Certificate,
    ) -> Self {
        let note = match decision {
            Decision::Matching => Some(
                "under the weak-separability promise, the instance subspace contains a nonsingular matrix"
                    .to_string(),
            ),
            Decision::NotMatching => None,
        };
        Self {
            decision,
            iterations_used,
            bound_l,
            final_ds: ds.to_f64().unwrap_or(f64::NAN),
            final_ds_exact: ds.to_string(),
            certificate,
            note,
            final_ds_rational: ds,
        }
    }
}

/// Run the exact scaling decision. The trajectory log is discarded; use
/// `decide_matching_with_log` to keep it.
pub fn decide_matching(inst: &HmipInstance) -> Result<HmipVerdict, HmipError> {
    decide_matching_with_log(inst).map(|(v, _)| v)
}

pub fn decide_matching_with_log(
    inst: &HmipInstance,
) -> Result<(HmipVerdict, ScalingState), HmipError> {
    let t = &inst.operator;
    let n = inst.n;
    let bound = iteration_bound(n, &inst.q_max, inst.separable);
    let eps = Rational::new(BigInt::one(), BigInt::from(n as i64));
    let mut state = ScalingState::fresh(t)?;

    // step 0 qualifies only if one side is literally normalized
    let id = Matrix::identity(n);
    let one_sided = t.apply(&id)? == id || t.dual_apply(&id)? == id;
    if one_sided && state.ds <= eps {
        let v = HmipVerdict::build(
            Decision::Matching,
            0,
            bound,
            state.ds.clone(),
            Certificate::DsThresholdReached,
        );
        return Ok((v, state));
    }

    while state.iter < bound {
        match osi_step(t, &mut state) {
            Ok(()) => {}
            Err(ScalingError::SingularNormalizer { step, rank, .. }) => {
                state.certificate = Some(SingularInfo {
                    step,
                    side: if step % 2 == 1 {
                        crate::scaling::Side::Row
                    } else {
                        crate::scaling::Side::Col
                    },
                    rank,
                });
                let v = HmipVerdict::build(
                    Decision::NotMatching,
                    step,
                    bound,
                    state.ds.clone(),
                    Certificate::SingularNormalizer { step, rank },
                );
                return Ok((v, state));
            }
            Err(e) => return Err(e.into()),
        }
        // every completed step is exactly normalized on one side
        if state.ds <= eps {
            let v = HmipVerdict::build(
                Decision::Matching,
                state.iter,
                bound,
                state.ds.clone(),
                Certificate::DsThresholdReached,
            );
            return Ok((v, state));
        }
    }
    let v = HmipVerdict::build(
        Decision::NotMatching,
        state.iter,
        bound,
        state.ds.clone(),
        Certificate::IterationBoundExhausted,
    );
    Ok((v, state))
}

/// The first row normalization in the exact bookkeeping: one scaling step
/// from a fresh state, so that P * T(Q) == I exactly afterwards. A
/// singular T(I) is returned as a rank-monotonicity witness instead.
pub fn first_step_normalization(inst: &HmipInstance) -> Result<ScalingState, HmipError> {
    let t = &inst.operator;
    let mut state = ScalingState::fresh(t)?;
    match osi_step(t, &mut state) {
        Ok(()) => Ok(state),
        Err(ScalingError::SingularNormalizer { rank, .. }) => {
            Err(HmipError::NotMatchingWitness { rank, n: inst.n })
        }
        Err(e) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmat::{basis_vec, ComplexRational};
    use num_traits::Zero;
    use crate::instances;
    use crate::matroid::mi_rank_bruteforce;

    fn e(i: usize) -> Vec<ComplexRational> {
        basis_vec(2, i)
    }

    #[test]
    fn iteration_bound_examples() {
        assert_eq!(iteration_bound(2, &BigInt::one(), false), 18);
        assert_eq!(iteration_bound(2, &BigInt::one(), true), 10);
        assert_eq!(iteration_bound(1, &BigInt::one(), false), 1);
    }

    #[test]
    fn matching_at_iteration_zero() {
        let p = PairFamily::new(2, vec![(e(0), e(0)), (e(1), e(1))]).unwrap();
        let inst = HmipInstance::from_pairs(p).unwrap();
        let v = decide_matching(&inst).unwrap();
        assert_eq!(v.decision, Decision::Matching);
        assert_eq!(v.iterations_used, 0);
        assert_eq!(v.certificate, Certificate::DsThresholdReached);
        assert!(v.final_ds_rational.is_zero());
        assert!(v.iterations_used <= v.bound_l);
    }

    #[test]
    fn colinear_xs_are_not_matching() {
        let p = PairFamily::new(2, vec![(e(0), e(0)), (e(0), e(1))]).unwrap();
        let inst = HmipInstance::from_pairs(p).unwrap();
        let v = decide_matching(&inst).unwrap();
        assert_eq!(v.decision, Decision::NotMatching);
        assert!(matches!(v.certificate, Certificate::SingularNormalizer { step: 1, rank: 1 }));
    }

    #[test]
    fn spanning_but_non_matching_instance_exhausts_the_budget() {
        // x vectors {e1,e1,e2,e2,e3} and y vectors {e2,e3,e1,e1,e1} both
        // span, so every normalizer stays nonsingular, yet the two pairs
        // with x = e1 leave only a one-dimensional y-span on their
        // complement: rank 2 < 3, and the defect stalls above 1/3
        let e = |i| basis_vec(3, i);
        let p = PairFamily::new(
            3,
            vec![
                (e(0), e(1)),
                (e(0), e(2)),
                (e(1), e(0)),
                (vec![ComplexRational::zero(), ComplexRational::from_int(2), ComplexRational::zero()], e(0)),
                (e(2), e(0)),
            ],
        )
        .unwrap();
        assert_eq!(mi_rank_bruteforce(&p).unwrap(), 2);
        let inst = HmipInstance::from_pairs(p).unwrap();
        let v = decide_matching(&inst).unwrap();
        assert_eq!(v.decision, Decision::NotMatching);
        assert_eq!(v.certificate, Certificate::IterationBoundExhausted);
        assert_eq!(v.iterations_used, v.bound_l);
        let third = Rational::new(BigInt::one(), 3.into());
        assert!(v.final_ds_rational > third, "final ds {}", v.final_ds_exact);
    }

    #[test]
    fn ir_subspace_is_matching() {
        let inst = HmipInstance::from_subspace(instances::ir_subspace()).unwrap();
        let v = decide_matching(&inst).unwrap();
        assert_eq!(v.decision, Decision::Matching);
        assert!(v.iterations_used <= v.bound_l);
        assert!(v.note.is_some());
    }

    #[test]
    fn kraus_and_choi_sources_agree() {
        let t = instances::sk3();
        let from_kraus =
            HmipInstance::new(InstanceSource::Kraus(t.clone()), false).unwrap();
        let from_choi =
            HmipInstance::new(InstanceSource::Choi(choi(&t)), false).unwrap();
        let a = decide_matching(&from_kraus).unwrap();
        let b = decide_matching(&from_choi).unwrap();
        assert_eq!(a.decision, Decision::Matching);
        assert_eq!(b.decision, Decision::Matching);
    }

    #[test]
    fn degenerate_instance_is_rejected() {
        let p = PairFamily::new(2, vec![]).unwrap();
        assert!(matches!(HmipInstance::from_pairs(p), Err(HmipError::DegenerateInput)));
    }

    #[test]
    fn integerization_records_entry_bound() {
        // sk3 has half-integer Choi entries; clearing denominators gives
        // integer entries bounded by 1
        let inst = HmipInstance::new(InstanceSource::Kraus(instances::sk3()), false).unwrap();
        assert_eq!(inst.q_max(), &BigInt::one());
        // the integerized operator still decides MATCHING despite the
        // rescaled defect at step 0
        let v = decide_matching(&inst).unwrap();
        assert_eq!(v.decision, Decision::Matching);
        assert!(v.iterations_used <= 2);
    }

    #[test]
    fn first_step_normalization_examples() {
        // doubly stochastic: P stays the identity
        let inst = HmipInstance::new(InstanceSource::Kraus(instances::sk3()), false).unwrap();
        let st = first_step_normalization(&inst).unwrap();
        let t = inst.operator();
        assert_eq!(
            st.p.matmul(&t.apply(&st.q).unwrap()).unwrap(),
            Matrix::identity(3)
        );

        // diag(1,2) kraus: P = diag(1, 1/4) row-normalizes exactly
        let d = CpOperator::new(
            2,
            vec![(Rational::one(), Matrix::from_int_rows(&[&[1, 0], &[0, 2]]))],
        )
        .unwrap();
        let inst = HmipInstance::new(InstanceSource::Kraus(d), false).unwrap();
        let st = first_step_normalization(&inst).unwrap();
        assert_eq!(st.p[(1, 1)], ComplexRational::from_ratio(1, 4));
        let t = inst.operator();
        assert_eq!(
            st.p.matmul(&t.apply(&st.q).unwrap()).unwrap(),
            Matrix::identity(2)
        );

        // all x = e1: T(I) is rank one, a NOT_MATCHING witness
        let p = PairFamily::new(2, vec![(e(0), e(0)), (e(0), e(1))]).unwrap();
        let inst = HmipInstance::from_pairs(p).unwrap();
        assert!(matches!(
            first_step_normalization(&inst),
            Err(HmipError::NotMatchingWitness { rank: 1, n: 2 })
        ));
    }

    #[test]
    fn verdict_serializes_with_stable_fields() {
        let p = PairFamily::new(2, vec![(e(0), e(0)), (e(1), e(1))]).unwrap();
        let inst = HmipInstance::from_pairs(p).unwrap();
        let v = decide_matching(&inst).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["decision"], "MATCHING");
        assert_eq!(json["iterations_used"], 0);
        assert_eq!(json["bound_L"], 10);
        assert_eq!(json["final_ds_exact"], "0");
        assert_eq!(json["certificate"], "ds_threshold_reached");
    }

    #[test]
    fn small_oracle_agreement() {
        for seed in 0..40u64 {
            let n = 2 + (seed % 2) as usize;
            let k = 1 + (seed % 5) as usize;
            let p = instances::random_pair_family(400 + seed, n, k, -3, 3);
            let want = mi_rank_bruteforce(&p).unwrap() == n;
            let inst = HmipInstance::from_pairs(p).unwrap();
            let v = decide_matching(&inst).unwrap();
            assert_eq!(
                v.decision == Decision::Matching,
                want,
                "seed {seed}: verdict {:?} vs oracle {want}",
                v.decision
            );
            if v.decision == Decision::Matching {
                assert!(v.iterations_used <= v.bound_l, "seed {seed}");
            }
        }
    }
}
