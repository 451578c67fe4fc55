use num_traits::Zero;

use super::{budget, OracleError};
use crate::exec::Exec;
use crate::fairness::{is_efx, Allocation, ValueTable};
use crate::model::Instance;
use crate::scalar::Scalar;

/// Cap on `n^m` for goods enumeration.
pub const GOODS_BUDGET: u64 = 10_000_000;

pub(crate) fn goods_space(inst: &Instance) -> Result<u64, OracleError> {
    let n = inst.n() as u64;
    let mut total: u64 = 1;
    for _ in 0..inst.m() {
        total = match total.checked_mul(n) {
            Some(t) if t <= GOODS_BUDGET => t,
            _ => return Err(budget("goods assignments", format!("{}^{}", inst.n(), inst.m()), GOODS_BUDGET)),
        };
    }
    Ok(total)
}

/// Assignment number `k` in lexicographic order, good 0 most significant.
pub(crate) fn decode(k: u64, n: usize, m: usize) -> Vec<usize> {
    let mut owner = vec![0; m];
    let mut rest = k;
    for g in (0..m).rev() {
        owner[g] = (rest % n as u64) as usize;
        rest /= n as u64;
    }
    owner
}

/// Every assignment `good -> agent`, in lexicographic order.
pub fn enumerate_good_allocations(inst: &Instance) -> Result<impl Iterator<Item = Vec<usize>>, OracleError> {
    let total = goods_space(inst)?;
    let (n, m) = (inst.n(), inst.m());
    Ok((0..total).map(move |k| decode(k, n, m)))
}

/// First goods-only allocation (in enumeration order) where no agent envies
/// another bundle after removing any single good from it.
pub fn efx_brute_force(inst: &Instance) -> Result<Option<Allocation>, OracleError> {
    efx_brute_force_with(inst, Exec::default())
}

pub fn efx_brute_force_with(inst: &Instance, exec: Exec) -> Result<Option<Allocation>, OracleError> {
    let total = goods_space(inst)?;
    let (n, m) = (inst.n(), inst.m());
    let zero = Scalar::zero();
    let found = exec.find_first(total, |k| {
        let a = Allocation::from_assignment(inst, &decode(k, n, m));
        is_efx(&ValueTable::new(inst, &a), &zero).pass
    });
    Ok(found.map(|k| Allocation::from_assignment(inst, &decode(k, n, m))))
}
