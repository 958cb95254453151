//! Netting and lot-sizing primitives shared by MRP and the ConWIP MPS.

use std::collections::BTreeMap;

const EPS: f64 = 1e-9;

/// Per-period net requirements.
///
/// `available` is what is on hand (after safety stock) plus scheduled
/// receipts; it is consumed in period order and never carried below zero. A
/// negative starting balance (stock below safety stock) becomes a net
/// requirement in `today`'s period.
pub fn net_requirements(gross: &BTreeMap<i64, f64>, available: f64, today: i64) -> Vec<(i64, f64)> {
    let mut avail = available;
    let mut out = Vec::new();
    let mut push = |t: i64, g: f64, avail: &mut f64| {
        let need = g - *avail;
        if need > EPS {
            out.push((t, need));
            *avail = 0.0;
        } else {
            *avail -= g;
        }
    };
    if avail < -EPS && !gross.contains_key(&today) && gross.keys().all(|t| *t > today) {
        push(today, 0.0, &mut avail);
    }
    for (t, g) in gross {
        push(*t, *g, &mut avail);
    }
    out
}

/// Time-phased netting: scheduled receipts become available in their own
/// period instead of right away.
pub fn net_requirements_phased(
    gross: &BTreeMap<i64, f64>,
    receipts: &BTreeMap<i64, f64>,
    on_hand: f64,
    today: i64,
) -> Vec<(i64, f64)> {
    let mut balance = gross.clone();
    for (t, r) in receipts {
        *balance.entry(*t).or_default() -= r;
    }
    net_requirements(&balance, on_hand, today)
}

/// Fixed order period: every window of `periods` days, anchored at the first
/// uncovered net requirement, is batched into one order due at the anchor.
pub fn fop_lots(nets: &[(i64, f64)], periods: i64) -> Vec<(i64, f64)> {
    let periods = periods.max(1);
    let mut out: Vec<(i64, f64)> = Vec::new();
    let mut window_end = i64::MIN;
    for (t, q) in nets {
        match out.last_mut() {
            Some(last) if *t <= window_end => last.1 += q,
            _ => {
                out.push((*t, *q));
                window_end = t + periods - 1;
            }
        }
    }
    out
}

/// Fixed order quantity: whenever the running balance cannot cover a net
/// requirement, order the smallest multiple of `lot` that does.
pub fn foq_lots(nets: &[(i64, f64)], lot: f64) -> Vec<(i64, f64)> {
    debug_assert!(lot > 0.0);
    let mut carry = 0.0;
    let mut out = Vec::new();
    for (t, q) in nets {
        if *q > carry + EPS {
            let lots = ((q - carry) / lot - EPS).ceil().max(1.0);
            let qty = lots * lot;
            out.push((*t, qty));
            carry += qty - q;
        } else {
            carry -= q;
        }
    }
    out
}
