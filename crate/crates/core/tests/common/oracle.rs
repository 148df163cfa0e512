//! Dense nodal power-flow and exhaustive-scan auction oracles. Neither
//! shares code with the library solvers.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;

use gridres_core::market::{Bid, Side};
use gridres_core::scenario::ScenarioModel;
use gridres_core::units::UnitClass;

type C = Complex64;

/// Bus voltages for constant-power loads (VA, by bus name) by repeated
/// direct elimination of `Y_nn V_n = I_n − Y_ns V_s`. Every branch is an
/// ideal `a:1` transformer followed by its series impedance.
pub fn dense_solve(model: &ScenarioModel, loads: &BTreeMap<String, C>) -> BTreeMap<String, C> {
    let buses: Vec<_> = model.objects.iter().filter(|o| o.class.is_bus()).collect();
    let ix: BTreeMap<&str, usize> = buses
        .iter()
        .enumerate()
        .map(|(i, b)| (b.name.as_str(), i))
        .collect();
    let n = buses.len();
    let slack = buses
        .iter()
        .position(|b| b.get("bustype").and_then(|v| v.as_word().ok()) == Some("SWING"))
        .expect("no swing bus");
    let vs = C::new(
        buses[slack]
            .get("nominal_voltage")
            .unwrap()
            .as_quantity(UnitClass::Voltage)
            .unwrap(),
        0.0,
    );

    let mut y = vec![vec![C::new(0.0, 0.0); n]; n];
    for br in model.objects.iter().filter(|o| o.class.is_branch()) {
        let f = ix[br.get("from").unwrap().as_word().unwrap()];
        let t = ix[br.get("to").unwrap().as_word().unwrap()];
        let (r, x) = br.get("impedance").unwrap().as_impedance().unwrap();
        let a = br.get("ratio").map_or(1.0, |v| v.as_scalar().unwrap());
        let yb = C::new(1.0, 0.0) / C::new(r, x);
        y[f][f] += yb / (a * a);
        y[f][t] -= yb / a;
        y[t][f] -= yb / a;
        y[t][t] += yb;
    }

    let s: Vec<C> = buses
        .iter()
        .map(|b| loads.get(&b.name).copied().unwrap_or_default())
        .collect();
    let others: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let mut v: Vec<C> = buses
        .iter()
        .map(|b| {
            C::new(
                b.get("nominal_voltage")
                    .unwrap()
                    .as_quantity(UnitClass::Voltage)
                    .unwrap(),
                0.0,
            )
        })
        .collect();
    v[slack] = vs;
    for _ in 0..500 {
        let m = others.len();
        let mut a: Vec<Vec<C>> = others
            .iter()
            .map(|&i| others.iter().map(|&j| y[i][j]).collect())
            .collect();
        let mut rhs: Vec<C> = others
            .iter()
            .map(|&i| -(s[i] / v[i]).conj() - y[i][slack] * vs)
            .collect();
        let x = gauss(&mut a, &mut rhs, m);
        let mut delta = 0.0f64;
        for (k, &i) in others.iter().enumerate() {
            delta = delta.max((x[k] - v[i]).norm() / v[i].norm());
            v[i] = x[k];
        }
        if delta < 1e-14 {
            break;
        }
    }
    buses.iter().map(|b| b.name.clone()).zip(v).collect()
}

fn gauss(a: &mut [Vec<C>], b: &mut [C], n: usize) -> Vec<C> {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| a[p][col].norm().total_cmp(&a[q][col].norm()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let k = a[row][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (dst, src) in a[row][col..n].iter_mut().zip(&pivot_row[col..n]) {
                *dst -= k * src;
            }
            let d = b[col];
            b[row] -= k * d;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in row + 1..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    x
}

/// Price, quantity and marginal pair found by scanning every candidate
/// price for the largest tradable volume.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub quantity: f64,
    pub price: f64,
    pub marginal_buy: Option<f64>,
    pub marginal_sell: Option<f64>,
}

pub fn scan_clear(book: &[Bid], prior_price: f64) -> ScanResult {
    let buys: Vec<&Bid> = book.iter().filter(|b| b.side == Side::Buy).collect();
    let sells: Vec<&Bid> = book.iter().filter(|b| b.side == Side::Sell).collect();
    let demand = |p: f64| {
        buys.iter()
            .filter(|b| b.price >= p)
            .map(|b| b.quantity)
            .sum::<f64>()
    };
    let supply = |p: f64| {
        sells
            .iter()
            .filter(|s| s.price <= p)
            .map(|s| s.quantity)
            .sum::<f64>()
    };
    let q = book
        .iter()
        .map(|b| demand(b.price).min(supply(b.price)))
        .fold(0.0, f64::max);
    if q <= 0.0 {
        return ScanResult {
            quantity: 0.0,
            price: prior_price,
            marginal_buy: None,
            marginal_sell: None,
        };
    }
    // Lowest buy level reached: volume strictly above it falls short of q.
    let mb = buys
        .iter()
        .map(|b| b.price)
        .filter(|&p| {
            buys.iter()
                .filter(|b| b.price > p)
                .map(|b| b.quantity)
                .sum::<f64>()
                < q
        })
        .fold(f64::INFINITY, f64::min);
    let ms = sells
        .iter()
        .map(|s| s.price)
        .filter(|&p| {
            sells
                .iter()
                .filter(|s| s.price < p)
                .map(|s| s.quantity)
                .sum::<f64>()
                < q
        })
        .fold(f64::NEG_INFINITY, f64::max);
    ScanResult {
        quantity: q,
        price: 0.5 * (mb + ms),
        marginal_buy: Some(mb),
        marginal_sell: Some(ms),
    }
}
