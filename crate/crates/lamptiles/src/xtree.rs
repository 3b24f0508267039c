//! The canonical colouring of `X_tree`, the free `(Z/3)^2` extension it carries (state
//! bijection and cocycle), and the circular-street pseudo-orbit.

use crate::error::{Error, Result};
use crate::group::{half, lamp_act, Generator, LampConfig, LampElement};

/// A value in `(Z/3)^2`.
pub type Pair = (u8, u8);

fn z3(x: i64) -> u8 {
    x.rem_euclid(3) as u8
}

pub fn add(p: Pair, q: Pair) -> Pair {
    ((p.0 + q.0) % 3, (p.1 + q.1) % 3)
}

pub fn neg(p: Pair) -> Pair {
    ((3 - p.0) % 3, (3 - p.1) % 3)
}

/// Counts of lit lamps below and above the head, mod 3.
pub fn canonical_config(v: &LampElement) -> Pair {
    let below = v.lamps().iter().filter(|&&i| i < v.head()).count() as i64;
    let above = v.lamps().len() as i64 - below;
    (z3(below), z3(above))
}

/// A point of the extension: the symbol `c` read at the identity, and the lamp configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XtreeState {
    pub c: Pair,
    pub x: LampConfig,
}

/// The colouring a state determines, evaluated at `v = (s, n)`:
/// `(c + #{i < n : s_i != x_i} - #{i < 0 : x_i}, d + #{i >= n : s_i != x_i} - #{i >= 0 : x_i})`.
///
/// `x` vanishes outside its window, so every sum is finite and exact.
pub fn state_bijection(state: &XtreeState, v: &LampElement) -> Pair {
    let n = v.head();
    let x = &state.x;
    let mut positions: Vec<i64> = v.lamps().iter().copied().chain(x.ones()).collect();
    positions.sort_unstable();
    positions.dedup();
    let (mut below, mut above) = (0i64, 0i64);
    for i in positions {
        let s = v.has_lamp(i);
        let xi = x.get(i);
        let diff = (s != xi) as i64;
        if i < n {
            below += diff;
        } else {
            above += diff;
        }
        if xi {
            if i < 0 {
                below -= 1;
            } else {
                above -= 1;
            }
        }
    }
    add(state.c, (z3(below), z3(above)))
}

fn generator_value(g: Generator, x: &LampConfig) -> Result<Pair> {
    if !x.covers(0) {
        return Err(Error::usage(format!(
            "lamp window [{},{}) does not contain position 1/2",
            half(x.lo()),
            half(x.hi())
        )));
    }
    let lit = x.get(0) as u8;
    let a = (lit, (3 - lit) % 3);
    Ok(match g {
        Generator::A => a,
        Generator::B => ((1 + 2 * lit) % 3, a.1),
        inverse => {
            let base = inverse.inverse();
            neg(generator_value(base, &lamp_act(&inverse.element(), x)?)?)
        }
    })
}

/// `eta(a, x) = (x(1/2), -x(1/2))`, `eta(b, x) = (1 - x(1/2), -x(1/2))`, extended by
/// `eta(gh, x) = eta(g, hx) + eta(h, x)` along the canonical word of `g`.
pub fn cocycle(g: &LampElement, x: &LampConfig) -> Result<Pair> {
    let mut total = (0, 0);
    let mut y = x.clone();
    for &step in g.word().iter().rev() {
        total = add(total, generator_value(step, &y)?);
        y = lamp_act(&step.element(), &y)?;
    }
    Ok(total)
}

/// The same cocycle through the state bijection: `eta(g, x) = theta((0,0), x)(rev g)`.
pub fn cocycle_closed_form(g: &LampElement, x: &LampConfig) -> Pair {
    state_bijection(
        &XtreeState {
            c: (0, 0),
            x: x.clone(),
        },
        &g.reverse(),
    )
}

/// `g·(c, x) = (c + eta(g, x), g x)`.
pub fn act_on_state(g: &LampElement, state: &XtreeState) -> Result<XtreeState> {
    Ok(XtreeState {
        c: add(state.c, cocycle(g, &state.x)?),
        x: lamp_act(g, &state.x)?,
    })
}

/// One step of a pseudo-orbit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoStep {
    pub generator: Generator,
    pub head: i64,
    /// Lamps (integer positions) toggled by the pseudo step but not by the true one.
    pub defects: Vec<i64>,
    /// Distance from the lamp at the head to the nearest defect; `None` when there is none.
    pub agreement_radius: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoOrbit {
    pub period: i64,
    pub steps: Vec<PseudoStep>,
    pub lamps: LampConfig,
    pub head: i64,
}

/// Runs `word` with lamps on a street of period `2k`: every `b` toggles the lamp at the
/// head and all its translates by multiples of `2k` inside the window of `start`.
pub fn pseudo_orbit(k: i64, start: &LampConfig, word: &[Generator]) -> Result<PseudoOrbit> {
    if k < 1 {
        return Err(Error::usage("the street half-period k must be at least 1"));
    }
    let period = 2 * k;
    let mut lamps = start.clone();
    let mut head = 0i64;
    let mut steps = Vec::with_capacity(word.len());
    for &g in word {
        let toggles = matches!(g, Generator::B | Generator::BInv);
        let at = match g {
            Generator::A | Generator::B => head,
            Generator::AInv | Generator::BInv => head - 1,
        };
        let mut defects = Vec::new();
        if toggles {
            if !lamps.covers(at) {
                return Err(Error::usage(format!("head lamp {} left the window", half(at))));
            }
            let first = at - (at - lamps.lo()).div_euclid(period) * period;
            let mut p = first;
            while p < lamps.hi() {
                lamps.toggle(p);
                if p != at {
                    defects.push(p);
                }
                p += period;
            }
        }
        head += match g {
            Generator::A | Generator::B => 1,
            _ => -1,
        };
        let agreement_radius = defects.iter().map(|&p| (p - at).abs()).min();
        steps.push(PseudoStep {
            generator: g,
            head,
            defects,
            agreement_radius,
        });
    }
    Ok(PseudoOrbit {
        period,
        steps,
        lamps,
        head,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{parse_word, TetraRegion};
    use crate::solver::{check, VertexColouring};
    use crate::tilesets::xtree;
    use proptest::prelude::*;

    fn el(lamps: &[i64], head: i64) -> LampElement {
        LampElement::new(lamps.iter().copied(), head)
    }

    fn element() -> impl Strategy<Value = LampElement> {
        (proptest::collection::vec(-5i64..5, 0..5), -5i64..5).prop_map(|(l, h)| LampElement::new(l, h))
    }

    fn config() -> impl Strategy<Value = LampConfig> {
        proptest::collection::vec(any::<bool>(), 80).prop_map(|bits| {
            LampConfig::from_lamps(-40, 40, (0..80).filter(|&i| bits[i as usize]).map(|i| i - 40)).unwrap()
        })
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(canonical_config(&LampElement::identity()), (0, 0));
        assert_eq!(canonical_config(&el(&[0], 0)), (0, 1));
        assert_eq!(canonical_config(&el(&[-3, -1, 0, 2, 5], 1)), (0, 2));
    }

    #[test]
    fn canonical_config_is_valid() {
        for k in 0..=6 {
            for base in [-3, 0, 2] {
                let region = TetraRegion::new(base, k).unwrap();
                let c = VertexColouring::from_fn(region, |v| {
                    let (t, u) = canonical_config(v);
                    3 * t as u32 + u as u32
                });
                assert!(check(&xtree(), &c).unwrap().is_ok(), "k={k} base={base}");
            }
        }
    }

    #[test]
    fn tetrahedron_orientation_follows_the_lamp() {
        for v in [el(&[], 0), el(&[-2, 1], 0), el(&[0, 3], 0), el(&[4], 2)] {
            let [p, pa, pab, pb] = v.tetra_vertices();
            let (t, u) = canonical_config(&p);
            let vals = [p, pa, pab, pb].map(|x| canonical_config(&x));
            let first = [(t, u), (t, u), (t, (u + 1) % 3), ((t + 1) % 3, u)];
            if !v.has_lamp(v.head()) {
                assert_eq!(vals, first);
            } else {
                assert_ne!(vals, first);
            }
        }
    }

    #[test]
    fn generator_values() {
        let dark = LampConfig::zeros(-4, 4);
        assert_eq!(cocycle(&LampElement::identity(), &dark).unwrap(), (0, 0));
        assert_eq!(cocycle(&LampElement::a(), &dark).unwrap(), (0, 0));
        assert_eq!(cocycle(&LampElement::b(), &dark).unwrap(), (1, 0));
        let lit = LampConfig::from_lamps(-4, 4, [0]).unwrap();
        assert_eq!(cocycle(&LampElement::a(), &lit).unwrap(), (1, 2));
        assert_eq!(cocycle(&LampElement::b(), &lit).unwrap(), (0, 2));
        assert!(cocycle(&LampElement::a(), &LampConfig::zeros(3, 6)).is_err());
    }

    #[test]
    fn state_examples() {
        let dark = LampConfig::zeros(-10, 10);
        for v in [el(&[], 0), el(&[0], 0), el(&[-3, 2], 1), el(&[-1, 0, 4], -2)] {
            let s = XtreeState {
                c: (0, 0),
                x: dark.clone(),
            };
            assert_eq!(state_bijection(&s, &v), canonical_config(&v));
        }
        let x = LampConfig::from_lamps(-10, 10, [-4, 0, 3]).unwrap();
        for c in [(0, 0), (1, 2), (2, 1)] {
            assert_eq!(
                state_bijection(&XtreeState { c, x: x.clone() }, &LampElement::identity()),
                c
            );
        }
    }

    #[test]
    fn state_colouring_is_valid() {
        let x = LampConfig::from_lamps(-12, 12, [-7, -2, 0, 1, 5, 9]).unwrap();
        let state = XtreeState { c: (2, 1), x };
        for base in [-4, -1, 0] {
            let region = TetraRegion::new(base, 5).unwrap();
            let c = VertexColouring::from_fn(region, |v| {
                let (t, u) = state_bijection(&state, v);
                3 * t as u32 + u as u32
            });
            assert!(check(&xtree(), &c).unwrap().is_ok());
        }
    }

    #[test]
    fn pseudo_orbit_examples() {
        let x = LampConfig::from_lamps(0, 6, [1, 4]).unwrap();
        let w = parse_word("abab").unwrap();
        let one = pseudo_orbit(3, &x, &w).unwrap();
        assert!(one
            .steps
            .iter()
            .all(|s| s.defects.is_empty() && s.agreement_radius.is_none()));
        let wide = LampConfig::zeros(-8, 8);
        let r = pseudo_orbit(2, &wide, &parse_word("b").unwrap()).unwrap();
        assert_eq!(r.steps[0].defects, vec![-8, -4, 4]);
        assert_eq!(r.steps[0].agreement_radius, Some(4));
        let mut truth = wide.clone();
        truth.toggle(0);
        let differs: Vec<i64> = (-8..8).filter(|&i| truth.get(i) != r.lamps.get(i)).collect();
        assert_eq!(differs, vec![-8, -4, 4]);
        let k = 3;
        let walk: Vec<Generator> = vec![Generator::A; 2 * k as usize];
        let r = pseudo_orbit(k, &x, &walk).unwrap();
        assert_eq!(r.head, 2 * k);
        assert_eq!(r.lamps, x);
        assert!(pseudo_orbit(0, &x, &w).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn cocycle_identity(g in element(), h in element(), x in config()) {
            let hx = lamp_act(&h, &x).unwrap();
            let lhs = cocycle(&g.mul(&h), &x).unwrap();
            let rhs = add(cocycle(&g, &hx).unwrap(), cocycle(&h, &x).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn cocycle_matches_closed_form(g in element(), x in config()) {
            prop_assert_eq!(cocycle(&g, &x).unwrap(), cocycle_closed_form(&g, &x));
        }

        #[test]
        fn equivariance(g in element(), v in element(), x in config(), c0 in 0u8..3, c1 in 0u8..3) {
            let state = XtreeState { c: (c0, c1), x };
            let moved = act_on_state(&g, &state).unwrap();
            prop_assert_eq!(state_bijection(&state, &g.reverse().mul(&v)), state_bijection(&moved, &v));
        }
    }
}
