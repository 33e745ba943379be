//! Standard generator alphabets.
//!
//! The HD alphabet holds the field `u`, a test indeterminate `v`, and the
//! Laurent coefficients `k_m1, k0, k1, ...` of a generic series
//! `k = k_m1 z + sum_l k_l z^(-l)`. The central alphabet holds one scalar
//! symbol `K{i}_{l}` per current coefficient.

use once_cell::sync::Lazy;

use crate::algebra::{Alphabet, DiffPoly, Gen, GeneratorKind, GeneratorSpec};

/// Number of plain `k_l` generators in [`hd_alphabet`].
pub const K_DEPTH: usize = 96;

pub const U: Gen = Gen(0);
pub const V: Gen = Gen(1);

static HD: Lazy<Alphabet> = Lazy::new(|| {
    let mut specs = vec![
        GeneratorSpec::new("u", GeneratorKind::Radical),
        GeneratorSpec::new("v", GeneratorKind::Plain),
        GeneratorSpec::new("k_m1", GeneratorKind::Invertible).with_latex("k", Some("-1".into())),
    ];
    for l in 0..K_DEPTH {
        specs.push(
            GeneratorSpec::new(format!("k{l}"), GeneratorKind::Plain)
                .with_latex("k", Some(l.to_string())),
        );
    }
    Alphabet::new(specs).expect("distinct names")
});

pub fn hd_alphabet() -> &'static Alphabet {
    &HD
}

/// Generator of the coefficient `k_m`, `m >= -1`.
pub fn k_gen(m: i32) -> Gen {
    assert!(m >= -1 && m < K_DEPTH as i32, "k index {m} outside the alphabet");
    Gen((m + 3) as u16)
}

/// Inverse of [`k_gen`].
pub fn k_index(g: Gen) -> Option<i32> {
    (g.0 >= 2 && (g.0 as usize) < K_DEPTH + 3).then(|| g.0 as i32 - 3)
}

pub fn u() -> DiffPoly {
    DiffPoly::gen(U)
}

pub fn k(m: i32) -> DiffPoly {
    DiffPoly::gen(k_gen(m))
}

/// Alphabet of scalar symbols `K{i}_m1, K{i}_0, ..., K{i}_{depth}` for `i = 1..=max_current`.
#[derive(Clone, Debug)]
pub struct CentralAlphabet {
    alphabet: Alphabet,
    max_current: usize,
    depth: usize,
}

impl CentralAlphabet {
    pub fn new(max_current: usize, depth: usize) -> Self {
        let mut specs = Vec::new();
        for i in 1..=max_current {
            for l in -1..=depth as i32 {
                let tag = if l < 0 { "m1".to_string() } else { l.to_string() };
                specs.push(
                    GeneratorSpec::new(format!("K{i}_{tag}"), GeneratorKind::Plain)
                        .with_latex(format!("K^{{{i}}}"), Some(l.to_string())),
                );
            }
        }
        CentralAlphabet {
            alphabet: Alphabet::new(specs).expect("distinct names"),
            max_current,
            depth,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn max_current(&self) -> usize {
        self.max_current
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Symbol for `K^i_l`, `1 <= i <= max_current`, `-1 <= l <= depth`.
    pub fn symbol(&self, i: usize, l: i32) -> Gen {
        assert!((1..=self.max_current).contains(&i) && l >= -1 && l <= self.depth as i32);
        Gen(((i - 1) * (self.depth + 2) + (l + 1) as usize) as u16)
    }

    /// Inverse of [`CentralAlphabet::symbol`].
    pub fn locate(&self, g: Gen) -> (usize, i32) {
        let stride = self.depth + 2;
        let idx = g.0 as usize;
        (idx / stride + 1, (idx % stride) as i32 - 1)
    }
}
