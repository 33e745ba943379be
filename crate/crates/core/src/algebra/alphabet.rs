use std::collections::HashMap;

use super::mono::{Exponent, Gen, JetVar, Mono};
use super::AlgebraError;

/// Exponent regime of a generator at jet order 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    /// Non-negative integer exponents.
    Plain,
    /// Half-integer exponents of either sign.
    Radical,
    /// Integer exponents of either sign.
    Invertible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub name: String,
    pub kind: GeneratorKind,
    /// LaTeX base symbol, e.g. `k` or `K^{3}`.
    pub latex_base: String,
    /// LaTeX subscript at jet order 0, e.g. `-1`.
    pub latex_sub: Option<String>,
}

impl GeneratorSpec {
    pub fn new(name: impl Into<String>, kind: GeneratorKind) -> Self {
        let name = name.into();
        GeneratorSpec {
            latex_base: name.clone(),
            latex_sub: None,
            name,
            kind,
        }
    }

    pub fn with_latex(mut self, base: impl Into<String>, sub: Option<String>) -> Self {
        self.latex_base = base.into();
        self.latex_sub = sub;
        self
    }

    /// Whether names are letters only, so jets render as `u1`, `u2` instead of `k0_1`.
    pub(crate) fn compact_jets(&self) -> bool {
        self.name.chars().all(|c| c.is_ascii_alphabetic())
    }
}

/// An ordered, immutable set of generators. Generator order drives canonical monomial order.
#[derive(Clone, Debug)]
pub struct Alphabet {
    specs: Vec<GeneratorSpec>,
    index: HashMap<String, Gen>,
}

impl Alphabet {
    pub fn new(specs: Vec<GeneratorSpec>) -> Result<Self, AlgebraError> {
        let mut index = HashMap::with_capacity(specs.len());
        for (i, s) in specs.iter().enumerate() {
            if index.insert(s.name.clone(), Gen(i as u16)).is_some() {
                return Err(AlgebraError::DuplicateGenerator(s.name.clone()));
            }
        }
        Ok(Alphabet { specs, index })
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn spec(&self, g: Gen) -> &GeneratorSpec {
        &self.specs[g.0 as usize]
    }

    pub fn kind(&self, g: Gen) -> GeneratorKind {
        self.spec(g).kind
    }

    pub fn lookup(&self, name: &str) -> Option<Gen> {
        self.index.get(name).copied()
    }

    pub fn gens(&self) -> impl Iterator<Item = Gen> + '_ {
        (0..self.specs.len()).map(|i| Gen(i as u16))
    }

    pub fn check_exponent(&self, v: JetVar, e: Exponent) -> Result<(), AlgebraError> {
        let ok = if v.order > 0 {
            e.is_integer() && e.halves() >= 0
        } else {
            match self.kind(v.gen) {
                GeneratorKind::Plain => e.is_integer() && e.halves() >= 0,
                GeneratorKind::Radical => true,
                GeneratorKind::Invertible => e.is_integer(),
            }
        };
        if ok {
            Ok(())
        } else {
            Err(AlgebraError::InvalidExponent {
                generator: self.spec(v.gen).name.clone(),
                order: v.order,
                exponent: e.to_string(),
            })
        }
    }

    pub fn check_mono(&self, m: &Mono) -> Result<(), AlgebraError> {
        for &(v, e) in m.factors() {
            if v.gen.0 as usize >= self.specs.len() {
                return Err(AlgebraError::UnknownGenerator(format!("#{}", v.gen.0)));
            }
            self.check_exponent(v, e)?;
        }
        Ok(())
    }

    /// Renders a jet variable in the expression grammar (`u2`, `k0_1`, `k_m1`).
    pub fn jet_name(&self, v: JetVar) -> String {
        let spec = self.spec(v.gen);
        match (v.order, spec.compact_jets()) {
            (0, _) => spec.name.clone(),
            (n, true) => format!("{}{}", spec.name, n),
            (n, false) => format!("{}_{}", spec.name, n),
        }
    }

    pub fn jet_latex(&self, v: JetVar) -> String {
        let spec = self.spec(v.gen);
        let xs = match v.order {
            0 => String::new(),
            n @ 1..=3 => "x".repeat(n as usize),
            n => format!("({n})"),
        };
        let sub = match (&spec.latex_sub, xs.is_empty()) {
            (Some(s), true) => s.clone(),
            (Some(s), false) => format!("{s},{xs}"),
            (None, _) => xs,
        };
        if sub.is_empty() {
            spec.latex_base.clone()
        } else {
            format!("{}_{{{}}}", spec.latex_base, sub)
        }
    }

    /// Inverse of [`Alphabet::jet_name`].
    pub fn parse_jet(&self, ident: &str) -> Option<JetVar> {
        if let Some(g) = self.lookup(ident) {
            return Some(JetVar::base(g));
        }
        let digits_at = ident.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        if digits_at == ident.len() || digits_at == 0 {
            return None;
        }
        let (head, digits) = ident.split_at(digits_at);
        let order: u16 = digits.parse().ok()?;
        if order == 0 {
            return None;
        }
        if let Some(g) = self.lookup(head) {
            if self.spec(g).compact_jets() {
                return Some(JetVar::new(g, order));
            }
        }
        let base = head.strip_suffix('_')?;
        let g = self.lookup(base)?;
        (!self.spec(g).compact_jets()).then_some(JetVar::new(g, order))
    }
}
