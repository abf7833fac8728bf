//! Declared irrational symbols and their high-precision evaluators.
//!
//! The library never proves that the declared symbols are linearly
//! independent over the rationals together with `1`; it trusts the
//! declaration. Everything downstream (density verdicts in particular) is
//! only meaningful under that hypothesis.

use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Produces `m` with `|value - m / 2^prec| <= 2^(1 - prec)`.
///
/// Implementations must be reentrant.
pub trait Evaluator: Send + Sync + fmt::Debug {
    fn approx(&self, prec: u32) -> BigInt;
}

/// `sqrt(n)` for a square-free `n >= 2`, computed with an integer square
/// root. The highest precision computed so far is cached; lower precisions
/// are obtained by truncation, which keeps the floor exact.
#[derive(Debug)]
pub struct SqrtEvaluator {
    radicand: u64,
    cache: Mutex<Option<(u32, BigInt)>>,
}

impl SqrtEvaluator {
    pub fn new(radicand: u64) -> Self {
        SqrtEvaluator {
            radicand,
            cache: Mutex::new(None),
        }
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }
}

impl Evaluator for SqrtEvaluator {
    fn approx(&self, prec: u32) -> BigInt {
        {
            let cache = self.cache.lock().expect("sqrt cache poisoned");
            if let Some((p, ref m)) = *cache {
                if p >= prec {
                    return m >> (p - prec) as usize;
                }
            }
        }
        // floor(sqrt(n * 4^prec)) = floor(sqrt(n) * 2^prec)
        let scaled = BigUint::from(self.radicand) << (2 * prec as usize);
        let root = BigInt::from(scaled.sqrt());
        let mut cache = self.cache.lock().expect("sqrt cache poisoned");
        match *cache {
            Some((p, _)) if p >= prec => {}
            _ => *cache = Some((prec, root.clone())),
        }
        root
    }
}

/// A named irrational together with its evaluator.
#[derive(Debug, Clone)]
pub struct Symbol {
    name: String,
    evaluator: Arc<dyn Evaluator>,
}

impl Symbol {
    pub fn new(name: impl Into<String>, evaluator: Arc<dyn Evaluator>) -> Self {
        Symbol {
            name: name.into(),
            evaluator,
        }
    }

    /// Parses the built-in `sqrtN` names.
    pub fn builtin(name: &str) -> Result<Self> {
        let n: u64 = name
            .strip_prefix("sqrt")
            .and_then(|rest| rest.parse().ok())
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        if n < 2 || !is_square_free(n) {
            return Err(Error::InvalidBasis(format!(
                "`{name}` is not the square root of a square-free integer >= 2"
            )));
        }
        Ok(Symbol::new(name, Arc::new(SqrtEvaluator::new(n))))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn approx(&self, prec: u32) -> BigInt {
        self.evaluator.approx(prec)
    }
}

fn is_square_free(n: u64) -> bool {
    let mut p = 2u64;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// The ordered list of declared irrationals shared by a family of scalars.
#[derive(Debug, Clone)]
pub struct IrrationalBasis {
    symbols: Vec<Symbol>,
    independence_declared: bool,
}

impl IrrationalBasis {
    pub fn new(symbols: Vec<Symbol>) -> Result<Arc<Self>> {
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].iter().any(|o| o.name == s.name) {
                return Err(Error::InvalidBasis(format!(
                    "duplicate symbol `{}`",
                    s.name
                )));
            }
            if s.name.is_empty()
                || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                || s.name.starts_with(|c: char| c.is_ascii_digit())
            {
                return Err(Error::InvalidBasis(format!(
                    "symbol name `{}` must be an identifier",
                    s.name
                )));
            }
        }
        Ok(Arc::new(IrrationalBasis {
            symbols,
            independence_declared: true,
        }))
    }

    /// The basis with no irrationals: scalars are plain rationals.
    pub fn rational() -> Arc<Self> {
        Arc::new(IrrationalBasis {
            symbols: Vec::new(),
            independence_declared: true,
        })
    }

    /// Builds a basis from built-in names such as `sqrt2`.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Arc<Self>> {
        let symbols = names
            .iter()
            .map(|n| Symbol::builtin(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn independence_declared(&self) -> bool {
        self.independence_declared
    }

    pub fn names(&self) -> Vec<String> {
        self.symbols.iter().map(|s| s.name.clone()).collect()
    }

    /// Two bases are interchangeable when they declare the same names in
    /// the same order.
    pub fn same_as(&self, other: &IrrationalBasis) -> bool {
        std::ptr::eq(self, other)
            || (self.symbols.len() == other.symbols.len()
                && self
                    .symbols
                    .iter()
                    .zip(&other.symbols)
                    .all(|(a, b)| a.name == b.name))
    }
}

/// `floor(log2(x)) + 1` for positive `x`, zero for zero.
pub(crate) fn bit_len(x: &BigUint) -> u64 {
    if x.is_zero() {
        0
    } else {
        x.bits()
    }
}

pub(crate) fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}
