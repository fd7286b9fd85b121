//! Block maps of the Collatz T-function.
//!
//! For every `k` and every residue `r < 2^k` there is a single affine map
//! `X -> (a*X + b) / 2^c` (with `c = k`) that agrees with `T^k` on the whole
//! residue class `r mod 2^k`. [`AffineStep`] stores such a map as the triple
//! `(a, b, c)`; `a` is always a power of three and division by `2^c` is a
//! right shift.
//!
//! Maps for long blocks are built by binary splitting: the first `k/2`
//! iterations select, through their image, the residue that determines the
//! remaining iterations, and the two halves are composed. Blocks up to a
//! fixed depth are served from a precomputed [`BaseTable`].

use std::fmt;
use std::sync::OnceLock;

use rug::Integer;
use serde::Serialize;
use thiserror::Error;

/// Default depth of the cached base table (510 entries).
pub const DEFAULT_CACHE_DEPTH: u32 = 8;

/// Largest supported base-table depth; the table holds `2^(depth+1) - 2` maps.
pub const MAX_CACHE_DEPTH: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AffineError {
    #[error("a*x + b is not divisible by 2^{shift}: value lies outside the map's residue class")]
    WrongResidueClass { shift: u32 },
    #[error("cache depth {0} outside 1..={MAX_CACHE_DEPTH}")]
    CacheDepth(u32),
}

/// The map `X -> (a*X + b) / 2^c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineStep {
    pub a: Integer,
    pub b: Integer,
    pub c: u32,
}

impl AffineStep {
    pub fn new(a: impl Into<Integer>, b: impl Into<Integer>, c: u32) -> Self {
        AffineStep {
            a: a.into(),
            b: b.into(),
            c,
        }
    }

    /// `<1, 0, 0>`
    pub fn identity() -> Self {
        AffineStep::new(1u32, 0u32, 0)
    }

    /// One even iteration, `X/2`.
    pub fn halve() -> Self {
        AffineStep::new(1u32, 0u32, 1)
    }

    /// One odd iteration, `(3X+1)/2`.
    pub fn odd_step() -> Self {
        AffineStep::new(3u32, 1u32, 1)
    }

    /// Exact evaluation `(a*x + b) >> c`.
    ///
    /// Fails if `2^c` does not divide `a*x + b`, which means the map was
    /// applied to a value outside its residue class.
    pub fn eval(&self, x: &Integer) -> Result<Integer, AffineError> {
        let mut v = Integer::from(&self.a * x);
        v += &self.b;
        if !v.is_divisible_2pow(self.c) {
            return Err(AffineError::WrongResidueClass { shift: self.c });
        }
        v >>= self.c;
        Ok(v)
    }

    /// Returns `self ∘ inner`, i.e. the map `X -> self(inner(X))`.
    pub fn compose(&self, inner: &AffineStep) -> AffineStep {
        let a = Integer::from(&self.a * &inner.a);
        let mut b = Integer::from(&self.b << inner.c);
        b += Integer::from(&self.a * &inner.b);
        AffineStep {
            a,
            b,
            c: self.c + inner.c,
        }
    }

    /// Number of odd iterations inside the block, i.e. `log_3 a`, or `None`
    /// when `a` is not a power of three.
    pub fn odd_count(&self) -> Option<u32> {
        if self.a <= 0 {
            return None;
        }
        let mut a = self.a.clone();
        let mut o = 0;
        while a.is_divisible_u(3) {
            a.div_exact_u_mut(3);
            o += 1;
        }
        (a == 1).then_some(o)
    }

    /// Checks the structural invariants of a Collatz block map:
    /// `a = 3^o` with `o <= c`, and `0 <= b < a * 2^c`.
    pub fn is_well_formed(&self) -> bool {
        let Some(o) = self.odd_count() else {
            return false;
        };
        o <= self.c && self.b >= 0 && self.b < Integer::from(&self.a << self.c)
    }
}

impl Default for AffineStep {
    fn default() -> Self {
        AffineStep::identity()
    }
}

impl fmt::Display for AffineStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.a, self.b, self.c)
    }
}

/// Serialized as decimal strings; `a` and `b` can be far wider than any JSON number.
impl Serialize for AffineStep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("AffineStep", 3)?;
        st.serialize_field("a", &self.a.to_string())?;
        st.serialize_field("b", &self.b.to_string())?;
        st.serialize_field("c", &self.c)?;
        st.end()
    }
}

/// Builds the block map for `k` iterations on the class of `r mod 2^k` by
/// walking the trajectory of the representative one step at a time.
///
/// Quadratic in `k`; used for the base table and as the reference
/// construction.
pub fn poly_direct(r: &Integer, k: u32) -> AffineStep {
    let mut rep = Integer::from(r.keep_bits_ref(k));
    let mut pol = AffineStep::identity();
    for _ in 0..k {
        if rep.is_even() {
            rep >>= 1;
            pol.c += 1;
        } else {
            rep *= 3;
            rep += 1;
            rep >>= 1;
            pol = AffineStep::odd_step().compose(&pol);
        }
    }
    pol
}

/// `poly_direct` for machine-word residues.
pub fn poly_direct_u64(r: u64, k: u32) -> AffineStep {
    poly_direct(&Integer::from(r), k)
}

/// Precomputed block maps for all `k <= depth` and `r < 2^k`.
#[derive(Clone, Debug)]
pub struct BaseTable {
    depth: u32,
    // levels[k - 1][r]
    levels: Vec<Vec<AffineStep>>,
}

impl BaseTable {
    pub fn new(depth: u32) -> Result<Self, AffineError> {
        if !(1..=MAX_CACHE_DEPTH).contains(&depth) {
            return Err(AffineError::CacheDepth(depth));
        }
        let levels = (1..=depth)
            .map(|k| (0..1u64 << k).map(|r| poly_direct_u64(r, k)).collect())
            .collect();
        Ok(BaseTable { depth, levels })
    }

    /// Shared table of depth [`DEFAULT_CACHE_DEPTH`], built on first use.
    pub fn shared() -> &'static BaseTable {
        static TABLE: OnceLock<BaseTable> = OnceLock::new();
        TABLE.get_or_init(|| BaseTable::new(DEFAULT_CACHE_DEPTH).expect("default depth is valid"))
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Entry for `k` iterations, `r` reduced mod `2^k`. `None` if `k` is 0
    /// or beyond the table depth.
    pub fn get(&self, k: u32, r: u64) -> Option<&AffineStep> {
        if k == 0 || k > self.depth {
            return None;
        }
        let level = &self.levels[(k - 1) as usize];
        Some(&level[(r & ((1u64 << k) - 1)) as usize])
    }

    /// Overwrites one entry. Only meant for fault-injection tests of the
    /// self-check.
    #[doc(hidden)]
    pub fn set_entry(&mut self, k: u32, r: u64, step: AffineStep) {
        let level = &mut self.levels[(k - 1) as usize];
        level[(r & ((1u64 << k) - 1)) as usize] = step;
    }

    /// Block map for `k` iterations on the class of `r mod 2^k`, by binary
    /// splitting down to the table depth. `r` may exceed `2^k`.
    pub fn poly_fast(&self, r: &Integer, k: u32) -> AffineStep {
        if k == 0 {
            return AffineStep::identity();
        }
        if k <= self.depth {
            let low = r.keep_bits_ref(k);
            let idx = Integer::from(low).to_u64().expect("k <= 16 bits");
            return self.get(k, idx).expect("k within depth").clone();
        }
        let t1 = k / 2;
        let t2 = k - t1;
        let first = self.poly_fast(r, t1);
        let r_k = Integer::from(r.keep_bits_ref(k));
        let mid = first
            .eval(&r_k)
            .expect("r mod 2^k lies in the class of the first half");
        let second = self.poly_fast(&mid, t2);
        second.compose(&first)
    }
}
