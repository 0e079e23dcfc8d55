//! Dense linear algebra over the two-element field.
//!
//! Rows are bitsets packed into `u64` words.  The solver performs plain
//! Gaussian elimination and reports a particular solution (all free variables
//! set to zero, which keeps downstream outputs canonical) together with a
//! basis of the homogeneous solution space, so callers can enumerate the full
//! affine solution set when an existential search is required.
//!
//! Determinism: pivots are chosen left-to-right and rows are processed in
//! insertion order, so results depend only on the input system.

/// A packed bit row over the two-element field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    /// A zero row of `len` bits.
    #[must_use]
    pub fn zeros(len: usize) -> Self {
        BitRow { words: vec![0; len.div_ceil(64)], len }
    }

    /// Number of bits.
    #[must_use]
    pub fn len(&self) -> usize {
        self.len
    }

    /// Whether every bit is zero.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Reads bit `i`.
    #[must_use]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Sets bit `i` to `value`.
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Flips bit `i`.
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// Adds `other` into `self` (XOR).
    pub fn xor_assign(&mut self, other: &BitRow) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Index of the first set bit, if any.
    #[must_use]
    pub fn first_set(&self) -> Option<usize> {
        for (w, word) in self.words.iter().enumerate() {
            if *word != 0 {
                let i = w * 64 + word.trailing_zeros() as usize;
                return (i < self.len).then_some(i);
            }
        }
        None
    }

    /// Indices of all set bits.
    #[must_use]
    pub fn ones(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }
}

/// A linear system `A x = b` over the two-element field.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    unknowns: usize,
    rows: Vec<(BitRow, bool)>,
}

/// The solution set of a consistent system: one particular solution plus a
/// basis for the homogeneous solutions.
#[derive(Debug, Clone)]
pub struct SolutionSet {
    /// A particular solution with all free variables set to zero.
    pub particular: BitRow,
    /// Basis of the kernel; the full solution set is `particular + span`.
    pub kernel_basis: Vec<BitRow>,
}

impl SolutionSet {
    /// Number of solutions as `2^dim`, or `None` when the exponent overflows.
    #[must_use]
    pub fn count(&self) -> Option<u64> {
        let dim = u32::try_from(self.kernel_basis.len()).ok()?;
        1u64.checked_shl(dim)
    }

    /// Enumerates every solution (caller must ensure the count is small).
    #[must_use]
    pub fn enumerate(&self) -> Vec<BitRow> {
        let dim = self.kernel_basis.len();
        assert!(dim < 24, "solution space too large to enumerate");
        let mut out = Vec::with_capacity(1 << dim);
        for mask in 0u64..(1u64 << dim) {
            let mut sol = self.particular.clone();
            for (k, basis) in self.kernel_basis.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    sol.xor_assign(basis);
                }
            }
            out.push(sol);
        }
        out
    }
}

impl LinearSystem {
    /// Creates an empty system over `unknowns` variables.
    #[must_use]
    pub fn new(unknowns: usize) -> Self {
        LinearSystem { unknowns, rows: Vec::new() }
    }

    /// Number of unknowns.
    #[must_use]
    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    /// Appends the equation `row · x = rhs`.
    pub fn push(&mut self, row: BitRow, rhs: bool) {
        debug_assert_eq!(row.len(), self.unknowns);
        self.rows.push((row, rhs));
    }

    /// Solves the system; `None` when inconsistent.
    #[must_use]
    pub fn solve(&self) -> Option<SolutionSet> {
        let n = self.unknowns;
        let mut rows = self.rows.clone();
        // pivot_of_col[c] = row index whose leading coefficient is column c.
        let mut pivot_of_col: Vec<Option<usize>> = vec![None; n];
        let mut next_row = 0usize;
        for col in 0..n {
            let Some(found) = (next_row..rows.len()).find(|&r| rows[r].0.get(col)) else {
                continue;
            };
            rows.swap(next_row, found);
            let (pivot_row, pivot_rhs) = rows[next_row].clone();
            for (r, (row, rhs)) in rows.iter_mut().enumerate() {
                if r != next_row && row.get(col) {
                    row.xor_assign(&pivot_row);
                    *rhs ^= pivot_rhs;
                }
            }
            pivot_of_col[col] = Some(next_row);
            next_row += 1;
        }
        // Inconsistency: a zero row with nonzero right-hand side.
        if rows.iter().any(|(row, rhs)| *rhs && row.is_empty()) {
            return None;
        }
        let mut particular = BitRow::zeros(n);
        for col in 0..n {
            if let Some(r) = pivot_of_col[col] {
                particular.set(col, rows[r].1);
            }
        }
        let mut kernel_basis = Vec::new();
        for free in 0..n {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut vec = BitRow::zeros(n);
            vec.set(free, true);
            for col in 0..n {
                if let Some(r) = pivot_of_col[col] {
                    if rows[r].0.get(free) {
                        vec.set(col, true);
                    }
                }
            }
            kernel_basis.push(vec);
        }
        Some(SolutionSet { particular, kernel_basis })
    }
}
