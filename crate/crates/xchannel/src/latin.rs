//! Latin squares with fixed first row, K x 3 alignment schemes derived from
//! column triples, interference pairs, and chain 3-cycles.

use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LatinError {
    #[error("enumeration supported for 3 <= K <= 6, got {0}")]
    BudgetExceeded(usize),
    #[error("column triple must have three distinct in-range indices")]
    InvalidTriple,
    #[error("alignment pairs do not decompose into disjoint 3-cycles")]
    ChainStructureViolation,
}

/// Identifier of the beamforming vector v_ij: stream from transmitter `tx`
/// intended for receiver `rx`. Both indices are 0-based internally; `Display`
/// prints the paper-style 1-based form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BfId {
    pub rx: usize,
    pub tx: usize,
}

impl BfId {
    pub fn new(rx: usize, tx: usize) -> Self {
        BfId { rx, tx }
    }

    /// Flat index into a 3K vector layout ordered (rx, tx) lexicographically.
    pub fn flat(&self, k: usize) -> usize {
        self.rx * k + self.tx
    }
}

impl fmt::Display for BfId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}{}", self.rx + 1, self.tx + 1)
    }
}

/// K x K Latin square over symbols {0..K-1} with first row (0, 1, ..., K-1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatinSquare {
    k: usize,
    cells: Vec<u8>,
}

impl LatinSquare {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cell(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.k + col]
    }

    pub fn csv_row(&self) -> String {
        (0..self.k)
            .map(|r| {
                (0..self.k)
                    .map(|c| self.cell(r, c).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// All K x K Latin squares with first row fixed to (0, ..., K-1), in
/// lexicographic (row-by-row) order. The count is (K-1)! * L(K,K).
pub fn enumerate_fixed_first_row(k: usize) -> Result<Vec<LatinSquare>, LatinError> {
    if !(3..=6).contains(&k) {
        return Err(LatinError::BudgetExceeded(k));
    }
    let mut cells: Vec<u8> = vec![0; k * k];
    for (c, cell) in cells.iter_mut().take(k).enumerate() {
        *cell = c as u8;
    }
    let mut col_used = vec![0u16; k]; // bitmask of symbols used per column
    for c in 0..k {
        col_used[c] = 1 << c;
    }
    let mut out = Vec::new();
    fill(k, 1, 0, &mut cells, &mut col_used, &mut out);
    Ok(out)
}

fn fill(
    k: usize,
    row: usize,
    col: usize,
    cells: &mut Vec<u8>,
    col_used: &mut Vec<u16>,
    out: &mut Vec<LatinSquare>,
) {
    if row == k {
        out.push(LatinSquare {
            k,
            cells: cells.clone(),
        });
        return;
    }
    let (next_row, next_col) = if col + 1 == k {
        (row + 1, 0)
    } else {
        (row, col + 1)
    };
    let row_used: u16 = (0..col).map(|c| 1u16 << cells[row * k + c]).sum();
    for s in 0..k as u8 {
        let bit = 1u16 << s;
        if row_used & bit != 0 || col_used[col] & bit != 0 {
            continue;
        }
        cells[row * k + col] = s;
        col_used[col] |= bit;
        fill(k, next_row, next_col, cells, col_used, out);
        col_used[col] &= !bit;
    }
}

/// Stable address of an alignment scheme: square index in enumeration order
/// plus the ordered column triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeId {
    pub square: usize,
    pub triple: [usize; 3],
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "s{}c{}{}{}",
            self.square, self.triple[0], self.triple[1], self.triple[2]
        )
    }
}

/// K x 3 symbol array selecting one Latin-square column per receiver.
/// Row j, column i holds the alignment symbol of beamformer v_{i+1,j+1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentScheme {
    k: usize,
    symbols: Vec<u8>, // K rows x 3 cols, row-major
    pub source: SchemeId,
}

impl AlignmentScheme {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn symbol(&self, tx: usize, rx: usize) -> u8 {
        self.symbols[tx * 3 + rx]
    }
}

pub fn scheme_from_columns(
    square: &LatinSquare,
    square_index: usize,
    triple: [usize; 3],
) -> Result<AlignmentScheme, LatinError> {
    let k = square.k();
    if triple.iter().any(|&c| c >= k)
        || triple[0] == triple[1]
        || triple[0] == triple[2]
        || triple[1] == triple[2]
    {
        return Err(LatinError::InvalidTriple);
    }
    let mut symbols = Vec::with_capacity(k * 3);
    for row in 0..k {
        for &c in &triple {
            symbols.push(square.cell(row, c));
        }
    }
    Ok(AlignmentScheme {
        k,
        symbols,
        source: SchemeId {
            square: square_index,
            triple,
        },
    })
}

/// All ordered column triples of a K-column square: C(K,3) * 3! of them.
pub fn ordered_triples(k: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                if a != b && a != c && b != c {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// Two interference beamformers aligned into one dimension at `receiver`.
/// Members are ordered by beamformer id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignmentPair {
    pub receiver: usize,
    pub members: (BfId, BfId),
}

/// The K interference pairs at one receiver, paired by equal symbols across
/// the two non-receiver columns, sorted by smallest member id.
pub fn alignment_pairs(scheme: &AlignmentScheme, receiver: usize) -> Vec<AlignmentPair> {
    assert!(receiver < 3);
    let k = scheme.k();
    let others: Vec<usize> = (0..3).filter(|&c| c != receiver).collect();
    let (c1, c2) = (others[0], others[1]);
    let mut pairs = Vec::with_capacity(k);
    for s in 0..k as u8 {
        let j1 = (0..k).find(|&j| scheme.symbol(j, c1) == s).unwrap();
        let j2 = (0..k).find(|&j| scheme.symbol(j, c2) == s).unwrap();
        let a = BfId::new(c1, j1);
        let b = BfId::new(c2, j2);
        let members = if a < b { (a, b) } else { (b, a) };
        pairs.push(AlignmentPair { receiver, members });
    }
    pairs.sort_by_key(|p| p.members.0);
    pairs
}

/// One span-equality constraint of a chain: at `receiver`, the signal of
/// `from` and the signal of `to` share a direction, i.e.
/// span(H[receiver][from.tx] v_from) = span(H[receiver][to.tx] v_to).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainEdge {
    pub receiver: usize,
    pub from: BfId,
    pub to: BfId,
}

/// A 3-cycle of span constraints linking three beamformers, one constraint
/// per receiver. `beamformers[0]` is the anchor (smallest id in the cycle),
/// `beamformers[1]` its smaller neighbor; edges follow the cycle
/// b0 -> b1 -> b2 -> b0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub beamformers: [BfId; 3],
    pub edges: [ChainEdge; 3],
}

/// Decompose the 3K alignment pairs into K vertex-disjoint 3-cycles, sorted
/// by anchor id.
pub fn extract_chains(scheme: &AlignmentScheme) -> Result<Vec<Chain>, LatinError> {
    let k = scheme.k();
    let all_pairs: Vec<AlignmentPair> = (0..3).flat_map(|r| alignment_pairs(scheme, r)).collect();
    // adjacency: each beamformer appears in exactly two pairs (one per
    // foreign receiver)
    let mut adj: Vec<Vec<(BfId, usize)>> = vec![Vec::new(); 3 * k];
    for p in &all_pairs {
        let (a, b) = p.members;
        adj[a.flat(k)].push((b, p.receiver));
        adj[b.flat(k)].push((a, p.receiver));
    }
    if adj.iter().any(|n| n.len() != 2) {
        return Err(LatinError::ChainStructureViolation);
    }

    let mut visited = vec![false; 3 * k];
    let mut chains = Vec::with_capacity(k);
    for rx in 0..3 {
        for tx in 0..k {
            let anchor = BfId::new(rx, tx);
            if visited[anchor.flat(k)] {
                continue;
            }
            // walk the cycle starting toward the smaller neighbor
            let mut nbrs = adj[anchor.flat(k)].clone();
            nbrs.sort_by_key(|&(id, _)| id);
            let (b1, r01) = nbrs[0];
            let via: Vec<(BfId, usize)> = adj[b1.flat(k)]
                .iter()
                .copied()
                .filter(|&(id, _)| id != anchor)
                .collect();
            if via.len() != 1 {
                return Err(LatinError::ChainStructureViolation);
            }
            let (b2, r12) = via[0];
            let closing: Vec<usize> = adj[b2.flat(k)]
                .iter()
                .copied()
                .filter(|&(id, _)| id == anchor)
                .map(|(_, r)| r)
                .collect();
            if closing.len() != 1 || b2 == b1 || b2 == anchor {
                return Err(LatinError::ChainStructureViolation);
            }
            let r20 = closing[0];
            let mut receivers = [r01, r12, r20];
            receivers.sort_unstable();
            if receivers != [0, 1, 2] {
                return Err(LatinError::ChainStructureViolation);
            }
            for id in [anchor, b1, b2] {
                visited[id.flat(k)] = true;
            }
            chains.push(Chain {
                beamformers: [anchor, b1, b2],
                edges: [
                    ChainEdge {
                        receiver: r01,
                        from: anchor,
                        to: b1,
                    },
                    ChainEdge {
                        receiver: r12,
                        from: b1,
                        to: b2,
                    },
                    ChainEdge {
                        receiver: r20,
                        from: b2,
                        to: anchor,
                    },
                ],
            });
        }
    }
    if chains.len() != k {
        return Err(LatinError::ChainStructureViolation);
    }
    Ok(chains)
}
