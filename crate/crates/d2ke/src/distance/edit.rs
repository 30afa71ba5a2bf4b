//! Levenshtein edit distance.

use crate::error::{Error, Result};
use crate::objects::SymbolString;

/// Edit distance between two strings over the same alphabet.
///
/// Unit costs for insertion, deletion, and substitution. The shared-alphabet
/// requirement is part of the measure's domain: comparing strings drawn from
/// different alphabets is a kind error, not a distance of any value.
pub fn edit_distance(a: &SymbolString, b: &SymbolString) -> Result<usize> {
    if a.alphabet_size() != b.alphabet_size() {
        return Err(Error::DimensionMismatch(format!(
            "edit distance operands have alphabet sizes {} and {}",
            a.alphabet_size(),
            b.alphabet_size()
        )));
    }
    Ok(levenshtein(a.symbols(), b.symbols()))
}

/// Two-row dynamic program over raw symbol slices.
pub fn levenshtein(a: &[u32], b: &[u32]) -> usize {
    // Keep the shorter slice along the row dimension.
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let n = short.len();
    let mut prev: Vec<usize> = (0..=n).collect();
    let mut curr = vec![0usize; n + 1];
    for (i, &cl) in long.iter().enumerate() {
        curr[0] = i + 1;
        for (j, &cs) in short.iter().enumerate() {
            let sub = prev[j] + usize::from(cl != cs);
            let del = prev[j + 1] + 1;
            let ins = curr[j] + 1;
            curr[j + 1] = sub.min(del).min(ins);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[n]
}
