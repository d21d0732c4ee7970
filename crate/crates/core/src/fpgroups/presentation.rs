//! Finitely presented groups.

use serde::{Deserialize, Serialize};

use super::word::{commutator, reduce_word, Word};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    gens: Vec<String>,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(gens: Vec<String>, relators: Vec<Word>) -> Result<Self> {
        let k = gens.len() as i32;
        let relators: Vec<Word> = relators.iter().map(|r| reduce_word(r)).collect();
        for r in &relators {
            for &l in r {
                if l == 0 || l.abs() > k {
                    return Err(Error::invalid(format!(
                        "relator letter {l} out of range for {k} generators"
                    )));
                }
            }
        }
        Ok(Presentation { gens, relators })
    }

    pub fn free(ngens: usize) -> Self {
        Presentation {
            gens: (0..ngens).map(|i| format!("x{i}")).collect(),
            relators: vec![],
        }
    }

    pub fn free_named(names: &[&str]) -> Self {
        Presentation {
            gens: names.iter().map(|s| s.to_string()).collect(),
            relators: vec![],
        }
    }

    /// ⟨a₁,b₁,…,a_g,b_g | Π [aᵢ,bᵢ]⟩
    pub fn surface(genus: usize) -> Self {
        let mut gens = Vec::new();
        for i in 1..=genus {
            gens.push(format!("a{i}"));
            gens.push(format!("b{i}"));
        }
        let mut rel: Word = Vec::new();
        for i in 0..genus {
            let a = (2 * i + 1) as i32;
            let b = (2 * i + 2) as i32;
            rel = super::word::concat(&rel, &commutator(&[a], &[b]));
        }
        let relators = if genus == 0 { vec![] } else { vec![rel] };
        Presentation { gens, relators }
    }

    pub fn trivial() -> Self {
        Presentation {
            gens: vec![],
            relators: vec![],
        }
    }

    pub fn ngens(&self) -> usize {
        self.gens.len()
    }

    pub fn gen_names(&self) -> &[String] {
        &self.gens
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g == name)
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// Exponent-sum matrix of the relators (one row per relator).
    pub fn abelianized_relators(&self) -> Vec<Vec<i64>> {
        self.relators
            .iter()
            .map(|r| super::word::abelianized(r, self.ngens()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surface_presentation() {
        let p = Presentation::surface(2);
        assert_eq!(p.ngens(), 4);
        assert_eq!(p.relators().len(), 1);
        assert_eq!(p.relators()[0], vec![1, 2, -1, -2, 3, 4, -3, -4]);
        assert!(p.abelianized_relators()[0].iter().all(|&v| v == 0));
    }

    #[test]
    fn out_of_range_relator_rejected() {
        assert!(Presentation::new(vec!["a".into()], vec![vec![2]]).is_err());
    }
}
