//! Seeded synthetic corpora with a known cluster structure, for fixtures,
//! benchmarks and qualitative checks.
//!
//! Journals are split round-robin into clusters; each cluster is one
//! subject category. The first `citing_journals` journals publish articles.
//! Each article has a mixing rate: with probability `1 - mix` a reference
//! goes to the publishing journal's own cluster (skewed towards low-index
//! journals), otherwise to a uniformly random journal of another cluster.
//! Journals flagged multidisciplinary draw their articles' mixing rates from
//! the high end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::DEFAULT_MULTIDISCIPLINARY_LABEL;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SynthSpec {
    pub seed: u64,
    pub journals: usize,
    pub clusters: usize,
    pub citing_journals: usize,
    /// The first few citing journals, every `citing_journals / n`-th, are
    /// categorized as multidisciplinary.
    pub multidisciplinary_journals: usize,
    pub articles: usize,
    pub min_refs: usize,
    pub max_refs: usize,
    /// Mixing rate range for ordinary journals.
    pub mix: (f64, f64),
    /// Mixing rate range for multidisciplinary journals.
    pub multidisciplinary_mix: (f64, f64),
    /// Chance that a reference is exported without a cited journal.
    pub blank_ref_rate: f64,
    /// Chance that an ordinary journal gets a second category.
    pub second_category_rate: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 7,
            journals: 50,
            clusters: 4,
            citing_journals: 20,
            multidisciplinary_journals: 2,
            articles: 200,
            min_refs: 4,
            max_refs: 30,
            mix: (0.0, 0.6),
            multidisciplinary_mix: (0.6, 1.0),
            blank_ref_rate: 0.02,
            second_category_rate: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthRow {
    pub year: i32,
    pub article: String,
    pub citing: String,
    /// Empty for a blank reference.
    pub cited: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthCorpus {
    pub rows: Vec<SynthRow>,
    pub categories: Vec<(String, String)>,
}

pub fn journal_name(i: usize) -> String {
    format!("Journal {i:05}")
}

impl SynthSpec {
    fn is_multidisciplinary(&self, journal: usize) -> bool {
        if self.multidisciplinary_journals == 0 || journal >= self.citing_journals {
            return false;
        }
        let stride = (self.citing_journals / self.multidisciplinary_journals).max(1);
        journal % stride == stride - 1 && journal / stride < self.multidisciplinary_journals
    }

    pub fn generate(&self) -> SynthCorpus {
        assert!(self.clusters >= 2 && self.journals >= self.clusters);
        assert!(self.citing_journals >= 1 && self.citing_journals <= self.journals);
        assert!(self.min_refs >= 1 && self.min_refs <= self.max_refs);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let members: Vec<Vec<usize>> = (0..self.clusters)
            .map(|c| (c..self.journals).step_by(self.clusters).collect())
            .collect();
        let cluster_of = |j: usize| j % self.clusters;

        let mut rows = Vec::new();
        for a in 0..self.articles {
            let publisher = rng.gen_range(0..self.citing_journals);
            let home = cluster_of(publisher);
            let (lo, hi) = if self.is_multidisciplinary(publisher) {
                self.multidisciplinary_mix
            } else {
                self.mix
            };
            let mix = lo + (hi - lo) * rng.gen::<f64>();
            let refs = rng.gen_range(self.min_refs..=self.max_refs);
            let year = 2006 + (a % 10) as i32;
            let article = format!("A{a:06}");
            for _ in 0..refs {
                let cited = if rng.gen::<f64>() < self.blank_ref_rate {
                    String::new()
                } else if rng.gen::<f64>() < mix {
                    let mut c = rng.gen_range(0..self.clusters - 1);
                    if c >= home {
                        c += 1;
                    }
                    let pool = &members[c];
                    journal_name(pool[rng.gen_range(0..pool.len())])
                } else {
                    let pool = &members[home];
                    let u: f64 = rng.gen();
                    journal_name(pool[((u * u) * pool.len() as f64) as usize])
                };
                rows.push(SynthRow {
                    year,
                    article: article.clone(),
                    citing: journal_name(publisher),
                    cited,
                });
            }
        }

        let mut categories = Vec::new();
        for j in 0..self.journals {
            let name = journal_name(j);
            if self.is_multidisciplinary(j) {
                categories.push((name, DEFAULT_MULTIDISCIPLINARY_LABEL.to_string()));
                continue;
            }
            let c = cluster_of(j);
            categories.push((name.clone(), format!("Field {c:02}")));
            if rng.gen::<f64>() < self.second_category_rate {
                categories.push((name, format!("Field {:02} Applied", c)));
            }
        }
        SynthCorpus { rows, categories }
    }
}

impl SynthCorpus {
    pub fn write_citations(&self, path: &Path) -> Result<()> {
        write_all(path, |w| {
            writeln!(w, "pub_year,article_id,citing_journal,cited_journal")?;
            for r in &self.rows {
                writeln!(w, "{},{},{},{}", r.year, r.article, r.citing, r.cited)?;
            }
            Ok(())
        })
    }

    pub fn write_categories(&self, path: &Path) -> Result<()> {
        write_all(path, |w| {
            writeln!(w, "journal,category")?;
            for (j, c) in &self.categories {
                writeln!(w, "{j},{c}")?;
            }
            Ok(())
        })
    }
}

fn write_all(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_sized() {
        let spec = SynthSpec::default();
        let a = spec.generate();
        assert_eq!(a, spec.generate());
        let articles: std::collections::BTreeSet<_> = a.rows.iter().map(|r| &r.article).collect();
        assert_eq!(articles.len(), 200);
        let flagged = a.categories.iter().filter(|c| c.1 == DEFAULT_MULTIDISCIPLINARY_LABEL).count();
        assert_eq!(flagged, 2);
    }
}
