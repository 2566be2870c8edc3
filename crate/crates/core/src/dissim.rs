//! Mean dissimilarity per article and per publishing journal.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{ArticleRecord, JournalId, JournalRegistry};
use crate::similarity::SimilarityMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct ArticleDissimilarity {
    pub article_id: String,
    pub published_journal: JournalId,
    /// `None` when no reference could be matched (the article is unscored).
    pub mean_dissimilarity: Option<f64>,
    pub matched_refs: usize,
    /// References outside the matrix universe, plus blank ones from ingest.
    pub skipped_refs: usize,
    /// The publishing journal never received citations, so every reference
    /// except self-citations scores as fully dissimilar.
    pub empty_publisher_profile: bool,
}

impl ArticleDissimilarity {
    pub fn is_scored(&self) -> bool {
        self.mean_dissimilarity.is_some()
    }
}

/// One minus the mean similarity between the publishing journal and each
/// cited journal, counted once per reference occurrence.
///
/// `empty_profiles` is a sorted list of journals without inbound citations
/// (see [`SimilarityOutcome`](crate::similarity::SimilarityOutcome)); it only
/// drives the `empty_publisher_profile` flag.
pub fn article_mean_dissimilarity(
    article: &ArticleRecord,
    matrix: &SimilarityMatrix,
    empty_profiles: &[JournalId],
) -> ArticleDissimilarity {
    let g = article.published_journal;
    let dimension = matrix.dimension();
    let mut result = ArticleDissimilarity {
        article_id: article.article_id.clone(),
        published_journal: g,
        mean_dissimilarity: None,
        matched_refs: 0,
        skipped_refs: article.unmatched_refs,
        empty_publisher_profile: empty_profiles.binary_search(&g).is_ok(),
    };
    if g.index() >= dimension {
        result.skipped_refs += article.n_refs();
        return result;
    }
    let mut sum = 0.0;
    for &h in &article.cited_occurrences {
        if h.index() < dimension {
            sum += matrix.value(g.index(), h.index());
            result.matched_refs += 1;
        } else {
            result.skipped_refs += 1;
        }
    }
    if result.matched_refs > 0 {
        let d = 1.0 - sum / result.matched_refs as f64;
        result.mean_dissimilarity = Some(d.clamp(0.0, 1.0));
    }
    result
}

/// Scores every article, preserving input order.
pub fn corpus_dissimilarities(
    corpus: &[ArticleRecord],
    matrix: &SimilarityMatrix,
    empty_profiles: &[JournalId],
) -> Vec<ArticleDissimilarity> {
    corpus
        .par_iter()
        .map(|a| article_mean_dissimilarity(a, matrix, empty_profiles))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinRefsFilter {
    pub kept: Vec<ArticleDissimilarity>,
    /// Matched references of kept articles over those of all scored ones.
    pub retained_citation_share: f64,
}

/// Keeps scored articles with at least `min_refs` matched references.
pub fn filter_by_min_refs(results: &[ArticleDissimilarity], min_refs: usize) -> MinRefsFilter {
    let mut total = 0usize;
    let mut retained = 0usize;
    let mut kept = Vec::new();
    for r in results.iter().filter(|r| r.is_scored()) {
        total += r.matched_refs;
        if r.matched_refs >= min_refs {
            retained += r.matched_refs;
            kept.push(r.clone());
        }
    }
    MinRefsFilter {
        kept,
        retained_citation_share: if total == 0 {
            0.0
        } else {
            retained as f64 / total as f64
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JournalDissimilarity {
    pub journal: JournalId,
    pub mean_dissimilarity: f64,
    pub article_count: usize,
}

/// Unweighted mean of article scores per publishing journal, by journal id.
/// Unscored articles are ignored; journals with none scored are omitted.
pub fn journal_mean_dissimilarity(results: &[ArticleDissimilarity]) -> Vec<JournalDissimilarity> {
    let mut by_journal: BTreeMap<JournalId, Vec<f64>> = BTreeMap::new();
    for r in results {
        if let Some(d) = r.mean_dissimilarity {
            by_journal.entry(r.published_journal).or_default().push(d);
        }
    }
    by_journal
        .into_iter()
        .map(|(journal, mut values)| {
            // sorted so the sum does not depend on article order
            values.sort_by(f64::total_cmp);
            let sum: f64 = values.iter().sum();
            JournalDissimilarity {
                journal,
                mean_dissimilarity: (sum / values.len() as f64).clamp(0.0, 1.0),
                article_count: values.len(),
            }
        })
        .collect()
}

/// The `n` journals with most scored articles, ties by id.
pub fn top_journals(stats: &[JournalDissimilarity], n: usize) -> Vec<JournalDissimilarity> {
    let mut sorted = stats.to_vec();
    sorted.sort_by(|a, b| b.article_count.cmp(&a.article_count).then(a.journal.cmp(&b.journal)));
    sorted.truncate(n);
    sorted
}

/// `article_id,journal_id,mean_dissimilarity,matched_refs,skipped_refs`;
/// unscored articles have an empty value.
pub fn write_article_results(path: &Path, results: &[ArticleDissimilarity]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let res = (|| {
        w.write_record(["article_id", "journal_id", "mean_dissimilarity", "matched_refs", "skipped_refs"])?;
        for r in results {
            w.write_record([
                r.article_id.clone(),
                r.published_journal.to_string(),
                r.mean_dissimilarity.map(|d| d.to_string()).unwrap_or_default(),
                r.matched_refs.to_string(),
                r.skipped_refs.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(|e: csv::Error| Error::csv(path, e))
}

/// `journal_id,name,article_count,mean_dissimilarity`.
pub fn write_journal_results(path: &Path, stats: &[JournalDissimilarity], registry: &JournalRegistry) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let res = (|| {
        w.write_record(["journal_id", "name", "article_count", "mean_dissimilarity"])?;
        for s in stats {
            w.write_record([
                s.journal.to_string().as_str(),
                registry.name(s.journal),
                s.article_count.to_string().as_str(),
                s.mean_dissimilarity.to_string().as_str(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(|e: csv::Error| Error::csv(path, e))
}

/// Parses a file written by [`write_article_results`].
pub fn read_article_results(path: &Path) -> Result<Vec<(String, JournalId, Option<f64>, usize, usize)>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::malformed(path, line, format!("bad {what}"));
        if row.len() != 5 {
            return Err(bad("column count"));
        }
        let journal = JournalId(row[1].parse().map_err(|_| bad("journal_id"))?);
        let value = if row[2].is_empty() {
            None
        } else {
            Some(row[2].parse().map_err(|_| bad("mean_dissimilarity"))?)
        };
        out.push((
            row[0].to_string(),
            journal,
            value,
            row[3].parse().map_err(|_| bad("matched_refs"))?,
            row[4].parse().map_err(|_| bad("skipped_refs"))?,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{normalize_profiles, pairwise_similarity, CountMatrix, SimilarityOptions};

    fn j(i: u32) -> JournalId {
        JournalId(i)
    }

    fn article(id: &str, g: u32, cited: &[u32]) -> ArticleRecord {
        ArticleRecord {
            article_id: id.into(),
            pub_year: 2010,
            published_journal: j(g),
            cited_occurrences: cited.iter().copied().map(j).collect(),
            unmatched_refs: 0,
        }
    }

    /// Journals 0 and 1 with S(0,1) = 0.5; journal 2 disjoint from both.
    fn matrix() -> SimilarityMatrix {
        let counts = CountMatrix::from_cells(
            5,
            [(j(3), j(0), 2), (j(3), j(1), 1), (j(4), j(1), 1), (j(4), j(2), 0), (j(2), j(2), 5)],
        );
        let out = pairwise_similarity(&normalize_profiles(&counts), &SimilarityOptions::default()).unwrap();
        assert_eq!(out.matrix.value(0, 1), 0.5);
        out.matrix
    }

    #[test]
    fn self_citing_only_scores_zero() {
        let r = article_mean_dissimilarity(&article("a", 0, &[0, 0, 0]), &matrix(), &[]);
        assert_eq!(r.mean_dissimilarity, Some(0.0));
        assert_eq!(r.matched_refs, 3);
    }

    #[test]
    fn half_similar_pair() {
        let r = article_mean_dissimilarity(&article("a", 0, &[0, 1]), &matrix(), &[]);
        assert_eq!(r.mean_dissimilarity, Some(0.25));
    }

    #[test]
    fn zero_overlap_scores_one() {
        let r = article_mean_dissimilarity(&article("a", 0, &[2, 2]), &matrix(), &[]);
        assert_eq!(r.mean_dissimilarity, Some(1.0));
    }

    #[test]
    fn out_of_universe_and_unscored() {
        let mut a = article("a", 0, &[1, 9]);
        a.unmatched_refs = 2;
        let r = article_mean_dissimilarity(&a, &matrix(), &[]);
        assert_eq!(r.matched_refs, 1);
        assert_eq!(r.skipped_refs, 3);
        assert_eq!(r.mean_dissimilarity, Some(0.5));

        let r = article_mean_dissimilarity(&article("b", 0, &[9]), &matrix(), &[]);
        assert!(!r.is_scored());
        let r = article_mean_dissimilarity(&article("c", 0, &[]), &matrix(), &[]);
        assert!(!r.is_scored());
        let r = article_mean_dissimilarity(&article("d", 7, &[0]), &matrix(), &[]);
        assert!(!r.is_scored());
        assert_eq!(r.skipped_refs, 1);
    }

    #[test]
    fn empty_publisher_is_flagged() {
        let r = article_mean_dissimilarity(&article("a", 3, &[3, 0]), &matrix(), &[j(3), j(4)]);
        assert!(r.empty_publisher_profile);
        assert_eq!(r.mean_dissimilarity, Some(0.5));
    }

    #[test]
    fn batch_preserves_order() {
        let corpus = vec![article("z", 0, &[0]), article("a", 0, &[2])];
        let out = corpus_dissimilarities(&corpus, &matrix(), &[]);
        assert_eq!(out[0].article_id, "z");
        assert_eq!(out[1].mean_dissimilarity, Some(1.0));
        assert!(corpus_dissimilarities(&[], &matrix(), &[]).is_empty());
    }

    #[test]
    fn min_refs_filter() {
        let m = matrix();
        let corpus = vec![article("short", 0, &[0; 5]), article("long", 0, &[1; 15])];
        let results = corpus_dissimilarities(&corpus, &m, &[]);
        let f = filter_by_min_refs(&results, 10);
        assert_eq!(f.kept.len(), 1);
        assert_eq!(f.kept[0].article_id, "long");
        assert_eq!(f.retained_citation_share, 0.75);
        assert_eq!(filter_by_min_refs(&results, 1).kept, results);
    }

    #[test]
    fn journal_means() {
        let r = |id: &str, g, d| ArticleDissimilarity {
            article_id: id.into(),
            published_journal: j(g),
            mean_dissimilarity: d,
            matched_refs: 1,
            skipped_refs: 0,
            empty_publisher_profile: false,
        };
        let stats = journal_mean_dissimilarity(&[r("a", 1, Some(0.4))]);
        assert_eq!(stats[0].mean_dissimilarity, 0.4);

        let stats = journal_mean_dissimilarity(&[r("a", 1, Some(0.2)), r("b", 1, Some(0.4)), r("c", 2, None)]);
        assert_eq!(stats.len(), 1);
        assert!((stats[0].mean_dissimilarity - 0.3).abs() < 1e-15);
        assert_eq!(stats[0].article_count, 2);

        let top = top_journals(
            &[
                JournalDissimilarity { journal: j(0), mean_dissimilarity: 0.1, article_count: 1 },
                JournalDissimilarity { journal: j(1), mean_dissimilarity: 0.2, article_count: 3 },
                JournalDissimilarity { journal: j(2), mean_dissimilarity: 0.3, article_count: 1 },
            ],
            2,
        );
        assert_eq!(top.iter().map(|s| s.journal).collect::<Vec<_>>(), vec![j(1), j(0)]);
    }

    #[test]
    fn article_file_round_trip() {
        let corpus = vec![article("a, quoted", 0, &[0, 1]), article("b", 0, &[9])];
        let results = corpus_dissimilarities(&corpus, &matrix(), &[]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_article_results(&p, &results).unwrap();
        let back = read_article_results(&p).unwrap();
        assert_eq!(back[0], ("a, quoted".to_string(), j(0), Some(0.25), 2, 0));
        assert_eq!(back[1], ("b".to_string(), j(0), None, 0, 1));
    }
}
