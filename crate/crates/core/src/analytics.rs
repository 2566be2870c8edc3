//! Downstream analyses over scored articles: the score distribution, decile
//! classes, the share of each class published in multidisciplinary journals,
//! and how many subject categories an article's references span.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::dissim::ArticleDissimilarity;
use crate::error::{Error, Result};
use crate::ingest::{ArticleRecord, Categories, CategoryMap};

pub const CLASS_COUNT: usize = 10;

/// Values this close (in bin widths) to a bin edge are placed on the edge.
const EDGE_SNAP: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn bin_bounds(&self, k: usize) -> (f64, f64) {
        // k / (1/w) prints 0.15 where k·w prints 0.15000000000000002
        let inv = 1.0 / self.bin_width;
        let edge = |k: usize| {
            if (inv - inv.round()).abs() < EDGE_SNAP {
                k as f64 / inv.round()
            } else {
                k as f64 * self.bin_width
            }
        };
        (edge(k), edge(k + 1).min(1.0))
    }

    /// Index of the most populated bin, lowest on ties.
    pub fn mode(&self) -> Option<usize> {
        let max = *self.counts.iter().max()?;
        (max > 0).then(|| self.counts.iter().position(|&c| c == max).expect("max present"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_lines(path, "bin,lower,upper,count", self.counts.iter().enumerate().map(|(k, c)| {
            let (lo, hi) = self.bin_bounds(k);
            format!("{k},{lo},{hi},{c}")
        }))
    }
}

fn snapped_floor(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < EDGE_SNAP {
        r
    } else {
        x.floor()
    }
}

/// Half-open bins `[k·w, (k+1)·w)` over `[0, 1]`, the last one closed at 1.
pub fn histogram(results: &[ArticleDissimilarity], bin_width: f64) -> Result<Histogram> {
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(Error::Config(format!("bin width {bin_width} must be in (0, 1]")));
    }
    let inv = 1.0 / bin_width;
    let nbins = {
        let r = inv.round();
        if (inv - r).abs() < EDGE_SNAP {
            r as usize
        } else {
            inv.ceil() as usize
        }
    };
    let mut counts = vec![0u64; nbins];
    for d in results.iter().filter_map(|r| r.mean_dissimilarity) {
        let k = (snapped_floor(d / bin_width) as usize).min(nbins - 1);
        counts[k] += 1;
    }
    Ok(Histogram { bin_width, counts })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecileClass {
    /// 1-based class number.
    pub class: usize,
    /// Exclusive lower breakpoint (inclusive minimum for class 1).
    pub lower: f64,
    /// Inclusive upper breakpoint (the maximum for class 10).
    pub upper: f64,
    /// Article ids in input order.
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecileClasses {
    pub breakpoints: [f64; CLASS_COUNT - 1],
    pub classes: Vec<DecileClass>,
}

impl DecileClasses {
    pub fn total_members(&self) -> usize {
        self.classes.iter().map(|c| c.members.len()).sum()
    }
}

/// Splits scored articles at the nearest-rank 10%..90% quantiles. A value
/// equal to a breakpoint goes to the lower class.
pub fn decile_classes(results: &[ArticleDissimilarity]) -> Result<DecileClasses> {
    let scored: Vec<(&str, f64)> = results
        .iter()
        .filter_map(|r| r.mean_dissimilarity.map(|d| (r.article_id.as_str(), d)))
        .collect();
    let n = scored.len();
    if n < CLASS_COUNT {
        return Err(Error::TooFewArticles(n));
    }
    let mut sorted: Vec<f64> = scored.iter().map(|s| s.1).collect();
    sorted.sort_by(f64::total_cmp);

    let mut breakpoints = [0.0; CLASS_COUNT - 1];
    for (k, bp) in breakpoints.iter_mut().enumerate() {
        // nearest rank: ceil(p·n), 1-based
        let rank = ((k + 1) * n).div_ceil(CLASS_COUNT);
        *bp = sorted[rank - 1];
    }

    let mut classes: Vec<DecileClass> = (0..CLASS_COUNT)
        .map(|c| DecileClass {
            class: c + 1,
            lower: if c == 0 { sorted[0] } else { breakpoints[c - 1] },
            upper: if c == CLASS_COUNT - 1 { sorted[n - 1] } else { breakpoints[c] },
            members: Vec::new(),
        })
        .collect();
    for (id, d) in scored {
        let c = breakpoints.partition_point(|&q| q < d);
        classes[c].members.push(id.to_string());
    }
    Ok(DecileClasses { breakpoints, classes })
}

/// Scored articles whose publishing journal is not flagged multidisciplinary.
pub fn non_multidisciplinary(results: &[ArticleDissimilarity], categories: &CategoryMap) -> Vec<ArticleDissimilarity> {
    results
        .iter()
        .filter(|r| r.is_scored() && !categories.is_multidisciplinary(r.published_journal))
        .cloned()
        .collect()
}

fn corpus_index(corpus: &[ArticleRecord]) -> HashMap<&str, &ArticleRecord> {
    corpus.iter().map(|a| (a.article_id.as_str(), a)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultidisciplinaryShareReport {
    /// Per class, members published in flagged journals over class size.
    pub shares: Vec<f64>,
}

pub fn multidisciplinary_share(
    classes: &DecileClasses,
    categories: &CategoryMap,
    corpus: &[ArticleRecord],
) -> MultidisciplinaryShareReport {
    let index = corpus_index(corpus);
    let shares = classes
        .classes
        .iter()
        .map(|class| {
            if class.members.is_empty() {
                return 0.0;
            }
            let flagged = class
                .members
                .iter()
                .filter(|id| {
                    index
                        .get(id.as_str())
                        .is_some_and(|a| categories.is_multidisciplinary(a.published_journal))
                })
                .count();
            flagged as f64 / class.members.len() as f64
        })
        .collect();
    MultidisciplinaryShareReport { shares }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArticleCategoryBreakdown {
    pub article_id: String,
    /// `(category, share)` by category name; shares sum to 1 when non-empty.
    pub shares: Vec<(String, f64)>,
    pub categorized_citations: usize,
    pub uncategorized_citations: usize,
}

impl ArticleCategoryBreakdown {
    pub fn distinct_categories(&self) -> usize {
        self.shares.len()
    }

    /// No categorized citation: the article cannot be analyzed.
    pub fn is_empty(&self) -> bool {
        self.categorized_citations == 0
    }
}

/// Each categorized citation carries weight 1, split equally over its
/// journal's categories; shares are normalized by the categorized count.
pub fn article_category_breakdown(article: &ArticleRecord, categories: &CategoryMap) -> ArticleCategoryBreakdown {
    let mut weights: BTreeMap<&str, f64> = BTreeMap::new();
    let mut categorized = 0usize;
    let mut uncategorized = 0usize;
    for &h in &article.cited_occurrences {
        match categories.get(h) {
            Categories::Categorized(set) => {
                categorized += 1;
                let w = 1.0 / set.len() as f64;
                for c in set {
                    *weights.entry(c.as_str()).or_default() += w;
                }
            }
            Categories::Uncategorized => uncategorized += 1,
        }
    }
    let shares = weights
        .into_iter()
        .map(|(c, w)| (c.to_string(), w / categorized as f64))
        .collect();
    ArticleCategoryBreakdown {
        article_id: article.article_id.clone(),
        shares,
        categorized_citations: categorized,
        uncategorized_citations: uncategorized,
    }
}

/// Distinct categories over all categorized journals an article cites.
pub fn distinct_cited_categories(article: &ArticleRecord, categories: &CategoryMap) -> usize {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for &h in &article.cited_occurrences {
        if let Categories::Categorized(set) = categories.get(h) {
            seen.extend(set.iter().map(String::as_str));
        }
    }
    seen.len()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategoryDiversityReport {
    /// Per class, mean distinct cited categories over member articles. Empty
    /// classes report 0.
    pub means: Vec<f64>,
}

/// Expects classes built on the non-multidisciplinary cohort (see
/// [`non_multidisciplinary`]).
pub fn category_diversity_by_decile(
    classes: &DecileClasses,
    categories: &CategoryMap,
    corpus: &[ArticleRecord],
) -> CategoryDiversityReport {
    let index = corpus_index(corpus);
    let means = classes
        .classes
        .iter()
        .map(|class| {
            if class.members.is_empty() {
                return 0.0;
            }
            let total: usize = class
                .members
                .iter()
                .filter_map(|id| index.get(id.as_str()))
                .map(|a| distinct_cited_categories(a, categories))
                .sum();
            total as f64 / class.members.len() as f64
        })
        .collect();
    CategoryDiversityReport { means }
}

fn write_lines<I>(path: &Path, header: &str, lines: I) -> Result<()>
where
    I: IntoIterator<Item = String>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = (|| {
        writeln!(w, "{header}")?;
        for line in lines {
            writeln!(w, "{line}")?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

/// `class,lower,upper,size,multidisciplinary_share`.
pub fn write_decile_report(path: &Path, classes: &DecileClasses, shares: &MultidisciplinaryShareReport) -> Result<()> {
    write_lines(
        path,
        "class,lower,upper,size,multidisciplinary_share",
        classes.classes.iter().zip(&shares.shares).map(|(c, s)| {
            format!("{},{},{},{},{}", c.class, c.lower, c.upper, c.members.len(), s)
        }),
    )
}

/// `class,mean_distinct_categories`.
pub fn write_diversity_report(path: &Path, report: &CategoryDiversityReport) -> Result<()> {
    write_lines(
        path,
        "class,mean_distinct_categories",
        report.means.iter().enumerate().map(|(c, m)| format!("{},{}", c + 1, m)),
    )
}

/// `article_id,category,share`, one line per nonzero share.
pub fn write_breakdowns(path: &Path, breakdowns: &[ArticleCategoryBreakdown]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let res = (|| {
        w.write_record(["article_id", "category", "share"])?;
        for b in breakdowns {
            for (c, s) in &b.shares {
                w.write_record([b.article_id.as_str(), c.as_str(), s.to_string().as_str()])?;
            }
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(|e: csv::Error| Error::csv(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{JournalId, JournalRegistry};

    fn scored(id: &str, d: f64) -> ArticleDissimilarity {
        ArticleDissimilarity {
            article_id: id.into(),
            published_journal: JournalId(0),
            mean_dissimilarity: Some(d),
            matched_refs: 10,
            skipped_refs: 0,
            empty_publisher_profile: false,
        }
    }

    fn registry(names: &[&str]) -> JournalRegistry {
        let mut text = String::from("pub_year,article_id,citing_journal,cited_journal\n");
        for n in names {
            text.push_str(&format!("2010,x,{},{}\n", names[0], n));
        }
        crate::ingest::parse_citations_from(text.as_bytes(), Path::new("t"), &Default::default())
            .unwrap()
            .registry
    }

    #[test]
    fn histogram_single_and_edges() {
        let h = histogram(&[scored("a", 0.70)], 0.1).unwrap();
        assert_eq!(h.counts.len(), 10);
        assert_eq!(h.counts.iter().sum::<u64>(), 1);
        assert_eq!(h.counts[7], 1);
        assert_eq!(h.mode(), Some(7));

        let h = histogram(&[scored("a", 1.0), scored("b", 0.0), scored("c", 0.05)], 0.1).unwrap();
        assert_eq!(h.counts[9], 1);
        assert_eq!(h.counts[0], 2);

        let h = histogram(&[scored("a", 0.99)], 0.3).unwrap();
        assert_eq!(h.counts.len(), 4);
        assert_eq!(h.counts[3], 1);
        assert_eq!(h.bin_bounds(3).1, 1.0);

        assert!(histogram(&[], 0.0).is_err());
        assert!(histogram(&[], 1.5).is_err());
    }

    #[test]
    fn twenty_even_values_give_pairs() {
        let results: Vec<_> = (1..=20).map(|k| scored(&format!("a{k}"), k as f64 * 0.05)).collect();
        let classes = decile_classes(&results).unwrap();
        for (c, class) in classes.classes.iter().enumerate() {
            assert_eq!(class.members, vec![format!("a{}", 2 * c + 1), format!("a{}", 2 * c + 2)]);
        }
        assert_eq!(classes.classes[9].upper, 1.0);
    }

    #[test]
    fn ties_go_to_first_class() {
        let results: Vec<_> = (0..25).map(|k| scored(&format!("a{k}"), 0.4)).collect();
        let classes = decile_classes(&results).unwrap();
        assert_eq!(classes.classes[0].members.len(), 25);
        assert_eq!(classes.total_members(), 25);
    }

    #[test]
    fn too_few_articles() {
        let results: Vec<_> = (0..9).map(|k| scored(&format!("a{k}"), 0.1 * k as f64)).collect();
        assert!(matches!(decile_classes(&results), Err(Error::TooFewArticles(9))));
    }

    #[test]
    fn equal_split_breakdown() {
        let reg = registry(&["ja", "jab", "junk"]);
        let cats = CategoryMap::from_pairs([("ja", "A"), ("jab", "A"), ("jab", "B")], "multi", &reg);
        let article = ArticleRecord {
            article_id: "x".into(),
            pub_year: 2010,
            published_journal: reg.resolve("ja").unwrap(),
            cited_occurrences: vec![reg.resolve("ja").unwrap(), reg.resolve("jab").unwrap(), reg.resolve("junk").unwrap()],
            unmatched_refs: 0,
        };
        let b = article_category_breakdown(&article, &cats);
        assert_eq!(b.shares, vec![("a".to_string(), 0.75), ("b".to_string(), 0.25)]);
        assert_eq!(b.distinct_categories(), 2);
        assert_eq!(b.uncategorized_citations, 1);
        assert_eq!(distinct_cited_categories(&article, &cats), 2);

        let none = CategoryMap::from_pairs([], "multi", &reg);
        assert!(article_category_breakdown(&article, &none).is_empty());
    }

    #[test]
    fn single_category_breakdown() {
        let reg = registry(&["e1", "e2"]);
        let cats = CategoryMap::from_pairs([("e1", "Ecology"), ("e2", "Ecology")], "multi", &reg);
        let article = ArticleRecord {
            article_id: "x".into(),
            pub_year: 2010,
            published_journal: JournalId(0),
            cited_occurrences: vec![JournalId(0), JournalId(1), JournalId(1)],
            unmatched_refs: 0,
        };
        let b = article_category_breakdown(&article, &cats);
        assert_eq!(b.shares, vec![("ecology".to_string(), 1.0)]);
    }

    #[test]
    fn no_flagged_journals_gives_zero_shares() {
        let reg = registry(&["j"]);
        let cats = CategoryMap::from_pairs([], "multi", &reg);
        let results: Vec<_> = (0..10).map(|k| scored(&format!("a{k}"), 0.1 * k as f64)).collect();
        let corpus: Vec<_> = results
            .iter()
            .map(|r| ArticleRecord {
                article_id: r.article_id.clone(),
                pub_year: 2010,
                published_journal: JournalId(0),
                cited_occurrences: vec![JournalId(0)],
                unmatched_refs: 0,
            })
            .collect();
        let classes = decile_classes(&results).unwrap();
        let report = multidisciplinary_share(&classes, &cats, &corpus);
        assert_eq!(report.shares, vec![0.0; 10]);
        let diversity = category_diversity_by_decile(&classes, &cats, &corpus);
        assert_eq!(diversity.means, vec![0.0; 10]);
    }
}
