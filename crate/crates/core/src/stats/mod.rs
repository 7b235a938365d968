//! Exploratory statistics and t-test-based tag selection.

pub mod dist;

use std::collections::{BTreeMap, HashMap};

use crate::corpus::{common_word_count, PairExample};
use crate::error::{Error, Result};
use crate::features::TagCountVector;
use crate::tagset::TagSet;

/// Result of a two-sample t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t_stat: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Per-tag t-test report row.
#[derive(Debug, Clone, PartialEq)]
pub struct TTestResult {
    pub tag: String,
    pub t_stat: f64,
    pub dof: f64,
    pub p_value: f64,
    pub mean_linked: f64,
    pub mean_unlinked: f64,
}

/// Exact (label-0, label-1) counts. Every pair must be labeled.
pub fn label_distribution(pairs: &[PairExample]) -> Result<(u64, u64)> {
    let mut zero = 0u64;
    let mut one = 0u64;
    for pair in pairs {
        match pair.label {
            Some(0) => zero += 1,
            Some(1) => one += 1,
            Some(other) => return Err(Error::data(format!("label {other} not in {{0,1}}"))),
            None => return Err(Error::data("unlabeled pair in label distribution")),
        }
    }
    Ok((zero, one))
}

/// Histogram of common-word counts over the label-1 pairs: bucket lower
/// bound -> number of pairs whose count falls in [bound, bound + width).
pub fn common_word_histogram(
    pairs: &[PairExample],
    node_tokens: &HashMap<u64, Vec<String>>,
    bucket_width: u64,
) -> Result<BTreeMap<u64, u64>> {
    common_word_histogram_with(pairs, node_tokens, bucket_width, common_word_count)
}

/// Histogram variant with a pluggable counter (e.g. the multiset overlap).
pub fn common_word_histogram_with(
    pairs: &[PairExample],
    node_tokens: &HashMap<u64, Vec<String>>,
    bucket_width: u64,
    counter: fn(&[&str], &[&str]) -> usize,
) -> Result<BTreeMap<u64, u64>> {
    if bucket_width == 0 {
        return Err(Error::data("bucket width must be positive"));
    }
    let mut hist = BTreeMap::new();
    for pair in pairs {
        let label = pair
            .label
            .ok_or_else(|| Error::data("unlabeled pair in histogram input"))?;
        if label != 1 {
            continue;
        }
        let u = node_tokens
            .get(&pair.u)
            .ok_or_else(|| Error::data(format!("no tokens for node {}", pair.u)))?;
        let v = node_tokens
            .get(&pair.v)
            .ok_or_else(|| Error::data(format!("no tokens for node {}", pair.v)))?;
        let u_refs: Vec<&str> = u.iter().map(String::as_str).collect();
        let v_refs: Vec<&str> = v.iter().map(String::as_str).collect();
        let count = counter(&u_refs, &v_refs) as u64;
        let bucket = (count / bucket_width) * bucket_width;
        *hist.entry(bucket).or_insert(0) += 1;
    }
    Ok(hist)
}

/// Per-tag totals over the label-1 pairs, aligned to tagset order.
///
/// Unweighted: the number of linked pairs in which both endpoints carry the
/// tag. Weighted: the sum over linked pairs of the matched occurrence count
/// (min of the two endpoint counts).
pub fn tag_appearance_totals(
    pairs: &[PairExample],
    vectors: &HashMap<u64, TagCountVector>,
    tagset: &TagSet,
    weighted: bool,
) -> Result<Vec<u64>> {
    let mut totals = vec![0u64; tagset.len()];
    for pair in pairs {
        let label = pair
            .label
            .ok_or_else(|| Error::data("unlabeled pair in tag totals input"))?;
        if label != 1 {
            continue;
        }
        let u = vectors
            .get(&pair.u)
            .ok_or_else(|| Error::data(format!("no tag-count vector for node {}", pair.u)))?;
        let v = vectors
            .get(&pair.v)
            .ok_or_else(|| Error::data(format!("no tag-count vector for node {}", pair.v)))?;
        for (t, total) in totals.iter_mut().enumerate() {
            let matched = u.count(t).min(v.count(t));
            if weighted {
                *total += matched;
            } else if matched > 0 {
                *total += 1;
            }
        }
    }
    Ok(totals)
}

fn mean_and_sample_variance(sample: &[f64]) -> (f64, f64) {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let ss: f64 = sample.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Welch's unequal-variance two-sample t-test with a two-sided p-value.
///
/// Degenerate inputs (both sample variances zero) yield t = 0, p = 1 for
/// equal means and a signed-infinity t with p = 0 otherwise, with the
/// declared dof n_a + n_b - 2 in both cases.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::data(format!(
            "t-test needs at least 2 values per sample (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    let (mean_a, var_a) = mean_and_sample_variance(a);
    let (mean_b, var_b) = mean_and_sample_variance(b);
    let n_a = a.len() as f64;
    let n_b = b.len() as f64;
    if var_a == 0.0 && var_b == 0.0 {
        let dof = n_a + n_b - 2.0;
        return Ok(if mean_a == mean_b {
            WelchTest { t_stat: 0.0, dof, p_value: 1.0 }
        } else {
            let t_stat = if mean_a > mean_b { f64::INFINITY } else { f64::NEG_INFINITY };
            WelchTest { t_stat, dof, p_value: 0.0 }
        });
    }
    let sa = var_a / n_a;
    let sb = var_b / n_b;
    let t_stat = (mean_a - mean_b) / (sa + sb).sqrt();
    let dof = (sa + sb) * (sa + sb) / (sa * sa / (n_a - 1.0) + sb * sb / (n_b - 1.0));
    let p_value = dist::student_t_two_sided_p(t_stat, dof);
    Ok(WelchTest { t_stat, dof, p_value })
}

/// Pooled-variance (Student's) two-sample t-test. Available behind the same
/// degenerate conventions as [`welch_t_test`]; Welch is the default
/// throughout the pipeline.
pub fn pooled_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::data(format!(
            "t-test needs at least 2 values per sample (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    let (mean_a, var_a) = mean_and_sample_variance(a);
    let (mean_b, var_b) = mean_and_sample_variance(b);
    let n_a = a.len() as f64;
    let n_b = b.len() as f64;
    let dof = n_a + n_b - 2.0;
    if var_a == 0.0 && var_b == 0.0 {
        return Ok(if mean_a == mean_b {
            WelchTest { t_stat: 0.0, dof, p_value: 1.0 }
        } else {
            let t_stat = if mean_a > mean_b { f64::INFINITY } else { f64::NEG_INFINITY };
            WelchTest { t_stat, dof, p_value: 0.0 }
        });
    }
    let pooled = ((n_a - 1.0) * var_a + (n_b - 1.0) * var_b) / dof;
    let t_stat = (mean_a - mean_b) / (pooled * (1.0 / n_a + 1.0 / n_b)).sqrt();
    let p_value = dist::student_t_two_sided_p(t_stat, dof);
    Ok(WelchTest { t_stat, dof, p_value })
}

/// One sample vector per tag.
type PerTagSamples = Vec<Vec<f64>>;

/// Split labeled pairs into per-tag matched-count samples: for each tag, the
/// min of the endpoint counts over the linked pairs and over the unlinked
/// pairs.
fn per_tag_samples(
    pairs: &[PairExample],
    vectors: &HashMap<u64, TagCountVector>,
    tagset: &TagSet,
) -> Result<(PerTagSamples, PerTagSamples)> {
    let mut linked: PerTagSamples = vec![Vec::new(); tagset.len()];
    let mut unlinked: PerTagSamples = vec![Vec::new(); tagset.len()];
    for pair in pairs {
        let label = pair
            .label
            .ok_or_else(|| Error::data("unlabeled pair in tag selection input"))?;
        let u = vectors
            .get(&pair.u)
            .ok_or_else(|| Error::data(format!("no tag-count vector for node {}", pair.u)))?;
        let v = vectors
            .get(&pair.v)
            .ok_or_else(|| Error::data(format!("no tag-count vector for node {}", pair.v)))?;
        let target = if label == 1 { &mut linked } else { &mut unlinked };
        for (t, samples) in target.iter_mut().enumerate() {
            samples.push(u.count(t).min(v.count(t)) as f64);
        }
    }
    Ok((linked, unlinked))
}

/// Per-tag Welch t-tests of linked vs unlinked matched counts. Returns the
/// tags with p < alpha ordered by ascending p-value (ties by tagset order),
/// plus the full per-tag report in tagset order.
pub fn select_tags(
    pairs: &[PairExample],
    vectors: &HashMap<u64, TagCountVector>,
    tagset: &TagSet,
    alpha: f64,
) -> Result<(Vec<String>, Vec<TTestResult>)> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::data(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let (linked, unlinked) = per_tag_samples(pairs, vectors, tagset)?;
    let n_linked = linked.first().map_or(0, Vec::len);
    let n_unlinked = unlinked.first().map_or(0, Vec::len);
    if n_linked < 2 || n_unlinked < 2 {
        return Err(Error::data(format!(
            "tag selection needs at least 2 pairs per label group (got {n_linked} linked, {n_unlinked} unlinked)"
        )));
    }
    let mut report = Vec::with_capacity(tagset.len());
    for t in 0..tagset.len() {
        let test = welch_t_test(&linked[t], &unlinked[t])?;
        report.push(TTestResult {
            tag: tagset.label(t).to_string(),
            t_stat: test.t_stat,
            dof: test.dof,
            p_value: test.p_value,
            mean_linked: linked[t].iter().sum::<f64>() / n_linked as f64,
            mean_unlinked: unlinked[t].iter().sum::<f64>() / n_unlinked as f64,
        });
    }
    let mut selected: Vec<usize> = (0..tagset.len())
        .filter(|&t| report[t].p_value < alpha)
        .collect();
    selected.sort_by(|&x, &y| {
        report[x]
            .p_value
            .partial_cmp(&report[y].p_value)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.cmp(&y))
    });
    let selected = selected.into_iter().map(|t| tagset.label(t).to_string()).collect();
    Ok((selected, report))
}

/// Set-level variant: one t-test on the per-pair sum of matched counts over
/// a candidate tag set.
pub fn set_level_t_test(
    pairs: &[PairExample],
    vectors: &HashMap<u64, TagCountVector>,
    tagset: &TagSet,
    tags: &[String],
) -> Result<WelchTest> {
    let indices = tagset.resolve(tags)?;
    let mut linked = Vec::new();
    let mut unlinked = Vec::new();
    for pair in pairs {
        let label = pair
            .label
            .ok_or_else(|| Error::data("unlabeled pair in set-level test input"))?;
        let u = vectors
            .get(&pair.u)
            .ok_or_else(|| Error::data(format!("no tag-count vector for node {}", pair.u)))?;
        let v = vectors
            .get(&pair.v)
            .ok_or_else(|| Error::data(format!("no tag-count vector for node {}", pair.v)))?;
        let sum: u64 = indices.iter().map(|&t| u.count(t).min(v.count(t))).sum();
        if label == 1 {
            linked.push(sum as f64);
        } else {
            unlinked.push(sum as f64);
        }
    }
    welch_t_test(&linked, &unlinked)
}

/// The k tags with the largest totals, descending, ties broken by tagset
/// order. When fewer than k tags have nonzero totals, all nonzero tags are
/// returned and the flag is set.
pub fn top_k_by_weight(
    totals: &[u64],
    tagset: &TagSet,
    k: usize,
) -> Result<(Vec<String>, bool)> {
    if k == 0 {
        return Err(Error::data("k must be at least 1"));
    }
    if totals.len() != tagset.len() {
        return Err(Error::data(format!(
            "totals length {} does not match tagset size {}",
            totals.len(),
            tagset.len()
        )));
    }
    let mut order: Vec<usize> = (0..totals.len()).filter(|&t| totals[t] > 0).collect();
    order.sort_by(|&x, &y| totals[y].cmp(&totals[x]).then(x.cmp(&y)));
    let truncated = order.len() < k;
    order.truncate(k);
    Ok((
        order.into_iter().map(|t| tagset.label(t).to_string()).collect(),
        truncated,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tcv(pairs: &[(&str, u64)], tagset: &TagSet) -> TagCountVector {
        let mut counts = vec![0u64; tagset.len()];
        for (tag, c) in pairs {
            counts[tagset.position(tag).unwrap()] = *c;
        }
        TagCountVector::from_counts(counts)
    }

    fn lp(u: u64, v: u64, label: u8) -> PairExample {
        PairExample { u, v, label: Some(label) }
    }

    #[test]
    fn label_distribution_counts() {
        assert_eq!(label_distribution(&[]).unwrap(), (0, 0));
        let pairs = vec![lp(1, 2, 1), lp(3, 4, 1), lp(5, 6, 0)];
        assert_eq!(label_distribution(&pairs).unwrap(), (1, 2));
        let unlabeled = vec![PairExample { u: 1, v: 2, label: None }];
        assert!(label_distribution(&unlabeled).is_err());
    }

    #[test]
    fn histogram_buckets_label1_only() {
        let mut tokens = HashMap::new();
        tokens.insert(1, vec!["a".to_string(), "b".into(), "c".into(), "d".into(), "e".into()]);
        tokens.insert(2, vec!["a".to_string(), "b".into(), "c".into(), "d".into(), "e".into()]);
        tokens.insert(3, vec!["x".to_string()]);
        let pairs = vec![lp(1, 2, 1), lp(1, 3, 0)];
        let hist = common_word_histogram(&pairs, &tokens, 10).unwrap();
        assert_eq!(hist.get(&0), Some(&1));
        assert_eq!(hist.values().sum::<u64>(), 1);

        let all_zero = vec![lp(1, 3, 0)];
        assert!(common_word_histogram(&all_zero, &tokens, 10).unwrap().is_empty());
        assert!(common_word_histogram(&pairs, &tokens, 0).is_err());
    }

    #[test]
    fn tag_totals_weighted_and_not() {
        let ts = TagSet::penn_treebank();
        let mut vectors = HashMap::new();
        vectors.insert(1, tcv(&[("NN", 3)], &ts));
        vectors.insert(2, tcv(&[("NN", 2)], &ts));
        let pairs = vec![lp(1, 2, 1)];
        let unweighted = tag_appearance_totals(&pairs, &vectors, &ts, false).unwrap();
        let weighted = tag_appearance_totals(&pairs, &vectors, &ts, true).unwrap();
        let nn = ts.position("NN").unwrap();
        assert_eq!(unweighted[nn], 1);
        assert_eq!(weighted[nn], 2);
        assert!(unweighted.iter().enumerate().all(|(t, &c)| t == nn || c == 0));

        let none_linked = vec![lp(1, 2, 0)];
        let totals = tag_appearance_totals(&none_linked, &vectors, &ts, true).unwrap();
        assert!(totals.iter().all(|&c| c == 0));
    }

    #[test]
    fn weighted_totals_dominate_unweighted() {
        // min >= 1 whenever min > 0, so the weighted total dominates the
        // pair count tag by tag. Checked over small random instances.
        let ts = TagSet::new(["A", "B", "C"]).unwrap();
        let mut rng = crate::rng::Rng::seed_from(17);
        for _ in 0..20 {
            let mut vectors = HashMap::new();
            for id in 0..10u64 {
                let counts: Vec<u64> =
                    (0..3).map(|_| rng.gen_range(4) as u64).collect();
                vectors.insert(id, TagCountVector::from_counts(counts));
            }
            let pairs: Vec<PairExample> = (0..5)
                .map(|k| lp(2 * k, 2 * k + 1, (rng.next_u64() & 1) as u8))
                .collect();
            let unweighted = tag_appearance_totals(&pairs, &vectors, &ts, false).unwrap();
            let weighted = tag_appearance_totals(&pairs, &vectors, &ts, true).unwrap();
            for (w, u) in weighted.iter().zip(&unweighted) {
                assert!(w >= u, "weighted {w} < unweighted {u}");
            }
        }
    }

    #[test]
    fn set_level_test_sums_matched_counts() {
        let ts = TagSet::new(["NN", "VB", "DT"]).unwrap();
        let mut vectors = HashMap::new();
        // Linked pairs share large NN+VB mass; unlinked do not. DT inert.
        for id in 0..12u64 {
            let heavy = id % 4 < 2;
            let counts = if heavy { vec![9 + id % 3, 7, 1] } else { vec![1, 0, 1] };
            vectors.insert(id, TagCountVector::from_counts(counts));
        }
        let pairs = vec![
            lp(0, 1, 1),
            lp(4, 5, 1),
            lp(8, 9, 1),
            lp(2, 3, 0),
            lp(6, 7, 0),
            lp(10, 11, 0),
        ];
        let tags: Vec<String> = ["NN", "VB"].iter().map(|s| s.to_string()).collect();
        let test = set_level_t_test(&pairs, &vectors, &ts, &tags).unwrap();
        assert!(test.t_stat > 0.0, "{}", test.t_stat);
        assert!(test.p_value < 0.05, "{}", test.p_value);
        // An inert tag set yields no signal.
        let inert = set_level_t_test(&pairs, &vectors, &ts, &["DT".to_string()]).unwrap();
        assert!(inert.p_value > 0.5, "{}", inert.p_value);
        assert!(set_level_t_test(&pairs, &vectors, &ts, &["XX".to_string()]).is_err());
    }

    #[test]
    fn welch_worked_example() {
        let test = welch_t_test(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!((test.t_stat - (-1.224744871391589)).abs() < 1e-12, "{}", test.t_stat);
        assert_eq!(test.dof, 4.0);
        assert!((test.p_value - 0.288).abs() < 5e-4, "{}", test.p_value);
    }

    #[test]
    fn welch_identical_samples() {
        let test = welch_t_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(test.t_stat, 0.0);
        assert_eq!(test.p_value, 1.0);
    }

    #[test]
    fn welch_swap_antisymmetry() {
        let a = [1.0, 2.0, 5.0, 3.0];
        let b = [4.0, 4.5, 6.0];
        let ab = welch_t_test(&a, &b).unwrap();
        let ba = welch_t_test(&b, &a).unwrap();
        assert_eq!(ab.t_stat, -ba.t_stat);
        assert_eq!(ab.p_value, ba.p_value);
        assert_eq!(ab.dof, ba.dof);
    }

    #[test]
    fn welch_degenerate_cases() {
        let equal = welch_t_test(&[2.0, 2.0], &[2.0, 2.0]).unwrap();
        assert_eq!((equal.t_stat, equal.dof, equal.p_value), (0.0, 2.0, 1.0));
        let unequal = welch_t_test(&[3.0, 3.0], &[2.0, 2.0]).unwrap();
        assert_eq!(unequal.t_stat, f64::INFINITY);
        assert_eq!(unequal.p_value, 0.0);
        let negated = welch_t_test(&[2.0, 2.0], &[3.0, 3.0]).unwrap();
        assert_eq!(negated.t_stat, f64::NEG_INFINITY);
    }

    #[test]
    fn welch_rejects_small_samples() {
        assert!(welch_t_test(&[1.0], &[1.0, 2.0]).is_err());
        assert!(welch_t_test(&[1.0, 2.0], &[]).is_err());
    }

    #[test]
    fn pooled_matches_welch_for_equal_variances() {
        // With equal sample sizes and equal variances the two statistics
        // coincide.
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 3.0, 4.0];
        let w = welch_t_test(&a, &b).unwrap();
        let p = pooled_t_test(&a, &b).unwrap();
        assert!((w.t_stat - p.t_stat).abs() < 1e-12);
        assert_eq!(p.dof, 4.0);
    }

    #[test]
    fn top_k_ordering_and_ties() {
        let ts = TagSet::new(["DT", "NN", "VB"]).unwrap();
        let totals = vec![5u64, 10, 5];
        let (top, truncated) = top_k_by_weight(&totals, &ts, 2).unwrap();
        assert_eq!(top, vec!["NN".to_string(), "DT".to_string()]);
        assert!(!truncated);
        let (top1, _) = top_k_by_weight(&totals, &ts, 1).unwrap();
        assert_eq!(top1, vec!["NN".to_string()]);
        let (all, _) = top_k_by_weight(&totals, &ts, 3).unwrap();
        assert_eq!(all, vec!["NN".to_string(), "DT".to_string(), "VB".to_string()]);
        let (nonzero, truncated) = top_k_by_weight(&[0, 3, 0], &ts, 3).unwrap();
        assert_eq!(nonzero, vec!["NN".to_string()]);
        assert!(truncated);
        assert!(top_k_by_weight(&totals, &ts, 0).is_err());
    }

    #[test]
    fn select_tags_requires_two_per_group() {
        let ts = TagSet::penn_treebank();
        let mut vectors = HashMap::new();
        vectors.insert(1, tcv(&[("NN", 1)], &ts));
        vectors.insert(2, tcv(&[("NN", 1)], &ts));
        let pairs = vec![lp(1, 2, 1)];
        assert!(select_tags(&pairs, &vectors, &ts, 0.05).is_err());
    }

    #[test]
    fn select_tags_alpha_monotone() {
        let ts = TagSet::new(["NN", "VB", "DT"]).unwrap();
        let mut vectors = HashMap::new();
        // Linked pairs share heavy NN counts; unlinked do not. DT constant.
        for id in 0..8u64 {
            let nn = if id < 4 { 10 + id } else { 1 };
            let mut counts = vec![0u64; 3];
            counts[0] = nn;
            counts[1] = id % 3;
            counts[2] = 2;
            vectors.insert(id, TagCountVector::from_counts(counts));
        }
        let pairs = vec![
            lp(0, 1, 1),
            lp(2, 3, 1),
            lp(0, 2, 1),
            lp(4, 5, 0),
            lp(6, 7, 0),
            lp(4, 6, 0),
        ];
        let (tight, _) = select_tags(&pairs, &vectors, &ts, 0.01).unwrap();
        let (loose, _) = select_tags(&pairs, &vectors, &ts, 0.9999).unwrap();
        for tag in &tight {
            assert!(loose.contains(tag), "{tag} lost when alpha grew");
        }
        assert!(loose.len() >= tight.len());
    }
}
