use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::dhash::{dhash64, hash_distance};
use super::NearDupError;
use crate::imgcore::RasterImage;

/// Pre-filter deciding which image pairs are worth verifying.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CandidateFilter {
    /// Keep pairs whose vectors in the CSV have cosine ≥ the threshold.
    ExternalEmbeddings {
        path: PathBuf,
        cosine_threshold: f64,
    },
    /// Keep pairs whose difference hashes differ in at most this many bits.
    PerceptualHash {
        hamming_threshold: u32,
    },
    None,
}

impl CandidateFilter {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Self::ExternalEmbeddings {
                cosine_threshold, ..
            } if !(-1.0..=1.0).contains(cosine_threshold) => Err(format!(
                "cosine_threshold {cosine_threshold} outside [-1, 1]"
            )),
            Self::PerceptualHash { hamming_threshold } if *hamming_threshold > 64 => Err(format!(
                "hamming_threshold {hamming_threshold} outside [0, 64]"
            )),
            _ => Ok(()),
        }
    }
}

/// Reads `image_id,v0,v1,...` rows. A first row whose second field is not a
/// number is taken as a header.
pub fn read_embedding_vectors(path: &Path) -> Result<HashMap<String, Vec<f64>>, NearDupError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, 0, e))?;
    let mut out = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, i + 1, e))?;
        let parse = |msg: String| NearDupError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            msg,
        };
        if rec.len() < 2 {
            return Err(parse("expected an image id and at least one value".into()));
        }
        let values: Result<Vec<f64>, _> = rec.iter().skip(1).map(str::parse::<f64>).collect();
        match values {
            Ok(v) => {
                out.insert(rec[0].to_string(), v);
            }
            Err(_) if i == 0 => continue,
            Err(e) => return Err(parse(e.to_string())),
        }
    }
    Ok(out)
}

fn csv_error(path: &Path, line: usize, e: csv::Error) -> NearDupError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => NearDupError::io(path, source),
        other => NearDupError::Parse {
            path: path.display().to_string(),
            line,
            msg: format!("{other:?}"),
        },
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}

/// Index pairs `(i, j)`, `i < j`, whose embedding cosine is at least `threshold`.
pub fn pairs_by_embedding(
    ids: &[&str],
    vectors: &HashMap<String, Vec<f64>>,
    threshold: f64,
) -> Result<Vec<(usize, usize)>, NearDupError> {
    let vs: Vec<&Vec<f64>> = ids
        .iter()
        .map(|id| {
            vectors
                .get(*id)
                .ok_or_else(|| NearDupError::MissingEmbedding(id.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            if cosine(vs[i], vs[j]) >= threshold {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

/// Index pairs `(i, j)`, `i < j`, of `corpus` that pass the filter.
pub fn candidate_pairs(
    corpus: &[(String, RasterImage)],
    filter: &CandidateFilter,
) -> Result<Vec<(usize, usize)>, NearDupError> {
    let n = corpus.len();
    match filter {
        CandidateFilter::None => Ok((0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect()),
        CandidateFilter::PerceptualHash { hamming_threshold } => {
            let hashes: Vec<u64> = corpus.iter().map(|(_, img)| dhash64(img)).collect();
            let mut out = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if hash_distance(hashes[i], hashes[j]) <= *hamming_threshold {
                        out.push((i, j));
                    }
                }
            }
            Ok(out)
        }
        CandidateFilter::ExternalEmbeddings {
            path,
            cosine_threshold,
        } => {
            let vectors = read_embedding_vectors(path)?;
            let ids: Vec<&str> = corpus.iter().map(|(id, _)| id.as_str()).collect();
            pairs_by_embedding(&ids, &vectors, *cosine_threshold)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn corpus(n: usize) -> Vec<(String, RasterImage)> {
        (0..n)
            .map(|i| {
                (
                    format!("i{i}"),
                    RasterImage::from_fn(40, 40, |x, y| ((x * (i + 1) + y) % 256) as u8),
                )
            })
            .collect()
    }

    #[test]
    fn none_mode_is_all_pairs() {
        assert_eq!(
            candidate_pairs(&corpus(3), &CandidateFilter::None).unwrap(),
            vec![(0, 1), (0, 2), (1, 2)]
        );
    }

    #[test]
    fn cosine_filter() {
        let vectors: HashMap<String, Vec<f64>> = [
            ("a".to_string(), vec![1.0, 0.0]),
            ("b".to_string(), vec![1.0, 0.0]),
            ("c".to_string(), vec![0.0, 1.0]),
        ]
        .into();
        assert_eq!(
            pairs_by_embedding(&["a", "b", "c"], &vectors, 0.8).unwrap(),
            vec![(0, 1)]
        );
        assert!(matches!(
            pairs_by_embedding(&["a", "zz"], &vectors, 0.8),
            Err(NearDupError::MissingEmbedding(id)) if id == "zz"
        ));
    }

    #[test]
    fn embedding_csv_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("emb.csv");
        let mut f = std::fs::File::create(&p).unwrap();
        writeln!(f, "image_id,v0,v1\ni0,1,0\ni1,0.9,0.1\ni2,0,1").unwrap();
        let filter = CandidateFilter::ExternalEmbeddings {
            path: p,
            cosine_threshold: 0.8,
        };
        assert_eq!(candidate_pairs(&corpus(3), &filter).unwrap(), vec![(0, 1)]);
    }

    #[test]
    fn bad_values_report_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("emb.csv");
        std::fs::write(&p, "i0,1,0\ni1,x,0\n").unwrap();
        assert!(matches!(
            read_embedding_vectors(&p),
            Err(NearDupError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn hash_filter_keeps_identical() {
        let mut c = corpus(2);
        c.push(("dup".into(), c[0].1.clone()));
        let pairs = candidate_pairs(
            &c,
            &CandidateFilter::PerceptualHash {
                hamming_threshold: 0,
            },
        )
        .unwrap();
        assert!(pairs.contains(&(0, 2)));
    }

    #[test]
    fn validation() {
        assert!(CandidateFilter::PerceptualHash {
            hamming_threshold: 65
        }
        .validate()
        .is_err());
        assert!(CandidateFilter::ExternalEmbeddings {
            path: "x".into(),
            cosine_threshold: 1.5
        }
        .validate()
        .is_err());
        assert!(CandidateFilter::None.validate().is_ok());
    }
}
