//! On-disk formats.
//!
//! * `.ndlm`: the magic bytes `NDLM`, `u32` rows, `u32` cols, then
//!   `rows * cols` `f64` values in column-major order, all little-endian.
//! * Dense CSV: one line per matrix row.
//! * Sparse CSV: a `# noodl-sparse v1 m=<m> p=<p>` line, the header
//!   `col,row,value`, then one triplet per stored entry.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2, ShapeBuilder};

use crate::error::{NoodlError, Result};
use crate::model::{SparseCoefficientBatch, SparseVector};

pub const MATRIX_MAGIC: &[u8; 4] = b"NDLM";
pub const SPARSE_SCHEMA: &str = "# noodl-sparse v1";

pub fn encode_matrix<W: Write>(mut w: W, mat: ArrayView2<'_, f64>) -> std::io::Result<()> {
    let (rows, cols) = mat.dim();
    let too_big =
        |d: usize| std::io::Error::new(std::io::ErrorKind::InvalidInput, format!("dimension {d} exceeds u32"));
    let rows32 = u32::try_from(rows).map_err(|_| too_big(rows))?;
    let cols32 = u32::try_from(cols).map_err(|_| too_big(cols))?;
    w.write_all(MATRIX_MAGIC)?;
    w.write_all(&rows32.to_le_bytes())?;
    w.write_all(&cols32.to_le_bytes())?;
    for col in mat.columns() {
        for v in col {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn decode_matrix<R: Read>(mut r: R) -> std::result::Result<Array2<f64>, String> {
    let mut head = [0u8; 12];
    r.read_exact(&mut head).map_err(|e| format!("short header: {e}"))?;
    if &head[..4] != MATRIX_MAGIC {
        return Err("bad magic".into());
    }
    let rows = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload).map_err(|e| e.to_string())?;
    if payload.len() != rows * cols * 8 {
        return Err(format!(
            "payload has {} bytes, expected {} for {rows}x{cols}",
            payload.len(),
            rows * cols * 8
        ));
    }
    let data: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Array2::from_shape_vec((rows, cols).f(), data).map_err(|e| e.to_string())
}

pub fn write_matrix(path: &Path, mat: ArrayView2<'_, f64>) -> Result<()> {
    let file = File::create(path).map_err(|e| NoodlError::io(path, e))?;
    let mut w = BufWriter::new(file);
    encode_matrix(&mut w, mat)
        .and_then(|_| w.flush())
        .map_err(|e| NoodlError::io(path, e))
}

pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    let file = File::open(path).map_err(|e| NoodlError::io(path, e))?;
    decode_matrix(BufReader::new(file)).map_err(|reason| NoodlError::Format {
        path: path.to_owned(),
        reason,
    })
}

pub fn write_matrix_csv(path: &Path, mat: ArrayView2<'_, f64>) -> Result<()> {
    let file = File::create(path).map_err(|e| NoodlError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res: std::io::Result<()> = (|| {
        for row in mat.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()
    })();
    res.map_err(|e| NoodlError::io(path, e))
}

pub fn write_sparse_csv(path: &Path, x: &SparseCoefficientBatch) -> Result<()> {
    let file = File::create(path).map_err(|e| NoodlError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res: std::io::Result<()> = (|| {
        writeln!(w, "{SPARSE_SCHEMA} m={} p={}", x.m(), x.p())?;
        writeln!(w, "col,row,value")?;
        for (j, col) in x.columns().iter().enumerate() {
            for (i, v) in col.iter() {
                writeln!(w, "{j},{i},{v}")?;
            }
        }
        w.flush()
    })();
    res.map_err(|e| NoodlError::io(path, e))
}

pub fn read_sparse_csv(path: &Path) -> Result<SparseCoefficientBatch> {
    let bad = |reason: String| NoodlError::Format {
        path: path.to_owned(),
        reason,
    };
    let file = File::open(path).map_err(|e| NoodlError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let mut next = || -> Result<Option<String>> { lines.next().transpose().map_err(|e| NoodlError::io(path, e)) };

    let schema = next()?.ok_or_else(|| bad("empty file".into()))?;
    let dims = schema
        .strip_prefix(SPARSE_SCHEMA)
        .ok_or_else(|| bad(format!("unknown schema line {schema:?}")))?;
    let (mut m, mut p) = (None, None);
    for tok in dims.split_whitespace() {
        match tok.split_once('=') {
            Some(("m", v)) => m = v.parse::<usize>().ok(),
            Some(("p", v)) => p = v.parse::<usize>().ok(),
            _ => {}
        }
    }
    let (m, p) = m.zip(p).ok_or_else(|| bad("schema line lacks m= and p=".into()))?;
    if next()?.as_deref() != Some("col,row,value") {
        return Err(bad("missing col,row,value header".into()));
    }
    let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p];
    while let Some(line) = next()? {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let parsed = (|| {
            let j = it.next()?.trim().parse::<usize>().ok()?;
            let i = it.next()?.trim().parse::<usize>().ok()?;
            let v = it.next()?.trim().parse::<f64>().ok()?;
            Some((j, i, v))
        })();
        let (j, i, v) = parsed.ok_or_else(|| bad(format!("malformed triplet {line:?}")))?;
        if j >= p || i >= m {
            return Err(bad(format!("triplet ({j}, {i}) outside {m}x{p}")));
        }
        entries[j].push((i, v));
    }
    let cols = entries
        .into_iter()
        .map(|mut e| {
            e.sort_unstable_by_key(|t| t.0);
            let (idx, val): (Vec<usize>, Vec<f64>) = e.into_iter().unzip();
            SparseVector::new(m, idx, val)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| bad(e.to_string()))?;
    SparseCoefficientBatch::new(m, cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_batch, generate_ground_truth, GenerativeConfig};
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let mat = ndarray::array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let mut buf = Vec::new();
        encode_matrix(&mut buf, mat.view()).unwrap();
        assert_eq!(&buf[..4], b"NDLM");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 2);
        // Column-major: first payload values are the first column.
        assert_eq!(f64::from_le_bytes(buf[12..20].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(buf[20..28].try_into().unwrap()), 3.0);
        assert_eq!(buf.len(), 12 + 6 * 8);
    }

    #[test]
    fn truncated_payload_rejected() {
        let mat = ndarray::array![[1.0, 2.0]];
        let mut buf = Vec::new();
        encode_matrix(&mut buf, mat.view()).unwrap();
        buf.pop();
        assert!(decode_matrix(&buf[..]).is_err());
        assert!(decode_matrix(&b"XXXX\0\0\0\0\0\0\0\0"[..]).is_err());
    }

    #[test]
    fn sparse_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let cfg = GenerativeConfig::standard(10, 20, 3);
        let a = generate_ground_truth(10, 20, 1).unwrap();
        let x = generate_batch(&a, 7, &cfg, 2).unwrap().x_star.unwrap();
        write_sparse_csv(&path, &x).unwrap();
        assert_eq!(read_sparse_csv(&path).unwrap(), x);
    }

    #[test]
    fn dense_csv_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        write_matrix_csv(&path, ndarray::array![[1.0, -0.5], [2.0, 0.25]].view()).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "1,-0.5\n2,0.25\n");
    }

    proptest! {
        #[test]
        fn binary_round_trip(rows in 0usize..6, cols in 0usize..6, seed in any::<u64>()) {
            let mut state = seed;
            let mat = Array2::from_shape_fn((rows, cols), |_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                f64::from_bits(state >> 2)
            });
            let mut buf = Vec::new();
            encode_matrix(&mut buf, mat.view()).unwrap();
            let back = decode_matrix(&buf[..]).unwrap();
            prop_assert_eq!(back.dim(), mat.dim());
            for (a, b) in back.iter().zip(mat.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
