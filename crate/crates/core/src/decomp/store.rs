//! Model directories: a `model.txt` manifest plus one `.ten` file per
//! factor or core.
//!
//! ```text
//! kind=tt
//! ranks=1 2 3 2 1
//! shape=3 4 4 3
//! ```
//!
//! CP models store `weights.ten` and `factor_1.ten` ... `factor_N.ten`;
//! Tucker models `core.ten` and `factor_n.ten`; TT and TR models
//! `core_1.ten` ... `core_N.ten`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{cp_reconstruct, tr_reconstruct, tt_reconstruct, tucker_reconstruct};
use super::{CpModel, TrRing, TtTrain, TuckerModel};
use crate::error::{Error, Result};
use crate::io::{read_ten, write_ten};
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

pub const MANIFEST: &str = "model.txt";

#[derive(Clone, Debug, PartialEq)]
pub enum Model<T> {
    Cp(CpModel<T>),
    Tucker(TuckerModel<T>),
    Tt(TtTrain<T>),
    Tr(TrRing<T>),
}

impl<T: Scalar> Model<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Cp(_) => "cp",
            Model::Tucker(_) => "tucker",
            Model::Tt(_) => "tt",
            Model::Tr(_) => "tr",
        }
    }

    pub fn ranks(&self) -> Vec<usize> {
        match self {
            Model::Cp(m) => vec![m.rank()],
            Model::Tucker(m) => m.ranks(),
            Model::Tt(m) => m.ranks(),
            Model::Tr(m) => m.ranks(),
        }
    }

    pub fn extents(&self) -> Vec<usize> {
        match self {
            Model::Cp(m) => m.extents(),
            Model::Tucker(m) => m.extents(),
            Model::Tt(m) => m.extents(),
            Model::Tr(m) => m.extents(),
        }
    }

    pub fn reconstruct(&self) -> Result<DenseTensor<T>> {
        match self {
            Model::Cp(m) => cp_reconstruct(m),
            Model::Tucker(m) => tucker_reconstruct(m),
            Model::Tt(m) => tt_reconstruct(m),
            Model::Tr(m) => tr_reconstruct(m),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn save_model<T: Scalar>(dir: impl AsRef<Path>, model: &Model<T>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let numbered = |stem: &str, ts: &[DenseTensor<T>]| -> Result<()> {
        for (n, t) in ts.iter().enumerate() {
            write_ten(dir.join(format!("{stem}_{}.ten", n + 1)), t)?;
        }
        Ok(())
    };
    match model {
        Model::Cp(m) => {
            write_ten(dir.join("weights.ten"), &DenseTensor::vector(m.weights.clone())?)?;
            numbered("factor", &m.factors)?;
        }
        Model::Tucker(m) => {
            write_ten(dir.join("core.ten"), &m.core)?;
            numbered("factor", &m.factors)?;
        }
        Model::Tt(m) => numbered("core", &m.cores)?,
        Model::Tr(m) => numbered("core", &m.cores)?,
    }
    let manifest = format!(
        "kind={}\nranks={}\nshape={}\n",
        model.kind(),
        join(&model.ranks()),
        join(&model.extents())
    );
    let path = dir.join(MANIFEST);
    fs::write(&path, manifest).map_err(|e| io_err(&path, e))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<usize>> {
    v.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Model(format!("manifest entry '{key}' has bad value '{t}'")))
        })
        .collect()
}

pub fn load_model<T: Scalar>(dir: impl AsRef<Path>) -> Result<Model<T>> {
    let dir = dir.as_ref();
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let mut entries = BTreeMap::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Model(format!("manifest line {} is not key=value", ln + 1)))?;
        if entries.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(Error::Model(format!("manifest repeats key '{}'", k.trim())));
        }
    }
    let get = |k: &str| {
        entries
            .get(k)
            .ok_or_else(|| Error::Model(format!("manifest lacks '{k}'")))
    };
    let kind = get("kind")?.as_str();
    let ranks = parse_list("ranks", get("ranks")?)?;
    let shape = parse_list("shape", get("shape")?)?;
    if shape.is_empty() {
        return Err(Error::Model("manifest shape is empty".into()));
    }
    let order = shape.len();
    let numbered = |stem: &str| -> Result<Vec<DenseTensor<T>>> {
        (1..=order).map(|n| read_ten(dir.join(format!("{stem}_{n}.ten")))).collect()
    };
    let model = match kind {
        "cp" => {
            let w: DenseTensor<T> = read_ten(dir.join("weights.ten"))?;
            if w.order() != 1 {
                return Err(Error::Model("weights.ten must hold a vector".into()));
            }
            Model::Cp(CpModel::new(w.into_data(), numbered("factor")?)?)
        }
        "tucker" => Model::Tucker(TuckerModel::new(read_ten(dir.join("core.ten"))?, numbered("factor")?)?),
        "tt" => Model::Tt(TtTrain::new(numbered("core")?)?),
        "tr" => Model::Tr(TrRing::new(numbered("core")?)?),
        other => return Err(Error::Model(format!("unknown model kind '{other}'"))),
    };
    if model.ranks() != ranks {
        return Err(Error::Model(format!(
            "manifest ranks {ranks:?} disagree with stored ranks {:?}",
            model.ranks()
        )));
    }
    if model.extents() != shape {
        return Err(Error::Model(format!(
            "manifest shape {shape:?} disagrees with stored shape {:?}",
            model.extents()
        )));
    }
    Ok(model)
}
