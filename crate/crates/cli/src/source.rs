//! Resolution of channel documents and built-in names into graphs.

use nszcap::builtin::{self, BUILTINS};
use nszcap::graph::cq_from_states;
use nszcap::matrix::{ket_bra, DEFAULT_RANK_TOL};
use nszcap::{CqGraph, KrausChannel, NcGraph};

use crate::document::{from_json_matrix, ChannelDocument};
use crate::CliError;

/// A channel ready for the capacity programs.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub description: String,
    pub channel: Option<KrausChannel>,
    pub graph: NcGraph,
    /// Present when the input is known to be classical-quantum.
    pub cq: Option<CqGraph>,
}

impl Loaded {
    fn from_channel(description: String, channel: KrausChannel, cq: Option<CqGraph>) -> Result<Self, CliError> {
        let graph = NcGraph::from_channel(&channel, DEFAULT_RANK_TOL).map_err(CliError::from_core)?;
        Ok(Self { description, channel: Some(channel), graph, cq })
    }
}

/// Parses `NAME[:p1,p2,...]`.
pub fn parse_builtin_spec(spec: &str) -> Result<(String, Vec<f64>), CliError> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let params = rest
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("builtin '{name}': parameter '{s}' is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((name.to_string(), params))
}

fn param(name: &str, params: &[f64], idx: usize, default: Option<f64>) -> Result<f64, CliError> {
    match params.get(idx).copied().or(default) {
        Some(v) if v.is_finite() => Ok(v),
        _ => {
            let info = BUILTINS.iter().find(|b| b.name == name).map(|b| b.params).unwrap_or("?");
            Err(CliError::Input(format!("builtin '{name}' requires parameter {info}")))
        }
    }
}

fn count_param(name: &str, params: &[f64], default: Option<f64>) -> Result<usize, CliError> {
    let v = param(name, params, 0, default)?;
    if v < 1.0 || v.fract() != 0.0 || v > 64.0 {
        return Err(CliError::Input(format!("builtin '{name}': dimension {v} must be an integer in 1..=64")));
    }
    Ok(v as usize)
}

pub fn resolve_builtin(name: &str, params: &[f64]) -> Result<Loaded, CliError> {
    let max_params = match name {
        "prop11" => 0,
        _ => 1,
    };
    if params.len() > max_params {
        return Err(CliError::Input(format!("builtin '{name}' takes at most {max_params} parameter(s)")));
    }
    let core = CliError::from_core;
    match name {
        "identity" => {
            let d = count_param(name, params, Some(2.0))?;
            Loaded::from_channel(format!("identity({d})"), builtin::identity_channel(d), None)
        }
        "depolarizing" => {
            let d = count_param(name, params, Some(2.0))?;
            Loaded::from_channel(format!("depolarizing({d})"), builtin::depolarizing_channel(d), None)
        }
        "example4" => {
            let a = param(name, params, 0, None)?;
            let ch = builtin::example4_channel(a).map_err(core)?;
            let cq = builtin::example4_cq(a).map_err(core)?;
            Loaded::from_channel(format!("example4(alpha_sq={a})"), ch, Some(cq))
        }
        "amplitude-damping" => {
            let r = param(name, params, 0, None)?;
            Loaded::from_channel(format!("amplitude-damping(r={r})"), builtin::amplitude_damping(r).map_err(core)?, None)
        }
        "prop11" => Loaded::from_channel("prop11".into(), builtin::prop11_channel(), None),
        "delta" => {
            let ell = count_param(name, params, None)?;
            let cq = CqGraph::new((0..ell).map(|i| ket_bra(ell, i, i)).collect()).map_err(core)?;
            Loaded::from_channel(format!("delta({ell})"), builtin::classical_channel(ell).map_err(core)?, Some(cq))
        }
        _ => {
            let names: Vec<_> = BUILTINS.iter().map(|b| b.name).collect();
            Err(CliError::Input(format!("unknown builtin '{name}', expected one of: {}", names.join(", "))))
        }
    }
}

pub fn load_document(doc: &ChannelDocument) -> Result<Loaded, CliError> {
    match doc {
        ChannelDocument::Kraus { d_in, d_out, kraus } => {
            let ops = kraus
                .iter()
                .enumerate()
                .map(|(i, m)| from_json_matrix(&format!("kraus[{i}]"), m, *d_out, *d_in))
                .collect::<Result<Vec<_>, _>>()?;
            let ch = KrausChannel::new(*d_in, *d_out, ops).map_err(|e| CliError::Input(format!("kraus: {e}")))?;
            Loaded::from_channel(format!("kraus(d_in={d_in}, d_out={d_out}, ops={})", kraus.len()), ch, None)
        }
        ChannelDocument::Cq { outputs } => {
            let d = outputs.first().map(|m| m.len()).ok_or_else(|| CliError::Input("outputs: empty list".into()))?;
            let states = outputs
                .iter()
                .enumerate()
                .map(|(i, m)| from_json_matrix(&format!("outputs[{i}]"), m, d, d))
                .collect::<Result<Vec<_>, _>>()?;
            let cq = cq_from_states(&states, DEFAULT_RANK_TOL).map_err(|e| CliError::Input(format!("outputs: {e}")))?;
            Ok(Loaded {
                description: format!("cq(inputs={}, d_B={d})", outputs.len()),
                channel: None,
                graph: cq.to_ncgraph(),
                cq: Some(cq),
            })
        }
        ChannelDocument::Builtin { name, params } => resolve_builtin(name, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_specs() {
        assert_eq!(parse_builtin_spec("example4:0.75").unwrap(), ("example4".into(), vec![0.75]));
        assert_eq!(parse_builtin_spec("prop11").unwrap(), ("prop11".into(), vec![]));
        assert!(parse_builtin_spec("delta:x").is_err());
    }

    #[test]
    fn builtin_parameters_validated() {
        assert!(resolve_builtin("example4", &[]).is_err());
        assert!(resolve_builtin("example4", &[1.5]).is_err());
        assert!(resolve_builtin("delta", &[0.0]).is_err());
        assert!(resolve_builtin("delta", &[2.5]).is_err());
        assert!(resolve_builtin("prop11", &[1.0]).is_err());
        assert!(resolve_builtin("nope", &[]).is_err());
        let d = resolve_builtin("delta", &[3.0]).unwrap();
        assert_eq!(d.graph.dim(), 9);
        assert_eq!(d.cq.unwrap().num_inputs(), 3);
        assert_eq!(resolve_builtin("identity", &[]).unwrap().graph.d_a(), 2);
    }

    #[test]
    fn cq_document_loads() {
        let doc = ChannelDocument::Cq {
            outputs: vec![
                vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [0.0, 0.0]]],
                vec![vec![[0.5, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [0.5, 0.0]]],
            ],
        };
        let l = load_document(&doc).unwrap();
        assert_eq!(l.cq.as_ref().unwrap().num_inputs(), 2);
        assert_eq!((l.graph.d_a(), l.graph.d_b()), (2, 2));
    }
}
